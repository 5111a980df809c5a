//! Arithmetic in GF(p^k) as polynomials modulo a primitive polynomial, plus
//! Pohlig-Hellman discrete logarithms to the base `x`.

use std::collections::HashMap;

use super::primes::{factorize_power_minus_one, pow_mod};
use crate::error::{Result, ScraError};

/// Largest prime order for which a full lookup table of the subgroup is kept.
const FULL_TABLE_LIMIT: u128 = 1 << 16;
/// Upper bound on baby-step table size for large prime orders.
const MAX_BABY_STEPS: u128 = 1 << 22;

/// GF(p^k) with the monic modulus `x^k + c_{k-1} x^{k-1} + ... + c_0`.
///
/// Elements are coefficient vectors of length `k`, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionField {
    p: u64,
    k: usize,
    /// `c_0 .. c_{k-1}`; the leading coefficient is implicitly 1.
    modulus: Vec<u64>,
}

pub type Element = Vec<u64>;

impl ExtensionField {
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Self {
        let k = modulus.len();
        assert!(k >= 1 && p >= 2 && modulus.iter().all(|&c| c < p));
        ExtensionField { p, k, modulus }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Order of the multiplicative group, `p^k - 1`.
    pub fn group_order(&self) -> u128 {
        (self.p as u128).pow(self.k as u32) - 1
    }

    pub fn one(&self) -> Element {
        let mut e = vec![0; self.k];
        e[0] = 1;
        e
    }

    /// The class of `x + c`.
    pub fn x_plus(&self, c: u64) -> Element {
        let mut e = vec![0; self.k];
        e[0] = c % self.p;
        if self.k == 1 {
            e[0] = (e[0] + self.p - self.modulus[0]) % self.p;
        } else {
            e[1] = 1;
        }
        e
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Element {
        let (p, k) = (self.p as u128, self.k);
        let mut wide = vec![0u128; 2 * k - 1];
        if p < (1 << 32) {
            // k products below 2^64 each cannot overflow the accumulator.
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0 {
                    continue;
                }
                for (j, &bj) in b.iter().enumerate() {
                    wide[i + j] += ai as u128 * bj as u128;
                }
            }
            for w in wide.iter_mut() {
                *w %= p;
            }
        } else {
            for (i, &ai) in a.iter().enumerate() {
                for (j, &bj) in b.iter().enumerate() {
                    wide[i + j] = (wide[i + j] + (ai as u128 * bj as u128) % p) % p;
                }
            }
        }
        for d in (k..2 * k - 1).rev() {
            let c = wide[d];
            if c == 0 {
                continue;
            }
            // x^d = x^(d-k) * x^k and x^k = -sum c_i x^i.
            for (i, &fi) in self.modulus.iter().enumerate() {
                let t = (c * fi as u128) % p;
                wide[d - k + i] = (wide[d - k + i] + p - t) % p;
            }
        }
        wide.truncate(k);
        wide.into_iter().map(|w| w as u64).collect()
    }

    pub fn pow(&self, base: &[u64], mut exp: u128) -> Element {
        let mut acc = self.one();
        let mut b = base.to_vec();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            exp >>= 1;
            if exp > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }

    /// `x^e` reduced modulo the field polynomial.
    pub fn x_pow(&self, e: u128) -> Element {
        self.pow(&self.x_plus(0), e)
    }

    /// Injective packing of an element into an integer below `p^k`.
    pub fn pack(&self, e: &[u64]) -> u128 {
        e.iter().rev().fold(0u128, |acc, &c| acc * self.p as u128 + c as u128)
    }

    /// Searches monic degree-`k` polynomials over GF(p) in a fixed order and
    /// returns the first one for which `x` generates the multiplicative group.
    pub fn primitive(p: u64, k: usize) -> Result<Self> {
        let m = checked_group_order(p, k)?;
        let factors = factorize_power_minus_one(p as u128, k as u32);
        let total = (p as u128).pow(k as u32);
        for index in 0..total {
            let mut modulus = Vec::with_capacity(k);
            let mut rest = index;
            for _ in 0..k {
                modulus.push((rest % p as u128) as u64);
                rest /= p as u128;
            }
            if modulus[0] == 0 {
                continue;
            }
            let field = ExtensionField { p, k, modulus };
            if k >= 2 && field.has_root_in_base_field() {
                continue;
            }
            if field.x_has_full_order(m, &factors) {
                return Ok(field);
            }
        }
        Err(ScraError::integrity(format!("no primitive polynomial of degree {k} over GF({p}) found")))
    }

    fn has_root_in_base_field(&self) -> bool {
        let p = self.p as u128;
        (0..p).any(|t| {
            // Horner on x^k + c_{k-1} x^{k-1} + ... + c_0.
            let v = self.modulus.iter().rev().fold(1u128, |acc, &c| (acc * t + c as u128) % p);
            v == 0
        })
    }

    fn x_has_full_order(&self, m: u128, factors: &[(u128, u32)]) -> bool {
        let one = self.one();
        if self.x_pow(m) != one {
            return false;
        }
        factors.iter().all(|&(l, _)| self.x_pow(m / l) != one)
    }
}

fn checked_group_order(p: u64, k: usize) -> Result<u128> {
    let bits = (p as f64).log2() * k as f64;
    if k == 0 || bits >= 127.0 {
        return Err(ScraError::capability(format!("GF({p}^{k}) exceeds the 2^127 arithmetic limit")));
    }
    (p as u128)
        .checked_pow(k as u32)
        .filter(|&n| n < (1u128 << 127))
        .map(|n| n - 1)
        .ok_or_else(|| ScraError::capability(format!("GF({p}^{k}) exceeds the 2^127 arithmetic limit")))
}

/// Lookup structure for logarithms in the subgroup of prime order `l`.
struct PrimeOrderLog {
    order: u128,
    baby: HashMap<u128, u128>,
    stride: u128,
    giant: Element,
}

impl PrimeOrderLog {
    fn new(field: &ExtensionField, gamma: &[u64], order: u128, queries: u128) -> Self {
        let stride = if order <= FULL_TABLE_LIMIT {
            order
        } else {
            let s = ((order as f64) * (queries.max(1) as f64)).sqrt().ceil() as u128;
            s.clamp(1, MAX_BABY_STEPS.min(order))
        };
        let mut baby = HashMap::with_capacity(stride as usize);
        let mut cur = field.one();
        for j in 0..stride {
            baby.entry(field.pack(&cur)).or_insert(j);
            cur = field.mul(&cur, gamma);
        }
        // gamma^(-stride) = gamma^(order - stride) since gamma has order `order`.
        let giant = field.pow(gamma, (order - stride % order) % order);
        PrimeOrderLog { order, baby, stride, giant }
    }

    fn log(&self, field: &ExtensionField, y: &[u64]) -> Option<u128> {
        let mut cur = y.to_vec();
        let steps = self.order.div_ceil(self.stride);
        for i in 0..steps {
            if let Some(&j) = self.baby.get(&field.pack(&cur)) {
                return Some((i * self.stride + j) % self.order);
            }
            cur = field.mul(&cur, &self.giant);
        }
        None
    }
}

struct PrimePowerPart {
    prime: u128,
    exponent: u32,
    modulus: u128,
    cofactor: u128,
    /// `x^cofactor`, generator of the subgroup of order `prime^exponent`.
    generator_inv: Element,
    table: PrimeOrderLog,
}

/// Pohlig-Hellman discrete logarithms to the base `x` in a field whose
/// modulus is primitive.
pub struct DiscreteLog<'a> {
    field: &'a ExtensionField,
    order: u128,
    parts: Vec<PrimePowerPart>,
}

impl<'a> DiscreteLog<'a> {
    /// `queries` is the number of logarithms the caller expects to take; it
    /// sizes the baby-step tables.
    pub fn new(field: &'a ExtensionField, queries: usize) -> Self {
        let order = field.group_order();
        let factors = factorize_power_minus_one(field.p as u128, field.k as u32);
        let x = field.x_plus(0);
        let parts = factors
            .into_iter()
            .map(|(prime, exponent)| {
                let modulus = prime.pow(exponent);
                let cofactor = order / modulus;
                let generator = field.pow(&x, cofactor);
                let gamma = field.pow(&generator, modulus / prime);
                let generator_inv = field.pow(&generator, modulus - 1);
                let table = PrimeOrderLog::new(field, &gamma, prime, queries as u128 * exponent as u128);
                PrimePowerPart { prime, exponent, modulus, cofactor, generator_inv, table }
            })
            .collect();
        DiscreteLog { field, order, parts }
    }

    /// `e` in `[0, p^k - 1)` with `x^e = y`, or `None` when `y` is zero.
    pub fn log(&self, y: &[u64]) -> Option<u128> {
        if y.iter().all(|&c| c == 0) {
            return None;
        }
        let f = self.field;
        let (mut acc, mut acc_mod) = (0u128, 1u128);
        for part in &self.parts {
            let h = f.pow(y, part.cofactor);
            let mut digits = 0u128;
            let mut place = 1u128;
            for j in 0..part.exponent {
                // Strip the digits already known, then project to order `prime`.
                let stripped = f.mul(&h, &f.pow(&part.generator_inv, digits));
                let projected = f.pow(&stripped, part.prime.pow(part.exponent - 1 - j));
                let d = part.table.log(f, &projected)?;
                digits += d * place;
                if j + 1 < part.exponent {
                    place *= part.prime;
                }
            }
            acc = crt(acc, acc_mod, digits % part.modulus, part.modulus);
            acc_mod *= part.modulus;
        }
        debug_assert_eq!(acc_mod, self.order);
        Some(acc)
    }
}

/// Combines `a mod m` and `b mod n` for coprime `m`, `n`.
fn crt(a: u128, m: u128, b: u128, n: u128) -> u128 {
    if m == 1 {
        return b % n;
    }
    // phi(n) - 1 works as the inverse exponent for a prime power n.
    let inv = pow_mod(m % n, euler_phi_prime_power(n) - 1, n);
    let diff = (b + n - a % n) % n;
    let t = super::primes::mul_mod(diff, inv, n);
    a + m * t
}

fn euler_phi_prime_power(n: u128) -> u128 {
    let f = super::primes::factorize(n);
    debug_assert_eq!(f.len(), 1);
    let (p, e) = f[0];
    p.pow(e - 1) * (p - 1)
}
