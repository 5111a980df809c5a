//! Primality, prime search and factorisation on 64- and 128-bit integers.

use crate::error::{Result, ScraError};

/// Bases that make Miller-Rabin deterministic below 3.3 * 10^24.
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

const TRIAL_DIVISION_LIMIT: u64 = 1 << 20;

pub fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    debug_assert!(m > 0 && m < (1u128 << 127));
    if a < (1 << 64) && b < (1 << 64) {
        return (a * b) % m;
    }
    let (mut a, mut b) = (a % m, b % m);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = (acc + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    acc
}

pub fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin with fixed bases. Exact for every `n` below 2^64 and for
/// the 128-bit cofactors this crate meets (well under 3.3 * 10^24), and a
/// strong probable-prime test beyond that.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        let p = p as u128;
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a as u128, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn smallest_prime_greater(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(ScraError::argument("smallest_prime_greater requires n >= 1"));
    }
    let mut c = n.checked_add(1).ok_or_else(|| ScraError::capability(format!("no prime above {n} fits in 64 bits")))?;
    loop {
        if is_prime(c as u128) {
            return Ok(c);
        }
        c = c.checked_add(1).ok_or_else(|| ScraError::capability(format!("no prime above {n} fits in 64 bits")))?;
    }
}

/// `n` itself when prime, otherwise the next prime above it.
pub fn prime_at_least(n: u64) -> Result<u64> {
    if is_prime(n as u128) {
        Ok(n)
    } else {
        smallest_prime_greater(n.max(1))
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Brent's variant of Pollard rho. `n` must be odd and composite.
fn pollard_rho(n: u128) -> u128 {
    for c in 1u128.. {
        let f = |x: u128| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u128, 2u128, 1u128);
        let mut q = 1u128;
        let mut r = 1u64;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(128.min(r - k)) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn push_factor(out: &mut Vec<(u128, u32)>, p: u128, e: u32) {
    match out.iter_mut().find(|(q, _)| *q == p) {
        Some((_, k)) => *k += e,
        None => out.push((p, e)),
    }
}

fn factor_into(mut n: u128, out: &mut Vec<(u128, u32)>) {
    let mut d = 2u128;
    while d < TRIAL_DIVISION_LIMIT as u128 && d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            push_factor(out, d, e);
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            push_factor(out, m, 1);
            continue;
        }
        let f = pollard_rho(m);
        stack.push(f);
        stack.push(m / f);
    }
}

/// Prime factorisation, sorted by prime.
pub fn factorize(n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    if n > 1 {
        factor_into(n, &mut out);
    }
    out.sort_unstable();
    out
}

/// Factorisation of `p^k - 1`, split along the cyclotomic values `Phi_d(p)`
/// so every piece handed to the generic factoriser stays small.
pub fn factorize_power_minus_one(p: u128, k: u32) -> Vec<(u128, u32)> {
    let mut cyclo: Vec<(u32, u128)> = Vec::new();
    let mut out = Vec::new();
    for d in 1..=k {
        if !k.is_multiple_of(d) {
            continue;
        }
        let mut v = p.pow(d) - 1;
        for &(e, phi) in &cyclo {
            if d % e == 0 {
                v /= phi;
            }
        }
        cyclo.push((d, v));
        factor_into(v, &mut out);
    }
    out.sort_unstable();
    out
}
