//! Integer sets whose small subset sums are all distinct.
//!
//! Three constructions are available:
//!
//! * order 1 uses `s_i = i`, since distinctness is all that is needed;
//! * tiny parameters use a smallest-lexicographic backtracking search, which
//!   yields sets where *every* pair of distinct subsets of size at most `K`
//!   has distinct sums, across sizes;
//! * everything else uses the Bose-Chowla construction in GF(M^K): with `x`
//!   primitive, `s_i = log_x(x + i - 1)`. Subsets of equal size then have
//!   distinct sums modulo `M^K - 1`, and a sum can be inverted algebraically
//!   because `x^(sum) = prod (x + c)` in the field.
//!
//! The signature decoder always knows the subset size from the multiplicity
//! counter, so the size-graded property is the one every construction
//! guarantees.

use std::collections::HashSet;

use super::galois::{DiscreteLog, ExtensionField};
use super::primes::is_prime;
use crate::error::{Result, ScraError};

/// Upper bound on subsets enumerated by [`verify_sidon`].
pub const VERIFY_SUBSET_LIMIT: u128 = 10_000_000;

/// Candidate evaluations the backtracking search may spend before giving up.
const SEARCH_BUDGET: u64 = 2_000_000;
/// Largest `K * M^K` for which the search keeps a dense sum bitmap.
const SEARCH_SUM_LIMIT: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Construction {
    /// `s_i = i`, order 1 only.
    Identity,
    /// Backtracking search; all subset sums of size at most `K` distinct.
    Search,
    /// Bose-Chowla in the given field; equal-size subset sums distinct.
    BoseChowla(ExtensionField),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SidonSet {
    m: u64,
    k: u32,
    elements: Vec<u128>,
    construction: Construction,
}

impl SidonSet {
    pub fn population(&self) -> u64 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    /// `s_1 .. s_M`; user `i` owns `elements()[i - 1]`.
    pub fn elements(&self) -> &[u128] {
        &self.elements
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn max_element(&self) -> u128 {
        self.elements.iter().copied().max().unwrap_or(0)
    }

    /// Builds a set from explicit elements, e.g. for testing the verifier.
    pub fn from_elements(k: u32, elements: Vec<u128>) -> Self {
        SidonSet { m: elements.len() as u64, k, elements, construction: Construction::Search }
    }

    /// Recovers the 0-based indices of the `size` elements summing to `sum`,
    /// using the field structure. Only available for Bose-Chowla sets.
    pub fn invert_sum(&self, size: usize, sum: u128) -> Option<Vec<usize>> {
        let Construction::BoseChowla(field) = &self.construction else {
            return None;
        };
        if size == 0 {
            return (sum == 0).then(Vec::new);
        }
        let k = field.degree();
        if size > k {
            return None;
        }
        let p = field.characteristic();
        let mut poly = field.x_pow(sum % field.group_order());
        // prod_{c in S} (x + c) has degree |S|; at |S| = k it differs from the
        // reduced power by the modulus itself.
        if size == k {
            for (coef, &fi) in poly.iter_mut().zip(field.modulus()) {
                *coef = (*coef + fi) % p;
            }
            poly.push(1);
        } else {
            if poly[size] != 1 || poly[size + 1..].iter().any(|&c| c != 0) {
                return None;
            }
            poly.truncate(size + 1);
        }
        let roots: Vec<usize> =
            (0..self.m).filter(|&c| eval_poly(&poly, (p - c % p) % p, p) == 0).map(|c| c as usize).collect();
        if roots.len() != size {
            return None;
        }
        let check: u128 = roots.iter().map(|&i| self.elements[i]).sum();
        (check == sum).then_some(roots)
    }
}

fn eval_poly(coeffs: &[u64], t: u64, p: u64) -> u64 {
    let (t, p) = (t as u128, p as u128);
    coeffs.iter().rev().fold(0u128, |acc, &c| (acc * t + c as u128) % p) as u64
}

/// Number of subsets of an `m`-set with at most `k` elements, saturating.
pub fn subsets_up_to(m: u64, k: u32) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for i in 0..=k.min(m as u32) as u128 {
        total = total.saturating_add(c);
        c = c.saturating_mul(m as u128 - i) / (i + 1);
    }
    total
}

/// Calls `f(indices, sum)` for every subset of size `1..=max_size`, in
/// lexicographic order of index lists.
pub fn for_each_subset<F: FnMut(&[usize], u128)>(values: &[u128], max_size: usize, mut f: F) {
    let n = values.len();
    let mut idx: Vec<usize> = Vec::with_capacity(max_size);
    let mut sums: Vec<u128> = vec![0];
    let mut next = 0usize;
    loop {
        if idx.len() < max_size && next < n {
            idx.push(next);
            let s = sums[sums.len() - 1] + values[next];
            sums.push(s);
            f(&idx, s);
            next += 1;
            continue;
        }
        match idx.pop() {
            Some(last) => {
                sums.pop();
                next = last + 1;
            }
            None => break,
        }
    }
}

/// Builds an `M`-element set with distinct subset sums up to order `K`.
pub fn build_sidon_set(m: u64, k: u32) -> Result<SidonSet> {
    if m < 2 || !is_prime(m as u128) {
        return Err(ScraError::argument(format!("Sidon construction needs a prime population, got {m}")));
    }
    if k == 0 || k as u64 > m {
        return Err(ScraError::argument(format!("order K must satisfy 1 <= K <= M, got K={k}, M={m}")));
    }
    if k == 1 {
        return Ok(SidonSet { m, k, elements: (1..=m as u128).collect(), construction: Construction::Identity });
    }
    let limit = (m as u128).checked_pow(k).filter(|&n| n < (1u128 << 127)).ok_or_else(|| {
        ScraError::capability(format!("M^K = {m}^{k} exceeds the 2^127 arithmetic limit; use a smaller K"))
    })?;
    if (k as u128).saturating_mul(limit) <= SEARCH_SUM_LIMIT {
        if let Some(elements) = search_sidon_set(m, k, limit, SEARCH_BUDGET) {
            return Ok(SidonSet { m, k, elements, construction: Construction::Search });
        }
    }
    bose_chowla(m, k)
}

/// Bose-Chowla set in GF(M^K), regardless of size.
pub fn bose_chowla(m: u64, k: u32) -> Result<SidonSet> {
    if k < 2 {
        return Err(ScraError::argument("Bose-Chowla needs K >= 2"));
    }
    let field = ExtensionField::primitive(m, k as usize)?;
    let dl = DiscreteLog::new(&field, m as usize);
    let elements = (0..m)
        .map(|c| dl.log(&field.x_plus(c)).ok_or_else(|| ScraError::integrity("x + c vanished in GF(p^k)")))
        .collect::<Result<Vec<_>>>()?;
    Ok(SidonSet { m, k, elements, construction: Construction::BoseChowla(field) })
}

/// Smallest-lexicographic set of `m` integers in `[1, limit)` whose subset
/// sums up to size `k` are pairwise distinct across all sizes. Returns `None`
/// when the candidate budget runs out.
pub fn search_sidon_set(m: u64, k: u32, limit: u128, budget: u64) -> Option<Vec<u128>> {
    let cap = (k as u128 * limit) as usize + 1;
    let mut taken = vec![false; cap];
    taken[0] = true;
    // (sum, size) of every chosen subset with fewer than k elements.
    let mut open: Vec<(usize, u32)> = vec![(0, 0)];
    let mut chosen: Vec<usize> = Vec::new();
    // Per level: how many entries of `open` were added, and the sums set.
    let mut added: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut spent = 0u64;
    let mut candidate = 1usize;
    let limit = limit as usize;
    let m = m as usize;
    loop {
        if chosen.len() == m {
            return Some(chosen.into_iter().map(|x| x as u128).collect());
        }
        let need = m - chosen.len();
        let mut placed = false;
        while candidate + need <= limit {
            spent += 1;
            if spent > budget {
                return None;
            }
            let x = candidate;
            if open.iter().all(|&(s, _)| !taken[s + x]) {
                let mut sums = Vec::with_capacity(open.len());
                let mut extra = Vec::new();
                for &(s, size) in &open {
                    taken[s + x] = true;
                    sums.push(s + x);
                    if size + 1 < k {
                        extra.push((s + x, size + 1));
                    }
                }
                let n_extra = extra.len();
                open.extend(extra);
                added.push((n_extra, sums));
                chosen.push(x);
                candidate = x + 1;
                placed = true;
                break;
            }
            candidate += 1;
        }
        if placed {
            continue;
        }
        // Backtrack.
        let x = chosen.pop()?;
        let (n_extra, sums) = added.pop().expect("levels track chosen");
        open.truncate(open.len() - n_extra);
        for s in sums {
            taken[s] = false;
        }
        candidate = x + 1;
    }
}

fn check_enumerable(set: &SidonSet) -> Result<()> {
    let n = subsets_up_to(set.m, set.k);
    if n > VERIFY_SUBSET_LIMIT {
        return Err(ScraError::capability(format!("verifying {n} subsets exceeds the limit of {VERIFY_SUBSET_LIMIT}")));
    }
    Ok(())
}

/// True iff all subsets of size at most `K` have pairwise distinct sums,
/// comparing subsets of different sizes too (the empty set sums to 0).
pub fn verify_sidon(set: &SidonSet) -> Result<bool> {
    check_enumerable(set)?;
    let mut seen = HashSet::new();
    seen.insert(0u128);
    let mut ok = true;
    for_each_subset(&set.elements, set.k as usize, |_, s| {
        ok &= seen.insert(s);
    });
    Ok(ok)
}

/// True iff subsets of equal size (at most `K`) have distinct sums.
pub fn verify_sidon_graded(set: &SidonSet) -> Result<bool> {
    check_enumerable(set)?;
    let mut seen = HashSet::new();
    let mut ok = true;
    for_each_subset(&set.elements, set.k as usize, |idx, s| {
        ok &= seen.insert((idx.len(), s));
    });
    Ok(ok)
}
