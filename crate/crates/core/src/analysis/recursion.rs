use crate::numtheory::{choose, ln_choose};

/// `p_L(i) = C(L, i) 2^-L`, the chance that a fair split of `L` users
/// sends exactly `i` to the first group.
pub fn split_probability(l: u64, i: u64) -> f64 {
    if i > l {
        return 0.0;
    }
    if l <= 60 {
        choose(l, i) / 2f64.powi(l as i32)
    } else {
        (ln_choose(l, i) - l as f64 * std::f64::consts::LN_2).exp()
    }
}

/// Expected contention-period length `S(L)` for batch sizes `0..=L`,
/// evaluated bottom-up.
///
/// Basic scheme, for `L > K`:
/// `S(L) = (1 + 2 sum_{i<L} p_L(i) S(i)) / (1 - 2 p_L(L))`.
/// With subtraction the leading `1` disappears, since the second group
/// never needs its own slot.
#[derive(Debug, Clone)]
pub struct SlotRecursion {
    k: u32,
    sic: bool,
    values: Vec<f64>,
}

impl SlotRecursion {
    pub fn new(k: u32, sic: bool) -> Self {
        assert!(k >= 1, "K must be at least 1");
        SlotRecursion { k, sic, values: vec![1.0] }
    }

    pub fn get(&mut self, l: u64) -> f64 {
        self.extend_to(l);
        self.values[l as usize]
    }

    /// Values for `0..=l`.
    pub fn table(&mut self, l: u64) -> &[f64] {
        self.extend_to(l);
        &self.values[..=l as usize]
    }

    fn extend_to(&mut self, l: u64) {
        let offset = if self.sic { 0.0 } else { 1.0 };
        while (self.values.len() as u64) <= l {
            let n = self.values.len() as u64;
            let v = if n <= self.k as u64 {
                n as f64
            } else {
                let acc: f64 = (0..n).map(|i| split_probability(n, i) * self.values[i as usize]).sum();
                (offset + 2.0 * acc) / (1.0 - 2.0 * split_probability(n, n))
            };
            self.values.push(v);
        }
    }
}

/// `S(L)` for the basic scheme.
pub fn s_exact(l: u64, k: u32) -> f64 {
    SlotRecursion::new(k, false).get(l)
}

/// `S(L)` with successive interference cancellation.
pub fn s_sic_exact(l: u64, k: u32) -> f64 {
    SlotRecursion::new(k, true).get(l)
}
