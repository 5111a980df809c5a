//! Batch-size distribution of the arrival model.

use statrs::function::gamma::ln_gamma;

use crate::error::{Result, ScraError};

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `C(n, k)` as a float, exact while it fits the mantissa.
pub fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 60 {
        let mut c = 1u64;
        for j in 0..k {
            c = c * (n - j) / (j + 1);
        }
        return c as f64;
    }
    ln_choose(n, k).exp()
}

/// Each of `M` users is active independently with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalModel {
    m: u64,
    p: f64,
}

impl ArrivalModel {
    pub fn new(m: u64, p: f64) -> Result<Self> {
        if m == 0 || !(0.0..=1.0).contains(&p) {
            return Err(ScraError::argument(format!("arrival model needs M >= 1 and 0 <= p <= 1 (M={m}, p={p})")));
        }
        Ok(ArrivalModel { m, p })
    }

    /// Convenience for the `pM` parametrisation.
    pub fn with_mean(m: u64, mean_active: f64) -> Result<Self> {
        Self::new(m, mean_active / m as f64)
    }

    pub fn population(&self) -> u64 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `q(L)`, the probability that exactly `L` users are active.
    pub fn pmf(&self, l: u64) -> Result<f64> {
        if l > self.m {
            return Err(ScraError::argument(format!("batch size {l} outside 0..={}", self.m)));
        }
        Ok(self.pmf_unchecked(l))
    }

    fn pmf_unchecked(&self, l: u64) -> f64 {
        let (m, p) = (self.m, self.p);
        if p == 0.0 {
            return if l == 0 { 1.0 } else { 0.0 };
        }
        if p == 1.0 {
            return if l == m { 1.0 } else { 0.0 };
        }
        if m <= 60 {
            return choose(m, l) * p.powi(l as i32) * (1.0 - p).powi((m - l) as i32);
        }
        (ln_choose(m, l) + l as f64 * p.ln() + (m - l) as f64 * (-p).ln_1p()).exp()
    }

    /// `q_0 = (1 - p)^M`.
    pub fn q0(&self) -> f64 {
        self.pmf_unchecked(0)
    }

    /// `q(L) / (1 - q_0)` for `L >= 1`, the batch size given that one exists.
    pub fn conditional_pmf(&self, l: u64) -> Result<f64> {
        if l == 0 {
            return Err(ScraError::argument("conditional pmf is defined for L >= 1"));
        }
        if self.p == 0.0 {
            return Err(ScraError::argument("conditional pmf undefined when p = 0"));
        }
        Ok(self.pmf(l)? / (1.0 - self.q0()))
    }

    /// `ln P(L >= k)`, summed in log space so that tails far below the
    /// smallest positive double still compare correctly.
    pub fn ln_upper_tail(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if k > self.m || self.p == 0.0 {
            return f64::NEG_INFINITY;
        }
        if self.p == 1.0 {
            return 0.0;
        }
        let (m, p) = (self.m, self.p);
        let ln_term = |j: u64| ln_choose(m, j) + j as f64 * p.ln() + (m - j) as f64 * (-p).ln_1p();
        let head = ln_term(k);
        let mut scaled = 0.0;
        for j in k..=m {
            let r = (ln_term(j) - head).exp();
            scaled += r;
            if j as f64 > m as f64 * p && r < 1e-17 * scaled {
                break;
            }
        }
        head + scaled.ln()
    }

    /// Smallest `L` beyond which the remaining mass falls below `tail`.
    pub fn truncation_point(&self, tail: f64) -> u64 {
        let ln_tail = tail.ln();
        let start = (self.m as f64 * self.p).floor() as u64;
        (start..self.m).find(|&l| self.ln_upper_tail(l + 1) < ln_tail).unwrap_or(self.m)
    }
}
