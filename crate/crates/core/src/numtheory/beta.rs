//! Regularized incomplete beta function.

use statrs::function::gamma::ln_gamma;

use crate::error::{Result, ScraError};

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// `I_x(a, b) = B_x(a, b) / B_1(a, b)`.
///
/// Continued fraction (modified Lentz) on whichever of `I_x(a, b)` and
/// `1 - I_{1-x}(b, a)` converges faster.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(ScraError::argument(format!("reg_inc_beta needs 0 <= x <= 1, a > 0, b > 0 (x={x}, a={a}, b={b})")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - continued_fraction(1.0 - x, b, a))
    } else {
        Ok(continued_fraction(x, a, b))
    }
}

fn continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp() / a;

    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        // Even step.
        let num = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let num = -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
        d = 1.0 + num * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + num / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (front * h).clamp(0.0, 1.0)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle for integer arguments: the binomial tail
    /// `I_x(a, n - a + 1) = P[Bin(n, x) >= a]`, summed directly.
    fn binomial_tail(x: f64, a: u32, n: u32) -> f64 {
        let ratio = x / (1.0 - x);
        let mut term = (1.0 - x).powi(n as i32); // P[Bin = 0]
        let mut total = 0.0;
        for j in 0..=n {
            if j >= a {
                total += term;
                if term < total * 1e-18 {
                    break;
                }
            }
            term *= (n - j) as f64 / (j + 1) as f64 * ratio;
        }
        total
    }

    #[test]
    fn endpoints() {
        assert_eq!(reg_inc_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(1.0, 2.0, 3.0).unwrap(), 1.0);
        assert!((reg_inc_beta(0.5, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(reg_inc_beta(-0.1, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(1.1, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 0.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 1.0, -2.0).is_err());
        assert!(reg_inc_beta(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn binomial_cdf_identity() {
        // sum_{L<=K} q(L) = I_{1-p}(M-K, K+1) for M = 20, p = 0.1, K = 3.
        let (m, p, k) = (20u32, 0.1f64, 3u32);
        let direct: f64 = (0..=k)
            .map(|l| {
                let c: f64 = (0..l).map(|j| (m - j) as f64 / (j + 1) as f64).product();
                c * p.powi(l as i32) * (1.0 - p).powi((m - l) as i32)
            })
            .sum();
        let via_beta = reg_inc_beta(1.0 - p, (m - k) as f64, (k + 1) as f64).unwrap();
        assert!((direct - via_beta).abs() < 1e-9 * direct);
        let upper = reg_inc_beta(p, (k + 1) as f64, (m - k) as f64).unwrap();
        assert!((1.0 - upper - direct).abs() < 1e-9);
    }

    #[test]
    fn matches_binomial_tail_at_large_m() {
        let m = 1031u32;
        for pm in [1.0, 3.0, 6.0, 12.0] {
            let p = pm / m as f64;
            for k in [1u32, 2, 4, 8, 16, 32] {
                let oracle = binomial_tail(p, k + 1, m);
                let got = reg_inc_beta(p, (k + 1) as f64, (m - k) as f64).unwrap();
                let rel = (got - oracle).abs() / oracle.max(1e-300);
                assert!(rel < 1e-9, "pM={pm} K={k}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn symmetry_on_grid() {
        for &a in &[0.5, 1.0, 2.5, 7.0, 40.0] {
            for &b in &[0.5, 1.0, 3.0, 12.0, 300.0] {
                for i in 0..=20 {
                    let x = i as f64 / 20.0;
                    let lhs = reg_inc_beta(x, a, b).unwrap();
                    let rhs = 1.0 - reg_inc_beta(1.0 - x, b, a).unwrap();
                    assert!((lhs - rhs).abs() < 1e-10, "x={x} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn monotone_in_x() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = reg_inc_beta(i as f64 / 1000.0, 3.0, 5.0).unwrap();
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }
}
