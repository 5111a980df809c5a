use std::ops::RangeInclusive;

use super::recursion::SlotRecursion;
use crate::channel::plnc_rate;
use crate::error::{Result, ScraError};
use crate::numtheory::{choose, reg_inc_beta, ArrivalModel};
use crate::sigcode::signature_length_bound;

/// Tail mass below which the exact throughput sum is truncated.
pub const EXACT_SUM_TAIL: f64 = 1e-15;

pub fn alpha_star(k: u32) -> f64 {
    1.0 + 1.0 / k as f64
}

pub fn beta_star(k: u32) -> f64 {
    let k = k as f64;
    1.0 + 2.0 / ((k + 1.0) * (1.0 - (-k).exp2()))
}

/// With subtraction the lower constant is 1 for every `K`.
pub fn alpha_star_sic(_k: u32) -> f64 {
    1.0
}

pub fn beta_star_sic(k: u32) -> f64 {
    let k = k as f64;
    1.0 + 1.0 / ((k + 1.0) * (k.exp2() - 1.0))
}

fn check_above_capability(l: u64, k: u32) -> Result<()> {
    if k == 0 || l <= k as u64 {
        return Err(ScraError::argument(format!("gamma needs L > K >= 1 (L={l}, K={k})")));
    }
    Ok(())
}

/// `1 + (1 + sum_{i<=K} C(L,i)) / sum_{i<=K} i C(L,i)`.
pub fn gamma(l: u64, k: u32) -> Result<f64> {
    check_above_capability(l, k)?;
    let (mut mass, mut weighted) = (1.0, 0.0);
    for i in 0..=k as u64 {
        let c = choose(l, i);
        mass += c;
        weighted += c * i as f64;
    }
    Ok(1.0 + mass / weighted)
}

/// `1 + 1 / sum_{i=1}^K i C(L,i)`.
pub fn gamma_sic(l: u64, k: u32) -> Result<f64> {
    check_above_capability(l, k)?;
    let weighted: f64 = (1..=k as u64).map(|i| choose(l, i) * i as f64).sum();
    Ok(1.0 + 1.0 / weighted)
}

/// Guaranteed fraction of a batch resolved per slot, `1 / beta`.
pub fn worst_r_res(k: u32, sic: bool) -> f64 {
    1.0 / if sic { beta_star_sic(k) } else { beta_star(k) }
}

/// Parameters of the random-access scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub m: u64,
    pub k: u32,
    pub p: f64,
    /// Linear transmit power.
    pub power: f64,
    /// Payload bits per message; may be infinite.
    pub payload_bits: f64,
    pub sic: bool,
}

impl SchemeParams {
    pub fn new(m: u64, k: u32, p: f64, power: f64, payload_bits: f64, sic: bool) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ScraError::argument(format!("activity probability must lie in (0, 1), got {p}")));
        }
        if k == 0 || k as u64 > m {
            return Err(ScraError::argument(format!("need 1 <= K <= M (K={k}, M={m})")));
        }
        if !(power > 0.0) || power.is_nan() {
            return Err(ScraError::argument(format!("power must be positive, got {power}")));
        }
        if !(payload_bits > 0.0) {
            return Err(ScraError::argument(format!("payload size must be positive, got {payload_bits}")));
        }
        Ok(SchemeParams { m, k, p, power, payload_bits, sic })
    }

    /// Same scenario with `pM` active users on average.
    pub fn with_mean(m: u64, k: u32, mean_active: f64, power: f64, payload_bits: f64, sic: bool) -> Result<Self> {
        Self::new(m, k, mean_active / m as f64, power, payload_bits, sic)
    }

    pub fn with_k(self, k: u32) -> Result<Self> {
        Self::new(self.m, k, self.p, self.power, self.payload_bits, self.sic)
    }

    pub fn arrivals(&self) -> ArrivalModel {
        ArrivalModel::new(self.m, self.p).expect("validated on construction")
    }

    fn beta(&self) -> f64 {
        if self.sic {
            beta_star_sic(self.k)
        } else {
            beta_star(self.k)
        }
    }

    /// Signature length bound in bits.
    pub fn signature_bits(&self) -> f64 {
        signature_length_bound(self.m as f64, self.k as f64)
    }

    /// `D / (N_w + D)`, taken as 1 when `D` is infinite.
    pub fn payload_fraction(&self) -> f64 {
        let d = self.payload_bits;
        if d.is_infinite() {
            return 1.0;
        }
        let nw = self.signature_bits();
        if nw.is_infinite() {
            0.0
        } else {
            d / (nw + d)
        }
    }
}

/// `1 - (beta - 1) / (beta (1 - q_0)) I_p(K + 1, M - K)`, with
/// `I_p(M + 1, 0) = 0` when `K = M`.
pub fn avg_r_res_lower(params: &SchemeParams) -> Result<f64> {
    let (m, k) = (params.m, params.k as u64);
    if k >= m {
        return Ok(1.0);
    }
    let tail = reg_inc_beta(params.p, (k + 1) as f64, (m - k) as f64)?;
    let beta = params.beta();
    let q0 = params.arrivals().q0();
    Ok(1.0 - (beta - 1.0) / (beta * (1.0 - q0)) * tail)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactThroughput {
    pub value: f64,
    /// Largest batch size included in the sum.
    pub truncated_at: u64,
}

/// `sum_{L>=1} (L / S(L)) q(L) / (1 - q_0)`, cut where the remaining
/// batch-size mass drops below [`EXACT_SUM_TAIL`].
pub fn avg_r_res_exact(params: &SchemeParams) -> Result<ExactThroughput> {
    let arrivals = params.arrivals();
    let top = arrivals.truncation_point(EXACT_SUM_TAIL).max(1);
    let mut s = SlotRecursion::new(params.k, params.sic);
    let table = s.table(top).to_vec();
    let q0 = arrivals.q0();
    let mut value = 0.0;
    for l in 1..=top {
        value += l as f64 / table[l as usize] * arrivals.pmf(l)?;
    }
    Ok(ExactThroughput { value: value / (1.0 - q0), truncated_at: top })
}

/// `½ log2⁺(P) · D / (N_w + D) · avg_r_res_lower`.
pub fn avg_r_net_lower(params: &SchemeParams) -> Result<f64> {
    Ok(plnc_rate(params.power)? * params.payload_fraction() * avg_r_res_lower(params)?)
}

/// Net rate with full knowledge of the active set:
/// `sum_{L=1}^M q(L) ½ log2(1 + L P)`. With `conditioned` the weights are
/// `q(L) / (1 - q_0)`, matching a throughput defined given `L > 0`.
pub fn upper_bound_net(params: &SchemeParams, conditioned: bool) -> Result<f64> {
    let arrivals = params.arrivals();
    let mut total = 0.0;
    for l in 1..=params.m {
        let q = arrivals.pmf(l)?;
        if q == 0.0 && l as f64 > params.p * params.m as f64 {
            break;
        }
        total += q * 0.5 * (l as f64 * params.power).ln_1p() / std::f64::consts::LN_2;
    }
    if conditioned {
        total /= 1.0 - arrivals.q0();
    }
    Ok(total)
}

/// `½ log2(1 + pMP)`, the concave relaxation of [`upper_bound_net`].
pub fn jensen_upper(params: &SchemeParams) -> f64 {
    0.5 * (params.p * params.m as f64 * params.power).ln_1p() / std::f64::consts::LN_2
}

/// `ln` of the amount by which [`avg_r_res_lower`] falls short of 1.
fn ln_throughput_deficit(params: &SchemeParams) -> f64 {
    let k = params.k as u64;
    if k >= params.m {
        return f64::NEG_INFINITY;
    }
    let beta = params.beta();
    let q0 = params.arrivals().q0();
    ((beta - 1.0) / (beta * (1.0 - q0))).ln() + params.arrivals().ln_upper_tail(k + 1)
}

/// `K` in `range` maximising [`avg_r_net_lower`]; ties go to the smaller
/// `K`. Candidates whose bounds round to the same double are told apart by
/// their throughput deficit in log space, so that the ordering survives
/// once the deficit underflows (as it does for large `D`).
pub fn optimal_k(params: &SchemeParams, range: RangeInclusive<u32>) -> Result<(u32, f64)> {
    let mut best: Option<(u32, f64, f64)> = None;
    for k in range.clone() {
        let candidate = params.with_k(k)?;
        let v = avg_r_net_lower(&candidate)?;
        let deficit = ln_throughput_deficit(&candidate);
        let better = match best {
            None => true,
            Some((_, b, d)) => v > b || (v == b && deficit < d),
        };
        if better {
            best = Some((k, v, deficit));
        }
    }
    best.map(|(k, v, _)| (k, v)).ok_or_else(|| ScraError::argument(format!("empty K range {range:?}")))
}
