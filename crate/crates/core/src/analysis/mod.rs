//! Exact evaluation of the slot recursions, the bounds derived from them
//! and the throughput and net-rate expressions built on top.

mod bounds;
mod recursion;

pub use bounds::{
    alpha_star, alpha_star_sic, avg_r_net_lower, avg_r_res_exact, avg_r_res_lower, beta_star, beta_star_sic, gamma,
    gamma_sic, jensen_upper, optimal_k, upper_bound_net, worst_r_res, ExactThroughput, SchemeParams, EXACT_SUM_TAIL,
};
pub use recursion::{s_exact, s_sic_exact, split_probability, SlotRecursion};

use crate::error::{Result, ScraError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    LowerBound,
    UpperBound,
    Simulated,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::LowerBound => "lower",
            Provenance::UpperBound => "upper",
            Provenance::Simulated => "simulated",
        }
    }
}

/// A named series over a strictly increasing x axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisCurve {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub provenance: Provenance,
    points: Vec<(f64, f64)>,
}

impl AnalysisCurve {
    pub fn new(
        name: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
        provenance: Provenance,
        points: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(ScraError::argument("curve x values must be strictly increasing"));
        }
        Ok(AnalysisCurve { name: name.into(), x_label: x_label.into(), y_label: y_label.into(), provenance, points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }
}
