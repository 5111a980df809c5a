use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{run_scheme, ProtocolConfig};
use crate::error::{Result, ScraError};
use crate::sigcode::UserId;

/// How the active set of a trial is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Workload {
    /// Exactly `L` users, uniformly chosen.
    Fixed(u32),
    /// Each user independently active with probability `p`.
    Bernoulli(f64),
}

/// Generator for trial `trial` of a run seeded with `seed`: ChaCha8 with
/// the trial index as stream number, so trials are independent of the
/// order in which they execute.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn draw_active<R: Rng + ?Sized>(m: u32, workload: Workload, rng: &mut R) -> Result<Vec<UserId>> {
    match workload {
        Workload::Fixed(l) => {
            if l > m {
                return Err(ScraError::argument(format!("L={l} exceeds the population M={m}")));
            }
            let mut ids: Vec<_> =
                index::sample(rng, m as usize, l as usize).into_iter().map(|i| UserId(i as u32 + 1)).collect();
            ids.sort_unstable();
            Ok(ids)
        }
        Workload::Bernoulli(p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(ScraError::argument(format!("activity probability {p} outside [0, 1]")));
            }
            Ok((1..=m).filter(|_| rng.random_bool(p)).map(UserId).collect())
        }
    }
}

/// Streaming mean and variance (Welford), mergeable across workers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n as f64;
        self.count = n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub active: u32,
    pub slots: u64,
    pub sic_derivations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub trials: u64,
    pub slots: RunningStats,
    pub active: RunningStats,
    pub total_slots: u64,
    pub total_resolved: u64,
    pub sic_derivations: u64,
}

impl SimulationSummary {
    /// Users resolved per slot over the whole run.
    pub fn throughput(&self) -> f64 {
        if self.total_slots == 0 {
            0.0
        } else {
            self.total_resolved as f64 / self.total_slots as f64
        }
    }
}

/// Runs `trials` independent contention periods in parallel. Results are
/// folded in trial order, so the summary is identical for any thread
/// count.
pub fn simulate(config: &ProtocolConfig<'_>, workload: Workload, trials: u64) -> Result<SimulationSummary> {
    let m = config.codebook.population();
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, t);
            let active = draw_active(m, workload, &mut rng)?;
            let tr = run_scheme(config, &active, &mut rng)?;
            Ok(TrialOutcome { active: tr.initial_l, slots: tr.slots_used, sic_derivations: tr.sic_derivations })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = SimulationSummary {
        trials,
        slots: RunningStats::default(),
        active: RunningStats::default(),
        total_slots: 0,
        total_resolved: 0,
        sic_derivations: 0,
    };
    for o in &outcomes {
        summary.slots.push(o.slots as f64);
        summary.active.push(o.active as f64);
        summary.total_slots += o.slots;
        summary.total_resolved += o.active as u64;
        summary.sic_derivations += o.sic_derivations;
    }
    Ok(summary)
}
