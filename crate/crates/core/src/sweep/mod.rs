//! Forward Moran-model sweeps and the backward trace of the neutral site.

mod explicit;
mod recurrent;
mod spec;
mod trace;
mod trajectory;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::{run_replicates, Estimate};
use crate::partition::Partition;

pub use explicit::{simulate_single_sweep_logged, EventLog, ReplacementEvent};
pub use recurrent::{simulate_recurrent, AncestralSnapshot, RECURRENT_MAX_HORIZON, RECURRENT_MAX_TWO_N};
pub use spec::{SweepAtom, SweepSpec};

/// Parameters of one sweep in a population of `two_n` chromosomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepParams {
    two_n: u32,
    s: f64,
    r: f64,
    n: usize,
}

impl SweepParams {
    pub fn new(two_n: u32, s: f64, r: f64, n: usize) -> Result<Self> {
        if two_n < 2 {
            return Err(Error::Domain(format!("twoN must be at least 2, got {}", two_n)));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("s must lie in (0, 1), got {}", s)));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("r must lie in [0, 1], got {}", r)));
        }
        if n < 1 || n > two_n as usize {
            return Err(Error::Domain(format!("n must lie in [1, twoN], got {}", n)));
        }
        Ok(SweepParams { two_n, s, r, n })
    }

    pub fn two_n(&self) -> u32 {
        self.two_n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `alpha = r log(2N) / s`.
    pub fn alpha(&self) -> f64 {
        self.r * (self.two_n as f64).ln() / self.s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub fixed: bool,
    /// Duration in population time.
    pub tau: f64,
    pub theta: Partition,
}

/// Probability that a walk with up-probability `1/(2-s)` started at `k`
/// hits `j` before `i`.
pub fn hitting_probability(i: u64, j: u64, k: u64, s: f64) -> Result<f64> {
    if !(i <= k && k <= j && i < j) {
        return Err(Error::Domain(format!("need i <= k <= j and i < j, got ({}, {}, {})", i, j, k)));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s must lie in (0, 1), got {}", s)));
    }
    if k == i {
        return Ok(0.0);
    }
    let lq = (-s).ln_1p();
    Ok((((k - i) as f64) * lq).exp_m1() / (((j - i) as f64) * lq).exp_m1())
}

/// Simulates one sweep from a single mutant until fixation or loss, samples
/// `n` chromosomes at the end and traces their neutral-site ancestry back to
/// the time of the mutation.
pub fn simulate_single_sweep<R: Rng + ?Sized>(params: &SweepParams, rng: &mut R) -> SweepOutcome {
    let traj = trajectory::generate(params.two_n, params.s, None, rng);
    let mut lin = trace::Lineages::new(params.n);
    let mut snaps = trace::Snapshots::new(Vec::new());
    let mut age = 0.0;
    trace::trace_sweep(&traj, params.two_n, params.r, &mut lin, &mut age, &mut snaps, rng);
    SweepOutcome {
        fixed: traj.outcome == Some(true),
        tau: traj.duration(),
        theta: lin.partition(),
    }
}

/// Mean sweep duration over `reps` unconditioned sweeps.
pub fn sweep_duration_mean(params: &SweepParams, reps: usize, seed: u64) -> Estimate {
    let taus = run_replicates(reps, seed, |_, rng| {
        trajectory::generate(params.two_n, params.s, None, rng).duration()
    });
    Estimate::from_samples(&taus)
}

/// Frequency of the event that the mutant is lost yet the sample's
/// neutral-site ancestry is not all singletons.
pub fn prob_coalescence_given_loss(params: &SweepParams, reps: usize, seed: u64) -> Estimate {
    let hits = run_replicates(reps, seed, |_, rng| {
        let out = simulate_single_sweep(params, rng);
        !out.fixed && !out.theta.is_singletons()
    });
    Estimate::proportion(hits.iter().filter(|&&h| h).count(), reps)
}
