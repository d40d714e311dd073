use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::Partition;

use super::trace::{trace_neutral, trace_sweep, Lineages, Snapshots};
use super::trajectory::{generate, Trajectory};
use super::SweepSpec;

pub const RECURRENT_MAX_TWO_N: u32 = 4000;
pub const RECURRENT_MAX_HORIZON: f64 = 5.0;

/// Ancestral partitions of the sample at the requested times (coalescent
/// units, i.e. population time divided by `N`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AncestralSnapshot {
    pub times: Vec<f64>,
    pub partitions: Vec<Partition>,
    /// A sweep was active at the start of the simulated window and was
    /// dropped from the genealogy.
    pub flagged: bool,
    /// Sweeps whose genealogical effect was applied.
    pub sweeps: usize,
}

struct ActiveSweep {
    start: f64,
    r: f64,
    traj: Trajectory,
}

/// Simulates the recurrent-sweep population over a window ending at the
/// present and returns the ancestral partition of `n` sampled chromosomes at
/// each time in `times`.
pub fn simulate_recurrent<R: Rng + ?Sized>(
    spec: &SweepSpec,
    two_n: u32,
    n: usize,
    times: &[f64],
    rng: &mut R,
) -> Result<AncestralSnapshot> {
    if two_n < 2 {
        return Err(Error::Domain(format!("twoN must be at least 2, got {}", two_n)));
    }
    if n < 1 || n > two_n as usize {
        return Err(Error::Domain(format!("n must lie in [1, twoN], got {}", n)));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("times must be finite, nonnegative and nondecreasing".into()));
    }
    if two_n > RECURRENT_MAX_TWO_N {
        return Err(Error::Resource(format!(
            "twoN = {} exceeds the window budget of {}; use the coalescent approximations for larger populations",
            two_n, RECURRENT_MAX_TWO_N
        )));
    }
    let horizon = times.last().copied().unwrap_or(0.0);
    if horizon > RECURRENT_MAX_HORIZON {
        return Err(Error::Resource(format!(
            "latest time {} exceeds the window budget of {}; rescale or split the request",
            horizon, RECURRENT_MAX_HORIZON
        )));
    }
    spec.validate()?;

    let half = two_n as f64 / 2.0;
    let buffer = 10.0 * (two_n as f64).ln();
    let window_start = -(half * horizon + buffer);
    let mut t = window_start - buffer;
    let total = spec.total_rate() / half;
    let log2n = (two_n as f64).ln();

    let mut flagged = false;
    let mut active: Vec<ActiveSweep> = Vec::new();
    let mut busy_until = f64::NEG_INFINITY;
    if total > 0.0 {
        loop {
            t += rng.sample::<f64, _>(Exp1) / total;
            if t >= 0.0 {
                break;
            }
            if t < busy_until {
                continue;
            }
            let mut u = rng.random::<f64>() * spec.total_rate();
            let mut atom = spec.atoms[spec.atoms.len() - 1];
            for a in &spec.atoms {
                if u < a.rate {
                    atom = *a;
                    break;
                }
                u -= a.rate;
            }
            let traj = generate(two_n, atom.s, Some(-t), rng);
            busy_until = t + traj.duration();
            if t < window_start {
                if busy_until > window_start {
                    flagged = true;
                }
                continue;
            }
            active.push(ActiveSweep {
                start: t,
                r: (spec.recombination(atom.x) / log2n).min(1.0),
                traj,
            });
        }
    }

    let mut lin = Lineages::new(n);
    let mut snaps = Snapshots::new(times.iter().map(|u| u * half).collect());
    let mut age = 0.0;
    let mut applied = 0;
    for sw in active.iter().rev() {
        if snaps.done() {
            break;
        }
        let end_age = (-(sw.start + sw.traj.duration())).max(0.0);
        trace_neutral(end_age - age, two_n, &mut lin, &mut age, &mut snaps, rng);
        trace_sweep(&sw.traj, two_n, sw.r, &mut lin, &mut age, &mut snaps, rng);
        applied += 1;
    }
    if !snaps.done() {
        let rest = (half * horizon - age).max(0.0);
        trace_neutral(rest, two_n, &mut lin, &mut age, &mut snaps, rng);
        snaps.finish(&lin);
    }
    Ok(AncestralSnapshot {
        times: times.to_vec(),
        partitions: snaps.taken,
        flagged,
        sweeps: applied,
    })
}
