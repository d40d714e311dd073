use rand::seq::index::sample;
use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::partition::Partition;

use super::{SweepOutcome, SweepParams};

/// One accepted replacement. Indices are 0-based chromosome slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplacementEvent {
    pub time: f64,
    pub dying: u32,
    pub parent: u32,
    pub recombined: bool,
    pub neutral_parent: u32,
    /// Beneficial-allele count right after the event.
    pub x_after: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventLog {
    pub two_n: u32,
    pub founder: u32,
    pub events: Vec<ReplacementEvent>,
}

impl EventLog {
    /// The path of `X` as (time, value) pairs at its changes, starting from `(0, 1)`.
    pub fn x_path(&self) -> Vec<(f64, u32)> {
        let mut out = vec![(0.0, 1)];
        for e in &self.events {
            if e.x_after != out.last().unwrap().1 {
                out.push((e.time, e.x_after));
            }
        }
        out
    }

    /// Traces the neutral-site ancestry of the given slots back to time 0.
    pub fn trace(&self, sampled: &[u32]) -> Partition {
        let n = sampled.len();
        let mut occupant: Vec<Option<usize>> = vec![None; self.two_n as usize];
        let mut lineages: Vec<Vec<usize>> = Vec::with_capacity(n);
        for (i, &slot) in sampled.iter().enumerate() {
            assert!(occupant[slot as usize].is_none(), "sampled slots must be distinct");
            occupant[slot as usize] = Some(i);
            lineages.push(vec![i]);
        }
        for e in self.events.iter().rev() {
            if let Some(l) = occupant[e.dying as usize].take() {
                match occupant[e.neutral_parent as usize] {
                    Some(m) => {
                        let moved = std::mem::take(&mut lineages[l]);
                        lineages[m].extend(moved);
                    }
                    None => occupant[e.neutral_parent as usize] = Some(l),
                }
            }
        }
        let live = occupant.iter().flatten().count();
        let blocks: Vec<Vec<usize>> = lineages.into_iter().filter(|b| !b.is_empty()).collect();
        assert_eq!(live, blocks.len(), "every lineage resolves to one ancestor");
        Partition::from_blocks(n, blocks).expect("trace covers the sample")
    }
}

/// Simulates one sweep replacement by replacement, keeping the full event
/// log. Proposals arrive at rate `2N`; a proposal to replace a beneficial
/// chromosome by a wild type one is rejected with probability `s`.
pub fn simulate_single_sweep_logged<R: Rng + ?Sized>(params: &SweepParams, rng: &mut R) -> (SweepOutcome, EventLog) {
    let tn = params.two_n();
    let mut allele = vec![false; tn as usize];
    let founder = rng.random_range(0..tn);
    allele[founder as usize] = true;
    let mut x = 1u32;
    let mut t = 0.0;
    let mut events = Vec::new();
    while x > 0 && x < tn {
        t += rng.sample::<f64, _>(Exp1) / tn as f64;
        let d = rng.random_range(0..tn);
        let a = rng.random_range(0..tn);
        if allele[d as usize] && !allele[a as usize] && rng.random::<f64>() < params.s() {
            continue;
        }
        let recombined = rng.random::<f64>() < params.r();
        let c = if recombined { rng.random_range(0..tn) } else { a };
        let before = allele[d as usize];
        allele[d as usize] = allele[a as usize];
        match (before, allele[d as usize]) {
            (false, true) => x += 1,
            (true, false) => x -= 1,
            _ => {}
        }
        events.push(ReplacementEvent {
            time: t,
            dying: d,
            parent: a,
            recombined,
            neutral_parent: c,
            x_after: x,
        });
    }
    let log = EventLog {
        two_n: tn,
        founder,
        events,
    };
    let sampled: Vec<u32> = sample(rng, tn as usize, params.n()).into_iter().map(|i| i as u32).collect();
    let theta = log.trace(&sampled);
    (
        SweepOutcome {
            fixed: x == tn,
            tau: t,
            theta,
        },
        log,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::replicate_rng;

    #[test]
    fn log_is_ordered_and_steps_are_unit() {
        let params = SweepParams::new(40, 0.4, 0.2, 4).unwrap();
        let mut rng = replicate_rng(5, 0);
        for _ in 0..50 {
            let (out, log) = simulate_single_sweep_logged(&params, &mut rng);
            assert!(log.events.windows(2).all(|w| w[0].time < w[1].time));
            let path = log.x_path();
            assert!(path.windows(2).all(|w| w[0].1.abs_diff(w[1].1) == 1));
            assert_eq!(path.last().unwrap().1 == 40, out.fixed);
            assert_eq!(out.tau, log.events.last().map_or(0.0, |e| e.time));
        }
    }

    #[test]
    fn no_recombination_fixation_gives_one_block() {
        let params = SweepParams::new(30, 0.5, 0.0, 5).unwrap();
        let mut rng = replicate_rng(6, 0);
        for _ in 0..100 {
            let (out, _) = simulate_single_sweep_logged(&params, &mut rng);
            if out.fixed {
                assert_eq!(out.theta, Partition::single_block(5));
            }
        }
    }
}
