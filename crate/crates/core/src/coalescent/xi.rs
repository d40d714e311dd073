use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::numeric::choose2;
use crate::partition::{paint_stick_breaking, StickBreakingParams};
use crate::sweep::{SweepAtom, SweepSpec};

use super::path::{GenealogyPath, Merger, PathEnd};

/// The sweep-derived Xi-coalescent at population size `2N`: a sweep from
/// atom `(m, x, s)` occurs at rate `m s` and paints the blocks with a draw
/// from `R(r(x) / (s log 2N), floor(2N s))`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiSweepMeasure {
    spec: SweepSpec,
    two_n: u64,
    marks: Vec<StickBreakingParams>,
}

impl XiSweepMeasure {
    pub fn new(spec: SweepSpec, two_n: u64) -> Result<Self> {
        if two_n < 2 {
            return Err(Error::Domain(format!("twoN must be at least 2, got {}", two_n)));
        }
        spec.validate()?;
        let log2n = (two_n as f64).ln();
        let mut marks = Vec::with_capacity(spec.atoms.len());
        for (i, a) in spec.atoms.iter().enumerate() {
            let m = (two_n as f64 * a.s).floor() as u64;
            if m < 1 {
                return Err(Error::DegenerateMark(format!(
                    "atoms[{}]: floor(2N s) = 0 for 2N = {}, s = {}",
                    i, two_n, a.s
                )));
            }
            let theta = spec.recombination(a.x) / (a.s * log2n);
            if theta > 1.0 {
                return Err(Error::Domain(format!(
                    "atoms[{}]: r(x) / (s log 2N) = {} exceeds 1",
                    i, theta
                )));
            }
            marks.push(StickBreakingParams::new(theta, m)?);
        }
        Ok(XiSweepMeasure { spec, two_n, marks })
    }

    pub fn spec(&self) -> &SweepSpec {
        &self.spec
    }

    pub fn two_n(&self) -> u64 {
        self.two_n
    }

    /// Each atom with its stick-breaking mark.
    pub fn marks(&self) -> impl Iterator<Item = (&SweepAtom, StickBreakingParams)> {
        self.spec.atoms.iter().zip(self.marks.iter().copied())
    }
}

/// Samples the Xi-coalescent on `{1..n}`: pairs merge at rate 1, sweep events
/// arrive at the total mutation rate and act with probability `s`.
pub fn simulate_xi_sweep<R: Rng + ?Sized>(
    measure: &XiSweepMeasure,
    n: usize,
    horizon: Option<f64>,
    rng: &mut R,
) -> GenealogyPath {
    let total = measure.spec.total_rate();
    let mut path = GenealogyPath {
        n,
        mergers: Vec::new(),
        end: PathEnd::Absorbed,
        unchanged_events: 0,
    };
    let (mut b, mut t) = (n, 0.0);
    while b >= 2 {
        let pair = choose2(b as u64);
        let rate = pair + total;
        t += rng.sample::<f64, _>(Exp1) / rate;
        if let Some(h) = horizon {
            if t > h {
                path.end = PathEnd::Truncated { horizon: h };
                return path;
            }
        }
        let mut u = rng.random::<f64>() * rate;
        if u < pair {
            let i = rng.random_range(0..b);
            let mut j = rng.random_range(0..b - 1);
            if j >= i {
                j += 1;
            }
            path.mergers.push(Merger {
                time: t,
                groups: vec![vec![i.min(j), i.max(j)]],
            });
            b -= 1;
            continue;
        }
        u -= pair;
        let mut chosen = measure.marks.len() - 1;
        for (idx, a) in measure.spec.atoms.iter().enumerate() {
            if u < a.rate {
                chosen = idx;
                break;
            }
            u -= a.rate;
        }
        let atom = measure.spec.atoms[chosen];
        if !rng.random_bool(atom.s) {
            path.unchanged_events += 1;
            continue;
        }
        let painted = paint_stick_breaking(measure.marks[chosen], b, rng);
        let groups: Vec<Vec<usize>> = painted.blocks().iter().filter(|g| g.len() >= 2).cloned().collect();
        if groups.is_empty() {
            path.unchanged_events += 1;
            continue;
        }
        b = painted.block_count();
        path.mergers.push(Merger { time: t, groups });
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::replicate_rng;

    #[test]
    fn unlinked_free_atom_merges_everything() {
        let spec = SweepSpec::new(
            1.0,
            vec![SweepAtom { rate: 1e6, x: 0.0, s: 1.0 }],
            vec![[-1.0, 1.0], [0.0, 0.0], [1.0, 1.0]],
        )
        .unwrap();
        let xi = XiSweepMeasure::new(spec, 1000).unwrap();
        let mut rng = replicate_rng(2, 0);
        for _ in 0..50 {
            let p = simulate_xi_sweep(&xi, 6, None, &mut rng);
            assert_eq!(p.mergers.len(), 1);
            assert_eq!(p.mergers[0].groups, vec![vec![0, 1, 2, 3, 4, 5]]);
        }
    }

    #[test]
    fn guards() {
        let spec = SweepSpec::single_site(1.0, 0.001, 0.5).unwrap();
        assert!(matches!(XiSweepMeasure::new(spec, 200), Err(Error::DegenerateMark(_))));
        let spec = SweepSpec::single_site(1.0, 0.5, 50.0).unwrap();
        assert!(matches!(XiSweepMeasure::new(spec, 200), Err(Error::Domain(_))));
    }
}
