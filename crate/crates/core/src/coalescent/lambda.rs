use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::choose2;

use super::measure::LambdaMeasure;
use super::path::{GenealogyPath, Merger, PathEnd};

fn random_pair<R: Rng + ?Sized>(b: usize, rng: &mut R) -> Vec<usize> {
    let i = rng.random_range(0..b);
    let mut j = rng.random_range(0..b - 1);
    if j >= i {
        j += 1;
    }
    vec![i.min(j), i.max(j)]
}

/// Indices of blocks whose `p`-coin came up heads.
fn coin_group<R: Rng + ?Sized>(b: usize, p: f64, rng: &mut R) -> Vec<usize> {
    (0..b).filter(|_| rng.random_bool(p)).collect()
}

/// Samples a Lambda-coalescent on `{1..n}`: each pair of blocks merges at
/// rate `a`, and at rate `eta([0,1])` a location `p ~ eta` is drawn and all
/// blocks whose `p`-coin lands heads merge. Runs to absorption, or to
/// `horizon` if given.
pub fn simulate_lambda<R: Rng + ?Sized>(
    measure: &LambdaMeasure,
    n: usize,
    horizon: Option<f64>,
    rng: &mut R,
) -> Result<GenealogyPath> {
    let eta = measure.eta_mass();
    if !eta.is_finite() {
        return Err(Error::UnsupportedMeasure(
            "eta has infinite mass; the p-merger construction needs a finite eta".into(),
        ));
    }
    let a = measure.kingman_mass();
    if a == 0.0 && eta == 0.0 && horizon.is_none() {
        return Err(Error::Domain("the zero measure never merges; give a horizon".into()));
    }
    let mut path = GenealogyPath {
        n,
        mergers: Vec::new(),
        end: PathEnd::Absorbed,
        unchanged_events: 0,
    };
    let (mut b, mut t) = (n, 0.0);
    while b >= 2 {
        let pair = a * choose2(b as u64);
        let rate = pair + eta;
        if rate == 0.0 {
            path.end = PathEnd::Truncated {
                horizon: horizon.unwrap(),
            };
            return Ok(path);
        }
        t += rng.sample::<f64, _>(Exp1) / rate;
        if let Some(h) = horizon {
            if t > h {
                path.end = PathEnd::Truncated { horizon: h };
                return Ok(path);
            }
        }
        let group = if rng.random::<f64>() * rate < pair {
            random_pair(b, rng)
        } else {
            coin_group(b, measure.sample_eta(rng)?, rng)
        };
        if group.len() < 2 {
            path.unchanged_events += 1;
            continue;
        }
        b -= group.len() - 1;
        path.mergers.push(Merger {
            time: t,
            groups: vec![group],
        });
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledPaths {
    pub lambda: GenealogyPath,
    pub kingman: GenealogyPath,
    /// No `eta`-event merged two or more blocks before absorption, so the
    /// paths coincide.
    pub identical: bool,
}

/// Runs Kingman's coalescent and the `delta_0 + Lambda_0` coalescent off the
/// same pair-merger Poisson points; `eta`-events drive only the latter.
pub fn coupled_kingman_lambda<R: Rng + ?Sized>(measure: &LambdaMeasure, n: usize, rng: &mut R) -> Result<CoupledPaths> {
    if measure.kingman_mass() != 1.0 {
        return Err(Error::UnsupportedMeasure(
            "the Kingman coupling needs a unit mass at 0".into(),
        ));
    }
    let eta = measure.eta_mass();
    if !eta.is_finite() {
        return Err(Error::UnsupportedMeasure("eta has infinite mass".into()));
    }
    let blank = GenealogyPath {
        n,
        mergers: Vec::new(),
        end: PathEnd::Absorbed,
        unchanged_events: 0,
    };
    let (mut lam, mut king) = (blank.clone(), blank);
    let (mut bl, mut bk, mut t) = (n, n, 0.0);
    let mut identical = true;
    while bk >= 2 {
        let pair = choose2(bk as u64);
        let extra = if bl >= 2 { eta } else { 0.0 };
        let rate = pair + extra;
        t += rng.sample::<f64, _>(Exp1) / rate;
        if rng.random::<f64>() * rate < pair {
            let g = random_pair(bk, rng);
            if g[1] < bl {
                lam.mergers.push(Merger {
                    time: t,
                    groups: vec![g.clone()],
                });
                bl -= 1;
            }
            king.mergers.push(Merger { time: t, groups: vec![g] });
            bk -= 1;
        } else {
            let g = coin_group(bl, measure.sample_eta(rng)?, rng);
            if g.len() < 2 {
                lam.unchanged_events += 1;
                continue;
            }
            identical = false;
            bl -= g.len() - 1;
            lam.mergers.push(Merger { time: t, groups: vec![g] });
        }
    }
    Ok(CoupledPaths {
        lambda: lam,
        kingman: king,
        identical,
    })
}
