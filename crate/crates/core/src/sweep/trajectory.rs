use rand::Rng;
use rand_distr::Exp1;

/// Embedded jump chain of the beneficial-allele count `X` together with the
/// holding time spent at each visited level (population time).
#[derive(Debug, Clone)]
pub(crate) struct Trajectory {
    pub levels: Vec<u32>,
    pub holds: Vec<f64>,
    /// `Some(true)` fixed, `Some(false)` lost, `None` cut off by the time limit.
    pub outcome: Option<bool>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.holds.iter().sum()
    }

    pub fn last_level(&self) -> u32 {
        match self.outcome {
            Some(true) => *self.levels.last().unwrap() + 1,
            Some(false) => 0,
            None => *self.levels.last().unwrap(),
        }
    }
}

/// Rate at which `X` leaves level `k`.
pub(crate) fn exit_rate(k: u32, two_n: u32, s: f64) -> f64 {
    let (k, tn) = (k as f64, two_n as f64);
    k * (tn - k) * (2.0 - s) / tn
}

/// Runs `X` from one mutant until absorption, or until `limit` population
/// time has elapsed.
pub(crate) fn generate<R: Rng + ?Sized>(two_n: u32, s: f64, limit: Option<f64>, rng: &mut R) -> Trajectory {
    let up = 1.0 / (2.0 - s);
    let mut levels = Vec::new();
    let mut holds = Vec::new();
    let mut k = 1u32;
    let mut elapsed = 0.0;
    loop {
        if k == 0 || k == two_n {
            return Trajectory {
                levels,
                holds,
                outcome: Some(k == two_n),
            };
        }
        let h: f64 = rng.sample::<f64, _>(Exp1) / exit_rate(k, two_n, s);
        if let Some(lim) = limit {
            if elapsed + h > lim {
                levels.push(k);
                holds.push(lim - elapsed);
                return Trajectory {
                    levels,
                    holds,
                    outcome: None,
                };
            }
        }
        levels.push(k);
        holds.push(h);
        elapsed += h;
        if rng.random::<f64>() < up {
            k += 1;
        } else {
            k -= 1;
        }
    }
}
