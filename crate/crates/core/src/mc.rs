//! Replicate harness: per-replicate random streams derived from a master seed,
//! ordered fan-out over the rayon pool, and order-independent summaries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::numeric::CompensatedSum;

/// The random stream type used throughout.
pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `index`: two SplitMix64 rounds over the master seed and
/// the replicate counter.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn replicate_rng(master: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(replicate_seed(master, index))
}

/// Runs `reps` replicates on the current rayon pool. Results come back in
/// replicate order whatever the thread count.
pub fn run_replicates<T, F>(reps: usize, master: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(master, i as u64);
            f(i, &mut rng)
        })
        .collect()
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl Estimate {
    /// Mean and standard error of a sample, summed in the given order.
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let count = xs.len();
        if count == 0 {
            return Estimate {
                mean: f64::NAN,
                se: f64::NAN,
                count,
            };
        }
        let mut s = CompensatedSum::default();
        for &x in xs {
            s.add(x);
        }
        let mean = s.value() / count as f64;
        let mut ss = CompensatedSum::default();
        for &x in xs {
            ss.add((x - mean) * (x - mean));
        }
        let se = if count > 1 {
            (ss.value() / (count - 1) as f64 / count as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Estimate { mean, se, count }
    }

    /// Binomial proportion `hits / count`.
    pub fn proportion(hits: usize, count: usize) -> Estimate {
        let p = hits as f64 / count as f64;
        Estimate {
            mean: p,
            se: (p * (1.0 - p) / count as f64).sqrt(),
            count,
        }
    }

    /// `|mean - target| <= k * se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..1000).map(|i| replicate_seed(7, i)).collect();
        let set: std::collections::HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), 1000);
        assert_eq!(replicate_seed(7, 3), a[3]);
        assert_ne!(replicate_seed(8, 3), a[3]);
    }

    #[test]
    fn results_independent_of_pool_size() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_replicates(500, 42, |_, rng| rng.random::<f64>()))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn estimate_of_constant() {
        let e = Estimate::from_samples(&[2.0; 10]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.se, 0.0);
        let p = Estimate::proportion(25, 100);
        assert!((p.se - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }
}
