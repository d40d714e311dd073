use std::collections::BTreeMap;

use super::{enumerate_partitions, Partition, StickBreakingParams};
use crate::error::{Error, Result};

/// A probability distribution on the partitions of `{0..n}`, keyed by
/// canonical partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionDistribution {
    n: usize,
    weights: BTreeMap<Partition, f64>,
}

impl PartitionDistribution {
    /// Validates that the weights are nonnegative and sum to one within 1e-12.
    pub fn new(n: usize, weights: BTreeMap<Partition, f64>) -> Result<Self> {
        let mut total = 0.0;
        for (p, &w) in &weights {
            if p.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.n(),
                });
            }
            if !(w >= 0.0) {
                return Err(Error::Domain(format!("weight {} for {} is negative", w, p)));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {}", total)));
        }
        Ok(PartitionDistribution { n, weights })
    }

    /// Empirical distribution of a sample of partitions.
    pub fn empirical<'a, I>(n: usize, samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Partition>,
    {
        let mut counts: BTreeMap<Partition, u64> = BTreeMap::new();
        let mut total = 0u64;
        for p in samples {
            if p.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.n(),
                });
            }
            *counts.entry(p.clone()).or_insert(0) += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::Domain("empty sample".into()));
        }
        Ok(Self::from_counts(n, &counts, total))
    }

    pub(crate) fn from_counts(n: usize, counts: &BTreeMap<Partition, u64>, total: u64) -> Self {
        let weights = counts
            .iter()
            .map(|(p, &c)| (p.clone(), c as f64 / total as f64))
            .collect();
        PartitionDistribution { n, weights }
    }

    pub fn point_mass(p: Partition) -> Self {
        let n = p.n();
        let mut weights = BTreeMap::new();
        weights.insert(p, 1.0);
        PartitionDistribution { n, weights }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prob(&self, p: &Partition) -> f64 {
        self.weights.get(p).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Partition, f64)> {
        self.weights.iter().map(|(p, &w)| (p, w))
    }

    /// Total variation distance `1/2 sum |d1(pi) - d2(pi)|`.
    pub fn tv_distance(&self, other: &PartitionDistribution) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut sum = 0.0;
        for (p, &w) in &self.weights {
            sum += (w - other.prob(p)).abs();
        }
        for (p, &w) in &other.weights {
            if !self.weights.contains_key(p) {
                sum += w;
            }
        }
        Ok((0.5 * sum).min(1.0))
    }
}

/// The two-coin law `Q_{p,n}`, by enumeration of all `2^n` coin outcomes.
pub fn two_coin_law(p: f64, n: usize) -> Result<PartitionDistribution> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {} outside [0,1]", p)));
    }
    if n > super::ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            what: "n",
            value: n,
            limit: super::ENUMERATION_LIMIT,
        });
    }
    let mut weights = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        let heads = mask.count_ones() as i32;
        let w = p.powi(heads) * (1.0 - p).powi(n as i32 - heads);
        let labels: Vec<usize> = (0..n)
            .map(|i| if mask & (1 << i) != 0 { n } else { i })
            .collect();
        *weights.entry(Partition::from_labels(&labels)).or_insert(0.0) += w;
    }
    weights.retain(|_, w| *w > 0.0);
    Ok(PartitionDistribution { n, weights })
}

/// Spreads a law on block-size shapes uniformly over the partitions of each
/// shape. Exchangeable laws are determined by their shape law.
pub fn shape_law_to_distribution(
    n: usize,
    shape_law: &BTreeMap<Vec<usize>, f64>,
) -> Result<PartitionDistribution> {
    let parts = enumerate_partitions(n)?;
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for p in &parts {
        *counts.entry(p.shape()).or_insert(0) += 1;
    }
    let mut weights = BTreeMap::new();
    for p in parts {
        let shape = p.shape();
        let w = shape_law.get(&shape).copied().unwrap_or(0.0);
        if w > 0.0 {
            weights.insert(p, w / counts[&shape] as f64);
        }
    }
    PartitionDistribution::new(n, weights)
}

/// Exact paintbox law `Q_{R(theta,m),n}` of the stick-breaking measure.
///
/// Elements are dropped onto the fragments in breaking order: at index `k`
/// (active with probability `theta`) each of the `r` remaining elements lands
/// independently with probability `W_k ~ Beta(1, k-1)`, so `j` of them land
/// with probability `C(r,j) E[W^j (1-W)^(r-j)]`; survivors end on the first
/// fragment. The state is the count of remaining elements plus the sizes of
/// the groups formed so far.
pub fn stick_breaking_law(params: StickBreakingParams, n: usize) -> Result<PartitionDistribution> {
    if n > 8 {
        return Err(Error::SizeLimit {
            what: "n",
            value: n,
            limit: 8,
        });
    }
    let theta = params.theta();
    let mut finished: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut finish = |mut groups: Vec<usize>, rest: usize, w: f64| {
        if rest > 0 {
            groups.push(rest);
        }
        groups.sort_unstable_by(|a, b| b.cmp(a));
        *finished.entry(groups).or_insert(0.0) += w;
    };
    let mut states: BTreeMap<(usize, Vec<usize>), f64> = BTreeMap::new();
    if n <= 1 {
        finish(vec![], n, 1.0);
    } else {
        states.insert((n, vec![]), 1.0);
    }
    let binom = binomial_table(n);
    let mut k = params.m();
    while k >= 2 && !states.is_empty() && theta > 0.0 {
        let mut next: BTreeMap<(usize, Vec<usize>), f64> = BTreeMap::new();
        for ((r, groups), w) in std::mem::take(&mut states) {
            // inactive index, or active with nothing landing
            let a = (k - 1) as f64;
            let none = (1.0 - theta) + theta * a / (a + r as f64);
            *next.entry((r, groups.clone())).or_insert(0.0) += w * none;
            for j in 1..=r {
                let base = a + (r - j) as f64;
                let mut moment = a;
                for t in 0..=j {
                    moment /= base + t as f64;
                }
                for t in 1..=j {
                    moment *= t as f64;
                }
                let pj = theta * binom[r][j] * moment;
                let mut g = groups.clone();
                g.push(j);
                let left = r - j;
                if left <= 1 {
                    finish(g, left, w * pj);
                } else {
                    *next.entry((left, g)).or_insert(0.0) += w * pj;
                }
            }
        }
        states = next;
        k -= 1;
    }
    for ((r, groups), w) in states {
        finish(groups, r, w);
    }
    let total: f64 = finished.values().sum();
    for v in finished.values_mut() {
        *v /= total;
    }
    shape_law_to_distribution(n, &finished)
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1.0;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j < i { t[i - 1][j] } else { 0.0 };
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{paint_stick_breaking, sample_paintbox, sample_stick_breaking, sample_two_coin};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn two_coin_law_values() {
        let q = two_coin_law(0.5, 3).unwrap();
        assert!((q.prob(&p("{1,2}{3}")) - 0.125).abs() < 1e-15);
        // kappa_0: no heads or exactly one head
        assert!((q.prob(&Partition::singletons(3)) - 0.5).abs() < 1e-15);
        assert_eq!(two_coin_law(0.0, 5).unwrap().prob(&Partition::singletons(5)), 1.0);
        assert_eq!(two_coin_law(1.0, 4).unwrap().prob(&Partition::single_block(4)), 1.0);
    }

    #[test]
    fn two_coin_closed_form() {
        let (pp, n) = (0.3, 5);
        let q = two_coin_law(pp, n).unwrap();
        for part in enumerate_partitions(n).unwrap() {
            let big: Vec<_> = part.blocks().iter().filter(|b| b.len() > 1).collect();
            let expect = match big.len() {
                0 => (1.0 - pp).powi(n as i32) + n as f64 * pp * (1.0 - pp).powi(n as i32 - 1),
                1 => pp.powi(big[0].len() as i32) * (1.0 - pp).powi((n - big[0].len()) as i32),
                _ => 0.0,
            };
            assert!((q.prob(&part) - expect).abs() < 1e-14, "{}", part);
        }
    }

    #[test]
    fn tv_examples() {
        let a = two_coin_law(0.5, 2).unwrap();
        let b = two_coin_law(1.0, 2).unwrap();
        // Q_{0.5,2} puts 1/4 on {1,2}, Q_{1,2} puts all of its mass there
        assert!((a.tv_distance(&b).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(a.tv_distance(&a).unwrap(), 0.0);
        let x = PartitionDistribution::point_mass(Partition::singletons(3));
        let y = PartitionDistribution::point_mass(Partition::single_block(3));
        assert_eq!(x.tv_distance(&y).unwrap(), 1.0);
        assert!(x.tv_distance(&a).is_err());
    }

    #[test]
    fn empirical_two_coin_matches_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            for &pp in &[0.2, 0.5, 0.9] {
                let draws: Vec<_> = (0..1_000_000 / 4)
                    .map(|_| sample_two_coin(pp, n, &mut rng).unwrap())
                    .collect();
                let emp = PartitionDistribution::empirical(n, &draws).unwrap();
                let tv = emp.tv_distance(&two_coin_law(pp, n).unwrap()).unwrap();
                assert!(tv < 0.005, "n={} p={} tv={}", n, pp, tv);
            }
        }
    }

    #[test]
    fn stick_breaking_law_degenerate_cases() {
        let one = StickBreakingParams::new(0.7, 1).unwrap();
        assert_eq!(stick_breaking_law(one, 4).unwrap().prob(&Partition::single_block(4)), 1.0);
        let zero = StickBreakingParams::new(0.0, 50).unwrap();
        assert_eq!(stick_breaking_law(zero, 4).unwrap().prob(&Partition::single_block(4)), 1.0);
        // theta = 1, m = 2, n = 2: together iff both on the same side of U
        let half = stick_breaking_law(StickBreakingParams::new(1.0, 2).unwrap(), 2).unwrap();
        // E[U^2 + (1-U)^2] = 2/3
        assert!((half.prob(&Partition::single_block(2)) - 2.0 / 3.0).abs() < 1e-14);
    }

    /// Monte Carlo over the materialised mass vector and over direct painting
    /// both agree with the dynamic program.
    #[test]
    fn stick_breaking_law_matches_samplers() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for &(theta, m, n) in &[(0.3, 40u64, 3usize), (0.8, 7, 4), (1.0, 3, 4)] {
            let params = StickBreakingParams::new(theta, m).unwrap();
            let exact = stick_breaking_law(params, n).unwrap();
            let reps = 200_000;
            let via_vector: Vec<_> = (0..reps)
                .map(|_| sample_paintbox(&sample_stick_breaking(params, &mut rng), n, &mut rng))
                .collect();
            let via_paint: Vec<_> = (0..reps)
                .map(|_| paint_stick_breaking(params, n, &mut rng))
                .collect();
            for draws in [via_vector, via_paint] {
                let emp = PartitionDistribution::empirical(n, &draws).unwrap();
                let tv = emp.tv_distance(&exact).unwrap();
                assert!(tv < 0.006, "theta={} m={} n={} tv={}", theta, m, n, tv);
            }
        }
    }
}
