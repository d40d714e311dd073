//! Monte Carlo ensembles behind the commands, with their summaries.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use sweepcoal::coalescent::{
    coupled_kingman_lambda, lambda_lattice_law, simulate_lambda, simulate_xi_sweep, GenealogyPath, LambdaMeasure,
    XiSweepMeasure,
};
use sweepcoal::mc::{run_replicates, Estimate};
use sweepcoal::numeric::harmonic;
use sweepcoal::partition::{stick_breaking_law, two_coin_law, Partition, PartitionDistribution, StickBreakingParams};
use sweepcoal::stats::{
    d_statistics, overlay_mutations, sample_statistics, DStatConfig, DStatistics, Normalization, SampleStats,
};
use sweepcoal::sweep::{simulate_recurrent, simulate_single_sweep, AncestralSnapshot, SweepOutcome, SweepParams, SweepSpec};
use sweepcoal::{Error, Result};

/// Largest sample size for which partition laws are enumerated.
pub const ENUMERATION_LIMIT: usize = 5;

/// Total variation distance with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvEstimate {
    pub tv: f64,
    pub se: f64,
}

impl TvEstimate {
    /// `self` exceeds `other` by more than `k` combined standard errors.
    pub fn exceeds(&self, other: &TvEstimate, k: f64) -> bool {
        self.tv - other.tv > k * (self.se * self.se + other.se * other.se).sqrt()
    }
}

fn counts<'a, I: IntoIterator<Item = &'a Partition>>(xs: I) -> BTreeMap<&'a Partition, usize> {
    let mut m = BTreeMap::new();
    for x in xs {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        0.5
    } else if x < 0.0 {
        -0.5
    } else {
        0.0
    }
}

/// Weighted variance `sum c_i (g_i - mean)^2 / (m - 1)` of a statistic taking
/// value `g_i` on `c_i` of `m` draws.
fn grouped_variance(cells: &[(f64, usize)], m: usize) -> f64 {
    if m < 2 {
        return f64::INFINITY;
    }
    let mean = cells.iter().map(|&(g, c)| g * c as f64).sum::<f64>() / m as f64;
    cells.iter().map(|&(g, c)| c as f64 * (g - mean).powi(2)).sum::<f64>() / (m - 1) as f64
}

/// TV between the empirical law of `samples` and an exact law.
pub fn tv_to_exact(samples: &[Partition], law: &PartitionDistribution) -> TvEstimate {
    let m = samples.len();
    let c = counts(samples);
    let mut support: BTreeSet<&Partition> = c.keys().copied().collect();
    support.extend(law.iter().map(|(p, _)| p));
    let mut tv = 0.0;
    let mut cells = Vec::new();
    for p in support {
        let k = c.get(p).copied().unwrap_or(0);
        let d = k as f64 / m as f64 - law.prob(p);
        tv += 0.5 * d.abs();
        cells.push((sign(d), k));
    }
    TvEstimate {
        tv,
        se: (grouped_variance(&cells, m) / m as f64).sqrt(),
    }
}

/// TV between two empirical laws.
pub fn tv_between(a: &[Partition], b: &[Partition]) -> TvEstimate {
    let (ca, cb) = (counts(a), counts(b));
    let support: BTreeSet<&Partition> = ca.keys().chain(cb.keys()).copied().collect();
    let mut tv = 0.0;
    let (mut cells_a, mut cells_b) = (Vec::new(), Vec::new());
    for p in support {
        let ka = ca.get(p).copied().unwrap_or(0);
        let kb = cb.get(p).copied().unwrap_or(0);
        let d = ka as f64 / a.len() as f64 - kb as f64 / b.len() as f64;
        tv += 0.5 * d.abs();
        cells_a.push((sign(d), ka));
        cells_b.push((sign(d), kb));
    }
    let var = grouped_variance(&cells_a, a.len()) / a.len() as f64 + grouped_variance(&cells_b, b.len()) / b.len() as f64;
    TvEstimate { tv, se: var.sqrt() }
}

/// Empirical law as `(partition, frequency)` pairs in canonical order.
pub fn empirical_law(samples: &[Partition]) -> Vec<(String, f64)> {
    counts(samples)
        .into_iter()
        .map(|(p, k)| (p.to_string(), k as f64 / samples.len() as f64))
        .collect()
}

pub fn sweep_ensemble(params: &SweepParams, reps: usize, seed: u64) -> Vec<SweepOutcome> {
    run_replicates(reps, seed, |_, rng| simulate_single_sweep(params, rng))
}

/// `s / (1 - (1 - s)^{2N})`.
pub fn fixation_probability(two_n: u32, s: f64) -> f64 {
    -s / ((two_n as f64) * (-s).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
    pub fixation: Estimate,
    pub fixation_predicted: f64,
    pub duration: Estimate,
    pub duration_bound: f64,
    /// Frequency of loss with a non-trivial ancestral partition.
    pub loss_with_coalescence: Estimate,
    pub fixed: usize,
    /// Law of the ancestral partition given fixation.
    pub law_given_fixation: Vec<(String, f64)>,
    pub two_coin_p: f64,
    pub tv_two_coin: Option<TvEstimate>,
    pub stick_breaking: (f64, u64),
    pub tv_stick_breaking: Option<TvEstimate>,
}

pub fn summarize_sweeps(params: &SweepParams, outcomes: &[SweepOutcome], seed: u64, tv: bool) -> Result<SweepSummary> {
    let n = params.n();
    if tv && n > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            what: "n",
            value: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let reps = outcomes.len();
    let fixed: Vec<Partition> = outcomes.iter().filter(|o| o.fixed).map(|o| o.theta.clone()).collect();
    let taus: Vec<f64> = outcomes.iter().map(|o| o.tau).collect();
    let lost_coal = outcomes.iter().filter(|o| !o.fixed && !o.theta.is_singletons()).count();
    let p = (-params.alpha()).exp();
    let theta = params.r() / params.s();
    let m = (params.two_n() as f64 * params.s()).floor() as u64;
    let (tv_two_coin, tv_stick_breaking) = if tv && !fixed.is_empty() {
        let q = two_coin_law(p, n)?;
        let r = stick_breaking_law(StickBreakingParams::new(theta, m.max(1))?, n)?;
        (Some(tv_to_exact(&fixed, &q)), Some(tv_to_exact(&fixed, &r)))
    } else {
        (None, None)
    };
    let half = params.two_n() as f64 / 2.0;
    Ok(SweepSummary {
        reps,
        seed,
        alpha: params.alpha(),
        fixation: Estimate::proportion(fixed.len(), reps),
        fixation_predicted: fixation_probability(params.two_n(), params.s()),
        duration: Estimate::from_samples(&taus),
        duration_bound: 4.0 * (half.ln() + 1.0),
        loss_with_coalescence: Estimate::proportion(lost_coal, reps),
        fixed: fixed.len(),
        law_given_fixation: empirical_law(&fixed),
        two_coin_p: p,
        tv_two_coin,
        stick_breaking: (theta, m),
        tv_stick_breaking,
    })
}

pub fn recurrent_ensemble(
    spec: &SweepSpec,
    two_n: u32,
    n: usize,
    times: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<AncestralSnapshot>> {
    run_replicates(reps, seed, |_, rng| simulate_recurrent(spec, two_n, n, times, rng))
        .into_iter()
        .collect()
}

/// Ancestral-process laws at one time and their pairwise distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeComparison {
    pub time: f64,
    pub psi: Vec<(String, f64)>,
    pub lambda_exact: Option<Vec<(String, f64)>>,
    pub lambda_empirical: Vec<(String, f64)>,
    pub xi_empirical: Option<Vec<(String, f64)>>,
    pub tv_psi_lambda_exact: Option<TvEstimate>,
    pub tv_psi_lambda: TvEstimate,
    pub tv_psi_xi: Option<TvEstimate>,
    pub tv_lambda_xi: Option<TvEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrentSummary {
    pub reps: usize,
    pub seed: u64,
    pub two_n: u32,
    pub n: usize,
    pub flagged: usize,
    pub sweeps: Estimate,
    pub lambda_measure: LambdaMeasure,
    /// Why the multiple-merger comparison is absent, if it is.
    pub xi_unavailable: Option<String>,
    pub comparisons: Vec<TimeComparison>,
}

/// Compares the recurrent-sweep ancestry against the Lambda- and
/// Xi-coalescent approximations. The coalescent samplers use seeds derived
/// from `seed` so the three ensembles are independent.
pub fn compare_recurrent(
    spec: &SweepSpec,
    two_n: u32,
    n: usize,
    times: &[f64],
    snapshots: &[AncestralSnapshot],
    seed: u64,
) -> Result<RecurrentSummary> {
    let reps = snapshots.len();
    let lambda = LambdaMeasure::from_sweep_spec(spec);
    let (xi, xi_unavailable) = match XiSweepMeasure::new(spec.clone(), two_n as u64) {
        Ok(x) => (Some(x), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut comparisons = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let psi: Vec<Partition> = snapshots.iter().map(|s| s.partitions[i].clone()).collect();
        let lam: Vec<Partition> = run_replicates(reps, seed.wrapping_add(1 + 2 * i as u64), |_, rng| {
            simulate_lambda(&lambda, n, Some(t), rng).map(|p| p.partition_at(t))
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let xis: Option<Vec<Partition>> = xi.as_ref().map(|x| {
            run_replicates(reps, seed.wrapping_add(2 + 2 * i as u64), |_, rng| {
                simulate_xi_sweep(x, n, Some(t), rng).partition_at(t)
            })
        });
        let exact = if n <= ENUMERATION_LIMIT {
            Some(lambda_lattice_law(&lambda, n, t)?)
        } else {
            None
        };
        comparisons.push(TimeComparison {
            time: t,
            psi: empirical_law(&psi),
            lambda_exact: exact
                .as_ref()
                .map(|l| l.iter().map(|(p, w)| (p.to_string(), w)).collect()),
            lambda_empirical: empirical_law(&lam),
            xi_empirical: xis.as_deref().map(empirical_law),
            tv_psi_lambda_exact: exact.as_ref().map(|l| tv_to_exact(&psi, l)),
            tv_psi_lambda: tv_between(&psi, &lam),
            tv_psi_xi: xis.as_deref().map(|x| tv_between(&psi, x)),
            tv_lambda_xi: xis.as_deref().map(|x| tv_between(&lam, x)),
        });
    }
    let sweeps: Vec<f64> = snapshots.iter().map(|s| s.sweeps as f64).collect();
    Ok(RecurrentSummary {
        reps,
        seed,
        two_n,
        n,
        flagged: snapshots.iter().filter(|s| s.flagged).count(),
        sweeps: Estimate::from_samples(&sweeps),
        lambda_measure: lambda,
        xi_unavailable,
        comparisons,
    })
}

/// Per-replicate summary statistics of a mutated genealogy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatsRow {
    pub stats: SampleStats,
    pub d: DStatistics,
}

pub fn stats_ensemble(
    measure: &LambdaMeasure,
    n: usize,
    config: &DStatConfig,
    reps: usize,
    seed: u64,
) -> Result<Vec<StatsRow>> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {}", n)));
    }
    if config.normalization == Normalization::Classical && n < 4 {
        return Err(Error::Domain("classical normalization needs n >= 4".into()));
    }
    run_replicates(reps, seed, |_, rng| {
        let path = simulate_lambda(measure, n, None, rng)?;
        let g = overlay_mutations(&path, config.theta, false, rng)?;
        let stats = sample_statistics(&g);
        Ok(StatsRow {
            stats,
            d: d_statistics(&stats, config)?,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsSummary {
    pub reps: usize,
    pub seed: u64,
    pub n: usize,
    pub theta: f64,
    pub segregating: Estimate,
    pub pairwise: Estimate,
    pub external_mutations: Estimate,
    pub internal_mutations: Estimate,
    pub external_length: Estimate,
    pub internal_length: Estimate,
    pub tajima_numerator: Estimate,
    pub fu_li_numerator: Estimate,
    /// `theta h_{n-1} - S_n`.
    pub segregating_deficit: Estimate,
    /// `h_{n-1} eta_e - S_n`.
    pub fu_li_deficit: Estimate,
    pub tajima_d: Option<Estimate>,
    pub fu_li_d: Option<Estimate>,
}

pub fn summarize_stats(rows: &[StatsRow], n: usize, theta: f64, seed: u64) -> StatsSummary {
    let col = |f: &dyn Fn(&StatsRow) -> f64| Estimate::from_samples(&rows.iter().map(f).collect::<Vec<_>>());
    let opt = |f: &dyn Fn(&StatsRow) -> Option<f64>| {
        let xs: Vec<f64> = rows.iter().filter_map(f).collect();
        (!xs.is_empty()).then(|| Estimate::from_samples(&xs))
    };
    let h = harmonic(n - 1);
    StatsSummary {
        reps: rows.len(),
        seed,
        n,
        theta,
        segregating: col(&|r| r.stats.segregating as f64),
        pairwise: col(&|r| r.stats.pairwise),
        external_mutations: col(&|r| r.stats.external as f64),
        internal_mutations: col(&|r| r.stats.internal as f64),
        external_length: col(&|r| r.stats.external_length),
        internal_length: col(&|r| r.stats.internal_length),
        tajima_numerator: col(&|r| r.d.tajima_numerator),
        fu_li_numerator: col(&|r| r.d.fu_li_numerator),
        segregating_deficit: col(&|r| theta * h - r.stats.segregating as f64),
        fu_li_deficit: col(&|r| h * r.stats.external as f64 - r.stats.segregating as f64),
        tajima_d: opt(&|r| r.d.tajima_d),
        fu_li_d: opt(&|r| r.d.fu_li_d),
    }
}

/// Per-replicate shape of a coalescent path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRow {
    pub absorption: Option<f64>,
    pub mergers: usize,
    pub largest_merger: usize,
    pub external_length: f64,
    pub partitions: Vec<Partition>,
}

pub fn path_row(path: &GenealogyPath, times: &[f64]) -> PathRow {
    PathRow {
        absorption: path.absorption_time(),
        mergers: path.mergers.len(),
        largest_merger: path
            .mergers
            .iter()
            .flat_map(|m| m.groups.iter().map(|g| g.len()))
            .max()
            .unwrap_or(0),
        external_length: path.singleton_times().iter().sum(),
        partitions: times.iter().map(|&t| path.partition_at(t)).collect(),
    }
}

pub fn coalescent_ensemble(
    measure: &LambdaMeasure,
    n: usize,
    times: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<PathRow>> {
    run_replicates(reps, seed, |_, rng| simulate_lambda(measure, n, None, rng).map(|p| path_row(&p, times)))
        .into_iter()
        .collect()
}

/// Frequency with which the Kingman coupling leaves the paths identical.
pub fn coupling_ensemble(measure: &LambdaMeasure, n: usize, reps: usize, seed: u64) -> Result<Vec<bool>> {
    run_replicates(reps, seed, |_, rng| coupled_kingman_lambda(measure, n, rng).map(|c| c.identical))
        .into_iter()
        .collect()
}

/// Visit frequencies of each block count `b` in `[2, n]` over simulated paths.
pub fn visit_frequencies(measure: &LambdaMeasure, n: usize, reps: usize, seed: u64) -> Result<Vec<Estimate>> {
    let visits = run_replicates(reps, seed, |_, rng| {
        simulate_lambda(measure, n, None, rng).map(|p| {
            let mut seen = vec![false; n + 1];
            for (_, b) in p.block_counts() {
                seen[b] = true;
            }
            seen
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((0..=n)
        .map(|b| Estimate::proportion(visits.iter().filter(|v| v[b]).count(), reps))
        .collect())
}

/// Weighted least-squares fit of `y = rho - c / n`; returns `(rho, se(rho), c)`.
pub fn extrapolate_inverse_n(points: &[(usize, Estimate)]) -> (f64, f64, f64) {
    // normal equations for y = b0 + b1 x with x = 1/n, weights 1/se^2
    let (mut sw, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (n, e) in points {
        let w = 1.0 / (e.se * e.se);
        let x = 1.0 / *n as f64;
        sw += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * e.mean;
        sxy += w * x * e.mean;
    }
    let det = sw * sxx - sx * sx;
    let b0 = (sxx * sy - sx * sxy) / det;
    let b1 = (sw * sxy - sx * sy) / det;
    (b0, (sxx / det).sqrt(), -b1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kappa(n: usize) -> Partition {
        Partition::singletons(n)
    }

    #[test]
    fn tv_of_matching_samples_is_zero() {
        let xs = vec![kappa(3), Partition::single_block(3), kappa(3), Partition::single_block(3)];
        let law = PartitionDistribution::empirical(3, xs.iter()).unwrap();
        assert_eq!(tv_to_exact(&xs, &law).tv, 0.0);
        assert_eq!(tv_between(&xs, &xs).tv, 0.0);
    }

    #[test]
    fn tv_against_point_mass() {
        let xs = vec![kappa(3), Partition::single_block(3), Partition::single_block(3), Partition::single_block(3)];
        let e = tv_to_exact(&xs, &PartitionDistribution::point_mass(kappa(3)));
        assert!((e.tv - 0.75).abs() < 1e-15);
        // the statistic is +-1/2 on each draw, so its SE is the binomial SE over 2
        let want = 0.5 * (0.75f64 * 0.25 / 3.0).sqrt() * 2.0;
        assert!((e.se - want).abs() < 1e-12, "{} {}", e.se, want);
    }

    #[test]
    fn fixation_probability_formula() {
        let p = fixation_probability(200, 0.1);
        assert!((p - 0.1 / (1.0 - 0.9f64.powi(200))).abs() < 1e-15);
    }

    #[test]
    fn inverse_n_fit_recovers_line() {
        let pts: Vec<(usize, Estimate)> = [25usize, 50, 100]
            .iter()
            .map(|&n| {
                (
                    n,
                    Estimate {
                        mean: 1.5 - 3.0 / n as f64,
                        se: 0.01,
                        count: 100,
                    },
                )
            })
            .collect();
        let (rho, se, c) = extrapolate_inverse_n(&pts);
        assert!((rho - 1.5).abs() < 1e-12 && (c - 3.0).abs() < 1e-9);
        assert!(se > 0.01);
    }
}
