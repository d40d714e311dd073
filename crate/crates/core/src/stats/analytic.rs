use serde::Serialize;

use crate::coalescent::{coupled_kingman_lambda, simulate_lambda, simulate_xi_sweep, LambdaMeasure, XiSweepMeasure};
use crate::error::{Error, Result};
use crate::mc::{run_replicates, Estimate};
use crate::numeric::{choose2, harmonic, CompensatedSum, LnFactorials};

/// Jump law from every block count up to `n`: `rows[m][k]` is the rate at
/// which `k` of `m` blocks merge, and `totals[m]` is `lambda_m`.
struct JumpTable {
    rows: Vec<Vec<f64>>,
    totals: Vec<f64>,
}

impl JumpTable {
    fn new(measure: &LambdaMeasure, n: usize) -> Self {
        let mut lnf = LnFactorials::new();
        let mut rows = vec![Vec::new(); n + 1];
        let mut totals = vec![0.0; n + 1];
        for m in 2..=n {
            let row = measure.jump_rates(m, &mut lnf);
            let mut s = CompensatedSum::default();
            for &r in &row {
                s.add(r);
            }
            totals[m] = s.value();
            rows[m] = row;
        }
        JumpTable { rows, totals }
    }

    /// Visit probabilities of each block count starting from `n`.
    fn visits(&self, n: usize) -> Result<Vec<f64>> {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        for m in (2..=n).rev() {
            if v[m] == 0.0 {
                continue;
            }
            if self.totals[m] <= 0.0 {
                return Err(Error::Domain(format!("no mergers possible from {} blocks", m)));
            }
            let w = v[m] / self.totals[m];
            for (k, &r) in self.rows[m].iter().enumerate().skip(2) {
                v[m - k + 1] += w * r;
            }
        }
        Ok(v)
    }
}

/// `G_n(b)` for `b = 0..=n` (entries below 2 are unused).
pub fn gnb_row(measure: &LambdaMeasure, n: usize) -> Result<Vec<f64>> {
    JumpTable::new(measure, n).visits(n)
}

/// Probability that the coalescent started from `n` blocks ever has exactly
/// `b` blocks.
pub fn gnb(measure: &LambdaMeasure, n: usize, b: usize) -> Result<f64> {
    if b < 2 || b > n {
        return Err(Error::Domain(format!("need 2 <= b <= n, got n = {}, b = {}", n, b)));
    }
    Ok(gnb_row(measure, n)?[b])
}

/// `E[Delta_n] = theta / lambda_2`.
pub fn expected_pairwise(measure: &LambdaMeasure, theta: f64) -> f64 {
    theta / measure.total_mass()
}

/// `E[S_n] = (theta/2) sum_b b G_n(b) / lambda_b`.
pub fn expected_segregating(measure: &LambdaMeasure, theta: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {}", n)));
    }
    let table = JumpTable::new(measure, n);
    let g = table.visits(n)?;
    let mut s = CompensatedSum::default();
    for b in 2..=n {
        s.add(b as f64 * g[b] / table.totals[b]);
    }
    Ok(0.5 * theta * s.value())
}

/// `E[J_n]`, the expected total external branch length, from the expected
/// time a tagged element stays a singleton.
pub fn expected_external_length(measure: &LambdaMeasure, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {}", n)));
    }
    let table = JumpTable::new(measure, n);
    let mut e = vec![0.0; n + 1];
    for m in 2..=n {
        let tot = table.totals[m];
        if tot <= 0.0 {
            return Err(Error::Domain(format!("no mergers possible from {} blocks", m)));
        }
        let mut acc = 1.0;
        for k in 2..m {
            acc += table.rows[m][k] * (1.0 - k as f64 / m as f64) * e[m - k + 1];
        }
        e[m] = acc / tot;
    }
    Ok(n as f64 * e[n])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoResult {
    pub rho: f64,
    /// Sum of the three error terms below.
    pub truncation_bound: f64,
    /// Truncation level `B`.
    pub level: usize,
    pub first_tail: f64,
    pub second_tail: f64,
    pub limit_error: f64,
    pub converged: bool,
}

pub const RHO_MAX_LEVEL: usize = 1 << 15;

fn rho_at(table: &JumpTable, level: usize, theta: f64, a: f64, c: f64) -> Result<RhoResult> {
    let g = table.visits(level)?;
    let (mut first, mut second) = (CompensatedSum::default(), CompensatedSum::default());
    for b in 2..=level {
        let bf = b as f64;
        let lam = table.totals[b];
        let alpha = (lam - choose2(b as u64)).max(0.0);
        first.add(bf * alpha / (choose2(b as u64) * lam));
        second.add(bf / lam * (1.0 - g[b]));
    }
    let rho = 0.5 * theta * (first.value() + second.value());
    let y = level as f64;
    let l = (2.0 * y).ln();
    let first_tail = 0.5 * theta * (2.0 * a / (y * y) + c * (2.0 * y.ln() + 1.0) / (y * y) + 4.0 * c / (3.0 * y * y * y));
    let second_tail = 0.5 * theta * (4.0 * a * (l + 1.0) / y + 4.0 * c * (l * l + 2.0 * l + 2.0) / y);
    let eps = 2.0 * a / y + 2.0 * c * ((y + 1.0).ln() / (y - 1.0) + 0.5 * ((y + 1.0) / (y - 1.0)).ln());
    let limit_error = theta * harmonic(level - 1) * eps;
    Ok(RhoResult {
        rho,
        truncation_bound: first_tail + second_tail + limit_error,
        level,
        first_tail,
        second_tail,
        limit_error,
        converged: false,
    })
}

/// `rho`, the limiting deficit `theta h_{n-1} - E[S_n]`, truncated at the
/// smallest doubling level `B` whose error bound is below `tol` (or at
/// `RHO_MAX_LEVEL`, flagged as not converged). `G_infinity` is replaced by
/// `G_B`, whose error is part of the bound.
pub fn rho(measure: &LambdaMeasure, theta: f64, tol: f64) -> Result<RhoResult> {
    if measure.kingman_mass() != 1.0 {
        return Err(Error::UnsupportedMeasure("rho is defined for delta_0 + Lambda_0".into()));
    }
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("theta must be finite and >= 0, got {}", theta)));
    }
    let (a, c) = measure.condition_ten()?;
    if a == 0.0 && c == 0.0 {
        return Ok(RhoResult {
            rho: 0.0,
            truncation_bound: 0.0,
            level: 2,
            first_tail: 0.0,
            second_tail: 0.0,
            limit_error: 0.0,
            converged: true,
        });
    }
    let mut level = 64;
    loop {
        let table = JumpTable::new(measure, level);
        let mut r = rho_at(&table, level, theta, a, c)?;
        if r.truncation_bound < tol || level >= RHO_MAX_LEVEL {
            r.converged = r.truncation_bound < tol;
            return Ok(r);
        }
        level *= 2;
    }
}

/// `rho` truncated at a fixed level `B`, with its error bound.
pub fn rho_at_level(measure: &LambdaMeasure, theta: f64, level: usize) -> Result<RhoResult> {
    if measure.kingman_mass() != 1.0 {
        return Err(Error::UnsupportedMeasure("rho is defined for delta_0 + Lambda_0".into()));
    }
    if level < 3 {
        return Err(Error::Domain(format!("truncation level must be at least 3, got {}", level)));
    }
    let (a, c) = measure.condition_ten()?;
    let table = JumpTable::new(measure, level);
    rho_at(&table, level, theta, a, c)
}

/// `prod_{b=2}^n (1 - alpha_b / lambda_b)`, the probability that the Kingman
/// coupling never separates.
pub fn coupling_identity_probability(measure: &LambdaMeasure, n: usize) -> Result<f64> {
    if measure.kingman_mass() != 1.0 {
        return Err(Error::UnsupportedMeasure("the Kingman coupling needs a unit mass at 0".into()));
    }
    let mut p = 1.0;
    for b in 2..=n {
        let t = measure.total_rates(b);
        assert!(t.alpha < t.lambda, "alpha_b < lambda_b whenever a = 1");
        p *= 1.0 - t.alpha / t.lambda;
    }
    Ok(p)
}

/// Monte Carlo estimate of `E[2 - J_n]`.
pub fn external_branch_deficit(measure: &LambdaMeasure, n: usize, reps: usize, seed: u64) -> Result<Estimate> {
    if measure.kingman_mass() != 1.0 {
        return Err(Error::UnsupportedMeasure("the deficit is defined for delta_0 + Lambda_0".into()));
    }
    let samples = run_replicates(reps, seed, |_, rng| {
        simulate_lambda(measure, n, None, rng).map(|p| 2.0 - p.singleton_times().iter().sum::<f64>())
    });
    let xs = samples.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&xs))
}

/// Monte Carlo estimate of `G_n(b)`, `b = 0..=n`, for the sweep-derived
/// Xi-coalescent, whose jump-size law has no closed form here.
pub fn xi_gnb_estimate(measure: &XiSweepMeasure, n: usize, reps: usize, seed: u64) -> Vec<Estimate> {
    let visits = run_replicates(reps, seed, |_, rng| {
        let mut seen = vec![false; n + 1];
        for (_, b) in simulate_xi_sweep(measure, n, None, rng).block_counts() {
            seen[b] = true;
        }
        seen
    });
    (0..=n)
        .map(|b| Estimate::proportion(visits.iter().filter(|v| v[b]).count(), reps))
        .collect()
}

/// Monte Carlo frequency of identical coupled paths.
pub fn coupling_identity_frequency(measure: &LambdaMeasure, n: usize, reps: usize, seed: u64) -> Result<Estimate> {
    let hits = run_replicates(reps, seed, |_, rng| coupled_kingman_lambda(measure, n, rng).map(|c| c.identical));
    let hits = hits.into_iter().collect::<Result<Vec<bool>>>()?;
    Ok(Estimate::proportion(hits.iter().filter(|&&h| h).count(), reps))
}
