use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::numeric::{binomial_pmf_row, binomial_upper_tails, choose2, integrate, prob_at_least_two, LnFactorials};
use crate::sweep::SweepSpec;

/// A density component of `Lambda_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Density {
    /// `Lambda_0(dx) = c x dx` on `[lo, hi]`.
    Linear { c: f64, lo: f64, hi: f64 },
    /// Piecewise constant: `values[i]` on `[breaks[i], breaks[i + 1])`.
    Table { breaks: Vec<f64>, values: Vec<f64> },
}

impl Density {
    fn pieces(&self) -> Vec<(f64, f64, f64)> {
        match self {
            Density::Linear { .. } => Vec::new(),
            Density::Table { breaks, values } => breaks
                .windows(2)
                .zip(values)
                .filter(|(_, &v)| v > 0.0)
                .map(|(w, &v)| (w[0], w[1], v))
                .collect(),
        }
    }

    fn mass(&self) -> f64 {
        match self {
            Density::Linear { c, lo, hi } => 0.5 * c * (hi * hi - lo * lo),
            Density::Table { .. } => self.pieces().iter().map(|(a, b, v)| v * (b - a)).sum(),
        }
    }

    fn eta_mass(&self) -> f64 {
        match self {
            Density::Linear { c, lo, hi } => {
                if *lo == 0.0 {
                    f64::INFINITY
                } else {
                    c * (hi / lo).ln()
                }
            }
            Density::Table { .. } => self
                .pieces()
                .iter()
                .map(|&(a, b, v)| if a == 0.0 { f64::INFINITY } else { v * (1.0 / a - 1.0 / b) })
                .sum(),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct RateCache(Arc<RwLock<HashMap<(usize, usize, usize), f64>>>);

impl RateCache {
    fn get_or(&self, key: (usize, usize, usize), f: impl FnOnce() -> f64) -> f64 {
        if let Some(v) = self.0.read().unwrap().get(&key) {
            return *v;
        }
        let v = f();
        self.0.write().unwrap().insert(key, v);
        v
    }
}

/// `Lambda = a delta_0 + Lambda_0`, with `Lambda_0` a sum of atoms and
/// densities. An atom `(p, w)` carries `Lambda_0`-mass `w` at `p`, that is
/// `eta`-mass `w / p^2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaMeasure {
    kingman: f64,
    #[serde(default)]
    atoms: Vec<[f64; 2]>,
    #[serde(default)]
    densities: Vec<Density>,
    #[serde(skip)]
    cache: RateCache,
}

impl PartialEq for LambdaMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.kingman == other.kingman && self.atoms == other.atoms && self.densities == other.densities
    }
}

/// `lambda_b` and `alpha_b = lambda_b - a C(b,2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalRates {
    pub lambda: f64,
    pub alpha: f64,
}

impl LambdaMeasure {
    pub fn new(kingman: f64, atoms: Vec<(f64, f64)>, densities: Vec<Density>) -> Result<Self> {
        let m = LambdaMeasure {
            kingman,
            atoms: atoms.into_iter().map(|(p, w)| [p, w]).collect(),
            densities,
            cache: RateCache::default(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn kingman() -> Self {
        LambdaMeasure::new(1.0, Vec::new(), Vec::new()).unwrap()
    }

    /// `delta_0 + s alpha p^2 delta_p`, the limit for a single selected site.
    pub fn single_site(s: f64, alpha: f64, p: f64) -> Result<Self> {
        LambdaMeasure::new(1.0, vec![(p, s * alpha * p * p)], Vec::new())
    }

    /// `delta_0` plus the uniform law on `(0, 1)`.
    pub fn uniform() -> Self {
        LambdaMeasure::new(
            1.0,
            Vec::new(),
            vec![Density::Table {
                breaks: vec![0.0, 1.0],
                values: vec![1.0],
            }],
        )
        .unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: LambdaMeasure = serde_json::from_str(text).map_err(|e| validation("document", e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure serializes")
    }

    fn validate(&self) -> Result<()> {
        if !(self.kingman.is_finite() && self.kingman >= 0.0) {
            return Err(validation("kingman", "must be finite and >= 0"));
        }
        for (i, [p, w]) in self.atoms.iter().enumerate() {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(validation(format!("atoms[{}][0]", i), "location must lie in (0, 1]"));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(validation(format!("atoms[{}][1]", i), "weight must be positive"));
            }
        }
        for (i, d) in self.densities.iter().enumerate() {
            match d {
                Density::Linear { c, lo, hi } => {
                    if !(c.is_finite() && *c > 0.0) {
                        return Err(validation(format!("densities[{}].c", i), "must be positive"));
                    }
                    if !(0.0 <= *lo && lo < hi && *hi <= 1.0) {
                        return Err(validation(format!("densities[{}]", i), "need 0 <= lo < hi <= 1"));
                    }
                }
                Density::Table { breaks, values } => {
                    if breaks.len() < 2 || values.len() + 1 != breaks.len() {
                        return Err(validation(
                            format!("densities[{}].values", i),
                            "need one value per interval between breaks",
                        ));
                    }
                    if breaks[0] < 0.0 || breaks[breaks.len() - 1] > 1.0 || breaks.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(validation(
                            format!("densities[{}].breaks", i),
                            "must increase strictly within [0, 1]",
                        ));
                    }
                    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                        return Err(validation(format!("densities[{}].values", i), "must be finite and >= 0"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn kingman_mass(&self) -> f64 {
        self.kingman
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().map(|a| (a[0], a[1]))
    }

    pub fn densities(&self) -> &[Density] {
        &self.densities
    }

    /// `Lambda([0, 1])`, which equals `lambda_2`.
    pub fn total_mass(&self) -> f64 {
        self.kingman + self.atoms().map(|(_, w)| w).sum::<f64>() + self.densities.iter().map(Density::mass).sum::<f64>()
    }

    /// Total mass of `eta(dx) = x^-2 Lambda_0(dx)`; infinite when `Lambda_0`
    /// has density up to 0.
    pub fn eta_mass(&self) -> f64 {
        self.atoms().map(|(p, w)| w / (p * p)).sum::<f64>() + self.densities.iter().map(Density::eta_mass).sum::<f64>()
    }

    /// `lambda_{b,k} = int x^(k-2) (1-x)^(b-k) Lambda(dx)`.
    pub fn lambda_rate(&self, b: usize, k: usize) -> Result<f64> {
        if k < 2 || k > b {
            return Err(Error::Domain(format!("need 2 <= k <= b, got b = {}, k = {}", b, k)));
        }
        let mut total = if k == 2 { self.kingman } else { 0.0 };
        for (p, w) in self.atoms() {
            total += w * p.powi(k as i32 - 2) * (1.0 - p).powi((b - k) as i32);
        }
        let mut lnf = LnFactorials::new();
        let binom = lnf.ln_choose(b, k).exp();
        for (di, d) in self.densities.iter().enumerate() {
            match d {
                Density::Linear { c, lo, hi } => {
                    let th = binomial_upper_tails(b, *hi, &mut lnf)[k];
                    let tl = binomial_upper_tails(b, *lo, &mut lnf)[k];
                    total += c / (k as f64) * (th - tl) / binom;
                }
                Density::Table { .. } => {
                    let pieces = d.pieces();
                    let tol = 1e-10 / pieces.len().max(1) as f64;
                    total += self.cache.get_or((di, b, k), || {
                        pieces
                            .iter()
                            .map(|&(a, e, v)| {
                                v * integrate(|x| x.powi(k as i32 - 2) * (1.0 - x).powi((b - k) as i32), a, e, tol)
                            })
                            .sum()
                    });
                }
            }
        }
        Ok(total)
    }

    /// `C(m,k) lambda_{m,k}` for `k = 0..=m` (zero below 2): the rate at which
    /// some `k` of `m` blocks merge.
    pub fn jump_rates(&self, m: usize, lnf: &mut LnFactorials) -> Vec<f64> {
        let mut out = vec![0.0; m + 1];
        if m < 2 {
            return out;
        }
        out[2] += self.kingman * choose2(m as u64);
        for (p, w) in self.atoms() {
            let row = binomial_pmf_row(m, p, lnf);
            let scale = w / (p * p);
            for k in 2..=m {
                out[k] += scale * row[k];
            }
        }
        for d in &self.densities {
            match d {
                Density::Linear { c, lo, hi } => {
                    let th = binomial_upper_tails(m, *hi, lnf);
                    let tl = binomial_upper_tails(m, *lo, lnf);
                    for k in 2..=m {
                        out[k] += c / k as f64 * (th[k] - tl[k]).max(0.0);
                    }
                }
                Density::Table { .. } => {
                    for (a, e, v) in d.pieces() {
                        let te = binomial_upper_tails(m - 1, e, lnf);
                        let ta = binomial_upper_tails(m - 1, a, lnf);
                        for k in 2..=m {
                            let kf = k as f64;
                            out[k] += v * m as f64 / (kf * (kf - 1.0)) * (te[k - 1] - ta[k - 1]).max(0.0);
                        }
                    }
                }
            }
        }
        out
    }

    /// `lambda_b` and `alpha_b`.
    pub fn total_rates(&self, b: usize) -> TotalRates {
        let bf = b as f64;
        let mut alpha = 0.0;
        for (p, w) in self.atoms() {
            alpha += w / (p * p) * prob_at_least_two(b as u64, p);
        }
        for d in &self.densities {
            match d {
                Density::Linear { c, lo, hi } => {
                    let (ql, qh) = (1.0 - lo, 1.0 - hi);
                    let (mut pl, mut ph) = (1.0, 1.0);
                    let mut sum = 0.0;
                    for j in 1..=b {
                        pl *= ql;
                        ph *= qh;
                        sum += (pl - ph) / j as f64;
                    }
                    alpha += c * (sum - (pl - ph));
                }
                Density::Table { .. } => {
                    for (a, e, v) in d.pieces() {
                        alpha += v * integrate(|x| prob_at_least_two(b as u64, x) / (x * x), a, e, 1e-12);
                    }
                }
            }
        }
        TotalRates {
            lambda: self.kingman * 0.5 * bf * (bf - 1.0) + alpha,
            alpha,
        }
    }

    /// Checks `sum alpha_b log b / b^2 < infinity` by measure family and, on
    /// success, returns `(A, c)` with `alpha_b <= A + c log b` for all `b >= 2`.
    pub fn condition_ten(&self) -> Result<(f64, f64)> {
        let mut a = self.atoms().map(|(p, w)| w / (p * p)).sum::<f64>();
        let mut c = 0.0;
        for d in &self.densities {
            match d {
                Density::Linear { c: cl, .. } => c += cl,
                Density::Table { .. } => {
                    let eta = d.eta_mass();
                    if !eta.is_finite() {
                        return Err(Error::Divergent(
                            "Lambda_0 has a density bounded away from zero near 0, so alpha_b grows linearly \
                             in b and sum alpha_b log b / b^2 diverges"
                                .into(),
                        ));
                    }
                    a += eta;
                }
            }
        }
        Ok((a, c))
    }

    /// Draws a location from the normalized `eta`.
    pub fn sample_eta<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let total = self.eta_mass();
        if !total.is_finite() {
            return Err(Error::UnsupportedMeasure("eta has infinite mass".into()));
        }
        if total <= 0.0 {
            return Err(Error::UnsupportedMeasure("eta has zero mass".into()));
        }
        let mut u = rng.random::<f64>() * total;
        for (p, w) in self.atoms() {
            let m = w / (p * p);
            if u < m {
                return Ok(p);
            }
            u -= m;
        }
        let mut last = 1.0;
        for d in &self.densities {
            match d {
                Density::Linear { lo, hi, .. } => {
                    let m = d.eta_mass();
                    if u < m {
                        return Ok(lo * (hi / lo).powf(u / m));
                    }
                    u -= m;
                    last = *hi;
                }
                Density::Table { .. } => {
                    for (a, e, v) in d.pieces() {
                        let m = v * (1.0 / a - 1.0 / e);
                        if u < m {
                            return Ok(1.0 / (1.0 / a - u / v));
                        }
                        u -= m;
                        last = e;
                    }
                }
            }
        }
        Ok(last)
    }

    /// The measure of the limiting coalescent for recurrent sweeps: each
    /// mutation atom `(m, x, s)` gives `eta`-mass `m s` at `p = exp(-r(x)/s)`.
    /// Atoms with equal `p` are merged.
    pub fn from_sweep_spec(spec: &SweepSpec) -> Self {
        let mut eta: Vec<(f64, f64)> = Vec::new();
        for a in &spec.atoms {
            if a.rate == 0.0 {
                continue;
            }
            let p = (-spec.recombination(a.x) / a.s).exp();
            if p == 0.0 {
                continue;
            }
            match eta.iter_mut().find(|(q, _)| *q == p) {
                Some(e) => e.1 += a.rate * a.s,
                None => eta.push((p, a.rate * a.s)),
            }
        }
        eta.sort_by(|x, y| y.0.total_cmp(&x.0));
        let atoms = eta.into_iter().map(|(p, m)| (p, m * p * p)).collect();
        LambdaMeasure::new(1.0, atoms, Vec::new()).expect("sweep spec yields a valid measure")
    }

    /// `eta([y, 1])`, closed at `y`.
    pub fn eta_tail(&self, y: f64) -> f64 {
        let mut t = 0.0;
        for (p, w) in self.atoms() {
            if p >= y {
                t += w / (p * p);
            }
        }
        for d in &self.densities {
            match d {
                Density::Linear { c, lo, hi } => {
                    let from = y.max(*lo);
                    if from < *hi {
                        t += c * (hi / from).ln();
                    }
                }
                Density::Table { .. } => {
                    for (a, e, v) in d.pieces() {
                        let from = y.max(a);
                        if from < e {
                            t += v * (1.0 / from - 1.0 / e);
                        }
                    }
                }
            }
        }
        t
    }
}
