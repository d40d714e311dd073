use rand::Rng;

use super::Partition;
use crate::error::{Error, Result};

/// A point of the ranked simplex: nonincreasing masses in `[0,1]` summing to
/// at most one, with an implicit zero tail. The missing mass is dust.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedMassVector {
    masses: Vec<f64>,
}

impl RankedMassVector {
    pub fn new(mut masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::Domain("masses must be finite and nonnegative".into()));
        }
        if masses.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain("masses must be nonincreasing".into()));
        }
        let total: f64 = masses.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("masses sum to {} > 1", total)));
        }
        while masses.last() == Some(&0.0) {
            masses.pop();
        }
        Ok(RankedMassVector { masses })
    }

    /// `(x, 0, 0, ...)`; the paintbox of this point is the two-coin law `Q_{x,n}`.
    pub fn single(x: f64) -> Result<Self> {
        RankedMassVector::new(vec![x])
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn largest(&self) -> f64 {
        self.masses.first().copied().unwrap_or(0.0)
    }
}

/// Parameters of the stick-breaking law `R(theta, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickBreakingParams {
    theta: f64,
    m: u64,
}

impl StickBreakingParams {
    pub fn new(theta: f64, m: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("theta = {} outside [0,1]", theta)));
        }
        if m < 1 {
            return Err(Error::DegenerateMark("number of fragments must be at least 1".into()));
        }
        Ok(StickBreakingParams { theta, m })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn m(&self) -> u64 {
        self.m
    }
}

/// One draw from `Q_{p,n}`: the heads of `n` independent `p`-coins form one
/// block, every tail is a singleton.
pub fn sample_two_coin<R: Rng + ?Sized>(p: f64, n: usize, rng: &mut R) -> Result<Partition> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {} outside [0,1]", p)));
    }
    let labels: Vec<usize> = (0..n)
        .map(|i| if rng.random_bool(p) { n } else { i })
        .collect();
    Ok(Partition::from_labels(&labels))
}

/// One draw from the paintbox of `y`: each element picks box `j` with
/// probability `y_j` (dust otherwise); elements sharing a box share a block.
pub fn sample_paintbox<R: Rng + ?Sized>(y: &RankedMassVector, n: usize, rng: &mut R) -> Partition {
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (j, &m) in y.masses.iter().enumerate() {
                acc += m;
                if u < acc {
                    return n + j;
                }
            }
            i
        })
        .collect();
    Partition::from_labels(&labels)
}

/// Draw of `W ~ Beta(1, k-1)` by inversion.
#[inline]
fn beta_one<R: Rng + ?Sized>(k: u64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if k == 2 {
        return u;
    }
    // 1 - U^{1/(k-1)}, with U and 1-U equal in law
    -f64::exp_m1(u.ln() / (k - 1) as f64)
}

/// Walks the active indices `k = m, m-1, ..., 2` (those with `zeta_k = 1`),
/// skipping inactive runs geometrically. Calls `visit(k)` for each active one
/// until it returns `false`.
fn for_each_active<R: Rng + ?Sized>(
    params: StickBreakingParams,
    rng: &mut R,
    mut visit: impl FnMut(u64, &mut R) -> bool,
) {
    let theta = params.theta;
    if theta == 0.0 || params.m < 2 {
        return;
    }
    let mut k = params.m;
    let log_q = (-theta).ln_1p();
    loop {
        if theta < 1.0 {
            let u: f64 = rng.random();
            let skip = ((1.0 - u).ln() / log_q).floor();
            if skip >= (k - 1) as f64 {
                return;
            }
            k -= skip as u64;
        }
        if !visit(k, rng) || k == 2 {
            return;
        }
        k -= 1;
    }
}

/// One draw from `R(theta, m)`: fragments `V_k prod_{j>k} (1 - V_j)` for
/// `k = 2..m` and `prod_{j>=2} (1 - V_j)` for the first, ranked decreasingly.
pub fn sample_stick_breaking<R: Rng + ?Sized>(
    params: StickBreakingParams,
    rng: &mut R,
) -> RankedMassVector {
    let mut pieces = Vec::new();
    let mut rest = 1.0f64;
    for_each_active(params, rng, |k, rng| {
        let v = beta_one(k, rng);
        pieces.push(v * rest);
        rest *= 1.0 - v;
        true
    });
    pieces.push(rest);
    let total: f64 = pieces.iter().sum();
    let tol = 1e-12f64.max(8.0 * f64::EPSILON * pieces.len() as f64);
    assert!(
        (total - 1.0).abs() <= tol,
        "stick-breaking fragments sum to {}",
        total
    );
    pieces.retain(|&x| x > 0.0);
    // stable: ties keep generation order
    pieces.sort_by(|a, b| b.partial_cmp(a).expect("finite fragments"));
    RankedMassVector { masses: pieces }
}

/// Draws the paintbox partition of `{0..b}` under `R(theta, m)` without
/// materialising the mass vector: elements are dropped onto the fragments in
/// breaking order, and whatever is left lands on the first fragment.
pub fn paint_stick_breaking<R: Rng + ?Sized>(
    params: StickBreakingParams,
    b: usize,
    rng: &mut R,
) -> Partition {
    let mut labels = vec![usize::MAX; b];
    let mut remaining: Vec<usize> = (0..b).collect();
    let mut next_label = 0;
    for_each_active(params, rng, |k, rng| {
        let w = beta_one(k, rng);
        let mut kept = Vec::with_capacity(remaining.len());
        let mut landed = false;
        for &e in &remaining {
            if rng.random_bool(w) {
                labels[e] = next_label;
                landed = true;
            } else {
                kept.push(e);
            }
        }
        if landed {
            next_label += 1;
        }
        remaining = kept;
        // one leftover element is a singleton wherever it lands
        remaining.len() > 1
    });
    for &e in &remaining {
        labels[e] = next_label;
    }
    for (i, l) in labels.iter_mut().enumerate() {
        if *l == usize::MAX {
            *l = b + i;
        }
    }
    Partition::from_labels(&labels)
}
