//! Small numerical kernels: binomial rows, adaptive quadrature, compensated
//! summation and uniformization for finite-state chains.

/// Table of `ln k!`, grown on demand.
#[derive(Debug, Clone, Default)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new() -> Self {
        LnFactorials { table: vec![0.0] }
    }

    pub fn get(&mut self, k: usize) -> f64 {
        while self.table.len() <= k {
            let i = self.table.len();
            let last = self.table[i - 1];
            self.table.push(last + (i as f64).ln());
        }
        self.table[k]
    }

    pub fn ln_choose(&mut self, m: usize, k: usize) -> f64 {
        self.get(m) - self.get(k) - self.get(m - k)
    }
}

/// `P(Bin(m, x) = k)` for `k = 0..=m`.
pub fn binomial_pmf_row(m: usize, x: f64, lnf: &mut LnFactorials) -> Vec<f64> {
    let mut row = vec![0.0; m + 1];
    if x <= 0.0 {
        row[0] = 1.0;
        return row;
    }
    if x >= 1.0 {
        row[m] = 1.0;
        return row;
    }
    let (lx, l1x) = (x.ln(), (-x).ln_1p());
    for (k, r) in row.iter_mut().enumerate() {
        let l = lnf.ln_choose(m, k) + k as f64 * lx + (m - k) as f64 * l1x;
        *r = if l < -745.0 { 0.0 } else { l.exp() };
    }
    // the log-factorial table carries O(m eps) error in the common scale
    let total: f64 = row.iter().sum();
    for r in row.iter_mut() {
        *r /= total;
    }
    row
}

/// Upper tails `P(Bin(m, x) >= k)` for `k = 0..=m+1`, summed from the top.
pub fn binomial_upper_tails(m: usize, x: f64, lnf: &mut LnFactorials) -> Vec<f64> {
    let pmf = binomial_pmf_row(m, x, lnf);
    let mut tails = vec![0.0; m + 2];
    for k in (0..=m).rev() {
        tails[k] = tails[k + 1] + pmf[k];
    }
    for t in tails.iter_mut() {
        *t = t.min(1.0);
    }
    tails
}

/// `P(Bin(b, x) >= 2) = 1 - (1-x)^b - b x (1-x)^(b-1)`, without cancellation
/// for small `b x`.
pub fn prob_at_least_two(b: u64, x: f64) -> f64 {
    if b < 2 || x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let bf = b as f64;
    if bf * x < 0.5 {
        // sum_{j>=2} C(b,j) x^j (1-x)^(b-j), terms decay at least geometrically
        let ratio = x / (1.0 - x);
        let mut term = 0.5 * bf * (bf - 1.0) * x * x * ((bf - 2.0) * (-x).ln_1p()).exp();
        let mut sum = 0.0;
        let mut j = 2.0;
        while term > 0.0 && j <= bf {
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
            term *= (bf - j) / (j + 1.0) * ratio;
            j += 1.0;
        }
        sum
    } else {
        let l = (-x).ln_1p();
        let p0 = (bf * l).exp();
        let p1 = bf * x * ((bf - 1.0) * l).exp();
        (1.0 - p0 - p1).max(0.0)
    }
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

pub fn choose2(b: u64) -> f64 {
    let b = b as f64;
    0.5 * b * (b - 1.0)
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gauss_kronrod_15(f, a, b);
        if err <= tol || depth >= 50 || (b - a).abs() < 1e-15 {
            return v;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    recurse(&f, a, b, tol, 0)
}

/// Distribution at time `t` of a finite continuous-time chain started from
/// `start`, given its off-diagonal rates as sparse rows, by uniformization.
pub fn transient_distribution(rates: &[Vec<(usize, f64)>], start: &[f64], t: f64) -> Vec<f64> {
    let n = rates.len();
    let exit: Vec<f64> = rates.iter().map(|r| r.iter().map(|(_, q)| q).sum()).collect();
    let q = exit.iter().cloned().fold(0.0, f64::max);
    let mut v = start.to_vec();
    if q == 0.0 || t == 0.0 {
        return v;
    }
    // chunks keep e^{-q dt} well above underflow
    let chunks = ((q * t) / 20.0).ceil().max(1.0) as usize;
    let dt = t / chunks as f64;
    let qt = q * dt;
    for _ in 0..chunks {
        let mut weight = (-qt).exp();
        let mut acc: Vec<f64> = v.iter().map(|x| x * weight).collect();
        let mut cum = weight;
        let mut term = v.clone();
        let mut j = 0.0;
        while 1.0 - cum > 1e-16 && j < 1000.0 {
            j += 1.0;
            let mut next = vec![0.0; n];
            for i in 0..n {
                if term[i] == 0.0 {
                    continue;
                }
                next[i] += term[i] * (1.0 - exit[i] / q);
                for &(to, r) in &rates[i] {
                    next[to] += term[i] * r / q;
                }
            }
            term = next;
            weight *= qt / j;
            cum += weight;
            for i in 0..n {
                acc[i] += weight * term[i];
            }
        }
        v = acc;
    }
    v
}
