use rand::Rng;
use rand_distr::Exp1;

use crate::partition::Partition;

use super::trajectory::Trajectory;

/// Ancestral lineages of the sample, split by the allele their current
/// carrier holds at the selected site. Each lineage is the list of sample
/// indices descending from it.
#[derive(Debug, Clone)]
pub(crate) struct Lineages {
    pub n: usize,
    pub big: Vec<Vec<usize>>,
    pub small: Vec<Vec<usize>>,
}

impl Lineages {
    pub fn new(n: usize) -> Self {
        Lineages {
            n,
            big: Vec::new(),
            small: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.big.len() + self.small.len()
    }

    pub fn partition(&self) -> Partition {
        let blocks: Vec<Vec<usize>> = self.big.iter().chain(self.small.iter()).cloned().collect();
        Partition::from_blocks(self.n, blocks).expect("lineages cover the sample")
    }

    fn unclass(&mut self) {
        let big = std::mem::take(&mut self.big);
        self.small.extend(big);
    }

    fn all_big(&mut self) {
        let small = std::mem::take(&mut self.small);
        self.big.extend(small);
    }

    /// Assigns classes as for `n` individuals drawn without replacement
    /// from a population holding `k` beneficial alleles out of `two_n`.
    fn assign_hypergeometric<R: Rng + ?Sized>(&mut self, k: u32, two_n: u32, rng: &mut R) {
        self.unclass();
        let all = std::mem::take(&mut self.small);
        let (mut b_left, mut pop) = (k as u64, two_n as u64);
        for l in all {
            if rng.random_range(0..pop) < b_left {
                b_left -= 1;
                self.big.push(l);
            } else {
                self.small.push(l);
            }
            pop -= 1;
        }
    }
}

/// Requested snapshot ages (population time before the present), filled in
/// as the backward trace passes them.
#[derive(Debug, Clone)]
pub(crate) struct Snapshots {
    ages: Vec<f64>,
    pub taken: Vec<Partition>,
}

impl Snapshots {
    pub fn new(ages: Vec<f64>) -> Self {
        Snapshots {
            ages,
            taken: Vec::new(),
        }
    }

    pub fn done(&self) -> bool {
        self.taken.len() == self.ages.len()
    }

    /// Records every pending snapshot strictly younger than `age`.
    pub fn advance(&mut self, age: f64, lin: &Lineages) {
        while !self.done() && self.ages[self.taken.len()] < age {
            self.taken.push(lin.partition());
        }
    }

    pub fn finish(&mut self, lin: &Lineages) {
        self.advance(f64::INFINITY, lin);
    }
}

fn merge_into(from: Vec<usize>, to: &mut Vec<usize>) {
    to.extend(from);
}

fn pick<R: Rng + ?Sized>(v: &mut Vec<Vec<usize>>, rng: &mut R) -> Vec<usize> {
    let idx = rng.random_range(0..v.len());
    v.swap_remove(idx)
}

fn join<R: Rng + ?Sized>(l: Vec<usize>, v: &mut [Vec<usize>], rng: &mut R) {
    let idx = rng.random_range(0..v.len());
    merge_into(l, &mut v[idx]);
}

/// Per-class totals (times `2N`) of the rates of genealogically visible
/// replacements while `X = k`: events where dying and parent share an allele.
fn class_rates(lin: &Lineages, k: f64, tn: f64, r: f64) -> (f64, f64) {
    let (i, j) = (lin.big.len() as f64, lin.small.len() as f64);
    let rb = if i > 0.0 {
        i * ((1.0 - r) * (i - 1.0) + r * k * (tn - k + i - 1.0) / tn)
    } else {
        0.0
    };
    let rs = if j > 0.0 {
        j * ((1.0 - r) * (j - 1.0) + r * (tn - k) * (k + j - 1.0) / tn)
    } else {
        0.0
    };
    (rb, rs)
}

fn within_level_event<R: Rng + ?Sized>(lin: &mut Lineages, k: f64, tn: f64, r: f64, rb: f64, rs: f64, rng: &mut R) {
    let (i, j) = (lin.big.len() as f64, lin.small.len() as f64);
    if rng.random::<f64>() * (rb + rs) < rb {
        let l = pick(&mut lin.big, rng);
        let w_same = (1.0 - r) * (i - 1.0) + r * k * (i - 1.0) / tn;
        let w_other = r * k * j / tn;
        let w_move = r * k * (tn - k - j) / tn;
        let u = rng.random::<f64>() * (w_same + w_other + w_move);
        if u < w_same {
            join(l, &mut lin.big, rng);
        } else if u < w_same + w_other {
            join(l, &mut lin.small, rng);
        } else {
            lin.small.push(l);
        }
    } else {
        let l = pick(&mut lin.small, rng);
        let w_same = (1.0 - r) * (j - 1.0) + r * (tn - k) * (j - 1.0) / tn;
        let w_other = r * (tn - k) * i / tn;
        let w_move = r * (tn - k) * (k - i) / tn;
        let u = rng.random::<f64>() * (w_same + w_other + w_move);
        if u < w_same {
            join(l, &mut lin.small, rng);
        } else if u < w_same + w_other {
            join(l, &mut lin.big, rng);
        } else {
            lin.big.push(l);
        }
    }
}

/// Crosses, backward, the birth of a beneficial chromosome that took `X`
/// from `k` to `k + 1`.
fn cross_up<R: Rng + ?Sized>(lin: &mut Lineages, k: u64, tn: u64, r: f64, rng: &mut R) {
    let i = lin.big.len() as u64;
    if i == 0 || rng.random_range(0..k + 1) >= i {
        return;
    }
    let l = pick(&mut lin.big, rng);
    let others = i - 1;
    if rng.random::<f64>() >= r {
        if others > 0 && rng.random_range(0..k) < others {
            join(l, &mut lin.big, rng);
        } else {
            lin.big.push(l);
        }
        return;
    }
    let j = lin.small.len() as u64;
    let u = rng.random_range(0..tn);
    if u < others {
        join(l, &mut lin.big, rng);
    } else if u < others + j {
        join(l, &mut lin.small, rng);
    } else if u < others + j + (k - others) {
        lin.big.push(l);
    } else {
        lin.small.push(l);
    }
}

/// Crosses, backward, the replacement of a beneficial chromosome by a wild
/// type one that took `X` from `k` to `k - 1`.
fn cross_down<R: Rng + ?Sized>(lin: &mut Lineages, k: u64, tn: u64, r: f64, rng: &mut R) {
    let j = lin.small.len() as u64;
    if j == 0 || rng.random_range(0..tn - k + 1) >= j {
        return;
    }
    let l = pick(&mut lin.small, rng);
    let others = j - 1;
    if rng.random::<f64>() >= r {
        if others > 0 && rng.random_range(0..tn - k) < others {
            join(l, &mut lin.small, rng);
        } else {
            lin.small.push(l);
        }
        return;
    }
    let i = lin.big.len() as u64;
    let u = rng.random_range(0..tn);
    if u < others {
        join(l, &mut lin.small, rng);
    } else if u < others + i {
        join(l, &mut lin.big, rng);
    } else if u < others + i + (k - i) {
        lin.big.push(l);
    } else {
        lin.small.push(l);
    }
}

/// Traces lineages backward through one sweep, from its end (or from the
/// present, for a truncated trajectory) to the founding mutation. `age` is
/// advanced by the trajectory's duration. Stops early once a single lineage
/// remains.
pub(crate) fn trace_sweep<R: Rng + ?Sized>(
    traj: &Trajectory,
    two_n: u32,
    r: f64,
    lin: &mut Lineages,
    age: &mut f64,
    snaps: &mut Snapshots,
    rng: &mut R,
) {
    let end_age = *age + traj.duration();
    match traj.outcome {
        Some(true) => lin.all_big(),
        Some(false) => lin.unclass(),
        None => lin.assign_hypergeometric(traj.last_level(), two_n, rng),
    }
    let tn = two_n as f64;
    for idx in (0..traj.levels.len()).rev() {
        if lin.count() <= 1 {
            break;
        }
        let k = traj.levels[idx];
        let kf = k as f64;
        let stop = *age + traj.holds[idx];
        loop {
            let (rb, rs) = class_rates(lin, kf, tn, r);
            let total = (rb + rs) / tn;
            if total <= 0.0 {
                break;
            }
            let next = *age + rng.sample::<f64, _>(Exp1) / total;
            if next >= stop {
                break;
            }
            snaps.advance(next, lin);
            *age = next;
            within_level_event(lin, kf, tn, r, rb, rs, rng);
        }
        *age = stop;
        snaps.advance(stop, lin);
        if idx > 0 {
            let prev = traj.levels[idx - 1];
            if k > prev {
                cross_up(lin, prev as u64, two_n as u64, r, rng);
            } else {
                cross_down(lin, prev as u64, two_n as u64, r, rng);
            }
        }
    }
    *age = end_age;
    lin.unclass();
}

/// Neutral Moran genealogy over `duration` population time: each pair of
/// lineages coalesces at rate `2 / (2N)`.
pub(crate) fn trace_neutral<R: Rng + ?Sized>(
    duration: f64,
    two_n: u32,
    lin: &mut Lineages,
    age: &mut f64,
    snaps: &mut Snapshots,
    rng: &mut R,
) {
    lin.unclass();
    let stop = *age + duration;
    loop {
        let b = lin.small.len() as f64;
        if b < 2.0 {
            break;
        }
        let rate = b * (b - 1.0) / two_n as f64;
        let next = *age + rng.sample::<f64, _>(Exp1) / rate;
        if next >= stop {
            break;
        }
        snaps.advance(next, lin);
        *age = next;
        let l = pick(&mut lin.small, rng);
        join(l, &mut lin.small, rng);
    }
    *age = stop;
    snaps.advance(stop, lin);
}
