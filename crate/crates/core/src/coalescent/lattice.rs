use std::collections::BTreeMap;

use crate::error::Result;
use crate::numeric::transient_distribution;
use crate::partition::{enumerate_partitions, stick_breaking_law, Partition, PartitionDistribution};

use super::measure::LambdaMeasure;
use super::xi::XiSweepMeasure;

fn solve(parts: Vec<Partition>, rates: Vec<Vec<(usize, f64)>>, t: f64) -> Result<PartitionDistribution> {
    let n = parts[0].n();
    let mut start = vec![0.0; parts.len()];
    start[parts.iter().position(|p| p.is_singletons()).unwrap()] = 1.0;
    let v = transient_distribution(&rates, &start, t);
    let total: f64 = v.iter().sum();
    let weights = parts
        .into_iter()
        .zip(v)
        .filter(|(_, w)| *w > 0.0)
        .map(|(p, w)| (p, w / total))
        .collect();
    PartitionDistribution::new(n, weights)
}

fn index_of(parts: &[Partition]) -> BTreeMap<Partition, usize> {
    parts.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect()
}

/// Exact law of the Lambda-coalescent on `{1..n}` at time `t`.
pub fn lambda_lattice_law(measure: &LambdaMeasure, n: usize, t: f64) -> Result<PartitionDistribution> {
    let parts = enumerate_partitions(n)?;
    let index = index_of(&parts);
    let mut rates = Vec::with_capacity(parts.len());
    for p in &parts {
        let b = p.block_count();
        let mut row = Vec::new();
        for mask in 0u32..(1 << b) {
            let k = mask.count_ones() as usize;
            if k < 2 {
                continue;
            }
            let group: Vec<usize> = (0..b).filter(|i| mask & (1 << i) != 0).collect();
            let q = measure.lambda_rate(b, k)?;
            if q > 0.0 {
                row.push((index[&p.merge_blocks(&group)], q));
            }
        }
        rates.push(row);
    }
    solve(parts, rates, t)
}

/// Exact law at time `t` of the sweep-derived Xi-coalescent on `{1..n}`,
/// `n <= 8`: pair rate 1 plus, for each atom, rate `m s Q(pi')` of
/// coagulating by `pi'` where `Q` is the stick-breaking paintbox law.
pub fn xi_lattice_law(measure: &XiSweepMeasure, n: usize, t: f64) -> Result<PartitionDistribution> {
    let parts = enumerate_partitions(n)?;
    let index = index_of(&parts);
    let mut laws: Vec<BTreeMap<usize, PartitionDistribution>> = Vec::new();
    for (_, mark) in measure.marks() {
        let mut per_b = BTreeMap::new();
        for b in 2..=n {
            per_b.insert(b, stick_breaking_law(mark, b)?);
        }
        laws.push(per_b);
    }
    let mut rates = Vec::with_capacity(parts.len());
    for p in &parts {
        let b = p.block_count();
        let mut row: BTreeMap<usize, f64> = BTreeMap::new();
        if b >= 2 {
            for i in 0..b {
                for j in i + 1..b {
                    *row.entry(index[&p.merge_blocks(&[i, j])]).or_insert(0.0) += 1.0;
                }
            }
            for ((atom, _), law) in measure.marks().zip(&laws) {
                for (q, w) in law[&b].iter() {
                    if q.is_singletons() {
                        continue;
                    }
                    let target = p.coagulate(q)?;
                    *row.entry(index[&target]).or_insert(0.0) += atom.rate * atom.s * w;
                }
            }
        }
        let mut row: Vec<(usize, f64)> = row.into_iter().collect();
        row.sort_by_key(|e| e.0);
        rates.push(row);
    }
    solve(parts, rates, t)
}
