use serde::Serialize;

use crate::partition::Partition;

/// One jump: each group lists block indices (canonical order, before the
/// jump) that merge into a single block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merger {
    pub time: f64,
    pub groups: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PathEnd {
    Absorbed,
    Truncated { horizon: f64 },
}

/// A coalescent trajectory from the singletons of `{1..n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenealogyPath {
    pub n: usize,
    pub mergers: Vec<Merger>,
    pub end: PathEnd,
    /// Events that fired but merged fewer than two blocks.
    pub unchanged_events: u64,
}

/// Applies simultaneous mergers to a canonical block list.
pub fn apply_groups(blocks: &[Vec<usize>], groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut target: Vec<usize> = (0..blocks.len()).collect();
    for g in groups {
        let head = *g.iter().min().unwrap();
        for &i in g {
            target[i] = head;
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; blocks.len()];
    for (i, b) in blocks.iter().enumerate() {
        let t = target[i];
        if slot[t] == usize::MAX {
            slot[t] = out.len();
            out.push(Vec::new());
        }
        out[slot[t]].extend_from_slice(b);
    }
    for b in out.iter_mut() {
        b.sort_unstable();
    }
    out
}

/// Block count left after `groups` merge among `b` blocks.
pub(crate) fn count_after(b: usize, groups: &[Vec<usize>]) -> usize {
    b - groups.iter().map(|g| g.len() - 1).sum::<usize>()
}

impl GenealogyPath {
    pub fn is_absorbed(&self) -> bool {
        self.end == PathEnd::Absorbed
    }

    pub fn absorption_time(&self) -> Option<f64> {
        match self.end {
            PathEnd::Absorbed => Some(self.mergers.last().map_or(0.0, |m| m.time)),
            PathEnd::Truncated { .. } => None,
        }
    }

    /// `(time, Partition)` pairs starting with `(0, singletons)`.
    pub fn transitions(&self) -> Vec<(f64, Partition)> {
        let mut blocks: Vec<Vec<usize>> = (0..self.n).map(|i| vec![i]).collect();
        let mut out = vec![(0.0, Partition::singletons(self.n))];
        for m in &self.mergers {
            blocks = apply_groups(&blocks, &m.groups);
            out.push((m.time, Partition::from_blocks(self.n, blocks.clone()).expect("merges keep a partition")));
        }
        out
    }

    pub fn partition_at(&self, t: f64) -> Partition {
        let mut blocks: Vec<Vec<usize>> = (0..self.n).map(|i| vec![i]).collect();
        for m in self.mergers.iter().take_while(|m| m.time <= t) {
            blocks = apply_groups(&blocks, &m.groups);
        }
        Partition::from_blocks(self.n, blocks).expect("merges keep a partition")
    }

    /// Block counts after each jump, starting with `(0, n)`.
    pub fn block_counts(&self) -> Vec<(f64, usize)> {
        let mut b = self.n;
        let mut out = vec![(0.0, b)];
        for m in &self.mergers {
            b = count_after(b, &m.groups);
            out.push((m.time, b));
        }
        out
    }

    /// Time each sample element spends as a singleton, up to absorption or
    /// the horizon.
    pub fn singleton_times(&self) -> Vec<f64> {
        let mut owner: Vec<usize> = (0..self.n).collect();
        let mut sizes = vec![1usize; self.n];
        let mut out = vec![f64::NAN; self.n];
        let mut b = self.n;
        for m in &self.mergers {
            for g in &m.groups {
                for &i in g {
                    if sizes[i] == 1 {
                        let e = owner[i];
                        out[e] = m.time;
                    }
                }
            }
            let mut target: Vec<usize> = (0..b).collect();
            for g in &m.groups {
                let head = *g.iter().min().unwrap();
                for &i in g {
                    target[i] = head;
                }
            }
            let mut sz: Vec<usize> = Vec::with_capacity(b);
            let mut own: Vec<usize> = Vec::with_capacity(b);
            let mut slot = vec![usize::MAX; b];
            for i in 0..b {
                let t = target[i];
                if t != i {
                    sz[slot[t]] += sizes[i];
                    own[slot[t]] = usize::MAX;
                    continue;
                }
                slot[i] = sz.len();
                sz.push(sizes[i]);
                own.push(owner[i]);
            }
            sizes = sz;
            owner = own;
            b = sizes.len();
        }
        let end = match self.end {
            PathEnd::Absorbed => self.absorption_time().unwrap(),
            PathEnd::Truncated { horizon } => horizon,
        };
        for t in out.iter_mut() {
            if t.is_nan() {
                *t = end;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_apply_canonically() {
        let blocks = vec![vec![0, 1], vec![2], vec![3], vec![4]];
        let out = apply_groups(&blocks, &[vec![1, 3]]);
        assert_eq!(out, vec![vec![0, 1], vec![2, 4], vec![3]]);
        let out = apply_groups(&blocks, &[vec![0, 2], vec![1, 3]]);
        assert_eq!(out, vec![vec![0, 1, 3], vec![2, 4]]);
    }

    #[test]
    fn singleton_times_and_transitions() {
        let path = GenealogyPath {
            n: 3,
            mergers: vec![
                Merger {
                    time: 0.5,
                    groups: vec![vec![0, 2]],
                },
                Merger {
                    time: 1.25,
                    groups: vec![vec![0, 1]],
                },
            ],
            end: PathEnd::Absorbed,
            unchanged_events: 0,
        };
        assert_eq!(path.singleton_times(), vec![0.5, 1.25, 0.5]);
        let tr = path.transitions();
        assert_eq!(tr[1].1.to_string(), "{1,3}{2}");
        assert_eq!(tr[2].1, Partition::single_block(3));
        assert_eq!(path.partition_at(0.7).to_string(), "{1,3}{2}");
        assert_eq!(path.block_counts(), vec![(0.0, 3), (0.5, 2), (1.25, 1)]);
    }
}
