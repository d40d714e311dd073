//! Set partitions of `{1..n}` and the exchangeable random partitions built on them.
//!
//! Elements are stored zero-based; the `Display` form is one-based, e.g. `{1,2}{3}`.

mod law;
mod sample;

pub use law::{
    shape_law_to_distribution, stick_breaking_law, two_coin_law, PartitionDistribution,
};
pub use sample::{
    paint_stick_breaking, sample_paintbox, sample_stick_breaking, sample_two_coin,
    RankedMassVector, StickBreakingParams,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_partitions`]; Bell(12) = 4,213,597.
pub const ENUMERATION_LIMIT: usize = 12;

/// A partition of `{0..n}` in canonical form: blocks sorted by least element,
/// elements sorted within blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// The partition into singletons (kappa_0).
    pub fn singletons(n: usize) -> Self {
        Partition {
            n,
            blocks: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn single_block(n: usize) -> Self {
        let blocks = if n == 0 { vec![] } else { vec![(0..n).collect()] };
        Partition { n, blocks }
    }

    /// Builds a partition from arbitrary blocks, checking that they cover
    /// `{0..n}` exactly once.
    pub fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks: Vec<Vec<usize>> = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::Domain("empty block".into()));
            }
            for &e in block.iter() {
                if e >= n {
                    return Err(Error::Domain(format!("element {} outside 0..{}", e, n)));
                }
                if seen[e] {
                    return Err(Error::Domain(format!("element {} appears twice", e)));
                }
                seen[e] = true;
            }
            block.sort_unstable();
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Domain(format!("element {} not covered", missing)));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Partition { n, blocks })
    }

    /// Groups elements by label: `i` and `j` share a block iff `labels[i] == labels[j]`.
    pub fn from_labels<L: Eq + std::hash::Hash + Copy>(labels: &[L]) -> Self {
        let mut index: std::collections::HashMap<L, usize> = std::collections::HashMap::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, l) in labels.iter().enumerate() {
            let b = *index.entry(*l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(i);
        }
        // first-seen order is already canonical: block minima increase
        Partition {
            n: labels.len(),
            blocks,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_singletons(&self) -> bool {
        self.blocks.len() == self.n
    }

    /// Block label of every element, labels being canonical block indices.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &e in block {
                labels[e] = b;
            }
        }
        labels
    }

    /// Sorted block sizes, largest first.
    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.n != coarser.n {
            return false;
        }
        let labels = coarser.labels();
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&e| labels[e] == labels[b[0]]))
    }

    /// Coagulation of `self` by `by`: block `i` of the result is the union of
    /// the blocks of `self` whose canonical indices fall in block `i` of `by`.
    /// Only the restriction of `by` to `{0..m}` is used, `m` being the block
    /// count of `self`.
    pub fn coagulate(&self, by: &Partition) -> Result<Partition> {
        let m = self.block_count();
        if by.n < m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: by.n,
            });
        }
        let mut blocks = Vec::with_capacity(by.blocks.len());
        for group in &by.blocks {
            let mut merged: Vec<usize> = group
                .iter()
                .filter(|&&j| j < m)
                .flat_map(|&j| self.blocks[j].iter().copied())
                .collect();
            if merged.is_empty() {
                continue;
            }
            merged.sort_unstable();
            blocks.push(merged);
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Partition { n: self.n, blocks })
    }

    /// Merges the blocks with the given canonical indices (a single merger).
    pub fn merge_blocks(&self, indices: &[usize]) -> Partition {
        let mut take = vec![false; self.blocks.len()];
        for &i in indices {
            take[i] = true;
        }
        let mut merged = Vec::new();
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (i, b) in self.blocks.iter().enumerate() {
            if take[i] {
                merged.extend_from_slice(b);
            } else {
                blocks.push(b.clone());
            }
        }
        if !merged.is_empty() {
            merged.sort_unstable();
            blocks.push(merged);
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Partition { n: self.n, blocks }
    }

    /// Image under the relabelling `i -> sigma[i]`.
    pub fn relabel(&self, sigma: &[usize]) -> Result<Partition> {
        if sigma.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: sigma.len(),
            });
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&e| sigma[e]).collect())
            .collect();
        Partition::from_blocks(self.n, blocks)
    }
}

impl serde::Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in &self.blocks {
            write!(f, "{{")?;
            for (i, e) in block.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", e + 1)?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses the one-based display form, e.g. `{1,3}{2}`.
    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('{')
                .ok_or_else(|| Error::Domain(format!("expected '{{' in {:?}", s)))?;
            let close = open
                .find('}')
                .ok_or_else(|| Error::Domain(format!("unclosed block in {:?}", s)))?;
            let block = open[..close]
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&v| v >= 1)
                        .map(|v| v - 1)
                        .ok_or_else(|| Error::Domain(format!("bad element {:?}", t)))
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
            rest = open[close + 1..].trim_start();
        }
        let n = blocks.iter().map(Vec::len).sum();
        Partition::from_blocks(n, blocks)
    }
}

/// All partitions of `{0..n}` in restricted-growth-string order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::SizeLimit {
            what: "n",
            value: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Partition::singletons(0));
        return Ok(out);
    }
    let mut rgs = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    loop {
        out.push(Partition::from_labels(&rgs));
        // advance to the next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            if rgs[i] <= maxes[i - 1] {
                rgs[i] += 1;
                let m = maxes[i - 1].max(rgs[i]);
                maxes[i] = m;
                for j in i + 1..n {
                    rgs[j] = 0;
                    maxes[j] = m;
                }
                break;
            }
            i -= 1;
        }
    }
}
