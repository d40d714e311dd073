use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::coalescent::{GenealogyPath, PathEnd};
use crate::error::{Error, Result};
use crate::numeric::choose2;

/// A branch of the genealogical tree: the lineage of one block from its
/// creation to its merger (or the horizon).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    /// Number of sample elements below the branch.
    pub size: usize,
    pub length: f64,
    pub mutations: u64,
}

impl Branch {
    pub fn is_external(&self) -> bool {
        self.size == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutatedGenealogy {
    pub n: usize,
    pub branches: Vec<Branch>,
    /// The path was cut at its horizon; statistics are conditional on the
    /// partial tree.
    pub truncated: bool,
}

/// Branches of the tree traced out by `path`.
pub fn branches(path: &GenealogyPath) -> Vec<Branch> {
    let mut live: Vec<(usize, f64)> = vec![(1, 0.0); path.n];
    let mut out = Vec::with_capacity(2 * path.n);
    for m in &path.mergers {
        let mut target: Vec<usize> = (0..live.len()).collect();
        let mut is_head = vec![false; live.len()];
        for g in &m.groups {
            let head = *g.iter().min().unwrap();
            is_head[head] = true;
            for &i in g {
                target[i] = head;
                out.push(Branch {
                    size: live[i].0,
                    length: m.time - live[i].1,
                    mutations: 0,
                });
            }
        }
        let mut next: Vec<(usize, f64)> = Vec::with_capacity(live.len());
        let mut slot = vec![usize::MAX; live.len()];
        for i in 0..live.len() {
            let t = target[i];
            if t != i {
                let s = slot[t];
                next[s].0 += live[i].0;
                continue;
            }
            slot[i] = next.len();
            if is_head[i] {
                next.push((live[i].0, m.time));
            } else {
                next.push(live[i]);
            }
        }
        live = next;
    }
    if let PathEnd::Truncated { horizon } = path.end {
        if live.len() > 1 {
            for (size, birth) in live {
                out.push(Branch {
                    size,
                    length: horizon - birth,
                    mutations: 0,
                });
            }
        }
    }
    out
}

/// Places Poisson(`theta/2` x length) mutations on every branch.
pub fn overlay_mutations<R: Rng + ?Sized>(
    path: &GenealogyPath,
    theta: f64,
    allow_truncated: bool,
    rng: &mut R,
) -> Result<MutatedGenealogy> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::Domain(format!("theta must be finite and >= 0, got {}", theta)));
    }
    let truncated = !path.is_absorbed();
    if truncated && !allow_truncated {
        return Err(Error::IncompleteTree(
            "the genealogy was cut at its horizon before reaching one block".into(),
        ));
    }
    let mut br = branches(path);
    for b in br.iter_mut() {
        let mean = 0.5 * theta * b.length;
        if mean > 0.0 {
            b.mutations = Poisson::new(mean).expect("finite positive mean").sample(rng) as u64;
        }
    }
    Ok(MutatedGenealogy {
        n: path.n,
        branches: br,
        truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub n: usize,
    pub segregating: u64,
    /// Average over unordered pairs of the number of differing sites.
    pub pairwise: f64,
    pub external: u64,
    pub internal: u64,
    pub external_length: f64,
    pub internal_length: f64,
}

pub fn sample_statistics(g: &MutatedGenealogy) -> SampleStats {
    let n = g.n;
    let pairs = choose2(n as u64);
    let mut st = SampleStats {
        n,
        segregating: 0,
        pairwise: 0.0,
        external: 0,
        internal: 0,
        external_length: 0.0,
        internal_length: 0.0,
    };
    let mut diff = 0.0;
    for b in &g.branches {
        st.segregating += b.mutations;
        diff += b.mutations as f64 * (b.size * (n - b.size)) as f64;
        if b.is_external() {
            st.external += b.mutations;
            st.external_length += b.length;
        } else {
            st.internal += b.mutations;
            st.internal_length += b.length;
        }
    }
    st.pairwise = if pairs > 0.0 { diff / pairs } else { 0.0 };
    st
}
