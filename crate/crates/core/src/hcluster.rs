//! Single-linkage agglomerative clustering and dendrogram leaf ordering.
//!
//! Node ids follow the usual linkage encoding: leaves are `0..N`, the
//! internal node created by merge `k` is `N + k`, so the root is `2N - 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{AssetMatrix, DistanceMatrix};

/// One agglomeration step. `left` is the child whose smallest leaf index is lower.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub node: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkageTree {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

/// Leaf order of a dendrogram, left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seriation {
    pub order: Vec<usize>,
}

impl Seriation {
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let s = Self { order };
        s.check()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.order.len()];
        for (pos, &leaf) in self.order.iter().enumerate() {
            inv[leaf] = pos;
        }
        Self { order: inv }
    }

    fn check(&self) -> Result<()> {
        let mut seen = vec![false; self.order.len()];
        for &i in &self.order {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!(
                    "{:?} is not a permutation",
                    self.order
                )));
            }
        }
        Ok(())
    }
}

/// Agglomerates all leaves under the single-linkage rule
/// `D(A u B, C) = min(D(A, C), D(B, C))`.
///
/// Equal distances are resolved by comparing `(min leaf of the lower cluster,
/// min leaf of the higher cluster)` lexicographically, smallest first.
pub fn single_linkage(dist: &DistanceMatrix) -> Result<LinkageTree> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "clustering needs at least 2 assets, got {n}"
        )));
    }
    let m = dist.matrix();
    // Cluster-to-cluster distances over active slots; slot i starts as leaf i.
    let mut d: Vec<f64> = m.iter().copied().collect();
    let at = |i: usize, j: usize| j * n + i;
    let mut active: Vec<bool> = vec![true; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut min_leaf: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in (0..n).filter(|&a| active[a]) {
            for b in (a + 1..n).filter(|&b| active[b]) {
                let dab = d[at(a, b)];
                let (lo, hi) = if min_leaf[a] < min_leaf[b] {
                    (min_leaf[a], min_leaf[b])
                } else {
                    (min_leaf[b], min_leaf[a])
                };
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => dab < bd || (dab == bd && (lo, hi) < (blo, bhi)),
                };
                if better {
                    best = Some((dab, lo, hi, a, b));
                }
            }
        }
        let (distance, _, _, a, b) = best.expect("at least two active clusters");
        if !(distance >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "distance matrix has invalid entry {distance}"
            )));
        }
        let (keep, gone) = if min_leaf[a] < min_leaf[b] {
            (a, b)
        } else {
            (b, a)
        };
        merges.push(Merge {
            left: node_id[keep],
            right: node_id[gone],
            distance,
            node: n + step,
        });
        for c in (0..n).filter(|&c| active[c] && c != keep && c != gone) {
            let v = d[at(keep, c)].min(d[at(gone, c)]);
            d[at(keep, c)] = v;
            d[at(c, keep)] = v;
        }
        active[gone] = false;
        node_id[keep] = n + step;
        min_leaf[keep] = min_leaf[keep].min(min_leaf[gone]);
    }
    Ok(LinkageTree {
        n_leaves: n,
        merges,
    })
}

impl LinkageTree {
    /// Checks node numbering, that each node is used exactly once and that
    /// merge heights never decrease.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_leaves;
        let malformed = |m: String| Err(Error::InvalidArgument(format!("malformed tree: {m}")));
        if n < 2 {
            return malformed(format!("{n} leaves"));
        }
        if self.merges.len() != n - 1 {
            return malformed(format!("{} merges for {n} leaves", self.merges.len()));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut prev = 0.0;
        for (k, m) in self.merges.iter().enumerate() {
            if m.node != n + k {
                return malformed(format!(
                    "merge {k} creates node {} instead of {}",
                    m.node,
                    n + k
                ));
            }
            for child in [m.left, m.right] {
                if child >= n + k {
                    return malformed(format!("merge {k} references future node {child}"));
                }
                if std::mem::replace(&mut used[child], true) {
                    return malformed(format!("node {child} merged twice"));
                }
            }
            if !(m.distance >= prev) {
                return malformed(format!("merge {k} height {} below {prev}", m.distance));
            }
            prev = m.distance;
        }
        Ok(())
    }

    pub fn root(&self) -> usize {
        2 * self.n_leaves - 2
    }

    /// Leaves under `node`, left to right.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let n = self.n_leaves;
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(id) = stack.pop() {
            if id < n {
                out.push(id);
            } else {
                let m = &self.merges[id - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }

    pub fn to_export(&self, labels: &[String]) -> Result<TreeExport> {
        if labels.len() != self.n_leaves {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} leaves",
                labels.len(),
                self.n_leaves
            )));
        }
        Ok(TreeExport {
            n_leaves: self.n_leaves,
            labels: labels.to_vec(),
            merges: self
                .merges
                .iter()
                .map(|m| (m.left, m.right, m.distance))
                .collect(),
        })
    }
}

/// JSON form of a tree: `{n_leaves, labels, merges: [[left, right, distance], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeExport {
    pub n_leaves: usize,
    pub labels: Vec<String>,
    pub merges: Vec<(usize, usize, f64)>,
}

impl TreeExport {
    pub fn into_tree(self) -> Result<(LinkageTree, Vec<String>)> {
        let n = self.n_leaves;
        let tree = LinkageTree {
            n_leaves: n,
            merges: self
                .merges
                .iter()
                .enumerate()
                .map(|(k, &(left, right, distance))| Merge {
                    left,
                    right,
                    distance,
                    node: n + k,
                })
                .collect(),
        };
        tree.validate()?;
        if self.labels.len() != n {
            return Err(Error::InvalidArgument(
                "label count differs from n_leaves".into(),
            ));
        }
        Ok((tree, self.labels))
    }
}

/// Depth-first leaf order of the root, left child first.
pub fn quasi_diagonalize(tree: &LinkageTree) -> Result<Seriation> {
    tree.validate()?;
    Seriation::from_order(tree.leaves(tree.root()))
}

/// Permutes rows, columns and labels together: entry `(i, j)` of the result
/// is entry `(order[i], order[j])` of the input.
pub fn reorder<M: AssetMatrix>(matrix: &M, s: &Seriation) -> Result<M> {
    let n = matrix.len();
    if s.len() != n {
        return Err(Error::UniverseMismatch(format!(
            "seriation of length {} for a {n}x{n} matrix",
            s.len()
        )));
    }
    s.check()?;
    let src = matrix.matrix();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| src[(s.order[i], s.order[j])]);
    let assets = s
        .order
        .iter()
        .map(|&i| matrix.assets()[i].clone())
        .collect();
    Ok(matrix.with_parts(assets, m))
}
