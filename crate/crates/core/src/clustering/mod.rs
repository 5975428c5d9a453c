//! Agglomerative clustering over a similarity matrix, with dendrogram cuts
//! and validation measures.
//!
//! Cluster ids follow the usual convention: leaves are `0..n`, and the
//! cluster created by merge `k` gets id `n + k`.

mod agreement;
mod cophenetic;
mod cut;
mod linkage;
mod oracle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use agreement::{agreement, Agreement};
pub use cophenetic::{cophenetic_coefficient, cophenetic_matrix, pearson};
pub use cut::{cut, cut_clusters, CutSpec, Labeling};
pub use linkage::{linkage, linkage_matrix};
pub use oracle::naive_linkage_oracle;

use crate::error::{Error, Result};
use crate::similarity::SquareMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Single,
    #[default]
    Average,
    /// WPGMA: the merged cluster's distance is the plain mean of its
    /// children's distances.
    Weighted,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Method::Single),
            "average" | "upgma" => Ok(Method::Average),
            "weighted" | "wpgma" => Ok(Method::Weighted),
            other => Err(Error::InvalidArgument(format!(
                "unknown linkage method {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Single => "single",
            Method::Average => "average",
            Method::Weighted => "weighted",
        })
    }
}

/// One agglomeration step; `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, f64, usize)", into = "(usize, usize, f64, usize)")]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

impl From<(usize, usize, f64, usize)> for Merge {
    fn from((a, b, height, size): (usize, usize, f64, usize)) -> Self {
        Self { a, b, height, size }
    }
}

impl From<Merge> for (usize, usize, f64, usize) {
    fn from(m: Merge) -> Self {
        (m.a, m.b, m.height, m.size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub ids: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Total node count, leaves included.
    pub fn node_count(&self) -> usize {
        self.n() + self.merges.len()
    }

    pub fn root(&self) -> usize {
        self.node_count() - 1
    }

    pub fn is_monotone(&self) -> bool {
        self.merges.windows(2).all(|w| w[0].height <= w[1].height)
    }

    /// Structural checks: merge count, child ids, sizes.
    pub fn check(&self) -> Result<()> {
        let n = self.n();
        if n < 2 || self.merges.len() != n - 1 {
            return Err(Error::InvalidArgument(format!(
                "dendrogram over {n} leaves must have {} merges, has {}",
                n.saturating_sub(1),
                self.merges.len()
            )));
        }
        let mut sizes = vec![1usize; n];
        let mut used = vec![false; 2 * n - 1];
        for (k, m) in self.merges.iter().enumerate() {
            let id = n + k;
            if m.a >= m.b || m.b >= id || used[m.a] || used[m.b] {
                return Err(Error::InvalidArgument(format!(
                    "merge {k} joins invalid clusters ({}, {})",
                    m.a, m.b
                )));
            }
            used[m.a] = true;
            used[m.b] = true;
            let size = sizes[m.a] + sizes[m.b];
            if size != m.size || !m.height.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "merge {k} has size {} (expected {size}) or non-finite height",
                    m.size
                )));
            }
            sizes.push(size);
        }
        Ok(())
    }

    /// Children of an internal node, `None` for leaves.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        node.checked_sub(self.n())
            .and_then(|k| self.merges.get(k))
            .map(|m| (m.a, m.b))
    }

    /// Height of a node; leaves sit at 0.
    pub fn height(&self, node: usize) -> f64 {
        node.checked_sub(self.n())
            .and_then(|k| self.merges.get(k))
            .map_or(0.0, |m| m.height)
    }

    /// Leaf indices under `node`, in ascending order.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            match self.children(v) {
                Some((a, b)) => {
                    stack.push(a);
                    stack.push(b);
                }
                None => out.push(v),
            }
        }
        out.sort_unstable();
        out
    }

    /// Maximal subtrees of `node` whose height does not exceed `threshold`.
    pub fn subtrees_below(&self, node: usize, threshold: f64) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            match self.children(v) {
                Some((a, b)) if self.height(v) > threshold => {
                    stack.push(b);
                    stack.push(a);
                }
                _ => out.push(v),
            }
        }
        out
    }

    /// Builds a multi-level antichain from per-branch thresholds: each
    /// `(node, threshold)` contributes the maximal subtrees of `node` at or
    /// below `threshold`.
    pub fn antichain_from_thresholds(&self, branches: &[(usize, f64)]) -> Vec<usize> {
        branches
            .iter()
            .flat_map(|&(node, h)| self.subtrees_below(node, h))
            .collect()
    }
}

/// Rejects non-square, asymmetric or NaN input.
pub(crate) fn check_distance_matrix(d: &SquareMatrix) -> Result<()> {
    let n = d.n();
    if n < 2 {
        return Err(Error::TooFewContours(n));
    }
    for i in 0..n {
        for j in 0..n {
            let v = d.get(i, j);
            if v.is_nan() {
                return Err(Error::InvalidMatrix(format!("NaN at ({i}, {j})")));
            }
            if v != d.get(j, i) {
                return Err(Error::InvalidMatrix(format!(
                    "not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Orders candidate merges: smaller distance first, then the
/// lexicographically smaller `(a, b)` id pair.
pub(crate) fn better(d: f64, pair: (usize, usize), best: Option<(f64, (usize, usize))>) -> bool {
    match best {
        None => true,
        Some((bd, bp)) => d < bd || (d == bd && pair < bp),
    }
}
