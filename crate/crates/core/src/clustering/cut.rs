use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dendrogram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutSpec {
    /// Keep merges at or below the height; each remaining tree is a cluster.
    Single(f64),
    /// Explicit subtree roots (leaf or internal node ids). Must cover every
    /// leaf exactly once.
    Multi(Vec<usize>),
}

/// Cluster assignment, labels contiguous from 0 in order of first leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    pub ids: Vec<String>,
    pub labels: Vec<usize>,
}

impl Labeling {
    /// Relabels arbitrary group keys to `0, 1, …` by first appearance.
    pub fn from_groups<K: Eq + std::hash::Hash>(ids: Vec<String>, groups: &[K]) -> Self {
        let mut seen = HashMap::new();
        let labels = groups
            .iter()
            .map(|g| {
                let next = seen.len();
                *seen.entry(g).or_insert(next)
            })
            .collect();
        Self { ids, labels }
    }

    pub fn cluster_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,label\n");
        for (id, label) in self.ids.iter().zip(&self.labels) {
            out.push_str(&format!("{id},{label}\n"));
        }
        out
    }

    /// Parses `id,label` CSV. Labels may be any strings; they are mapped to
    /// integers by first appearance.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut ids = Vec::new();
        let mut raw = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::parse("<labels>", e.to_string()))?;
            let (Some(id), Some(label)) = (record.get(0), record.get(1)) else {
                return Err(Error::parse("<labels>", "expected `id,label` rows"));
            };
            ids.push(id.to_string());
            raw.push(label.to_string());
        }
        Ok(Self::from_groups(ids, &raw))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path, message),
            other => other,
        })
    }
}

pub fn cut(dendrogram: &Dendrogram, spec: &CutSpec) -> Result<Labeling> {
    match spec {
        CutSpec::Single(h) => {
            if h.is_nan() {
                return Err(Error::InvalidCut("height is NaN".into()));
            }
            Ok(cut_filtered(dendrogram, |k| dendrogram.merges[k].height <= *h))
        }
        CutSpec::Multi(roots) => cut_antichain(dendrogram, roots),
    }
}

/// Applies the first `n - k` merges, yielding exactly `k` clusters.
pub fn cut_clusters(dendrogram: &Dendrogram, k: usize) -> Result<Labeling> {
    let n = dendrogram.n();
    if k == 0 || k > n {
        return Err(Error::InvalidCut(format!(
            "cluster count must be in 1..={n}, got {k}"
        )));
    }
    Ok(cut_filtered(dendrogram, |step| step < n - k))
}

fn cut_filtered(dendrogram: &Dendrogram, keep: impl Fn(usize) -> bool) -> Labeling {
    let n = dendrogram.n();
    let mut parent: Vec<usize> = (0..dendrogram.node_count()).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (k, m) in dendrogram.merges.iter().enumerate() {
        if keep(k) {
            let node = n + k;
            let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
            parent[ra] = node;
            parent[rb] = node;
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Labeling::from_groups(dendrogram.ids.clone(), &roots)
}

fn cut_antichain(dendrogram: &Dendrogram, roots: &[usize]) -> Result<Labeling> {
    let n = dendrogram.n();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for &root in roots {
        if root >= dendrogram.node_count() {
            return Err(Error::InvalidCut(format!("node {root} does not exist")));
        }
        for leaf in dendrogram.leaves(root) {
            if let Some(prev) = owner[leaf] {
                return Err(Error::InvalidCut(format!(
                    "nodes {prev} and {root} overlap at leaf {leaf}"
                )));
            }
            owner[leaf] = Some(root);
        }
    }
    let groups = owner
        .iter()
        .enumerate()
        .map(|(leaf, o)| {
            o.ok_or_else(|| Error::InvalidCut(format!("leaf {leaf} is not covered")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Labeling::from_groups(dendrogram.ids.clone(), &groups))
}
