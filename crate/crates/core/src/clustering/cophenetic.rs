use super::Dendrogram;
use crate::error::{Error, Result};
use crate::similarity::{SimilarityMatrix, SquareMatrix};

/// Height at which each pair of leaves first joins.
pub fn cophenetic_matrix(dendrogram: &Dendrogram) -> SquareMatrix {
    let n = dendrogram.n();
    let mut out = SquareMatrix::zeros(n);
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for m in &dendrogram.merges {
        for &i in &members[m.a] {
            for &j in &members[m.b] {
                out.set(i, j, m.height);
                out.set(j, i, m.height);
            }
        }
        let mut joined = members[m.a].clone();
        joined.extend_from_slice(&members[m.b]);
        members.push(joined);
    }
    out
}

/// Pearson correlation of two equally long samples, centred on their means.
pub fn pearson(y: &[f64], z: &[f64]) -> Result<f64> {
    if y.len() != z.len() || y.len() < 3 {
        return Err(Error::DegenerateCorrelation(format!(
            "need at least 3 paired values, got {} and {}",
            y.len(),
            z.len()
        )));
    }
    let len = y.len() as f64;
    let my = y.iter().sum::<f64>() / len;
    let mz = z.iter().sum::<f64>() / len;
    let (mut cross, mut vy, mut vz) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(z) {
        let (da, db) = (a - my, b - mz);
        cross += da * db;
        vy += da * da;
        vz += db * db;
    }
    if !(vy > 0.0) || !(vz > 0.0) {
        return Err(Error::DegenerateCorrelation("zero variance".into()));
    }
    Ok((cross / (vy * vz).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation between the input dissimilarities and the dendrogram's
/// cophenetic distances over all pairs `i < j`.
pub fn cophenetic_coefficient(sm: &SimilarityMatrix, dendrogram: &Dendrogram) -> Result<f64> {
    if sm.n() != dendrogram.n() {
        return Err(Error::InvalidArgument(format!(
            "similarity matrix has {} entries, dendrogram {} leaves",
            sm.n(),
            dendrogram.n()
        )));
    }
    if sm.n() < 3 {
        return Err(Error::DegenerateCorrelation(format!(
            "need n >= 3, got {}",
            sm.n()
        )));
    }
    let z = cophenetic_matrix(dendrogram);
    pearson(&sm.values.upper_triangle(), &z.upper_triangle())
}
