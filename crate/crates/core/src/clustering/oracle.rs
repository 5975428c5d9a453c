use super::{better, check_distance_matrix, Dendrogram, Merge, Method};
use crate::error::{Error, Result};
use crate::similarity::SquareMatrix;

/// Largest input accepted by [`naive_linkage_oracle`].
pub const ORACLE_MAX_N: usize = 12;

/// Test oracle: textbook agglomeration that recomputes every inter-cluster
/// distance from the leaf distances at each step.
///
/// Single linkage takes the minimum over leaf pairs, average linkage the
/// mean over leaf pairs, and weighted linkage is evaluated by recursing
/// into the more recently formed cluster of the pair.
pub fn naive_linkage_oracle(d: &SquareMatrix, method: Method) -> Result<Dendrogram> {
    check_distance_matrix(d)?;
    let n = d.n();
    if n > ORACLE_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "oracle limited to n <= {ORACLE_MAX_N}, got {n}"
        )));
    }
    // members[id] and children[id] for every cluster created so far.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut children: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut alive: Vec<usize> = (0..n).collect();
    let mut merges = Vec::new();

    while alive.len() > 1 {
        let mut best: Option<(f64, (usize, usize))> = None;
        for (x, &p) in alive.iter().enumerate() {
            for &q in &alive[x + 1..] {
                let dist = match method {
                    Method::Single => members[p]
                        .iter()
                        .flat_map(|&i| members[q].iter().map(move |&j| (i, j)))
                        .map(|(i, j)| d.get(i, j))
                        .fold(f64::INFINITY, f64::min),
                    Method::Average => {
                        let total: f64 = members[p]
                            .iter()
                            .flat_map(|&i| members[q].iter().map(move |&j| d.get(i, j)))
                            .sum();
                        total / (members[p].len() * members[q].len()) as f64
                    }
                    Method::Weighted => wpgma(d, &children, p, q),
                };
                let pair = (p.min(q), p.max(q));
                if better(dist, pair, best) {
                    best = Some((dist, pair));
                }
            }
        }
        let (height, (a, b)) = best.unwrap();
        let id = members.len();
        let mut joined = members[a].clone();
        joined.extend_from_slice(&members[b]);
        merges.push(Merge {
            a,
            b,
            height,
            size: joined.len(),
        });
        members.push(joined);
        children.push(Some((a, b)));
        alive.retain(|&c| c != a && c != b);
        alive.push(id);
    }
    Ok(Dendrogram {
        ids: (0..n).map(|i| i.to_string()).collect(),
        merges,
    })
}

fn wpgma(d: &SquareMatrix, children: &[Option<(usize, usize)>], p: usize, q: usize) -> f64 {
    let (newer, older) = if p > q { (p, q) } else { (q, p) };
    match children[newer] {
        None => d.get(newer, older),
        Some((l, r)) => 0.5 * (wpgma(d, children, l, older) + wpgma(d, children, r, older)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_examples() {
        let m = SquareMatrix::from_rows(vec![
            vec![0.0, 1.0, 4.0],
            vec![1.0, 0.0, 5.0],
            vec![4.0, 5.0, 0.0],
        ])
        .unwrap();
        let s = naive_linkage_oracle(&m, Method::Single).unwrap();
        assert_eq!(s.merges[1].height, 4.0);
        let a = naive_linkage_oracle(&m, Method::Average).unwrap();
        assert_eq!(a.merges[1].height, 4.5);
    }

    #[test]
    fn size_limit() {
        assert!(naive_linkage_oracle(&SquareMatrix::zeros(13), Method::Single).is_err());
    }
}
