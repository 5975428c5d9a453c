use super::{better, check_distance_matrix, Dendrogram, Merge, Method};
use crate::error::Result;
use crate::similarity::{SimilarityMatrix, SquareMatrix};

pub fn linkage(sm: &SimilarityMatrix, method: Method) -> Result<Dendrogram> {
    let mut dendrogram = linkage_matrix(&sm.values, method)?;
    dendrogram.ids = sm.ids.clone();
    Ok(dendrogram)
}

/// Agglomerates with Lance–Williams updates on a working matrix.
///
/// Average linkage keeps the running *sum* of leaf-pair distances between
/// clusters and divides by the size product on demand, so every height is a
/// single correctly rounded division.
pub fn linkage_matrix(d: &SquareMatrix, method: Method) -> Result<Dendrogram> {
    check_distance_matrix(d)?;
    let n = d.n();
    // Slot s holds the cluster currently stored in row/column s.
    let mut work = d.clone();
    let mut cluster_id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];

    let value = |work: &SquareMatrix, size: &[usize], i: usize, j: usize| match method {
        Method::Average => work.get(i, j) / (size[i] * size[j]) as f64,
        Method::Single | Method::Weighted => work.get(i, j),
    };

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize))> = None;
        let mut best_slots = (0, 0);
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                let dist = value(&work, &size, i, j);
                let (a, b) = (cluster_id[i], cluster_id[j]);
                let pair = (a.min(b), a.max(b));
                if better(dist, pair, best) {
                    best = Some((dist, pair));
                    best_slots = (i, j);
                }
            }
        }
        let (height, (a, b)) = best.expect("at least two active clusters");
        let (keep, drop) = best_slots;

        for k in (0..n).filter(|&k| active[k] && k != keep && k != drop) {
            let (dk, ddrop) = (work.get(keep, k), work.get(drop, k));
            let updated = match method {
                Method::Single => dk.min(ddrop),
                Method::Average => dk + ddrop,
                Method::Weighted => 0.5 * (dk + ddrop),
            };
            work.set(keep, k, updated);
            work.set(k, keep, updated);
        }
        size[keep] += size[drop];
        active[drop] = false;
        cluster_id[keep] = n + step;
        merges.push(Merge {
            a,
            b,
            height,
            size: size[keep],
        });
    }
    Ok(Dendrogram {
        ids: (0..n).map(|i| i.to_string()).collect(),
        merges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::naive_linkage_oracle;
    use proptest::prelude::*;

    pub(crate) fn three() -> SquareMatrix {
        SquareMatrix::from_rows(vec![
            vec![0.0, 1.0, 4.0],
            vec![1.0, 0.0, 5.0],
            vec![4.0, 5.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn single_linkage_example() {
        let d = linkage_matrix(&three(), Method::Single).unwrap();
        assert_eq!(
            d.merges,
            vec![Merge::from((0, 1, 1.0, 2)), Merge::from((2, 3, 4.0, 3))]
        );
    }

    #[test]
    fn average_linkage_example() {
        let d = linkage_matrix(&three(), Method::Average).unwrap();
        assert_eq!(d.merges[1].height, 4.5);
        let w = linkage_matrix(&three(), Method::Weighted).unwrap();
        assert_eq!(w.merges[1].height, 4.5);
    }

    #[test]
    fn two_leaves() {
        let m = SquareMatrix::from_rows(vec![vec![0.0, 2.5], vec![2.5, 0.0]]).unwrap();
        for method in [Method::Single, Method::Average, Method::Weighted] {
            let d = linkage_matrix(&m, method).unwrap();
            assert_eq!(d.merges, vec![Merge::from((0, 1, 2.5, 2))]);
            assert_eq!(d, naive_linkage_oracle(&m, method).unwrap());
        }
    }

    #[test]
    fn ties_break_on_smallest_pair() {
        let m = SquareMatrix::from_fn(4, |i, j| if i == j { 0.0 } else { 1.0 });
        let d = linkage_matrix(&m, Method::Single).unwrap();
        assert_eq!((d.merges[0].a, d.merges[0].b), (0, 1));
        assert_eq!((d.merges[1].a, d.merges[1].b), (2, 3));
        assert_eq!((d.merges[2].a, d.merges[2].b), (4, 5));
    }

    #[test]
    fn rejects_bad_matrices() {
        let mut m = three();
        m.set(0, 1, 2.0);
        assert!(linkage_matrix(&m, Method::Single).is_err());
        let mut m = three();
        m.set(0, 2, f64::NAN);
        m.set(2, 0, f64::NAN);
        assert!(linkage_matrix(&m, Method::Single).is_err());
        assert!(linkage_matrix(&SquareMatrix::zeros(1), Method::Single).is_err());
    }

    fn arb_integer_matrix() -> impl Strategy<Value = SquareMatrix> {
        (2usize..=12).prop_flat_map(|n| {
            prop::collection::vec(0u8..6, n * (n - 1) / 2).prop_map(move |vals| {
                let mut m = SquareMatrix::zeros(n);
                let mut it = vals.into_iter();
                for i in 0..n {
                    for j in i + 1..n {
                        let v = it.next().unwrap() as f64;
                        m.set(i, j, v);
                        m.set(j, i, v);
                    }
                }
                m
            })
        })
    }

    proptest! {
        #[test]
        fn matches_oracle_with_ties(m in arb_integer_matrix()) {
            for method in [Method::Single, Method::Average, Method::Weighted] {
                let fast = linkage_matrix(&m, method).unwrap();
                let slow = naive_linkage_oracle(&m, method).unwrap();
                prop_assert_eq!(&fast, &slow);
                prop_assert!(fast.is_monotone());
                fast.check().unwrap();
            }
        }
    }
}
