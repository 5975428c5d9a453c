use std::collections::HashMap;

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use super::Labeling;
use crate::error::{Error, Result};

pub const AGREEMENT_CONVENTION: &str = "best one-to-one cluster matching";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    /// `100 · correct / total`, rounded to two decimals.
    pub percent: f64,
    pub correct: usize,
    pub total: usize,
    pub rand_index: f64,
    pub convention: String,
}

impl Agreement {
    /// `92.68% [38]` style summary.
    pub fn display(&self) -> String {
        format!("{:.2}% [{}]", self.percent, self.correct)
    }
}

/// Scores a labeling against a reference by matching computed clusters to
/// reference clusters one-to-one so that the number of shared elements is
/// maximal. Reports the Rand index alongside.
pub fn agreement(labels: &Labeling, reference: &Labeling) -> Result<Agreement> {
    if labels.ids.len() != labels.labels.len() || reference.ids.len() != reference.labels.len() {
        return Err(Error::IdMismatch("ids and labels differ in length".into()));
    }
    let by_id: HashMap<&str, usize> = reference
        .ids
        .iter()
        .zip(&reference.labels)
        .map(|(id, l)| (id.as_str(), *l))
        .collect();
    if by_id.len() != reference.ids.len() {
        return Err(Error::IdMismatch("duplicate id in reference".into()));
    }
    if labels.ids.len() != by_id.len() {
        return Err(Error::IdMismatch(format!(
            "{} labeled ids vs {} reference ids",
            labels.ids.len(),
            by_id.len()
        )));
    }
    let pairs = labels
        .ids
        .iter()
        .zip(&labels.labels)
        .map(|(id, &l)| {
            by_id
                .get(id.as_str())
                .map(|&r| (l, r))
                .ok_or_else(|| Error::IdMismatch(format!("id {id:?} missing from reference")))
        })
        .collect::<Result<Vec<_>>>()?;

    let total = pairs.len();
    if total == 0 {
        return Err(Error::IdMismatch("empty labeling".into()));
    }
    let dense = |values: Vec<usize>| -> (Vec<usize>, usize) {
        let mut map = HashMap::new();
        let out = values
            .into_iter()
            .map(|v| {
                let next = map.len();
                *map.entry(v).or_insert(next)
            })
            .collect();
        (out, map.len())
    };
    let (computed, kc) = dense(pairs.iter().map(|p| p.0).collect());
    let (expected, kr) = dense(pairs.iter().map(|p| p.1).collect());

    let k = kc.max(kr);
    let mut table = Matrix::new(k, k, 0i64);
    for (&c, &r) in computed.iter().zip(&expected) {
        table[(c, r)] += 1;
    }
    let (matched, _) = kuhn_munkres(&table);
    let correct = matched as usize;

    let mut agree = 0usize;
    let mut count = 0usize;
    for i in 0..total {
        for j in i + 1..total {
            count += 1;
            if (computed[i] == computed[j]) == (expected[i] == expected[j]) {
                agree += 1;
            }
        }
    }
    let rand_index = if count == 0 {
        1.0
    } else {
        agree as f64 / count as f64
    };

    Ok(Agreement {
        percent: (10_000.0 * correct as f64 / total as f64).round() / 100.0,
        correct,
        total,
        rand_index,
        convention: AGREEMENT_CONVENTION.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lab(labels: &[usize]) -> Labeling {
        Labeling {
            ids: (0..labels.len()).map(|i| format!("c{i}")).collect(),
            labels: labels.to_vec(),
        }
    }

    #[test]
    fn identical_labelings_score_full() {
        let a = lab(&[0, 0, 1, 2, 2]);
        let s = agreement(&a, &a).unwrap();
        assert_eq!(s.percent, 100.0);
        assert_eq!(s.correct, 5);
        assert_eq!(s.rand_index, 1.0);
    }

    #[test]
    fn permuted_labels_still_match() {
        let a = lab(&[0, 0, 1, 2, 2]);
        let b = lab(&[2, 2, 0, 1, 1]);
        assert_eq!(agreement(&a, &b).unwrap().correct, 5);
    }

    #[test]
    fn percent_convention() {
        // 38 of 41 correct.
        let mut computed = vec![0usize; 41];
        for c in computed.iter_mut().take(3) {
            *c = 1;
        }
        let reference = vec![0usize; 41];
        let s = agreement(&lab(&computed), &lab(&reference)).unwrap();
        assert_eq!(s.correct, 38);
        assert_eq!(s.total, 41);
        assert_eq!(s.percent, 92.68);
        assert_eq!(s.display(), "92.68% [38]");
    }

    #[test]
    fn singletons_against_one_cluster() {
        let n = 7;
        let s = agreement(&lab(&(0..n).collect::<Vec<_>>()), &lab(&vec![0; n])).unwrap();
        assert_eq!(s.correct, 1);
        assert_eq!(s.percent, (10_000.0 / n as f64).round() / 100.0);
    }

    #[test]
    fn matches_by_id_not_position() {
        let a = Labeling {
            ids: vec!["x".into(), "y".into(), "z".into()],
            labels: vec![0, 0, 1],
        };
        let b = Labeling {
            ids: vec!["z".into(), "x".into(), "y".into()],
            labels: vec![0, 1, 1],
        };
        assert_eq!(agreement(&a, &b).unwrap().percent, 100.0);
    }

    #[test]
    fn id_mismatch_is_an_error() {
        let a = lab(&[0, 1]);
        let mut b = lab(&[0, 1]);
        b.ids[1] = "other".into();
        assert!(matches!(agreement(&a, &b), Err(Error::IdMismatch(_))));
        assert!(matches!(agreement(&a, &lab(&[0, 1, 1])), Err(Error::IdMismatch(_))));
    }

    /// Brute force over all injective maps from computed to reference clusters.
    fn brute_best(computed: &[usize], reference: &[usize]) -> usize {
        let kc = computed.iter().max().unwrap() + 1;
        let kr = reference.iter().max().unwrap() + 1;
        fn go(c: usize, kc: usize, kr: usize, used: &mut Vec<bool>, assign: &mut Vec<Option<usize>>, f: &dyn Fn(&[Option<usize>]) -> usize) -> usize {
            if c == kc {
                return f(assign);
            }
            assign.push(None);
            let mut best = go(c + 1, kc, kr, used, assign, f);
            assign.pop();
            for r in 0..kr {
                if !used[r] {
                    used[r] = true;
                    assign.push(Some(r));
                    best = best.max(go(c + 1, kc, kr, used, assign, f));
                    assign.pop();
                    used[r] = false;
                }
            }
            best
        }
        let score = |assign: &[Option<usize>]| {
            computed
                .iter()
                .zip(reference)
                .filter(|(c, r)| assign[**c] == Some(**r))
                .count()
        };
        go(0, kc, kr, &mut vec![false; kr], &mut Vec::new(), &score)
    }

    proptest! {
        #[test]
        fn matching_is_optimal(
            pairs in prop::collection::vec((0usize..4, 0usize..4), 1..15)
        ) {
            let computed: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let reference: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let s = agreement(&lab(&computed), &lab(&reference)).unwrap();
            prop_assert_eq!(s.correct, brute_best(&computed, &reference));
            prop_assert!((0.0..=1.0).contains(&s.rand_index));
        }
    }
}
