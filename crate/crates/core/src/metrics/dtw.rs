//! Dynamic time warping between 2D point sequences.

use serde::{Deserialize, Serialize};

use crate::contour::Point;
use crate::error::{Error, Result};

/// Enumeration bound for [`brute_force_dtw`].
pub const BRUTE_FORCE_MAX_LEN: usize = 8;

/// Alignment between two sequences as 1-based index pairs `(n, m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarpingPath {
    pub steps: Vec<(usize, usize)>,
}

impl WarpingPath {
    /// Checks the boundary, monotonicity and step-size conditions for an
    /// `(n, m)` path.
    pub fn is_admissible(&self, n: usize, m: usize) -> bool {
        let steps = &self.steps;
        if steps.first() != Some(&(1, 1)) || steps.last() != Some(&(n, m)) {
            return false;
        }
        steps.windows(2).all(|w| {
            let (dn, dm) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            matches!((dn, dm), (1, 0) | (0, 1) | (1, 1))
        })
    }

    /// Total local cost along the path, summed in path order.
    pub fn cost(&self, x: &[Point], y: &[Point]) -> f64 {
        self.steps
            .iter()
            .map(|&(i, j)| x[i - 1].dist(y[j - 1]))
            .fold(0.0, |acc, c| acc + c)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtwResult {
    pub cost: f64,
    pub path: WarpingPath,
}

/// Optimal warping cost and path under Euclidean local cost.
pub fn dtw(x: &[Point], y: &[Point]) -> Result<DtwResult> {
    dtw_banded(x, y, None)
}

/// [`dtw`] restricted to a band around the diagonal.
///
/// A cell `(i, j)` (0-based) is admissible when `|j - i·r| <= band·max(1, r)`
/// with `r = (M-1)/(N-1)`. `band` must be at least 1 so that a path always
/// exists. `None` searches the full matrix.
pub fn dtw_banded(x: &[Point], y: &[Point], band: Option<f64>) -> Result<DtwResult> {
    super::count_kernel_call();
    let (n, m) = (x.len(), y.len());
    if n == 0 || m == 0 {
        return Err(Error::EmptySequence);
    }
    if let Some(w) = band {
        if !(w >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "DTW band must be >= 1, got {w}"
            )));
        }
    }
    let ratio = if n > 1 {
        (m - 1) as f64 / (n - 1) as f64
    } else {
        0.0
    };
    let inside = |i: usize, j: usize| match band {
        None => true,
        Some(w) => (j as f64 - i as f64 * ratio).abs() <= w * ratio.max(1.0),
    };

    // acc[i * m + j] = minimal cost of a path from (0, 0) to (i, j).
    let mut acc = vec![f64::INFINITY; n * m];
    for i in 0..n {
        for j in 0..m {
            if !inside(i, j) && !(i == 0 && j == 0) && !(i == n - 1 && j == m - 1) {
                continue;
            }
            let local = x[i].dist(y[j]);
            let best_prev = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 {
                    acc[(i - 1) * m + j - 1]
                } else {
                    f64::INFINITY
                };
                let up = if i > 0 { acc[(i - 1) * m + j] } else { f64::INFINITY };
                let left = if j > 0 { acc[i * m + j - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[i * m + j] = best_prev + local;
        }
    }
    let cost = acc[n * m - 1];
    if !cost.is_finite() {
        return Err(Error::InvalidArgument(
            "no admissible warping path inside the band".into(),
        ));
    }

    // Traceback, preferring the diagonal on ties.
    let mut steps = vec![(n, m)];
    let (mut i, mut j) = (n - 1, m - 1);
    while i > 0 || j > 0 {
        let (ni, nj) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = acc[(i - 1) * m + j - 1];
            let up = acc[(i - 1) * m + j];
            let left = acc[i * m + j - 1];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        i = ni;
        j = nj;
        steps.push((i + 1, j + 1));
    }
    steps.reverse();
    Ok(DtwResult {
        cost,
        path: WarpingPath { steps },
    })
}

/// Test oracle: enumerates every admissible warping path and keeps the
/// cheapest. Limited to sequences of at most [`BRUTE_FORCE_MAX_LEN`] points.
pub fn brute_force_dtw(x: &[Point], y: &[Point]) -> Result<DtwResult> {
    let paths = enumerate_paths(x.len(), y.len())?;
    let mut best: Option<DtwResult> = None;
    for path in paths {
        let cost = path.cost(x, y);
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(DtwResult { cost, path });
        }
    }
    Ok(best.expect("at least one warping path exists"))
}

/// All `(n, m)` warping paths.
pub fn enumerate_paths(n: usize, m: usize) -> Result<Vec<WarpingPath>> {
    if n == 0 || m == 0 {
        return Err(Error::EmptySequence);
    }
    if n > BRUTE_FORCE_MAX_LEN || m > BRUTE_FORCE_MAX_LEN {
        return Err(Error::InvalidArgument(format!(
            "brute-force DTW limited to {BRUTE_FORCE_MAX_LEN} points per sequence, got {n}x{m}"
        )));
    }
    let mut out = Vec::new();
    let mut current = vec![(1, 1)];
    extend(n, m, &mut current, &mut out);
    Ok(out)
}

fn extend(n: usize, m: usize, current: &mut Vec<(usize, usize)>, out: &mut Vec<WarpingPath>) {
    let (i, j) = *current.last().unwrap();
    if (i, j) == (n, m) {
        out.push(WarpingPath {
            steps: current.clone(),
        });
        return;
    }
    for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
        let next = (i + di, j + dj);
        if next.0 <= n && next.1 <= m {
            current.push(next);
            extend(n, m, current, out);
            current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().copied().map(Point::from).collect()
    }

    #[test]
    fn identical_sequences_cost_zero_on_diagonal() {
        let x = pts(&[(0.0, 0.0), (1.0, 2.0), (3.0, 1.0), (4.0, 4.0)]);
        let r = dtw(&x, &x).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.path.steps, vec![(1, 1), (2, 2), (3, 3), (4, 4)]);
    }

    #[test]
    fn three_versus_two() {
        let x = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        let y = pts(&[(0.0, 0.0), (2.0, 0.0)]);
        let r = dtw(&x, &y).unwrap();
        assert_eq!(r.cost, 1.0);
        assert!(r.path.is_admissible(3, 2));
        assert_eq!(brute_force_dtw(&x, &y).unwrap().cost, 1.0);
    }

    #[test]
    fn single_point_against_three() {
        let x = pts(&[(0.0, 0.0)]);
        let y = pts(&[(0.0, 0.0), (3.0, 0.0), (0.0, 0.0)]);
        let r = dtw(&x, &y).unwrap();
        assert_eq!(r.cost, 3.0);
        assert_eq!(r.path.steps, vec![(1, 1), (1, 2), (1, 3)]);
        assert_eq!(brute_force_dtw(&x, &y).unwrap(), r);
    }

    #[test]
    fn path_enumeration_counts() {
        assert_eq!(enumerate_paths(1, 1).unwrap().len(), 1);
        assert_eq!(enumerate_paths(2, 2).unwrap().len(), 3);
        // Central Delannoy numbers.
        assert_eq!(enumerate_paths(3, 3).unwrap().len(), 13);
        assert_eq!(enumerate_paths(4, 4).unwrap().len(), 63);
        assert!(enumerate_paths(9, 2).is_err());
    }

    #[test]
    fn empty_sequence_rejected() {
        assert!(matches!(dtw(&[], &pts(&[(0.0, 0.0)])), Err(Error::EmptySequence)));
    }

    #[test]
    fn wide_band_matches_full_search() {
        let x = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.5), (3.0, 3.0), (4.0, 1.0)]);
        let y = pts(&[(0.0, 0.2), (2.0, 1.0), (4.0, 1.5)]);
        let full = dtw(&x, &y).unwrap();
        let banded = dtw_banded(&x, &y, Some(10.0)).unwrap();
        assert_eq!(full, banded);
        let narrow = dtw_banded(&x, &y, Some(1.0)).unwrap();
        assert!(narrow.cost >= full.cost);
        assert!(narrow.path.is_admissible(5, 3));
        assert!(dtw_banded(&x, &y, Some(0.5)).is_err());
    }

    fn arb_seq() -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..=6)
            .prop_map(|v| v.into_iter().map(Point::from).collect())
    }

    proptest! {
        #[test]
        fn matches_brute_force(x in arb_seq(), y in arb_seq()) {
            let fast = dtw(&x, &y).unwrap();
            let slow = brute_force_dtw(&x, &y).unwrap();
            prop_assert_eq!(fast.cost, slow.cost);
            prop_assert!(fast.path.is_admissible(x.len(), y.len()));
            prop_assert_eq!(fast.path.cost(&x, &y), fast.cost);
        }

        #[test]
        fn symmetric_under_swap(
            x in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..30),
            y in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..30),
        ) {
            let x: Vec<Point> = x.into_iter().map(Point::from).collect();
            let y: Vec<Point> = y.into_iter().map(Point::from).collect();
            let a = dtw(&x, &y).unwrap().cost;
            let b = dtw(&y, &x).unwrap().cost;
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
