//! Warp-based augmentation of contour sets.
//!
//! Each warp targets one vertical third of the contour (top, middle or
//! bottom) and pulls it towards the left or right edge of the bounding box.
//! The horizontal displacement is a tensor-product cubic Bézier field over a
//! 4×4 control grid: across `x` the control values ramp linearly towards the
//! chosen edge, and along `y` two patches form a bump that vanishes with
//! zero slope at both borders of the region. Points outside the region do
//! not move, `y` never changes, and every point stays inside the bounding
//! box, so a valid contour stays valid.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{normalize_position, Contour, ContourSet, Source, DEFAULT_EPS_REL};
use crate::error::{Error, Result};

pub const DEFAULT_MAGNITUDE: f64 = 0.1;
pub const MAX_MAGNITUDE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Top,
    Middle,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpSpec {
    pub region: Region,
    pub direction: Direction,
    /// Peak displacement as a fraction of the contour width.
    pub magnitude: f64,
}

impl WarpSpec {
    /// The six region × direction combinations at one magnitude.
    pub fn all(magnitude: f64) -> Vec<WarpSpec> {
        [Region::Top, Region::Middle, Region::Bottom]
            .into_iter()
            .flat_map(|region| {
                [Direction::Left, Direction::Right].map(|direction| WarpSpec {
                    region,
                    direction,
                    magnitude,
                })
            })
            .collect()
    }

    pub fn transform_id(&self) -> String {
        format!("{}-{}", self.region, self.direction)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Top => "top",
            Region::Middle => "middle",
            Region::Bottom => "bottom",
        })
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "left",
            Direction::Right => "right",
        })
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" => Ok(Region::Top),
            "middle" => Ok(Region::Middle),
            "bottom" => Ok(Region::Bottom),
            _ => Err(Error::InvalidArgument(format!("unknown region {s:?}"))),
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Direction::Left),
            "right" => Ok(Direction::Right),
            _ => Err(Error::InvalidArgument(format!("unknown direction {s:?}"))),
        }
    }
}

fn bernstein3(t: f64) -> [f64; 4] {
    let s = 1.0 - t;
    [s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t]
}

/// Bicubic Bézier patch of scalar control values, `control[i][j]` with `i`
/// along `u` and `j` along `v`.
#[derive(Debug, Clone, Copy)]
struct BezierPatch {
    control: [[f64; 4]; 4],
}

impl BezierPatch {
    fn outer(across: [f64; 4], along: [f64; 4]) -> Self {
        let mut control = [[0.0; 4]; 4];
        for (i, a) in across.iter().enumerate() {
            for (j, b) in along.iter().enumerate() {
                control[i][j] = a * b;
            }
        }
        Self { control }
    }

    fn eval(&self, u: f64, v: f64) -> f64 {
        let (bu, bv) = (bernstein3(u), bernstein3(v));
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += bu[i] * bv[j] * self.control[i][j];
            }
        }
        acc
    }
}

const RISE: [f64; 4] = [0.0, 0.0, 1.0, 1.0];
const FALL: [f64; 4] = [1.0, 1.0, 0.0, 0.0];

/// Warps one contour and re-normalises its position. Point count and order
/// are preserved.
pub fn warp(contour: &Contour, spec: &WarpSpec) -> Result<Contour> {
    warp_with_limit(contour, spec, MAX_MAGNITUDE)
}

pub fn warp_with_limit(contour: &Contour, spec: &WarpSpec, max_magnitude: f64) -> Result<Contour> {
    if !(spec.magnitude >= 0.0) || !spec.magnitude.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "warp magnitude must be finite and >= 0, got {}",
            spec.magnitude
        )));
    }
    if spec.magnitude > max_magnitude {
        return Err(Error::MagnitudeTooLarge {
            magnitude: spec.magnitude,
            max: max_magnitude,
        });
    }
    contour.check_degenerate()?;
    let bb = contour.bounding_box();
    let (width, height) = (bb.width(), bb.height());
    if !(height > 0.0) && !(width > 0.0) {
        return Err(Error::DegenerateContour {
            id: contour.id.clone(),
            reason: "degenerate bounding box".into(),
        });
    }
    // A contour lying on a vertical line is measured against its height.
    let extent = if width > 0.0 { width } else { height };

    let across = match spec.direction {
        Direction::Left => [0.0, -1.0 / 3.0, -2.0 / 3.0, -1.0],
        Direction::Right => [1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0],
    };
    let rising = BezierPatch::outer(across, RISE);
    let falling = BezierPatch::outer(across, FALL);

    let third = height / 3.0;
    let (lo, hi) = match spec.region {
        Region::Bottom => (bb.min.y, bb.min.y + third),
        Region::Middle => (bb.min.y + third, bb.min.y + 2.0 * third),
        Region::Top => (bb.min.y + 2.0 * third, bb.max.y),
    };
    let scale = spec.magnitude * extent;

    let mut out = contour.clone();
    for p in &mut out.points {
        if !(p.y > lo && p.y < hi) {
            continue;
        }
        let u = ((p.x - bb.min.x) / extent).clamp(0.0, 1.0);
        let t = (p.y - lo) / (hi - lo);
        let field = if t <= 0.5 {
            rising.eval(u, 2.0 * t)
        } else {
            falling.eval(u, 2.0 * t - 1.0)
        };
        p.x += scale * field;
    }
    let (normalized, _) = normalize_position(&out, contour.tolerance(DEFAULT_EPS_REL))?;
    Ok(normalized)
}

/// Each contour followed by its six warps; the output is seven times larger.
pub fn augment_set(set: &ContourSet, magnitude: f64) -> Result<ContourSet> {
    let specs = WarpSpec::all(magnitude);
    let groups = set
        .contours
        .par_iter()
        .map(|c| {
            let mut group = Vec::with_capacity(1 + specs.len());
            group.push(c.clone());
            for spec in &specs {
                let mut warped = warp(c, spec)?;
                let transform = spec.transform_id();
                warped.id = format!("{}~{}", c.id, transform);
                warped.source = Source::Augmented {
                    transform,
                    parent: c.id.clone(),
                };
                group.push(warped);
            }
            Ok(group)
        })
        .collect::<Result<Vec<_>>>()?;
    ContourSet::new(
        format!("{}-augmented", set.dataset_id),
        groups.into_iter().flatten().collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{validate, Point};
    use proptest::prelude::*;

    fn vessel(id: &str) -> Contour {
        // Rim at (3, 0), wall bulging outwards, base centre at (0, 6).
        let pts: Vec<(f64, f64)> = (0..=60)
            .map(|i| {
                let t = i as f64 / 60.0;
                let y = 6.0 * t;
                let x = (3.0 + 1.2 * (std::f64::consts::PI * t).sin()) * (1.0 - t * t);
                (x, y)
            })
            .collect();
        let c = Contour::from_xy(id, &pts).unwrap();
        normalize_position(&c, 1e-9).unwrap().0
    }

    #[test]
    fn zero_magnitude_is_identity() {
        let c = vessel("v");
        for spec in WarpSpec::all(0.0) {
            let w = warp(&c, &spec).unwrap();
            assert_eq!(w.points, c.points);
        }
    }

    #[test]
    fn warps_stay_valid_and_bounded() {
        let c = vessel("v");
        let width = c.bounding_box().width();
        for spec in WarpSpec::all(MAX_MAGNITUDE) {
            let w = warp(&c, &spec).unwrap();
            assert_eq!(w.len(), c.len());
            assert!(validate(&w, w.tolerance(DEFAULT_EPS_REL)).is_ok(), "{spec:?}");
            let max_shift = c
                .points
                .iter()
                .zip(&w.points)
                .map(|(a, b)| a.dist(*b))
                .fold(0.0, f64::max);
            assert!(max_shift <= MAX_MAGNITUDE * width + 1e-12);
            assert!(max_shift > 0.0);
        }
    }

    #[test]
    fn top_warp_of_vertical_segment() {
        let pts: Vec<Point> = (0..=30).map(|i| Point::new(0.0, i as f64 / 3.0)).collect();
        let c = Contour::new("seg", pts).unwrap();
        let spec = WarpSpec {
            region: Region::Top,
            direction: Direction::Right,
            magnitude: 0.1,
        };
        let w = warp(&c, &spec).unwrap();
        let extent = 10.0;
        for (a, b) in c.points.iter().zip(&w.points) {
            assert_eq!(a.y, b.y);
            if a.y <= 20.0 / 3.0 {
                assert!((a.x - b.x).abs() < 1e-9);
            } else {
                assert!(b.x >= a.x && b.x - a.x <= 0.1 * extent + 1e-12);
            }
        }
        // Peak of the bump sits mid-region with full displacement.
        let mid = w.points.iter().find(|p| (p.y - 25.0 / 3.0).abs() < 1e-9).unwrap();
        assert!((mid.x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn magnitude_over_limit_rejected() {
        let spec = WarpSpec {
            region: Region::Middle,
            direction: Direction::Left,
            magnitude: 0.2,
        };
        assert!(matches!(
            warp(&vessel("v"), &spec),
            Err(Error::MagnitudeTooLarge { .. })
        ));
    }

    #[test]
    fn augmented_set_counts_and_provenance() {
        let set = ContourSet::new("s", vec![vessel("a"), vessel("b")]).unwrap();
        let aug = augment_set(&set, DEFAULT_MAGNITUDE).unwrap();
        assert_eq!(aug.len(), 14);
        let derived: Vec<_> = aug
            .contours
            .iter()
            .filter(|c| matches!(c.source, Source::Augmented { .. }))
            .collect();
        assert_eq!(derived.len(), 12);
        assert_eq!(aug.contours[1].id, "a~top-left");
        assert_eq!(
            aug.contours[1].source,
            Source::Augmented {
                transform: "top-left".into(),
                parent: "a".into()
            }
        );
    }

    proptest! {
        #[test]
        fn warp_preserves_validity(
            bumps in prop::collection::vec(0.0..2.0f64, 5),
            radius in 0.5..5.0f64,
            height in 0.5..8.0f64,
            magnitude in 0.0..MAX_MAGNITUDE,
            which in 0usize..6,
        ) {
            let pts: Vec<(f64, f64)> = (0..=50).map(|i| {
                let t = i as f64 / 50.0;
                let wobble: f64 = bumps.iter().enumerate()
                    .map(|(k, b)| b * ((k + 1) as f64 * std::f64::consts::PI * t).sin())
                    .sum::<f64>() * 0.2;
                ((radius + wobble.abs()) * (1.0 - t), height * t)
            }).collect();
            let c = Contour::from_xy("p", &pts).unwrap();
            let c = normalize_position(&c, c.tolerance(DEFAULT_EPS_REL)).unwrap().0;
            prop_assume!(validate(&c, c.tolerance(DEFAULT_EPS_REL)).is_ok());
            let spec = WarpSpec::all(magnitude)[which];
            let w = warp(&c, &spec).unwrap();
            prop_assert!(validate(&w, w.tolerance(DEFAULT_EPS_REL)).is_ok());
            let width = c.bounding_box().width();
            for (a, b) in c.points.iter().zip(&w.points) {
                prop_assert!(a.dist(*b) <= magnitude * width + 1e-12);
            }
        }
    }
}
