//! Contours of cross-sections and the positional conventions they must obey.
//!
//! A contour is an open polyline in the first quadrant. Its lowermost point
//! lies on the `x` axis and its uppermost point lies on the axis of
//! revolution (`x = 0`). The radius of the object of revolution is the
//! smallest `x` among the points resting on the `x` axis.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when no explicit positional tolerance is given.
pub const DEFAULT_EPS_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Where a contour came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    #[default]
    Original,
    Augmented { transform: String, parent: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub id: String,
    pub points: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default)]
    pub source: Source,
}

impl Contour {
    /// Builds a contour, rejecting fewer than two points or zero arc length.
    pub fn new(id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        let contour = Self {
            id: id.into(),
            points,
            radius: None,
            source: Source::Original,
        };
        contour.check_degenerate()?;
        Ok(contour)
    }

    pub fn from_xy(id: impl Into<String>, xy: &[(f64, f64)]) -> Result<Self> {
        Self::new(id, xy.iter().copied().map(Point::from).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let mut bb = BoundingBox {
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for p in &self.points {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        bb
    }

    /// Absolute positional tolerance: `eps_rel` times the bounding-box diagonal.
    pub fn tolerance(&self, eps_rel: f64) -> f64 {
        let bb = self.bounding_box();
        eps_rel * bb.width().hypot(bb.height())
    }

    /// Mirrors `y`, for drawings in the opposite vertical convention.
    pub fn flip_y(&self) -> Contour {
        let mut out = self.clone();
        for p in &mut out.points {
            p.y = -p.y;
        }
        out.radius = None;
        out
    }

    pub(crate) fn check_degenerate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::DegenerateContour {
                id: self.id.clone(),
                reason: format!("{} point(s), need at least 2", self.points.len()),
            });
        }
        if self.points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::DegenerateContour {
                id: self.id.clone(),
                reason: "non-finite coordinate".into(),
            });
        }
        if self.arc_length() <= 0.0 {
            return Err(Error::DegenerateContour {
                id: self.id.clone(),
                reason: "all points identical (zero arc length)".into(),
            });
        }
        Ok(())
    }

    /// Index of the first point (in point order) attaining the maximal `y`.
    fn top_index(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.points.iter().enumerate() {
            if p.y > self.points[best].y {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub dataset_id: String,
    pub contours: Vec<Contour>,
}

impl ContourSet {
    pub fn new(dataset_id: impl Into<String>, contours: Vec<Contour>) -> Result<Self> {
        if contours.len() < 2 {
            return Err(Error::TooFewContours(contours.len()));
        }
        let mut seen = HashSet::new();
        for c in &contours {
            if !seen.insert(c.id.as_str()) {
                return Err(Error::DuplicateId(c.id.clone()));
            }
        }
        Ok(Self {
            dataset_id: dataset_id.into(),
            contours,
        })
    }

    pub fn len(&self) -> usize {
        self.contours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contours.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.contours.iter().map(|c| c.id.clone()).collect()
    }
}

/// Which positional assumption a contour breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assumption {
    /// First-quadrant containment.
    A,
    /// Lowermost point on the `x` axis.
    B,
    /// Uppermost point on the axis of revolution.
    C,
    Degenerate,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assumption::A => f.write_str("A"),
            Assumption::B => f.write_str("B"),
            Assumption::C => f.write_str("C"),
            Assumption::Degenerate => f.write_str("degenerate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub assumption: Assumption,
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub contour_id: String,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, assumption: Assumption, measured: f64, tolerance: f64) {
        self.violations.push(Violation {
            assumption,
            measured,
            tolerance,
        });
    }
}

/// Checks assumptions (A)–(C) within `eps` and reports every violation.
pub fn validate(contour: &Contour, eps: f64) -> ValidationReport {
    let mut report = ValidationReport {
        contour_id: contour.id.clone(),
        violations: Vec::new(),
    };
    if contour.points.len() < 2 {
        report.push(Assumption::Degenerate, contour.points.len() as f64, 2.0);
        return report;
    }
    let length = contour.arc_length();
    if length.is_nan() || length <= 0.0 {
        report.push(Assumption::Degenerate, length, 0.0);
        return report;
    }

    let bb = contour.bounding_box();
    if bb.min.x < -eps || bb.min.y < -eps {
        report.push(Assumption::A, bb.min.x.min(bb.min.y), eps);
    }
    if bb.min.y.abs() > eps {
        report.push(Assumption::B, bb.min.y, eps);
    }
    let top = contour.points[contour.top_index()];
    if top.x.abs() > eps {
        report.push(Assumption::C, top.x, eps);
    }
    report
}

/// Translates the contour so its lowermost point sits on the `x` axis and
/// its (first) uppermost point sits on the axis of revolution, then
/// recomputes the radius.
///
/// Residual negative `x` is reported as an assumption-A violation; it is not
/// an error.
pub fn normalize_position(contour: &Contour, eps: f64) -> Result<(Contour, ValidationReport)> {
    contour.check_degenerate()?;
    let y_min = contour
        .points
        .iter()
        .map(|p| p.y)
        .fold(f64::INFINITY, f64::min);
    let x_top = contour.points[contour.top_index()].x;

    let mut out = contour.clone();
    for p in &mut out.points {
        p.x -= x_top;
        p.y -= y_min;
    }
    out.radius = radius_of(&out.points, eps);
    let report = validate(&out, eps);
    Ok((out, report))
}

/// Smallest `x` among points with `y <= eps`.
pub fn radius_of(points: &[Point], eps: f64) -> Option<f64> {
    points
        .iter()
        .filter(|p| p.y <= eps)
        .map(|p| p.x)
        .reduce(f64::min)
}

/// Resamples to `m` points at equal arc-length spacing. The first and last
/// points are kept bit-for-bit.
pub fn resample_arclength(contour: &Contour, m: usize) -> Result<Contour> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "resample count must be >= 2, got {m}"
        )));
    }
    contour.check_degenerate()?;
    let pts = &contour.points;

    let mut cumulative = Vec::with_capacity(pts.len());
    cumulative.push(0.0);
    for w in pts.windows(2) {
        let last = *cumulative.last().unwrap();
        cumulative.push(last + w[0].dist(w[1]));
    }
    let total = *cumulative.last().unwrap();

    let mut out = Vec::with_capacity(m);
    out.push(pts[0]);
    let mut seg = 0;
    for j in 1..m - 1 {
        let target = total * j as f64 / (m - 1) as f64;
        while seg + 1 < pts.len() - 1 && cumulative[seg + 1] < target {
            seg += 1;
        }
        let seg_len = cumulative[seg + 1] - cumulative[seg];
        let t = if seg_len > 0.0 {
            ((target - cumulative[seg]) / seg_len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (pts[seg], pts[seg + 1]);
        out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
    }
    out.push(pts[pts.len() - 1]);

    Ok(Contour {
        id: contour.id.clone(),
        points: out,
        radius: contour.radius,
        source: contour.source.clone(),
    })
}
