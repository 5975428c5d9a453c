//! Full Procrustes superimposition of one curve onto another.
//!
//! For centred configurations `X0` (target) and `Y0` (moving), write
//! `a = Σ x·y` and `b = Σ (x₂y₁ − x₁y₂)`. Among proper rotations the
//! cross term `Σ x·(R y)` is `a cos θ + b sin θ`, maximised at
//! `θ* = atan2(b, a)` with value `√(a² + b²)`. That value equals the sum of
//! the singular values of the 2×2 cross-covariance with the smaller one
//! negated when its determinant is negative, i.e. the reflection-free SVD
//! solution. The optimal scale is `√(a² + b²) / ‖Y0‖²`.

use serde::{Deserialize, Serialize};

use crate::contour::Point;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcrustesMode {
    /// Residual divided by the target's centred sum of squares; in [0, 1].
    #[default]
    Standardized,
    /// Plain residual sum of squares.
    Raw,
}

impl std::str::FromStr for ProcrustesMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standardized" | "standardised" => Ok(Self::Standardized),
            "raw" => Ok(Self::Raw),
            other => Err(Error::InvalidArgument(format!(
                "unknown procrustes mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcrustesResult {
    pub d: f64,
    pub gamma_star: f64,
    pub theta_star: f64,
    pub t_star: Point,
    /// The moving curve after the optimal transform.
    pub z: Vec<Point>,
}

impl ProcrustesResult {
    /// Applies the recovered transform to an arbitrary point.
    pub fn transform(&self, p: Point) -> Point {
        let (s, c) = self.theta_star.sin_cos();
        Point::new(
            self.gamma_star * (c * p.x - s * p.y) + self.t_star.x,
            self.gamma_star * (s * p.x + c * p.y) + self.t_star.y,
        )
    }
}

fn centroid(points: &[Point]) -> Point {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point::new(sx / n, sy / n)
}

/// Superimposes `moving` onto `target` with the best similarity transform
/// (positive scale, proper rotation, translation).
pub fn procrustes(target: &[Point], moving: &[Point], mode: ProcrustesMode) -> Result<ProcrustesResult> {
    super::count_kernel_call();
    if target.len() != moving.len() {
        return Err(Error::LengthMismatch(target.len(), moving.len()));
    }
    if target.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "Procrustes needs at least 2 points, got {}",
            target.len()
        )));
    }
    let (cx, cy) = (centroid(target), centroid(moving));

    let mut target_ss = 0.0;
    let mut moving_ss = 0.0;
    let mut a = 0.0;
    let mut b = 0.0;
    for (p, q) in target.iter().zip(moving) {
        let (x1, x2) = (p.x - cx.x, p.y - cx.y);
        let (y1, y2) = (q.x - cy.x, q.y - cy.y);
        target_ss += x1 * x1 + x2 * x2;
        moving_ss += y1 * y1 + y2 * y2;
        a += x1 * y1 + x2 * y2;
        b += x2 * y1 - x1 * y2;
    }
    if !(target_ss > 0.0) {
        return Err(Error::ZeroNorm("target curve"));
    }
    if !(moving_ss > 0.0) {
        return Err(Error::ZeroNorm("moving curve"));
    }

    let theta = b.atan2(a);
    let gamma = a.hypot(b) / moving_ss;
    let (s, c) = theta.sin_cos();
    let rotated_centroid = Point::new(c * cy.x - s * cy.y, s * cy.x + c * cy.y);
    let t = Point::new(
        cx.x - gamma * rotated_centroid.x,
        cx.y - gamma * rotated_centroid.y,
    );

    let mut result = ProcrustesResult {
        d: 0.0,
        gamma_star: gamma,
        theta_star: theta,
        t_star: t,
        z: Vec::with_capacity(moving.len()),
    };
    let mut residual = 0.0;
    for (p, q) in target.iter().zip(moving) {
        // Transform the centred point and add back the target centroid; this
        // equals γRq + t but avoids cancellation against large offsets.
        let (y1, y2) = (q.x - cy.x, q.y - cy.y);
        let z = Point::new(
            gamma * (c * y1 - s * y2) + cx.x,
            gamma * (s * y1 + c * y2) + cx.y,
        );
        residual += (p.x - z.x).powi(2) + (p.y - z.y).powi(2);
        result.z.push(z);
    }
    result.d = match mode {
        ProcrustesMode::Standardized => residual / target_ss,
        ProcrustesMode::Raw => residual,
    };
    Ok(result)
}
