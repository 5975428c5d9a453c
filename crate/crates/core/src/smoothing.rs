//! Savitzky–Golay smoothing of contour coordinates.
//!
//! Each window is fitted with a least-squares polynomial and the fitted value
//! at the window centre replaces the sample. The `x` and `y` sequences are
//! filtered independently. Ends are padded by point reflection through the
//! endpoint (`s[-j] = 2 s[0] - s[j]`), which keeps linear runs linear, so
//! polynomials up to degree 1 pass through unchanged everywhere and up to
//! degree `order` in the interior.

use nalgebra::DMatrix;

use crate::contour::{Contour, Point};
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 11;
pub const DEFAULT_ORDER: usize = 3;

#[derive(Debug, Clone)]
pub struct SavitzkyGolay {
    window: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl SavitzkyGolay {
    pub fn new(window: usize, order: usize) -> Result<Self> {
        if window < 3 || window % 2 == 0 {
            return Err(Error::Smoothing(format!(
                "window must be odd and >= 3, got {window}"
            )));
        }
        if order >= window {
            return Err(Error::Smoothing(format!(
                "order {order} must be < window {window}"
            )));
        }
        Ok(Self {
            window,
            order,
            coeffs: coefficients(window, order),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Convolution weights for the window centre.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn smooth_series(&self, values: &[f64]) -> Result<Vec<f64>> {
        let k = values.len();
        if self.window > k {
            return Err(Error::Smoothing(format!(
                "window {} exceeds sequence length {k}",
                self.window
            )));
        }
        let half = self.window / 2;
        let at = |i: isize| -> f64 {
            if i < 0 {
                2.0 * values[0] - values[(-i) as usize]
            } else if i as usize >= k {
                let over = i as usize - (k - 1);
                2.0 * values[k - 1] - values[k - 1 - over]
            } else {
                values[i as usize]
            }
        };
        Ok((0..k as isize)
            .map(|i| {
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * at(i + j as isize - half as isize))
                    .sum()
            })
            .collect())
    }

    pub fn smooth(&self, contour: &Contour) -> Result<Contour> {
        let xs: Vec<f64> = contour.points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = contour.points.iter().map(|p| p.y).collect();
        let xs = self.smooth_series(&xs)?;
        let ys = self.smooth_series(&ys)?;
        let mut out = contour.clone();
        out.points = xs.into_iter().zip(ys).map(|(x, y)| Point::new(x, y)).collect();
        out.radius = None;
        Ok(out)
    }
}

/// Smooths a contour with a freshly built filter.
pub fn smooth(contour: &Contour, window: usize, order: usize) -> Result<Contour> {
    SavitzkyGolay::new(window, order)?.smooth(contour)
}

/// Largest odd window not above `window` that fits `k` points and exceeds
/// `order`; `None` when the contour is too short to smooth at all.
pub fn fitted_window(k: usize, window: usize, order: usize) -> Option<usize> {
    let w = window.min(if k % 2 == 1 { k } else { k.saturating_sub(1) });
    (w >= 3 && w > order).then_some(w)
}

/// Smooths with the window shrunk to fit short contours; contours too short
/// for any window come back unchanged.
pub fn smooth_fitted(contour: &Contour, window: usize, order: usize) -> Result<Contour> {
    SavitzkyGolay::new(window, order)?;
    match fitted_window(contour.len(), window, order) {
        Some(w) => smooth(contour, w, order),
        None => Ok(contour.clone()),
    }
}

/// Centre row of the least-squares hat matrix `J (JᵀJ)⁻¹ Jᵀ`, computed from a
/// QR factorisation of the Vandermonde matrix on abscissae scaled to [-1, 1].
fn coefficients(window: usize, order: usize) -> Vec<f64> {
    let half = (window / 2) as f64;
    let vander = DMatrix::from_fn(window, order + 1, |i, p| {
        ((i as f64 - half) / half).powi(p as i32)
    });
    let q = vander.qr().q();
    let centre = window / 2;
    (0..window)
        .map(|i| (0..=order).map(|p| q[(centre, p)] * q[(i, p)]).sum())
        .collect()
}
