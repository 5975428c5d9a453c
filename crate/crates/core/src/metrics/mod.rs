//! Pairwise curve kernels: DTW, Procrustes and their direct composition.

mod dtw;
mod procrustes;

use std::cell::Cell;

pub use dtw::{
    brute_force_dtw, dtw, dtw_banded, enumerate_paths, DtwResult, WarpingPath,
    BRUTE_FORCE_MAX_LEN,
};
pub use procrustes::{procrustes, ProcrustesMode, ProcrustesResult};

use crate::contour::Point;
use crate::error::Result;

thread_local! {
    static KERNEL_CALLS: Cell<u64> = const { Cell::new(0) };
}

pub(crate) fn count_kernel_call() {
    KERNEL_CALLS.with(|c| c.set(c.get() + 1));
}

/// Number of DTW and Procrustes evaluations made on the calling thread.
pub fn kernel_calls_on_this_thread() -> u64 {
    KERNEL_CALLS.with(Cell::get)
}

/// Direct composition: DTW between `target` and the Procrustes-aligned
/// `moving` curve. Both curves must have the same number of points.
pub fn direct_composition(target: &[Point], moving: &[Point], band: Option<f64>) -> Result<f64> {
    let aligned = procrustes(target, moving, ProcrustesMode::Standardized)?;
    Ok(dtw_banded(target, &aligned.z, band)?.cost)
}
