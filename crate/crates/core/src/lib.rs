//! Clustering of 2D cross-section contours of objects of revolution by shape
//! and size.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`contour`] and [`smoothing`] bring raw point sequences into a common
//!    position (lowermost point on the `x` axis, uppermost point on the axis
//!    of revolution) and smooth them.
//! 2. [`metrics`] compares pairs of curves with dynamic time warping,
//!    Procrustes superimposition and their direct composition.
//! 3. [`similarity`] turns the pairwise values into component matrices and
//!    a weighted similarity matrix.
//! 4. [`clustering`] builds dendrograms, scores them with the cophenetic
//!    correlation coefficient and cuts them into labelings.
//!
//! [`augmentation`] generates warped variants of a dataset, [`pipeline`]
//! drives the stages from files, and [`service`] serves cached results over
//! HTTP.
pub mod augmentation;
pub mod clustering;
pub mod contour;
pub mod error;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod service;
pub mod similarity;
pub mod smoothing;
pub mod synthetic;

pub use error::{Error, Result};
