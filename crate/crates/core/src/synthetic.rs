//! Parametric vessel profiles with known typology, for benchmarking.
//!
//! Three families (shallow bowl, flaring cup, bulging jar) in two size
//! groups, the larger group scaled by a fixed factor. Each instance jitters
//! the family parameters, perturbs the points with Gaussian noise, then is
//! smoothed and normalized like real input. Profiles use the upside-down
//! convention: base centre at the top on the axis, rim on the `x` axis.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::Labeling;
use crate::contour::{normalize_position, Contour, ContourSet, DEFAULT_EPS_REL};
use crate::error::{Error, Result};
use crate::smoothing::{smooth_fitted, DEFAULT_ORDER, DEFAULT_WINDOW};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bowl,
    Cup,
    Jar,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Bowl, Family::Cup, Family::Jar];

    /// `(height, rim radius, base radius)` before jitter.
    fn base_params(self) -> (f64, f64, f64) {
        match self {
            Family::Bowl => (0.5, 1.0, 0.35),
            Family::Cup => (0.9, 0.8, 0.3),
            Family::Jar => (1.2, 0.35, 0.35),
        }
    }

    /// Wall radius at `u` in [0, 1], running from base corner to rim.
    fn wall(self, u: f64, rim: f64, base: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Family::Bowl => base + (rim - base) * (0.5 * PI * u).sin(),
            Family::Cup => base + (rim - base) * u.powf(1.8),
            Family::Jar => base + 0.35 * (PI * u).sin() + (rim - base) * u,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Bowl => "bowl",
            Family::Cup => "cup",
            Family::Jar => "jar",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Instances per family and size group.
    pub instances: usize,
    /// Scale of the large group relative to the small one.
    pub scale_factor: f64,
    /// Relative jitter of height and radii, uniform in `±jitter`.
    pub jitter: f64,
    /// Standard deviation of point noise relative to the profile height.
    pub noise: f64,
    /// Points on the base and on the wall.
    pub base_points: usize,
    pub wall_points: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            instances: 6,
            scale_factor: 2.0,
            jitter: 0.05,
            noise: 0.002,
            base_points: 15,
            wall_points: 70,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub set: ContourSet,
    /// Family × size group, one label per contour.
    pub typology: Labeling,
    pub size_groups: Labeling,
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box–Muller; one draw per call keeps the stream simple.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn profile(
    family: Family,
    scale: f64,
    config: &SyntheticConfig,
    rng: &mut impl Rng,
) -> Vec<(f64, f64)> {
    let (h, rim, base) = family.base_params();
    let mut jitter = |v: f64| v * (1.0 + rng.random_range(-config.jitter..=config.jitter));
    let (h, rim, base) = (jitter(h), jitter(rim), jitter(base));
    let dome = 0.03 * h;

    let sigma = config.noise * h;
    let mut pts = Vec::with_capacity(config.base_points + config.wall_points);
    // Base noise is radial and fades towards the axis, keeping the centre
    // the unique uppermost point.
    for i in 0..config.base_points {
        let v = i as f64 / config.base_points as f64;
        let x = v * (base + sigma * gaussian(rng));
        pts.push((scale * x, scale * (h + dome * (1.0 - v * v))));
    }
    for i in 0..config.wall_points {
        let u = i as f64 / (config.wall_points - 1) as f64;
        let x = family.wall(u, rim, base) + sigma * gaussian(rng);
        let y = h * (1.0 - u) + sigma * gaussian(rng);
        pts.push((scale * x, scale * y));
    }
    pts
}

/// Generates `3 · 2 · instances` contours ordered by family, size group,
/// then instance.
pub fn generate(config: &SyntheticConfig) -> Result<SyntheticDataset> {
    if config.instances == 0 || config.base_points < 2 || config.wall_points < 2 {
        return Err(Error::InvalidArgument(
            "instances must be >= 1 and point counts >= 2".into(),
        ));
    }
    if !(config.scale_factor > 0.0) || !(config.noise >= 0.0) || !(0.0..0.5).contains(&config.jitter) {
        return Err(Error::InvalidArgument(format!(
            "bad synthetic parameters: {config:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut contours = Vec::new();
    let mut typology = Vec::new();
    let mut sizes = Vec::new();
    for family in Family::ALL {
        for (group, scale) in [(1usize, 1.0), (2, config.scale_factor)] {
            for k in 0..config.instances {
                let id = format!("{family}-s{group}-{k:02}");
                let raw = Contour::from_xy(id.clone(), &profile(family, scale, config, &mut rng))?;
                let smoothed = smooth_fitted(&raw, DEFAULT_WINDOW, DEFAULT_ORDER)?;
                let (c, _) = normalize_position(&smoothed, smoothed.tolerance(DEFAULT_EPS_REL))?;
                contours.push(c);
                typology.push(format!("{family}-s{group}"));
                sizes.push(group);
            }
        }
    }
    let set = ContourSet::new(format!("synthetic-{}", config.seed), contours)?;
    let ids = set.ids();
    Ok(SyntheticDataset {
        typology: Labeling::from_groups(ids.clone(), &typology),
        size_groups: Labeling::from_groups(ids, &sizes),
        set,
    })
}
