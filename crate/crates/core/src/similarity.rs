//! Pairwise component matrices and the weighted similarity matrix built from
//! them.
//!
//! For contours `i != j`:
//!
//! * `pa(i,j)` is the larger of the two directional Procrustes residuals,
//! * `dc(i,j)` is the larger of the two directional direct compositions,
//! * `gamma(i,j)` is one minus the smaller of the two optimal scales.
//!
//! The similarity matrix is `μ·pa(i,j) + λ·ndc(j)·dc(i,j) + ω·nγ(j)·γ(i,j)`,
//! where `ndc` and `nγ` are reciprocal column maxima (or 1 when disabled).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::contour::{resample_arclength, ContourSet};
use crate::error::{Error, Result};
use crate::metrics::{dtw_banded, procrustes, ProcrustesMode};

pub const DEFAULT_RESAMPLE: usize = 200;

/// Dense square matrix, serialized as nested rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        Ok(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 0.0)
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Upper-triangle entries `(0,1), (0,2), …, (n-2,n-1)`.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SquareMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentMatrices {
    pub ids: Vec<String>,
    pub pa: SquareMatrix,
    pub dc: SquareMatrix,
    pub gamma: SquareMatrix,
}

impl ComponentMatrices {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Checks shape, symmetry, zero diagonals, non-negativity and `gamma` in [0, 1].
    pub fn check(&self) -> Result<()> {
        let n = self.ids.len();
        for (name, m) in [("pa", &self.pa), ("dc", &self.dc), ("gamma", &self.gamma)] {
            if m.n() != n {
                return Err(Error::InvalidMatrix(format!(
                    "{name} is {}x{0}, expected {n}x{n}",
                    m.n()
                )));
            }
            if !m.is_symmetric() || !m.has_zero_diagonal() {
                return Err(Error::InvalidMatrix(format!(
                    "{name} must be symmetric with zero diagonal"
                )));
            }
            if m.data.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidMatrix(format!(
                    "{name} has negative or non-finite entries"
                )));
            }
        }
        if self.gamma.data.iter().any(|v| *v > 1.0) {
            return Err(Error::InvalidMatrix("gamma entries exceed 1".into()));
        }
        Ok(())
    }
}

/// Parameters of the pairwise kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Common point count for Procrustes and direct composition.
    pub resample: usize,
    #[serde(default)]
    pub procrustes: ProcrustesMode,
    /// Optional DTW band; `None` searches the full cost matrix.
    #[serde(default)]
    pub dtw_band: Option<f64>,
    /// Run the composition's DTW against the target's original points
    /// instead of its resampled copy.
    #[serde(default)]
    pub dc_full_resolution: bool,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            resample: DEFAULT_RESAMPLE,
            procrustes: ProcrustesMode::Standardized,
            dtw_band: None,
            dc_full_resolution: false,
        }
    }
}

struct PairValues {
    pa: f64,
    dc: f64,
    gamma: f64,
}

/// Evaluates every unordered pair in both directions, in parallel.
pub fn pairwise_components(set: &ContourSet, options: &MetricOptions) -> Result<ComponentMatrices> {
    let n = set.len();
    if n < 2 {
        return Err(Error::TooFewContours(n));
    }
    let resampled = set
        .contours
        .par_iter()
        .map(|c| resample_arclength(c, options.resample).map(|r| r.points))
        .collect::<Result<Vec<_>>>()?;

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| {
            let dtw_target = |k: usize| -> &[_] {
                if options.dc_full_resolution {
                    &set.contours[k].points
                } else {
                    &resampled[k]
                }
            };
            let eval = || -> Result<PairValues> {
                let ij = procrustes(&resampled[i], &resampled[j], options.procrustes)?;
                let ji = procrustes(&resampled[j], &resampled[i], options.procrustes)?;
                let dc_ij = dtw_banded(dtw_target(i), &ij.z, options.dtw_band)?.cost;
                let dc_ji = dtw_banded(dtw_target(j), &ji.z, options.dtw_band)?.cost;
                Ok(PairValues {
                    pa: ij.d.max(ji.d),
                    dc: dc_ij.max(dc_ji),
                    gamma: (1.0 - ij.gamma_star.min(ji.gamma_star)).clamp(0.0, 1.0),
                })
            };
            eval().map_err(|e| Error::Pair {
                a: set.contours[i].id.clone(),
                b: set.contours[j].id.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = ComponentMatrices {
        ids: set.ids(),
        pa: SquareMatrix::zeros(n),
        dc: SquareMatrix::zeros(n),
        gamma: SquareMatrix::zeros(n),
    };
    for (&(i, j), v) in pairs.iter().zip(values) {
        for (a, b) in [(i, j), (j, i)] {
            out.pa.set(a, b, v.pa);
            out.dc.set(a, b, v.dc);
            out.gamma.set(a, b, v.gamma);
        }
    }
    Ok(out)
}

/// `1 / max_i matrix(i, j)` for each column `j`.
pub fn column_normalizers(matrix: &SquareMatrix) -> Result<Vec<f64>> {
    (0..matrix.n())
        .map(|j| {
            let max = (0..matrix.n()).map(|i| matrix.get(i, j)).fold(0.0, f64::max);
            if max > 0.0 {
                Ok(1.0 / max)
            } else {
                Err(Error::ZeroColumn { column: j })
            }
        })
        .collect()
}

/// `1 / max_ij matrix(i, j)`, repeated for every column.
pub fn global_normalizers(matrix: &SquareMatrix) -> Result<Vec<f64>> {
    let max = matrix.data.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        Ok(vec![1.0 / max; matrix.n()])
    } else {
        Err(Error::ZeroColumn { column: 0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub mu: f64,
    pub lambda: f64,
    pub omega: f64,
    pub use_ndc: bool,
    pub use_ngamma: bool,
}

impl WeightConfig {
    pub const fn new(mu: f64, lambda: f64, omega: f64, use_ndc: bool, use_ngamma: bool) -> Self {
        Self {
            mu,
            lambda,
            omega,
            use_ndc,
            use_ngamma,
        }
    }

    pub fn check(&self) -> Result<()> {
        if [self.mu, self.lambda, self.omega].iter().all(|w| w.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "weights must be finite: {self:?}"
            )))
        }
    }
}

/// WNDCNSM(3/4, 1/4).
impl Default for WeightConfig {
    fn default() -> Self {
        Preset::Wndcnsm {
            lambda: 0.75,
            omega: 0.25,
        }
        .config()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetrization {
    None,
    #[default]
    Average,
    Max,
}

impl FromStr for Symmetrization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "average" | "avg" | "mean" => Ok(Self::Average),
            "max" => Ok(Self::Max),
            other => Err(Error::InvalidArgument(format!(
                "unknown symmetrization {other:?}"
            ))),
        }
    }
}

impl FromStr for NormalizerScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "column" => Ok(Self::Column),
            "global" => Ok(Self::Global),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalizer scope {other:?}"
            ))),
        }
    }
}

/// Whether normalizers come from each column's maximum or the global one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizerScope {
    #[default]
    Column,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AssemblyOptions {
    #[serde(default)]
    pub symmetrization: Symmetrization,
    #[serde(default)]
    pub normalizer: NormalizerScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub ids: Vec<String>,
    pub config: WeightConfig,
    #[serde(default)]
    pub symmetrization: Symmetrization,
    #[serde(default)]
    pub normalizer: NormalizerScope,
    pub values: SquareMatrix,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.ids.len()
    }
}

/// Weighted sum of the components, symmetrized and with a zero diagonal.
/// Never evaluates a metric kernel.
pub fn assemble_sm(
    components: &ComponentMatrices,
    config: &WeightConfig,
    options: AssemblyOptions,
) -> Result<SimilarityMatrix> {
    config.check()?;
    let n = components.n();
    let normalizers = |m: &SquareMatrix, on: bool| -> Result<Vec<f64>> {
        match (on, options.normalizer) {
            (false, _) => Ok(vec![1.0; n]),
            (true, NormalizerScope::Column) => column_normalizers(m),
            (true, NormalizerScope::Global) => global_normalizers(m),
        }
    };
    let ndc = normalizers(&components.dc, config.use_ndc)?;
    let ngamma = normalizers(&components.gamma, config.use_ngamma)?;

    let raw = SquareMatrix::from_fn(n, |i, j| {
        config.mu * components.pa.get(i, j)
            + config.lambda * ndc[j] * components.dc.get(i, j)
            + config.omega * ngamma[j] * components.gamma.get(i, j)
    });
    let values = SquareMatrix::from_fn(n, |i, j| {
        if i == j {
            return 0.0;
        }
        let (a, b) = (raw.get(i, j), raw.get(j, i));
        match options.symmetrization {
            Symmetrization::None => a,
            Symmetrization::Average => 0.5 * (a + b),
            Symmetrization::Max => a.max(b),
        }
    });
    Ok(SimilarityMatrix {
        ids: components.ids.clone(),
        config: *config,
        symmetrization: options.symmetrization,
        normalizer: options.normalizer,
        values,
    })
}

/// Named weight configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// Procrustes only.
    Psm,
    /// Direct composition only.
    Dcm,
    /// Scale component only.
    Scm,
    Wpsm { mu: f64, omega: f64 },
    Wndcsm { lambda: f64, omega: f64 },
    Wndcnsm { lambda: f64, omega: f64 },
}

impl Preset {
    pub fn config(self) -> WeightConfig {
        match self {
            Preset::Psm => WeightConfig::new(1.0, 0.0, 0.0, false, false),
            Preset::Dcm => WeightConfig::new(0.0, 1.0, 0.0, false, false),
            Preset::Scm => WeightConfig::new(0.0, 0.0, 1.0, false, false),
            Preset::Wpsm { mu, omega } => WeightConfig::new(mu, 0.0, omega, false, false),
            Preset::Wndcsm { lambda, omega } => WeightConfig::new(0.0, lambda, omega, true, false),
            Preset::Wndcnsm { lambda, omega } => WeightConfig::new(0.0, lambda, omega, true, true),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Psm => f.write_str("PSM"),
            Preset::Dcm => f.write_str("DCM"),
            Preset::Scm => f.write_str("SCM"),
            Preset::Wpsm { mu, omega } => write!(f, "WPSM({mu},{omega})"),
            Preset::Wndcsm { lambda, omega } => write!(f, "WNDCSM({lambda},{omega})"),
            Preset::Wndcnsm { lambda, omega } => write!(f, "WNDCNSM({lambda},{omega})"),
        }
    }
}

fn parse_weight(s: &str) -> Option<f64> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => num.trim().parse::<f64>().ok()? / den.trim().parse::<f64>().ok()?,
        None => s.parse().ok()?,
    };
    value.is_finite().then_some(value)
}

impl FromStr for Preset {
    type Err = Error;

    /// Accepts `PSM`, `DCM`, `SCM`, or a weighted name with two arguments such
    /// as `WNDCNSM(3/4,1/4)`. Names are case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownPreset(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (name, args) = match compact.split_once('(') {
            Some((name, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(unknown)?;
                let args = inner
                    .split(',')
                    .map(parse_weight)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(unknown)?;
                (name.to_ascii_uppercase(), Some(args))
            }
            None => (compact.to_ascii_uppercase(), None),
        };
        let pair = |args: &Option<Vec<f64>>| match args.as_deref() {
            Some(&[a, b]) => Ok((a, b)),
            _ => Err(unknown()),
        };
        match name.as_str() {
            "PSM" if args.is_none() => Ok(Preset::Psm),
            "DCM" if args.is_none() => Ok(Preset::Dcm),
            "SCM" if args.is_none() => Ok(Preset::Scm),
            "WPSM" => pair(&args).map(|(mu, omega)| Preset::Wpsm { mu, omega }),
            "WNDCSM" => pair(&args).map(|(lambda, omega)| Preset::Wndcsm { lambda, omega }),
            "WNDCNSM" => pair(&args).map(|(lambda, omega)| Preset::Wndcnsm { lambda, omega }),
            _ => Err(unknown()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::Contour;
    use crate::metrics::kernel_calls_on_this_thread;
    use proptest::prelude::*;

    fn m(rows: &[[f64; 3]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn components(pa: SquareMatrix, dc: SquareMatrix, gamma: SquareMatrix) -> ComponentMatrices {
        ComponentMatrices {
            ids: vec!["1".into(), "2".into(), "3".into()],
            pa,
            dc,
            gamma,
        }
    }

    fn blob(id: &str, scale: f64) -> Contour {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = i as f64 / 39.0 * std::f64::consts::PI;
                (scale * (1.0 + 0.3 * (3.0 * t).sin()) * t.cos(), scale * t.sin())
            })
            .collect();
        Contour::from_xy(id, &pts).unwrap()
    }

    #[test]
    fn identical_contours_give_zero_components() {
        let set = ContourSet::new("t", vec![blob("a", 1.0), blob("b", 1.0)]).unwrap();
        let c = pairwise_components(&set, &MetricOptions::default()).unwrap();
        for mat in [&c.pa, &c.dc, &c.gamma] {
            assert!(mat.data.iter().all(|v| v.abs() < 1e-9), "{mat:?}");
        }
    }

    #[test]
    fn doubled_contour_has_half_scale_component() {
        let set = ContourSet::new("t", vec![blob("a", 1.0), blob("b", 2.0)]).unwrap();
        let c = pairwise_components(&set, &MetricOptions::default()).unwrap();
        assert!((c.gamma.get(0, 1) - 0.5).abs() < 1e-9);
        c.check().unwrap();
    }

    #[test]
    fn components_are_symmetric_with_zero_diagonal() {
        let set = ContourSet::new(
            "t",
            vec![blob("a", 1.0), blob("b", 1.7), blob("c", 0.6)],
        )
        .unwrap();
        let c = pairwise_components(&set, &MetricOptions::default()).unwrap();
        for mat in [&c.pa, &c.dc, &c.gamma] {
            assert!(mat.is_symmetric() && mat.has_zero_diagonal());
        }
        c.check().unwrap();
    }

    #[test]
    fn pair_failures_name_the_pair() {
        let set = ContourSet::new("t", vec![blob("a", 1.0), blob("b", 2.0)]).unwrap();
        let opts = MetricOptions {
            dtw_band: Some(0.5),
            ..MetricOptions::default()
        };
        let err = pairwise_components(&set, &opts).unwrap_err();
        assert!(matches!(err, Error::Pair { ref a, ref b, .. } if a == "a" && b == "b"), "{err}");
    }

    #[test]
    fn column_normalizer_examples() {
        let mat = m(&[[0.0, 2.0, 4.0], [2.0, 0.0, 4.0], [4.0, 4.0, 0.0]]);
        let n = column_normalizers(&mat).unwrap();
        assert_eq!(n, vec![0.25, 0.25, 0.25]);
        let mat = m(&[[0.0, 3.0, 3.0], [3.0, 0.0, 3.0], [3.0, 3.0, 0.0]]);
        assert_eq!(column_normalizers(&mat).unwrap(), vec![1.0 / 3.0; 3]);
        let zero = SquareMatrix::zeros(3);
        assert!(matches!(
            column_normalizers(&zero),
            Err(Error::ZeroColumn { column: 0 })
        ));
    }

    #[test]
    fn pa_only_config_reproduces_pa() {
        let pa = m(&[[0.0, 2.0, 4.0], [2.0, 0.0, 6.0], [4.0, 6.0, 0.0]]);
        let c = components(pa.clone(), SquareMatrix::zeros(3), SquareMatrix::zeros(3));
        let sm = assemble_sm(&c, &Preset::Psm.config(), AssemblyOptions::default()).unwrap();
        assert_eq!(sm.values, pa);
    }

    #[test]
    fn half_pa_half_gamma() {
        let pa = m(&[[0.0, 2.0, 4.0], [2.0, 0.0, 6.0], [4.0, 6.0, 0.0]]);
        let gamma = m(&[[0.0, 0.5, 0.2], [0.5, 0.0, 0.1], [0.2, 0.1, 0.0]]);
        let c = components(pa, SquareMatrix::zeros(3), gamma);
        let cfg = WeightConfig::new(0.5, 0.0, 0.5, false, false);
        let sm = assemble_sm(&c, &cfg, AssemblyOptions::default()).unwrap();
        assert_eq!(sm.values.get(0, 1), 1.25);
        assert_eq!(sm.values.get(0, 2), 2.1);
        assert_eq!(sm.values.get(1, 2), 3.05);
    }

    #[test]
    fn normalized_dc_is_averaged() {
        let dc = m(&[[0.0, 2.0, 4.0], [2.0, 0.0, 6.0], [4.0, 6.0, 0.0]]);
        let c = components(SquareMatrix::zeros(3), dc.clone(), SquareMatrix::zeros(3));
        assert_eq!(column_normalizers(&dc).unwrap(), vec![0.25, 1.0 / 6.0, 1.0 / 6.0]);
        let cfg = WeightConfig::new(0.0, 1.0, 0.0, true, false);
        let raw = assemble_sm(
            &c,
            &cfg,
            AssemblyOptions {
                symmetrization: Symmetrization::None,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((raw.values.get(0, 1) - 2.0 / 6.0).abs() < 1e-15);
        assert!((raw.values.get(1, 0) - 2.0 / 4.0).abs() < 1e-15);
        let avg = assemble_sm(&c, &cfg, AssemblyOptions::default()).unwrap();
        assert!((avg.values.get(0, 1) - 5.0 / 12.0).abs() < 1e-15);
        let max = assemble_sm(
            &c,
            &cfg,
            AssemblyOptions {
                symmetrization: Symmetrization::Max,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((max.values.get(0, 1) - 0.5).abs() < 1e-15);
        let global = assemble_sm(
            &c,
            &cfg,
            AssemblyOptions {
                normalizer: NormalizerScope::Global,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((global.values.get(0, 1) - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn preset_configs() {
        assert_eq!(
            "PSM".parse::<Preset>().unwrap().config(),
            WeightConfig::new(1.0, 0.0, 0.0, false, false)
        );
        assert_eq!(
            "SCM".parse::<Preset>().unwrap().config(),
            WeightConfig::new(0.0, 0.0, 1.0, false, false)
        );
        assert_eq!(
            "WNDCNSM(3/4, 1/4)".parse::<Preset>().unwrap().config(),
            WeightConfig::new(0.0, 0.75, 0.25, true, true)
        );
        assert_eq!(
            "wndcsm(0.5,0.5)".parse::<Preset>().unwrap().config(),
            WeightConfig::new(0.0, 0.5, 0.5, true, false)
        );
        assert_eq!(
            "WPSM(0.75,0.25)".parse::<Preset>().unwrap().config(),
            WeightConfig::new(0.75, 0.0, 0.25, false, false)
        );
        for bad in ["XYZ", "PSM(1,2)", "WPSM(1)", "WPSM(a,b)", "WPSM(1,2"] {
            assert!(matches!(bad.parse::<Preset>(), Err(Error::UnknownPreset(_))), "{bad}");
        }
    }

    #[test]
    fn reweighting_never_calls_kernels() {
        let set = ContourSet::new(
            "t",
            vec![blob("a", 1.0), blob("b", 1.5), blob("c", 0.7)],
        )
        .unwrap();
        let c = pairwise_components(&set, &MetricOptions::default()).unwrap();
        let before = kernel_calls_on_this_thread();
        for preset in ["PSM", "DCM", "SCM", "WNDCNSM(3/4,1/4)", "WNDCSM(1/2,1/2)"] {
            let cfg = preset.parse::<Preset>().unwrap().config();
            assemble_sm(&c, &cfg, AssemblyOptions::default()).unwrap();
        }
        assert_eq!(kernel_calls_on_this_thread(), before);
    }

    #[test]
    fn matrix_json_shape() {
        let c = components(
            SquareMatrix::zeros(3),
            SquareMatrix::zeros(3),
            SquareMatrix::zeros(3),
        );
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(v["pa"][0], serde_json::json!([0.0, 0.0, 0.0]));
        assert_eq!(v["ids"][2], "3");
        assert!(serde_json::from_str::<SquareMatrix>("[[1.0],[2.0,3.0]]").is_err());
    }

    fn arb_components() -> impl Strategy<Value = ComponentMatrices> {
        (2usize..8).prop_flat_map(|n| {
            let k = n * (n - 1) / 2;
            (
                prop::collection::vec(0.0..5.0f64, k),
                prop::collection::vec(0.01..50.0f64, k),
                prop::collection::vec(0.01..1.0f64, k),
            )
                .prop_map(move |(pa, dc, g)| {
                    let fill = |vals: &[f64]| {
                        let mut mat = SquareMatrix::zeros(n);
                        let mut it = vals.iter();
                        for i in 0..n {
                            for j in i + 1..n {
                                let v = *it.next().unwrap();
                                mat.set(i, j, v);
                                mat.set(j, i, v);
                            }
                        }
                        mat
                    };
                    ComponentMatrices {
                        ids: (0..n).map(|i| i.to_string()).collect(),
                        pa: fill(&pa),
                        dc: fill(&dc),
                        gamma: fill(&g),
                    }
                })
        })
    }

    proptest! {
        #[test]
        fn assembled_matrix_is_symmetric_nonnegative(
            c in arb_components(),
            w in (0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64),
            ndc: bool, ng: bool,
        ) {
            let cfg = WeightConfig::new(w.0, w.1, w.2, ndc, ng);
            for sym in [Symmetrization::Average, Symmetrization::Max] {
                let sm = assemble_sm(&c, &cfg, AssemblyOptions { symmetrization: sym, ..Default::default() }).unwrap();
                prop_assert!(sm.values.is_symmetric());
                prop_assert!(sm.values.has_zero_diagonal());
                prop_assert!(sm.values.data.iter().all(|v| *v >= 0.0 && v.is_finite()));
            }
        }

        #[test]
        fn assembly_is_linear_in_weights(
            c in arb_components(),
            w in (0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64),
            ndc: bool, ng: bool,
        ) {
            let opts = AssemblyOptions::default();
            let part = |mu, lambda, omega| {
                assemble_sm(&c, &WeightConfig::new(mu, lambda, omega, ndc, ng), opts).unwrap().values
            };
            let whole = part(w.0, w.1, w.2);
            let (a, b, d) = (part(w.0, 0.0, 0.0), part(0.0, w.1, 0.0), part(0.0, 0.0, w.2));
            let sum = SquareMatrix::from_fn(c.n(), |i, j| a.get(i, j) + b.get(i, j) + d.get(i, j));
            prop_assert!(whole.max_abs_diff(&sum) <= 1e-12);
        }
    }
}
