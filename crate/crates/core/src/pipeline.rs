//! File-based driver: preprocess, components, cluster, cut, augment.
//!
//! A dataset directory holds
//!
//! ```text
//! manifest.json          normalized contours (contours/<id>.csv)
//! reports.json           validation reports
//! pipeline.json          configuration used by `preprocess`
//! components.json        cached pa / dc / gamma
//! sm.json                assembled similarity matrix
//! dendrogram.json        merges plus cophenetic coefficient
//! labels.csv             latest cut
//! ```
//!
//! Every JSON artifact carries the SHA-256 of the configuration that
//! produced it, and identical inputs give byte-identical files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::augmentation::{augment_set, DEFAULT_MAGNITUDE};
use crate::clustering::{cophenetic_coefficient, cut, cut_clusters, linkage, CutSpec, Dendrogram, Labeling, Method};
use crate::contour::{normalize_position, ContourSet, ValidationReport, DEFAULT_EPS_REL};
use crate::error::{Error, Result};
use crate::io::{load_contour_set, read_json, write_atomic, write_contour_set, write_json};
use crate::similarity::{
    assemble_sm, pairwise_components, AssemblyOptions, ComponentMatrices, MetricOptions,
    SimilarityMatrix, WeightConfig,
};
use crate::smoothing::{smooth_fitted, SavitzkyGolay, DEFAULT_ORDER, DEFAULT_WINDOW};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORTS_FILE: &str = "reports.json";
pub const PIPELINE_FILE: &str = "pipeline.json";
pub const COMPONENTS_FILE: &str = "components.json";
pub const SM_FILE: &str = "sm.json";
pub const DENDROGRAM_FILE: &str = "dendrogram.json";
pub const LABELS_FILE: &str = "labels.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub window: usize,
    pub order: usize,
    /// Positional tolerance relative to each contour's bounding-box diagonal.
    pub eps_rel: f64,
    /// Mirror `y` before normalising, for data drawn right side up.
    pub flip_y: bool,
    /// Skip smoothing entirely.
    #[serde(default)]
    pub no_smooth: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            order: DEFAULT_ORDER,
            eps_rel: DEFAULT_EPS_REL,
            flip_y: false,
            no_smooth: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub metrics: MetricOptions,
    pub weights: WeightConfig,
    #[serde(default)]
    pub assembly: AssemblyOptions,
    #[serde(default)]
    pub linkage: Method,
}

impl PipelineConfig {
    pub fn check(&self) -> Result<()> {
        if !self.preprocess.no_smooth {
            SavitzkyGolay::new(self.preprocess.window, self.preprocess.order)?;
        }
        if !(self.preprocess.eps_rel >= 0.0 && self.preprocess.eps_rel.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "eps_rel must be finite and >= 0, got {}",
                self.preprocess.eps_rel
            )));
        }
        if self.metrics.resample < 2 {
            return Err(Error::InvalidArgument(format!(
                "resample must be >= 2, got {}",
                self.metrics.resample
            )));
        }
        if let Some(w) = self.metrics.dtw_band {
            if !(w >= 1.0) {
                return Err(Error::InvalidArgument(format!("dtw band must be >= 1, got {w}")));
            }
        }
        self.weights.check()?;
        if [self.weights.mu, self.weights.lambda, self.weights.omega]
            .iter()
            .any(|w| *w < 0.0)
        {
            return Err(Error::InvalidArgument("weights must be non-negative".into()));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        sha256_json(self)
    }
}

fn sha256_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex(&Sha256::digest(&bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Flip, smooth, then normalize each contour.
pub fn preprocess_set(
    set: &ContourSet,
    config: &PreprocessConfig,
) -> Result<(ContourSet, Vec<ValidationReport>)> {
    let mut contours = Vec::with_capacity(set.len());
    let mut reports = Vec::with_capacity(set.len());
    for c in &set.contours {
        let c = if config.flip_y { c.flip_y() } else { c.clone() };
        let c = if config.no_smooth {
            c
        } else {
            smooth_fitted(&c, config.window, config.order)?
        };
        let (normalized, report) = normalize_position(&c, c.tolerance(config.eps_rel))?;
        contours.push(normalized);
        reports.push(report);
    }
    Ok((ContourSet::new(set.dataset_id.clone(), contours)?, reports))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRecord {
    pub config_hash: String,
    pub config: PipelineConfig,
}

#[derive(Debug, Clone)]
pub struct PreprocessSummary {
    pub manifest: PathBuf,
    pub reports: Vec<ValidationReport>,
}

impl PreprocessSummary {
    pub fn violation_count(&self) -> usize {
        self.reports.iter().map(|r| r.violations.len()).sum()
    }
}

pub fn run_preprocess(manifest: &Path, out: &Path, config: &PipelineConfig) -> Result<PreprocessSummary> {
    config.check()?;
    let raw = load_contour_set(manifest)?;
    let (set, reports) = preprocess_set(&raw, &config.preprocess)?;
    let manifest = write_contour_set(out, &set)?;
    write_json(&out.join(REPORTS_FILE), &reports)?;
    write_json(
        &out.join(PIPELINE_FILE),
        &PipelineRecord {
            config_hash: config.hash(),
            config: config.clone(),
        },
    )?;
    Ok(PreprocessSummary { manifest, reports })
}

/// Cached component matrices with the keys needed to decide reuse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentsArtifact {
    pub dataset_id: String,
    pub config_hash: String,
    /// Hash of the inputs the kernels depend on: contour data, preprocessing
    /// and metric options.
    pub cache_key: String,
    pub metrics: MetricOptions,
    #[serde(flatten)]
    pub components: ComponentMatrices,
}

fn cache_key(set: &ContourSet, dataset_dir: &Path, metrics: &MetricOptions) -> Result<String> {
    let preprocess: Option<PreprocessConfig> = match read_json::<PipelineRecord>(&dataset_dir.join(PIPELINE_FILE)) {
        Ok(record) => Some(record.config.preprocess),
        Err(Error::MissingFile(_)) => None,
        Err(e) => return Err(e),
    };
    #[derive(Serialize)]
    struct Key<'a> {
        dataset_id: &'a str,
        preprocess: Option<PreprocessConfig>,
        metrics: &'a MetricOptions,
        data: String,
    }
    Ok(sha256_json(&Key {
        dataset_id: &set.dataset_id,
        preprocess,
        metrics,
        data: sha256_json(&set.contours),
    }))
}

#[derive(Debug, Clone)]
pub struct ComponentsOutcome {
    pub artifact: ComponentsArtifact,
    /// True when cached matrices were reused without running the kernels.
    pub reused: bool,
}

/// Computes pairwise components for the dataset in `dataset_dir`, reusing
/// `components.json` when its cache key matches.
pub fn run_components(dataset_dir: &Path, config: &PipelineConfig, force: bool) -> Result<ComponentsOutcome> {
    config.check()?;
    let set = load_contour_set(&dataset_dir.join(MANIFEST_FILE))?;
    let key = cache_key(&set, dataset_dir, &config.metrics)?;
    let path = dataset_dir.join(COMPONENTS_FILE);
    let config_hash = config.hash();

    if !force {
        if let Ok(cached) = read_json::<ComponentsArtifact>(&path) {
            if cached.cache_key == key && cached.components.ids == set.ids() {
                let artifact = ComponentsArtifact {
                    config_hash,
                    ..cached.clone()
                };
                if artifact != cached {
                    write_json(&path, &artifact)?;
                }
                return Ok(ComponentsOutcome {
                    artifact,
                    reused: true,
                });
            }
        }
    }

    let components = pairwise_components(&set, &config.metrics)?;
    let artifact = ComponentsArtifact {
        dataset_id: set.dataset_id.clone(),
        config_hash,
        cache_key: key,
        metrics: config.metrics.clone(),
        components,
    };
    write_json(&path, &artifact)?;
    Ok(ComponentsOutcome {
        artifact,
        reused: false,
    })
}

/// Reads the component cache; a missing file yields [`Error::MissingCache`].
pub fn load_components(dataset_dir: &Path) -> Result<ComponentsArtifact> {
    let path = dataset_dir.join(COMPONENTS_FILE);
    let artifact: ComponentsArtifact = read_json(&path).map_err(|e| match e {
        Error::MissingFile(_) => Error::MissingCache(path.clone()),
        other => other,
    })?;
    artifact.components.check()?;
    Ok(artifact)
}

/// Configuration recorded in a dataset directory: `pipeline.json` if
/// present, with the metric options of the component cache laid over it.
pub fn dataset_config(dataset_dir: &Path) -> Result<PipelineConfig> {
    let mut config = match read_json::<PipelineRecord>(&dataset_dir.join(PIPELINE_FILE)) {
        Ok(record) => record.config,
        Err(Error::MissingFile(_)) => PipelineConfig::default(),
        Err(e) => return Err(e),
    };
    match read_json::<ComponentsArtifact>(&dataset_dir.join(COMPONENTS_FILE)) {
        Ok(cached) => config.metrics = cached.metrics,
        Err(Error::MissingFile(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmArtifact {
    pub config_hash: String,
    #[serde(flatten)]
    pub sm: SimilarityMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendrogramArtifact {
    pub config_hash: String,
    pub method: Method,
    /// Cophenetic correlation; absent when undefined (n < 3 or constant
    /// input).
    pub ccf: Option<f64>,
    #[serde(flatten)]
    pub dendrogram: Dendrogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub sm: SimilarityMatrix,
    pub method: Method,
    pub dendrogram: Dendrogram,
    pub ccf: Option<f64>,
}

/// Assembly, linkage and cophenetic coefficient on cached components.
pub fn cluster_components(
    components: &ComponentMatrices,
    weights: &WeightConfig,
    assembly: AssemblyOptions,
    method: Method,
) -> Result<ClusterResult> {
    let sm = assemble_sm(components, weights, assembly)?;
    let dendrogram = linkage(&sm, method)?;
    let ccf = match cophenetic_coefficient(&sm, &dendrogram) {
        Ok(c) => Some(c),
        Err(Error::DegenerateCorrelation(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ClusterResult {
        sm,
        method,
        dendrogram,
        ccf,
    })
}

pub fn run_cluster(dataset_dir: &Path, config: &PipelineConfig) -> Result<ClusterResult> {
    config.check()?;
    let cached = load_components(dataset_dir)?;
    let result = cluster_components(&cached.components, &config.weights, config.assembly, config.linkage)?;
    let config_hash = config.hash();
    write_json(
        &dataset_dir.join(SM_FILE),
        &SmArtifact {
            config_hash: config_hash.clone(),
            sm: result.sm.clone(),
        },
    )?;
    write_json(
        &dataset_dir.join(DENDROGRAM_FILE),
        &DendrogramArtifact {
            config_hash,
            method: result.method,
            ccf: result.ccf,
            dendrogram: result.dendrogram.clone(),
        },
    )?;
    Ok(result)
}

/// Cuts the stored dendrogram and writes `labels.csv`.
pub fn run_cut(dataset_dir: &Path, spec: &CutSpec) -> Result<Labeling> {
    let path = dataset_dir.join(DENDROGRAM_FILE);
    let artifact: DendrogramArtifact = read_json(&path)?;
    artifact.dendrogram.check()?;
    let labels = cut(&artifact.dendrogram, spec)?;
    write_atomic(&dataset_dir.join(LABELS_FILE), labels.to_csv().as_bytes())?;
    Ok(labels)
}

/// Cuts the stored dendrogram into exactly `k` clusters.
pub fn run_cut_clusters(dataset_dir: &Path, k: usize) -> Result<Labeling> {
    let artifact: DendrogramArtifact = read_json(&dataset_dir.join(DENDROGRAM_FILE))?;
    artifact.dendrogram.check()?;
    let labels = cut_clusters(&artifact.dendrogram, k)?;
    write_atomic(&dataset_dir.join(LABELS_FILE), labels.to_csv().as_bytes())?;
    Ok(labels)
}

/// Writes the original contours plus six warps of each to `out`.
pub fn run_augment(manifest: &Path, out: &Path, magnitude: Option<f64>) -> Result<ContourSet> {
    let set = load_contour_set(manifest)?;
    let augmented = augment_set(&set, magnitude.unwrap_or(DEFAULT_MAGNITUDE))?;
    write_contour_set(out, &augmented)?;
    Ok(augmented)
}
