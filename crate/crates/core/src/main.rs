use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sherd_core::clustering::{agreement, CutSpec, Labeling, Method};
use sherd_core::io::{write_atomic, write_contour_set};
use sherd_core::metrics::ProcrustesMode;
use sherd_core::pipeline::{
    self, dataset_config, run_augment, run_cluster, run_components, run_cut, run_cut_clusters,
    run_preprocess, PipelineConfig, DENDROGRAM_FILE,
};
use sherd_core::service::{Service, ServiceState};
use sherd_core::similarity::{NormalizerScope, Preset, Symmetrization, WeightConfig};
use sherd_core::synthetic::{generate, SyntheticConfig};
use sherd_core::{Error, Result};

/// Shape and size clustering of 2D contours of objects of revolution.
#[derive(Parser)]
#[command(name = "sherd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DirArg {
    /// Dataset directory.
    #[arg(long, short = 'd', env = "SHERD_OUT_DIR", default_value = "sherd-out")]
    dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Smooth and normalize a raw manifest into a dataset directory.
    Preprocess {
        manifest: PathBuf,
        #[command(flatten)]
        out: DirArg,
        #[arg(long, default_value_t = sherd_core::smoothing::DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = sherd_core::smoothing::DEFAULT_ORDER)]
        order: usize,
        /// Positional tolerance relative to the bounding-box diagonal.
        #[arg(long, default_value_t = sherd_core::contour::DEFAULT_EPS_REL)]
        eps_rel: f64,
        /// Mirror y first, for profiles drawn right side up.
        #[arg(long)]
        flip_y: bool,
        #[arg(long)]
        no_smooth: bool,
    },
    /// Compute or reuse the pa / dc / gamma cache.
    Components {
        #[command(flatten)]
        dir: DirArg,
        /// Common point count for Procrustes and direct composition.
        #[arg(long, default_value_t = sherd_core::similarity::DEFAULT_RESAMPLE)]
        resample: usize,
        #[arg(long, default_value = "standardized")]
        procrustes: ProcrustesMode,
        /// Sakoe-Chiba style band half-width for DTW.
        #[arg(long)]
        dtw_band: Option<f64>,
        /// Align against the target's original points rather than its
        /// resampled copy.
        #[arg(long)]
        dc_full_resolution: bool,
        /// Recompute even when the cache matches.
        #[arg(long)]
        force: bool,
    },
    /// Assemble the similarity matrix, build the dendrogram, report CCF.
    Cluster {
        #[command(flatten)]
        dir: DirArg,
        #[command(flatten)]
        weights: WeightArgs,
        #[arg(long, default_value = "average")]
        linkage: Method,
        #[arg(long, default_value = "average")]
        symmetrization: Symmetrization,
        #[arg(long, default_value = "column")]
        normalizer: NormalizerScope,
    },
    /// Cut the stored dendrogram and write labels.csv.
    Cut {
        #[command(flatten)]
        dir: DirArg,
        /// Single-level cut height.
        #[arg(long, conflicts_with_all = ["nodes", "clusters"])]
        height: Option<f64>,
        /// Multi-level cut: comma-separated subtree root ids.
        #[arg(long, value_delimiter = ',', conflicts_with = "clusters")]
        nodes: Option<Vec<usize>>,
        /// Cut into exactly this many clusters.
        #[arg(long)]
        clusters: Option<usize>,
    },
    /// Score a labeling against reference labels.
    Agreement {
        labels: PathBuf,
        reference: PathBuf,
        /// Print JSON instead of the short summary.
        #[arg(long)]
        json: bool,
    },
    /// Add six warped variants of every contour.
    Augment {
        manifest: PathBuf,
        #[command(flatten)]
        out: DirArg,
        #[arg(long)]
        magnitude: Option<f64>,
    },
    /// Serve the dataset over HTTP on localhost.
    Serve {
        #[command(flatten)]
        dir: DirArg,
        #[arg(long, default_value_t = 8731)]
        port: u16,
    },
    /// Write the synthetic benchmark dataset and its reference labels.
    Synth {
        #[command(flatten)]
        out: DirArg,
        #[arg(long, default_value_t = SyntheticConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = SyntheticConfig::default().instances)]
        instances: usize,
    },
}

#[derive(Args)]
struct WeightArgs {
    /// PSM, DCM, SCM, WPSM(a,b), WNDCSM(a,b) or WNDCNSM(a,b).
    #[arg(long, conflicts_with_all = ["mu", "lambda", "omega", "ndc", "ngamma"])]
    preset: Option<Preset>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    /// Normalize dc by column maxima.
    #[arg(long)]
    ndc: bool,
    /// Normalize gamma by column maxima.
    #[arg(long)]
    ngamma: bool,
}

impl WeightArgs {
    fn config(&self) -> WeightConfig {
        if let Some(p) = self.preset {
            return p.config();
        }
        if self.mu.is_none() && self.lambda.is_none() && self.omega.is_none() {
            return WeightConfig::default();
        }
        WeightConfig::new(
            self.mu.unwrap_or(0.0),
            self.lambda.unwrap_or(0.0),
            self.omega.unwrap_or(0.0),
            self.ndc,
            self.ngamma,
        )
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sherd: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess {
            manifest,
            out,
            window,
            order,
            eps_rel,
            flip_y,
            no_smooth,
        } => {
            let mut config = PipelineConfig::default();
            config.preprocess = pipeline::PreprocessConfig {
                window,
                order,
                eps_rel,
                flip_y,
                no_smooth,
            };
            let summary = run_preprocess(&manifest, &out.dir, &config)?;
            for report in summary.reports.iter().filter(|r| !r.is_ok()) {
                for v in &report.violations {
                    eprintln!(
                        "warning: {} violates assumption {} (measured {}, tolerance {})",
                        report.contour_id, v.assumption, v.measured, v.tolerance
                    );
                }
            }
            println!(
                "{} contours -> {}",
                summary.reports.len(),
                summary.manifest.display()
            );
        }
        Command::Components {
            dir,
            resample,
            procrustes,
            dtw_band,
            dc_full_resolution,
            force,
        } => {
            let mut config = dataset_config(&dir.dir)?;
            config.metrics.resample = resample;
            config.metrics.procrustes = procrustes;
            config.metrics.dtw_band = dtw_band;
            config.metrics.dc_full_resolution = dc_full_resolution;
            let outcome = run_components(&dir.dir, &config, force)?;
            println!(
                "{} components for {} contours ({})",
                if outcome.reused { "reused" } else { "computed" },
                outcome.artifact.components.n(),
                outcome.artifact.cache_key
            );
        }
        Command::Cluster {
            dir,
            weights,
            linkage,
            symmetrization,
            normalizer,
        } => {
            let mut config = dataset_config(&dir.dir)?;
            config.weights = weights.config();
            config.linkage = linkage;
            config.assembly.symmetrization = symmetrization;
            config.assembly.normalizer = normalizer;
            let result = run_cluster(&dir.dir, &config)?;
            match result.ccf {
                Some(c) => println!("ccf {c:.4}"),
                None => println!("ccf undefined"),
            }
            println!("dendrogram -> {}", dir.dir.join(DENDROGRAM_FILE).display());
        }
        Command::Cut {
            dir,
            height,
            nodes,
            clusters,
        } => {
            let labels = match (height, nodes, clusters) {
                (Some(h), None, None) => run_cut(&dir.dir, &CutSpec::Single(h))?,
                (None, Some(n), None) => run_cut(&dir.dir, &CutSpec::Multi(n))?,
                (None, None, Some(k)) => run_cut_clusters(&dir.dir, k)?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "give one of --height, --nodes or --clusters".into(),
                    ))
                }
            };
            print!("{}", labels.to_csv());
        }
        Command::Agreement {
            labels,
            reference,
            json,
        } => {
            let score = agreement(&Labeling::read_csv(&labels)?, &Labeling::read_csv(&reference)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&score)?);
            } else {
                println!("{} of {} (rand {:.4})", score.display(), score.total, score.rand_index);
            }
        }
        Command::Augment {
            manifest,
            out,
            magnitude,
        } => {
            let set = run_augment(&manifest, &out.dir, magnitude)?;
            println!("{} contours -> {}", set.len(), out.dir.display());
        }
        Command::Serve { dir, port } => {
            let state = ServiceState::open(&dir.dir)?;
            let service = Service::bind(state, port)?;
            eprintln!("serving {} on http://127.0.0.1:{}", dir.dir.display(), service.port());
            service.run();
        }
        Command::Synth {
            out,
            seed,
            instances,
        } => {
            let data = generate(&SyntheticConfig {
                seed,
                instances,
                ..Default::default()
            })?;
            write_synthetic(&out.dir, &data)?;
            println!("{} contours -> {}", data.set.len(), out.dir.display());
        }
    }
    Ok(())
}

fn write_synthetic(dir: &Path, data: &sherd_core::synthetic::SyntheticDataset) -> Result<()> {
    write_contour_set(dir, &data.set)?;
    write_atomic(&dir.join("typology.csv"), data.typology.to_csv().as_bytes())?;
    write_atomic(&dir.join("sizes.csv"), data.size_groups.to_csv().as_bytes())?;
    Ok(())
}
