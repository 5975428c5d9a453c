//! Local HTTP service over a preprocessed dataset with cached components.
//!
//! | route                  | body                                    | reply              |
//! |------------------------|-----------------------------------------|--------------------|
//! | `GET /contours`        |                                         | contour list       |
//! | `GET /components`      |                                         | cached components  |
//! | `POST /similarity`     | [`WeightRequest`]                       | similarity matrix  |
//! | `POST /cluster`        | [`WeightRequest`] + `linkage`           | [`ClusterReply`]   |
//! | `POST /cut`            | [`CutSpec`]                             | [`Labeling`]       |
//! | `POST /agreement`      | [`AgreementRequest`]                    | [`Agreement`]      |
//! | `GET /export/labels.csv` |                                       | `id,label` CSV     |
//! | `GET /stats`           |                                         | [`Stats`]          |
//!
//! Requests run one at a time on the serving thread. Weighting, linkage and
//! cuts work on the cached matrices only; no metric kernel runs after
//! startup, which `/stats` makes observable.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clustering::{agreement, cut, Agreement, CutSpec, Dendrogram, Labeling, Method};
use crate::contour::ContourSet;
use crate::error::{Error, Result};
use crate::io::load_contour_set;
use crate::metrics::kernel_calls_on_this_thread;
use crate::pipeline::{cluster_components, load_components, ComponentsArtifact, MANIFEST_FILE};
use crate::similarity::{assemble_sm, NormalizerScope, Preset, Symmetrization, WeightConfig, AssemblyOptions};

/// Either a preset name such as `"WNDCNSM(3/4,1/4)"` or explicit weights.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WeightRequest {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub weights: Option<WeightConfig>,
    #[serde(default)]
    pub symmetrization: Option<Symmetrization>,
    #[serde(default)]
    pub normalizer: Option<NormalizerScope>,
    #[serde(default)]
    pub linkage: Option<Method>,
}

impl WeightRequest {
    fn resolve(&self) -> Result<(WeightConfig, AssemblyOptions)> {
        let config = match (&self.preset, &self.weights) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument(
                    "give either `preset` or `weights`, not both".into(),
                ))
            }
            (Some(name), None) => name.parse::<Preset>()?.config(),
            (None, Some(w)) => *w,
            (None, None) => WeightConfig::default(),
        };
        config.check()?;
        if [config.mu, config.lambda, config.omega].iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be non-negative".into()));
        }
        Ok((
            config,
            AssemblyOptions {
                symmetrization: self.symmetrization.unwrap_or_default(),
                normalizer: self.normalizer.unwrap_or_default(),
            },
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReply {
    pub config: WeightConfig,
    pub method: Method,
    pub ccf: Option<f64>,
    pub dendrogram: Dendrogram,
}

/// Reference labels as a [`Labeling`] or as `id,label` CSV text. `labels`
/// defaults to the latest cut.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgreementRequest {
    #[serde(default)]
    pub labels: Option<LabelSource>,
    pub reference: LabelSource,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelSource {
    Csv(String),
    Labeling(Labeling),
}

impl LabelSource {
    fn into_labeling(self) -> Result<Labeling> {
        match self {
            LabelSource::Csv(text) => Labeling::from_csv(&text),
            LabelSource::Labeling(l) => Ok(l),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    /// Metric kernel evaluations on the serving thread since startup.
    pub kernel_calls: u64,
    pub requests: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub content_type: &'static str,
    pub body: String,
}

impl Response {
    fn json<T: Serialize>(value: &T) -> Self {
        match serde_json::to_string(value) {
            Ok(body) => Self {
                status: 200,
                content_type: "application/json",
                body,
            },
            Err(e) => Self::error(500, &e.to_string()),
        }
    }

    fn error(status: u16, message: &str) -> Self {
        Self {
            status,
            content_type: "application/json",
            body: serde_json::json!({ "error": message }).to_string(),
        }
    }

    fn from_error(e: &Error) -> Self {
        let status = match e {
            Error::MissingCache(_) | Error::MissingFile(_) | Error::Io { .. } => 500,
            _ => 422,
        };
        Self::error(status, &e.to_string())
    }
}

/// Dataset state held by the serving thread.
pub struct ServiceState {
    dataset_dir: PathBuf,
    contours: ContourSet,
    components: ComponentsArtifact,
    dendrogram: Option<Dendrogram>,
    labels: Option<Labeling>,
    kernel_baseline: u64,
    requests: u64,
}

impl ServiceState {
    /// Loads contours and the component cache; fails with
    /// [`Error::MissingCache`] when `components` has not run.
    pub fn open(dataset_dir: &Path) -> Result<Self> {
        let contours = load_contour_set(&dataset_dir.join(MANIFEST_FILE))?;
        let components = load_components(dataset_dir)?;
        if components.components.ids != contours.ids() {
            return Err(Error::IdMismatch(
                "component cache does not match the manifest; rerun `sherd components`".into(),
            ));
        }
        Ok(Self {
            dataset_dir: dataset_dir.to_path_buf(),
            contours,
            components,
            dendrogram: None,
            labels: None,
            kernel_baseline: kernel_calls_on_this_thread(),
            requests: 0,
        })
    }

    pub fn dataset_dir(&self) -> &Path {
        &self.dataset_dir
    }

    pub fn stats(&self) -> Stats {
        Stats {
            kernel_calls: kernel_calls_on_this_thread().saturating_sub(self.kernel_baseline),
            requests: self.requests,
        }
    }

    pub fn handle(&mut self, method: &str, path: &str, body: &str) -> Response {
        self.requests += 1;
        let path = path.split('?').next().unwrap_or(path);
        match (method, path) {
            ("GET", "/contours") => Response::json(&self.contours.contours),
            ("GET", "/components") => Response::json(&self.components),
            ("POST", "/similarity") => self.similarity(body),
            ("POST", "/cluster") => self.cluster(body),
            ("POST", "/cut") => self.cut(body),
            ("POST", "/agreement") => self.agreement(body),
            ("GET", "/export/labels.csv") => match &self.labels {
                Some(l) => Response {
                    status: 200,
                    content_type: "text/csv",
                    body: l.to_csv(),
                },
                None => Response::error(409, "no labels yet; POST /cut first"),
            },
            ("GET", "/stats") => Response::json(&self.stats()),
            (
                _,
                "/contours" | "/components" | "/similarity" | "/cluster" | "/cut" | "/agreement"
                | "/export/labels.csv" | "/stats",
            ) => Response::error(405, &format!("{method} not allowed on {path}")),
            _ => Response::error(404, &format!("no route {path}")),
        }
    }

    fn similarity(&mut self, body: &str) -> Response {
        let req: WeightRequest = match parse_body(body) {
            Ok(r) => r,
            Err(r) => return r,
        };
        let result = req
            .resolve()
            .and_then(|(config, opts)| assemble_sm(&self.components.components, &config, opts));
        match result {
            Ok(sm) => Response::json(&sm),
            Err(e) => Response::from_error(&e),
        }
    }

    fn cluster(&mut self, body: &str) -> Response {
        let req: WeightRequest = match parse_body(body) {
            Ok(r) => r,
            Err(r) => return r,
        };
        let method = req.linkage.unwrap_or_default();
        let result = req.resolve().and_then(|(config, opts)| {
            cluster_components(&self.components.components, &config, opts, method).map(|r| (config, r))
        });
        match result {
            Ok((config, r)) => {
                self.dendrogram = Some(r.dendrogram.clone());
                self.labels = None;
                Response::json(&ClusterReply {
                    config,
                    method,
                    ccf: r.ccf,
                    dendrogram: r.dendrogram,
                })
            }
            Err(e) => Response::from_error(&e),
        }
    }

    fn cut(&mut self, body: &str) -> Response {
        let spec: CutSpec = match parse_body(body) {
            Ok(s) => s,
            Err(r) => return r,
        };
        let Some(dendrogram) = &self.dendrogram else {
            return Response::error(409, "no dendrogram yet; POST /cluster first");
        };
        match cut(dendrogram, &spec) {
            Ok(labels) => {
                self.labels = Some(labels.clone());
                Response::json(&labels)
            }
            Err(e) => Response::from_error(&e),
        }
    }

    fn agreement(&mut self, body: &str) -> Response {
        let req: AgreementRequest = match parse_body(body) {
            Ok(r) => r,
            Err(r) => return r,
        };
        let labels = match req.labels {
            Some(src) => src.into_labeling(),
            None => match &self.labels {
                Some(l) => Ok(l.clone()),
                None => return Response::error(409, "no labels given and no cut yet"),
            },
        };
        let result = labels.and_then(|l| agreement(&l, &req.reference.into_labeling()?));
        match result {
            Ok(a) => Response::json::<Agreement>(&a),
            Err(e) => Response::from_error(&e),
        }
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &str) -> std::result::Result<T, Response> {
    let body = if body.trim().is_empty() { "{}" } else { body };
    serde_json::from_str(body).map_err(|e| Response::error(400, &format!("bad request body: {e}")))
}

/// A bound listener on the loopback interface.
pub struct Service {
    server: Arc<tiny_http::Server>,
    state: ServiceState,
}

/// Stops a running [`Service`] from another thread.
#[derive(Clone)]
pub struct ShutdownHandle(Arc<tiny_http::Server>);

impl ShutdownHandle {
    pub fn shutdown(&self) {
        self.0.unblock();
    }
}

impl Service {
    /// Binds `127.0.0.1:port`; port 0 picks a free port.
    pub fn bind(state: ServiceState, port: u16) -> Result<Self> {
        let addr = format!("127.0.0.1:{port}");
        let server = tiny_http::Server::http(&addr).map_err(|e| Error::Bind {
            addr,
            message: e.to_string(),
        })?;
        Ok(Self {
            server: Arc::new(server),
            state,
        })
    }

    pub fn port(&self) -> u16 {
        self.server
            .server_addr()
            .to_ip()
            .map(|a| a.port())
            .unwrap_or_default()
    }

    pub fn shutdown_handle(&self) -> ShutdownHandle {
        ShutdownHandle(Arc::clone(&self.server))
    }

    /// Serves requests sequentially until shut down.
    pub fn run(mut self) -> ServiceState {
        self.state.kernel_baseline = kernel_calls_on_this_thread();
        for mut request in self.server.incoming_requests() {
            let mut body = String::new();
            let response = match request.as_reader().read_to_string(&mut body) {
                Ok(_) => self
                    .state
                    .handle(request.method().as_str(), request.url(), &body),
                Err(e) => Response::error(400, &format!("unreadable body: {e}")),
            };
            let header = tiny_http::Header::from_bytes("Content-Type", response.content_type)
                .expect("static header");
            let reply = tiny_http::Response::from_string(response.body)
                .with_status_code(response.status)
                .with_header(header);
            // A client that hung up is not a service failure.
            let _ = request.respond(reply);
        }
        self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_contour_set;
    use crate::pipeline::{run_components, PipelineConfig};
    use crate::similarity::SimilarityMatrix;
    use crate::synthetic::{generate, SyntheticConfig};

    fn dataset() -> (tempfile::TempDir, ServiceState) {
        let tmp = tempfile::tempdir().unwrap();
        let data = generate(&SyntheticConfig {
            instances: 2,
            ..Default::default()
        })
        .unwrap();
        write_contour_set(tmp.path(), &data.set).unwrap();
        let mut config = PipelineConfig::default();
        config.metrics.resample = 40;
        run_components(tmp.path(), &config, false).unwrap();
        let state = ServiceState::open(tmp.path()).unwrap();
        (tmp, state)
    }

    #[test]
    fn psm_similarity_equals_cached_pa() {
        let (_tmp, mut s) = dataset();
        let r = s.handle("POST", "/similarity", r#"{"preset": "PSM"}"#);
        assert_eq!(r.status, 200);
        let sm: SimilarityMatrix = serde_json::from_str(&r.body).unwrap();
        assert_eq!(sm.values, s.components.components.pa);
    }

    #[test]
    fn cluster_is_deterministic_and_kernel_free() {
        let (_tmp, mut s) = dataset();
        let body = r#"{"preset": "WNDCNSM(3/4,1/4)", "linkage": "average"}"#;
        let a = s.handle("POST", "/cluster", body);
        let b = s.handle("POST", "/cluster", body);
        assert_eq!(a.status, 200);
        assert_eq!(a, b);
        let reply: ClusterReply = serde_json::from_str(&a.body).unwrap();
        assert!(reply.ccf.is_some());
        assert_eq!(s.stats().kernel_calls, 0);
    }

    #[test]
    fn cut_flow_and_errors() {
        let (_tmp, mut s) = dataset();
        assert_eq!(s.handle("POST", "/cut", r#"{"single": 1.0}"#).status, 409);
        assert_eq!(s.handle("GET", "/export/labels.csv", "").status, 409);
        let reply: ClusterReply =
            serde_json::from_str(&s.handle("POST", "/cluster", "{}").body).unwrap();
        let root = reply.dendrogram.root();
        let children = reply.dendrogram.children(root).unwrap();

        let overlap = format!(r#"{{"multi": [{root}, {}]}}"#, children.0);
        let bad = s.handle("POST", "/cut", &overlap);
        assert_eq!(bad.status, 422);
        assert!(bad.body.contains("overlap"));

        let ok = s.handle("POST", "/cut", &format!(r#"{{"multi": [{}, {}]}}"#, children.0, children.1));
        assert_eq!(ok.status, 200);
        let labels: Labeling = serde_json::from_str(&ok.body).unwrap();
        assert_eq!(labels.cluster_count(), 2);
        let csv = s.handle("GET", "/export/labels.csv", "");
        assert_eq!((csv.status, csv.content_type), (200, "text/csv"));
        assert_eq!(csv.body, labels.to_csv());

        let agree = s.handle(
            "POST",
            "/agreement",
            &serde_json::json!({ "reference": labels.to_csv() }).to_string(),
        );
        let a: Agreement = serde_json::from_str(&agree.body).unwrap();
        assert_eq!(a.percent, 100.0);
    }

    #[test]
    fn bad_requests() {
        let (_tmp, mut s) = dataset();
        assert_eq!(s.handle("POST", "/similarity", "{nope").status, 400);
        assert_eq!(s.handle("POST", "/similarity", r#"{"preset": "XYZ"}"#).status, 422);
        assert_eq!(s.handle("GET", "/similarity", "").status, 405);
        assert_eq!(s.handle("GET", "/nowhere", "").status, 404);
        let neg = r#"{"weights": {"mu": -1, "lambda": 0, "omega": 0, "use_ndc": false, "use_ngamma": false}}"#;
        assert_eq!(s.handle("POST", "/similarity", neg).status, 422);
    }

    #[test]
    fn missing_cache_refuses_to_open() {
        let tmp = tempfile::tempdir().unwrap();
        let data = generate(&SyntheticConfig {
            instances: 1,
            ..Default::default()
        })
        .unwrap();
        write_contour_set(tmp.path(), &data.set).unwrap();
        let err = ServiceState::open(tmp.path()).err().unwrap();
        assert!(matches!(err, Error::MissingCache(_)));
    }
}
