//! C ABI over `sherd-core`.
//!
//! Conventions:
//!
//! * Every fallible function returns a [`SherdStatus`]; on failure the
//!   message is available from [`sherd_last_error`] on the same thread.
//! * Point sequences are interleaved `x0, y0, x1, y1, ...` doubles with a
//!   point count alongside.
//! * Matrices are copied out row-major into caller buffers of `n * n`.
//! * Handles are opaque, created by `*_load`, `*_compute` or similar, and
//!   released with the matching `*_free`. Passing null to a `*_free` is a
//!   no-op.
//! * Panics never cross the boundary; they surface as `SHERD_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sherd_core::clustering::{self, cophenetic_coefficient, cut, CutSpec, Dendrogram};
use sherd_core::contour::{ContourSet, Point};
use sherd_core::metrics::{dtw_banded, procrustes, ProcrustesMode};
use sherd_core::similarity::{
    assemble_sm, pairwise_components, AssemblyOptions, ComponentMatrices, MetricOptions, Preset,
    SimilarityMatrix, SquareMatrix, WeightConfig,
};
use sherd_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SherdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInput = 3,
    Io = 4,
    Parse = 5,
    Numeric = 6,
    InvalidCut = 7,
    MissingCache = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SherdMethod {
    Single = 0,
    Average = 1,
    Weighted = 2,
}

impl From<SherdMethod> for clustering::Method {
    fn from(m: SherdMethod) -> Self {
        match m {
            SherdMethod::Single => clustering::Method::Single,
            SherdMethod::Average => clustering::Method::Average,
            SherdMethod::Weighted => clustering::Method::Weighted,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SherdComponent {
    Pa = 0,
    Dc = 1,
    Gamma = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SherdProcrustesMode {
    Standardized = 0,
    Raw = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SherdWeights {
    pub mu: f64,
    pub lambda: f64,
    pub omega: f64,
    pub use_ndc: bool,
    pub use_ngamma: bool,
}

impl From<WeightConfig> for SherdWeights {
    fn from(w: WeightConfig) -> Self {
        Self {
            mu: w.mu,
            lambda: w.lambda,
            omega: w.omega,
            use_ndc: w.use_ndc,
            use_ngamma: w.use_ngamma,
        }
    }
}

impl From<SherdWeights> for WeightConfig {
    fn from(w: SherdWeights) -> Self {
        WeightConfig::new(w.mu, w.lambda, w.omega, w.use_ndc, w.use_ngamma)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SherdProcrustesResult {
    pub d: f64,
    pub gamma_star: f64,
    pub theta_star: f64,
    pub tx: f64,
    pub ty: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SherdMerge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

/// Opaque contour set.
pub struct SherdContourSet {
    set: ContourSet,
    ids: Vec<CString>,
}

/// Opaque pa / dc / gamma matrices.
pub struct SherdComponents {
    components: ComponentMatrices,
    ids: Vec<CString>,
}

/// Opaque assembled similarity matrix.
pub struct SherdSimilarity(SimilarityMatrix);

/// Opaque dendrogram.
pub struct SherdDendrogram(Dendrogram);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SherdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::MissingFile(_) | Error::Io { .. } | Error::Bind { .. } => SherdStatus::Io,
            Error::Parse { .. } | Error::Json(_) => SherdStatus::Parse,
            Error::DegenerateContour { .. } | Error::DuplicateId(_) | Error::TooFewContours(_) => {
                SherdStatus::InvalidInput
            }
            Error::Smoothing(_)
            | Error::InvalidArgument(_)
            | Error::LengthMismatch(..)
            | Error::EmptySequence
            | Error::UnknownPreset(_)
            | Error::InvalidMatrix(_)
            | Error::IdMismatch(_)
            | Error::MagnitudeTooLarge { .. } => SherdStatus::InvalidArgument,
            Error::ZeroNorm(_)
            | Error::ZeroColumn { .. }
            | Error::DegenerateCorrelation(_)
            | Error::Pair { .. } => SherdStatus::Numeric,
            Error::InvalidCut(_) => SherdStatus::InvalidCut,
            Error::MissingCache(_) => SherdStatus::MissingCache,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

fn null(what: &str) -> Failure {
    Failure(SherdStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(SherdStatus::InvalidArgument, message.into())
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> FfiResult) -> SherdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SherdStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {message}"));
            SherdStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &str) -> FfiResult<&'a mut [T]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn reference<'a, T>(ptr: *const T, what: &str) -> FfiResult<&'a T> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(ptr: *mut T, what: &str) -> FfiResult<&'a mut T> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(ptr: *const c_char, what: &str) -> FfiResult<&'a str> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn points(xy: *const f64, count: usize, what: &str) -> FfiResult<Vec<Point>> {
    let raw = slice(xy, count.checked_mul(2).ok_or_else(|| invalid("count overflows"))?, what)?;
    Ok(raw.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect())
}

fn c_ids(ids: &[String]) -> FfiResult<Vec<CString>> {
    ids.iter()
        .map(|s| CString::new(s.as_str()).map_err(|_| invalid("id contains NUL")))
        .collect()
}

fn copy_matrix(m: &SquareMatrix, out: &mut [f64]) -> FfiResult {
    let n = m.n();
    if out.len() != n * n {
        return Err(invalid(format!("buffer holds {} values, need {}", out.len(), n * n)));
    }
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m.get(i, j);
        }
    }
    Ok(())
}

fn band(value: f64) -> Option<f64> {
    (value > 0.0).then_some(value)
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sherd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// DTW cost between two point sequences. `band <= 0` searches the full
/// cost matrix.
///
/// # Safety
/// `x` and `y` must point to `2 * n` and `2 * m` doubles.
#[no_mangle]
pub unsafe extern "C" fn sherd_dtw(
    x: *const f64,
    n: usize,
    y: *const f64,
    m: usize,
    band_width: f64,
    out_cost: *mut f64,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out_cost, "out_cost")?;
        let r = dtw_banded(&points(x, n, "x")?, &points(y, m, "y")?, band(band_width))?;
        *out = r.cost;
        Ok(())
    })
}

/// Procrustes superimposition of `moving` onto `target`, both `k` points.
/// `out_z`, if not null, receives the `2 * k` aligned coordinates.
///
/// # Safety
/// `target` and `moving` must point to `2 * k` doubles; `out_z` is null or
/// points to `2 * k` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sherd_procrustes(
    target: *const f64,
    moving: *const f64,
    k: usize,
    mode: SherdProcrustesMode,
    out: *mut SherdProcrustesResult,
    out_z: *mut f64,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let mode = match mode {
            SherdProcrustesMode::Standardized => ProcrustesMode::Standardized,
            SherdProcrustesMode::Raw => ProcrustesMode::Raw,
        };
        let r = procrustes(&points(target, k, "target")?, &points(moving, k, "moving")?, mode)?;
        if !out_z.is_null() {
            let z = slice_mut(out_z, 2 * k, "out_z")?;
            for (dst, p) in z.chunks_exact_mut(2).zip(&r.z) {
                dst[0] = p.x;
                dst[1] = p.y;
            }
        }
        *out = SherdProcrustesResult {
            d: r.d,
            gamma_star: r.gamma_star,
            theta_star: r.theta_star,
            tx: r.t_star.x,
            ty: r.t_star.y,
        };
        Ok(())
    })
}

/// Loads the contours named by a manifest file.
///
/// # Safety
/// `manifest_path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sherd_contour_set_load(
    manifest_path: *const c_char,
    out: *mut *mut SherdContourSet,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let set = sherd_core::io::load_contour_set(Path::new(string(manifest_path, "manifest_path")?))?;
        let ids = c_ids(&set.ids())?;
        *out = Box::into_raw(Box::new(SherdContourSet { set, ids }));
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sherd_contour_set_len(set: *const SherdContourSet) -> usize {
    set.as_ref().map_or(0, |s| s.set.len())
}

/// Id of contour `index`, or null when out of range. Owned by the handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sherd_contour_set_id(set: *const SherdContourSet, index: usize) -> *const c_char {
    set.as_ref()
        .and_then(|s| s.ids.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sherd_contour_set_free(set: *mut SherdContourSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Pairwise components at `resample` points per curve (0 selects the
/// default). `band <= 0` disables the DTW band.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sherd_components_compute(
    set: *const SherdContourSet,
    resample: usize,
    band_width: f64,
    out: *mut *mut SherdComponents,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let set = reference(set, "set")?;
        let mut options = MetricOptions::default();
        if resample != 0 {
            options.resample = resample;
        }
        options.dtw_band = band(band_width);
        let components = pairwise_components(&set.set, &options)?;
        let ids = c_ids(&components.ids)?;
        *out = Box::into_raw(Box::new(SherdComponents { components, ids }));
        Ok(())
    })
}

/// Reads the component cache of a dataset directory.
///
/// # Safety
/// `dataset_dir` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sherd_components_load(
    dataset_dir: *const c_char,
    out: *mut *mut SherdComponents,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let artifact = sherd_core::pipeline::load_components(Path::new(string(dataset_dir, "dataset_dir")?))?;
        let ids = c_ids(&artifact.components.ids)?;
        *out = Box::into_raw(Box::new(SherdComponents {
            components: artifact.components,
            ids,
        }));
        Ok(())
    })
}

/// # Safety
/// `components` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sherd_components_len(components: *const SherdComponents) -> usize {
    components.as_ref().map_or(0, |c| c.components.n())
}

/// # Safety
/// `components` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sherd_components_id(components: *const SherdComponents, index: usize) -> *const c_char {
    components
        .as_ref()
        .and_then(|c| c.ids.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Copies one component matrix into `out` (`len` must be `n * n`).
///
/// # Safety
/// `components` must be a live handle; `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sherd_components_copy(
    components: *const SherdComponents,
    which: SherdComponent,
    out: *mut f64,
    len: usize,
) -> SherdStatus {
    guard(|| {
        let c = &reference(components, "components")?.components;
        let m = match which {
            SherdComponent::Pa => &c.pa,
            SherdComponent::Dc => &c.dc,
            SherdComponent::Gamma => &c.gamma,
        };
        copy_matrix(m, slice_mut(out, len, "out")?)
    })
}

/// # Safety
/// `components` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sherd_components_free(components: *mut SherdComponents) {
    if !components.is_null() {
        drop(Box::from_raw(components));
    }
}

/// Weights of a named preset such as `"WNDCNSM(3/4,1/4)"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sherd_preset_weights(name: *const c_char, out: *mut SherdWeights) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let preset: Preset = string(name, "name")?.parse()?;
        *out = preset.config().into();
        Ok(())
    })
}

/// Weighted similarity matrix, averaged with its transpose.
///
/// # Safety
/// `components` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sherd_similarity_assemble(
    components: *const SherdComponents,
    weights: SherdWeights,
    out: *mut *mut SherdSimilarity,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let c = &reference(components, "components")?.components;
        let sm = assemble_sm(c, &weights.into(), AssemblyOptions::default())?;
        *out = Box::into_raw(Box::new(SherdSimilarity(sm)));
        Ok(())
    })
}

/// # Safety
/// `sm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sherd_similarity_len(sm: *const SherdSimilarity) -> usize {
    sm.as_ref().map_or(0, |s| s.0.n())
}

/// # Safety
/// `sm` must be a live handle; `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sherd_similarity_copy(sm: *const SherdSimilarity, out: *mut f64, len: usize) -> SherdStatus {
    guard(|| copy_matrix(&reference(sm, "sm")?.0.values, slice_mut(out, len, "out")?))
}

/// # Safety
/// `sm` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sherd_similarity_free(sm: *mut SherdSimilarity) {
    if !sm.is_null() {
        drop(Box::from_raw(sm));
    }
}

/// Agglomerative clustering of an assembled similarity matrix.
///
/// # Safety
/// `sm` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sherd_linkage(
    sm: *const SherdSimilarity,
    method: SherdMethod,
    out: *mut *mut SherdDendrogram,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let d = clustering::linkage(&reference(sm, "sm")?.0, method.into())?;
        *out = Box::into_raw(Box::new(SherdDendrogram(d)));
        Ok(())
    })
}

/// Agglomerative clustering of a raw row-major `n * n` distance matrix.
///
/// # Safety
/// `distances` must point to `n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sherd_linkage_matrix(
    distances: *const f64,
    n: usize,
    method: SherdMethod,
    out: *mut *mut SherdDendrogram,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let len = n.checked_mul(n).ok_or_else(|| invalid("n overflows"))?;
        let raw = slice(distances, len, "distances")?;
        let rows = raw.chunks(n.max(1)).map(|r| r.to_vec()).collect();
        let m = SquareMatrix::from_rows(rows)?;
        let d = clustering::linkage_matrix(&m, method.into())?;
        *out = Box::into_raw(Box::new(SherdDendrogram(d)));
        Ok(())
    })
}

/// Number of merges, `n - 1`.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sherd_dendrogram_merge_count(d: *const SherdDendrogram) -> usize {
    d.as_ref().map_or(0, |d| d.0.merges.len())
}

/// Merge `k`; the cluster it creates has id `n + k`.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sherd_dendrogram_merge(
    d: *const SherdDendrogram,
    k: usize,
    out: *mut SherdMerge,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let m = reference(d, "dendrogram")?
            .0
            .merges
            .get(k)
            .ok_or_else(|| invalid(format!("merge {k} out of range")))?;
        *out = SherdMerge {
            a: m.a,
            b: m.b,
            height: m.height,
            size: m.size,
        };
        Ok(())
    })
}

/// Cophenetic correlation between `sm` and the dendrogram built from it.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sherd_cophenetic_coefficient(
    sm: *const SherdSimilarity,
    d: *const SherdDendrogram,
    out: *mut f64,
) -> SherdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = cophenetic_coefficient(&reference(sm, "sm")?.0, &reference(d, "dendrogram")?.0)?;
        Ok(())
    })
}

fn write_labels(d: &Dendrogram, spec: &CutSpec, labels: &mut [usize]) -> FfiResult {
    if labels.len() != d.n() {
        return Err(invalid(format!("label buffer holds {}, need {}", labels.len(), d.n())));
    }
    let l = cut(d, spec)?;
    labels.copy_from_slice(&l.labels);
    Ok(())
}

/// Single-level cut at `height`; labels are numbered by first leaf.
///
/// # Safety
/// `d` must be a live handle; `labels` must point to `len` entries.
#[no_mangle]
pub unsafe extern "C" fn sherd_cut_height(
    d: *const SherdDendrogram,
    height: f64,
    labels: *mut usize,
    len: usize,
) -> SherdStatus {
    guard(|| {
        write_labels(
            &reference(d, "dendrogram")?.0,
            &CutSpec::Single(height),
            slice_mut(labels, len, "labels")?,
        )
    })
}

/// Multi-level cut at the given subtree roots, which must cover every leaf
/// exactly once.
///
/// # Safety
/// `d` must be a live handle; `nodes` must point to `count` ids and
/// `labels` to `len` entries.
#[no_mangle]
pub unsafe extern "C" fn sherd_cut_nodes(
    d: *const SherdDendrogram,
    nodes: *const usize,
    count: usize,
    labels: *mut usize,
    len: usize,
) -> SherdStatus {
    guard(|| {
        let nodes = slice(nodes, count, "nodes")?.to_vec();
        write_labels(
            &reference(d, "dendrogram")?.0,
            &CutSpec::Multi(nodes),
            slice_mut(labels, len, "labels")?,
        )
    })
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sherd_dendrogram_free(d: *mut SherdDendrogram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}
