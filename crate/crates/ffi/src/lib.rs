//! C ABI over `ras-core`.
//!
//! Every fallible function returns a [`RasStatus`]. On failure the message is
//! kept per thread and read with [`ras_last_error_message`]; a successful call
//! clears it. Objects cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function. Strings returned by the
//! library are released with [`ras_string_free`].
//!
//! Matrices are row-major `double` buffers. Panics never unwind into C; they
//! are reported as [`RasStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ndarray::Array2;
use ras_core::cluster::{self, ClusterModel, KMeansOptions};
use ras_core::metrics::{self, MetricsReport};
use ras_core::pipeline::{run_pipeline, PipelineConfig};
use ras_core::sae::{self, SaeConfig, SaeModel};
use ras_core::{ingest, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A buffer length did not match the object it describes.
    LengthMismatch = 3,
    /// Malformed input, schema violation or bad configuration.
    Data = 4,
    /// Training divergence or an undefined metric.
    Numerical = 5,
    Io = 6,
    /// The library panicked. Handles passed to the call stay valid.
    Panic = 7,
}

/// Row-major matrix of doubles.
pub struct RasMatrix {
    inner: Array2<f64>,
}

/// Trained stacked autoencoder.
pub struct RasSaeModel {
    inner: SaeModel,
}

/// Fitted K-means partition.
pub struct RasClusterModel {
    inner: ClusterModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasKMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

/// Internal validation scores. `dunn` may be `INFINITY`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasMetrics {
    pub silhouette: f64,
    pub davies_bouldin: f64,
    pub dunn: f64,
    pub k: usize,
    pub n: usize,
}

impl From<MetricsReport> for RasMetrics {
    fn from(m: MetricsReport) -> Self {
        RasMetrics {
            silhouette: m.silhouette,
            davies_bouldin: m.davies_bouldin,
            dunn: m.dunn,
            k: m.k,
            n: m.n,
        }
    }
}

enum Failure {
    Null(&'static str),
    Utf8(&'static str),
    Length(String),
    Core(ras_core::Error),
}

impl From<ras_core::Error> for Failure {
    fn from(e: ras_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn status(&self) -> RasStatus {
        match self {
            Failure::Null(_) => RasStatus::NullArgument,
            Failure::Utf8(_) => RasStatus::InvalidUtf8,
            Failure::Length(_) => RasStatus::LengthMismatch,
            Failure::Core(e) => match e.kind() {
                ErrorKind::Data => RasStatus::Data,
                ErrorKind::Numerical => RasStatus::Numerical,
                ErrorKind::Io => RasStatus::Io,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Null(name) => format!("argument `{name}` is null"),
            Failure::Utf8(name) => format!("argument `{name}` is not valid UTF-8"),
            Failure::Length(msg) => msg.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    // Interior NULs would truncate the C string; replace them.
    let message = CString::new(message.replace('\0', "\u{FFFD}")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RasStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            RasStatus::Ok
        }
        Ok(Err(failure)) => {
            set_last_error(failure.message());
            failure.status()
        }
        Err(payload) => {
            let detail = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {detail}"));
            RasStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn utf8<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn expect_len(found: usize, expected: usize, what: &str) -> Result<(), Failure> {
    if found != expected {
        return Err(Failure::Length(format!(
            "{what}: expected length {expected}, found {found}"
        )));
    }
    Ok(())
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::Length("string contains an interior nul".into()))
}

fn into_handle<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ras_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static version string.
#[no_mangle]
pub extern "C" fn ras_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ras_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Normalizes Arabic text: URLs, diacritics and tatweel removed, letter
/// variants folded, non-Arabic characters dropped, whitespace collapsed.
/// `*out` receives a new string to release with `ras_string_free`.
///
/// # Safety
/// `raw` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ras_preprocess_text(raw: *const c_char, out: *mut *mut c_char) -> RasStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let raw = utf8(raw, "raw")?;
        *out = to_c_string(ingest::preprocess_text(raw))?;
        Ok(())
    })
}

/// Copies `rows * cols` row-major values into a new matrix.
///
/// # Safety
/// `data` must point to `rows * cols` doubles (it may be null when that
/// product is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ras_matrix_new(
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut RasMatrix,
) -> RasStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Failure::Length(format!("{rows} x {cols} overflows")))?;
        let values = slice(data, len, "data")?;
        let inner = Array2::from_shape_vec((rows, cols), values.to_vec()).expect("shape matches length");
        *out = into_handle(RasMatrix { inner });
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a live matrix handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ras_matrix_free(m: *mut RasMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Row count, 0 for null.
///
/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn ras_matrix_rows(m: *const RasMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.nrows())
}

/// Column count, 0 for null.
///
/// # Safety
/// `m` must be null or a live matrix handle.
#[no_mangle]
pub unsafe extern "C" fn ras_matrix_cols(m: *const RasMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.ncols())
}

/// Copies the matrix row-major into `buf`, which must hold exactly
/// `rows * cols` values.
///
/// # Safety
/// `m` must be a live matrix handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ras_matrix_copy(m: *const RasMatrix, buf: *mut f64, len: usize) -> RasStatus {
    guard(|| {
        let m = non_null(m, "m")?;
        expect_len(len, m.inner.len(), "matrix buffer")?;
        let buf = slice_mut(buf, len, "buf")?;
        for (dst, src) in buf.iter_mut().zip(m.inner.iter()) {
            *dst = *src;
        }
        Ok(())
    })
}

/// Ten restarts, 300 iterations, tolerance 1e-4.
#[no_mangle]
pub extern "C" fn ras_kmeans_default_options() -> RasKMeansOptions {
    let d = KMeansOptions::default();
    RasKMeansOptions {
        restarts: d.restarts,
        max_iter: d.max_iter,
        tol: d.tol,
    }
}

/// K-means++ with restarts on the rows of `features`. Restart `r` draws from
/// stream `r` of `seed`. `options` may be null for the defaults.
///
/// # Safety
/// `features` must be a live matrix handle, `options` null or readable, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ras_kmeans_fit(
    features: *const RasMatrix,
    k: usize,
    seed: u64,
    options: *const RasKMeansOptions,
    out: *mut *mut RasClusterModel,
) -> RasStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let features = non_null(features, "features")?;
        let opts = options.as_ref().map_or_else(KMeansOptions::default, |o| KMeansOptions {
            restarts: o.restarts,
            max_iter: o.max_iter,
            tol: o.tol,
        });
        let inner = cluster::kmeans_fit(&features.inner, k, seed, &opts)?;
        *out = into_handle(RasClusterModel { inner });
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a live cluster model handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ras_cluster_model_free(m: *mut RasClusterModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Cluster count, 0 for null.
///
/// # Safety
/// `m` must be null or a live cluster model handle.
#[no_mangle]
pub unsafe extern "C" fn ras_cluster_model_k(m: *const RasClusterModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.centroids.nrows())
}

/// Point count, 0 for null.
///
/// # Safety
/// `m` must be null or a live cluster model handle.
#[no_mangle]
pub unsafe extern "C" fn ras_cluster_model_len(m: *const RasClusterModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.labels.len())
}

/// Within-cluster sum of squared distances, NaN for null.
///
/// # Safety
/// `m` must be null or a live cluster model handle.
#[no_mangle]
pub unsafe extern "C" fn ras_cluster_model_inertia(m: *const RasClusterModel) -> f64 {
    m.as_ref().map_or(f64::NAN, |m| m.inner.inertia)
}

/// Copies the labels (one per input row) into `buf`.
///
/// # Safety
/// `m` must be a live cluster model handle; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn ras_cluster_model_labels(m: *const RasClusterModel, buf: *mut usize, len: usize) -> RasStatus {
    guard(|| {
        let m = non_null(m, "m")?;
        expect_len(len, m.inner.labels.len(), "label buffer")?;
        slice_mut(buf, len, "buf")?.copy_from_slice(&m.inner.labels);
        Ok(())
    })
}

/// Centroids as a new `k x d` matrix.
///
/// # Safety
/// `m` must be a live cluster model handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ras_cluster_model_centroids(m: *const RasClusterModel, out: *mut *mut RasMatrix) -> RasStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = non_null(m, "m")?;
        *out = into_handle(RasMatrix {
            inner: m.inner.centroids.clone(),
        });
        Ok(())
    })
}

/// Silhouette, Davies-Bouldin and Dunn for `labels` over the rows of
/// `features`. Fails with `RAS_STATUS_NUMERICAL` when a score is undefined,
/// e.g. for a single cluster.
///
/// # Safety
/// `features` must be a live matrix handle, `labels` must hold `len` values,
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ras_metrics_evaluate(
    features: *const RasMatrix,
    labels: *const usize,
    len: usize,
    out: *mut RasMetrics,
) -> RasStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let features = non_null(features, "features")?;
        expect_len(len, features.inner.nrows(), "labels")?;
        let labels = slice(labels, len, "labels")?;
        *out = metrics::evaluate(&features.inner, labels)?.into();
        Ok(())
    })
}

/// Trains an autoencoder on `data` (values in [0, 1]). `config_json` is an
/// SAE configuration object; null or `"{}"` selects the defaults.
///
/// # Safety
/// `data` must be a live matrix handle, `config_json` null or a
/// NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ras_sae_train(
    data: *const RasMatrix,
    config_json: *const c_char,
    out: *mut *mut RasSaeModel,
) -> RasStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let data = non_null(data, "data")?;
        let config: SaeConfig = if config_json.is_null() {
            SaeConfig::default()
        } else {
            serde_json::from_str(utf8(config_json, "config_json")?)
                .map_err(|e| ras_core::Error::Config(format!("SAE configuration: {e}")))?
        };
        let (inner, _log) = sae::train_layerwise(&config, &data.inner)?;
        *out = into_handle(RasSaeModel { inner });
        Ok(())
    })
}

/// Loads a model written by `ras train` or `ras_sae_model_save`.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ras_sae_model_load(path: *const c_char, out: *mut *mut RasSaeModel) -> RasStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let path = Path::new(utf8(path, "path")?);
        let text = std::fs::read_to_string(path).map_err(|e| ras_core::Error::io(path, e))?;
        let inner = SaeModel::from_json(&text)?;
        *out = into_handle(RasSaeModel { inner });
        Ok(())
    })
}

/// # Safety
/// `m` must be a live model handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ras_sae_model_save(m: *const RasSaeModel, path: *const c_char) -> RasStatus {
    guard(|| {
        let m = non_null(m, "m")?;
        let path = Path::new(utf8(path, "path")?);
        ras_core::pipeline::artifacts::write_model(path, &m.inner)?;
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a live model handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ras_sae_model_free(m: *mut RasSaeModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Input width, 0 for null.
///
/// # Safety
/// `m` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn ras_sae_model_input_dim(m: *const RasSaeModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.input_dim())
}

/// Code width, 0 for null.
///
/// # Safety
/// `m` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn ras_sae_model_code_dim(m: *const RasSaeModel) -> usize {
    m.as_ref().map_or(0, |m| m.inner.code_dim())
}

/// Encoder output for every row of `data`, as a new matrix.
///
/// # Safety
/// `m` and `data` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ras_sae_encode(
    m: *const RasSaeModel,
    data: *const RasMatrix,
    out: *mut *mut RasMatrix,
) -> RasStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = non_null(m, "m")?;
        let data = non_null(data, "data")?;
        let inner = sae::encode(&m.inner, &data.inner)?;
        *out = into_handle(RasMatrix { inner });
        Ok(())
    })
}

/// Runs the whole pipeline from a JSON configuration file, writing every
/// artifact to its output directory. `out_metrics` may be null.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_metrics` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ras_pipeline_run(config_path: *const c_char, out_metrics: *mut RasMetrics) -> RasStatus {
    guard(|| {
        let config = PipelineConfig::load(Path::new(utf8(config_path, "config_path")?))?;
        let report = run_pipeline(&config)?;
        if let Some(out) = out_metrics.as_mut() {
            *out = report.metrics.into();
        }
        Ok(())
    })
}
