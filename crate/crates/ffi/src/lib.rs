//! C ABI for hitpredict.
//!
//! Every function returns an [`HpStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and can be read with
//! [`hp_last_error_message`] until the next failing call on that thread.
//! Pipelines are opaque handles owned by the caller and released with
//! [`hp_pipeline_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use hitpredict::datamodel::{Label, SongAnalysis};
use hitpredict::eval::{roc_auc, wilcoxon_signed_rank};
use hitpredict::features::{descriptive_stats, feature_names, feature_vector};
use hitpredict::pipeline::TrainedPipeline;
use hitpredict::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidInput = 5,
    SchemaMismatch = 6,
    UnsupportedVersion = 7,
    Panic = 8,
}

/// Opaque trained pipeline.
pub struct HpPipeline {
    inner: TrainedPipeline,
}

/// Ten summary statistics of a series. Kurtosis is not excess kurtosis.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HpStats {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub stdev: f64,
    pub p80: f64,
    pub min: f64,
    pub max: f64,
    pub range: f64,
    pub median: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(HpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => HpStatus::Io,
            Error::Csv(_) | Error::Json(_) | Error::BadHeader { .. } => HpStatus::Parse,
            Error::SchemaMismatch { .. } => HpStatus::SchemaMismatch,
            Error::UnsupportedVersion(_) => HpStatus::UnsupportedVersion,
            _ => HpStatus::InvalidInput,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HpStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(HpStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(HpStatus::InvalidUtf8, "string is not valid UTF-8".into()))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(p: *mut T, v: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null());
    }
    *p = v;
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Load a pipeline saved by `hitpredict train`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_pipeline_load(path: *const c_char, out: *mut *mut HpPipeline) -> HpStatus {
    guard(|| {
        let path = str_arg(path)?;
        let inner = TrainedPipeline::load(path)?;
        write_out(out, Box::into_raw(Box::new(HpPipeline { inner })))
    })
}

/// Parse a pipeline from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_pipeline_from_json(json: *const c_char, out: *mut *mut HpPipeline) -> HpStatus {
    guard(|| {
        let inner = TrainedPipeline::from_json(str_arg(json)?)?;
        write_out(out, Box::into_raw(Box::new(HpPipeline { inner })))
    })
}

/// Release a pipeline. Null is accepted.
///
/// # Safety
/// `pipeline` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hp_pipeline_free(pipeline: *mut HpPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Number of input features a row passed to [`hp_pipeline_predict_row`] must have.
///
/// # Safety
/// `pipeline` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hp_pipeline_input_len(pipeline: *const HpPipeline, out: *mut usize) -> HpStatus {
    guard(|| {
        let p = pipeline.as_ref().ok_or_else(null)?;
        write_out(out, p.inner.input_features.len())
    })
}

/// Score a raw (unstandardized) row laid out like [`hp_feature_name`].
/// `is_hit` receives 1 for a predicted hit and 0 otherwise.
///
/// # Safety
/// `values` must hold `len` doubles; the other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hp_pipeline_predict_row(
    pipeline: *const HpPipeline,
    values: *const f64,
    len: usize,
    score: *mut f64,
    is_hit: *mut i32,
) -> HpStatus {
    guard(|| {
        let p = pipeline.as_ref().ok_or_else(null)?;
        let row = slice_arg(values, len)?;
        let want = p.inner.input_features.len();
        if len != want {
            return Err(Fail(HpStatus::SchemaMismatch, format!("row has {len} values, pipeline expects {want}")));
        }
        let pred = p.inner.predict_named(&p.inner.input_features, row)?;
        write_out(score, pred.score)?;
        write_out(is_hit, i32::from(pred.label == Label::Hit))
    })
}

/// Score one song analysis given as JSON text.
///
/// # Safety
/// `analysis_json` must be a NUL-terminated string; the other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hp_pipeline_predict_analysis(
    pipeline: *const HpPipeline,
    analysis_json: *const c_char,
    score: *mut f64,
    is_hit: *mut i32,
) -> HpStatus {
    guard(|| {
        let p = pipeline.as_ref().ok_or_else(null)?;
        let analysis = SongAnalysis::from_json_str(str_arg(analysis_json)?)?;
        let pred = p.inner.predict_analysis(&analysis)?;
        write_out(score, pred.score)?;
        write_out(is_hit, i32::from(pred.label == Label::Hit))
    })
}

/// Length of the fixed feature schema.
#[no_mangle]
pub extern "C" fn hp_feature_count() -> usize {
    feature_names().len()
}

/// Name of feature `index`, or null when out of range. The string is static.
#[no_mangle]
pub extern "C" fn hp_feature_name(index: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| {
        feature_names()
            .iter()
            .map(|n| CString::new(n.as_str()).expect("feature names have no NUL"))
            .collect()
    });
    names.get(index).map_or(std::ptr::null(), |c| c.as_ptr())
}

/// Extract the feature vector of an analysis into `out`, which must hold
/// exactly [`hp_feature_count`] doubles.
///
/// # Safety
/// `analysis_json` must be a NUL-terminated string and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hp_feature_vector(analysis_json: *const c_char, out: *mut f64, len: usize) -> HpStatus {
    guard(|| {
        if len != feature_names().len() {
            return Err(Error::LengthMismatch(feature_names().len(), len).into());
        }
        if out.is_null() {
            return Err(null());
        }
        let analysis = SongAnalysis::from_json_str(str_arg(analysis_json)?)?;
        let fv = feature_vector(&analysis)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&fv.values);
        Ok(())
    })
}

/// Area under the ROC curve. A nonzero label marks a hit.
///
/// # Safety
/// `labels` and `scores` must hold `n` elements; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hp_roc_auc(labels: *const u8, scores: *const f64, n: usize, out: *mut f64) -> HpStatus {
    guard(|| {
        let labels: Vec<Label> = slice_arg(labels, n)?
            .iter()
            .map(|&l| if l != 0 { Label::Hit } else { Label::NonHit })
            .collect();
        let (_, auc) = roc_auc(&labels, slice_arg(scores, n)?)?;
        write_out(out, auc)
    })
}

/// Two-sided p-value of the Wilcoxon signed-rank test on paired samples.
///
/// # Safety
/// `a` and `b` must hold `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hp_wilcoxon_p(a: *const f64, b: *const f64, n: usize, out: *mut f64) -> HpStatus {
    guard(|| {
        let r = wilcoxon_signed_rank(slice_arg(a, n)?, slice_arg(b, n)?)?;
        write_out(out, r.p_value)
    })
}

/// Summary statistics of a non-empty finite series.
///
/// # Safety
/// `series` must hold `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hp_descriptive_stats(series: *const f64, n: usize, out: *mut HpStats) -> HpStatus {
    guard(|| {
        let s = descriptive_stats(slice_arg(series, n)?)?;
        write_out(
            out,
            HpStats {
                mean: s.mean,
                variance: s.variance,
                skewness: s.skewness,
                kurtosis: s.kurtosis,
                stdev: s.stdev,
                p80: s.p80,
                min: s.min,
                max: s.max,
                range: s.range,
                median: s.median,
            },
        )
    })
}
