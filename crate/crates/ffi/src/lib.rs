// SPDX-License-Identifier: Apache-2.0

//! C ABI over the lingpat pipeline.
//!
//! Every fallible function returns a [`LingpatStatus`] and writes results
//! through out-pointers. On failure a message is kept per thread and can be
//! read with [`lingpat_last_error`]. Handles are opaque and must be released
//! with their `_free` function. Strings returned through `out` pointers are
//! owned by the caller and released with [`lingpat_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lingpat::classify::{
    classify_by_levels, predict, vectorize_with, ClassifyError, FeatureLayout, Prediction, TrainedModel,
};
use lingpat::corpus::{IssueReport, Label, Source};
use lingpat::lexicon::{Lexicon, LexiconError};
use lingpat::patterns::{Level, PatternSet, PatternSetError};
use lingpat::pipeline::Pipeline;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LingpatStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    IoError = 4,
    ParseError = 5,
    LayoutMismatch = 6,
    Panic = 7,
}

pub const LINGPAT_LEVEL_WORD: u32 = 1;
pub const LINGPAT_LEVEL_PHRASE: u32 = 2;
pub const LINGPAT_LEVEL_SENTENCE: u32 = 4;
pub const LINGPAT_LEVEL_BUG_REPORT: u32 = 8;
pub const LINGPAT_LEVEL_ALL: u32 = 15;

/// Lexicon plus pattern set, ready to process reports.
pub struct LingpatPipeline {
    inner: Pipeline,
}

/// A trained linear classifier loaded from a model file.
pub struct LingpatModel {
    inner: TrainedModel,
}

struct Failure(LingpatStatus, String);

type Outcome<T> = Result<T, Failure>;

impl From<LexiconError> for Failure {
    fn from(e: LexiconError) -> Failure {
        let status = match e {
            LexiconError::Io { .. } => LingpatStatus::IoError,
            _ => LingpatStatus::ParseError,
        };
        Failure(status, e.to_string())
    }
}

impl From<PatternSetError> for Failure {
    fn from(e: PatternSetError) -> Failure {
        let status = match e {
            PatternSetError::Io { .. } => LingpatStatus::IoError,
            _ => LingpatStatus::ParseError,
        };
        Failure(status, e.to_string())
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Failure {
        let status = match e {
            ClassifyError::Io(_) => LingpatStatus::IoError,
            ClassifyError::LayoutMismatch { .. } => LingpatStatus::LayoutMismatch,
            ClassifyError::InvalidModel { .. } => LingpatStatus::ParseError,
            _ => LingpatStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Outcome<()>) -> LingpatStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LingpatStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(&format!("internal panic: {message}"));
            LingpatStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(LingpatStatus::NullArgument, format!("{name} is null"))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LingpatStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, name: &str) -> Outcome<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, name).map(Some)
    }
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Outcome<()> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NUL bytes removed").into_raw()
}

fn levels_from_mask(mask: u32) -> Outcome<Vec<Level>> {
    if mask == 0 || mask & !LINGPAT_LEVEL_ALL != 0 {
        return Err(Failure(LingpatStatus::InvalidArgument, format!("invalid level mask {mask}")));
    }
    Ok(Level::ALL
        .into_iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, l)| l)
        .collect())
}

unsafe fn report(id: *const c_char, title: *const c_char, body: *const c_char) -> Outcome<IssueReport> {
    let report = IssueReport {
        id: optional_text(id, "id")?.unwrap_or("report").to_string(),
        project: String::new(),
        title: optional_text(title, "title")?.unwrap_or_default().to_string(),
        body: optional_text(body, "body")?.unwrap_or_default().to_string(),
        label: Label::Unlabeled,
        source: Source::Synthetic,
        created_at: None,
    };
    report
        .validate()
        .map_err(|m| Failure(LingpatStatus::InvalidArgument, m))?;
    Ok(report)
}

unsafe fn pipeline_ref<'a>(p: *const LingpatPipeline) -> Outcome<&'a Pipeline> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("pipeline"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lingpat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next lingpat call on the same thread.
#[no_mangle]
pub extern "C" fn lingpat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Pipeline with the built-in lexicon and pattern set.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn lingpat_pipeline_new_default(out: *mut *mut LingpatPipeline) -> LingpatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let handle = Box::new(LingpatPipeline {
            inner: Pipeline::default_pipeline(),
        });
        write_out(out, Box::into_raw(handle), "out")
    })
}

/// Pipeline from a lexicon file and a pattern-set file. A NULL path selects
/// the built-in resource.
///
/// # Safety
/// Paths must be NULL or NUL-terminated strings. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lingpat_pipeline_load(
    lexicon_path: *const c_char,
    patterns_path: *const c_char,
    out: *mut *mut LingpatPipeline,
) -> LingpatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let lexicon = match optional_text(lexicon_path, "lexicon_path")? {
            Some(p) => Lexicon::load(p)?.0,
            None => Lexicon::default_lexicon(),
        };
        let patterns = match optional_text(patterns_path, "patterns_path")? {
            Some(p) => PatternSet::load(p)?,
            None => PatternSet::default_set(),
        };
        let handle = Box::new(LingpatPipeline {
            inner: Pipeline::new(lexicon, patterns),
        });
        write_out(out, Box::into_raw(handle), "out")
    })
}

/// # Safety
/// `pipeline` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lingpat_pipeline_free(pipeline: *mut LingpatPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Hex layout hash of the pipeline's pattern set.
///
/// # Safety
/// `pipeline` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lingpat_pipeline_layout_hash(
    pipeline: *const LingpatPipeline,
    out: *mut *mut c_char,
) -> LingpatStatus {
    guard(|| {
        let p = pipeline_ref(pipeline)?;
        write_out(out, into_c_string(p.patterns().layout_hash()), "out")
    })
}

/// Match one report and return the match report as JSON. `id` may be NULL.
/// Either `title` or `body` may be NULL but not both.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lingpat_match_json(
    pipeline: *const LingpatPipeline,
    id: *const c_char,
    title: *const c_char,
    body: *const c_char,
    out: *mut *mut c_char,
) -> LingpatStatus {
    guard(|| {
        let p = pipeline_ref(pipeline)?;
        let r = report(id, title, body)?;
        let json = serde_json::to_string(&p.match_one(&r))
            .map_err(|e| Failure(LingpatStatus::InvalidArgument, e.to_string()))?;
        write_out(out, into_c_string(json), "out")
    })
}

/// Flag a report as concurrency-related if any level in `level_mask` has a
/// pattern hit. Writes 1 or 0 to `out_positive`.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated. `out_positive` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lingpat_classify_levels(
    pipeline: *const LingpatPipeline,
    title: *const c_char,
    body: *const c_char,
    level_mask: u32,
    out_positive: *mut c_int,
) -> LingpatStatus {
    guard(|| {
        let p = pipeline_ref(pipeline)?;
        let levels = levels_from_mask(level_mask)?;
        let r = report(ptr::null(), title, body)?;
        let c = classify_by_levels(&p.match_one(&r), &levels);
        write_out(out_positive, c_int::from(c.predicted == Prediction::Concurrency), "out_positive")
    })
}

/// Load a trained model file.
///
/// # Safety
/// `path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lingpat_model_load(path: *const c_char, out: *mut *mut LingpatModel) -> LingpatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = TrainedModel::load(Path::new(text(path, "path")?))?;
        write_out(out, Box::into_raw(Box::new(LingpatModel { inner: model })), "out")
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lingpat_model_free(model: *mut LingpatModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Score a report with a trained model. The model must have been trained on
/// a level subset of the pipeline's pattern set.
///
/// # Safety
/// Handles must be live. String arguments must be NULL or NUL-terminated.
/// `out_score` and `out_positive` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lingpat_model_classify(
    model: *const LingpatModel,
    pipeline: *const LingpatPipeline,
    title: *const c_char,
    body: *const c_char,
    out_score: *mut f64,
    out_positive: *mut c_int,
) -> LingpatStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        let p = pipeline_ref(pipeline)?;
        if out_score.is_null() {
            return Err(null("out_score"));
        }
        let layout = FeatureLayout::for_hash(p.patterns(), &m.layout_hash).ok_or_else(|| {
            Failure(
                LingpatStatus::LayoutMismatch,
                format!("model layout {} is not a level subset of this pattern set", m.layout_hash),
            )
        })?;
        let r = report(ptr::null(), title, body)?;
        let c = predict(m, &vectorize_with(&p.match_one(&r), &layout)?)?;
        write_out(out_score, c.score, "out_score")?;
        write_out(out_positive, c_int::from(c.predicted == Prediction::Concurrency), "out_positive")
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lingpat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
