//! C ABI over genreframe: load a checkpoint, score text, and the class-weight
//! and reweighting helpers.
//!
//! Every fallible function returns a [`GfStatus`]. On failure the message is
//! kept per thread and read back with [`gf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use genreframe::error::Error;
use genreframe::features::featurize_text;
use genreframe::labels::{NUM_FRAMES, NUM_GENRES};
use genreframe::model::{compute_class_weights, load_checkpoint, MultiTaskModel};

/// Number of genre classes, the length of a genre probability row.
pub const GF_NUM_GENRES: usize = 3;
/// Number of frame labels, the length of a frame probability row.
pub const GF_NUM_FRAMES: usize = 14;

const _: () = assert!(GF_NUM_GENRES == NUM_GENRES && GF_NUM_FRAMES == NUM_FRAMES);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Checkpoint = 5,
    Panic = 6,
}

/// A loaded model. Only ever handled through a pointer.
pub struct GfModel {
    inner: MultiTaskModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: GfStatus, msg: impl Into<String>) -> GfStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> GfStatus) -> GfStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(GfStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, GfStatus> {
    if p.is_null() {
        return Err(fail(GfStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(GfStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

/// Message of the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Clears the last error of this thread.
#[no_mangle]
pub extern "C" fn gf_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn gf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a checkpoint file into `*out`. Release it with [`gf_model_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gf_model_load(path: *const c_char, out: *mut *mut GfModel) -> GfStatus {
    guard(|| {
        if out.is_null() {
            return fail(GfStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_checkpoint(Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(GfModel { inner }));
                GfStatus::Ok
            }
            Err(e @ Error::Io { .. }) => fail(GfStatus::Io, e.to_string()),
            Err(e) => fail(GfStatus::Checkpoint, e.to_string()),
        }
    })
}

/// Releases a model. Null is accepted and ignored.
///
/// # Safety
/// `model` must come from [`gf_model_load`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gf_model_free(model: *mut GfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Scores one text. Writes `GF_NUM_GENRES` genre probabilities to `genre_out`
/// and `GF_NUM_FRAMES` frame probabilities to `frames_out`; either output may
/// be null to skip it.
///
/// # Safety
/// `model` must be a live handle, `text` a NUL-terminated string, and each
/// non-null output must have room for its row.
#[no_mangle]
pub unsafe extern "C" fn gf_model_predict(
    model: *const GfModel,
    text: *const c_char,
    genre_out: *mut f64,
    frames_out: *mut f64,
) -> GfStatus {
    guard(|| {
        let Some(model) = model.as_ref() else {
            return fail(GfStatus::NullPointer, "model is null");
        };
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let x = featurize_text(text, &model.inner.feature_config);
        let (genre, frames) = model.inner.predict_one(&x);
        if !genre_out.is_null() {
            ptr::copy_nonoverlapping(genre.as_ptr(), genre_out, GF_NUM_GENRES);
        }
        if !frames_out.is_null() {
            ptr::copy_nonoverlapping(frames.as_ptr(), frames_out, GF_NUM_FRAMES);
        }
        GfStatus::Ok
    })
}

/// Loss weights for `n` class counts, written to `out[0..n]`. They satisfy
/// `w_l * c_l = hmean(c)` and sum to `n`.
///
/// # Safety
/// `counts` must hold `n` readable values and `out` room for `n` values.
#[no_mangle]
pub unsafe extern "C" fn gf_class_weights(counts: *const u64, n: usize, out: *mut f64) -> GfStatus {
    guard(|| {
        if counts.is_null() || out.is_null() {
            return fail(GfStatus::NullPointer, "counts or out is null");
        }
        let counts: Vec<usize> = std::slice::from_raw_parts(counts, n).iter().map(|&c| c as usize).collect();
        match compute_class_weights(&counts, None) {
            Ok(w) => {
                ptr::copy_nonoverlapping(w.weights.as_ptr(), out, n);
                GfStatus::Ok
            }
            Err(e) => fail(GfStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Multiplies `row[label]` by `factor` and renormalizes into `out[0..n]`.
/// `row` and `out` may alias.
///
/// # Safety
/// `row` must hold `n` readable values and `out` room for `n` values.
#[no_mangle]
pub unsafe extern "C" fn gf_reweight(row: *const f64, n: usize, label: usize, factor: f64, out: *mut f64) -> GfStatus {
    guard(|| {
        if row.is_null() || out.is_null() {
            return fail(GfStatus::NullPointer, "row or out is null");
        }
        if label >= n {
            return fail(GfStatus::InvalidArgument, format!("label {label} out of range for {n} classes"));
        }
        if !(factor.is_finite() && factor > 0.0) {
            return fail(GfStatus::InvalidArgument, format!("factor must be positive and finite, got {factor}"));
        }
        let input = std::slice::from_raw_parts(row, n).to_vec();
        let r = genreframe::ensemble::reweight_probabilities(&input, label, factor);
        ptr::copy(r.as_ptr(), out, n);
        GfStatus::Ok
    })
}
