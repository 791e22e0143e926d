//! C ABI over `fcm-core`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns an
//! [`FcmStatus`]; on failure [`fcm_last_error`] holds a message for the
//! calling thread until the next failing call. Panics never unwind into C,
//! they come back as `FCM_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fcm_core::config;
use fcm_core::error::{Error, ErrorKind};
use fcm_core::eval::{bd_rate, RateCurve, RatePoint};
use fcm_core::pipeline::{decode_with, encode, DecoderOptions, EncoderConfig};
use fcm_core::tensor::{load_feature_sequence, save_feature_sequence, FeatureSequence};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad key, value, index or string encoding.
    InvalidArgument = 2,
    Io = 3,
    /// Encoding or decoding failed, including malformed containers.
    Codec = 4,
    /// BD-rate curves share no quality range.
    NoOverlap = 5,
    Panic = 6,
}

/// Feature sequence handle.
pub struct FcmSequence(FeatureSequence);

/// Encoder settings handle.
pub struct FcmConfig(EncoderConfig);

/// Owned byte buffer handle.
pub struct FcmBuffer(Vec<u8>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> FcmStatus {
    let status = match e.kind() {
        ErrorKind::Usage => FcmStatus::InvalidArgument,
        ErrorKind::Io => FcmStatus::Io,
        ErrorKind::Codec => FcmStatus::Codec,
        ErrorKind::NoOverlap => FcmStatus::NoOverlap,
    };
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> FcmStatus) -> FcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            FcmStatus::Panic
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!("`", stringify!($p), "` is null").into());
            return FcmStatus::NullPointer;
        })+
    };
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, FcmStatus> {
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        FcmStatus::InvalidArgument
    })
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn fcm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated library version.
#[no_mangle]
pub extern "C" fn fcm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- config ----

/// Default settings: pyramid_fuse transform, lossless codec, 10-bit, alpha 0.1.
#[no_mangle]
pub unsafe extern "C" fn fcm_config_new(out: *mut *mut FcmConfig) -> FcmStatus {
    non_null!(out);
    *out = Box::into_raw(Box::new(FcmConfig(EncoderConfig::default())));
    FcmStatus::Ok
}

/// Sets one `key`/`value` pair using the config-file key names
/// (`transform`, `codec`, `qshift`, `ratio`, `alpha`, ...).
#[no_mangle]
pub unsafe extern "C" fn fcm_config_set(cfg: *mut FcmConfig, key: *const c_char, value: *const c_char) -> FcmStatus {
    non_null!(cfg, key, value);
    guard(|| {
        let (k, v) = match (str_arg(key, "key"), str_arg(value, "value")) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if !config::KEYS.contains(&k) {
            set_error(format!("unknown key {k:?}"));
            return FcmStatus::InvalidArgument;
        }
        match config::apply(&mut (*cfg).0, k, v) {
            Ok(()) => FcmStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fcm_config_free(cfg: *mut FcmConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

// ---- sequences ----

#[no_mangle]
pub unsafe extern "C" fn fcm_sequence_load(path: *const c_char, out: *mut *mut FcmSequence) -> FcmStatus {
    non_null!(path, out);
    guard(|| {
        let p = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_feature_sequence(p) {
            Ok(seq) => {
                *out = Box::into_raw(Box::new(FcmSequence(seq)));
                FcmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses an in-memory feature file.
#[no_mangle]
pub unsafe extern "C" fn fcm_sequence_from_bytes(data: *const u8, len: usize, out: *mut *mut FcmSequence) -> FcmStatus {
    non_null!(data, out);
    guard(|| match FeatureSequence::from_fcft_bytes(std::slice::from_raw_parts(data, len)) {
        Ok(seq) => {
            *out = Box::into_raw(Box::new(FcmSequence(seq)));
            FcmStatus::Ok
        }
        Err(e) => fail(e),
    })
}

#[no_mangle]
pub unsafe extern "C" fn fcm_sequence_save(seq: *const FcmSequence, path: *const c_char) -> FcmStatus {
    non_null!(seq, path);
    guard(|| {
        let p = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match save_feature_sequence(&(*seq).0, p) {
            Ok(()) => FcmStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Number of feature sets (timesteps).
#[no_mangle]
pub unsafe extern "C" fn fcm_sequence_len(seq: *const FcmSequence) -> usize {
    if seq.is_null() {
        0
    } else {
        (*seq).0.len()
    }
}

/// Number of layers per feature set.
#[no_mangle]
pub unsafe extern "C" fn fcm_sequence_layer_count(seq: *const FcmSequence) -> usize {
    if seq.is_null() {
        0
    } else {
        (*seq).0.shape_signature().len()
    }
}

#[no_mangle]
pub unsafe extern "C" fn fcm_sequence_layer_shape(
    seq: *const FcmSequence,
    layer: usize,
    channels: *mut usize,
    height: *mut usize,
    width: *mut usize,
) -> FcmStatus {
    non_null!(seq, channels, height, width);
    let sig = (*seq).0.shape_signature();
    let Some(s) = sig.get(layer) else {
        set_error(format!("layer {layer} out of range ({} layers)", sig.len()));
        return FcmStatus::InvalidArgument;
    };
    *channels = s.channels;
    *height = s.height;
    *width = s.width;
    FcmStatus::Ok
}

/// Borrows the CHW data of one layer at timestep `t`. The pointer stays valid
/// while `seq` is alive.
#[no_mangle]
pub unsafe extern "C" fn fcm_sequence_layer_data(
    seq: *const FcmSequence,
    t: usize,
    layer: usize,
    data: *mut *const f32,
    len: *mut usize,
) -> FcmStatus {
    non_null!(seq, data, len);
    let Some(l) = (*seq).0.sets().get(t).and_then(|s| s.layers().get(layer)) else {
        set_error(format!("no layer {layer} at timestep {t}"));
        return FcmStatus::InvalidArgument;
    };
    *data = l.data().as_ptr();
    *len = l.len();
    FcmStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn fcm_sequence_free(seq: *mut FcmSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

// ---- codec ----

/// Encodes `seq` into a container. `cfg` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn fcm_encode(seq: *const FcmSequence, cfg: *const FcmConfig, out: *mut *mut FcmBuffer) -> FcmStatus {
    non_null!(seq, out);
    guard(|| {
        let default = EncoderConfig::default();
        let c = if cfg.is_null() { &default } else { &(*cfg).0 };
        match c.validate().and_then(|_| encode(&(*seq).0, c)) {
            Ok(bytes) => {
                *out = Box::into_raw(Box::new(FcmBuffer(bytes)));
                FcmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Decodes a container. `external_decode` is the decode command template
/// for streams written by the external codec, otherwise it may be null.
#[no_mangle]
pub unsafe extern "C" fn fcm_decode(
    data: *const u8,
    len: usize,
    external_decode: *const c_char,
    out: *mut *mut FcmSequence,
) -> FcmStatus {
    non_null!(data, out);
    guard(|| {
        let ext = if external_decode.is_null() {
            None
        } else {
            match str_arg(external_decode, "external_decode") {
                Ok(s) => Some(s.to_string()),
                Err(s) => return s,
            }
        };
        match decode_with(std::slice::from_raw_parts(data, len), &DecoderOptions { external_decode: ext }) {
            Ok((seq, _)) => {
                *out = Box::into_raw(Box::new(FcmSequence(seq)));
                FcmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fcm_buffer_data(buf: *const FcmBuffer) -> *const u8 {
    if buf.is_null() {
        ptr::null()
    } else {
        (*buf).0.as_ptr()
    }
}

#[no_mangle]
pub unsafe extern "C" fn fcm_buffer_len(buf: *const FcmBuffer) -> usize {
    if buf.is_null() {
        0
    } else {
        (*buf).0.len()
    }
}

#[no_mangle]
pub unsafe extern "C" fn fcm_buffer_free(buf: *mut FcmBuffer) {
    if !buf.is_null() {
        drop(Box::from_raw(buf));
    }
}

// ---- evaluation ----

unsafe fn curve(rates: *const f64, qualities: *const f64, n: usize) -> Result<RateCurve, Error> {
    let r = std::slice::from_raw_parts(rates, n);
    let q = std::slice::from_raw_parts(qualities, n);
    RateCurve::new(r.iter().zip(q).map(|(&rate, &quality)| RatePoint { rate, quality }).collect())
}

/// BD-rate in percent of the test curve against the reference curve. Each
/// curve is given as parallel rate/quality arrays with strictly increasing
/// rates.
#[no_mangle]
pub unsafe extern "C" fn fcm_bd_rate(
    ref_rates: *const f64,
    ref_qualities: *const f64,
    ref_len: usize,
    test_rates: *const f64,
    test_qualities: *const f64,
    test_len: usize,
    out_percent: *mut f64,
) -> FcmStatus {
    non_null!(ref_rates, ref_qualities, test_rates, test_qualities, out_percent);
    guard(|| {
        let r = curve(ref_rates, ref_qualities, ref_len)
            .and_then(|a| curve(test_rates, test_qualities, test_len).and_then(|b| bd_rate(&a, &b)));
        match r {
            Ok(v) => {
                *out_percent = v;
                FcmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
