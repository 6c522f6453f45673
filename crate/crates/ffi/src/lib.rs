//! C ABI over the tarpitnav engine.
//!
//! Every fallible function returns a [`TnStatus`]; on failure the message is
//! available from [`tn_last_error_message`] on the same thread. Strings and
//! buffers handed out by this library must be released with
//! [`tn_string_free`] / [`tn_bytes_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use libc::{c_char, size_t};

use tarpitnav::detector::{self, Detector, PollRecord, TarpitParams};
use tarpitnav::engine::{self, CoverageSeries};
use tarpitnav::motifs::FusedModel;
use tarpitnav::silhouette;
use tarpitnav::snapshot::{self, ScreenSignature, UiSnapshot};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Model = 4,
    TimeRegression = 5,
    InvalidArgument = 6,
    Panic = 99,
}

/// Trained motif classifier.
pub struct TnModel {
    inner: FusedModel,
}

/// Stuck-screen detector.
pub struct TnDetector {
    inner: Detector,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TnTarpitEvent {
    pub stuck_since: u64,
    pub fired_at: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(TnStatus, String);

type Res<T> = Result<T, Failure>;

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Res<()>) -> TnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TnStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside tarpitnav".into());
            TnStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(Failure(TnStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TnStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Res<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

fn out_ptr<T>(p: *mut T, name: &str) -> Res<()> {
    if p.is_null() {
        Err(Failure(TnStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn snapshot_from(xml: &str, regions: Option<&str>) -> Res<UiSnapshot> {
    let regions = match regions {
        Some(text) => snapshot::parse_text_regions(text).map_err(|e| Failure(TnStatus::Parse, e.to_string()))?,
        None => Vec::new(),
    };
    snapshot::parse_document(xml)
        .and_then(|d| d.into_snapshot(regions))
        .map_err(|e| Failure(TnStatus::Parse, e.to_string()))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn tn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `data`/`len` must be null/0 or a buffer returned by this library.
#[no_mangle]
pub unsafe extern "C" fn tn_bytes_free(data: *mut u8, len: size_t) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}

/// Loads a model archive written by `tarpitnav train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_model_load(path: *const c_char, out: *mut *mut TnModel) -> TnStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = str_arg(path, "path")?;
        let inner = FusedModel::load(Path::new(path)).map_err(|e| Failure(TnStatus::Model, e.to_string()))?;
        *out = Box::into_raw(Box::new(TnModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`tn_model_load`].
#[no_mangle]
pub unsafe extern "C" fn tn_model_free(model: *mut TnModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Ranks all motifs for a hierarchy document. Writes a JSON array of
/// `{"label", "probability"}` objects, most likely first.
///
/// # Safety
/// `model` must be a live handle; strings NUL-terminated (`regions` may be
/// null); `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tn_classify(
    model: *const TnModel,
    hierarchy_xml: *const c_char,
    regions: *const c_char,
    out_json: *mut *mut c_char,
) -> TnStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        let model = model
            .as_ref()
            .ok_or_else(|| Failure(TnStatus::NullArgument, "model is null".into()))?;
        let snap = snapshot_from(str_arg(hierarchy_xml, "hierarchy_xml")?, opt_str_arg(regions, "regions")?)?;
        let ranked: Vec<serde_json::Value> = model
            .inner
            .predict(&snap)
            .ranked
            .iter()
            .map(|(l, p)| serde_json::json!({ "label": l.name(), "probability": p }))
            .collect();
        *out_json = to_c_string(serde_json::Value::Array(ranked).to_string());
        Ok(())
    })
}

/// Renders a silhouette as a binary PPM (P6) image.
///
/// # Safety
/// Strings NUL-terminated (`regions` may be null); out pointers writable.
/// Release the buffer with [`tn_bytes_free`].
#[no_mangle]
pub unsafe extern "C" fn tn_silhouette_render(
    hierarchy_xml: *const c_char,
    regions: *const c_char,
    width: u32,
    height: u32,
    out_data: *mut *mut u8,
    out_len: *mut size_t,
) -> TnStatus {
    guard(|| {
        out_ptr(out_data, "out_data")?;
        out_ptr(out_len, "out_len")?;
        if width == 0 || height == 0 {
            return Err(Failure(TnStatus::InvalidArgument, format!("canvas {width}x{height}")));
        }
        let snap = snapshot_from(str_arg(hierarchy_xml, "hierarchy_xml")?, opt_str_arg(regions, "regions")?)?;
        let ppm = silhouette::render(&snap, (width, height)).to_ppm().into_boxed_slice();
        *out_len = ppm.len();
        *out_data = Box::into_raw(ppm) as *mut u8;
        Ok(())
    })
}

/// Structure digest of a hierarchy document.
///
/// # Safety
/// `hierarchy_xml` NUL-terminated; `out_digest` writable.
#[no_mangle]
pub unsafe extern "C" fn tn_signature_digest(hierarchy_xml: *const c_char, out_digest: *mut u64) -> TnStatus {
    guard(|| {
        out_ptr(out_digest, "out_digest")?;
        let snap = snapshot_from(str_arg(hierarchy_xml, "hierarchy_xml")?, None)?;
        *out_digest = snapshot::signature(&snap).structure_digest;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn tn_detector_new(trigger_ms: u64) -> *mut TnDetector {
    Box::into_raw(Box::new(TnDetector {
        inner: Detector::new(trigger_ms),
    }))
}

/// # Safety
/// `det` must be null or a handle from [`tn_detector_new`].
#[no_mangle]
pub unsafe extern "C" fn tn_detector_free(det: *mut TnDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

/// Feeds one poll. `*out_fired` is set to 1 when the screen has just been
/// judged stuck, in which case `*out_event` (if non-null) is filled.
///
/// # Safety
/// `det` must be live; strings NUL-terminated; `out_fired` writable.
#[no_mangle]
pub unsafe extern "C" fn tn_detector_observe(
    det: *mut TnDetector,
    activity: *const c_char,
    window: *const c_char,
    structure_digest: u64,
    at_ms: u64,
    out_fired: *mut u8,
    out_event: *mut TnTarpitEvent,
) -> TnStatus {
    guard(|| {
        out_ptr(out_fired, "out_fired")?;
        let det = det
            .as_mut()
            .ok_or_else(|| Failure(TnStatus::NullArgument, "detector is null".into()))?;
        let signature = ScreenSignature {
            activity: str_arg(activity, "activity")?.to_owned(),
            window: str_arg(window, "window")?.to_owned(),
            structure_digest,
        };
        let fired = det
            .inner
            .observe(PollRecord { signature, at: at_ms })
            .map_err(|e| Failure(TnStatus::TimeRegression, e.to_string()))?;
        *out_fired = fired.is_some() as u8;
        if let (Some(ev), Some(out)) = (fired, out_event.as_mut()) {
            *out = TnTarpitEvent {
                stuck_since: ev.stuck_since,
                fired_at: ev.fired_at,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `det` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn tn_detector_reset(det: *mut TnDetector) {
    if let Some(d) = det.as_mut() {
        d.inner.reset();
    }
}

/// Tarpit screens of a `screen_id,action_kind,at_ms` CSV trace, as a sorted
/// JSON array of screen ids.
///
/// # Safety
/// `trace_csv` NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn tn_extract_tarpits(
    trace_csv: *const c_char,
    min_actions: size_t,
    min_ms: u64,
    top_k: size_t,
    out_json: *mut *mut c_char,
) -> TnStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        let text = str_arg(trace_csv, "trace_csv")?;
        let trace = detector::read_trace(text.as_bytes()).map_err(|e| Failure(TnStatus::Parse, e.to_string()))?;
        let params = TarpitParams {
            min_actions,
            min_ms,
            top_k,
        };
        let ids: Vec<String> = detector::extract_tarpits(&trace, params).into_iter().collect();
        *out_json = to_c_string(serde_json::to_string(&ids).unwrap_or_default());
        Ok(())
    })
}

/// Trapezoid area under `values[0..len]` sampled every `dt`.
///
/// # Safety
/// `values` must point to `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tn_auc(values: *const f64, len: size_t, dt: f64, out: *mut f64) -> TnStatus {
    guard(|| {
        out_ptr(out, "out")?;
        if values.is_null() && len > 0 {
            return Err(Failure(TnStatus::NullArgument, "values is null".into()));
        }
        let values = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(values, len).to_vec() };
        *out = engine::auc(&CoverageSeries { values, dt }).map_err(|e| Failure(TnStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// # Safety
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tn_percent_increase(base: f64, candidate: f64, out: *mut f64) -> TnStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = engine::percent_increase(base, candidate).map_err(|e| Failure(TnStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}
