use std::ffi::{CStr, CString};
use std::fs;
use std::path::{Path, PathBuf};
use std::ptr;

use tarpitnav::motifs::train;
use tarpitnav::synth::synth_dataset;
use tarpitnav_ffi::*;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = tn_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

unsafe fn take_string(p: *mut libc::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    tn_string_free(p);
    s
}

#[test]
fn silhouette_matches_golden() {
    let dir = fixtures().join("silhouettes");
    let xml = c(&fs::read_to_string(dir.join("05_region_overdraw.xml")).unwrap());
    let regions = c(&fs::read_to_string(dir.join("05_region_overdraw.regions")).unwrap());
    let golden = fs::read(dir.join("05_region_overdraw.ppm")).unwrap();
    let (mut data, mut len) = (ptr::null_mut(), 0);
    unsafe {
        let st = tn_silhouette_render(xml.as_ptr(), regions.as_ptr(), 144, 256, &mut data, &mut len);
        assert_eq!(st, TnStatus::Ok);
        assert_eq!(std::slice::from_raw_parts(data, len), &golden[..]);
        tn_bytes_free(data, len);
    }
    assert!(tn_last_error_message().is_null());
}

#[test]
fn errors_set_status_and_message() {
    let (mut data, mut len) = (ptr::null_mut(), 0);
    let bad = c("<node bounds=\"[0,0][oops]\"/>");
    unsafe {
        assert_eq!(
            tn_silhouette_render(ptr::null(), ptr::null(), 144, 256, &mut data, &mut len),
            TnStatus::NullArgument
        );
        assert!(last_error().contains("hierarchy_xml"));
        assert_eq!(
            tn_silhouette_render(bad.as_ptr(), ptr::null(), 144, 256, &mut data, &mut len),
            TnStatus::Parse
        );
        assert_eq!(
            tn_silhouette_render(bad.as_ptr(), ptr::null(), 0, 256, &mut data, &mut len),
            TnStatus::InvalidArgument
        );
        let mut model = ptr::null_mut();
        let missing = c("/nonexistent/model.json");
        assert_eq!(tn_model_load(missing.as_ptr(), &mut model), TnStatus::Model);
        assert!(model.is_null());
        let mut out = 0.0;
        assert_eq!(tn_percent_increase(0.0, 5.0, &mut out), TnStatus::InvalidArgument);
        assert_eq!(tn_auc(ptr::null(), 0, 1.0, &mut out), TnStatus::InvalidArgument);
    }
}

#[test]
fn detector_fires_once_per_interval() {
    let det = tn_detector_new(10_000);
    let (act, win) = (c("a.Main"), c("main"));
    let mut fired_at = Vec::new();
    unsafe {
        for t in 0..=25u64 {
            let digest = if t < 20 { 7 } else { 8 };
            let (mut fired, mut ev) = (0u8, TnTarpitEvent::default());
            let st = tn_detector_observe(det, act.as_ptr(), win.as_ptr(), digest, t * 1000, &mut fired, &mut ev);
            assert_eq!(st, TnStatus::Ok);
            if fired == 1 {
                fired_at.push((ev.stuck_since, ev.fired_at));
            }
        }
        assert_eq!(fired_at, vec![(0, 10_000)]);
        let mut fired = 0u8;
        let st = tn_detector_observe(det, act.as_ptr(), win.as_ptr(), 8, 1_000, &mut fired, ptr::null_mut());
        assert_eq!(st, TnStatus::TimeRegression);
        tn_detector_reset(det);
        tn_detector_free(det);
    }
}

#[test]
fn digest_changes_with_label_and_bounds() {
    let a = c(r#"<node class="android.widget.Button" text="OK" bounds="[0,0][100,50]" clickable="true"/>"#);
    let b = c(r#"<node class="android.widget.Button" text="Cancel" bounds="[0,0][100,50]" clickable="true"/>"#);
    let d = c(r#"<node class="android.widget.Button" text="OK" bounds="[0,0][100,60]" clickable="true"/>"#);
    let digest = |x: &CString| {
        let mut out = 0;
        assert_eq!(unsafe { tn_signature_digest(x.as_ptr(), &mut out) }, TnStatus::Ok);
        out
    };
    assert_eq!(digest(&a), digest(&a.clone()));
    assert_ne!(digest(&a), digest(&b));
    assert_ne!(digest(&a), digest(&d));
}

#[test]
fn tarpits_and_metrics() {
    let trace = c(&fs::read_to_string(fixtures().join("trace_12_screens.csv")).unwrap());
    let mut json = ptr::null_mut();
    unsafe {
        assert_eq!(tn_extract_tarpits(trace.as_ptr(), 5, 10_000, 0, &mut json), TnStatus::Ok);
        assert_eq!(take_string(json), r#"["s02","s05","s08","s12"]"#);
        let mut out = 0.0;
        let values = [0.0, 10.0, 20.0, 30.0];
        assert_eq!(tn_auc(values.as_ptr(), values.len(), 1.0, &mut out), TnStatus::Ok);
        assert_eq!(out, 45.0);
        assert_eq!(tn_percent_increase(200.0, 250.0, &mut out), TnStatus::Ok);
        assert_eq!(out, 25.0);
    }
}

#[test]
fn classify_through_a_saved_model() {
    let (model, _) = train(&synth_dataset(8, 3), 0.75, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let xml = c(&fs::read_to_string(fixtures().join("login_screen.xml")).unwrap());
    let path = c(path.to_str().unwrap());
    unsafe {
        let mut handle = ptr::null_mut();
        assert_eq!(tn_model_load(path.as_ptr(), &mut handle), TnStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(tn_classify(handle, xml.as_ptr(), ptr::null(), &mut json), TnStatus::Ok);
        let ranked: Vec<serde_json::Value> = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(ranked.len(), 21);
        let total: f64 = ranked.iter().map(|r| r["probability"].as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
        let probs: Vec<f64> = ranked.iter().map(|r| r["probability"].as_f64().unwrap()).collect();
        assert!(probs.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(tn_classify(ptr::null(), xml.as_ptr(), ptr::null(), &mut json), TnStatus::NullArgument);
        tn_model_free(handle);
    }
}
