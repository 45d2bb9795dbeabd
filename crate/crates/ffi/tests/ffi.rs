use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use convlab::{dual_norm_eval, norm_eval, NormSpec, Vector, Window};
use convlab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = convlab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    convlab_string_free(s);
    out
}

fn sample() -> Vector {
    Vector::from_fracs(&Window::range(0, 3), &[(1, 1, 2), (3, -1, 1)]).unwrap()
}

unsafe fn sample_handle() -> *mut ConvlabVector {
    let mut x = ptr::null_mut();
    assert_eq!(convlab_vector_new(0, 3, &mut x), ConvlabStatus::Ok);
    assert_eq!(convlab_vector_set(x, 1, c("1/2").as_ptr()), ConvlabStatus::Ok);
    assert_eq!(convlab_vector_set(x, 3, c("-1").as_ptr()), ConvlabStatus::Ok);
    x
}

#[test]
fn norms_match_the_library() {
    for (json, spec) in [
        (r#"{"kind":"bvC0"}"#, NormSpec::BvC0),
        (r#"{"kind":"ell1"}"#, NormSpec::Ell1),
        (r#"{"kind":"ell2"}"#, NormSpec::Ell2),
    ] {
        unsafe {
            let mut norm = ptr::null_mut();
            assert_eq!(convlab_norm_parse(c(json).as_ptr(), 0, 3, &mut norm), ConvlabStatus::Ok);
            let x = sample_handle();
            let (mut v, mut exact) = (0.0, ptr::null_mut());
            assert_eq!(convlab_norm_eval(norm, x, &mut v, &mut exact), ConvlabStatus::Ok);
            let want = norm_eval(&spec, &sample()).unwrap();
            assert_eq!(take(exact), want.to_string());
            assert_eq!(v, want.to_f64());

            assert_eq!(convlab_dual_norm_eval(norm, x, &mut v, ptr::null_mut()), ConvlabStatus::Ok);
            assert_eq!(v, dual_norm_eval(&spec, &sample().to_functional()).unwrap().to_f64());
            convlab_vector_free(x);
            convlab_norm_free(norm);
        }
    }
}

#[test]
fn errors_carry_a_status_and_message() {
    unsafe {
        let mut norm = ptr::null_mut();
        assert_eq!(
            convlab_norm_parse(c(r#"{"kind":"lp"}"#).as_ptr(), 0, 3, &mut norm),
            ConvlabStatus::Config
        );
        assert!(norm.is_null());
        assert!(last_error().contains("kind"));
        assert_eq!(convlab_norm_parse(ptr::null(), 0, 3, &mut norm), ConvlabStatus::NullArgument);
        assert_eq!(convlab_norm_parse(c("{}").as_ptr(), 4, 3, &mut norm), ConvlabStatus::Window);

        let x = sample_handle();
        assert_eq!(convlab_vector_set(x, 7, c("1").as_ptr()), ConvlabStatus::Window);
        assert_eq!(convlab_vector_set(x, 0, c("1/0").as_ptr()), ConvlabStatus::Config);
        assert!(last_error().contains("1/0"));
        let bad = [0xffu8, 0];
        assert_eq!(convlab_vector_set(x, 0, bad.as_ptr().cast()), ConvlabStatus::InvalidUtf8);

        // a vector outside the norm's window
        let mut small = ptr::null_mut();
        assert_eq!(convlab_norm_parse(c(r#"{"kind":"ell1"}"#).as_ptr(), 0, 1, &mut small), ConvlabStatus::Ok);
        let mut v = 0.0;
        assert_eq!(convlab_norm_eval(small, x, &mut v, ptr::null_mut()), ConvlabStatus::Window);
        assert_eq!(convlab_norm_eval(small, ptr::null(), &mut v, ptr::null_mut()), ConvlabStatus::NullArgument);
        convlab_norm_free(small);
        convlab_vector_free(x);
    }
}

#[test]
fn last_error_is_per_thread() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(convlab_repro(c("nope").as_ptr(), &mut r), ConvlabStatus::Config);
    }
    std::thread::spawn(|| assert!(convlab_last_error().is_null())).join().unwrap();
    assert!(last_error().contains("nope"));
}

#[test]
fn reports_round_trip_through_json() {
    let scenario = r#"{
        "name": "shrinking",
        "window": {"lo": 0, "hi": 1},
        "norm": {"kind": "supC0"},
        "horizon": 32,
        "sequence": {
            "generator": {"kind": "ball", "radius": "1 + 1/n"},
            "limit": {"kind": "ball", "radius": "1"}
        },
        "families": {"pts": {"kind": "points", "members": {"a": [[0, "2"]]}}},
        "checks": [{"check": "wijsman", "family": "pts", "expect": "refuted"}]
    }"#;
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(convlab_run_scenario_json(c(scenario).as_ptr(), &mut r), ConvlabStatus::Ok);
        assert_eq!(convlab_report_all_matched(r), 0);
        let mut json = ptr::null_mut();
        assert_eq!(convlab_report_json(r, &mut json), ConvlabStatus::Ok);
        let rep = convlab::scenario::Report::from_json(&take(json)).unwrap();
        assert_eq!(rep.results[0].observed, "supported");
        convlab_report_free(r);

        assert_eq!(convlab_repro(c("ell1_kadec_fail").as_ptr(), &mut r), ConvlabStatus::Ok);
        assert_eq!(convlab_report_all_matched(r), 1);
        convlab_report_free(r);
        assert_eq!(convlab_report_all_matched(ptr::null()), -1);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/convlab.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "convlab_version",
        "convlab_last_error",
        "convlab_string_free",
        "convlab_norm_parse",
        "convlab_norm_eval",
        "convlab_dual_norm_eval",
        "convlab_vector_new",
        "convlab_vector_set",
        "convlab_run_scenario_json",
        "convlab_repro",
        "convlab_report_json",
        "convlab_report_all_matched",
        "convlab_report_free",
        "CONVLAB_STATUS_PANIC = 7",
    ] {
        assert!(h.contains(name), "{name} missing from the header");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    // target/<profile>/deps/<this test> -> target/<profile>/libconvlab_ffi.a
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().unwrap().parent().unwrap().join("libconvlab_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let built = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(built.status.success(), "{}", String::from_utf8_lossy(&built.stderr));

    let run = Command::new(&bin).output().unwrap();
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    let want = norm_eval(&NormSpec::BvC0, &sample()).unwrap();
    assert!(stdout.contains(&format!("norm {want} ")), "{stdout}");
    assert!(stdout.contains("error index 9 is outside the window"), "{stdout}");
    assert!(stdout.contains("matched 1 json"), "{stdout}");
    assert!(stdout.contains(&format!("version {}", env!("CARGO_PKG_VERSION"))));
}
