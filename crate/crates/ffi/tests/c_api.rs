use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use nles_ffi::*;

const SMALL: &str = "[grid]\nn = 32\n[nudged]\nmodel = \"nse\"\n[observation]\nk_c = 5\n[harness]\nt_end = 1.0\nspinup_time = 0.5\nrecord_interval = 0.25\n";

fn last_error() -> String {
    let p = nles_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(doc: &str) -> *mut NlesExperiment {
    let text = CString::new(doc).unwrap();
    let mut exp = ptr::null_mut();
    let st = unsafe { nles_experiment_parse(text.as_ptr(), &mut exp) };
    assert_eq!(st, NlesStatus::Ok, "{}", last_error());
    exp
}

#[test]
fn mode_count_matches_reference_setup() {
    let mut count = 0usize;
    let st = unsafe { nles_observed_mode_count(3, 256, 9, &mut count) };
    assert_eq!(st, NlesStatus::Ok);
    assert_eq!(count, 2968);
    let st = unsafe { nles_observed_mode_count(4, 256, 9, &mut count) };
    assert_eq!(st, NlesStatus::InvalidParameter);
    assert!(last_error().contains("grid"));
}

#[test]
fn parse_errors_set_message() {
    let text = CString::new("[nudged]\ncfl = 1.5\n").unwrap();
    let mut exp = ptr::null_mut();
    let st = unsafe { nles_experiment_parse(text.as_ptr(), &mut exp) };
    assert_eq!(st, NlesStatus::InvalidParameter);
    assert!(exp.is_null());
    assert!(last_error().contains("cfl must be in (0,1]"));

    let text = CString::new("[nudged]\nmuu = 3\n").unwrap();
    let st = unsafe { nles_experiment_parse(text.as_ptr(), &mut exp) };
    assert_eq!(st, NlesStatus::Config);
    assert!(last_error().contains("did you mean `mu`"));
}

#[test]
fn null_pointers_are_rejected() {
    let mut exp = ptr::null_mut();
    assert_eq!(
        unsafe { nles_experiment_parse(ptr::null(), &mut exp) },
        NlesStatus::NullPointer
    );
    let mut series = ptr::null_mut();
    assert_eq!(
        unsafe { nles_run_twin(ptr::null(), &mut series) },
        NlesStatus::NullPointer
    );
    assert_eq!(unsafe { nles_series_len(ptr::null()) }, 0);
    unsafe {
        nles_experiment_free(ptr::null_mut());
        nles_series_free(ptr::null_mut());
    }
}

#[test]
fn serialize_reports_needed_size() {
    let exp = parse(SMALL);
    let mut needed = 0usize;
    let st = unsafe { nles_experiment_serialize(exp, ptr::null_mut(), 0, &mut needed) };
    assert_eq!(st, NlesStatus::BufferTooSmall);
    let mut buf = vec![0 as std::ffi::c_char; needed];
    let st = unsafe { nles_experiment_serialize(exp, buf.as_mut_ptr(), buf.len(), &mut needed) };
    assert_eq!(st, NlesStatus::Ok);
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_owned();
    let again = parse(&text);
    unsafe {
        nles_experiment_free(exp);
        nles_experiment_free(again);
    }
}

#[test]
fn twin_run_through_handles() {
    let exp = parse(SMALL);
    assert_eq!(unsafe { nles_experiment_set_seed(exp, 4) }, NlesStatus::Ok);
    assert_eq!(
        unsafe { nles_experiment_set_t_end(exp, -1.0) },
        NlesStatus::InvalidParameter
    );
    let mut series = ptr::null_mut();
    assert_eq!(unsafe { nles_run_twin(exp, &mut series) }, NlesStatus::Ok);
    let len = unsafe { nles_series_len(series) };
    assert_eq!(len, 5);

    let mut times = vec![0.0; len];
    let st = unsafe { nles_series_column(series, NlesSeriesColumn::Time, times.as_mut_ptr(), len) };
    assert_eq!(st, NlesStatus::Ok);
    assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    let mut small = [0.0; 2];
    let st = unsafe { nles_series_column(series, NlesSeriesColumn::L2Rel, small.as_mut_ptr(), 2) };
    assert_eq!(st, NlesStatus::BufferTooSmall);

    let mut rel = vec![0.0; len];
    unsafe { nles_series_column(series, NlesSeriesColumn::L2Rel, rel.as_mut_ptr(), len) };
    assert!(rel[len - 1] < rel[0]);

    let mut plateau = 0.0;
    assert_eq!(
        unsafe { nles_series_plateau(series, 0.25, &mut plateau) },
        NlesStatus::Ok
    );
    assert!(plateau > 0.0);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("s.csv").to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { nles_series_write_csv(series, path.as_ptr()) },
        NlesStatus::Ok
    );
    let bad = CString::new("/nonexistent-dir/s.csv").unwrap();
    assert_eq!(
        unsafe { nles_series_write_csv(series, bad.as_ptr()) },
        NlesStatus::Io
    );
    assert!(last_error().contains("/nonexistent-dir/s.csv"));
    unsafe {
        nles_series_free(series);
        nles_experiment_free(exp);
    }
}

#[test]
fn condition_report_for_reference_parameters() {
    let exp = parse("[grid]\ndim = 3\nn = 16\n[observation]\nk_c = 9\n");
    let mut report = NlesConditionReport::default();
    assert_eq!(
        unsafe { nles_validate_conditions(exp, &mut report) },
        NlesStatus::Ok
    );
    let expected = 2.0 * 30.0 * (1.0f64 / 9.0).powi(2);
    assert!((report.sync_h_lhs - expected).abs() < 1e-12);
    assert!(report.sync_h_lhs > report.nu);
    assert!(report.warnings >= 2);
    unsafe { nles_experiment_free(exp) };
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(nles_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include").join("nles.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "nles_experiment_parse",
        "nles_run_twin",
        "nles_series_column",
        "nles_last_error_message",
        "nles_observed_mode_count",
        "typedef struct NlesExperiment NlesExperiment;",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
    let archive = profile_dir().join("libnles_ffi.a");
    assert!(archive.exists(), "{} not built", archive.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("examples").join("smoke.c"))
        .arg(&archive)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("observed modes: 2968"), "{stdout}");
    assert!(stdout.contains("rejected: invalid `nudged.cfl`"), "{stdout}");
}
