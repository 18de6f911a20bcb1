use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nles::output::read_series;

const SMALL: &str = "[grid]\nn = 32\n[reference]\nmodel = \"ladyzhenskaya\"\n[nudged]\nmodel = \"ladyzhenskaya\"\n\
[observation]\nk_c = 5\n[harness]\nt_end = 1.0\nspinup_time = 0.5\nrecord_interval = 0.25\nnudged_start = \"reference\"\n";

fn nles(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nles"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn text(out: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    )
}

#[test]
fn oracle_suites_pass() {
    let out = nles(&["oracle", "--suite", "convolution"]);
    assert!(out.status.success(), "{}", text(&out));
    assert!(text(&out).lines().all(|l| l.starts_with("PASS")));
    let out = nles(&["oracle", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn twin_writes_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "self.toml", SMALL);
    let out_dir = dir.path().join("out");
    let out = nles(&["twin", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out));
    let series = read_series(&out_dir.join("series.csv")).unwrap();
    assert_eq!(series.times.len(), 5);
    assert!(series.l2_rel.iter().all(|e| *e < 1e-9), "{:?}", series.l2_rel);
    assert!(series.metadata.iter().any(|(k, _)| k == "experiment"));
}

#[test]
fn seed_flag_is_deterministic_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "nse.toml",
        "[grid]\nn = 16\n[nudged]\nmodel = \"nse\"\n[observation]\nk_c = 3\n[harness]\nt_end = 0.5\nspinup_time = 0.2\n",
    );
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = nles(&[
            "twin",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", text(&out));
        std::fs::read_to_string(out_dir.join("series.csv")).unwrap()
    };
    let a = run("11", "a");
    let b = run("11", "b");
    let c = run("12", "c");
    assert!(a.contains("# override.harness.seed = 11"));
    let body = |s: &str| s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&a), body(&b));
    assert_ne!(body(&a), body(&c));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[nudged]\ncfl = 1.5\n");
    let out = nles(&["twin", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("cfl"), "{}", text(&out));

    let typo = write(dir.path(), "typo.toml", "[nudged]\nnu_barr = 1e-6\n");
    let out = nles(&["twin", typo.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("did you mean `nu_bar`"), "{}", text(&out));

    let out = nles(&["twin", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_needs_three_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "self.toml", SMALL);
    let out = nles(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--nu-bar",
        "1e-6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("need >= 3 values"), "{}", text(&out));
}

#[test]
fn validate_flags_3d_sync_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tg.toml",
        "[grid]\ndim = 3\nn = 16\n[reference]\nforcing = \"taylor_green_3d\"\n[nudged]\nc_s = 0.17\n[observation]\nk_c = 3\n",
    );
    let out = nles(&["validate", cfg.to_str().unwrap(), "--samples", "10"]);
    assert!(out.status.success(), "{}", text(&out));
    let report = text(&out);
    assert!(report.contains("[WARN]"), "{report}");
    assert!(report.contains("Grashof"), "{report}");
    assert!(report.contains("note:"), "{report}");
}

#[test]
fn dns_checkpoints_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dns.toml",
        "[grid]\nn = 16\n[harness]\nt_end = 0.2\nspinup_time = 0.0\nrecord_interval = 0.1\n",
    );
    let out_dir = dir.path().join("dns");
    let out = nles(&["dns", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out));
    for name in ["checkpoint_00001.bin", "checkpoint_00002.bin", "spectrum_00002.csv"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let resumed = dir.path().join("resumed");
    let out = nles(&[
        "dns",
        cfg.to_str().unwrap(),
        "--resume",
        out_dir.join("checkpoint_00001.bin").to_str().unwrap(),
        "--out",
        resumed.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out));
    assert_eq!(
        std::fs::read(resumed.join("checkpoint_00002.bin")).unwrap(),
        std::fs::read(out_dir.join("checkpoint_00002.bin")).unwrap()
    );
    assert!(!resumed.join("checkpoint_00001.bin").exists());
}
