use std::path::Path;
use std::process::{Command, Output};

fn rbnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbnoise")).args(args).env("RUST_LOG", "error").output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest_checksums(dir: &Path) -> serde_json::Value {
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    m["checksums"].clone()
}

#[test]
fn list_experiments_is_stable() {
    let a = rbnoise(&["list-experiments"]);
    let b = rbnoise(&["list-experiments"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(
        names,
        ["fig1_comparison", "fig2_telegraph", "fig3_zz", "fig4_gates", "appF_spectrum", "appD_rto", "appH_devices", "custom"]
    );
    assert!(text.lines().take(7).all(|l| l.contains("Fig. ")));
}

#[test]
fn unknown_experiment_exits_2() {
    let o = rbnoise(&["--experiment", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown experiment 'fig9'"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "experiment = \"fig9\"\n").unwrap();
    let o = rbnoise(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1: error"), "{}", stderr(&o));
}

#[test]
fn validate_only_reports_line_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, "experiment = \"fig2_telegraph\"\nseed = 1\n").unwrap();
    let o = rbnoise(&["--config", good.to_str().unwrap(), "--validate-only"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!dir.path().join("results").exists());

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "experiment = \"fig2_telegraph\"\n\n[noise]\nt1 = -2e-5\n").unwrap();
    let o = rbnoise(&["--config", bad.to_str().unwrap(), "--validate-only"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4: error: noise.t1"), "{}", stderr(&o));

    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "experiment = \"fig2_telegraph\"\ncolour = 3\n").unwrap();
    let o = rbnoise(&["--config", unknown.to_str().unwrap(), "--validate-only"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2: error") && stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn fig2_runs_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let o = rbnoise(&["--experiment", "fig2_telegraph", "--seed", "1", "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["rb_ramsey.csv", "telegraph_fit.txt", "asymptotes.csv", "manifest.json"] {
        assert!(a.join(name).exists(), "{name}");
    }
    let sums = manifest_checksums(&a);
    assert_eq!(sums, manifest_checksums(&b));
    let sums = sums.as_object().unwrap();
    assert_eq!(sums.len(), 5);
    for name in sums.keys() {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn numeric_failure_exits_3() {
    // a single idle point leaves the T1-fixed telegraph fit underdetermined
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "experiment = \"custom\"\n[custom]\nprotocol = \"rb_ramsey\"\nfit = { telegraph = true }\n\
         [protocol]\nn_sequences = 5\ntau_values = [1e-7]\nm_grid = { mode = \"explicit\", lengths = [1, 5] }\n\
         [protocol.noise]\nt1 = 2e-5\n",
    )
    .unwrap();
    let o = rbnoise(&["--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("fit error"), "{}", stderr(&o));
}
