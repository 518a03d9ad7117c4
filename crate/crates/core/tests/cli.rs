use std::path::Path;
use std::process::{Command, Output};

use freqbeam::io::{read_curve_csv, read_fit_text};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqbeam"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn fit_value(dir: &Path, key: &str) -> f64 {
    let kv = read_fit_text(&read(&dir.join("fit.txt"))).unwrap();
    kv.into_iter().find(|(k, _)| k == key).unwrap().1.parse().unwrap()
}

#[test]
fn design_reports_pump_separation() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["design", "--fsr", "201.275e9", "--m", "2"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&tmp.path().join("design.txt"));
    assert!(text.contains("pump_separation_hz = 8.0510000000000000e11"), "{text}");
    assert!(text.contains("target_delta_beta_rad_per_m = 0.0000000000000000e0"));
    assert!(text.contains("illustrative_placeholder"));
    assert!(tmp.path().join("design.json").exists());
    assert!(read(&tmp.path().join("design.csv")).starts_with("# config_hash "));

    let o = run(&["design", "--band-offset", "50e9", "--beta2", "-2e-27"], tmp.path());
    assert!(o.status.success());
    let text = read(&tmp.path().join("design.txt"));
    let line = text.lines().find(|l| l.starts_with("target_delta_beta")).unwrap();
    let db: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
    let tp = 2.0 * std::f64::consts::PI;
    let expected = 2.0 * -2e-27 * (tp * 50e9) * (tp * 805.1e9);
    assert!((db - expected).abs() < 1e-9 * expected.abs(), "{db} vs {expected}");
}

#[test]
fn analytic_limits() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["analytic", "--alpha", "0", "--detuning-hz", "300e6"], tmp.path());
    assert!(o.status.success());
    let (curve, _) = read_curve_csv(&read(&tmp.path().join("g2_cross_300mhz.csv"))).unwrap();
    let (off, _) = read_curve_csv(&read(&tmp.path().join("g2_pumps_off.csv"))).unwrap();
    for (c, r) in curve.values.iter().zip(&off.values) {
        assert!((c - 0.5 * r).abs() < 1e-15);
    }
    let o = run(&["analytic", "--alpha", "1", "--detuning-hz", "0"], tmp.path());
    assert!(o.status.success());
    let (null, _) = read_curve_csv(&read(&tmp.path().join("g2_cross_0mhz.csv"))).unwrap();
    assert!(null.values.iter().all(|&v| v == 0.0));
}

#[test]
fn default_analytic_writes_four_curves() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run(&["analytic"], tmp.path()).status.success());
    for label in ["0mhz", "300mhz", "600mhz", "5000mhz"] {
        assert!(tmp.path().join(format!("g2_cross_{label}.csv")).exists());
        assert!(tmp.path().join(format!("g2_cross_{label}.json")).exists());
    }
}

#[test]
fn simulate_then_fit_recovers_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let o = run(&["simulate", "--detuning-hz", "300e6", "--alpha", "0.95", "--seed", "5"], &sim);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit_dir = tmp.path().join("fit");
    let hist = sim.join("histogram.csv");
    let cfg = sim.join("config.txt");
    let o = Command::new(env!("CARGO_BIN_EXE_freqbeam"))
        .args(["fit", "--histogram"])
        .arg(&hist)
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&fit_dir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = fit_value(&fit_dir, "visibility");
    let s = fit_value(&fit_dir, "visibility_sigma");
    assert!((a - 0.95).abs() < 2.0 * s, "{a} ± {s}");
    for f in ["fit.csv", "fit.json", "g2_measured.csv", "g2_model.json", "manifest.json"] {
        assert!(fit_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn repeated_seed_gives_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--duration-s", "60", "--seed", "3"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    for f in ["histogram.csv", "histogram.json", "events.txt", "manifest.json"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    // The resolved config reproduces the run.
    let c = tmp.path().join("c");
    let o = Command::new(env!("CARGO_BIN_EXE_freqbeam"))
        .args(["simulate", "--config"])
        .arg(a.join("config.txt"))
        .arg("--out-dir")
        .arg(&c)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(read(&a.join("histogram.csv")), read(&c.join("histogram.csv")));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.txt");
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_freqbeam"))
        .args(["simulate", "--config"])
        .arg(&bad)
        .arg("--out-dir")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["simulate", "--alpha", "2"], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["design", "--m", "0"], tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--bogus"], tmp.path()).status.code(), Some(2));

    // Too short to collect any normalization counts: a numerical failure.
    let sim = tmp.path().join("short");
    assert!(run(&["simulate", "--duration-s", "1e-3"], &sim).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_freqbeam"))
        .args(["fit", "--histogram"])
        .arg(sim.join("histogram.csv"))
        .arg("--out-dir")
        .arg(tmp.path().join("fit"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn report_is_regenerable_from_event_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let args = [
        "report",
        "--rows",
        "300e6:0.95",
        "--duration-s",
        "3600",
        "--auto-duration-s",
        "7200",
    ];
    let o = run(&args, &first);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("alpha_r") && stdout.contains("alpha_f"));

    let second = tmp.path().join("second");
    let o = Command::new(env!("CARGO_BIN_EXE_freqbeam"))
        .arg("report")
        .arg("--from")
        .arg(&first)
        .arg("--out-dir")
        .arg(&second)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "report.csv",
        "report.json",
        "row_0_cross_300mhz/fit.csv",
        "row_0_cross_300mhz/histogram.csv",
        "row_1_auto_0mhz/fit.txt",
        "row_1_auto_0mhz/g2_measured.csv",
    ] {
        assert_eq!(read(&first.join(f)), read(&second.join(f)), "{f}");
    }
    let report = read(&first.join("report.csv"));
    let header = report.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("mode,detuning_hz,alpha_model,alpha_r,alpha_r_sigma,alpha_f"));
    assert_eq!(report.lines().filter(|l| l.starts_with("auto,")).count(), 1);
}
