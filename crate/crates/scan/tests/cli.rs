//! End-to-end runs of the `lagrange` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lagrange_core::curves::{gamma_k, CurveOptions};
use tempfile::TempDir;

fn lagrange(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lagrange"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

/// Class column of a scan CSV, keyed by (beta, e).
fn classes(csv: &str) -> Vec<(f64, f64, String)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].to_string())
        })
        .collect()
}

#[test]
fn scan_default_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "cache_dir = cache-a\nout_dir = out-a\n");
    let o = lagrange(dir.path(), &["--config", &cfg, "--threads", "1", "scan"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("computed"));

    let csv = fs::read_to_string(dir.path().join("out-a/scan.csv")).unwrap();
    let cells = classes(&csv);
    assert_eq!(cells.len(), 100);
    let has = |c: &str| cells.iter().any(|x| x.2 == c);
    assert!(has("EE") && has("EH") && (has("HH") || has("CS")));
    assert!(!has("ERR"));

    let ppm = fs::read(dir.path().join("out-a/scan_classes.ppm")).unwrap();
    assert_eq!(&ppm[..13], b"P6\n10 10\n255\n");
    assert_eq!(ppm.len(), 13 + 300);

    // hyperbolic beyond the boundary curve
    let opts = CurveOptions::default();
    let mut checked = 0;
    let mut es: Vec<f64> = cells.iter().map(|c| c.1).collect();
    es.dedup();
    for e in es {
        let bk = gamma_k(e, &opts).unwrap().point.beta;
        for (beta, ce, class) in &cells {
            if *ce == e && *beta > bk + 1e-6 {
                assert!(class == "HH" || class == "CS", "({beta}, {e}) is {class}, beta_k = {bk}");
                checked += 1;
            }
        }
    }
    assert!(checked > 50);

    // a different thread count, then a cache hit, give the same bytes
    let cfg_b = write_config(dir.path(), "b.cfg", "cache_dir = cache-b\nout_dir = out-b\n");
    let o = lagrange(dir.path(), &["--config", &cfg_b, "--threads", "4", "scan"]);
    assert!(o.status.success());
    assert_eq!(fs::read(dir.path().join("out-b/scan.csv")).unwrap(), csv.as_bytes());
    let o = lagrange(dir.path(), &["--config", &cfg_b, "--out", "out-c", "scan"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("cached"));
    assert_eq!(fs::read(dir.path().join("out-c/scan.csv")).unwrap(), csv.as_bytes());
    assert_eq!(fs::read(dir.path().join("out-c/scan_classes.ppm")).unwrap(), ppm);
}

#[test]
fn circular_row_transitions() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "row.cfg",
        "beta_min = 0.125\nbeta_max = 8.875\nbeta_steps = 36\ne_min = 0\ne_max = 0.1\ne_steps = 2\n\
         index_layer = true\nn_modes = 32\n",
    );
    let o = lagrange(dir.path(), &["--config", &cfg, "scan"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/scan.csv")).unwrap();
    for (beta, e, class) in classes(&csv) {
        if e == 0.0 {
            let want = if beta < 1.0 { "EE" } else { "CS" };
            assert_eq!(class, want, "beta = {beta}");
        }
    }
    let pgm = fs::read(dir.path().join("out/scan_i_minus1.pgm")).unwrap();
    assert_eq!(&pgm[..12], b"P5\n36 2\n255\n");
    assert_eq!(pgm.len(), 12 + 72);
    // bottom row is e = 0: i_-1 is 2 below 3/4 and 0 above
    let row = &pgm[12 + 36..];
    assert_eq!(row[0], 254);
    assert_eq!(row[35], 0);
}

#[test]
fn index_examples() {
    let dir = TempDir::new().unwrap();
    let o = lagrange(dir.path(), &["index", "--beta", "0.5", "--e", "0"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("operator: i_omega = 2, nu_omega = 0"), "{s}");
    assert!(s.contains("path:     i_omega = 2, nu_omega = 0"), "{s}");
    assert!(s.contains("methods agree"));

    let o = lagrange(dir.path(), &["index", "--beta", "0.75", "--e", "0", "--omega-theta", "3.141592653589793"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("nu_omega = 2"), "{s}");
    assert!(s.contains("skipped"), "{s}");

    for th in ["0.7", "3.141592653589793", "5.5"] {
        let o = lagrange(dir.path(), &["index", "--beta", "9", "--e", "0.5", "--omega-theta", th]);
        assert!(o.status.success());
        let s = stdout(&o);
        assert!(s.contains("operator: i_omega = 0, nu_omega = 0"), "{s}");
        assert!(s.contains("path:     i_omega = 0"), "{s}");
    }
}

#[test]
fn monodromy_report() {
    let dir = TempDir::new().unwrap();
    let o = lagrange(dir.path(), &["--out", "m", "monodromy", "--beta", "9", "--e", "0.5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("class HH"), "{s}");
    assert!(s.contains("nu_1 = 0, nu_-1 = 0"));
    assert!(dir.path().join("m/monodromy_path.csv").exists());
}

#[test]
fn curves_small_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.cfg",
        "curves_e_min = -0.4\ncurves_e_max = 0.4\ncurves_e_steps = 5\nfan_thetas = 1.0\n",
    );
    let o = lagrange(dir.path(), &["--config", &cfg, "curves"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!stdout(&o).contains("partial"));

    let read = |name: &str| -> Vec<(String, f64, f64)> {
        let text = fs::read_to_string(dir.path().join("out").join(name)).unwrap();
        assert_eq!(text.lines().next(), Some("label,omega_theta,e,beta,residual,N"));
        text.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].to_string(), f[2].parse().unwrap(), f[3].parse().unwrap())
            })
            .collect()
    };
    let minus = read("curves_minus_one.csv");
    let at = |rows: &[(String, f64, f64)], label: &str, e: f64| -> f64 {
        rows.iter()
            .find(|r| r.0 == label && (r.1 - e).abs() < 1e-12)
            .unwrap_or_else(|| panic!("{label} at {e}"))
            .2
    };
    assert!((at(&minus, "GAMMA_S", 0.0) - 0.75).abs() < 1e-6);
    assert!((at(&minus, "GAMMA_M", 0.0) - 0.75).abs() < 1e-6);
    let gk = read("gamma_k.csv");
    assert!((at(&gk, "GAMMA_K", 0.0) - 1.0).abs() < 1e-6);
    for e in [0.2, 0.4] {
        for (rows, label) in [(&minus, "GAMMA_S"), (&minus, "GAMMA_M"), (&gk, "GAMMA_K")] {
            assert!((at(rows, label, e) - at(rows, label, -e)).abs() < 1e-6, "{label} at {e}");
        }
    }
    assert!(!read("omega_fan.csv").is_empty());
    let ppm = fs::read(dir.path().join("out/curves_overlay.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n720 400\n255\n"));
}

#[test]
fn verify_subset_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let o = lagrange(dir.path(), &["verify", "--only", "10,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 2);
    for l in &lines {
        assert!(l.starts_with("{\"id\":") && l.contains("\"pass\":true"), "{l}");
    }
    let report = fs::read_to_string(dir.path().join("out/verify.jsonl")).unwrap();
    assert_eq!(report.lines().count(), 2);

    let loose = write_config(dir.path(), "loose.cfg", "rel_tol = 1e-3\nabs_tol = 1e-3\n");
    let o = lagrange(dir.path(), &["--config", &loose, "verify", "--only", "1,2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().all(|l| l.contains("\"pass\":false")));
}

#[test]
fn usage_and_config_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(lagrange(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(lagrange(dir.path(), &["index", "--beta", "1"]).status.code(), Some(2));
    assert_eq!(lagrange(dir.path(), &["verify", "--only", "99"]).status.code(), Some(2));
    let bad = write_config(dir.path(), "bad.cfg", "beta_steps = 1\n");
    assert_eq!(lagrange(dir.path(), &["--config", &bad, "scan"]).status.code(), Some(2));
    let unknown = write_config(dir.path(), "unknown.cfg", "colour = blue\n");
    assert_eq!(lagrange(dir.path(), &["--config", &unknown, "scan"]).status.code(), Some(2));
    assert_eq!(lagrange(dir.path(), &["--config", "missing.cfg", "scan"]).status.code(), Some(2));
    // parameters outside the model are a numerical failure, not a usage error
    assert_eq!(lagrange(dir.path(), &["monodromy", "--beta", "10", "--e", "0"]).status.code(), Some(3));
}

#[test]
fn curves_notes_record_slope_assignment() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "n.cfg", "curves_e_min = 0.3\ncurves_e_max = 0.5\ncurves_e_steps = 3\n");
    let o = lagrange(dir.path(), &["--config", &cfg, "curves"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let notes = fs::read_to_string(dir.path().join("out/curves_notes.txt")).unwrap();
    assert!(notes.contains("E1 -1.436"), "{notes}");
    assert!(notes.contains("E2 +1.436"), "{notes}");
    // Gamma_m and Gamma_k coincide to solver precision on this range
    assert!(notes.contains("beta_k - beta_m within"), "{notes}");
}
