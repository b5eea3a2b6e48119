//! Subcommand implementations. Each writes its files under the configured
//! output directory and returns a short human-readable summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use lagrange_core::curves::{
    gamma_k_curve, minus_one_curves, omega_fan, slope_at_origin, CurveLabel, CurveOptions, CurveTable,
};
use lagrange_core::index::{index_both, PathIndexOptions};
use lagrange_core::monodromy::integrate_gamma;
use lagrange_core::symplectic::classify;
use lagrange_core::{Params, C64};

use crate::config::ScanConfig;
use crate::grid::{scan_with_cache, RegionGrid};
use crate::raster::{self, Image, Rgb};
use crate::verify::{self, CriterionReport, VerifyOptions};

fn out_file(cfg: &ScanConfig, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let path = cfg.out_dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(f)))
}

pub struct ScanOutcome {
    pub grid: RegionGrid,
    pub cache_hit: bool,
    pub files: Vec<PathBuf>,
}

impl ScanOutcome {
    pub fn summary(&self) -> String {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for c in &self.grid.cells {
            *counts.entry(c.code()).or_default() += 1;
        }
        let mut s = format!(
            "{} x {} cells ({})\n",
            self.grid.betas.len(),
            self.grid.es.len(),
            if self.cache_hit { "cached" } else { "computed" }
        );
        for (k, v) in counts {
            let _ = writeln!(s, "  {k:<10} {v}");
        }
        for f in &self.files {
            let _ = writeln!(s, "wrote {}", f.display());
        }
        s
    }
}

pub fn cmd_scan(cfg: &ScanConfig) -> Result<ScanOutcome> {
    let (grid, cache_hit) = scan_with_cache(cfg)?;
    let mut files = Vec::new();

    let (path, mut w) = out_file(cfg, "scan.csv")?;
    w.write_all(grid.to_csv().as_bytes())?;
    w.flush()?;
    files.push(path);

    let (path, mut w) = out_file(cfg, "scan_classes.ppm")?;
    grid.class_image().write_ppm(&mut w)?;
    w.flush()?;
    files.push(path);

    if cfg.index_layer {
        let (path, mut w) = out_file(cfg, "scan_i_minus1.pgm")?;
        raster::write_pgm(&mut w, grid.betas.len(), grid.es.len(), &grid.index_layer_values())?;
        w.flush()?;
        files.push(path);
    }
    Ok(ScanOutcome { grid, cache_hit, files })
}

fn curve_options(cfg: &ScanConfig) -> CurveOptions {
    CurveOptions {
        n_modes: cfg.n_modes,
        class_tol: cfg.class_tol,
        integrator: cfg.integrator(),
        keep_going: true,
        ..Default::default()
    }
}

fn label_color(label: CurveLabel) -> Rgb {
    match label {
        CurveLabel::GammaS => [230, 120, 0],
        CurveLabel::GammaM => [140, 0, 170],
        CurveLabel::GammaK => [0, 0, 0],
        CurveLabel::E1 | CurveLabel::E2 => [0, 140, 140],
        CurveLabel::Beta1 | CurveLabel::Beta2 => [160, 160, 160],
    }
}

/// Draws each table as a polyline on a `beta x e` canvas.
pub fn overlay(tables: &[&CurveTable], e_min: f64, e_max: f64) -> Image {
    let (w, h) = (720usize, 400usize);
    let mut img = Image::filled(w, h, raster::WHITE);
    let to_px = |beta: f64, e: f64| -> (f64, f64) {
        let x = beta / 9.0 * (w - 1) as f64;
        let y = (e_max - e) / (e_max - e_min) * (h - 1) as f64;
        (x, y)
    };
    for t in tables {
        let c = label_color(t.label);
        for pair in t.points.windows(2) {
            let (x0, y0) = to_px(pair[0].beta, pair[0].e);
            let (x1, y1) = to_px(pair[1].beta, pair[1].e);
            let steps = ((x1 - x0).abs().max((y1 - y0).abs()).ceil() as usize).max(1);
            for i in 0..=steps {
                let s = i as f64 / steps as f64;
                let (x, y) = (x0 + s * (x1 - x0), y0 + s * (y1 - y0));
                if x >= 0.0 && y >= 0.0 {
                    img.set(x.round() as usize, y.round() as usize, c);
                }
            }
        }
    }
    img
}

pub struct CurvesOutcome {
    pub tables: Vec<CurveTable>,
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl CurvesOutcome {
    pub fn partial(&self) -> bool {
        self.tables.iter().any(CurveTable::is_partial)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for t in &self.tables {
            let _ = writeln!(
                s,
                "{:<8} theta {:.6}: {} points{}",
                t.label,
                lagrange_core::curves::omega_theta(t.omega),
                t.points.len(),
                if t.is_partial() { " (partial)" } else { "" }
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        for f in &self.files {
            let _ = writeln!(s, "wrote {}", f.display());
        }
        s
    }
}

fn write_tables(cfg: &ScanConfig, name: &str, tables: &[&CurveTable]) -> Result<PathBuf> {
    let (path, mut w) = out_file(cfg, name)?;
    writeln!(w, "{}", CurveTable::CSV_HEADER)?;
    for t in tables {
        t.write_rows(&mut w)?;
    }
    w.flush()?;
    Ok(path)
}

pub fn cmd_curves(cfg: &ScanConfig) -> Result<CurvesOutcome> {
    let opts = curve_options(cfg);
    let grid = cfg.curves_e_grid();
    let m = minus_one_curves(&grid, &opts)?;
    let k = gamma_k_curve(&grid, &opts)?;
    let fan = if cfg.fan_thetas.is_empty() {
        Vec::new()
    } else {
        omega_fan(&grid, &cfg.fan_thetas, &opts)?
    };

    let mut files = vec![
        write_tables(cfg, "curves_minus_one.csv", &m.tables())?,
        write_tables(cfg, "gamma_k.csv", &[&k])?,
    ];
    if !fan.is_empty() {
        files.push(write_tables(cfg, "omega_fan.csv", &fan.iter().collect::<Vec<_>>())?);
    }

    let mut notes = Vec::new();
    let minus = C64::new(-1.0, 0.0);
    match (
        slope_at_origin(CurveLabel::E1, minus, 0.01, &opts),
        slope_at_origin(CurveLabel::E2, minus, 0.01, &opts),
    ) {
        (Ok(s1), Ok(s2)) => notes.push(format!("slope at e = 0 (central, h = 0.01): E1 {s1:+.6}, E2 {s2:+.6}")),
        (r1, r2) => notes.push(format!("slope at e = 0 unavailable: {:?} {:?}", r1.err(), r2.err())),
    }
    // where Gamma_m and Gamma_k cannot be told apart
    let close: Vec<f64> = k
        .points
        .iter()
        .filter_map(|p| m.gamma_m.beta_at(p.e).map(|bm| (p.e, p.beta - bm)))
        .filter(|&(_, gap)| gap.abs() <= 10.0 * opts.bisection_tol)
        .map(|(e, _)| e)
        .collect();
    if let (Some(lo), Some(hi)) = (close.first(), close.last()) {
        notes.push(format!(
            "beta_k - beta_m within {:.0e} at {} grid points, e in [{lo:.4}, {hi:.4}]",
            10.0 * opts.bisection_tol,
            close.len()
        ));
    }
    let mut all: Vec<CurveTable> = m.tables().into_iter().cloned().collect();
    all.push(k);
    all.extend(fan);
    for t in &all {
        for n in &t.notes {
            notes.push(format!("{}: {n}", t.label));
        }
        for (e, err) in &t.failures {
            notes.push(format!("{}: e = {e}: {err}", t.label));
        }
    }
    notes.dedup();

    let drawn: Vec<&CurveTable> = all.iter().filter(|t| !matches!(t.label, CurveLabel::E1 | CurveLabel::E2)).collect();
    let (path, mut w) = out_file(cfg, "curves_overlay.ppm")?;
    overlay(&drawn, cfg.curves_e_min, cfg.curves_e_max).write_ppm(&mut w)?;
    w.flush()?;
    files.push(path);

    if !notes.is_empty() {
        let (path, mut w) = out_file(cfg, "curves_notes.txt")?;
        for n in &notes {
            writeln!(w, "{n}")?;
        }
        w.flush()?;
        files.push(path);
    }
    Ok(CurvesOutcome { tables: all, files, notes })
}

pub struct IndexOutcome {
    pub text: String,
    /// `None` when the path route was skipped.
    pub agree: Option<bool>,
}

pub fn cmd_index(cfg: &ScanConfig, beta: f64, e: f64, theta: f64) -> Result<IndexOutcome> {
    let p = Params::new(beta, e)?;
    let omega = C64::from_polar(1.0, theta);
    let r = index_both(&p, omega, cfg.n_modes, &cfg.integrator(), &PathIndexOptions::default())?;
    let mut s = format!("beta = {beta}, e = {e}, omega = exp(i {theta})\n");
    let _ = writeln!(
        s,
        "operator: i_omega = {}, nu_omega = {} (N = {})",
        r.operator.i_omega, r.operator.nu_omega, cfg.n_modes
    );
    let agree = match &r.path {
        Ok(path) => {
            let _ = writeln!(s, "path:     i_omega = {}, nu_omega = {}", path.i_omega, path.nu_omega);
            for c in &path.crossings {
                let where_ = if c.on_extension { "extension" } else { "gamma" };
                let _ = writeln!(s, "  crossing t = {:+.6} ({where_}) sign {:+}", c.t, c.sign);
            }
            let ok = path.i_omega == r.operator.i_omega;
            let _ = writeln!(s, "methods {}", if ok { "agree" } else { "DISAGREE" });
            Some(ok)
        }
        Err(notice) => {
            let _ = writeln!(s, "path:     skipped: {notice}");
            None
        }
    };
    Ok(IndexOutcome { text: s, agree })
}

pub fn cmd_monodromy(cfg: &ScanConfig, beta: f64, e: f64) -> Result<String> {
    let g = integrate_gamma(Params::new(beta, e)?, &cfg.integrator())?;
    let r = classify(&g.endpoint, cfg.class_tol)?;
    let mut s = format!("gamma(2 pi) at beta = {beta}, e = {e}\n");
    let m = g.endpoint.matrix();
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:>22.15e}", m[(i, j)])).collect();
        let _ = writeln!(s, "  {}", row.join(" "));
    }
    let _ = writeln!(s, "symplectic residual {:.3e} (max over samples {:.3e})", g.endpoint.residual(), g.sp_residual);
    let _ = writeln!(s, "class {}", r.stability_class);
    for z in &r.eigenvalues {
        let _ = writeln!(s, "  eigenvalue {:+.15e} {:+.15e}i  |.| = {:.12}", z.re, z.im, z.norm());
    }
    for (z, k) in &r.krein {
        let _ = writeln!(s, "  krein sign at {:+.6} {:+.6}i: {k:+}", z.re, z.im);
    }
    let _ = writeln!(s, "nu_1 = {}, nu_-1 = {}", r.geo_mult_plus1, r.geo_mult_minus1);
    let (path, mut w) = out_file(cfg, "monodromy_path.csv")?;
    g.write_csv(&mut w)?;
    w.flush()?;
    let _ = writeln!(s, "wrote {}", path.display());
    Ok(s)
}

pub fn cmd_verify(cfg: &ScanConfig, ids: &[u32]) -> Result<Vec<CriterionReport>> {
    let opts = VerifyOptions::from_config(cfg);
    let (_, mut w) = out_file(cfg, "verify.jsonl")?;
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        let r = verify::run(id, &opts);
        let line = r.json_line();
        println!("{line}");
        writeln!(w, "{line}")?;
        out.push(r);
    }
    w.flush()?;
    Ok(out)
}
