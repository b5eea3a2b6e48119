//! Stability classification over a `(beta, e)` grid.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lagrange_core::monodromy::{integrate_gamma, IntegratorOptions};
use lagrange_core::spectral::{assemble_a, morse_and_nullity, NULL_TOL};
use lagrange_core::symplectic::{classify, StabilityClass};
use lagrange_core::{Params, C64};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::ScanConfig;
use crate::raster::{self, Image, Rgb};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("scan csv line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub beta: f64,
    pub e: f64,
    /// `None` when the cell failed.
    pub class: Option<StabilityClass>,
    pub eigenvalues: [C64; 4],
    pub i_minus1: Option<i64>,
}

impl Cell {
    pub fn code(&self) -> &'static str {
        self.class.map_or("ERR", StabilityClass::code)
    }
}

/// Cells in row-major order: `e` is the slow index, `beta` the fast one.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionGrid {
    pub betas: Vec<f64>,
    pub es: Vec<f64>,
    pub cells: Vec<Cell>,
    pub index_layer: bool,
}

fn compute_cell(beta: f64, e: f64, integ: &IntegratorOptions, cfg: &ScanConfig) -> Cell {
    let nan = C64::new(f64::NAN, f64::NAN);
    let mut cell = Cell {
        beta,
        e,
        class: None,
        eigenvalues: [nan; 4],
        i_minus1: None,
    };
    let Ok(p) = Params::new(beta, e) else {
        return cell;
    };
    if let Ok(r) = integrate_gamma(p, integ).and_then(|g| classify(&g.endpoint, cfg.class_tol)) {
        cell.class = Some(r.stability_class);
        cell.eigenvalues = r.eigenvalues;
    }
    if cfg.index_layer {
        cell.i_minus1 = assemble_a(&p, C64::new(-1.0, 0.0), cfg.n_modes)
            .and_then(|a| morse_and_nullity(&a, NULL_TOL))
            .ok()
            .map(|s| s.morse_index as i64);
    }
    cell
}

impl RegionGrid {
    /// Classifies every cell; failures become `ERR` cells.
    pub fn compute(cfg: &ScanConfig) -> Self {
        let betas = cfg.beta_grid();
        let es = cfg.e_grid();
        let integ = cfg.integrator();
        let points: Vec<(f64, f64)> = es.iter().flat_map(|&e| betas.iter().map(move |&b| (b, e))).collect();
        let cells = points
            .par_iter()
            .map(|&(b, e)| compute_cell(b, e, &integ, cfg))
            .collect();
        Self {
            betas,
            es,
            cells,
            index_layer: cfg.index_layer,
        }
    }

    pub fn cell(&self, ib: usize, ie: usize) -> &Cell {
        &self.cells[ie * self.betas.len() + ib]
    }

    pub fn csv_header(index_layer: bool) -> String {
        let mut h = String::from("beta,e,class");
        for k in 1..=4 {
            let _ = write!(h, ",ev{k}_re,ev{k}_im");
        }
        if index_layer {
            h.push_str(",i_minus1");
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut s = Self::csv_header(self.index_layer);
        s.push('\n');
        for c in &self.cells {
            let _ = write!(s, "{:.16e},{:.16e},{}", c.beta, c.e, c.code());
            for z in &c.eigenvalues {
                let _ = write!(s, ",{:.16e},{:.16e}", z.re, z.im);
            }
            if self.index_layer {
                match c.i_minus1 {
                    Some(i) => {
                        let _ = write!(s, ",{i}");
                    }
                    None => s.push_str(",ERR"),
                }
            }
            s.push('\n');
        }
        s
    }

    /// Inverse of [`RegionGrid::to_csv`] for a grid of known shape.
    pub fn from_csv(text: &str, cfg: &ScanConfig) -> Result<Self, GridError> {
        let betas = cfg.beta_grid();
        let es = cfg.e_grid();
        let mut lines = text.lines();
        let perr = |line: usize, reason: String| GridError::Parse { line, reason };
        let header = lines.next().ok_or_else(|| perr(1, "empty file".into()))?;
        if header != Self::csv_header(cfg.index_layer) {
            return Err(perr(1, format!("unexpected header {header:?}")));
        }
        let width = 11 + usize::from(cfg.index_layer);
        let mut cells = Vec::with_capacity(betas.len() * es.len());
        for (i, l) in lines.enumerate() {
            let line = i + 2;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != width {
                return Err(perr(line, format!("{} fields, expected {width}", f.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| perr(line, format!("bad number {s:?}")));
            let class = match f[2] {
                "ERR" => None,
                code => Some(StabilityClass::from_code(code).ok_or_else(|| perr(line, format!("bad class {code:?}")))?),
            };
            let mut eigenvalues = [C64::new(0.0, 0.0); 4];
            for (k, z) in eigenvalues.iter_mut().enumerate() {
                *z = C64::new(num(f[3 + 2 * k])?, num(f[4 + 2 * k])?);
            }
            let i_minus1 = if cfg.index_layer {
                match f[11] {
                    "ERR" => None,
                    s => Some(s.parse().map_err(|_| perr(line, format!("bad index {s:?}")))?),
                }
            } else {
                None
            };
            cells.push(Cell {
                beta: num(f[0])?,
                e: num(f[1])?,
                class,
                eigenvalues,
                i_minus1,
            });
        }
        if cells.len() != betas.len() * es.len() {
            return Err(perr(0, format!("{} cells, expected {}", cells.len(), betas.len() * es.len())));
        }
        Ok(Self {
            betas,
            es,
            cells,
            index_layer: cfg.index_layer,
        })
    }

    /// One pixel per cell, largest `e` on top.
    pub fn class_image(&self) -> Image {
        let (nb, ne) = (self.betas.len(), self.es.len());
        let mut img = Image::filled(nb, ne, raster::WHITE);
        for ie in 0..ne {
            for ib in 0..nb {
                img.set(ib, ne - 1 - ie, class_color(self.cell(ib, ie).class));
            }
        }
        img
    }

    /// `i_{-1}` as grey levels `0, 127, 254`; 255 marks failed cells.
    pub fn index_layer_values(&self) -> Vec<u8> {
        let (nb, ne) = (self.betas.len(), self.es.len());
        let mut v = vec![255u8; nb * ne];
        for ie in 0..ne {
            for ib in 0..nb {
                if let Some(i) = self.cell(ib, ie).i_minus1 {
                    v[(ne - 1 - ie) * nb + ib] = (i.clamp(0, 2) * 127) as u8;
                }
            }
        }
        v
    }
}

pub fn class_color(c: Option<StabilityClass>) -> Rgb {
    match c {
        Some(StabilityClass::EE) => [0, 170, 0],
        Some(StabilityClass::EH) => [240, 210, 0],
        Some(StabilityClass::HH) => [0, 60, 220],
        Some(StabilityClass::CS) => [210, 0, 0],
        Some(StabilityClass::Degenerate) => [0, 0, 0],
        None => [150, 150, 150],
    }
}

/// Cache file for a configuration hash.
pub fn cache_path(dir: &Path, hash: &str) -> PathBuf {
    dir.join(format!("scan-{hash}.csv"))
}

pub fn cache_load(dir: &Path, hash: &str) -> Option<String> {
    std::fs::read_to_string(cache_path(dir, hash)).ok()
}

/// Writes to a temporary file in the cache directory and renames it into
/// place, so readers never see a partial file.
pub fn cache_store(dir: &Path, hash: &str, text: &str) -> std::io::Result<PathBuf> {
    use std::io::Write;
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    let path = cache_path(dir, hash);
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

/// Loads the grid from the cache when possible, otherwise computes and
/// stores it. The flag reports a cache hit.
pub fn scan_with_cache(cfg: &ScanConfig) -> Result<(RegionGrid, bool), GridError> {
    let hash = cfg.scan_hash();
    if let Some(text) = cache_load(&cfg.cache_dir, &hash) {
        if let Ok(g) = RegionGrid::from_csv(&text, cfg) {
            return Ok((g, true));
        }
    }
    let g = RegionGrid::compute(cfg);
    cache_store(&cfg.cache_dir, &hash, &g.to_csv())?;
    Ok((g, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScanConfig {
        ScanConfig {
            beta_steps: 3,
            e_steps: 2,
            e_max: 0.5,
            index_layer: true,
            n_modes: 16,
            ..Default::default()
        }
    }

    #[test]
    fn csv_round_trip() {
        let cfg = small();
        let g = RegionGrid::compute(&cfg);
        let back = RegionGrid::from_csv(&g.to_csv(), &cfg).unwrap();
        assert_eq!(back.to_csv(), g.to_csv());
        assert_eq!(g.cells.len(), 6);
        assert!(g.cells.iter().all(|c| c.class.is_some() && c.i_minus1.is_some()));
    }

    #[test]
    fn error_cells_round_trip() {
        let cfg = small();
        let mut g = RegionGrid::compute(&cfg);
        g.cells[1].class = None;
        g.cells[1].eigenvalues = [C64::new(f64::NAN, f64::NAN); 4];
        g.cells[1].i_minus1 = None;
        let text = g.to_csv();
        assert!(text.lines().nth(2).unwrap().contains(",ERR,NaN"));
        let back = RegionGrid::from_csv(&text, &cfg).unwrap();
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn image_orientation() {
        let cfg = small();
        let g = RegionGrid::compute(&cfg);
        let img = g.class_image();
        assert_eq!((img.width, img.height), (3, 2));
        // top-left is (beta_min, e_max)
        assert_eq!(img.get(0, 0), class_color(g.cell(0, 1).class));
        assert_eq!(g.index_layer_values().len(), 6);
    }
}
