//! Degeneracy curves in the `(beta, e)` plane.
//!
//! `beta_1(e, omega) <= beta_2(e, omega)` come from the compact operator:
//! `A(beta, e)` is omega-degenerate exactly when `-1/sqrt(9 - beta)` is one
//! of its eigenvalues. At `omega = -1` the two curves are also the zero
//! crossings of the lowest eigenvalue of the `E1` and `E2` restrictions,
//! which gives smooth branches through `e = 0`. `Gamma_k` bounds the
//! hyperbolic region and is found by bisection on the monodromy spectrum.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Params;
use crate::monodromy::{integrate_gamma, IntegratorOptions};
use crate::spectral::{
    assemble_a, assemble_b_compact, assemble_restricted, beta_from_mu, morse_and_nullity, Space,
    NULL_TOL,
};
use crate::symplectic::{classify, StabilityClass, CLASS_TOL};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveLabel {
    Beta1,
    Beta2,
    GammaS,
    GammaM,
    GammaK,
    E1,
    E2,
}

impl CurveLabel {
    pub fn code(self) -> &'static str {
        match self {
            CurveLabel::Beta1 => "BETA1",
            CurveLabel::Beta2 => "BETA2",
            CurveLabel::GammaS => "GAMMA_S",
            CurveLabel::GammaM => "GAMMA_M",
            CurveLabel::GammaK => "GAMMA_K",
            CurveLabel::E1 => "E1",
            CurveLabel::E2 => "E2",
        }
    }
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub e: f64,
    pub beta: f64,
    pub omega: C64,
    pub label: CurveLabel,
    /// Distance of the degeneracy certificate from zero.
    pub residual: f64,
}

/// `arg(omega)` in `[0, 2 pi)`.
pub fn omega_theta(omega: C64) -> f64 {
    omega.arg().rem_euclid(TAU)
}

#[derive(Clone, Debug)]
pub struct CurveTable {
    pub label: CurveLabel,
    pub omega: C64,
    /// Sorted by strictly increasing `e`.
    pub points: Vec<CurvePoint>,
    pub n_modes: usize,
    pub null_tol: f64,
    /// Adjacent pairs still violating the jump guard after refinement.
    pub jumps: Vec<(f64, f64)>,
    /// Grid points that failed (only with `keep_going`).
    pub failures: Vec<(f64, String)>,
    pub notes: Vec<String>,
}

impl CurveTable {
    fn new(label: CurveLabel, omega: C64, points: Vec<CurvePoint>, opts: &CurveOptions) -> Self {
        Self {
            label,
            omega,
            points,
            n_modes: opts.n_modes,
            null_tol: opts.null_tol,
            jumps: Vec::new(),
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// True when some grid points failed.
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub const CSV_HEADER: &'static str = "label,omega_theta,e,beta,residual,N";

    /// Rows without the header.
    pub fn write_rows<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for p in &self.points {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                p.label,
                omega_theta(p.omega),
                p.e,
                p.beta,
                p.residual,
                self.n_modes
            )?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        self.write_rows(&mut w)
    }

    pub fn beta_at(&self, e: f64) -> Option<f64> {
        self.points.iter().find(|p| p.e == e).map(|p| p.beta)
    }

    fn find_jumps(&mut self, tol: f64) {
        self.jumps = self
            .points
            .windows(2)
            .filter(|w| (w[1].beta - w[0].beta).abs() > tol)
            .map(|w| (w[0].e, w[1].e))
            .collect();
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CurveOptions {
    pub n_modes: usize,
    pub null_tol: f64,
    /// Root tolerance in `beta` for the restricted-operator curves.
    pub root_tol: f64,
    /// Bracket width at which the `Gamma_k` bisection stops.
    pub bisection_tol: f64,
    pub class_tol: f64,
    pub jump_tol: f64,
    /// Rounds of midpoint insertion where the jump guard fires.
    pub max_refine: u32,
    pub integrator: IntegratorOptions,
    /// Record failing grid points in the tables instead of aborting.
    pub keep_going: bool,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            n_modes: 64,
            null_tol: NULL_TOL,
            root_tol: 1e-12,
            bisection_tol: 1e-8,
            class_tol: CLASS_TOL,
            jump_tol: 0.2,
            max_refine: 4,
            integrator: IntegratorOptions::default(),
            keep_going: false,
        }
    }
}

/// The two degeneracy values at one `(e, omega)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegeneracyPair {
    pub beta1: f64,
    pub beta2: f64,
    /// Smallest `|eigenvalue|` of `A(beta_i, e)`.
    pub residuals: [f64; 2],
    /// `nu_omega(A(beta_i, e))` at the certificate.
    pub nullities: [usize; 2],
}

fn is_one(omega: C64) -> bool {
    (omega - C64::new(1.0, 0.0)).norm() < 1e-14
}

fn certify(beta: f64, e: f64, omega: C64, n: usize, null_tol: f64) -> Result<(f64, usize)> {
    let p = Params::new(beta, e)?;
    let s = morse_and_nullity(&assemble_a(&p, omega, n)?, null_tol)?;
    let residual = s.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    if s.nullity == 0 {
        return Err(Error::Consistency(format!(
            "beta = {beta} at e = {e}: A has no kernel (smallest |eigenvalue| {residual:e})"
        )));
    }
    Ok((residual, s.nullity))
}

/// `beta_1 <= beta_2` from the eigenvalues of the compact operator below
/// `-1/3`, each certified by the nullity of `A(beta_i, e)`.
pub fn degeneracy_betas(e: f64, omega: C64, n: usize) -> Result<DegeneracyPair> {
    degeneracy_betas_with(e, omega, n, NULL_TOL)
}

pub fn degeneracy_betas_with(e: f64, omega: C64, n: usize, null_tol: f64) -> Result<DegeneracyPair> {
    Params::new(9.0, e)?;
    if is_one(omega) {
        return Ok(DegeneracyPair {
            beta1: 0.0,
            beta2: 0.0,
            residuals: [0.0; 2],
            nullities: [0; 2],
        });
    }
    let b = assemble_b_compact(e, omega, n)?;
    let low: Vec<f64> = b.eigenvalues.iter().copied().filter(|&m| m < -1.0 / 3.0).collect();
    if low.len() != 2 {
        let head: Vec<String> = b.eigenvalues.iter().take(6).map(|m| format!("{m:.12}")).collect();
        return Err(Error::ModelViolation(format!(
            "{} eigenvalues below -1/3 at e = {e}, omega = {omega}; lowest: {}",
            low.len(),
            head.join(", ")
        )));
    }
    // the more negative mu gives the larger beta
    let (b1, b2) = (beta_from_mu(low[1]), beta_from_mu(low[0]));
    if (low[1] - low[0]).abs() < 1e-9 {
        let m = 0.5 * (b1 + b2);
        let (r, nu) = certify(m, e, omega, n, null_tol)?;
        return Ok(DegeneracyPair {
            beta1: m,
            beta2: m,
            residuals: [r; 2],
            nullities: [nu; 2],
        });
    }
    let (r1, n1) = certify(b1, e, omega, n, null_tol)?;
    let (r2, n2) = certify(b2, e, omega, n, null_tol)?;
    Ok(DegeneracyPair {
        beta1: b1,
        beta2: b2,
        residuals: [r1, r2],
        nullities: [n1, n2],
    })
}

fn restricted_min(beta: f64, e: f64, space: Space, n: usize) -> Result<f64> {
    let p = Params::new(beta, e)?;
    let t = assemble_restricted(&p, space, n)?;
    let a = t.entries.map(|z| z.re);
    Ok(a.symmetric_eigenvalues().min())
}

/// Illinois-modified regula falsi on a sign-changing bracket.
fn illinois<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa.signum() == fb.signum() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{a}, {b}]: f = {fa:e}, {fb:e}"
        )));
    }
    let mut side = 0;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// `beta` at which the lowest eigenvalue of the `E1`/`E2` restriction
/// crosses zero.
pub fn restricted_root(e: f64, space: Space, opts: &CurveOptions) -> Result<CurvePoint> {
    let delta = 1e-6;
    let n = opts.n_modes;
    let beta = illinois(
        |b| restricted_min(b, e, space, n),
        delta,
        9.0 - delta,
        opts.root_tol,
    )
    .map_err(|err| Error::RootFinding(format!("{space:?} curve at e = {e}: {err}")))?;
    let residual = restricted_min(beta, e, space, n)?.abs();
    Ok(CurvePoint {
        e,
        beta,
        omega: C64::new(-1.0, 0.0),
        label: match space {
            Space::E1 => CurveLabel::E1,
            Space::E2 => CurveLabel::E2,
        },
        residual,
    })
}

type Rows = Vec<(f64, Vec<CurvePoint>)>;
type Failures = Vec<(f64, String)>;

fn eval_all<F>(es: &[f64], opts: &CurveOptions, eval: &F) -> Result<(Rows, Failures)>
where
    F: Fn(f64) -> Result<Vec<CurvePoint>> + Sync,
{
    let results: Vec<(f64, Result<Vec<CurvePoint>>)> = es.par_iter().map(|&e| (e, eval(e))).collect();
    let (mut rows, mut failures) = (Vec::new(), Vec::new());
    for (e, r) in results {
        match r {
            Ok(v) => rows.push((e, v)),
            Err(err) if opts.keep_going => failures.push((e, err.to_string())),
            Err(err) => return Err(err),
        }
    }
    Ok((rows, failures))
}

fn refine_grid<F>(grid: &[f64], opts: &CurveOptions, eval: F) -> Result<(Rows, Failures)>
where
    F: Fn(f64) -> Result<Vec<CurvePoint>> + Sync,
{
    let mut es: Vec<f64> = grid.to_vec();
    es.sort_by(f64::total_cmp);
    es.dedup();
    let (mut rows, mut failures) = eval_all(&es, opts, &eval)?;
    for _ in 0..opts.max_refine {
        let mids: Vec<f64> = rows
            .windows(2)
            .filter(|w| {
                w[0].1
                    .iter()
                    .zip(&w[1].1)
                    .any(|(a, b)| (a.beta - b.beta).abs() > opts.jump_tol)
            })
            .map(|w| 0.5 * (w[0].0 + w[1].0))
            .collect();
        if mids.is_empty() {
            break;
        }
        let (extra, bad) = eval_all(&mids, opts, &eval)?;
        rows.extend(extra);
        failures.extend(bad);
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    failures.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((rows, failures))
}

fn tables_from_rows(
    (rows, failures): &(Rows, Failures),
    labels: &[CurveLabel],
    omega: C64,
    opts: &CurveOptions,
) -> Vec<CurveTable> {
    labels
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let pts = rows.iter().map(|(_, v)| v[i]).collect();
            let mut t = CurveTable::new(label, omega, pts, opts);
            t.find_jumps(opts.jump_tol);
            t.failures = failures.clone();
            if !t.jumps.is_empty() {
                t.notes.push(format!("{} jump(s) above {} after refinement", t.jumps.len(), opts.jump_tol));
            }
            if t.is_partial() {
                t.notes.push(format!("partial table: {} grid point(s) failed", t.failures.len()));
            }
            t
        })
        .collect()
}

/// The four `omega = -1` tables.
#[derive(Clone, Debug)]
pub struct MinusOneCurves {
    pub e1: CurveTable,
    pub e2: CurveTable,
    pub gamma_s: CurveTable,
    pub gamma_m: CurveTable,
}

impl MinusOneCurves {
    pub fn tables(&self) -> [&CurveTable; 4] {
        [&self.gamma_s, &self.gamma_m, &self.e1, &self.e2]
    }
}

fn minus_one_row(e: f64, opts: &CurveOptions) -> Result<Vec<CurvePoint>> {
    let p1 = restricted_root(e, Space::E1, opts)?;
    let p2 = restricted_root(e, Space::E2, opts)?;
    let (lo, hi) = if p1.beta <= p2.beta { (p1, p2) } else { (p2, p1) };
    Ok(vec![
        p1,
        p2,
        CurvePoint { label: CurveLabel::GammaS, ..lo },
        CurvePoint { label: CurveLabel::GammaM, ..hi },
    ])
}

/// `E1`, `E2`, `Gamma_s` and `Gamma_m` over an `e` grid.
pub fn minus_one_curves(e_grid: &[f64], opts: &CurveOptions) -> Result<MinusOneCurves> {
    let rows = refine_grid(e_grid, opts, |e| minus_one_row(e, opts))?;
    let labels = [CurveLabel::E1, CurveLabel::E2, CurveLabel::GammaS, CurveLabel::GammaM];
    let mut t = tables_from_rows(&rows, &labels, C64::new(-1.0, 0.0), opts).into_iter();
    let (e1, e2, gamma_s, gamma_m) = (
        t.next().expect("four tables"),
        t.next().expect("four tables"),
        t.next().expect("four tables"),
        t.next().expect("four tables"),
    );
    Ok(MinusOneCurves { e1, e2, gamma_s, gamma_m })
}

/// `(beta_s(e), beta_m(e))`.
pub fn minus_one_pair(e: f64, opts: &CurveOptions) -> Result<(f64, f64)> {
    let row = minus_one_row(e, opts)?;
    Ok((row[2].beta, row[3].beta))
}

/// `Gamma_k` at one eccentricity, with the classes at the final bracket.
#[derive(Clone, Copy, Debug)]
pub struct GammaK {
    pub point: CurvePoint,
    pub beta_m: f64,
    pub bracket: (f64, f64),
    pub lower_class: StabilityClass,
    pub upper_class: StabilityClass,
}

fn monodromy_class(beta: f64, e: f64, opts: &CurveOptions) -> Result<StabilityClass> {
    let g = integrate_gamma(Params::new(beta, e)?, &opts.integrator)?;
    Ok(classify(&g.endpoint, opts.class_tol)?.stability_class)
}

fn hyperbolic(c: StabilityClass) -> bool {
    matches!(c, StabilityClass::HH | StabilityClass::CS)
}

/// Bisection for the left edge of the hyperbolic region, bracketed by
/// `[beta_m(e) - 1e-4, 9]`.
pub fn gamma_k(e: f64, opts: &CurveOptions) -> Result<GammaK> {
    let (_, beta_m) = minus_one_pair(e, opts)?;
    let mut lo = (beta_m - 1e-4).max(0.0);
    let mut hi = 9.0;
    let mut lower_class = monodromy_class(lo, e, opts)?;
    let mut upper_class = monodromy_class(hi, e, opts)?;
    if hyperbolic(lower_class) {
        return Err(Error::ModelViolation(format!(
            "monodromy already hyperbolic ({lower_class}) at beta = {lo} below beta_m = {beta_m}, e = {e}"
        )));
    }
    if !hyperbolic(upper_class) {
        return Err(Error::ModelViolation(format!(
            "monodromy not hyperbolic ({upper_class}) at beta = 9, e = {e}"
        )));
    }
    while hi - lo > opts.bisection_tol {
        let mid = 0.5 * (lo + hi);
        let c = monodromy_class(mid, e, opts)?;
        if hyperbolic(c) {
            hi = mid;
            upper_class = c;
        } else {
            lo = mid;
            lower_class = c;
        }
    }
    Ok(GammaK {
        point: CurvePoint {
            e,
            beta: 0.5 * (lo + hi),
            omega: C64::new(1.0, 0.0),
            label: CurveLabel::GammaK,
            residual: hi - lo,
        },
        beta_m,
        bracket: (lo, hi),
        lower_class,
        upper_class,
    })
}

/// `Gamma_k` over an `e` grid.
pub fn gamma_k_curve(e_grid: &[f64], opts: &CurveOptions) -> Result<CurveTable> {
    let rows = refine_grid(e_grid, opts, |e| gamma_k(e, opts).map(|g| vec![g.point]))?;
    let mut t = tables_from_rows(&rows, &[CurveLabel::GammaK], C64::new(1.0, 0.0), opts);
    Ok(t.remove(0))
}

fn branch_value(label: CurveLabel, omega: C64, e: f64, opts: &CurveOptions) -> Result<f64> {
    match label {
        CurveLabel::E1 => Ok(restricted_root(e, Space::E1, opts)?.beta),
        CurveLabel::E2 => Ok(restricted_root(e, Space::E2, opts)?.beta),
        CurveLabel::GammaS => Ok(minus_one_pair(e, opts)?.0),
        CurveLabel::GammaM => Ok(minus_one_pair(e, opts)?.1),
        CurveLabel::Beta1 => Ok(degeneracy_betas_with(e, omega, opts.n_modes, opts.null_tol)?.beta1),
        CurveLabel::Beta2 => Ok(degeneracy_betas_with(e, omega, opts.n_modes, opts.null_tol)?.beta2),
        CurveLabel::GammaK => Ok(gamma_k(e, opts)?.point.beta),
    }
}

fn check_step(h: f64, opts: &CurveOptions) -> Result<()> {
    if !(h > 0.0 && h <= 0.05) {
        return Err(Error::InvalidParams(format!("step h = {h} outside (0, 0.05]")));
    }
    if h < 1e4 * opts.root_tol.max(1e-14) {
        return Err(Error::InvalidParams(format!(
            "step h = {h} too small for curve resolution {:e}",
            opts.root_tol
        )));
    }
    Ok(())
}

/// Central difference `(beta(h) - beta(-h)) / 2h` at `e = 0`.
///
/// `Gamma_s`/`Gamma_m` have a corner at `e = 0`; for them the smooth `E1`
/// or `E2` branch that coincides with the requested curve at `e = +h` is
/// differenced instead. Other labels are differenced directly.
pub fn slope_at_origin(label: CurveLabel, omega: C64, h: f64, opts: &CurveOptions) -> Result<f64> {
    check_step(h, opts)?;
    let branch = match label {
        CurveLabel::GammaS | CurveLabel::GammaM => smooth_branch(label, h, opts)?,
        l => l,
    };
    let plus = branch_value(branch, omega, h, opts)?;
    let minus = branch_value(branch, omega, -h, opts)?;
    Ok((plus - minus) / (2.0 * h))
}

/// The `E_i` branch equal to `Gamma_s` (or `Gamma_m`) for small `e > 0`.
pub fn smooth_branch(label: CurveLabel, h: f64, opts: &CurveOptions) -> Result<CurveLabel> {
    let b1 = restricted_root(h, Space::E1, opts)?.beta;
    let b2 = restricted_root(h, Space::E2, opts)?.beta;
    let e1_lower = b1 <= b2;
    match label {
        CurveLabel::GammaS => Ok(if e1_lower { CurveLabel::E1 } else { CurveLabel::E2 }),
        CurveLabel::GammaM => Ok(if e1_lower { CurveLabel::E2 } else { CurveLabel::E1 }),
        l => Err(Error::InvalidParams(format!("{l} has no smooth-branch identification"))),
    }
}

/// One-sided slope `(beta(h) - beta(0)) / h` of a labeled curve.
pub fn forward_slope(label: CurveLabel, omega: C64, h: f64, opts: &CurveOptions) -> Result<f64> {
    check_step(h, opts)?;
    let plus = branch_value(label, omega, h, opts)?;
    let zero = branch_value(label, omega, 0.0, opts)?;
    Ok((plus - zero) / h)
}

/// `BETA1`/`BETA2` tables for each `omega = exp(i theta)`.
pub fn omega_fan(e_grid: &[f64], theta_grid: &[f64], opts: &CurveOptions) -> Result<Vec<CurveTable>> {
    let mut out = Vec::with_capacity(2 * theta_grid.len());
    for &theta in theta_grid {
        let omega = C64::from_polar(1.0, theta);
        let rows = refine_grid(e_grid, opts, |e| {
            let d = degeneracy_betas_with(e, omega, opts.n_modes, opts.null_tol)?;
            let pt = |beta, label, residual| CurvePoint { e, beta, omega, label, residual };
            Ok(vec![
                pt(d.beta1, CurveLabel::Beta1, d.residuals[0]),
                pt(d.beta2, CurveLabel::Beta2, d.residuals[1]),
            ])
        })?;
        out.extend(tables_from_rows(&rows, &[CurveLabel::Beta1, CurveLabel::Beta2], omega, opts));
    }
    Ok(out)
}

/// `phi_omega` just below, at and just above a degeneracy value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JumpCheck {
    pub below: usize,
    pub at: usize,
    pub above: usize,
    pub nullity: usize,
}

impl JumpCheck {
    /// `phi(beta - eps) - phi(beta) = nu` and `phi(beta + eps) = phi(beta)`.
    pub fn holds(&self) -> bool {
        self.below == self.at + self.nullity && self.above == self.at
    }
}

pub fn index_jump(beta: f64, e: f64, omega: C64, eps: f64, opts: &CurveOptions) -> Result<JumpCheck> {
    let phi = |b: f64| -> Result<(usize, usize)> {
        let s = morse_and_nullity(&assemble_a(&Params::new(b, e)?, omega, opts.n_modes)?, opts.null_tol)?;
        Ok((s.morse_index, s.nullity))
    };
    let (below, _) = phi(beta - eps)?;
    let (at, nullity) = phi(beta)?;
    let (above, _) = phi(beta + eps)?;
    Ok(JumpCheck { below, at, above, nullity })
}

/// Default `e` grid: 81 points on `[-0.96, 0.96]`.
pub fn default_e_grid() -> Vec<f64> {
    linspace(-0.96, 0.96, 81)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
