//! Omega-index of the fundamental solution, computed two ways.
//!
//! The operator route counts negative eigenvalues of the truncated
//! second-order operator. The path route counts signed crossings of the
//! extended path `xi_2 * gamma` with the hypersurface `D_omega = 0`, where
//! `xi_2(s) = diag(2 - s, 2 - s, 1/(2 - s), 1/(2 - s))` on `[0, 1]` runs
//! first and `gamma` follows.
//!
//! Crossings at `omega = +-1` of a real path are typically not transverse
//! (a pair of eigenvalues may touch `+-1` along the unit circle). The path
//! is therefore deformed to `Q(s) exp(eps b(s) K)` with `b` vanishing at
//! both ends and `K = J S`, `S` positive definite; the deformation fixes the
//! endpoints, so the intersection number is unchanged, while generic
//! crossings become simple sign changes of `D_omega`.

use std::f64::consts::TAU;

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::model::Params;
use crate::monodromy::{integrate_gamma, IntegratorOptions, IteratedPath, SymplecticPath};
use crate::spectral::{assemble_a, morse_and_nullity, morse_and_nullity_checked, NULL_TOL};
use crate::symplectic::{d_omega, d_omega_and_derivative, j4, nu_omega, NU_TOL};
use crate::C64;

/// How an index was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Operator,
    Path,
}

/// One signed crossing of the extended path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    /// Time along `gamma`, or `s - 1` in `[-1, 0]` on the extension.
    pub t: f64,
    pub sign: i8,
    pub on_extension: bool,
}

#[derive(Clone, Debug)]
pub struct IndexResult {
    pub omega: C64,
    pub i_omega: i64,
    pub nu_omega: usize,
    pub method: Method,
    pub crossings: Vec<Crossing>,
    /// Truncation re-check outcome (operator route only).
    pub converged: Option<bool>,
}

/// Settings of the crossing count.
#[derive(Clone, Copy, Debug)]
pub struct PathIndexOptions {
    /// Minimum `|D_omega(endpoint)|`.
    pub path_tol: f64,
    /// Samples per `2 pi` of path time.
    pub samples_per_period: usize,
    /// Samples on the extension segment.
    pub extension_samples: usize,
    /// Deformation amplitude `eps`.
    pub deformation: f64,
    /// Levels of 8x resampling around suspicious sample intervals.
    pub refine_levels: u32,
}

impl Default for PathIndexOptions {
    fn default() -> Self {
        Self {
            path_tol: 1e-8,
            samples_per_period: 2048,
            extension_samples: 256,
            deformation: 0.2,
            refine_levels: 3,
        }
    }
}

/// `i_omega` and `nu_omega` from the Morse index and nullity of the
/// truncated operator.
pub fn omega_index_from_operator(p: &Params, omega: C64, n: usize) -> Result<IndexResult> {
    let s = morse_and_nullity(&assemble_a(p, omega, n)?, NULL_TOL)?;
    Ok(IndexResult {
        omega,
        i_omega: s.morse_index as i64,
        nu_omega: s.nullity,
        method: Method::Operator,
        crossings: Vec::new(),
        converged: None,
    })
}

/// As [`omega_index_from_operator`], with the counts re-checked at `2N`.
pub fn omega_index_from_operator_checked(p: &Params, omega: C64, n: usize) -> Result<IndexResult> {
    let s = morse_and_nullity_checked(p, omega, n, NULL_TOL)?;
    Ok(IndexResult {
        omega,
        i_omega: s.morse_index as i64,
        nu_omega: s.nullity,
        method: Method::Operator,
        crossings: Vec::new(),
        converged: s.converged,
    })
}

/// Fixed symmetric positive definite matrix defining the deformation.
fn deformation_generator() -> Matrix4<f64> {
    #[rustfmt::skip]
    let g = Matrix4::new(
        0.0, 0.31, -0.17, 0.23,
        0.31, 0.0, 0.29, -0.11,
        -0.17, 0.29, 0.0, 0.37,
        0.23, -0.11, 0.37, 0.0,
    );
    let s = Matrix4::identity() + g;
    j4() * s
}

struct Extended<'a, P: SymplecticPath> {
    path: &'a P,
    k: Matrix4<f64>,
    eps: f64,
}

impl<P: SymplecticPath> Extended<'_, P> {
    fn base(&self, s: f64) -> (Matrix4<f64>, Matrix4<f64>) {
        if s <= 1.0 {
            let a = 2.0 - s;
            let m = Matrix4::from_diagonal(&nalgebra::Vector4::new(a, a, 1.0 / a, 1.0 / a));
            let dm = Matrix4::from_diagonal(&nalgebra::Vector4::new(
                -1.0,
                -1.0,
                1.0 / (a * a),
                1.0 / (a * a),
            ));
            (m, dm)
        } else {
            let span = self.path.span();
            let t = span * (s - 1.0);
            (self.path.at(t), self.path.velocity(t) * span)
        }
    }

    /// Deformed path value and derivative at `s` in `[0, 2]`.
    fn eval(&self, s: f64) -> (Matrix4<f64>, Matrix4<f64>) {
        let (m, dm) = self.base(s);
        let half = std::f64::consts::FRAC_PI_2;
        let b = (half * s).sin();
        let db = half * (half * s).cos();
        let e = (self.k * (self.eps * b)).exp();
        let v = m * e;
        (v, dm * e + v * self.k * (self.eps * db))
    }

    fn d(&self, s: f64, omega: C64) -> f64 {
        let (m, _) = self.eval(s);
        d_omega_and_derivative(&m, &Matrix4::zeros(), omega).0
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let mut sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || b - a < 1e-15 {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
            sa = fm.signum();
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `f` on a sampled interval, refining sample intervals in
/// which the quadratic through neighbouring samples dips through zero.
/// Each root comes with the sign of `f` just after it.
fn sign_changes<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize, levels: u32, out: &mut Vec<(f64, f64)>) {
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for i in 0..n {
        let (y0, y1) = (ys[i], ys[i + 1]);
        if y0 == 0.0 {
            continue;
        }
        if y0.signum() != y1.signum() && y1 != 0.0 {
            out.push((bisect(f, xs[i], xs[i + 1], y0), y1.signum()));
            continue;
        }
        if levels > 0 && suspicious(&ys, i) {
            sign_changes(f, xs[i], xs[i + 1], 8, levels - 1, out);
        }
    }
}

/// True when a parabola through samples around interval `i` changes sign
/// inside it.
fn suspicious(ys: &[f64], i: usize) -> bool {
    let probe = |j: usize| -> bool {
        if j == 0 || j + 1 >= ys.len() {
            return false;
        }
        let (a, b, c) = (ys[j - 1], ys[j], ys[j + 1]);
        if a.signum() != b.signum() || c.signum() != b.signum() {
            return false;
        }
        // local minimum of |y| whose parabola vertex crosses zero
        if b.abs() > a.abs() || b.abs() > c.abs() {
            return false;
        }
        let curv = a - 2.0 * b + c;
        if curv == 0.0 {
            return false;
        }
        let slope = 0.5 * (c - a);
        let vertex = b - slope * slope / (2.0 * curv);
        vertex.signum() != b.signum()
    };
    probe(i) || probe(i + 1)
}

/// Signed crossing count of the extended path with `D_omega = 0`.
pub fn omega_index_from_path<P: SymplecticPath>(
    path: &P,
    omega: C64,
    opts: &PathIndexOptions,
) -> Result<IndexResult> {
    let end = path.endpoint();
    let d_end = d_omega(&end, omega)?;
    if d_end.abs() <= opts.path_tol {
        return Err(Error::DegenerateEndpoint { value: d_end });
    }
    let ext = Extended {
        path,
        k: deformation_generator(),
        eps: opts.deformation,
    };
    let f = |s: f64| ext.d(s, omega);
    let mut roots = Vec::new();
    sign_changes(&f, 0.0, 1.0, opts.extension_samples, opts.refine_levels, &mut roots);
    let n_main = ((opts.samples_per_period as f64) * path.span() / TAU).ceil() as usize;
    sign_changes(&f, 1.0, 2.0, n_main.max(64), opts.refine_levels, &mut roots);
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    roots.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);

    let j = j4();
    let mut crossings = Vec::with_capacity(roots.len());
    for (s, after) in roots {
        let (m, dm) = ext.eval(s);
        let (_, along) = d_omega_and_derivative(&m, &dm, omega);
        let (_, normal) = d_omega_and_derivative(&m, &(m * j), omega);
        let scale = (1.0 + m.norm()).powi(4);
        if normal.abs() < 1e-13 * scale {
            return Err(Error::TangentialCrossing { s });
        }
        // the bracket fixes the direction even where the root has odd
        // order and the derivative is lost in roundoff
        let along = if along.abs() < 1e-13 * scale * (1.0 + dm.norm()) { after } else { along };
        let sign = (along.signum() * normal.signum()) as i8;
        let on_extension = s < 1.0;
        let t = if on_extension { s - 1.0 } else { path.span() * (s - 1.0) };
        crossings.push(Crossing { t, sign, on_extension });
    }
    Ok(IndexResult {
        omega,
        i_omega: crossings.iter().map(|c| c.sign as i64).sum(),
        nu_omega: nu_omega(&end, omega, NU_TOL),
        method: Method::Path,
        crossings,
        converged: None,
    })
}

/// Both routes at one point; the path route is skipped (with the reason)
/// when the endpoint is omega-degenerate.
pub struct IndexPair {
    pub operator: IndexResult,
    pub path: std::result::Result<IndexResult, String>,
}

pub fn index_both(
    p: &Params,
    omega: C64,
    n: usize,
    integ: &IntegratorOptions,
    opts: &PathIndexOptions,
) -> Result<IndexPair> {
    let operator = omega_index_from_operator(p, omega, n)?;
    let gamma = integrate_gamma(*p, integ)?;
    let path = match omega_index_from_path(&gamma, omega, opts) {
        Ok(r) => Ok(r),
        Err(Error::DegenerateEndpoint { value }) => Err(format!(
            "endpoint omega-degenerate (|D_omega| = {value:e}); operator result only"
        )),
        Err(e) => return Err(e),
    };
    Ok(IndexPair { operator, path })
}

/// Outcome of the iteration-formula check.
#[derive(Clone, Debug)]
pub struct BottReport {
    pub params: Params,
    pub k: u32,
    /// Operator results at the k-th roots of unity.
    pub per_root: Vec<IndexResult>,
    pub sum_index: i64,
    pub sum_nullity: usize,
    /// Crossing count of the k-fold path at `omega = 1`, if non-degenerate.
    pub direct_index: Option<i64>,
    /// `nu_1(gamma(2pi)^k)`.
    pub power_nullity: usize,
    /// `sum over roots of nu_omega(gamma(2pi))`.
    pub matrix_nullity_sum: usize,
    pub skipped: Vec<String>,
}

impl BottReport {
    pub fn consistent(&self) -> bool {
        let idx = self.direct_index.is_none_or(|d| d == self.sum_index);
        idx && self.power_nullity == self.matrix_nullity_sum && self.power_nullity == self.sum_nullity
    }
}

/// Compares `i_1(gamma^k)` with the sum of `i_omega(gamma)` over `omega^k = 1`
/// and `nu_1(gamma^k)` with the sum of the `nu_omega`.
pub fn bott_check(p: &Params, k: u32, n: usize) -> Result<BottReport> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidParams(format!("iteration count {k} outside 1..=4")));
    }
    let gamma = integrate_gamma(*p, &IntegratorOptions::default())?;
    let end = gamma.endpoint();
    let mut per_root = Vec::new();
    let mut matrix_nullity_sum = 0;
    let mut skipped = Vec::new();
    for j in 0..k {
        let omega = C64::from_polar(1.0, TAU * j as f64 / k as f64);
        let r = omega_index_from_operator(p, omega, n)?;
        let nu = nu_omega(&end, omega, NU_TOL);
        if nu > 0 {
            skipped.push(format!("omega = exp(2 pi i {j}/{k}) is degenerate (nu = {nu})"));
        }
        matrix_nullity_sum += nu;
        per_root.push(r);
    }
    let iterated = IteratedPath::new(&gamma, k as usize);
    let power = iterated.endpoint();
    let power_nullity = nu_omega(&power, C64::new(1.0, 0.0), NU_TOL);
    let direct_index = if power_nullity == 0 {
        let r = omega_index_from_path(&iterated, C64::new(1.0, 0.0), &PathIndexOptions::default())?;
        Some(r.i_omega)
    } else {
        skipped.push("k-fold endpoint degenerate at omega = 1; direct count skipped".into());
        None
    };
    Ok(BottReport {
        params: *p,
        k,
        sum_index: per_root.iter().map(|r| r.i_omega).sum(),
        sum_nullity: per_root.iter().map(|r| r.nu_omega).sum(),
        per_root,
        direct_index,
        power_nullity,
        matrix_nullity_sum,
        skipped,
    })
}

/// Index of the full linearized system over two periods: the Keplerian
/// part contributes `2(k - 1) = 2` at `k = 2`.
pub fn phi_squared(p: &Params, n: usize) -> Result<i64> {
    let r = bott_check(p, 2, n)?;
    Ok(2 + r.sum_index)
}
