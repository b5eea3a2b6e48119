//! Fourier-Galerkin truncations of the second-order operator
//!
//! `A(beta, e) = -d^2/dt^2 - I + (3 I + sqrt(9 - beta) S(t)) / (2 (1 + e cos t))`
//!
//! under the boundary condition `x(2pi) = omega x(0)`, its restrictions to
//! the two reflection-invariant subspaces of the antiperiodic problem, and
//! the compact operator whose eigenvalues locate the degenerate `beta`.
//!
//! The twisted basis is `e^{i(k + sigma)t} (x) C^2`, `k = -N..N`,
//! `sigma = arg(omega) / 2pi`, ordered as row `2(k + N) + c`. All matrices
//! are Galerkin matrices divided by the common norm of the basis functions.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fourier::{inverse_denominator, FourierSeries};
use crate::model::Params;
use crate::C64;

/// Default number of modes per component.
pub const DEFAULT_N: usize = 128;
/// Default relative zero threshold for eigenvalue counting.
pub const NULL_TOL: f64 = 1e-7;
/// Smallest admissible truncation.
pub const MIN_N: usize = 8;

/// Subspaces of the antiperiodic problem on `[0, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// `x(0) = 0`, `y(pi) = 0`.
    E1,
    /// `x(pi) = 0`, `y(0) = 0`.
    E2,
}

/// Boundary condition an operator was assembled under.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    Omega(C64),
    Restricted(Space),
}

/// A Hermitian truncation together with its basis description.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub entries: DMatrix<C64>,
    pub boundary: Boundary,
    /// Modes per component.
    pub n_modes: usize,
    /// Number of vector components (2, or 1 for the scalar operator).
    pub components: usize,
}

/// Eigenvalues and index counts of a truncated operator.
#[derive(Clone, Debug)]
pub struct OperatorSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub morse_index: usize,
    pub nullity: usize,
    pub truncation: usize,
    pub null_tol: f64,
    pub boundary: Boundary,
    /// `Some(false)` when a re-check at twice the truncation changed the
    /// counts; `None` when no re-check was run.
    pub converged: Option<bool>,
}

impl OperatorSpectrum {
    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// `sigma = arg(omega) / 2pi` in `[0, 1)`.
pub fn twist(omega: C64) -> Result<f64> {
    if (omega.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParams(format!("|omega| = {} != 1", omega.norm())));
    }
    let s = omega.arg() / TAU;
    Ok(if s < 0.0 { s + 1.0 } else if s >= 1.0 { 0.0 } else { s })
}

fn check_n(n: usize) -> Result<()> {
    if n < MIN_N {
        return Err(Error::InvalidParams(format!("truncation N = {n} below {MIN_N}")));
    }
    Ok(())
}

/// Real, even coefficients of `g = 1/(1 + e cos t)` with the harmonic
/// products needed by the assembly.
struct Potential {
    g: FourierSeries,
}

impl Potential {
    fn new(e: f64, order: usize) -> Result<Self> {
        Ok(Self { g: inverse_denominator(e, order)? })
    }

    fn g(&self, n: i64) -> f64 {
        self.g.re(n)
    }

    /// Coefficient of `g cos 2t`.
    fn gc(&self, n: i64) -> f64 {
        0.5 * (self.g(n - 2) + self.g(n + 2))
    }

    /// Coefficient of `g sin 2t`, which is purely imaginary: returns `b`
    /// with the coefficient equal to `-i b`.
    fn gs(&self, n: i64) -> f64 {
        0.5 * (self.g(n - 2) - self.g(n + 2))
    }
}

/// Multiplication by `(3 I + s S(t)) g / 2` between modes offset by `j`,
/// plus the `(k + sigma)^2 - 1` diagonal.
fn assemble_twisted(pot: &Potential, s: f64, scalar3: f64, sigma: f64, n: usize) -> DMatrix<C64> {
    let dim = 2 * (2 * n + 1);
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    let ni = n as i64;
    for k in -ni..=ni {
        for m in -ni..=ni {
            let j = k - m;
            let (r, c) = (2 * (k + ni) as usize, 2 * (m + ni) as usize);
            let diag = 0.5 * scalar3 * pot.g(j);
            let cc = 0.5 * s * pot.gc(j);
            // (g sin 2t)^_j = -i gs(j)
            let ss = C64::new(0.0, -0.5 * s * pot.gs(j));
            a[(r, c)] = C64::new(diag + cc, 0.0);
            a[(r + 1, c + 1)] = C64::new(diag - cc, 0.0);
            a[(r, c + 1)] = ss;
            a[(r + 1, c)] = ss;
            if k == m {
                let kin = (k as f64 + sigma).powi(2) - 1.0;
                a[(r, c)].re += kin;
                a[(r + 1, c + 1)].re += kin;
            }
        }
    }
    a
}

/// Truncation of `A(beta, e)` under the `omega` boundary condition.
pub fn assemble_a(p: &Params, omega: C64, n: usize) -> Result<TruncatedOperator> {
    check_n(n)?;
    let sigma = twist(omega)?;
    let pot = Potential::new(p.ecc, 2 * n + 4)?;
    Ok(TruncatedOperator {
        entries: assemble_twisted(&pot, p.root(), 3.0, sigma, n),
        boundary: Boundary::Omega(omega),
        n_modes: n,
        components: 2,
    })
}

/// `A(beta, e) / sqrt(9 - beta)` for `beta < 9`.
pub fn assemble_a_scaled(p: &Params, omega: C64, n: usize) -> Result<TruncatedOperator> {
    if !(p.beta < 9.0) {
        return Err(Error::InvalidParams("scaled operator needs beta < 9".into()));
    }
    let mut t = assemble_a(p, omega, n)?;
    t.entries /= C64::new(p.root(), 0.0);
    Ok(t)
}

/// Scalar operator `-d^2/dt^2 - 1 + 3 / (2 (1 + e cos t))`.
pub fn assemble_a1(e: f64, omega: C64, n: usize) -> Result<TruncatedOperator> {
    check_n(n)?;
    let sigma = twist(omega)?;
    let pot = Potential::new(e, 2 * n + 4)?;
    Ok(TruncatedOperator {
        entries: scalar_a1(&pot, sigma, n),
        boundary: Boundary::Omega(omega),
        n_modes: n,
        components: 1,
    })
}

fn scalar_a1(pot: &Potential, sigma: f64, n: usize) -> DMatrix<C64> {
    let dim = 2 * n + 1;
    let ni = n as i64;
    DMatrix::from_fn(dim, dim, |r, c| {
        let (k, m) = (r as i64 - ni, c as i64 - ni);
        let mut v = 1.5 * pot.g(k - m);
        if k == m {
            v += (k as f64 + sigma).powi(2) - 1.0;
        }
        C64::new(v, 0.0)
    })
}

impl TruncatedOperator {
    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    /// `||T - T*|| / ||T||`.
    pub fn hermitian_residual(&self) -> f64 {
        let t = &self.entries;
        (t - t.adjoint()).norm() / t.norm().max(f64::MIN_POSITIVE)
    }

    fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut ev: Vec<f64> = if self.is_real() {
            let re = self.entries.map(|z| z.re);
            let re = (&re + re.transpose()) * 0.5;
            re.symmetric_eigenvalues().iter().copied().collect()
        } else {
            let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
            h.symmetric_eigenvalues().iter().copied().collect()
        };
        if ev.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eigen("non-finite eigenvalue".into()));
        }
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}

/// Counts eigenvalues below `-thr` and within `[-thr, thr]`, where
/// `thr = null_tol * max(1, |lambda_min|)`.
pub fn count(eigenvalues: &[f64], null_tol: f64) -> (usize, usize, f64) {
    let scale = eigenvalues.first().map_or(1.0, |l| l.abs().max(1.0));
    let thr = null_tol * scale;
    let morse = eigenvalues.iter().filter(|&&l| l < -thr).count();
    let null = eigenvalues.iter().filter(|&&l| l.abs() <= thr).count();
    (morse, null, thr)
}

/// Full eigensolve and index counts.
pub fn morse_and_nullity(t: &TruncatedOperator, null_tol: f64) -> Result<OperatorSpectrum> {
    let h = t.hermitian_residual();
    if h > 1e-12 {
        return Err(Error::Consistency(format!("operator not Hermitian: {h:e}")));
    }
    let eigenvalues = t.eigenvalues()?;
    let (morse_index, nullity, _) = count(&eigenvalues, null_tol);
    Ok(OperatorSpectrum {
        eigenvalues,
        morse_index,
        nullity,
        truncation: t.n_modes,
        null_tol,
        boundary: t.boundary,
        converged: None,
    })
}

/// [`morse_and_nullity`] of `A(beta, e)` at `N`, re-checked at `2N`.
pub fn morse_and_nullity_checked(
    p: &Params,
    omega: C64,
    n: usize,
    null_tol: f64,
) -> Result<OperatorSpectrum> {
    let mut s = morse_and_nullity(&assemble_a(p, omega, n)?, null_tol)?;
    let fine = morse_and_nullity(&assemble_a(p, omega, 2 * n)?, null_tol)?;
    s.converged = Some(fine.morse_index == s.morse_index && fine.nullity == s.nullity);
    Ok(s)
}

/// Restriction of `A(beta, e)` at `omega = -1` to `E1` or `E2`, in the
/// half-integer basis `sin/cos((k + 1/2) t)`, `k = 0..N-1`, interleaved as
/// row `2k + c`. Real symmetric.
pub fn assemble_restricted(p: &Params, space: Space, n: usize) -> Result<TruncatedOperator> {
    check_n(n)?;
    let pot = Potential::new(p.ecc, 2 * n + 4)?;
    Ok(TruncatedOperator {
        entries: restricted_matrix(&pot, p.root(), space, n).map(|x| C64::new(x, 0.0)),
        boundary: Boundary::Restricted(space),
        n_modes: n,
        components: 2,
    })
}

fn restricted_matrix(pot: &Potential, s: f64, space: Space, n: usize) -> DMatrix<f64> {
    // even parts -1 + g (3 +- s cos 2t) / 2, odd part h_n from s g sin 2t / 2
    let w11 = |j: i64| -f64::from(u8::from(j == 0)) + 0.5 * (3.0 * pot.g(j) + s * pot.gc(j));
    let w22 = |j: i64| -f64::from(u8::from(j == 0)) + 0.5 * (3.0 * pot.g(j) - s * pot.gc(j));
    let h = |j: i64| 0.5 * s * pot.gs(j);
    let sgn = match space {
        Space::E1 => 1.0,
        Space::E2 => -1.0,
    };
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let (ii, jj) = (i as i64, j as i64);
            let (d, sm) = (ii - jj, ii + jj + 1);
            let kin = if i == j { (i as f64 + 0.5).powi(2) } else { 0.0 };
            a[(2 * i, 2 * j)] = kin + w11(d) - sgn * w11(sm);
            a[(2 * i + 1, 2 * j + 1)] = kin + w22(d) + sgn * w22(sm);
            let off = h(sm) + sgn * h(d);
            a[(2 * i, 2 * j + 1)] = off;
            a[(2 * j + 1, 2 * i)] = off;
        }
    }
    a
}

/// Coefficients of `x0 = R(t) z(t)`, `z = (c sin(t/2), cos(t/2))`,
/// `c = (7 - sqrt 33) / 4`, in the `E1` basis.
pub fn kernel_vector_34(n: usize) -> DVector<f64> {
    let c = (7.0 - 33f64.sqrt()) / 4.0;
    let mut v = DVector::zeros(2 * n);
    v[0] = -(c + 1.0) / 2.0;
    v[1] = (c + 1.0) / 2.0;
    v[2] = (c - 1.0) / 2.0;
    v[3] = (1.0 - c) / 2.0;
    v
}

/// `||A(beta, 0) x0|| / ||x0||` on `E1`.
pub fn kernel_residual(beta: f64, n: usize) -> Result<f64> {
    let p = Params::new(beta, 0.0)?;
    let t = assemble_restricted(&p, Space::E1, n)?;
    let a = t.entries.map(|z| z.re);
    let v = kernel_vector_34(n);
    Ok((a * &v).norm() / v.norm())
}

/// Residual of the explicit kernel vector at `beta = 3/4`.
pub fn kernel_residual_34(n: usize) -> f64 {
    kernel_residual(0.75, n.max(MIN_N)).expect("fixed valid parameters")
}

/// The compact operator `A(9,e)^{-1/2} (S g / 2) A(9,e)^{-1/2}` and its
/// ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct CompactSpectrum {
    pub matrix: DMatrix<C64>,
    pub eigenvalues: Vec<f64>,
    pub n_modes: usize,
}

/// `A1^{-1/2}` for the scalar operator; the vector `A(9, e)` is two copies.
fn a1_inv_sqrt(pot: &Potential, sigma: f64, n: usize) -> Result<DMatrix<C64>> {
    let a1 = scalar_a1(pot, sigma, n);
    let h = (&a1 + a1.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    if let Some(bad) = eig.eigenvalues.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::ModelViolation(format!(
            "A(9, e) has nonpositive eigenvalue {bad:e}"
        )));
    }
    let q = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0)));
    Ok(q * d * q.adjoint())
}

/// Builds the compact operator at truncation `N` and returns all of its
/// eigenvalues.
pub fn assemble_b_compact(e: f64, omega: C64, n: usize) -> Result<CompactSpectrum> {
    check_n(n)?;
    if !(e.abs() < 1.0) {
        return Err(Error::InvalidParams(format!("|e| = {} must be < 1", e.abs())));
    }
    let sigma = twist(omega)?;
    let pot = Potential::new(e, 2 * n + 4)?;
    let r = a1_inv_sqrt(&pot, sigma, n)?;
    let dim = 2 * n + 1;
    // R (x) I2 in the interleaved ordering
    let mut big = DMatrix::<C64>::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        for j in 0..dim {
            big[(2 * i, 2 * j)] = r[(i, j)];
            big[(2 * i + 1, 2 * j + 1)] = r[(i, j)];
        }
    }
    // multiplication by S g / 2: the twisted assembly with s = 1, no scalar
    // part and no kinetic diagonal
    let mut w = assemble_twisted(&pot, 1.0, 0.0, sigma, n);
    let ni = n as i64;
    for k in -ni..=ni {
        let r = 2 * (k + ni) as usize;
        let kin = (k as f64 + sigma).powi(2) - 1.0;
        w[(r, r)].re -= kin;
        w[(r + 1, r + 1)].re -= kin;
    }
    let b = &big * w * &big;
    let b = (&b + b.adjoint()) * C64::new(0.5, 0.0);
    let mut eigenvalues: Vec<f64> = b.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(CompactSpectrum { matrix: b, eigenvalues, n_modes: n })
}

/// The same spectrum through the circular-coordinate block form: with
/// `p = x1 + i x2`, `q = x1 - i x2` the operator is `[[0, X], [X*, 0]]`,
/// `X = A1^{-1/2} C A1^{-1/2}`, `C_{km} = g_{k-m-2} / 2`, so its eigenvalues
/// are the singular values of `X` with both signs.
pub fn b_compact_by_blocks(e: f64, omega: C64, n: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    let sigma = twist(omega)?;
    let pot = Potential::new(e, 2 * n + 4)?;
    let r = a1_inv_sqrt(&pot, sigma, n)?;
    let dim = 2 * n + 1;
    let c = DMatrix::from_fn(dim, dim, |i, j| {
        C64::new(0.5 * pot.g(i as i64 - j as i64 - 2), 0.0)
    });
    let x = &r * c * &r;
    let sv = x.singular_values();
    let mut out: Vec<f64> = sv.iter().flat_map(|&s| [s, -s]).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `beta` at which `mu` is an eigenvalue of the compact operator.
pub fn beta_from_mu(mu: f64) -> f64 {
    9.0 - 1.0 / (mu * mu)
}

/// Inverse of [`beta_from_mu`] on the negative branch.
pub fn mu_from_beta(beta: f64) -> f64 {
    -1.0 / (9.0 - beta).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(beta: f64, e: f64) -> Params {
        Params::new(beta, e).unwrap()
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn equal_mass_circular_is_diagonal() {
        let n = 8;
        let t = assemble_a(&p(9.0, 0.0), one(), n).unwrap();
        let a = &t.entries;
        for r in 0..t.dimension() {
            for c in 0..t.dimension() {
                let k = (r / 2) as f64 - n as f64;
                let want = if r == c { k * k - 1.0 + 1.5 } else { 0.0 };
                assert!((a[(r, c)] - C64::new(want, 0.0)).norm() < 1e-14, "({r},{c})");
            }
        }
    }

    #[test]
    fn hermitian_for_complex_omega() {
        let t = assemble_a(&p(2.0, 0.6), C64::from_polar(1.0, 1.1), 16).unwrap();
        assert!(t.hermitian_residual() < 1e-14);
        assert!(!t.is_real());
    }

    #[test]
    fn twist_range() {
        assert_eq!(twist(one()).unwrap(), 0.0);
        assert!((twist(C64::new(-1.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((twist(C64::from_polar(1.0, -PI / 2.0)).unwrap() - 0.75).abs() < 1e-15);
        assert!(twist(C64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn counting_threshold() {
        let (m, z, _) = count(&[-3.0, -1e-9, 2e-8, 1.0], 1e-7);
        assert_eq!((m, z), (1, 2));
    }

    #[test]
    fn truncation_guard() {
        assert!(assemble_a(&p(1.0, 0.0), one(), 4).is_err());
    }

    #[test]
    fn kernel_vector_is_annihilated() {
        assert!(kernel_residual_34(16) < 1e-12);
    }

    #[test]
    fn restricted_is_symmetric() {
        for space in [Space::E1, Space::E2] {
            let t = assemble_restricted(&p(3.0, 0.7), space, 12).unwrap();
            assert!(t.hermitian_residual() < 1e-15);
        }
    }
}
