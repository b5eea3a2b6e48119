//! Real symplectic 4x4 and 2x2 matrices: spectra, stability classes,
//! omega-multiplicities, Krein signs and the `D_omega` function.
//!
//! The standard structure is `J = [[0, -I], [I, 0]]` with coordinates
//! ordered `(q1, q2, p1, p2)`.

use std::fmt;

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::C64;

/// Default relative tolerance on `||M^T J M - J||`.
pub const SP_TOL: f64 = 1e-6;
/// Default half-width of the band around the unit circle and the real axis.
pub const CLASS_TOL: f64 = 1e-6;
/// Default relative singular-value threshold for `nu_omega`.
pub const NU_TOL: f64 = 1e-8;
/// Relative threshold below which a Krein form counts as zero.
pub const KREIN_TOL: f64 = 1e-6;

/// The 4x4 standard symplectic matrix.
pub fn j4() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 2)] = -1.0;
    j[(1, 3)] = -1.0;
    j[(2, 0)] = 1.0;
    j[(3, 1)] = 1.0;
    j
}

/// The 2x2 standard symplectic matrix.
pub fn j2() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// Rotation `R(theta)`.
pub fn rot(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Dilation `D(lambda) = diag(lambda, 1/lambda)`.
pub fn dil(lambda: f64) -> Matrix2<f64> {
    Matrix2::new(lambda, 0.0, 0.0, 1.0 / lambda)
}

/// The symplectic sum of two 2x2 blocks, interleaving them into the
/// `(q1, q2, p1, p2)` ordering.
pub fn diamond(m1: &Matrix2<f64>, m2: &Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        m[(2 * r, 2 * c)] = m1[(r, c)];
        m[(2 * r + 1, 2 * c + 1)] = m2[(r, c)];
    }
    m
}

/// Inverse of [`diamond`]: extracts the two 2x2 blocks.
pub fn split_diamond(m: &Matrix4<f64>) -> (Matrix2<f64>, Matrix2<f64>) {
    let mut a = Matrix2::zeros();
    let mut b = Matrix2::zeros();
    for r in 0..2 {
        for c in 0..2 {
            a[(r, c)] = m[(2 * r, 2 * c)];
            b[(r, c)] = m[(2 * r + 1, 2 * c + 1)];
        }
    }
    (a, b)
}

/// `||M^T J M - J||_F / max(1, ||M||_F^2)`.
pub fn sp_residual(m: &Matrix4<f64>) -> f64 {
    let j = j4();
    let scale = m.norm_squared().max(1.0);
    (m.transpose() * j * m - j).norm() / scale
}

/// A real 4x4 matrix that passed the symplecticity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpMatrix4(Matrix4<f64>);

impl SpMatrix4 {
    /// Accepts `m` if its relative symplectic residual is at most `sp_tol`.
    pub fn new(m: Matrix4<f64>, sp_tol: f64) -> Result<Self> {
        let residual = sp_residual(&m);
        if !(residual <= sp_tol) {
            return Err(Error::NotSymplectic { residual, tol: sp_tol });
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    /// Wraps a matrix known to be symplectic by construction.
    pub fn from_matrix_unchecked(m: Matrix4<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn residual(&self) -> f64 {
        sp_residual(&self.0)
    }
}

impl From<SpMatrix4> for Matrix4<f64> {
    fn from(m: SpMatrix4) -> Self {
        m.0
    }
}

/// Stability class of a 4x4 symplectic matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    EE,
    EH,
    HH,
    CS,
    Degenerate,
}

impl StabilityClass {
    pub fn code(self) -> &'static str {
        match self {
            Self::EE => "EE",
            Self::EH => "EH",
            Self::HH => "HH",
            Self::CS => "CS",
            Self::Degenerate => "DEGENERATE",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        Some(match s {
            "EE" => Self::EE,
            "EH" => Self::EH,
            "HH" => Self::HH,
            "CS" => Self::CS,
            "DEGENERATE" => Self::Degenerate,
            _ => return None,
        })
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Eigenvalues and unit-norm eigenvectors of a 4x4 symplectic matrix.
#[derive(Clone, Debug)]
pub struct Eigen4 {
    pub values: [C64; 4],
    pub vectors: [Vector4<C64>; 4],
}

const PERMS4: [[usize; 4]; 24] = [
    [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
    [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
    [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
    [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
];

/// Permutation `p` minimizing `sum_i |a[i] - b[p[i]]|`; ties go to the
/// first permutation in lexicographic order.
pub fn best_matching(a: &[C64; 4], b: &[C64; 4]) -> [usize; 4] {
    let mut best = PERMS4[0];
    let mut best_cost = f64::INFINITY;
    for p in PERMS4 {
        let cost: f64 = (0..4).map(|i| (a[i] - b[p[i]]).norm()).sum();
        if cost < best_cost {
            best_cost = cost;
            best = p;
        }
    }
    best
}

/// Averages each eigenvalue over its images under conjugation, inversion
/// and conjugate-inversion so the set carries the symplectic symmetry.
fn symmetrize(raw: &[C64; 4]) -> [C64; 4] {
    let maps: [fn(C64) -> C64; 3] = [|z| z.conj(), |z| z.inv(), |z| z.conj().inv()];
    let mut acc = *raw;
    for g in maps {
        let image: [C64; 4] = std::array::from_fn(|i| g(raw[i]));
        let p = best_matching(raw, &image);
        for i in 0..4 {
            acc[i] += image[p[i]];
        }
    }
    acc.map(|z| z / 4.0)
}

/// Canonical order: by modulus, then by argument in `[0, 2pi)`. Moduli
/// closer than `1e-9` count as equal so roundoff cannot reorder a pair.
fn canonical_cmp(a: &C64, b: &C64) -> std::cmp::Ordering {
    let (ma, mb) = (a.norm(), b.norm());
    if (ma - mb).abs() > 1e-9 * ma.max(mb).max(1.0) {
        return ma.total_cmp(&mb);
    }
    let arg = |z: &C64| {
        let t = z.arg();
        if t < 0.0 {
            t + std::f64::consts::TAU
        } else {
            t
        }
    };
    arg(a).total_cmp(&arg(b))
}

fn complexify(m: &Matrix4<f64>) -> Matrix4<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Unit right null vector of `M - lambda I` from the smallest singular value.
fn null_vector(m: &Matrix4<f64>, lambda: C64) -> Vector4<C64> {
    let shifted = complexify(m) - Matrix4::<C64>::identity() * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let imin = svd.singular_values.imin();
    v_t.row(imin).adjoint()
}

/// Eigenvalues (symmetrized, canonically sorted) and eigenvectors.
pub fn eigen4(m: &SpMatrix4) -> Result<Eigen4> {
    let residual = m.residual();
    if !(residual <= SP_TOL) {
        return Err(Error::NotSymplectic { residual, tol: SP_TOL });
    }
    let raw = m.matrix().complex_eigenvalues();
    if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let raw: [C64; 4] = [raw[0], raw[1], raw[2], raw[3]];
    let mut values = symmetrize(&raw);
    values.sort_by(canonical_cmp);
    let vectors = values.map(|l| null_vector(m.matrix(), l));
    Ok(Eigen4 { values, vectors })
}

/// Stability report of a 4x4 symplectic matrix.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub eigenvalues: [C64; 4],
    pub stability_class: StabilityClass,
    /// Number of eigenvalues within the unit-circle band, `e(M)`.
    pub unit_circle_count: usize,
    /// Krein signs of the unit-circle eigenvalues other than `+-1`.
    pub krein: Vec<(C64, i8)>,
    pub geo_mult_plus1: usize,
    pub geo_mult_minus1: usize,
}

impl SpectrumReport {
    /// True when two unit-circle eigenvalues closer than `dist` carry
    /// opposite Krein signs, or when some Krein form vanishes.
    pub fn krein_collision(&self, dist: f64) -> bool {
        if self.krein.iter().any(|&(_, s)| s == 0) {
            return true;
        }
        self.krein.iter().enumerate().any(|(i, &(a, sa))| {
            self.krein[i + 1..]
                .iter()
                .any(|&(b, sb)| sa != sb && (a - b).norm() < dist)
        })
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.unit_circle_count == 0
    }
}

/// Classifies `m` by the location of its eigenvalues relative to the unit
/// circle and the real axis.
pub fn classify(m: &SpMatrix4, class_tol: f64) -> Result<SpectrumReport> {
    let eig = eigen4(m)?;
    let on_u = |z: &C64| (z.norm() - 1.0).abs() <= class_tol;
    let on_r = |z: &C64| z.im.abs() <= class_tol * z.norm();
    let near_pm1 = |z: &C64| {
        (z - C64::new(1.0, 0.0)).norm() <= class_tol || (z + C64::new(1.0, 0.0)).norm() <= class_tol
    };

    let unit = eig.values.iter().filter(|z| on_u(z)).count();
    let real = eig.values.iter().filter(|z| !on_u(z) && on_r(z)).count();
    let degenerate = eig.values.iter().any(near_pm1);
    let stability_class = if degenerate {
        StabilityClass::Degenerate
    } else {
        match (unit, real) {
            (4, 0) => StabilityClass::EE,
            (2, 2) => StabilityClass::EH,
            (0, 4) => StabilityClass::HH,
            (0, 0) => StabilityClass::CS,
            _ => StabilityClass::Degenerate,
        }
    };

    let mut krein = Vec::new();
    for (l, v) in eig.values.iter().zip(eig.vectors.iter()) {
        if on_u(l) && !near_pm1(l) {
            krein.push((*l, krein_form_sign(v)));
        }
    }

    Ok(SpectrumReport {
        eigenvalues: eig.values,
        stability_class,
        unit_circle_count: unit,
        krein,
        geo_mult_plus1: nu_omega(m.matrix(), C64::new(1.0, 0.0), NU_TOL),
        geo_mult_minus1: nu_omega(m.matrix(), C64::new(-1.0, 0.0), NU_TOL),
    })
}

fn krein_form_sign(v: &Vector4<C64>) -> i8 {
    let jc = complexify(&j4());
    let form = (v.adjoint() * jc * v)[(0, 0)] * C64::new(0.0, -1.0);
    if form.re.abs() < KREIN_TOL * v.norm_squared() {
        0
    } else {
        form.re.signum() as i8
    }
}

/// Sign of the Krein form `-i conj(v)^T J v` for a unit-circle eigenpair.
pub fn krein_sign(m: &SpMatrix4, lambda: C64, v: &Vector4<C64>) -> Result<i8> {
    if (lambda - C64::new(1.0, 0.0)).norm() < 1e-12 || (lambda + C64::new(1.0, 0.0)).norm() < 1e-12
    {
        return Err(Error::InvalidParams(
            "Krein sign is undefined at eigenvalue +-1".into(),
        ));
    }
    let mv = complexify(m.matrix()) * v;
    let res = (mv - v * lambda).norm();
    if res > 1e-6 * (1.0 + m.matrix().norm()) * v.norm() {
        return Err(Error::InvalidParams(format!(
            "not an eigenpair: residual {res:e}"
        )));
    }
    Ok(krein_form_sign(v))
}

fn shifted(m: &DMatrix<f64>, omega: C64) -> DMatrix<C64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |r, c| {
        let x = C64::new(m[(r, c)], 0.0);
        if r == c {
            x - omega
        } else {
            x
        }
    })
}

fn nu_generic(m: &DMatrix<f64>, omega: C64, tol: f64) -> usize {
    let thresh = tol * m.norm();
    shifted(m, omega)
        .singular_values()
        .iter()
        .filter(|&&s| s < thresh)
        .count()
}

fn d_generic(m: &DMatrix<f64>, omega: C64) -> Result<f64> {
    let n = m.nrows() / 2;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let val = shifted(m, omega).determinant() * omega.conj().powi(n as i32) * sign;
    let scale = (1.0 + m.norm()).powi(2 * n as i32);
    if val.im.abs() >= 1e-10 * scale {
        return Err(Error::Consistency(format!(
            "D_omega has imaginary part {:e}",
            val.im
        )));
    }
    Ok(val.re)
}

/// `dim ker(M - omega I)`: singular values below `tol * ||M||_F`.
pub fn nu_omega(m: &Matrix4<f64>, omega: C64, tol: f64) -> usize {
    nu_generic(&DMatrix::from_column_slice(4, 4, m.as_slice()), omega, tol)
}

/// 2x2 variant of [`nu_omega`].
pub fn nu_omega2(m: &Matrix2<f64>, omega: C64, tol: f64) -> usize {
    nu_generic(&DMatrix::from_column_slice(2, 2, m.as_slice()), omega, tol)
}

/// `D_omega(M) = (-1)^(n-1) conj(omega)^n det(M - omega I)` for `n = 2`.
pub fn d_omega(m: &Matrix4<f64>, omega: C64) -> Result<f64> {
    d_generic(&DMatrix::from_column_slice(4, 4, m.as_slice()), omega)
}

/// 2x2 variant of [`d_omega`] (`n = 1`).
pub fn d_omega2(m: &Matrix2<f64>, omega: C64) -> Result<f64> {
    d_generic(&DMatrix::from_column_slice(2, 2, m.as_slice()), omega)
}

fn det3(m: &Matrix4<C64>, rows: [usize; 3], cols: [usize; 3]) -> C64 {
    let a = |i: usize, j: usize| m[(rows[i], cols[j])];
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
        - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

fn others(k: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut n = 0;
    for i in 0..4 {
        if i != k {
            out[n] = i;
            n += 1;
        }
    }
    out
}

/// Adjugate and determinant by cofactors; well defined at singular input,
/// which is where derivatives of `D_omega` are needed.
pub fn adjugate4(m: &Matrix4<C64>) -> (Matrix4<C64>, C64) {
    let mut adj = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // adj[j][i] is the (i, j) cofactor
            adj[(j, i)] = det3(m, others(i), others(j)) * sign;
        }
    }
    let det = (0..4).map(|j| m[(0, j)] * adj[(j, 0)]).sum();
    (adj, det)
}

/// `D_omega(M)` and its directional derivative along `dm`, without the
/// imaginary-part check.
pub fn d_omega_and_derivative(m: &Matrix4<f64>, dm: &Matrix4<f64>, omega: C64) -> (f64, f64) {
    let a = complexify(m) - Matrix4::<C64>::identity() * omega;
    let (adj, det) = adjugate4(&a);
    let pre = -omega.conj().powi(2);
    let ddet = (adj * complexify(dm)).trace();
    ((pre * det).re, (pre * ddet).re)
}
