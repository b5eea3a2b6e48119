//! Coefficients of the linearized essential system and its closed-form
//! solutions at `e = 0`.
//!
//! Time is the true anomaly `t`. The fundamental solution solves
//! `gamma' = J B(t) gamma`, `gamma(0) = I`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::symplectic::j4;
use crate::C64;

/// Default bound on `|e|`.
pub const E_MAX: f64 = 0.99;

/// The coordinate of every computation: mass parameter and eccentricity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub beta: f64,
    pub ecc: f64,
}

impl Params {
    /// Validates `0 <= beta <= 9` and `|ecc| <= E_MAX`.
    pub fn new(beta: f64, ecc: f64) -> Result<Self> {
        Self::with_e_max(beta, ecc, E_MAX)
    }

    pub fn with_e_max(beta: f64, ecc: f64, e_max: f64) -> Result<Self> {
        if !(0.0..=9.0).contains(&beta) {
            return Err(Error::InvalidParams(format!("beta = {beta} outside [0, 9]")));
        }
        if !(e_max < 1.0) || !(ecc.abs() <= e_max) {
            return Err(Error::InvalidParams(format!(
                "|e| = {} exceeds e_max = {e_max} (< 1 required)",
                ecc.abs()
            )));
        }
        Ok(Self { beta, ecc })
    }

    /// `sqrt(9 - beta)`.
    pub fn root(&self) -> f64 {
        (9.0 - self.beta).max(0.0).sqrt()
    }

    /// `1 + e cos t`, rejected below `1e-12`.
    pub fn denom(&self, t: f64) -> Result<f64> {
        let d = 1.0 + self.ecc * t.cos();
        if d < 1e-12 {
            return Err(Error::Singularity { t, denom: d });
        }
        Ok(d)
    }
}

/// The symmetric coefficient matrix `B(t)`.
pub fn coeff_b(p: &Params, t: f64) -> Result<Matrix4<f64>> {
    let d = p.denom(t)?;
    let ec = p.ecc * t.cos();
    let r = p.root();
    #[rustfmt::skip]
    let b = Matrix4::new(
        1.0, 0.0, 0.0, 1.0,
        0.0, 1.0, -1.0, 0.0,
        0.0, -1.0, (2.0 * ec - 1.0 - r) / (2.0 * d), 0.0,
        1.0, 0.0, 0.0, (2.0 * ec - 1.0 + r) / (2.0 * d),
    );
    Ok(b)
}

/// `J B(t)`, the right-hand side matrix of the fundamental system.
pub fn coeff_jb(p: &Params, t: f64) -> Result<Matrix4<f64>> {
    Ok(j4() * coeff_b(p, t)?)
}

/// `K(t) = diag((3 +- sqrt(9 - beta)) / (2 (1 + e cos t)))`.
pub fn coeff_k(p: &Params, t: f64) -> Result<Matrix2<f64>> {
    let d = 2.0 * p.denom(t)?;
    let r = p.root();
    Ok(Matrix2::new((3.0 + r) / d, 0.0, 0.0, (3.0 - r) / d))
}

/// `S(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]]`.
pub fn s_matrix(t: f64) -> Matrix2<f64> {
    let (s, c) = (2.0 * t).sin_cos();
    Matrix2::new(c, s, s, -c)
}

/// `R(t)`.
pub fn rot(t: f64) -> Matrix2<f64> {
    crate::symplectic::rot(t)
}

/// `R_4(t) = diag(R(t), R(t))` acting on `(q, p)`.
pub fn rot4(t: f64) -> Matrix4<f64> {
    let r = rot(t);
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&r);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&r);
    m
}

/// The rotating-frame coefficient: `xi' = J diag(I, R (I - K) R^T) xi`.
pub fn coeff_xi(p: &Params, t: f64) -> Result<Matrix4<f64>> {
    let r = rot(t);
    let lower = r * (Matrix2::identity() - coeff_k(p, t)?) * r.transpose();
    let mut b = Matrix4::identity();
    b.fixed_view_mut::<2, 2>(2, 2).copy_from(&lower);
    Ok(j4() * b)
}

/// Rotation numbers `(theta1, theta2)` at `e = 0`, `beta <= 1`.
pub fn thetas(beta: f64) -> (f64, f64) {
    let s = (1.0 - beta).max(0.0).sqrt();
    // (1 - s)/2 rewritten to avoid cancellation near beta = 0
    let t1 = (beta / (2.0 * (1.0 + s))).sqrt();
    let t2 = ((1.0 + s) / 2.0).sqrt();
    (t1, t2)
}

/// Characteristic multipliers of `gamma_{beta,0}(2 pi)`.
pub fn closed_form_multipliers_e0(beta: f64) -> [C64; 4] {
    if beta <= 1.0 {
        let (t1, t2) = thetas(beta);
        [
            C64::from_polar(1.0, 2.0 * PI * t1),
            C64::from_polar(1.0, -2.0 * PI * t1),
            C64::from_polar(1.0, 2.0 * PI * t2),
            C64::from_polar(1.0, -2.0 * PI * t2),
        ]
    } else {
        let sb = beta.sqrt();
        let re = PI * (sb - 1.0).sqrt();
        let im = PI * (sb + 1.0).sqrt();
        [
            C64::from_polar(re.exp(), im),
            C64::from_polar(re.exp(), -im),
            C64::from_polar((-re).exp(), im),
            C64::from_polar((-re).exp(), -im),
        ]
    }
}

/// The explicit fundamental solution at `(beta, e) = (0, 0)`.
pub fn gamma_00_explicit(t: f64) -> Matrix4<f64> {
    let (s, c) = t.sin_cos();
    #[rustfmt::skip]
    let m = Matrix4::new(
        2.0 - c, 3.0 * t - 2.0 * s, 3.0 * t - s, 1.0 - c,
        -s, 2.0 * c - 1.0, c - 1.0, -s,
        s, 2.0 - 2.0 * c, 2.0 - c, s,
        2.0 * c - 2.0, 4.0 * s - 3.0 * t, 2.0 * s - 3.0 * t, 2.0 * c - 1.0,
    );
    m
}
