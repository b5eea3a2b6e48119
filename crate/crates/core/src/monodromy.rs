//! Fundamental solutions over one period, in the inertial (`gamma`) and
//! rotating (`xi`) frames, plus the 2x2 equal-mass factor.

use std::f64::consts::TAU;
use std::io::{self, Write};

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::model::{coeff_jb, coeff_xi, Params};
use crate::ode::{integrate, DenseSolution, OdeOptions};
use crate::symplectic::{j2, sp_residual, SpMatrix4};

/// Integrator settings for the fundamental solutions.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of uniformly spaced dense-output samples (plus the endpoint).
    pub min_samples: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-12,
            min_samples: 512,
        }
    }
}

impl IntegratorOptions {
    fn ode(&self) -> OdeOptions {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..Default::default()
        }
    }
}

/// Which frame a path was integrated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Inertial,
    Rotating,
}

/// A continuous symplectic path on `[0, span]` starting at the identity.
pub trait SymplecticPath {
    fn span(&self) -> f64;
    fn at(&self, t: f64) -> Matrix4<f64>;
    /// Time derivative of [`SymplecticPath::at`].
    fn velocity(&self, t: f64) -> Matrix4<f64>;
    fn endpoint(&self) -> Matrix4<f64>;
}

/// A sampled fundamental solution with its continuous interpolant.
#[derive(Clone, Debug)]
pub struct PathSamples {
    pub params: Params,
    pub frame: Frame,
    pub times: Vec<f64>,
    pub matrices: Vec<Matrix4<f64>>,
    /// Raw value at `2 pi`; symplecticity is reported, not enforced.
    pub endpoint: SpMatrix4,
    /// Maximum relative symplectic residual over the samples.
    pub sp_residual: f64,
    dense: DenseSolution,
}

fn to_matrix(y: &[f64]) -> Matrix4<f64> {
    Matrix4::from_column_slice(y)
}

fn coefficient(p: &Params, frame: Frame, t: f64) -> Result<Matrix4<f64>> {
    match frame {
        Frame::Inertial => coeff_jb(p, t),
        Frame::Rotating => coeff_xi(p, t),
    }
}

fn integrate_frame(p: Params, frame: Frame, opts: &IntegratorOptions) -> Result<PathSamples> {
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let a = coefficient(&p, frame, t)?;
        let d = a * to_matrix(y);
        dy.copy_from_slice(d.as_slice());
        Ok(())
    };
    let id = Matrix4::<f64>::identity();
    let dense = integrate(rhs, 0.0, id.as_slice(), TAU, &opts.ode())?;

    let n = opts.min_samples.max(1);
    let mut times = Vec::with_capacity(n + 1);
    let mut matrices = Vec::with_capacity(n + 1);
    let mut buf = [0.0; 16];
    for i in 0..=n {
        let t = if i == n { TAU } else { TAU * i as f64 / n as f64 };
        dense.eval_into(t, &mut buf);
        times.push(t);
        matrices.push(to_matrix(&buf));
    }
    let end = to_matrix(dense.end());
    if end.iter().any(|x| !x.is_finite()) {
        return Err(Error::Integration {
            t: TAU,
            reason: "non-finite endpoint".into(),
        });
    }
    let sp_residual = matrices.iter().map(sp_residual).fold(0.0, f64::max);
    Ok(PathSamples {
        params: p,
        frame,
        times,
        matrices,
        endpoint: SpMatrix4::from_matrix_unchecked(end),
        sp_residual,
        dense,
    })
}

/// Integrates `gamma' = J B(t) gamma`, `gamma(0) = I` over `[0, 2 pi]`.
pub fn integrate_gamma(p: Params, opts: &IntegratorOptions) -> Result<PathSamples> {
    integrate_frame(p, Frame::Inertial, opts)
}

/// Integrates the rotating-frame system `xi' = J diag(I, R (I - K) R^T) xi`.
pub fn integrate_xi(p: Params, opts: &IntegratorOptions) -> Result<PathSamples> {
    integrate_frame(p, Frame::Rotating, opts)
}

impl PathSamples {
    pub fn accepted_steps(&self) -> usize {
        self.dense.accepted()
    }

    /// Writes `t, m11, m12, ..., m44` (row-major) for every sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t")?;
        for r in 1..=4 {
            for c in 1..=4 {
                write!(w, ",m{r}{c}")?;
            }
        }
        writeln!(w)?;
        for (t, m) in self.times.iter().zip(&self.matrices) {
            write!(w, "{t:.16e}")?;
            for r in 0..4 {
                for c in 0..4 {
                    write!(w, ",{:.16e}", m[(r, c)])?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

impl SymplecticPath for PathSamples {
    fn span(&self) -> f64 {
        TAU
    }

    fn at(&self, t: f64) -> Matrix4<f64> {
        let mut buf = [0.0; 16];
        self.dense.eval_into(t, &mut buf);
        to_matrix(&buf)
    }

    fn velocity(&self, t: f64) -> Matrix4<f64> {
        let a = coefficient(&self.params, self.frame, t.clamp(0.0, TAU))
            .expect("coefficients were finite along the whole integration");
        a * self.at(t)
    }

    fn endpoint(&self) -> Matrix4<f64> {
        *self.endpoint.matrix()
    }
}

/// The `k`-fold iterate of a one-period path: `gamma(t + 2 pi j) =
/// gamma(t) gamma(2 pi)^j` on `[0, 2 pi k]`.
pub struct IteratedPath<'a, P: SymplecticPath> {
    base: &'a P,
    k: usize,
    powers: Vec<Matrix4<f64>>,
}

impl<'a, P: SymplecticPath> IteratedPath<'a, P> {
    pub fn new(base: &'a P, k: usize) -> Self {
        let k = k.max(1);
        let e = base.endpoint();
        let mut powers = vec![Matrix4::identity()];
        for j in 1..=k {
            powers.push(powers[j - 1] * e);
        }
        Self { base, k, powers }
    }

    fn split(&self, t: f64) -> (usize, f64) {
        let period = self.base.span();
        let j = ((t / period).floor().max(0.0) as usize).min(self.k - 1);
        (j, t - j as f64 * period)
    }
}

impl<P: SymplecticPath> SymplecticPath for IteratedPath<'_, P> {
    fn span(&self) -> f64 {
        self.base.span() * self.k as f64
    }

    fn at(&self, t: f64) -> Matrix4<f64> {
        let (j, s) = self.split(t);
        self.base.at(s) * self.powers[j]
    }

    fn velocity(&self, t: f64) -> Matrix4<f64> {
        let (j, s) = self.split(t);
        self.base.velocity(s) * self.powers[j]
    }

    fn endpoint(&self) -> Matrix4<f64> {
        self.powers[self.k]
    }
}

/// Sampled 2x2 factor path of the equal-mass case.
#[derive(Clone, Debug)]
pub struct FactorPath {
    pub ecc: f64,
    pub times: Vec<f64>,
    pub matrices: Vec<Matrix2<f64>>,
    pub endpoint: Matrix2<f64>,
}

/// Integrates `xi' = J diag(1, 1 - 3 / (2 (1 + e cos t))) xi` over one period.
pub fn equal_mass_factor(e: f64, opts: &IntegratorOptions) -> Result<FactorPath> {
    let p = Params::new(9.0, e)?;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let c = 1.0 - 3.0 / (2.0 * p.denom(t)?);
        let a = j2() * Matrix2::new(1.0, 0.0, 0.0, c);
        let d = a * Matrix2::from_column_slice(y);
        dy.copy_from_slice(d.as_slice());
        Ok(())
    };
    let id = Matrix2::<f64>::identity();
    let dense = integrate(rhs, 0.0, id.as_slice(), TAU, &opts.ode())?;
    let n = opts.min_samples.max(1);
    let times: Vec<f64> = (0..=n).map(|i| if i == n { TAU } else { TAU * i as f64 / n as f64 }).collect();
    let matrices = times
        .iter()
        .map(|&t| Matrix2::from_column_slice(&dense.eval(t)))
        .collect();
    Ok(FactorPath {
        ecc: e,
        times,
        matrices,
        endpoint: Matrix2::from_column_slice(dense.end()),
    })
}

/// `M^k` by repeated multiplication.
pub fn power_k(m: &SpMatrix4, k: u32) -> SpMatrix4 {
    let mut out = Matrix4::identity();
    for _ in 0..k {
        out *= m.matrix();
    }
    SpMatrix4::from_matrix_unchecked(out)
}
