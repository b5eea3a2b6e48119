//! Fourier coefficients of smooth 2pi-periodic functions by FFT quadrature.

use std::f64::consts::TAU;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::C64;

const TAIL_TOL: f64 = 1e-13;
const MAX_POINTS: usize = 1 << 20;

/// Coefficients `c_n = (1/2pi) int f(t) e^{-int} dt` for `|n| <= order`.
#[derive(Clone, Debug)]
pub struct FourierSeries {
    order: usize,
    coeffs: Vec<C64>,
    /// Number of quadrature points actually used.
    pub points: usize,
}

impl FourierSeries {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `c_n`, zero beyond the stored order.
    pub fn get(&self, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.order {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[(n + self.order as i64) as usize]
    }

    pub fn re(&self, n: i64) -> f64 {
        self.get(n).re
    }
}

/// Samples `f` on at least `8 * order` points (a power of two), doubling
/// until the coefficients near the Nyquist index fall below `1e-13`
/// relative to the largest one.
pub fn coefficients<F: Fn(f64) -> f64>(f: F, order: usize) -> Result<FourierSeries> {
    let mut m = (8 * order).max(64).next_power_of_two();
    let mut planner = FftPlanner::new();
    loop {
        let fft = planner.plan_fft_forward(m);
        let mut buf: Vec<C64> = (0..m)
            .map(|j| C64::new(f(TAU * j as f64 / m as f64), 0.0))
            .collect();
        fft.process(&mut buf);
        let scale = 1.0 / m as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
        let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tail = buf[m / 4..=m / 2].iter().map(|z| z.norm()).fold(0.0, f64::max);
        if tail <= TAIL_TOL * peak.max(f64::MIN_POSITIVE) || peak == 0.0 {
            let coeffs = (-(order as i64)..=order as i64)
                .map(|n| buf[n.rem_euclid(m as i64) as usize])
                .collect();
            return Ok(FourierSeries { order, coeffs, points: m });
        }
        if m >= MAX_POINTS {
            return Err(Error::Consistency(format!(
                "Fourier tail {tail:e} still above tolerance with {m} points"
            )));
        }
        m *= 2;
    }
}

/// Coefficients of `1 / (1 + e cos t)`.
pub fn inverse_denominator(e: f64, order: usize) -> Result<FourierSeries> {
    if !(e.abs() < 1.0) {
        return Err(Error::InvalidParams(format!("|e| = {} must be < 1", e.abs())));
    }
    coefficients(|t| 1.0 / (1.0 + e * t.cos()), order)
}
