//! The acceptance suite: fifteen numbered checks, each reported as one
//! JSON line with the expected value, the observed value and the tolerance.

use std::f64::consts::{PI, TAU};

use anyhow::{ensure, Result};
use lagrange_core::curves::{
    degeneracy_betas, gamma_k, index_jump, linspace, minus_one_pair, restricted_root, slope_at_origin,
    CurveLabel, CurveOptions,
};
use lagrange_core::index::{bott_check, omega_index_from_operator, omega_index_from_path, PathIndexOptions};
use lagrange_core::model::gamma_00_explicit;
use lagrange_core::monodromy::{integrate_gamma, IntegratorOptions, SymplecticPath};
use lagrange_core::spectral::{
    assemble_a, assemble_b_compact, kernel_residual_34, morse_and_nullity, Space, NULL_TOL,
};
use lagrange_core::symplectic::{best_matching, classify, d_omega, eigen4, nu_omega, StabilityClass, NU_TOL};
use lagrange_core::{Params, C64};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScanConfig;

pub const CRITERIA: [(u32, &str); 15] = [
    (1, "circular closed-form spectra"),
    (2, "explicit solution oracle"),
    (3, "degeneracy anchor at (0, -1)"),
    (4, "slopes at the origin"),
    (5, "index tables"),
    (6, "operator and path index agree"),
    (7, "positivity and hyperbolicity at beta = 9"),
    (8, "monotonicity in beta"),
    (9, "iteration identity"),
    (10, "kernel residual"),
    (11, "symmetries"),
    (12, "hyperbolic boundary anchor and ordering"),
    (13, "compact operator structure"),
    (14, "region structure at e = 0.2"),
    (15, "index jump certificate"),
];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub expected: String,
    pub got: String,
    pub tol: Option<f64>,
    pub pass: bool,
}

impl CriterionReport {
    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub integrator: IntegratorOptions,
    pub n_modes: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            integrator: IntegratorOptions::default(),
            n_modes: 64,
            seed: 20,
        }
    }
}

impl VerifyOptions {
    pub fn from_config(cfg: &ScanConfig) -> Self {
        Self {
            integrator: cfg.integrator(),
            n_modes: cfg.n_modes,
            seed: cfg.seed,
        }
    }

    fn curves(&self) -> CurveOptions {
        CurveOptions {
            n_modes: self.n_modes,
            integrator: self.integrator,
            ..Default::default()
        }
    }
}

struct Outcome {
    expected: String,
    got: String,
    tol: Option<f64>,
    pass: bool,
}

fn omega(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

fn params(beta: f64, e: f64) -> Result<Params> {
    Ok(Params::new(beta, e)?)
}

fn phi(beta: f64, e: f64, w: C64, n: usize) -> Result<(usize, usize)> {
    let s = morse_and_nullity(&assemble_a(&params(beta, e)?, w, n)?, NULL_TOL)?;
    Ok((s.morse_index, s.nullity))
}

/// Multipliers of the circular problem, written out independently of the
/// model module.
fn circular_multipliers(beta: f64) -> [C64; 4] {
    if beta <= 1.0 {
        let r = (1.0 - beta).sqrt();
        let t1 = ((1.0 - r) / 2.0).sqrt();
        let t2 = ((1.0 + r) / 2.0).sqrt();
        [omega(TAU * t1), omega(-TAU * t1), omega(TAU * t2), omega(-TAU * t2)]
    } else {
        let s = beta.sqrt();
        let a = PI * (s - 1.0).sqrt();
        let b = PI * (s + 1.0).sqrt();
        [
            C64::from_polar(a.exp(), b),
            C64::from_polar(a.exp(), -b),
            C64::from_polar((-a).exp(), b),
            C64::from_polar((-a).exp(), -b),
        ]
    }
}

fn c1(o: &VerifyOptions) -> Result<Outcome> {
    let tol = 1e-8;
    let (mut worst, mut raw, mut spread) = (0.0f64, 0.0f64, 0.0f64);
    for beta in [0.25, 0.5, 0.75, 1.0, 2.0, 4.0, 9.0] {
        let g = integrate_gamma(params(beta, 0.0)?, &o.integrator)?;
        let got = eigen4(&g.endpoint)?.values;
        let want = circular_multipliers(beta);
        let perm = best_matching(&want, &got);
        for i in 0..4 {
            raw = raw.max((got[perm[i]] - want[i]).norm());
            // coincident expected values are compared through the mean of
            // their matched cluster
            let members: Vec<usize> = (0..4).filter(|&j| (want[j] - want[i]).norm() < 1e-12).collect();
            let mean = members.iter().map(|&j| got[perm[j]]).sum::<C64>() / members.len() as f64;
            worst = worst.max((mean - want[i]).norm());
            for &j in &members {
                spread = spread.max((got[perm[j]] - mean).norm());
            }
        }
    }
    Ok(Outcome {
        expected: "matched multiplier error <= 1e-8".into(),
        got: format!("max error {worst:.3e} (cluster spread {spread:.3e}, raw pairwise {raw:.3e})"),
        tol: Some(tol),
        pass: worst <= tol && spread <= 1e-6,
    })
}

fn c2(o: &VerifyOptions) -> Result<Outcome> {
    let g = integrate_gamma(params(0.0, 0.0)?, &o.integrator)?;
    let worst = (1..=100)
        .map(|i| TAU * i as f64 / 100.0)
        .map(|t| (g.at(t) - gamma_00_explicit(t)).abs().max())
        .fold(0.0, f64::max);
    Ok(Outcome {
        expected: "entrywise error <= 1e-8 at 100 times".into(),
        got: format!("max entry error {worst:.3e}"),
        tol: Some(1e-8),
        pass: worst <= 1e-8,
    })
}

fn c3(_: &VerifyOptions) -> Result<Outcome> {
    let d = degeneracy_betas(0.0, omega(PI), 128)?;
    let err = (d.beta1 - 0.75).abs().max((d.beta2 - 0.75).abs());
    Ok(Outcome {
        expected: "(0.75, 0.75)".into(),
        got: format!("({:.12}, {:.12})", d.beta1, d.beta2),
        tol: Some(1e-6),
        pass: err <= 1e-6,
    })
}

fn c4(o: &VerifyOptions) -> Result<Outcome> {
    let co = o.curves();
    let want = 33f64.sqrt() / 4.0;
    let m1 = omega(PI);
    let s1 = slope_at_origin(CurveLabel::E1, m1, 0.01, &co)?;
    let s2 = slope_at_origin(CurveLabel::E2, m1, 0.01, &co)?;
    let i1 = slope_at_origin(CurveLabel::Beta1, C64::new(0.0, 1.0), 0.01, &co)?;
    let i2 = slope_at_origin(CurveLabel::Beta2, C64::new(0.0, 1.0), 0.01, &co)?;
    let pass = (s1.abs() - want).abs() <= 1e-2
        && (s2.abs() - want).abs() <= 1e-2
        && s1.signum() != s2.signum()
        && i1.abs() <= 1e-2
        && i2.abs() <= 1e-2;
    Ok(Outcome {
        expected: format!("E1/E2 slopes +-{want:.5}, omega = i slopes 0"),
        got: format!("E1 {s1:.5}, E2 {s2:.5}, omega = i: {i1:.2e}, {i2:.2e}"),
        tol: Some(1e-2),
        pass,
    })
}

fn c5(o: &VerifyOptions) -> Result<Outcome> {
    let n = o.n_modes;
    let mut bad = Vec::new();
    for (beta, want) in [(0.1, 2), (0.5, 2), (0.8, 0), (2.0, 0), (9.0, 0)] {
        let (i, _) = phi(beta, 0.0, omega(PI), n)?;
        if i != want {
            bad.push(format!("i_-1({beta}, 0) = {i}"));
        }
    }
    for (beta, e) in [(0.5, 0.2), (3.0, 0.5), (8.0, 0.8), (1.5, 0.3), (0.2, 0.6)] {
        let (i, nu) = phi(beta, e, omega(0.0), n)?;
        let g = integrate_gamma(params(beta, e)?, &o.integrator)?;
        let nu_m = nu_omega(g.endpoint.matrix(), omega(0.0), NU_TOL);
        if (i, nu, nu_m) != (0, 0, 0) {
            bad.push(format!("(i_1, nu_1, nu_1 matrix)({beta}, {e}) = ({i}, {nu}, {nu_m})"));
        }
    }
    for e in [0.0, 0.4] {
        let g = integrate_gamma(params(0.0, e)?, &o.integrator)?;
        let nu = nu_omega(g.endpoint.matrix(), omega(0.0), NU_TOL);
        if nu != 3 {
            bad.push(format!("nu_1(0, {e}) = {nu}"));
        }
    }
    Ok(Outcome {
        expected: "i_-1 = 2,2,0,0,0; i_1 = nu_1 = 0 at 5 points; nu_1(0, e) = 3".into(),
        got: if bad.is_empty() { "all 17 values as expected".into() } else { bad.join("; ") },
        tol: None,
        pass: bad.is_empty(),
    })
}

/// `(beta, e, theta, operator index, path index)`
type Sample = (f64, f64, f64, i64, i64);

fn c6(o: &VerifyOptions) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    // small beta is oversampled: that is where the indices are nonzero
    let candidates: Vec<(f64, f64, f64)> = (0..48)
        .map(|_| {
            let u: f64 = rng.random();
            let e: f64 = rng.random_range(0.0..0.9);
            let th: f64 = rng.random_range(0.0..TAU);
            (9.0 * u * u, e, th)
        })
        .collect();
    let evaluated: Vec<Result<Option<Sample>>> = candidates
        .par_iter()
        .map(|&(beta, e, th)| -> Result<Option<Sample>> {
            let w = omega(th);
            let g = integrate_gamma(params(beta, e)?, &o.integrator)?;
            if d_omega(g.endpoint.matrix(), w)?.abs() <= 1e-6 {
                return Ok(None);
            }
            let op = omega_index_from_operator(&params(beta, e)?, w, o.n_modes)?;
            if op.nu_omega != 0 {
                return Ok(None);
            }
            let path = omega_index_from_path(&g, w, &PathIndexOptions::default())?;
            Ok(Some((beta, e, th, op.i_omega, path.i_omega)))
        })
        .collect();
    // only the first 20 usable candidates count; later ones are spares
    let mut used = Vec::with_capacity(20);
    for r in evaluated {
        if let Some(x) = r? {
            used.push(x);
        }
        if used.len() == 20 {
            break;
        }
    }
    ensure!(used.len() == 20, "only {} non-degenerate points among candidates", used.len());
    let mismatches: Vec<String> = used
        .iter()
        .filter(|r| r.3 != r.4)
        .map(|r| format!("({:.4}, {:.4}, {:.4}): {} vs {}", r.0, r.1, r.2, r.3, r.4))
        .collect();
    let nonzero = used.iter().filter(|r| r.3 != 0).count();
    Ok(Outcome {
        expected: "20/20 points agree".into(),
        got: if mismatches.is_empty() {
            format!("20/20 agree ({nonzero} with nonzero index)")
        } else {
            mismatches.join("; ")
        },
        tol: None,
        pass: mismatches.is_empty(),
    })
}

fn c7(o: &VerifyOptions) -> Result<Outcome> {
    let mut min_eig = f64::INFINITY;
    let mut split = 0.0f64;
    let mut classes = Vec::new();
    for e in [0.0, 0.3, 0.6, 0.9] {
        for th in [0.0, PI, PI / 3.0] {
            let s = morse_and_nullity(&assemble_a(&params(9.0, e)?, omega(th), o.n_modes)?, NULL_TOL)?;
            min_eig = min_eig.min(s.smallest());
        }
        let g = integrate_gamma(params(9.0, e)?, &o.integrator)?;
        let r = classify(&g.endpoint, lagrange_core::symplectic::CLASS_TOL)?;
        let v = r.eigenvalues;
        let positive = v.iter().all(|z| z.re > 0.0 && z.im.abs() <= 1e-6 * z.norm());
        split = split
            .max((v[0] - v[1]).norm() / v[0].norm())
            .max((v[2] - v[3]).norm() / v[2].norm());
        classes.push((r.stability_class, positive));
    }
    let hh = classes.iter().all(|&(c, p)| c == StabilityClass::HH && p);
    Ok(Outcome {
        expected: "min eigenvalue > 0; HH with double positive pair, splitting <= 1e-6".into(),
        got: format!("min eigenvalue {min_eig:.4e}, all HH positive: {hh}, relative splitting {split:.2e}"),
        tol: Some(1e-6),
        pass: min_eig > 0.0 && hh && split <= 1e-6,
    })
}

fn c8(o: &VerifyOptions) -> Result<Outcome> {
    let grid = linspace(0.0, 9.0, 40);
    let cases: Vec<(f64, f64)> = [0.0, 0.4, 0.8]
        .iter()
        .flat_map(|&e| [PI / 5.0, PI, 9.0 * PI / 5.0].map(|th| (e, th)))
        .collect();
    let points: Vec<(usize, f64)> = (0..cases.len()).flat_map(|c| grid.iter().map(move |&b| (c, b))).collect();
    let phis: Vec<usize> = points
        .par_iter()
        .map(|&(c, b)| phi(b, cases[c].0, omega(cases[c].1), o.n_modes).map(|x| x.0))
        .collect::<Result<_>>()?;
    let mut bad = Vec::new();
    for (c, (e, th)) in cases.iter().enumerate() {
        let row = &phis[c * grid.len()..(c + 1) * grid.len()];
        if row.windows(2).any(|w| w[1] > w[0]) {
            bad.push(format!("e = {e}, theta = {th:.4}: {row:?}"));
        }
    }
    Ok(Outcome {
        expected: "phi non-increasing on 9 grids of 40 points".into(),
        got: if bad.is_empty() { "9/9 grids non-increasing".into() } else { bad.join("; ") },
        tol: None,
        pass: bad.is_empty(),
    })
}

fn c9(o: &VerifyOptions) -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for (beta, e) in [(0.5, 0.0), (2.0, 0.0), (0.5, 0.3)] {
        let r = bott_check(&params(beta, e)?, 2, o.n_modes)?;
        let ok = r.direct_index == Some(r.sum_index)
            && r.power_nullity == r.matrix_nullity_sum
            && r.power_nullity == r.sum_nullity;
        pass &= ok;
        parts.push(format!(
            "({beta}, {e}): i_1(g^2) = {:?} vs {}, nu_1(g^2) = {} vs {}",
            r.direct_index, r.sum_index, r.power_nullity, r.matrix_nullity_sum
        ));
    }
    Ok(Outcome {
        expected: "i_1(g^2) = i_1 + i_-1 and nu_1(g^2) = nu_1 + nu_-1".into(),
        got: parts.join("; "),
        tol: None,
        pass,
    })
}

fn c10(_: &VerifyOptions) -> Result<Outcome> {
    let r = kernel_residual_34(64);
    Ok(Outcome {
        expected: "residual <= 1e-8".into(),
        got: format!("{r:.3e}"),
        tol: Some(1e-8),
        pass: r <= 1e-8,
    })
}

fn c11(o: &VerifyOptions) -> Result<Outcome> {
    let co = o.curves();
    let w = omega(TAU * 0.3);
    let mut even = 0.0f64;
    let mut cross = 0.0f64;
    for e in [0.2, 0.5] {
        let a = degeneracy_betas(e, w, o.n_modes)?;
        let b = degeneracy_betas(-e, w, o.n_modes)?;
        even = even.max((a.beta1 - b.beta1).abs()).max((a.beta2 - b.beta2).abs());
        let r1 = restricted_root(e, Space::E1, &co)?.beta;
        let r2 = restricted_root(-e, Space::E2, &co)?.beta;
        cross = cross.max((r1 - r2).abs());
    }
    let mut spectra_err = 0.0f64;
    for (beta, e) in [(0.4, 0.2), (0.9, 0.35), (2.5, 0.5), (6.0, 0.7), (8.0, 0.1)] {
        let a = eigen4(&integrate_gamma(params(beta, e)?, &o.integrator)?.endpoint)?.values;
        let b = eigen4(&integrate_gamma(params(beta, -e)?, &o.integrator)?.endpoint)?.values;
        let p = best_matching(&a, &b);
        for i in 0..4 {
            spectra_err = spectra_err.max((a[i] - b[p[i]]).norm() / a[i].norm().max(1.0));
        }
    }
    Ok(Outcome {
        expected: "evenness and E1/E2 cross symmetry <= 1e-8; spectra <= 1e-7".into(),
        got: format!("evenness {even:.2e}, cross {cross:.2e}, spectra {spectra_err:.2e}"),
        tol: Some(1e-8),
        pass: even <= 1e-8 && cross <= 1e-8 && spectra_err <= 1e-7,
    })
}

fn c12(o: &VerifyOptions) -> Result<Outcome> {
    let co = o.curves();
    let k0 = gamma_k(0.0, &co)?.point.beta;
    let mut parts = vec![format!("beta_k(0) = {k0:.9}")];
    let mut pass = (k0 - 1.0).abs() <= 1e-6;
    let mut k01 = f64::NAN;
    for e in [0.1, 0.4, 0.7] {
        let (bs, bm) = minus_one_pair(e, &co)?;
        let bk = gamma_k(e, &co)?.point.beta;
        // beta_k is known to the bisection width
        let ordered = bs <= bm && bm <= bk + co.bisection_tol && bk < 9.0;
        pass &= ordered;
        parts.push(format!("e = {e}: {bs:.6} <= {bm:.6} <= {bk:.6}: {ordered}"));
        if e == 0.1 {
            k01 = bk;
            let strict = bm < bk;
            pass &= strict;
            parts.push(format!("beta_m(0.1) < beta_k(0.1): {strict}"));
        }
    }
    let k09 = gamma_k(0.9, &co)?.point.beta;
    let trend = k09 < k01;
    pass &= trend;
    parts.push(format!("beta_k(0.9) = {k09:.6} < beta_k(0.1) = {k01:.6}: {trend}"));
    Ok(Outcome {
        expected: "beta_k(0) = 1; beta_s <= beta_m <= beta_k < 9; beta_m(0.1) < beta_k(0.1); beta_k(0.9) < beta_k(0.1)"
            .into(),
        got: parts.join("; "),
        tol: Some(1e-6),
        pass,
    })
}

fn c13(o: &VerifyOptions) -> Result<Outcome> {
    let mut counts = Vec::new();
    for e in [0.0, 0.2, 0.6] {
        for th in [PI, TAU * 0.4] {
            let b = assemble_b_compact(e, omega(th), o.n_modes)?;
            counts.push(b.eigenvalues.iter().filter(|&&m| m < -1.0 / 3.0).count());
        }
    }
    let circ = |t: f64| 1.0 - (1.0 - 2.0 * t * t).powi(2);
    let (lo, hi) = (circ(0.4), circ(0.6));
    let d = degeneracy_betas(0.0, omega(TAU * 0.4), o.n_modes)?;
    let err = (d.beta1 - lo).abs().max((d.beta2 - hi).abs());
    Ok(Outcome {
        expected: format!("two eigenvalues below -1/3 in all 6 cases; betas ({lo:.4}, {hi:.4})"),
        got: format!("counts {counts:?}; betas ({:.8}, {:.8})", d.beta1, d.beta2),
        tol: Some(1e-5),
        pass: counts.iter().all(|&c| c == 2) && err <= 1e-5,
    })
}

fn c14(o: &VerifyOptions) -> Result<Outcome> {
    let co = o.curves();
    let e = 0.2;
    let (bs, bm) = minus_one_pair(e, &co)?;
    let bk = gamma_k(e, &co)?.point.beta;
    let class_at = |b: f64| -> Result<(StabilityClass, usize)> {
        let g = integrate_gamma(params(b, e)?, &o.integrator)?;
        let r = classify(&g.endpoint, lagrange_core::symplectic::CLASS_TOL)?;
        Ok((r.stability_class, r.unit_circle_count))
    };
    let checks = [
        (0.5 * bs, Some(StabilityClass::EE)),
        (0.5 * (bs + bm), Some(StabilityClass::EH)),
        (0.5 * (bm + bk), Some(StabilityClass::EE)),
        (0.5 * (bk + 9.0), None),
    ];
    let mut pass = bs < bm && bm < bk;
    let mut parts = vec![format!("beta_s {bs:.6}, beta_m {bm:.6}, beta_k {bk:.6}")];
    for (b, want) in checks {
        let (c, on_u) = class_at(b)?;
        let ok = match want {
            Some(w) => c == w,
            None => on_u == 0,
        };
        pass &= ok;
        parts.push(format!("{b:.4}: {c} ({on_u} on U)"));
    }
    Ok(Outcome {
        expected: "EE, EH, EE, no unit-circle eigenvalues".into(),
        got: parts.join("; "),
        tol: None,
        pass,
    })
}

fn c15(o: &VerifyOptions) -> Result<Outcome> {
    let co = o.curves();
    let mut parts = Vec::new();
    let mut pass = true;
    for e in [0.1, 0.4] {
        for th in [PI, PI / 5.0] {
            let d = degeneracy_betas(e, omega(th), o.n_modes)?;
            for b in [d.beta1, d.beta2] {
                let j = index_jump(b, e, omega(th), 1e-3, &co)?;
                pass &= j.holds();
                if !j.holds() {
                    parts.push(format!("e = {e}, theta = {th:.4}, beta = {b:.6}: {j:?}"));
                }
            }
        }
    }
    Ok(Outcome {
        expected: "phi drops by the certified nullity at 8 curve points".into(),
        got: if parts.is_empty() { "8/8 jumps match".into() } else { parts.join("; ") },
        tol: None,
        pass,
    })
}

/// Runs one criterion; numerical errors count as failures.
pub fn run(id: u32, o: &VerifyOptions) -> CriterionReport {
    let (_, name) = CRITERIA
        .iter()
        .copied()
        .find(|c| c.0 == id)
        .unwrap_or((id, "unknown criterion"));
    let f: fn(&VerifyOptions) -> Result<Outcome> = match id {
        1 => c1,
        2 => c2,
        3 => c3,
        4 => c4,
        5 => c5,
        6 => c6,
        7 => c7,
        8 => c8,
        9 => c9,
        10 => c10,
        11 => c11,
        12 => c12,
        13 => c13,
        14 => c14,
        15 => c15,
        _ => |_| anyhow::bail!("no such criterion"),
    };
    match f(o) {
        Ok(r) => CriterionReport {
            id,
            name,
            expected: r.expected,
            got: r.got,
            tol: r.tol,
            pass: r.pass,
        },
        Err(err) => CriterionReport {
            id,
            name,
            expected: "completes without numerical error".into(),
            got: format!("error: {err:#}"),
            tol: None,
            pass: false,
        },
    }
}

pub fn all_ids() -> Vec<u32> {
    CRITERIA.iter().map(|c| c.0).collect()
}
