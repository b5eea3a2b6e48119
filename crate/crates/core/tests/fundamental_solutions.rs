use std::f64::consts::{PI, SQRT_2, TAU};

use lagrange_core::model::{coeff_b, coeff_k, gamma_00_explicit, rot, rot4, s_matrix};
use lagrange_core::monodromy::{
    equal_mass_factor, integrate_gamma, integrate_xi, power_k, IntegratorOptions, SymplecticPath,
};
use lagrange_core::symplectic::{
    best_matching, classify, diamond, eigen4, nu_omega, nu_omega2, rot as rot2, sp_residual, SpMatrix4,
    StabilityClass, CLASS_TOL, NU_TOL, SP_TOL,
};
use lagrange_core::{Params, C64};
use nalgebra::Matrix2;
use proptest::prelude::*;

fn opts() -> IntegratorOptions {
    IntegratorOptions::default()
}

fn endpoint_spectrum(beta: f64, e: f64) -> [C64; 4] {
    let g = integrate_gamma(Params::new(beta, e).unwrap(), &opts()).unwrap();
    eigen4(&g.endpoint).unwrap().values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn rotated_k_identity(beta in 0.0f64..=9.0, e in -0.95f64..0.95, t in 0.0..TAU) {
        let p = Params::new(beta, e).unwrap();
        let lhs = rot(t) * coeff_k(&p, t).unwrap() * rot(t).transpose();
        let rhs = (Matrix2::identity() * 3.0 + s_matrix(t) * (9.0 - beta).sqrt())
            / (2.0 * (1.0 + e * t.cos()));
        prop_assert!((lhs - rhs).norm() < 1e-13 * rhs.norm().max(1.0));
    }

    #[test]
    fn k_shift_reverses_eccentricity(beta in 0.0f64..=9.0, e in -0.95f64..0.95, t in 0.0..TAU) {
        let k1 = coeff_k(&Params::new(beta, e).unwrap(), t + PI).unwrap();
        let k2 = coeff_k(&Params::new(beta, -e).unwrap(), t).unwrap();
        prop_assert!((k1 - k2).norm() < 1e-13 * k1.norm());
    }

    #[test]
    fn b_is_symmetric_and_periodic(beta in 0.0f64..=9.0, e in -0.95f64..0.95, t in 0.0..TAU) {
        let p = Params::new(beta, e).unwrap();
        let b = coeff_b(&p, t).unwrap();
        prop_assert!((b - b.transpose()).norm() == 0.0);
        prop_assert!((coeff_b(&p, t + TAU).unwrap() - b).norm() < 1e-12 * b.norm());
    }
}

#[test]
fn explicit_solution_matches_integration() {
    let g = integrate_gamma(Params::new(0.0, 0.0).unwrap(), &opts()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let t = TAU * (i as f64 + 0.5) / 100.0;
        worst = worst.max((g.at(t) - gamma_00_explicit(t)).abs().max());
    }
    assert!(worst <= 1e-8, "worst entry error {worst:e}");
    let end = g.endpoint.matrix();
    assert!((end - gamma_00_explicit(TAU)).abs().max() <= 1e-8);
    // secular entries of the endpoint
    let secular: Vec<f64> = end.iter().filter(|x| x.abs() > 2.0).copied().collect();
    assert!(secular.iter().any(|x| (x - 6.0 * PI).abs() < 1e-8), "{secular:?}");
    assert!(secular.iter().any(|x| (x + 6.0 * PI).abs() < 1e-8), "{secular:?}");
}

#[test]
fn tighter_tolerance_reduces_error() {
    let p = Params::new(0.0, 0.0).unwrap();
    let exact = gamma_00_explicit(TAU);
    let err = |rel: f64| {
        let o = IntegratorOptions { rel_tol: rel, abs_tol: rel * 0.1, min_samples: 8 };
        (integrate_gamma(p, &o).unwrap().endpoint.matrix() - exact).abs().max()
    };
    let (coarse, fine) = (err(1e-6), err(1e-9));
    assert!(fine < coarse / 20.0, "coarse {coarse:e}, fine {fine:e}");
}

#[test]
fn rotating_frame_agrees_with_inertial() {
    for (beta, e) in [(0.5, 0.3), (2.0, 0.6), (7.0, -0.4)] {
        let p = Params::new(beta, e).unwrap();
        let g = integrate_gamma(p, &opts()).unwrap();
        let x = integrate_xi(p, &opts()).unwrap();
        let d = (g.endpoint.matrix() - x.endpoint.matrix()).abs().max();
        assert!(d <= 1e-7, "({beta}, {e}): endpoint gap {d:e}");
        for i in 1..=50 {
            let t = TAU * i as f64 / 51.0;
            let r = (rot4(t) * g.at(t) - x.at(t)).abs().max();
            assert!(r <= 1e-7, "({beta}, {e}) t = {t}: {r:e}");
        }
    }
}

#[test]
fn circular_vanishing_mass_is_triply_degenerate() {
    let x = integrate_xi(Params::new(0.0, 0.0).unwrap(), &opts()).unwrap();
    assert_eq!(nu_omega(x.endpoint.matrix(), C64::new(1.0, 0.0), NU_TOL), 3);
    for e in [0.0, 0.4] {
        let g = integrate_gamma(Params::new(0.0, e).unwrap(), &opts()).unwrap();
        assert_eq!(nu_omega(g.endpoint.matrix(), C64::new(1.0, 0.0), NU_TOL), 3, "e = {e}");
    }
}

#[test]
fn samples_start_at_identity_and_stay_symplectic() {
    let g = integrate_gamma(Params::new(3.0, 0.7).unwrap(), &opts()).unwrap();
    assert_eq!(g.times[0], 0.0);
    assert_eq!(*g.times.last().unwrap(), TAU);
    assert_eq!(g.matrices[0], nalgebra::Matrix4::identity());
    assert!(g.times.len() > 512);
    assert!(g.sp_residual <= 100.0 * opts().rel_tol, "{:e}", g.sp_residual);
}

#[test]
fn endpoint_determinant_and_reciprocity() {
    for (beta, e) in [(0.3, 0.1), (1.2, 0.5), (4.0, 0.8), (8.5, 0.9), (0.9, -0.6)] {
        let g = integrate_gamma(Params::new(beta, e).unwrap(), &opts()).unwrap();
        let m = g.endpoint.matrix();
        assert!((m.determinant() - 1.0).abs() <= 1e-9, "({beta}, {e})");
        let v = eigen4(&g.endpoint).unwrap().values;
        let inv = [v[0].inv(), v[1].inv(), v[2].inv(), v[3].inv()];
        let perm = best_matching(&v, &inv);
        for i in 0..4 {
            assert!((v[i] - inv[perm[i]]).norm() < 1e-8);
        }
    }
}

#[test]
fn spectrum_even_in_eccentricity() {
    for (beta, e) in [(0.4, 0.2), (0.9, 0.35), (2.5, 0.5), (6.0, 0.7), (8.0, 0.1)] {
        let a = endpoint_spectrum(beta, e);
        let b = endpoint_spectrum(beta, -e);
        let perm = best_matching(&a, &b);
        for i in 0..4 {
            let d = (a[i] - b[perm[i]]).norm() / a[i].norm().max(1.0);
            assert!(d <= 1e-7, "({beta}, {e}): {d:e}");
        }
    }
}

#[test]
fn equal_mass_factor_structure() {
    let f0 = equal_mass_factor(0.0, &opts()).unwrap();
    let l = (SQRT_2 * PI).exp();
    let tr = f0.endpoint.trace();
    assert!((tr - (l + 1.0 / l)).abs() < 1e-8 * l, "trace {tr}");
    for e in [0.0, 0.3, 0.6, 0.9] {
        let f = equal_mass_factor(e, &opts()).unwrap();
        assert_eq!(nu_omega2(&f.endpoint, C64::new(1.0, 0.0), NU_TOL), 0, "e = {e}");
        assert!(f.endpoint.trace() > 2.0);
        let g = integrate_gamma(Params::new(9.0, e).unwrap(), &opts()).unwrap();
        let d = (g.endpoint.matrix() - diamond(&f.endpoint, &f.endpoint)).abs().max();
        assert!(d <= 1e-7 * f.endpoint.norm().powi(2), "e = {e}: {d:e}");
    }
}

#[test]
fn equal_masses_give_double_positive_pair() {
    let g = integrate_gamma(Params::new(9.0, 0.5).unwrap(), &opts()).unwrap();
    let r = classify(&g.endpoint, CLASS_TOL).unwrap();
    assert_eq!(r.stability_class, StabilityClass::HH);
    let v = r.eigenvalues;
    assert!(v.iter().all(|z| z.re > 0.0 && z.im.abs() < 1e-6));
    assert!((v[0] - v[1]).norm() < 1e-6 && (v[2] - v[3]).norm() < 1e-6);
    assert!((v[0].re - 1.0).abs() > 0.1);
}

#[test]
fn powers() {
    let m = SpMatrix4::new(diamond(&rot2(0.4), &rot2(1.1)), SP_TOL).unwrap();
    assert_eq!(power_k(&m, 1).matrix(), m.matrix());
    let sq = power_k(&m, 2);
    let expect = diamond(&rot2(0.8), &rot2(2.2));
    assert!((sq.matrix() - expect).abs().max() < 1e-15);
    assert!(sp_residual(sq.matrix()) < 1e-15);

    let g = integrate_gamma(Params::new(0.75, 0.0).unwrap(), &opts()).unwrap();
    let one = C64::new(1.0, 0.0);
    let minus = C64::new(-1.0, 0.0);
    let nu1 = nu_omega(g.endpoint.matrix(), one, NU_TOL);
    let num1 = nu_omega(g.endpoint.matrix(), minus, NU_TOL);
    assert_eq!((nu1, num1), (0, 2));
    assert_eq!(nu_omega(power_k(&g.endpoint, 2).matrix(), one, NU_TOL), 2);
}

#[test]
fn path_dump_has_sixteen_entries_per_row() {
    let g = integrate_gamma(Params::new(1.0, 0.2).unwrap(), &IntegratorOptions { min_samples: 8, ..opts() })
        .unwrap();
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0].split(',').count(), 17);
    assert_eq!(lines.len(), 10);
    assert!(lines[0].starts_with("t,m11,m12"));
}
