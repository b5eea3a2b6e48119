use std::f64::consts::PI;

use lagrange_core::symplectic::{
    classify, diamond, dil, eigen4, j4, nu_omega, rot, SpMatrix4, StabilityClass, CLASS_TOL, NU_TOL,
    SP_TOL,
};
use lagrange_core::C64;
use nalgebra::Matrix4;
use proptest::prelude::*;

fn exp_js(s: [f64; 10], scale: f64) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            m[(i, j)] = s[k] * scale;
            m[(j, i)] = s[k] * scale;
            k += 1;
        }
    }
    (j4() * m).exp()
}

fn sym10() -> impl Strategy<Value = [f64; 10]> {
    prop::array::uniform10(-1.0f64..1.0)
}

/// Products of rotations, dilations and `exp(J S)`.
fn symplectic() -> impl Strategy<Value = Matrix4<f64>> {
    (0.0..2.0 * PI, 0.0..2.0 * PI, 0.3f64..3.0, 0.3f64..3.0, sym10()).prop_map(|(a, b, l, m, s)| {
        diamond(&rot(a), &rot(b)) * exp_js(s, 0.5) * diamond(&dil(l), &dil(m))
    })
}

fn min_dist(z: C64, set: &[C64]) -> f64 {
    set.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_closed_under_conjugation_and_inversion(m in symplectic()) {
        let sp = SpMatrix4::new(m, SP_TOL).unwrap();
        let eig = eigen4(&sp).unwrap();
        for &l in &eig.values {
            prop_assert!(min_dist(l.conj(), &eig.values) < 1e-10);
            prop_assert!(min_dist(l.inv(), &eig.values) < 1e-10);
        }
    }

    #[test]
    fn determinant_is_one(m in symplectic()) {
        prop_assert!((m.determinant() - 1.0).abs() < 1e-9 * m.norm().powi(4).max(1.0));
    }

    #[test]
    fn nullity_is_conjugation_invariant(theta in 0.1f64..3.0, s in sym10()) {
        let omega = C64::from_polar(1.0, theta);
        // omega is an eigenvalue of the first factor, -1 a double one of the second
        let m = diamond(&rot(theta), &rot(PI));
        let p = exp_js(s, 0.3);
        let c = p.try_inverse().unwrap() * m * p;
        for w in [omega, C64::new(-1.0, 0.0), C64::new(1.0, 0.0)] {
            prop_assert_eq!(nu_omega(&m, w, NU_TOL), nu_omega(&c, w, NU_TOL));
        }
    }

    #[test]
    fn classification_stable_under_small_perturbation(
        a in 0.3f64..2.8, b in 3.4f64..6.0, l in 1.5f64..3.0, s in sym10(), which in 0usize..3
    ) {
        let m = match which {
            0 => diamond(&rot(a), &rot(b)),
            1 => diamond(&dil(l), &rot(a)),
            _ => diamond(&dil(l), &dil(l + 0.7)),
        };
        let base = classify(&SpMatrix4::new(m, SP_TOL).unwrap(), CLASS_TOL).unwrap();
        let pert = m * exp_js(s, CLASS_TOL / 40.0);
        let moved = classify(&SpMatrix4::new(pert, SP_TOL).unwrap(), CLASS_TOL).unwrap();
        prop_assert_eq!(base.stability_class, moved.stability_class);
    }

    #[test]
    fn unit_circle_count_matches_eigenvalues(m in symplectic()) {
        let r = classify(&SpMatrix4::new(m, SP_TOL).unwrap(), CLASS_TOL).unwrap();
        let on = r.eigenvalues.iter().filter(|l| (l.norm() - 1.0).abs() <= CLASS_TOL).count();
        prop_assert_eq!(on, r.unit_circle_count);
    }

    #[test]
    fn krein_signs_of_conjugate_pairs_are_opposite(a in 0.2f64..2.9, b in 3.4f64..6.0, s in sym10()) {
        let p = exp_js(s, 0.4);
        let m = p * diamond(&rot(a), &rot(b)) * p.try_inverse().unwrap();
        let r = classify(&SpMatrix4::new(m, SP_TOL).unwrap(), CLASS_TOL).unwrap();
        prop_assert_eq!(r.stability_class, StabilityClass::EE);
        for &(l, s1) in &r.krein {
            let partner = r.krein.iter().find(|(w, _)| (w - l.conj()).norm() < 1e-8).unwrap();
            prop_assert_eq!(s1, -partner.1);
            prop_assert!(s1 != 0);
        }
    }
}

#[test]
fn rejection_reports_residual() {
    let mut m = Matrix4::identity();
    m[(0, 1)] = 0.1;
    m[(2, 2)] = 1.2;
    let err = SpMatrix4::new(m, SP_TOL).unwrap_err().to_string();
    assert!(err.contains("symplectic"), "{err}");
}
