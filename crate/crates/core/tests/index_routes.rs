use std::f64::consts::{PI, TAU};

use lagrange_core::curves::{minus_one_pair, CurveOptions};
use lagrange_core::index::{
    bott_check, omega_index_from_operator, omega_index_from_path, phi_squared, Method, PathIndexOptions,
};
use lagrange_core::monodromy::{integrate_gamma, IntegratorOptions};
use lagrange_core::{Error, Params, C64};

fn p(beta: f64, e: f64) -> Params {
    Params::new(beta, e).unwrap()
}

fn omega(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

fn path_index(beta: f64, e: f64, w: C64) -> i64 {
    let g = integrate_gamma(p(beta, e), &IntegratorOptions::default()).unwrap();
    let r = omega_index_from_path(&g, w, &PathIndexOptions::default()).unwrap();
    assert_eq!(r.method, Method::Path);
    assert_eq!(r.i_omega, r.crossings.iter().map(|c| c.sign as i64).sum::<i64>());
    r.i_omega
}

#[test]
fn operator_anchors() {
    for (beta, e) in [(0.5, 0.2), (3.0, 0.5), (8.0, 0.8)] {
        assert_eq!(omega_index_from_operator(&p(beta, e), omega(0.0), 64).unwrap().i_omega, 0);
    }
    let r = omega_index_from_operator(&p(0.5, 0.0), omega(PI), 64).unwrap();
    assert_eq!((r.i_omega, r.nu_omega), (2, 0));
    for e in [0.0, 0.5] {
        for th in [0.0, 1.0, PI, 4.0] {
            let r = omega_index_from_operator(&p(9.0, e), omega(th), 64).unwrap();
            assert_eq!((r.i_omega, r.nu_omega), (0, 0), "e={e} theta={th}");
        }
    }
}

#[test]
fn path_anchors() {
    assert_eq!(path_index(0.5, 0.0, omega(PI)), 2);
    assert_eq!(path_index(0.0, 0.3, C64::new(0.0, 1.0)), 2);
    assert_eq!(path_index(2.0, 0.0, omega(0.0)), 0);
}

#[test]
fn degenerate_endpoint_refused() {
    let g = integrate_gamma(p(0.75, 0.0), &IntegratorOptions::default()).unwrap();
    let err = omega_index_from_path(&g, omega(PI), &PathIndexOptions::default()).unwrap_err();
    assert!(matches!(err, Error::DegenerateEndpoint { .. }), "{err}");
}

#[test]
fn conjugate_boundary_conditions_agree() {
    let pts = [
        (0.2, 0.1, 0.7),
        (0.5, 0.4, 2.0),
        (0.9, 0.2, 1.2),
        (1.5, 0.6, 2.9),
        (3.0, 0.3, 0.4),
        (0.05, 0.8, 1.7),
        (0.6, -0.5, 2.4),
        (6.0, 0.9, 1.0),
        (0.3, 0.0, 2.2),
        (1.0, 0.45, 0.9),
    ];
    for (beta, e, th) in pts {
        let a = omega_index_from_operator(&p(beta, e), omega(th), 48).unwrap();
        let b = omega_index_from_operator(&p(beta, e), omega(TAU - th), 48).unwrap();
        assert_eq!((a.i_omega, a.nu_omega), (b.i_omega, b.nu_omega), "({beta}, {e}, {th})");
    }
}

#[test]
fn path_index_non_increasing_in_beta() {
    for (e, th) in [(0.2, PI), (0.4, PI / 5.0)] {
        let mut last = i64::MAX;
        for i in 0..12 {
            let beta = 0.013 + 0.171 * i as f64;
            let g = integrate_gamma(p(beta, e), &IntegratorOptions::default()).unwrap();
            let r = match omega_index_from_path(&g, omega(th), &PathIndexOptions::default()) {
                Ok(r) => r,
                Err(Error::DegenerateEndpoint { .. }) => continue,
                Err(err) => panic!("{err}"),
            };
            assert!(r.i_omega <= last, "e={e} beta={beta}");
            last = r.i_omega;
        }
    }
}

#[test]
fn bott_examples() {
    let r = bott_check(&p(0.5, 0.0), 2, 64).unwrap();
    assert_eq!(r.per_root.iter().map(|x| x.i_omega).collect::<Vec<_>>(), vec![0, 2]);
    assert_eq!(r.direct_index, Some(2));
    assert!(r.consistent());

    let r = bott_check(&p(2.0, 0.0), 2, 64).unwrap();
    assert_eq!(r.sum_index, 0);
    assert_eq!(r.direct_index, Some(0));

    let r = bott_check(&p(0.75, 0.0), 2, 64).unwrap();
    assert_eq!(r.power_nullity, 2);
    assert_eq!(r.matrix_nullity_sum, 2);
    assert!(r.direct_index.is_none() && !r.skipped.is_empty());
    assert!(r.consistent());

    let r = bott_check(&p(0.4, 0.2), 3, 64).unwrap();
    assert!(r.consistent());
}

#[test]
fn two_period_index_by_region() {
    let e = 0.2;
    let (bs, bm) = minus_one_pair(e, &CurveOptions::default()).unwrap();
    let mids = [0.5 * bs, 0.5 * (bs + bm), 0.5 * (bm + 9.0)];
    let got: Vec<i64> = mids.iter().map(|&b| phi_squared(&p(b, e), 64).unwrap()).collect();
    assert_eq!(got, vec![4, 3, 2]);
}
