use faer::{c64, Mat};
use twot::channels::*;
use twot::codes::{phi_states, two_t_constellation};
use twot::coherent::{self, Constellation, DEFAULT_EPS_RANK};
use twot::la::{self, cr};

#[test]
fn finite_kraus_completeness_and_action() {
    for &a in &[0.5, 1.5] {
        for &g in &[0.01, 0.1] {
            let ch = tensor_loss(&two_t_constellation(a).unwrap(), g, DEFAULT_EPS_RANK).unwrap();
            assert_eq!(ch.channel.len(), 24);
            assert!(ch.channel.completeness_defect() < 1e-8, "a {a} g {g}");
            let m = ch.input.len();
            for i in 0..m {
                for j in 0..m {
                    let d = la::max_abs_diff(&ch.apply_coherent_pair(i, j), &ch.expected_coherent_pair(i, j));
                    assert!(d < 1e-8, "a {a} g {g} ({i},{j}) {d}");
                }
            }
        }
    }
}

#[test]
fn diagonal_action_is_pure_attenuated_state() {
    let ch = tensor_loss(&two_t_constellation(1.0).unwrap(), 0.2, DEFAULT_EPS_RANK).unwrap();
    let out = ch.apply_coherent_pair(5, 5);
    assert!((la::trace(&out).re - 1.0).abs() < 1e-10);
    assert!((la::trace_prod(&out, &out).re - 1.0).abs() < 1e-10);
}

#[test]
fn lossless_is_identity() {
    let ch = loss_finite_kraus(&two_t_constellation(1.0).unwrap(), 0.0, DEFAULT_EPS_RANK).unwrap();
    let r = ch.input.rank();
    let x = Mat::from_fn(r, r, |i, j| c64::new((i + j) as f64, i as f64 - j as f64));
    assert!(la::max_abs_diff(&ch.channel.apply(&x), &x) < 1e-10);
}

#[test]
fn trace_preserving_on_span_states() {
    let ch = loss_finite_kraus(&two_t_constellation(1.2).unwrap(), 0.1, DEFAULT_EPS_RANK).unwrap();
    let r = ch.input.rank();
    let a = Mat::from_fn(r, 3, |i, j| c64::new((i * j) as f64 * 0.1 + 0.3, (i as f64 - j as f64).sin()));
    let rho = &a * a.adjoint();
    let out = ch.channel.apply(&rho);
    assert!((la::trace(&out) - la::trace(&rho)).norm() < 1e-8 * la::trace(&rho).norm());
}

#[test]
fn rejects_bad_gamma() {
    let c = two_t_constellation(1.0).unwrap();
    assert!(loss_finite_kraus(&c, 0.995, DEFAULT_EPS_RANK).is_err());
    assert!(loss_finite_kraus(&c, -0.1, DEFAULT_EPS_RANK).is_err());
}

#[test]
fn psk3_agrees_with_truncated_fock_kraus() {
    let pts: Vec<c64> = (0..3).map(|k| c64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0)).collect();
    let c = Constellation::single_mode(&pts).unwrap();
    let dev = fock_cross_check(&c, 0.1, 40).unwrap();
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn standard_kraus_maps_coherent_to_coherent() {
    let (g, n) = (0.3, 40);
    let a = c64::new(0.8, -0.5);
    let ket = la::col(&coherent::coherent_fock_column(a, n));
    let mut out = la::zeros(n + 1, n + 1);
    for k in loss_standard_kraus(g, n, n).unwrap() {
        out += &(&k * &ket) * (&k * &ket).adjoint();
    }
    let mu = (1.0 - g).sqrt();
    let target = la::col(&coherent::coherent_fock_column(a * mu, n));
    assert!(la::max_abs_diff(&out, &(&target * target.adjoint())) < 1e-10);
}

#[test]
fn reduced_space_sizes() {
    for p in 0..=10 {
        let s = reduced_fock_space(p);
        assert_eq!(s.dim(), (p + 1) * (p + 1));
        for &(n1, n2) in &s.indices {
            assert!((n1 + n2) % 4 == 0 && n1 % 2 == 0 && n1 + n2 <= 4 * p);
        }
    }
    assert_eq!(reduced_fock_space(2).dim(), 9);
    let big = reduced_fock_space(200);
    let ratio = big.naive_dim() as f64 / big.dim() as f64;
    assert!((ratio - 8.0).abs() < 0.2);
}

#[test]
fn dephasing_kraus_reproduces_elementwise_map() {
    let space = reduced_fock_space(4);
    let gamma = 0.01;
    let k = dephasing_kraus_auto(gamma, &space, 1e-8).unwrap();
    assert!(k.defect < 1e-8);
    let n = space.dim();
    let rho = Mat::from_fn(n, n, |i, j| c64::new(1.0 / (1 + i + j) as f64, (i as f64 - j as f64) * 0.01));
    let via_kraus = la::scale(&k.channel.apply(&la::scale(&rho, cr(1.0))), cr(1.0));
    let dense: Vec<_> = k.channel.dense_ops();
    let mut via_dense = la::zeros(n, n);
    for op in &dense {
        via_dense += &(op * &rho) * op.adjoint();
    }
    let direct = dephasing_apply(&rho, gamma, &space).unwrap();
    assert!(la::max_abs_diff(&via_kraus, &direct) < 1e-8);
    assert!(la::max_abs_diff(&via_dense, &direct) < 1e-8);
}

#[test]
fn dephasing_completeness_at_n16() {
    let idx: Vec<Vec<usize>> = (0..=16).map(|n| vec![n]).collect();
    let k = dephasing_kraus_on(0.01, 20, &idx, 1e-10).unwrap();
    assert!(k.defect < 1e-10);
    let space = reduced_fock_space(0);
    let id = dephasing_kraus(0.0, 0, &space).unwrap();
    assert_eq!(id.defect, 0.0);
}

#[test]
fn insufficient_truncation_reports_defect() {
    let space = reduced_fock_space(5);
    match dephasing_kraus(0.1, 1, &space) {
        Err(twot::Error::Truncation { achieved, .. }) => assert!(achieved > 1e-8),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn dephasing_reduces_purity_and_keeps_populations() {
    let space = reduced_fock_space(8);
    let phi0 = &phi_states(1.0).unwrap()[0];
    let amps = coherent::fock_project(phi0, &space.index_vecs());
    let v = la::col(&amps);
    let rho = &v * v.adjoint();
    let out = dephasing_apply(&rho, 0.1, &space).unwrap();
    assert!(la::trace_prod(&out, &out).re < la::trace_prod(&rho, &rho).re - 1e-6);
    for i in 0..space.dim() {
        assert!((out[(i, i)] - rho[(i, i)]).norm() < 1e-15);
    }
    assert!(la::max_abs_diff(&dephasing_apply(&rho, 0.0, &space).unwrap(), &rho) < 1e-15);
}
