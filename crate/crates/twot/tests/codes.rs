use faer::c64;
use twot::codes::*;
use twot::coherent::{self, inner, Constellation, Span, SpanState, DEFAULT_EPS_RANK};
use twot::group::coset_decomposition;
use twot::la::{self, cr};

#[test]
fn gram_basics() {
    let g = coherent::gram(&two_t_constellation(1.5).unwrap());
    for k in 0..24 {
        assert!((g[(k, k)] - cr(1.0)).norm() < 1e-15);
    }
    let far = coherent::gram(&two_t_constellation(8.0).unwrap());
    for i in 0..24 {
        for j in 0..24 {
            if i != j {
                assert!(far[(i, j)].norm() < 1e-10);
            }
        }
    }
    let v = coherent::overlap(&[cr(0.0)], &[c64::new(0.3, -0.7)]);
    assert!((v.re - (-0.5f64 * 0.58).exp()).abs() < 1e-15);
}

#[test]
fn two_t_span_rank_at_one_point_five() {
    assert_eq!(two_t_span(1.5).unwrap().rank(), 24);
}

#[test]
fn identification_of_omega() {
    let beta = c64::new(1.0, 1.0) * 0.8;
    let out = identification_map(&twot::group::Quaternion::omega(), beta);
    assert!((out[0] - (-(c64::new(1.0, 1.0)) * beta / 2.0)).norm() < 1e-15);
    assert!((out[1] - c64::new(-1.0, 1.0) * beta / 2.0).norm() < 1e-15);
}

#[test]
fn phi_overlap_matches_closed_form() {
    for &a in &[0.3, 0.7, 1.0, 1.5, 2.0] {
        let phi = phi_states(a).unwrap();
        let closed = phi_overlap(a);
        for l in 0..3 {
            let v = inner(&phi[l], &phi[(l + 1) % 3]).unwrap();
            assert!((v.re - closed).abs() < 1e-10 && v.im.abs() < 1e-10, "alpha {a}: {v} vs {closed}");
            assert!((inner(&phi[l], &phi[l]).unwrap().re - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn phi_overlap_by_brute_force_coset_sum() {
    let a = 1.5;
    let c = two_t_constellation(a).unwrap();
    let cd = coset_decomposition();
    let n = nu(a);
    let mut s = c64::new(0.0, 0.0);
    for &i in &cd.indices[1] {
        for &j in &cd.indices[2] {
            s += coherent::overlap(&c.amplitudes[i], &c.amplitudes[j]);
        }
    }
    assert!(((s * n * n).re - phi_overlap(a)).abs() < 1e-12);
}

#[test]
fn phi_zero_is_beta_four_cat_sum() {
    let a = 1.1;
    let span = two_t_span(a).unwrap();
    let phi0 = &phi_states_on(&span, a).unwrap()[0];
    let beta = c64::new(a, a);
    let c = &span.constellation;
    let mut coeffs = vec![c64::new(0.0, 0.0); 24];
    for (k, amp) in c.amplitudes.iter().enumerate() {
        for p in 0..4 {
            let z = c64::new(0.0, 1.0).powi(p) * beta;
            if (amp[0] - z).norm() < 1e-12 && amp[1].norm() < 1e-12 || amp[0].norm() < 1e-12 && (amp[1] - z).norm() < 1e-12 {
                coeffs[k] += cr(1.0);
            }
        }
    }
    let target = SpanState::coherent(&span, coeffs).unwrap().normalized();
    assert!((inner(&target, phi0).unwrap().norm() - 1.0).abs() < 1e-10);
}

#[test]
fn logical_states_are_orthonormal() {
    for &a in &[0.7, 1.0, 1.5, 2.0] {
        let q = two_t_qutrit(a).unwrap();
        assert!(q.orthonormality_defect() < 1e-10, "alpha {a}");
    }
    assert_eq!(nu_k(1.3, 1), nu_k(1.3, 2));
}

#[test]
fn one_minus_overlap_positive_on_grid() {
    for i in 1..=400 {
        let a = i as f64 * 0.02;
        assert!(nu_k(a, 1).is_finite() && nu_k(a, 1) > 0.0);
    }
}

#[test]
fn phi_reconstruction_from_logical_basis() {
    let a = 1.5;
    let span = two_t_span(a).unwrap();
    let phi = phi_states_on(&span, a).unwrap();
    let ks = two_t_logical_states(&span, a).unwrap();
    let z = zeta();
    for k in 0..3 {
        let terms: Vec<(c64, &SpanState)> = (0..3)
            .map(|l| (z.powi((k * l) as i32) / (3.0 * nu_k(a, l)), &ks[l]))
            .collect();
        let rec = SpanState::combine(&terms).unwrap();
        let diff = SpanState::combine(&[(cr(1.0), &rec), (cr(-1.0), &phi[k])]).unwrap();
        assert!(diff.norm() < 1e-10);
    }
}

#[test]
fn global_phase_convention() {
    let a = 1.5;
    let span = two_t_span(a).unwrap();
    let phi = phi_states_on(&span, a).unwrap();
    for k in two_t_logical_states(&span, a).unwrap() {
        let v = inner(&phi[0], &k).unwrap();
        assert!(v.re > 0.0 && v.im.abs() < 1e-12);
    }
}

#[test]
fn small_alpha_limits_hold() {
    let span = two_t_span(0.05).unwrap();
    let ks = two_t_logical_states(&span, 0.05).unwrap();
    for (state, target) in ks.iter().zip(small_alpha_limits().iter()) {
        assert!(overlap_with_fock_target(state, target) >= 0.99);
    }
}

#[test]
fn qubit_minus_state_is_product_of_cats() {
    let a = 1.5;
    let qb = two_t_qubit(a).unwrap();
    let minus = SpanState::combine(&[(cr(1.0), &qb.logical[0]), (cr(-1.0), &qb.logical[1])]).unwrap().normalized();
    let cats = four_cat_qubits(a).unwrap();
    let span = &qb.span;
    // (|α₂⟩ − |iα₂⟩) has amplitude +1 on ±α and −1 on ±iα.
    let single = |z: c64| -> f64 {
        if (z.im).abs() < 1e-12 { 1.0 } else { -1.0 }
    };
    let mut coeffs = vec![c64::new(0.0, 0.0); 24];
    for (k, amp) in span.constellation.amplitudes.iter().enumerate() {
        if (amp[0].norm() - a).abs() < 1e-12 && (amp[1].norm() - a).abs() < 1e-12 {
            coeffs[k] = cr(single(amp[0]) * single(amp[1]));
        }
    }
    let product = SpanState::coherent(span, coeffs).unwrap().normalized();
    assert!((inner(&product, &minus).unwrap().norm() - 1.0).abs() < 1e-10);
    assert_eq!(cats.cats.len(), 4);
}

#[test]
fn four_cats_orthonormal_with_closed_form_norms() {
    let a = 1.3;
    let cats = four_cat_qubits(a).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let v = inner(&cats.cats[i], &cats.cats[j]).unwrap();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - cr(want)).norm() < 1e-10);
        }
    }
    let pts: Vec<c64> = (0..4).map(|k| c64::new(0.0, 1.0).powi(k) * a).collect();
    let span = Span::new(Constellation::single_mode(&pts).unwrap(), DEFAULT_EPS_RANK).unwrap();
    let c4 = SpanState::coherent(&span, vec![cr(c4_norm(a)); 4]).unwrap();
    assert!((c4.norm() - 1.0).abs() < 1e-12);
    let c2 = SpanState::coherent(&span, vec![cr(c2_norm(a)), cr(0.0), cr(c2_norm(a)), cr(0.0)]).unwrap();
    assert!((c2.norm() - 1.0).abs() < 1e-12);
    assert!(cats.qubit_02.orthonormality_defect() < 1e-10);
    assert!(cats.qubit_13.orthonormality_defect() < 1e-10);
    let e = coherent::fock_expand(&cats.cats[0], 40);
    assert!(e.mass_where(|n| n[0] % 4 != 0) < 1e-20);
}

#[test]
fn psk_logical_states_have_residue_support() {
    for n in [1, 2, 3, 4] {
        let code = psk_qutrit(1.3, n).unwrap();
        assert_eq!(code.label, format!("{}-PSK", 3 * n));
        assert!(code.orthonormality_defect() < 1e-10);
        for (k, s) in code.logical.iter().enumerate() {
            let e = coherent::fock_expand(s, 60);
            let m = 3 * n;
            let off = e.mass_where(|v| v[0] % m != (k * n) % m);
            assert!(off < 1e-20, "n {n} k {k}: {off}");
        }
    }
}

#[test]
fn psk_phase_shift_eigenvalues() {
    let n = 2;
    let code = psk_qutrit(1.2, n).unwrap();
    for (k, s) in code.logical.iter().enumerate() {
        let e = coherent::fock_expand(s, 60);
        let want = c64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
        for (idx, amp) in e.indices.iter().zip(&e.coeffs) {
            if amp.norm() > 1e-8 {
                let phase = c64::from_polar(1.0, 2.0 * std::f64::consts::PI * idx[0] as f64 / (3 * n) as f64);
                assert!((phase - want).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn two_t_fock_selection_rules() {
    let a = 1.0;
    let q = two_t_qutrit(a).unwrap();
    for s in &q.logical {
        let e = coherent::fock_expand(s, 36);
        let off = e.mass_where(|n| (n[0] + n[1]) % 4 != 0 || n[0] % 2 != 0);
        assert!(off < 1e-10 + e.tail_bound);
        assert!(1.0 - e.mass() <= e.tail_bound + 1e-12);
    }
}

#[test]
fn fock_norm_brackets_gram_norm() {
    let q = two_t_qutrit(0.5).unwrap();
    let e = coherent::fock_expand(&q.logical[0], 40);
    let norm = inner(&q.logical[0], &q.logical[0]).unwrap().re;
    assert!(e.mass() <= norm + 1e-12);
    assert!(e.mass() + e.tail_bound >= norm - 1e-12);
}

#[test]
fn fock_encoding_of_two_t() {
    let q = two_t_qutrit(1.0).unwrap();
    let space = twot::channels::reduced_fock_space(6);
    let enc = q.fock_encoding(&space.index_vecs()).unwrap();
    assert_eq!(enc.isometry.nrows(), 49);
    assert!(la::max_abs_diff(&(enc.isometry.adjoint() * &enc.isometry), &la::eye(3)) < 1e-12);
    for m in &enc.missing_mass {
        assert!(*m <= enc.tail_bound + 1e-12);
    }
}

#[test]
fn small_alpha_psk_rank_deficiency_is_reported() {
    assert!(matches!(psk_qutrit(0.25, 4), Err(twot::Error::RankDeficient { .. })));
    assert!(two_t_qutrit(-1.0).is_err());
}
