use faer::{c64, Mat};
use twot::codes::{phi_states_on, two_t_qutrit, two_t_span, zeta};
use twot::coherent::{inner, SpanState};
use twot::group::{generate_2t, su2_rep, Quaternion};
use twot::la::{self, cr};
use twot::operators::*;

#[test]
fn jumps_annihilate_constellation_exactly() {
    let g = generate_2t();
    for f in [PolynomialJumpOperator::f1(1.0), PolynomialJumpOperator::f2(1.0)] {
        for q in &g.elements {
            assert!(f.eval_exact_2t(q).unwrap().is_zero(), "{} on {q}", f.name);
        }
    }
}

#[test]
fn jump_values_off_constellation() {
    let a: f64 = 1.3;
    let f2 = PolynomialJumpOperator::f2(a);
    assert!((f2.eval(cr(0.0), cr(0.0)) - cr(-4.0 * a.powi(8))).norm() < 1e-12);
    let f1 = PolynomialJumpOperator::f1(a);
    let v = f1.eval(cr(2.0 * a), cr(2.0 * a));
    assert!((v.re / a.powi(8) - 1080.0).abs() < 1e-9 && v.im.abs() < 1e-9);
}

#[test]
fn z_bar_is_logical_z() {
    let code = two_t_qutrit(1.5).unwrap();
    let z = zeta();
    for (k, s) in code.logical.iter().enumerate() {
        let y = passive_apply(&PassiveTransform::z_bar(), s).unwrap();
        let want = s.scaled(z.powi(k as i32));
        let d = SpanState::combine(&[(cr(1.0), &y), (cr(-1.0), &want)]).unwrap();
        assert!(d.norm() < 1e-9);
        let y3 = passive_apply(&PassiveTransform::z_bar(), &passive_apply(&PassiveTransform::z_bar(), &y).unwrap()).unwrap();
        let d3 = SpanState::combine(&[(cr(1.0), &y3), (cr(-1.0), s)]).unwrap();
        assert!(d3.norm() < 1e-9);
    }
}

#[test]
fn r1_and_swap_on_phi_states() {
    let a = 1.2;
    let span = two_t_span(a).unwrap();
    let phi = phi_states_on(&span, a).unwrap();
    let r1 = PassiveTransform::r1();
    let close = |x: &SpanState, y: &SpanState| {
        SpanState::combine(&[(cr(1.0), x), (cr(-1.0), y)]).unwrap().norm() < 1e-9
    };
    assert!(close(&passive_apply(&r1, &phi[1]).unwrap(), &phi[2]));
    assert!(close(&passive_apply(&r1, &phi[2]).unwrap(), &phi[1]));
    assert!(close(&passive_apply(&r1, &phi[0]).unwrap(), &phi[0]));
    for p in &phi {
        assert!(close(&passive_apply(&PassiveTransform::swap(), p).unwrap(), p));
    }
}

#[test]
fn stabilizers_accept_logical_states() {
    let a = 1.5;
    let code = two_t_qutrit(a).unwrap();
    for s in &code.logical {
        let rep = stabilizer_audit(s, a).unwrap();
        assert_eq!(rep.residuals.len(), 5);
        assert!(rep.accepted(QUTRIT_ACCEPT_TOL), "{rep:?}");
    }
}

#[test]
fn stabilizers_reject_states_outside_qutrit() {
    let a = 1.5;
    let code = two_t_qutrit(a).unwrap();
    let span = code.span.clone();
    // Project a fixed non-symmetric state off the qutrit.
    let mut x = SpanState::coherent(&span, (0..24).map(|k| c64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos())).collect()).unwrap();
    for s in &code.logical {
        let ov = inner(s, &x).unwrap();
        x = SpanState::combine(&[(cr(1.0), &x), (-ov, s)]).unwrap();
    }
    let x = x.normalized();
    let rep = stabilizer_audit(&x, a).unwrap();
    assert!(rep.max_residual() > 1e-3);

    let one = SpanState::basis_state(&span, 0);
    let rep = stabilizer_audit(&one, a).unwrap();
    assert!(rep.get("SWAP").unwrap() > 1e-3);
    assert!(rep.get("R1R2").unwrap() > 1e-3);
}

#[test]
fn generator_matches_omega_representation() {
    let rep = z_generator_check().unwrap();
    assert!(rep.residual < 1e-12);
    let mut phases: Vec<f64> = rep.eigenvalues.iter().map(|z| z.arg()).collect();
    phases.sort_by(f64::total_cmp);
    let third = 2.0 * std::f64::consts::PI / 3.0;
    assert!((phases[0] + third).abs() < 1e-12 && (phases[1] - third).abs() < 1e-12);
    assert!((rep.phase - cr(1.0)).norm() < 1e-12);
}

#[test]
fn qubit_gates_act_as_stated() {
    let rep = qubit_gates(1.5).unwrap();
    assert!(rep.max_deviation < 1e-9, "{}", rep.max_deviation);
}

#[test]
fn passive_transforms_preserve_inner_products() {
    let span = two_t_span(1.1).unwrap();
    let x = SpanState::coherent(&span, (0..24).map(|k| c64::new(k as f64, 1.0)).collect()).unwrap();
    let y = SpanState::coherent(&span, (0..24).map(|k| c64::new(1.0, -(k as f64).sqrt())).collect()).unwrap();
    for t in [PassiveTransform::z_bar(), PassiveTransform::r1(), PassiveTransform::swap()] {
        let a = inner(&passive_apply(&t, &x).unwrap(), &passive_apply(&t, &y).unwrap()).unwrap();
        let b = inner(&x, &y).unwrap();
        assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
    }
}

#[test]
fn jumps_commute_with_symmetries() {
    let span = two_t_span(1.1).unwrap();
    let x = SpanState::coherent(&span, (0..24).map(|k| c64::new((k as f64).cos(), 0.5)).collect()).unwrap();
    let r1r2 = PassiveTransform::r1().then(&PassiveTransform::r2());
    for f in [PolynomialJumpOperator::f1(1.1), PolynomialJumpOperator::f2(1.1)] {
        for t in [PassiveTransform::z_bar(), r1r2.clone(), PassiveTransform::swap()] {
            let a = apply_jump(&f, &passive_apply(&t, &x).unwrap()).unwrap();
            let b = passive_apply(&t, &apply_jump(&f, &x).unwrap()).unwrap();
            let d = SpanState::combine(&[(cr(1.0), &a), (cr(-1.0), &b)]).unwrap();
            assert!(d.norm() < 1e-8);
        }
    }
}

#[test]
fn non_closed_transform_moves_constellation() {
    let span = two_t_span(1.0).unwrap();
    let theta = 0.3f64;
    let u = Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) | (1, 1) => cr(theta.cos()),
        (0, 1) => cr(-theta.sin()),
        _ => cr(theta.sin()),
    });
    let t = PassiveTransform::new("BS", u).unwrap();
    let x = SpanState::basis_state(&span, 3);
    let y = passive_apply(&t, &x).unwrap();
    assert!(!std::sync::Arc::ptr_eq(&y.span, &span));
    assert!((y.norm() - 1.0).abs() < 1e-12);
    assert!(PassiveTransform::new("bad", la::scale(&la::eye(2), cr(2.0))).is_err());
    let _ = su2_rep(&Quaternion::one());
}
