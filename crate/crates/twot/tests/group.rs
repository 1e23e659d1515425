use faer::c64;
use twot::group::*;
use twot::la::{self, CMat};

#[test]
fn hamilton_relations() {
    let (i, j, k) = (Quaternion::i(), Quaternion::j(), Quaternion::k());
    let m1 = Quaternion::from_ints(-1, 0, 0, 0);
    assert_eq!(qmul(&i, &j), k);
    assert_eq!(qmul(&i, &i), m1);
    assert_eq!(qmul(&j, &j), m1);
    assert_eq!(qmul(&k, &k), m1);
    assert_eq!(qmul(&qmul(&i, &j), &k), m1);
    assert_eq!(qmul(&j, &i), -k);
}

#[test]
fn omega_has_order_three() {
    let w = Quaternion::omega();
    assert_ne!(qmul(&w, &w), Quaternion::one());
    assert_eq!(qmul(&qmul(&w, &w), &w), Quaternion::one());
}

#[test]
fn two_t_has_24_closed_elements() {
    let g = generate_2t();
    assert_eq!(g.len(), 24);
    assert!(g.is_closed());
    assert!(g.has_inverses());
    assert_eq!(g.elements[g.identity], Quaternion::one());
    for q in &g.elements {
        assert!(q.is_unit());
        assert!(q.is_hurwitz_unit_form());
        assert_eq!(qmul(&Quaternion::one(), q), *q);
    }
    for u in [Quaternion::one(), Quaternion::i(), Quaternion::j(), Quaternion::k()] {
        assert!(g.contains(&u));
        assert!(g.contains(&-u));
    }
}

#[test]
fn associativity_on_all_triples_of_a_sample() {
    let g = generate_2t();
    let sample: Vec<&Quaternion> = g.elements.iter().step_by(3).collect();
    assert_eq!(sample.len(), 8);
    for a in &sample {
        for b in &sample {
            for c in &sample {
                assert_eq!(qmul(&qmul(a, b), c), qmul(a, &qmul(b, c)));
            }
        }
    }
}

#[test]
fn norm_is_multiplicative() {
    let g = generate_2t();
    let p = Quaternion::from_ints(1, 2, -3, 1);
    for q in &g.elements {
        assert_eq!(qmul(&p, q).norm_sq_x4() * 4, p.norm_sq_x4() * q.norm_sq_x4());
    }
}

#[test]
fn cosets_partition_and_rotate() {
    let g = generate_2t();
    let cd = coset_decomposition();
    assert_eq!(cd.omega, Quaternion::omega());
    assert_eq!(cd.subgroup.len(), 8);
    let mut all: Vec<usize> = cd.indices.iter().flatten().copied().collect();
    all.sort();
    assert_eq!(all, (0..24).collect::<Vec<_>>());
    for l in 0..3 {
        let next = &cd.cosets[(l + 1) % 3];
        for q in &cd.cosets[l] {
            assert!(next.contains(&qmul(&cd.omega, q)));
        }
        for (q, &ix) in cd.cosets[l].iter().zip(&cd.indices[l]) {
            assert_eq!(g.elements[ix], *q);
        }
    }
    for q in &cd.cosets[1] {
        assert_eq!(q.minus_signs() % 2, 0, "{q}");
    }
    for q in &cd.cosets[2] {
        assert_eq!(q.minus_signs() % 2, 1, "{q}");
    }
    assert!(cd.cosets[2].contains(&Quaternion::from_doubled([1, 1, 1, -1])));
}

#[test]
fn representation_is_unitary_homomorphism() {
    let g = generate_2t();
    let reps: Vec<CMat> = g.elements.iter().map(su2_rep).collect();
    for (a, ra) in g.elements.iter().zip(&reps) {
        assert!(la::max_abs_diff(&(ra.adjoint() * ra), &la::eye(2)) < 1e-12);
        let det = ra[(0, 0)] * ra[(1, 1)] - ra[(0, 1)] * ra[(1, 0)];
        assert!((det - c64::new(1.0, 0.0)).norm() < 1e-12);
        for (b, rb) in g.elements.iter().zip(&reps) {
            assert!(la::max_abs_diff(&su2_rep(&qmul(a, b)), &(ra * rb)) < 1e-12);
        }
    }
    let w = su2_rep(&Quaternion::omega());
    assert!(la::max_abs_diff(&(&w * &w * &w), &la::eye(2)) < 1e-12);
    assert!((la::trace(&w) - c64::new(-1.0, 0.0)).norm() < 1e-12);
}
