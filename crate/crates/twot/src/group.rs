//! Exact quaternion arithmetic and the binary tetrahedral group 2T.

use std::fmt;
use std::ops::{Mul, Neg};

use faer::{c64, Mat};

use crate::la::CMat;

/// Quaternion a + bi + cj + dk with coefficients stored doubled, so half-integers are exact.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Quaternion {
    twice: [i64; 4],
}

impl Quaternion {
    /// Build from doubled coefficients (2a, 2b, 2c, 2d).
    pub const fn from_doubled(twice: [i64; 4]) -> Self {
        Quaternion { twice }
    }

    pub const fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Quaternion { twice: [2 * a, 2 * b, 2 * c, 2 * d] }
    }

    pub const fn one() -> Self {
        Self::from_ints(1, 0, 0, 0)
    }
    pub const fn i() -> Self {
        Self::from_ints(0, 1, 0, 0)
    }
    pub const fn j() -> Self {
        Self::from_ints(0, 0, 1, 0)
    }
    pub const fn k() -> Self {
        Self::from_ints(0, 0, 0, 1)
    }

    /// ω = −(1+i+j+k)/2, generator of the C3 factor of 2T.
    pub const fn omega() -> Self {
        Self::from_doubled([-1, -1, -1, -1])
    }

    pub fn doubled(&self) -> [i64; 4] {
        self.twice
    }

    /// Coefficients (a, b, c, d) as floats.
    pub fn coeffs(&self) -> [f64; 4] {
        self.twice.map(|x| x as f64 / 2.0)
    }

    /// 4·|q|², an exact integer.
    pub fn norm_sq_x4(&self) -> i64 {
        self.twice.iter().map(|x| x * x).sum()
    }

    pub fn is_unit(&self) -> bool {
        self.norm_sq_x4() == 4
    }

    pub fn conj(&self) -> Self {
        let [a, b, c, d] = self.twice;
        Quaternion { twice: [a, -b, -c, -d] }
    }

    /// Inverse of a unit quaternion.
    pub fn inverse(&self) -> Self {
        assert!(self.is_unit(), "inverse only defined here for unit quaternions");
        self.conj()
    }

    /// True when all coefficients lie in {0, ±1}, or all in {±1/2}.
    pub fn is_hurwitz_unit_form(&self) -> bool {
        let ints = self.twice.iter().all(|x| x % 2 == 0 && x.abs() <= 2);
        let halves = self.twice.iter().all(|x| x.abs() == 1);
        ints || halves
    }

    /// Number of negative coefficients.
    pub fn minus_signs(&self) -> usize {
        self.twice.iter().filter(|&&x| x < 0).count()
    }
}

/// Hamilton product.
pub fn qmul(p: &Quaternion, q: &Quaternion) -> Quaternion {
    let [a1, b1, c1, d1] = p.twice;
    let [a2, b2, c2, d2] = q.twice;
    let r = [
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ];
    assert!(
        r.iter().all(|x| x % 2 == 0),
        "product leaves the half-integer lattice"
    );
    Quaternion { twice: r.map(|x| x / 2) }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        qmul(&self, &rhs)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion { twice: self.twice.map(|x| -x) }
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "i", "j", "k"];
        let half = self.twice.iter().any(|x| x % 2 != 0);
        let mut s = String::new();
        for (x, n) in self.twice.iter().zip(names) {
            if *x == 0 {
                continue;
            }
            let v = if half { x.abs() } else { x.abs() / 2 };
            let sign = if *x < 0 { "-" } else if s.is_empty() { "" } else { "+" };
            let mag = if v == 1 && !n.is_empty() { String::new() } else { v.to_string() };
            s.push_str(&format!("{sign}{mag}{n}"));
        }
        if s.is_empty() {
            s.push('0');
        }
        if half {
            write!(f, "({s})/2")
        } else {
            write!(f, "{s}")
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiniteQuaternionGroup {
    pub elements: Vec<Quaternion>,
    pub identity: usize,
}

impl FiniteQuaternionGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, q: &Quaternion) -> Option<usize> {
        self.elements.iter().position(|e| e == q)
    }

    pub fn contains(&self, q: &Quaternion) -> bool {
        self.index_of(q).is_some()
    }

    pub fn is_closed(&self) -> bool {
        self.elements
            .iter()
            .all(|p| self.elements.iter().all(|q| self.contains(&(*p * *q))))
    }

    pub fn has_inverses(&self) -> bool {
        self.elements.iter().all(|q| q.is_unit() && self.contains(&q.inverse()))
    }

    /// table[i][j] = index of elements[i]·elements[j].
    pub fn cayley_table(&self) -> Vec<Vec<usize>> {
        self.elements
            .iter()
            .map(|p| {
                self.elements
                    .iter()
                    .map(|q| self.index_of(&(*p * *q)).expect("group not closed"))
                    .collect()
            })
            .collect()
    }
}

/// The 24 elements of 2T: ±1, ±i, ±j, ±k, then (±1±i±j±k)/2 with + before − in each slot.
pub fn generate_2t() -> FiniteQuaternionGroup {
    let mut elements = Vec::with_capacity(24);
    for axis in 0..4 {
        for s in [1, -1] {
            let mut t = [0; 4];
            t[axis] = 2 * s;
            elements.push(Quaternion::from_doubled(t));
        }
    }
    for bits in 0..16u32 {
        let t: [i64; 4] = std::array::from_fn(|n| if bits >> (3 - n) & 1 == 0 { 1 } else { -1 });
        elements.push(Quaternion::from_doubled(t));
    }
    let g = FiniteQuaternionGroup { elements, identity: 0 };
    assert!(g.is_closed() && g.has_inverses());
    g
}

#[derive(Clone, Debug)]
pub struct CosetDecomposition {
    pub subgroup: Vec<Quaternion>,
    pub cosets: [Vec<Quaternion>; 3],
    /// Index of each coset element inside `generate_2t()`.
    pub indices: [Vec<usize>; 3],
    pub omega: Quaternion,
}

/// 2T = Q ∪ ωQ ∪ ω²Q with Q the quaternion group, cosets ordered as ω^ℓ·q over Q.
pub fn coset_decomposition() -> CosetDecomposition {
    let g = generate_2t();
    let omega = Quaternion::omega();
    let subgroup: Vec<Quaternion> = g.elements[..8].to_vec();
    let omega2 = omega * omega;
    let cosets = [
        subgroup.clone(),
        subgroup.iter().map(|q| omega * *q).collect::<Vec<_>>(),
        subgroup.iter().map(|q| omega2 * *q).collect::<Vec<_>>(),
    ];
    let indices = cosets.clone().map(|c| {
        c.iter()
            .map(|q| g.index_of(q).expect("coset element outside 2T"))
            .collect()
    });
    CosetDecomposition { subgroup, cosets, indices, omega }
}

/// ρ(a+bi+cj+dk) = [[a+bi, −c−di], [c−di, a−bi]].
pub fn su2_rep(q: &Quaternion) -> CMat {
    let [a, b, c, d] = q.coeffs();
    let m = [[c64::new(a, b), c64::new(-c, -d)], [c64::new(c, -d), c64::new(a, -b)]];
    Mat::from_fn(2, 2, |i, j| m[i][j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::{eye, max_abs_diff};

    #[test]
    fn ij_is_k() {
        assert_eq!(Quaternion::i() * Quaternion::j(), Quaternion::k());
        assert_eq!(Quaternion::j() * Quaternion::i(), -Quaternion::k());
        let m1 = -Quaternion::one();
        assert_eq!(Quaternion::i() * Quaternion::i(), m1);
        assert_eq!(Quaternion::i() * Quaternion::j() * Quaternion::k(), m1);
    }

    #[test]
    fn omega_cubed_is_one() {
        let w = Quaternion::omega();
        assert_eq!(w * w * w, Quaternion::one());
        assert_ne!(w * w, Quaternion::one());
    }

    #[test]
    fn canonical_order() {
        let g = generate_2t();
        assert_eq!(g.len(), 24);
        assert_eq!(g.elements[0], Quaternion::one());
        assert_eq!(g.elements[1], -Quaternion::one());
        assert_eq!(g.elements[7], -Quaternion::k());
        assert_eq!(g.elements[8].doubled(), [1, 1, 1, 1]);
        assert_eq!(g.elements[9].doubled(), [1, 1, 1, -1]);
        assert_eq!(g.elements[23].doubled(), [-1, -1, -1, -1]);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Quaternion::one().to_string(), "1");
        assert_eq!((-Quaternion::j()).to_string(), "-j");
        assert_eq!(Quaternion::omega().to_string(), "(-1-i-j-k)/2");
        assert_eq!(Quaternion::from_doubled([1, 1, 1, -1]).to_string(), "(1+i+j-k)/2");
    }

    #[test]
    fn omega_coset_parity() {
        let cd = coset_decomposition();
        for q in &cd.cosets[1] {
            assert_eq!(q.minus_signs() % 2, 0, "{q}");
        }
        for q in &cd.cosets[2] {
            assert_eq!(q.minus_signs() % 2, 1, "{q}");
        }
        assert!(cd.cosets[2].contains(&Quaternion::from_doubled([1, 1, 1, -1])));
    }

    #[test]
    fn su2_identity_and_omega() {
        assert!(max_abs_diff(&su2_rep(&Quaternion::one()), &eye(2)) < 1e-15);
        let u = su2_rep(&Quaternion::omega());
        let u3 = &(&u * &u) * &u;
        assert!(max_abs_diff(&u3, &eye(2)) < 1e-14);
    }
}
