//! Jump operators, passive linear-optics transforms, stabilizers and logical gates.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::{c64, Mat};

use crate::codes::CodeSpec;
use crate::coherent::{inner, Basis, Constellation, Span, SpanState};
use crate::error::{Error, Result};
use crate::group::{su2_rep, Quaternion};
use crate::la::{self, cr, CMat};

/// Dyadic Gaussian rational (re + i·im)/2^exp2, used for exact polynomial evaluation on 2T.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussDyadic {
    pub re: i128,
    pub im: i128,
    pub exp2: u32,
}

impl GaussDyadic {
    pub fn int(re: i128, im: i128) -> Self {
        GaussDyadic { re, im, exp2: 0 }
    }

    fn align(self, e: u32) -> Self {
        let s = e - self.exp2;
        GaussDyadic { re: self.re << s, im: self.im << s, exp2: e }
    }

    pub fn add(self, o: Self) -> Self {
        let e = self.exp2.max(o.exp2);
        let (a, b) = (self.align(e), o.align(e));
        GaussDyadic { re: a.re + b.re, im: a.im + b.im, exp2: e }.reduce()
    }

    pub fn mul(self, o: Self) -> Self {
        GaussDyadic {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
            exp2: self.exp2 + o.exp2,
        }
        .reduce()
    }

    pub fn pow(self, n: u32) -> Self {
        (0..n).fold(GaussDyadic::int(1, 0), |acc, _| acc.mul(self))
    }

    fn reduce(mut self) -> Self {
        while self.exp2 > 0 && self.re % 2 == 0 && self.im % 2 == 0 {
            self.re /= 2;
            self.im /= 2;
            self.exp2 -= 1;
        }
        if self.re == 0 && self.im == 0 {
            self.exp2 = 0;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn to_c64(&self) -> c64 {
        let s = (2f64).powi(-(self.exp2 as i32));
        c64::new(self.re as f64 * s, self.im as f64 * s)
    }
}

/// coef · α^{alpha_pow} · â^{pa} b̂^{pb}
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coef: i64,
    pub alpha_pow: u32,
    pub pa: u32,
    pub pb: u32,
}

/// Polynomial in the two annihilation operators; diagonal on coherent states.
#[derive(Clone, Debug)]
pub struct PolynomialJumpOperator {
    pub name: String,
    pub alpha: f64,
    pub terms: Vec<Term>,
}

impl PolynomialJumpOperator {
    /// F₁ = (â⁴ + b̂⁴ + α⁴)² − 9α⁸.
    pub fn f1(alpha: f64) -> Self {
        let t = |coef, alpha_pow, pa, pb| Term { coef, alpha_pow, pa, pb };
        PolynomialJumpOperator {
            name: "F1".into(),
            alpha,
            terms: vec![t(1, 0, 8, 0), t(1, 0, 0, 8), t(2, 0, 4, 4), t(2, 4, 4, 0), t(2, 4, 0, 4), t(-8, 8, 0, 0)],
        }
    }

    /// F₂ = 6â⁴b̂⁴ − α⁴(â⁴ + b̂⁴) − 4α⁸.
    pub fn f2(alpha: f64) -> Self {
        let t = |coef, alpha_pow, pa, pb| Term { coef, alpha_pow, pa, pb };
        PolynomialJumpOperator {
            name: "F2".into(),
            alpha,
            terms: vec![t(6, 0, 4, 4), t(-1, 4, 4, 0), t(-1, 4, 0, 4), t(-4, 8, 0, 0)],
        }
    }

    /// Eigenvalue on the coherent state |b1, b2⟩.
    pub fn eval(&self, b1: c64, b2: c64) -> c64 {
        self.terms
            .iter()
            .map(|t| cr(t.coef as f64 * self.alpha.powi(t.alpha_pow as i32)) * b1.powu(t.pa) * b2.powu(t.pb))
            .sum()
    }

    /// Eigenvalue on the 2T point of quaternion q, exactly, in units of α^degree
    /// (None if the polynomial is not homogeneous of a single degree).
    pub fn eval_exact_2t(&self, q: &Quaternion) -> Option<GaussDyadic> {
        let deg = self.terms.first()?.alpha_pow + self.terms[0].pa + self.terms[0].pb;
        if self.terms.iter().any(|t| t.alpha_pow + t.pa + t.pb != deg) {
            return None;
        }
        let [a, b, c, d] = q.doubled().map(|x| x as i128);
        // β = α(1+i): first amplitude (a+bi)(1+i)/2, second (c−di)(1+i)/2 in units of α.
        let one_i = GaussDyadic::int(1, 1);
        let u = GaussDyadic { re: a, im: b, exp2: 1 }.reduce().mul(one_i);
        let v = GaussDyadic { re: c, im: -d, exp2: 1 }.reduce().mul(one_i);
        Some(self.terms.iter().fold(GaussDyadic::int(0, 0), |acc, t| {
            acc.add(GaussDyadic::int(t.coef as i128, 0).mul(u.pow(t.pa)).mul(v.pow(t.pb)))
        }))
    }
}

/// F applied to a state over a two-mode constellation (coherent basis, coefficientwise).
pub fn apply_jump(f: &PolynomialJumpOperator, x: &SpanState) -> Result<SpanState> {
    let x = x.to_coherent();
    let c = &x.span.constellation;
    if c.n_modes != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: c.n_modes });
    }
    let coeffs = x
        .coeffs
        .iter()
        .zip(&c.amplitudes)
        .map(|(v, a)| v * f.eval(a[0], a[1]))
        .collect();
    SpanState::coherent(&x.span, coeffs)
}

/// Passive transformation |α⃗⟩ ↦ |U α⃗⟩.
#[derive(Clone, Debug)]
pub struct PassiveTransform {
    pub name: String,
    pub u: CMat,
}

impl PassiveTransform {
    pub fn new(name: impl Into<String>, u: CMat) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::DimensionMismatch { expected: u.nrows(), got: u.ncols() });
        }
        let dev = la::max_abs_diff(&(u.adjoint() * &u), &la::eye(u.nrows()));
        if dev > 1e-12 {
            return Err(Error::InvalidParameter(format!("single-particle matrix not unitary (deviation {dev:.2e})")));
        }
        Ok(PassiveTransform { name: name.into(), u })
    }

    fn fixed(name: &str, u: [[c64; 2]; 2]) -> Self {
        PassiveTransform { name: name.into(), u: Mat::from_fn(2, 2, |i, j| u[i][j]) }
    }

    /// Z̄, single-particle matrix ρ(ω).
    pub fn z_bar() -> Self {
        PassiveTransform { name: "Zbar".into(), u: su2_rep(&Quaternion::omega()) }
    }

    pub fn r1() -> Self {
        let (o, z, i) = (cr(1.0), cr(0.0), la::I);
        Self::fixed("R1", [[i, z], [z, o]])
    }

    pub fn r2() -> Self {
        let (o, z, i) = (cr(1.0), cr(0.0), la::I);
        Self::fixed("R2", [[o, z], [z, i]])
    }

    pub fn swap() -> Self {
        let (o, z) = (cr(1.0), cr(0.0));
        Self::fixed("SWAP", [[z, o], [o, z]])
    }

    pub fn then(&self, next: &PassiveTransform) -> Self {
        PassiveTransform { name: format!("{}{}", next.name, self.name), u: &next.u * &self.u }
    }

    pub fn map_amplitudes(&self, a: &[c64]) -> Vec<c64> {
        (0..self.u.nrows()).map(|i| (0..a.len()).map(|j| self.u[(i, j)] * a[j]).sum()).collect()
    }

    /// Permutation π with U α_k = α_{π(k)}, if the constellation is closed under U.
    pub fn permutation(&self, c: &Constellation) -> Option<Vec<usize>> {
        let scale = c
            .amplitudes
            .iter()
            .flat_map(|a| a.iter().map(|z| z.norm()))
            .fold(1.0f64, f64::max);
        c.amplitudes
            .iter()
            .map(|a| {
                let b = self.map_amplitudes(a);
                c.amplitudes.iter().position(|t| {
                    t.iter().zip(&b).map(|(x, y)| (x - y).norm()).sum::<f64>() < 1e-10 * scale
                })
            })
            .collect()
    }
}

/// T x; stays in the same span when the constellation is permuted, otherwise carries a new one.
pub fn passive_apply(t: &PassiveTransform, x: &SpanState) -> Result<SpanState> {
    let x = x.to_coherent();
    let c = &x.span.constellation;
    if t.u.nrows() != c.n_modes {
        return Err(Error::DimensionMismatch { expected: c.n_modes, got: t.u.nrows() });
    }
    match t.permutation(c) {
        Some(p) => {
            let mut out = vec![c64::new(0.0, 0.0); x.coeffs.len()];
            for (k, &pk) in p.iter().enumerate() {
                out[pk] += x.coeffs[k];
            }
            SpanState::coherent(&x.span, out)
        }
        None => {
            let moved = Constellation::new(c.n_modes, c.amplitudes.iter().map(|a| t.map_amplitudes(a)).collect())?;
            let span = Span::new(moved, x.span.basis.eps_rank)?;
            SpanState::coherent(&span, x.coeffs.clone())
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZGeneratorReport {
    pub theta: f64,
    pub generator: CMat,
    pub exponential: CMat,
    pub target: CMat,
    pub eigenvalues: Vec<c64>,
    /// Global phase φ minimizing ‖exp(iθH) − φ·ρ(ω)‖.
    pub phase: c64,
    pub residual: f64,
}

/// Compare exp(iθH), H = [[−1, 1−i], [1+i, 1]], θ = 2π/(3√3), against ρ(ω) up to global phase.
pub fn z_generator_check() -> Result<ZGeneratorReport> {
    let theta = 2.0 * PI / (3.0 * 3f64.sqrt());
    let h = Mat::from_fn(2, 2, |i, j| [[cr(-1.0), c64::new(1.0, -1.0)], [c64::new(1.0, 1.0), cr(1.0)]][i][j]);
    let e = la::expi_herm(&h, theta)?;
    let (w, _) = la::eigh_desc(&h)?;
    let eigenvalues = w.iter().map(|&x| c64::from_polar(1.0, theta * x)).collect();
    let target = su2_rep(&Quaternion::omega());
    let ov = la::trace_prod(&target.adjoint().to_owned(), &e);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { cr(1.0) };
    let residual = la::max_abs_diff(&e, &la::scale(&target, phase));
    Ok(ZGeneratorReport { theta, generator: h, exponential: e, target, eigenvalues, phase, residual })
}

#[derive(Clone, Debug)]
pub struct StabilizerReport {
    pub residuals: Vec<(String, f64)>,
}

impl StabilizerReport {
    pub fn accepted(&self, tol: f64) -> bool {
        self.residuals.iter().all(|(_, r)| *r < tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|(n, _)| n == name).map(|r| r.1)
    }
}

fn diff_norm(a: &SpanState, b: &SpanState) -> Result<f64> {
    let d = SpanState::combine(&[(cr(1.0), a), (cr(-1.0), b)])?;
    Ok(inner(&d, &d)?.re.max(0.0).sqrt())
}

pub const QUTRIT_ACCEPT_TOL: f64 = 1e-9;

/// Residuals of F₁+1, F₂+1, R₁R₂, R₁², SWAP on x (over the 2T constellation at amplitude α).
pub fn stabilizer_audit(x: &SpanState, alpha: f64) -> Result<StabilizerReport> {
    let xc = x.to_coherent();
    let mut residuals = Vec::new();
    for f in [PolynomialJumpOperator::f1(alpha), PolynomialJumpOperator::f2(alpha)] {
        let y = apply_jump(&f, &xc)?;
        residuals.push((format!("{}+1", f.name), inner(&y, &y)?.re.max(0.0).sqrt()));
    }
    let r1 = PassiveTransform::r1();
    let r2 = PassiveTransform::r2();
    for t in [r1.then(&r2), r1.then(&r1), PassiveTransform::swap()] {
        let name = match t.name.as_str() {
            "R2R1" => "R1R2".to_string(),
            "R1R1" => "R1^2".to_string(),
            n => n.to_string(),
        };
        let y = passive_apply(&t, &xc)?;
        if !Arc::ptr_eq(&y.span, &xc.span) {
            return Err(Error::ConstellationMismatch);
        }
        residuals.push((name, diff_norm(&y, &xc)?));
    }
    Ok(StabilizerReport { residuals })
}

/// ⟨j̄|T|k̄⟩ on a code.
pub fn logical_matrix(code: &CodeSpec, t: &PassiveTransform) -> Result<CMat> {
    let d = code.dim();
    let images = code.logical.iter().map(|s| passive_apply(t, s)).collect::<Result<Vec<_>>>()?;
    let mut m = la::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            m[(j, k)] = inner(&code.logical[j], &images[k])?;
        }
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct QubitGateReport {
    pub x_bar: PassiveTransform,
    pub phase_gate: PassiveTransform,
    /// R₁ on the qutrit, expected X₁₂.
    pub qutrit_r1: CMat,
    pub qubit_x: CMat,
    pub qubit_phase: CMat,
    pub max_deviation: f64,
}

/// R₁ as logical X and Z̄ as ζ·diag(1, ζ) on the 2T-qubit.
pub fn qubit_gates(alpha: f64) -> Result<QubitGateReport> {
    let qutrit = crate::codes::two_t_qutrit(alpha)?;
    let qubit = crate::codes::two_t_qubit(alpha)?;
    let r1 = PassiveTransform::r1();
    let z = PassiveTransform::z_bar();
    let qutrit_r1 = logical_matrix(&qutrit, &r1)?;
    let qubit_x = logical_matrix(&qubit, &r1)?;
    let qubit_phase = logical_matrix(&qubit, &z)?;
    let zeta = crate::codes::zeta();
    let (o, n) = (cr(1.0), cr(0.0));
    let x12 = Mat::from_fn(3, 3, |i, j| if (2 * j) % 3 == i { o } else { n });
    let xq = Mat::from_fn(2, 2, |i, j| if i != j { o } else { n });
    let pq = Mat::from_fn(2, 2, |i, j| if i != j { n } else if i == 0 { zeta } else { zeta * zeta });
    let max_deviation = la::max_abs_diff(&qutrit_r1, &x12)
        .max(la::max_abs_diff(&qubit_x, &xq))
        .max(la::max_abs_diff(&qubit_phase, &pq));
    Ok(QubitGateReport { x_bar: r1, phase_gate: z, qutrit_r1, qubit_x, qubit_phase, max_deviation })
}

/// Coefficients of `x` in the coherent basis, converting if needed.
pub fn coherent_coeffs(x: &SpanState) -> Vec<c64> {
    match x.basis {
        Basis::Coherent => x.coeffs.clone(),
        Basis::Orthonormal => x.to_coherent().coeffs,
    }
}
