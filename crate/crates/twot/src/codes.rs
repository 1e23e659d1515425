//! Code constructors: the 2T constellation codes, PSK cat qutrits and four-component cats.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::{c64, Mat};

use crate::coherent::{self, inner, Constellation, Span, SpanState, DEFAULT_EPS_RANK};
use crate::error::{Error, Result};
use crate::group::{coset_decomposition, generate_2t, Quaternion};
use crate::la::{self, cr, CMat};

/// Minimum fraction of a logical state's norm that must lie inside the numerical support.
pub const SUPPORT_CAPTURE: f64 = 1.0 - 1e-6;

/// A d-dimensional encoding into the span of a constellation.
#[derive(Clone, Debug)]
pub struct CodeSpec {
    pub label: String,
    pub alpha: f64,
    pub span: Arc<Span>,
    /// Logical states in the coherent basis.
    pub logical: Vec<SpanState>,
    /// Orthonormal-coordinate isometry (rank × d), columns orthonormalized.
    pub isometry: CMat,
}

impl CodeSpec {
    pub fn new(label: impl Into<String>, alpha: f64, span: Arc<Span>, logical: Vec<SpanState>) -> Result<Self> {
        if logical.is_empty() {
            return Err(Error::InvalidParameter("code needs at least one logical state".into()));
        }
        let d = logical.len();
        if span.rank() < d {
            return Err(Error::RankDeficient { rank: span.rank(), required: d });
        }
        let r = span.rank();
        let mut y = la::zeros(r, d);
        for (j, s) in logical.iter().enumerate() {
            let coords = s.to_orthonormal().coeffs;
            let captured: f64 = coords.iter().map(|x| x.norm_sqr()).sum();
            let full = inner(s, s)?.re;
            if captured < SUPPORT_CAPTURE * full {
                return Err(Error::RankDeficient { rank: r, required: d });
            }
            for i in 0..r {
                y[(i, j)] = coords[i];
            }
        }
        let isometry = lowdin(&y)?;
        Ok(CodeSpec { label: label.into(), alpha, span, logical, isometry })
    }

    /// Build from an orthonormal-coordinate isometry directly.
    pub fn from_isometry(label: impl Into<String>, alpha: f64, span: Arc<Span>, isometry: CMat) -> Result<Self> {
        if isometry.nrows() != span.rank() {
            return Err(Error::DimensionMismatch { expected: span.rank(), got: isometry.nrows() });
        }
        let isometry = lowdin(&isometry)?;
        let logical = (0..isometry.ncols())
            .map(|j| SpanState::orthonormal(&span, la::col_vec(&isometry, j)).map(|s| s.to_coherent()))
            .collect::<Result<Vec<_>>>()?;
        Ok(CodeSpec { label: label.into(), alpha, span, logical, isometry })
    }

    pub fn dim(&self) -> usize {
        self.logical.len()
    }

    /// ⟨j̄|k̄⟩ from the Gram-weighted inner product.
    pub fn logical_gram(&self) -> CMat {
        let d = self.dim();
        Mat::from_fn(d, d, |j, k| inner(&self.logical[j], &self.logical[k]).expect("same span"))
    }

    /// Logical states written on a list of Fock index tuples, orthonormalized.
    pub fn fock_encoding(&self, indices: &[Vec<usize>]) -> Result<FockEncoding> {
        let cutoff = indices.iter().map(|n| n.iter().sum::<usize>()).max().unwrap_or(0);
        let d = self.dim();
        let mut y = la::zeros(indices.len(), d);
        let mut missing = Vec::with_capacity(d);
        let mut tail_bound = 0.0f64;
        for (j, s) in self.logical.iter().enumerate() {
            let s = s.to_coherent();
            let amps = coherent::fock_project(&s, indices);
            let norm2 = inner(&s, &s)?.re;
            let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            missing.push((1.0 - kept / norm2).max(0.0));
            let c = &s.span.constellation;
            let b: f64 = (0..c.len())
                .map(|k| s.coeffs[k].norm() * coherent::poisson_tail(c.energy(k), cutoff).sqrt())
                .sum();
            tail_bound = tail_bound.max(b * b / norm2);
            for (i, a) in amps.into_iter().enumerate() {
                y[(i, j)] = a;
            }
        }
        Ok(FockEncoding { isometry: lowdin(&y)?, missing_mass: missing, tail_bound })
    }

    pub fn orthonormality_defect(&self) -> f64 {
        la::max_abs_diff(&self.logical_gram(), &la::eye(self.dim()))
    }
}

/// A code expressed in a truncated Fock basis.
#[derive(Clone, Debug)]
pub struct FockEncoding {
    /// D × d, columns orthonormal.
    pub isometry: CMat,
    /// Per logical state, the norm fraction lost to truncation.
    pub missing_mass: Vec<f64>,
    /// Certified upper bound on the lost fraction beyond the total photon cutoff.
    pub tail_bound: f64,
}

/// Symmetric orthonormalization Y (Y†Y)^{-1/2}.
fn lowdin(y: &CMat) -> Result<CMat> {
    let s = y.adjoint() * y;
    let (w, _) = la::eigh_desc(&s)?;
    if w.last().copied().unwrap_or(0.0) <= 1e-14 * w[0].max(1e-300) {
        return Err(Error::RankDeficient { rank: w.iter().filter(|&&x| x > 1e-14 * w[0]).count(), required: y.ncols() });
    }
    let isqrt = la::herm_fn(&s, |x| 1.0 / x.sqrt())?;
    Ok(y * isqrt)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoTParams {
    pub alpha: f64,
    pub beta: c64,
}

impl TwoTParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(TwoTParams { alpha, beta: c64::new(alpha, alpha) })
    }
}

/// Identification map q = a+bi+cj+dk ↦ ((a+bi)β, (c−di)β).
pub fn identification_map(q: &Quaternion, beta: c64) -> [c64; 2] {
    let [a, b, c, d] = q.coeffs();
    [c64::new(a, b) * beta, c64::new(c, -d) * beta]
}

pub fn two_t_constellation(alpha: f64) -> Result<Constellation> {
    let p = TwoTParams::new(alpha)?;
    let g = generate_2t();
    Constellation::new(2, g.elements.iter().map(|q| identification_map(q, p.beta).to_vec()).collect())
}

pub fn two_t_span(alpha: f64) -> Result<Arc<Span>> {
    Span::new(two_t_constellation(alpha)?, DEFAULT_EPS_RANK)
}

/// ν = e^{α²} / (4√(2 + cos 2α² + cosh 2α²)).
pub fn nu(alpha: f64) -> f64 {
    let x = alpha * alpha;
    x.exp() / (4.0 * (2.0 + (2.0 * x).cos() + (2.0 * x).cosh()).sqrt())
}

/// ⟨φ_ℓ|φ_{ℓ+1}⟩ = 4 cosh α² cos α² / (2 + cos 2α² + cosh 2α²).
pub fn phi_overlap(alpha: f64) -> f64 {
    let x = alpha * alpha;
    4.0 * x.cosh() * x.cos() / (2.0 + (2.0 * x).cos() + (2.0 * x).cosh())
}

/// 1 − ⟨φ_ℓ|φ_{ℓ+1}⟩ written without cancellation.
fn one_minus_phi_overlap(alpha: f64) -> f64 {
    let x = alpha * alpha;
    let den = 2.0 + (2.0 * x).cos() + (2.0 * x).cosh();
    // 2 + cos 2x + cosh 2x − 4 cosh x cos x = 2 (cosh x − cos x)²
    let diff = 2.0 * ((x / 2.0).sinh().powi(2) + (x / 2.0).sin().powi(2));
    2.0 * diff * diff / den
}

/// ν₀ and ν₁ = ν₂.
pub fn nu_k(alpha: f64, k: usize) -> f64 {
    if k % 3 == 0 {
        1.0 / (3.0 * (1.0 + 2.0 * phi_overlap(alpha))).sqrt()
    } else {
        1.0 / (3.0 * one_minus_phi_overlap(alpha)).sqrt()
    }
}

pub fn zeta() -> c64 {
    c64::from_polar(1.0, 2.0 * PI / 3.0)
}

/// |φ₀⟩, |φ₁⟩, |φ₂⟩ on a given 2T span.
pub fn phi_states_on(span: &Arc<Span>, alpha: f64) -> Result<[SpanState; 3]> {
    let cd = coset_decomposition();
    let v = nu(alpha);
    let mk = |l: usize| {
        let mut c = vec![c64::new(0.0, 0.0); 24];
        for &i in &cd.indices[l] {
            c[i] = cr(v);
        }
        SpanState::coherent(span, c)
    };
    Ok([mk(0)?, mk(1)?, mk(2)?])
}

pub fn phi_states(alpha: f64) -> Result<[SpanState; 3]> {
    phi_states_on(&two_t_span(alpha)?, alpha)
}

/// |k̄⟩ = ν_k Σ_ℓ ζ^{−kℓ}|φ_ℓ⟩ in the coherent basis.
pub fn two_t_logical_states(span: &Arc<Span>, alpha: f64) -> Result<[SpanState; 3]> {
    let phi = phi_states_on(span, alpha)?;
    let z = zeta();
    let mk = |k: usize| {
        let nk = nu_k(alpha, k);
        let terms: Vec<(c64, &SpanState)> =
            (0..3).map(|l| (z.powi(-((k * l) as i32)) * nk, &phi[l])).collect();
        SpanState::combine(&terms)
    };
    Ok([mk(0)?, mk(1)?, mk(2)?])
}

pub fn two_t_qutrit(alpha: f64) -> Result<CodeSpec> {
    let span = two_t_span(alpha)?;
    if span.rank() < 3 {
        return Err(Error::RankDeficient { rank: span.rank(), required: 3 });
    }
    let ks = two_t_logical_states(&span, alpha)?;
    CodeSpec::new("2T-qutrit", alpha, span, ks.to_vec())
}

pub fn two_t_qubit(alpha: f64) -> Result<CodeSpec> {
    let span = two_t_span(alpha)?;
    if span.rank() < 3 {
        return Err(Error::RankDeficient { rank: span.rank(), required: 3 });
    }
    let [_, k1, k2] = two_t_logical_states(&span, alpha)?;
    CodeSpec::new("2T-qubit", alpha, span, vec![k1, k2])
}

/// Normalized state whose Fock amplitudes are the given sparse list.
pub type FockTarget = Vec<(Vec<usize>, c64)>;

/// α → 0 limits of |0̄⟩, |1̄⟩, |2̄⟩.
pub fn small_alpha_limits() -> [FockTarget; 3] {
    let h = cr(0.5);
    let s = c64::new(0.0, 1.0 / 2f64.sqrt());
    [
        vec![(vec![0, 0], cr(1.0))],
        vec![(vec![4, 0], h), (vec![0, 4], h), (vec![2, 2], -s)],
        vec![(vec![4, 0], h), (vec![0, 4], h), (vec![2, 2], s)],
    ]
}

/// |⟨target|x⟩| / ‖x‖ using exact coherent-state Fock amplitudes.
pub fn overlap_with_fock_target(x: &SpanState, target: &FockTarget) -> f64 {
    let idx: Vec<Vec<usize>> = target.iter().map(|(n, _)| n.clone()).collect();
    let amps = coherent::fock_project(x, &idx);
    let ov: c64 = target.iter().zip(&amps).map(|((_, t), a)| t.conj() * a).sum();
    ov.norm() / x.norm()
}

/// Single-mode PSK qutrit with 3n coherent states α e^{2πik/(3n)}.
pub fn psk_qutrit(alpha: f64, n: usize) -> Result<CodeSpec> {
    if n == 0 {
        return Err(Error::InvalidParameter("PSK order must be positive".into()));
    }
    TwoTParams::new(alpha)?;
    let m = 3 * n;
    let pts: Vec<c64> = (0..m).map(|k| c64::from_polar(alpha, 2.0 * PI * k as f64 / m as f64)).collect();
    let span = Span::new(Constellation::single_mode(&pts)?, DEFAULT_EPS_RANK)?;
    let chis = (0..3)
        .map(|k| {
            let mut c = vec![c64::new(0.0, 0.0); m];
            for l in 0..n {
                c[3 * l + k] = cr(1.0);
            }
            SpanState::coherent(&span, c).map(|s| s.normalized())
        })
        .collect::<Result<Vec<_>>>()?;
    let logical = (0..3)
        .map(|k| {
            let terms: Vec<(c64, &SpanState)> = (0..3)
                .map(|l| (c64::from_polar(1.0, -2.0 * PI * (k * l) as f64 / 3.0), &chis[l]))
                .collect();
            SpanState::combine(&terms).map(|s| s.normalized())
        })
        .collect::<Result<Vec<_>>>()?;
    CodeSpec::new(format!("{m}-PSK"), alpha, span, logical)
}

/// Four-component cat states and the two tensor-product qubits built from them.
#[derive(Clone, Debug)]
pub struct FourCats {
    /// |c_a⟩ ∝ Σ_k phase_a(k)|i^k α⟩ on the single-mode span {i^k α}.
    pub cats: [SpanState; 4],
    /// Span{|c₀c₀⟩, |c₂c₂⟩} inside the 2T span.
    pub qubit_02: CodeSpec,
    /// Span{|c₁c₁⟩, |c₃c₃⟩} inside the 2T span.
    pub qubit_13: CodeSpec,
}

/// Phase of |i^k α⟩ in |c_a⟩: 1, (−i)^k, (−1)^k, i^k.
pub fn cat_phase(a: usize, k: usize) -> c64 {
    let unit = [cr(1.0), c64::new(0.0, -1.0), cr(-1.0), c64::new(0.0, 1.0)][a % 4];
    unit.powi(k as i32)
}

/// c₂ = 1/√(2(1+e^{−2|α|²})).
pub fn c2_norm(alpha: f64) -> f64 {
    1.0 / (2.0 * (1.0 + (-2.0 * alpha * alpha).exp())).sqrt()
}

/// c₄ = 1/√(8e^{−|α|²}(cosh|α|² + cos|α|²)).
pub fn c4_norm(alpha: f64) -> f64 {
    let x = alpha * alpha;
    1.0 / (8.0 * (-x).exp() * (x.cosh() + x.cos())).sqrt()
}

pub fn four_cat_qubits(alpha: f64) -> Result<FourCats> {
    TwoTParams::new(alpha)?;
    let pts: Vec<c64> = (0..4).map(|k| c64::new(0.0, 1.0).powi(k) * alpha).collect();
    let single = Span::new(Constellation::single_mode(&pts)?, DEFAULT_EPS_RANK)?;
    let cats = [0, 1, 2, 3].map(|a| {
        let c = (0..4).map(|k| cat_phase(a, k)).collect();
        SpanState::coherent(&single, c).expect("length 4").normalized()
    });
    let span = two_t_span(alpha)?;
    let locate = |k: usize, l: usize| -> usize {
        let target = [pts[k], pts[l]];
        span.constellation
            .amplitudes
            .iter()
            .position(|a| (a[0] - target[0]).norm() + (a[1] - target[1]).norm() < 1e-12 * (1.0 + alpha))
            .expect("product constellation is contained in 2T")
    };
    let product = |a: usize| -> Result<SpanState> {
        let mut c = vec![c64::new(0.0, 0.0); 24];
        for k in 0..4 {
            for l in 0..4 {
                c[locate(k, l)] = cat_phase(a, k) * cat_phase(a, l);
            }
        }
        Ok(SpanState::coherent(&span, c)?.normalized())
    };
    let qubit_02 = CodeSpec::new("cat-c0c2", alpha, span.clone(), vec![product(0)?, product(2)?])?;
    let qubit_13 = CodeSpec::new("cat-c1c3", alpha, span.clone(), vec![product(1)?, product(3)?])?;
    Ok(FourCats { cats, qubit_02, qubit_13 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identification_of_units() {
        let b = c64::new(0.8, 0.8);
        let one = identification_map(&Quaternion::one(), b);
        assert_eq!(one, [b, c64::new(0.0, 0.0)]);
        let j = identification_map(&Quaternion::j(), b);
        assert_eq!(j, [c64::new(0.0, 0.0), b]);
    }

    #[test]
    fn one_minus_overlap_is_accurate() {
        for a in [0.3, 0.7, 1.0, 1.5, 2.0] {
            let direct = 1.0 - phi_overlap(a);
            assert!((one_minus_phi_overlap(a) - direct).abs() < 1e-13, "{a}");
        }
        assert!(one_minus_phi_overlap(0.05) > 0.0);
    }

    #[test]
    fn nu_one_equals_nu_two() {
        assert_eq!(nu_k(1.2, 1), nu_k(1.2, 2));
    }
}
