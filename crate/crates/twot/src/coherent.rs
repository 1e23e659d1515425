//! Spans of finitely many multimode coherent states.

use std::sync::Arc;

use faer::{c64, Mat};
use statrs::distribution::{DiscreteCDF, Poisson};

use crate::error::{Error, Result};
use crate::la::{self, cr, CMat};

pub const DEFAULT_EPS_RANK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    pub n_modes: usize,
    pub amplitudes: Vec<Vec<c64>>,
}

impl Constellation {
    pub fn new(n_modes: usize, amplitudes: Vec<Vec<c64>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("empty constellation".into()));
        }
        if let Some(a) = amplitudes.iter().find(|a| a.len() != n_modes) {
            return Err(Error::DimensionMismatch { expected: n_modes, got: a.len() });
        }
        for i in 0..amplitudes.len() {
            for j in 0..i {
                if amplitudes[i] == amplitudes[j] {
                    return Err(Error::InvalidParameter(format!("amplitudes {j} and {i} coincide")));
                }
            }
        }
        Ok(Constellation { n_modes, amplitudes })
    }

    pub fn single_mode(points: &[c64]) -> Result<Self> {
        Self::new(1, points.iter().map(|&p| vec![p]).collect())
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Every amplitude multiplied by `s` (points may merge only if s = 0, which is rejected).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.n_modes,
            self.amplitudes.iter().map(|a| a.iter().map(|x| x * s).collect()).collect(),
        )
    }

    /// Mean photon number Σ|α_mode|² of component k.
    pub fn energy(&self, k: usize) -> f64 {
        self.amplitudes[k].iter().map(|x| x.norm_sqr()).sum()
    }
}

/// ⟨a|b⟩ for multimode coherent states.
pub fn overlap(a: &[c64], b: &[c64]) -> c64 {
    let mut e = c64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        e += -0.5 * x.norm_sqr() - 0.5 * y.norm_sqr() + x.conj() * y;
    }
    e.exp()
}

/// Matrix of overlaps ⟨a_k|b_l⟩.
pub fn cross_gram(a: &Constellation, b: &Constellation) -> CMat {
    Mat::from_fn(a.len(), b.len(), |k, l| overlap(&a.amplitudes[k], &b.amplitudes[l]))
}

pub fn gram(c: &Constellation) -> CMat {
    la::herm(&cross_gram(c, c))
}

#[derive(Clone, Debug)]
pub struct GramDecomposition {
    pub gram: CMat,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
    pub eps_rank: f64,
    pub rank: usize,
}

impl GramDecomposition {
    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.dim()
    }

    /// T = Λ_r^{1/2} V_r†: coherent coefficients → orthonormal coordinates (r×m).
    pub fn forward_matrix(&self) -> CMat {
        let r = self.rank;
        Mat::from_fn(r, self.dim(), |i, k| {
            self.eigenvectors[(k, i)].conj() * self.eigenvalues[i].sqrt()
        })
    }

    /// V_r Λ_r^{-1/2}: orthonormal coordinates → minimal-norm coherent coefficients (m×r).
    pub fn backward_matrix(&self) -> CMat {
        Mat::from_fn(self.dim(), self.rank, |k, i| {
            self.eigenvectors[(k, i)] / self.eigenvalues[i].sqrt()
        })
    }

    /// Orthonormal coordinates of |ψ_k⟩ = (1/√m) τ^{-1/2}|α_k⟩ as columns (r×m).
    pub fn psi_coords(&self) -> CMat {
        Mat::from_fn(self.rank, self.dim(), |i, k| self.eigenvectors[(k, i)].conj())
    }

    pub fn to_orthonormal(&self, coeffs: &[c64]) -> Result<Vec<c64>> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: coeffs.len() });
        }
        Ok(la::col_vec(&(self.forward_matrix() * la::col(coeffs)), 0))
    }

    pub fn from_orthonormal(&self, y: &[c64]) -> Result<Vec<c64>> {
        if y.len() != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: y.len() });
        }
        Ok(la::col_vec(&(self.backward_matrix() * la::col(y)), 0))
    }

    /// Solve G c = g for coherent coefficients given the overlaps g_k = ⟨α_k|x⟩.
    /// Fails when g has weight outside the numerical support of G.
    pub fn coeffs_from_overlaps(&self, g: &[c64]) -> Result<Vec<c64>> {
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: g.len() });
        }
        let proj: Vec<c64> = (0..self.dim())
            .map(|i| (0..self.dim()).map(|k| self.eigenvectors[(k, i)].conj() * g[k]).sum())
            .collect();
        let total: f64 = proj.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let outside: f64 = proj[self.rank..].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if outside > 1e-8 * total.max(1e-300) {
            return Err(Error::OutsideSupport { weight: outside });
        }
        Ok((0..self.dim())
            .map(|k| {
                (0..self.rank)
                    .map(|i| self.eigenvectors[(k, i)] * proj[i] / self.eigenvalues[i])
                    .sum()
            })
            .collect())
    }
}

pub fn orthobasis(c: &Constellation, eps_rank: f64) -> Result<GramDecomposition> {
    if !(eps_rank > 0.0) {
        return Err(Error::InvalidParameter(format!("eps_rank must be positive, got {eps_rank}")));
    }
    decompose(gram(c), eps_rank)
}

pub(crate) fn decompose(g: CMat, eps_rank: f64) -> Result<GramDecomposition> {
    let (w, v) = la::eigh_desc(&g)?;
    let top = w.first().copied().unwrap_or(0.0);
    let rank = w.iter().take_while(|&&x| x > eps_rank * top).count();
    Ok(GramDecomposition { gram: g, eigenvalues: w, eigenvectors: v, eps_rank, rank })
}

/// A constellation together with its orthonormalized support.
#[derive(Clone, Debug)]
pub struct Span {
    pub constellation: Constellation,
    pub basis: GramDecomposition,
}

impl Span {
    pub fn new(constellation: Constellation, eps_rank: f64) -> Result<Arc<Self>> {
        let basis = orthobasis(&constellation, eps_rank)?;
        Ok(Arc::new(Span { constellation, basis }))
    }

    pub fn rank(&self) -> usize {
        self.basis.rank
    }

    pub fn len(&self) -> usize {
        self.constellation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constellation.is_empty()
    }

    pub fn gram(&self) -> &CMat {
        &self.basis.gram
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Coherent,
    Orthonormal,
}

#[derive(Clone, Debug)]
pub struct SpanState {
    pub span: Arc<Span>,
    pub coeffs: Vec<c64>,
    pub basis: Basis,
}

impl SpanState {
    pub fn coherent(span: &Arc<Span>, coeffs: Vec<c64>) -> Result<Self> {
        if coeffs.len() != span.len() {
            return Err(Error::DimensionMismatch { expected: span.len(), got: coeffs.len() });
        }
        Ok(SpanState { span: span.clone(), coeffs, basis: Basis::Coherent })
    }

    pub fn orthonormal(span: &Arc<Span>, coords: Vec<c64>) -> Result<Self> {
        if coords.len() != span.rank() {
            return Err(Error::DimensionMismatch { expected: span.rank(), got: coords.len() });
        }
        Ok(SpanState { span: span.clone(), coeffs: coords, basis: Basis::Orthonormal })
    }

    /// Single coherent state |α_k⟩.
    pub fn basis_state(span: &Arc<Span>, k: usize) -> Self {
        let mut c = vec![c64::new(0.0, 0.0); span.len()];
        c[k] = cr(1.0);
        SpanState { span: span.clone(), coeffs: c, basis: Basis::Coherent }
    }

    pub fn to_coherent(&self) -> Self {
        match self.basis {
            Basis::Coherent => self.clone(),
            Basis::Orthonormal => SpanState {
                span: self.span.clone(),
                coeffs: self.span.basis.from_orthonormal(&self.coeffs).expect("length checked"),
                basis: Basis::Coherent,
            },
        }
    }

    pub fn to_orthonormal(&self) -> Self {
        match self.basis {
            Basis::Orthonormal => self.clone(),
            Basis::Coherent => SpanState {
                span: self.span.clone(),
                coeffs: self.span.basis.to_orthonormal(&self.coeffs).expect("length checked"),
                basis: Basis::Orthonormal,
            },
        }
    }

    pub fn norm(&self) -> f64 {
        inner(self, self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn scaled(&self, s: c64) -> Self {
        SpanState { coeffs: self.coeffs.iter().map(|x| x * s).collect(), ..self.clone() }
    }

    pub fn normalized(&self) -> Self {
        self.scaled(cr(1.0 / self.norm()))
    }

    /// Σ w_i x_i, computed in the basis of the first term.
    pub fn combine(terms: &[(c64, &SpanState)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty combination".into()))?
            .1;
        let mut out = vec![c64::new(0.0, 0.0); first.coeffs.len()];
        for (w, x) in terms {
            if !same_span(&first.span, &x.span) {
                return Err(Error::ConstellationMismatch);
            }
            let x = if x.basis == first.basis {
                (*x).clone()
            } else if first.basis == Basis::Coherent {
                x.to_coherent()
            } else {
                x.to_orthonormal()
            };
            for (o, v) in out.iter_mut().zip(&x.coeffs) {
                *o += w * v;
            }
        }
        Ok(SpanState { span: first.span.clone(), coeffs: out, basis: first.basis })
    }
}

fn same_span(a: &Arc<Span>, b: &Arc<Span>) -> bool {
    Arc::ptr_eq(a, b) || a.constellation == b.constellation
}

/// ⟨x|y⟩: Gram-weighted in the coherent basis, plain dot product in the orthonormal basis.
pub fn inner(x: &SpanState, y: &SpanState) -> Result<c64> {
    if !same_span(&x.span, &y.span) {
        return Err(Error::ConstellationMismatch);
    }
    match (x.basis, y.basis) {
        (Basis::Orthonormal, Basis::Orthonormal) => {
            Ok(x.coeffs.iter().zip(&y.coeffs).map(|(a, b)| a.conj() * b).sum())
        }
        (Basis::Coherent, Basis::Coherent) => {
            let g = x.span.gram();
            let n = x.coeffs.len();
            let mut s = c64::new(0.0, 0.0);
            for k in 0..n {
                if x.coeffs[k] == c64::new(0.0, 0.0) {
                    continue;
                }
                let row: c64 = (0..n).map(|l| g[(k, l)] * y.coeffs[l]).sum();
                s += x.coeffs[k].conj() * row;
            }
            Ok(s)
        }
        _ => inner(&x.to_coherent(), &y.to_coherent()),
    }
}

/// Truncated Fock expansion of a span state.
#[derive(Clone, Debug)]
pub struct FockExpansion {
    pub n_modes: usize,
    pub cutoff: usize,
    pub indices: Vec<Vec<usize>>,
    pub coeffs: Vec<c64>,
    pub tail_bound: f64,
}

impl FockExpansion {
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn mass_where(&self, pred: impl Fn(&[usize]) -> bool) -> f64 {
        self.indices
            .iter()
            .zip(&self.coeffs)
            .filter(|(n, _)| pred(n))
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    pub fn amplitude(&self, n: &[usize]) -> c64 {
        self.indices
            .iter()
            .position(|m| m == n)
            .map(|p| self.coeffs[p])
            .unwrap_or(c64::new(0.0, 0.0))
    }
}

/// All multi-indices with n_modes entries summing to at most `cutoff`, ordered by total then lexicographically.
pub fn fock_indices(n_modes: usize, cutoff: usize) -> Vec<Vec<usize>> {
    fn rec(modes: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if modes == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for n in (0..=total).rev() {
            prefix.push(n);
            rec(modes - 1, total - n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=cutoff {
        rec(n_modes, total, &mut Vec::new(), &mut out);
    }
    out
}

/// e^{-|a|²/2} aⁿ/√n! for n = 0..=nmax.
pub fn coherent_fock_column(a: c64, nmax: usize) -> Vec<c64> {
    let mut v = Vec::with_capacity(nmax + 1);
    let mut cur = cr((-0.5 * a.norm_sqr()).exp());
    v.push(cur);
    for n in 1..=nmax {
        cur = cur * a / (n as f64).sqrt();
        v.push(cur);
    }
    v
}

/// ⟨n|amplitudes⟩ for a multimode Fock index n.
pub fn coherent_fock_amplitude(amps: &[c64], n: &[usize]) -> c64 {
    amps.iter()
        .zip(n)
        .map(|(&a, &k)| coherent_fock_column(a, k)[k])
        .product()
}

/// Fock amplitudes of the span's orthonormal basis vectors as columns (len(indices) × rank).
pub fn fock_frame(span: &Span, indices: &[Vec<usize>]) -> CMat {
    let c = &span.constellation;
    let a = Mat::from_fn(indices.len(), c.len(), |n, k| coherent_fock_amplitude(&c.amplitudes[k], &indices[n]));
    a * span.basis.backward_matrix()
}

/// Probability that a Poisson(mean) variable exceeds `cutoff`.
pub fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).map(|p| p.sf(cutoff as u64)).unwrap_or(1.0)
}

/// Amplitudes of `x` on the given Fock indices.
pub fn fock_project(x: &SpanState, indices: &[Vec<usize>]) -> Vec<c64> {
    let x = x.to_coherent();
    let c = &x.span.constellation;
    let nmax = indices.iter().flat_map(|n| n.iter().copied()).max().unwrap_or(0);
    let tables: Vec<Vec<Vec<c64>>> = c
        .amplitudes
        .iter()
        .map(|a| a.iter().map(|&z| coherent_fock_column(z, nmax)).collect())
        .collect();
    indices
        .iter()
        .map(|n| {
            (0..c.len())
                .filter(|&k| x.coeffs[k] != c64::new(0.0, 0.0))
                .map(|k| {
                    let amp: c64 = n.iter().enumerate().map(|(m, &nm)| tables[k][m][nm]).product();
                    x.coeffs[k] * amp
                })
                .sum()
        })
        .collect()
}

/// Fock expansion up to total photon number `cutoff`, with a certified bound on the missing mass.
pub fn fock_expand(x: &SpanState, cutoff: usize) -> FockExpansion {
    let xc = x.to_coherent();
    let c = &xc.span.constellation;
    let indices = fock_indices(c.n_modes, cutoff);
    let coeffs = fock_project(&xc, &indices);
    let amp_bound: f64 = (0..c.len())
        .map(|k| xc.coeffs[k].norm() * poisson_tail(c.energy(k), cutoff).sqrt())
        .sum();
    FockExpansion { n_modes: c.n_modes, cutoff, indices, coeffs, tail_bound: amp_bound * amp_bound }
}
