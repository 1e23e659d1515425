//! Pure loss on coherent-state spans, truncated-Fock loss, and two-mode dephasing.

use std::sync::Arc;

use faer::{c64, Mat};

use crate::coherent::{self, Constellation, Span};
use crate::error::{Error, Result};
use crate::la::{self, cr, CMat};

pub const MAX_GAMMA: f64 = 0.99;

/// Operators of a channel ρ ↦ Σ K ρ K†, either dense or diagonal in a fixed basis.
#[derive(Clone, Debug)]
pub enum KrausSet {
    Dense(Vec<CMat>),
    Diagonal(Vec<Vec<c64>>),
}

#[derive(Clone, Debug)]
pub struct KrausChannel {
    pub din: usize,
    pub dout: usize,
    pub ops: KrausSet,
}

impl KrausChannel {
    pub fn dense(ops: Vec<CMat>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidParameter("no Kraus operators".into()))?;
        let (dout, din) = (first.nrows(), first.ncols());
        if let Some(k) = ops.iter().find(|k| k.nrows() != dout || k.ncols() != din) {
            return Err(Error::DimensionMismatch { expected: dout * din, got: k.nrows() * k.ncols() });
        }
        Ok(KrausChannel { din, dout, ops: KrausSet::Dense(ops) })
    }

    pub fn diagonal(ops: Vec<Vec<c64>>) -> Result<Self> {
        let n = ops.first().ok_or_else(|| Error::InvalidParameter("no Kraus operators".into()))?.len();
        if let Some(k) = ops.iter().find(|k| k.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: k.len() });
        }
        Ok(KrausChannel { din: n, dout: n, ops: KrausSet::Diagonal(ops) })
    }

    pub fn identity(n: usize) -> Self {
        KrausChannel { din: n, dout: n, ops: KrausSet::Dense(vec![la::eye(n)]) }
    }

    pub fn len(&self) -> usize {
        match &self.ops {
            KrausSet::Dense(v) => v.len(),
            KrausSet::Diagonal(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Kraus operators as dense matrices.
    pub fn dense_ops(&self) -> Vec<CMat> {
        match &self.ops {
            KrausSet::Dense(v) => v.clone(),
            KrausSet::Diagonal(v) => v.iter().map(|k| la::diag(k)).collect(),
        }
    }

    /// For diagonal sets, the elementwise factor Σ_k k_m conj(k_n).
    fn schur_factor(ops: &[Vec<c64>]) -> CMat {
        let n = ops[0].len();
        let mut f = la::zeros(n, n);
        for k in ops {
            for j in 0..n {
                for i in 0..n {
                    f[(i, j)] += k[i] * k[j].conj();
                }
            }
        }
        f
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        self.apply_ext(rho, 1)
    }

    /// Σ_k (1_d ⊗ K) X (1_d ⊗ K†) for X on C^d ⊗ C^din.
    pub fn apply_ext(&self, x: &CMat, d: usize) -> CMat {
        assert_eq!(x.nrows(), d * self.din, "input dimension");
        match &self.ops {
            KrausSet::Dense(ops) => {
                let mut out = la::zeros(d * self.dout, d * self.dout);
                for k in ops {
                    let kk = la::kron(&la::eye(d), k);
                    out += &(&kk * x) * kk.adjoint();
                }
                out
            }
            KrausSet::Diagonal(ops) => {
                let f = Self::schur_factor(ops);
                let n = self.din;
                Mat::from_fn(d * n, d * n, |i, j| x[(i, j)] * f[(i % n, j % n)])
            }
        }
    }

    /// Σ_k (1_d ⊗ K†) X (1_d ⊗ K) for X on C^d ⊗ C^dout.
    pub fn adjoint_ext(&self, x: &CMat, d: usize) -> CMat {
        assert_eq!(x.nrows(), d * self.dout, "output dimension");
        match &self.ops {
            KrausSet::Dense(ops) => {
                let mut out = la::zeros(d * self.din, d * self.din);
                for k in ops {
                    let kk = la::kron(&la::eye(d), k);
                    out += &(kk.adjoint() * x) * &kk;
                }
                out
            }
            KrausSet::Diagonal(ops) => {
                let f = Self::schur_factor(ops);
                let n = self.din;
                Mat::from_fn(d * n, d * n, |i, j| x[(i, j)] * f[(i % n, j % n)].conj())
            }
        }
    }

    /// Σ_k K†K.
    pub fn completeness(&self) -> CMat {
        match &self.ops {
            KrausSet::Dense(ops) => {
                let mut s = la::zeros(self.din, self.din);
                for k in ops {
                    s += k.adjoint() * k;
                }
                s
            }
            KrausSet::Diagonal(ops) => {
                let mut s = vec![c64::new(0.0, 0.0); self.din];
                for k in ops {
                    for (x, v) in s.iter_mut().zip(k) {
                        *x += v.norm_sqr();
                    }
                }
                la::diag(&s)
            }
        }
    }

    pub fn completeness_defect(&self) -> f64 {
        la::max_abs_diff(&self.completeness(), &la::eye(self.din))
    }

    /// The channel K ↦ K V, restricting the input to the range of V.
    pub fn precompose(&self, v: &CMat) -> Result<Self> {
        if v.nrows() != self.din {
            return Err(Error::DimensionMismatch { expected: self.din, got: v.nrows() });
        }
        KrausChannel::dense(self.dense_ops().iter().map(|k| k * v).collect())
    }
}

/// Pure loss restricted to a coherent-state span, with one Kraus operator per constellation point.
#[derive(Clone, Debug)]
pub struct FiniteKrausChannel {
    pub input: Arc<Span>,
    pub output: Arc<Span>,
    pub gamma: f64,
    pub channel: KrausChannel,
    /// Environment factor F with ⟨√γα_j|√γα_i⟩ = Σ_k conj(F_kj) F_ki.
    pub env_factor: CMat,
}

impl FiniteKrausChannel {
    pub fn kraus(&self) -> Vec<CMat> {
        self.channel.dense_ops()
    }

    /// Channel output, in output orthonormal coordinates, for the operator |α_i⟩⟨α_j|.
    pub fn apply_coherent_pair(&self, i: usize, j: usize) -> CMat {
        let t = self.input.basis.forward_matrix();
        let ti = la::col(&la::col_vec(&t, i));
        let tj = la::col(&la::col_vec(&t, j));
        self.channel.apply(&(&ti * tj.adjoint()))
    }

    /// Expected image of |α_i⟩⟨α_j|: ⟨√γα_j|√γα_i⟩ |μα_i⟩⟨μα_j| in output coordinates.
    pub fn expected_coherent_pair(&self, i: usize, j: usize) -> CMat {
        let env = self.input.constellation.scaled(self.gamma.sqrt());
        let w = match env {
            Ok(e) => coherent::overlap(&e.amplitudes[j], &e.amplitudes[i]),
            Err(_) => cr(1.0),
        };
        let tp = self.output.basis.forward_matrix();
        let ui = la::col(&la::col_vec(&tp, i));
        let uj = la::col(&la::col_vec(&tp, j));
        la::scale(&(&ui * uj.adjoint()), w)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=MAX_GAMMA).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma must lie in [0, {MAX_GAMMA}], got {gamma}")));
    }
    Ok(())
}

/// Finite Kraus representation of pure loss on the span of `c`.
pub fn loss_finite_kraus(c: &Constellation, gamma: f64, eps_rank: f64) -> Result<FiniteKrausChannel> {
    check_gamma(gamma)?;
    let input = Span::new(c.clone(), eps_rank)?;
    loss_on_span(&input, gamma)
}

/// Same as `loss_finite_kraus` on an already decomposed span.
pub fn loss_on_span(input: &Arc<Span>, gamma: f64) -> Result<FiniteKrausChannel> {
    check_gamma(gamma)?;
    let c = &input.constellation;
    let m = c.len();
    let mu = (1.0 - gamma).sqrt();
    let output = if gamma == 0.0 {
        input.clone()
    } else {
        Span::new(c.scaled(mu)?, input.basis.eps_rank)?
    };
    // Environment Gram G_env[j,i] = ⟨√γα_j|√γα_i⟩ = (F†F)[j,i].
    let genv = if gamma == 0.0 {
        Mat::from_fn(m, m, |_, _| cr(1.0))
    } else {
        coherent::gram(&c.scaled(gamma.sqrt())?)
    };
    let (w, u) = la::eigh_desc(&genv)?;
    let f = Mat::from_fn(m, m, |k, i| u[(i, k)].conj() * w[k].max(0.0).sqrt());
    let tp = output.basis.forward_matrix();
    let tinv = input.basis.backward_matrix();
    let kraus = (0..m)
        .map(|k| {
            let scaled = Mat::from_fn(tp.nrows(), m, |a, i| tp[(a, i)] * f[(k, i)]);
            &scaled * &tinv
        })
        .collect();
    Ok(FiniteKrausChannel {
        input: input.clone(),
        output,
        gamma,
        channel: KrausChannel::dense(kraus)?,
        env_factor: f,
    })
}

/// Two-mode loss N⊗N on a two-mode constellation; the construction is identical on multimode points.
pub fn tensor_loss(c: &Constellation, gamma: f64, eps_rank: f64) -> Result<FiniteKrausChannel> {
    if c.n_modes != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: c.n_modes });
    }
    loss_finite_kraus(c, gamma, eps_rank)
}

/// Single-mode K_k = c_k a^k μ^n̂ on Fock states |0..=n_max⟩, k = 0..=k_max,
/// c_k = (γ/(1−γ))^{k/2}/√k!.
pub fn loss_standard_kraus(gamma: f64, k_max: usize, n_max: usize) -> Result<Vec<CMat>> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let mu = (1.0 - gamma).sqrt();
    let dim = n_max + 1;
    // log √(n!/(n−k)!) accumulated to keep large n finite.
    let ln_fact: Vec<f64> = (0..=dim)
        .scan(0.0, |s, n| {
            if n > 0 {
                *s += (n as f64).ln();
            }
            Some(*s)
        })
        .collect();
    Ok((0..=k_max)
        .map(|k| {
            let mut m = la::zeros(dim, dim);
            for n in k..dim {
                // c_k √(n!/(n−k)!) μ^n = √(C(n,k)) γ^{k/2} μ^{n−k}
                let ln_binom = ln_fact[n] - ln_fact[k] - ln_fact[n - k];
                let mut v = (0.5 * ln_binom).exp() * mu.powi((n - k) as i32);
                if k > 0 {
                    v *= gamma.powf(k as f64 / 2.0);
                }
                m[(n - k, n)] = cr(v);
            }
            m
        })
        .collect())
}

/// Largest deviation between the finite-Kraus loss on a single-mode constellation and
/// the truncated-Fock Kraus sum, over all |α_i⟩⟨α_j|, compared in the Fock frame up to `cutoff`.
pub fn fock_cross_check(c: &Constellation, gamma: f64, cutoff: usize) -> Result<f64> {
    if c.n_modes != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: c.n_modes });
    }
    let ch = loss_finite_kraus(c, gamma, coherent::DEFAULT_EPS_RANK)?;
    let fock = loss_standard_kraus(gamma, cutoff, cutoff)?;
    let indices = coherent::fock_indices(1, cutoff);
    let w = coherent::fock_frame(&ch.output, &indices);
    let kets: Vec<CMat> = c.amplitudes.iter().map(|a| la::col(&coherent::coherent_fock_column(a[0], cutoff))).collect();
    let mut worst = 0.0f64;
    for i in 0..c.len() {
        for j in 0..c.len() {
            let rho = &kets[i] * kets[j].adjoint();
            let mut oracle = la::zeros(cutoff + 1, cutoff + 1);
            for k in &fock {
                oracle += &(k * &rho) * k.adjoint();
            }
            let ours = &(&w * ch.apply_coherent_pair(i, j)) * w.adjoint();
            worst = worst.max(la::max_abs_diff(&ours, &oracle));
        }
    }
    Ok(worst)
}

/// Two-mode Fock indices (n₁, n₂) with n₁+n₂ ≤ 4p, n₁+n₂ ≡ 0 mod 4, n₁ even.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedFockSpace {
    pub p: usize,
    pub indices: Vec<(usize, usize)>,
}

impl ReducedFockSpace {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn cutoff(&self) -> usize {
        4 * self.p
    }

    pub fn index_vecs(&self) -> Vec<Vec<usize>> {
        self.indices.iter().map(|&(a, b)| vec![a, b]).collect()
    }

    /// Size of the unreduced truncated two-mode space n₁+n₂ ≤ 4p.
    pub fn naive_dim(&self) -> usize {
        let n = 4 * self.p;
        (n + 1) * (n + 2) / 2
    }
}

pub fn reduced_fock_space(p: usize) -> ReducedFockSpace {
    let mut indices = Vec::new();
    for total in (0..=4 * p).step_by(4) {
        for n1 in (0..=total).step_by(2) {
            indices.push((n1, total - n1));
        }
    }
    ReducedFockSpace { p, indices }
}

/// Elementwise factors e^{−γ((m₁−n₁)² + (m₂−n₂)²)/2}.
pub fn dephasing_factors(gamma: f64, space: &ReducedFockSpace) -> Mat<f64> {
    let ix = &space.indices;
    Mat::from_fn(ix.len(), ix.len(), |i, j| {
        let d1 = ix[i].0 as f64 - ix[j].0 as f64;
        let d2 = ix[i].1 as f64 - ix[j].1 as f64;
        (-0.5 * gamma * (d1 * d1 + d2 * d2)).exp()
    })
}

#[derive(Clone, Debug)]
pub struct DephasingChannel {
    pub gamma: f64,
    pub n_modes: usize,
    pub space: ReducedFockSpace,
}

impl DephasingChannel {
    pub fn new(gamma: f64, space: ReducedFockSpace) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("dephasing strength must be nonnegative, got {gamma}")));
        }
        Ok(DephasingChannel { gamma, n_modes: 2, space })
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        dephasing_apply(rho, self.gamma, &self.space)
    }
}

pub fn dephasing_apply(rho: &CMat, gamma: f64, space: &ReducedFockSpace) -> Result<CMat> {
    let n = space.dim();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho.nrows() });
    }
    let f = dephasing_factors(gamma, space);
    Ok(Mat::from_fn(n, n, |i, j| rho[(i, j)] * f[(i, j)]))
}

/// Diagonal Kraus family K_{j₁} ⊗ K_{j₂}, K_j = √(γʲ/j!) n̂ʲ e^{−γn̂²/2}, j ≤ `j_max`.
#[derive(Clone, Debug)]
pub struct DephasingKraus {
    pub j_max: usize,
    pub channel: KrausChannel,
    pub defect: f64,
}

fn single_mode_dephasing_diag(gamma: f64, j: usize, n: usize) -> f64 {
    let nf = n as f64;
    let mut v = (-0.5 * gamma * nf * nf).exp();
    for i in 1..=j {
        v *= (gamma / i as f64).sqrt() * nf;
    }
    v
}

/// Kraus family truncated at `j_max`; errors when the completeness defect exceeds `max_defect`.
pub fn dephasing_kraus_checked(gamma: f64, j_max: usize, space: &ReducedFockSpace, max_defect: f64) -> Result<DephasingKraus> {
    dephasing_kraus_on(gamma, j_max, &space.index_vecs(), max_defect)
}

/// Product Kraus family on an arbitrary list of Fock index tuples (any number of modes).
pub fn dephasing_kraus_on(gamma: f64, j_max: usize, indices: &[Vec<usize>], max_defect: f64) -> Result<DephasingKraus> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("dephasing strength must be nonnegative, got {gamma}")));
    }
    let modes = indices.first().map_or(0, |v| v.len());
    if modes == 0 || indices.iter().any(|v| v.len() != modes) {
        return Err(Error::InvalidParameter("Fock indices must share a positive mode count".into()));
    }
    let n_ops = (j_max + 1).pow(modes as u32);
    let mut ops = Vec::with_capacity(n_ops);
    for flat in 0..n_ops {
        let mut js = vec![0; modes];
        let mut r = flat;
        for m in (0..modes).rev() {
            js[m] = r % (j_max + 1);
            r /= j_max + 1;
        }
        ops.push(
            indices
                .iter()
                .map(|n| cr(js.iter().zip(n).map(|(&j, &nm)| single_mode_dephasing_diag(gamma, j, nm)).product()))
                .collect(),
        );
    }
    let channel = KrausChannel::diagonal(ops)?;
    let defect = channel.completeness_defect();
    if defect > max_defect {
        return Err(Error::Truncation { achieved: defect, required: max_defect });
    }
    Ok(DephasingKraus { j_max, channel, defect })
}

/// Smallest truncation on the given indices whose completeness defect is below `max_defect`.
pub fn dephasing_kraus_auto_on(gamma: f64, indices: &[Vec<usize>], max_defect: f64) -> Result<DephasingKraus> {
    let mut last = Error::Truncation { achieved: f64::INFINITY, required: max_defect };
    for j in 0..400 {
        match dephasing_kraus_on(gamma, j, indices, max_defect) {
            Ok(k) => return Ok(k),
            Err(e @ Error::Truncation { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Single-mode photon numbers n ≤ `cutoff` with n ≡ 0 mod `step`.
pub fn residue_fock_indices(step: usize, cutoff: usize) -> Vec<Vec<usize>> {
    (0..=cutoff).step_by(step.max(1)).map(|n| vec![n]).collect()
}

pub fn dephasing_kraus(gamma: f64, j_max: usize, space: &ReducedFockSpace) -> Result<DephasingKraus> {
    dephasing_kraus_checked(gamma, j_max, space, 1e-8)
}

/// Smallest truncation whose completeness defect is below `max_defect`.
pub fn dephasing_kraus_auto(gamma: f64, space: &ReducedFockSpace, max_defect: f64) -> Result<DephasingKraus> {
    dephasing_kraus_auto_on(gamma, &space.index_vecs(), max_defect)
}
