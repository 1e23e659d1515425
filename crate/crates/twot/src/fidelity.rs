//! Entanglement fidelity of encoding, channel and recovery, and the alternating
//! biconvex optimization over encoding and recovery Choi matrices.
//!
//! Encoding Choi matrices live on C^d ⊗ C^din with tr₂ X_E = 1/d, recovery Choi
//! matrices on C^d ⊗ C^dout with tr₁ X_R = 1/d, and F = tr(X_R M_E).

use std::fmt;
use std::time::Instant;

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::KrausChannel;
use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::la::{self, cr, CMat};
use crate::sdp::{self, SdpOptions, SdpProblem, SdpSolution, TracedFactor};

/// Relative eigenvalue threshold defining the support of tr₁ M_E.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

/// Relative eigenvalue threshold used when reading Kraus operators off a Choi matrix.
const KRAUS_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    /// Logical dimension (first factor).
    pub d: usize,
    /// Physical dimension (second factor).
    pub dim: usize,
    pub x: CMat,
}

impl ChoiMatrix {
    pub fn new(d: usize, dim: usize, x: CMat) -> Result<Self> {
        if x.nrows() != d * dim || x.ncols() != d * dim {
            return Err(Error::DimensionMismatch { expected: d * dim, got: x.nrows() });
        }
        Ok(ChoiMatrix { d, dim, x })
    }

    /// Encoding by an isometry V (dim × d): |v⟩⟨v| with |v⟩ = d^{-1/2} Σ_a |a⟩ ⊗ V|a⟩.
    pub fn from_isometry(v: &CMat) -> Result<Self> {
        Self::encoding_from_kraus(std::slice::from_ref(v))
    }

    /// Σ_j (1 ⊗ E_j)|Φ⟩⟨Φ|(1 ⊗ E_j†) for Kraus operators E_j : C^d → C^dim.
    pub fn encoding_from_kraus(ops: &[CMat]) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidParameter("no Kraus operators".into()))?;
        let (dim, d) = (first.nrows(), first.ncols());
        let s = 1.0 / (d as f64).sqrt();
        let mut x = la::zeros(d * dim, d * dim);
        for e in ops {
            check_shape(e, dim, d)?;
            let v: Vec<c64> = (0..d * dim).map(|t| e[(t % dim, t / dim)] * s).collect();
            x += la::outer(&v, &v);
        }
        Ok(ChoiMatrix { d, dim, x })
    }

    /// Σ_l (1 ⊗ R_l†)|Φ⟩⟨Φ|(1 ⊗ R_l) for Kraus operators R_l : C^dim → C^d.
    pub fn recovery_from_kraus(ops: &[CMat]) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidParameter("no Kraus operators".into()))?;
        let (d, dim) = (first.nrows(), first.ncols());
        let s = 1.0 / (d as f64).sqrt();
        let mut x = la::zeros(d * dim, d * dim);
        for r in ops {
            check_shape(r, d, dim)?;
            let v: Vec<c64> = (0..d * dim).map(|t| r[(t / dim, t % dim)].conj() * s).collect();
            x += la::outer(&v, &v);
        }
        Ok(ChoiMatrix { d, dim, x })
    }

    fn kraus_vectors(&self) -> Result<Vec<Vec<c64>>> {
        let (w, v) = la::eigh_desc(&la::herm(&self.x))?;
        let top = w.first().copied().unwrap_or(0.0).max(0.0);
        let scale = (self.d as f64).sqrt();
        Ok(w.iter()
            .enumerate()
            .take_while(|(_, &l)| l > KRAUS_THRESHOLD * top)
            .map(|(k, &l)| (0..self.x.nrows()).map(|t| v[(t, k)] * (l.sqrt() * scale)).collect())
            .collect())
    }

    /// Kraus operators (dim × d) of the encoding this matrix represents.
    pub fn encoding_kraus(&self) -> Result<Vec<CMat>> {
        let dim = self.dim;
        Ok(self
            .kraus_vectors()?
            .into_iter()
            .map(|u| Mat::from_fn(dim, self.d, |i, a| u[a * dim + i]))
            .collect())
    }

    /// Kraus operators (d × dim) of the recovery this matrix represents.
    pub fn recovery_kraus(&self) -> Result<Vec<CMat>> {
        let dim = self.dim;
        Ok(self
            .kraus_vectors()?
            .into_iter()
            .map(|u| Mat::from_fn(self.d, dim, |a, i| u[a * dim + i].conj()))
            .collect())
    }

    /// max |tr₂ X − 1/d|.
    pub fn encoding_defect(&self) -> f64 {
        let t = la::ptrace_second(&self.x, self.d, self.dim);
        la::max_abs_diff(&t, &la::scale(&la::eye(self.d), cr(1.0 / self.d as f64)))
    }

    /// max |tr₁ X − 1/d|.
    pub fn recovery_defect(&self) -> f64 {
        let t = la::ptrace_first(&self.x, self.d, self.dim);
        la::max_abs_diff(&t, &la::scale(&la::eye(self.dim), cr(1.0 / self.d as f64)))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(la::eigvalsh(&la::herm(&self.x))?.last().copied().unwrap_or(0.0))
    }

    /// Re tr(X Y).
    pub fn overlap(&self, other: &ChoiMatrix) -> f64 {
        la::trace_prod(&self.x, &other.x).re
    }
}

/// Rank-one Choi matrix of a code's isometry in its span's orthonormal coordinates.
pub fn choi_of_encoding(code: &CodeSpec) -> Result<ChoiMatrix> {
    ChoiMatrix::from_isometry(&code.isometry)
}

fn check_shape(m: &CMat, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch { expected: rows * cols, got: m.nrows() * m.ncols() });
    }
    Ok(())
}

/// M_E = Σ_k (1 ⊗ K_k) X_E (1 ⊗ K_k†).
pub fn build_m_e(channel: &KrausChannel, xe: &ChoiMatrix) -> Result<CMat> {
    if xe.dim != channel.din {
        return Err(Error::DimensionMismatch { expected: channel.din, got: xe.dim });
    }
    Ok(channel.apply_ext(&xe.x, xe.d))
}

/// N_R = Σ_k (1 ⊗ K_k†) X_R (1 ⊗ K_k).
pub fn build_n_r(channel: &KrausChannel, xr: &ChoiMatrix) -> Result<CMat> {
    if xr.dim != channel.dout {
        return Err(Error::DimensionMismatch { expected: channel.dout, got: xr.dim });
    }
    Ok(channel.adjoint_ext(&xr.x, xr.d))
}

pub fn entanglement_fidelity(xe: &ChoiMatrix, channel: &KrausChannel, xr: &ChoiMatrix) -> Result<f64> {
    if xe.d != xr.d {
        return Err(Error::DimensionMismatch { expected: xe.d, got: xr.d });
    }
    Ok(la::trace_prod(&xr.x, &build_m_e(channel, xe)?).re)
}

/// (1/d²) Σ_{j,k,l} |tr(R_l K_k E_j)|².
pub fn kraus_sum_fidelity(encoding: &[CMat], channel: &[CMat], recovery: &[CMat]) -> f64 {
    let d = encoding.first().map_or(1, |e| e.ncols()) as f64;
    let mut f = 0.0;
    for e in encoding {
        for k in channel {
            let ke = k * e;
            for r in recovery {
                f += la::trace(&(r * &ke)).norm_sqr();
            }
        }
    }
    f / (d * d)
}

/// Outcome of one half-step.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub choi: ChoiMatrix,
    pub fidelity: f64,
    pub solver_residual: f64,
    pub iterations: usize,
    /// Whether the solver met its feasibility and gap contract.
    pub contract_met: bool,
    /// Dimension of the space the SDP was posed on.
    pub support: usize,
}

/// Orthonormal basis (columns) of the numerical support of tr₁ M_E.
pub fn output_support(m_e: &CMat, d: usize, dout: usize) -> Result<CMat> {
    let rho = la::herm(&la::ptrace_first(m_e, d, dout));
    let (w, v) = la::eigh_desc(&rho)?;
    let top = w.first().copied().unwrap_or(0.0).max(0.0);
    let s = w.iter().take_while(|&&l| l > SUPPORT_THRESHOLD * top).count().max(1);
    Ok(v.subcols(0, s).to_owned())
}

/// Optimal recovery for a fixed encoding.
///
/// The SDP is posed on C^d ⊗ S with S the support of tr₁ M_E; the complement P_c
/// is filled with (1 ⊗ P_c)/d², which keeps F and restores tr₁ X_R = 1/d.
pub fn optimal_recovery(channel: &KrausChannel, xe: &ChoiMatrix, opts: &SdpOptions) -> Result<StepResult> {
    let d = xe.d;
    let dout = channel.dout;
    let m_e = la::herm(&build_m_e(channel, xe)?);
    let s = output_support(&m_e, d, dout)?;
    let r = s.ncols();
    let (c, lift) = if r < dout {
        let lift = la::kron(&la::eye(d), &s);
        (la::herm(&(lift.adjoint() * &m_e * &lift)), Some(lift))
    } else {
        (m_e.clone(), None)
    };
    let problem = SdpProblem {
        c,
        d1: d,
        d2: r,
        traced: TracedFactor::First,
        target: la::scale(&la::eye(r), cr(1.0 / d as f64)),
    };
    let sol = sdp::solve_unchecked(&problem, opts)?;
    let x = match lift {
        Some(lift) => {
            let pc = &la::eye(dout) - &s * s.adjoint();
            let fill = la::scale(&la::kron(&la::eye(d), &pc), cr(1.0 / (d * d) as f64));
            la::herm(&(&(&lift * &sol.x * lift.adjoint()) + &fill))
        }
        None => sol.x.clone(),
    };
    let choi = ChoiMatrix { d, dim: dout, x };
    let fidelity = la::trace_prod(&choi.x, &m_e).re;
    Ok(step_result(choi, fidelity, &sol, opts, r))
}

/// Optimal encoding for a fixed recovery.
pub fn optimal_encoding(channel: &KrausChannel, xr: &ChoiMatrix, opts: &SdpOptions) -> Result<StepResult> {
    let d = xr.d;
    let din = channel.din;
    let n_r = la::herm(&build_n_r(channel, xr)?);
    let problem = SdpProblem {
        c: n_r.clone(),
        d1: d,
        d2: din,
        traced: TracedFactor::Second,
        target: la::scale(&la::eye(d), cr(1.0 / d as f64)),
    };
    let sol = sdp::solve_unchecked(&problem, opts)?;
    let choi = ChoiMatrix { d, dim: din, x: sol.x.clone() };
    let fidelity = la::trace_prod(&choi.x, &n_r).re;
    Ok(step_result(choi, fidelity, &sol, opts, din))
}

fn step_result(choi: ChoiMatrix, fidelity: f64, sol: &SdpSolution, opts: &SdpOptions, support: usize) -> StepResult {
    StepResult {
        choi,
        fidelity,
        solver_residual: sol.residual(),
        iterations: sol.iterations,
        contract_met: sol.meets_contract(opts),
        support,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfStep {
    Recovery,
    Encoding,
}

impl fmt::Display for HalfStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HalfStep::Recovery => "R",
            HalfStep::Encoding => "E",
        })
    }
}

#[derive(Clone, Debug)]
pub struct TraceRecord {
    pub iter: usize,
    pub half_step: HalfStep,
    pub fidelity: f64,
    pub solver_residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
    pub converged: bool,
}

impl OptimizationTrace {
    pub fn final_fidelity(&self) -> Option<f64> {
        self.records.last().map(|r| r.fidelity)
    }

    pub fn fidelities(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.fidelity).collect()
    }

    /// Largest decrease between consecutive half-steps (zero if monotone).
    pub fn max_decrease(&self) -> f64 {
        self.records.windows(2).map(|w| w[0].fidelity - w[1].fidelity).fold(0.0, f64::max)
    }

    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AlternatingOptions {
    /// Stop once a full iteration changes F by less than this.
    pub tol: f64,
    pub max_iters: usize,
    pub sdp: SdpOptions,
    /// Allowed decrease between half-steps, in units of the larger of the SDP
    /// tolerance and the achieved solver residual.
    pub monotone_slack: f64,
}

impl Default for AlternatingOptions {
    fn default() -> Self {
        AlternatingOptions { tol: 1e-6, max_iters: 100, sdp: SdpOptions::default(), monotone_slack: 10.0 }
    }
}

#[derive(Clone, Debug)]
pub struct AlternatingResult {
    pub trace: OptimizationTrace,
    pub encoding: ChoiMatrix,
    pub recovery: ChoiMatrix,
}

/// Alternate recovery and encoding half-steps from `init`.
///
/// Returns the trace recorded so far together with the outcome; the outcome is an
/// error on a solver contract violation or a decrease beyond the monotone slack.
pub fn alternate_with_trace(
    channel: &KrausChannel,
    init: ChoiMatrix,
    opts: &AlternatingOptions,
) -> (OptimizationTrace, Result<(ChoiMatrix, ChoiMatrix)>) {
    let mut trace = OptimizationTrace::default();
    let mut xe = init;
    let mut xr: Option<ChoiMatrix> = None;
    let mut prev_e: Option<f64> = None;
    for iter in 1..=opts.max_iters {
        let t0 = Instant::now();
        let r = match optimal_recovery(channel, &xe, &opts.sdp) {
            Ok(r) => r,
            Err(e) => return (trace, Err(e)),
        };
        if let Err(e) = check_step(&trace, &r, iter, opts) {
            return (trace, Err(e));
        }
        trace.records.push(TraceRecord {
            iter,
            half_step: HalfStep::Recovery,
            fidelity: r.fidelity,
            solver_residual: r.solver_residual,
            seconds: t0.elapsed().as_secs_f64(),
        });
        let t1 = Instant::now();
        let e = match optimal_encoding(channel, &r.choi, &opts.sdp) {
            Ok(e) => e,
            Err(err) => return (trace, Err(err)),
        };
        if let Err(err) = check_step(&trace, &e, iter, opts) {
            return (trace, Err(err));
        }
        trace.records.push(TraceRecord {
            iter,
            half_step: HalfStep::Encoding,
            fidelity: e.fidelity,
            solver_residual: e.solver_residual,
            seconds: t1.elapsed().as_secs_f64(),
        });
        let delta = e.fidelity - prev_e.unwrap_or(r.fidelity);
        prev_e = Some(e.fidelity);
        xe = e.choi;
        xr = Some(r.choi);
        if delta.abs() < opts.tol {
            trace.converged = true;
            break;
        }
    }
    match xr {
        Some(xr) => (trace, Ok((xe, xr))),
        None => (trace, Err(Error::InvalidParameter("max_iters must be positive".into()))),
    }
}

fn check_step(trace: &OptimizationTrace, step: &StepResult, iter: usize, opts: &AlternatingOptions) -> Result<()> {
    if !step.contract_met {
        return Err(Error::SolverFailure {
            iterations: step.iterations,
            primal: step.solver_residual,
            dual: step.solver_residual,
            gap: step.solver_residual,
        });
    }
    if let Some(prev) = trace.records.last() {
        let slack = opts.monotone_slack * opts.sdp.tol.max(prev.solver_residual).max(step.solver_residual);
        let drop = prev.fidelity - step.fidelity;
        if drop > slack {
            return Err(Error::NonMonotone { iteration: iter, drop });
        }
    }
    Ok(())
}

pub fn alternate(channel: &KrausChannel, init: ChoiMatrix, opts: &AlternatingOptions) -> Result<AlternatingResult> {
    let (trace, out) = alternate_with_trace(channel, init, opts);
    let (encoding, recovery) = out?;
    Ok(AlternatingResult { trace, encoding, recovery })
}

/// Haar-random isometry C^d → C^dim from QR of a complex Gaussian matrix.
pub fn haar_isometry<R: Rng + ?Sized>(dim: usize, d: usize, rng: &mut R) -> Result<CMat> {
    if d == 0 || d > dim {
        return Err(Error::InvalidParameter(format!("cannot embed dimension {d} into {dim}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g = Mat::from_fn(dim, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(re * s, im * s)
    });
    let qr = g.qr();
    let q = qr.compute_thin_Q();
    let r = qr.thin_R();
    Ok(Mat::from_fn(dim, d, |i, j| {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { cr(1.0) };
        q[(i, j)] * phase
    }))
}

/// Choi matrix of a Haar-random isometric encoding, reproducible from `seed`.
pub fn random_encoding(d: usize, dim: usize, seed: u64) -> Result<ChoiMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ChoiMatrix::from_isometry(&haar_isometry(dim, d, &mut rng)?)
}

/// Kraus operators (dout × din) of a random channel: the n blocks of a Haar isometry C^din → C^{n·dout}.
pub fn random_kraus(din: usize, dout: usize, n: usize, seed: u64) -> Result<Vec<CMat>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = haar_isometry(dout * n, din, &mut rng)?;
    Ok((0..n).map(|k| v.subrows(k * dout, dout).to_owned()).collect())
}
