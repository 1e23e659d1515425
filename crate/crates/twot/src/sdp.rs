//! Primal–dual interior-point method for
//!   max Re tr(C X)  s.t.  tr_k X = B,  X ⪰ 0
//! on C^{d1} ⊗ C^{d2}, with the partial trace over one tensor factor.
//! HKM search direction with Mehrotra predictor–corrector steps.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, Side};

use crate::error::{Error, Result};
use crate::la::{self, cr, CMat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracedFactor {
    First,
    Second,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub c: CMat,
    pub d1: usize,
    pub d2: usize,
    pub traced: TracedFactor,
    pub target: CMat,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Contract on the returned point: feasibility violation and relative gap.
    pub feasibility: f64,
    pub gap: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { tol: 1e-9, max_iters: 100, feasibility: 1e-7, gap: 1e-6 }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: CMat,
    pub y: CMat,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SdpSolution {
    /// Largest of the feasibility residuals and the relative gap.
    pub fn residual(&self) -> f64 {
        self.primal_residual.max(self.dual_residual).max(self.gap)
    }

    pub fn meets_contract(&self, opts: &SdpOptions) -> bool {
        self.primal_residual < opts.feasibility && self.dual_residual < opts.feasibility && self.gap < opts.gap
    }
}

impl SdpProblem {
    pub fn n(&self) -> usize {
        self.d1 * self.d2
    }

    /// Dimension of the constrained (untraced) factor.
    pub fn m(&self) -> usize {
        match self.traced {
            TracedFactor::First => self.d2,
            TracedFactor::Second => self.d1,
        }
    }

    fn traced_dim(&self) -> usize {
        match self.traced {
            TracedFactor::First => self.d1,
            TracedFactor::Second => self.d2,
        }
    }

    pub fn op(&self, x: &CMat) -> CMat {
        match self.traced {
            TracedFactor::First => la::ptrace_first(x, self.d1, self.d2),
            TracedFactor::Second => la::ptrace_second(x, self.d1, self.d2),
        }
    }

    pub fn op_adj(&self, y: &CMat) -> CMat {
        match self.traced {
            TracedFactor::First => la::kron(&la::eye(self.d1), y),
            TracedFactor::Second => la::kron(y, &la::eye(self.d2)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.c.nrows() != n || self.c.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.c.nrows() });
        }
        let m = self.m();
        if self.target.nrows() != m || self.target.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.target.nrows() });
        }
        let scale = 1.0 + la::max_abs(&self.c);
        if la::max_abs_diff(&self.c, &la::adjoint(&self.c)) > 1e-9 * scale {
            return Err(Error::InvalidParameter("objective is not Hermitian".into()));
        }
        if la::max_abs_diff(&self.target, &la::adjoint(&self.target)) > 1e-12 {
            return Err(Error::InvalidParameter("constraint target is not Hermitian".into()));
        }
        if la::eigvalsh(&self.target)?.last().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::InvalidParameter("constraint target must be positive definite".into()));
        }
        Ok(())
    }
}

/// Orthonormal real basis of m×m Hermitian matrices: E_aa, then for a<b the pair
/// (E_ab + E_ba)/√2 and (−iE_ab + iE_ba)/√2.
struct HermBasis {
    m: usize,
    pairs: Vec<(usize, usize)>,
}

impl HermBasis {
    fn new(m: usize) -> Self {
        let mut pairs = Vec::with_capacity(m * (m - 1) / 2);
        for a in 0..m {
            for b in a + 1..m {
                pairs.push((a, b));
            }
        }
        HermBasis { m, pairs }
    }

    fn len(&self) -> usize {
        self.m * self.m
    }

    fn to_vec(&self, h: &CMat) -> Vec<f64> {
        let s = std::f64::consts::SQRT_2;
        let mut v = Vec::with_capacity(self.len());
        for a in 0..self.m {
            v.push(h[(a, a)].re);
        }
        for &(a, b) in &self.pairs {
            let z = (h[(a, b)] + h[(b, a)].conj()) * 0.5;
            v.push(s * z.re);
            v.push(-s * z.im);
        }
        v
    }

    fn from_vec(&self, v: &[f64]) -> CMat {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut h = la::zeros(self.m, self.m);
        for a in 0..self.m {
            h[(a, a)] = cr(v[a]);
        }
        for (t, &(a, b)) in self.pairs.iter().enumerate() {
            let (ys, ya) = (v[self.m + 2 * t], v[self.m + 2 * t + 1]);
            h[(a, b)] = c64::new(ys * r, -ya * r);
            h[(b, a)] = c64::new(ys * r, ya * r);
        }
        h
    }

    /// Adds Re(h_q(c,e) ⟨H_p, V⟩) into column q of `m` for every p, where V = Φ(E_ce).
    fn accumulate(&self, out: &mut Mat<f64>, c: usize, e: usize, v: impl Fn(usize, usize) -> c64) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut proj = Vec::with_capacity(self.len());
        for a in 0..self.m {
            proj.push(v(a, a));
        }
        for &(a, b) in &self.pairs {
            let (x, y) = (v(a, b), v(b, a));
            proj.push((x + y) * r);
            proj.push((x - y) * la::I * r);
        }
        let mut add = |q: usize, h: c64| {
            for (p, z) in proj.iter().enumerate() {
                out[(p, q)] += (h * z).re;
            }
        };
        if c == e {
            add(c, cr(1.0));
        } else {
            let (lo, hi, sign) = if c < e { (c, e, -1.0) } else { (e, c, 1.0) };
            let t = self.pair_index(lo, hi);
            add(self.m + 2 * t, cr(r));
            add(self.m + 2 * t + 1, c64::new(0.0, sign * r));
        }
    }

    fn pair_index(&self, a: usize, b: usize) -> usize {
        // pairs enumerated row by row: a·m − a(a+1)/2 + (b − a − 1)
        a * self.m - a * (a + 1) / 2 + (b - a - 1)
    }
}

/// Real Schur matrix M[p,q] = Re⟨H_p, A(X A*(H_q) Z⁻¹)⟩.
fn schur(p: &SdpProblem, basis: &HermBasis, x: &CMat, zi: &CMat) -> Mat<f64> {
    let m = p.m();
    let nb = basis.len();
    let mut out = Mat::<f64>::zeros(nb, nb);
    match p.traced {
        TracedFactor::First => {
            let d = p.d1;
            // Φ(E_ce)[a,b] = Σ_{ik} X_ik[a,c] Zi_ki[e,b] = (A_c · Bz)[a, e·m + b]
            let bz = Mat::from_fn(d * d, m * m, |ik, eb| {
                let (i, k) = (ik / d, ik % d);
                let (e, b) = (eb / m, eb % m);
                zi[(k * m + e, i * m + b)]
            });
            for c in 0..m {
                let ac = Mat::from_fn(m, d * d, |a, ik| {
                    let (i, k) = (ik / d, ik % d);
                    x[(i * m + a, k * m + c)]
                });
                let pc = &ac * &bz;
                for e in 0..m {
                    basis.accumulate(&mut out, c, e, |a, b| pc[(a, e * m + b)]);
                }
            }
        }
        TracedFactor::Second => {
            let dd = p.d2;
            // Φ(E_ce)[a,b] = tr(X_ac Zi_eb)
            for c in 0..m {
                for e in 0..m {
                    let mut l = la::zeros(m, m);
                    for a in 0..m {
                        let xac = la::block(x, dd, a, c);
                        for b in 0..m {
                            l[(a, b)] = la::trace_prod(&xac, &la::block(zi, dd, e, b));
                        }
                    }
                    basis.accumulate(&mut out, c, e, |a, b| l[(a, b)]);
                }
            }
        }
    }
    Mat::from_fn(nb, nb, |i, j| 0.5 * (out[(i, j)] + out[(j, i)]))
}

/// Largest t with X + t·dX ⪰ 0 (∞ if dX ⪰ 0); None if X is not positive definite.
fn max_step(x: &CMat, dx: &CMat) -> Option<f64> {
    let l = la::cholesky(x)?;
    let li = la::inv_lower(&l);
    let s = &(&li * dx) * li.adjoint();
    let w = la::eigvalsh(&s).ok()?;
    let lm = *w.last()?;
    Some(if lm >= 0.0 { f64::INFINITY } else { -1.0 / lm })
}

struct State {
    x: CMat,
    y: CMat,
    z: CMat,
}

fn measures(p: &SdpProblem, s: &State, cscale: f64) -> (f64, f64, f64, f64, f64) {
    let rp = &p.target - p.op(&s.x);
    let rd = &(&p.c - p.op_adj(&s.y)) + &s.z;
    let pobj = la::trace_prod(&p.c, &s.x).re;
    let dobj = la::trace_prod(&p.target, &s.y).re;
    let gap = (dobj - pobj).abs() / (1.0 + pobj.abs());
    (la::max_abs(&rp), la::max_abs(&rd) / cscale, gap, pobj, dobj)
}

/// Solve and fail with `SolverFailure` unless the returned point meets the contract.
pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    let sol = solve_unchecked(p, opts)?;
    if sol.meets_contract(opts) {
        Ok(sol)
    } else {
        Err(Error::SolverFailure {
            iterations: sol.iterations,
            primal: sol.primal_residual,
            dual: sol.dual_residual,
            gap: sol.gap,
        })
    }
}

/// Best iterate reached, whether or not it meets the contract.
pub fn solve_unchecked(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    let n = p.n();
    let m = p.m();
    let basis = HermBasis::new(m);
    let cnorm = la::eigvalsh(&p.c)?.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    let cscale = 1.0 + la::max_abs(&p.c);
    let mut s = State {
        x: la::scale(&p.op_adj(&p.target), cr(1.0 / p.traced_dim() as f64)),
        y: la::scale(&la::eye(m), cr(cnorm + 1.0)),
        z: la::zeros(n, n),
    };
    s.z = &p.op_adj(&s.y) - &p.c;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..opts.max_iters {
        iterations = it;
        let (rpn, rdn, gap, _, _) = measures(p, &s, cscale);
        if rpn < opts.tol && rdn < opts.tol && gap < opts.tol {
            converged = true;
            break;
        }
        let rp = &p.target - p.op(&s.x);
        let rd = &(&p.c - p.op_adj(&s.y)) + &s.z;
        let mu = la::trace_prod(&s.x, &s.z).re / n as f64;
        let zi = match la::inv_hpd(&s.z) {
            Ok(zi) => zi,
            Err(_) => break,
        };
        let mmat = schur(p, &basis, &s.x, &zi);
        let chol = match mmat.llt(Side::Lower) {
            Ok(c) => c,
            Err(_) => break,
        };
        let direction = |rc: &CMat| -> (CMat, CMat, CMat) {
            let rhs = &la::herm(&p.op(&(&(rc * &zi) + &(&(&s.x * &rd) * &zi)))) - &rp;
            let v = basis.to_vec(&rhs);
            let rhs_mat = Mat::from_fn(v.len(), 1, |i, _| v[i]);
            let sol = chol.solve(&rhs_mat);
            let yv: Vec<f64> = (0..v.len()).map(|i| sol[(i, 0)]).collect();
            let dy = basis.from_vec(&yv);
            let dz = &p.op_adj(&dy) - &rd;
            let dx = la::herm(&(&(rc * &zi) - &(&(&s.x * &dz) * &zi)));
            (dx, dy, dz)
        };
        let xz = &s.x * &s.z;
        let (dxa, _, dza) = direction(&la::scale(&xz, cr(-1.0)));
        let (spa, sda) = match (max_step(&s.x, &dxa), max_step(&s.z, &dza)) {
            (Some(a), Some(b)) => (a, b),
            _ => break,
        };
        let ap = (0.98 * spa).min(1.0);
        let ad = (0.98 * sda).min(1.0);
        let xa = &s.x + la::scale(&dxa, cr(ap));
        let za = &s.z + la::scale(&dza, cr(ad));
        let mua = la::trace_prod(&xa, &za).re / n as f64;
        let sigma = (mua / mu).max(0.0).powi(3).min(1.0);
        let rc = &(&la::scale(&la::eye(n), cr(sigma * mu)) - &xz) - &(&dxa * &dza);
        let (dx, dy, dz) = direction(&rc);
        let (sp, sd) = match (max_step(&s.x, &dx), max_step(&s.z, &dz)) {
            (Some(a), Some(b)) => (a, b),
            _ => break,
        };
        let ap = (0.98 * sp).min(1.0);
        let ad = (0.98 * sd).min(1.0);
        s.x = la::herm(&(&s.x + la::scale(&dx, cr(ap))));
        s.y = la::herm(&(&s.y + la::scale(&dy, cr(ad))));
        s.z = la::herm(&(&s.z + la::scale(&dz, cr(ad))));
        iterations = it + 1;
    }
    let (rpn, rdn, gap, pobj, dobj) = measures(p, &s, cscale);
    Ok(SdpSolution {
        x: s.x,
        y: s.y,
        primal_objective: pobj,
        dual_objective: dobj,
        primal_residual: rpn,
        dual_residual: rdn,
        gap,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn herm_basis_round_trip() {
        let b = HermBasis::new(4);
        let h = la::herm(&Mat::from_fn(4, 4, |i, j| c64::new((i + 2 * j) as f64, (i * j) as f64 - 1.0)));
        let v = b.to_vec(&h);
        assert_eq!(v.len(), 16);
        assert!(la::max_abs_diff(&b.from_vec(&v), &h) < 1e-14);
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        assert!((norm2 - la::trace_prod(&h, &h).re).abs() < 1e-11);
        for a in 0..4 {
            for c in a + 1..4 {
                let t = b.pair_index(a, c);
                assert_eq!(b.pairs[t], (a, c));
            }
        }
    }

    #[test]
    fn d1_is_max_eigenvalue() {
        let c = la::herm(&Mat::from_fn(4, 4, |i, j| c64::new((i as f64 - j as f64).cos(), (i * j) as f64 * 0.1)));
        let p = SdpProblem { c: c.clone(), d1: 1, d2: 4, traced: TracedFactor::Second, target: la::eye(1) };
        let s = solve(&p, &SdpOptions::default()).unwrap();
        let top = la::eigvalsh(&c).unwrap()[0];
        assert!((s.primal_objective - top).abs() < 1e-7);
    }
}
