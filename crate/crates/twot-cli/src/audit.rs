//! Invariant suites. Suites 1–7 back the `audit` subcommand; 8 and 9 run optimization
//! experiments and are used by the acceptance target.

use std::time::Instant;

use faer::Mat;

use twot::channels::{
    dephasing_apply, dephasing_kraus_auto, fock_cross_check, loss_on_span, reduced_fock_space, tensor_loss,
    KrausChannel,
};
use twot::codes::{
    overlap_with_fock_target, phi_overlap, phi_states, small_alpha_limits, two_t_constellation,
    two_t_logical_states, two_t_qubit, two_t_qutrit, two_t_span, zeta,
};
use twot::coherent::{fock_expand, inner, Constellation, SpanState, DEFAULT_EPS_RANK};
use twot::fidelity::{
    alternate_with_trace, choi_of_encoding, entanglement_fidelity, kraus_sum_fidelity, random_encoding, random_kraus,
    AlternatingOptions, ChoiMatrix,
};
use twot::group::{coset_decomposition, generate_2t, qmul, su2_rep};
use twot::la::{self, cr, CMat};
use twot::operators::{
    logical_matrix, qubit_gates, stabilizer_audit, z_generator_check, PassiveTransform, PolynomialJumpOperator,
};
use twot::sdp::{solve, SdpOptions, SdpProblem, TracedFactor};
use twot::c64;

use crate::config::{Experiment, ExperimentConfig};
use crate::experiments;
use crate::table::{ResultRow, Status};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ tol`.
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, tol, pass: value <= tol }
    }

    /// Passes when `value ≥ tol`.
    pub fn at_least(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, tol, pass: value >= tol }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, tol: 1.0, pass: ok }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub criterion: usize,
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
    pub time_limit: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass) && self.seconds < self.time_limit
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// One summary line.
    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!(
            "criterion {} {verdict} {} ({} checks, {:.2} s, limit {} s)",
            self.criterion,
            self.name,
            self.checks.len(),
            self.seconds,
            self.time_limit
        );
        for c in self.failures() {
            s.push_str(&format!("\n    failed: {} = {:.6e} (bound {:.1e})", c.name, c.value, c.tol));
        }
        if self.seconds >= self.time_limit {
            s.push_str("\n    failed: time limit");
        }
        s
    }
}

type SuiteFn = fn() -> twot::Result<Vec<Check>>;

const SUITES: [(usize, &str, f64, SuiteFn); 9] = [
    (1, "group", 1.0, group_suite),
    (2, "coset overlaps and normalization", 1.0, overlap_suite),
    (3, "finite Kraus loss", 30.0, loss_suite),
    (4, "operators", 30.0, operator_suite),
    (5, "small-alpha limits", 10.0, small_alpha_suite),
    (6, "reduced Fock space", 10.0, reduced_fock_suite),
    (7, "SDP and alternation", 300.0, sdp_suite),
    (8, "fixed points", 600.0, fixed_point_suite),
    (9, "figure qualitative checks", 1800.0, figure_suite),
];

/// Criteria covered by the `audit` subcommand.
pub const AUDIT_CRITERIA: [usize; 7] = [1, 2, 3, 4, 5, 6, 7];

pub fn run_suite(criterion: usize) -> Option<SuiteReport> {
    let &(criterion, name, time_limit, f) = SUITES.iter().find(|s| s.0 == criterion)?;
    faer::set_global_parallelism(faer::Par::Seq);
    let t0 = Instant::now();
    let checks = f().unwrap_or_else(|e| vec![Check::holds(format!("error: {e}"), false)]);
    Some(SuiteReport { criterion, name, checks, seconds: t0.elapsed().as_secs_f64(), time_limit })
}

pub fn run_audit() -> Vec<SuiteReport> {
    AUDIT_CRITERIA.iter().filter_map(|&c| run_suite(c)).collect()
}

fn group_suite() -> twot::Result<Vec<Check>> {
    let g = generate_2t();
    let cd = coset_decomposition();
    let mut covered: Vec<usize> = cd.indices.iter().flatten().copied().collect();
    covered.sort_unstable();
    let reps: Vec<CMat> = g.elements.iter().map(su2_rep).collect();
    let mut unitary = 0.0f64;
    let mut homo = 0.0f64;
    for (a, ra) in g.elements.iter().zip(&reps) {
        unitary = unitary.max(la::max_abs_diff(&(ra.adjoint() * ra), &la::eye(2)));
        for (b, rb) in g.elements.iter().zip(&reps) {
            homo = homo.max(la::max_abs_diff(&su2_rep(&qmul(a, b)), &(ra * rb)));
        }
    }
    Ok(vec![
        Check::holds("24 elements", g.len() == 24),
        Check::holds("closed under products", g.is_closed()),
        Check::holds("closed under inverses", g.has_inverses()),
        Check::holds("cosets partition 2T", covered == (0..24).collect::<Vec<_>>() && cd.cosets.iter().all(|c| c.len() == 8)),
        Check::at_most("su2_rep unitarity", unitary, 1e-12),
        Check::at_most("su2_rep homomorphism (576 pairs)", homo, 1e-12),
    ])
}

fn overlap_closed_form(a: f64) -> f64 {
    let x = a * a;
    4.0 * x.cosh() * x.cos() / (2.0 + (2.0 * x).cos() + (2.0 * x).cosh())
}

fn overlap_suite() -> twot::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for a in [0.3, 0.7, 1.0, 1.5, 2.0] {
        let phi = phi_states(a)?;
        let v = inner(&phi[1], &phi[2])?;
        let want = overlap_closed_form(a);
        checks.push(Check::at_most(format!("<phi1|phi2> alpha={a}"), (v - cr(want)).norm(), 1e-10));
        checks.push(Check::at_most(format!("phi_overlap alpha={a}"), (phi_overlap(a) - want).abs(), 1e-10));
        let span = two_t_span(a)?;
        let ks = two_t_logical_states(&span, a)?;
        let mut dev = 0.0f64;
        for j in 0..3 {
            for k in 0..3 {
                let want = if j == k { 1.0 } else { 0.0 };
                dev = dev.max((inner(&ks[j], &ks[k])? - cr(want)).norm());
            }
        }
        checks.push(Check::at_most(format!("logical orthonormality alpha={a}"), dev, 1e-10));
    }
    Ok(checks)
}

fn loss_suite() -> twot::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for a in [0.5, 1.5] {
        for g in [0.01, 0.1] {
            let ch = tensor_loss(&two_t_constellation(a)?, g, DEFAULT_EPS_RANK)?;
            checks.push(Check::at_most(format!("completeness alpha={a} gamma={g}"), ch.channel.completeness_defect(), 1e-8));
            let m = ch.input.len();
            let mut dev = 0.0f64;
            for i in 0..m {
                for j in 0..m {
                    dev = dev.max(la::max_abs_diff(&ch.apply_coherent_pair(i, j), &ch.expected_coherent_pair(i, j)));
                }
            }
            checks.push(Check::at_most(format!("action on |a_i><a_j| alpha={a} gamma={g}"), dev, 1e-8));
        }
    }
    let pts: Vec<c64> = (0..3).map(|k| c64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0)).collect();
    let dev = fock_cross_check(&Constellation::single_mode(&pts)?, 0.1, 40)?;
    checks.push(Check::at_most("3-PSK vs truncated Fock Kraus", dev, 1e-6));
    Ok(checks)
}

fn operator_suite() -> twot::Result<Vec<Check>> {
    let a = 1.5;
    let mut checks = Vec::new();
    let g = generate_2t();
    for f in [PolynomialJumpOperator::f1(a), PolynomialJumpOperator::f2(a)] {
        let nonzero = g.elements.iter().filter(|q| !f.eval_exact_2t(q).is_some_and(|v| v.is_zero())).count();
        checks.push(Check::holds(format!("{} annihilates all 24 states", f.name), nonzero == 0));
    }
    let code = two_t_qutrit(a)?;
    let z = zeta();
    let zdiag = Mat::from_fn(3, 3, |i, j| if i == j { z.powi(i as i32) } else { cr(0.0) });
    let zl = logical_matrix(&code, &PassiveTransform::z_bar())?;
    checks.push(Check::at_most("Zbar|k> = zeta^k|k>", la::max_abs_diff(&zl, &zdiag), 1e-9));
    let perm = Mat::from_fn(3, 3, |i, j| cr(if (2 * j) % 3 == i { 1.0 } else { 0.0 }));
    let rl = logical_matrix(&code, &PassiveTransform::r1())?;
    checks.push(Check::at_most("R1|k> = |2k mod 3>", la::max_abs_diff(&rl, &perm), 1e-9));
    for (k, s) in code.logical.iter().enumerate() {
        let rep = stabilizer_audit(s, a)?;
        for name in ["SWAP", "R1R2", "R1^2"] {
            let v = rep.get(name).unwrap_or(f64::INFINITY);
            checks.push(Check::at_most(format!("{name} stabilizes |{k}>"), v, 1e-9));
        }
    }
    checks.push(Check::at_most("2T-qubit gates", qubit_gates(a)?.max_deviation, 1e-9));
    checks.push(Check::at_most("Z generator vs su2_rep(omega)", z_generator_check()?.residual, 1e-12));
    for (k, s) in code.logical.iter().enumerate() {
        let e = fock_expand(s, 48);
        let off = e.mass_where(|n| (n[0] + n[1]) % 4 != 0 || n[0] % 2 != 0);
        checks.push(Check::at_most(format!("|{k}> mass outside sectors minus tail bound"), off - e.tail_bound, 1e-10));
    }
    Ok(checks)
}

fn small_alpha_suite() -> twot::Result<Vec<Check>> {
    let mut checks = Vec::new();
    let a = 0.05;
    let span = two_t_span(a)?;
    let ks = two_t_logical_states(&span, a)?;
    for (k, (state, target)) in ks.iter().zip(small_alpha_limits().iter()).enumerate() {
        checks.push(Check::at_least(format!("|<limit|{k}>| at alpha=0.05"), overlap_with_fock_target(state, target), 0.99));
    }
    let a = 1.5;
    let qb = two_t_qubit(a)?;
    let minus = SpanState::combine(&[(cr(1.0), &qb.logical[0]), (cr(-1.0), &qb.logical[1])])?.normalized();
    let mut coeffs = vec![cr(0.0); 24];
    for (k, amp) in qb.span.constellation.amplitudes.iter().enumerate() {
        if (amp[0].norm() - a).abs() < 1e-12 && (amp[1].norm() - a).abs() < 1e-12 {
            let sign = |z: c64| if z.im.abs() < 1e-12 { 1.0 } else { -1.0 };
            coeffs[k] = cr(sign(amp[0]) * sign(amp[1]));
        }
    }
    let product = SpanState::coherent(&qb.span, coeffs)?.normalized();
    checks.push(Check::at_most("(|1>-|2>)/sqrt2 = cat product", 1.0 - inner(&product, &minus)?.norm(), 1e-10));
    Ok(checks)
}

fn reduced_fock_suite() -> twot::Result<Vec<Check>> {
    let mut checks = Vec::new();
    let dims_ok = (0..=10).all(|p| reduced_fock_space(p).dim() == (p + 1) * (p + 1));
    checks.push(Check::holds("dim = (p+1)^2 for p = 0..10", dims_ok));
    let space = reduced_fock_space(6);
    let gamma = 0.01;
    let k = dephasing_kraus_auto(gamma, &space, 1e-8)?;
    checks.push(Check::at_most("dephasing completeness defect", k.defect, 1e-8));
    let n = space.dim();
    let rho = Mat::from_fn(n, n, |i, j| c64::new(1.0 / (1 + i + j) as f64, (i as f64 - j as f64) * 0.01));
    let mut via_dense = la::zeros(n, n);
    for op in k.channel.dense_ops() {
        via_dense += &(&op * &rho) * op.adjoint();
    }
    let direct = dephasing_apply(&rho, gamma, &space)?;
    checks.push(Check::at_most("Kraus family vs elementwise map", la::max_abs_diff(&via_dense, &direct), 1e-8));
    Ok(checks)
}

fn sdp_suite() -> twot::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (n, seed) in [(4, 1), (6, 2), (8, 3)] {
        let g = random_kraus(n, n, 1, seed)?.remove(0);
        let c = la::herm(&(&g + g.adjoint()));
        let p = SdpProblem { c: c.clone(), d1: 1, d2: n, traced: TracedFactor::Second, target: la::eye(1) };
        let s = solve(&p, &SdpOptions::default())?;
        let top = la::eigvalsh(&c)?[0];
        checks.push(Check::at_most(format!("d=1 half-step = top eigenvalue (n={n})"), (s.primal_objective - top).abs(), 1e-6));
    }

    let code = two_t_qutrit(1.5)?;
    let ch = loss_on_span(&code.span, 0.1)?;
    let (d, dout) = (code.dim(), ch.channel.dout);
    let s = 1.0 / (d as f64).sqrt();
    let depol: Vec<CMat> = (0..d * dout)
        .map(|t| Mat::from_fn(d, dout, |a, i| cr(if a == t / dout && i == t % dout { s } else { 0.0 })))
        .collect();
    let f = entanglement_fidelity(&choi_of_encoding(&code)?, &ch.channel, &ChoiMatrix::recovery_from_kraus(&depol)?)?;
    // ⟨Φ|(1/d ⊗ 1/d)|Φ⟩ with |Φ⟩ = Σ|aa⟩/√d.
    let phi: Vec<f64> = (0..d * d).map(|t| if t / d == t % d { s } else { 0.0 }).collect();
    let direct: f64 = phi.iter().map(|x| x * x / (d * d) as f64).sum();
    checks.push(Check::at_most("depolarizing recovery = 1/d^2", (f - direct).abs(), 1e-8));

    let mut worst = 0.0f64;
    for (t, &(d, din, dout)) in [(1, 3, 2), (2, 4, 5), (3, 8, 6), (2, 8, 8), (3, 5, 7)].iter().enumerate() {
        let seed = 100 + 10 * t as u64;
        let enc = random_kraus(d, din, 2, seed)?;
        let cha = random_kraus(din, dout, 3, seed + 1)?;
        let rec = random_kraus(dout, d, 4, seed + 2)?;
        let xe = ChoiMatrix::encoding_from_kraus(&enc)?;
        let xr = ChoiMatrix::recovery_from_kraus(&rec)?;
        let f = entanglement_fidelity(&xe, &KrausChannel::dense(cha.clone())?, &xr)?;
        worst = worst.max((f - kraus_sum_fidelity(&enc, &cha, &rec)).abs());
    }
    checks.push(Check::at_most("tr(X_R M_E) vs triple Kraus sum", worst, 1e-8));

    let opts = AlternatingOptions { tol: 0.0, max_iters: 30, ..Default::default() };
    for seed in 1..=5u64 {
        let init = random_encoding(3, code.span.rank(), seed)?;
        let (trace, out) = alternate_with_trace(&ch.channel, init, &opts);
        checks.push(Check::holds(format!("alternation seed {seed} completed ({})", out.err().map_or("ok".into(), |e| e.to_string())), trace.records.len() == 60));
        checks.push(Check::at_most(format!("alternation seed {seed} max decrease"), trace.max_decrease(), 1e-6));
    }
    Ok(checks)
}

/// First-step gain threshold for the fixed-point claim.
pub const FIXED_POINT_TOL: f64 = 1e-4;
/// Allowed gap between random starts and the 2T-qutrit start.
pub const RANDOM_START_GAP: f64 = 1e-3;

fn gain_check(row: &ResultRow) -> Check {
    let gain = match (row.status, row.first_step_gain) {
        (Status::Ok, Some(g)) => g,
        _ => f64::INFINITY,
    };
    Check::at_most(format!("{} first encoding step gain (alpha={}, gamma={})", row.code, row.alpha, row.gamma), gain, FIXED_POINT_TOL)
}

fn config(exp: Experiment, pairs: &[(&str, &str)]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(exp);
    for (k, v) in pairs {
        cfg.set(k, v).expect("valid setting");
    }
    cfg
}

fn model_error(e: crate::CliError) -> twot::Error {
    match e {
        crate::CliError::Model(m) => m,
        other => twot::Error::InvalidParameter(other.to_string()),
    }
}

fn fixed_point_suite() -> twot::Result<Vec<Check>> {
    // Only the first iteration matters for the gain.
    let cfg = config(
        Experiment::Qubits,
        &[("alpha", "1.5"), ("gamma", "0.01"), ("codes", "2T-qutrit, 2T-qubit, cat-c0c2, cat-c1c3"), ("max-iters", "1")],
    );
    let out = experiments::run(&cfg).map_err(model_error)?;
    Ok(out.main_rows().iter().map(gain_check).collect())
}

/// Whether the fidelity maximum over an α sweep sits strictly inside the grid; also returns its α.
fn interior_max(rows: &[&ResultRow]) -> (bool, f64) {
    let ok = rows.iter().all(|r| r.status == Status::Ok && r.fidelity.is_some());
    let best = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.fidelity.unwrap_or(f64::NAN).total_cmp(&b.1.fidelity.unwrap_or(f64::NAN)));
    match best {
        Some((i, r)) => (ok && i > 0 && i + 1 < rows.len(), r.alpha),
        None => (false, f64::NAN),
    }
}

fn figure_suite() -> twot::Result<Vec<Check>> {
    let mut checks = Vec::new();

    let loss = experiments::run(&config(
        Experiment::FidAlpha,
        &[("alpha", "0.25:2.5:0.25"), ("gamma", "0.1"), ("codes", "2T-qutrit")],
    ))
    .map_err(model_error)?;
    let rows: Vec<&ResultRow> = loss.main_rows().iter().collect();
    let (ok, at) = interior_max(&rows);
    checks.push(Check::holds(format!("(a) loss gamma=0.1 sweet spot interior (argmax alpha={at})"), ok));

    let deph = experiments::run(&config(
        Experiment::Dephasing,
        &[("alpha", "0.25:2.0:0.25"), ("gamma", "0.01"), ("codes", "2T-qutrit")],
    ))
    .map_err(model_error)?;
    let rows: Vec<&ResultRow> = deph.main_rows().iter().collect();
    let (ok, at) = interior_max(&rows);
    checks.push(Check::holds(format!("(a) dephasing gamma=0.01 sweet spot interior (argmax alpha={at})"), ok));

    let psk = experiments::run(&config(
        Experiment::InfidGamma,
        &[("alpha", "0.25:2.0:0.25"), ("gamma", "0.01"), ("codes", "2T-qutrit, 3-PSK, 6-PSK, 9-PSK, 12-PSK")],
    ))
    .map_err(model_error)?;
    let best = psk.main_rows();
    let two_t = best.iter().find(|r| r.code == "2T-qutrit").and_then(|r| r.fidelity).unwrap_or(f64::NAN);
    for r in best.iter().filter(|r| r.code != "2T-qutrit") {
        let margin = two_t - r.fidelity.unwrap_or(f64::NAN);
        checks.push(Check::at_least(format!("(b) F(2T) - F({}) at gamma=0.01", r.code), margin, f64::MIN_POSITIVE));
    }

    let iters = experiments::run(&config(
        Experiment::FidIters,
        &[("alpha", "1.5"), ("gamma", "0.01"), ("codes", "2T-qutrit, random"), ("seeds", "1..6"), ("max-iters", "50")],
    ))
    .map_err(model_error)?;
    let rows = iters.main_rows();
    let start = rows.iter().find(|r| r.code == "2T-qutrit").and_then(|r| r.fidelity).unwrap_or(f64::NAN);
    for r in rows.iter().filter(|r| r.code == "random") {
        let gap = match (r.status, r.fidelity) {
            (Status::Ok, Some(f)) => (f - start).abs(),
            _ => f64::INFINITY,
        };
        checks.push(Check::at_most(format!("(c) |F(random seed {}) - F(2T start)|", r.seed.unwrap_or(0)), gap, RANDOM_START_GAP));
    }
    Ok(checks)
}
