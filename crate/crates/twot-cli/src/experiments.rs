//! Experiment drivers. Grid points run on the rayon pool; rows come back in config order.

use std::time::Instant;

use rayon::prelude::*;

use twot::channels::{dephasing_kraus_auto_on, loss_on_span, reduced_fock_space, KrausChannel};
use twot::codes::{two_t_qutrit, two_t_span, CodeSpec};
use twot::coherent::fock_indices;
use twot::fidelity::{
    alternate_with_trace, choi_of_encoding, optimal_recovery, random_encoding, AlternatingOptions, ChoiMatrix,
    OptimizationTrace,
};
use twot::sdp::SdpOptions;

use crate::codes::CodeChoice;
use crate::config::{Experiment, ExperimentConfig};
use crate::table::{ResultRow, Status};
use crate::CliError;

/// Tail bound required of a truncated Fock encoding.
pub const TAIL_BOUND_TARGET: f64 = 1e-8;
/// Completeness defect allowed for the truncated dephasing Kraus family.
pub const DEPHASING_DEFECT: f64 = 1e-8;
/// Largest automatically chosen truncation parameter.
pub const MAX_AUTO_P: usize = 24;
/// Fidelities outside [−slack, 1 + slack] are flagged.
pub const FIDELITY_SLACK: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub stem: String,
    pub code: String,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: Option<u64>,
    pub trace: OptimizationTrace,
}

#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    /// (file stem, rows); the first table is the main result.
    pub tables: Vec<(String, Vec<ResultRow>)>,
    pub traces: Vec<TraceEntry>,
}

impl RunOutput {
    pub fn main_rows(&self) -> &[ResultRow] {
        self.tables.first().map_or(&[], |t| &t.1)
    }
}

type Job<'a> = Box<dyn Fn() -> (ResultRow, Option<TraceEntry>) + Send + Sync + 'a>;

fn run_jobs(jobs: Vec<Job<'_>>) -> (Vec<ResultRow>, Vec<TraceEntry>) {
    let out: Vec<_> = jobs.par_iter().map(|j| j()).collect();
    let mut rows = Vec::with_capacity(out.len());
    let mut traces = Vec::new();
    for (r, t) in out {
        rows.push(r);
        traces.extend(t);
    }
    (rows, traces)
}

pub fn alternating_options(cfg: &ExperimentConfig) -> AlternatingOptions {
    AlternatingOptions { tol: cfg.tol, max_iters: cfg.max_iters, ..Default::default() }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    faer::set_global_parallelism(faer::Par::Seq);
    cfg.validate()?;
    let choices = CodeChoice::parse_list(&cfg.codes)?;
    let recovery_only = matches!(cfg.experiment, Experiment::FidAlpha | Experiment::InfidGamma | Experiment::Dephasing);
    if recovery_only && choices.contains(&CodeChoice::Random) {
        return Err(CliError::Config(format!("random starts are not part of {}", cfg.experiment)));
    }
    match cfg.experiment {
        Experiment::FidIters | Experiment::Qubits => alternation_sweep(cfg, &choices),
        Experiment::FidAlpha => fid_alpha(cfg, &choices),
        Experiment::InfidGamma => infid_gamma(cfg, &choices),
        Experiment::Dephasing => dephasing(cfg, &choices),
        Experiment::Audit => Err(CliError::Config("audit has no result table".into())),
    }
}

fn stem(exp: Experiment, code: &str, alpha: f64, gamma: f64, seed: Option<u64>) -> String {
    let code: String = code.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    match seed {
        Some(s) => format!("{exp}_{code}_a{alpha}_g{gamma}_s{s}"),
        None => format!("{exp}_{code}_a{alpha}_g{gamma}"),
    }
}

fn check_range(row: &mut ResultRow) {
    if let Some(f) = row.fidelity {
        if !(-FIDELITY_SLACK..=1.0 + FIDELITY_SLACK).contains(&f) {
            row.flag(Status::Error, format!("fidelity {f} outside [0, 1]"));
        }
    }
}

fn alternation_row(
    mut row: ResultRow,
    exp: Experiment,
    channel: &KrausChannel,
    init: ChoiMatrix,
    opts: &AlternatingOptions,
) -> (ResultRow, Option<TraceEntry>) {
    let t0 = Instant::now();
    let (trace, out) = alternate_with_trace(channel, init, opts);
    row.record_trace(&trace);
    if let Err(e) = out {
        row.flag_error(&e);
    } else if !trace.converged {
        row.flag(Status::Ok, "max-iters reached");
    }
    row.runtime = t0.elapsed().as_secs_f64();
    check_range(&mut row);
    let entry = TraceEntry {
        stem: stem(exp, &row.code, row.alpha, row.gamma, row.seed),
        code: row.code.clone(),
        alpha: row.alpha,
        gamma: row.gamma,
        seed: row.seed,
        trace,
    };
    (row, Some(entry))
}

fn error_row(mut row: ResultRow, e: &CliError) -> (ResultRow, Option<TraceEntry>) {
    match e {
        CliError::Model(m) => row.flag_error(m),
        other => row.flag(Status::Error, other.to_string()),
    }
    (row, None)
}

/// Alternation from named codes and random starts (fid-iters, qubits).
///
/// Random starts are qutrits on the 2T span for fid-iters and qubits inside the
/// 2T-qutrit span for qubits.
fn alternation_sweep(cfg: &ExperimentConfig, choices: &[CodeChoice]) -> Result<RunOutput, CliError> {
    let exp = cfg.experiment;
    let opts = alternating_options(cfg);
    let mut jobs: Vec<Job> = Vec::new();
    for &gamma in &cfg.gamma {
        for &alpha in &cfg.alpha {
            for choice in choices {
                if *choice == CodeChoice::Random {
                    for &seed in &cfg.seeds {
                        jobs.push(Box::new(move || {
                            let row = ResultRow::new("random", alpha, gamma, Some(seed));
                            match random_start(exp, alpha, gamma, seed) {
                                Ok((ch, init)) => alternation_row(row, exp, &ch, init, &opts),
                                Err(e) => error_row(row, &e),
                            }
                        }));
                    }
                } else {
                    jobs.push(Box::new(move || {
                        let row = ResultRow::new(choice.to_string(), alpha, gamma, None);
                        match code_start(choice, alpha, gamma) {
                            Ok((code, ch, init)) => {
                                let row = ResultRow { code: code.label.clone(), alpha: code.alpha, ..row };
                                alternation_row(row, exp, &ch, init, &opts)
                            }
                            Err(e) => error_row(row, &e),
                        }
                    }));
                }
            }
        }
    }
    let (rows, traces) = run_jobs(jobs);
    Ok(RunOutput { tables: vec![(exp.name().to_string(), rows)], traces })
}

fn code_start(choice: &CodeChoice, alpha: f64, gamma: f64) -> Result<(CodeSpec, KrausChannel, ChoiMatrix), CliError> {
    let code = choice.build(alpha)?;
    let ch = loss_on_span(&code.span, gamma)?.channel;
    let init = choi_of_encoding(&code)?;
    Ok((code, ch, init))
}

fn random_start(exp: Experiment, alpha: f64, gamma: f64, seed: u64) -> Result<(KrausChannel, ChoiMatrix), CliError> {
    if exp == Experiment::Qubits {
        let host = two_t_qutrit(alpha)?;
        let ch = loss_on_span(&host.span, gamma)?.channel.precompose(&host.isometry)?;
        Ok((ch, random_encoding(2, 3, seed)?))
    } else {
        let span = two_t_span(alpha)?;
        let ch = loss_on_span(&span, gamma)?.channel;
        Ok((ch, random_encoding(3, span.rank(), seed)?))
    }
}

fn recovery_row(mut row: ResultRow, channel: &KrausChannel, init: &ChoiMatrix, sdp: &SdpOptions) -> ResultRow {
    match optimal_recovery(channel, init, sdp) {
        Ok(r) => {
            row.fidelity = Some(r.fidelity);
            row.recovery_fidelity = Some(r.fidelity);
            row.solver_residual = Some(r.solver_residual);
            if !r.contract_met {
                row.flag(Status::Contract, format!("solver residual {:.3e}", r.solver_residual));
            }
        }
        Err(e) => row.flag_error(&e),
    }
    check_range(&mut row);
    row
}

/// Recovery-only fidelity for one named code; optionally continued by alternation.
fn loss_point(
    cfg: &ExperimentConfig,
    choice: &CodeChoice,
    alpha: f64,
    gamma: f64,
) -> (ResultRow, Option<TraceEntry>) {
    let t0 = Instant::now();
    let row = ResultRow::new(choice.to_string(), alpha, gamma, None);
    let (code, ch, init) = match code_start(choice, alpha, gamma) {
        Ok(x) => x,
        Err(e) => return error_row(row, &e),
    };
    let row = ResultRow { code: code.label.clone(), alpha: code.alpha, ..row };
    if cfg.alternate {
        let rec = recovery_row(row.clone(), &ch, &init, &SdpOptions::default()).recovery_fidelity;
        let (mut row, t) = alternation_row(row, cfg.experiment, &ch, init, &alternating_options(cfg));
        row.recovery_fidelity = rec;
        row.runtime = t0.elapsed().as_secs_f64();
        (row, t)
    } else {
        let mut row = recovery_row(row, &ch, &init, &SdpOptions::default());
        row.runtime = t0.elapsed().as_secs_f64();
        (row, None)
    }
}

fn fid_alpha(cfg: &ExperimentConfig, choices: &[CodeChoice]) -> Result<RunOutput, CliError> {
    let mut jobs: Vec<Job> = Vec::new();
    for &gamma in &cfg.gamma {
        for choice in choices {
            for &alpha in alphas_for(cfg, choice) {
                jobs.push(Box::new(move || loss_point(cfg, choice, alpha, gamma)));
            }
        }
    }
    let (rows, traces) = run_jobs(jobs);
    Ok(RunOutput { tables: vec![(cfg.experiment.name().to_string(), rows)], traces })
}

/// Codes read from a file carry their own α.
fn alphas_for<'a>(cfg: &'a ExperimentConfig, choice: &CodeChoice) -> &'a [f64] {
    if choice.fixed_alpha() {
        &cfg.alpha[..1]
    } else {
        &cfg.alpha
    }
}

/// Minimum of 1 − F over the α grid for each (code, γ).
fn infid_gamma(cfg: &ExperimentConfig, choices: &[CodeChoice]) -> Result<RunOutput, CliError> {
    let mut jobs: Vec<Job> = Vec::new();
    let mut groups = Vec::new();
    for choice in choices {
        for &gamma in &cfg.gamma {
            let start = jobs.len();
            for &alpha in alphas_for(cfg, choice) {
                jobs.push(Box::new(move || loss_point(cfg, choice, alpha, gamma)));
            }
            groups.push(start..jobs.len());
        }
    }
    let (grid, traces) = run_jobs(jobs);
    let best = groups.into_iter().map(|g| best_of(&grid[g])).collect();
    Ok(RunOutput {
        tables: vec![(cfg.experiment.name().to_string(), best), (format!("{}-grid", cfg.experiment), grid)],
        traces,
    })
}

/// Highest-fidelity row of a group, preferring rows that met the solver contract.
pub fn best_of(rows: &[ResultRow]) -> ResultRow {
    let pick = |ok_only: bool| {
        rows.iter()
            .filter(|r| r.fidelity.is_some() && (!ok_only || r.status == Status::Ok))
            .max_by(|a, b| a.fidelity.partial_cmp(&b.fidelity).unwrap_or(std::cmp::Ordering::Equal))
    };
    let mut best = match pick(true).or_else(|| pick(false)) {
        Some(r) => r.clone(),
        None => {
            let mut r = rows[0].clone();
            r.flag(Status::Error, "no α produced a fidelity");
            return r;
        }
    };
    best.runtime = rows.iter().map(|r| r.runtime).sum();
    let skipped: Vec<String> = rows
        .iter()
        .filter(|r| r.status != Status::Ok)
        .map(|r| format!("alpha {} {}", r.alpha, r.status.as_str()))
        .collect();
    if !skipped.is_empty() {
        let note = skipped.join(", ");
        best.note = if best.note.is_empty() { note } else { format!("{}; {note}", best.note) };
    }
    best
}

/// Fock index set holding the code for a given photon cutoff.
pub fn code_fock_indices(choice: &CodeChoice, code: &CodeSpec, p: usize) -> Vec<Vec<usize>> {
    let cutoff = 4 * p;
    match choice {
        CodeChoice::TwoTQutrit | CodeChoice::TwoTQubit => reduced_fock_space(p).index_vecs(),
        CodeChoice::Psk(n) => twot::channels::residue_fock_indices(*n, cutoff),
        CodeChoice::CatC0C2 => sector(2, cutoff, |n| n[0] % 2 == 0 && (n[0] + 4 - n[1] % 4) % 4 == 0),
        CodeChoice::CatC1C3 => sector(2, cutoff, |n| n[0] % 2 == 1 && (n[0] + 4 - n[1] % 4) % 4 == 0),
        CodeChoice::Random | CodeChoice::File(_) => fock_indices(code.span.constellation.n_modes, cutoff),
    }
}

fn sector(modes: usize, cutoff: usize, keep: impl Fn(&[usize]) -> bool) -> Vec<Vec<usize>> {
    fock_indices(modes, cutoff).into_iter().filter(|n| keep(n)).collect()
}

fn dephasing_point(cfg: &ExperimentConfig, choice: &CodeChoice, alpha: f64, gamma: f64) -> (ResultRow, Option<TraceEntry>) {
    let t0 = Instant::now();
    let row = ResultRow::new(choice.to_string(), alpha, gamma, None);
    let code = match choice.build(alpha) {
        Ok(c) => c,
        Err(e) => return error_row(row, &e),
    };
    let mut row = ResultRow { code: code.label.clone(), alpha: code.alpha, ..row };
    let encode = |p: usize| {
        let idx = code_fock_indices(choice, &code, p);
        code.fock_encoding(&idx).map(|e| (idx, e))
    };
    let chosen = match cfg.fock_p {
        Some(p) => encode(p),
        None => {
            let mut p = 1;
            loop {
                match encode(p) {
                    Ok((_, ref e)) if e.tail_bound >= TAIL_BOUND_TARGET && p < MAX_AUTO_P => p += 1,
                    // Residue spaces at small cutoff can be too small to hold the code.
                    Err(twot::Error::RankDeficient { .. }) if p < MAX_AUTO_P => p += 1,
                    other => break other,
                }
            }
        }
    };
    let (idx, enc) = match chosen {
        Ok(x) => x,
        Err(e) => return error_row(row, &e.into()),
    };
    row.fock_dim = Some(idx.len());
    row.tail_bound = Some(enc.tail_bound);
    if enc.tail_bound >= TAIL_BOUND_TARGET {
        row.flag(Status::Truncation, format!("tail bound {:.3e} above {TAIL_BOUND_TARGET:e}", enc.tail_bound));
    }
    let result = dephasing_kraus_auto_on(gamma, &idx, DEPHASING_DEFECT)
        .and_then(|k| Ok((k, ChoiMatrix::from_isometry(&enc.isometry)?)));
    let (kraus, init) = match result {
        Ok(x) => x,
        Err(e) => return error_row(row, &e.into()),
    };
    let mut row = if cfg.alternate {
        let rec = recovery_row(row.clone(), &kraus.channel, &init, &SdpOptions::default()).recovery_fidelity;
        let (mut r, t) = alternation_row(row, cfg.experiment, &kraus.channel, init, &alternating_options(cfg));
        r.recovery_fidelity = rec;
        r.runtime = t0.elapsed().as_secs_f64();
        return (r, t);
    } else {
        recovery_row(row, &kraus.channel, &init, &SdpOptions::default())
    };
    row.runtime = t0.elapsed().as_secs_f64();
    (row, None)
}

fn dephasing(cfg: &ExperimentConfig, choices: &[CodeChoice]) -> Result<RunOutput, CliError> {
    let mut jobs: Vec<Job> = Vec::new();
    for &gamma in &cfg.gamma {
        for choice in choices {
            for &alpha in alphas_for(cfg, choice) {
                jobs.push(Box::new(move || dephasing_point(cfg, choice, alpha, gamma)));
            }
        }
    }
    let (rows, traces) = run_jobs(jobs);
    Ok(RunOutput { tables: vec![(cfg.experiment.name().to_string(), rows)], traces })
}
