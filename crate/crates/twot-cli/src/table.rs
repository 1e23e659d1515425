//! Result rows and CSV output.

use std::io::Write;
use std::path::Path;

use twot::fidelity::OptimizationTrace;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Solver residuals missed the feasibility/gap contract.
    Contract,
    /// Alternation aborted on a fidelity decrease beyond the slack.
    NonMonotone,
    /// Fock truncation did not reach the required tail bound.
    Truncation,
    Error,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Contract => "contract",
            Status::NonMonotone => "nonmonotone",
            Status::Truncation => "truncation",
            Status::Error => "error",
        }
    }

    pub fn from_error(e: &twot::Error) -> Status {
        match e {
            twot::Error::SolverFailure { .. } => Status::Contract,
            twot::Error::NonMonotone { .. } => Status::NonMonotone,
            twot::Error::Truncation { .. } => Status::Truncation,
            _ => Status::Error,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResultRow {
    pub code: String,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: Option<u64>,
    pub fidelity: Option<f64>,
    /// Recovery-only fidelity of the starting encoding.
    pub recovery_fidelity: Option<f64>,
    pub iterations: usize,
    pub runtime: f64,
    pub solver_residual: Option<f64>,
    /// F after the first encoding half-step minus F after the first recovery half-step.
    pub first_step_gain: Option<f64>,
    pub max_decrease: Option<f64>,
    pub fock_dim: Option<usize>,
    pub tail_bound: Option<f64>,
    pub status: Status,
    pub note: String,
}

impl ResultRow {
    pub fn new(code: impl Into<String>, alpha: f64, gamma: f64, seed: Option<u64>) -> Self {
        ResultRow {
            code: code.into(),
            alpha,
            gamma,
            seed,
            fidelity: None,
            recovery_fidelity: None,
            iterations: 0,
            runtime: 0.0,
            solver_residual: None,
            first_step_gain: None,
            max_decrease: None,
            fock_dim: None,
            tail_bound: None,
            status: Status::Ok,
            note: String::new(),
        }
    }

    pub fn flag(&mut self, status: Status, note: impl Into<String>) {
        if self.status == Status::Ok {
            self.status = status;
        }
        let note = note.into();
        if !note.is_empty() {
            if !self.note.is_empty() {
                self.note.push_str("; ");
            }
            self.note.push_str(&note);
        }
    }

    pub fn flag_error(&mut self, e: &twot::Error) {
        self.flag(Status::from_error(e), e.to_string());
    }

    pub fn infidelity(&self) -> Option<f64> {
        self.fidelity.map(|f| 1.0 - f)
    }

    /// Fill fidelity columns from an alternation trace.
    pub fn record_trace(&mut self, trace: &OptimizationTrace) {
        let r = &trace.records;
        self.fidelity = trace.final_fidelity();
        self.recovery_fidelity = r.first().map(|x| x.fidelity);
        self.iterations = trace.iterations();
        self.solver_residual = r.iter().map(|x| x.solver_residual).reduce(f64::max);
        self.first_step_gain = if r.len() >= 2 { Some(r[1].fidelity - r[0].fidelity) } else { None };
        self.max_decrease = Some(trace.max_decrease());
    }
}

pub const HEADER: [&str; 16] = [
    "code",
    "alpha",
    "gamma",
    "seed",
    "fidelity",
    "infidelity",
    "recovery_fidelity",
    "iterations",
    "runtime",
    "solver_residual",
    "first_step_gain",
    "max_decrease",
    "fock_dim",
    "tail_bound",
    "status",
    "note",
];

/// Shortest round-trip decimal; exponent form for very small or large magnitudes.
pub fn num(x: f64) -> String {
    if x != 0.0 && x.is_finite() && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_rows<W: Write>(w: W, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        out.write_record([
            r.code.clone(),
            num(r.alpha),
            num(r.gamma),
            opt(r.seed),
            opt_num(r.fidelity),
            opt_num(r.infidelity()),
            opt_num(r.recovery_fidelity),
            r.iterations.to_string(),
            format!("{:.3}", r.runtime),
            opt_num(r.solver_residual),
            opt_num(r.first_step_gain),
            opt_num(r.max_decrease),
            opt(r.fock_dim),
            opt_num(r.tail_bound),
            r.status.as_str().to_string(),
            r.note.clone(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(w: W, trace: &OptimizationTrace) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iter", "half_step", "fidelity", "solver_residual", "seconds"])?;
    for r in &trace.records {
        out.write_record([
            r.iter.to_string(),
            r.half_step.to_string(),
            num(r.fidelity),
            num(r.solver_residual),
            format!("{:.6}", r.seconds),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_rows(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    write_rows(std::fs::File::create(path)?, rows)
}

pub fn save_trace(path: &Path, trace: &OptimizationTrace) -> Result<(), CliError> {
    write_trace(std::fs::File::create(path)?, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use twot::fidelity::{HalfStep, TraceRecord};

    #[test]
    fn trace_columns() {
        let trace = OptimizationTrace {
            records: vec![
                TraceRecord { iter: 1, half_step: HalfStep::Recovery, fidelity: 0.5, solver_residual: 1e-10, seconds: 0.1 },
                TraceRecord { iter: 1, half_step: HalfStep::Encoding, fidelity: 0.75, solver_residual: 2e-10, seconds: 0.2 },
            ],
            converged: true,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iter,half_step,fidelity,solver_residual,seconds");
        assert_eq!(lines[1], "1,R,0.5,1e-10,0.100000");
        assert_eq!(lines[2], "1,E,0.75,2e-10,0.200000");
    }

    #[test]
    fn flagged_rows_are_kept() {
        let mut r = ResultRow::new("12-PSK", 0.25, 0.1, None);
        r.flag_error(&twot::Error::RankDeficient { rank: 10, required: 12 });
        let mut buf = Vec::new();
        write_rows(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().contains(",error,"));
    }
}
