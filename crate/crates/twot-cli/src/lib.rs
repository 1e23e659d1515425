//! Experiment driver for 2T constellation codes: loss and dephasing sweeps,
//! alternating encoding/recovery optimization, and invariant audits.

pub mod audit;
pub mod codes;
pub mod config;
pub mod experiments;
pub mod svg;
pub mod table;

use std::path::PathBuf;

use config::{parse_config_text, Experiment, ExperimentConfig};
use experiments::RunOutput;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] twot::Error),
}

/// Defaults for `exp`, then `key = value` pairs from a config file, then flags.
pub fn build_config(exp: Experiment, file_text: Option<&str>, flags: &[(String, String)]) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::defaults(exp);
    let file = match file_text {
        Some(t) => parse_config_text(t)?,
        None => Vec::new(),
    };
    for (k, v) in file.iter().chain(flags) {
        if k.trim() == "experiment" {
            if v.parse::<Experiment>()? != exp {
                return Err(CliError::Config(format!("config names experiment `{v}` but `{exp}` was requested")));
            }
            continue;
        }
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Write the result tables, traces and optional plots under `cfg.out`; returns the files written.
pub fn write_outputs(cfg: &ExperimentConfig, out: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(&cfg.out)?;
    let mut written = Vec::new();
    for (name, rows) in &out.tables {
        let p = cfg.out.join(format!("{name}.csv"));
        table::save_rows(&p, rows)?;
        written.push(p);
    }
    if !out.traces.is_empty() {
        let dir = cfg.out.join("traces");
        std::fs::create_dir_all(&dir)?;
        for t in &out.traces {
            let p = dir.join(format!("{}.csv", t.stem));
            table::save_trace(&p, &t.trace)?;
            written.push(p);
        }
    }
    if cfg.svg {
        for (stem, plot) in svg::plots(cfg.experiment, out) {
            let p = cfg.out.join(format!("{stem}.svg"));
            std::fs::write(&p, plot.render())?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Write the audit report as CSV: criterion, suite, check, value, bound, pass.
pub fn write_audit(path: &std::path::Path, reports: &[audit::SuiteReport]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["criterion", "suite", "check", "value", "bound", "pass"])?;
    for r in reports {
        for c in &r.checks {
            w.write_record([
                r.criterion.to_string(),
                r.name.to_string(),
                c.name.clone(),
                c.value.to_string(),
                c.tol.to_string(),
                c.pass.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
