use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use twot_cli::audit::run_audit;
use twot_cli::config::Experiment;
use twot_cli::table::Status;
use twot_cli::{build_config, experiments, write_audit, write_outputs, CliError};

#[derive(Parser)]
#[command(name = "twot", version, about = "Fidelity experiments for 2T constellation codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity along alternating optimization from the 2T-qutrit and random starts.
    FidIters(Common),
    /// Optimal-recovery fidelity against α under loss.
    FidAlpha(Common),
    /// Minimum infidelity over α against the loss rate.
    InfidGamma(Common),
    /// Qubit encodings under loss with full alternation.
    Qubits(Common),
    /// Optimal-recovery fidelity against α under dephasing.
    Dephasing(Common),
    /// Run the invariant suites; nonzero exit on failure.
    Audit(AuditArgs),
}

#[derive(Args)]
struct Common {
    /// α grid: list `a,b,c`, range `start:stop:step` or `log:start:stop:count`.
    #[arg(long)]
    alpha: Option<String>,
    /// γ grid, same syntax as --alpha.
    #[arg(long)]
    gamma: Option<String>,
    /// Comma-separated codes: 2T-qutrit, 2T-qubit, 3n-PSK, cat-c0c2, cat-c1c3, random, @FILE.
    #[arg(long)]
    codes: Option<String>,
    /// Seeds for random starts: list or half-open range `a..b`.
    #[arg(long)]
    seeds: Option<String>,
    /// Alternation stops when a full iteration changes F by less than this.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Fock truncation parameter (photon cutoff 4p), or `auto`.
    #[arg(long)]
    fock_p: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Continue recovery-only sweeps with full alternation.
    #[arg(long)]
    alternate: bool,
}

impl Common {
    fn flags(&self) -> Vec<(String, String)> {
        let mut f = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                f.push((k.to_string(), v));
            }
        };
        push("alpha", self.alpha.clone());
        push("gamma", self.gamma.clone());
        push("codes", self.codes.clone());
        push("seeds", self.seeds.clone());
        push("tol", self.tol.map(|x| x.to_string()));
        push("max-iters", self.max_iters.map(|x| x.to_string()));
        push("fock-p", self.fock_p.clone());
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("svg", self.svg.then(|| "true".to_string()));
        push("alternate", self.alternate.then(|| "true".to_string()));
        f
    }
}

#[derive(Args)]
struct AuditArgs {
    /// Directory for audit.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run_experiment(exp: Experiment, args: &Common) -> Result<ExitCode, CliError> {
    let text = match &args.config {
        Some(p) => Some(std::fs::read_to_string(p)?),
        None => None,
    };
    let cfg = build_config(exp, text.as_deref(), &args.flags())?;
    let out = experiments::run(&cfg)?;
    let written = write_outputs(&cfg, &out)?;
    let rows = out.main_rows();
    let flagged: Vec<_> = out.tables.iter().flat_map(|t| &t.1).filter(|r| r.status != Status::Ok).collect();
    println!("{exp}: {} rows, {} flagged", rows.len(), flagged.len());
    for r in &flagged {
        println!("  flagged {} alpha={} gamma={}: {} ({})", r.code, r.alpha, r.gamma, r.status.as_str(), r.note);
    }
    for p in &written {
        println!("  wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_audit_cmd(args: &AuditArgs) -> Result<ExitCode, CliError> {
    let reports = run_audit();
    for r in &reports {
        println!("{}", r.line());
    }
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let p = dir.join("audit.csv");
        write_audit(&p, &reports)?;
        println!("wrote {}", p.display());
    }
    Ok(if reports.iter().all(|r| r.passed()) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::FidIters(a) => run_experiment(Experiment::FidIters, a),
        Command::FidAlpha(a) => run_experiment(Experiment::FidAlpha, a),
        Command::InfidGamma(a) => run_experiment(Experiment::InfidGamma, a),
        Command::Qubits(a) => run_experiment(Experiment::Qubits, a),
        Command::Dephasing(a) => run_experiment(Experiment::Dephasing, a),
        Command::Audit(a) => run_audit_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
