use std::process::Command;

use twot::codes::{psk_qutrit, two_t_qutrit};
use twot::fidelity::{choi_of_encoding, optimal_recovery};
use twot::channels::loss_on_span;
use twot::la;
use twot::sdp::SdpOptions;
use twot_cli::codes::{read_codespec, write_codespec, CodeChoice};
use twot_cli::config::{Experiment, ExperimentConfig};
use twot_cli::experiments::{best_of, run};
use twot_cli::table::{write_rows, ResultRow, Status};
use twot_cli::{build_config, write_outputs};

fn cfg(exp: Experiment, pairs: &[(&str, &str)]) -> ExperimentConfig {
    let flags: Vec<(String, String)> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    build_config(exp, None, &flags).unwrap()
}

fn csv_without_runtime(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let rt = header.iter().position(|h| *h == "runtime").unwrap();
    text.lines()
        .map(|l| l.split(',').enumerate().filter(|(i, _)| *i != rt).map(|(_, f)| f).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn flags_override_config_file() {
    let text = "# sweep\nalpha = 0.5, 1.0\ngamma = 0.2\ncodes = 3-PSK\nmax-iters = 7\n";
    let flags = vec![("gamma".to_string(), "0.05".to_string())];
    let c = build_config(Experiment::FidAlpha, Some(text), &flags).unwrap();
    assert_eq!(c.alpha, vec![0.5, 1.0]);
    assert_eq!(c.gamma, vec![0.05]);
    assert_eq!(c.codes, vec!["3-PSK".to_string()]);
    assert_eq!(c.max_iters, 7);
    assert!(build_config(Experiment::FidAlpha, Some("experiment = qubits\n"), &[]).is_err());
    assert!(build_config(Experiment::FidAlpha, Some("alpha = 0\n"), &[]).is_err());
}

#[test]
fn two_t_recovery_fidelity_at_reference_point() {
    let out = run(&cfg(Experiment::FidAlpha, &[("alpha", "1.5"), ("gamma", "0.01"), ("codes", "2T")])).unwrap();
    let row = &out.main_rows()[0];
    assert_eq!(row.status, Status::Ok);
    assert!((row.fidelity.unwrap() - 0.99956108).abs() < 1e-6);
}

#[test]
fn codespec_file_round_trip() {
    let code = two_t_qutrit(1.5).unwrap();
    let text = write_codespec(&code);
    assert_eq!(text.lines().filter(|l| l.starts_with("amplitude ")).count(), 24);
    assert_eq!(text.lines().filter(|l| l.starts_with("logical ")).count(), 3);
    let back = read_codespec(&text).unwrap();
    assert_eq!(back.label, code.label);
    assert_eq!(back.alpha, code.alpha);
    assert!(la::max_abs_diff(&back.isometry, &code.isometry) < 1e-12);
    let ch = loss_on_span(&back.span, 0.01).unwrap();
    let f = optimal_recovery(&ch.channel, &choi_of_encoding(&back).unwrap(), &SdpOptions::default()).unwrap().fidelity;
    assert!((f - 0.99956108).abs() < 1e-6);
}

#[test]
fn codespec_rejects_malformed_input() {
    assert!(read_codespec("label x\nalpha 1\nmodes 1\namplitude 1+0j\n").is_err());
    assert!(read_codespec("label x\nalpha 1\nmodes 1\namplitude 1+0j\namplitude -1+0j\nlogical 1+0j 1+0j\nlogical 1+0j 0+0j\n").is_err());
    assert!(read_codespec("bogus 1\n").is_err());
}

#[test]
fn code_file_drives_a_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psk6.code");
    std::fs::write(&path, write_codespec(&psk_qutrit(1.5, 2).unwrap())).unwrap();
    let code = format!("@{}", path.display());
    assert_eq!(code.parse::<CodeChoice>().unwrap(), CodeChoice::File(path.clone()));
    let out = run(&cfg(Experiment::FidAlpha, &[("alpha", "0.5, 1.5"), ("gamma", "0.1"), ("codes", &format!("6-PSK, {code}"))])).unwrap();
    let rows = out.main_rows();
    assert_eq!(rows.len(), 3);
    let named = rows.iter().find(|r| r.code == "6-PSK" && r.alpha == 1.5).unwrap();
    let filed = rows.last().unwrap();
    assert_eq!(filed.alpha, 1.5);
    assert!((named.fidelity.unwrap() - filed.fidelity.unwrap()).abs() < 1e-8);
}

#[test]
fn rank_deficient_points_are_flagged_not_dropped() {
    let out = run(&cfg(Experiment::FidAlpha, &[("alpha", "0.25, 1.0"), ("gamma", "0.1"), ("codes", "12-PSK")])).unwrap();
    let rows = out.main_rows();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].status, Status::Error);
    assert!(rows[0].fidelity.is_none());
    assert_eq!(rows[1].status, Status::Ok);
}

#[test]
fn output_is_deterministic_apart_from_runtime() {
    let c = cfg(
        Experiment::FidIters,
        &[("alpha", "1.0"), ("gamma", "0.05"), ("codes", "2T, random"), ("seeds", "3, 4"), ("max-iters", "2")],
    );
    let a = run(&c).unwrap();
    let b = run(&c).unwrap();
    assert_eq!(a.main_rows().len(), 3);
    assert_eq!(csv_without_runtime(a.main_rows()), csv_without_runtime(b.main_rows()));
    for (x, y) in a.traces.iter().zip(&b.traces) {
        assert_eq!(x.trace.fidelities(), y.trace.fidelities());
    }
}

#[test]
fn rows_follow_config_order() {
    let out = run(&cfg(Experiment::FidAlpha, &[("alpha", "1.0, 0.5"), ("gamma", "0.1, 0.05"), ("codes", "3-PSK, 2T")])).unwrap();
    let keys: Vec<(f64, String, f64)> = out.main_rows().iter().map(|r| (r.gamma, r.code.clone(), r.alpha)).collect();
    let mut want = Vec::new();
    for g in [0.1, 0.05] {
        for c in ["3-PSK", "2T-qutrit"] {
            for a in [1.0, 0.5] {
                want.push((g, c.to_string(), a));
            }
        }
    }
    assert_eq!(keys, want);
}

#[test]
fn infidelity_uses_best_alpha() {
    let out = run(&cfg(Experiment::InfidGamma, &[("alpha", "0.5, 1.5"), ("gamma", "0, 0.01"), ("codes", "2T")])).unwrap();
    let best = out.main_rows();
    let grid = &out.tables[1].1;
    assert_eq!(best.len(), 2);
    assert_eq!(grid.len(), 4);
    assert!(best[0].infidelity().unwrap() < 1e-6);
    assert_eq!(best[1].alpha, 1.5);
    let manual = best_of(&grid[2..4]);
    assert_eq!(manual.fidelity, best[1].fidelity);
}

#[test]
fn dephasing_zero_is_perfect_and_reports_truncation() {
    let out = run(&cfg(Experiment::Dephasing, &[("alpha", "1.0"), ("gamma", "0, 0.01"), ("codes", "2T, 3-PSK")])).unwrap();
    for r in out.main_rows() {
        assert!(r.tail_bound.unwrap() < 1e-8, "{r:?}");
        assert!(r.fock_dim.unwrap() > 0);
        if r.gamma == 0.0 {
            assert!(r.fidelity.unwrap() >= 1.0 - 1e-6);
        }
    }
    let low = run(&cfg(Experiment::Dephasing, &[("alpha", "1.5"), ("gamma", "0.01"), ("codes", "2T"), ("fock-p", "2")])).unwrap();
    let r = &low.main_rows()[0];
    assert_eq!(r.status, Status::Truncation);
    assert_eq!(r.fock_dim, Some(9));
    assert!(r.fidelity.is_some());
}

#[test]
fn qubit_random_starts_live_in_the_qutrit() {
    let out = run(&cfg(Experiment::Qubits, &[("gamma", "0.01"), ("codes", "2T-qubit, random"), ("seeds", "1"), ("max-iters", "3")])).unwrap();
    let rows = out.main_rows();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r.status, Status::Ok);
        assert!(r.max_decrease.unwrap() < 1e-6);
        assert!(r.fidelity.unwrap() <= 1.0 + 1e-6);
    }
    assert!(rows[0].first_step_gain.unwrap().abs() < 1e-4);
}

#[test]
fn writes_tables_traces_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cfg(Experiment::FidIters, &[("alpha", "1.0"), ("gamma", "0.05"), ("codes", "2T"), ("max-iters", "2"), ("svg", "true")]);
    c.out = dir.path().to_path_buf();
    let out = run(&c).unwrap();
    let files = write_outputs(&c, &out).unwrap();
    assert_eq!(files.len(), 3);
    let trace = std::fs::read_to_string(dir.path().join("traces/fid-iters_2T-qutrit_a1_g0.05.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "iter,half_step,fidelity,solver_residual,seconds");
    assert!(trace.lines().nth(1).unwrap().starts_with("1,R,"));
    assert!(trace.lines().nth(2).unwrap().starts_with("1,E,"));
    let svg = std::fs::read_to_string(dir.path().join("fid-iters_a1_g0.05.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn binary_runs_and_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "alpha = 1.5\ngamma = 0.5  # overridden\ncodes = 2T\n").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_twot"))
        .args(["fid-alpha", "--gamma", "0.01", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("fid-alpha.csv")).unwrap();
    assert!(csv.starts_with("code,alpha,gamma,seed,fidelity,infidelity"));
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("2T-qutrit,1.5,0.01,"));

    let bad = Command::new(env!("CARGO_BIN_EXE_twot"))
        .args(["fid-alpha", "--codes", "5-PSK", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown code"));
}
