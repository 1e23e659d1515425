//! Experiment configuration: defaults per experiment, `key = value` files, and flag overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    FidIters,
    FidAlpha,
    InfidGamma,
    Qubits,
    Dephasing,
    Audit,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::FidIters,
        Experiment::FidAlpha,
        Experiment::InfidGamma,
        Experiment::Qubits,
        Experiment::Dephasing,
        Experiment::Audit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::FidIters => "fid-iters",
            Experiment::FidAlpha => "fid-alpha",
            Experiment::InfidGamma => "infid-gamma",
            Experiment::Qubits => "qubits",
            Experiment::Dephasing => "dephasing",
            Experiment::Audit => "audit",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub codes: Vec<String>,
    pub seeds: Vec<u64>,
    pub tol: f64,
    pub max_iters: usize,
    /// Reduced Fock truncation; chosen from the tail bound when absent.
    pub fock_p: Option<usize>,
    pub out: PathBuf,
    pub svg: bool,
    /// Run full alternation after the recovery-only step (fid-alpha).
    pub alternate: bool,
}

pub const MAX_ALPHA: f64 = 8.0;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn step_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| round12(start + i as f64 * step)).collect()
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let psk = ["2T-qutrit", "3-PSK", "6-PSK", "9-PSK", "12-PSK"];
        let base = ExperimentConfig {
            experiment,
            alpha: vec![1.5],
            gamma: vec![0.1, 0.01],
            codes: names(&["2T-qutrit"]),
            seeds: (1..=5).collect(),
            tol: 1e-6,
            max_iters: 50,
            fock_p: None,
            out: PathBuf::from("out"),
            svg: false,
            alternate: false,
        };
        match experiment {
            Experiment::FidIters => ExperimentConfig { codes: names(&["2T-qutrit", "random"]), ..base },
            Experiment::FidAlpha => ExperimentConfig { alpha: step_grid(0.25, 2.5, 0.25), codes: names(&psk), ..base },
            Experiment::InfidGamma => ExperimentConfig {
                alpha: step_grid(0.25, 2.0, 0.25),
                gamma: vec![0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3],
                codes: names(&psk),
                ..base
            },
            Experiment::Qubits => ExperimentConfig {
                gamma: vec![0.01],
                codes: names(&["2T-qubit", "cat-c0c2", "cat-c1c3", "random"]),
                ..base
            },
            Experiment::Dephasing => ExperimentConfig {
                alpha: step_grid(0.25, 2.0, 0.25),
                gamma: vec![0.01],
                codes: names(&psk),
                ..base
            },
            Experiment::Audit => ExperimentConfig { codes: Vec::new(), ..base },
        }
    }

    /// Set one key from a config file or flag; keys mirror the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "experiment" => self.experiment = value.parse()?,
            "alpha" => self.alpha = parse_grid(value)?,
            "gamma" => self.gamma = parse_grid(value)?,
            "codes" => self.codes = parse_list(value),
            "seeds" => self.seeds = parse_seeds(value)?,
            "tol" => self.tol = parse_num(&key, value)?,
            "max-iters" => self.max_iters = parse_num(&key, value)?,
            "fock-p" => {
                self.fock_p = if value.eq_ignore_ascii_case("auto") { None } else { Some(parse_num(&key, value)?) }
            }
            "out" => self.out = PathBuf::from(value),
            "svg" => self.svg = parse_bool(&key, value)?,
            "alternate" => self.alternate = parse_bool(&key, value)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.experiment == Experiment::Audit {
            return Ok(());
        }
        if self.alpha.is_empty() || self.gamma.is_empty() {
            return Err(CliError::Config("alpha and gamma grids must be nonempty".into()));
        }
        if let Some(a) = self.alpha.iter().find(|&&a| !(a > 0.0 && a <= MAX_ALPHA)) {
            return Err(CliError::Config(format!("alpha {a} outside (0, {MAX_ALPHA}]")));
        }
        if let Some(g) = self.gamma.iter().find(|&&g| !(0.0..=twot::channels::MAX_GAMMA).contains(&g)) {
            return Err(CliError::Config(format!("gamma {g} outside [0, {}]", twot::channels::MAX_GAMMA)));
        }
        if self.codes.is_empty() {
            return Err(CliError::Config("code list must be nonempty".into()));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Config("tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(CliError::Config("max-iters must be positive".into()));
        }
        if self.codes.iter().any(|c| c == "random") && self.seeds.is_empty() {
            return Err(CliError::Config("random starts need at least one seed".into()));
        }
        Ok(())
    }
}

/// `key = value` lines; `#` starts a comment; blank lines ignored.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
        if k.trim().is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", n + 1)));
        }
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("invalid value `{v}` for {key}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("invalid boolean `{v}` for {key}"))),
    }
}

pub fn parse_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// Comma list of numbers, `start:stop:step`, or `log:start:stop:count`.
pub fn parse_grid(v: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("invalid grid `{v}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = v.split(':').collect();
    let grid = match parts.as_slice() {
        ["log", a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            if !(a > 0.0 && b > 0.0) || n == 0 {
                return Err(bad());
            }
            if n == 1 {
                vec![a]
            } else {
                (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        let x = (a.ln() * (1.0 - t) + b.ln() * t).exp();
                        let scale = 10f64.powi(-(x.log10().floor() as i32) + 6);
                        (x * scale).round() / scale
                    })
                    .collect()
            }
        }
        [a, b, s] => {
            let (a, b, s) = (num(a)?, num(b)?, num(s)?);
            if !(s > 0.0) || b < a {
                return Err(bad());
            }
            step_grid(a, b, s)
        }
        [single] => single.split(',').filter(|x| !x.trim().is_empty()).map(num).collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() || grid.iter().any(|x: &f64| !x.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}

/// Comma list of seeds or a half-open range `a..b`.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Config(format!("invalid seed list `{v}`"));
    if let Some((a, b)) = v.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..b).collect());
    }
    parse_list(v).iter().map(|s| s.parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.25:1:0.25").unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("1.5").unwrap(), vec![1.5]);
        assert_eq!(parse_grid("0.1, 0.01").unwrap(), vec![0.1, 0.01]);
        let g = parse_grid("log:0.001:0.1:3").unwrap();
        assert_eq!(g, vec![0.001, 0.01, 0.1]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seeds("1..4").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("7, 9").unwrap(), vec![7, 9]);
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn config_text() {
        let kv = parse_config_text("# comment\nalpha = 1.0, 1.5  # trailing\n\nsvg=true\n").unwrap();
        assert_eq!(kv, vec![("alpha".into(), "1.0, 1.5".into()), ("svg".into(), "true".into())]);
        assert!(parse_config_text("novalue").is_err());
    }

    #[test]
    fn default_fig_grid() {
        let c = ExperimentConfig::defaults(Experiment::FidAlpha);
        assert_eq!(c.alpha.len(), 10);
        assert_eq!(c.alpha[9], 2.5);
        c.validate().unwrap();
    }

    #[test]
    fn validation_rejects_out_of_range() {
        let mut c = ExperimentConfig::defaults(Experiment::FidAlpha);
        c.set("gamma", "0.995").unwrap();
        assert!(c.validate().is_err());
        c.set("gamma", "0.1").unwrap();
        c.set("alpha", "9").unwrap();
        assert!(c.validate().is_err());
        assert!(c.set("bogus", "1").is_err());
    }
}
