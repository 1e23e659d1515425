//! Code names accepted on the command line and the plain-text CodeSpec format.
//!
//! Format, one record per line, `#` comments allowed:
//! ```text
//! label 2T-qutrit
//! alpha 1.5
//! modes 2
//! amplitude <c> <c>        (one line per constellation point, one value per mode)
//! logical <c> <c> ...      (one line per logical state, coherent-basis coefficients, normalized on read)
//! ```
//! Complex values are written `re+imj` with `.` as decimal separator.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use twot::c64;
use twot::codes::{four_cat_qubits, psk_qutrit, two_t_qubit, two_t_qutrit, CodeSpec};
use twot::coherent::{Constellation, Span, SpanState, DEFAULT_EPS_RANK};

use crate::CliError;

/// Largest logical Gram deviation accepted when reading a code file.
pub const FILE_ORTHONORMALITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeChoice {
    TwoTQutrit,
    TwoTQubit,
    /// 3n-component PSK qutrit.
    Psk(usize),
    CatC0C2,
    CatC1C3,
    Random,
    File(PathBuf),
}

impl FromStr for CodeChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix('@') {
            return Ok(CodeChoice::File(PathBuf::from(path)));
        }
        match s {
            "2T" | "2T-qutrit" => return Ok(CodeChoice::TwoTQutrit),
            "2T-qubit" => return Ok(CodeChoice::TwoTQubit),
            "cat-c0c2" => return Ok(CodeChoice::CatC0C2),
            "cat-c1c3" => return Ok(CodeChoice::CatC1C3),
            "random" => return Ok(CodeChoice::Random),
            _ => {}
        }
        if let Some(m) = s.strip_suffix("-PSK").and_then(|m| m.parse::<usize>().ok()) {
            if m > 0 && m % 3 == 0 {
                return Ok(CodeChoice::Psk(m / 3));
            }
        }
        Err(CliError::Config(format!("unknown code `{s}`")))
    }
}

impl fmt::Display for CodeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeChoice::TwoTQutrit => f.write_str("2T-qutrit"),
            CodeChoice::TwoTQubit => f.write_str("2T-qubit"),
            CodeChoice::Psk(n) => write!(f, "{}-PSK", 3 * n),
            CodeChoice::CatC0C2 => f.write_str("cat-c0c2"),
            CodeChoice::CatC1C3 => f.write_str("cat-c1c3"),
            CodeChoice::Random => f.write_str("random"),
            CodeChoice::File(p) => write!(f, "@{}", p.display()),
        }
    }
}

impl CodeChoice {
    pub fn parse_list(names: &[String]) -> Result<Vec<CodeChoice>, CliError> {
        names.iter().map(|n| n.parse()).collect()
    }

    pub fn build(&self, alpha: f64) -> Result<CodeSpec, CliError> {
        Ok(match self {
            CodeChoice::TwoTQutrit => two_t_qutrit(alpha)?,
            CodeChoice::TwoTQubit => two_t_qubit(alpha)?,
            CodeChoice::Psk(n) => psk_qutrit(alpha, *n)?,
            CodeChoice::CatC0C2 => four_cat_qubits(alpha)?.qubit_02,
            CodeChoice::CatC1C3 => four_cat_qubits(alpha)?.qubit_13,
            CodeChoice::File(p) => read_codespec(&std::fs::read_to_string(p)?)?,
            CodeChoice::Random => {
                return Err(CliError::Config("random encodings have no fixed code".into()));
            }
        })
    }

    /// Whether α comes from the code file rather than the grid.
    pub fn fixed_alpha(&self) -> bool {
        matches!(self, CodeChoice::File(_))
    }
}

pub fn format_complex(z: c64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", z.re, sign, z.im.abs())
}

pub fn parse_complex(s: &str) -> Result<c64, CliError> {
    let bad = || CliError::Config(format!("invalid complex value `{s}`"));
    let body = s.trim().strip_suffix('j').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(c64::new(re, im))
}

pub fn write_codespec(code: &CodeSpec) -> String {
    let c = &code.span.constellation;
    let mut out = String::new();
    out.push_str(&format!("label {}\n", code.label));
    out.push_str(&format!("alpha {}\n", code.alpha));
    out.push_str(&format!("modes {}\n", c.n_modes));
    for a in &c.amplitudes {
        let vals: Vec<String> = a.iter().map(|&z| format_complex(z)).collect();
        out.push_str(&format!("amplitude {}\n", vals.join(" ")));
    }
    for s in &code.logical {
        let vals: Vec<String> = s.to_coherent().coeffs.iter().map(|&z| format_complex(z)).collect();
        out.push_str(&format!("logical {}\n", vals.join(" ")));
    }
    out
}

pub fn read_codespec(text: &str) -> Result<CodeSpec, CliError> {
    let mut label = None;
    let mut alpha = None;
    let mut modes = None;
    let mut amplitudes = Vec::new();
    let mut logical = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let err = |m: &str| CliError::Config(format!("code file line {}: {m}", n + 1));
        match key {
            "label" => label = Some(rest.to_string()),
            "alpha" => alpha = Some(rest.parse::<f64>().map_err(|_| err("invalid alpha"))?),
            "modes" => modes = Some(rest.parse::<usize>().map_err(|_| err("invalid mode count"))?),
            "amplitude" => amplitudes.push(rest.split_whitespace().map(parse_complex).collect::<Result<Vec<_>, _>>()?),
            "logical" => logical.push(rest.split_whitespace().map(parse_complex).collect::<Result<Vec<_>, _>>()?),
            _ => return Err(err(&format!("unknown record `{key}`"))),
        }
    }
    let missing = |what: &str| CliError::Config(format!("code file missing `{what}`"));
    let label = label.ok_or_else(|| missing("label"))?;
    let alpha = alpha.ok_or_else(|| missing("alpha"))?;
    let modes = modes.ok_or_else(|| missing("modes"))?;
    let span = Span::new(Constellation::new(modes, amplitudes)?, DEFAULT_EPS_RANK)?;
    let states = logical
        .into_iter()
        .map(|c| SpanState::coherent(&span, c).map(|s| s.normalized()))
        .collect::<Result<Vec<_>, _>>()?;
    let code = CodeSpec::new(label, alpha, span, states)?;
    let defect = code.orthonormality_defect();
    if defect > FILE_ORTHONORMALITY_TOL {
        return Err(CliError::Config(format!("logical states not orthonormal (deviation {defect:.2e})")));
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trip() {
        for z in [c64::new(1.5, -2.0), c64::new(-1e-7, 3.25e12), c64::new(0.0, 0.0), c64::new(-0.1, -0.2)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
        assert_eq!(parse_complex("2e-3-1E+2j").unwrap(), c64::new(2e-3, -100.0));
        assert!(parse_complex("1.0").is_err());
    }

    #[test]
    fn names() {
        assert_eq!("12-PSK".parse::<CodeChoice>().unwrap(), CodeChoice::Psk(4));
        assert_eq!("2T".parse::<CodeChoice>().unwrap(), CodeChoice::TwoTQutrit);
        assert!("4-PSK".parse::<CodeChoice>().is_err());
        assert_eq!(CodeChoice::Psk(2).to_string(), "6-PSK");
    }
}
