//! Experiment manifests: a flat `key = value` text format that round-trips
//! losslessly, so a run can be reproduced from the file alone.

use crate::integrator::RunConfig;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("line {0}: unknown key `{1}`")]
    UnknownKey(usize, String),
    #[error("line {0}: bad value for `{1}`: {2}")]
    BadValue(usize, String, String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

/// Everything needed to reproduce one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentManifest {
    pub method: String,
    pub problem: String,
    pub h: f64,
    pub t_final: f64,
    pub stride: usize,
    pub output: String,
    pub seed: u64,
    pub compensated: bool,
    pub newton_tol: f64,
}

impl ExperimentManifest {
    pub fn new(method: &str, problem: &str, h: f64, t_final: f64) -> Self {
        ExperimentManifest {
            method: method.to_string(),
            problem: problem.to_string(),
            h,
            t_final,
            stride: 1,
            output: format!("{method}_{problem}.csv"),
            seed: 42,
            compensated: true,
            newton_tol: 1e-13,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            method: self.method.clone(),
            h: self.h,
            t_final: self.t_final,
            sample_stride: self.stride,
            newton_tol: self.newton_tol,
            newton_max_iter: 50,
            compensated: self.compensated,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let mut method = None;
        let mut problem = None;
        let mut h = None;
        let mut t_final = None;
        let mut stride = 1usize;
        let mut output = None;
        let mut seed = 42u64;
        let mut compensated = true;
        let mut newton_tol = 1e-13;

        fn value<T: FromStr>(
            lineno: usize,
            key: &str,
            raw: &str,
        ) -> Result<T, ManifestError>
        where
            T::Err: fmt::Display,
        {
            raw.parse().map_err(|e: T::Err| {
                ManifestError::BadValue(lineno, key.to_string(), e.to_string())
            })
        }

        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or(ManifestError::Syntax(lineno))?;
            let key = key.trim();
            let raw = raw.trim();
            match key {
                "method" => method = Some(raw.to_string()),
                "problem" => problem = Some(raw.to_string()),
                "h" => h = Some(value(lineno, key, raw)?),
                "T" => t_final = Some(value(lineno, key, raw)?),
                "stride" => stride = value(lineno, key, raw)?,
                "out" => output = Some(raw.to_string()),
                "seed" => seed = value(lineno, key, raw)?,
                "compensated" => compensated = value(lineno, key, raw)?,
                "newton_tol" => newton_tol = value(lineno, key, raw)?,
                _ => return Err(ManifestError::UnknownKey(lineno, key.to_string())),
            }
        }
        let method = method.ok_or(ManifestError::Missing("method"))?;
        let problem = problem.ok_or(ManifestError::Missing("problem"))?;
        let output = output.unwrap_or_else(|| format!("{method}_{problem}.csv"));
        Ok(ExperimentManifest {
            method,
            problem,
            h: h.ok_or(ManifestError::Missing("h"))?,
            t_final: t_final.ok_or(ManifestError::Missing("T"))?,
            stride,
            output,
            seed,
            compensated,
            newton_tol,
        })
    }
}

impl fmt::Display for ExperimentManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // f64 Display is shortest round-trip, so parse(to_string) is
        // lossless.
        writeln!(f, "method = {}", self.method)?;
        writeln!(f, "problem = {}", self.problem)?;
        writeln!(f, "h = {}", self.h)?;
        writeln!(f, "T = {}", self.t_final)?;
        writeln!(f, "stride = {}", self.stride)?;
        writeln!(f, "out = {}", self.output)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "compensated = {}", self.compensated)?;
        writeln!(f, "newton_tol = {}", self.newton_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_lossless() {
        let mut m = ExperimentManifest::new("4124B", "kepler", 0.01, 1000.0);
        m.h = 0.1 + 0.2; // not exactly representable in decimal
        m.newton_tol = 3.0e-14;
        m.stride = 7;
        m.seed = 123456789;
        m.compensated = false;
        let text = m.to_string();
        let back = ExperimentManifest::parse(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn parse_rejects_unknown_keys() {
        let err = ExperimentManifest::parse("method = x\nproblem = y\nh = 1\nT = 2\nbogus = 3")
            .unwrap_err();
        assert!(matches!(err, ManifestError::UnknownKey(5, _)));
    }

    #[test]
    fn parse_requires_core_keys() {
        let err = ExperimentManifest::parse("method = x\nh = 1\nT = 2").unwrap_err();
        assert!(matches!(err, ManifestError::Missing("problem")));
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let m = ExperimentManifest::parse(
            "# a comment\n\nmethod = 4123A\nproblem = tlv\nh = 0.1\nT = 10\n",
        )
        .unwrap();
        assert_eq!(m.method, "4123A");
        assert_eq!(m.stride, 1);
    }
}
