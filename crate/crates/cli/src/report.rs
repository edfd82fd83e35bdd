//! Report records and their JSON/CSV writers.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use rank1sft::spaces::Preset;
use rank1sft::{MultiplicityDatum, SpaceGeometry};

use crate::config::Space;

/// One verified property.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub target: String,
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    /// Passes when `measured <= tolerance`.
    pub fn bounded(name: impl Into<String>, target: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            target: target.into(),
            measured: Some(measured),
            tolerance: Some(tolerance),
            pass: measured <= tolerance,
            error: None,
        }
    }

    pub fn failed(name: impl Into<String>, target: impl Into<String>, tolerance: Option<f64>, error: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            target: target.into(),
            measured: None,
            tolerance,
            pass: false,
            error: Some(error.to_string()),
        }
    }
}

/// Flat CSV form of a check.
#[derive(Serialize)]
struct CheckRow<'a> {
    name: &'a str,
    target: &'a str,
    measured: Option<f64>,
    tolerance: Option<f64>,
    pass: bool,
    error: Option<&'a str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceSummary {
    pub preset: Option<String>,
    pub note: Option<String>,
    pub multiplicities: MultiplicityDatum,
    pub rho: f64,
    pub mu: f64,
}

impl SpaceSummary {
    pub fn new(space: &Space) -> Self {
        let g: &SpaceGeometry = &space.geometry;
        let (preset, note) = match &space.preset {
            Some(Preset { name, note, .. }) => (Some(name.clone()), Some(note.clone())),
            None => (None, None),
        };
        Self {
            preset,
            note,
            multiplicities: g.multiplicities,
            rho: g.rho,
            mu: g.mu(),
        }
    }
}

/// A sampled complex value; `value_*` are empty and `status` holds the
/// error when the point failed.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub t: Option<f64>,
    pub w: usize,
    pub value_re: Option<f64>,
    pub value_im: Option<f64>,
    pub status: String,
}

impl Row {
    pub fn new(lambda: Complex64, t: Option<f64>, w: usize, value: Result<Complex64, String>) -> Self {
        let (v, status) = match value {
            Ok(v) => (Some(v), "ok".to_string()),
            Err(e) => (None, e),
        };
        Self {
            lambda_re: lambda.re,
            lambda_im: lambda.im,
            t,
            w,
            value_re: v.map(|v| v.re),
            value_im: v.map(|v| v.im),
            status,
        }
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Reconstructed value next to the input function.
#[derive(Debug, Clone, Serialize)]
pub struct InvertRow {
    pub t: f64,
    pub w: usize,
    pub value_re: Option<f64>,
    pub value_im: Option<f64>,
    pub reference_re: f64,
    pub reference_im: f64,
    pub status: String,
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_csv<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_checks_csv(out: &mut dyn Write, checks: &[CheckResult]) -> anyhow::Result<()> {
    let rows: Vec<CheckRow> = checks
        .iter()
        .map(|c| CheckRow {
            name: &c.name,
            target: &c.target,
            measured: c.measured,
            tolerance: c.tolerance,
            pass: c.pass,
            error: c.error.as_deref(),
        })
        .collect();
    write_csv(out, &rows)
}

pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_rows_have_empty_values() {
        let mut buf = Vec::new();
        let rows = [
            Row::new(Complex64::new(0.0, 1.0), Some(0.5), 0, Ok(Complex64::new(1.5, -2.0))),
            Row::new(Complex64::new(-1.0, 0.0), None, 1, Err("pole, at -1".into())),
        ];
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "lambda_re,lambda_im,t,w,value_re,value_im,status");
        assert_eq!(lines[1], "0.0,1.0,0.5,0,1.5,-2.0,ok");
        assert_eq!(lines[2], "-1.0,0.0,,1,,,\"pole, at -1\"");
    }

    #[test]
    fn bounded_checks() {
        assert!(CheckResult::bounded("a", "b", 1e-7, 1e-6).pass);
        assert!(!CheckResult::bounded("a", "b", f64::NAN, 1e-6).pass);
        let f = CheckResult::failed("a", "b", None, "boom");
        assert!(!f.pass && f.measured.is_none());
    }
}
