//! Number formatting and result files.

use std::fs;
use std::path::Path;

use serde::Serialize;
use widom_tau::C64;

use crate::error::CliError;
use crate::spec::{Cx, ProblemSpec};

const DIGITS: i32 = 17;

/// Fixed notation with 17 significant digits.
pub fn fixed(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}").to_lowercase();
    }
    if x == 0.0 {
        return format!("{:.*}", (DIGITS - 1) as usize, 0.0);
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x.abs());
    let exp: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// `re+imj` in fixed notation.
pub fn complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}j", fixed(z.re), fixed(z.im.abs()))
}

pub fn cx(z: C64) -> Cx {
    Cx([z.re, z.im])
}

#[derive(Debug, Serialize)]
pub struct Entry {
    pub method: String,
    pub value: Cx,
    pub text: String,
    pub cutoff: f64,
    pub diagnostic: f64,
}

impl Entry {
    pub fn new(method: impl Into<String>, value: C64, cutoff: f64, diagnostic: f64) -> Self {
        Self { method: method.into(), value: cx(value), text: complex(value), cutoff, diagnostic }
    }
}

#[derive(Debug, Serialize)]
struct Record<'a> {
    version: &'static str,
    command: &'a str,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    results: &'a [Entry],
    spec: &'a ProblemSpec,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Structured record of a scalar result, embedding the resolved spec.
pub fn write_record(
    path: &Path,
    command: &str,
    spec: &ProblemSpec,
    results: &[Entry],
    error: Option<&CliError>,
) -> Result<(), CliError> {
    let record = Record {
        version: widom_tau::VERSION,
        command,
        status: if error.is_some() { "failed" } else { "ok" },
        error: error.map(|e| e.to_string()),
        results,
        spec,
    };
    let text = toml::to_string(&record).map_err(|e| CliError::Io(e.to_string()))?;
    write(path, &text)
}

/// CSV with the version and resolved spec as leading `#` comment lines.
pub fn write_csv(path: &Path, spec: &ProblemSpec, header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let spec_text = toml::to_string(spec).map_err(|e| CliError::Io(e.to_string()))?;
    let mut out = format!("# widom-tau {}\n", widom_tau::VERSION);
    for line in spec_text.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    let mut body = header.join(",");
    body.push('\n');
    for r in rows {
        body.push_str(&r.join(","));
        body.push('\n');
    }
    out.push_str(&body);
    write(path, &out)?;
    Ok(body)
}

/// Wall-clock timings, kept apart from the result so results stay byte-identical.
pub fn write_timings(path: &Path, timings: &[(String, f64)]) -> Result<(), CliError> {
    let mut text = String::new();
    for (name, secs) in timings {
        text.push_str(&format!("{name} = {secs}\n"));
    }
    write(path, &text)
}
