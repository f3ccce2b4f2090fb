//! The four subcommands.

use std::path::Path;
use std::time::Instant;

use widom_tau::linalg::C64;
use widom_tau::plemelj::kernel_modes_with_tol;
use widom_tau::{bo_gap, modes_below, series_tau, tau_determinant, tau_multicircle, widom_derivative, widom_sequence};

use crate::error::CliError;
use crate::output::{complex, fixed, write_csv, write_record, write_timings, Entry};
use crate::problem::{self, Family};
use crate::spec::{Kind, Method, ProblemSpec};

pub struct Run<'a> {
    pub spec: &'a ProblemSpec,
    pub out: &'a Path,
}

impl Run<'_> {
    fn record(&self, name: &str, entries: &[Entry], err: Option<&CliError>) -> Result<(), CliError> {
        write_record(&self.out.join(format!("{name}.toml")), name, self.spec, entries, err)
    }

    fn timings(&self, name: &str, start: Instant) -> Result<(), CliError> {
        write_timings(&self.out.join(format!("{name}.timings.toml")), &[("seconds".into(), start.elapsed().as_secs_f64())])
    }

    /// Writes a failed record before handing the error back.
    fn fail<T>(&self, name: &str, entries: &[Entry], err: CliError) -> Result<T, CliError> {
        if matches!(err, CliError::Numerical(_)) {
            self.record(name, entries, Some(&err))?;
        }
        Err(err)
    }

    pub fn compute(&self) -> Result<Vec<Entry>, CliError> {
        if self.spec.kind == Kind::Multicircle {
            return self.multicircle();
        }
        let start = Instant::now();
        let mut entries = Vec::new();
        let result = (|| -> Result<(), CliError> {
            let pair = problem::pair(self.spec)?;
            let m = problem::modes(self.spec, &pair)?;
            let n = &self.spec.numerics;
            if matches!(n.method, Method::Determinant | Method::Both) {
                let r = tau_determinant(&m)?;
                entries.push(Entry::new("determinant", r.value, r.cutoff, r.diagnostic));
            }
            if matches!(n.method, Method::Series | Method::Both) {
                let r = series_tau(&m, n.weight)?;
                entries.push(Entry::new(format!("series(W={})", n.weight), r.value, r.cutoff, r.diagnostic));
            }
            Ok(())
        })();
        if let Err(e) = result {
            return self.fail("compute", &entries, e);
        }
        self.record("compute", &entries, None)?;
        self.timings("compute", start)?;
        Ok(entries)
    }

    pub fn multicircle(&self) -> Result<Vec<Entry>, CliError> {
        if self.spec.kind != Kind::Multicircle {
            return Err(CliError::Spec("kind: `tau multicircle` needs kind = \"multicircle\"".into()));
        }
        let start = Instant::now();
        let result = problem::contour(self.spec)
            .and_then(|(k, j)| Ok(tau_multicircle(&k, &j, self.spec.numerics.cutoff)?));
        match result {
            Ok(r) => {
                let entries = vec![Entry::new("multicircle", r.value, r.cutoff, r.diagnostic)];
                self.record("multicircle", &entries, None)?;
                self.timings("multicircle", start)?;
                Ok(entries)
            }
            Err(e) => self.fail("multicircle", &[], e),
        }
    }

    /// Rows `(method, value, residual)` against the determinant.
    pub fn compare(&self) -> Result<String, CliError> {
        let start = Instant::now();
        let n = &self.spec.numerics;
        let pair = problem::pair(self.spec).or_else(|e| self.fail("compare", &[], e))?;
        let m = problem::modes(self.spec, &pair).or_else(|e| self.fail("compare", &[], e))?;
        let tau = tau_determinant(&m).map_err(CliError::from).or_else(|e| self.fail("compare", &[], e))?.value;
        let mut rows = vec![row("determinant", Ok(tau), Ok(0.0))];
        let series = series_tau(&m, n.weight).map(|r| r.value);
        let res = series.clone().map(|v| (v - tau).norm());
        rows.push(row(&format!("series(W={})", n.weight), series, res));
        let jump = pair.jump()?;
        let limit = widom_sequence(&jump, n.toeplitz_n, false).map(|s| s.last());
        let res = limit.clone().map(|v| (v - tau).norm());
        rows.push(row(&format!("toeplitz-limit(n={})", n.toeplitz_n), limit, res));
        let gap = bo_gap(&jump, &pair, n.gap_n, n.cutoff);
        rows.push(row(
            &format!("bo-gap(n={})", n.gap_n),
            gap.clone().map(|g| g.0),
            gap.map(|(l, r)| (l - r).norm()),
        ));
        let body = write_csv(&self.out.join("compare.csv"), self.spec, &["method", "value", "residual"], &rows)?;
        self.timings("compare", start)?;
        Ok(body)
    }

    /// Rows `(param, lhs, rhs, residual[, zeta])` on the grid.
    pub fn derivative(&self, param: &str, grid: &[f64]) -> Result<String, CliError> {
        let start = Instant::now();
        let family = Family::new(self.spec, param)?;
        let n = &self.spec.numerics;
        let h = n.step;
        let count = modes_below(n.cutoff);
        let mut header = vec![param, "lhs", "rhs", "residual"];
        if family.is_pvi() {
            header.push("zeta");
        }
        let mut rows = Vec::new();
        let mut failure = None;
        for &t in grid {
            let f = family.at(t);
            let ln_tau = |s: f64| -> Result<C64, CliError> {
                let pair = f(s)?;
                Ok(tau_determinant(&kernel_modes_with_tol(&pair, n.cutoff, n.tail_tol)?)?.value.ln())
            };
            let lhs = (|| -> Result<C64, CliError> {
                let d = |h: f64| -> Result<C64, CliError> { Ok((ln_tau(t + h)? - ln_tau(t - h)?) / (2.0 * h)) };
                Ok((d(h / 2.0)? * 4.0 - d(h)?) / 3.0)
            })();
            let rhs = widom_derivative(&f, t, count, h).map_err(CliError::from);
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => {
                    let mut cols = vec![fixed(t), complex(l), complex(r), fixed((l - r).norm())];
                    if family.is_pvi() {
                        let zeta = (r + family.jmu_exponent() / t) * (t * (t - 1.0));
                        cols.push(complex(zeta));
                    }
                    rows.push(cols);
                }
                (Err(e), _) | (_, Err(e)) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        let body = write_csv(&self.out.join("derivative.csv"), self.spec, &header, &rows)?;
        self.timings("derivative", start)?;
        match failure {
            Some(e) => self.fail("derivative", &[], e),
            None => Ok(body),
        }
    }
}

fn row(method: &str, value: widom_tau::Result<C64>, residual: widom_tau::Result<f64>) -> Vec<String> {
    match (value, residual) {
        (Ok(v), Ok(r)) => vec![method.to_string(), complex(v), fixed(r)],
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("warning: {method}: {e}");
            vec![method.to_string(), complex(C64::new(f64::NAN, f64::NAN)), fixed(f64::NAN)]
        }
    }
}

/// `a:b:n` as `n` equally spaced points from `a` to `b`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Spec(format!("--grid: expected a:b:n, found `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    match n {
        0 => Err(bad()),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
    }
}
