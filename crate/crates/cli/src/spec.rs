//! Problem specifications read from TOML files.

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A complex number written as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cx(pub [f64; 2]);

impl Cx {
    pub fn re(re: f64) -> Self {
        Cx([re, 0.0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CustomLoop,
    Pvi,
    GelfandDickey,
    Multicircle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Determinant,
    Series,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Mode cutoff `Q`.
    pub cutoff: f64,
    /// Mode window `M` of the sampled loops.
    pub window: usize,
    /// Weight bound `W` of the series.
    pub weight: u64,
    /// Relative tail tolerance of the kernel modes.
    pub tail_tol: f64,
    pub method: Method,
    /// Order of the Toeplitz determinant in `compare`.
    pub toeplitz_n: usize,
    /// Gap size of the Borodin-Okounkov check in `compare`.
    pub gap_n: usize,
    /// Finite-difference step in `derivative`.
    pub step: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            cutoff: 24.0,
            window: 64,
            weight: 6,
            tail_tol: 1e-10,
            method: Method::Determinant,
            toeplitz_n: 32,
            gap_n: 4,
            step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarMode {
    pub k: i64,
    pub value: Cx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixMode {
    pub k: i64,
    /// Rows of `[re, im]` entries.
    pub matrix: Vec<Vec<Cx>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFactors {
    pub scale: f64,
    #[serde(default = "default_order")]
    pub order: i64,
}

fn default_order() -> i64 {
    6
}

fn default_size() -> usize {
    1
}

fn default_radius() -> f64 {
    1.0
}

/// A loop on one circle, given by its factors. With no factor data the
/// loop is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default)]
    pub center: Cx,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Modes of a scalar log-symbol `V`, with `J = exp V`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub log: Vec<ScalarMode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plus: Vec<MatrixMode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub minus: Vec<MatrixMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomFactors>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PviSpec {
    pub theta0: Cx,
    pub theta_t: Cx,
    pub theta1: Cx,
    pub theta_inf: Cx,
    pub sigma: Cx,
    #[serde(default = "unit")]
    pub kappa_plus: Cx,
    #[serde(default = "unit")]
    pub kappa_minus: Cx,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

fn unit() -> Cx {
    Cx::re(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeEntry {
    pub j: usize,
    pub value: Cx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdSpec {
    pub rank: usize,
    #[serde(default)]
    pub x: Cx,
    #[serde(default)]
    pub times: Vec<TimeEntry>,
    #[serde(default)]
    pub x_modes: Vec<MatrixMode>,
    #[serde(default)]
    pub polynomial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, rename = "loop", skip_serializing_if = "Option::is_none")]
    pub loop_: Option<LoopSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pvi: Option<PviSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gd: Option<GdSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub circles: Vec<LoopSpec>,
}

fn spec_error(field: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Spec(format!("{}: {}", field.into(), msg.into()))
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let spec: ProblemSpec = toml::from_str(text).map_err(|e| CliError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = &self.numerics;
        if !(n.cutoff > 0.0) {
            return Err(spec_error("numerics.cutoff", "must be positive"));
        }
        if n.window == 0 {
            return Err(spec_error("numerics.window", "must be positive"));
        }
        if !(n.tail_tol > 0.0) {
            return Err(spec_error("numerics.tail_tol", "must be positive"));
        }
        if !(n.step > 0.0) {
            return Err(spec_error("numerics.step", "must be positive"));
        }
        match self.kind {
            Kind::CustomLoop => {
                let l = self.loop_.as_ref().ok_or_else(|| spec_error("loop", "required for kind custom-loop"))?;
                l.validate("loop")
            }
            Kind::Pvi => {
                let p = self.pvi.as_ref().ok_or_else(|| spec_error("pvi", "required for kind pvi"))?;
                if !(p.t > 0.0 && p.t < 1.0) {
                    return Err(spec_error("pvi.t", "must lie in (0, 1)"));
                }
                if let Some(r) = p.radius {
                    if !(r > p.t && r < 1.0) {
                        return Err(spec_error("pvi.radius", "must lie in (t, 1)"));
                    }
                }
                Ok(())
            }
            Kind::GelfandDickey => {
                let g = self.gd.as_ref().ok_or_else(|| spec_error("gd", "required for kind gelfand-dickey"))?;
                if g.rank < 2 {
                    return Err(spec_error("gd.rank", "must be at least 2"));
                }
                for (i, t) in g.times.iter().enumerate() {
                    if t.j == 0 || t.j % g.rank == 0 {
                        return Err(spec_error(format!("gd.times[{i}].j"), "must be positive and not a multiple of rank"));
                    }
                }
                for (i, m) in g.x_modes.iter().enumerate() {
                    let field = format!("gd.x_modes[{i}]");
                    if m.k >= 0 {
                        return Err(spec_error(format!("{field}.k"), "must be negative"));
                    }
                    check_matrix(&m.matrix, g.rank, &format!("{field}.matrix"))?;
                }
                Ok(())
            }
            Kind::Multicircle => {
                if self.circles.is_empty() {
                    return Err(spec_error("circles", "at least one circle is required for kind multicircle"));
                }
                let size = self.circles[0].size;
                for (i, c) in self.circles.iter().enumerate() {
                    let field = format!("circles[{i}]");
                    c.validate(&field)?;
                    if c.size != size {
                        return Err(spec_error(format!("{field}.size"), "all circles need the same size"));
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_matrix(m: &[Vec<Cx>], size: usize, field: &str) -> Result<(), CliError> {
    if m.len() != size {
        return Err(spec_error(field, format!("expected {size} rows, found {}", m.len())));
    }
    for (r, row) in m.iter().enumerate() {
        if row.len() != size {
            return Err(spec_error(format!("{field}[{r}]"), format!("expected {size} entries, found {}", row.len())));
        }
    }
    Ok(())
}

impl LoopSpec {
    fn validate(&self, field: &str) -> Result<(), CliError> {
        if self.size == 0 {
            return Err(spec_error(format!("{field}.size"), "must be positive"));
        }
        if !(self.radius > 0.0) {
            return Err(spec_error(format!("{field}.radius"), "must be positive"));
        }
        let sources = [!self.log.is_empty(), !self.plus.is_empty() || !self.minus.is_empty(), self.random.is_some()];
        if sources.iter().filter(|s| **s).count() > 1 {
            return Err(spec_error(field, "give only one of log, plus/minus, random"));
        }
        if !self.log.is_empty() && self.size != 1 {
            return Err(spec_error(format!("{field}.log"), "only scalar loops (size = 1) take a log-symbol"));
        }
        for (name, modes, plus) in [("plus", &self.plus, true), ("minus", &self.minus, false)] {
            for (i, m) in modes.iter().enumerate() {
                let f = format!("{field}.{name}[{i}]");
                if (plus && m.k < 0) || (!plus && m.k > 0) {
                    return Err(spec_error(format!("{f}.k"), format!("mode {} does not belong to the {name} factor", m.k)));
                }
                check_matrix(&m.matrix, self.size, &format!("{f}.matrix"))?;
            }
        }
        if let Some(r) = &self.random {
            if !(r.scale > 0.0) || r.order < 1 {
                return Err(spec_error(format!("{field}.random"), "scale must be positive and order at least 1"));
            }
        }
        Ok(())
    }
}
