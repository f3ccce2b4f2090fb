//! Factorization pairs, mode blocks and families built from a spec.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use widom_tau::linalg::{identity, CMat, C64};
use widom_tau::parametrix::{gd_jump, pvi_jump, schur_modes, FuchsianSpec, GDSpec};
use widom_tau::plemelj::kernel_modes_with_tol;
use widom_tau::{
    build_contour, Circle, CircleContour, FactorizationPair, JumpAssignment, LoopConfig, MatrixLoop, ModeBlock,
};

use crate::error::CliError;
use crate::spec::{Cx, GdSpec, Kind, LoopSpec, MatrixMode, ProblemSpec, PviSpec};

fn c(z: Cx) -> C64 {
    C64::new(z.0[0], z.0[1])
}

fn matrix(m: &MatrixMode) -> CMat {
    let n = m.matrix.len();
    CMat::from_fn(n, n, |i, j| c(m.matrix[i][j]))
}

fn circle(l: &LoopSpec) -> Circle {
    Circle::new(c(l.center), l.radius)
}

/// `(k, A_k)` of one factor, with the identity at `k = 0` unless given.
fn factor_modes(size: usize, modes: &[MatrixMode], scale: f64) -> Vec<(i64, CMat)> {
    let mut out: BTreeMap<i64, CMat> = BTreeMap::new();
    out.insert(0, identity(size));
    for m in modes {
        let a = matrix(m);
        let a = if m.k == 0 { a } else { a * C64::new(scale, 0.0) };
        out.insert(m.k, a);
    }
    out.into_iter().collect()
}

fn random_modes(rng: &mut StdRng, size: usize, order: i64, scale: f64, sign: i64) -> Vec<(i64, CMat)> {
    let mut out = vec![(0, identity(size))];
    for k in 1..=order {
        let s = scale * 0.5f64.powi(k as i32);
        let a = CMat::from_fn(size, size, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * s);
        out.push((sign * k, a));
    }
    out
}

/// The pair of one loop spec; `scale` multiplies the log-symbol or the
/// non-constant factor modes.
pub fn loop_pair(l: &LoopSpec, window: usize, seed: u64, scale: f64) -> Result<FactorizationPair, CliError> {
    let circ = circle(l);
    if !l.log.is_empty() {
        let cfg = LoopConfig::with_window(window);
        let split = |keep: fn(i64) -> bool| -> Vec<(i64, C64)> {
            l.log.iter().filter(|m| keep(m.k)).map(|m| (m.k, c(m.value) * scale)).collect()
        };
        let sum = move |modes: &[(i64, C64)], z: C64| -> C64 {
            let w = circ.to_local(z);
            modes.iter().map(|(k, v)| v * w.powi(*k as i32)).sum()
        };
        let (vp, vm) = (split(|k| k >= 0), split(|k| k < 0));
        let plus = MatrixLoop::from_samples(|z| CMat::from_element(1, 1, sum(&vp, z).exp()), 1, circ, &cfg)?;
        let minus = MatrixLoop::from_samples(|z| CMat::from_element(1, 1, (-sum(&vm, z)).exp()), 1, circ, &cfg)?;
        return Ok(FactorizationPair::new(plus, minus)?);
    }
    let (plus, minus) = match &l.random {
        Some(r) => {
            let mut rng = StdRng::seed_from_u64(seed);
            let p = random_modes(&mut rng, l.size, r.order, r.scale * scale, 1);
            let m = random_modes(&mut rng, l.size, r.order, r.scale * scale, -1);
            (p, m)
        }
        None => (factor_modes(l.size, &l.plus, scale), factor_modes(l.size, &l.minus, scale)),
    };
    let plus = MatrixLoop::from_modes(l.size, circ, window, plus)?;
    let minus = MatrixLoop::from_modes(l.size, circ, window, minus)?;
    Ok(FactorizationPair::new(plus, minus)?)
}

pub fn fuchsian(p: &PviSpec) -> FuchsianSpec {
    FuchsianSpec {
        theta0: c(p.theta0),
        theta_t: c(p.theta_t),
        theta1: c(p.theta1),
        theta_inf: c(p.theta_inf),
        sigma: c(p.sigma),
        kappa_plus: c(p.kappa_plus),
        kappa_minus: c(p.kappa_minus),
        t: p.t,
    }
}

pub fn pvi_radius(p: &PviSpec) -> f64 {
    p.radius.unwrap_or_else(|| fuchsian(p).default_radius())
}

pub fn gd_spec(g: &GdSpec, window: usize) -> GDSpec {
    let mut spec = GDSpec::new(g.rank);
    spec.times = g.times.iter().map(|t| (t.j, c(t.value))).collect();
    spec.x = c(g.x);
    spec.x_modes = g.x_modes.iter().map(|m| (m.k, matrix(m))).collect();
    spec.polynomial = g.polynomial;
    spec.window = window;
    spec
}

/// Single-circle problem: its pair and, for Gelfand-Dickey, the exact modes.
pub fn pair(spec: &ProblemSpec) -> Result<FactorizationPair, CliError> {
    let w = spec.numerics.window;
    match spec.kind {
        Kind::CustomLoop => loop_pair(spec.loop_.as_ref().expect("validated"), w, spec.seed, 1.0),
        Kind::Pvi => {
            let p = spec.pvi.as_ref().expect("validated");
            Ok(pvi_jump(&fuchsian(p), Some(pvi_radius(p)), &LoopConfig::with_window(w))?)
        }
        Kind::GelfandDickey => Ok(gd_jump(&gd_spec(spec.gd.as_ref().expect("validated"), w))?),
        Kind::Multicircle => Err(CliError::Spec("kind: multicircle specs are handled by `tau multicircle`".into())),
    }
}

pub fn modes(spec: &ProblemSpec, pair: &FactorizationPair) -> Result<ModeBlock, CliError> {
    let n = &spec.numerics;
    match (spec.kind, &spec.gd) {
        (Kind::GelfandDickey, Some(g)) => Ok(schur_modes(&gd_spec(g, n.window), n.cutoff)?),
        _ => Ok(kernel_modes_with_tol(pair, n.cutoff, n.tail_tol)?),
    }
}

pub fn contour(spec: &ProblemSpec) -> Result<(CircleContour, JumpAssignment), CliError> {
    let circles: Vec<Circle> = spec.circles.iter().map(circle).collect();
    let contour = build_contour(&circles)?;
    let pairs = spec
        .circles
        .iter()
        .enumerate()
        .map(|(i, l)| loop_pair(l, spec.numerics.window, spec.seed.wrapping_add(i as u64), 1.0))
        .collect::<Result<Vec<_>, _>>()?;
    let jumps = JumpAssignment::new(&contour, pairs)?;
    Ok((contour, jumps))
}

/// A one-parameter family through the spec, for `derivative`.
pub struct Family {
    spec: ProblemSpec,
    param: Param,
}

enum Param {
    Scale,
    PviT { radius: Option<f64> },
    GdX,
    GdTime(usize),
}

impl Family {
    pub fn new(spec: &ProblemSpec, name: &str) -> Result<Self, CliError> {
        let unsupported = || CliError::Spec(format!("--param: `{name}` is not a parameter of kind {:?}", spec.kind));
        let param = match (spec.kind, name) {
            (Kind::CustomLoop, "scale") => Param::Scale,
            (Kind::Pvi, "t") => Param::PviT { radius: spec.pvi.as_ref().and_then(|p| p.radius) },
            (Kind::GelfandDickey, "x") => Param::GdX,
            (Kind::GelfandDickey, s) if s.starts_with('t') => {
                let j: usize = s[1..].parse().map_err(|_| unsupported())?;
                let rank = spec.gd.as_ref().map(|g| g.rank).unwrap_or(0);
                if j == 0 || j.is_multiple_of(rank) {
                    return Err(unsupported());
                }
                Param::GdTime(j)
            }
            _ => return Err(unsupported()),
        };
        Ok(Self { spec: spec.clone(), param })
    }

    pub fn is_pvi(&self) -> bool {
        matches!(self.param, Param::PviT { .. })
    }

    pub fn jmu_exponent(&self) -> C64 {
        self.spec.pvi.as_ref().map(|p| fuchsian(p).jmu_exponent()).unwrap_or_default()
    }

    /// The family around `t0`: circle data that depend on the parameter
    /// (the PVI radius) are frozen at `t0`.
    pub fn at(&self, t0: f64) -> impl Fn(f64) -> widom_tau::Result<FactorizationPair> + '_ {
        let w = self.spec.numerics.window;
        let frozen_radius = match &self.param {
            Param::PviT { radius } => Some(radius.unwrap_or_else(|| {
                let mut p = self.spec.pvi.clone().expect("validated");
                p.t = t0;
                fuchsian(&p).default_radius()
            })),
            _ => None,
        };
        move |t: f64| -> widom_tau::Result<FactorizationPair> {
            match &self.param {
                Param::Scale => loop_pair(self.spec.loop_.as_ref().expect("validated"), w, self.spec.seed, t)
                    .map_err(|e| match e {
                        CliError::Numerical(e) => e,
                        other => widom_tau::TauError::Precondition(other.to_string()),
                    }),
                Param::PviT { .. } => {
                    let p = self.spec.pvi.as_ref().expect("validated");
                    pvi_jump(&fuchsian(p).at(t), frozen_radius, &LoopConfig::with_window(w))
                }
                Param::GdX | Param::GdTime(_) => {
                    let mut g = gd_spec(self.spec.gd.as_ref().expect("validated"), w);
                    match self.param {
                        Param::GdX => g.x = C64::new(t, 0.0),
                        Param::GdTime(j) => {
                            g.times.insert(j, C64::new(t, 0.0));
                        }
                        _ => unreachable!(),
                    }
                    gd_jump(&g)
                }
            }
        }
    }
}
