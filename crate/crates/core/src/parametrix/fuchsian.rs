//! Hypergeometric three-point parametrices and the four-point jump.
//!
//! The basic object is the solution `G(z)` of
//! `G' = G A(z) - S G / z`, `A(z) = S / z + A1 / (z - 1)`, `G(0) = I`,
//! with `S = diag(s, -s)` and
//! `A1 = [[x, k], [(th^2 - x^2) / k, -x]]`, `x = (inf^2 - th^2 - s^2) / (2 s)`.
//! Then `Phi(z) = (-z)^S G(z)` solves `Phi' = Phi A` with exponents `+-s` at
//! the origin, `+-th` at one and `+-inf` at infinity. Its rows are built from
//! the Kummer solution `(1 - z)^th 2F1(s + th + inf, s + th - inf; 2s; z)`
//! and its partner with `s -> -s`.

use crate::error::{Result, TauError};
use crate::linalg::{c, CMat, C64};
use crate::loops::{Circle, LoopConfig, MatrixLoop, Side};
use crate::plemelj::FactorizationPair;

use super::hyp2f1::hyp2f1;

const RESONANCE_GUARD: f64 = 1e-6;
const REDUCIBLE_TOL: f64 = 1e-14;

/// Exponent data of a 2x2 Fuchsian system with singular points `0`,
/// `position` and infinity.
///
/// `sigma` is the exponent at the normalization point (the origin for the
/// inner parametrix, infinity for the outer one), `theta_mid` the exponent at
/// `position` and `theta_far` the remaining one. `kappa` fixes the free
/// diagonal conjugation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreePointSpec {
    pub sigma: C64,
    pub theta_mid: C64,
    pub theta_far: C64,
    pub kappa: C64,
    pub position: f64,
}

fn near_integer(z: C64) -> bool {
    z.im.abs() < RESONANCE_GUARD && (z.re - z.re.round()).abs() < RESONANCE_GUARD
}

/// Local data of the normalized solution `G`.
#[derive(Clone, Debug)]
struct Normalized {
    s: C64,
    th: C64,
    inf: C64,
    x: C64,
    a12: C64,
    a21: C64,
    trivial: bool,
}

impl Normalized {
    fn new(s: C64, th: C64, inf: C64, kappa: C64) -> Result<Self> {
        let zero = C64::new(0.0, 0.0);
        if th.norm() < REDUCIBLE_TOL
            && ((inf - s).norm() < REDUCIBLE_TOL || (inf + s).norm() < REDUCIBLE_TOL)
        {
            return Ok(Self { s, th, inf, x: zero, a12: zero, a21: zero, trivial: true });
        }
        if kappa.norm() == 0.0 {
            return Err(TauError::Precondition("kappa must be nonzero".into()));
        }
        for (name, v) in [("sigma", s), ("theta_mid", th), ("theta_far", inf)] {
            if near_integer(2.0 * v) {
                return Err(TauError::Resonance(format!(
                    "2 {name} = {} is (nearly) an integer",
                    2.0 * v
                )));
            }
        }
        let x = (inf * inf - th * th - s * s) / (2.0 * s);
        Ok(Self { s, th, inf, x, a12: kappa, a21: (th * th - x * x) / kappa, trivial: false })
    }

    fn a1(&self) -> CMat {
        CMat::from_row_slice(2, 2, &[self.x, self.a12, self.a21, -self.x])
    }

    /// `G(z)` for `|z| < 1` or off the cut `[1, inf)`.
    fn eval(&self, z: C64) -> Result<CMat> {
        if self.trivial {
            return Ok(CMat::identity(2, 2));
        }
        let reducible = self.a21.norm() < REDUCIBLE_TOL * self.a12.norm().max(1.0)
            || self.a12.norm() < REDUCIBLE_TOL;
        if reducible {
            return self.frobenius(z);
        }
        let (g11, g12) = self.row(self.s, self.x, self.a21, z)?;
        let (g22, g21) = self.row(-self.s, -self.x, self.a12, z)?;
        Ok(CMat::from_row_slice(2, 2, &[g11, g12, g21, g22]))
    }

    fn row(&self, s: C64, a11: C64, aoff: C64, z: C64) -> Result<(C64, C64)> {
        let one = C64::new(1.0, 0.0);
        let (a, b, cc) = (s + self.th + self.inf, s + self.th - self.inf, 2.0 * s);
        let f = hyp2f1(a, b, cc, z)?;
        let df = a * b / cc * hyp2f1(a + 1.0, b + 1.0, cc + 1.0, z)?;
        let p = (one - z).powc(self.th);
        let g = p * f;
        let dg = -self.th * p / (one - z) * f + p * df;
        Ok((g, ((z - 1.0) * dg - a11 * g) / aoff))
    }

    /// Taylor series of `G` at the origin, used when `A1` is triangular.
    fn frobenius(&self, z: C64) -> Result<CMat> {
        if z.norm() >= 1.0 {
            return Err(TauError::Precondition(format!(
                "reducible system can only be evaluated inside the unit disk, got z = {z}"
            )));
        }
        let a1 = self.a1();
        let sd = [self.s, -self.s];
        let mut acc = CMat::identity(2, 2);
        let mut total = CMat::identity(2, 2);
        let mut zk = C64::new(1.0, 0.0);
        for k in 1..200_000 {
            let rhs = -(&acc * &a1);
            let gk = CMat::from_fn(2, 2, |i, j| rhs[(i, j)] / (k as f64 + sd[i] - sd[j]));
            zk *= z;
            let term = &gk * zk;
            total += &term;
            acc += gk;
            let size = term.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            if size < 1e-17 && k > 4 {
                return Ok(total);
            }
        }
        Err(TauError::Resolution(format!("Taylor series of G did not converge at z = {z}")))
    }
}

fn diag_pow(base: f64, s: C64) -> CMat {
    let p = C64::new(base, 0.0).powc(s);
    CMat::from_row_slice(2, 2, &[p, C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0) / p])
}

/// Residue of `Phi^{-1} Phi'` at `position`; its eigenvalues are `+-theta_mid`.
pub fn mid_residue(spec: &ThreePointSpec, side: Side) -> Result<CMat> {
    match side {
        Side::Interior => {
            Ok(Normalized::new(spec.sigma, spec.theta_mid, spec.theta_far, spec.kappa)?.a1())
        }
        Side::Exterior => {
            let n = Normalized::new(-spec.sigma, spec.theta_mid, spec.theta_far, spec.kappa)?;
            let a = spec.position;
            Ok(diag_pow(a, -spec.sigma) * n.a1() * diag_pow(a, spec.sigma))
        }
    }
}

/// Evaluates the inner (`G(z / a)`) or outer (`a^-S G~(a / z) a^S`) solution.
pub fn fuchsian_value(spec: &ThreePointSpec, side: Side, z: C64) -> Result<CMat> {
    let a = spec.position;
    match side {
        Side::Interior => {
            let n = Normalized::new(spec.sigma, spec.theta_mid, spec.theta_far, spec.kappa)?;
            n.eval(z / a)
        }
        Side::Exterior => {
            let n = Normalized::new(-spec.sigma, spec.theta_mid, spec.theta_far, spec.kappa)?;
            let g = n.eval(c(a, 0.0) / z)?;
            Ok(diag_pow(a, -spec.sigma) * g * diag_pow(a, spec.sigma))
        }
    }
}

/// Samples a three-point parametrix on `circle` and certifies it as a loop.
///
/// `Side::Interior` gives the factor analytic inside the circle (singular
/// points `position` and infinity outside), `Side::Exterior` the factor
/// analytic outside (origin and `position` inside), normalized to `I` at
/// infinity.
pub fn fuchsian_3pt(
    spec: &ThreePointSpec,
    side: Side,
    circle: Circle,
    cfg: &LoopConfig,
) -> Result<MatrixLoop> {
    let a = spec.position;
    if !(a > 0.0) || !a.is_finite() {
        return Err(TauError::Geometry(format!("singular point must be positive, got {a}")));
    }
    let dist = circle.center.norm();
    match side {
        Side::Interior => {
            if dist + circle.radius >= a || dist >= circle.radius {
                return Err(TauError::Geometry(format!(
                    "circle must enclose 0 and keep {a} outside"
                )));
            }
        }
        Side::Exterior => {
            if dist + a >= circle.radius {
                return Err(TauError::Geometry(format!("circle must enclose 0 and {a}")));
            }
        }
    }
    let values: Vec<CMat> = (0..cfg.samples)
        .map(|j| {
            let z = circle.point(2.0 * std::f64::consts::PI * j as f64 / cfg.samples as f64);
            fuchsian_value(spec, side, z)
        })
        .collect::<Result<_>>()?;
    MatrixLoop::from_sample_values(&values, 2, circle, cfg)
}

/// Exponents and position of the four-point (sixth Painleve) system with
/// singular points `0, t, 1, infinity`.
///
/// `kappa_plus` and `kappa_minus` fix the conjugations of the two
/// three-point solutions and, together with `sigma`, the monodromy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FuchsianSpec {
    pub theta0: C64,
    pub theta_t: C64,
    pub theta1: C64,
    pub theta_inf: C64,
    pub sigma: C64,
    pub kappa_plus: C64,
    pub kappa_minus: C64,
    pub t: f64,
}

impl FuchsianSpec {
    pub fn at(&self, t: f64) -> Self {
        Self { t, ..*self }
    }

    /// The `(0, 1, infinity)` system giving the interior factor.
    pub fn plus_spec(&self) -> ThreePointSpec {
        ThreePointSpec {
            sigma: self.sigma,
            theta_mid: self.theta1,
            theta_far: self.theta_inf,
            kappa: self.kappa_plus,
            position: 1.0,
        }
    }

    /// The `(0, t, infinity)` system giving the exterior factor.
    pub fn minus_spec(&self) -> ThreePointSpec {
        ThreePointSpec {
            sigma: self.sigma,
            theta_mid: self.theta_t,
            theta_far: self.theta0,
            kappa: self.kappa_minus,
            position: self.t,
        }
    }

    /// `r = sqrt(t)` kept at least `margin` away from `t` and `1`.
    pub fn default_radius(&self) -> f64 {
        let margin = 0.05 * (1.0 - self.t).min(self.t);
        self.t.sqrt().clamp(self.t + margin, 1.0 - margin)
    }

    /// `ln t` coefficient relating `det(1 + L)` to the isomonodromic tau
    /// function: `ln tau_JMU = ln tau + exponent * ln t` up to a constant.
    pub fn jmu_exponent(&self) -> C64 {
        self.sigma * self.sigma - self.theta0 * self.theta0 - self.theta_t * self.theta_t
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t < 1.0) {
            return Err(TauError::Precondition(format!("t must lie in (0, 1), got {}", self.t)));
        }
        Ok(())
    }
}

/// Factorization pair `J = Psi_-^{-1} Psi_+` on the circle `|z| = r`,
/// `t < r < 1` (default `sqrt(t)`).
pub fn pvi_jump(spec: &FuchsianSpec, radius: Option<f64>, cfg: &LoopConfig) -> Result<FactorizationPair> {
    spec.validate()?;
    let r = radius.unwrap_or_else(|| spec.default_radius());
    if !(r > spec.t && r < 1.0) {
        return Err(TauError::Geometry(format!("radius {r} must lie in (t, 1) = ({}, 1)", spec.t)));
    }
    let circle = Circle::new(C64::new(0.0, 0.0), r);
    let plus = fuchsian_3pt(&spec.plus_spec(), Side::Interior, circle, cfg)?;
    let minus = fuchsian_3pt(&spec.minus_spec(), Side::Exterior, circle, cfg)?;
    FactorizationPair::new(plus, minus)
}
