//! Gauss hypergeometric function with complex parameters.

use std::f64::consts::PI;

use crate::error::{Result, TauError};
use crate::linalg::C64;

const RING: f64 = 0.8;
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn near_nonpositive_integer(z: C64) -> bool {
    z.im.abs() < 1e-14 && z.re <= 0.5 && (z.re - z.re.round()).abs() < 1e-14
}

/// `ln Gamma(z)` (Lanczos, with reflection for `Re z < 1/2`).
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        let s = (C64::new(PI, 0.0) * z).sin();
        return C64::new(PI, 0.0).ln() - s.ln() - ln_gamma(C64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// `1 / Gamma(z)`, exactly zero at the poles.
pub fn rgamma(z: C64) -> C64 {
    if near_nonpositive_integer(z) {
        return C64::new(0.0, 0.0);
    }
    (-ln_gamma(z)).exp()
}

pub fn gamma(z: C64) -> C64 {
    ln_gamma(z).exp()
}

fn is_integer(z: C64) -> bool {
    z.im.abs() < 1e-12 && (z.re - z.re.round()).abs() < 1e-12
}

/// Power series, summed until the terms drop below rounding.
fn series(a: C64, b: C64, c: C64, z: C64) -> Result<C64> {
    let max_terms = if z.norm() <= 0.7 { 2_000 } else { 200_000 };
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..max_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && n > 2 {
            return Ok(sum);
        }
        if term.norm() == 0.0 {
            return Ok(sum);
        }
    }
    Err(TauError::Resolution(format!("hypergeometric series did not converge at z = {z}")))
}

/// `2F1(a, b; c; z)` on the principal branch, cut along `[1, inf)`.
pub fn hyp2f1(a: C64, b: C64, c: C64, z: C64) -> Result<C64> {
    if near_nonpositive_integer(c) {
        return Err(TauError::ExceptionalParameters(format!("c = {c} is a non-positive integer")));
    }
    let one = C64::new(1.0, 0.0);
    if z.norm() == 0.0 {
        return Ok(one);
    }
    if z.im == 0.0 && z.re >= 1.0 {
        if z.re == 1.0 && (c - a - b).re > 0.0 {
            return Ok(gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b));
        }
        return Err(TauError::Precondition(format!("z = {z} lies on the branch cut [1, inf)")));
    }
    if z.norm() <= 0.7 {
        return series(a, b, c, z);
    }
    let moduli = [
        z.norm(),
        (z / (z - 1.0)).norm(),
        (one - z).norm(),
        (one / z).norm(),
        (one / (one - z)).norm(),
    ];
    if moduli.iter().cloned().fold(f64::INFINITY, f64::min) >= RING {
        return continue_ode(a, b, c, z);
    }
    // candidates: (modulus of the transformed argument, transform id)
    let cab_int = is_integer(c - a - b);
    let ab_int = is_integer(a - b);
    let mut options: Vec<(f64, u8)> = vec![(moduli[0], 0), (moduli[1], 1)];
    if !cab_int {
        options.push((moduli[2], 2));
    }
    if !ab_int {
        options.push((moduli[3], 3));
        options.push((moduli[4], 4));
    }
    options.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (modulus, which) = options[0];
    if modulus >= 1.0 {
        return Err(TauError::ExceptionalParameters(format!(
            "integer c - a - b or a - b leaves no convergent transformation at z = {z}"
        )));
    }
    match which {
        0 => series(a, b, c, z),
        1 => Ok((one - z).powc(-a) * series(a, c - b, c, z / (z - 1.0))?),
        2 => {
            let w = one - z;
            let t1 = gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)
                * series(a, b, a + b - c + 1.0, w)?;
            let t2 = gamma(c) * gamma(a + b - c) * rgamma(a) * rgamma(b)
                * w.powc(c - a - b)
                * series(c - a, c - b, c - a - b + 1.0, w)?;
            Ok(t1 + t2)
        }
        3 => {
            let w = one / z;
            let mz = -z;
            let t1 = gamma(c) * gamma(b - a) * rgamma(b) * rgamma(c - a)
                * mz.powc(-a)
                * series(a, a - c + 1.0, a - b + 1.0, w)?;
            let t2 = gamma(c) * gamma(a - b) * rgamma(a) * rgamma(c - b)
                * mz.powc(-b)
                * series(b, b - c + 1.0, b - a + 1.0, w)?;
            Ok(t1 + t2)
        }
        _ => {
            let w = one / (one - z);
            let t1 = gamma(c) * gamma(b - a) * rgamma(b) * rgamma(c - a)
                * (one - z).powc(-a)
                * series(a, c - b, a - b + 1.0, w)?;
            let t2 = gamma(c) * gamma(a - b) * rgamma(a) * rgamma(c - b)
                * (one - z).powc(-b)
                * series(b, c - a, b - a + 1.0, w)?;
            Ok(t1 + t2)
        }
    }
}

/// Near `|z| = |1 - z| = 1` every transformation converges slowly; there the
/// hypergeometric equation is integrated by Taylor steps from `z / (2|z|)`.
fn continue_ode(a: C64, b: C64, c: C64, z: C64) -> Result<C64> {
    let mut z0 = z / (2.0 * z.norm());
    let mut f = series(a, b, c, z0)?;
    let mut df = a * b / c * series(a + 1.0, b + 1.0, c + 1.0, z0)?;
    let ab = a * b;
    let s1 = a + b + 1.0;
    for _ in 0..10_000 {
        let rest = z - z0;
        if rest.norm() == 0.0 {
            return Ok(f);
        }
        let reach = 0.5 * z0.norm().min((z0 - 1.0).norm());
        let h = if rest.norm() <= reach { rest } else { rest * (reach / rest.norm()) };
        // z(1-z) F'' + (c - (a+b+1) z) F' - ab F = 0 around z0
        let p0 = z0 * (1.0 - z0);
        let p1 = 1.0 - 2.0 * z0;
        let q0 = c - s1 * z0;
        let mut coef = vec![f, df];
        let (mut val, mut der) = (f + df * h, df);
        let mut hn = h;
        for n in 0..400usize {
            let nf = n as f64;
            let next = -((p1 * nf * (nf + 1.0) + q0 * (nf + 1.0)) * coef[n + 1]
                + (-nf * (nf - 1.0) - s1 * nf - ab) * coef[n])
                / (p0 * (nf + 2.0) * (nf + 1.0));
            coef.push(next);
            der += next * (nf + 2.0) * hn;
            hn *= h;
            let term = next * hn;
            val += term;
            if term.norm() <= 1e-18 * val.norm() && n > 4 {
                break;
            }
        }
        z0 += h;
        f = val;
        df = der;
    }
    Err(TauError::Resolution(format!("hypergeometric continuation did not reach z = {z}")))
}
