//! The tau function as a Fredholm determinant of the finite section of
//! `1 + L`, its expansion over principal minors, and the determinantal
//! kernel `K = L (1 + L)^{-1}`.

mod maya;

pub use maya::{
    enumerate_configurations, maya_to_partition, partition_to_maya, weight_shell, ChargedPartition,
    ColoredConfiguration, Configurations, HalfInt, MayaDiagram, Site,
};

use crate::error::{Result, TauError};
use crate::linalg::{det, identity, inverse, CMat, C64};
use crate::loops::MatrixLoop;
use crate::plemelj::{kernel_modes, FactorizationPair, ModeBlock};
use crate::toeplitz::{build_toeplitz, toeplitz_det};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauMethod {
    Determinant,
    Series,
    Multicircle,
}

impl TauMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TauMethod::Determinant => "determinant",
            TauMethod::Series => "series",
            TauMethod::Multicircle => "multicircle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauResult {
    pub value: C64,
    pub cutoff: f64,
    /// Truncation diagnostic: change under halving the cutoff (determinant)
    /// or size of the top weight shell (series).
    pub diagnostic: f64,
    pub method: TauMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Position of `(sign, color, offset)` in the finite section: all positive
/// sites first, then all negative ones, each block color-major with
/// ascending `|index|`.
pub fn site_position(sign: Sign, color: usize, offset: usize, n_colors: usize, count: usize) -> usize {
    let base = match sign {
        Sign::Plus => 0,
        Sign::Minus => n_colors * count,
    };
    base + color * count + offset
}

/// Finite section of `1 + L = [[1, a], [d, 1]]`.
pub fn assemble_l(m: &ModeBlock) -> CMat {
    let (n, cnt) = (m.size(), m.count());
    let dim = 2 * n * cnt;
    let mut out = identity(dim);
    for i in 0..cnt {
        for j in 0..cnt {
            let (a, d) = (m.a(i, j), m.d(i, j));
            for al in 0..n {
                for be in 0..n {
                    let p_row = site_position(Sign::Plus, al, i, n, cnt);
                    let q_col = site_position(Sign::Minus, be, j, n, cnt);
                    out[(p_row, q_col)] = a[(al, be)];
                    let q_row = site_position(Sign::Minus, al, j, n, cnt);
                    let p_col = site_position(Sign::Plus, be, i, n, cnt);
                    out[(q_row, p_col)] = d[(al, be)];
                }
            }
        }
    }
    out
}

fn det_one_plus_l(m: &ModeBlock) -> Result<C64> {
    let full = assemble_l(m);
    let value = det(&full);
    let half = m.size() * m.count();
    let a = full.view((0, half), (half, half)).into_owned();
    let d = full.view((half, 0), (half, half)).into_owned();
    let reduced = det(&(identity(half) - a * d));
    if (value - reduced).norm() > 1e-12 * value.norm().max(1.0) {
        return Err(TauError::Resolution(format!(
            "det(1 + L) = {value} disagrees with det(1 - ad) = {reduced}"
        )));
    }
    Ok(value)
}

/// `det(1 + L)` on the finite section, diagnosed against the section of half size.
pub fn tau_determinant(m: &ModeBlock) -> Result<TauResult> {
    let value = det_one_plus_l(m)?;
    let coarse = det_one_plus_l(&m.truncate(m.count() / 2))?;
    Ok(TauResult {
        value,
        cutoff: m.cutoff(),
        diagnostic: (value - coarse).norm(),
        method: TauMethod::Determinant,
    })
}

fn check_sites(sites: &[Site], count: usize) -> Result<()> {
    for (_, x) in sites {
        if x.offset() >= count {
            return Err(TauError::Truncation { index: x.value(), cutoff: count as f64 });
        }
    }
    Ok(())
}

/// `Z+ = det a[p, h]` or `Z- = (-1)^{|p|} det d[h, p]`.
pub fn minor_z(m: &ModeBlock, cfg: &ColoredConfiguration, sign: Sign) -> Result<C64> {
    let (ps, hs) = (cfg.particles(), cfg.holes());
    check_sites(&ps, m.count())?;
    check_sites(&hs, m.count())?;
    if ps.len() != hs.len() {
        return Ok(C64::new(0.0, 0.0));
    }
    let k = ps.len();
    let mut sub = CMat::zeros(k, k);
    match sign {
        Sign::Plus => {
            for (r, (al, p)) in ps.iter().enumerate() {
                for (c, (be, h)) in hs.iter().enumerate() {
                    sub[(r, c)] = m.a(p.offset(), h.offset())[(*al, *be)];
                }
            }
            Ok(det(&sub))
        }
        Sign::Minus => {
            for (r, (al, h)) in hs.iter().enumerate() {
                for (c, (be, p)) in ps.iter().enumerate() {
                    sub[(r, c)] = m.d(p.offset(), h.offset())[(*al, *be)];
                }
            }
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            Ok(det(&sub) * s)
        }
    }
}

/// Sum of `Z+ Z-` over all configurations up to weight `w`; configurations
/// reaching beyond the cutoff lie outside the section and contribute nothing.
pub fn series_tau(m: &ModeBlock, w: u64) -> Result<TauResult> {
    let mut total = C64::new(0.0, 0.0);
    let mut shell_sum = C64::new(0.0, 0.0);
    let mut shell = 0u64;
    for cfg in enumerate_configurations(m.size(), w) {
        if cfg.max_offset().is_some_and(|o| o >= m.count()) {
            continue;
        }
        let weight = cfg.weight() as u64;
        if weight != shell {
            total += shell_sum;
            shell_sum = C64::new(0.0, 0.0);
            shell = weight;
        }
        shell_sum += minor_z(m, &cfg, Sign::Plus)? * minor_z(m, &cfg, Sign::Minus)?;
    }
    total += shell_sum;
    let diagnostic = if shell == w { shell_sum.norm() } else { 0.0 };
    Ok(TauResult { value: total, cutoff: m.cutoff(), diagnostic, method: TauMethod::Series })
}

/// Plucker coordinate of the configuration in the frame of `Psi+^{-1}`
/// (`Sign::Plus`) or `Psi-` (`Sign::Minus`), normalized by `Psi+(0)` and
/// `Psi-(inf)`. Particle slots are filled by the hole vectors in the order
/// used by [`minor_z`].
pub fn plucker_minor(f: &FactorizationPair, cfg: &ColoredConfiguration, sign: Sign, q: f64) -> Result<C64> {
    let count = crate::plemelj::modes_below(q);
    let (ps, hs) = (cfg.particles(), cfg.holes());
    check_sites(&ps, count)?;
    check_sites(&hs, count)?;
    if ps.len() != hs.len() {
        return Ok(C64::new(0.0, 0.0));
    }
    let n = f.size();
    let dim = n * count;
    // slot (color, offset) -> replacement mode index, color
    let mut slots: Vec<(usize, i64)> = Vec::with_capacity(dim);
    for be in 0..n {
        for k in 0..count {
            slots.push((be, k as i64));
        }
    }
    for ((al, p), (be, h)) in ps.iter().zip(hs.iter()) {
        let pos = al * count + p.offset();
        slots[pos] = (*be, -(h.offset() as i64) - 1);
    }
    let mut g = CMat::zeros(dim, dim);
    match sign {
        Sign::Plus => {
            let p0 = f.psi_plus().mode(0);
            let frame = |k: i64| &p0 * f.psi_plus_inv().mode(k);
            for al in 0..n {
                for m in 0..count {
                    for (col, (be, k)) in slots.iter().enumerate() {
                        g[(al * count + m, col)] = frame(m as i64 - k)[(al, *be)];
                    }
                }
            }
        }
        Sign::Minus => {
            let s0_inv = inverse(&f.psi_minus().mode(0))
                .ok_or_else(|| TauError::Precondition("Psi-(inf) is singular".into()))?;
            let frame = |k: i64| f.psi_minus().mode(k) * &s0_inv;
            for (row, (al, m)) in slots.iter().enumerate() {
                for be in 0..n {
                    for k in 0..count {
                        g[(row, be * count + k)] = frame(m - k as i64)[(*al, be)];
                    }
                }
            }
        }
    }
    Ok(det(&g))
}

/// `K = L (1 + L)^{-1}` on the finite section.
pub fn correlation_kernel(m: &ModeBlock) -> Result<CMat> {
    let one_plus_l = assemble_l(m);
    let dim = one_plus_l.nrows();
    let inv = inverse(&one_plus_l).ok_or(TauError::TauVanishes)?;
    Ok((one_plus_l - identity(dim)) * inv)
}

/// Both sides of `det(1 - chi K++ chi) = det T_n[J^{-1}] / tau[J]`, with
/// `chi` the projection on positive sites `>= n + 1/2`.
pub fn bo_gap(j: &MatrixLoop, f: &FactorizationPair, n: usize, q: f64) -> Result<(C64, C64)> {
    let g = j.geometric_mean()?;
    if (g - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(TauError::Precondition(format!("det J has geometric mean {g}, not 1")));
    }
    let modes = kernel_modes(f, q)?;
    let tau = tau_determinant(&modes)?.value;
    let k = correlation_kernel(&modes)?;
    let (size, count) = (modes.size(), modes.count());
    let sites: Vec<usize> = (0..size)
        .flat_map(|al| (n..count).map(move |i| site_position(Sign::Plus, al, i, size, count)))
        .collect();
    let mut sub = CMat::zeros(sites.len(), sites.len());
    for (r, a) in sites.iter().enumerate() {
        for (c, b) in sites.iter().enumerate() {
            sub[(r, c)] = -k[(*a, *b)];
        }
        sub[(r, r)] += C64::new(1.0, 0.0);
    }
    let lhs = det(&sub);
    let jinv = j.invert()?;
    let rhs = toeplitz_det(&build_toeplitz(&jinv, n)) / tau;
    Ok((lhs, rhs))
}
