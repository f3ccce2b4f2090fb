//! Gelfand-Dickey jumps: `Psi_+ = exp(x L + sum t_j L^j)` with the cyclic
//! companion matrix `L(z)`, and `Psi_- = exp(X(z))`.

use std::collections::BTreeMap;

use crate::error::{Result, TauError};
use crate::linalg::{max_abs, zeros, CMat, C64};
use crate::loops::{Circle, LoopConfig, MatrixLoop};
use crate::plemelj::{kernel_modes_with_tol, modes_below, FactorizationPair, ModeBlock, MODE_TAIL_TOL};

#[derive(Clone, Debug)]
pub struct GDSpec {
    /// Rank `N` of the hierarchy.
    pub rank: usize,
    /// Nonzero times `t_j`, `j` not divisible by `N`.
    pub times: BTreeMap<usize, C64>,
    pub x: C64,
    /// Modes `(k, X_k)` of `X(z)`, all with `k < 0`.
    pub x_modes: Vec<(i64, CMat)>,
    /// Requires `X(z)^N = 0`, so that `Psi_-` is a polynomial in `1/z`.
    pub polynomial: bool,
    pub window: usize,
}

impl GDSpec {
    pub fn new(rank: usize) -> Self {
        Self { rank, times: BTreeMap::new(), x: C64::new(0.0, 0.0), x_modes: Vec::new(), polynomial: false, window: 64 }
    }

    fn validate(&self) -> Result<()> {
        if self.rank < 2 {
            return Err(TauError::Precondition(format!("rank must be at least 2, got {}", self.rank)));
        }
        for &j in self.times.keys() {
            if j == 0 || j.is_multiple_of(self.rank) {
                return Err(TauError::Precondition(format!(
                    "time t_{j} is not allowed for rank {}",
                    self.rank
                )));
            }
        }
        for (k, m) in &self.x_modes {
            if *k >= 0 {
                return Err(TauError::Precondition(format!("X has a non-negative mode {k}")));
            }
            if m.nrows() != self.rank || m.ncols() != self.rank {
                return Err(TauError::Incompatible(format!("X mode {k} is not {0}x{0}", self.rank)));
            }
        }
        Ok(())
    }

    /// Times with `x` folded into `t_1`.
    fn effective_times(&self) -> BTreeMap<usize, C64> {
        let mut t = self.times.clone();
        if self.x.norm() != 0.0 {
            *t.entry(1).or_insert(C64::new(0.0, 0.0)) += self.x;
        }
        t
    }
}

/// Cyclic companion matrix: ones below the diagonal, `z` in the corner.
pub fn companion(rank: usize, z: C64) -> CMat {
    let mut m = zeros(rank);
    for a in 1..rank {
        m[(a, a - 1)] = C64::new(1.0, 0.0);
    }
    m[(0, rank - 1)] = z;
    m
}

/// Elementary Schur polynomials `s_0..s_{len-1}`:
/// `sum s_j w^j = exp(sum t_j w^j)`.
pub fn schur_polynomials(times: &BTreeMap<usize, C64>, len: usize) -> Vec<C64> {
    let mut s = vec![C64::new(0.0, 0.0); len];
    if len == 0 {
        return s;
    }
    s[0] = C64::new(1.0, 0.0);
    for k in 1..len {
        let mut acc = C64::new(0.0, 0.0);
        for (&j, &t) in times.range(1..=k) {
            acc += t * j as f64 * s[k - j];
        }
        s[k] = acc / k as f64;
    }
    s
}

/// Taylor modes of `exp(sum t_j L^j)`: `P_k[a, b] = s_{N k + a - b}`.
fn exp_modes(rank: usize, schur: &[C64], count: usize) -> Vec<CMat> {
    (0..count)
        .map(|k| {
            CMat::from_fn(rank, rank, |a, b| {
                let idx = (rank * k + a) as i64 - b as i64;
                if idx < 0 || idx as usize >= schur.len() {
                    C64::new(0.0, 0.0)
                } else {
                    schur[idx as usize]
                }
            })
        })
        .collect()
}

fn exponent_at(spec: &GDSpec, times: &BTreeMap<usize, C64>, z: C64) -> CMat {
    let l = companion(spec.rank, z);
    let mut out = zeros(spec.rank);
    let mut power = CMat::identity(spec.rank, spec.rank);
    let top = times.keys().next_back().copied().unwrap_or(0);
    for j in 1..=top {
        power = &power * &l;
        if let Some(t) = times.get(&j) {
            out += &power * *t;
        }
    }
    out
}

fn x_at(spec: &GDSpec, z: C64) -> CMat {
    let mut out = zeros(spec.rank);
    for (k, m) in &spec.x_modes {
        out += m * z.powi(*k as i32);
    }
    out
}

/// Factorization pair of the Gelfand-Dickey jump on the unit circle.
pub fn gd_jump(spec: &GDSpec) -> Result<FactorizationPair> {
    spec.validate()?;
    let times = spec.effective_times();
    let circle = Circle::unit();
    let cfg = LoopConfig::with_window(spec.window);
    let n = spec.rank;
    let plus = MatrixLoop::from_samples(|z| exponent_at(spec, &times, z).exp(), n, circle, &cfg)?;
    if spec.polynomial {
        for j in 0..cfg.samples {
            let z = circle.point(2.0 * std::f64::consts::PI * j as f64 / cfg.samples as f64);
            let xz = x_at(spec, z);
            let mut p = CMat::identity(n, n);
            for _ in 0..n {
                p = &p * &xz;
            }
            let scale = max_abs(&xz).powi(n as i32).max(1.0);
            if max_abs(&p) > 1e-12 * scale {
                return Err(TauError::Precondition(format!(
                    "X(z)^{n} does not vanish at z = {z}"
                )));
            }
        }
    }
    let minus = MatrixLoop::from_samples(|z| x_at(spec, z).exp(), n, circle, &cfg)?;
    FactorizationPair::new(plus, minus)
}

/// Kernel modes with the `a` side taken from the exact Schur expansion of
/// `Psi_+` and the `d` side from the sampled `Psi_-`. Only the `d` side is
/// checked for truncation; the `a` entries are exact at any cutoff.
pub fn schur_modes(spec: &GDSpec, q: f64) -> Result<ModeBlock> {
    let pair = gd_jump(spec)?;
    let numeric = kernel_modes_with_tol(&pair, q, f64::INFINITY)?;
    let count = modes_below(q);
    if count > 0 {
        let mut peak = 0.0f64;
        let mut edge = 0.0f64;
        for i in 0..count {
            for j in 0..count {
                let v = max_abs(numeric.d(i, j));
                peak = peak.max(v);
                if i + 1 == count || j + 1 == count {
                    edge = edge.max(v);
                }
            }
        }
        if peak > 0.0 && edge > MODE_TAIL_TOL * peak {
            return Err(TauError::InsufficientResolution { tail: edge / peak, tol: MODE_TAIL_TOL });
        }
    }
    let n = spec.rank;
    let times = spec.effective_times();
    let len = n * (2 * count + 2);
    let plus = schur_polynomials(&times, len);
    let neg: BTreeMap<usize, C64> = times.iter().map(|(&j, &t)| (j, -t)).collect();
    let minus = schur_polynomials(&neg, len);
    let p = exp_modes(n, &plus, 2 * count + 1);
    let r = exp_modes(n, &minus, 2 * count + 1);
    Ok(ModeBlock::from_fn(
        n,
        count,
        |i, j| {
            let mut acc = zeros(n);
            for k in (i + 1)..=(i + j + 1) {
                acc -= &p[k] * &r[i + j + 1 - k];
            }
            acc
        },
        |i, j| numeric.d(i, j).clone(),
    ))
}
