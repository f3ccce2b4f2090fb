//! Cauchy-Plemelj kernels of a factorization pair and their Fourier modes.
//!
//! All modes are taken in the normalized variable `w = (z - c) / r` of the
//! common circle. In that variable the kernels read
//!
//! ```text
//! a(w, w') = (1 - Psi+(w) Psi+(w')^{-1}) / (w - w') = sum a(p, q) w^{p-1/2} w'^{q-1/2}
//! d(w, w') = (Psi-(w) Psi-(w')^{-1} - 1) / (w - w') = sum d(p, q) w^{-q-1/2} w'^{-p-1/2}
//! ```
//!
//! with `p, q` positive half-integers, and the Fredholm determinant is the same
//! as for the kernels in `z` (the rescaling is a similarity).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DVector, RowDVector};
use rustfft::FftPlanner;

use crate::error::{Result, TauError};
use crate::linalg::{identity, max_abs, solve, zeros, CMat, C64};
use crate::loops::{fourier_modes, Circle, LoopConfig, MatrixLoop, Side};

/// Number of positive half-integers below the cutoff `q`.
pub fn modes_below(q: f64) -> usize {
    if q <= 0.5 {
        0
    } else {
        (q - 0.5).ceil() as usize
    }
}

/// Direct factorization `J = Psi-^{-1} Psi+`.
#[derive(Debug, Clone)]
pub struct FactorizationPair {
    psi_plus: MatrixLoop,
    psi_minus: MatrixLoop,
    plus_inv: MatrixLoop,
    minus_inv: MatrixLoop,
}

const HALF_TOL: f64 = 1e-10;

fn wrong_half_norm(l: &MatrixLoop, side: Side) -> f64 {
    let k = l.window() as i64;
    let peak = (-k..=k).map(|j| max_abs(l.mode_ref(j).unwrap())).fold(0.0, f64::max);
    let stray = (-k..=k)
        .filter(|j| match side {
            Side::Interior => *j < 0,
            Side::Exterior => *j > 0,
        })
        .map(|j| max_abs(l.mode_ref(j).unwrap()))
        .fold(0.0, f64::max);
    if peak == 0.0 {
        0.0
    } else {
        stray / peak
    }
}

impl FactorizationPair {
    /// Certifies that `psi_plus` and its inverse continue inside the circle
    /// and `psi_minus` and its inverse continue outside it.
    pub fn new(psi_plus: MatrixLoop, psi_minus: MatrixLoop) -> Result<Self> {
        if psi_plus.size() != psi_minus.size() {
            return Err(TauError::Incompatible("factor sizes differ".into()));
        }
        let (cp, cm) = (psi_plus.circle(), psi_minus.circle());
        if (cp.center - cm.center).norm() > 1e-14 * cp.radius || (cp.radius - cm.radius).abs() > 1e-14 * cp.radius {
            return Err(TauError::Incompatible("factors live on different circles".into()));
        }
        let plus_inv = psi_plus.invert()?;
        let minus_inv = psi_minus.invert()?;
        for (name, l, side) in [
            ("psi_plus", &psi_plus, Side::Interior),
            ("psi_plus^-1", &plus_inv, Side::Interior),
            ("psi_minus", &psi_minus, Side::Exterior),
            ("psi_minus^-1", &minus_inv, Side::Exterior),
        ] {
            let stray = wrong_half_norm(l, side);
            if stray > HALF_TOL {
                return Err(TauError::Precondition(format!(
                    "{name} is not analytic on its side of the circle (stray modes {stray:.2e})"
                )));
            }
        }
        Ok(Self { psi_plus, psi_minus, plus_inv, minus_inv })
    }

    pub fn identity(size: usize, circle: Circle, window: usize) -> Self {
        let id = MatrixLoop::identity(size, circle, window);
        Self { psi_plus: id.clone(), psi_minus: id.clone(), plus_inv: id.clone(), minus_inv: id }
    }

    pub fn psi_plus(&self) -> &MatrixLoop {
        &self.psi_plus
    }

    pub fn psi_minus(&self) -> &MatrixLoop {
        &self.psi_minus
    }

    pub fn psi_plus_inv(&self) -> &MatrixLoop {
        &self.plus_inv
    }

    pub fn psi_minus_inv(&self) -> &MatrixLoop {
        &self.minus_inv
    }

    pub fn size(&self) -> usize {
        self.psi_plus.size()
    }

    pub fn circle(&self) -> Circle {
        self.psi_plus.circle()
    }

    pub fn window(&self) -> usize {
        self.psi_plus.window().max(self.psi_minus.window())
    }

    /// The jump `J = Psi-^{-1} Psi+` with the pair's mode window.
    pub fn jump(&self) -> Result<MatrixLoop> {
        let cfg = LoopConfig::with_window(self.window()).tail_tol(1e-10);
        let m = cfg.samples;
        let values: Vec<CMat> = (0..m)
            .map(|j| {
                let w = C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
                self.minus_inv.eval_local(w) * self.psi_plus.eval_local(w)
            })
            .collect();
        MatrixLoop::from_sample_values(&values, self.size(), self.circle(), &cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSide {
    A,
    D,
}

/// Kernel `a(z, z')` or `d(z, z')` in the original variable, including the
/// analytic diagonal limit.
pub fn kernel_value(f: &FactorizationPair, side: KernelSide, z: C64, zp: C64) -> Result<CMat> {
    let (psi, inv) = match side {
        KernelSide::A => (&f.psi_plus, &f.plus_inv),
        KernelSide::D => (&f.psi_minus, &f.minus_inv),
    };
    for p in [z, zp] {
        psi.eval(p)?;
    }
    let circle = f.circle();
    let (w, wp) = (circle.to_local(z), circle.to_local(zp));
    let r = C64::new(circle.radius, 0.0);
    let n = f.size();
    let local = if w == wp {
        let v = psi.derivative_local(w) * inv.eval_local(w);
        match side {
            KernelSide::A => -v,
            KernelSide::D => v,
        }
    } else {
        let prod = psi.eval_local(w) * inv.eval_local(wp);
        match side {
            KernelSide::A => (identity(n) - prod) / (w - wp),
            KernelSide::D => (prod - identity(n)) / (w - wp),
        }
    };
    Ok(local / r)
}

/// Half-integer-indexed kernel modes below a cutoff.
///
/// `a(i, j)` is the block `a^{p}_{-q}` with `p = i + 1/2`, `q = j + 1/2`;
/// `d(i, j)` is the block `d^{-q}_{p}` with the same `p, q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBlock {
    size: usize,
    count: usize,
    a: Vec<CMat>,
    d: Vec<CMat>,
}

impl ModeBlock {
    pub fn zeros(size: usize, count: usize) -> Self {
        Self { size, count, a: vec![zeros(size); count * count], d: vec![zeros(size); count * count] }
    }

    /// Builds a block from functions of the integer offsets `(i, j)`.
    pub fn from_fn<FA, FD>(size: usize, count: usize, fa: FA, fd: FD) -> Self
    where
        FA: Fn(usize, usize) -> CMat,
        FD: Fn(usize, usize) -> CMat,
    {
        let mut a = Vec::with_capacity(count * count);
        let mut d = Vec::with_capacity(count * count);
        for i in 0..count {
            for j in 0..count {
                a.push(fa(i, j));
                d.push(fd(i, j));
            }
        }
        Self { size, count, a, d }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of half-integer modes per side.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Canonical integer cutoff `Q = count`; every stored index is below it.
    pub fn cutoff(&self) -> f64 {
        self.count as f64
    }

    pub fn a(&self, i: usize, j: usize) -> &CMat {
        &self.a[i * self.count + j]
    }

    pub fn d(&self, i: usize, j: usize) -> &CMat {
        &self.d[i * self.count + j]
    }

    /// Keeps the first `count` modes on each side.
    pub fn truncate(&self, count: usize) -> ModeBlock {
        let count = count.min(self.count);
        Self::from_fn(self.size, count, |i, j| self.a(i, j).clone(), |i, j| self.d(i, j).clone())
    }

    /// Largest block norm on the outermost row or column, relative to the peak.
    pub fn tail(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let peak = self.a.iter().chain(self.d.iter()).map(max_abs).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let last = self.count - 1;
        let mut edge = 0.0f64;
        for k in 0..self.count {
            for m in [self.a(last, k), self.a(k, last), self.d(last, k), self.d(k, last)] {
                edge = edge.max(max_abs(m));
            }
        }
        edge / peak
    }

    /// Resummed kernel in the normalized variables.
    pub fn resum(&self, side: KernelSide, w: C64, wp: C64) -> CMat {
        let mut acc = zeros(self.size);
        for i in 0..self.count {
            for j in 0..self.count {
                match side {
                    KernelSide::A => acc += self.a(i, j) * (w.powi(i as i32) * wp.powi(j as i32)),
                    KernelSide::D => {
                        acc += self.d(i, j) * (w.powi(-(j as i32) - 1) * wp.powi(-(i as i32) - 1))
                    }
                }
            }
        }
        acc
    }
}

pub const MODE_TAIL_TOL: f64 = 1e-10;

/// Kernel modes by a two-dimensional DFT of the kernels sampled on the
/// torus of the circle.
pub fn kernel_modes(f: &FactorizationPair, q: f64) -> Result<ModeBlock> {
    kernel_modes_with_tol(f, q, MODE_TAIL_TOL)
}

pub fn kernel_modes_with_tol(f: &FactorizationPair, q: f64, tail_tol: f64) -> Result<ModeBlock> {
    let count = modes_below(q);
    if count > f.window() {
        return Err(TauError::Precondition(format!(
            "cutoff {q} exceeds the mode window {} of the factors",
            f.window()
        )));
    }
    let m = (4 * f.window()).next_power_of_two().max(16).max(4 * count);
    let n = f.size();
    let ws: Vec<C64> = (0..m).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let mut out = ModeBlock::zeros(n, count);
    for side in [KernelSide::A, KernelSide::D] {
        let (psi, inv) = match side {
            KernelSide::A => (&f.psi_plus, &f.plus_inv),
            KernelSide::D => (&f.psi_minus, &f.minus_inv),
        };
        let vals: Vec<CMat> = ws.iter().map(|w| psi.eval_local(*w)).collect();
        let invs: Vec<CMat> = ws.iter().map(|w| inv.eval_local(*w)).collect();
        let diag: Vec<CMat> = ws
            .iter()
            .zip(invs.iter())
            .map(|(w, iv)| {
                let v = psi.derivative_local(*w) * iv;
                match side {
                    KernelSide::A => -v,
                    KernelSide::D => v,
                }
            })
            .collect();
        let mut buf = vec![C64::new(0.0, 0.0); m * m];
        for al in 0..n {
            for be in 0..n {
                for j in 0..m {
                    for l in 0..m {
                        buf[j * m + l] = if j == l {
                            diag[j][(al, be)]
                        } else {
                            let mut prod = C64::new(0.0, 0.0);
                            for g in 0..n {
                                prod += vals[j][(al, g)] * invs[l][(g, be)];
                            }
                            let delta = if al == be { 1.0 } else { 0.0 };
                            let num = match side {
                                KernelSide::A => C64::new(delta, 0.0) - prod,
                                KernelSide::D => prod - delta,
                            };
                            num / (ws[j] - ws[l])
                        };
                    }
                }
                fft2(&fft, &mut buf, m);
                let scale = 1.0 / (m * m) as f64;
                for i in 0..count {
                    for k in 0..count {
                        match side {
                            KernelSide::A => out.a[i * count + k][(al, be)] = buf[i * m + k] * scale,
                            KernelSide::D => {
                                // w^{-q-1/2} w'^{-p-1/2} with p = i + 1/2, q = k + 1/2
                                let r = m - k - 1;
                                let s = m - i - 1;
                                out.d[i * count + k][(al, be)] = buf[r * m + s] * scale;
                            }
                        }
                    }
                }
            }
        }
    }
    let tail = out.tail();
    if tail > tail_tol {
        return Err(TauError::InsufficientResolution { tail, tol: tail_tol });
    }
    Ok(out)
}

fn fft2(fft: &Arc<dyn rustfft::Fft<f64>>, buf: &mut [C64], m: usize) {
    for row in buf.chunks_mut(m) {
        fft.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); m];
    for l in 0..m {
        for j in 0..m {
            col[j] = buf[j * m + l];
        }
        fft.process(&mut col);
        for j in 0..m {
            buf[j * m + l] = col[j];
        }
    }
}

pub type VectorFn = Arc<dyn Fn(C64) -> DVector<C64> + Send + Sync>;
pub type RowFn = Arc<dyn Fn(C64) -> RowDVector<C64> + Send + Sync>;

/// One side of the rank-one data: `A(w, w') = sum_m phi_m(w) phibar_m(w')`
/// in the normalized variable, with constant diagonal `Lambda`.
#[derive(Clone)]
pub struct RankOneSide {
    pub pairs: Vec<(VectorFn, RowFn)>,
    pub lambda: Vec<C64>,
}

impl RankOneSide {
    pub fn zero(size: usize) -> Self {
        let z: VectorFn = Arc::new(move |_| DVector::zeros(size));
        let zb: RowFn = Arc::new(move |_| RowDVector::zeros(size));
        Self { pairs: vec![(z, zb)], lambda: vec![C64::new(0.0, 0.0); size] }
    }
}

#[derive(Clone)]
pub struct RankOneData {
    pub plus: RankOneSide,
    pub minus: RankOneSide,
}

/// Closed-form Cauchy-matrix modes for rank-one data with constant
/// diagonal `Lambda`.
pub fn cauchy_modes(r: &RankOneData, f: &FactorizationPair, q: f64) -> Result<ModeBlock> {
    let count = modes_below(q);
    let n = f.size();
    let m = (4 * f.window()).next_power_of_two().max(16).max(4 * count);
    let ws: Vec<C64> = (0..m).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect();
    let mut out = ModeBlock::zeros(n, count);
    for (side, data) in [(KernelSide::A, &r.plus), (KernelSide::D, &r.minus)] {
        if data.pairs.len() != 1 {
            return Err(TauError::Precondition(format!(
                "closed form needs exactly one rank-one term, got {}",
                data.pairs.len()
            )));
        }
        if data.lambda.len() != n {
            return Err(TauError::Incompatible("Lambda has the wrong size".into()));
        }
        let (psi, inv) = match side {
            KernelSide::A => (&f.psi_plus, &f.plus_inv),
            KernelSide::D => (&f.psi_minus, &f.minus_inv),
        };
        let (phi, phibar) = &data.pairs[0];
        // u = Psi phi in column 0 and v = phibar Psi^{-1} in row 0 of square
        // matrices, so the loop transform can be reused
        let us: Vec<CMat> = ws
            .iter()
            .map(|w| {
                let u = psi.eval_local(*w) * phi(*w);
                let mut mtx = zeros(n);
                mtx.set_column(0, &u);
                mtx
            })
            .collect();
        let vs: Vec<CMat> = ws
            .iter()
            .map(|w| {
                let v = phibar(*w) * inv.eval_local(*w);
                let mut mtx = zeros(n);
                mtx.set_row(0, &v);
                mtx
            })
            .collect();
        let um = fourier_modes(&us, n);
        let vm = fourier_modes(&vs, n);
        let lam = &data.lambda;
        for i in 0..count {
            for k in 0..count {
                let (p, qq) = (i as f64 + 0.5, k as f64 + 0.5);
                let mut blk = zeros(n);
                for al in 0..n {
                    for be in 0..n {
                        let (num, den) = match side {
                            KernelSide::A => (
                                um[i][(al, 0)] * vm[k][(0, be)],
                                C64::new(p + qq, 0.0) - lam[al] + lam[be],
                            ),
                            KernelSide::D => (
                                um[m - k - 1][(al, 0)] * vm[m - i - 1][(0, be)],
                                C64::new(p + qq, 0.0) + lam[al] - lam[be],
                            ),
                        };
                        if den.norm() < 1e-12 {
                            if num.norm() == 0.0 {
                                continue;
                            }
                            return Err(TauError::ResonantExponent { p, q: qq, alpha: al, beta: be });
                        }
                        blk[(al, be)] = num / den;
                    }
                }
                match side {
                    KernelSide::A => out.a[i * count + k] = blk,
                    KernelSide::D => out.d[i * count + k] = blk,
                }
            }
        }
    }
    Ok(out)
}

/// Dual factorization `J = Psi+bar Psi-bar^{-1}` normalized by `Psi-bar(inf) = 1`.
#[derive(Debug, Clone)]
pub struct DualFactorization {
    pub psi_plus: MatrixLoop,
    pub psi_minus: MatrixLoop,
    /// Relative size of the negative modes left in `J Psi-bar`.
    pub residual: f64,
}

pub const DUAL_RESIDUAL_TOL: f64 = 1e-8;

/// Solves `Pi_-(J (1 + h)) = 0` for `h` with `count` negative modes.
pub fn solve_dual(j: &MatrixLoop, count: usize) -> Result<DualFactorization> {
    let n = j.size();
    let dim = n * count;
    let mut sys = CMat::zeros(dim, dim);
    let mut rhs = CMat::zeros(dim, n);
    // unknown h_{-l-1} in block column l; equation for mode -m-1 in block row m
    for m in 0..count {
        let mm = -(m as i64) - 1;
        for l in 0..count {
            let kk = -(l as i64) - 1;
            if let Some(b) = j.mode_ref(mm - kk) {
                sys.view_mut((m * n, l * n), (n, n)).copy_from(b);
            }
        }
        if let Some(b) = j.mode_ref(mm) {
            rhs.view_mut((m * n, 0), (n, n)).copy_from(&(-b));
        }
    }
    let sol = if dim == 0 {
        CMat::zeros(0, n)
    } else {
        solve(&sys, &rhs).ok_or(TauError::DualUnsolvable { residual: f64::INFINITY })?
    };
    if sol.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(TauError::DualUnsolvable { residual: f64::INFINITY });
    }
    let window = j.window();
    let mut modes = vec![(0i64, identity(n))];
    for l in 0..count.min(window) {
        modes.push((-(l as i64) - 1, sol.view((l * n, 0), (n, n)).into_owned()));
    }
    let minus = MatrixLoop::from_modes(n, j.circle(), window, modes)?;
    let full = j.multiply(&minus)?;
    let peak = (-(window as i64)..=window as i64)
        .map(|k| max_abs(full.mode_ref(k).unwrap()))
        .fold(0.0, f64::max)
        .max(1e-300);
    let residual = (-(window as i64)..0)
        .map(|k| max_abs(full.mode_ref(k).unwrap()))
        .fold(0.0, f64::max)
        / peak;
    if !(residual <= DUAL_RESIDUAL_TOL) {
        return Err(TauError::DualUnsolvable { residual });
    }
    Ok(DualFactorization { psi_plus: full.half(Side::Interior), psi_minus: minus, residual })
}

/// Logarithmic derivative of the tau function along a one-parameter family,
///
/// ```text
/// (1/2 pi i) oint Tr{ J^{-1} d_t J [ d_z Psi-bar Psi-bar^{-1} + Psi+^{-1} d_z Psi+ ] } dz,
/// ```
///
/// with `d_t J` from central differences (step `h`, one Richardson step) and
/// the dual factor from [`solve_dual`] with `count` modes.
pub fn widom_derivative<F>(family: F, t0: f64, count: usize, h: f64) -> Result<C64>
where
    F: Fn(f64) -> Result<FactorizationPair>,
{
    let f0 = family(t0)?;
    let j0 = f0.jump()?;
    let dual = solve_dual(&j0, count)?;
    let dual_inv = dual.psi_minus.invert()?;
    let jump_at = |t: f64| -> Result<MatrixLoop> { family(t)?.jump() };
    let (jp1, jm1) = (jump_at(t0 + h)?, jump_at(t0 - h)?);
    let (jp2, jm2) = (jump_at(t0 + h / 2.0)?, jump_at(t0 - h / 2.0)?);
    let j0_inv = j0.invert()?;
    let integral = |m: usize| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..m {
            let w = C64::from_polar(1.0, 2.0 * PI * s as f64 / m as f64);
            let d1 = (jp1.eval_local(w) - jm1.eval_local(w)) / C64::new(2.0 * h, 0.0);
            let d2 = (jp2.eval_local(w) - jm2.eval_local(w)) / C64::new(h, 0.0);
            let dj = (d2 * C64::new(4.0, 0.0) - d1) / C64::new(3.0, 0.0);
            let bracket = dual.psi_minus.derivative_local(w) * dual_inv.eval_local(w)
                + f0.plus_inv.eval_local(w) * f0.psi_plus.derivative_local(w);
            let integrand = (j0_inv.eval_local(w) * dj * bracket).trace();
            acc += integrand * w;
        }
        acc / m as f64
    };
    let m = j0.sample_count();
    let full = integral(m);
    let half = integral(m / 2);
    if (full - half).norm() > 1e-8 * full.norm().max(1.0) {
        return Err(TauError::Resolution(format!(
            "derivative quadrature not converged: {full} vs {half}"
        )));
    }
    Ok(full)
}
