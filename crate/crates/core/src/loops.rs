//! Matrix-valued loops on circles, stored as truncated Laurent series.
//!
//! A loop `J` on the circle `|z - c| = r` is kept through its modes in the
//! normalized variable `w = (z - c) / r`,
//!
//! ```text
//! J(z) = sum_{k=-K}^{K} J_k w^k,
//! ```
//!
//! so that modes of loops living on circles of very different radii stay
//! comparable in magnitude. Loops are immutable once built.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::error::{Result, TauError};
use crate::linalg::{det, identity, inverse, max_abs, zeros, CMat, C64};

/// Resolution knobs for anything that samples a loop on its circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    /// Mode window `K`: modes `-K..=K` are kept.
    pub window: usize,
    /// Number of equispaced samples `M` (a power of two, at least `2K + 2`).
    pub samples: usize,
    /// Relative tail tolerance certifying the truncation.
    pub tail_tol: f64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self::with_window(64)
    }
}

impl LoopConfig {
    pub fn with_window(window: usize) -> Self {
        Self {
            window,
            samples: (4 * window).next_power_of_two().max(16),
            tail_tol: 1e-12,
        }
    }

    pub fn tail_tol(mut self, tol: f64) -> Self {
        self.tail_tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.samples.is_power_of_two() || self.samples < 2 * self.window + 2 {
            return Err(TauError::Precondition(format!(
                "sample count {} must be a power of two >= 2K + 2 (K = {})",
                self.samples, self.window
            )));
        }
        if !(self.tail_tol > 0.0) {
            return Err(TauError::Precondition("tail tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: C64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn unit() -> Self {
        Self::new(C64::new(0.0, 0.0), 1.0)
    }

    /// Point at angle `theta`.
    pub fn point(&self, theta: f64) -> C64 {
        self.center + C64::from_polar(self.radius, theta)
    }

    pub fn to_local(&self, z: C64) -> C64 {
        (z - self.center) / self.radius
    }

    pub fn from_local(&self, w: C64) -> C64 {
        self.center + w * self.radius
    }

    pub(crate) fn same_as(&self, other: &Circle) -> bool {
        (self.center - other.center).norm() <= 1e-14 * (1.0 + self.radius)
            && (self.radius - other.radius).abs() <= 1e-14 * self.radius
    }
}

/// Region `r_in < |z - center| < r_out` in which a loop is analytic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annulus {
    pub center: C64,
    pub r_in: f64,
    pub r_out: f64,
}

impl Annulus {
    pub fn new(center: C64, r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in >= 0.0 && r_in < r_out) {
            return Err(TauError::Precondition(format!(
                "annulus radii must satisfy 0 <= r_in < r_out, got ({r_in}, {r_out})"
            )));
        }
        Ok(Self { center, r_in, r_out })
    }

    pub fn contains(&self, z: C64) -> bool {
        let d = (z - self.center).norm();
        d >= self.r_in * (1.0 - 1e-12) && d <= self.r_out * (1.0 + 1e-12)
    }

    fn intersect(&self, other: &Annulus) -> Annulus {
        Annulus {
            center: self.center,
            r_in: self.r_in.max(other.r_in),
            r_out: self.r_out.min(other.r_out),
        }
    }
}

/// Which analytic half of a loop: non-negative modes continue inside the
/// circle, negative modes continue outside (and vanish at infinity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

#[derive(Debug, Clone)]
pub struct MatrixLoop {
    size: usize,
    circle: Circle,
    window: usize,
    /// `modes[k + window]` holds `J_k`.
    modes: Vec<CMat>,
    annulus: Annulus,
}

impl MatrixLoop {
    /// Builds a loop from explicit modes; absent indices are zero.
    pub fn from_modes<I>(size: usize, circle: Circle, window: usize, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, CMat)>,
    {
        if size == 0 {
            return Err(TauError::Precondition("matrix size must be positive".into()));
        }
        if !(circle.radius > 0.0) {
            return Err(TauError::Precondition("circle radius must be positive".into()));
        }
        let mut store = vec![zeros(size); 2 * window + 1];
        for (k, m) in modes {
            if k.unsigned_abs() as usize > window {
                return Err(TauError::Incompatible(format!(
                    "mode {k} outside window {window}"
                )));
            }
            if m.nrows() != size || m.ncols() != size {
                return Err(TauError::Incompatible(format!(
                    "mode {k} has shape {}x{}, expected {size}x{size}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            store[(k + window as i64) as usize] += m;
        }
        Ok(Self::from_store(size, circle, window, store))
    }

    fn from_store(size: usize, circle: Circle, window: usize, modes: Vec<CMat>) -> Self {
        let annulus = estimate_annulus(circle, window, &modes);
        Self { size, circle, window, modes, annulus }
    }

    pub fn identity(size: usize, circle: Circle, window: usize) -> Self {
        Self::constant(identity(size), circle, window)
    }

    pub fn constant(m: CMat, circle: Circle, window: usize) -> Self {
        let size = m.nrows();
        let mut store = vec![zeros(size); 2 * window + 1];
        store[window] = m;
        Self::from_store(size, circle, window, store)
    }

    /// Samples `f` at `M` equispaced points of the circle and keeps the
    /// discrete Fourier modes `-K..=K`; the discarded modes certify the cut.
    pub fn from_samples<F>(f: F, size: usize, circle: Circle, cfg: &LoopConfig) -> Result<Self>
    where
        F: Fn(C64) -> CMat,
    {
        cfg.validate()?;
        let m = cfg.samples;
        let values: Vec<CMat> = (0..m)
            .map(|j| f(circle.point(2.0 * PI * j as f64 / m as f64)))
            .collect();
        Self::from_sample_values(&values, size, circle, cfg)
    }

    /// Same as [`MatrixLoop::from_samples`] for precomputed samples at
    /// angles `2 pi j / M`.
    pub fn from_sample_values(
        values: &[CMat],
        size: usize,
        circle: Circle,
        cfg: &LoopConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if values.len() != cfg.samples {
            return Err(TauError::Incompatible(format!(
                "expected {} samples, got {}",
                cfg.samples,
                values.len()
            )));
        }
        let folded = fourier_modes(values, size);
        let m = values.len() as i64;
        let window = cfg.window as i64;
        let norms: Vec<f64> = folded.iter().map(max_abs).collect();
        let peak = norms.iter().cloned().fold(0.0, f64::max);
        let mut tail = 0.0f64;
        for (j, n) in norms.iter().enumerate() {
            let k = fold_index(j as i64, m);
            if k.abs() >= window {
                tail = tail.max(*n);
            }
        }
        let rel = if peak > 0.0 { tail / peak } else { 0.0 };
        if !rel.is_finite() || rel > cfg.tail_tol {
            return Err(TauError::InsufficientResolution { tail: rel, tol: cfg.tail_tol });
        }
        let mut store = vec![zeros(size); 2 * cfg.window + 1];
        for (j, mode) in folded.into_iter().enumerate() {
            let k = fold_index(j as i64, m);
            if k.abs() <= window {
                store[(k + window) as usize] = mode;
            }
        }
        Ok(Self::from_store(size, circle, cfg.window, store))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn circle(&self) -> Circle {
        self.circle
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn annulus(&self) -> Annulus {
        self.annulus
    }

    /// Mode `J_k` in the normalized variable; zero outside the window.
    pub fn mode(&self, k: i64) -> CMat {
        self.mode_ref(k).cloned().unwrap_or_else(|| zeros(self.size))
    }

    pub fn mode_ref(&self, k: i64) -> Option<&CMat> {
        if k.unsigned_abs() as usize > self.window {
            None
        } else {
            Some(&self.modes[(k + self.window as i64) as usize])
        }
    }

    /// Default sample count used by pointwise operations on this loop.
    pub fn sample_count(&self) -> usize {
        (4 * self.window).next_power_of_two().max(16)
    }

    pub fn config(&self) -> LoopConfig {
        LoopConfig::with_window(self.window)
    }

    /// Relative size of the outermost modes `|k| = K`.
    pub fn tail(&self) -> f64 {
        let peak = self.modes.iter().map(max_abs).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let edge = max_abs(&self.modes[0]).max(max_abs(&self.modes[2 * self.window]));
        edge / peak
    }

    pub fn eval(&self, z: C64) -> Result<CMat> {
        if !self.annulus.contains(z) {
            return Err(TauError::Domain {
                point: format!("{z}"),
                r_in: self.annulus.r_in,
                r_out: self.annulus.r_out,
            });
        }
        Ok(self.eval_local(self.circle.to_local(z)))
    }

    /// Two-sided Horner summation in the normalized variable.
    pub fn eval_local(&self, w: C64) -> CMat {
        let k = self.window;
        let mut pos = zeros(self.size);
        for j in (0..=k).rev() {
            pos = pos * w + &self.modes[k + j];
        }
        if k == 0 {
            return pos;
        }
        let winv = w.inv();
        let mut neg = zeros(self.size);
        for j in (1..=k).rev() {
            neg = neg * winv + &self.modes[k - j];
        }
        pos + neg * winv
    }

    /// `dJ/dw` in the normalized variable.
    pub fn derivative_local(&self, w: C64) -> CMat {
        let k = self.window as i64;
        let mut acc = zeros(self.size);
        for j in -k..=k {
            if j == 0 {
                continue;
            }
            let m = &self.modes[(j + k) as usize];
            acc += m * (w.powi(j as i32 - 1) * j as f64);
        }
        acc
    }

    /// `dJ/dz = (1/r) dJ/dw`.
    pub fn derivative(&self, z: C64) -> CMat {
        self.derivative_local(self.circle.to_local(z)) / C64::new(self.circle.radius, 0.0)
    }

    /// Values at the angles `2 pi j / m`.
    pub fn samples(&self, m: usize) -> Vec<CMat> {
        (0..m)
            .map(|j| self.eval_local(C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)))
            .collect()
    }

    /// Keeps the non-negative (interior) or negative (exterior) modes.
    pub fn half(&self, side: Side) -> MatrixLoop {
        let k = self.window as i64;
        let store = (-k..=k)
            .map(|j| {
                let keep = match side {
                    Side::Interior => j >= 0,
                    Side::Exterior => j < 0,
                };
                if keep {
                    self.modes[(j + k) as usize].clone()
                } else {
                    zeros(self.size)
                }
            })
            .collect();
        Self::from_store(self.size, self.circle, self.window, store)
    }

    pub fn map_modes<F: Fn(i64, &CMat) -> CMat>(&self, f: F) -> MatrixLoop {
        let k = self.window as i64;
        let store = (-k..=k).map(|j| f(j, &self.modes[(j + k) as usize])).collect();
        Self::from_store(self.size, self.circle, self.window, store)
    }

    pub fn scale(&self, s: C64) -> MatrixLoop {
        self.map_modes(|_, m| m * s)
    }

    /// Laurent convolution truncated to the larger of the two windows.
    pub fn multiply(&self, other: &MatrixLoop) -> Result<MatrixLoop> {
        if self.size != other.size {
            return Err(TauError::Incompatible(format!(
                "matrix sizes {} and {} differ",
                self.size, other.size
            )));
        }
        if !self.circle.same_as(&other.circle) {
            return Err(TauError::Incompatible("loops live on different circles".into()));
        }
        let ann = self.annulus.intersect(&other.annulus);
        if ann.r_in >= ann.r_out {
            return Err(TauError::Incompatible("annuli do not overlap".into()));
        }
        let window = self.window.max(other.window);
        let (ka, kb) = (self.window as i64, other.window as i64);
        let w = window as i64;
        let mut store = vec![zeros(self.size); 2 * window + 1];
        for i in -ka..=ka {
            let a = &self.modes[(i + ka) as usize];
            if max_abs(a) == 0.0 {
                continue;
            }
            for j in -kb..=kb {
                let k = i + j;
                if k.abs() > w {
                    continue;
                }
                store[(k + w) as usize] += a * &other.modes[(j + kb) as usize];
            }
        }
        let mut out = Self::from_store(self.size, self.circle, window, store);
        out.annulus = out.annulus.intersect(&ann);
        Ok(out)
    }

    /// Pointwise inverse on the circle, re-transformed to modes.
    pub fn invert(&self) -> Result<MatrixLoop> {
        let cfg = self.config().tail_tol(1e-10);
        let values = self.samples(cfg.samples);
        let scale = values.iter().map(max_abs).fold(0.0, f64::max);
        let mut inv = Vec::with_capacity(values.len());
        for (idx, v) in values.iter().enumerate() {
            let vi = inverse(v).ok_or(TauError::DegenerateJump { index: idx })?;
            if scale * max_abs(&vi) > 1e13 {
                return Err(TauError::DegenerateJump { index: idx });
            }
            inv.push(vi);
        }
        let mut out = Self::from_sample_values(&inv, self.size, self.circle, &cfg)?;
        out.annulus = out.annulus.intersect(&self.annulus);
        Ok(out)
    }

    /// Unwrapped `ln det` at `m` samples; each step must turn by less than `pi/2`.
    fn unwrapped_log_det(&self, m: usize) -> Result<Vec<C64>> {
        let dets: Vec<C64> = self.samples(m).iter().map(det).collect();
        for (idx, d) in dets.iter().enumerate() {
            if d.norm() == 0.0 || !d.norm().is_finite() {
                return Err(TauError::DegenerateJump { index: idx });
            }
        }
        let mut logs = Vec::with_capacity(m + 1);
        logs.push(dets[0].ln());
        for j in 0..m {
            let step = (dets[(j + 1) % m] / dets[j]).ln();
            if step.im.abs() >= PI / 2.0 {
                return Err(TauError::Resolution(format!(
                    "phase jump {:.3} at sample {j} of {m}",
                    step.im
                )));
            }
            logs.push(logs[j] + step);
        }
        Ok(logs)
    }

    fn tracked_log_det(&self) -> Result<Vec<C64>> {
        let mut m = self.sample_count().max(256);
        let mut last_err = None;
        for _ in 0..4 {
            match self.unwrapped_log_det(m) {
                Ok(l) => return Ok(l),
                Err(e @ TauError::Resolution(_)) => last_err = Some(e),
                Err(e) => return Err(e),
            }
            m *= 2;
        }
        Err(last_err.unwrap())
    }

    /// Winding number of `det J` around the origin (argument principle).
    pub fn det_winding(&self) -> Result<i64> {
        let logs = self.tracked_log_det()?;
        let total = (logs[logs.len() - 1] - logs[0]).im / (2.0 * PI);
        let rounded = total.round();
        if (total - rounded).abs() >= 0.1 {
            return Err(TauError::Resolution(format!(
                "winding residual {:.3} too large",
                total - rounded
            )));
        }
        Ok(rounded as i64)
    }

    /// `exp` of the zeroth Fourier mode of `ln det J` along the circle.
    pub fn geometric_mean(&self) -> Result<C64> {
        let logs = self.tracked_log_det()?;
        let m = logs.len() - 1;
        let wind = ((logs[m] - logs[0]).im / (2.0 * PI)).round() as i64;
        if wind != 0 {
            return Err(TauError::Precondition(format!(
                "det J winds {wind} times around the origin"
            )));
        }
        let mean = logs[..m].iter().sum::<C64>() / m as f64;
        Ok(mean.exp())
    }

    /// Re-expands one analytic half of the loop on another circle.
    ///
    /// The interior half continues into the disk `|z - c| < r_out`; the
    /// exterior half continues outside `|z - c| > r_in`. The result is the
    /// restriction of that continuation to `target`, expressed in the target's
    /// normalized variable with the same mode window.
    pub fn recenter_expand(&self, target: Circle, side: Side) -> Result<MatrixLoop> {
        let geom = HalfTransfer::classify(
            self.circle,
            side,
            self.annulus.r_in,
            self.annulus.r_out,
            target,
        )?;
        let window = self.window;
        let table = geom.power_table(window + 1, window + 1);
        let k = window as i64;
        let mut store = vec![zeros(self.size); 2 * window + 1];
        for (src, row) in table.iter().enumerate() {
            let src_mode = match side {
                Side::Interior => src as i64,
                Side::Exterior => -(src as i64) - 1,
            };
            if src_mode.abs() > k {
                continue;
            }
            let m = &self.modes[(src_mode + k) as usize];
            for (dst, coef) in row.iter().enumerate() {
                let dst_mode = geom.target_mode(dst);
                if dst_mode.abs() > k || coef.norm() == 0.0 {
                    continue;
                }
                store[(dst_mode + k) as usize] += m * *coef;
            }
        }
        let out = Self::from_store(self.size, target, window, store);
        let cfg = self.config();
        let tail = out.tail();
        if tail > cfg.tail_tol.max(1e-10) {
            return Err(TauError::InsufficientResolution { tail, tol: cfg.tail_tol.max(1e-10) });
        }
        Ok(out)
    }
}

/// Geometry of continuing one half of a Laurent series from a source circle
/// to a target circle, expressed as powers of a series in the target variable.
#[derive(Debug, Clone)]
pub(crate) struct HalfTransfer {
    /// Source half.
    pub side: Side,
    /// Whether the continued function lands in the target's interior half.
    pub target_interior: bool,
    delta: C64,
    rho: f64,
}

impl HalfTransfer {
    pub(crate) fn classify(
        source: Circle,
        side: Side,
        r_in: f64,
        r_out: f64,
        target: Circle,
    ) -> Result<Self> {
        let dist = (target.center - source.center).norm();
        let delta = (target.center - source.center) / source.radius;
        let rho = target.radius / source.radius;
        let target_interior = match side {
            Side::Interior => {
                if dist + target.radius >= r_out {
                    return Err(TauError::Geometry(format!(
                        "target circle (center {}, radius {}) leaves the disk of analyticity of radius {r_out}",
                        target.center, target.radius
                    )));
                }
                true
            }
            Side::Exterior => {
                if dist + r_in < target.radius {
                    false
                } else if dist - target.radius > r_in {
                    true
                } else {
                    return Err(TauError::Geometry(format!(
                        "target circle (center {}, radius {}) crosses the exclusion disk of radius {r_in}",
                        target.center, target.radius
                    )));
                }
            }
        };
        Ok(Self { side, target_interior, delta, rho })
    }

    /// Series of `w` (interior source) or `1/w` (exterior source) in the
    /// target variable `w'` or `v = 1/w'`, with `len` coefficients.
    fn base(&self, len: usize) -> Vec<C64> {
        let rho = C64::new(self.rho, 0.0);
        let mut out = vec![C64::new(0.0, 0.0); len];
        match (self.side, self.target_interior) {
            (Side::Interior, _) => {
                // w = delta + rho w'
                for (i, v) in [self.delta, rho].into_iter().enumerate().take(len) {
                    out[i] = v;
                }
            }
            (Side::Exterior, true) => {
                // 1/w = 1 / (delta + rho w')
                let inv = self.delta.inv();
                let ratio = -rho * inv;
                let mut cur = inv;
                for x in out.iter_mut() {
                    *x = cur;
                    cur *= ratio;
                }
            }
            (Side::Exterior, false) => {
                // 1/w = v / (rho + delta v)
                let inv = rho.inv();
                let ratio = -self.delta * inv;
                let mut cur = inv;
                for x in out.iter_mut().skip(1) {
                    *x = cur;
                    cur *= ratio;
                }
            }
        }
        out
    }

    /// `table[k][j]`: coefficient of target basis function `j` in the
    /// continuation of source basis function `k`. Interior bases are `w^k`,
    /// exterior bases are `w^{-k-1}`.
    pub(crate) fn power_table(&self, n_source: usize, n_target: usize) -> Vec<Vec<C64>> {
        let len = n_target + 1;
        let base = self.base(len);
        let mut power = match self.side {
            Side::Interior => {
                let mut v = vec![C64::new(0.0, 0.0); len];
                v[0] = C64::new(1.0, 0.0);
                v
            }
            Side::Exterior => base.clone(),
        };
        let mut rows = Vec::with_capacity(n_source);
        for _ in 0..n_source {
            let row = if self.target_interior {
                power[..n_target].to_vec()
            } else {
                power[1..=n_target].to_vec()
            };
            rows.push(row);
            power = series_mul(&power, &base, len);
        }
        rows
    }

    /// Laurent index of target basis element `j`.
    pub(crate) fn target_mode(&self, j: usize) -> i64 {
        if self.target_interior {
            j as i64
        } else {
            -(j as i64) - 1
        }
    }
}

fn series_mul(a: &[C64], b: &[C64], len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.norm() == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn fold_index(j: i64, m: i64) -> i64 {
    if j < m / 2 {
        j
    } else {
        j - m
    }
}

/// Discrete Fourier modes `(1/M) sum_j f_j e^{-2 pi i jk/M}`, entrywise.
pub(crate) fn fourier_modes(values: &[CMat], size: usize) -> Vec<CMat> {
    let m = values.len();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let mut out = vec![zeros(size); m];
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for r in 0..size {
        for c in 0..size {
            for (j, v) in values.iter().enumerate() {
                buf[j] = v[(r, c)];
            }
            fft.process(&mut buf);
            for (k, x) in buf.iter().enumerate() {
                out[k][(r, c)] = x / m as f64;
            }
        }
    }
    out
}

fn estimate_annulus(circle: Circle, window: usize, modes: &[CMat]) -> Annulus {
    let norms: Vec<f64> = modes.iter().map(max_abs).collect();
    let peak = norms.iter().cloned().fold(0.0, f64::max);
    let k = window as i64;
    let mut grow_pos = 0.0f64;
    let mut grow_neg = 0.0f64;
    if peak > 0.0 {
        // only the trailing half of the window measures the decay rate;
        // a series that has died out there is treated as a polynomial
        for j in ((k + 1) / 2).max(1)..=k {
            let np = norms[(k + j) as usize] / peak;
            let nn = norms[(k - j) as usize] / peak;
            if np > 1e-13 {
                grow_pos = grow_pos.max(np.powf(1.0 / j as f64));
            }
            if nn > 1e-13 {
                grow_neg = grow_neg.max(nn.powf(1.0 / j as f64));
            }
        }
    }
    let r = circle.radius;
    let r_out = if grow_pos == 0.0 { f64::INFINITY } else { r / grow_pos.min(1.0) };
    let r_in = r * grow_neg.min(1.0);
    // a loop always lives at least on its own circle
    let (r_in, r_out) = if r_in >= r_out { (r * (1.0 - 1e-12), r * (1.0 + 1e-12)) } else { (r_in, r_out) };
    Annulus { center: circle.center, r_in, r_out }
}
