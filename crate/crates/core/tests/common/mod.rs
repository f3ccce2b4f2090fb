#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use widom_tau::linalg::{identity, CMat, C64};
use widom_tau::{Circle, MatrixLoop};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut StdRng, n: usize, scale: f64) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
    })
}

/// Random loop with modes decaying like `decay^|k|`, modes `|k| <= order`.
pub fn random_loop(
    rng: &mut StdRng,
    n: usize,
    circle: Circle,
    window: usize,
    order: i64,
    decay: f64,
) -> MatrixLoop {
    let modes: Vec<(i64, CMat)> = (-order..=order)
        .map(|k| (k, random_matrix(rng, n, decay.powi(k.abs() as i32))))
        .collect();
    MatrixLoop::from_modes(n, circle, window, modes).unwrap()
}

/// Random loop close to the identity, so that it is invertible with zero winding.
pub fn near_identity_loop(
    rng: &mut StdRng,
    n: usize,
    circle: Circle,
    window: usize,
    order: i64,
    size: f64,
) -> MatrixLoop {
    let mut modes: Vec<(i64, CMat)> = (-order..=order)
        .map(|k| (k, random_matrix(rng, n, size * 0.5f64.powi(k.abs() as i32))))
        .collect();
    modes.push((0, identity(n)));
    MatrixLoop::from_modes(n, circle, window, modes).unwrap()
}

/// Direct summation `sum_k J_k w^k`.
pub fn direct_sum(l: &MatrixLoop, w: C64) -> CMat {
    let k = l.window() as i64;
    let mut acc = CMat::zeros(l.size(), l.size());
    for j in -k..=k {
        acc += l.mode(j) * w.powi(j as i32);
    }
    acc
}

pub fn unit_points(m: usize) -> Vec<C64> {
    (0..m)
        .map(|j| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (j as f64 + 0.37) / m as f64))
        .collect()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

use widom_tau::{FactorizationPair, LoopConfig};

/// Random pair `Psi+ = 1 + small polynomial`, `Psi- = 1 + small polynomial in 1/w`.
pub fn random_pair(rng: &mut StdRng, n: usize, circle: Circle, window: usize, size: f64) -> FactorizationPair {
    let plus: Vec<(i64, CMat)> = (0..=6)
        .map(|k| {
            let m = if k == 0 { identity(n) } else { random_matrix(rng, n, size * 0.5f64.powi(k as i32)) };
            (k, m)
        })
        .collect();
    let minus: Vec<(i64, CMat)> = (0..=6)
        .map(|k| {
            let m = if k == 0 { identity(n) } else { random_matrix(rng, n, size * 0.5f64.powi(k as i32)) };
            (-k, m)
        })
        .collect();
    FactorizationPair::new(
        MatrixLoop::from_modes(n, circle, window, plus).unwrap(),
        MatrixLoop::from_modes(n, circle, window, minus).unwrap(),
    )
    .unwrap()
}

/// Scalar pair `Psi+ = exp(t z)`, `Psi- = exp(-t/z)` with jump `exp(t(z + 1/z))`.
pub fn szego_pair(t: f64, window: usize) -> FactorizationPair {
    let cfg = LoopConfig::with_window(window);
    let p = MatrixLoop::from_samples(|z| CMat::from_element(1, 1, (z * t).exp()), 1, Circle::unit(), &cfg).unwrap();
    let m = MatrixLoop::from_samples(|z| CMat::from_element(1, 1, (-t / z).exp()), 1, Circle::unit(), &cfg).unwrap();
    FactorizationPair::new(p, m).unwrap()
}

/// Exact kernel modes from the mode convolutions of the factors.
///
/// `a_{m,n} = -sum_{k=m+1}^{m+n+1} P_k R_{m+n+1-k}` with `P`, `R` the modes of
/// `Psi+`, `Psi+^{-1}`; `d_{m,n} = -sum_{k=n+1}^{n+m+1} S_k T_{n+m+1-k}` with
/// `S_k`, `T_k` the coefficients of `w^{-k}` in `Psi-`, `Psi-^{-1}`.
pub fn exact_modes(f: &FactorizationPair, count: usize) -> (Vec<Vec<CMat>>, Vec<Vec<CMat>>) {
    let n = f.size();
    let p = |k: usize| f.psi_plus().mode(k as i64);
    let r = |k: usize| f.psi_plus_inv().mode(k as i64);
    let s = |k: usize| f.psi_minus().mode(-(k as i64));
    let t = |k: usize| f.psi_minus_inv().mode(-(k as i64));
    let mut a = vec![vec![CMat::zeros(n, n); count]; count];
    let mut d = vec![vec![CMat::zeros(n, n); count]; count];
    for i in 0..count {
        for j in 0..count {
            let tot = i + j + 1;
            for k in (i + 1)..=tot {
                a[i][j] -= p(k) * r(tot - k);
            }
            // d(p, q) with p = i + 1/2 (power of w') and q = j + 1/2 (power of w)
            for k in (j + 1)..=tot {
                d[i][j] -= s(k) * t(tot - k);
            }
        }
    }
    (a, d)
}

use widom_tau::ModeBlock;

/// Random mode block with `|a(i, j)|, |d(i, j)| ~ rho^{i + j + 1}`.
pub fn random_block(rng: &mut StdRng, n: usize, count: usize, rho: f64) -> ModeBlock {
    let a: Vec<CMat> = (0..count * count)
        .map(|k| random_matrix(rng, n, rho.powi((k / count + k % count + 1) as i32)))
        .collect();
    let d: Vec<CMat> = (0..count * count)
        .map(|k| random_matrix(rng, n, rho.powi((k / count + k % count + 1) as i32)))
        .collect();
    ModeBlock::from_fn(n, count, |i, j| a[i * count + j].clone(), |i, j| d[i * count + j].clone())
}

use widom_tau::{ColoredConfiguration, HalfInt, MayaDiagram};

pub fn jacobi_trudi(y: &[usize], s: &[C64]) -> C64 {
    let l = y.len();
    let m = CMat::from_fn(l, l, |i, j| {
        let idx = y[i] as i64 - i as i64 + j as i64;
        if idx < 0 { c(0.0, 0.0) } else { s[idx as usize] }
    });
    m.determinant()
}

/// Scalar Maya diagram of `y` folded into two colors: scalar site `m + 1/2`
/// becomes color `m mod 2` at offset `m div 2`.
pub fn folded(y: &[usize]) -> ColoredConfiguration {
    let l = y.len() as i64;
    let occupied: Vec<i64> = y.iter().enumerate().map(|(i, &yi)| yi as i64 - i as i64 - 1).collect();
    let mut parts = [vec![], vec![]];
    let mut holes = [vec![], vec![]];
    for &m in &occupied {
        if m >= 0 {
            parts[(m % 2) as usize].push(HalfInt::from_twice(2 * (m / 2) + 1).unwrap());
        }
    }
    for k in -l..0 {
        if !occupied.contains(&k) {
            let off = k.div_euclid(2);
            holes[(k - 2 * off) as usize].push(HalfInt::from_twice(2 * off + 1).unwrap());
        }
    }
    ColoredConfiguration::new(
        (0..2).map(|a| MayaDiagram::new(parts[a].clone(), holes[a].clone()).unwrap()).collect(),
    )
}

pub fn inversions<T: PartialOrd>(v: &[T]) -> usize {
    (0..v.len()).map(|i| (i + 1..v.len()).filter(|&j| v[i] > v[j]).count()).sum()
}

/// `(-1)^{k + sum b}` for Frobenius coordinates `(a | b)` of rank `k`, times
/// the signs of reordering particles and holes color-major.
pub fn folding_sign(y: &[usize]) -> f64 {
    let l = y.len() as i64;
    let occupied: Vec<i64> = y.iter().enumerate().map(|(i, &yi)| yi as i64 - i as i64 - 1).collect();
    let mut parts: Vec<i64> = occupied.iter().cloned().filter(|&m| m >= 0).collect();
    parts.sort();
    let holes: Vec<i64> = (-l..0).rev().filter(|k| !occupied.contains(k)).collect();
    let pkeys: Vec<(i64, i64)> = parts.iter().map(|m| (m % 2, m / 2)).collect();
    let hkeys: Vec<(i64, i64)> = holes.iter().map(|k| (k - 2 * k.div_euclid(2), -k.div_euclid(2))).collect();
    let bsum: i64 = holes.iter().map(|k| -k - 1).sum();
    let n = parts.len() as i64 + bsum + (inversions(&pkeys) + inversions(&hkeys)) as i64;
    if n % 2 == 0 { 1.0 } else { -1.0 }
}
