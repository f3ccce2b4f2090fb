//! Block Toeplitz matrices `T_n[J] = (J_{k-l})` and the Widom limit.

use crate::error::Result;
use crate::linalg::{det, CMat, C64};
use crate::loops::MatrixLoop;

#[derive(Debug, Clone)]
pub struct BlockToeplitz {
    order: usize,
    block: usize,
    matrix: CMat,
}

impl BlockToeplitz {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn block_at(&self, k: usize, l: usize) -> CMat {
        let n = self.block;
        self.matrix.view((k * n, l * n), (n, n)).into_owned()
    }
}

pub fn build_toeplitz(j: &MatrixLoop, n: usize) -> BlockToeplitz {
    let b = j.size();
    let mut m = CMat::zeros(n * b, n * b);
    for k in 0..n {
        for l in 0..n {
            if let Some(mode) = j.mode_ref(k as i64 - l as i64) {
                m.view_mut((k * b, l * b), (b, b)).copy_from(mode);
            }
        }
    }
    BlockToeplitz { order: n, block: b, matrix: m }
}

/// `det T_n[J]`, with the empty determinant equal to one.
pub fn toeplitz_det(t: &BlockToeplitz) -> C64 {
    det(&t.matrix)
}

#[derive(Debug, Clone)]
pub struct WidomSequence {
    /// `(n, G[J]^{-n} det T_n[J])` for `n = 1..=n_max`.
    pub terms: Vec<(usize, C64)>,
    /// `|s_{n_max} - s_{n_max - 1}|`.
    pub last_difference: f64,
    /// Fitted geometric ratio of successive differences, when measurable.
    pub ratio: Option<f64>,
    /// Richardson-extrapolated limit, when requested and available.
    pub extrapolated: Option<C64>,
}

impl WidomSequence {
    pub fn last(&self) -> C64 {
        self.terms.last().map(|t| t.1).unwrap_or(C64::new(1.0, 0.0))
    }
}

/// Normalized block Toeplitz determinants `G[J]^{-n} det T_n[J]`.
pub fn widom_sequence(j: &MatrixLoop, n_max: usize, richardson: bool) -> Result<WidomSequence> {
    let g = j.geometric_mean()?;
    let full = build_toeplitz(j, n_max).matrix;
    let b = j.size();
    let mut terms = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let sub = full.view((0, 0), (n * b, n * b)).into_owned();
        terms.push((n, det(&sub) / g.powi(n as i32)));
    }
    let diffs: Vec<f64> = terms.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
    let last_difference = diffs.last().copied().unwrap_or(0.0);
    let ratio = fit_ratio(&diffs);
    let extrapolated = if richardson && terms.len() >= 3 {
        let k = terms.len();
        let (a, b, c) = (terms[k - 3].1, terms[k - 2].1, terms[k - 1].1);
        let den = (c - b) - (b - a);
        if den.norm() > 1e-14 * c.norm().max(1.0) {
            Some(c - (c - b) * (c - b) / den)
        } else {
            Some(c)
        }
    } else {
        None
    };
    Ok(WidomSequence { terms, last_difference, ratio, extrapolated })
}

/// Least-squares slope of `ln |diff|` over the differences above rounding level.
fn fit_ratio(diffs: &[f64]) -> Option<f64> {
    let scale = diffs.iter().cloned().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = diffs
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > 1e-13 * scale.max(1e-300) && **d > 1e-15)
        .map(|(i, d)| (i as f64, d.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}
