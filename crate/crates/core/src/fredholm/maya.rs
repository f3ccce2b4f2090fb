//! Maya diagrams, charged partitions and colored configurations.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Result, TauError};

/// A half-integer `k + 1/2`, stored as the odd integer `2k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Result<Self> {
        if twice.rem_euclid(2) != 1 {
            return Err(TauError::Precondition(format!("{twice}/2 is not a half-integer")));
        }
        Ok(Self(twice))
    }

    /// The half-integer `k + 1/2`.
    pub fn plus_half(k: i64) -> Self {
        Self(2 * k + 1)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn abs(self) -> Self {
        Self(self.0.abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Offset `|x| - 1/2` of the mode, used as a zero-based array index.
    pub fn offset(self) -> usize {
        ((self.0.abs() - 1) / 2) as usize
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.0)
    }
}

/// Particles at positive and holes at negative half-integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MayaDiagram {
    particles: BTreeSet<HalfInt>,
    holes: BTreeSet<HalfInt>,
}

impl MayaDiagram {
    pub fn new<P, H>(particles: P, holes: H) -> Result<Self>
    where
        P: IntoIterator<Item = HalfInt>,
        H: IntoIterator<Item = HalfInt>,
    {
        let particles: BTreeSet<HalfInt> = particles.into_iter().collect();
        let holes: BTreeSet<HalfInt> = holes.into_iter().collect();
        if let Some(p) = particles.iter().find(|p| !p.is_positive()) {
            return Err(TauError::Precondition(format!("particle at non-positive site {p}")));
        }
        if let Some(h) = holes.iter().find(|h| h.is_positive()) {
            return Err(TauError::Precondition(format!("hole at positive site {h}")));
        }
        Ok(Self { particles, holes })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn particles(&self) -> &BTreeSet<HalfInt> {
        &self.particles
    }

    pub fn holes(&self) -> &BTreeSet<HalfInt> {
        &self.holes
    }

    pub fn charge(&self) -> i64 {
        self.particles.len() as i64 - self.holes.len() as i64
    }

    /// Sum of `|site|` over particles and holes.
    pub fn weight_twice(&self) -> i64 {
        self.particles.iter().chain(self.holes.iter()).map(|x| x.twice().abs()).sum()
    }

    /// Particles then holes, each in ascending `|site|`.
    pub fn sorted_particles(&self) -> Vec<HalfInt> {
        self.particles.iter().copied().collect()
    }

    pub fn sorted_holes(&self) -> Vec<HalfInt> {
        self.holes.iter().rev().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ChargedPartition {
    pub y: Vec<u64>,
    pub q: i64,
}

impl ChargedPartition {
    pub fn new(mut y: Vec<u64>, q: i64) -> Result<Self> {
        if y.windows(2).any(|w| w[0] < w[1]) {
            return Err(TauError::Precondition("partition parts must be weakly decreasing".into()));
        }
        while y.last() == Some(&0) {
            y.pop();
        }
        Ok(Self { y, q })
    }

    pub fn size(&self) -> u64 {
        self.y.iter().sum()
    }
}

/// Empty circles sit at `p ∪ (Z'_- \ h)`; sorted descending they are
/// `Y_k - k + 1/2 + Q`.
pub fn maya_to_partition(m: &MayaDiagram) -> ChargedPartition {
    let q = m.charge();
    let lowest_hole = m.holes.iter().next().map(|h| h.twice()).unwrap_or(-1);
    // every empty circle below both the lowest hole and -1/2 - (number of
    // particles) belongs to the trivial tail Y_k = 0
    let mut empties: Vec<i64> = m.particles.iter().map(|p| p.twice()).collect();
    let mut site = -1;
    let floor = lowest_hole.min(-1) - 2 * (m.particles.len() as i64 + m.holes.len() as i64 + 2);
    while site >= floor {
        if !m.holes.contains(&HalfInt(site)) {
            empties.push(site);
        }
        site -= 2;
    }
    empties.sort_unstable_by(|a, b| b.cmp(a));
    let mut y = Vec::new();
    for (k0, e) in empties.iter().enumerate() {
        let k = k0 as i64 + 1;
        // e / 2 = Y_k - k + 1/2 + Q
        let yk = (e - 1) / 2 + k - q;
        if yk <= 0 {
            break;
        }
        y.push(yk as u64);
    }
    ChargedPartition { y, q }
}

pub fn partition_to_maya(cp: &ChargedPartition) -> MayaDiagram {
    let q = cp.q;
    let len = cp.y.len() as i64;
    // empty circles for k = 1..=len + |Q| + 1 cover every non-trivial site
    let top = len + q.abs() + 2;
    let empties: BTreeSet<i64> = (1..=top)
        .map(|k| {
            let yk = cp.y.get((k - 1) as usize).copied().unwrap_or(0) as i64;
            2 * (yk - k + q) + 1
        })
        .collect();
    let last = 2 * (-top + q) + 1;
    let particles = empties.iter().filter(|e| **e > 0).map(|e| HalfInt(*e)).collect();
    let holes = (last..0)
        .filter(|s| s.rem_euclid(2) == 1 && !empties.contains(s))
        .map(HalfInt)
        .collect();
    MayaDiagram { particles, holes }
}

/// An `N`-tuple of Maya diagrams, one per color.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColoredConfiguration {
    colors: Vec<MayaDiagram>,
}

/// A colored site `(color, half-integer)`.
pub type Site = (usize, HalfInt);

impl ColoredConfiguration {
    pub fn new(colors: Vec<MayaDiagram>) -> Self {
        Self { colors }
    }

    pub fn empty(n: usize) -> Self {
        Self { colors: vec![MayaDiagram::empty(); n] }
    }

    pub fn colors(&self) -> &[MayaDiagram] {
        &self.colors
    }

    pub fn n_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn charges(&self) -> Vec<i64> {
        self.colors.iter().map(|m| m.charge()).collect()
    }

    pub fn total_charge(&self) -> i64 {
        self.charges().iter().sum()
    }

    /// Sum of `|site|` over all particles and holes, when integral.
    pub fn weight(&self) -> f64 {
        self.colors.iter().map(|m| m.weight_twice()).sum::<i64>() as f64 / 2.0
    }

    /// Particles in color-major, ascending `|site|` order.
    pub fn particles(&self) -> Vec<Site> {
        self.colors
            .iter()
            .enumerate()
            .flat_map(|(a, m)| m.sorted_particles().into_iter().map(move |p| (a, p)))
            .collect()
    }

    /// Holes in color-major, ascending `|site|` order.
    pub fn holes(&self) -> Vec<Site> {
        self.colors
            .iter()
            .enumerate()
            .flat_map(|(a, m)| m.sorted_holes().into_iter().map(move |h| (a, h)))
            .collect()
    }

    pub fn partitions(&self) -> Vec<ChargedPartition> {
        self.colors.iter().map(maya_to_partition).collect()
    }

    pub fn max_offset(&self) -> Option<usize> {
        self.particles().iter().chain(self.holes().iter()).map(|(_, x)| x.offset()).max()
    }
}

/// Partitions of `n` in ascending lexicographic order.
fn partitions_of(n: u64) -> Vec<Vec<u64>> {
    fn rec(n: u64, max: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in 1..=max.min(n) {
            prefix.push(part);
            rec(n - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Charge vectors with zero sum and `sum Q^2 <= 2 w`, ascending lexicographically.
fn charge_vectors(n: usize, w: u64) -> Vec<Vec<i64>> {
    fn rec(n: usize, budget: i64, sum: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == n - 1 {
            let last = -sum;
            if last * last <= budget {
                prefix.push(last);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        let bound = (budget as f64).sqrt() as i64;
        for q in -bound..=bound {
            if q * q > budget {
                continue;
            }
            prefix.push(q);
            rec(n, budget - q * q, sum + q, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, 2 * w as i64, 0, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All zero-charge configurations of exactly weight `w`, ordered by charge
/// vector then partitions, both lexicographically.
pub fn weight_shell(n: usize, w: u64) -> Vec<ColoredConfiguration> {
    let mut out = Vec::new();
    for qv in charge_vectors(n, w) {
        let qcost: i64 = qv.iter().map(|q| q * q).sum::<i64>() / 2;
        let boxes = w as i64 - qcost;
        if boxes < 0 {
            continue;
        }
        let mut tuples: Vec<Vec<Vec<u64>>> = Vec::new();
        distribute(n, boxes as u64, &mut Vec::new(), &mut tuples);
        tuples.sort();
        for ys in tuples {
            let colors = ys
                .into_iter()
                .zip(qv.iter())
                .map(|(y, q)| partition_to_maya(&ChargedPartition { y, q: *q }))
                .collect();
            out.push(ColoredConfiguration::new(colors));
        }
    }
    out
}

fn distribute(n: usize, boxes: u64, prefix: &mut Vec<Vec<u64>>, out: &mut Vec<Vec<Vec<u64>>>) {
    if prefix.len() == n - 1 {
        for y in partitions_of(boxes) {
            prefix.push(y);
            out.push(prefix.clone());
            prefix.pop();
        }
        return;
    }
    for k in 0..=boxes {
        for y in partitions_of(k) {
            prefix.push(y);
            distribute(n, boxes - k, prefix, out);
            prefix.pop();
        }
    }
}

/// Streaming enumeration of zero-charge configurations by weight shell.
#[derive(Debug, Clone)]
pub struct Configurations {
    n: usize,
    max_weight: u64,
    shell: u64,
    buffer: std::vec::IntoIter<ColoredConfiguration>,
}

impl Iterator for Configurations {
    type Item = ColoredConfiguration;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(c) = self.buffer.next() {
                return Some(c);
            }
            if self.shell > self.max_weight || self.n == 0 {
                return None;
            }
            self.buffer = weight_shell(self.n, self.shell).into_iter();
            self.shell += 1;
        }
    }
}

pub fn enumerate_configurations(n: usize, max_weight: u64) -> Configurations {
    Configurations { n, max_weight, shell: 0, buffer: Vec::new().into_iter() }
}
