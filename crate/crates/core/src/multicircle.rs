//! Tau functions on contours made of several disjoint circles.
//!
//! Faces are the components of the complement: the unbounded face and, for
//! every circle, the part of its disk outside its children. The unbounded
//! face is colored `-` and colors alternate with nesting depth, so a circle
//! at even depth has its `+` face inside.

use std::collections::BTreeMap;

use crate::error::{Result, TauError};
use crate::fredholm::{Sign, TauMethod, TauResult};
use crate::linalg::{det, identity, CMat, C64};
use crate::loops::{Circle, HalfTransfer, MatrixLoop, Side};
use crate::plemelj::{modes_below, FactorizationPair};

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub color: Sign,
    /// Circles bounding the face.
    pub boundary: Vec<usize>,
    /// Circle whose disk contains the face; `None` for the unbounded face.
    pub owner: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct CircleContour {
    circles: Vec<Circle>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    faces: Vec<Face>,
}

fn opposite(s: Sign) -> Sign {
    match s {
        Sign::Plus => Sign::Minus,
        Sign::Minus => Sign::Plus,
    }
}

/// Builds the nesting forest, the faces and their coloring.
pub fn build_contour(circles: &[Circle]) -> Result<CircleContour> {
    let m = circles.len();
    for (i, c) in circles.iter().enumerate() {
        if !(c.radius > 0.0) || !c.radius.is_finite() {
            return Err(TauError::Geometry(format!("circle {i} has radius {}", c.radius)));
        }
    }
    let inside = |a: &Circle, b: &Circle| (a.center - b.center).norm() + a.radius < b.radius;
    for i in 0..m {
        for j in (i + 1)..m {
            let (a, b) = (&circles[i], &circles[j]);
            let d = (a.center - b.center).norm();
            if !(inside(a, b) || inside(b, a) || d > a.radius + b.radius) {
                return Err(TauError::Geometry(format!("circles {i} and {j} intersect")));
            }
        }
    }
    let parent: Vec<Option<usize>> = (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| j != i && inside(&circles[i], &circles[j]))
                .min_by(|&a, &b| circles[a].radius.total_cmp(&circles[b].radius))
        })
        .collect();
    let depth: Vec<usize> = (0..m)
        .map(|i| {
            let mut d = 0;
            let mut cur = parent[i];
            while let Some(p) = cur {
                d += 1;
                cur = parent[p];
            }
            d
        })
        .collect();
    let mut faces = vec![Face { color: Sign::Minus, boundary: Vec::new(), owner: None }];
    for (i, d) in depth.iter().enumerate() {
        let color = if d.is_multiple_of(2) { Sign::Plus } else { Sign::Minus };
        faces.push(Face { color, boundary: vec![i], owner: Some(i) });
    }
    for (i, p) in parent.iter().enumerate() {
        let outer = p.map_or(0, |p| p + 1);
        faces[outer].boundary.push(i);
    }
    Ok(CircleContour { circles: circles.to_vec(), parent, depth, faces })
}

impl CircleContour {
    pub fn circles(&self) -> &[Circle] {
        &self.circles
    }

    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    /// Faces; index 0 is the unbounded face, index `c + 1` lies inside circle `c`.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn parent(&self, c: usize) -> Option<usize> {
        self.parent[c]
    }

    pub fn depth(&self, c: usize) -> usize {
        self.depth[c]
    }

    /// Whether the `+` face of circle `c` lies inside it.
    pub fn plus_inside(&self, c: usize) -> bool {
        self.depth[c].is_multiple_of(2)
    }

    /// The face of color `sign` adjacent to circle `c`.
    pub fn adjacent_face(&self, c: usize, sign: Sign) -> usize {
        let inner = c + 1;
        let outer = self.parent[c].map_or(0, |p| p + 1);
        if self.faces[inner].color == sign {
            inner
        } else {
            outer
        }
    }

    /// Half of the mode space on circle `c` forming `H_{c, sign}`.
    pub fn half(&self, c: usize, sign: Sign) -> Side {
        if self.plus_inside(c) == (sign == Sign::Plus) {
            Side::Interior
        } else {
            Side::Exterior
        }
    }

    /// Whether circles `a` and `b` bound a common face of color `sign`.
    pub fn share_face(&self, a: usize, b: usize, sign: Sign) -> bool {
        self.adjacent_face(a, sign) == self.adjacent_face(b, sign)
    }
}

fn mode_of(side: Side, offset: usize) -> i64 {
    match side {
        Side::Interior => offset as i64,
        Side::Exterior => -(offset as i64) - 1,
    }
}

fn offset_of(side: Side, mode: i64) -> Option<usize> {
    match side {
        Side::Interior if mode >= 0 => Some(mode as usize),
        Side::Exterior if mode < 0 => Some((-mode - 1) as usize),
        _ => None,
    }
}

/// Scalar matrix (`n_target x n_source`) continuing the `sign` half of a
/// function on circle `from` to circle `to`, in normalized mode coordinates.
/// Returns the matrix and the half of `to` the result lies in. For
/// `from == to` this is the identity on the half.
pub fn transfer_block(
    contour: &CircleContour,
    from: usize,
    to: usize,
    sign: Sign,
    n_source: usize,
    n_target: usize,
) -> Result<(CMat, Side)> {
    let side = contour.half(from, sign);
    if from == to {
        return Ok((CMat::identity(n_target, n_source), side));
    }
    let geom = transfer_geometry(contour, from, to, sign)?;
    let table = geom.power_table(n_source, n_target);
    let out = CMat::from_fn(n_target, n_source, |j, k| table[k][j]);
    let target_side = if geom.target_interior { Side::Interior } else { Side::Exterior };
    Ok((out, target_side))
}

fn transfer_geometry(contour: &CircleContour, from: usize, to: usize, sign: Sign) -> Result<HalfTransfer> {
    let side = contour.half(from, sign);
    let src = contour.circles[from];
    let region = contour.adjacent_face(from, sign);
    let reachable = contour.faces[region].boundary.contains(&to);
    if !reachable {
        return Err(TauError::Geometry(format!(
            "circle {to} does not bound the face on the {sign:?} side of circle {from}"
        )));
    }
    HalfTransfer::classify(src, side, src.radius, src.radius, contour.circles[to])
}

/// Factorization data of every circle. The `psi_plus` field of each pair is
/// the factor analytic inside the circle and `psi_minus` the one analytic
/// outside; the coloring decides which of them is `Psi_{C,+}`.
#[derive(Clone)]
pub struct JumpAssignment {
    pairs: Vec<FactorizationPair>,
    jumps: Vec<MatrixLoop>,
    jump_invs: Vec<MatrixLoop>,
}

impl JumpAssignment {
    pub fn new(contour: &CircleContour, pairs: Vec<FactorizationPair>) -> Result<Self> {
        if pairs.len() != contour.len() {
            return Err(TauError::Incompatible(format!(
                "{} factorization pairs for {} circles",
                pairs.len(),
                contour.len()
            )));
        }
        let size = pairs.first().map_or(1, |p| p.size());
        for (c, p) in pairs.iter().enumerate() {
            if p.size() != size {
                return Err(TauError::Incompatible(format!("pair {c} has size {}, expected {size}", p.size())));
            }
            if !p.circle().same_as(&contour.circles[c]) {
                return Err(TauError::Incompatible(format!("pair {c} lives on a different circle")));
            }
        }
        let mut out = Self { pairs, jumps: Vec::new(), jump_invs: Vec::new() };
        for c in 0..contour.len() {
            for sign in [Sign::Plus, Sign::Minus] {
                out.certify(contour, c, sign)?;
            }
            let jump = out.psi_inv(contour, c, Sign::Minus).multiply(out.psi(contour, c, Sign::Plus))?;
            let inv = out.psi_inv(contour, c, Sign::Plus).multiply(out.psi(contour, c, Sign::Minus))?;
            out.jumps.push(jump);
            out.jump_invs.push(inv);
        }
        Ok(out)
    }

    pub fn identity(contour: &CircleContour, size: usize, window: usize) -> Result<Self> {
        let pairs = contour.circles.iter().map(|c| FactorizationPair::identity(size, *c, window)).collect();
        Self::new(contour, pairs)
    }

    pub fn size(&self) -> usize {
        self.pairs.first().map_or(1, |p| p.size())
    }

    pub fn pairs(&self) -> &[FactorizationPair] {
        &self.pairs
    }

    /// `Psi_{c, sign}`.
    pub fn psi<'a>(&'a self, contour: &CircleContour, c: usize, sign: Sign) -> &'a MatrixLoop {
        match contour.half(c, sign) {
            Side::Interior => self.pairs[c].psi_plus(),
            Side::Exterior => self.pairs[c].psi_minus(),
        }
    }

    pub fn psi_inv<'a>(&'a self, contour: &CircleContour, c: usize, sign: Sign) -> &'a MatrixLoop {
        match contour.half(c, sign) {
            Side::Interior => self.pairs[c].psi_plus_inv(),
            Side::Exterior => self.pairs[c].psi_minus_inv(),
        }
    }

    /// `J_c = Psi_{c,-}^{-1} Psi_{c,+}`.
    pub fn jump(&self, c: usize) -> &MatrixLoop {
        &self.jumps[c]
    }

    /// Continues `Psi_{c, sign}` and its inverse onto the other boundary
    /// circles of the adjacent face; the tail checks certify analyticity.
    fn certify(&self, contour: &CircleContour, c: usize, sign: Sign) -> Result<()> {
        let side = contour.half(c, sign);
        let face = contour.adjacent_face(c, sign);
        for &other in &contour.faces[face].boundary {
            if other == c {
                continue;
            }
            for l in [self.psi(contour, c, sign), self.psi_inv(contour, c, sign)] {
                l.recenter_expand(contour.circles[other], side)?;
            }
        }
        Ok(())
    }
}

type Series = BTreeMap<i64, CMat>;

fn multiply(l: &MatrixLoop, g: &Series) -> Series {
    let k = l.window() as i64;
    let mut out = Series::new();
    for (&m, v) in g {
        for j in -k..=k {
            if let Some(a) = l.mode_ref(j) {
                let term = a * v;
                out.entry(m + j).and_modify(|x| *x += &term).or_insert(term);
            }
        }
    }
    out
}

fn project(g: &Series, side: Side) -> Series {
    g.iter().filter(|(m, _)| offset_of(side, **m).is_some()).map(|(m, v)| (*m, v.clone())).collect()
}

fn transfer(contour: &CircleContour, from: usize, to: usize, sign: Sign, g: &Series, n_target: usize) -> Result<Series> {
    let side = contour.half(from, sign);
    if from == to {
        return Ok(project(g, side));
    }
    let n_source = g.keys().filter_map(|m| offset_of(side, *m)).max().map_or(0, |o| o + 1);
    let (table, target_side) = transfer_block(contour, from, to, sign, n_source, n_target)?;
    let mut out = Series::new();
    for (&m, v) in g {
        let Some(k) = offset_of(side, m) else { continue };
        for j in 0..n_target {
            let coef = table[(j, k)];
            if coef.norm() == 0.0 {
                continue;
            }
            let term = v * coef;
            out.entry(mode_of(target_side, j)).and_modify(|x| *x += &term).or_insert(term);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Form {
    Factorized,
    JumpOnly,
}

/// Block `A_{C,s; C',-s}` (or its jump-only conjugate) on the section of
/// `count` modes per half.
fn block(
    contour: &CircleContour,
    jumps: &JumpAssignment,
    c: usize,
    cp: usize,
    s: Sign,
    count: usize,
    form: Form,
) -> Result<CMat> {
    let n = jumps.size();
    let sp = opposite(s);
    let src_side = contour.half(cp, sp);
    let dst_side = contour.half(c, s);
    let window = jumps.pairs[cp].window().max(jumps.pairs[c].window());
    let n_target = count + window + 1;
    let mut out = CMat::zeros(n * count, n * count);
    for j in 0..count {
        let g: Series = BTreeMap::from([(mode_of(src_side, j), identity(n))]);
        let result = match form {
            Form::Factorized => {
                let h = project(&multiply(jumps.psi_inv(contour, cp, s), &g), src_side);
                let moved = transfer(contour, cp, c, sp, &h, n_target)?;
                let mut p = multiply(jumps.psi(contour, c, s), &moved);
                if c == cp {
                    for (m, v) in &g {
                        p.entry(*m).and_modify(|x| *x -= v).or_insert(-v.clone());
                    }
                }
                p
            }
            Form::JumpOnly => {
                let mult = match s {
                    Sign::Plus => &jumps.jump_invs[cp],
                    Sign::Minus => &jumps.jumps[cp],
                };
                let h = multiply(mult, &g);
                if c == cp {
                    project(&h, contour.half(cp, s)).into_iter().map(|(m, v)| (m, -v)).collect()
                } else {
                    transfer(contour, cp, c, sp, &project(&h, src_side), n_target)?
                }
            }
        };
        for (m, v) in result {
            let Some(i) = offset_of(dst_side, m) else { continue };
            if i >= count {
                continue;
            }
            for al in 0..n {
                for be in 0..n {
                    out[(al * count + i, be * count + j)] = v[(al, be)];
                }
            }
        }
    }
    Ok(out)
}

fn assemble(contour: &CircleContour, jumps: &JumpAssignment, count: usize, form: Form) -> Result<CMat> {
    let n = jumps.size();
    let m = contour.len();
    let per = n * count;
    let half = m * per;
    let mut l = CMat::zeros(2 * half, 2 * half);
    for s in [Sign::Plus, Sign::Minus] {
        let (row0, col0) = match s {
            Sign::Plus => (0, half),
            Sign::Minus => (half, 0),
        };
        for c in 0..m {
            for cp in 0..m {
                if !contour.share_face(c, cp, opposite(s)) {
                    continue;
                }
                let b = block(contour, jumps, c, cp, s, count, form)?;
                l.view_mut((row0 + c * per, col0 + cp * per), (per, per)).copy_from(&b);
            }
        }
    }
    Ok(l)
}

/// Finite section of `L` over `(sign, circle, color, offset)`, positive
/// sites first, with `offset < Q`.
pub fn assemble_multicircle_l(contour: &CircleContour, jumps: &JumpAssignment, q: f64) -> Result<CMat> {
    assemble(contour, jumps, modes_below(q), Form::Factorized)
}

/// The same section of the operator conjugated by the factors, built from
/// the jumps alone.
pub fn assemble_jump_form_l(contour: &CircleContour, jumps: &JumpAssignment, q: f64) -> Result<CMat> {
    assemble(contour, jumps, modes_below(q), Form::JumpOnly)
}

const FORM_AGREEMENT: f64 = 1e-10;

/// `det(1 + L)` on the finite section. The diagnostic is the larger of the
/// change under halving the cutoff and the gap to the jump-only form; a gap
/// above `1e-10` is reported as a resolution error.
pub fn tau_multicircle(contour: &CircleContour, jumps: &JumpAssignment, q: f64) -> Result<TauResult> {
    let count = modes_below(q);
    let value = det_one_plus(&assemble(contour, jumps, count, Form::Factorized)?);
    let coarse = det_one_plus(&assemble(contour, jumps, count / 2, Form::Factorized)?);
    let conjugated = det_one_plus(&assemble(contour, jumps, count, Form::JumpOnly)?);
    let gap = (value - conjugated).norm();
    if gap > FORM_AGREEMENT * value.norm().max(1.0) {
        return Err(TauError::Resolution(format!(
            "factorized and jump-only determinants differ by {gap:.3e} at cutoff {q}"
        )));
    }
    Ok(TauResult {
        value,
        cutoff: count as f64,
        diagnostic: gap.max((value - coarse).norm()),
        method: TauMethod::Multicircle,
    })
}

fn det_one_plus(l: &CMat) -> C64 {
    det(&(identity(l.nrows()) + l))
}
