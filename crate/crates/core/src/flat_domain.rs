//! Flat cylinders, crease patterns and their thickening.
//!
//! Coordinates: the flat cylinder is `[0, λ) × [0, 1]` with `x` periodic.
//! The bottom boundary `y = 0` is `G`, the top boundary `y = 1` is `F`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{segment_segment, P2, P3};
use crate::numeric::wrap;

const TOL: f64 = 1e-9;

/// Flat cylinder of circumference `λ` and height 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatCylinder {
    lambda: f64,
}

impl FlatCylinder {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::OutOfRange(format!("circumference {lambda} must be positive")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn wrap_x(&self, x: f64) -> f64 {
        wrap(x, self.lambda)
    }

    /// Horizontal distance on the circle `R/λZ`.
    pub fn dx(&self, a: f64, b: f64) -> f64 {
        let d = wrap(a - b, self.lambda);
        d.min(self.lambda - d)
    }

    /// Intrinsic flat distance between two points of the cylinder.
    pub fn distance(&self, p: &P2, q: &P2) -> f64 {
        self.dx(p.x, q.x).hypot(p.y - q.y)
    }

    pub fn contains(&self, p: &P2) -> bool {
        p.x.is_finite() && (-TOL..=1.0 + TOL).contains(&p.y)
    }
}

/// Catalogued crease patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternId {
    P1,
    P2,
    P1m,
    P2m,
}

impl PatternId {
    pub const ALL: [PatternId; 4] = [PatternId::P1, PatternId::P2, PatternId::P1m, PatternId::P2m];

    pub fn name(&self) -> &'static str {
        match self {
            PatternId::P1 => "P1",
            PatternId::P2 => "P2",
            PatternId::P1m => "P1m",
            PatternId::P2m => "P2m",
        }
    }

    pub fn is_mirror(&self) -> bool {
        matches!(self, PatternId::P1m | PatternId::P2m)
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PatternId::ALL
            .iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::UnknownPattern(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldSign {
    Mountain,
    Valley,
}

/// A straight crease joining the two boundary components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crease {
    pub p0: [f64; 2],
    pub p1: [f64; 2],
    pub sign: FoldSign,
}

impl Crease {
    /// Endpoint on `y = 0`.
    pub fn bottom_x(&self) -> f64 {
        if self.p0[1] < self.p1[1] {
            self.p0[0]
        } else {
            self.p1[0]
        }
    }

    /// Endpoint on `y = 1`.
    pub fn top_x(&self) -> f64 {
        if self.p0[1] < self.p1[1] {
            self.p1[0]
        } else {
            self.p0[0]
        }
    }

    pub fn line(&self) -> Line {
        Line::new(self.bottom_x(), self.top_x())
    }
}

/// Crease pattern on the base cylinder of circumference 2.
///
/// `triangles` are listed in strip order; crease `k` separates triangle `k`
/// from triangle `k + 1` (cyclically, the last crease closes the strip
/// across the seam). `stack_order[k]` is the puncture rank (1 = bottom
/// layer) of triangle `k` when the folded stack is pierced vertically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreasePattern {
    pub pattern_id: String,
    pub creases: Vec<Crease>,
    pub triangles: Vec<[[f64; 2]; 3]>,
    pub stack_order: Vec<usize>,
}

/// Circumference of the unthickened base cylinder.
pub const BASE_LAMBDA: f64 = 2.0;

fn p1_triangles() -> Vec<[[f64; 2]; 3]> {
    vec![
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        [[1.0, 0.0], [2.0, 1.0], [1.0, 1.0]],
        [[1.0, 0.0], [2.0, 0.0], [2.0, 1.0]],
    ]
}

fn p1_creases() -> Vec<[[f64; 2]; 2]> {
    vec![
        [[0.0, 1.0], [1.0, 0.0]],
        [[1.0, 0.0], [1.0, 1.0]],
        [[1.0, 0.0], [2.0, 1.0]],
        [[2.0, 0.0], [2.0, 1.0]],
    ]
}

impl CreasePattern {
    /// Catalogue entry. The mirror patterns reflect the layout in `y ↦ 1 - y`
    /// and keep the stacking, which mirrors the folded surface.
    pub fn catalog(id: PatternId) -> Self {
        let stack = match id {
            PatternId::P1 | PatternId::P1m => vec![1, 2, 4, 3],
            PatternId::P2 | PatternId::P2m => vec![2, 1, 3, 4],
        };
        let flip = |p: [f64; 2]| {
            if id.is_mirror() {
                [p[0], 1.0 - p[1]]
            } else {
                p
            }
        };
        let triangles: Vec<_> = p1_triangles()
            .into_iter()
            .map(|t| [flip(t[0]), flip(t[1]), flip(t[2])])
            .collect();
        let mut creases: Vec<Crease> = p1_creases()
            .into_iter()
            .map(|c| Crease {
                p0: flip(c[0]),
                p1: flip(c[1]),
                sign: FoldSign::Mountain,
            })
            .collect();
        let signs = derived_signs(&stack);
        for (c, s) in creases.iter_mut().zip(signs) {
            *c = Crease { sign: s, ..*c };
        }
        Self {
            pattern_id: id.name().to_string(),
            creases,
            triangles,
            stack_order: stack,
        }
    }

    pub fn from_id(name: &str) -> Result<Self> {
        Ok(Self::catalog(name.parse()?))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: CreasePattern = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Fold signs forced by the stacking: the front side of triangle `k`
    /// faces `(-1)^k e_z` once folded, and a crease whose next layer lies on
    /// the back of the current one is a mountain fold.
    pub fn derived_signs(&self) -> Vec<FoldSign> {
        derived_signs(&self.stack_order)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.triangles.len();
        let bad = |m: String| Err(Error::InvalidPattern(m));
        if n < 2 || n % 2 == 1 {
            return bad(format!("need an even number (≥ 2) of triangles, got {n}"));
        }
        if self.creases.len() != n {
            return bad(format!("{} creases for {n} triangles", self.creases.len()));
        }
        let mut ranks = self.stack_order.clone();
        ranks.sort_unstable();
        if ranks != (1..=n).collect::<Vec<_>>() {
            return bad(format!("stack_order {:?} is not a permutation of 1..={n}", self.stack_order));
        }
        let mut area = 0.0;
        for (k, t) in self.triangles.iter().enumerate() {
            if t.iter().flatten().any(|v| !v.is_finite()) {
                return bad(format!("triangle {k} has non-finite coordinates"));
            }
            if t.iter().any(|v| v[1] < -TOL || v[1] > 1.0 + TOL) {
                return bad(format!("triangle {k} leaves the strip 0 ≤ y ≤ 1"));
            }
            if !is_unit_right_isosceles(t) {
                return bad(format!("triangle {k} is not right isosceles with legs 1"));
            }
            area += signed_area(t).abs();
        }
        if (area - BASE_LAMBDA).abs() > 1e-9 {
            return bad(format!("triangles cover area {area}, expected {BASE_LAMBDA}"));
        }
        for i in 0..n {
            for j in i + 1..n {
                for shift in [-BASE_LAMBDA, 0.0, BASE_LAMBDA] {
                    if interiors_overlap(&self.triangles[i], &shifted(&self.triangles[j], shift)) {
                        return bad(format!("triangles {i} and {j} overlap"));
                    }
                }
            }
        }
        for (k, c) in self.creases.iter().enumerate() {
            let ys = [c.p0[1], c.p1[1]];
            let spans = (ys[0].abs() < TOL && (ys[1] - 1.0).abs() < TOL)
                || (ys[1].abs() < TOL && (ys[0] - 1.0).abs() < TOL);
            if !spans {
                return bad(format!("crease {k} does not join y = 0 to y = 1"));
            }
            let next = (k + 1) % n;
            let next_shift = if next == 0 { BASE_LAMBDA } else { 0.0 };
            if !has_edge(&self.triangles[k], c, 0.0) {
                return bad(format!("crease {k} is not an edge of triangle {k}"));
            }
            if !has_edge(&self.triangles[next], c, next_shift) {
                return bad(format!("crease {k} is not an edge of triangle {next}"));
            }
        }
        for k in 0..n {
            let a = self.creases[k].line();
            let mut b = self.creases[(k + 1) % n].line();
            if k + 1 == n {
                b = b.shifted(BASE_LAMBDA);
            }
            if b.bottom < a.bottom - TOL || b.top < a.top - TOL {
                return bad(format!("creases {k} and {} are out of strip order", (k + 1) % n));
            }
        }
        let expected = self.derived_signs();
        for (k, (c, s)) in self.creases.iter().zip(expected).enumerate() {
            if c.sign != s {
                return bad(format!(
                    "crease {k} is marked {:?} but the stacking makes it {:?}",
                    c.sign, s
                ));
            }
        }
        Ok(())
    }

    /// Affine isometries of the reflection chain, one per triangle.
    fn reflection_chain(&self) -> Vec<(Matrix2<f64>, Vector2<f64>)> {
        let mut maps = Vec::with_capacity(self.len());
        let mut a = Matrix2::identity();
        let mut b = Vector2::zeros();
        maps.push((a, b));
        for c in &self.creases[..self.len() - 1] {
            let p = Vector2::new(c.p0[0], c.p0[1]);
            let d = (Vector2::new(c.p1[0], c.p1[1]) - p).normalize();
            let r = 2.0 * d * d.transpose() - Matrix2::identity();
            // x ↦ A (p + R (x - p)) + b
            let na = a * r;
            let nb = a * (p - r * p) + b;
            a = na;
            b = nb;
            maps.push((a, b));
        }
        maps
    }
}

fn derived_signs(stack: &[usize]) -> Vec<FoldSign> {
    let n = stack.len();
    (0..n)
        .map(|k| {
            let rise = stack[(k + 1) % n] as f64 - stack[k] as f64;
            let front = if k % 2 == 0 { 1.0 } else { -1.0 };
            if rise * front > 0.0 {
                FoldSign::Valley
            } else {
                FoldSign::Mountain
            }
        })
        .collect()
}

fn signed_area(t: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]))
}

fn is_unit_right_isosceles(t: &[[f64; 2]; 3]) -> bool {
    (0..3).any(|i| {
        let o = Vector2::from(t[i]);
        let a = Vector2::from(t[(i + 1) % 3]) - o;
        let b = Vector2::from(t[(i + 2) % 3]) - o;
        (a.norm() - 1.0).abs() < TOL && (b.norm() - 1.0).abs() < TOL && a.dot(&b).abs() < TOL
    })
}

fn shifted(t: &[[f64; 2]; 3], dx: f64) -> [[f64; 2]; 3] {
    [
        [t[0][0] + dx, t[0][1]],
        [t[1][0] + dx, t[1][1]],
        [t[2][0] + dx, t[2][1]],
    ]
}

fn has_edge(t: &[[f64; 2]; 3], c: &Crease, shift: f64) -> bool {
    let close = |c: [f64; 2], v: [f64; 2]| (v[0] + shift - c[0]).abs() < TOL && (v[1] - c[1]).abs() < TOL;
    (0..3).any(|i| {
        let a = t[i];
        let b = t[(i + 1) % 3];
        (close(c.p0, a) && close(c.p1, b)) || (close(c.p0, b) && close(c.p1, a))
    })
}

/// Separating-axis test on triangle interiors.
fn interiors_overlap(s: &[[f64; 2]; 3], t: &[[f64; 2]; 3]) -> bool {
    for tri in [s, t] {
        for i in 0..3 {
            let e = Vector2::from(tri[(i + 1) % 3]) - Vector2::from(tri[i]);
            let axis = Vector2::new(-e.y, e.x);
            let proj = |q: &[[f64; 2]; 3]| {
                let v: Vec<f64> = q.iter().map(|p| axis.dot(&Vector2::from(*p))).collect();
                (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            };
            let (a0, a1) = proj(s);
            let (b0, b1) = proj(t);
            if a1 <= b0 + TOL || b1 <= a0 + TOL {
                return false;
            }
        }
    }
    true
}

fn barycentric_inside(t: &[[f64; 2]; 3], p: &P2, tol: f64) -> bool {
    let area = signed_area(t);
    let sub = |a: [f64; 2], b: [f64; 2]| signed_area(&[a, b, [p.x, p.y]]) / area;
    sub(t[0], t[1]) >= -tol && sub(t[1], t[2]) >= -tol && sub(t[2], t[0]) >= -tol
}

/// Folds the base cylinder by the chain of reflections in its creases.
///
/// Triangle 0 stays fixed; the image lies in the plane `z = 0`.
pub fn fold_by_reflections(pattern: &CreasePattern, p: &P2) -> Result<P3> {
    let x = wrap(p.x, BASE_LAMBDA);
    let maps = pattern.reflection_chain();
    for tol in [1e-12, 1e-9] {
        for (k, t) in pattern.triangles.iter().enumerate() {
            for shift in [0.0, BASE_LAMBDA, -BASE_LAMBDA] {
                let q = P2::new(x + shift, p.y);
                if barycentric_inside(t, &q, tol) {
                    let (a, b) = maps[k];
                    let img = a * q.coords + b;
                    return Ok(P3::new(img.x, img.y, 0.0));
                }
            }
        }
    }
    Err(Error::OutOfRange(format!("point ({}, {}) is not on the base cylinder", p.x, p.y)))
}

/// A straight line crossing the strip, given by its `x` positions on
/// `y = 0` and `y = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub bottom: f64,
    pub top: f64,
}

impl Line {
    pub fn new(bottom: f64, top: f64) -> Self {
        Self { bottom, top }
    }

    pub fn at(&self, y: f64) -> f64 {
        self.bottom + (self.top - self.bottom) * y
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.bottom + self.top)
    }

    pub fn shifted(&self, dx: f64) -> Self {
        Self::new(self.bottom + dx, self.top + dx)
    }

    /// Unit direction from the bottom endpoint to the top endpoint.
    pub fn direction(&self) -> Vector2<f64> {
        Vector2::new(self.top - self.bottom, 1.0).normalize()
    }

    /// Unit normal pointing to increasing `x`.
    pub fn normal(&self) -> Vector2<f64> {
        let d = self.direction();
        Vector2::new(d.y, -d.x)
    }

    /// Horizontal extent of a band of perpendicular width 1 along this line.
    pub fn secant(&self) -> f64 {
        (1.0 + (self.top - self.bottom).powi(2)).sqrt()
    }
}

/// Band replacing a crease.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldBand {
    pub crease: usize,
    pub near: Line,
    pub far: Line,
    /// Perpendicular width.
    pub width: f64,
    /// Horizontal extent, `width / sin α`.
    pub axial_width: f64,
}

/// Flat trapezoid between two bands; it contains a copy of a base triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatRegion {
    pub triangle: usize,
    pub left: Line,
    pub right: Line,
}

/// Which piece of the thickened pattern a point lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    Region(usize),
    Band(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThickenConfig {
    /// Share of `ε` spent on widening the flat regions at the crease vertices.
    pub gap_fraction: f64,
    /// Relative perpendicular band widths; `None` means equal widths.
    pub weights: Option<Vec<f64>>,
}

impl Default for ThickenConfig {
    fn default() -> Self {
        Self {
            gap_fraction: 0.2,
            weights: None,
        }
    }
}

/// Crease pattern with every crease widened into a band.
///
/// Unrolled coordinate: `u = x + seam_offset`, read modulo `λ` in the window
/// starting at the left edge of region 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThickenedPattern {
    pub base: CreasePattern,
    pub epsilon: f64,
    pub domain: FlatCylinder,
    /// Extra width given to each flat region on both boundaries.
    pub vertex_gap: f64,
    pub seam_offset: f64,
    pub bands: Vec<FoldBand>,
    pub regions: Vec<FlatRegion>,
}

impl ThickenedPattern {
    pub fn lambda(&self) -> f64 {
        self.domain.lambda()
    }

    pub fn n(&self) -> usize {
        self.bands.len()
    }

    /// The unthickened pattern on the circumference-2 cylinder.
    pub fn limit(base: &CreasePattern) -> Result<Self> {
        base.validate()?;
        build(base, 0.0, 0.0, &vec![0.0; base.len()])
    }

    /// Left edge of region 0.
    pub fn origin_line(&self) -> Line {
        self.regions[0].left
    }

    /// Boundary lines in unrolled order: region 0's left edge, then
    /// near and far lines of each band. The window closes at `origin + λ`.
    pub fn lines(&self) -> Vec<Line> {
        let mut v = Vec::with_capacity(2 * self.n() + 1);
        v.push(self.origin_line());
        for b in &self.bands {
            v.push(b.near);
            v.push(b.far);
        }
        v.push(self.origin_line().shifted(self.lambda()));
        v
    }

    /// Pieces in unrolled order, matching consecutive pairs of `lines()`.
    pub fn pieces(&self) -> Vec<Piece> {
        (0..self.n()).flat_map(|k| [Piece::Region(k), Piece::Band(k)]).collect()
    }

    pub fn to_unrolled(&self, x: f64) -> f64 {
        x + self.seam_offset
    }

    pub fn to_domain(&self, u: f64) -> f64 {
        self.domain.wrap_x(u - self.seam_offset)
    }

    /// Unrolled coordinate of domain `x` at height `y`, inside the window.
    pub fn unroll(&self, x: f64, y: f64) -> f64 {
        let start = self.origin_line().at(y);
        start + wrap(self.to_unrolled(x) - start, self.lambda())
    }

    /// Locates a domain point; returns the piece and its unrolled `u`.
    pub fn locate(&self, x: f64, y: f64) -> (Piece, f64) {
        let u = self.unroll(x, y);
        let lines = self.lines();
        let pieces = self.pieces();
        let mut idx = 0;
        for (m, l) in lines[..pieces.len()].iter().enumerate() {
            if l.at(y) <= u {
                idx = m;
            }
        }
        (pieces[idx], u)
    }
}

/// Thickens a base pattern so that the circumference becomes `2 + ε`.
pub fn thicken(base: &CreasePattern, epsilon: f64, config: &ThickenConfig) -> Result<ThickenedPattern> {
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if !(0.0..1.0).contains(&config.gap_fraction) {
        return Err(Error::OutOfRange(format!(
            "gap fraction {} must lie in [0, 1)",
            config.gap_fraction
        )));
    }
    base.validate()?;
    let n = base.len();
    let weights = match &config.weights {
        None => vec![1.0; n],
        Some(w) => {
            if w.len() != n || w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::OutOfRange(format!(
                    "need {n} positive band weights, got {w:?}"
                )));
            }
            w.clone()
        }
    };
    let secants: f64 = base
        .creases
        .iter()
        .zip(&weights)
        .map(|(c, w)| w * c.line().secant())
        .sum();
    let scale = (1.0 - config.gap_fraction) * epsilon / secants;
    let widths: Vec<f64> = weights.iter().map(|w| w * scale).collect();
    let gap = config.gap_fraction * epsilon / n as f64;
    build(base, epsilon, gap, &widths)
}

fn build(base: &CreasePattern, epsilon: f64, gap: f64, widths: &[f64]) -> Result<ThickenedPattern> {
    let n = base.len();
    let mut bands = Vec::with_capacity(n);
    let mut shift = 0.0;
    for (k, c) in base.creases.iter().enumerate() {
        let line = c.line();
        let axial = widths[k] * line.secant();
        shift += gap;
        let near = line.shifted(shift);
        let far = near.shifted(axial);
        shift += axial;
        bands.push(FoldBand {
            crease: k,
            near,
            far,
            width: widths[k],
            axial_width: axial,
        });
    }
    let lambda = BASE_LAMBDA + shift;
    let origin = bands[n - 1].far.shifted(-lambda);
    let regions: Vec<FlatRegion> = (0..n)
        .map(|k| FlatRegion {
            triangle: k,
            left: if k == 0 { origin } else { bands[k - 1].far },
            right: bands[k].near,
        })
        .collect();
    let t = ThickenedPattern {
        base: base.clone(),
        epsilon,
        domain: FlatCylinder::new(lambda)?,
        vertex_gap: gap,
        seam_offset: origin.bottom + 0.5 * gap,
        bands,
        regions,
    };
    let lines = t.lines();
    for w in lines.windows(2) {
        for y in [0.0, 1.0] {
            if w[1].at(y) < w[0].at(y) - 1e-12 {
                return Err(Error::BandsCollide(format!(
                    "boundary lines cross at y = {y}: {:.6} > {:.6}",
                    w[0].at(y),
                    w[1].at(y)
                )));
            }
        }
    }
    Ok(t)
}

/// Outcome of the line lemma on concrete planar data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineLemmaCertificate {
    pub x: [f64; 2],
    pub length_a: f64,
    pub length_b: f64,
    pub length_c1: f64,
    pub length_c2: f64,
    pub c1_to_a: f64,
    pub c2_to_a: f64,
    pub c1_to_b: f64,
    pub c2_to_b: f64,
    /// `ℓ(C1) + ℓ(C2) - ℓ(A) - ℓ(B)`.
    pub slack: f64,
    pub holds: bool,
}

/// Planar lemma: if `C1` joins `A1` to `B1`, `C2` joins `A2` to `B2`, and the
/// two curves meet, then `ℓ(C1) + ℓ(C2) ≥ ℓ(A) + ℓ(B)`.
///
/// The endpoints of `B` are matched to whichever end each curve reaches.
pub fn lemma_line_check(a: [P2; 2], b: [P2; 2], c1: &[P2], c2: &[P2], tol: f64) -> Result<LineLemmaCertificate> {
    let pre = |m: String| Err(Error::Precondition(m));
    if c1.is_empty() || c2.is_empty() {
        return pre("curves must have at least one point".into());
    }
    let la = (a[1] - a[0]).norm();
    let lb = (b[1] - b[0]).norm();
    if la < 1.0 - tol || lb < 1.0 - tol {
        return pre(format!("segments must have length ≥ 1, got {la:.6} and {lb:.6}"));
    }
    let near = |p: &P2, q: &P2| (p - q).norm() <= tol;
    if !(near(&c1[0], &a[0]) && near(&c2[0], &a[1])) {
        return pre("C1 must start at A1 and C2 at A2".into());
    }
    let e1 = c1.last().unwrap();
    let e2 = c2.last().unwrap();
    let ends_ok = (near(e1, &b[0]) && near(e2, &b[1])) || (near(e1, &b[1]) && near(e2, &b[0]));
    if !ends_ok {
        return pre("C1 and C2 must end at distinct endpoints of B".into());
    }
    let lift = |p: &P2| P3::new(p.x, p.y, 0.0);
    let segs = |c: &[P2]| -> Vec<(P3, P3)> {
        if c.len() == 1 {
            vec![(lift(&c[0]), lift(&c[0]))]
        } else {
            c.windows(2).map(|w| (lift(&w[0]), lift(&w[1]))).collect()
        }
    };
    let s1 = segs(c1);
    let s2 = segs(c2);
    let mut hit = None;
    'outer: for (i, (p, q)) in s1.iter().enumerate() {
        for (j, (r, s)) in s2.iter().enumerate() {
            let (d, ps, pt) = segment_segment(p, q, r, s);
            if d <= tol {
                hit = Some((i, ps, j, pt));
                break 'outer;
            }
        }
    }
    let (i, ps, j, pt) = hit.ok_or_else(|| Error::Precondition("C1 and C2 do not meet".into()))?;
    let prefix = |s: &[(P3, P3)], k: usize, t: f64| -> f64 {
        s[..k].iter().map(|(p, q)| (q - p).norm()).sum::<f64>() + t * (s[k].1 - s[k].0).norm()
    };
    let total = |s: &[(P3, P3)]| s.iter().map(|(p, q)| (q - p).norm()).sum::<f64>();
    let x1 = s1[i].0 + (s1[i].1 - s1[i].0) * ps;
    let x2 = s2[j].0 + (s2[j].1 - s2[j].0) * pt;
    let x = nalgebra::center(&x1, &x2);
    let l1 = total(&s1);
    let l2 = total(&s2);
    let c1a = prefix(&s1, i, ps);
    let c2a = prefix(&s2, j, pt);
    let slack = l1 + l2 - la - lb;
    Ok(LineLemmaCertificate {
        x: [x.x, x.y],
        length_a: la,
        length_b: lb,
        length_c1: l1,
        length_c2: l2,
        c1_to_a: c1a,
        c2_to_a: c2a,
        c1_to_b: l1 - c1a,
        c2_to_b: l2 - c2a,
        slack,
        holds: slack >= -tol && la + lb >= 2.0 - tol,
    })
}
