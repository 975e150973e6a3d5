//! Foliation of the cylinder by straight bends.
//!
//! Each prebend is a straight segment of the flat cylinder joining `G` to
//! `F` whose image is a straight segment. Inside a band it is parallel to the
//! crease; inside a flat region its endpoints interpolate linearly between
//! the bounding lines. Prebends are parameterized by the domain `x` of their
//! midpoint, `t ∈ R/λZ`.

use serde::{Deserialize, Serialize};

use crate::embedding::{boundary_arc, CylinderEmbedding, Side};
use crate::error::{Error, Result};
use crate::flat_domain::{lemma_line_check, LineLemmaCertificate, Piece};
use crate::geom::{point_segment_distance, polyline_length, P2, P3, V3};
use crate::numeric::{bisect, wrap};

/// A prebend in unrolled coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prebend {
    pub t: f64,
    /// Unrolled `x` on `G` and on `F`.
    pub bottom_u: f64,
    pub top_u: f64,
    #[serde(skip)]
    piece: Option<Piece>,
}

impl Prebend {
    /// Horizontal run of the prebend per unit height.
    pub fn slope(&self) -> f64 {
        self.top_u - self.bottom_u
    }

    /// Flat length, which is also the length of the bend.
    pub fn length(&self) -> f64 {
        self.slope().hypot(1.0)
    }
}

/// Image of a prebend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bend {
    pub prebend: Prebend,
    /// Domain `x` of the endpoints on `G` and `F`.
    pub g_x: f64,
    pub f_x: f64,
    pub g_point: P3,
    pub f_point: P3,
}

impl Bend {
    pub fn length(&self) -> f64 {
        (self.f_point - self.g_point).norm()
    }
}

/// The bend foliation of an embedding.
#[derive(Debug, Clone, Copy)]
pub struct BendFoliation<'a> {
    emb: &'a CylinderEmbedding,
}

impl<'a> BendFoliation<'a> {
    pub fn new(emb: &'a CylinderEmbedding) -> Self {
        Self { emb }
    }

    pub fn embedding(&self) -> &'a CylinderEmbedding {
        self.emb
    }

    pub fn lambda(&self) -> f64 {
        self.emb.lambda()
    }

    /// Prebend whose midpoint has domain coordinate `t`.
    pub fn prebend(&self, t: f64) -> Prebend {
        self.through(t, 0.5)
    }

    /// Prebend through the boundary point with domain coordinate `x`.
    pub fn prebend_through(&self, side: Side, x: f64) -> Prebend {
        self.through(x, side.y())
    }

    /// Prebend through the point `(x, y)`, where `y` is `0`, `1/2` or `1`.
    fn through(&self, x: f64, y: f64) -> Prebend {
        let pat = self.emb.pattern();
        let (piece, u) = pat.locate(x, y);
        let (bottom_u, top_u) = match piece {
            Piece::Band(k) => {
                let near = pat.bands[k].near;
                let off = u - near.at(y);
                (near.bottom + off, near.top + off)
            }
            Piece::Region(k) => {
                let r = pat.regions[k];
                let span = r.right.at(y) - r.left.at(y);
                let theta = if span > 1e-15 { (u - r.left.at(y)) / span } else { 0.5 };
                (
                    r.left.bottom + theta * (r.right.bottom - r.left.bottom),
                    r.left.top + theta * (r.right.top - r.left.top),
                )
            }
        };
        Prebend {
            t: pat.to_domain(0.5 * (bottom_u + top_u)),
            bottom_u,
            top_u,
            piece: Some(piece),
        }
    }

    pub fn slope(&self, t: f64) -> f64 {
        self.prebend(t).slope()
    }

    pub fn bend_of(&self, p: &Prebend) -> Bend {
        let pat = self.emb.pattern();
        let piece = p.piece.unwrap_or_else(|| pat.locate(p.t, 0.5).0);
        Bend {
            prebend: *p,
            g_x: pat.to_domain(p.bottom_u),
            f_x: pat.to_domain(p.top_u),
            g_point: self.emb.point_unrolled(piece, p.bottom_u, 0.0),
            f_point: self.emb.point_unrolled(piece, p.top_u, 1.0),
        }
    }

    pub fn bend(&self, t: f64) -> Bend {
        self.bend_of(&self.prebend(t))
    }

    /// `s(t) − s(t + λ/2)`; antisymmetric under `t ↦ t + λ/2`.
    pub fn balance_defect(&self, t: f64) -> f64 {
        self.slope(t) - self.slope(t + 0.5 * self.lambda())
    }

    /// Smallest `t* ∈ [0, λ/2)` with equal slopes at `t*` and `t* + λ/2`.
    pub fn find_balanced_pair(&self, n_scan: usize) -> Result<BalancedPairFrame> {
        let half = 0.5 * self.lambda();
        let n = n_scan.max(2);
        let mut root = None;
        let mut prev = (0.0, self.balance_defect(0.0));
        if prev.1 == 0.0 {
            root = Some((0.0, 0));
        } else {
            for i in 1..=n {
                let t = half * i as f64 / n as f64;
                let f = self.balance_defect(t);
                if f == 0.0 {
                    root = Some((t, 0));
                    break;
                }
                if f.signum() != prev.1.signum() {
                    let r = bisect(|s| self.balance_defect(s), prev.0, t, 1e-13, 200)?;
                    root = Some((r.x, r.iterations));
                    break;
                }
                prev = (t, f);
            }
        }
        let (t_star, iterations) = root.ok_or(Error::NoSignChange)?;
        let t_star = if t_star >= half { 0.0 } else { t_star };
        Ok(BalancedPairFrame::new(self, t_star, iterations))
    }
}

/// Lengths of the boundary arcs cut out by the balanced pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcLengths {
    /// On `F`: from `b` to `a` and from `a` back to `b`, increasing `x`.
    pub f: [f64; 2],
    /// On `G`: from `d` to `c` and from `c` back to `d`.
    pub g: [f64; 2],
}

/// Balanced pair of bends and the labelling of their endpoints.
///
/// `u = [b, d]` and `v = [a, c]` with `a, b ∈ F` and `c, d ∈ G`; the roles of
/// the two bends are chosen so that `b` and `c` are the close pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedPairFrame {
    pub t_star: f64,
    pub bisection_iterations: usize,
    pub u: Bend,
    pub v: Bend,
    pub a: P3,
    pub b: P3,
    pub c: P3,
    pub d: P3,
    /// Spatial lengths of the four boundary arcs.
    pub arcs: ArcLengths,
    /// Flat lengths of the same arcs.
    pub flat_arcs: ArcLengths,
}

impl BalancedPairFrame {
    fn new(fol: &BendFoliation<'_>, t_star: f64, iterations: usize) -> Self {
        let lambda = fol.lambda();
        let first = fol.bend(t_star);
        let second = fol.bend(t_star + 0.5 * lambda);
        let (u, v) = if (first.f_point - second.g_point).norm() <= (second.f_point - first.g_point).norm() {
            (first, second)
        } else {
            (second, first)
        };
        let emb = fol.embedding();
        let arc = |side: Side, from: f64, to: f64| {
            polyline_length(&boundary_arc(emb, side, from, to, 256, 1.0 / 512.0))
        };
        let arcs = ArcLengths {
            f: [arc(Side::F, u.f_x, v.f_x), arc(Side::F, v.f_x, u.f_x)],
            g: [arc(Side::G, u.g_x, v.g_x), arc(Side::G, v.g_x, u.g_x)],
        };
        let flat = |from: f64, to: f64| wrap(to - from, lambda);
        let flat_arcs = ArcLengths {
            f: [flat(u.f_x, v.f_x), flat(v.f_x, u.f_x)],
            g: [flat(u.g_x, v.g_x), flat(v.g_x, u.g_x)],
        };
        Self {
            t_star,
            bisection_iterations: iterations,
            a: v.f_point,
            b: u.f_point,
            c: v.g_point,
            d: u.g_point,
            u,
            v,
            arcs,
            flat_arcs,
        }
    }

    /// `max |arc − 1|` over the four arcs plus `max |atan(slope)|` of the pair.
    pub fn square_division_defect(&self) -> f64 {
        let arc = self
            .arcs
            .f
            .iter()
            .chain(self.arcs.g.iter())
            .map(|l| (l - 1.0).abs())
            .fold(0.0, f64::max);
        let tilt = self.u.prebend.slope().atan().abs().max(self.v.prebend.slope().atan().abs());
        arc + tilt
    }
}

/// Straightness and length of sampled bends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BendReport {
    pub bends: usize,
    pub samples_per_bend: usize,
    pub min_length: f64,
    /// Largest distance from an interior image point to the chord.
    pub max_chord_deviation: f64,
    pub worst_t: f64,
}

/// Evaluates `n_bends` evenly spaced bends at `samples` interior points
/// each, through the embedding's own chart lookup.
pub fn bend_report(fol: &BendFoliation<'_>, n_bends: usize, samples: usize) -> BendReport {
    let emb = fol.embedding();
    let pat = emb.pattern();
    let mut r = BendReport {
        bends: n_bends,
        samples_per_bend: samples,
        min_length: f64::INFINITY,
        max_chord_deviation: 0.0,
        worst_t: 0.0,
    };
    for i in 0..n_bends {
        let t = fol.lambda() * i as f64 / n_bends as f64;
        let b = fol.bend(t);
        r.min_length = r.min_length.min(b.length());
        let p = b.prebend;
        for k in 1..=samples {
            let y = k as f64 / (samples + 1) as f64;
            let q = emb.point(pat.to_domain(p.bottom_u + y * p.slope()), y);
            let d = point_segment_distance(&q, &b.g_point, &b.f_point);
            if d > r.max_chord_deviation {
                r.max_chord_deviation = d;
                r.worst_t = t;
            }
        }
    }
    r
}

/// Planar shadow of the balanced pair along a direction parallel to both
/// bends, and the chain `λ = ℓ(F*) + ℓ(G*) ≥ ℓ(C1) + ℓ(C2) ≥ ℓ(A) + ℓ(B) ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCertificate {
    pub direction: V3,
    /// Orthonormal basis of the image plane.
    pub basis: [V3; 2],
    /// `A = Π(u)` from `Π(b)` to `Π(d)`, `B = Π(v)` from `Π(a)` to `Π(c)`.
    pub a_segment: [[f64; 2]; 2],
    pub b_segment: [[f64; 2]; 2],
    /// Which arcs were used: `0` is the arc leaving `b` (resp. `d`) in the
    /// direction of increasing `x`, `1` the other one.
    pub f_arc: usize,
    pub g_arc: usize,
    pub length_f_star: f64,
    pub length_g_star: f64,
    pub length_c1: f64,
    pub length_c2: f64,
    pub lambda: f64,
    pub c1_plus_c2: f64,
    pub x: [f64; 2],
    /// Points of `F*` and `G*` over `x`.
    pub x_on_f: P3,
    pub x_on_g: P3,
    pub lemma: LineLemmaCertificate,
    pub chain_tolerance: f64,
    pub passed: bool,
}

/// Unit normal of a plane parallel to both bends; for parallel bends, the
/// coordinate axis least aligned with them picks the plane.
fn common_normal(u: &V3, v: &V3) -> V3 {
    let n = u.cross(v);
    if n.norm() > 1e-9 * u.norm() * v.norm() {
        return n.normalize();
    }
    let axes = [V3::x(), V3::y(), V3::z()];
    let mut best = axes[0];
    for e in &axes[1..] {
        if e.dot(u).abs() < best.dot(u).abs() - 1e-12 {
            best = *e;
        }
    }
    u.cross(&best).normalize()
}

/// Projects the boundary arcs cut out by the balanced pair and searches the
/// four arc pairings for one whose shadows cross.
pub fn projection_certificate(
    emb: &CylinderEmbedding,
    frame: &BalancedPairFrame,
    chain_tolerance: f64,
) -> Result<ProjectionCertificate> {
    let dir_u = frame.b - frame.d;
    let dir_v = frame.a - frame.c;
    let n = common_normal(&dir_u, &dir_v);
    let helper = if n.x.abs() < 0.9 { V3::x() } else { V3::y() };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    let proj = |p: &P3| P2::new(p.coords.dot(&e1), p.coords.dot(&e2));
    let arc = |side: Side, from: f64, to: f64| boundary_arc(emb, side, from, to, 256, 1.0 / 512.0);
    let (u, v) = (&frame.u, &frame.v);
    // Arcs of F starting at b, arcs of G starting at d.
    let f_arcs = [arc(Side::F, u.f_x, v.f_x), {
        let mut a = arc(Side::F, v.f_x, u.f_x);
        a.reverse();
        a
    }];
    let g_arcs = [arc(Side::G, u.g_x, v.g_x), {
        let mut a = arc(Side::G, v.g_x, u.g_x);
        a.reverse();
        a
    }];
    let seg_a = [proj(&frame.b), proj(&frame.d)];
    let seg_b = [proj(&frame.a), proj(&frame.c)];
    let tol = 1e-9;
    let lambda = emb.lambda();
    for (fi, fa) in f_arcs.iter().enumerate() {
        for (gi, ga) in g_arcs.iter().enumerate() {
            let mut c1: Vec<P2> = fa.iter().map(proj).collect();
            let mut c2: Vec<P2> = ga.iter().map(proj).collect();
            // Pin the ends to the bend endpoints; the arcs agree with them
            // up to chart continuity.
            c1[0] = seg_a[0];
            c2[0] = seg_a[1];
            *c1.last_mut().unwrap() = seg_b[0];
            *c2.last_mut().unwrap() = seg_b[1];
            let lemma = match lemma_line_check(seg_a, seg_b, &c1, &c2, tol) {
                Ok(l) => l,
                Err(Error::Precondition(_)) => continue,
                Err(e) => return Err(e),
            };
            // Arc length along a projected curve does not map linearly to
            // the spatial arc, so locate the crossing by projected length.
            let lift = |curve: &[P3], planar: &[P2], at: f64| {
                let mut acc = 0.0;
                for (k, w) in planar.windows(2).enumerate() {
                    let l = (w[1] - w[0]).norm();
                    if acc + l >= at && l > 0.0 {
                        let s = (at - acc) / l;
                        return curve[k] + (curve[k + 1] - curve[k]) * s;
                    }
                    acc += l;
                }
                *curve.last().unwrap()
            };
            let length_f_star = polyline_length(fa);
            let length_g_star = polyline_length(ga);
            let c1_plus_c2 = lemma.length_c1 + lemma.length_c2;
            let passed = lemma.holds
                && c1_plus_c2 <= length_f_star + length_g_star + 1e-9
                && (length_f_star + length_g_star - lambda).abs() <= 1e-4 * lambda
                && c1_plus_c2 <= lambda + 1e-6
                && c1_plus_c2 >= 2.0 - chain_tolerance;
            return Ok(ProjectionCertificate {
                direction: n,
                basis: [e1, e2],
                a_segment: [[seg_a[0].x, seg_a[0].y], [seg_a[1].x, seg_a[1].y]],
                b_segment: [[seg_b[0].x, seg_b[0].y], [seg_b[1].x, seg_b[1].y]],
                f_arc: fi,
                g_arc: gi,
                length_f_star,
                length_g_star,
                length_c1: lemma.length_c1,
                length_c2: lemma.length_c2,
                lambda,
                c1_plus_c2,
                x: lemma.x,
                x_on_f: lift(fa, &c1, lemma.c1_to_a),
                x_on_g: lift(ga, &c2, lemma.c2_to_a),
                lemma,
                chain_tolerance,
                passed,
            });
        }
    }
    Err(Error::NoIntersectingPairing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingConfig;
    use crate::flat_domain::{CreasePattern, PatternId};

    fn emb(eps: f64) -> CylinderEmbedding {
        CylinderEmbedding::build(&CreasePattern::catalog(PatternId::P1), eps, &EmbeddingConfig::default()).unwrap()
    }

    #[test]
    fn bends_are_at_least_unit_length_and_straight() {
        let e = emb(0.1);
        let f = BendFoliation::new(&e);
        for i in 0..200 {
            let t = e.lambda() * i as f64 / 200.0;
            let b = f.bend(t);
            assert!(b.prebend.length() >= 1.0);
            assert!((b.length() - b.prebend.length()).abs() < 1e-12);
            let p = b.prebend;
            let pat = e.pattern();
            let mid = e.point(pat.to_domain(0.5 * (p.bottom_u + p.top_u)), 0.5);
            assert!((mid - nalgebra::center(&b.g_point, &b.f_point)).norm() < 1e-12);
        }
    }

    #[test]
    fn prebend_midpoint_matches_parameter() {
        let e = emb(0.3);
        let f = BendFoliation::new(&e);
        for i in 0..50 {
            let t = e.lambda() * i as f64 / 50.0;
            let p = f.prebend(t);
            assert!(e.pattern().domain.dx(p.t, t) < 1e-12);
        }
    }

    #[test]
    fn balance_defect_is_antisymmetric() {
        let e = emb(0.2);
        let f = BendFoliation::new(&e);
        for i in 0..40 {
            let t = e.lambda() * i as f64 / 40.0;
            assert!((f.balance_defect(t) + f.balance_defect(t + 0.5 * e.lambda())).abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_pair_has_equal_slopes() {
        let e = emb(0.2);
        let f = BendFoliation::new(&e);
        let frame = f.find_balanced_pair(1024).unwrap();
        assert!(frame.t_star >= 0.0 && frame.t_star < 0.5 * e.lambda());
        assert!((frame.u.prebend.slope() - frame.v.prebend.slope()).abs() < 1e-10);
        let total_f: f64 = frame.flat_arcs.f.iter().sum();
        assert!((total_f - e.lambda()).abs() < 1e-12);
    }

    #[test]
    fn limit_pair_splits_boundaries_into_unit_arcs() {
        let e = CylinderEmbedding::limit(&CreasePattern::catalog(PatternId::P1)).unwrap();
        let frame = BendFoliation::new(&e).find_balanced_pair(1024).unwrap();
        assert_eq!(frame.t_star, 0.0);
        assert!(frame.square_division_defect() < 1e-12, "{}", frame.square_division_defect());
    }

    #[test]
    fn projection_chain_holds() {
        let e = emb(0.1);
        let frame = BendFoliation::new(&e).find_balanced_pair(1024).unwrap();
        let c = projection_certificate(&e, &frame, 0.02).unwrap();
        assert!(c.passed, "{c:?}");
        assert!(c.direction.dot(&(frame.b - frame.d)).abs() < 1e-9);
        assert!(c.direction.dot(&(frame.a - frame.c)).abs() < 1e-9);
        assert!((c.lemma.length_a - frame.u.length()).abs() < 1e-9);
    }

    #[test]
    fn sampled_bends_are_straight() {
        let e = emb(0.05);
        let r = bend_report(&BendFoliation::new(&e), 400, 32);
        assert!(r.max_chord_deviation < 1e-8, "{r:?}");
        assert!(r.min_length >= 1.0 - 1e-12);
    }

    #[test]
    fn parallel_bends_pick_an_axis_plane() {
        let n = common_normal(&V3::new(0.0, 0.0, 1.0), &V3::new(0.0, 0.0, 2.0));
        assert!(n.z.abs() < 1e-15 && (n.norm() - 1.0).abs() < 1e-15);
    }
}
