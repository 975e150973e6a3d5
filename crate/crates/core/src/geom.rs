//! Small geometric kernels shared by the verifiers.

use nalgebra::{Point2, Point3, Vector2, Vector3};

pub type P2 = Point2<f64>;
pub type P3 = Point3<f64>;
pub type V2 = Vector2<f64>;
pub type V3 = Vector3<f64>;

/// Total length of a polyline.
pub fn polyline_length(pts: &[P3]) -> f64 {
    pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

pub fn polyline_length_2d(pts: &[P2]) -> f64 {
    pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Closest point on segment `[a, b]` to `p`, with its parameter.
pub fn closest_on_segment(p: &P3, a: &P3, b: &P3) -> (P3, f64) {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return (*a, 0.0);
    }
    let t = ((p - a).dot(&d) / len2).clamp(0.0, 1.0);
    (a + d * t, t)
}

pub fn point_segment_distance(p: &P3, a: &P3, b: &P3) -> f64 {
    (p - closest_on_segment(p, a, b).0).norm()
}

/// Distance between segments `[p1, q1]` and `[p2, q2]` with the closest parameters.
pub fn segment_segment(p1: &P3, q1: &P3, p2: &P3, q2: &P3) -> (f64, f64, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON * f64::EPSILON && e <= f64::EPSILON * f64::EPSILON {
        return ((p1 - p2).norm(), 0.0, 0.0);
    }
    if a <= f64::EPSILON * f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON * f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    ((c1 - c2).norm(), s, t)
}

/// Closest point of triangle `abc` to `p`.
pub fn closest_on_triangle(p: &P3, a: &P3, b: &P3, c: &P3) -> P3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn point_triangle_distance(p: &P3, t: &[P3; 3]) -> f64 {
    (p - closest_on_triangle(p, &t[0], &t[1], &t[2])).norm()
}

/// Whether segment `[p, q]` meets triangle `t` (boundary inclusive).
fn segment_hits_triangle(p: &P3, q: &P3, t: &[P3; 3]) -> bool {
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let n = e1.cross(&e2);
    let dp = n.dot(&(p - t[0]));
    let dq = n.dot(&(q - t[0]));
    if (dp > 0.0 && dq > 0.0) || (dp < 0.0 && dq < 0.0) {
        return false;
    }
    if dp == 0.0 && dq == 0.0 {
        return false; // coplanar, handled separately
    }
    let s = dp / (dp - dq);
    let x = p + (q - p) * s;
    inside_triangle_3d(&x, t, &n)
}

fn inside_triangle_3d(x: &P3, t: &[P3; 3], n: &V3) -> bool {
    let scale = n.norm_squared();
    let tol = -1e-14 * scale;
    for i in 0..3 {
        let a = t[i];
        let b = t[(i + 1) % 3];
        if (b - a).cross(&(x - a)).dot(n) < tol {
            return false;
        }
    }
    true
}

fn orient2(a: &V2, b: &V2, c: &V2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Closed-segment intersection test in the plane.
pub fn segments_intersect_2d(a: &V2, b: &V2, c: &V2, d: &V2) -> bool {
    let o1 = orient2(a, b, c);
    let o2 = orient2(a, b, d);
    let o3 = orient2(c, d, a);
    let o4 = orient2(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    let on = |p: &V2, q: &V2, r: &V2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (o1 == 0.0 && on(a, b, c))
        || (o2 == 0.0 && on(a, b, d))
        || (o3 == 0.0 && on(c, d, a))
        || (o4 == 0.0 && on(c, d, b))
}

fn coplanar_triangles_intersect(s: &[P3; 3], t: &[P3; 3], n: &V3) -> bool {
    // Drop the dominant normal axis.
    let (i, j) = if n.x.abs() >= n.y.abs() && n.x.abs() >= n.z.abs() {
        (1, 2)
    } else if n.y.abs() >= n.z.abs() {
        (0, 2)
    } else {
        (0, 1)
    };
    let pa: Vec<V2> = s.iter().map(|p| V2::new(p[i], p[j])).collect();
    let pb: Vec<V2> = t.iter().map(|p| V2::new(p[i], p[j])).collect();
    for a in 0..3 {
        for b in 0..3 {
            if segments_intersect_2d(&pa[a], &pa[(a + 1) % 3], &pb[b], &pb[(b + 1) % 3]) {
                return true;
            }
        }
    }
    let inside = |tri: &[V2], p: &V2| {
        let o = [
            orient2(&tri[0], &tri[1], p),
            orient2(&tri[1], &tri[2], p),
            orient2(&tri[2], &tri[0], p),
        ];
        (o[0] >= 0.0 && o[1] >= 0.0 && o[2] >= 0.0) || (o[0] <= 0.0 && o[1] <= 0.0 && o[2] <= 0.0)
    };
    inside(&pb, &pa[0]) || inside(&pa, &pb[0])
}

/// Exact-predicate-free triangle/triangle intersection, coplanar case included.
pub fn triangles_intersect(s: &[P3; 3], t: &[P3; 3]) -> bool {
    let ns = (s[1] - s[0]).cross(&(s[2] - s[0]));
    let nt = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let ds: Vec<f64> = t.iter().map(|p| ns.dot(&(p - s[0]))).collect();
    let dt: Vec<f64> = s.iter().map(|p| nt.dot(&(p - t[0]))).collect();
    let all_pos = |d: &[f64]| d.iter().all(|&v| v > 0.0);
    let all_neg = |d: &[f64]| d.iter().all(|&v| v < 0.0);
    if all_pos(&ds) || all_neg(&ds) || all_pos(&dt) || all_neg(&dt) {
        return false;
    }
    let scale_s = ns.norm() * (t[0] - s[0]).norm().max(1e-300);
    let coplanar = ds.iter().all(|d| d.abs() <= 1e-13 * scale_s.max(1e-300))
        && ns.cross(&nt).norm() <= 1e-12 * ns.norm() * nt.norm();
    if coplanar || ds.iter().all(|&d| d == 0.0) {
        return coplanar_triangles_intersect(s, t, &ns);
    }
    for i in 0..3 {
        if segment_hits_triangle(&s[i], &s[(i + 1) % 3], t)
            || segment_hits_triangle(&t[i], &t[(i + 1) % 3], s)
        {
            return true;
        }
    }
    false
}

/// Distance between two triangles.
pub fn triangle_distance(s: &[P3; 3], t: &[P3; 3]) -> f64 {
    if triangles_intersect(s, t) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for p in s {
        best = best.min(point_triangle_distance(p, t));
    }
    for p in t {
        best = best.min(point_triangle_distance(p, s));
    }
    for i in 0..3 {
        for j in 0..3 {
            let (d, _, _) = segment_segment(&s[i], &s[(i + 1) % 3], &t[j], &t[(j + 1) % 3]);
            best = best.min(d);
        }
    }
    best
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: P3,
    pub max: P3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: P3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: P3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of(points: &[P3]) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &P3) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    pub fn merge(&self, o: &Aabb) -> Aabb {
        let mut b = *self;
        b.grow(&o.min);
        b.grow(&o.max);
        b
    }

    pub fn center(&self) -> P3 {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn distance(&self, o: &Aabb) -> f64 {
        let mut s = 0.0;
        for k in 0..3 {
            let gap = (o.min[k] - self.max[k]).max(self.min[k] - o.max[k]).max(0.0);
            s += gap * gap;
        }
        s.sqrt()
    }

    pub fn distance_to_point(&self, p: &P3) -> f64 {
        let mut s = 0.0;
        for k in 0..3 {
            let gap = (self.min[k] - p[k]).max(p[k] - self.max[k]).max(0.0);
            s += gap * gap;
        }
        s.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> P3 {
        P3::new(x, y, z)
    }

    #[test]
    fn segment_distance_skew_lines() {
        let (d, s, t) = segment_segment(
            &p(-1.0, 0.0, 0.0),
            &p(1.0, 0.0, 0.0),
            &p(0.0, -1.0, 2.0),
            &p(0.0, 1.0, 2.0),
        );
        assert!((d - 2.0).abs() < 1e-15);
        assert!((s - 0.5).abs() < 1e-15 && (t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn segment_distance_parallel() {
        let (d, _, _) = segment_segment(
            &p(0.0, 0.0, 0.0),
            &p(1.0, 0.0, 0.0),
            &p(2.0, 1.0, 0.0),
            &p(3.0, 1.0, 0.0),
        );
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn point_triangle_regions() {
        let t = [p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0)];
        assert!((point_triangle_distance(&p(0.2, 0.2, 3.0), &t) - 3.0).abs() < 1e-15);
        assert!((point_triangle_distance(&p(-1.0, -1.0, 0.0), &t) - 2f64.sqrt()).abs() < 1e-15);
        assert!((point_triangle_distance(&p(1.0, 1.0, 0.0), &t) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn crossing_triangles_intersect() {
        let s = [p(0.0, 0.0, 0.0), p(2.0, 0.0, 0.0), p(0.0, 2.0, 0.0)];
        let t = [p(0.5, 0.5, -1.0), p(0.5, 0.5, 1.0), p(3.0, 3.0, 0.0)];
        assert!(triangles_intersect(&s, &t));
        assert_eq!(triangle_distance(&s, &t), 0.0);
    }

    #[test]
    fn stacked_triangles_are_separated() {
        let s = [p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0)];
        let t = [p(0.0, 0.0, 0.25), p(1.0, 0.0, 0.25), p(0.0, 1.0, 0.25)];
        assert!(!triangles_intersect(&s, &t));
        assert!((triangle_distance(&s, &t) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn coplanar_overlap_is_detected() {
        let s = [p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0)];
        let t = [p(0.1, 0.1, 0.0), p(0.3, 0.1, 0.0), p(0.1, 0.3, 0.0)];
        assert!(triangles_intersect(&s, &t));
        let far = [p(2.0, 2.0, 0.0), p(3.0, 2.0, 0.0), p(2.0, 3.0, 0.0)];
        assert!(!triangles_intersect(&s, &far));
    }

    #[test]
    fn aabb_distance() {
        let a = Aabb::of(&[p(0.0, 0.0, 0.0), p(1.0, 1.0, 1.0)]);
        let b = Aabb::of(&[p(2.0, 0.0, 0.0), p(3.0, 1.0, 1.0)]);
        assert!((a.distance(&b) - 1.0).abs() < 1e-15);
        assert_eq!(a.distance(&a), 0.0);
    }
}
