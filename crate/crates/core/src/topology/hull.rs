//! Convex hulls, GJK distances and the hull bound `ℓ(G) ≥ 2`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embedding::{BoundaryLoop, CylinderEmbedding, Side};
use crate::error::{Error, Result};
use crate::geom::{P3, V3};
use crate::rulings::BendFoliation;

/// Convex hull of a point set. `dimension` is the affine dimension (0–3);
/// below 3 the faces are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexHull {
    pub dimension: usize,
    pub vertices: Vec<usize>,
    pub faces: Vec<[usize; 3]>,
    pub set_diameter: f64,
    pub hull_diameter: f64,
}

impl ConvexHull {
    pub fn vertex_points(&self, points: &[P3]) -> Vec<P3> {
        self.vertices.iter().map(|&i| points[i]).collect()
    }
}

fn diameter(points: &[P3], idx: &[usize]) -> f64 {
    let mut d = 0.0f64;
    for (k, &i) in idx.iter().enumerate() {
        for &j in &idx[k + 1..] {
            d = d.max((points[i] - points[j]).norm());
        }
    }
    d
}

struct Face {
    v: [usize; 3],
    normal: V3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(points: &[P3], v: [usize; 3]) -> Self {
        let n = (points[v[1]] - points[v[0]]).cross(&(points[v[2]] - points[v[0]]));
        let normal = n / n.norm();
        Face {
            v,
            normal,
            offset: normal.dot(&points[v[0]].coords),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn dist(&self, p: &P3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

/// Quickhull with explicit handling of coincident, collinear and coplanar input.
pub fn quickhull(points: &[P3]) -> Result<ConvexHull> {
    if points.is_empty() {
        return Err(Error::Degenerate("convex hull of an empty set".into()));
    }
    if points.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
        return Err(Error::Degenerate("non-finite point".into()));
    }
    let all: Vec<usize> = (0..points.len()).collect();
    let set_diameter = diameter(points, &all);
    let scale = points.iter().map(|p| p.coords.amax()).fold(0.0, f64::max).max(set_diameter);
    let eps = 1e-12 * scale.max(1e-300);
    let finish = |dimension: usize, mut vertices: Vec<usize>, faces: Vec<[usize; 3]>| {
        vertices.sort_unstable();
        vertices.dedup();
        let hull_diameter = diameter(points, &vertices);
        Ok(ConvexHull {
            dimension,
            vertices,
            faces,
            set_diameter,
            hull_diameter,
        })
    };

    // Extreme pair along the widest axis.
    let mut axis = 0;
    let mut best = -1.0;
    for k in 0..3 {
        let lo = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > best {
            best = hi - lo;
            axis = k;
        }
    }
    let i0 = all.iter().copied().min_by(|a, b| points[*a][axis].total_cmp(&points[*b][axis])).unwrap();
    let i1 = all.iter().copied().max_by(|a, b| points[*a][axis].total_cmp(&points[*b][axis])).unwrap();
    if (points[i1] - points[i0]).norm() <= eps {
        return finish(0, vec![i0], Vec::new());
    }
    let dir = (points[i1] - points[i0]).normalize();
    let off_line = |p: &P3| {
        let v = p - points[i0];
        (v - dir * v.dot(&dir)).norm()
    };
    let i2 = all.iter().copied().max_by(|a, b| off_line(&points[*a]).total_cmp(&off_line(&points[*b]))).unwrap();
    if off_line(&points[i2]) <= eps {
        let lo = all.iter().copied().min_by(|a, b| (points[*a] - points[i0]).dot(&dir).total_cmp(&(points[*b] - points[i0]).dot(&dir))).unwrap();
        let hi = all.iter().copied().max_by(|a, b| (points[*a] - points[i0]).dot(&dir).total_cmp(&(points[*b] - points[i0]).dot(&dir))).unwrap();
        return finish(1, vec![lo, hi], Vec::new());
    }
    let normal = (points[i1] - points[i0]).cross(&(points[i2] - points[i0])).normalize();
    let off_plane = |p: &P3| normal.dot(&(p - points[i0]));
    let i3 = all.iter().copied().max_by(|a, b| off_plane(&points[*a]).abs().total_cmp(&off_plane(&points[*b]).abs())).unwrap();
    if off_plane(&points[i3]).abs() <= eps {
        let e1 = dir;
        let e2 = normal.cross(&e1);
        return finish(2, planar_hull(points, &e1, &e2), Vec::new());
    }

    let mut faces: Vec<Face> = Vec::new();
    let centroid = P3::from((points[i0].coords + points[i1].coords + points[i2].coords + points[i3].coords) / 4.0);
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let mut f = Face::new(points, tri);
        if f.dist(&centroid) > 0.0 {
            f = Face::new(points, [tri[0], tri[2], tri[1]]);
        }
        faces.push(f);
    }
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for k in 0..3 {
            edges.insert((f.v[k], f.v[(k + 1) % 3]), fi);
        }
    }
    for (pi, p) in points.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&pi) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.dist(p) > eps) {
            f.outside.push(pi);
        }
    }

    let mut guard = 0;
    while let Some(fi) = faces.iter().position(|f| f.alive && !f.outside.is_empty()) {
        guard += 1;
        if guard > 10 * points.len() + 100 {
            return Err(Error::Degenerate("quickhull failed to converge".into()));
        }
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|a, b| faces[fi].dist(&points[**a]).total_cmp(&faces[fi].dist(&points[**b])))
            .unwrap();
        let ap = points[apex];
        // Visible region by flood fill from the seed face.
        let mut visible = vec![fi];
        let mut seen = std::collections::HashSet::from([fi]);
        let mut k = 0;
        while k < visible.len() {
            let f = &faces[visible[k]];
            for e in 0..3 {
                let (a, b) = (f.v[e], f.v[(e + 1) % 3]);
                if let Some(&nb) = edges.get(&(b, a)) {
                    if faces[nb].alive && !seen.contains(&nb) && faces[nb].dist(&ap) > eps {
                        seen.insert(nb);
                        visible.push(nb);
                    }
                }
            }
            k += 1;
        }
        let mut horizon = Vec::new();
        for &vf in &visible {
            let f = &faces[vf];
            for e in 0..3 {
                let (a, b) = (f.v[e], f.v[(e + 1) % 3]);
                match edges.get(&(b, a)) {
                    Some(nb) if seen.contains(nb) => {}
                    _ => horizon.push((a, b)),
                }
            }
        }
        let mut orphans = Vec::new();
        for &vf in &visible {
            let f = &mut faces[vf];
            f.alive = false;
            orphans.append(&mut f.outside);
            for e in 0..3 {
                edges.remove(&(f.v[e], f.v[(e + 1) % 3]));
            }
        }
        let first_new = faces.len();
        for (a, b) in horizon {
            let f = Face::new(points, [a, b, apex]);
            let id = faces.len();
            for e in 0..3 {
                edges.insert((f.v[e], f.v[(e + 1) % 3]), id);
            }
            faces.push(f);
        }
        for pi in orphans {
            if pi == apex {
                continue;
            }
            if let Some(f) = faces[first_new..].iter_mut().find(|f| f.dist(&points[pi]) > eps) {
                f.outside.push(pi);
            }
        }
    }
    let live: Vec<[usize; 3]> = faces.iter().filter(|f| f.alive).map(|f| f.v).collect();
    let verts: Vec<usize> = live.iter().flatten().copied().collect();
    finish(3, verts, live)
}

/// Monotone-chain hull of coplanar points, in the basis `(e1, e2)`.
fn planar_hull(points: &[P3], e1: &V3, e2: &V3) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let c = |i: usize| (points[i].coords.dot(e1), points[i].coords.dot(e2));
    idx.sort_by(|a, b| {
        let (pa, pb) = (c(*a), c(*b));
        pa.0.total_cmp(&pb.0).then(pa.1.total_cmp(&pb.1))
    });
    let cross = |o: usize, a: usize, b: usize| {
        let (po, pa, pb) = (c(o), c(a), c(b));
        (pa.0 - po.0) * (pb.1 - po.1) - (pa.1 - po.1) * (pb.0 - po.0)
    };
    let mut hull: Vec<usize> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 { Box::new(idx.iter()) } else { Box::new(idx.iter().rev()) };
        for &i in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// Distance between the convex hulls of two finite point sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GjkResult {
    pub distance: f64,
    pub point_a: P3,
    pub point_b: P3,
    pub iterations: usize,
}

/// Closest point to the origin on the hull of up to four points, as
/// barycentric weights.
fn closest_in_simplex(w: &[V3]) -> (V3, Vec<f64>) {
    let n = w.len();
    let mut best: Option<(f64, V3, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let sub: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let m = sub.len();
        let base = w[sub[0]];
        let lam: Vec<f64> = if m == 1 {
            vec![1.0]
        } else {
            let cols: Vec<V3> = sub[1..].iter().map(|&i| w[i] - base).collect();
            let k = m - 1;
            let gram = DMatrix::from_fn(k, k, |r, c| cols[r].dot(&cols[c]));
            let rhs = DVector::from_fn(k, |r, _| -cols[r].dot(&base));
            let scale = cols.iter().map(|c| c.norm_squared()).fold(0.0, f64::max);
            if gram.determinant().abs() <= 1e-24 * scale.powi(k as i32) {
                continue;
            }
            let Some(mu) = gram.lu().solve(&rhs) else {
                continue;
            };
            let mut l = vec![1.0 - mu.sum()];
            l.extend(mu.iter());
            l
        };
        if lam.iter().any(|&x| x < -1e-12) {
            continue;
        }
        let v: V3 = sub.iter().zip(&lam).map(|(&i, l)| w[i] * *l).sum();
        let d = v.norm_squared();
        if best.as_ref().map_or(true, |b| d < b.0) {
            let mut full = vec![0.0; n];
            for (&i, l) in sub.iter().zip(&lam) {
                full[i] = l.max(0.0);
            }
            best = Some((d, v, full));
        }
    }
    let (_, v, l) = best.expect("a single vertex is always feasible");
    (v, l)
}

/// GJK distance between `conv(a)` and `conv(b)`.
pub fn gjk_distance(a: &[P3], b: &[P3]) -> Result<GjkResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Degenerate("GJK needs non-empty point sets".into()));
    }
    let support = |pts: &[P3], d: &V3| -> usize {
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for (i, p) in pts.iter().enumerate() {
            let s = p.coords.dot(d);
            if s > val {
                val = s;
                best = i;
            }
        }
        best
    };
    let mut simplex: Vec<(usize, usize)> = vec![(0, 0)];
    let mut v = a[0] - b[0];
    let mut lam = vec![1.0];
    let mut iterations = 0;
    for _ in 0..128 {
        iterations += 1;
        let vv = v.norm_squared();
        if vv <= 1e-28 {
            break;
        }
        let ia = support(a, &-v);
        let ib = support(b, &v);
        let w = a[ia] - b[ib];
        if vv - v.dot(&w) <= 1e-13 * vv || simplex.contains(&(ia, ib)) {
            break;
        }
        simplex.push((ia, ib));
        let ws: Vec<V3> = simplex.iter().map(|(i, j)| a[*i] - b[*j]).collect();
        let (nv, l) = closest_in_simplex(&ws);
        let keep: Vec<usize> = (0..simplex.len()).filter(|&i| l[i] > 0.0).collect();
        simplex = keep.iter().map(|&i| simplex[i]).collect();
        lam = keep.iter().map(|&i| l[i]).collect();
        if nv.norm_squared() >= vv {
            break;
        }
        v = nv;
    }
    if simplex.len() != lam.len() {
        lam = vec![1.0 / simplex.len() as f64; simplex.len()];
    }
    let total: f64 = lam.iter().sum();
    let pa: V3 = simplex.iter().zip(&lam).map(|((i, _), l)| a[*i].coords * (*l / total)).sum();
    let pb: V3 = simplex.iter().zip(&lam).map(|((_, j), l)| b[*j].coords * (*l / total)).sum();
    Ok(GjkResult {
        distance: (pa - pb).norm(),
        point_a: P3::from(pa),
        point_b: P3::from(pb),
        iterations,
    })
}

/// `F` meets `Hull(G)` at `x`; the bend through `x` ends at `y ∈ G`, so
/// `ℓ(G) ≥ 2 diam(G) = 2 diam(Hull G) ≥ 2‖x − y‖ ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullBoundCertificate {
    pub x: P3,
    /// Domain `x` of the point of `F` used.
    pub x_param: f64,
    pub distance_to_hull: f64,
    pub hull_tolerance: f64,
    pub y: P3,
    pub y_param: f64,
    pub x_to_y: f64,
    pub diameter_g: f64,
    pub hull_diameter_g: f64,
    pub length_g: f64,
    pub hull_vertices: usize,
    pub passed: bool,
}

/// Builds the hull bound from sampled boundary loops.
pub fn hull_bound_certificate(emb: &CylinderEmbedding, f: &BoundaryLoop, g: &BoundaryLoop) -> Result<HullBoundCertificate> {
    let hull = quickhull(&g.points[..g.points.len() - 1])?;
    let hv = hull.vertex_points(&g.points);
    let step = f.length / (f.points.len() - 1) as f64;
    let tol = 1e-3 * step;
    let mut best: Option<(f64, usize, f64)> = None;
    for i in 0..f.points.len() - 1 {
        let seg = [f.points[i], f.points[i + 1]];
        let r = gjk_distance(&seg, &hv)?;
        let len = (seg[1] - seg[0]).norm();
        let s = if len > 0.0 { (r.point_a - seg[0]).norm() / len } else { 0.0 };
        if best.map_or(true, |b| r.distance < b.0 - 1e-15) {
            best = Some((r.distance, i, s.clamp(0.0, 1.0)));
        }
        if r.distance == 0.0 {
            break;
        }
    }
    let (dist, i, s) = best.unwrap();
    if dist > tol {
        return Err(Error::MissesHull(dist));
    }
    let lambda = emb.lambda();
    let p0 = f.params[i];
    let mut dp = f.params[i + 1] - p0;
    dp -= (dp / lambda).floor() * lambda;
    let x_param = emb.pattern().domain.wrap_x(p0 + s * dp);
    let fol = BendFoliation::new(emb);
    let bend = fol.bend_of(&fol.prebend_through(Side::F, x_param));
    let x = bend.f_point;
    let y = bend.g_point;
    let x_to_y = (x - y).norm();
    let length_g = g.length;
    let slack = 1e-9;
    let passed = x_to_y >= 1.0 - slack
        && hull.hull_diameter >= x_to_y - dist - slack
        && (hull.hull_diameter - hull.set_diameter).abs() <= slack
        && length_g >= 2.0 * hull.set_diameter - 1e-6
        && length_g >= 2.0 - 1e-6;
    Ok(HullBoundCertificate {
        x,
        x_param,
        distance_to_hull: dist,
        hull_tolerance: tol,
        y,
        y_param: bend.g_x,
        x_to_y,
        diameter_g: hull.set_diameter,
        hull_diameter_g: hull.hull_diameter,
        length_g,
        hull_vertices: hull.vertices.len(),
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Vec<P3> {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push(P3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        v
    }

    #[test]
    fn cube_hull_has_eight_vertices_and_twelve_faces() {
        let mut pts = cube();
        pts.push(P3::new(0.5, 0.5, 0.5));
        pts.push(P3::new(0.2, 0.9, 0.1));
        let h = quickhull(&pts).unwrap();
        assert_eq!(h.dimension, 3);
        assert_eq!(h.vertices, (0..8).collect::<Vec<_>>());
        assert_eq!(h.faces.len(), 12);
        assert!((h.hull_diameter - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        let p = P3::new(1.0, 2.0, 3.0);
        assert_eq!(quickhull(&[p, p, p]).unwrap().dimension, 0);
        let line: Vec<P3> = (0..5).map(|i| P3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        let h = quickhull(&line).unwrap();
        assert_eq!((h.dimension, h.vertices.clone()), (1, vec![0, 4]));
        let square: Vec<P3> = cube().into_iter().filter(|p| p.z == 0.0).chain([P3::new(0.5, 0.5, 0.0)]).collect();
        let h = quickhull(&square).unwrap();
        assert_eq!(h.dimension, 2);
        assert_eq!(h.vertices.len(), 4);
        assert!(quickhull(&[]).is_err());
    }

    #[test]
    fn gjk_point_to_cube() {
        let c = cube();
        let r = gjk_distance(&[P3::new(2.0, 0.5, 0.5)], &c).unwrap();
        assert!((r.distance - 1.0).abs() < 1e-12);
        let inside = gjk_distance(&[P3::new(0.3, 0.3, 0.3)], &c).unwrap();
        assert!(inside.distance < 1e-12);
    }

    #[test]
    fn gjk_segment_to_segment() {
        let a = [P3::new(-1.0, 0.0, 0.0), P3::new(1.0, 0.0, 0.0)];
        let b = [P3::new(0.0, -1.0, 2.0), P3::new(0.0, 1.0, 2.0)];
        let r = gjk_distance(&a, &b).unwrap();
        assert!((r.distance - 2.0).abs() < 1e-12);
        assert!(r.point_a.coords.norm() < 1e-12);
    }
}
