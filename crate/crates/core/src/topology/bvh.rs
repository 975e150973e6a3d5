//! Bounding-volume hierarchy over mesh triangles.

use serde::{Deserialize, Serialize};

use crate::embedding::SurfaceMesh;
use crate::geom::{closest_on_triangle, triangle_distance, triangles_intersect, Aabb, P2, P3};

const LEAF: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Children for inner nodes, item range for leaves.
    left: usize,
    right: usize,
    start: usize,
    count: usize,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    items: Vec<usize>,
    boxes: Vec<Aabb>,
}

impl Bvh {
    pub fn new(boxes: Vec<Aabb>) -> Self {
        let mut items: Vec<usize> = (0..boxes.len()).collect();
        let mut bvh = Bvh {
            nodes: Vec::new(),
            items: Vec::new(),
            boxes,
        };
        if !items.is_empty() {
            let n = items.len();
            bvh.build(&mut items, 0, n);
        }
        bvh.items = items;
        bvh
    }

    pub fn over_mesh(mesh: &SurfaceMesh) -> Self {
        Self::new((0..mesh.triangles.len()).map(|i| Aabb::of(&mesh.triangle(i))).collect())
    }

    fn build(&mut self, items: &mut [usize], start: usize, end: usize) -> usize {
        let slice = &mut items[start..end];
        let mut bounds = Aabb::empty();
        let mut centers = Aabb::empty();
        for &i in slice.iter() {
            bounds = bounds.merge(&self.boxes[i]);
            centers.grow(&self.boxes[i].center());
        }
        let idx = self.nodes.len();
        self.nodes.push(Node {
            bounds,
            left: 0,
            right: 0,
            start,
            count: end - start,
        });
        if end - start <= LEAF {
            return idx;
        }
        let ext = centers.max - centers.min;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let mid = (end - start) / 2;
        let boxes = &self.boxes;
        slice.select_nth_unstable_by(mid, |a, b| {
            boxes[*a].center()[axis].total_cmp(&boxes[*b].center()[axis])
        });
        let l = self.build(items, start, start + mid);
        let r = self.build(items, start + mid, end);
        let node = &mut self.nodes[idx];
        node.left = l;
        node.right = r;
        node.count = 0;
        idx
    }

    fn is_leaf(&self, n: usize) -> bool {
        self.nodes[n].count > 0
    }

    fn leaf_items(&self, n: usize) -> &[usize] {
        let node = &self.nodes[n];
        &self.items[node.start..node.start + node.count]
    }

    fn size(&self, n: usize) -> f64 {
        (self.nodes[n].bounds.max - self.nodes[n].bounds.min).norm()
    }

    /// Visits every unordered pair of distinct items whose boxes survive
    /// `prune(box distance)`; `visit` returns whether to keep going.
    fn pairs<P, V>(&self, a: usize, b: usize, prune: &P, visit: &mut V) -> bool
    where
        P: Fn(f64) -> bool,
        V: FnMut(usize, usize) -> bool,
    {
        if prune(self.nodes[a].bounds.distance(&self.nodes[b].bounds)) {
            return true;
        }
        if self.is_leaf(a) && self.is_leaf(b) {
            let la = self.leaf_items(a);
            let lb = self.leaf_items(b);
            for (ia, &i) in la.iter().enumerate() {
                let others = if a == b { &lb[ia + 1..] } else { lb };
                for &j in others {
                    if prune(self.boxes[i].distance(&self.boxes[j])) {
                        continue;
                    }
                    if !visit(i.min(j), i.max(j)) {
                        return false;
                    }
                }
            }
            return true;
        }
        if a == b {
            let (l, r) = (self.nodes[a].left, self.nodes[a].right);
            return self.pairs(l, l, prune, visit) && self.pairs(l, r, prune, visit) && self.pairs(r, r, prune, visit);
        }
        let split_a = !self.is_leaf(a) && (self.is_leaf(b) || self.size(a) >= self.size(b));
        if split_a {
            let (l, r) = (self.nodes[a].left, self.nodes[a].right);
            self.pairs(l, b, prune, visit) && self.pairs(r, b, prune, visit)
        } else {
            let (l, r) = (self.nodes[b].left, self.nodes[b].right);
            self.pairs(a, l, prune, visit) && self.pairs(a, r, prune, visit)
        }
    }
}

/// Outcome of the mesh self-intersection and separation checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfIntersectionReport {
    pub intersects: bool,
    pub intersecting_pair: Option<[usize; 2]>,
    /// Smallest distance between triangles at least `exclusion_radius` apart
    /// in the flat cylinder.
    pub min_separation: f64,
    pub closest_pair: Option<[usize; 2]>,
    pub exclusion_radius: f64,
    pub triangles: usize,
}

/// Flat-distance footprint of a triangle: centroid and radius, unwrapped
/// across the seam.
fn footprint(mesh: &SurfaceMesh, i: usize, lambda: f64) -> (P2, f64) {
    let t = mesh.triangles[i];
    let p0 = mesh.domain[t[0]];
    let pts: Vec<P2> = t
        .iter()
        .map(|&k| {
            let mut p = mesh.domain[k];
            let dx = p.x - p0.x;
            p.x -= (dx / lambda).round() * lambda;
            p
        })
        .collect();
    let c = P2::new((pts[0].x + pts[1].x + pts[2].x) / 3.0, (pts[0].y + pts[1].y + pts[2].y) / 3.0);
    let r = pts.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    (c, r)
}

/// Exact triangle intersection test over all pairs that share no vertex, and
/// the smallest spatial distance between triangles that are far apart on the
/// flat cylinder.
pub fn self_intersection(mesh: &SurfaceMesh, exclusion_radius: f64, lambda: f64) -> SelfIntersectionReport {
    let bvh = Bvh::over_mesh(mesh);
    let mut report = SelfIntersectionReport {
        intersects: false,
        intersecting_pair: None,
        min_separation: f64::INFINITY,
        closest_pair: None,
        exclusion_radius,
        triangles: mesh.triangles.len(),
    };
    if mesh.triangles.is_empty() {
        return report;
    }
    let shares = |i: usize, j: usize| {
        let a = mesh.triangles[i];
        let b = mesh.triangles[j];
        a.iter().any(|v| b.contains(v))
    };
    let root = 0;
    bvh.pairs(root, root, &|d| d > 1e-12, &mut |i, j| {
        if shares(i, j) {
            return true;
        }
        if triangles_intersect(&mesh.triangle(i), &mesh.triangle(j)) {
            report.intersects = true;
            report.intersecting_pair = Some([i, j]);
            return false;
        }
        true
    });

    let foot: Vec<(P2, f64)> = (0..mesh.triangles.len()).map(|i| footprint(mesh, i, lambda)).collect();
    let flat_gap = |i: usize, j: usize| {
        let (a, ra) = foot[i];
        let (b, rb) = foot[j];
        let mut dx = (a.x - b.x).abs() % lambda;
        dx = dx.min(lambda - dx);
        dx.hypot(a.y - b.y) - ra - rb
    };
    let best = std::cell::Cell::new(f64::INFINITY);
    let mut pair = None;
    bvh.pairs(root, root, &|d| d >= best.get(), &mut |i, j| {
        if flat_gap(i, j) < exclusion_radius {
            return true;
        }
        let d = triangle_distance(&mesh.triangle(i), &mesh.triangle(j));
        if d < best.get() {
            best.set(d);
            pair = Some([i, j]);
        }
        true
    });
    report.min_separation = best.get();
    report.closest_pair = pair;
    report
}

/// Closest point of the mesh to `p`, with its distance.
pub fn nearest_on_mesh(mesh: &SurfaceMesh, bvh: &Bvh, p: &P3) -> (P3, f64) {
    let mut best = (P3::origin(), f64::INFINITY);
    if bvh.nodes.is_empty() {
        return best;
    }
    let mut stack = vec![0usize];
    while let Some(n) = stack.pop() {
        if bvh.nodes[n].bounds.distance_to_point(p) >= best.1 {
            continue;
        }
        if bvh.is_leaf(n) {
            for &i in bvh.leaf_items(n) {
                let t = mesh.triangle(i);
                let q = closest_on_triangle(p, &t[0], &t[1], &t[2]);
                let d = (p - q).norm();
                if d < best.1 {
                    best = (q, d);
                }
            }
        } else {
            let (l, r) = (bvh.nodes[n].left, bvh.nodes[n].right);
            let dl = bvh.nodes[l].bounds.distance_to_point(p);
            let dr = bvh.nodes[r].bounds.distance_to_point(p);
            if dl < dr {
                stack.push(r);
                stack.push(l);
            } else {
                stack.push(l);
                stack.push(r);
            }
        }
    }
    best
}
