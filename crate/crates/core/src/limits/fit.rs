//! Right-isosceles triangle fits and the uniform distance to the limit map.

use std::f64::consts::TAU;

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::embedding::{CylinderEmbedding, SurfaceMesh};
use crate::error::{Error, Result};
use crate::flat_domain::{fold_by_reflections, BASE_LAMBDA};
use crate::geom::{P2, P3, V2, V3};
use crate::topology::{nearest_on_mesh, quickhull, Bvh};

/// Best right isosceles triangle with unit legs for a point cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleFit {
    pub centroid: P3,
    pub normal: V3,
    /// Right-angle corner and the two unit legs.
    pub vertex: P3,
    pub legs: [V3; 2],
    pub samples_to_triangle: f64,
    pub triangle_to_samples: f64,
    pub hausdorff: f64,
    pub samples: usize,
}

const ANGLES: usize = 72;
const REFINED: usize = 3;
const MIN_SAMPLES: usize = 100;

fn dist2_unit_triangle(a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 && a + b <= 1.0 {
        return 0.0;
    }
    let seg = |p: V2, s0: V2, s1: V2| {
        let d = s1 - s0;
        let t = ((p - s0).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        (p - s0 - d * t).norm_squared()
    };
    let p = V2::new(a, b);
    let (o, x, y) = (V2::zeros(), V2::x(), V2::y());
    seg(p, o, x).min(seg(p, o, y)).min(seg(p, x, y))
}

#[derive(Debug, Clone, Copy)]
struct Pose {
    theta: f64,
    vertex: V2,
}

impl Pose {
    fn legs(&self) -> (V2, V2) {
        let (s, c) = self.theta.sin_cos();
        (V2::new(c, s), V2::new(-s, c))
    }
}

/// Largest squared distance from lifted planar samples `(q, h)` to the pose.
fn objective(pose: &Pose, pts: &[(V2, f64)]) -> f64 {
    let (l1, l2) = pose.legs();
    pts.iter()
        .map(|(q, h)| {
            let r = q - pose.vertex;
            h * h + dist2_unit_triangle(r.dot(&l1), r.dot(&l2))
        })
        .fold(0.0, f64::max)
}

/// Compass search over angle and corner position.
fn refine(mut pose: Pose, pts: &[(V2, f64)], scale: f64) -> (Pose, f64) {
    let mut best = objective(&pose, pts);
    let mut st = 0.5 * TAU / ANGLES as f64;
    let mut sv = 0.05 * scale;
    let mut iterations = 0;
    while sv > 1e-13 * scale && iterations < 20_000 {
        iterations += 1;
        let mut improved: Option<(Pose, f64)> = None;
        for i in -1i32..=1 {
            for j in -1i32..=1 {
                for k in -1i32..=1 {
                    if (i, j, k) == (0, 0, 0) {
                        continue;
                    }
                    let cand = Pose {
                        theta: pose.theta + i as f64 * st,
                        vertex: pose.vertex + V2::new(j as f64, k as f64) * sv,
                    };
                    let f = objective(&cand, pts);
                    if f < improved.map_or(best, |c| c.1) {
                        improved = Some((cand, f));
                    }
                }
            }
        }
        match improved {
            Some((p, f)) => {
                pose = p;
                best = f;
            }
            None => {
                st *= 0.5;
                sv *= 0.5;
            }
        }
    }
    (pose, best)
}

/// Fits a right isosceles triangle with unit legs to `samples`.
///
/// The pose minimizes the one-sided distance from the samples to the
/// triangle. Because that distance is convex in the sample, only the vertices
/// of the samples' convex hull enter the search. The reverse direction is
/// measured against `surface` when given and against the samples otherwise.
pub fn fit_right_isosceles(samples: &[P3], surface: Option<&SurfaceMesh>) -> Result<TriangleFit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let centroid = P3::from(samples.iter().map(|p| p.coords).sum::<V3>() / n);
    let mut cov = Matrix3::zeros();
    for p in samples {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let (l1, l2) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
    if l1 <= 0.0 || l2 <= 1e-12 * l1 {
        return Err(Error::Degenerate("samples are collinear".into()));
    }
    // Orient the in-plane axes by third moments so the frame is intrinsic.
    let axis = |k: usize| {
        let e: V3 = eig.eigenvectors.column(order[k]).into_owned();
        let skew: f64 = samples.iter().map(|p| (p - centroid).dot(&e).powi(3)).sum();
        if skew < 0.0 {
            -e
        } else {
            e
        }
    };
    let e1 = axis(0);
    let e2 = axis(1);
    let normal = e1.cross(&e2);
    let lift = |p: &P3| {
        let d = p - centroid;
        (V2::new(d.dot(&e1), d.dot(&e2)), d.dot(&normal))
    };
    let hull = quickhull(samples)?;
    let pts: Vec<(V2, f64)> = hull.vertices.iter().map(|&i| lift(&samples[i])).collect();
    let scale = pts.iter().map(|(q, _)| q.norm()).fold(0.0, f64::max).max(1e-300);

    let mut starts: Vec<(f64, usize, Pose)> = (0..ANGLES)
        .map(|k| {
            let theta = TAU * k as f64 / ANGLES as f64;
            let pose0 = Pose {
                theta,
                vertex: V2::zeros(),
            };
            let (a, b) = pose0.legs();
            let min_a = pts.iter().map(|(q, _)| q.dot(&a)).fold(f64::INFINITY, f64::min);
            let min_b = pts.iter().map(|(q, _)| q.dot(&b)).fold(f64::INFINITY, f64::min);
            let pose = Pose {
                theta,
                vertex: a * min_a + b * min_b,
            };
            (objective(&pose, &pts), k, pose)
        })
        .collect();
    starts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let (pose, _) = starts
        .iter()
        .take(REFINED)
        .map(|s| refine(s.2, &pts, scale))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();

    let (la, lb) = pose.legs();
    let lift3 = |v: V2| e1 * v.x + e2 * v.y;
    let vertex = centroid + lift3(pose.vertex);
    let legs = [lift3(la), lift3(lb)];
    let samples_to_triangle = samples
        .iter()
        .map(|p| {
            let (q, h) = lift(p);
            let r = q - pose.vertex;
            h * h + dist2_unit_triangle(r.dot(&la), r.dot(&lb))
        })
        .fold(0.0, f64::max)
        .sqrt();

    const M: usize = 32;
    let probes: Vec<P3> = (0..=M)
        .flat_map(|i| (0..=M - i).map(move |j| (i, j)))
        .map(|(i, j)| vertex + legs[0] * (i as f64 / M as f64) + legs[1] * (j as f64 / M as f64))
        .collect();
    let triangle_to_samples = match surface {
        Some(mesh) => {
            let bvh = Bvh::over_mesh(mesh);
            probes.iter().map(|p| nearest_on_mesh(mesh, &bvh, p).1).fold(0.0, f64::max)
        }
        None => probes
            .iter()
            .map(|p| samples.iter().map(|s| (s - p).norm_squared()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
            .sqrt(),
    };
    Ok(TriangleFit {
        centroid,
        normal,
        vertex,
        legs,
        samples_to_triangle,
        triangle_to_samples,
        hausdorff: samples_to_triangle.max(triangle_to_samples),
        samples: samples.len(),
    })
}

/// Sup distance between an embedding and the limit map after alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformDistance {
    pub distance: f64,
    pub rms: f64,
    /// Whether the better alignment reverses orientation.
    pub reflected: bool,
    pub rotation: Matrix3<f64>,
    pub translation: V3,
    pub worst_point: [f64; 2],
    pub grid: [usize; 2],
}

const GRID_X: usize = 64;
const GRID_Y: usize = 32;

/// Compares the embedding with the limit map of its base pattern,
/// precomposed with `(x, y) ↦ (2x/λ, y)`, over a `64 × 32` grid.
///
/// Both orthogonal Procrustes branches are tried and the one with the
/// smaller sup distance is kept.
pub fn uniform_distance_to_limit(emb: &CylinderEmbedding) -> Result<UniformDistance> {
    let lambda = emb.lambda();
    let base = &emb.pattern().base;
    let mut params = Vec::with_capacity(GRID_X * GRID_Y);
    let mut p = Vec::with_capacity(GRID_X * GRID_Y);
    let mut q = Vec::with_capacity(GRID_X * GRID_Y);
    for i in 0..GRID_X {
        for j in 0..GRID_Y {
            let x = lambda * i as f64 / GRID_X as f64;
            let y = j as f64 / (GRID_Y - 1) as f64;
            params.push([x, y]);
            p.push(emb.point(x, y));
            q.push(fold_by_reflections(base, &P2::new(BASE_LAMBDA * x / lambda, y))?);
        }
    }
    let count = p.len() as f64;
    let pc = p.iter().map(|v| v.coords).sum::<V3>() / count;
    let qc = q.iter().map(|v| v.coords).sum::<V3>() / count;
    let mut h = Matrix3::zeros();
    for (a, b) in p.iter().zip(&q) {
        h += (a.coords - pc) * (b.coords - qc).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut best: Option<UniformDistance> = None;
    for sign in [1.0, -1.0] {
        let mut d = Matrix3::identity();
        let base_det = (vt.transpose() * u.transpose()).determinant();
        d[(2, 2)] = sign * base_det.signum();
        let r = vt.transpose() * d * u.transpose();
        let t = qc - r * pc;
        let mut sup = (0.0, 0usize);
        let mut ss = 0.0;
        for (k, (a, b)) in p.iter().zip(&q).enumerate() {
            let e = (r * a.coords + t - b.coords).norm();
            ss += e * e;
            if e > sup.0 {
                sup = (e, k);
            }
        }
        let cand = UniformDistance {
            distance: sup.0,
            rms: (ss / count).sqrt(),
            reflected: sign < 0.0,
            rotation: r,
            translation: t,
            worst_point: params[sup.1],
            grid: [GRID_X, GRID_Y],
        };
        if best.as_ref().map_or(true, |b| cand.distance < b.distance) {
            best = Some(cand);
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    fn triangle_cloud(n: usize) -> Vec<P3> {
        let mut v = Vec::new();
        for i in 0..=n {
            for j in 0..=n - i {
                v.push(P3::new(i as f64 / n as f64, j as f64 / n as f64, 0.0));
            }
        }
        v
    }

    fn moved(pts: &[P3]) -> Vec<P3> {
        let r = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        pts.iter().map(|p| r * p + V3::new(4.0, -2.0, 0.5)).collect()
    }

    #[test]
    fn exact_triangle_fits_itself() {
        let pts = triangle_cloud(20);
        let f = fit_right_isosceles(&pts, None).unwrap();
        assert!(f.samples_to_triangle <= 1e-9, "{f:?}");
        assert!((f.legs[0].dot(&f.legs[1])).abs() < 1e-12);
        assert!((f.legs[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_is_pose_invariant() {
        let mut pts = triangle_cloud(16);
        for p in &mut pts {
            p.z = 0.05 * (7.0 * p.x).sin() * p.y;
            p.x *= 1.1;
        }
        let a = fit_right_isosceles(&pts, None).unwrap();
        let b = fit_right_isosceles(&moved(&pts), None).unwrap();
        assert!(a.hausdorff > 0.01);
        assert!((a.hausdorff - b.hausdorff).abs() < 1e-9, "{} vs {}", a.hausdorff, b.hausdorff);
    }

    #[test]
    fn collinear_and_sparse_samples_are_rejected() {
        let line: Vec<P3> = (0..200).map(|i| P3::new(i as f64, 0.0, 0.0)).collect();
        assert!(matches!(fit_right_isosceles(&line, None), Err(Error::Degenerate(_))));
        assert!(matches!(fit_right_isosceles(&line[..50], None), Err(Error::Precondition(_))));
    }

    #[test]
    fn unit_triangle_distance() {
        assert_eq!(dist2_unit_triangle(0.2, 0.3), 0.0);
        assert!((dist2_unit_triangle(-1.0, 0.5) - 1.0).abs() < 1e-15);
        assert!((dist2_unit_triangle(1.0, 1.0) - 0.5).abs() < 1e-15);
    }
}
