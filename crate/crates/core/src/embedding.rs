//! Assembly of the folded cylinder from rigid flat charts and fold bands.

mod mesh;

pub use mesh::{triangulate, write_obj, SurfaceMesh};

use nalgebra::{Matrix2, Matrix3, Matrix3x2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat_domain::{thicken, CreasePattern, Line, Piece, ThickenConfig, ThickenedPattern};
use crate::geom::{polyline_length, P3, V3};
use crate::numeric::wrap;
use crate::pseudofold::{separation_ratio, Bump, PseudofoldChart, Smoothness};

const CONTINUITY_TOL: f64 = 1e-9;

/// Knobs for turning a thickened pattern into a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    /// Vertical spacing of the stacked layers; `None` picks half the largest
    /// value the band widths allow.
    pub layer_gap: Option<f64>,
    pub bump: Bump,
    pub profile_samples: usize,
    pub thicken: ThickenConfig,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            layer_gap: None,
            bump: Bump::Exponential,
            profile_samples: 256,
            thicken: ThickenConfig::default(),
        }
    }
}

/// Affine isometry of the unrolled plane into space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMap {
    pub offset: V3,
    pub frame: Matrix3x2<f64>,
}

impl RigidMap {
    pub fn apply(&self, u: f64, y: f64) -> P3 {
        P3::from(self.offset + self.frame * Vector2::new(u, y))
    }
}

/// Boundary component of the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// `y = 1`.
    F,
    /// `y = 0`.
    G,
}

impl Side {
    pub fn y(&self) -> f64 {
        match self {
            Side::F => 1.0,
            Side::G => 0.0,
        }
    }
}

/// Isometric embedding of the flat cylinder.
#[derive(Debug, Clone)]
pub struct CylinderEmbedding {
    pattern: ThickenedPattern,
    layer_gap: f64,
    heights: Vec<f64>,
    regions: Vec<RigidMap>,
    charts: Vec<PseudofoldChart>,
    smoothness: Smoothness,
    linear: Matrix3<f64>,
    shift: V3,
    seam_defect: f64,
    continuity_defect: f64,
}

/// Largest layer gap for which every U fits inside its band.
pub fn max_layer_gap(pattern: &ThickenedPattern, bump: Bump) -> f64 {
    let c = separation_ratio(bump);
    let ranks = &pattern.base.stack_order;
    let n = ranks.len();
    pattern
        .bands
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let jump = (ranks[(k + 1) % n] as f64 - ranks[k] as f64).abs();
            b.width * c / jump
        })
        .fold(f64::INFINITY, f64::min)
}

impl CylinderEmbedding {
    /// Thickens `base` to circumference `2 + ε` and folds it.
    pub fn build(base: &CreasePattern, epsilon: f64, config: &EmbeddingConfig) -> Result<Self> {
        let t = thicken(base, epsilon, &config.thicken)?;
        assemble(&t, config)
    }

    /// The limiting sharp fold of the circumference-2 cylinder: every layer
    /// sits in the plane `z = 0`.
    pub fn limit(base: &CreasePattern) -> Result<Self> {
        let t = ThickenedPattern::limit(base)?;
        assemble(
            &t,
            &EmbeddingConfig {
                layer_gap: Some(0.0),
                ..EmbeddingConfig::default()
            },
        )
    }

    pub fn pattern(&self) -> &ThickenedPattern {
        &self.pattern
    }

    pub fn lambda(&self) -> f64 {
        self.pattern.lambda()
    }

    pub fn epsilon(&self) -> f64 {
        self.pattern.epsilon
    }

    pub fn layer_gap(&self) -> f64 {
        self.layer_gap
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn charts(&self) -> &[PseudofoldChart] {
        &self.charts
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn seam_defect(&self) -> f64 {
        self.seam_defect
    }

    pub fn continuity_defect(&self) -> f64 {
        self.continuity_defect
    }

    /// Same surface moved by `p ↦ A p + t`. `A` need not be orthogonal.
    pub fn transformed(&self, a: &Matrix3<f64>, t: &V3) -> Self {
        let mut e = self.clone();
        e.linear = a * self.linear;
        e.shift = a * self.shift + t;
        e
    }

    /// Uniformly scaled copy, about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        self.transformed(&(Matrix3::identity() * factor), &V3::zeros())
    }

    /// Point and differential with respect to domain coordinates `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> (P3, Matrix3x2<f64>) {
        let (piece, u) = self.pattern.locate(x, y);
        let (p, j) = self.eval_piece(piece, u, y);
        (P3::from(self.linear * p.coords + self.shift), self.linear * j)
    }

    pub fn point(&self, x: f64, y: f64) -> P3 {
        self.eval(x, y).0
    }

    /// Point from unrolled coordinates and a known piece.
    pub fn point_unrolled(&self, piece: Piece, u: f64, y: f64) -> P3 {
        let (p, _) = self.eval_piece(piece, u, y);
        P3::from(self.linear * p.coords + self.shift)
    }

    fn eval_piece(&self, piece: Piece, u: f64, y: f64) -> (P3, Matrix3x2<f64>) {
        match piece {
            Piece::Region(k) => (self.regions[k].apply(u, y), self.regions[k].frame),
            Piece::Band(k) => {
                let line = self.pattern.bands[k].near;
                let (s, r, basis) = band_coordinates(&line, u, y);
                let (p, j) = self.charts[k].eval(s, r);
                (p, j * basis)
            }
        }
    }
}

/// Band coordinates `(s, r)` of an unrolled point and the matrix with rows `ν, d`.
fn band_coordinates(near: &Line, u: f64, y: f64) -> (f64, f64, Matrix2<f64>) {
    let d = near.direction();
    let nu = near.normal();
    let q = Vector2::new(u - near.bottom, y);
    (q.dot(&nu), q.dot(&d), Matrix2::new(nu.x, nu.y, d.x, d.y))
}


/// Chains the rigid charts across the bands and closes them across the seam.
pub fn assemble(pattern: &ThickenedPattern, config: &EmbeddingConfig) -> Result<CylinderEmbedding> {
    let n = pattern.n();
    let layer_gap = match config.layer_gap {
        Some(g) if !(g.is_finite() && g >= 0.0) => {
            return Err(Error::OutOfRange(format!("layer gap {g} must be non-negative")))
        }
        Some(g) => g,
        None => 0.5 * max_layer_gap(pattern, config.bump),
    };
    let ranks = &pattern.base.stack_order;
    let heights: Vec<f64> = ranks.iter().map(|r| (*r as f64 - 1.0) * layer_gap).collect();

    let mut regions = Vec::with_capacity(n);
    let mut charts = Vec::with_capacity(n);
    let mut map = RigidMap {
        offset: V3::new(0.0, 0.0, heights[0]),
        frame: Matrix3x2::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0),
    };
    for k in 0..n {
        regions.push(map);
        let band = &pattern.bands[k];
        let d = band.near.direction();
        let nu = band.near.normal();
        let c = Vector2::new(band.near.bottom, 0.0);
        let rise = heights[(k + 1) % n] - heights[k];
        let lift = if rise < 0.0 { -V3::z() } else { V3::z() };
        let origin = map.apply(c.x, c.y);
        let chart = PseudofoldChart::new(
            k,
            band.width,
            rise.abs(),
            config.bump,
            config.profile_samples,
            origin,
            map.frame * d,
            map.frame * nu,
            lift,
        )?;
        charts.push(chart);
        let reflect = 2.0 * d * d.transpose() - Matrix2::identity();
        let frame = map.frame * reflect;
        let far = c + nu * band.width;
        map = RigidMap {
            offset: origin.coords + lift * rise.abs() - frame * far,
            frame,
        };
    }
    let smoothness = if layer_gap == 0.0 {
        Smoothness::Finite(0)
    } else {
        config.bump.smoothness()
    };
    let mut emb = CylinderEmbedding {
        pattern: pattern.clone(),
        layer_gap,
        heights,
        regions,
        charts,
        smoothness,
        linear: Matrix3::identity(),
        shift: V3::zeros(),
        seam_defect: 0.0,
        continuity_defect: 0.0,
    };

    let lambda = pattern.lambda();
    let first = emb.regions[0];
    let mut seam = 0.0f64;
    for i in 0..=8 {
        let y = i as f64 / 8.0;
        let u = pattern.origin_line().at(y) + lambda;
        let a = map.apply(u, y);
        let b = first.apply(u - lambda, y);
        seam = seam.max((a - b).norm());
    }
    seam = seam.max((map.frame - first.frame).abs().max());
    if seam > CONTINUITY_TOL {
        return Err(Error::Continuity {
            location: "seam".into(),
            defect: seam,
        });
    }
    emb.seam_defect = seam;

    let mut cont = 0.0f64;
    for k in 0..n {
        let b = pattern.bands[k];
        for i in 0..=16 {
            let y = i as f64 / 16.0;
            let un = b.near.at(y);
            let uf = b.far.at(y);
            let next = (k + 1) % n;
            let uf_next = if next == 0 { uf - lambda } else { uf };
            let d_near = (emb.eval_piece(Piece::Region(k), un, y).0 - emb.eval_piece(Piece::Band(k), un, y).0).norm();
            let d_far = (emb.eval_piece(Piece::Band(k), uf, y).0
                - emb.eval_piece(Piece::Region(next), uf_next, y).0)
                .norm();
            cont = cont.max(d_near);
            if d_far > cont {
                cont = d_far;
            }
            if cont > CONTINUITY_TOL {
                return Err(Error::Continuity {
                    location: format!("band {k} at y = {y}"),
                    defect: cont,
                });
            }
        }
    }
    emb.continuity_defect = cont;
    Ok(emb)
}

/// Metric defects of an embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    /// `max ‖DΦᵀDΦ − I‖` (operator norm) over the sample set.
    pub max_gram_defect: f64,
    pub worst_point: [f64; 2],
    /// Largest entrywise gap between a fourth-order finite-difference
    /// Jacobian and the analytic one.
    pub fd_max_error: f64,
    pub fd_worst_point: [f64; 2],
    pub samples: usize,
    pub fd_samples: usize,
}

fn gram_defect(j: &Matrix3x2<f64>) -> f64 {
    let g = j.transpose() * j - Matrix2::identity();
    // Symmetric 2x2: operator norm is the largest |eigenvalue|.
    let m = 0.5 * (g[(0, 0)] + g[(1, 1)]);
    let r = (0.25 * (g[(0, 0)] - g[(1, 1)]).powi(2) + g[(0, 1)] * g[(1, 0)]).max(0.0).sqrt();
    (m + r).abs().max((m - r).abs())
}

/// Samples the pullback metric on a grid plus dense cross-band samples,
/// and cross-checks the analytic differential by finite differences.
pub fn isometry_report(emb: &CylinderEmbedding, grid: usize, fd_samples: usize, seed: u64) -> IsometryReport {
    let lambda = emb.lambda();
    let grid = grid.max(2);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let nx = (lambda * grid as f64).ceil() as usize;
    for i in 0..nx {
        for j in 0..=grid {
            pts.push((lambda * i as f64 / nx as f64, j as f64 / grid as f64));
        }
    }
    let t = emb.pattern();
    for b in &t.bands {
        if b.axial_width == 0.0 {
            continue;
        }
        for j in 0..=grid {
            let y = j as f64 / grid as f64;
            for a in 0..=32 {
                let u = b.near.at(y) + b.axial_width * a as f64 / 32.0;
                pts.push((t.to_domain(u), y));
            }
        }
    }
    let mut worst = (0.0, [0.0, 0.0]);
    for &(x, y) in &pts {
        let d = gram_defect(&emb.eval(x, y).1);
        if d > worst.0 {
            worst = (d, [x, y]);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut fd_worst = (0.0, [0.0, 0.0]);
    for i in 0..fd_samples {
        // Alternate between uniform points and points inside bands.
        let (x, y) = if i % 2 == 0 || t.bands.iter().all(|b| b.axial_width == 0.0) {
            (rng.gen_range(0.0..lambda), rng.gen_range(2.0 * h..1.0 - 2.0 * h))
        } else {
            let b = &t.bands[rng.gen_range(0..t.n())];
            let y = rng.gen_range(2.0 * h..1.0 - 2.0 * h);
            (t.to_domain(b.near.at(y) + rng.gen_range(0.0..1.0) * b.axial_width), y)
        };
        let stencil = |dx: f64, dy: f64| {
            let f = |k: f64| emb.point(x + k * dx, y + k * dy).coords;
            (-f(2.0) + 8.0 * f(1.0) - 8.0 * f(-1.0) + f(-2.0)) / (12.0 * h)
        };
        let fd = Matrix3x2::from_columns(&[stencil(h, 0.0), stencil(0.0, h)]);
        let err = (fd - emb.eval(x, y).1).abs().max();
        if err > fd_worst.0 {
            fd_worst = (err, [x, y]);
        }
    }
    IsometryReport {
        max_gram_defect: worst.0,
        worst_point: worst.1,
        fd_max_error: fd_worst.0,
        fd_worst_point: fd_worst.1,
        samples: pts.len(),
        fd_samples,
    }
}

/// Closed boundary polyline; the last point repeats the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub side: Side,
    /// Domain `x` of each vertex.
    pub params: Vec<f64>,
    pub points: Vec<P3>,
    pub length: f64,
}

/// Unrolled sample positions on `[u_from, u_to]` along one boundary.
///
/// Each band crossed gets `band_samples` intervals; flat stretches are cut
/// into intervals no longer than `flat_step`.
pub fn boundary_positions(
    emb: &CylinderEmbedding,
    side: Side,
    u_from: f64,
    u_to: f64,
    band_samples: usize,
    flat_step: f64,
) -> Vec<(Piece, f64)> {
    let t = emb.pattern();
    let y = side.y();
    let lambda = t.lambda();
    let lines = t.lines();
    let pieces = t.pieces();
    let start = t.origin_line().at(y);
    let wraps = ((u_from - start) / lambda).floor() as i64;
    let mut out = Vec::new();
    let mut last = None;
    let mut period = wraps;
    'outer: loop {
        let off = period as f64 * lambda;
        for (m, piece) in pieces.iter().enumerate() {
            let a = lines[m].at(y) + off;
            let b = lines[m + 1].at(y) + off;
            if b <= u_from {
                continue;
            }
            if a >= u_to {
                break 'outer;
            }
            let lo = a.max(u_from);
            let hi = b.min(u_to);
            if hi <= lo {
                continue;
            }
            let steps = match piece {
                Piece::Band(_) => band_samples.max(1),
                Piece::Region(_) => ((hi - lo) / flat_step).ceil().max(1.0) as usize,
            };
            for i in 0..steps {
                out.push((*piece, lo + (hi - lo) * i as f64 / steps as f64 - off));
            }
            last = Some((*piece, off));
        }
        period += 1;
    }
    if let Some((piece, off)) = last {
        out.push((piece, u_to - off));
    }
    out
}

fn points_at(emb: &CylinderEmbedding, side: Side, pos: &[(Piece, f64)]) -> Vec<P3> {
    pos.iter().map(|(p, u)| emb.point_unrolled(*p, *u, side.y())).collect()
}

/// Both boundary loops, with about `n` vertices each, denser inside bands.
pub fn boundary_loops(emb: &CylinderEmbedding, n: usize) -> Result<(BoundaryLoop, BoundaryLoop)> {
    if n < 16 {
        return Err(Error::Precondition(format!("need at least 16 boundary samples, got {n}")));
    }
    let t = emb.pattern();
    let lambda = t.lambda();
    let live = t.bands.iter().filter(|b| b.axial_width > 0.0).count();
    let (band_samples, flat_step) = if live == 0 {
        (1, lambda / n as f64)
    } else {
        ((n / (2 * live)).max(1), 2.0 * lambda / n as f64)
    };
    let make = |side: Side| {
        let start = t.origin_line().at(side.y());
        let pos = boundary_positions(emb, side, start, start + lambda, band_samples, flat_step);
        let mut points = points_at(emb, side, &pos);
        let mut params: Vec<f64> = pos.iter().map(|(_, u)| t.to_domain(*u)).collect();
        // Close exactly.
        let n = points.len();
        points[n - 1] = points[0];
        params[n - 1] = params[0];
        let length = polyline_length(&points);
        BoundaryLoop {
            side,
            params,
            points,
            length,
        }
    };
    Ok((make(Side::F), make(Side::G)))
}

/// Image of the boundary arc between two domain positions, walking in the
/// direction of increasing `x`.
pub fn boundary_arc(emb: &CylinderEmbedding, side: Side, x_from: f64, x_to: f64, band_samples: usize, flat_step: f64) -> Vec<P3> {
    let t = emb.pattern();
    let u_from = t.unroll(x_from, side.y());
    let span = wrap(x_to - x_from, t.lambda());
    let pos = boundary_positions(emb, side, u_from, u_from + span, band_samples, flat_step);
    points_at(emb, side, &pos)
}

/// Summary written next to the mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub schema_version: u32,
    pub pattern: String,
    pub epsilon: f64,
    pub lambda: f64,
    pub layer_gap: f64,
    pub band_widths: Vec<f64>,
    pub vertex_gap: f64,
    pub smoothness: Smoothness,
    pub max_gram_defect: f64,
    pub fd_max_error: f64,
    pub seam_defect: f64,
    pub continuity_defect: f64,
    pub boundary_lengths: [f64; 2],
    pub mesh_vertices: usize,
    pub mesh_triangles: usize,
    pub euler_characteristic: i64,
    pub boundary_cycles: usize,
    pub max_edge_distortion: f64,
}

impl EmbeddingReport {
    pub fn new(emb: &CylinderEmbedding, iso: &IsometryReport, loops: &(BoundaryLoop, BoundaryLoop), mesh: &SurfaceMesh) -> Self {
        Self {
            schema_version: crate::SCHEMA_VERSION,
            pattern: emb.pattern().base.pattern_id.clone(),
            epsilon: emb.epsilon(),
            lambda: emb.lambda(),
            layer_gap: emb.layer_gap(),
            band_widths: emb.pattern().bands.iter().map(|b| b.width).collect(),
            vertex_gap: emb.pattern().vertex_gap,
            smoothness: emb.smoothness(),
            max_gram_defect: iso.max_gram_defect,
            fd_max_error: iso.fd_max_error,
            seam_defect: emb.seam_defect(),
            continuity_defect: emb.continuity_defect(),
            boundary_lengths: [loops.0.length, loops.1.length],
            mesh_vertices: mesh.vertices.len(),
            mesh_triangles: mesh.triangles.len(),
            euler_characteristic: mesh.euler_characteristic(),
            boundary_cycles: mesh.boundary_cycles(),
            max_edge_distortion: mesh.max_edge_distortion(emb.lambda()),
        }
    }
}
