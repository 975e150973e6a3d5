//! Conforming triangulation of the folded cylinder.
//!
//! Every piece (flat region or band) is cut by the same horizontal rows, so
//! neighbouring pieces share their vertices on the slanted boundary lines.
//! Within a row each piece is subdivided uniformly, and consecutive rows are
//! zipped together.

use std::collections::HashMap;
use std::io::Write;

use crate::embedding::{BoundaryLoop, CylinderEmbedding};
use crate::flat_domain::Piece;
use crate::geom::{P2, P3};

/// Indexed triangle mesh with the domain coordinates of every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<P3>,
    pub domain: Vec<P2>,
    pub triangles: Vec<[usize; 3]>,
}

/// Triangulates with `grid` rows and about `grid` columns per unit length in
/// flat regions, and `band_columns` columns across each band.
pub fn triangulate(emb: &CylinderEmbedding, grid: usize, band_columns: usize) -> SurfaceMesh {
    let t = emb.pattern();
    let rows = grid.max(1);
    let lines = t.lines();
    let pieces = t.pieces();
    let mut mesh = SurfaceMesh {
        vertices: Vec::new(),
        domain: Vec::new(),
        triangles: Vec::new(),
    };
    // chains[row][piece] = vertex indices from the left line to the right line.
    let mut chains: Vec<Vec<Vec<usize>>> = Vec::with_capacity(rows + 1);
    for j in 0..=rows {
        let y = j as f64 / rows as f64;
        let mut row_chains = Vec::with_capacity(pieces.len());
        let mut prev: Option<(f64, usize)> = None;
        let mut first_index = None;
        let end = lines[pieces.len()].at(y);
        for (m, piece) in pieces.iter().enumerate() {
            let a = lines[m].at(y);
            let b = lines[m + 1].at(y);
            let width = b - a;
            let cols = if width <= 1e-12 {
                0
            } else {
                match piece {
                    Piece::Band(_) => band_columns.max(1),
                    Piece::Region(_) => ((width * grid as f64).ceil() as usize).max(1),
                }
            };
            let mut chain = Vec::with_capacity(cols + 1);
            for i in 0..=cols {
                let u = if cols == 0 { a } else { a + width * i as f64 / cols as f64 };
                if let (Some(f), true) = (first_index, (u - end).abs() <= 1e-12) {
                    // Right edge of the window is the left edge of region 0.
                    chain.push(f);
                    continue;
                }
                if let Some((pu, pi)) = prev {
                    if (u - pu).abs() <= 1e-12 {
                        chain.push(pi);
                        continue;
                    }
                }
                let idx = mesh.vertices.len();
                let x = t.to_domain(u);
                mesh.vertices.push(emb.point_unrolled(*piece, u, y));
                mesh.domain.push(P2::new(x, y));
                chain.push(idx);
                prev = Some((u, idx));
                first_index.get_or_insert(idx);
            }
            row_chains.push(chain);
        }
        chains.push(row_chains);
    }
    for j in 0..rows {
        for m in 0..pieces.len() {
            zip(&chains[j][m], &chains[j + 1][m], &mut mesh.triangles);
        }
    }
    mesh
}

/// Triangulates the strip between two chains that run left to right.
fn zip(lower: &[usize], upper: &[usize], out: &mut Vec<[usize; 3]>) {
    let p = lower.len() - 1;
    let q = upper.len() - 1;
    let (mut i, mut j) = (0, 0);
    while i < p || j < q {
        let advance_lower = if i == p {
            false
        } else if j == q {
            true
        } else {
            // Compare normalized positions of the next vertices.
            ((i + 1) * q) <= ((j + 1) * p)
        };
        let tri = if advance_lower {
            i += 1;
            [lower[i - 1], lower[i], upper[j]]
        } else {
            j += 1;
            [lower[i], upper[j], upper[j - 1]]
        };
        if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
            out.push(tri);
        }
    }
}

impl SurfaceMesh {
    fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        m
    }

    pub fn euler_characteristic(&self) -> i64 {
        let used: std::collections::HashSet<usize> = self.triangles.iter().flatten().copied().collect();
        used.len() as i64 - self.edge_counts().len() as i64 + self.triangles.len() as i64
    }

    /// Every edge borders one or two triangles.
    pub fn is_manifold(&self) -> bool {
        self.edge_counts().values().all(|&c| c <= 2)
    }

    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self
            .edge_counts()
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(e, _)| e)
            .collect();
        v.sort_unstable();
        v
    }

    /// Number of closed cycles formed by the boundary edges.
    pub fn boundary_cycles(&self) -> usize {
        let edges = self.boundary_edges();
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for (a, b) in &edges {
            adj.entry(*a).or_default().push(*b);
            adj.entry(*b).or_default().push(*a);
        }
        let mut seen = std::collections::HashSet::new();
        let mut cycles = 0;
        let mut keys: Vec<usize> = adj.keys().copied().collect();
        keys.sort_unstable();
        for start in keys {
            if !seen.insert(start) {
                continue;
            }
            cycles += 1;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for w in &adj[&v] {
                    if seen.insert(*w) {
                        stack.push(*w);
                    }
                }
            }
        }
        cycles
    }

    /// Largest relative difference between spatial and flat edge lengths.
    pub fn max_edge_distortion(&self, lambda: f64) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.edge_counts().keys() {
            let p = self.domain[*a];
            let q = self.domain[*b];
            let mut dx = (p.x - q.x).abs() % lambda;
            dx = dx.min(lambda - dx);
            let flat = dx.hypot(p.y - q.y);
            if flat > 0.0 {
                let space = (self.vertices[*a] - self.vertices[*b]).norm();
                worst = worst.max((space - flat).abs() / flat);
            }
        }
        worst
    }

    pub fn triangle(&self, i: usize) -> [P3; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }
}

/// Wavefront OBJ with the mesh and, optionally, the boundary loops as
/// polyline groups `F` and `G`.
pub fn write_obj<W: Write>(mesh: &SurfaceMesh, loops: Option<(&BoundaryLoop, &BoundaryLoop)>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "o cylinder")?;
    for v in &mesh.vertices {
        writeln!(w, "v {:.12} {:.12} {:.12}", v.x, v.y, v.z)?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    if let Some((f, g)) = loops {
        let mut next = mesh.vertices.len() + 1;
        for (name, l) in [("F", f), ("G", g)] {
            writeln!(w, "g {name}")?;
            for v in &l.points {
                writeln!(w, "v {:.12} {:.12} {:.12}", v.x, v.y, v.z)?;
            }
            let ids: Vec<String> = (next..next + l.points.len()).map(|i| i.to_string()).collect();
            writeln!(w, "l {}", ids.join(" "))?;
            next += l.points.len();
        }
    }
    Ok(())
}
