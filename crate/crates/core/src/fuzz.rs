//! Seeded randomized suites for the planar line lemma, the hull diameter
//! identity and linking-number agreement.

use std::f64::consts::TAU;

use nalgebra::{Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::flat_domain::lemma_line_check;
use crate::geom::{P2, P3, V2, V3};
use crate::topology::{linking, quickhull};

/// Result of one randomized suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    pub tolerance: f64,
    /// Worst margin seen; negative means a violation.
    pub worst_margin: f64,
    pub worst_trial: Option<usize>,
}

impl SuiteReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            trials: 0,
            violations: 0,
            tolerance,
            worst_margin: f64::INFINITY,
            worst_trial: None,
        }
    }

    fn record(&mut self, trial: usize, margin: f64, ok: bool) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
        }
        if margin < self.worst_margin || self.worst_trial.is_none() {
            self.worst_margin = margin;
            self.worst_trial = Some(trial);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub schema_version: u32,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

fn random_unit(rng: &mut ChaCha8Rng) -> V2 {
    let a = rng.gen_range(0.0..TAU);
    V2::new(a.cos(), a.sin())
}

/// Random polyline from `from` to `to` through `k` jittered interior points.
fn wiggle(rng: &mut ChaCha8Rng, from: P2, to: P2) -> Vec<P2> {
    let k = rng.gen_range(0..6);
    let mut v = vec![from];
    for i in 1..=k {
        let s = i as f64 / (k + 1) as f64;
        let jitter = V2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * rng.gen_range(0.0..2.0);
        v.push(from + (to - from) * s + jitter);
    }
    v.push(to);
    v
}

fn length(c: &[P2]) -> f64 {
    c.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Segments `A`, `B` of length at least 1 and arcs `C1: A1 → B1`,
/// `C2: A2 → B2` forced through a common point; checks
/// `ℓ(C1) + ℓ(C2) ≥ ℓ(A) + ℓ(B) ≥ 2`.
pub fn line_lemma_suite(trials: usize, seed: u64, tol: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("line_lemma", tol);
    for trial in 0..trials {
        let a1 = P2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let a2 = a1 + random_unit(&mut rng) * rng.gen_range(1.0..3.0);
        let b1 = P2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let b2 = b1 + random_unit(&mut rng) * rng.gen_range(1.0..3.0);
        let x = P2::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let mut c1 = wiggle(&mut rng, a1, x);
        c1.extend(wiggle(&mut rng, x, b1).into_iter().skip(1));
        let mut c2 = wiggle(&mut rng, a2, x);
        c2.extend(wiggle(&mut rng, x, b2).into_iter().skip(1));
        // Direct oracle, independent of the lemma checker.
        let direct = length(&c1) + length(&c2) - (a2 - a1).norm() - (b2 - b1).norm();
        let (margin, ok) = match lemma_line_check([a1, a2], [b1, b2], &c1, &c2, tol) {
            Ok(cert) => (cert.slack, cert.holds && cert.slack >= -tol && direct >= -tol),
            Err(_) => (f64::NEG_INFINITY, false),
        };
        rep.record(trial, margin.min(direct), ok);
    }
    rep
}

/// Random 50-point clouds; the hull must contain every point and have the
/// same diameter as the cloud.
pub fn hull_diameter_suite(trials: usize, seed: u64, tol: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("hull_diameter", tol);
    for trial in 0..trials {
        let scale = V3::new(rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        let pts: Vec<P3> = (0..50)
            .map(|_| {
                P3::new(
                    rng.gen_range(-1.0..1.0) * scale.x,
                    rng.gen_range(-1.0..1.0) * scale.y,
                    rng.gen_range(-1.0..1.0) * scale.z,
                )
            })
            .collect();
        let brute = pts
            .iter()
            .enumerate()
            .flat_map(|(i, p)| pts[i + 1..].iter().map(move |q| (p - q).norm()))
            .fold(0.0, f64::max);
        let (margin, ok) = match quickhull(&pts) {
            Ok(h) => {
                let outside = h
                    .faces
                    .iter()
                    .flat_map(|f| {
                        let o = pts[f[0]];
                        let n = (pts[f[1]] - o).cross(&(pts[f[2]] - o)).normalize();
                        pts.iter().map(move |p| (p - o).dot(&n))
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                let gap = (h.hull_diameter - brute).abs().max((h.set_diameter - brute).abs());
                (tol - gap, gap <= tol && outside <= 1e-10 && h.dimension == 3)
            }
            Err(_) => (f64::NEG_INFINITY, false),
        };
        rep.record(trial, margin, ok);
    }
    rep
}

fn circle(n: usize, c: V3, e1: V3, e2: V3) -> Vec<P3> {
    let mut v: Vec<P3> = (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            P3::from(c + e1 * a.cos() + e2 * a.sin())
        })
        .collect();
    v.push(v[0]);
    v
}

/// Randomly moved, scaled, jittered and possibly mirrored Hopf links; the
/// Gauss integral must round to the crossing count, which must be `±1`.
pub fn hopf_suite(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::new("hopf_linking", 0.05);
    for trial in 0..trials {
        let n = rng.gen_range(12..64);
        let m = rng.gen_range(12..64);
        let mut f = circle(n, V3::zeros(), V3::x(), V3::y());
        let mut g = circle(m, V3::x(), V3::x(), V3::z());
        let axis = Unit::new_normalize(V3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ));
        let rot = Rotation3::from_axis_angle(&axis, rng.gen_range(0.0..TAU));
        let shift = V3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let scale = rng.gen_range(0.1..10.0);
        let mirror = rng.gen_bool(0.5);
        for l in [&mut f, &mut g] {
            let last = l.len() - 1;
            for p in l[..last].iter_mut() {
                let jitter = V3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let mut q = p.coords + jitter * 0.08;
                if mirror {
                    q.z = -q.z;
                }
                *p = P3::from(rot * q * scale + shift);
            }
            l[last] = l[0];
        }
        let (margin, ok) = match linking(&f, &g) {
            Ok(r) => {
                let off = (r.gauss - r.crossings as f64).abs();
                (0.05 - off, r.gauss.round() as i64 == r.crossings && off <= 0.05 && r.hopf)
            }
            Err(_) => (f64::NEG_INFINITY, false),
        };
        rep.record(trial, margin, ok);
    }
    rep
}

/// All three suites with their pinned tolerances.
pub fn run_all(trials: usize, seed: u64) -> FuzzReport {
    let suites = vec![
        line_lemma_suite(trials, seed, 1e-9),
        hull_diameter_suite(trials, seed.wrapping_add(1), 1e-12),
        hopf_suite(trials / 2, seed.wrapping_add(2)),
    ];
    let passed = suites.iter().all(|s| s.violations == 0);
    FuzzReport {
        schema_version: crate::SCHEMA_VERSION,
        seed,
        suites,
        passed,
    }
}
