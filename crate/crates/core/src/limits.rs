//! Degeneration of twisted cylinders as `ε → 0`.
//!
//! [`verify`] runs every certificate on one embedding, [`measure`] turns a
//! verified embedding into a [`ConvergenceRecord`], and [`sweep`] does both
//! along a decreasing list of `ε`.

mod fit;

pub use fit::{fit_right_isosceles, uniform_distance_to_limit, TriangleFit, UniformDistance};

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{
    boundary_loops, isometry_report, triangulate, BoundaryLoop, CylinderEmbedding, EmbeddingConfig, IsometryReport,
    Side,
};
use crate::error::{Error, Result};
use crate::flat_domain::CreasePattern;
use crate::geom::{point_segment_distance, P3, V3};
use crate::pseudofold::Smoothness;
use crate::rulings::{
    bend_report, projection_certificate, BalancedPairFrame, BendFoliation, BendReport, ProjectionCertificate,
};
use crate::topology::{
    hull_bound_certificate, linking, self_intersection, HullBoundCertificate, LinkingResult, SelfIntersectionReport,
};

/// Angle `θ` between `a − c` and `d − b` and the square-division defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndgameCertificate {
    pub theta: f64,
    /// Angle between `a − c` and `b − d`.
    pub theta_reversed: f64,
    pub theta_defect: f64,
    pub square_division_defect: f64,
    pub slopes: [f64; 2],
}

fn angle(p: &V3, q: &V3) -> f64 {
    p.cross(q).norm().atan2(p.dot(q))
}

pub fn endgame_certificate(frame: &BalancedPairFrame) -> Result<EndgameCertificate> {
    let ac = frame.a - frame.c;
    let db = frame.d - frame.b;
    if ac.norm() < 1e-9 || db.norm() < 1e-9 {
        return Err(Error::Degenerate(format!(
            "endgame vectors too short: |a - c| = {:.3e}, |d - b| = {:.3e}",
            ac.norm(),
            db.norm()
        )));
    }
    let theta = angle(&ac, &db);
    Ok(EndgameCertificate {
        theta,
        theta_reversed: angle(&ac, &(-db)),
        theta_defect: (theta - FRAC_PI_2).abs(),
        square_division_defect: frame.square_division_defect(),
        slopes: [frame.u.prebend.slope(), frame.v.prebend.slope()],
    })
}

/// Deviations of the boundary loops from doubled unit segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigonDefects {
    /// Hausdorff distance from `G` to `[y, z]`.
    pub g_to_bigon: f64,
    /// Hausdorff distance from `F` to `[w, z]`.
    pub f_to_bigon: f64,
    /// `|‖y − z‖ − 1|`.
    pub y_to_z: f64,
    /// `|‖w − z‖ − 1|`.
    pub w_to_z: f64,
}

impl BigonDefects {
    pub fn max(&self) -> f64 {
        self.g_to_bigon.max(self.f_to_bigon).max(self.y_to_z).max(self.w_to_z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigonCertificate {
    pub x: P3,
    pub y: P3,
    pub z: P3,
    pub w: P3,
    pub z_param: f64,
    pub w_param: f64,
    /// Signed distance of `z` past the plane through `x` normal to `x − y`.
    pub depth: f64,
    pub y_to_z_length: f64,
    pub w_to_z_length: f64,
    pub w_to_x_length: f64,
    pub defects: BigonDefects,
    pub passed: bool,
}

fn hausdorff_to_segment(points: &[P3], a: &P3, b: &P3) -> f64 {
    let forward = points.iter().map(|p| point_segment_distance(p, a, b)).fold(0.0, f64::max);
    const N: usize = 256;
    let backward = (0..=N)
        .map(|i| {
            let q = a + (b - a) * (i as f64 / N as f64);
            points
                .windows(2)
                .map(|w| point_segment_distance(&q, &w[0], &w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    forward.max(backward)
}

/// Picks `z ∈ G` deepest in the half-space beyond `x` away from `y`, follows
/// the bend at `z` to `w ∈ F`, and measures how far `F` and `G` are from the
/// bigons `[w, z]` and `[y, z]`.
pub fn bigon_certificate(
    emb: &CylinderEmbedding,
    f: &BoundaryLoop,
    g: &BoundaryLoop,
    hull: &HullBoundCertificate,
) -> Result<BigonCertificate> {
    let (x, y) = (hull.x, hull.y);
    let xy = x - y;
    if xy.norm() < 1e-12 {
        return Err(Error::Degenerate("x and y coincide".into()));
    }
    let nrm = xy.normalize();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, p) in g.points.iter().enumerate() {
        let depth = (p - x).dot(&nrm);
        if depth > best.0 {
            best = (depth, i);
        }
    }
    if best.0 < -1e-9 {
        return Err(Error::EmptyHalfspace(best.0));
    }
    let z = g.points[best.1];
    let z_param = g.params[best.1];
    let fol = BendFoliation::new(emb);
    let bend = fol.bend_of(&fol.prebend_through(Side::G, z_param));
    let w = bend.f_point;
    let y_to_z_length = (y - z).norm();
    let w_to_z_length = (w - z).norm();
    let defects = BigonDefects {
        g_to_bigon: hausdorff_to_segment(&g.points, &y, &z),
        f_to_bigon: hausdorff_to_segment(&f.points, &w, &z),
        y_to_z: (y_to_z_length - 1.0).abs(),
        w_to_z: (w_to_z_length - 1.0).abs(),
    };
    Ok(BigonCertificate {
        x,
        y,
        z,
        w,
        z_param,
        w_param: bend.f_x,
        depth: best.0,
        y_to_z_length,
        w_to_z_length,
        w_to_x_length: (w - x).norm(),
        defects,
        passed: y_to_z_length >= 1.0 - 1e-9,
    })
}

/// Pass thresholds for [`verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub gram: f64,
    pub finite_difference: f64,
    pub continuity: f64,
    /// Required separation as a fraction of the layer gap.
    pub separation_fraction: f64,
    /// Distance of the Gauss integral from the crossing count.
    pub linking: f64,
    pub chord: f64,
    pub bend_length: f64,
    /// Arc-length tolerance of the balanced pair, relative to `λ`.
    pub arc: f64,
    pub antisymmetry: f64,
    pub slope: f64,
    pub chain: f64,
    pub hull_distance: f64,
    pub diameter: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gram: 1e-8,
            finite_difference: 1e-6,
            continuity: 1e-9,
            separation_fraction: 0.5,
            linking: 0.05,
            chord: 1e-8,
            bend_length: 1e-9,
            arc: 1e-4,
            antisymmetry: 1e-10,
            slope: 1e-9,
            chain: 0.02,
            hull_distance: 0.99,
            diameter: 0.99,
        }
    }
}

/// Sampling densities and seeds for [`verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Samples per unit length for the isometry grid and the mesh.
    pub grid: usize,
    /// Mesh columns across each band.
    pub band_columns: usize,
    pub boundary_samples: usize,
    pub fd_samples: usize,
    pub scan: usize,
    pub bends: usize,
    pub bend_samples: usize,
    pub antisymmetry_samples: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            grid: 64,
            band_columns: 24,
            boundary_samples: 1024,
            fd_samples: 100,
            scan: 1024,
            bends: 256,
            bend_samples: 32,
            antisymmetry_samples: 100,
            seed: 42,
            tolerances: Tolerances::default(),
        }
    }
}

/// Outcome of one certificate; `value` is absent when it could not be
/// computed and `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check<T> {
    pub passed: bool,
    pub value: Option<T>,
    pub error: Option<String>,
}

impl<T> Check<T> {
    fn new(r: Result<T>, pass: impl FnOnce(&T) -> bool) -> Self {
        match r {
            Ok(v) => Self {
                passed: pass(&v),
                value: Some(v),
                error: None,
            },
            Err(e) => Self {
                passed: false,
                value: None,
                error: Some(e.to_string()),
            },
        }
    }

    fn missing(what: &str) -> Self {
        Self {
            passed: false,
            value: None,
            error: Some(format!("{what} unavailable")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub seam_defect: f64,
    pub continuity_defect: f64,
    pub boundary_lengths: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancedPairCheck {
    pub frame: BalancedPairFrame,
    pub slope_gap: f64,
    /// Largest `|f(t) + f(t + λ/2)|` over random `t`.
    pub antisymmetry_defect: f64,
    /// Largest `|arc − λ/2|` over the four spatial arcs.
    pub arc_deviation: f64,
}

/// Every certificate for one embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateBundle {
    pub schema_version: u32,
    pub pattern: String,
    pub epsilon: f64,
    pub lambda: f64,
    pub layer_gap: f64,
    pub smoothness: Smoothness,
    pub tolerances: Tolerances,
    pub isometry: Check<IsometryReport>,
    pub closure: Check<ClosureReport>,
    pub embedded: Check<SelfIntersectionReport>,
    pub linking: Check<LinkingResult>,
    pub bends: Check<BendReport>,
    pub balanced_pair: Check<BalancedPairCheck>,
    pub projection: Check<ProjectionCertificate>,
    pub hull_bound: Check<HullBoundCertificate>,
    pub endgame: Check<EndgameCertificate>,
    pub bigon: Check<BigonCertificate>,
    pub passed: bool,
}

impl CertificateBundle {
    /// Names of the certificates that did not pass.
    pub fn failures(&self) -> Vec<&'static str> {
        let all = [
            ("isometry", self.isometry.passed),
            ("closure", self.closure.passed),
            ("embedded", self.embedded.passed),
            ("linking", self.linking.passed),
            ("bends", self.bends.passed),
            ("balanced_pair", self.balanced_pair.passed),
            ("projection", self.projection.passed),
            ("hull_bound", self.hull_bound.passed),
            ("endgame", self.endgame.passed),
            ("bigon", self.bigon.passed),
        ];
        all.iter().filter(|(_, p)| !p).map(|(n, _)| *n).collect()
    }
}

fn balanced_pair_check(fol: &BendFoliation<'_>, cfg: &VerifyConfig) -> Result<BalancedPairCheck> {
    let frame = fol.find_balanced_pair(cfg.scan)?;
    let lambda = fol.lambda();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let antisymmetry_defect = (0..cfg.antisymmetry_samples)
        .map(|_| {
            let t = rng.gen_range(0.0..lambda);
            (fol.balance_defect(t) + fol.balance_defect(t + 0.5 * lambda)).abs()
        })
        .fold(0.0, f64::max);
    let arc_deviation = frame
        .arcs
        .f
        .iter()
        .chain(frame.arcs.g.iter())
        .map(|l| (l - 0.5 * lambda).abs())
        .fold(0.0, f64::max);
    Ok(BalancedPairCheck {
        slope_gap: (frame.u.prebend.slope() - frame.v.prebend.slope()).abs(),
        frame,
        antisymmetry_defect,
        arc_deviation,
    })
}

/// Runs every certificate on `emb`.
pub fn verify(emb: &CylinderEmbedding, cfg: &VerifyConfig) -> Result<CertificateBundle> {
    let tol = cfg.tolerances;
    let lambda = emb.lambda();
    let (f, g) = boundary_loops(emb, cfg.boundary_samples)?;

    let iso = isometry_report(emb, cfg.grid, cfg.fd_samples, cfg.seed);
    let isometry = Check::new(Ok(iso), |r| {
        r.max_gram_defect <= tol.gram && r.fd_max_error <= tol.finite_difference
    });
    let closure = Check::new(
        Ok(ClosureReport {
            seam_defect: emb.seam_defect(),
            continuity_defect: emb.continuity_defect(),
            boundary_lengths: [f.length, g.length],
        }),
        |c| c.seam_defect <= tol.continuity && c.continuity_defect <= tol.continuity,
    );
    let mesh = triangulate(emb, cfg.grid, cfg.band_columns);
    let embedded = Check::new(Ok(self_intersection(&mesh, emb.layer_gap(), lambda)), |r| {
        !r.intersects && r.min_separation >= tol.separation_fraction * emb.layer_gap()
    });
    let linking = Check::new(linking(&f.points, &g.points), |r| {
        let k = r.gauss.round();
        (r.gauss - k).abs() <= tol.linking && k as i64 == r.crossings && r.hopf
    });
    let fol = BendFoliation::new(emb);
    let bends = Check::new(Ok(bend_report(&fol, cfg.bends, cfg.bend_samples)), |r| {
        r.max_chord_deviation <= tol.chord && r.min_length >= 1.0 - tol.bend_length
    });
    let balanced_pair = Check::new(balanced_pair_check(&fol, cfg), |b| {
        b.slope_gap <= tol.slope && b.antisymmetry_defect <= tol.antisymmetry && b.arc_deviation <= tol.arc * lambda
    });
    let frame = balanced_pair.value.as_ref().map(|b| &b.frame);
    let projection = match frame {
        Some(fr) => Check::new(projection_certificate(emb, fr, tol.chain), |p| p.passed),
        None => Check::missing("balanced pair"),
    };
    let endgame = match frame {
        Some(fr) => Check::new(endgame_certificate(fr), |e| e.theta.is_finite()),
        None => Check::missing("balanced pair"),
    };
    let hull_bound = Check::new(hull_bound_certificate(emb, &f, &g), |h| {
        h.passed
            && h.distance_to_hull <= h.hull_tolerance
            && h.x_to_y >= tol.hull_distance
            && h.diameter_g >= tol.diameter
            && h.length_g >= 2.0 - 1e-6
    });
    let bigon = match &hull_bound.value {
        Some(h) => Check::new(bigon_certificate(emb, &f, &g, h), |b| b.passed),
        None => Check::missing("hull bound"),
    };
    let mut bundle = CertificateBundle {
        schema_version: crate::SCHEMA_VERSION,
        pattern: emb.pattern().base.pattern_id.clone(),
        epsilon: emb.epsilon(),
        lambda,
        layer_gap: emb.layer_gap(),
        smoothness: emb.smoothness(),
        tolerances: tol,
        isometry,
        closure,
        embedded,
        linking,
        bends,
        balanced_pair,
        projection,
        hull_bound,
        endgame,
        bigon,
        passed: false,
    };
    bundle.passed = bundle.failures().is_empty();
    Ok(bundle)
}

/// Convergence metrics of one embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub pattern_id: String,
    pub epsilon: f64,
    pub lambda: f64,
    pub hausdorff_to_triangle: f64,
    pub uniform_map_distance: f64,
    pub theta: f64,
    pub theta_defect: f64,
    pub square_division_defect: f64,
    pub bigon_defects: BigonDefects,
    pub bigon_defect: f64,
    /// `ℓ(C1) + ℓ(C2)` from the projection certificate.
    pub c1_plus_c2: Option<f64>,
    /// Planar distance between the crossing point of the projection
    /// certificate and the shadow of `x` from the hull bound.
    pub cross_proof_distance: Option<f64>,
    pub linking: Option<i64>,
}

/// Measures the convergence metrics, reusing the certificates in `bundle`.
pub fn measure(emb: &CylinderEmbedding, bundle: &CertificateBundle, cfg: &VerifyConfig) -> Result<ConvergenceRecord> {
    let missing = |what: &str| Error::VerificationFailed {
        epsilon: emb.epsilon(),
        failed: format!("{what} unavailable"),
    };
    let frame = &bundle.balanced_pair.value.as_ref().ok_or_else(|| missing("balanced pair"))?.frame;
    let endgame = bundle.endgame.value.as_ref().ok_or_else(|| missing("endgame"))?;
    let bigon = bundle.bigon.value.as_ref().ok_or_else(|| missing("bigon"))?;
    let hull = bundle.hull_bound.value.as_ref().ok_or_else(|| missing("hull bound"))?;
    let mesh = triangulate(emb, cfg.grid, cfg.band_columns);
    let fit = fit_right_isosceles(&mesh.vertices, Some(&mesh))?;
    let uniform = uniform_distance_to_limit(emb)?;
    let projection = bundle.projection.value.as_ref();
    let cross_proof_distance = projection.map(|p| {
        let sx = p.basis[0].dot(&hull.x.coords) - p.x[0];
        let sy = p.basis[1].dot(&hull.x.coords) - p.x[1];
        sx.hypot(sy)
    });
    Ok(ConvergenceRecord {
        pattern_id: bundle.pattern.clone(),
        epsilon: emb.epsilon(),
        lambda: emb.lambda(),
        hausdorff_to_triangle: fit.hausdorff,
        uniform_map_distance: uniform.distance,
        theta: endgame.theta,
        theta_defect: endgame.theta_defect,
        square_division_defect: frame.square_division_defect(),
        bigon_defects: bigon.defects,
        bigon_defect: bigon.defects.max(),
        c1_plus_c2: projection.map(|p| p.c1_plus_c2),
        cross_proof_distance,
        linking: bundle.linking.value.as_ref().map(|l| l.crossings),
    })
}

/// Embedding and verification settings for a sweep.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepConfig {
    pub embedding: EmbeddingConfig,
    pub verify: VerifyConfig,
}

/// One sweep entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub bundle: CertificateBundle,
    pub record: ConvergenceRecord,
}

/// Builds, verifies and measures `base` at one `ε`.
pub fn run(base: &CreasePattern, epsilon: f64, cfg: &SweepConfig) -> Result<SweepEntry> {
    let emb = CylinderEmbedding::build(base, epsilon, &cfg.embedding)?;
    let bundle = verify(&emb, &cfg.verify)?;
    if !bundle.passed {
        return Err(Error::VerificationFailed {
            epsilon,
            failed: bundle.failures().join(", "),
        });
    }
    let record = measure(&emb, &bundle, &cfg.verify)?;
    Ok(SweepEntry { bundle, record })
}

/// Runs [`run`] for every `ε`, in parallel, returning entries in input order.
pub fn sweep(base: &CreasePattern, epsilons: &[f64], cfg: &SweepConfig) -> Result<Vec<SweepEntry>> {
    if epsilons.is_empty() {
        return Err(Error::Precondition("empty epsilon list".into()));
    }
    for &e in epsilons {
        if !(e > 0.0 && e <= 0.5) {
            return Err(Error::EpsilonOutOfRange(e));
        }
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("epsilons must be strictly decreasing".into()));
    }
    let results: Vec<Result<SweepEntry>> = std::thread::scope(|s| {
        let handles: Vec<_> = epsilons.iter().map(|&e| s.spawn(move || run(base, e, cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    results.into_iter().collect()
}

/// How one metric behaves along a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTrend {
    pub name: String,
    pub values: Vec<f64>,
    /// Each value at most `(1 + slack)` times the previous one.
    pub monotone: bool,
    /// Last value below half the first, or below `1e-9`.
    pub halved: bool,
    /// Least-squares slope of `ln value` against `ln ε`; informational.
    pub fitted_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub pattern_id: String,
    pub epsilons: Vec<f64>,
    pub slack: f64,
    pub trends: Vec<MetricTrend>,
    pub passed: bool,
}

/// Absolute floor under which a metric counts as zero.
pub const ZERO_FLOOR: f64 = 1e-9;

fn trend(name: &str, eps: &[f64], values: Vec<f64>, slack: f64) -> MetricTrend {
    let monotone = values.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack) + ZERO_FLOOR);
    let halved = match (values.first(), values.last()) {
        (Some(a), Some(b)) => *b < 0.5 * a || *b <= ZERO_FLOOR,
        _ => true,
    };
    let fitted_exponent = if values.len() >= 2 && values.iter().all(|v| *v > 0.0) {
        let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    } else {
        None
    };
    MetricTrend {
        name: name.into(),
        values,
        monotone,
        halved,
        fitted_exponent,
    }
}

/// Checks every convergence metric of a single-pattern sweep.
///
/// The chain excess `ℓ(C1) + ℓ(C2) − 2` is reported as a trend too; it is
/// bounded by `λ − 2 = ε` and must shrink with `ε`.
pub fn convergence_summary(records: &[ConvergenceRecord], slack: f64) -> ConvergenceSummary {
    let eps: Vec<f64> = records.iter().map(|r| r.epsilon).collect();
    let col = |f: &dyn Fn(&ConvergenceRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let trends = vec![
        trend("hausdorff_to_triangle", &eps, col(&|r| r.hausdorff_to_triangle), slack),
        trend("uniform_map_distance", &eps, col(&|r| r.uniform_map_distance), slack),
        trend("theta_defect", &eps, col(&|r| r.theta_defect), slack),
        trend("square_division_defect", &eps, col(&|r| r.square_division_defect), slack),
        trend("bigon_g_to_bigon", &eps, col(&|r| r.bigon_defects.g_to_bigon), slack),
        trend("bigon_f_to_bigon", &eps, col(&|r| r.bigon_defects.f_to_bigon), slack),
        trend("bigon_y_to_z", &eps, col(&|r| r.bigon_defects.y_to_z), slack),
        trend("bigon_w_to_z", &eps, col(&|r| r.bigon_defects.w_to_z), slack),
        trend(
            "chain_excess",
            &eps,
            col(&|r| r.c1_plus_c2.map_or(f64::INFINITY, |c| (c - 2.0).max(0.0))),
            slack,
        ),
    ];
    let chain_bounded = records
        .iter()
        .all(|r| r.c1_plus_c2.is_some_and(|c| c - 2.0 <= r.lambda - 2.0 + 1e-6));
    let passed = chain_bounded && trends.iter().all(|t| t.monotone && t.halved);
    ConvergenceSummary {
        pattern_id: records.first().map(|r| r.pattern_id.clone()).unwrap_or_default(),
        epsilons: eps,
        slack,
        trends,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat_domain::PatternId;

    fn limit() -> CylinderEmbedding {
        CylinderEmbedding::limit(&CreasePattern::catalog(PatternId::P1)).unwrap()
    }

    #[test]
    fn limit_endgame_is_a_right_angle() {
        let e = limit();
        let frame = BendFoliation::new(&e).find_balanced_pair(1024).unwrap();
        let c = endgame_certificate(&frame).unwrap();
        assert!(c.theta_defect < 1e-12, "{c:?}");
        assert!((c.theta + c.theta_reversed - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn limit_bigons_are_doubled_unit_segments() {
        let e = limit();
        let (f, g) = boundary_loops(&e, 256).unwrap();
        let h = hull_bound_certificate(&e, &f, &g).unwrap();
        let b = bigon_certificate(&e, &f, &g, &h).unwrap();
        assert!(b.defects.max() < 1e-12, "{b:?}");
    }

    #[test]
    fn limit_map_is_at_distance_zero_after_a_rigid_motion() {
        let r = nalgebra::Rotation3::from_euler_angles(0.7, 0.2, -1.3);
        let e = limit().transformed(r.matrix(), &V3::new(1.0, 2.0, 3.0));
        let d = uniform_distance_to_limit(&e).unwrap();
        assert!(d.distance < 1e-9, "{d:?}");
    }

    #[test]
    fn trend_flags() {
        let t = trend("m", &[0.4, 0.2, 0.1], vec![1.0, 1.05, 0.4], 0.1);
        assert!(t.monotone && t.halved);
        let t = trend("m", &[0.4, 0.2, 0.1], vec![1.0, 1.2, 0.4], 0.1);
        assert!(!t.monotone);
        let t = trend("m", &[0.4, 0.2], vec![0.0, 0.0], 0.1);
        assert!(t.monotone && t.halved && t.fitted_exponent.is_none());
        let t = trend("m", &[0.4, 0.2, 0.1], vec![4.0, 2.0, 1.0], 0.1);
        assert!((t.fitted_exponent.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_rejects_bad_epsilon_lists() {
        let base = CreasePattern::catalog(PatternId::P1);
        let cfg = SweepConfig::default();
        assert!(matches!(sweep(&base, &[0.1, 0.2], &cfg), Err(Error::Precondition(_))));
        assert!(matches!(sweep(&base, &[0.7], &cfg), Err(Error::EpsilonOutOfRange(_))));
    }
}
