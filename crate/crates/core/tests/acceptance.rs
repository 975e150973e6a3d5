//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::thread;

use twisted_cylinder::embedding::{boundary_loops, isometry_report, triangulate, CylinderEmbedding, EmbeddingConfig};
use twisted_cylinder::flat_domain::{CreasePattern, PatternId};
use twisted_cylinder::fuzz::run_all;
use twisted_cylinder::limits::{
    bigon_certificate, convergence_summary, endgame_certificate, fit_right_isosceles, measure,
    uniform_distance_to_limit, verify, CertificateBundle, ConvergenceRecord, VerifyConfig,
};
use twisted_cylinder::rulings::BendFoliation;
use twisted_cylinder::topology::hull_bound_certificate;

const EPSILONS: [f64; 4] = [0.5, 0.2, 0.1, 0.05];

const GRAM: f64 = 1e-8;
const SEPARATION_FRACTION: f64 = 0.5;
const LINKING: f64 = 0.05;
const CHAIN: f64 = 0.02;
const CHAIN_UPPER: f64 = 1e-6;
const HULL_DISTANCE: f64 = 0.99;
const DIAMETER: f64 = 0.99;
const ARC: f64 = 1e-4;
const ANTISYMMETRY: f64 = 1e-10;
const TREND_SLACK: f64 = 0.1;
const LIMIT_METRIC: f64 = 1e-9;
const LIMIT_ISOMETRY: f64 = 1e-12;
const LIMIT_SEAM: f64 = 1e-12;
const CHORD: f64 = 1e-8;
const BEND_LENGTH: f64 = 1e-9;

struct Run {
    id: PatternId,
    epsilon: f64,
    bundle: Result<CertificateBundle, String>,
    record: Option<ConvergenceRecord>,
}

fn run_one(id: PatternId, epsilon: f64) -> Run {
    let cfg = VerifyConfig::default();
    let result = CylinderEmbedding::build(&CreasePattern::catalog(id), epsilon, &EmbeddingConfig::default())
        .and_then(|e| verify(&e, &cfg).map(|b| (e, b)));
    match result {
        Ok((e, b)) => {
            let record = measure(&e, &b, &cfg).ok();
            Run { id, epsilon, bundle: Ok(b), record }
        }
        Err(err) => Run { id, epsilon, bundle: Err(err.to_string()), record: None },
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

/// Applies `check` to every run and reports the first failure.
fn over_runs(runs: &[Run], mut check: impl FnMut(&CertificateBundle) -> Result<(), String>) -> (bool, Option<String>) {
    for r in runs {
        let res = match &r.bundle {
            Ok(b) => check(b),
            Err(e) => Err(e.clone()),
        };
        if let Err(msg) = res {
            return (false, Some(format!("{} eps={}: {msg}", r.id, r.epsilon)));
        }
    }
    (true, None)
}

fn realization(runs: &[Run]) -> Outcome {
    let mut worst_gram = 0.0f64;
    let mut worst_sep = f64::INFINITY;
    let mut worst_link = 0.0f64;
    let (ok, fail) = over_runs(runs, |b| {
        let iso = b.isometry.value.as_ref().ok_or("isometry missing")?;
        let emb = b.embedded.value.as_ref().ok_or("self-intersection missing")?;
        let link = b.linking.value.as_ref().ok_or("linking missing")?;
        worst_gram = worst_gram.max(iso.max_gram_defect);
        worst_sep = worst_sep.min(emb.min_separation / b.layer_gap);
        worst_link = worst_link.max((link.gauss.abs() - 1.0).abs());
        if iso.max_gram_defect > GRAM {
            return Err(format!("gram defect {:.3e}", iso.max_gram_defect));
        }
        if emb.intersects || emb.min_separation < SEPARATION_FRACTION * b.layer_gap {
            return Err(format!("intersects={} separation {:.3e}", emb.intersects, emb.min_separation));
        }
        if (link.gauss.abs() - 1.0).abs() > LINKING || link.crossings.abs() != 1 || link.gauss.round() as i64 != link.crossings {
            return Err(format!("gauss {:.4} crossings {}", link.gauss, link.crossings));
        }
        Ok(())
    });
    Outcome::new(
        ok,
        fail.unwrap_or(format!(
            "gram {worst_gram:.2e} <= {GRAM:e}, separation/gap {worst_sep:.3} >= {SEPARATION_FRACTION}, |gauss| off 1 by {worst_link:.2e} <= {LINKING}"
        )),
    )
}

fn projection_chain(runs: &[Run]) -> Outcome {
    let mut lo = f64::INFINITY;
    let (mut ok, mut fail) = over_runs(runs, |b| {
        let p = b.projection.value.as_ref().ok_or("projection missing")?;
        lo = lo.min(p.c1_plus_c2);
        if !(p.lemma.holds && p.c1_plus_c2 <= b.lambda + CHAIN_UPPER && p.c1_plus_c2 >= 2.0 - CHAIN) {
            return Err(format!("C1+C2 = {:.6}, lambda = {}", p.c1_plus_c2, b.lambda));
        }
        Ok(())
    });
    if ok {
        for id in PatternId::ALL {
            let records: Vec<_> = runs.iter().filter(|r| r.id == id).filter_map(|r| r.record.clone()).collect();
            let s = convergence_summary(&records, 0.0);
            let t = s.trends.iter().find(|t| t.name == "chain_excess").unwrap();
            if records.len() != EPSILONS.len() || !t.monotone {
                ok = false;
                fail = Some(format!("{id}: chain excess {:?} not nonincreasing", t.values));
                break;
            }
        }
    }
    Outcome::new(
        ok,
        fail.unwrap_or(format!("lambda >= C1+C2 >= {lo:.5} >= {}, excess over 2 shrinks with eps", 2.0 - CHAIN)),
    )
}

fn hull_bound(runs: &[Run]) -> Outcome {
    let mut min_xy = f64::INFINITY;
    let mut min_diam = f64::INFINITY;
    let (ok, fail) = over_runs(runs, |b| {
        let h = b.hull_bound.value.as_ref().ok_or_else(|| b.hull_bound.error.clone().unwrap_or_default())?;
        min_xy = min_xy.min(h.x_to_y);
        min_diam = min_diam.min(h.diameter_g);
        if !(h.passed
            && h.distance_to_hull <= h.hull_tolerance
            && h.x_to_y >= HULL_DISTANCE
            && h.diameter_g >= DIAMETER
            && h.length_g >= 2.0)
        {
            return Err(format!("{h:?}"));
        }
        Ok(())
    });
    Outcome::new(
        ok,
        fail.unwrap_or(format!("|x-y| >= {min_xy:.5}, diam(G) >= {min_diam:.5}, x within 1e-3 step of Hull(G), l(G) >= 2")),
    )
}

fn balanced_pair(runs: &[Run]) -> Outcome {
    let mut arc = 0.0f64;
    let mut anti = 0.0f64;
    let (ok, fail) = over_runs(runs, |b| {
        let c = b.balanced_pair.value.as_ref().ok_or_else(|| b.balanced_pair.error.clone().unwrap_or_default())?;
        arc = arc.max(c.arc_deviation / b.lambda);
        anti = anti.max(c.antisymmetry_defect);
        if c.arc_deviation > ARC * b.lambda || c.antisymmetry_defect > ANTISYMMETRY {
            return Err(format!("arc {:.3e}, antisymmetry {:.3e}", c.arc_deviation, c.antisymmetry_defect));
        }
        Ok(())
    });
    Outcome::new(
        ok,
        fail.unwrap_or(format!("arc deviation {arc:.2e} lambda <= {ARC:e} lambda, antisymmetry {anti:.2e} <= {ANTISYMMETRY:e}")),
    )
}

const SWEEP_METRICS: [&str; 8] = [
    "hausdorff_to_triangle",
    "uniform_map_distance",
    "theta_defect",
    "square_division_defect",
    "bigon_g_to_bigon",
    "bigon_f_to_bigon",
    "bigon_y_to_z",
    "bigon_w_to_z",
];

fn convergence(runs: &[Run]) -> Outcome {
    for id in PatternId::ALL {
        let records: Vec<_> = runs.iter().filter(|r| r.id == id).filter_map(|r| r.record.clone()).collect();
        if records.len() != EPSILONS.len() {
            return Outcome::new(false, format!("{id}: only {} of {} runs measured", records.len(), EPSILONS.len()));
        }
        let s = convergence_summary(&records, TREND_SLACK);
        for t in s.trends.iter().filter(|t| SWEEP_METRICS.contains(&t.name.as_str())) {
            if !(t.monotone && t.halved) {
                return Outcome::new(false, format!("{id} {}: {:?}", t.name, t.values));
            }
        }
    }
    Outcome::new(
        true,
        format!("{} metrics nonincreasing within {TREND_SLACK} slack and halved, all patterns", SWEEP_METRICS.len()),
    )
}

fn fuzzing() -> Outcome {
    let r = run_all(1000, 42);
    let detail: Vec<String> = r.suites.iter().map(|s| format!("{} {}/{}", s.name, s.violations, s.trials)).collect();
    let sizes = r.suites.iter().map(|s| s.trials).collect::<Vec<_>>() == [1000, 1000, 500];
    Outcome::new(r.passed && sizes, format!("violations: {}", detail.join(", ")))
}

fn limit_fixture() -> Outcome {
    let mut worst_metric = 0.0f64;
    let mut worst_iso = 0.0f64;
    let mut worst_seam = 0.0f64;
    for id in PatternId::ALL {
        let measured = (|| -> twisted_cylinder::Result<f64> {
            let e = CylinderEmbedding::limit(&CreasePattern::catalog(id))?;
            worst_iso = worst_iso.max(isometry_report(&e, 64, 0, 0).max_gram_defect);
            worst_seam = worst_seam.max(e.seam_defect());
            let mesh = triangulate(&e, 64, 24);
            let fit = fit_right_isosceles(&mesh.vertices, Some(&mesh))?;
            let uniform = uniform_distance_to_limit(&e)?;
            let frame = BendFoliation::new(&e).find_balanced_pair(1024)?;
            let end = endgame_certificate(&frame)?;
            let (f, g) = boundary_loops(&e, 1024)?;
            let hull = hull_bound_certificate(&e, &f, &g)?;
            let bigon = bigon_certificate(&e, &f, &g, &hull)?;
            Ok([fit.hausdorff, uniform.distance, end.theta_defect, end.square_division_defect, bigon.defects.max()]
                .into_iter()
                .fold(0.0, f64::max))
        })();
        match measured {
            Ok(m) => worst_metric = worst_metric.max(m),
            Err(e) => return Outcome::new(false, format!("{id}: {e}")),
        }
    }
    Outcome::new(
        worst_metric <= LIMIT_METRIC && worst_iso <= LIMIT_ISOMETRY && worst_seam <= LIMIT_SEAM,
        format!(
            "metrics {worst_metric:.2e} <= {LIMIT_METRIC:e}, isometry {worst_iso:.2e} <= {LIMIT_ISOMETRY:e}, seam {worst_seam:.2e} <= {LIMIT_SEAM:e}"
        ),
    )
}

fn bends(runs: &[Run]) -> Outcome {
    let mut dev = 0.0f64;
    let mut len = f64::INFINITY;
    let (ok, fail) = over_runs(runs, |b| {
        let r = b.bends.value.as_ref().ok_or("bend report missing")?;
        dev = dev.max(r.max_chord_deviation);
        len = len.min(r.min_length);
        if r.max_chord_deviation > CHORD || r.min_length < 1.0 - BEND_LENGTH {
            return Err(format!("{r:?}"));
        }
        Ok(())
    });
    Outcome::new(ok, fail.unwrap_or(format!("chord deviation {dev:.2e} <= {CHORD:e}, min length {len:.6} >= 1")))
}

fn main() -> ExitCode {
    let runs: Vec<Run> = thread::scope(|s| {
        let handles: Vec<_> = PatternId::ALL
            .iter()
            .flat_map(|&id| EPSILONS.iter().map(move |&eps| (id, eps)))
            .map(|(id, eps)| s.spawn(move || run_one(id, eps)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("run panicked")).collect()
    });

    let results = [
        ("1 realization: isometric, embedded, Hopf-linked boundary", realization(&runs)),
        ("2 projected chain: lambda >= C1+C2 >= 2 - tol", projection_chain(&runs)),
        ("3 hull bound: F meets Hull(G), l(G) >= 2", hull_bound(&runs)),
        ("4 balanced pair: half arcs and antisymmetry", balanced_pair(&runs)),
        ("5 convergence sweep: metrics shrink with eps", convergence(&runs)),
        ("6 randomized lemma, hull and linking suites", fuzzing()),
        ("7 limit fixture scores zero", limit_fixture()),
        ("8 bends straight with length >= 1", bends(&runs)),
    ];
    let mut all = true;
    for (name, o) in &results {
        println!("{} {name} ({})", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        all &= o.passed;
    }
    println!("acceptance: {}/{} criteria passed", results.iter().filter(|r| r.1.passed).count(), results.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
