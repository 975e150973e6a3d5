mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use twisted_cylinder::embedding::{
    boundary_loops, isometry_report, triangulate, write_obj, CylinderEmbedding, EmbeddingConfig, EmbeddingReport,
};
use twisted_cylinder::flat_domain::{CreasePattern, PatternId};
use twisted_cylinder::fuzz::run_all;
use twisted_cylinder::limits::{
    convergence_summary, measure, verify, ConvergenceRecord, ConvergenceSummary, VerifyConfig,
};
use twisted_cylinder::topology::{linking, LinkingResult};
use twisted_cylinder::{Error, SCHEMA_VERSION};

const DEFAULT_EPSILONS: [f64; 4] = [0.5, 0.2, 0.1, 0.05];

#[derive(Parser)]
#[command(name = "twistcyl", version, about = "Build and certify twisted paper cylinders of aspect ratio 2 + epsilon")]
#[command(args_override_self = true)]
struct Cli {
    /// Flat `key = value` file of flags; flags on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the embedding and export an OBJ mesh and a JSON report.
    Build(Opts),
    /// Run every certificate and write the bundle as JSON.
    Verify(Opts),
    /// Verify and measure over a list of epsilons; CSV rows plus a JSON summary.
    Sweep(Opts),
    /// Run the seeded randomized lemma, hull and linking suites.
    Lemmas(Opts),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Build(_) => "build",
            Command::Verify(_) => "verify",
            Command::Sweep(_) => "sweep",
            Command::Lemmas(_) => "lemmas",
        }
    }

    fn opts(&self) -> &Opts {
        match self {
            Command::Build(o) | Command::Verify(o) | Command::Sweep(o) | Command::Lemmas(o) => o,
        }
    }
}

#[derive(Args, Clone, Debug)]
struct Opts {
    /// Pattern id: P1, P2, P1m or P2m. Sweeps default to all four.
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_parser = parse_list)]
    epsilons: Option<EpsilonList>,
    /// Samples per unit length for meshes and isometry grids.
    #[arg(long)]
    grid: Option<usize>,
    /// Vertical spacing of stacked layers; defaults to half the largest feasible value.
    #[arg(long)]
    layer_gap: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per randomized suite.
    #[arg(long)]
    trials: Option<usize>,
    /// Main output: OBJ for build, CSV for sweep.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    tol_gram: Option<f64>,
    #[arg(long)]
    tol_finite_difference: Option<f64>,
    #[arg(long)]
    tol_continuity: Option<f64>,
    #[arg(long)]
    tol_separation: Option<f64>,
    #[arg(long)]
    tol_linking: Option<f64>,
    #[arg(long)]
    tol_chord: Option<f64>,
    #[arg(long)]
    tol_bend_length: Option<f64>,
    #[arg(long)]
    tol_arc: Option<f64>,
    #[arg(long)]
    tol_antisymmetry: Option<f64>,
    #[arg(long)]
    tol_slope: Option<f64>,
    #[arg(long)]
    tol_chain: Option<f64>,
    #[arg(long)]
    tol_hull_distance: Option<f64>,
    #[arg(long)]
    tol_diameter: Option<f64>,
    /// Allowed relative increase per step in sweep trends.
    #[arg(long)]
    tol_trend: Option<f64>,
}

#[derive(Clone, Debug)]
struct EpsilonList(Vec<f64>);

fn parse_list(s: &str) -> Result<EpsilonList, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()
        .map(EpsilonList)
}

enum Failure {
    Config(String),
    Certificate(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownPattern(_)
            | Error::InvalidPattern(_)
            | Error::EpsilonOutOfRange(_)
            | Error::BandsCollide(_)
            | Error::BudgetInsufficient { .. }
            | Error::Precondition(_)
            | Error::OutOfRange(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

impl Opts {
    fn pattern(&self) -> Result<CreasePattern, Failure> {
        Ok(CreasePattern::from_id(self.pattern.as_deref().unwrap_or("P1"))?)
    }

    fn patterns(&self) -> Result<Vec<CreasePattern>, Failure> {
        match &self.pattern {
            Some(_) => Ok(vec![self.pattern()?]),
            None => Ok(PatternId::ALL.iter().map(|&id| CreasePattern::catalog(id)).collect()),
        }
    }

    fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(0.1)
    }

    fn epsilons(&self) -> Vec<f64> {
        match (&self.epsilons, self.epsilon) {
            (Some(v), _) => v.0.clone(),
            (None, Some(e)) => vec![e],
            (None, None) => DEFAULT_EPSILONS.to_vec(),
        }
    }

    fn embedding(&self) -> Result<EmbeddingConfig, Failure> {
        if let Some(g) = self.layer_gap {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(Failure::Config(format!("layer gap must be a finite nonnegative number, got {g}")));
            }
        }
        Ok(EmbeddingConfig {
            layer_gap: self.layer_gap,
            ..Default::default()
        })
    }

    fn verify(&self) -> Result<VerifyConfig, Failure> {
        let mut cfg = VerifyConfig::default();
        if let Some(g) = self.grid {
            if g < 4 {
                return Err(Failure::Config(format!("grid must be at least 4, got {g}")));
            }
            cfg.grid = g;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let t = &mut cfg.tolerances;
        let overrides = [
            (self.tol_gram, &mut t.gram),
            (self.tol_finite_difference, &mut t.finite_difference),
            (self.tol_continuity, &mut t.continuity),
            (self.tol_separation, &mut t.separation_fraction),
            (self.tol_linking, &mut t.linking),
            (self.tol_chord, &mut t.chord),
            (self.tol_bend_length, &mut t.bend_length),
            (self.tol_arc, &mut t.arc),
            (self.tol_antisymmetry, &mut t.antisymmetry),
            (self.tol_slope, &mut t.slope),
            (self.tol_chain, &mut t.chain),
            (self.tol_hull_distance, &mut t.hull_distance),
            (self.tol_diameter, &mut t.diameter),
        ];
        for (value, slot) in overrides {
            if let Some(v) = value {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Failure::Config(format!("tolerances must be finite and nonnegative, got {v}")));
                }
                *slot = v;
            }
        }
        Ok(cfg)
    }

    fn build(&self, base: &CreasePattern, epsilon: f64) -> Result<CylinderEmbedding, Failure> {
        Ok(CylinderEmbedding::build(base, epsilon, &self.embedding()?)?)
    }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct BuildReport {
    #[serde(flatten)]
    embedding: EmbeddingReport,
    linking: Option<LinkingResult>,
    linking_error: Option<String>,
    passed: bool,
}

fn cmd_build(o: &Opts) -> Outcome {
    let base = o.pattern()?;
    let emb = o.build(&base, o.epsilon())?;
    let cfg = o.verify()?;
    let iso = isometry_report(&emb, cfg.grid, cfg.fd_samples, cfg.seed);
    let loops = boundary_loops(&emb, cfg.boundary_samples)?;
    let mesh = triangulate(&emb, cfg.grid, cfg.band_columns);
    let link = linking(&loops.0.points, &loops.1.points);
    let tol = cfg.tolerances;
    let passed = iso.max_gram_defect <= tol.gram
        && emb.seam_defect() <= tol.continuity
        && link.as_ref().is_ok_and(|l| l.hopf && (l.gauss - l.crossings as f64).abs() <= tol.linking);
    let mut obj = Vec::new();
    write_obj(&mesh, Some((&loops.0, &loops.1)), &mut obj)?;
    write_atomic(o.out.as_deref().unwrap_or(Path::new("cylinder.obj")), &obj)?;
    let report = BuildReport {
        embedding: EmbeddingReport::new(&emb, &iso, &loops, &mesh),
        linking_error: link.as_ref().err().map(|e| e.to_string()),
        linking: link.ok(),
        passed,
    };
    emit_json(&report, o.report.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Certificate("build invariants failed".into()))
    }
}

fn cmd_verify(o: &Opts) -> Outcome {
    let base = o.pattern()?;
    let emb = o.build(&base, o.epsilon())?;
    let bundle = verify(&emb, &o.verify()?)?;
    emit_json(&bundle, o.report.as_deref())?;
    if bundle.passed {
        Ok(())
    } else {
        Err(Failure::Certificate(format!("failed certificates: {}", bundle.failures().join(", "))))
    }
}

#[derive(Serialize)]
struct SweepRow {
    pattern: String,
    epsilon: f64,
    lambda: f64,
    passed: bool,
    failures: String,
    hausdorff_to_triangle: Option<f64>,
    uniform_map_distance: Option<f64>,
    theta: Option<f64>,
    theta_defect: Option<f64>,
    square_division_defect: Option<f64>,
    bigon_g_to_bigon: Option<f64>,
    bigon_f_to_bigon: Option<f64>,
    bigon_y_to_z: Option<f64>,
    bigon_w_to_z: Option<f64>,
    c1_plus_c2: Option<f64>,
    cross_proof_distance: Option<f64>,
    linking: Option<i64>,
}

impl SweepRow {
    fn new(pattern: &str, epsilon: f64, lambda: f64, failures: Vec<&str>, r: Option<&ConvergenceRecord>) -> Self {
        Self {
            pattern: pattern.into(),
            epsilon,
            lambda,
            passed: failures.is_empty() && r.is_some(),
            failures: failures.join(";"),
            hausdorff_to_triangle: r.map(|r| r.hausdorff_to_triangle),
            uniform_map_distance: r.map(|r| r.uniform_map_distance),
            theta: r.map(|r| r.theta),
            theta_defect: r.map(|r| r.theta_defect),
            square_division_defect: r.map(|r| r.square_division_defect),
            bigon_g_to_bigon: r.map(|r| r.bigon_defects.g_to_bigon),
            bigon_f_to_bigon: r.map(|r| r.bigon_defects.f_to_bigon),
            bigon_y_to_z: r.map(|r| r.bigon_defects.y_to_z),
            bigon_w_to_z: r.map(|r| r.bigon_defects.w_to_z),
            c1_plus_c2: r.and_then(|r| r.c1_plus_c2),
            cross_proof_distance: r.and_then(|r| r.cross_proof_distance),
            linking: r.and_then(|r| r.linking),
        }
    }
}

#[derive(Serialize)]
struct SweepSummary {
    schema_version: u32,
    epsilons: Vec<f64>,
    runs: usize,
    failed_runs: Vec<String>,
    /// Trends are only judged with at least two epsilons.
    convergence: Vec<ConvergenceSummary>,
    passed: bool,
}

fn cmd_sweep(o: &Opts) -> Outcome {
    let patterns = o.patterns()?;
    let epsilons = o.epsilons();
    if epsilons.is_empty() {
        return Err(Failure::Config("empty epsilon list".into()));
    }
    for &e in &epsilons {
        if !(e > 0.0 && e <= 0.5) {
            return Err(Error::EpsilonOutOfRange(e).into());
        }
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Failure::Config("epsilons must be strictly decreasing".into()));
    }
    let cfg = o.verify()?;
    let embeddings = patterns
        .iter()
        .flat_map(|p| epsilons.iter().map(move |&e| (p, e)))
        .map(|(p, e)| o.build(p, e))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = embeddings
            .iter()
            .map(|emb| {
                s.spawn(move || {
                    let bundle = verify(emb, &cfg)?;
                    let record = measure(emb, &bundle, &cfg).ok();
                    Ok::<_, Error>((bundle, record))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });

    let mut rows = Vec::new();
    let mut failed_runs = Vec::new();
    let mut records_by_pattern: Vec<Vec<ConvergenceRecord>> = vec![Vec::new(); patterns.len()];
    for (i, (emb, result)) in embeddings.iter().zip(results).enumerate() {
        let (bundle, record) = result?;
        let row = SweepRow::new(&bundle.pattern, bundle.epsilon, emb.lambda(), bundle.failures(), record.as_ref());
        if !row.passed {
            failed_runs.push(format!("{} eps={}", row.pattern, row.epsilon));
        }
        if let Some(r) = record {
            records_by_pattern[i / epsilons.len()].push(r);
        }
        rows.push(row);
    }
    let slack = o.tol_trend.unwrap_or(0.1);
    let convergence: Vec<ConvergenceSummary> = if epsilons.len() >= 2 {
        records_by_pattern.iter().map(|r| convergence_summary(r, slack)).collect()
    } else {
        Vec::new()
    };
    let complete = records_by_pattern.iter().all(|r| r.len() == epsilons.len());
    let passed = failed_runs.is_empty() && complete && convergence.iter().all(|c| c.passed);

    let mut csv = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        csv.serialize(row).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let bytes = csv.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
    write_atomic(o.out.as_deref().unwrap_or(Path::new("sweep.csv")), &bytes)?;
    let summary = SweepSummary {
        schema_version: SCHEMA_VERSION,
        epsilons,
        runs: rows.len(),
        failed_runs,
        convergence,
        passed,
    };
    emit_json(&summary, o.report.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Certificate("sweep checks failed".into()))
    }
}

fn cmd_lemmas(o: &Opts) -> Outcome {
    let report = run_all(o.trials.unwrap_or(1000), o.seed.unwrap_or(42));
    emit_json(&report, o.report.as_deref())?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Certificate("randomized suites found violations".into()))
    }
}

fn parse(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let first = Cli::try_parse_from(&argv)?;
    let Some(path) = first.config.clone() else {
        return Ok(first);
    };
    let extra = config::read_args(&path)
        .map_err(|e| clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{e}\n")))?;
    Cli::try_parse_from(config::splice(&argv, first.command.name(), extra))
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let o = cli.command.opts();
    let result = match &cli.command {
        Command::Build(_) => cmd_build(o),
        Command::Verify(_) => cmd_verify(o),
        Command::Sweep(_) => cmd_sweep(o),
        Command::Lemmas(_) => cmd_lemmas(o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("twistcyl: invalid configuration: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Certificate(m)) => {
            eprintln!("twistcyl: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("twistcyl: {m}");
            ExitCode::from(1)
        }
    }
}
