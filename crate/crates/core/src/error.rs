use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown pattern id `{0}`")]
    UnknownPattern(String),

    #[error("invalid crease pattern: {0}")]
    InvalidPattern(String),

    #[error("epsilon {0} outside the supported range (0, 0.5]")]
    EpsilonOutOfRange(f64),

    #[error("bands collide: {0}")]
    BandsCollide(String),

    #[error("lemma precondition violated: {0}")]
    Precondition(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("root bracket [{lo}, {hi}] does not contain a sign change")]
    NoBracket { lo: f64, hi: f64 },

    #[error(
        "epsilon budget insufficient for layer gap {layer_gap}: crease {crease} needs width {needed:.6} but its band has {available:.6}"
    )]
    BudgetInsufficient {
        crease: usize,
        layer_gap: f64,
        needed: f64,
        available: f64,
    },

    #[error("chart continuity violated at {location}: defect {defect:.3e}")]
    Continuity { location: String, defect: f64 },

    #[error("bend foliation degenerates: {0}")]
    FoliationDegenerate(String),

    #[error("balance defect has no sign change on [0, λ/2]")]
    NoSignChange,

    #[error("no pairing of boundary arcs has intersecting projections")]
    NoIntersectingPairing,

    #[error("boundary loops touch: minimum distance {0:.3e}")]
    LoopsTouch(f64),

    #[error("no generic projection direction found after {0} perturbations")]
    NonGenericProjection(usize),

    #[error("F misses Hull(G): distance {0:.3e}")]
    MissesHull(f64),

    #[error("G has no point in the far half-space (max depth {0:.3e})")]
    EmptyHalfspace(f64),

    #[error("verification failed at epsilon {epsilon}: {failed}")]
    VerificationFailed { epsilon: f64, failed: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
