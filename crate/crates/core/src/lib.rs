//! Twisted paper cylinders of aspect ratio `2 + ε`.
//!
//! A flat cylinder `[0, λ] × [0, 1]` with its vertical sides identified is
//! folded along a thickened right-isosceles crease pattern, with every crease
//! replaced by a smooth U-shaped pseudofold. The resulting embedding is
//! isometric, embedded, and has Hopf-linked boundary loops. The crate also
//! provides numerical certificates for the geometric inequalities that force
//! such cylinders to degenerate to a doubly covered triangle as `λ → 2`.

pub mod embedding;
pub mod error;
pub mod flat_domain;
pub mod fuzz;
pub mod geom;
pub mod limits;
pub mod numeric;
pub mod pseudofold;
pub mod rulings;
pub mod topology;

pub use error::{Error, Result};

/// Version tag written into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;
