//! Embeddedness and linking of the folded cylinder.

mod bvh;
mod hull;
mod linking;

pub use bvh::{nearest_on_mesh, self_intersection, Bvh, SelfIntersectionReport};
pub use hull::{gjk_distance, hull_bound_certificate, quickhull, ConvexHull, GjkResult, HullBoundCertificate};
pub use linking::{
    generic_direction, linking, linking_number_crossings, linking_number_gauss, min_loop_distance, LinkingResult,
};
