//! Instance representation, canonical tour cost, normalization, verification
//! and file formats.

mod instance;
pub mod io;
mod normalize;
mod solution;

pub use instance::{distances, format_rational, Distances, Instance, VertexId};
pub use normalize::{check_normalized, is_normalized, normalize, VertexMap};
pub use solution::{subtree_cost, tour_cost, verify, Claim, Solution, Tour, VerifyReport, Violation, ViolationKind};
