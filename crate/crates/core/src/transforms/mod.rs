//! Instance transformations: distance bands and the height-reduced tree.

mod bands;
mod hat;

pub use bands::{
    band_index, band_tag, has_bounded_distances, solve_banded, split_by_distance, BandSet, BandTag, BandedSolution,
    DistanceBands, OffsetMode,
};
pub use hat::{build_hat_tree, lift_solution, HatComponent, HatTree};
