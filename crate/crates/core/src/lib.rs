//! Capacitated vehicle routing on trees: exact models, lower bounds, the
//! component decomposition, distance-band and hat-tree transforms, the
//! configuration DP approximation scheme, baselines and the splittable
//! reduction.

pub mod baselines;
pub mod bench;
pub mod bounds;
pub mod budget;
pub mod decomposition;
pub mod error;
pub mod generate;
pub mod model;
pub mod ptas_dp;
pub mod solver;
pub mod splittable;
pub mod transforms;

pub use error::{Error, Result};
