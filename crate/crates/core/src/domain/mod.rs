//! Domain types shared by every estimator.

mod bandwidth;
mod delta;
mod grid;
mod result;
pub mod rng;
mod sample;

pub use bandwidth::Bandwidth;
pub use delta::DeltaVector;
pub use grid::{build_grid_auto, RectilinearGrid};
pub use result::{max_abs_diff, Alignment, EvalResult, Metadata};
pub use sample::{generate_gaussian_sample, validate_sample, Sample};
