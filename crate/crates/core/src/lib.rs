//! Exact fast summation for multivariate empirical distribution functions
//! and kernel density estimators.
//!
//! Grid evaluation goes through generalized histograms followed by
//! directional cumulative sweeps ([`fastsum`]). Evaluation at the sample
//! points goes through a divide-and-conquer dominance recursion ([`dnc`]).
//! [`naive`] holds the quadratic reference implementations.

mod domain;
mod error;
pub mod histogram;

pub use domain::rng;
pub use domain::{
    build_grid_auto, generate_gaussian_sample, max_abs_diff, validate_sample, Alignment,
    Bandwidth, DeltaVector, EvalResult, Metadata, RectilinearGrid, Sample,
};
pub use error::{Error, Result};
pub use histogram::{local_sums, local_sums_sorted, local_sums_uniform, IndexMatrix, LocalSumTensor};
pub mod kernels;
pub use kernels::{
    bandwidth_rotation, eval_kernel, gaussian_matching_bandwidth, matern_coefficients,
    polyexp_normalizer, KernelFamily, KernelSpec,
};
pub mod naive;
pub use naive::{ecdf_naive, esf_naive, kde_naive};
pub mod fastsum;
pub use fastsum::{
    directional_sweep, ecdf_fastsum, ecdf_fastsum_unscaled, esf_fastsum, kde_fastsum,
    CumulativeTensor,
};
pub mod dnc;
pub use dnc::{
    dominance_sums, ecdf_dnc, kde_dnc, kde_terms_dnc, DeltaTermTable, DncOptions, Monomial,
    SortPermutations, TiePolicy,
};
pub mod interp;
pub use interp::multilinear_interp;
pub mod csvio;
