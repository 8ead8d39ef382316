//! Hermitian spectral toolkit: encoding-state construction, the star and
//! Heisenberg-star operators, and numeric verification of the
//! guessing-probability bound chain.

mod bounds;
mod eigen;
mod encoding;
mod sigma;

pub use bounds::{
    bound_chain_report, default_alpha, i_alpha, pair_count, reports_to_csv, BoundReport, ChainStep, IAlphaEvaluation,
    CHAIN_SLACK, I_ALPHA_MAX_N, STAR_NUMERIC_MAX_N,
};
pub use eigen::{
    hermitian_eigen, hermitian_eigenvalues, lambda_max, lambda_min, trace_norm, HermitianEigen, HERMITIAN_TOL,
};
pub use encoding::{IndexEncodingSet, Message, MessageEncodingVector};
pub use sigma::{
    build_sigma, build_sigma_star, build_sigma_star_labeled, build_star_component, guess_bound, heisenberg_star,
    lambda_max_bound, SigmaState,
};
