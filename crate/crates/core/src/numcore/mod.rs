//! Dense linear algebra and distribution primitives shared by the predictors
//! and the risk engine.
//!
//! Covariances are parametrized by an *upper* triangular Cholesky factor,
//! `Σ = U Uᵀ` with `U[i][i] > 0`. This is the reverse of the usual
//! lower-triangular convention (`Σ = L Lᵀ`); the two are related by
//! conjugating with the reversal permutation.

mod density;
mod linalg;
mod random;
mod stats;
mod types;

pub use density::{mvn_logpdf, mvt_logpdf, LN_2PI};
pub use linalg::{
    cholesky_upper, cholesky_upper_with_jitter, gram_logdet, invert_upper, logdet_upper,
    solve_upper,
};
pub use random::{sample_mvn, RandomStream};
pub use stats::{sample_stats, SampleStats};
pub use types::{MvnParams, ObservationSet, StudentTParams};
