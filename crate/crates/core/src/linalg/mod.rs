//! Dense linear algebra: matrices, singular value decompositions, norms,
//! singular gaps, and the symmetric dilation.

mod dilation;
mod gaps;
mod matrix;
pub mod norm;
pub mod svd;

pub use dilation::symmetric_dilation;
pub use gaps::singular_gaps;
pub use matrix::DenseMatrix;
pub use norm::{norm, operator_norm, NormKind};
pub use svd::{
    best_rank_s, svd_dense, svd_truncated, svd_truncated_with_rng, SvdParams, SvdResult,
    TruncatedMethod, TruncationStats,
};
