use serde::{Deserialize, Serialize};

use super::svd::{svd_truncated, SvdParams};
use super::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Largest singular value.
    Operator,
    Frobenius,
    /// Largest Euclidean row norm, `‖B‖_{2,∞}`.
    TwoInfty,
    /// Largest absolute entry.
    EntryMax,
}

pub fn norm(a: &DenseMatrix, kind: NormKind) -> f64 {
    match kind {
        NormKind::Operator => operator_norm(a),
        NormKind::Frobenius => a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt(),
        NormKind::TwoInfty => a.row_norms().into_iter().fold(0.0, f64::max),
        NormKind::EntryMax => a.as_slice().iter().fold(0.0, |acc: f64, v| acc.max(v.abs())),
    }
}

pub fn operator_norm(a: &DenseMatrix) -> f64 {
    operator_norm_with(a, &SvdParams::default())
}

pub fn operator_norm_with(a: &DenseMatrix, params: &SvdParams) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    svd_truncated(a, 1, params)
        .map(|svd| svd.singular_values[0])
        .expect("rank-1 truncation of a nonempty finite matrix")
}
