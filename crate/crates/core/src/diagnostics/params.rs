use serde::Serialize;

use super::Record;
use crate::linalg::{operator_norm, svd_truncated, DenseMatrix, SvdParams};
use crate::error::{Error, Result};
use crate::panel::{Action, ObservedPanel, PanelDesign};
use crate::estimator::empirical_row_propensity;

/// Threshold constant in `τ_a = 96 K T(a)`.
pub const PAPER_THRESHOLD_MULTIPLIER: f64 = 96.0;
/// SNR constant in `σ₁(a) > 120 K r T(a)`.
pub const PAPER_SNR_MULTIPLIER: f64 = 120.0;

#[derive(Debug, Clone)]
pub struct DesignParams {
    /// `min_{a,i} p̄_i(a)`.
    pub q: f64,
    /// `max_{a,i,j} p_ij(a) / p̄_i(a)`.
    pub r_p: f64,
    /// Row means `p̄_i(a)`, indexed by action.
    pub p_bar: [Vec<f64>; 2],
    /// `P(a)_ij = p_ij(a)/p̄_i(a) − 1`, indexed by action.
    pub p_matrix: [DenseMatrix; 2],
    pub p_op_norm: [f64; 2],
    /// `T(a) = √((m + r_p n)/q · log(m+n)) + ‖P(a)‖_op`.
    pub t: [f64; 2],
}

impl DesignParams {
    pub fn record(&self) -> Record {
        vec![
            ("q".into(), self.q),
            ("r_p".into(), self.r_p),
            ("p_op_norm_0".into(), self.p_op_norm[0]),
            ("p_op_norm_1".into(), self.p_op_norm[1]),
            ("t_0".into(), self.t[0]),
            ("t_1".into(), self.t[1]),
        ]
    }
}

/// `√((m + r_p n)/q · ln(m+n)) + ‖P‖_op`.
pub fn t_param(n: usize, m: usize, q: f64, r_p: f64, p_op_norm: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    ((mf + r_p * nf) / q * (mf + nf).ln()).sqrt() + p_op_norm
}

/// `multiplier · k · r · T`, the value `σ₁(a)` must reach.
pub fn snr_floor(multiplier: f64, k: f64, r: usize, t: f64) -> f64 {
    multiplier * k * r as f64 * t
}

pub fn design_params(design: &PanelDesign) -> DesignParams {
    let (n, m) = (design.n_units(), design.n_times());
    let p_bar = Action::ALL.map(|a| design.row_means(a));
    let q = p_bar.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let mut r_p: f64 = 1.0;
    for a in Action::ALL {
        let pa = design.action_propensity(a);
        for (row, &mean) in pa.rows_iter().zip(&p_bar[a.index()]) {
            for &p in row {
                r_p = r_p.max(p / mean);
            }
        }
    }
    let p_matrix = Action::ALL.map(|a| design.nonuniformity(a));
    let p_op_norm = [operator_norm(&p_matrix[0]), operator_norm(&p_matrix[1])];
    let t = [0, 1].map(|a| t_param(n, m, q, r_p, p_op_norm[a]));
    DesignParams {
        q,
        r_p,
        p_bar,
        p_matrix,
        p_op_norm,
        t,
    }
}

/// Data-driven `T(a)` from realized row frequencies only.
///
/// Within-row variation of `p_ij` is not identifiable from one panel, so this
/// variant takes `r_p = 1` and `‖P(a)‖_op = 0`; it is a lower surrogate for
/// the true `T(a)` and is labelled "plug-in" wherever reported.
pub fn plug_in_t(obs: &ObservedPanel) -> [f64; 2] {
    let (n, m) = obs.shape();
    let q = Action::ALL
        .iter()
        .flat_map(|&a| empirical_row_propensity(obs.assignments(), a))
        .fold(f64::INFINITY, f64::min);
    [t_param(n, m, q, 1.0, 0.0); 2]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Incoherence {
    /// `√n · max_i ‖U_i·‖₂`.
    pub mu_row: f64,
    /// `√m · max_j ‖V_j·‖₂`.
    pub mu_col: f64,
    pub mu: f64,
    /// Components actually used (less than requested when the matrix has
    /// lower numerical rank).
    pub components: usize,
    pub rank_deficient: bool,
}

/// Row and column incoherence of the leading `r` singular subspaces.
pub fn incoherence(a: &DenseMatrix, r: usize) -> Result<Incoherence> {
    let (n, m) = a.shape();
    if r == 0 || r > n.min(m) {
        return Err(Error::validation(format!(
            "incoherence rank {r} outside 1..={}",
            n.min(m)
        )));
    }
    let params = SvdParams {
        tol: 1e-12,
        ..SvdParams::default()
    };
    let svd = svd_truncated(a, r, &params)?;
    let sigma1 = svd.singular_values[0];
    let components = svd
        .singular_values
        .iter()
        .take_while(|&&s| s > 1e-10 * sigma1 && s > 0.0)
        .count();
    let max_row = |mat: &DenseMatrix| {
        (0..mat.n_rows())
            .map(|i| (0..components).map(|l| mat.get(i, l).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    };
    let mu_row = (n as f64).sqrt() * max_row(&svd.left_vectors);
    let mu_col = (m as f64).sqrt() * max_row(&svd.right_vectors);
    Ok(Incoherence {
        mu_row,
        mu_col,
        mu: mu_row.max(mu_col),
        components,
        rank_deficient: components < r,
    })
}
