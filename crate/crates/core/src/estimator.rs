//! Row-scaled spectral estimator and the known-propensity IPW baseline.
//!
//! For each action `a` the estimator zero-fills the unobserved entries,
//! divides each row by its empirical observation frequency, and keeps the
//! leading singular block whose trailing gap clears the threshold `τ_a`.
//! The treatment-effect estimate is `M̂ = Â(1) − Â(0)`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::design_params;
use crate::error::{Error, Result};
use crate::linalg::{singular_gaps, svd_truncated, DenseMatrix, SvdParams, SvdResult};
use crate::panel::{Action, ObservedPanel, PanelDesign};
use crate::seed::derive_seed;

/// Scaled matrices are retained automatically only up to this many entries.
pub const KEEP_SCALED_AUTO_LIMIT: usize = 10_000_000;

/// How `τ_0`, `τ_1` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdRule {
    /// Explicit thresholds (tests and oracle experiments). `+∞` selects rank 0.
    Oracle { tau0: f64, tau1: f64 },
    /// `τ_a = multiplier · k · T(a)` from the true design, where `k` is the
    /// combined signal-plus-noise entry bound `K_A + K_E`. The experiment
    /// harness fills in a missing `k` from its signal and noise settings.
    PaperConstant {
        #[serde(default = "default_paper_multiplier")]
        multiplier: f64,
        #[serde(default)]
        k: Option<f64>,
    },
    /// Data-driven `τ_a = gap_multiplier · σ̃_{r+1}(a)`.
    PlugIn {
        #[serde(default = "default_gap_multiplier")]
        gap_multiplier: f64,
    },
}

fn default_paper_multiplier() -> f64 {
    96.0
}

fn default_gap_multiplier() -> f64 {
    3.0
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::PlugIn {
            gap_multiplier: default_gap_multiplier(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// The rank bound `r`; `rank_cap + 1` singular triplets are computed.
    pub rank_cap: usize,
    #[serde(default)]
    pub threshold_rule: ThresholdRule,
    #[serde(default)]
    pub svd: SvdParams,
    /// Keep the scaled matrices in the result. `None` keeps them when the
    /// panel has at most [`KEEP_SCALED_AUTO_LIMIT`] entries.
    #[serde(default)]
    pub keep_scaled: Option<bool>,
}

impl EstimatorConfig {
    pub fn new(rank_cap: usize, threshold_rule: ThresholdRule) -> Self {
        Self {
            rank_cap,
            threshold_rule,
            svd: SvdParams::default(),
            keep_scaled: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank_cap == 0 {
            return Err(Error::Config("rank_cap must be at least 1".into()));
        }
        let nonneg = |name: &str, v: f64| {
            if v.is_nan() || v < 0.0 {
                Err(Error::Config(format!("{name} must be nonnegative, got {v}")))
            } else {
                Ok(())
            }
        };
        match self.threshold_rule {
            ThresholdRule::Oracle { tau0, tau1 } => {
                nonneg("tau0", tau0)?;
                nonneg("tau1", tau1)
            }
            ThresholdRule::PaperConstant { multiplier, k } => {
                nonneg("multiplier", multiplier)?;
                nonneg("k", k.unwrap_or(0.0))
            }
            ThresholdRule::PlugIn { gap_multiplier } => nonneg("gap_multiplier", gap_multiplier),
        }
    }
}

/// Leading singular values of one scaled matrix and their gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTable {
    /// `σ̃_1 ≥ … ≥ σ̃_{r+1}`.
    pub singular_values: Vec<f64>,
    /// `σ̃_s − σ̃_{s+1}` for `s = 1..=r`.
    pub gaps: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub a_hat_0: DenseMatrix,
    pub a_hat_1: DenseMatrix,
    /// Exactly `a_hat_1 − a_hat_0`.
    pub m_hat: DenseMatrix,
    pub selected_rank_0: usize,
    pub selected_rank_1: usize,
    /// Row scalings used; empirical for the estimator, true row means for IPW.
    pub row_propensity_hat_0: Vec<f64>,
    pub row_propensity_hat_1: Vec<f64>,
    pub thresholds_used: (f64, f64),
    pub gap_table: [GapTable; 2],
    /// Scaled matrices `Ỹ(0)`, `Ỹ(1)` when retained.
    pub scaled: Option<[DenseMatrix; 2]>,
}

impl EstimateResult {
    pub fn a_hat(&self, action: Action) -> &DenseMatrix {
        match action {
            Action::Control => &self.a_hat_0,
            Action::Treated => &self.a_hat_1,
        }
    }

    pub fn selected_rank(&self, action: Action) -> usize {
        match action {
            Action::Control => self.selected_rank_0,
            Action::Treated => self.selected_rank_1,
        }
    }

    pub fn row_propensity_hat(&self, action: Action) -> &[f64] {
        match action {
            Action::Control => &self.row_propensity_hat_0,
            Action::Treated => &self.row_propensity_hat_1,
        }
    }
}

/// `p̂_i(a) = max{ (1/m) Σ_j D_ij(a), 1/m }`.
pub fn empirical_row_propensity(d: &DenseMatrix, action: Action) -> Vec<f64> {
    let m = d.n_cols() as f64;
    d.rows_iter()
        .map(|row| {
            let count: f64 = row.iter().map(|&v| action.indicator(v)).sum();
            (count / m).max(1.0 / m)
        })
        .collect()
}

/// `Ỹ_ij(a) = D_ij(a) Y^obs_ij / p̂_i(a)`.
pub fn row_scaled_matrix(obs: &ObservedPanel, action: Action) -> DenseMatrix {
    let p_hat = empirical_row_propensity(obs.assignments(), action);
    scale_observed(obs, action, |i, _| p_hat[i])
}

/// `D_ij(a) Y^obs_ij / p_ij(a)` with the true propensities.
pub fn ipw_scaled_matrix(obs: &ObservedPanel, design: &PanelDesign, action: Action) -> DenseMatrix {
    let p = design.action_propensity(action);
    scale_observed(obs, action, |i, j| p.get(i, j))
}

fn scale_observed(obs: &ObservedPanel, action: Action, divisor: impl Fn(usize, usize) -> f64) -> DenseMatrix {
    let (y, d) = (obs.y_obs(), obs.assignments());
    DenseMatrix::from_fn(y.n_rows(), y.n_cols(), |i, j| {
        let z = action.indicator(d.get(i, j)) * y.get(i, j);
        z / divisor(i, j)
    })
    .expect("divisors are bounded away from zero")
}

/// Largest `s ≤ rank_cap` with `σ_s − σ_{s+1} ≥ tau`, or 0 if there is none.
///
/// Values past the end of `singular_values` count as zero.
pub fn select_rank(singular_values: &[f64], rank_cap: usize, tau: f64) -> usize {
    let gaps = singular_gaps(singular_values).expect("singular values are sorted and nonnegative");
    (1..=rank_cap.min(gaps.len()))
        .rev()
        .find(|&s| gaps[s - 1] >= tau)
        .unwrap_or(0)
}

/// Runs the row-scaled spectral estimator.
///
/// `design` supplies `T(a)` for [`ThresholdRule::PaperConstant`] and is
/// ignored by the other rules.
pub fn estimate(obs: &ObservedPanel, config: &EstimatorConfig, design: Option<&PanelDesign>) -> Result<EstimateResult> {
    config.validate()?;
    check_rank_cap(obs, config.rank_cap)?;
    let taus = match config.threshold_rule {
        ThresholdRule::Oracle { tau0, tau1 } => Some([tau0, tau1]),
        ThresholdRule::PaperConstant { multiplier, k } => {
            let design = design.ok_or_else(|| {
                Error::Config("the paper-constant threshold rule needs the true design to compute T(a)".into())
            })?;
            if design.propensity().shape() != obs.shape() {
                return Err(Error::validation("design and observed panel shapes differ"));
            }
            let k = k.ok_or_else(|| Error::Config("the paper-constant threshold rule needs k = K_A + K_E".into()))?;
            let params = design_params(design);
            Some([multiplier * k * params.t[0], multiplier * k * params.t[1]])
        }
        ThresholdRule::PlugIn { .. } => None,
    };
    let p_hat = Action::ALL.map(|a| empirical_row_propensity(obs.assignments(), a));
    let scaled = Action::ALL.map(|a| {
        let p = &p_hat[a.index()];
        scale_observed(obs, a, |i, _| p[i])
    });
    finish(scaled, p_hat, taus, config)
}

/// The same pipeline with each observed entry divided by its true `p_ij(a)`.
pub fn ipw_oracle_estimate(
    obs: &ObservedPanel,
    design: &PanelDesign,
    rank_cap: usize,
    taus: (f64, f64),
    svd: &SvdParams,
) -> Result<EstimateResult> {
    let config = EstimatorConfig {
        rank_cap,
        threshold_rule: ThresholdRule::Oracle {
            tau0: taus.0,
            tau1: taus.1,
        },
        svd: svd.clone(),
        keep_scaled: None,
    };
    config.validate()?;
    check_rank_cap(obs, rank_cap)?;
    if design.propensity().shape() != obs.shape() {
        return Err(Error::validation("design and observed panel shapes differ"));
    }
    let scaled = Action::ALL.map(|a| ipw_scaled_matrix(obs, design, a));
    let p_bar = Action::ALL.map(|a| design.row_means(a));
    finish(scaled, p_bar, Some([taus.0, taus.1]), &config)
}

fn check_rank_cap(obs: &ObservedPanel, rank_cap: usize) -> Result<()> {
    let (n, m) = obs.shape();
    if rank_cap >= n.min(m) {
        return Err(Error::validation(format!(
            "rank_cap {rank_cap} must be below min(n, m) = {}",
            n.min(m)
        )));
    }
    Ok(())
}

struct ActionFit {
    a_hat: DenseMatrix,
    rank: usize,
    tau: f64,
    table: GapTable,
}

fn fit_action(scaled: &DenseMatrix, action: Action, tau: Option<f64>, config: &EstimatorConfig) -> Result<ActionFit> {
    let r = config.rank_cap;
    let mut svd_params = config.svd.clone();
    svd_params.seed = derive_seed(config.svd.seed, &[action.index() as u64]);
    let svd: SvdResult = svd_truncated(scaled, r + 1, &svd_params)?;
    let tau = match (tau, config.threshold_rule) {
        (Some(t), _) => t,
        (None, ThresholdRule::PlugIn { gap_multiplier }) => gap_multiplier * svd.singular_values[r],
        (None, _) => unreachable!("explicit thresholds are resolved before fitting"),
    };
    let gaps = singular_gaps(&svd.singular_values)?;
    let rank = select_rank(&svd.singular_values, r, tau);
    let a_hat = svd.reconstruct(rank)?;
    Ok(ActionFit {
        a_hat,
        rank,
        tau,
        table: GapTable {
            singular_values: svd.singular_values,
            gaps: gaps[..r].to_vec(),
        },
    })
}

fn finish(
    scaled: [DenseMatrix; 2],
    row_propensity: [Vec<f64>; 2],
    taus: Option<[f64; 2]>,
    config: &EstimatorConfig,
) -> Result<EstimateResult> {
    let tau = |a: Action| taus.map(|t| t[a.index()]);
    let (fit0, fit1) = rayon::join(
        || fit_action(&scaled[0], Action::Control, tau(Action::Control), config),
        || fit_action(&scaled[1], Action::Treated, tau(Action::Treated), config),
    );
    let (fit0, fit1) = (fit0?, fit1?);
    let m_hat = fit1.a_hat.sub(&fit0.a_hat)?;
    let keep = config
        .keep_scaled
        .unwrap_or(scaled[0].len() <= KEEP_SCALED_AUTO_LIMIT);
    let [p0, p1] = row_propensity;
    Ok(EstimateResult {
        m_hat,
        selected_rank_0: fit0.rank,
        selected_rank_1: fit1.rank,
        row_propensity_hat_0: p0,
        row_propensity_hat_1: p1,
        thresholds_used: (fit0.tau, fit1.tau),
        gap_table: [fit0.table, fit1.table],
        a_hat_0: fit0.a_hat,
        a_hat_1: fit1.a_hat,
        scaled: keep.then_some(scaled),
    })
}
