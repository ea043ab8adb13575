use crate::error::{Error, Result};
use crate::estimator::empirical_row_propensity;
use crate::linalg::DenseMatrix;
use crate::panel::{Action, ObservedPanel, PanelInstance};

/// Split of the true-row-mean scaled observation `D(a)∘Y^obs / p̄(a)` into
/// `A(a) + E₀ + E_R`.
#[derive(Debug, Clone)]
pub struct EDecomposition {
    /// Deterministic part `(p_ij(a)/p̄_i(a) − 1) A_ij(a)`.
    pub e0: DenseMatrix,
    /// Mean-zero remainder.
    pub e_r: DenseMatrix,
}

pub fn e_decomposition(obs: &ObservedPanel, instance: &PanelInstance, action: Action) -> Result<EDecomposition> {
    if obs.shape() != instance.shape() {
        return Err(Error::validation("observed panel and instance shapes differ"));
    }
    let design = &instance.design;
    let p = design.action_propensity(action);
    let p_bar = design.row_means(action);
    let a = instance.signal.get(action);
    let (n, m) = a.shape();
    let e0 = DenseMatrix::from_fn(n, m, |i, j| (p.get(i, j) / p_bar[i] - 1.0) * a.get(i, j))?;
    let (y, d) = (obs.y_obs(), obs.assignments());
    let e_r = DenseMatrix::from_fn(n, m, |i, j| {
        let scaled = action.indicator(d.get(i, j)) * y.get(i, j) / p_bar[i];
        scaled - a.get(i, j) - e0.get(i, j)
    })?;
    Ok(EDecomposition { e0, e_r })
}

/// `max_i |p̂_i(a) − p̄_i(a)|` for both actions.
pub fn propensity_discrepancy(obs: &ObservedPanel, instance: &PanelInstance) -> [f64; 2] {
    Action::ALL.map(|a| {
        empirical_row_propensity(obs.assignments(), a)
            .iter()
            .zip(instance.design.row_means(a))
            .map(|(hat, bar)| (hat - bar).abs())
            .fold(0.0, f64::max)
    })
}
