use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

fn log_nm(n: usize, m: usize) -> f64 {
    ((n + m) as f64).ln()
}

/// Row-wise error bound for the estimator:
/// `K r^{3/2} μ √(m+n) log⁴(m+n) [√(r_p/(mq) + r_p/(nq)) + ‖P‖_op/√(mn)]`.
#[allow(clippy::too_many_arguments)]
pub fn bound_theorem_main(k: f64, r: usize, mu: f64, r_p: f64, q: f64, p_op_norm: f64, n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let bracket = (r_p / (mf * q) + r_p / (nf * q)).sqrt() + p_op_norm / (mf * nf).sqrt();
    k * (r as f64).powf(1.5) * mu * (mf + nf).sqrt() * log_nm(n, m).powi(4) * bracket
}

/// Operator-norm bound on the random part of the scaled noise:
/// `12 K √log(m+n) · √(r_p (m+n) / q)`.
pub fn bound_lemma_er(k: f64, r_p: f64, q: f64, n: usize, m: usize) -> f64 {
    12.0 * k * log_nm(n, m).sqrt() * (r_p * (n + m) as f64 / q).sqrt()
}

/// Inputs of the row-wise low-rank perturbation bound for `Ã = A + E_R + E₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbInputs {
    pub r: usize,
    /// Moment constant `K` of `E_R`.
    pub k: f64,
    /// Entrywise standard-deviation bound `σ` of `E_R`.
    pub sigma: f64,
    pub e0_op: f64,
    /// `σ_s(A)`.
    pub sigma_s: f64,
    /// `δ_s = σ_s(A) − σ_{s+1}(A)`.
    pub delta_s: f64,
    pub mu: f64,
    pub n: usize,
    pub m: usize,
    /// `‖E_R‖_op`, when known, to check the gap condition.
    pub e_r_op: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbBound {
    pub value: f64,
    /// Whether `δ_s ≥ 6(‖E_R‖_op + ‖E₀‖_op)`; `None` without `‖E_R‖_op`.
    pub gap_condition: Option<bool>,
}

fn perturb_prefactor(p: &PerturbInputs) -> Result<f64> {
    if !(p.delta_s > 0.0) {
        return Err(Error::validation(format!("gap δ_s must be positive, got {}", p.delta_s)));
    }
    let l = log_nm(p.n, p.m);
    let nm = (p.n + p.m) as f64;
    Ok((p.r as f64).sqrt() * (l * l + p.k * l.powi(4) / nm.sqrt()) * p.sigma_s * nm.sqrt() / p.delta_s)
}

fn gap_condition(p: &PerturbInputs) -> Option<bool> {
    p.e_r_op.map(|er| p.delta_s >= 6.0 * (er + p.e0_op))
}

/// `√r [log²(m+n) + K log⁴(m+n)/√(m+n)] (μ/√m + μ/√n) σ_s √(m+n) (σ + ‖E₀‖_op) / δ_s`.
pub fn bound_theorem_perturb(p: &PerturbInputs) -> Result<PerturbBound> {
    let pre = perturb_prefactor(p)?;
    let spread = p.mu / (p.m as f64).sqrt() + p.mu / (p.n as f64).sqrt();
    Ok(PerturbBound {
        value: pre * spread * (p.sigma + p.e0_op),
        gap_condition: gap_condition(p),
    })
}

/// Variant with bracket `μ(1/√m + 1/√n)(X₀ + σ) + ‖E₀‖_op/√(m+n)`, where
/// `X₀ = max_{i,j ≤ r} |u_iᵀ E₀ v_j|` (see [`x0_statistic`]).
pub fn bound_theorem_perturb_refined(p: &PerturbInputs, x0: f64) -> Result<PerturbBound> {
    let pre = perturb_prefactor(p)?;
    let spread = p.mu * (1.0 / (p.m as f64).sqrt() + 1.0 / (p.n as f64).sqrt());
    let bracket = spread * (x0 + p.sigma) + p.e0_op / ((p.n + p.m) as f64).sqrt();
    Ok(PerturbBound {
        value: pre * bracket,
        gap_condition: gap_condition(p),
    })
}

/// `max_{i,j < r} |u_iᵀ E₀ v_j|` for the first `r` columns of `u` and `v`.
pub fn x0_statistic(e0: &DenseMatrix, u: &DenseMatrix, v: &DenseMatrix, r: usize) -> Result<f64> {
    if u.n_rows() != e0.n_rows() || v.n_rows() != e0.n_cols() || r > u.n_cols() || r > v.n_cols() {
        return Err(Error::validation("singular vectors do not match E₀"));
    }
    let ev = e0.matmul(v)?;
    let mut best: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            let dot: f64 = (0..u.n_rows()).map(|k| u.get(k, i) * ev.get(k, j)).sum();
            best = best.max(dot.abs());
        }
    }
    Ok(best)
}
