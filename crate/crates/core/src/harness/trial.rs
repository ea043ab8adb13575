use std::time::Instant;

use super::config::ExperimentConfig;
use crate::diagnostics::{
    bound_lemma_er, bound_theorem_main, design_params, e_decomposition, error_report, incoherence, matrix_errors,
    propensity_discrepancy, NamedSubset,
};
use crate::error::{Error, Result};
use crate::estimator::{estimate, ipw_oracle_estimate};
use crate::linalg::operator_norm;
use crate::panel::{build_design, generate_noise, generate_signal, realize, realized_nu, Action};
use crate::seed::{derive_seed, stream_seed, Stream};

/// Wall-clock seconds per phase. Never written to the main CSV, so replays
/// stay byte-identical.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub generate: f64,
    pub estimate: f64,
    pub diagnose: f64,
}

/// One `(n, trial)` cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    /// `(ŝ(0), ŝ(1))`; `None` for failed cells.
    pub selected_ranks: Option<(usize, usize)>,
    /// Named scalars in [`metric_columns`] order; empty for failed cells.
    pub metrics: Vec<(String, f64)>,
    pub error: Option<String>,
    pub timings: PhaseTimings,
}

impl TrialRecord {
    pub fn failed(n: usize, m: usize, trial: usize, seed: u64, error: String) -> Self {
        Self {
            n,
            m,
            trial,
            seed,
            selected_ranks: None,
            metrics: Vec::new(),
            error: Some(error),
            timings: PhaseTimings::default(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

/// Seed of cell `(n, trial)`; every random stream of the trial derives from it.
pub fn cell_seed(base_seed: u64, n: usize, trial: usize) -> u64 {
    derive_seed(base_seed, &[n as u64, trial as u64])
}

/// Metric columns produced for `config`, in output order.
pub fn metric_columns(config: &ExperimentConfig) -> Vec<String> {
    let mut cols: Vec<String> = [
        "tau_0", "tau_1", "q", "r_p", "p_op_norm_0", "p_op_norm_1", "t_0", "t_1", "nu_realized",
        "sigma1_0", "sigma1_1", "sigma_r_0", "sigma_r_1", "snr_ratio_0", "snr_ratio_1",
    ]
    .map(String::from)
    .to_vec();
    for a in 0..2 {
        for s in 1..=config.estimator.rank_cap + 1 {
            cols.push(format!("sv_hat_{a}_{s}"));
        }
    }
    cols.push("p_hat_discrepancy_0".into());
    cols.push("p_hat_discrepancy_1".into());
    for prefix in ["m", "a0", "a1"] {
        for s in ["two_infty_raw", "two_infty_normalized", "frobenius_normalized", "operator", "entry_max"] {
            cols.push(format!("{prefix}_{s}"));
        }
    }
    for subset in &config.diagnostics.subsets {
        let name = subset.name();
        cols.push(format!("avg_{name}_max"));
        cols.push(format!("avg_{name}_bound"));
    }
    cols.push("subset_slack".into());
    if config.diagnostics.bounds {
        for s in ["mu_0", "mu_1", "bound_main_0", "bound_main_1", "bound_lemma_er"] {
            cols.push(s.into());
        }
    }
    if config.diagnostics.e_decomposition {
        for s in ["e0_op_0", "e0_op_1", "e_r_op_0", "e_r_op_1"] {
            cols.push(s.into());
        }
    }
    if config.diagnostics.ipw_baseline {
        for s in ["ipw_selected_rank_0", "ipw_selected_rank_1", "ipw_m_two_infty_normalized"] {
            cols.push(s.into());
        }
    }
    cols
}

/// One generate → observe → estimate → diagnose cycle, deterministic in
/// `(config, n, trial)`.
pub fn run_trial(config: &ExperimentConfig, n: usize, trial: usize) -> Result<TrialRecord> {
    let m = config.m_for(n);
    let seed = cell_seed(config.base_seed, n, trial);
    let context = |e: Error| -> Error {
        let msg = format!("n={n}, m={m}, trial={trial}: {e}");
        match e {
            Error::Infeasible(_) => Error::Infeasible(msg),
            Error::Config(_) => Error::Config(msg),
            Error::Validation(_) => Error::Validation(msg),
            other => other,
        }
    };
    run_trial_inner(config, n, m, trial, seed).map_err(context)
}

fn run_trial_inner(config: &ExperimentConfig, n: usize, m: usize, trial: usize, seed: u64) -> Result<TrialRecord> {
    let r = config.signal.rank;
    let k = config.k_total();

    let clock = Instant::now();
    let design = build_design(n, m, &config.design, seed)?;
    let params = design_params(&design);
    let snr_floor = config
        .signal
        .snr_multiplier
        .map(|c| c * k * r as f64 * params.t[0].max(params.t[1]));
    let signal = generate_signal(n, m, &config.signal_spec(), snr_floor, seed)?;
    let noise = generate_noise(n, m, config.noise.k_e, config.noise.law, seed)?;
    let (instance, observed) = realize(&design, &signal, &noise, seed)?;
    let generate_time = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut est_config = config.resolved_estimator();
    est_config.svd.seed = stream_seed(seed, Stream::Svd);
    est_config.keep_scaled = Some(false);
    let est = estimate(&observed, &est_config, Some(&design))?;
    let estimate_time = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut metrics: Vec<(String, f64)> = Vec::new();
    let mut put = |name: &str, v: f64| metrics.push((name.to_string(), v));
    put("tau_0", est.thresholds_used.0);
    put("tau_1", est.thresholds_used.1);
    for (name, v) in params.record() {
        put(&name, v);
    }
    put("nu_realized", realized_nu(&design));
    for a in Action::ALL {
        put(&format!("sigma1_{}", a.index()), signal.singular_values(a)[0]);
    }
    for a in Action::ALL {
        put(&format!("sigma_r_{}", a.index()), signal.singular_values(a)[r - 1]);
    }
    for a in Action::ALL {
        let i = a.index();
        put(&format!("snr_ratio_{i}"), signal.singular_values(a)[0] / (k * r as f64 * params.t[i]));
    }
    for a in Action::ALL {
        for (s, v) in est.gap_table[a.index()].singular_values.iter().enumerate() {
            put(&format!("sv_hat_{}_{}", a.index(), s + 1), *v);
        }
    }
    let disc = propensity_discrepancy(&observed, &instance);
    put("p_hat_discrepancy_0", disc[0]);
    put("p_hat_discrepancy_1", disc[1]);

    let subsets: Vec<NamedSubset> = config.diagnostics.subsets.iter().map(|s| s.resolve(m)).collect();
    let effect = instance.effect();
    let report = error_report(
        &est.m_hat,
        &effect,
        [&est.a_hat_0, &est.a_hat_1],
        [&signal.a0, &signal.a1],
        &subsets,
    )?;
    for (name, v) in report.record() {
        put(&name, v);
    }
    put("subset_slack", report.worst_subset_slack());

    if config.diagnostics.bounds {
        let mu = [incoherence(&signal.a0, r)?.mu, incoherence(&signal.a1, r)?.mu];
        put("mu_0", mu[0]);
        put("mu_1", mu[1]);
        for a in 0..2 {
            let b = bound_theorem_main(k, r, mu[a], params.r_p, params.q, params.p_op_norm[a], n, m);
            put(&format!("bound_main_{a}"), b);
        }
        put("bound_lemma_er", bound_lemma_er(k, params.r_p, params.q, n, m));
    }
    if config.diagnostics.e_decomposition {
        let parts = Action::ALL.map(|a| e_decomposition(&observed, &instance, a));
        let [p0, p1] = parts;
        let (p0, p1) = (p0?, p1?);
        put("e0_op_0", operator_norm(&p0.e0));
        put("e0_op_1", operator_norm(&p1.e0));
        put("e_r_op_0", operator_norm(&p0.e_r));
        put("e_r_op_1", operator_norm(&p1.e_r));
    }
    if config.diagnostics.ipw_baseline {
        let ipw = ipw_oracle_estimate(
            &observed,
            &design,
            est_config.rank_cap,
            est.thresholds_used,
            &est_config.svd,
        )?;
        put("ipw_selected_rank_0", ipw.selected_rank_0 as f64);
        put("ipw_selected_rank_1", ipw.selected_rank_1 as f64);
        put(
            "ipw_m_two_infty_normalized",
            matrix_errors(&ipw.m_hat, &effect)?.two_infty_normalized,
        );
    }
    let diagnose_time = clock.elapsed().as_secs_f64();

    Ok(TrialRecord {
        n,
        m,
        trial,
        seed,
        selected_ranks: Some((est.selected_rank_0, est.selected_rank_1)),
        metrics,
        error: None,
        timings: PhaseTimings {
            generate: generate_time,
            estimate: estimate_time,
            diagnose: diagnose_time,
        },
    })
}
