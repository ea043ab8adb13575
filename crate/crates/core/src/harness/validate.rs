use std::fmt;

use super::config::ExperimentConfig;
use super::trial::cell_seed;
use crate::diagnostics::{design_params, incoherence, snr_floor};
use crate::error::Result;
use crate::estimator::ThresholdRule;
use crate::panel::{build_design, generate_signal, realized_nu, Action};

/// Design and signal conditions at one `n`, from the first trial's draw.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityRow {
    pub n: usize,
    pub m: usize,
    pub q: f64,
    pub r_p: f64,
    pub p_op_norm: [f64; 2],
    pub nu: f64,
    pub t: [f64; 2],
    /// Thresholds the configured rule would use; `None` for the data-driven rule.
    pub tau: Option<[f64; 2]>,
    pub snr_floor: [f64; 2],
    pub sigma1: [f64; 2],
    pub mu: [f64; 2],
}

impl FeasibilityRow {
    pub fn snr_met(&self) -> bool {
        (0..2).all(|a| self.sigma1[a] > self.snr_floor[a])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub name: String,
    pub k: f64,
    pub rank: usize,
    pub snr_multiplier: f64,
    pub rows: Vec<FeasibilityRow>,
}

impl FeasibilityReport {
    pub fn all_snr_met(&self) -> bool {
        self.rows.iter().all(FeasibilityRow::snr_met)
    }
}

/// Builds the design and (ungated) signal of trial 0 at every `n` and reports
/// the signal-strength condition against it. Fails only when a design itself
/// cannot be constructed.
pub fn feasibility_report(config: &ExperimentConfig) -> Result<FeasibilityReport> {
    config.validate()?;
    let k = config.k_total();
    let r = config.signal.rank;
    let mult = config.reporting_snr_multiplier();
    let est = config.resolved_estimator();
    let mut rows = Vec::new();
    for &n in &config.dimensions.n {
        let m = config.m_for(n);
        let seed = cell_seed(config.base_seed, n, 0);
        let design = build_design(n, m, &config.design, seed)?;
        let params = design_params(&design);
        let signal = generate_signal(n, m, &config.signal_spec(), None, seed)?;
        let tau = match est.threshold_rule {
            ThresholdRule::Oracle { tau0, tau1 } => Some([tau0, tau1]),
            ThresholdRule::PaperConstant { multiplier, k: Some(kk) } => {
                Some(params.t.map(|t| multiplier * kk * t))
            }
            _ => None,
        };
        let mu = [
            incoherence(&signal.a0, r)?.mu,
            incoherence(&signal.a1, r)?.mu,
        ];
        rows.push(FeasibilityRow {
            n,
            m,
            q: params.q,
            r_p: params.r_p,
            p_op_norm: params.p_op_norm,
            nu: realized_nu(&design),
            t: params.t,
            tau,
            snr_floor: params.t.map(|t| snr_floor(mult, k, r, t)),
            sigma1: Action::ALL.map(|a| signal.singular_values(a)[0]),
            mu,
        });
    }
    Ok(FeasibilityReport {
        name: config.name.clone(),
        k,
        rank: r,
        snr_multiplier: mult,
        rows,
    })
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "experiment {}: K = K_A + K_E = {}, r = {}, SNR multiplier = {}",
            self.name, self.k, self.rank, self.snr_multiplier
        )?;
        for row in &self.rows {
            writeln!(f, "n = {}, m = {}", row.n, row.m)?;
            writeln!(f, "  q            = {:.6}", row.q)?;
            writeln!(f, "  r_p          = {:.6}", row.r_p)?;
            writeln!(f, "  ||P(0)||_op  = {:.6}   ||P(1)||_op = {:.6}", row.p_op_norm[0], row.p_op_norm[1])?;
            writeln!(f, "  nu (realized) = {:.4}", row.nu)?;
            writeln!(f, "  T(0)         = {:.4}   T(1) = {:.4}", row.t[0], row.t[1])?;
            match row.tau {
                Some([t0, t1]) => writeln!(f, "  tau          = {t0:.4} / {t1:.4}")?,
                None => writeln!(f, "  tau          = data-driven (plug-in rule)")?,
            }
            writeln!(f, "  mu           = {:.4} / {:.4}", row.mu[0], row.mu[1])?;
            for a in 0..2 {
                let status = if row.sigma1[a] > row.snr_floor[a] { "met" } else { "NOT met" };
                writeln!(
                    f,
                    "  SNR floor a={a}: sigma_1 = {:.4} vs floor {:.4} -> {status}",
                    row.sigma1[a], row.snr_floor[a]
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::harness::config::preset;

    #[test]
    fn row_homogeneous_report() {
        let mut c = preset("row-homogeneous").unwrap();
        c.dimensions.n = vec![30, 60];
        let rep = feasibility_report(&c).unwrap();
        assert_eq!(rep.rows.len(), 2);
        for row in &rep.rows {
            assert!((row.r_p - 1.0).abs() < 1e-12);
            assert!(row.p_op_norm.iter().all(|&p| p < 1e-12));
            assert!(row.q >= 0.3 - 1e-12);
            assert!(!row.snr_met());
        }
        let text = rep.to_string();
        assert!(text.contains("r_p") && text.contains("NOT met"));
    }

    #[test]
    fn impossible_nonuniformity_fails() {
        let mut c = preset("spectral-nonuniform-2").unwrap();
        c.dimensions.n = vec![40];
        assert!(matches!(feasibility_report(&c), Err(Error::Infeasible(_))));
    }
}
