use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{SubsetPreset, PAPER_SNR_MULTIPLIER};
use crate::error::{Error, Result};
use crate::estimator::{EstimatorConfig, ThresholdRule};
use crate::panel::{DesignSpec, NoiseLaw, PerturbationLaw, SignalSpec, SpectrumShape};

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 6] = [
    "constant-bernoulli",
    "row-homogeneous",
    "spectral-nonuniform-0.5",
    "spectral-nonuniform-1",
    "spectral-nonuniform-2",
    "harsh-overlap",
];

/// One experiment: a grid of `(n, trial)` cells sharing every other setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub base_seed: u64,
    pub replications: usize,
    pub dimensions: Dimensions,
    pub design: DesignSpec,
    pub signal: SignalSettings,
    pub noise: NoiseSettings,
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimensions {
    /// Unit counts, strictly increasing.
    pub n: Vec<usize>,
    /// `m = round(aspect_ratio · n)`; must be at least 1.
    #[serde(default = "one")]
    pub aspect_ratio: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSettings {
    pub rank: usize,
    pub k_a: f64,
    #[serde(default)]
    pub spectrum: SpectrumShape,
    /// When set, generation fails unless `σ₁(a) ≥ snr_multiplier · K · r · T(a)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_multiplier: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSettings {
    pub k_e: f64,
    #[serde(default)]
    pub law: NoiseLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSettings {
    /// Time-index subsets for subset-average errors.
    pub subsets: Vec<SubsetPreset>,
    /// Incoherence and bound evaluators.
    pub bounds: bool,
    /// Operator norms of the `E₀` / `E_R` split.
    pub e_decomposition: bool,
    /// Also run the known-propensity IPW pipeline.
    pub ipw_baseline: bool,
}

impl Default for DiagnosticsSettings {
    fn default() -> Self {
        Self {
            subsets: SubsetPreset::defaults(1),
            bounds: true,
            e_decomposition: true,
            ipw_baseline: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    /// CSV destination; relative paths resolve against the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Write per-phase wall-clock times to `<path>.timings.csv`.
    pub timings: bool,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    /// `m` for a given `n`.
    pub fn m_for(&self, n: usize) -> usize {
        (self.dimensions.aspect_ratio * n as f64).round() as usize
    }

    /// `K = K_A + K_E`.
    pub fn k_total(&self) -> f64 {
        self.signal.k_a + self.noise.k_e
    }

    pub fn signal_spec(&self) -> SignalSpec {
        SignalSpec {
            rank: self.signal.rank,
            k_a: self.signal.k_a,
            spectrum: self.signal.spectrum,
        }
    }

    /// Estimator settings with a missing paper-constant `k` filled in.
    pub fn resolved_estimator(&self) -> EstimatorConfig {
        let mut est = self.estimator.clone();
        if let ThresholdRule::PaperConstant { multiplier, k: None } = est.threshold_rule {
            est.threshold_rule = ThresholdRule::PaperConstant {
                multiplier,
                k: Some(self.k_total()),
            };
        }
        est
    }

    /// The multiplier used when reporting the SNR condition.
    pub fn reporting_snr_multiplier(&self) -> f64 {
        self.signal.snr_multiplier.unwrap_or(PAPER_SNR_MULTIPLIER)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        let ns = &self.dimensions.n;
        if ns.is_empty() {
            return bad("dimensions.n must list at least one size".into());
        }
        if ns.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("dimensions.n must be strictly increasing, got {ns:?}"));
        }
        let ratio = self.dimensions.aspect_ratio;
        if !(ratio.is_finite() && ratio >= 1.0) {
            return bad(format!(
                "aspect_ratio m/n = {ratio} is below 1; experiments assume the standing regime m ≥ n \
                 (at least as many time periods as units)"
            ));
        }
        if ns[0] < 2 {
            return bad("every n must be at least 2".into());
        }
        if self.signal.rank == 0 || self.signal.rank > ns[0] {
            return bad(format!(
                "signal.rank = {} must lie in 1..={} (the smallest n)",
                self.signal.rank, ns[0]
            ));
        }
        if !(self.signal.k_a > 0.0 && self.signal.k_a.is_finite()) {
            return bad(format!("signal.k_a must be positive, got {}", self.signal.k_a));
        }
        if let Some(c) = self.signal.snr_multiplier {
            if !(c >= 0.0 && c.is_finite()) {
                return bad(format!("signal.snr_multiplier must be nonnegative, got {c}"));
            }
        }
        if !(self.noise.k_e >= 0.0 && self.noise.k_e.is_finite()) {
            return bad(format!("noise.k_e must be nonnegative, got {}", self.noise.k_e));
        }
        self.estimator.validate()?;
        if self.estimator.rank_cap >= ns[0] {
            return bad(format!(
                "estimator.rank_cap = {} must be below the smallest n = {}",
                self.estimator.rank_cap, ns[0]
            ));
        }
        if self.diagnostics.subsets.is_empty() {
            return bad("diagnostics.subsets must name at least one subset".into());
        }
        let mut names: Vec<String> = self.diagnostics.subsets.iter().map(|s| s.name()).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("diagnostics.subsets lists the same kind twice".into());
        }
        Ok(())
    }
}

fn base(name: &str, design: DesignSpec) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        base_seed: 20_240_917,
        replications: 20,
        dimensions: Dimensions {
            n: vec![100, 200, 400, 800],
            aspect_ratio: 2.0,
        },
        design,
        signal: SignalSettings {
            rank: 2,
            k_a: 1.0,
            spectrum: SpectrumShape::FlatWithGap,
            snr_multiplier: None,
        },
        noise: NoiseSettings {
            k_e: 1.0,
            law: NoiseLaw::UniformSymmetric,
        },
        estimator: EstimatorConfig::new(
            2,
            ThresholdRule::PaperConstant {
                multiplier: 96.0,
                k: None,
            },
        ),
        diagnostics: DiagnosticsSettings::default(),
        output: OutputSettings::default(),
    }
}

fn spectral_nonuniform(nu: f64) -> DesignSpec {
    DesignSpec::Nonuniform {
        low: 0.45,
        high: 0.55,
        nu,
        law: PerturbationLaw::Rademacher,
        floor: 0.01,
        min_row_mean: 0.0,
    }
}

/// A built-in experiment by name (see [`PRESET_NAMES`]).
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let config = match name {
        "constant-bernoulli" => base(name, DesignSpec::Constant { c: 0.5 }),
        "row-homogeneous" => base(
            name,
            DesignSpec::RowHomogeneous {
                low: 0.3,
                high: 0.7,
                floor: 0.05,
            },
        ),
        "spectral-nonuniform-0.5" => base(name, spectral_nonuniform(0.5)),
        "spectral-nonuniform-1" => base(name, spectral_nonuniform(1.0)),
        "spectral-nonuniform-2" => base(name, spectral_nonuniform(2.0)),
        "harsh-overlap" => base(
            name,
            DesignSpec::Nonuniform {
                low: 0.3,
                high: 0.7,
                nu: 0.5,
                law: PerturbationLaw::Uniform,
                floor: 1e-3,
                min_row_mean: 0.25,
            },
        ),
        _ => return None,
    };
    Some(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_round_trip() {
        for name in PRESET_NAMES {
            let config = preset(name).unwrap();
            config.validate().unwrap();
            let text = config.to_toml_string();
            assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), config, "{name}");
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = preset("row-homogeneous").unwrap().to_toml_string();
        text = text.replace("replications = 20", "replications = 20\nreplicatoins = 3");
        assert!(matches!(ExperimentConfig::from_toml_str(&text), Err(Error::Config(_))));

        let text = preset("row-homogeneous")
            .unwrap()
            .to_toml_string()
            .replace("k_a = 1.0", "k_a = 1.0\nkA = 2.0");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn wide_panels_only() {
        let mut config = preset("row-homogeneous").unwrap();
        config.dimensions.aspect_ratio = 0.5;
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("m ≥ n"), "{err}");
    }

    #[test]
    fn structural_checks() {
        let mut config = preset("row-homogeneous").unwrap();
        config.dimensions.n = vec![200, 100];
        assert!(config.validate().is_err());
        let mut config = preset("row-homogeneous").unwrap();
        config.replications = 0;
        assert!(config.validate().is_err());
        let mut config = preset("row-homogeneous").unwrap();
        config.estimator.rank_cap = 100;
        assert!(config.validate().is_err());
    }

    #[test]
    fn paper_k_defaults_to_combined_bound() {
        let config = preset("row-homogeneous").unwrap();
        match config.resolved_estimator().threshold_rule {
            ThresholdRule::PaperConstant { multiplier, k } => {
                assert_eq!(multiplier, 96.0);
                assert_eq!(k, Some(2.0));
            }
            other => panic!("unexpected rule {other:?}"),
        }
        assert_eq!(config.m_for(100), 200);
    }
}
