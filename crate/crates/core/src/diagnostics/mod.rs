//! Theoretical quantities computed from simulated instances: design
//! parameters, incoherence, error metrics, subset averages, the `E₀`/`E_R`
//! split of the scaled observation, and evaluators for the error bounds.
//!
//! Bound evaluators use unit leading constants and natural logarithms.

mod bounds;
mod decomposition;
mod metrics;
mod params;

pub use bounds::{
    bound_lemma_er, bound_theorem_main, bound_theorem_perturb, bound_theorem_perturb_refined, x0_statistic,
    PerturbBound, PerturbInputs,
};
pub use decomposition::{e_decomposition, propensity_discrepancy, EDecomposition};
pub use metrics::{error_report, matrix_errors, ErrorReport, MatrixErrors, NamedSubset, SubsetPreset};
pub use params::{
    design_params, incoherence, plug_in_t, snr_floor, t_param, DesignParams, Incoherence, PAPER_SNR_MULTIPLIER,
    PAPER_THRESHOLD_MULTIPLIER,
};

/// A flat, ordered list of named scalars for tabular output.
pub type Record = Vec<(String, f64)>;
