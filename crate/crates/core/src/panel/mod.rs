//! Potential-outcome panels: designs, planted signals, noise, realized
//! assignments, and the masked observation the estimator is allowed to see.

mod design;
mod instance;
pub mod io;
mod noise;
mod signal;

pub use design::{
    build_design, realized_nu, DesignFamily, DesignSpec, PanelDesign, PerturbationLaw, CLIP_BUDGET,
    DEFAULT_FLOOR, MIN_FLOOR, NU_TOLERANCE,
};
pub use instance::{draw_assignments, realize, ObservedPanel, PanelInstance};
pub use noise::{generate_noise, NoiseLaw, NoisePair};
pub use signal::{generate_signal, SignalPair, SignalSpec, SpectrumShape};

use serde::{Deserialize, Serialize};

/// The two actions; `Control` is `a = 0` and `Treated` is `a = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Control,
    Treated,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Control, Action::Treated];

    pub fn index(self) -> usize {
        match self {
            Action::Control => 0,
            Action::Treated => 1,
        }
    }

    /// `D_ij(a)`: 1 when action `a` was taken at `(i, j)`.
    pub fn indicator(self, d: f64) -> f64 {
        match self {
            Action::Treated => d,
            Action::Control => 1.0 - d,
        }
    }
}
