use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Action;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::seed::{derive_seed, rng_for, Stream};

/// Bounded mean-zero entry laws; both are `(K_E, K_E)`-bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLaw {
    /// Uniform on `[−K_E, K_E]`.
    #[default]
    UniformSymmetric,
    /// `±K_E` with probability 1/2 each.
    RademacherScaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePair {
    pub e0: DenseMatrix,
    pub e1: DenseMatrix,
    pub k_e: f64,
    pub law: NoiseLaw,
}

impl NoisePair {
    pub fn get(&self, action: Action) -> &DenseMatrix {
        match action {
            Action::Control => &self.e0,
            Action::Treated => &self.e1,
        }
    }
}

pub fn generate_noise(n: usize, m: usize, k_e: f64, law: NoiseLaw, seed: u64) -> Result<NoisePair> {
    if !(k_e >= 0.0 && k_e.is_finite()) {
        return Err(Error::validation(format!("noise bound K_E must be ≥ 0, got {k_e}")));
    }
    let draw = |action: Action| -> Result<DenseMatrix> {
        if k_e == 0.0 {
            return Ok(DenseMatrix::zeros(n, m));
        }
        let mut rng = rng_for(derive_seed(seed, &[action.index() as u64]), Stream::Noise);
        DenseMatrix::from_fn(n, m, |_, _| match law {
            NoiseLaw::UniformSymmetric => rng.random_range(-k_e..=k_e),
            NoiseLaw::RademacherScaled => {
                if rng.random::<bool>() {
                    k_e
                } else {
                    -k_e
                }
            }
        })
    };
    Ok(NoisePair {
        e0: draw(Action::Control)?,
        e1: draw(Action::Treated)?,
        k_e,
        law,
    })
}
