use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Action;
use crate::error::{Error, Result};
use crate::linalg::{norm, svd_truncated, DenseMatrix, NormKind, SvdParams};
use crate::seed::{derive_seed, rng_for, Stream};

/// Shape of the planted spectrum before the entry-bound rescaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumShape {
    /// `s_ℓ = 1 − (ℓ − 1)/(2r)`: evenly spaced from 1 down to `(r+1)/(2r)`.
    #[default]
    LinearDecay,
    /// `s_ℓ = 2^{−(ℓ−1)}`.
    GeometricDecay,
    /// `s_ℓ = 1` for every `ℓ ≤ r`, then zero.
    FlatWithGap,
}

impl SpectrumShape {
    pub fn profile(self, r: usize) -> Vec<f64> {
        (1..=r)
            .map(|l| match self {
                SpectrumShape::LinearDecay => 1.0 - (l - 1) as f64 / (2 * r) as f64,
                SpectrumShape::GeometricDecay => 0.5f64.powi(l as i32 - 1),
                SpectrumShape::FlatWithGap => 1.0,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub rank: usize,
    /// Entry bound `K_A`.
    pub k_a: f64,
    #[serde(default)]
    pub spectrum: SpectrumShape,
}

/// Planted signals `A(0)`, `A(1)`, exactly rank `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalPair {
    pub a0: DenseMatrix,
    pub a1: DenseMatrix,
    pub rank: usize,
    pub k_a: f64,
    /// Spectra recomputed from the final matrices.
    pub singular_values_0: Vec<f64>,
    pub singular_values_1: Vec<f64>,
}

impl SignalPair {
    pub fn get(&self, action: Action) -> &DenseMatrix {
        match action {
            Action::Control => &self.a0,
            Action::Treated => &self.a1,
        }
    }

    pub fn singular_values(&self, action: Action) -> &[f64] {
        match action {
            Action::Control => &self.singular_values_0,
            Action::Treated => &self.singular_values_1,
        }
    }

    /// `M = A(1) − A(0)`.
    pub fn effect(&self) -> DenseMatrix {
        self.a1.sub(&self.a0).expect("signals share a shape")
    }
}

/// Plants `A(a) = c_a · U_a diag(s) V_aᵀ` for each action, with `U_a`, `V_a`
/// orthonormalized standard-Gaussian factors and `c_a` chosen so the largest
/// entry equals `k_a`.
///
/// `snr_floor`, when given, is the value the leading singular value of each
/// matrix must reach; rescaling to the entry bound fixes `σ₁`, so a floor
/// above it is reported as infeasible rather than silently violated.
pub fn generate_signal(
    n: usize,
    m: usize,
    spec: &SignalSpec,
    snr_floor: Option<f64>,
    seed: u64,
) -> Result<SignalPair> {
    let r = spec.rank;
    if n < 2 || m < 2 {
        return Err(Error::validation(format!("signal needs n, m ≥ 2, got {n}x{m}")));
    }
    if r == 0 || r > n.min(m) {
        return Err(Error::validation(format!(
            "rank {r} outside 1..={} for a {n}x{m} signal",
            n.min(m)
        )));
    }
    if !(spec.k_a > 0.0 && spec.k_a.is_finite()) {
        return Err(Error::validation(format!("entry bound K_A must be positive, got {}", spec.k_a)));
    }
    let profile = spec.spectrum.profile(r);
    let mut planted = Vec::with_capacity(2);
    for action in Action::ALL {
        let mut rng = rng_for(derive_seed(seed, &[action.index() as u64]), Stream::Signal);
        let u = orthonormal_gaussian(n, r, &mut rng);
        let v = orthonormal_gaussian(m, r, &mut rng);
        let mut us = u.clone();
        for (l, mut col) in us.column_iter_mut().enumerate() {
            col *= profile[l];
        }
        let raw = DenseMatrix::from_nalgebra(&(us * v.transpose()))?;
        let peak = norm(&raw, NormKind::EntryMax);
        let a = raw.scale(spec.k_a / peak)?;
        let exact = SvdParams {
            tol: 1e-12,
            ..SvdParams::default()
        };
        let sv = svd_truncated(&a, r, &exact)?.singular_values;
        if sv[r - 1] <= 0.0 {
            return Err(Error::Infeasible("planted signal lost rank after rescaling".into()));
        }
        if let Some(floor) = snr_floor {
            if sv[0] < floor {
                return Err(Error::Infeasible(format!(
                    "σ₁(A({})) = {:.4} is below the SNR floor {floor:.4}; the entry bound K_A = {} caps σ₁ for a {n}x{m} rank-{r} signal",
                    action.index(),
                    sv[0],
                    spec.k_a
                )));
            }
        }
        planted.push((a, sv));
    }
    let (a1, s1) = planted.pop().expect("two actions");
    let (a0, s0) = planted.pop().expect("two actions");
    Ok(SignalPair {
        a0,
        a1,
        rank: r,
        k_a: spec.k_a,
        singular_values_0: s0,
        singular_values_1: s1,
    })
}

fn orthonormal_gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(rows, cols, |_, _| rng.sample(StandardNormal));
    g.qr().q()
}
