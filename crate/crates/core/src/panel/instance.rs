use rand::Rng;

use super::{Action, NoisePair, PanelDesign, SignalPair};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::seed::{rng_for, Stream};

/// One simulated world: design, signals, noise, realized assignments and both
/// potential-outcome matrices `Y(a) = A(a) + E(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelInstance {
    pub design: PanelDesign,
    pub signal: SignalPair,
    pub noise: NoisePair,
    /// `D_ij ∈ {0, 1}`; 1 means treated.
    pub assignments: DenseMatrix,
    pub y0: DenseMatrix,
    pub y1: DenseMatrix,
    pub seed: u64,
}

impl PanelInstance {
    pub fn outcomes(&self, action: Action) -> &DenseMatrix {
        match action {
            Action::Control => &self.y0,
            Action::Treated => &self.y1,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.y0.shape()
    }

    /// Ground-truth effect matrix `M = A(1) − A(0)`.
    pub fn effect(&self) -> DenseMatrix {
        self.signal.effect()
    }
}

/// What the analyst sees: `Y^obs` and `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPanel {
    y_obs: DenseMatrix,
    assignments: DenseMatrix,
}

impl ObservedPanel {
    pub fn new(y_obs: DenseMatrix, assignments: DenseMatrix) -> Result<Self> {
        y_obs.check_same_shape(&assignments)?;
        if let Some(bad) = assignments.as_slice().iter().find(|&&d| d != 0.0 && d != 1.0) {
            return Err(Error::validation(format!("assignment entry {bad} is not 0 or 1")));
        }
        Ok(Self { y_obs, assignments })
    }

    /// Masks an instance: `Y^obs_ij = D_ij Y_ij(1) + (1 − D_ij) Y_ij(0)`.
    pub fn from_instance(instance: &PanelInstance) -> Result<Self> {
        let d = &instance.assignments;
        let y_obs = DenseMatrix::from_fn(d.n_rows(), d.n_cols(), |i, j| {
            if d.get(i, j) == 1.0 {
                instance.y1.get(i, j)
            } else {
                instance.y0.get(i, j)
            }
        })?;
        Self::new(y_obs, d.clone())
    }

    pub fn y_obs(&self) -> &DenseMatrix {
        &self.y_obs
    }

    pub fn assignments(&self) -> &DenseMatrix {
        &self.assignments
    }

    pub fn shape(&self) -> (usize, usize) {
        self.y_obs.shape()
    }

    /// Swaps the action labels: same outcomes, `D ↦ 1 − D`.
    pub fn relabeled(&self) -> Self {
        Self {
            y_obs: self.y_obs.clone(),
            assignments: self.assignments.map(|d| 1.0 - d).expect("binary entries"),
        }
    }

    /// Multiplies every observed outcome by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(Self {
            y_obs: self.y_obs.scale(c)?,
            assignments: self.assignments.clone(),
        })
    }
}

/// Independent `Bernoulli(p_ij)` draws.
pub fn draw_assignments(design: &PanelDesign, seed: u64) -> DenseMatrix {
    let mut rng = rng_for(seed, Stream::Assignment);
    let p = design.propensity();
    DenseMatrix::from_fn(p.n_rows(), p.n_cols(), |i, j| {
        if rng.random::<f64>() < p.get(i, j) {
            1.0
        } else {
            0.0
        }
    })
    .expect("indicators are finite")
}

/// Assembles `Y(a) = A(a) + E(a)`, draws `D`, and masks the observation.
pub fn realize(
    design: &PanelDesign,
    signal: &SignalPair,
    noise: &NoisePair,
    seed: u64,
) -> Result<(PanelInstance, ObservedPanel)> {
    let shape = design.propensity().shape();
    for (name, m) in [
        ("A(0)", &signal.a0),
        ("A(1)", &signal.a1),
        ("E(0)", &noise.e0),
        ("E(1)", &noise.e1),
    ] {
        if m.shape() != shape {
            return Err(Error::validation(format!(
                "{name} is {}x{} but the design is {}x{}",
                m.n_rows(),
                m.n_cols(),
                shape.0,
                shape.1
            )));
        }
    }
    let y0 = signal.a0.add(&noise.e0)?;
    let y1 = signal.a1.add(&noise.e1)?;
    let assignments = draw_assignments(design, seed);
    let instance = PanelInstance {
        design: design.clone(),
        signal: signal.clone(),
        noise: noise.clone(),
        assignments,
        y0,
        y1,
        seed,
    };
    let observed = ObservedPanel::from_instance(&instance)?;
    Ok((instance, observed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{generate_noise, generate_signal, NoiseLaw, SignalSpec, SpectrumShape};

    fn signal(n: usize, m: usize) -> SignalPair {
        let spec = SignalSpec {
            rank: 2,
            k_a: 1.0,
            spectrum: SpectrumShape::LinearDecay,
        };
        generate_signal(n, m, &spec, None, 11).unwrap()
    }

    fn with_assignments(design: &PanelDesign, noise_k: f64, d: DenseMatrix) -> (PanelInstance, ObservedPanel) {
        let (n, m) = d.shape();
        let noise = generate_noise(n, m, noise_k, NoiseLaw::UniformSymmetric, 2).unwrap();
        let (mut inst, _) = realize(design, &signal(n, m), &noise, 0).unwrap();
        inst.assignments = d;
        let obs = ObservedPanel::from_instance(&inst).unwrap();
        (inst, obs)
    }

    #[test]
    fn all_treated_or_all_control() {
        let design = PanelDesign::constant(6, 9, 0.5).unwrap();
        let (inst, obs) = with_assignments(&design, 0.0, DenseMatrix::filled(6, 9, 1.0).unwrap());
        assert_eq!(obs.y_obs(), &inst.signal.a1);
        let (inst, obs) = with_assignments(&design, 0.0, DenseMatrix::zeros(6, 9));
        assert_eq!(obs.y_obs(), &inst.signal.a0);
    }

    #[test]
    fn mask_selects_per_entry() {
        let design = PanelDesign::constant(12, 15, 0.4).unwrap();
        let noise = generate_noise(12, 15, 0.5, NoiseLaw::UniformSymmetric, 5).unwrap();
        let (inst, obs) = realize(&design, &signal(12, 15), &noise, 99).unwrap();
        assert_eq!(inst.y0, inst.signal.a0.add(&inst.noise.e0).unwrap());
        for i in 0..12 {
            for j in 0..15 {
                let treated = inst.assignments.get(i, j) == 1.0;
                let want = if treated { inst.y1.get(i, j) } else { inst.y0.get(i, j) };
                assert_eq!(obs.y_obs().get(i, j), want);
            }
        }
    }

    #[test]
    fn assignment_mean_and_determinism() {
        let design = PanelDesign::constant(100, 100, 0.5).unwrap();
        let d = draw_assignments(&design, 21);
        let mean = d.as_slice().iter().sum::<f64>() / 1e4;
        assert!((0.44..=0.56).contains(&mean), "mean {mean}");
        assert_eq!(d, draw_assignments(&design, 21));
        assert_ne!(d, draw_assignments(&design, 22));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let design = PanelDesign::constant(5, 5, 0.5).unwrap();
        let noise = generate_noise(5, 5, 0.1, NoiseLaw::UniformSymmetric, 1).unwrap();
        assert!(realize(&design, &signal(5, 6), &noise, 0).is_err());
    }

    #[test]
    fn non_binary_assignments_rejected() {
        let y = DenseMatrix::zeros(2, 2);
        assert!(ObservedPanel::new(y, DenseMatrix::filled(2, 2, 0.5).unwrap()).is_err());
    }
}
