use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Action;
use crate::error::{Error, Result};
use crate::linalg::{norm::operator_norm_with, DenseMatrix, SvdParams};
use crate::seed::{rng_for, Stream};

/// Default per-entry floor/ceiling margin for generated propensities.
pub const DEFAULT_FLOOR: f64 = 0.05;
/// Smallest floor a generated design may request.
pub const MIN_FLOOR: f64 = 1e-3;
/// Realized nonuniformity must land within this relative distance of the target.
pub const NU_TOLERANCE: f64 = 0.2;
/// Largest fraction of entries that calibration may clip to the floor/ceiling.
pub const CLIP_BUDGET: f64 = 0.05;
const MAX_PERTURBATION_SCALE: f64 = 3.0;

/// Mean-zero law of the within-row propensity perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationLaw {
    #[default]
    Uniform,
    Rademacher,
}

/// How a design was produced. Carried on [`PanelDesign`] and checked against
/// the propensity matrix on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DesignFamily {
    Constant {
        c: f64,
    },
    RowHomogeneous,
    Nonuniform {
        nu_target: f64,
        nu_realized: f64,
        /// Global multiplier on each row's available room.
        scale: f64,
        clipped: usize,
    },
    /// Propensities supplied directly by the caller.
    Explicit,
}

/// Recipe for [`build_design`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DesignSpec {
    Constant {
        c: f64,
    },
    /// `p_i ~ Uniform[low, high]`, constant along each row.
    RowHomogeneous {
        low: f64,
        high: f64,
        #[serde(default = "default_floor")]
        floor: f64,
    },
    /// Row-homogeneous base plus mean-zero bounded perturbations, calibrated so
    /// `max_a ‖P(a)‖_op / (√m + √n) ≈ nu`.
    Nonuniform {
        low: f64,
        high: f64,
        nu: f64,
        #[serde(default)]
        law: PerturbationLaw,
        #[serde(default = "default_floor")]
        floor: f64,
        /// Required lower bound on every row mean, for both actions.
        #[serde(default)]
        min_row_mean: f64,
    },
}

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

/// Ground-truth assignment mechanism: `D_ij ~ Bernoulli(p_ij)` independently.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDesign {
    propensity: DenseMatrix,
    family: DesignFamily,
}

impl PanelDesign {
    pub fn new(propensity: DenseMatrix, family: DesignFamily) -> Result<Self> {
        if propensity.is_empty() {
            return Err(Error::validation("design must have at least one entry"));
        }
        if let Some(bad) = propensity.as_slice().iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::validation(format!(
                "propensity {bad} outside the open interval (0, 1)"
            )));
        }
        match &family {
            DesignFamily::Constant { c } => {
                if propensity.as_slice().iter().any(|p| p != c) {
                    return Err(Error::validation(format!("constant({c}) design has unequal entries")));
                }
            }
            DesignFamily::RowHomogeneous => {
                for (i, row) in propensity.rows_iter().enumerate() {
                    if row.iter().any(|p| *p != row[0]) {
                        return Err(Error::validation(format!(
                            "row-homogeneous design varies within row {i}"
                        )));
                    }
                }
            }
            DesignFamily::Nonuniform { .. } | DesignFamily::Explicit => {}
        }
        Ok(Self { propensity, family })
    }

    /// Constant design `p_ij = c`.
    pub fn constant(n: usize, m: usize, c: f64) -> Result<Self> {
        Self::new(DenseMatrix::filled(n, m, c)?, DesignFamily::Constant { c })
    }

    /// Row-homogeneous design with the given per-unit propensities.
    pub fn row_homogeneous(row_propensities: &[f64], m: usize) -> Result<Self> {
        let p = DenseMatrix::from_fn(row_propensities.len(), m, |i, _| row_propensities[i])?;
        Self::new(p, DesignFamily::RowHomogeneous)
    }

    pub fn explicit(propensity: DenseMatrix) -> Result<Self> {
        Self::new(propensity, DesignFamily::Explicit)
    }

    pub fn n_units(&self) -> usize {
        self.propensity.n_rows()
    }

    pub fn n_times(&self) -> usize {
        self.propensity.n_cols()
    }

    pub fn family(&self) -> &DesignFamily {
        &self.family
    }

    /// Treatment propensities `p_ij = P(D_ij = 1)`.
    pub fn propensity(&self) -> &DenseMatrix {
        &self.propensity
    }

    /// `p_ij(a)`: `p_ij` for the treated action and `1 − p_ij` for control.
    pub fn action_propensity(&self, action: Action) -> DenseMatrix {
        match action {
            Action::Treated => self.propensity.clone(),
            Action::Control => self
                .propensity
                .map(|p| 1.0 - p)
                .expect("complement of a probability is finite"),
        }
    }

    /// Row means `p̄_i(a)`.
    pub fn row_means(&self, action: Action) -> Vec<f64> {
        let m = self.n_times() as f64;
        self.propensity
            .rows_iter()
            .map(|row| {
                let s: f64 = row.iter().sum::<f64>() / m;
                match action {
                    Action::Treated => s,
                    Action::Control => 1.0 - s,
                }
            })
            .collect()
    }

    /// `P(a)_ij = p_ij(a) / p̄_i(a) − 1`.
    pub fn nonuniformity(&self, action: Action) -> DenseMatrix {
        let pa = self.action_propensity(action);
        let means = self.row_means(action);
        DenseMatrix::from_fn(pa.n_rows(), pa.n_cols(), |i, j| pa.get(i, j) / means[i] - 1.0)
            .expect("row means of valid propensities are positive")
    }
}

/// Generates a design from `spec`.
pub fn build_design(n: usize, m: usize, spec: &DesignSpec, seed: u64) -> Result<PanelDesign> {
    if n == 0 || m == 0 {
        return Err(Error::validation("design needs n ≥ 1 and m ≥ 1"));
    }
    let mut rng = rng_for(seed, Stream::Design);
    match *spec {
        DesignSpec::Constant { c } => {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::validation(format!("constant propensity {c} outside (0, 1)")));
            }
            PanelDesign::constant(n, m, c)
        }
        DesignSpec::RowHomogeneous { low, high, floor } => {
            check_interval(low, high, floor)?;
            let rows: Vec<f64> = (0..n).map(|_| sample_between(&mut rng, low, high)).collect();
            PanelDesign::row_homogeneous(&rows, m)
        }
        DesignSpec::Nonuniform {
            low,
            high,
            nu,
            law,
            floor,
            min_row_mean,
        } => {
            check_interval(low, high, floor)?;
            if !(nu >= 0.0 && nu.is_finite()) {
                return Err(Error::validation(format!("target nu must be ≥ 0, got {nu}")));
            }
            let base: Vec<f64> = (0..n).map(|_| sample_between(&mut rng, low, high)).collect();
            let xi: Vec<f64> = (0..n * m)
                .map(|_| match law {
                    PerturbationLaw::Uniform => rng.random_range(-1.0..=1.0),
                    PerturbationLaw::Rademacher => {
                        if rng.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                })
                .collect();
            let design = calibrate_nonuniform(n, m, &base, &xi, nu, floor)?;
            if min_row_mean > 0.0 {
                for action in Action::ALL {
                    let q = design.row_means(action).into_iter().fold(f64::INFINITY, f64::min);
                    if q < min_row_mean {
                        return Err(Error::Infeasible(format!(
                            "row mean {q:.4} for action {} falls below the required {min_row_mean}",
                            action.index()
                        )));
                    }
                }
            }
            Ok(design)
        }
    }
}

fn check_interval(low: f64, high: f64, floor: f64) -> Result<()> {
    if !(MIN_FLOOR..0.5).contains(&floor) {
        return Err(Error::validation(format!(
            "propensity floor {floor} outside [{MIN_FLOOR}, 0.5)"
        )));
    }
    if !(low <= high && low >= floor && high <= 1.0 - floor) {
        return Err(Error::validation(format!(
            "propensity interval [{low}, {high}] must lie inside [{floor}, {}]",
            1.0 - floor
        )));
    }
    Ok(())
}

fn sample_between<R: Rng>(rng: &mut R, low: f64, high: f64) -> f64 {
    if low == high {
        low
    } else {
        rng.random_range(low..=high)
    }
}

/// Nonuniformity `max_a ‖P(a)‖_op / (√m + √n)` of a propensity matrix.
pub fn realized_nu(design: &PanelDesign) -> f64 {
    let (n, m) = (design.n_units() as f64, design.n_times() as f64);
    let params = SvdParams {
        tol: 1e-8,
        ..SvdParams::default()
    };
    Action::ALL
        .iter()
        .map(|&a| operator_norm_with(&design.nonuniformity(a), &params))
        .fold(0.0, f64::max)
        / (m.sqrt() + n.sqrt())
}

/// `p_ij = clip(p_i + w · room_i · ξ_ij)` where `room_i` is the distance from
/// `p_i` to the nearer of the floor and ceiling; `w` is tuned until the
/// realized nonuniformity matches `nu`.
fn calibrate_nonuniform(
    n: usize,
    m: usize,
    base: &[f64],
    xi: &[f64],
    nu: f64,
    floor: f64,
) -> Result<PanelDesign> {
    let build = |w: f64| -> Result<(PanelDesign, usize)> {
        let mut clipped = 0;
        let p = DenseMatrix::from_fn(n, m, |i, j| {
            let room = (base[i] - floor).min(1.0 - floor - base[i]);
            let raw = base[i] + w * room * xi[i * m + j];
            let v = raw.clamp(floor, 1.0 - floor);
            if v != raw {
                clipped += 1;
            }
            v
        })?;
        let design = PanelDesign::new(
            p,
            DesignFamily::Nonuniform {
                nu_target: nu,
                nu_realized: 0.0,
                scale: w,
                clipped: 0,
            },
        )?;
        Ok((design, clipped))
    };
    let finish = |design: PanelDesign, w: f64, realized: f64, clipped: usize| -> Result<PanelDesign> {
        PanelDesign::new(
            design.propensity,
            DesignFamily::Nonuniform {
                nu_target: nu,
                nu_realized: realized,
                scale: w,
                clipped,
            },
        )
    };

    if nu == 0.0 {
        let (design, clipped) = build(0.0)?;
        return finish(design, 0.0, 0.0, clipped);
    }

    let (full, _) = build(1.0)?;
    let full_nu = realized_nu(&full);
    if full_nu <= 0.0 {
        return Err(Error::Infeasible("perturbations have no room inside the floor/ceiling".into()));
    }
    // Scales w ≤ 1 never clip; above that the clip count grows with w. Keep
    // a bracket [lo, hi] of within-budget / over-budget scales and fall back
    // to bisection whenever a secant step leaves the budget.
    let mut lo = 0.0_f64;
    let mut hi = MAX_PERTURBATION_SCALE;
    let mut w = (nu / full_nu).min(MAX_PERTURBATION_SCALE);
    let mut best: Option<(f64, f64, usize, PanelDesign)> = Some((1.0, full_nu, 0, full));
    for _ in 0..16 {
        let (design, clipped) = build(w)?;
        let realized = realized_nu(&design);
        let within_budget = (clipped as f64) <= CLIP_BUDGET * (n * m) as f64;
        if !within_budget {
            hi = w;
            w = 0.5 * (lo.max(1.0).min(hi) + hi);
            if hi - lo.max(1.0) <= 1e-3 {
                break;
            }
            continue;
        }
        lo = lo.max(w);
        let rel = (realized - nu).abs() / nu;
        if best.as_ref().is_none_or(|b| rel < (b.1 - nu).abs() / nu) {
            best = Some((w, realized, clipped, design));
        }
        if rel <= 1e-3 {
            break;
        }
        let mut next = (w * nu / realized).min(MAX_PERTURBATION_SCALE);
        if next >= hi {
            next = 0.5 * (w + hi);
        }
        if (next - w).abs() <= 1e-9 {
            break;
        }
        w = next;
    }
    match best {
        Some((w, realized, clipped, design)) if (realized - nu).abs() <= NU_TOLERANCE * nu => {
            finish(design, w, realized, clipped)
        }
        Some((_, realized, ..)) => Err(Error::Infeasible(format!(
            "target nu = {nu} unreachable within {:.0}% under the clipping budget (best {realized:.4})",
            NU_TOLERANCE * 100.0
        ))),
        None => Err(Error::Infeasible(format!(
            "target nu = {nu} exceeds the clipping budget of {:.0}% of entries",
            CLIP_BUDGET * 100.0
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_design_entries() {
        let d = build_design(4, 6, &DesignSpec::Constant { c: 0.5 }, 1).unwrap();
        assert!(d.propensity().as_slice().iter().all(|&p| p == 0.5));
        assert!(d.nonuniformity(Action::Treated).as_slice().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn rejects_degenerate_propensities() {
        assert!(PanelDesign::explicit(DenseMatrix::filled(2, 2, 1.0).unwrap()).is_err());
        assert!(PanelDesign::explicit(DenseMatrix::filled(2, 2, 0.0).unwrap()).is_err());
        let near_one = 1.0 - 1e-12;
        assert!(PanelDesign::explicit(DenseMatrix::filled(2, 2, near_one).unwrap()).is_ok());
        assert!(build_design(2, 2, &DesignSpec::Constant { c: 1.0 }, 0).is_err());
    }

    #[test]
    fn family_invariants_are_checked() {
        let p = DenseMatrix::from_rows(&[[0.2, 0.6]]).unwrap();
        assert!(PanelDesign::new(p.clone(), DesignFamily::RowHomogeneous).is_err());
        assert!(PanelDesign::new(p, DesignFamily::Constant { c: 0.2 }).is_err());
    }

    #[test]
    fn row_homogeneous_has_zero_nonuniformity() {
        let spec = DesignSpec::RowHomogeneous {
            low: 0.3,
            high: 0.7,
            floor: DEFAULT_FLOOR,
        };
        let d = build_design(20, 30, &spec, 9).unwrap();
        for a in Action::ALL {
            assert!(d.nonuniformity(a).as_slice().iter().all(|&v| v.abs() < 1e-14));
        }
        for row in d.propensity().rows_iter() {
            assert!((0.3..=0.7).contains(&row[0]));
        }
    }

    #[test]
    fn hand_computed_one_by_two() {
        let d = PanelDesign::explicit(DenseMatrix::from_rows(&[[0.2, 0.6]]).unwrap()).unwrap();
        let p1 = d.nonuniformity(Action::Treated);
        assert!((p1.get(0, 0) + 0.5).abs() < 1e-15 && (p1.get(0, 1) - 0.5).abs() < 1e-15);
        assert!((d.row_means(Action::Treated)[0] - 0.4).abs() < 1e-15);
        assert!((d.row_means(Action::Control)[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn nonuniform_hits_target_and_rows_average_to_zero() {
        for (nu, law) in [(0.3, PerturbationLaw::Uniform), (0.8, PerturbationLaw::Rademacher)] {
            let spec = DesignSpec::Nonuniform {
                low: 0.4,
                high: 0.6,
                nu,
                law,
                floor: DEFAULT_FLOOR,
                min_row_mean: 0.0,
            };
            let d = build_design(60, 120, &spec, 3).unwrap();
            let DesignFamily::Nonuniform { nu_realized, .. } = d.family().clone() else {
                panic!("wrong family");
            };
            assert!((nu_realized - nu).abs() <= NU_TOLERANCE * nu, "{nu_realized} vs {nu}");
            assert!((realized_nu(&d) - nu_realized).abs() < 1e-9);
            for a in Action::ALL {
                for row in d.nonuniformity(a).rows_iter() {
                    let mean = row.iter().sum::<f64>() / row.len() as f64;
                    assert!(mean.abs() <= 1e-12, "row mean {mean}");
                }
            }
            assert!(d.propensity().as_slice().iter().all(|&p| (DEFAULT_FLOOR..=1.0 - DEFAULT_FLOOR).contains(&p)));
        }
    }

    #[test]
    fn unreachable_nu_is_reported() {
        let spec = DesignSpec::Nonuniform {
            low: 0.5,
            high: 0.5,
            nu: 5.0,
            law: PerturbationLaw::Uniform,
            floor: DEFAULT_FLOOR,
            min_row_mean: 0.0,
        };
        assert!(matches!(build_design(30, 60, &spec, 1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn floor_must_be_sane() {
        let spec = DesignSpec::RowHomogeneous {
            low: 0.3,
            high: 0.7,
            floor: 1e-4,
        };
        assert!(build_design(3, 3, &spec, 0).is_err());
    }
}
