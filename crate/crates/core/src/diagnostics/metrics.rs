use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Record;
use crate::error::{Error, Result};
use crate::linalg::{norm, DenseMatrix, NormKind};
use crate::seed::{rng_for, Stream};

/// Norms of one error matrix `B = estimate − truth`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixErrors {
    /// `‖B‖_{2,∞}`.
    pub two_infty_raw: f64,
    /// `‖B‖_{2,∞} / √m`.
    pub two_infty_normalized: f64,
    /// `‖B‖_F / √(nm)`.
    pub frobenius_normalized: f64,
    pub operator: f64,
    pub entry_max: f64,
    /// `‖B_i·‖₂` for each unit.
    pub row_errors: Vec<f64>,
}

pub fn matrix_errors(estimate: &DenseMatrix, truth: &DenseMatrix) -> Result<MatrixErrors> {
    let diff = estimate.sub(truth)?;
    let (n, m) = diff.shape();
    let row_errors = diff.row_norms();
    let two_infty_raw = row_errors.iter().copied().fold(0.0, f64::max);
    Ok(MatrixErrors {
        two_infty_raw,
        two_infty_normalized: two_infty_raw / (m as f64).sqrt(),
        frobenius_normalized: norm(&diff, NormKind::Frobenius) / ((n * m) as f64).sqrt(),
        operator: norm(&diff, NormKind::Operator),
        entry_max: norm(&diff, NormKind::EntryMax),
        row_errors,
    })
}

impl MatrixErrors {
    fn record_into(&self, prefix: &str, out: &mut Record) {
        out.push((format!("{prefix}_two_infty_raw"), self.two_infty_raw));
        out.push((format!("{prefix}_two_infty_normalized"), self.two_infty_normalized));
        out.push((format!("{prefix}_frobenius_normalized"), self.frobenius_normalized));
        out.push((format!("{prefix}_operator"), self.operator));
        out.push((format!("{prefix}_entry_max"), self.entry_max));
    }
}

/// Index-set presets for subset averages `Avg_i(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubsetPreset {
    All,
    FirstHalf,
    EvenIndices,
    RandomHalf { seed: u64 },
}

impl SubsetPreset {
    pub fn name(&self) -> String {
        match self {
            SubsetPreset::All => "all".into(),
            SubsetPreset::FirstHalf => "first_half".into(),
            SubsetPreset::EvenIndices => "even_indices".into(),
            SubsetPreset::RandomHalf { .. } => "random_half".into(),
        }
    }

    /// Time indices for a panel with `m` periods.
    pub fn indices(&self, m: usize) -> Vec<usize> {
        match *self {
            SubsetPreset::All => (0..m).collect(),
            SubsetPreset::FirstHalf => (0..m.div_ceil(2)).collect(),
            SubsetPreset::EvenIndices => (0..m).step_by(2).collect(),
            SubsetPreset::RandomHalf { seed } => {
                let mut idx: Vec<usize> = (0..m).collect();
                idx.shuffle(&mut rng_for(seed, Stream::Subsets));
                idx.truncate(m.div_ceil(2));
                idx.sort_unstable();
                idx
            }
        }
    }

    pub fn resolve(&self, m: usize) -> NamedSubset {
        NamedSubset {
            name: self.name(),
            indices: self.indices(m),
        }
    }

    pub fn defaults(seed: u64) -> Vec<SubsetPreset> {
        vec![
            SubsetPreset::All,
            SubsetPreset::FirstHalf,
            SubsetPreset::EvenIndices,
            SubsetPreset::RandomHalf { seed },
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedSubset {
    pub name: String,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// Errors of `M̂` against `M`.
    pub effect: MatrixErrors,
    /// Errors of `Â(0)` and `Â(1)`.
    pub actions: [MatrixErrors; 2],
    /// Per subset: `|Âvg_i(S) − Avg_i(S)|` for each unit.
    pub avg_errors: Vec<(String, Vec<f64>)>,
    /// Per subset: `√(1/|S|) · ‖M̂ − M‖_{2,∞}`.
    pub avg_bounds: Vec<(String, f64)>,
}

impl ErrorReport {
    /// Largest `|Âvg_i(S) − Avg_i(S)| − √(1/|S|)‖M̂ − M‖_{2,∞}` over all units
    /// and subsets; nonpositive up to rounding.
    pub fn worst_subset_slack(&self) -> f64 {
        self.avg_errors
            .iter()
            .zip(&self.avg_bounds)
            .flat_map(|((_, errs), (_, bound))| errs.iter().map(move |e| e - bound))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn record(&self) -> Record {
        let mut out = Vec::new();
        self.effect.record_into("m", &mut out);
        self.actions[0].record_into("a0", &mut out);
        self.actions[1].record_into("a1", &mut out);
        for ((name, errs), (_, bound)) in self.avg_errors.iter().zip(&self.avg_bounds) {
            out.push((format!("avg_{name}_max"), errs.iter().copied().fold(0.0, f64::max)));
            out.push((format!("avg_{name}_bound"), *bound));
        }
        out
    }
}

/// Error norms for `M̂` and both `Â(a)`, and subset-average errors for `M̂`.
pub fn error_report(
    m_hat: &DenseMatrix,
    m_true: &DenseMatrix,
    a_hats: [&DenseMatrix; 2],
    a_trues: [&DenseMatrix; 2],
    subsets: &[NamedSubset],
) -> Result<ErrorReport> {
    let effect = matrix_errors(m_hat, m_true)?;
    let actions = [
        matrix_errors(a_hats[0], a_trues[0])?,
        matrix_errors(a_hats[1], a_trues[1])?,
    ];
    let m = m_true.n_cols();
    let mut avg_errors = Vec::with_capacity(subsets.len());
    let mut avg_bounds = Vec::with_capacity(subsets.len());
    for subset in subsets {
        if subset.indices.is_empty() {
            return Err(Error::validation(format!("subset {:?} is empty", subset.name)));
        }
        if let Some(&bad) = subset.indices.iter().find(|&&j| j >= m) {
            return Err(Error::validation(format!(
                "subset {:?} has index {bad} outside 0..{m}",
                subset.name
            )));
        }
        let size = subset.indices.len() as f64;
        let errs = (0..m_true.n_rows())
            .map(|i| {
                let est: f64 = subset.indices.iter().map(|&j| m_hat.get(i, j)).sum::<f64>() / size;
                let truth: f64 = subset.indices.iter().map(|&j| m_true.get(i, j)).sum::<f64>() / size;
                (est - truth).abs()
            })
            .collect();
        avg_errors.push((subset.name.clone(), errs));
        avg_bounds.push((subset.name.clone(), effect.two_infty_raw / size.sqrt()));
    }
    Ok(ErrorReport {
        effect,
        actions,
        avg_errors,
        avg_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_estimate_has_zero_error() {
        let a = DenseMatrix::from_fn(4, 6, |i, j| (i * j) as f64).unwrap();
        let subsets: Vec<_> = SubsetPreset::defaults(1).iter().map(|s| s.resolve(6)).collect();
        let rep = error_report(&a, &a, [&a, &a], [&a, &a], &subsets).unwrap();
        assert_eq!(rep.effect.two_infty_raw, 0.0);
        assert!(rep.avg_errors.iter().all(|(_, e)| e.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn single_row_perturbation() {
        let truth = DenseMatrix::zeros(3, 5);
        let est = DenseMatrix::from_fn(3, 5, |i, j| match (i, j) {
            (0, 0) => 3.0,
            (0, 1) => 4.0,
            _ => 0.0,
        })
        .unwrap();
        let errs = matrix_errors(&est, &truth).unwrap();
        assert_eq!(errs.two_infty_raw, 5.0);
        assert_eq!(errs.row_errors, vec![5.0, 0.0, 0.0]);
        assert!((errs.operator - 5.0).abs() < 1e-12);
        assert_eq!(errs.entry_max, 4.0);
    }

    #[test]
    fn empty_or_out_of_range_subsets_are_rejected() {
        let a = DenseMatrix::zeros(2, 3);
        let empty = NamedSubset {
            name: "none".into(),
            indices: vec![],
        };
        assert!(error_report(&a, &a, [&a, &a], [&a, &a], &[empty]).is_err());
        let wide = NamedSubset {
            name: "wide".into(),
            indices: vec![3],
        };
        assert!(error_report(&a, &a, [&a, &a], [&a, &a], &[wide]).is_err());
    }

    #[test]
    fn presets() {
        assert_eq!(SubsetPreset::FirstHalf.indices(5), vec![0, 1, 2]);
        assert_eq!(SubsetPreset::EvenIndices.indices(5), vec![0, 2, 4]);
        let r = SubsetPreset::RandomHalf { seed: 4 }.indices(10);
        assert_eq!(r.len(), 5);
        assert_eq!(r, SubsetPreset::RandomHalf { seed: 4 }.indices(10));
    }
}
