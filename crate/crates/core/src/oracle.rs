//! Brute-force reference SVD for desk-scale matrices.
//!
//! Singular triplets come from a cyclic Jacobi eigendecomposition of the
//! symmetric dilation `[[0, B], [Bᵀ, 0]]`: its positive eigenvalues are the
//! singular values of `B`, and a unit eigenvector `(x; y)` for eigenvalue
//! `σ > 0` gives `u = √2·x`, `v = √2·y`.
//!
//! For a non-square `A` the dilation is taken of the square triangular factor
//! of a Householder QR (`A = QR` when tall, `Aᵀ = QR` when wide), which has the
//! same singular values. That shrinks the dilation from `n + m` to
//! `2·min(n, m)` and removes its `|n − m|` structural zero eigenvalues, which
//! otherwise slow Jacobi's convergence. Nothing here calls into nalgebra or
//! the main SVD path.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_dilation, DenseMatrix, SvdResult};

/// Largest `min(n, m)` accepted.
pub const ORACLE_MAX_MIN_DIM: usize = 512;
/// Largest `n + m` accepted (dilation order).
pub const ORACLE_MAX_DILATION: usize = 1024;
/// Jacobi stops once `off(S) ≤ JACOBI_TOL · ‖S‖_F`.
pub const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 60;

/// Agreement between a candidate decomposition and the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    /// `max_i |σ̂_i − σ_i| / σ₁`.
    pub max_singular_value_deviation: f64,
    /// Largest principal angle (radians) between candidate and oracle
    /// singular subspaces; 0 when the trailing gap is too small to identify them.
    pub max_subspace_angle: f64,
    /// `‖Â_k − A_k‖_F / ‖A_k‖_F` between rank-`k` reconstructions.
    pub reconstruction_gap: f64,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues (unsorted) and eigenvectors as columns of a row-major
/// `n × n` buffer.
fn jacobi_eigen(mut s: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    // Cyclic Jacobi in round-robin ("parallel") order: each sweep is n − 1
    // rounds of ⌊n/2⌋ disjoint rotations. Disjoint rotations do not disturb
    // each other's 2×2 blocks, so a round's angles can all be taken from S at
    // the start of the round, and the round is applied as one pass over rows
    // and one pass within rows, both contiguous. The accumulated rotation is
    // kept transposed for the same reason.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let total: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = JACOBI_TOL * total;

    // Tournament slots; an odd size gets a bye (index n) every round.
    let slots = n + n % 2;
    let mut order: Vec<usize> = (0..slots).collect();
    let mut rotations: Vec<(usize, usize, f64, f64, f64)> = Vec::with_capacity(slots / 2);

    // One extra sweep after the stopping test fires: convergence is quadratic,
    // so it takes the eigenvectors from ~tol to roughly machine precision.
    let mut polished = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * s[p * n + q] * s[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            if polished {
                break;
            }
            polished = true;
        }
        for _round in 1..slots {
            rotations.clear();
            for i in 0..slots / 2 {
                let (a, b) = (order[i], order[slots - 1 - i]);
                if a >= n || b >= n {
                    continue;
                }
                let (p, q) = (a.min(b), a.max(b));
                let apq = s[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[q * n + q] - s[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                rotations.push((p, q, c, t * c, t));
            }
            // keep slot 0 fixed, rotate the rest by one
            order[1..].rotate_right(1);
            if rotations.is_empty() {
                continue;
            }

            // S ← Jᵀ S (rows), then (Jᵀ S) J (within each row)
            for &(p, q, c, sn, _) in &rotations {
                rotate_rows(&mut s, n, p, q, c, sn);
                rotate_rows(&mut vt, n, p, q, c, sn);
            }
            for row in s.chunks_exact_mut(n) {
                for &(p, q, c, sn, _) in &rotations {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - sn * y;
                    row[q] = sn * x + c * y;
                }
            }
            for &(p, q, _, _, _) in &rotations {
                s[p * n + q] = 0.0;
                s[q * n + p] = 0.0;
            }
        }
    }
    let eigenvalues = (0..n).map(|i| s[i * n + i]).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            v[k * n + i] = vt[i * n + k];
        }
    }
    (eigenvalues, v)
}

/// `(row_p, row_q) ← (c·row_p − s·row_q, s·row_p + c·row_q)` for `p < q`.
fn rotate_rows(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, sn: f64) {
    let (lo, hi) = m.split_at_mut(q * n);
    let rp = &mut lo[p * n..p * n + n];
    let rq = &mut hi[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - sn * b;
        *y = sn * a + c * b;
    }
}

fn check_size(a: &DenseMatrix) -> Result<()> {
    let (n, m) = a.shape();
    if n.min(m) > ORACLE_MAX_MIN_DIM || n + m > ORACLE_MAX_DILATION {
        return Err(Error::SizeCap(format!(
            "oracle accepts min(n,m) ≤ {ORACLE_MAX_MIN_DIM} and n+m ≤ {ORACLE_MAX_DILATION}, got {n}x{m}"
        )));
    }
    Ok(())
}

/// Reference SVD with `min(n, m)` components.
///
/// Vectors paired with zero singular values are not meaningful (the zero
/// eigenspace of the dilation mixes both blocks) and are returned as zeros.
pub fn oracle_svd(a: &DenseMatrix) -> Result<SvdResult> {
    check_size(a)?;
    let (n, m) = a.shape();
    if n == m {
        return square_svd(a);
    }
    if n > m {
        let (q, r) = householder_qr(a);
        let core = square_svd(&r)?;
        Ok(SvdResult {
            left_vectors: product(&q, &core.left_vectors)?,
            singular_values: core.singular_values,
            right_vectors: core.right_vectors,
        })
    } else {
        let (q, r) = householder_qr(&a.transpose());
        let core = square_svd(&r.transpose())?;
        Ok(SvdResult {
            left_vectors: core.left_vectors,
            singular_values: core.singular_values,
            right_vectors: product(&q, &core.right_vectors)?,
        })
    }
}

/// Dilation-Jacobi SVD; used on square inputs.
fn square_svd(a: &DenseMatrix) -> Result<SvdResult> {
    let (n, m) = a.shape();
    let size = n + m;
    let k = n.min(m);
    let dil = symmetric_dilation(a);
    let (eigenvalues, vectors) = jacobi_eigen(dil.into_vec(), size);

    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&i, &j| eigenvalues[j].total_cmp(&eigenvalues[i]));
    order.truncate(k);

    let scale = eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let zero_cut = 1e-13 * scale.max(f64::MIN_POSITIVE);
    let mut left = vec![0.0; n * k];
    let mut right = vec![0.0; m * k];
    let mut values = Vec::with_capacity(k);
    for (c, &idx) in order.iter().enumerate() {
        let lambda = eigenvalues[idx].max(0.0);
        values.push(lambda);
        if lambda <= zero_cut {
            continue;
        }
        let col = |r: usize| vectors[r * size + idx];
        let top_norm = (0..n).map(|r| col(r) * col(r)).sum::<f64>().sqrt();
        let bottom_norm = (n..size).map(|r| col(r) * col(r)).sum::<f64>().sqrt();
        for r in 0..n {
            left[r * k + c] = col(r) / top_norm;
        }
        for r in 0..m {
            right[r * k + c] = col(n + r) / bottom_norm;
        }
    }
    Ok(SvdResult {
        left_vectors: DenseMatrix::from_row_major(n, k, left)?,
        singular_values: values,
        right_vectors: DenseMatrix::from_row_major(m, k, right)?,
    })
}

/// Thin Householder QR of a tall `r × k` matrix: `(Q, R)` with `Q` `r × k`
/// orthonormal and `R` `k × k` upper triangular.
fn householder_qr(c: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (rows, k) = c.shape();
    let mut w = c.as_slice().to_vec();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut v: Vec<f64> = (j..rows).map(|i| w[i * k + j]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        for col in j..k {
            let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * w[(j + i) * k + col]).sum();
            let f = 2.0 * dot / vv;
            for (i, vi) in v.iter().enumerate() {
                w[(j + i) * k + col] -= f * vi;
            }
        }
        reflectors.push(v);
    }
    let r = DenseMatrix::from_fn(k, k, |i, j| if j >= i { w[i * k + j] } else { 0.0 }).expect("finite");
    // Q = H_0 ⋯ H_{k−1} applied to the first k columns of the identity
    let mut q = vec![0.0; rows * k];
    for i in 0..k {
        q[i * k + i] = 1.0;
    }
    for (j, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        let vv: f64 = v.iter().map(|x| x * x).sum();
        for col in 0..k {
            let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * q[(j + i) * k + col]).sum();
            let f = 2.0 * dot / vv;
            for (i, vi) in v.iter().enumerate() {
                q[(j + i) * k + col] -= f * vi;
            }
        }
    }
    (DenseMatrix::from_row_major(rows, k, q).expect("finite"), r)
}

/// Plain triple-loop product.
fn product(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, inner) = a.shape();
    let m = b.n_cols();
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        let row = &mut out[i * m..(i + 1) * m];
        for l in 0..inner {
            let x = a.get(i, l);
            if x != 0.0 {
                for (o, y) in row.iter_mut().zip(b.row(l)) {
                    *o += x * y;
                }
            }
        }
    }
    DenseMatrix::from_row_major(n, m, out)
}

/// Rank-`s` truncation of [`oracle_svd`].
pub fn oracle_best_rank_s(a: &DenseMatrix, s: usize) -> Result<DenseMatrix> {
    check_size(a)?;
    if s > a.min_dim() {
        return Err(Error::validation(format!(
            "rank {s} exceeds min dimension {}",
            a.min_dim()
        )));
    }
    if s == 0 {
        return Ok(DenseMatrix::zeros(a.n_rows(), a.n_cols()));
    }
    let svd = oracle_svd(a)?;
    let (n, m) = a.shape();
    let u = &svd.left_vectors;
    let v = &svd.right_vectors;
    DenseMatrix::from_fn(n, m, |i, j| {
        (0..s)
            .map(|l| svd.singular_values[l] * u.get(i, l) * v.get(j, l))
            .sum()
    })
}

/// Eigendecomposition of the symmetric dilation `[[0, A], [Aᵀ, 0]]`.
#[derive(Debug, Clone)]
pub struct DilationEigen {
    size: usize,
    /// Eigenvalues sorted by decreasing `|λ|`.
    values: Vec<f64>,
    /// Eigenvector `l` is column `l` of this row-major `size × size` buffer.
    vectors: Vec<f64>,
}

impl DilationEigen {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Keeps the `k` eigenpairs of largest `|λ|`. With `k = 2s` this is the
    /// dilation of the best rank-`s` approximation (zero eigenvalues
    /// contribute nothing, so rank-deficient inputs are fine).
    pub fn truncation(&self, k: usize) -> Result<DenseMatrix> {
        let size = self.size;
        if k > size {
            return Err(Error::validation(format!("truncation rank {k} exceeds dilation order {size}")));
        }
        let mut out = vec![0.0; size * size];
        for l in 0..k {
            let lambda = self.values[l];
            for r in 0..size {
                let x = lambda * self.vectors[r * size + l];
                if x == 0.0 {
                    continue;
                }
                let row = &mut out[r * size..(r + 1) * size];
                for (c, slot) in row.iter_mut().enumerate() {
                    *slot += x * self.vectors[c * size + l];
                }
            }
        }
        DenseMatrix::from_row_major(size, size, out)
    }
}

pub fn oracle_dilation_eigen(a: &DenseMatrix) -> Result<DilationEigen> {
    check_size(a)?;
    let size = a.n_rows() + a.n_cols();
    let (eigenvalues, vectors) = jacobi_eigen(symmetric_dilation(a).into_vec(), size);
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&i, &j| eigenvalues[j].abs().total_cmp(&eigenvalues[i].abs()));
    let mut sorted = vec![0.0; size * size];
    for r in 0..size {
        for (l, &idx) in order.iter().enumerate() {
            sorted[r * size + l] = vectors[r * size + idx];
        }
    }
    Ok(DilationEigen {
        size,
        values: order.iter().map(|&i| eigenvalues[i]).collect(),
        vectors: sorted,
    })
}

/// Rank-`k` eigen-truncation of the dilation of `a`; see [`DilationEigen::truncation`].
pub fn oracle_dilation_truncation(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    oracle_dilation_eigen(a)?.truncation(k)
}

/// Compares `candidate` (any number of leading triplets) against the oracle.
pub fn oracle_report(a: &DenseMatrix, candidate: &SvdResult) -> Result<OracleReport> {
    let oracle = oracle_svd(a)?;
    let k = candidate.len();
    if k > oracle.len() || candidate.n_rows() != a.n_rows() || candidate.n_cols() != a.n_cols() {
        return Err(Error::validation("candidate decomposition does not match the matrix"));
    }
    let sigma1 = oracle.singular_values.first().copied().unwrap_or(0.0);
    let denom = if sigma1 > 0.0 { sigma1 } else { 1.0 };
    let max_singular_value_deviation = candidate
        .singular_values
        .iter()
        .zip(&oracle.singular_values)
        .map(|(a, b)| (a - b).abs() / denom)
        .fold(0.0, f64::max);

    let next = oracle.singular_values.get(k).copied().unwrap_or(0.0);
    let identifiable = k > 0 && oracle.singular_values[k - 1] - next >= 1e-6 * sigma1 && oracle.singular_values[k - 1] > 0.0;
    let max_subspace_angle = if identifiable {
        let left = subspace_angle(&candidate.left_vectors, &oracle.left_vectors, k);
        let right = subspace_angle(&candidate.right_vectors, &oracle.right_vectors, k);
        left.max(right)
    } else {
        0.0
    };

    let (n, m) = a.shape();
    let rec = |svd: &SvdResult| {
        DenseMatrix::from_fn(n, m, |i, j| {
            (0..k)
                .map(|l| svd.singular_values[l] * svd.left_vectors.get(i, l) * svd.right_vectors.get(j, l))
                .sum()
        })
    };
    let rec_c = rec(candidate)?;
    let rec_o = rec(&oracle)?;
    let diff: f64 = rec_c
        .as_slice()
        .iter()
        .zip(rec_o.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let base: f64 = rec_o.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    let reconstruction_gap = if base > 0.0 { diff / base } else { diff };

    Ok(OracleReport {
        max_singular_value_deviation,
        max_subspace_angle,
        reconstruction_gap,
    })
}

/// `asin ‖(I − W Wᵀ) X‖₂` for the first `k` columns of `x` and `w`.
fn subspace_angle(x: &DenseMatrix, w: &DenseMatrix, k: usize) -> f64 {
    let rows = x.n_rows();
    // residual R = X − W (Wᵀ X)
    let mut coeff = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            coeff[a * k + b] = (0..rows).map(|r| w.get(r, a) * x.get(r, b)).sum();
        }
    }
    let mut resid = vec![0.0; rows * k];
    for r in 0..rows {
        for b in 0..k {
            let proj: f64 = (0..k).map(|a| w.get(r, a) * coeff[a * k + b]).sum();
            resid[r * k + b] = x.get(r, b) - proj;
        }
    }
    let mut gram = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            gram[a * k + b] = (0..rows).map(|r| resid[r * k + a] * resid[r * k + b]).sum();
        }
    }
    let (eig, _) = jacobi_eigen(gram, k);
    let largest = eig.into_iter().fold(0.0_f64, f64::max);
    largest.sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal() {
        let svd = oracle_svd(&DenseMatrix::diag(&[3.0, 2.0, 1.0]).unwrap()).unwrap();
        for (got, want) in svd.singular_values.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let svd = oracle_svd(&a).unwrap();
        let want = ((30.0 + 884f64.sqrt()) / 2.0).sqrt();
        assert!((svd.singular_values[0] - want).abs() < 1e-13 * want);
        assert!((want - 5.4650).abs() < 1e-4);
    }

    #[test]
    fn truncation_conventions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = DenseMatrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0)).unwrap();
        assert_eq!(oracle_best_rank_s(&a, 0).unwrap(), DenseMatrix::zeros(6, 4));
        let full = oracle_best_rank_s(&a, 4).unwrap();
        assert!(full.max_abs_diff(&a).unwrap() < 1e-10);
        assert!(oracle_best_rank_s(&a, 5).is_err());
    }

    #[test]
    fn refuses_large_inputs() {
        let a = DenseMatrix::zeros(513, 513);
        assert!(matches!(oracle_svd(&a), Err(Error::SizeCap(_))));
    }

    #[test]
    fn rank_deficient_input() {
        let a = DenseMatrix::from_fn(5, 3, |i, j| (i + 1) as f64 * (j as f64 - 1.0)).unwrap();
        let svd = oracle_svd(&a).unwrap();
        assert!(svd.singular_values[1].abs() < 1e-12);
        let rec = oracle_best_rank_s(&a, 1).unwrap();
        assert!(rec.max_abs_diff(&a).unwrap() < 1e-12);
    }

    #[test]
    fn dilation_truncation_embeds_best_rank_s() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = DenseMatrix::from_fn(5, 7, |_, _| rng.random_range(-1.0..1.0)).unwrap();
        for s in 1..=5 {
            let t = oracle_dilation_truncation(&a, 2 * s).unwrap();
            let best = oracle_best_rank_s(&a, s).unwrap();
            for i in 0..5 {
                for j in 0..7 {
                    assert!((t.get(i, 5 + j) - best.get(i, j)).abs() < 1e-12);
                    assert!((t.get(5 + j, i) - best.get(i, j)).abs() < 1e-12);
                }
                for j in 0..5 {
                    assert!(t.get(i, j).abs() < 1e-12);
                }
            }
        }
    }
}
