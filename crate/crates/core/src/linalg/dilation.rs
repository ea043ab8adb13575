use super::DenseMatrix;

/// The `(n+m) × (n+m)` symmetric matrix `[[0, A], [Aᵀ, 0]]`.
///
/// Its eigenvalues are `±σ_i(A)` padded with `|n − m|` zeros, and its best
/// rank-`2s` approximation is the dilation of `A_s` whenever `σ_s > σ_{s+1}`.
pub fn symmetric_dilation(a: &DenseMatrix) -> DenseMatrix {
    let (n, m) = a.shape();
    let size = n + m;
    let mut out = DenseMatrix::zeros(size, size);
    let data = out.data_mut();
    for i in 0..n {
        for j in 0..m {
            let v = a.get(i, j);
            data[i * size + n + j] = v;
            data[(n + j) * size + i] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_dilation() {
        let d = symmetric_dilation(&DenseMatrix::from_rows(&[[2.5]]).unwrap());
        assert_eq!(d.as_slice(), &[0.0, 2.5, 2.5, 0.0]);
    }

    #[test]
    fn zero_and_symmetry() {
        assert_eq!(symmetric_dilation(&DenseMatrix::zeros(2, 3)), DenseMatrix::zeros(5, 5));
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let d = symmetric_dilation(&a);
        assert_eq!(d, d.transpose());
        assert_eq!(d.get(0, 2), 1.0);
        assert_eq!(d.get(4, 1), 6.0);
    }
}
