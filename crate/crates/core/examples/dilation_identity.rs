//! Row-wise perturbation of a rank-s truncation, computed directly and via
//! the symmetric dilation [[0, A], [A^T, 0]].

use panel_svd::linalg::{best_rank_s, symmetric_dilation, DenseMatrix};
use panel_svd::oracle::oracle_dilation_eigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_row(a: &DenseMatrix, rows: usize) -> f64 {
    a.row_norms()[..rows].iter().copied().fold(0.0, f64::max)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, m) = (12, 20);
    let a = DenseMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0))?
        .matmul(&DenseMatrix::from_fn(2, m, |_, _| rng.random_range(-1.0..1.0))?)?;
    let e = DenseMatrix::from_fn(n, m, |_, _| rng.random_range(-0.1..0.1))?;
    let tilde = a.add(&e)?;

    let dil = symmetric_dilation(&a);
    println!("dilation of a {n}x{m} matrix is {}x{}", dil.n_rows(), dil.n_cols());
    let eig = oracle_dilation_eigen(&a)?;
    println!("largest |eigenvalues| come in +/- pairs: {:.4?}", &eig.eigenvalues()[..4]);

    let eig_t = oracle_dilation_eigen(&tilde)?;
    for s in 1..=4 {
        let direct = best_rank_s(&tilde, s)?.sub(&best_rank_s(&a, s)?)?;
        let via = eig_t.truncation(2 * s)?.sub(&eig.truncation(2 * s)?)?;
        println!(
            "s = {s}: direct {:.12}  dilation {:.12}",
            max_row(&direct, n),
            max_row(&via, n)
        );
    }
    Ok(())
}
