//! Dense, Lanczos and randomized-subspace SVDs on the same matrix, each
//! checked against the brute-force oracle.

use panel_svd::linalg::{svd_dense, svd_truncated, DenseMatrix, SvdParams, TruncatedMethod};
use panel_svd::oracle::oracle_report;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n, m, r) = (90, 150, 4);
    // Rank-4 signal plus a little noise: a clear gap after the 4th value.
    let u = DenseMatrix::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0))?;
    let v = DenseMatrix::from_fn(r, m, |_, _| rng.random_range(-1.0..1.0))?;
    let noise = DenseMatrix::from_fn(n, m, |_, _| rng.random_range(-0.05..0.05))?;
    let a = u.matmul(&v)?.add(&noise)?;

    let dense = svd_dense(&a)?;
    println!("dense: top singular values {:.4?}", &dense.singular_values[..6]);

    for method in [TruncatedMethod::Lanczos, TruncatedMethod::RandomizedSubspace] {
        let params = SvdParams { method, dense_cutoff: 0, ..SvdParams::default() };
        let svd = svd_truncated(&a, r, &params)?;
        let report = oracle_report(&a, &svd)?;
        println!(
            "{method:?}: values {:.4?}; vs oracle: sv dev {:.1e}, angle {:.1e} rad, reconstruction {:.1e}",
            svd.singular_values,
            report.max_singular_value_deviation,
            report.max_subspace_angle,
            report.reconstruction_gap
        );
    }
    Ok(())
}
