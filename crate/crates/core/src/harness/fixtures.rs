//! Reference matrices with oracle singular values, for cross-checking other
//! SVD implementations.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::preset;
use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::oracle::oracle_svd;
use crate::panel::io::{write_instance, write_matrix_csv_file};
use crate::panel::{build_design, generate_noise, generate_signal, realize};
use crate::seed::{derive_seed, rng_for, Stream};

fn gaussian(n: usize, m: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng_for(seed, Stream::Signal);
    DenseMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal)).expect("finite")
}

/// The named fixture matrices for `seed`.
pub fn fixture_matrices(seed: u64) -> Result<Vec<(String, DenseMatrix)>> {
    let mut out = vec![(
        "two_by_two".to_string(),
        DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]])?,
    )];
    for (k, &(n, m)) in [(5, 5), (8, 13), (17, 9), (32, 48)].iter().enumerate() {
        out.push((format!("gaussian_{n}x{m}"), gaussian(n, m, derive_seed(seed, &[k as u64]))));
    }
    // Exactly rank 3, so trailing oracle values should be ~0.
    let u = gaussian(20, 3, derive_seed(seed, &[100]));
    let v = gaussian(3, 30, derive_seed(seed, &[101]));
    out.push(("rank3_20x30".to_string(), u.matmul(&v)?));
    out.push(("identity_6".to_string(), DenseMatrix::from_fn(6, 6, |i, j| if i == j { 1.0 } else { 0.0 })?));
    Ok(out)
}

/// Writes `<name>.csv` and `<name>.sv.csv` (a `1 × k` row of oracle singular
/// values) per fixture, a sample instance container, and `MANIFEST.txt`.
pub fn write_fixtures(dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, a) in fixture_matrices(seed)? {
        let path = dir.join(format!("{name}.csv"));
        write_matrix_csv_file(&path, &a)?;
        written.push(path);
        let svd = oracle_svd(&a)?;
        let sv = DenseMatrix::from_rows(&[svd.singular_values.clone()])?;
        let path = dir.join(format!("{name}.sv.csv"));
        write_matrix_csv_file(&path, &sv)?;
        written.push(path);
    }

    let config = preset("row-homogeneous").expect("built-in preset");
    let (n, m) = (12, 24);
    let design = build_design(n, m, &config.design, seed)?;
    let signal = generate_signal(n, m, &config.signal_spec(), None, seed)?;
    let noise = generate_noise(n, m, config.noise.k_e, config.noise.law, seed)?;
    let (instance, observed) = realize(&design, &signal, &noise, seed)?;
    let path = dir.join("instance_row_homogeneous_12x24.psvd");
    write_instance(&path, &instance, &observed)?;
    written.push(path);

    let manifest = dir.join("MANIFEST.txt");
    let mut text = format!("seed {seed}\n");
    for p in &written {
        text.push_str(&p.file_name().unwrap().to_string_lossy());
        text.push('\n');
    }
    std::fs::write(&manifest, text)?;
    written.push(manifest);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::io::{read_container_file, read_matrix_csv_file};

    #[test]
    fn fixtures_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_fixtures(dir.path(), 3).unwrap();
        assert!(files.iter().all(|p| p.exists()));
        let a = read_matrix_csv_file(&dir.path().join("two_by_two.csv")).unwrap();
        let sv = read_matrix_csv_file(&dir.path().join("two_by_two.sv.csv")).unwrap();
        assert_eq!(a.get(1, 0), 3.0);
        assert!((sv.get(0, 0) - 5.4650).abs() < 1e-4);
        let rank3 = read_matrix_csv_file(&dir.path().join("rank3_20x30.sv.csv")).unwrap();
        assert!(rank3.get(0, 3) < 1e-10 * rank3.get(0, 0));
        let inst = read_container_file(&dir.path().join("instance_row_homogeneous_12x24.psvd")).unwrap();
        assert_eq!(inst.len(), 9);
    }
}
