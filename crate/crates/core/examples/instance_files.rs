//! Save a simulated instance in the binary container and as per-matrix CSV,
//! then load both back.

use panel_svd::panel::io::{read_container_file, read_matrix_csv_file, write_instance, write_instance_csv};
use panel_svd::panel::{
    build_design, generate_noise, generate_signal, realize, DesignSpec, NoiseLaw, SignalSpec, SpectrumShape,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, m, seed) = (6, 10, 1);
    let design = build_design(n, m, &DesignSpec::Constant { c: 0.4 }, seed)?;
    let signal = generate_signal(n, m, &SignalSpec { rank: 1, k_a: 1.0, spectrum: SpectrumShape::LinearDecay }, None, seed)?;
    let noise = generate_noise(n, m, 0.1, NoiseLaw::UniformSymmetric, seed)?;
    let (instance, observed) = realize(&design, &signal, &noise, seed)?;

    let dir = std::env::temp_dir().join("panel-svd-instance");
    std::fs::create_dir_all(&dir)?;
    let bin = dir.join("instance.psvd");
    write_instance(&bin, &instance, &observed)?;
    write_instance_csv(&dir.join("csv"), &instance, &observed)?;

    for (name, mat) in read_container_file(&bin)? {
        println!("{name:<10} {}x{}", mat.n_rows(), mat.n_cols());
    }
    let y = read_matrix_csv_file(&dir.join("csv").join("y_obs.csv"))?;
    assert_eq!(&y, observed.y_obs());
    println!("y_obs.csv round-trips exactly; first line of the file:");
    let text = std::fs::read_to_string(dir.join("csv").join("y_obs.csv"))?;
    println!("{}", text.lines().nth(1).unwrap_or_default());
    Ok(())
}
