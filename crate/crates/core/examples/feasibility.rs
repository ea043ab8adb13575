//! How far desk-scale panels are from the signal-strength condition.

use panel_svd::harness::{feasibility_report, preset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = preset("row-homogeneous").expect("built-in preset");
    config.dimensions.n = vec![100, 400];
    let report = feasibility_report(&config)?;
    print!("{report}");
    for row in &report.rows {
        println!(
            "n = {}: sigma_1 reaches {:.3}% of the floor",
            row.n,
            100.0 * row.sigma1[0] / row.snr_floor[0]
        );
    }
    Ok(())
}
