//! A small seeded sweep written to CSV, read back, and reduced to a
//! log-log rate.

use panel_svd::estimator::ThresholdRule;
use panel_svd::harness::{fit_metric_slope, preset, run_sweep_to_path, SweepOptions, TrialTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = preset("row-homogeneous").expect("built-in preset");
    config.dimensions.n = vec![40, 80, 160];
    config.replications = 6;
    // Fixed rank (tau = 0) so the rate reflects estimation error, not rank selection.
    config.estimator.threshold_rule = ThresholdRule::Oracle { tau0: 0.0, tau1: 0.0 };

    let dir = std::env::temp_dir().join("panel-svd-example");
    let path = dir.join("sweep.csv");
    let table = run_sweep_to_path(&config, &path, SweepOptions::default())?;
    println!("{} rows, {} failed, written to {}", table.records.len(), table.failures(), path.display());

    let reread = TrialTable::from_csv_file(&path)?;
    assert_eq!(reread.to_csv_bytes()?, std::fs::read(&path)?);
    println!("{} metric columns, e.g. {:?}", reread.metric_columns.len(), &reread.metric_columns[..4]);

    let (medians, fit) = fit_metric_slope(&reread.records, "m_two_infty_normalized")?;
    for (n, v) in &medians {
        println!("n = {n:>4}: median normalized row-wise error {v:.4}");
    }
    println!("slope {:.3} (r^2 {:.3}); the n^(-1/2) rate would be -0.5", fit.slope, fit.r_squared);
    Ok(())
}
