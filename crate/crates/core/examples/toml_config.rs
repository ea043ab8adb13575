//! Write an experiment config by hand and run a single cell of it.

use panel_svd::harness::{run_trial, ExperimentConfig};

const CONFIG: &str = r#"
name = "small-demo"
base_seed = 99
replications = 3

[dimensions]
n = [60]
aspect_ratio = 1.5

[design]
family = "constant"
c = 0.5

[signal]
rank = 3
k_a = 1.0
spectrum = "geometric_decay"

[noise]
k_e = 0.5
law = "rademacher_scaled"

[estimator]
rank_cap = 5

[estimator.threshold_rule]
rule = "plug_in"
gap_multiplier = 0.5
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let record = run_trial(&config, 60, 0)?;
    println!("cell (n = {}, m = {}, trial 0) seed {}", record.n, record.m, record.seed);
    println!("selected ranks {:?}", record.selected_ranks);
    for key in ["tau_0", "sv_hat_0_1", "sv_hat_0_3", "m_two_infty_normalized", "subset_slack"] {
        println!("  {key:<24} {:.5}", record.metric(key).unwrap_or(f64::NAN));
    }

    // Typos are rejected rather than ignored.
    let typo = CONFIG.replace("rank_cap", "rank_capp");
    println!("with a typo: {}", ExperimentConfig::from_toml_str(&typo).unwrap_err());
    Ok(())
}
