//! The four propensity families and the quantities the error rate depends
//! on: the row-mean floor q, the within-row ratio r_p, and ||P||_op.

use panel_svd::diagnostics::design_params;
use panel_svd::panel::{build_design, realized_nu, DesignSpec, PerturbationLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, m) = (80, 160);
    let families = [
        ("constant 0.5", DesignSpec::Constant { c: 0.5 }),
        ("row-homogeneous", DesignSpec::RowHomogeneous { low: 0.3, high: 0.7, floor: 0.05 }),
        (
            "nonuniform, nu = 0.5",
            DesignSpec::Nonuniform {
                low: 0.45,
                high: 0.55,
                nu: 0.5,
                law: PerturbationLaw::Rademacher,
                floor: 0.01,
                min_row_mean: 0.0,
            },
        ),
        (
            "nonuniform, nu = 1",
            DesignSpec::Nonuniform {
                low: 0.45,
                high: 0.55,
                nu: 1.0,
                law: PerturbationLaw::Rademacher,
                floor: 0.01,
                min_row_mean: 0.0,
            },
        ),
    ];

    println!("{:<22} {:>8} {:>8} {:>10} {:>10} {:>8}", "design", "q", "r_p", "||P(0)||", "T(0)", "nu");
    for (label, spec) in &families {
        let design = build_design(n, m, spec, 7)?;
        let p = design_params(&design);
        println!(
            "{label:<22} {:>8.4} {:>8.4} {:>10.4} {:>10.2} {:>8.4}",
            p.q,
            p.r_p,
            p.p_op_norm[0],
            p.t[0],
            realized_nu(&design)
        );
    }

    // Asking for more nonuniformity than the entry floor allows is an error,
    // not a silently weaker design.
    let too_much = DesignSpec::Nonuniform {
        low: 0.45,
        high: 0.55,
        nu: 2.0,
        law: PerturbationLaw::Rademacher,
        floor: 0.01,
        min_row_mean: 0.0,
    };
    match build_design(n, m, &too_much, 7) {
        Ok(_) => println!("nu = 2 unexpectedly feasible"),
        Err(e) => println!("nu = 2: {e}"),
    }
    Ok(())
}
