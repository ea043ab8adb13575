//! Split the scaled-noise into its deterministic and random parts and set
//! the measured norms next to the theoretical bounds.

use panel_svd::diagnostics::{
    bound_lemma_er, bound_theorem_main, bound_theorem_perturb, design_params, e_decomposition, incoherence,
    PerturbInputs,
};
use panel_svd::linalg::operator_norm;
use panel_svd::panel::{
    build_design, generate_noise, generate_signal, realize, Action, DesignSpec, NoiseLaw, PerturbationLaw,
    SignalSpec, SpectrumShape,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n, m) = (150, 150);
    let seed = 11;
    let spec = DesignSpec::Nonuniform {
        low: 0.45,
        high: 0.55,
        nu: 0.5,
        law: PerturbationLaw::Rademacher,
        floor: 0.01,
        min_row_mean: 0.0,
    };
    let design = build_design(n, m, &spec, seed)?;
    let (k_a, k_e) = (1.0, 1.0);
    let signal = generate_signal(n, m, &SignalSpec { rank: 2, k_a, spectrum: SpectrumShape::FlatWithGap }, None, seed)?;
    let noise = generate_noise(n, m, k_e, NoiseLaw::UniformSymmetric, seed)?;
    let (instance, observed) = realize(&design, &signal, &noise, seed)?;

    let params = design_params(&design);
    let k = k_a + k_e;
    println!("q = {:.4}, r_p = {:.4}, ||P(0)||_op = {:.3}, T(0) = {:.2}", params.q, params.r_p, params.p_op_norm[0], params.t[0]);

    let parts = e_decomposition(&observed, &instance, Action::Control)?;
    let (e0, er) = (operator_norm(&parts.e0), operator_norm(&parts.e_r));
    println!("||E_0||_op = {e0:.3}   (deterministic: (p_ij/p_bar_i - 1) A_ij)");
    println!("||E_R||_op = {er:.3}   bound {:.3}", bound_lemma_er(k, params.r_p, params.q, n, m));

    let mu = incoherence(&signal.a0, 2)?;
    println!("incoherence mu = {:.3}", mu.mu);
    let main_bound = bound_theorem_main(k, 2, mu.mu, params.r_p, params.q, params.p_op_norm[0], n, m);
    println!("row-wise error bound for A_hat(0) (unit constant): {main_bound:.1}");

    let sv = signal.singular_values(Action::Control);
    let pert = bound_theorem_perturb(&PerturbInputs {
        r: 2,
        k,
        sigma: 1.0,
        e0_op: e0,
        sigma_s: sv[1],
        delta_s: sv[1],
        mu: mu.mu,
        n,
        m,
        e_r_op: Some(er),
    })?;
    println!(
        "perturbation bound {:.1}; gap condition delta_s >= 6(||E_R|| + ||E_0||) holds: {:?}",
        pert.value, pert.gap_condition
    );
    Ok(())
}
