use panel_svd::estimator::{estimate, EstimatorConfig, ThresholdRule};
use panel_svd::linalg::{norm, DenseMatrix, NormKind};
use panel_svd::panel::{
    generate_noise, generate_signal, realize, Action, NoiseLaw, ObservedPanel, PanelDesign, SignalPair, SignalSpec,
    SpectrumShape,
};
use proptest::prelude::*;

fn instance(n: usize, m: usize, k_e: f64, seed: u64) -> (SignalPair, ObservedPanel) {
    let design = PanelDesign::constant(n, m, 0.5).unwrap();
    let spec = SignalSpec {
        rank: 2,
        k_a: 1.0,
        spectrum: SpectrumShape::FlatWithGap,
    };
    let signal = generate_signal(n, m, &spec, None, seed).unwrap();
    let noise = generate_noise(n, m, k_e, NoiseLaw::UniformSymmetric, seed).unwrap();
    let (_, obs) = realize(&design, &signal, &noise, seed).unwrap();
    (signal, obs)
}

fn oracle(cap: usize, tau0: f64, tau1: f64) -> EstimatorConfig {
    EstimatorConfig::new(cap, ThresholdRule::Oracle { tau0, tau1 })
}

fn close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> bool {
    let scale = norm(a, NormKind::EntryMax).max(norm(b, NormKind::EntryMax)).max(1.0);
    a.max_abs_diff(b).unwrap() <= tol * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relabeling_swaps_actions(n in 6usize..30, m in 6usize..30, seed in any::<u64>(), tau in 0.0f64..3.0) {
        let (_, obs) = instance(n, m, 0.5, seed);
        let cfg = oracle(3, tau, 2.0 * tau);
        let swapped_cfg = oracle(3, 2.0 * tau, tau);
        let fit = estimate(&obs, &cfg, None).unwrap();
        let flipped = estimate(&obs.relabeled(), &swapped_cfg, None).unwrap();
        prop_assert_eq!(fit.selected_rank_0, flipped.selected_rank_1);
        prop_assert_eq!(fit.selected_rank_1, flipped.selected_rank_0);
        prop_assert!(close(&fit.a_hat_0, &flipped.a_hat_1, 1e-9));
        prop_assert!(close(&fit.a_hat_1, &flipped.a_hat_0, 1e-9));
        prop_assert!(close(&fit.m_hat, &flipped.m_hat.scale(-1.0).unwrap(), 1e-9));
    }

    #[test]
    fn outcome_scaling_is_equivariant(n in 6usize..30, m in 6usize..30, seed in any::<u64>(), c in 0.1f64..20.0) {
        let (_, obs) = instance(n, m, 0.5, seed);
        let fit = estimate(&obs, &oracle(3, 0.7, 0.7), None).unwrap();
        let scaled = estimate(&obs.scaled(c).unwrap(), &oracle(3, 0.7 * c, 0.7 * c), None).unwrap();
        prop_assert_eq!(fit.selected_rank_0, scaled.selected_rank_0);
        prop_assert_eq!(fit.selected_rank_1, scaled.selected_rank_1);
        prop_assert!(close(&fit.m_hat.scale(c).unwrap(), &scaled.m_hat, 1e-9));
    }

    #[test]
    fn effect_is_difference_of_fits(n in 4usize..20, m in 4usize..20, seed in any::<u64>()) {
        let (_, obs) = instance(n, m, 1.0, seed);
        let fit = estimate(&obs, &oracle(2, 0.0, 0.0), None).unwrap();
        let diff = fit.a_hat_1.sub(&fit.a_hat_0).unwrap();
        prop_assert_eq!(diff, fit.m_hat);
    }
}

#[test]
fn infinite_threshold_selects_nothing() {
    let (signal, obs) = instance(20, 25, 0.5, 3);
    let fit = estimate(&obs, &oracle(4, f64::INFINITY, f64::INFINITY), None).unwrap();
    assert_eq!((fit.selected_rank_0, fit.selected_rank_1), (0, 0));
    assert_eq!(norm(&fit.m_hat, NormKind::Frobenius), 0.0);
    assert!(norm(&signal.effect(), NormKind::Frobenius) > 0.0);
}

#[test]
fn noiseless_panel_recovers_planted_rank() {
    // Only the sampling mask perturbs the panel. With p = 1/2 at 200 x 200 the
    // mask's contribution has norm ≈ 2√n · rms(A), far below σ_2 ≈ n · rms(A) / √2.
    let (signal, obs) = instance(200, 200, 0.0, 17);
    let [tau0, tau1] = Action::ALL.map(|a| signal.singular_values(a)[1] / 2.0);
    let cfg = oracle(4, tau0, tau1);
    let fit = estimate(&obs, &cfg, None).unwrap();
    assert_eq!((fit.selected_rank_0, fit.selected_rank_1), (2, 2));
    let err = norm(&fit.m_hat.sub(&signal.effect()).unwrap(), NormKind::Frobenius);
    let size = norm(&signal.a0, NormKind::Frobenius) + norm(&signal.a1, NormKind::Frobenius);
    assert!(err < 0.5 * size, "relative error {}", err / size);
}
