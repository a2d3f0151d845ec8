use conclusive_teleport::formulas::{f_otaf, f_product};
use conclusive_teleport::linalg::haar_random_unitary;
use conclusive_teleport::{
    build_conclusive_povm, build_weyl_basis, dilate, haar_random_ket, lambda_max, make_channel,
    outcome_channel, refine_inconclusive_product, refine_inconclusive_residual, report, simulate,
    Corrections, FidelityReport, Operator, PovmSet, SchmidtChannel, SimulationOptions,
    UnitaryBasis,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn channel_from(raw: &[f64]) -> SchmidtChannel {
    let total: f64 = raw.iter().sum();
    make_channel(&raw.iter().map(|w| (w / total).sqrt()).collect::<Vec<_>>()).unwrap()
}

fn arb_channel(d: usize) -> impl Strategy<Value = SchmidtChannel> {
    prop::collection::vec(0.05f64..1.0, d).prop_map(|raw| channel_from(&raw))
}

fn arb_config() -> impl Strategy<Value = (usize, SchmidtChannel, f64)> {
    (2usize..=4)
        .prop_flat_map(|d| (Just(d), arb_channel(d), 0.0f64..=1.0))
        .prop_map(|(d, ch, t)| {
            let lam = t * lambda_max(&ch);
            (d, ch, lam)
        })
}

fn refine(base: &PovmSet, basis: &UnitaryBasis, residual: bool) -> PovmSet {
    if residual {
        refine_inconclusive_residual(base, basis).unwrap()
    } else {
        refine_inconclusive_product(base).unwrap()
    }
}

fn exact(ch: &SchmidtChannel, basis: &UnitaryBasis, lam: f64, residual: bool, c: Corrections) -> FidelityReport {
    let base = build_conclusive_povm(ch, basis, lam).unwrap();
    report(&refine(&base, basis, residual), ch, basis, c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_strategy_matches_optimal_formula((d, ch, lam) in arb_config()) {
        let basis = build_weyl_basis(d).unwrap();
        let r = exact(&ch, &basis, lam, true, Corrections::Auto);
        prop_assert!((r.f_total - f_otaf(&ch.weights(), lam).unwrap()).abs() < 1e-9);
        prop_assert!((r.f_total - (r.f_conclusive + r.f_inconclusive)).abs() < 1e-15);
        prop_assert!((r.probability_sum() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_strategy_closed_form((d, ch, lam) in arb_config()) {
        let basis = build_weyl_basis(d).unwrap();
        let r = exact(&ch, &basis, lam, false, Corrections::Paper);
        prop_assert!((r.f_total - f_product(d, lam)).abs() < 1e-9);
        // the optimal corrections can only help
        let auto = exact(&ch, &basis, lam, false, Corrections::Auto);
        prop_assert!(auto.f_total >= r.f_total - 1e-12);
    }

    #[test]
    fn qubit_inconclusive_split(ch in arb_channel(2), t in 0.0f64..=1.0) {
        let basis = build_weyl_basis(2).unwrap();
        let lam = t * lambda_max(&ch);
        let r = exact(&ch, &basis, lam, false, Corrections::Paper);
        prop_assert!((r.f_inconclusive - 2.0 * (1.0 - lam) / 3.0).abs() < 1e-9);
    }

    #[test]
    fn outcome_maps_resolve_identity((d, ch, lam) in arb_config(), residual in any::<bool>()) {
        let basis = build_weyl_basis(d).unwrap();
        let p = refine(&build_conclusive_povm(&ch, &basis, lam).unwrap(), &basis, residual);
        let mut sum = Operator::zeros(d, d);
        for (alpha, e) in p.elements().iter().enumerate() {
            let m = outcome_channel(alpha, &e.operator, &ch).unwrap();
            sum = sum.add(&m.b.adjoint().mul(&m.b).unwrap()).unwrap();
        }
        prop_assert!(sum.max_abs_diff(&Operator::identity(d)).unwrap() < 1e-10);
    }

    #[test]
    fn basis_invariance((d, ch, lam) in arb_config(), seed in any::<u64>(), residual in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let left = haar_random_unitary(d, &mut rng).unwrap();
        let right = haar_random_unitary(d, &mut rng).unwrap();
        let basis = build_weyl_basis(d).unwrap();
        let rotated = basis.conjugated(&left, &right).unwrap();
        let c = if residual { Corrections::Auto } else { Corrections::Paper };
        let a = exact(&ch, &basis, lam, residual, c);
        let b = exact(&ch, &rotated, lam, residual, c);
        prop_assert!((a.f_total - b.f_total).abs() < 1e-9);
    }

    #[test]
    fn fidelity_against_lambda(d in 2usize..=4, raw in prop::collection::vec(0.05f64..1.0, 4)) {
        let ch = channel_from(&raw[..d]);
        let basis = build_weyl_basis(d).unwrap();
        let grid = |residual: bool, c: Corrections| -> Vec<f64> {
            (0..20)
                .map(|k| exact(&ch, &basis, lambda_max(&ch) * k as f64 / 19.0, residual, c).f_total)
                .collect()
        };
        let product = grid(false, Corrections::Paper);
        prop_assert!(product.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{product:?}");
        // Σ√(d a² - λ) · Σ 1/√(d a² - λ) ≥ d² makes the residual strategy
        // non-increasing, strictly so away from the maximally entangled channel
        let residual = grid(true, Corrections::Auto);
        prop_assert!(residual.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{residual:?}");
        let spread = ch.weights().iter().fold(0.0f64, |m, w| m.max((w - 1.0 / d as f64).abs()));
        if spread > 1e-3 {
            prop_assert!(residual[19] < residual[0] - 1e-9);
        }
    }

    #[test]
    fn dilation_reproduces_direct_probabilities(d in 2usize..=3, raw in prop::collection::vec(0.05f64..1.0, 3), t in 0.0f64..=1.0, residual in any::<bool>(), seed in any::<u64>()) {
        let ch = channel_from(&raw[..d]);
        let basis = build_weyl_basis(d).unwrap();
        let p = refine(&build_conclusive_povm(&ch, &basis, t * lambda_max(&ch)).unwrap(), &basis, residual);
        let dil = dilate(&p, d).unwrap();
        let check = dil.check();
        prop_assert!(check.unitarity_error <= 1e-10 && check.max_residual <= 1e-10 && check.completeness_error <= 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = haar_random_ket(d, &mut rng).unwrap().tensor(&ch.state()).unwrap();
        let ext = dil.outcome_probabilities(&psi).unwrap();
        let id = Operator::identity(d);
        for (e, q) in p.elements().iter().zip(&ext) {
            let direct = psi.inner(&e.operator.tensor(&id).unwrap().apply(&psi).unwrap()).unwrap().re;
            prop_assert!((direct - q).abs() <= 1e-10);
        }
    }
}

/// Every field of the sampled report within 4σ of the exact one.
#[test]
fn monte_carlo_agrees_with_exact_report() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for k in 0..10 {
        let d = 2 + k % 3;
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let ch = channel_from(&raw);
        let lam = rng.random_range(0.0..=1.0) * lambda_max(&ch);
        let residual = k % 2 == 0;
        let c = if rng.random::<bool>() { Corrections::Auto } else { Corrections::Paper };
        let basis = build_weyl_basis(d).unwrap();
        let p = refine(&build_conclusive_povm(&ch, &basis, lam).unwrap(), &basis, residual);
        let ex = report(&p, &ch, &basis, c).unwrap();
        let mc = simulate(&p, &ch, &basis, c, 100_000, k as u64, &SimulationOptions::default())
            .unwrap()
            .report;
        let close = |name: &str, got: f64, want: f64, se: f64| {
            assert!(
                (got - want).abs() <= 4.0 * se + 1e-12,
                "config {k} {name}: {got} vs {want} (se {se})"
            );
        };
        close("f_total", mc.f_total, ex.f_total, mc.f_total_se);
        close("f_conclusive", mc.f_conclusive, ex.f_conclusive, mc.f_conclusive_se);
        close("f_inconclusive", mc.f_inconclusive, ex.f_inconclusive, mc.f_inconclusive_se);
        close("p_inconclusive", mc.p_inconclusive, ex.p_inconclusive, mc.p_inconclusive_se);
        for (o, e) in mc.outcomes.iter().zip(&ex.outcomes) {
            close("probability", o.probability, e.probability, o.probability_se);
            close("fidelity term", o.fidelity_term, e.fidelity_term, o.fidelity_term_se);
        }
        assert!(mc.conclusive_max_deviation.unwrap_or(0.0) < 1e-12);
    }
}

#[test]
fn remainder_frequency_matches_one_minus_lambda() {
    let basis = build_weyl_basis(2).unwrap();
    let ch = SchmidtChannel::from_cos_theta_c(0.6).unwrap();
    let lam = 0.25;
    let p = refine_inconclusive_product(&build_conclusive_povm(&ch, &basis, lam).unwrap()).unwrap();
    let mc = simulate(&p, &ch, &basis, Corrections::Paper, 100_000, 5, &SimulationOptions::default())
        .unwrap()
        .report;
    assert!((mc.p_inconclusive - (1.0 - lam)).abs() <= 3.0 * mc.p_inconclusive_se);
    assert!((mc.f_total - 0.75).abs() <= 3.0 * mc.f_total_se);
}

#[test]
fn simulation_does_not_depend_on_worker_count() {
    let basis = build_weyl_basis(3).unwrap();
    let ch = channel_from(&[0.5, 0.3, 0.2]);
    let p = refine_inconclusive_residual(&build_conclusive_povm(&ch, &basis, 0.3).unwrap(), &basis).unwrap();
    let opts = SimulationOptions { record_transcript: true };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate(&p, &ch, &basis, Corrections::Auto, 9_000, 17, &opts).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn dilated_monte_carlo_matches_exact() {
    let basis = build_weyl_basis(3).unwrap();
    let ch = channel_from(&[0.5, 0.3, 0.2]);
    let p = refine_inconclusive_residual(&build_conclusive_povm(&ch, &basis, 0.6).unwrap(), &basis).unwrap();
    let dil = dilate(&p, 3).unwrap();
    let ex = report(&p, &ch, &basis, Corrections::Auto).unwrap();
    let mc = dil
        .simulate(&p, &ch, &basis, Corrections::Auto, 50_000, 3, &SimulationOptions::default())
        .unwrap()
        .report;
    assert!((mc.f_total - ex.f_total).abs() <= 4.0 * mc.f_total_se);
}
