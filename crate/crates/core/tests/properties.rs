use binarise::constructions::*;
use binarise::scenarios::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bell_binarisation_commutes_with_mixing(seed in 0u64..1000, v in 0.0f64..=1.0) {
        let family = random_bell_family(3, 2, seed).unwrap();
        let mixed_then_bin = binarise_bell(&family.at(v).unwrap()).unwrap();
        let bin_family = family.map(binarise_bell).unwrap();
        let bin_then_mixed = bin_family.at(v).unwrap();
        for (a, b) in mixed_then_bin.probabilities().iter().zip(bin_then_mixed.probabilities()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(mixed_then_bin.is_no_signaling());
    }

    #[test]
    fn binarised_click_marginals_match_outcome_probabilities(seed in 0u64..1000) {
        let family = random_bell_family(3, 2, seed).unwrap();
        let p = family.quantum();
        let bin = binarise_bell(p).unwrap();
        for x in 0..2 {
            for a in 0..3 {
                prop_assert!((bin.marginal_a(CLICK, x * 3 + a) - p.marginal_a(a, x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pm_binarisation_is_linear(seed in 0u64..1000, v in 0.0f64..=1.0) {
        let family = random_pm_family(3, 4, 2, seed).unwrap();
        let lhs = binarise_pm(&family.at(v).unwrap()).unwrap();
        let rhs = family.map(binarise_pm).unwrap().at(v).unwrap();
        for (a, b) in lhs.probabilities().iter().zip(rhs.probabilities()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn binarised_assemblage_stays_valid(seed in 0u64..1000) {
        let family = random_steering_instance(3, 2, seed, StateModel::Pure).unwrap();
        let bin = binarise_assemblage(family.quantum()).unwrap();
        prop_assert!((bin.rho_b().trace() - 1.0).abs() < 1e-9);
        prop_assert!((bin.total_trace() - bin.inputs() as f64).abs() < 1e-9);
        for op in bin.operators() {
            prop_assert!(op.min_eigenvalue() > -1e-9);
        }
    }
}
