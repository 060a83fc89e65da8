mod common;

use common::{params, qubit_hamiltonian, simplex};
use proptest::prelude::*;
use qle_core::info::{
    build_cq_state, conditional_entropy_cost, cq_entropies, joint_distribution, mi_via_density_matrices,
    mutual_information,
};
use qle_core::linalg::{shannon_entropy, HermitianMatrix};
use qle_core::model::HypothesisSet;

/// Random hypothesis set with 2 to 6 members and random weights.
fn instance() -> impl Strategy<Value = (HypothesisSet, Vec<f64>)> {
    (2usize..=6).prop_flat_map(|n| {
        (prop::collection::vec(qubit_hamiltonian(), n), simplex(n)).prop_filter_map("degenerate set", |(hs, w)| {
            let named: Vec<(String, HermitianMatrix)> =
                hs.into_iter().enumerate().map(|(i, h)| (format!("h{i}"), h)).collect();
            HypothesisSet::new(named).ok().map(|s| (s, w))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn dense_oracle_matches_classical_formula((set, w) in instance(), p in params(10.0)) {
        let cq = build_cq_state(&set, &w, &p).unwrap();
        let e = cq_entropies(&cq).unwrap();
        let joint = joint_distribution(&set, &w, &p);
        prop_assert!((mi_via_density_matrices(&cq).unwrap() - mutual_information(&joint)).abs() <= 1e-9);
        prop_assert!((e.joint - shannon_entropy(&w)).abs() <= 1e-9);
        prop_assert!(e.discord >= -1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn information_bounds_and_duality((set, w) in instance(), p in params(10.0)) {
        let joint = joint_distribution(&set, &w, &p);
        let mi = mutual_information(&joint);
        let hf = shannon_entropy(&w);
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= hf.min(1.0) + 1e-9);
        prop_assert!((mi + conditional_entropy_cost(&joint) - hf).abs() <= 1e-12);
    }

    #[test]
    fn outcome_labels_do_not_matter((set, w) in instance(), p in params(10.0)) {
        let joint = joint_distribution(&set, &w, &p);
        let swapped = joint.permute_outcomes(&[1, 0]);
        prop_assert!((conditional_entropy_cost(&joint) - conditional_entropy_cost(&swapped)).abs() <= 1e-12);
        prop_assert!((mutual_information(&joint) - mutual_information(&swapped)).abs() <= 1e-12);
    }
}
