mod common;

use common::{max_abs_diff, simplex};
use proptest::prelude::*;
use qle_core::bayes::{bayes_update, init_weights, pgh_time, WeightVector};
use qle_core::harness::{likelihoods, set_a};
use qle_core::model::{sample_outcome, ControlParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn weights_and_likelihoods() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=8).prop_flat_map(|n| (simplex(n), prop::collection::vec(0.001f64..1.0, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn update_stays_on_simplex((w, l) in weights_and_likelihoods()) {
        let next = bayes_update(&WeightVector::new(w).unwrap(), &l).unwrap();
        prop_assert!((next.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(next.as_slice().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn likelihood_scale_cancels((w, l) in weights_and_likelihoods(), c in 1e-3f64..1e3) {
        let w = WeightVector::new(w).unwrap();
        let scaled: Vec<f64> = l.iter().map(|x| c * x).collect();
        let a = bayes_update(&w, &l).unwrap();
        let b = bayes_update(&w, &scaled).unwrap();
        prop_assert!(max_abs_diff(a.as_slice(), b.as_slice()) <= 1e-12);
    }

    #[test]
    fn pgh_time_is_positive_and_finite(w in simplex(4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = pgh_time(&set_a(), &WeightVector::new(w).unwrap(), &mut rng).unwrap();
        prop_assert!(t.is_finite() && t > 0.0);
    }
}

/// With outcomes drawn from the true hypothesis, the posterior on it rises on
/// average.
#[test]
fn true_weight_rises_on_average() {
    let set = set_a();
    let steps = 10;
    let trials = 100;
    let mut mean = vec![0.0; steps + 1];
    for truth in 0..set.len() {
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64((truth * trials + trial) as u64);
            let mut w = init_weights(&set);
            mean[0] += w.as_slice()[truth];
            for m in mean.iter_mut().skip(1) {
                let t = pgh_time(&set, &w, &mut rng).unwrap_or(1.0);
                let p = ControlParams::with_time(0.7, 1.3, 0.9, 2.1, t).unwrap();
                let outcome = sample_outcome(&set.hypotheses()[truth].outcome_probs(&p), &mut rng);
                w = bayes_update(&w, &likelihoods(&set, &p, outcome)).unwrap();
                *m += w.as_slice()[truth];
            }
        }
    }
    let n = (set.len() * trials) as f64;
    let mean: Vec<f64> = mean.into_iter().map(|x| x / n).collect();
    for k in 1..=steps {
        assert!(
            mean[k] >= mean[k - 1] - 0.01,
            "mean true weight fell at step {k}: {mean:?}"
        );
    }
    assert!(mean[steps] > mean[0] + 0.2, "{mean:?}");
}
