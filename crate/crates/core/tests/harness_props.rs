use qle_core::bayes::RunStatus;
use qle_core::harness::{
    emit_results, read_summary_json, run_suite, run_traced, set_a, HamiltonianSetPreset, Mode, NamedSet, RunRecord,
    StopRule, Strategy, SuiteConfig, CSV_HEADER,
};
use qle_core::optimizer::{AnnealConfig, GridSpec};

fn quick_anneal() -> AnnealConfig {
    AnnealConfig {
        outer_iterations: 60,
        neighbors_per_step: 4,
        restarts: 2,
        ..AnnealConfig::default()
    }
}

fn set_a_named() -> NamedSet {
    HamiltonianSetPreset::SetA.load().unwrap()
}

#[test]
fn suites_are_deterministic_with_and_without_threads() {
    let named = set_a_named();
    for strategy in [
        Strategy::Optimized(quick_anneal()),
        Strategy::GridAdaptive(GridSpec::default()),
    ] {
        let mut config = SuiteConfig::new(4, 99, 0.99, 200);
        let parallel = run_suite(&named, &strategy, &config).unwrap();
        config.parallel = false;
        let sequential = run_suite(&named, &strategy, &config).unwrap();
        let again = run_suite(&named, &strategy, &config).unwrap();
        let outcomes = |r: &[RunRecord]| r.iter().map(RunRecord::outcome).collect::<Vec<_>>();
        assert_eq!(outcomes(&parallel.records), outcomes(&sequential.records));
        assert_eq!(outcomes(&sequential.records), outcomes(&again.records));
        assert_eq!(parallel.summary, sequential.summary);
    }
}

#[test]
fn looser_threshold_never_stops_later() {
    let set = set_a();
    let strict = StopRule {
        threshold: 0.9999,
        cap: 300,
    };
    for seed in 0..10 {
        for truth in 0..set.len() {
            for strategy in [
                Strategy::Optimized(quick_anneal()),
                Strategy::Baseline(qle_core::harness::StaticAngles {
                    alpha: 0.7,
                    beta: 1.3,
                    theta: 0.9,
                    phi: 2.1,
                }),
            ] {
                let trace = run_traced(&set, truth, &strategy, strict, seed).unwrap();
                let loose = trace.stopping_iteration(0.99);
                let tight = trace.stopping_iteration(0.9999);
                if let Some((k, _)) = tight {
                    let (j, _) = loose.expect("crossing 0.9999 crosses 0.99");
                    assert!(j <= k);
                    assert_eq!(trace.weights.len(), k + 1);
                }
            }
        }
    }
}

#[test]
fn success_means_the_truth_leads() {
    let named = set_a_named();
    let config = SuiteConfig::new(5, 3, 0.99, 300);
    let res = run_suite(&named, &Strategy::Optimized(quick_anneal()), &config).unwrap();
    for r in &res.records {
        let trace = run_traced(
            &named.set,
            r.true_index,
            &Strategy::Optimized(quick_anneal()),
            config.rule,
            r.seed,
        )
        .unwrap();
        assert_eq!(trace.record.outcome(), RunRecord { trial: 0, ..r.clone() }.outcome());
        if let RunStatus::Success { iterations } = r.status {
            assert!(iterations >= 1);
            assert_eq!(trace.weights[iterations].argmax(), r.true_index);
        }
    }
}

#[test]
fn csv_and_json_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("r.csv");
    let json_path = dir.path().join("r.json");
    let named = set_a_named();
    let labels = named.set.labels();

    let res = run_suite(
        &named,
        &Strategy::GridAdaptive(GridSpec::default()),
        &SuiteConfig::new(1, 5, 0.99, 100),
    )
    .unwrap();
    let mut summary = res.summary.clone();
    summary.config = serde_json::json!({"note": "echo"});

    emit_results(&[], &summary, &labels, &csv_path, &json_path).unwrap();
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.trim_end(), CSV_HEADER.join(","));

    emit_results(&res.records[..1], &summary, &labels, &csv_path, &json_path).unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        CSV_HEADER.to_vec()
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].iter().all(|field| !field.is_empty()));
    assert_eq!(&rows[0][0], "grid_adaptive");
    assert_eq!(&rows[0][1], "A");
    assert_eq!(&rows[0][3], "sx");
    assert_eq!(&rows[0][8], "success");

    let back = read_summary_json(&json_path).unwrap();
    assert_eq!(back, summary);
    let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let entry = &raw["modes"]["grid_adaptive"]["per_hypothesis"][0];
    for key in ["label", "mean", "std", "failures"] {
        assert!(entry.get(key).is_some(), "{key}");
    }
    assert!(raw["modes"]["grid_adaptive"].get("total_mean").is_some());
    assert_eq!(raw["trials"], 1);
    assert!(summary.mode(Mode::GridAdaptive).is_some());
}

#[test]
fn failed_runs_leave_iterations_empty() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("f.csv");
    let json_path = dir.path().join("f.json");
    let named = set_a_named();
    let res = run_suite(
        &named,
        &Strategy::Optimized(quick_anneal()),
        &SuiteConfig::new(1, 0, 0.99, 1),
    )
    .unwrap();
    emit_results(&res.records, &res.summary, &named.set.labels(), &csv_path, &json_path).unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    for row in reader.records() {
        let row = row.unwrap();
        if &row[8] != "success" {
            assert_eq!(&row[7], "");
            assert!(["wrong_convergence", "exhausted"].contains(&&row[8]));
        }
    }
}

#[test]
fn unwritable_path_reports_it() {
    let named = set_a_named();
    let summary = qle_core::harness::SuiteSummary::new("A", 0.99, 1);
    let bad = std::path::Path::new("/nonexistent-dir/x.csv");
    let err = emit_results(&[], &summary, &named.set.labels(), bad, bad).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x.csv"), "{err}");
}
