use std::path::Path;

use rand::Rng;
use selfbackhaul::algorithms::StochConfig;
use selfbackhaul::config::NetworkConfig;
use selfbackhaul::experiment::{
    compare_partial_csi, percentages, presets, run_cells, run_experiment, stream, trial_rng, write_outputs, Algorithm,
    ClusterChoice, ExperimentSpec, SweepPoint, RESULTS_HEADER,
};

fn tiny(dir: &Path, algorithms: Vec<Algorithm>, cluster: usize, trials: usize) -> ExperimentSpec {
    let mut spec = presets::desk();
    spec.sweep = vec![SweepPoint { mbs_power_dbm: 30.0, sbs_power_dbm: 30.0, cluster: ClusterChoice::Static(cluster) }];
    spec.algorithms = algorithms;
    spec.trials = trials;
    spec.output_dir = dir.to_path_buf();
    spec.workers = 1;
    spec.stochastic = StochConfig { max_iters: 20, eval_sample_count: 20, ..StochConfig::default() };
    spec.saa_samples = 5;
    spec
}

#[test]
fn minimal_json_spec_takes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let net = serde_json::to_value(NetworkConfig::desk_scale()).unwrap();
    let text = serde_json::json!({
        "network": net,
        "sweep": [{ "mbs_power_dbm": 40.0, "sbs_power_dbm": 30.0, "cluster": 2 },
                  { "mbs_power_dbm": 40.0, "sbs_power_dbm": 30.0, "cluster": "heuristic" }],
        "algorithms": ["sinrc-slbm", "heuristic"],
        "trials": 3,
        "output_dir": "out",
    });
    let path = dir.path().join("spec.json");
    std::fs::write(&path, text.to_string()).unwrap();
    let spec = ExperimentSpec::from_json_file(&path).unwrap();
    assert_eq!(spec.trials, 3);
    assert_eq!(spec.sweep[1].cluster, ClusterChoice::Heuristic);
    assert_eq!(spec.stochastic, StochConfig::default());
    assert!(spec.write_traces);
    assert_eq!(spec, serde_json::from_str::<ExperimentSpec>(&serde_json::to_string(&spec).unwrap()).unwrap());
}

#[test]
fn invalid_specs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let good = tiny(dir.path(), vec![Algorithm::SinrcSlbm], 2, 1);
    assert!(good.validate().is_ok());
    let mut s = good.clone();
    s.trials = 0;
    assert!(s.validate().is_err());
    let mut s = good.clone();
    s.sweep.clear();
    assert!(s.validate().is_err());
    let mut s = good.clone();
    s.sweep[0].cluster = ClusterChoice::Static(5);
    assert!(s.validate().is_err());
    let mut s = good.clone();
    s.algorithms = vec![Algorithm::Dlb];
    s.sweep[0].cluster = ClusterChoice::Heuristic;
    assert!(s.validate().is_err());
}

#[test]
fn trial_streams_are_reproducible_and_distinct() {
    let draw = |t, p| trial_rng(7, t, p).random::<u64>();
    assert_eq!(draw(3, stream::CHANNELS), draw(3, stream::CHANNELS));
    assert_ne!(draw(3, stream::CHANNELS), draw(4, stream::CHANNELS));
    assert_ne!(draw(3, stream::CHANNELS), draw(3, stream::START));
    assert_ne!(trial_rng(7, 0, 0).random::<u64>(), trial_rng(8, 0, 0).random::<u64>());
}

#[test]
fn two_trials_one_point_one_algorithm_give_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny(dir.path(), vec![Algorithm::SinrcSlbm], 2, 2);
    let table = run_cells(&spec).unwrap();
    assert_eq!(table.rows.len(), 1);
    let row = &table.rows[0];
    assert_eq!((row.runs, row.failed), (2, 0));
    let obj: Vec<f64> = table.objectives(Algorithm::SinrcSlbm, 0).into_iter().map(Option::unwrap).collect();
    assert!((row.mean_rate - (obj[0] + obj[1]) / 2.0).abs() < 1e-12);
    let se = (obj[0] - obj[1]).abs() / 2.0;
    assert!((row.std_error - se).abs() < 1e-12);
    assert!((row.mean_rate_mbps - row.mean_rate * spec.network.bandwidth_hz / 1e6).abs() < 1e-9);
    assert_eq!(table.failure_fraction(), 0.0);
}

#[test]
fn adding_an_algorithm_leaves_the_others_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_cells(&tiny(dir.path(), vec![Algorithm::SinrcSlbm], 2, 2)).unwrap();
    let b = run_cells(&tiny(dir.path(), vec![Algorithm::WmmseSlbm, Algorithm::SinrcSlbm], 2, 2)).unwrap();
    assert_eq!(a.objectives(Algorithm::SinrcSlbm, 0), b.objectives(Algorithm::SinrcSlbm, 0));
    // rows come out sorted by algorithm whatever the listed order
    assert_eq!(b.rows[0].algorithm, Algorithm::SinrcSlbm);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_worker_counts() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let algs = vec![Algorithm::SinrcSlbm, Algorithm::StochasticSinrc, Algorithm::Dlb];
    let s1 = tiny(d1.path(), algs.clone(), 2, 3);
    let mut s2 = tiny(d2.path(), algs, 2, 3);
    s2.workers = 2;
    run_experiment(&s1).unwrap();
    run_experiment(&s2).unwrap();
    let read = |d: &Path| std::fs::read(d.join("results.csv")).unwrap();
    assert_eq!(read(d1.path()), read(d2.path()));
    let csv = String::from_utf8(read(d1.path())).unwrap();
    assert_eq!(csv.lines().next().unwrap(), RESULTS_HEADER.join(","));
    assert_eq!(csv.lines().count(), 4);
    let trace = |d: &Path| std::fs::read_to_string(d.join("trace_dlb_p0_t1.csv")).unwrap();
    let strip = |s: String| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(trace(d1.path())), strip(trace(d2.path())));
}

#[test]
fn summary_validates_against_the_published_schema() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny(dir.path(), vec![Algorithm::SinrcSlbm, Algorithm::Saa], 3, 2);
    let table = run_cells(&spec).unwrap();
    write_outputs(&spec, &table).unwrap();
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/summary.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let errors: Vec<String> = validator.iter_errors(&summary).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    assert_eq!(summary["runs"].as_array().unwrap().len(), 4);
    // a document missing its runs is rejected
    let mut broken = summary.clone();
    broken.as_object_mut().unwrap().remove("runs");
    assert!(!validator.is_valid(&broken));
    for r in &table.runs {
        assert!(dir.path().join(format!("trace_{}.csv", r.id())).exists());
    }
}

#[test]
fn deterministic_methods_reach_full_rate_without_unknown_links() {
    // With every SBS serving every user, all access CSI is known and the
    // partial-CSI problems coincide with the full-CSI one.
    let dir = tempfile::tempdir().unwrap();
    let n = presets::desk().network.n_sbs;
    let spec = tiny(dir.path(), vec![Algorithm::SinrcSlbm, Algorithm::Dlb, Algorithm::Saa], n, 2);
    let (_, rows) = compare_partial_csi(&spec).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let p = r.percentage.unwrap();
        assert!((p - 100.0).abs() <= 1.0, "{}: {p}", r.algorithm);
    }
    let text = std::fs::read_to_string(dir.path().join("percentages.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn comparison_needs_baseline_and_partial_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    assert!(compare_partial_csi(&tiny(dir.path(), vec![Algorithm::Dlb], 2, 1)).is_err());
    assert!(compare_partial_csi(&tiny(dir.path(), vec![Algorithm::SinrcSlbm], 2, 1)).is_err());
}

#[test]
fn percentage_is_ratio_of_matched_means() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny(dir.path(), vec![Algorithm::SinrcSlbm, Algorithm::Dlb], 2, 2);
    let table = run_cells(&spec).unwrap();
    let rows = percentages(&spec, &table);
    let base: f64 = table.objectives(Algorithm::SinrcSlbm, 0).iter().map(|v| v.unwrap()).sum();
    let part: f64 = table.objectives(Algorithm::Dlb, 0).iter().map(|v| v.unwrap()).sum();
    assert!((rows[0].percentage.unwrap() - 100.0 * part / base).abs() < 1e-9);
}

#[test]
fn presets_are_valid_and_named() {
    for name in presets::NAMES {
        let spec = presets::by_name(name).unwrap();
        spec.validate().unwrap();
    }
    assert!(presets::by_name("nope").is_none());
    let desk = presets::desk();
    assert_eq!((desk.network.n_sbs, desk.network.n_users_scheduled, desk.network.mbs_antennas), (4, 2, 8));
    assert_eq!(desk.trials, 20);
    assert!(presets::is_comparison("desk-csi") && !presets::is_comparison("desk"));
}
