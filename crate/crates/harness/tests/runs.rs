use std::fs;

use drift_harness::config::parse_config;
use drift_harness::run::{parse_summary, run_experiment, summary_path, trace_path};
use drift_harness::sweep::{config_at, sweep, SWEEP_HEADER};
use drift_harness::{run_seed, HarnessError, SummaryRow};

const TEMPLATE: &str = r#"
horizon = 1500
seeds = [3, 1, 4, 5, 9]

[environment]
kind = "rotating"
dimension = 2
delta = 0.002

[learner]
kind = "adaptive"
"#;

fn twenty_seeds() -> String {
    TEMPLATE.replace("seeds = [3, 1, 4, 5, 9]", &format!("seeds = {:?}", (0..20).collect::<Vec<u64>>()))
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = parse_config(TEMPLATE).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out_a = run_experiment(&cfg, a.path(), true).unwrap();
    let out_b = run_experiment(&cfg, b.path(), false).unwrap();
    assert_eq!(out_a.digest, out_b.digest);
    for seed in [1, 3, 4, 5, 9] {
        let x = fs::read(trace_path(a.path(), &out_a.digest, seed)).unwrap();
        let y = fs::read(trace_path(b.path(), &out_b.digest, seed)).unwrap();
        assert_eq!(x, y, "seed {seed}");
    }
    assert_eq!(
        fs::read(&out_a.summary_path).unwrap(),
        fs::read(&out_b.summary_path).unwrap()
    );
}

#[test]
fn twenty_seeds_give_twenty_traces_and_a_matching_summary() {
    let cfg = parse_config(&twenty_seeds()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&cfg, dir.path(), true).unwrap();
    let traces = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("trace_"))
        .count();
    assert_eq!(traces, 20);
    let rows = parse_summary(&fs::read_to_string(summary_path(dir.path(), &out.digest)).unwrap()).unwrap();
    assert_eq!(rows.len(), 20);
    for (row, (seed, trace)) in rows.iter().zip(&out.traces) {
        assert_eq!(row.seed, *seed);
        assert_eq!(row.config_digest, out.digest);
        // summary totals agree with an independent run of the same seed
        let again = run_seed(&cfg, *seed).unwrap();
        assert_eq!(again.to_csv(), trace.to_csv());
        assert_eq!(*row, SummaryRow::from_trace(&out.digest, *seed, &again));
        assert_eq!(row.mistakes, again.records().iter().filter(|r| r.mistake).count());
    }
}

#[test]
fn sweep_rows_match_individual_runs() {
    let values = [0.0005, 0.004];
    let result = sweep(TEMPLATE, "delta", &values, true).unwrap();
    assert_eq!(result.axis, "environment.schedule.delta");
    assert_eq!(result.rows.len(), values.len() * 5);
    for &v in &values {
        let cfg = config_at(TEMPLATE, "delta", v).unwrap();
        assert_eq!(cfg.learner.drift, Some(v), "learner drift follows the shorthand");
        for (row, &seed) in result.rows.iter().filter(|r| r.value == v).zip(&cfg.seeds) {
            let trace = run_seed(&cfg, seed).unwrap();
            assert_eq!(row.seed, seed);
            assert_eq!(row.mistakes, trace.total_mistakes());
            assert_eq!(row.mistake_rate, trace.total_mistakes() as f64 / 1500.0);
        }
    }
    assert!(result.to_csv().starts_with(SWEEP_HEADER));
}

#[test]
fn plot_is_written_only_on_request() {
    let result = sweep(TEMPLATE, "horizon", &[200.0, 400.0], false).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let plain = result.write(dir.path(), false).unwrap();
    assert_eq!(plain.len(), 1);
    assert!(fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".svg")));
    let with_plot = result.write(dir.path(), true).unwrap();
    assert_eq!(with_plot.len(), 2);
    assert!(fs::read_to_string(&with_plot[1]).unwrap().starts_with("<svg"));
}

#[test]
fn sweep_rejects_bad_axes() {
    assert!(matches!(sweep(TEMPLATE, "learner.kind", &[1.0], false), Err(HarnessError::Invalid { .. })));
    assert!(matches!(sweep(TEMPLATE, "no.such.key", &[1.0], false), Err(HarnessError::Invalid { .. })));
    assert!(matches!(sweep(TEMPLATE, "horizon", &[1.5], false), Err(HarnessError::Invalid { .. })));
    assert!(sweep(TEMPLATE, "delta", &[], false).is_err());
    assert!(matches!(sweep(TEMPLATE, "delta", &[3.0], false), Err(HarnessError::Invalid { .. })));
}

#[test]
fn unwritable_output_dir_fails_before_running() {
    let cfg = parse_config(TEMPLATE).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    fs::write(&file, b"x").unwrap();
    let err = run_experiment(&cfg, &file.join("sub"), false).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }), "{err}");
}
