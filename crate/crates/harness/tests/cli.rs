use std::fs;
use std::process::Command;

const CONFIG: &str = r#"
horizon = 800
seeds = [7, 8]

[environment]
kind = "threshold"
delta = 0.001

[learner]
kind = "adaptive"
"#;

fn drift() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_drift"));
    c.env_remove("DRIFT_OUTPUT_DIR");
    c
}

#[test]
fn run_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out_dir = dir.path().join("out");
    let out = drift().arg("run").arg(&cfg).arg("--output-dir").arg(&out_dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.starts_with("trace_")).count(), 2);
    assert_eq!(names.iter().filter(|n| n.starts_with("summary_")).count(), 1);
}

#[test]
fn output_dir_falls_back_to_the_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out_dir = dir.path().join("from-env");
    let out = drift()
        .env("DRIFT_OUTPUT_DIR", &out_dir)
        .args(["run", cfg.to_str().unwrap(), "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read_dir(&out_dir).unwrap().count(), 2);
}

#[test]
fn bad_configs_exit_nonzero_with_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG.replace("delta = 0.001", "delta = -1.0")).unwrap();
    let out = drift().arg("run").arg(&cfg).arg("--output-dir").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("environment.schedule.delta"));

    fs::write(&cfg, CONFIG.replace("kind = \"adaptive\"", "kind = \"adaptive\"\ncolour = 3")).unwrap();
    let out = drift().arg("config").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 11"));
}

#[test]
fn sweep_plot_flag_controls_the_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    for (plot, svgs) in [(false, 0), (true, 1)] {
        let out_dir = dir.path().join(format!("plot-{plot}"));
        let mut cmd = drift();
        cmd.arg("sweep").arg(&cfg).args(["--axis", "delta", "--values", "0.001,0.01", "--output-dir"]).arg(&out_dir);
        if plot {
            cmd.arg("--plot");
        }
        assert!(cmd.output().unwrap().status.success());
        let n = fs::read_dir(&out_dir)
            .unwrap()
            .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
            .count();
        assert_eq!(n, svgs);
    }
}

#[test]
fn schedule_and_config_print_derived_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = drift().arg("schedule").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[halfspace]") && text.contains("[active]"));
    let out = drift().arg("config").arg(&cfg).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("config_digest") && text.contains("[learner.window]"));
}

#[test]
fn unknown_oracle_suite_is_rejected() {
    let out = drift().args(["oracle", "nope"]).output().unwrap();
    assert!(!out.status.success());
}
