//! Experiment harness: TOML configs, seeded runs with CSV output, parameter
//! sweeps and oracle cross-checks for the `drift-core` learners.

pub mod config;
pub mod error;
pub mod oracle;
pub mod run;
pub mod sweep;

pub use config::{parse_config, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use run::{run_experiment, run_seed, run_seeds, SummaryRow};
pub use sweep::{sweep, SweepResult};

use drift_core::halfspace::AblSchedule;

/// Derived schedule values of the configured learners, as `key = value` text.
pub fn schedule_report(cfg: &ExperimentConfig) -> String {
    let spec = cfg.learner_spec();
    let d = cfg.dimension();
    let mut out = format!("# learner = {}\n# config_digest = {}\n", spec.kind, cfg.digest());
    out.push_str("\n[halfspace]\n");
    match AblSchedule::new(d, spec.drift, spec.halfspace.clone()) {
        Ok(s) => out.push_str(&s.dump()),
        Err(e) => out.push_str(&format!("unavailable = \"{e}\"\n")),
    }
    out.push_str("\n[active]\n");
    match spec.active.schedule(d, spec.drift) {
        Ok(s) => out.push_str(&s.dump()),
        Err(e) => out.push_str(&format!("unavailable = \"{e}\"\n")),
    }
    out
}
