//! Experiment configuration: a TOML document with one section per module.
//!
//! Parsing rejects unknown keys and materializes every default, so the
//! serialized form of a parsed config parses back to the same value.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use drift_core::active::ActiveConfig;
use drift_core::halfspace::{AblParams, ScheduleMode};
use drift_core::window::AdaptiveConfig;
use drift_core::{
    DriftError, DriftSchedule, EnvironmentRegistry, EnvironmentSpec, LearnerContext, LearnerRegistry, LearnerSpec,
    WalkSupport,
};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub horizon: usize,
    pub seeds: Vec<u64>,
    /// Excluded from the digest. Falls back to `DRIFT_OUTPUT_DIR`, then `drift-output`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub environment: EnvironmentSection,
    pub learner: LearnerSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub kind: String,
    #[serde(default)]
    pub dimension: Option<usize>,
    /// Shorthand for a constant schedule; folded into `schedule` on parse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub schedule: Option<DriftSchedule>,
    #[serde(default)]
    pub walk_support: Option<WalkSupport>,
    #[serde(default)]
    pub forced_direction: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub kind: String,
    /// Window-ERM class; defaults from the environment's dimension.
    #[serde(default)]
    pub erm_class: Option<String>,
    /// Drift rate the schedule-tuned learners assume; defaults to the environment's.
    #[serde(default)]
    pub drift: Option<f64>,
    #[serde(default)]
    pub window: AdaptiveConfig,
    #[serde(default)]
    pub halfspace: HalfspaceSection,
    #[serde(default)]
    pub active: ActiveConfig,
}

/// [`AblParams`] with `c8 = κ` and `c9 = 1/κ³` derived when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HalfspaceSection {
    pub kappa: f64,
    pub confidence: f64,
    pub c5: f64,
    pub c7: f64,
    pub c8: Option<f64>,
    pub c9: Option<f64>,
    pub c10: f64,
    pub m0: usize,
    pub alpha_floor: f64,
    pub mode: ScheduleMode,
    pub return_last: bool,
    pub hinge_budget: usize,
}

impl Default for HalfspaceSection {
    fn default() -> Self {
        let p = AblParams::default();
        Self {
            kappa: p.kappa,
            confidence: p.confidence,
            c5: p.c5,
            c7: p.c7,
            c8: None,
            c9: None,
            c10: p.c10,
            m0: p.m0,
            alpha_floor: p.alpha_floor,
            mode: p.mode,
            return_last: p.return_last,
            hinge_budget: p.hinge_budget,
        }
    }
}

impl HalfspaceSection {
    pub fn params(&self) -> AblParams {
        let base = AblParams::with_kappa(self.kappa);
        AblParams {
            kappa: self.kappa,
            confidence: self.confidence,
            c5: self.c5,
            c7: self.c7,
            c8: self.c8.unwrap_or(base.c8),
            c9: self.c9.unwrap_or(base.c9),
            c10: self.c10,
            m0: self.m0,
            alpha_floor: self.alpha_floor,
            mode: self.mode,
            return_last: self.return_last,
            hinge_budget: self.hinge_budget,
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses, materializes defaults and validates.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    cfg.materialize()?;
    cfg.validate()?;
    Ok(cfg)
}

fn core_key(section: &str, err: DriftError) -> HarnessError {
    match err {
        DriftError::InvalidParameter { name, reason } => HarnessError::Invalid {
            key: format!("{section}.{name}"),
            reason,
        },
        other => HarnessError::Invalid {
            key: section.to_string(),
            reason: other.to_string(),
        },
    }
}

impl ExperimentConfig {
    fn materialize(&mut self) -> Result<()> {
        let env = &mut self.environment;
        match (env.delta.take(), env.schedule) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Invalid {
                    key: "environment.delta".into(),
                    reason: "give either `delta` or a `schedule` table, not both".into(),
                })
            }
            (Some(delta), None) => env.schedule = Some(DriftSchedule::constant(delta)),
            (None, None) => {
                return Err(HarnessError::Invalid {
                    key: "environment.schedule".into(),
                    reason: "missing drift schedule (`delta` or `[environment.schedule]`)".into(),
                })
            }
            (None, Some(_)) => {}
        }
        let default_dim = if env.kind == "threshold" { 1 } else { 2 };
        let dim = *env.dimension.get_or_insert(default_dim);
        env.walk_support.get_or_insert(WalkSupport::default());
        env.forced_direction.get_or_insert(false);
        let nominal = env.schedule.expect("set above").nominal_delta();

        let l = &mut self.learner;
        l.erm_class
            .get_or_insert_with(|| if dim == 1 { "threshold".into() } else { "halfspace_2d".into() });
        l.drift.get_or_insert(nominal);
        let h = &mut l.halfspace;
        h.c8.get_or_insert(h.kappa);
        h.c9.get_or_insert(1.0 / (h.kappa * h.kappa * h.kappa));
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(HarnessError::Invalid {
                key: "horizon".into(),
                reason: "must be at least 1".into(),
            });
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Invalid {
                key: "seeds".into(),
                reason: "must list at least one seed".into(),
            });
        }
        // one trace file per seed
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(HarnessError::Invalid {
                key: "seeds".into(),
                reason: format!("seed {} is listed twice", w[0]),
            });
        }
        let schedule = self.schedule();
        schedule.validate().map_err(|e| core_key("environment.schedule", e))?;
        if let Some(d) = self.learner.drift {
            if !(0.0..=1.0).contains(&d) {
                return Err(HarnessError::Invalid {
                    key: "learner.drift".into(),
                    reason: format!("must lie in [0, 1], got {d}"),
                });
            }
        }
        let env = EnvironmentRegistry::default()
            .build(&self.environment_spec(0))
            .map_err(|e| core_key("environment", e))?;
        let ctx = LearnerContext {
            dimension: env.dimension(),
            schedule: &schedule,
        };
        LearnerRegistry::default()
            .build(&self.learner_spec(), &ctx)
            .map_err(|e| core_key("learner", e))?;
        Ok(())
    }

    pub fn schedule(&self) -> DriftSchedule {
        self.environment.schedule.unwrap_or(DriftSchedule::constant(0.0))
    }

    pub fn dimension(&self) -> usize {
        self.environment.dimension.unwrap_or(2)
    }

    pub fn environment_spec(&self, seed: u64) -> EnvironmentSpec {
        EnvironmentSpec {
            kind: self.environment.kind.clone(),
            dimension: self.dimension(),
            schedule: self.schedule(),
            walk_support: self.environment.walk_support.unwrap_or_default(),
            forced_direction: self.environment.forced_direction.unwrap_or(false),
            seed,
        }
    }

    pub fn learner_spec(&self) -> LearnerSpec {
        let l = &self.learner;
        LearnerSpec {
            kind: l.kind.clone(),
            erm_class: l.erm_class.clone().unwrap_or_else(|| "halfspace_2d".into()),
            drift: l.drift.unwrap_or_else(|| self.schedule().nominal_delta()),
            window: l.window,
            halfspace: l.halfspace.params(),
            active: l.active.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the serialized config without `output_dir`.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let hash = Sha256::digest(canonical.to_toml().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
