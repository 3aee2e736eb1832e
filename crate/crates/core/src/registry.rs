//! Name → constructor table for learners.

use serde::{Deserialize, Serialize};

use crate::active::{ActiveConfig, DriftingActive};
use crate::environment::DriftSchedule;
use crate::error::{invalid, DriftError, Result};
use crate::halfspace::{AblParams, AblSchedule, DriftingHalfspaces};
use crate::hypothesis::FiniteClass;
use crate::learner::OnlineLearner;
use crate::window::{erm_class, AdaptiveConfig, AdaptiveWindowLearner, NonadaptiveWindowLearner};

/// Everything a learner factory may read. Each learner uses its own section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: String,
    /// Window-ERM class name for the window learners.
    pub erm_class: String,
    /// Drift rate the schedule-tuned learners are configured for.
    pub drift: f64,
    pub window: AdaptiveConfig,
    pub halfspace: AblParams,
    pub active: ActiveConfig,
}

impl LearnerSpec {
    pub fn new(kind: impl Into<String>, drift: f64) -> Self {
        Self {
            kind: kind.into(),
            erm_class: "halfspace_2d".into(),
            drift,
            window: AdaptiveConfig::default(),
            halfspace: AblParams::default(),
            active: ActiveConfig::default(),
        }
    }
}

/// Properties of the environment a learner is built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerContext<'a> {
    pub dimension: usize,
    pub schedule: &'a DriftSchedule,
}

pub type LearnerFactory = fn(&LearnerSpec, &LearnerContext) -> Result<Box<dyn OnlineLearner>>;

pub struct LearnerRegistry {
    entries: Vec<(&'static str, LearnerFactory)>,
}

fn check_erm_dimension(spec: &LearnerSpec, ctx: &LearnerContext) -> Result<()> {
    let class = erm_class(&spec.erm_class)?;
    if class.dimension() != ctx.dimension {
        return Err(invalid(
            "erm_class",
            format!("`{}` works in d = {}, environment has d = {}", spec.erm_class, class.dimension(), ctx.dimension),
        ));
    }
    Ok(())
}

impl Default for LearnerRegistry {
    fn default() -> Self {
        let mut r = Self { entries: Vec::new() };
        r.register("adaptive", |spec, ctx| {
            check_erm_dimension(spec, ctx)?;
            Ok(Box::new(AdaptiveWindowLearner::new(erm_class(&spec.erm_class)?, spec.window)?))
        });
        r.register("nonadaptive", |spec, ctx| {
            check_erm_dimension(spec, ctx)?;
            Ok(Box::new(NonadaptiveWindowLearner::new(
                erm_class(&spec.erm_class)?,
                *ctx.schedule,
                spec.window.vc_dim,
            )?))
        });
        r.register("drifting_halfspaces", |spec, ctx| {
            let schedule = AblSchedule::new(ctx.dimension, spec.drift, spec.halfspace.clone())?;
            Ok(Box::new(DriftingHalfspaces::new(schedule)?))
        });
        r.register("drifting_active", |spec, ctx| {
            if ctx.dimension != 2 {
                return Err(invalid("dimension", "drifting_active uses a planar angle grid (d = 2)"));
            }
            let schedule = spec.active.schedule(ctx.dimension, spec.drift)?;
            let class = FiniteClass::angle_grid(spec.active.grid_size)?;
            Ok(Box::new(DriftingActive::new(class, schedule)))
        });
        r
    }
}

impl LearnerRegistry {
    pub fn register(&mut self, name: &'static str, factory: LearnerFactory) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, factory));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn build(&self, spec: &LearnerSpec, ctx: &LearnerContext) -> Result<Box<dyn OnlineLearner>> {
        let (_, factory) = self
            .entries
            .iter()
            .find(|(n, _)| *n == spec.kind)
            .ok_or_else(|| DriftError::UnknownName {
                registry: "learner",
                name: spec.kind.clone(),
            })?;
        factory(spec, ctx)
    }
}
