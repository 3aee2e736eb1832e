//! Learning a drifting target concept from a stream.
//!
//! Environments emit points labeled by a target that moves by at most
//! `Δ_t` probability mass per round; learners commit to a hypothesis before
//! every point and may or may not request its label.

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod active;
pub mod environment;
pub mod error;
pub mod geometry;
pub mod halfspace;
pub mod hypothesis;
pub mod learner;
pub mod registry;
pub mod trace;
pub mod window;

pub use environment::{
    DriftEnvironment, DriftSchedule, DriftingThresholdEnv, Emission, EnvironmentRegistry, EnvironmentSpec,
    RandomWalk2dEnv, RotatingHalfspaceEnv, WalkSupport,
};
pub use error::{DriftError, Result};
pub use geometry::UnitVector;
pub use hypothesis::{FiniteClass, HalfspaceHypothesis, Hypothesis, Label, ThresholdHypothesis};
pub use learner::{run_learner, OnlineLearner};
pub use registry::{LearnerContext, LearnerRegistry, LearnerSpec};
pub use trace::RunTrace;
