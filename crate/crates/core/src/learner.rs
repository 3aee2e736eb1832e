//! The streaming learner interface and the generic round loop.

use crate::environment::DriftEnvironment;
use crate::error::{invalid, Result};
use crate::hypothesis::{Hypothesis, Label};
use crate::trace::RunTrace;

/// A learner that commits to a hypothesis before each point is revealed.
///
/// Per round the runner reads `current()` to predict, asks `wants_label`,
/// then calls `update` with the label iff it was requested.
pub trait OnlineLearner: Send {
    fn name(&self) -> &'static str;
    /// Hypothesis deployed for the upcoming round.
    fn current(&self) -> &Hypothesis;
    fn wants_label(&mut self, x: &[f64]) -> bool;
    fn update(&mut self, x: &[f64], label: Option<Label>) -> Result<()>;
}

/// Plays `horizon` rounds of `env` against `learner`.
pub fn run_learner(
    env: &mut dyn DriftEnvironment,
    learner: &mut dyn OnlineLearner,
    horizon: usize,
) -> Result<RunTrace> {
    if horizon < 1 {
        return Err(invalid("horizon", "must be at least 1"));
    }
    let mut trace = RunTrace::with_capacity(horizon);
    for _ in 0..horizon {
        let e = env.advance();
        let h = learner.current();
        let mistake = h.predict(&e.x) != e.y;
        let error = e.exact_error(h)?;
        let queried = learner.wants_label(&e.x);
        learner.update(&e.x, queried.then_some(e.y))?;
        trace.push(mistake, queried, error);
    }
    Ok(trace)
}
