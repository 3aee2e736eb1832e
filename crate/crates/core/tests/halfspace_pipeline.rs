use drift_core::geometry::{halfspace_disagreement, sample_unit_sphere};
use drift_core::halfspace::*;
use drift_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Delegates to an environment while remembering every emitted point.
struct Recording<E> {
    inner: E,
    points: Vec<Vec<f64>>,
}

impl<E: DriftEnvironment> DriftEnvironment for Recording<E> {
    fn name(&self) -> &'static str {
        self.inner.name()
    }
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn schedule(&self) -> &DriftSchedule {
        self.inner.schedule()
    }
    fn round(&self) -> usize {
        self.inner.round()
    }
    fn target(&self) -> &Hypothesis {
        self.inner.target()
    }
    fn advance(&mut self) -> Emission {
        let e = self.inner.advance();
        self.points.push(e.x.clone());
        e
    }
}

fn pilot_params() -> AblParams {
    AblParams {
        c9: 4.0,
        c5: 0.05,
        m0: 100,
        ..AblParams::default()
    }
}

#[test]
fn warm_start_reaches_one_sixteenth_on_static_targets() {
    let mut good = 0;
    for seed in 0..100u64 {
        let mut env = RotatingHalfspaceEnv::new(10, DriftSchedule::constant(0.0), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let start = sample_unit_sphere(10, &mut rng).unwrap();
        let predictor = Hypothesis::Halfspace(HalfspaceHypothesis::new(start.clone()));
        let target = env.target().as_halfspace().unwrap().weight.clone();
        let (w, trace) = mod_perceptron_init(&mut env, 2000, &predictor, start).unwrap();
        assert_eq!(trace.len(), 2000);
        good += (halfspace_disagreement(&w, &target).unwrap() <= 1.0 / 16.0) as usize;
    }
    assert!(good >= 95, "{good}/100");
}

#[test]
fn margin_queries_lie_in_their_bands() {
    let schedule = AblSchedule::new(3, 1e-4, pilot_params()).unwrap();
    assert!(schedule.k_max >= 2);
    let inner = RotatingHalfspaceEnv::new(3, DriftSchedule::constant(1e-4), 6).unwrap();
    let mut env = Recording { inner, points: Vec::new() };
    let predictor = env.target().clone();
    let w0 = UnitVector::basis(3).unwrap();
    let out = abl_batch(&mut env, &predictor, &schedule, w0).unwrap();
    assert!(out.queries <= schedule.margin_rounds());
    let mut start = 0;
    for (i, r) in schedule.rounds.iter().enumerate() {
        for j in start..start + r.rounds {
            let inside = out.weights[i].dot(&env.points[j]).abs() <= r.band;
            assert_eq!(out.trace.records()[j].queried, inside);
        }
        start += r.rounds;
    }
    assert_eq!(start, env.points.len());
}

#[test]
fn static_target_is_learned_after_the_first_batch() {
    let schedule = AblSchedule::new(2, 0.0, AblParams::default()).unwrap();
    let m = schedule.batch_len;
    for seed in 0..10 {
        let mut env = RotatingHalfspaceEnv::new(2, DriftSchedule::constant(0.0), seed).unwrap();
        let trace = run_drifting_halfspaces(&mut env, 2 * m, schedule.clone()).unwrap();
        assert!(trace.mistake_rate(m..2 * m) <= 0.05);
    }
}

#[test]
fn margin_rounds_save_labels_under_slow_drift() {
    let schedule = AblSchedule::new(2, 1e-4, pilot_params()).unwrap();
    let horizon = 10 * schedule.batch_len;
    let mut env = RotatingHalfspaceEnv::new(2, DriftSchedule::constant(1e-4), 3)
        .unwrap()
        .with_forced_direction();
    let trace = run_drifting_halfspaces(&mut env, horizon, schedule).unwrap();
    assert!(trace.total_queries() as f64 / horizon as f64 <= 0.5);
}

#[test]
fn partial_final_batch_is_allowed() {
    let schedule = AblSchedule::new(2, 1e-3, pilot_params()).unwrap();
    let mut env = RotatingHalfspaceEnv::new(2, DriftSchedule::constant(1e-3), 1).unwrap();
    let trace = run_drifting_halfspaces(&mut env, schedule.batch_len / 2, schedule).unwrap();
    assert!(!trace.is_empty());
    let mut env = RotatingHalfspaceEnv::new(3, DriftSchedule::constant(1e-3), 1).unwrap();
    let s2 = AblSchedule::new(2, 1e-3, pilot_params()).unwrap();
    assert!(run_drifting_halfspaces(&mut env, 10, s2).is_err());
}
