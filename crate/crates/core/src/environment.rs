//! Seeded drift environments.
//!
//! Every environment emits `(X_t, Y_t = h*_t(X_t))` and only then moves the
//! target to `h*_{t+1}`, keeping the step disagreement at or below `Δ_{t+1}`
//! exactly. Points and drift use independent ChaCha streams of the same
//! seed, so a learner can never perturb the stream it is evaluated on.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DriftError, Result};
use crate::geometry::{dot, sample_sphere_coords, UnitVector};
use crate::hypothesis::{HalfspaceHypothesis, Hypothesis, Label, ThresholdHypothesis};

/// The per-round drift bound `Δ_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftSchedule {
    Constant { delta: f64 },
    /// `min{scale · t^(-exponent), 1}`
    PowerDecay { scale: f64, exponent: f64 },
    /// `delta`, except every `jump_period`-th round where `Δ_t = 1`.
    ConstantWithJumps { delta: f64, jump_period: usize },
}

impl DriftSchedule {
    pub fn constant(delta: f64) -> Self {
        DriftSchedule::Constant { delta }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        match *self {
            DriftSchedule::Constant { delta } => {
                if !unit(delta) {
                    return Err(invalid("delta", format!("must lie in [0, 1], got {delta}")));
                }
            }
            DriftSchedule::PowerDecay { scale, exponent } => {
                if !(scale >= 0.0 && scale.is_finite()) {
                    return Err(invalid("scale", format!("must be nonnegative, got {scale}")));
                }
                if !(exponent >= 0.0 && exponent.is_finite()) {
                    return Err(invalid("exponent", format!("must be nonnegative, got {exponent}")));
                }
            }
            DriftSchedule::ConstantWithJumps { delta, jump_period } => {
                if !unit(delta) {
                    return Err(invalid("delta", format!("must lie in [0, 1], got {delta}")));
                }
                if jump_period == 0 {
                    return Err(invalid("jump_period", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// `Δ_t`; rounds before 2 carry no drift.
    pub fn delta_at(&self, t: usize) -> f64 {
        if t < 2 {
            return 0.0;
        }
        match *self {
            DriftSchedule::Constant { delta } => delta,
            DriftSchedule::PowerDecay { scale, exponent } => {
                (scale * (t as f64).powf(-exponent)).min(1.0)
            }
            DriftSchedule::ConstantWithJumps { delta, jump_period } => {
                if t.is_multiple_of(jump_period) {
                    1.0
                } else {
                    delta
                }
            }
        }
    }

    pub fn is_jump(&self, t: usize) -> bool {
        matches!(*self, DriftSchedule::ConstantWithJumps { jump_period, .. } if t >= 2 && t.is_multiple_of(jump_period))
    }

    /// The between-jump drift rate a learner tuned for `S_Δ` would be given.
    pub fn nominal_delta(&self) -> f64 {
        match *self {
            DriftSchedule::Constant { delta } | DriftSchedule::ConstantWithJumps { delta, .. } => delta,
            DriftSchedule::PowerDecay { scale, .. } => scale.min(1.0),
        }
    }
}

/// What an environment reveals for round `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Label,
    /// `h*_t`, kept so the round's error can be evaluated after the drift.
    pub target: Hypothesis,
}

impl Emission {
    /// `er_t(h)`, exact.
    pub fn exact_error(&self, h: &Hypothesis) -> Result<f64> {
        h.disagreement(&self.target)
    }
}

pub trait DriftEnvironment: Send {
    fn name(&self) -> &'static str;
    fn dimension(&self) -> usize;
    fn schedule(&self) -> &DriftSchedule;
    /// Index of the next round to be emitted, starting at 1.
    fn round(&self) -> usize;
    fn target(&self) -> &Hypothesis;
    /// Emits round `t` under `h*_t`, then drifts the target to `h*_{t+1}`.
    fn advance(&mut self) -> Emission;
}

fn split_rngs(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let points = ChaCha8Rng::seed_from_u64(seed);
    let mut drift = ChaCha8Rng::seed_from_u64(seed);
    drift.set_stream(1);
    (points, drift)
}

/// Homogeneous halfspaces under the uniform sphere; each step rotates the
/// target by `π·Δ_{t+1}` inside a freshly sampled plane through it.
pub struct RotatingHalfspaceEnv {
    schedule: DriftSchedule,
    weight: Vec<f64>,
    target: Hypothesis,
    /// Fixed in-plane direction when drift is forced to a single sense.
    forced_plane: Option<Vec<f64>>,
    t: usize,
    points: ChaCha8Rng,
    drift: ChaCha8Rng,
}

impl RotatingHalfspaceEnv {
    pub fn new(dim: usize, schedule: DriftSchedule, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dimension", "rotating environment needs d >= 2"));
        }
        schedule.validate()?;
        let (points, mut drift) = split_rngs(seed);
        let weight = sample_sphere_coords(dim, &mut drift);
        Ok(Self {
            schedule,
            target: halfspace(&weight),
            weight,
            forced_plane: None,
            t: 1,
            points,
            drift,
        })
    }

    /// Starts from `initial` instead of a random target.
    pub fn with_initial_target(mut self, initial: UnitVector) -> Result<Self> {
        if initial.dim() != self.weight.len() {
            return Err(DriftError::DimensionMismatch {
                expected: self.weight.len(),
                found: initial.dim(),
            });
        }
        self.weight = initial.into_inner();
        self.target = halfspace(&self.weight);
        Ok(self)
    }

    /// Rotates in one fixed plane and one fixed sense, so successive
    /// rotation angles add up.
    pub fn with_forced_direction(mut self) -> Self {
        let u = if self.weight.len() == 2 {
            vec![-self.weight[1], self.weight[0]]
        } else {
            orthogonal_direction(&self.weight, &mut self.drift)
        };
        self.forced_plane = Some(u);
        self
    }

    fn rotate(&mut self, angle: f64) {
        let u = match &self.forced_plane {
            Some(u) => u.clone(),
            None => orthogonal_direction(&self.weight, &mut self.drift),
        };
        let (s, c) = angle.sin_cos();
        let w: Vec<f64> = self.weight.iter().zip(&u).map(|(w, u)| c * w + s * u).collect();
        if let Some(plane) = &mut self.forced_plane {
            // keep the in-plane direction orthogonal to the new weight
            *plane = self.weight.iter().zip(&u).map(|(w, u)| -s * w + c * u).collect();
        }
        self.weight = normalized(w);
    }
}

impl DriftEnvironment for RotatingHalfspaceEnv {
    fn name(&self) -> &'static str {
        "rotating"
    }

    fn dimension(&self) -> usize {
        self.weight.len()
    }

    fn schedule(&self) -> &DriftSchedule {
        &self.schedule
    }

    fn round(&self) -> usize {
        self.t
    }

    fn target(&self) -> &Hypothesis {
        &self.target
    }

    fn advance(&mut self) -> Emission {
        let x = sample_sphere_coords(self.weight.len(), &mut self.points);
        let y = Label::from_sign(dot(&self.weight, &x));
        let emission = Emission {
            t: self.t,
            x,
            y,
            target: self.target.clone(),
        };
        self.t += 1;
        let delta = self.schedule.delta_at(self.t);
        if delta >= 1.0 {
            self.weight = sample_sphere_coords(self.weight.len(), &mut self.drift);
            if self.forced_plane.is_some() {
                self.forced_plane = Some(orthogonal_direction(&self.weight, &mut self.drift));
            }
        } else if delta > 0.0 {
            self.rotate(PI * delta);
        }
        self.target = halfspace(&self.weight);
        emission
    }
}

/// Which values the walk increments `B_t` take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkSupport {
    /// `B_t ∈ {0, 1}` with equal probability.
    ZeroOne,
    /// `B_t ∈ {-1, +1}` with equal probability.
    #[default]
    PlusMinus,
}

/// Planar random-walk target `φ_t = φ_{t-1} + min{Δ_t, 1/2}·π·B_t` with
/// points uniform on the unit circle.
pub struct RandomWalk2dEnv {
    schedule: DriftSchedule,
    support: WalkSupport,
    phi: f64,
    forced_step: Option<i8>,
    target: Hypothesis,
    t: usize,
    points: ChaCha8Rng,
    drift: ChaCha8Rng,
}

impl RandomWalk2dEnv {
    pub fn new(schedule: DriftSchedule, support: WalkSupport, seed: u64) -> Result<Self> {
        schedule.validate()?;
        let (points, drift) = split_rngs(seed);
        Ok(Self {
            schedule,
            support,
            phi: 0.0,
            forced_step: None,
            target: HalfspaceHypothesis::from_angle(0.0).into(),
            t: 1,
            points,
            drift,
        })
    }

    /// Replaces the random increments with a constant `B_t`.
    pub fn with_forced_step(mut self, step: i8) -> Self {
        self.forced_step = Some(step);
        self
    }

    pub fn angle(&self) -> f64 {
        self.phi
    }

    pub fn support(&self) -> WalkSupport {
        self.support
    }
}

impl DriftEnvironment for RandomWalk2dEnv {
    fn name(&self) -> &'static str {
        "random_walk"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn schedule(&self) -> &DriftSchedule {
        &self.schedule
    }

    fn round(&self) -> usize {
        self.t
    }

    fn target(&self) -> &Hypothesis {
        &self.target
    }

    fn advance(&mut self) -> Emission {
        let a: f64 = self.points.random_range(0.0..2.0 * PI);
        let x = vec![a.cos(), a.sin()];
        let y = self.target.predict(&x);
        let emission = Emission {
            t: self.t,
            x,
            y,
            target: self.target.clone(),
        };
        self.t += 1;
        let coin: bool = self.drift.random();
        let step = self.forced_step.unwrap_or(match (self.support, coin) {
            (WalkSupport::ZeroOne, c) => c as i8,
            (WalkSupport::PlusMinus, true) => 1,
            (WalkSupport::PlusMinus, false) => -1,
        });
        self.phi += self.schedule.delta_at(self.t).min(0.5) * PI * step as f64;
        self.target = HalfspaceHypothesis::from_angle(self.phi).into();
        emission
    }
}

/// Thresholds on `[0, 1]` under the uniform distribution; the cut moves by
/// `Δ_{t+1}` in a random direction, staying inside the interval.
pub struct DriftingThresholdEnv {
    schedule: DriftSchedule,
    current: ThresholdHypothesis,
    target: Hypothesis,
    t: usize,
    points: ChaCha8Rng,
    drift: ChaCha8Rng,
}

impl DriftingThresholdEnv {
    pub fn new(schedule: DriftSchedule, seed: u64) -> Result<Self> {
        schedule.validate()?;
        let (points, mut drift) = split_rngs(seed);
        let current = ThresholdHypothesis {
            cut: drift.random_range(0.0..1.0),
            polarity: Label::Positive,
        };
        Ok(Self {
            schedule,
            current,
            target: current.into(),
            t: 1,
            points,
            drift,
        })
    }

    pub fn with_initial_target(mut self, h: ThresholdHypothesis) -> Self {
        self.current = h;
        self.target = h.into();
        self
    }
}

impl DriftEnvironment for DriftingThresholdEnv {
    fn name(&self) -> &'static str {
        "threshold"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn schedule(&self) -> &DriftSchedule {
        &self.schedule
    }

    fn round(&self) -> usize {
        self.t
    }

    fn target(&self) -> &Hypothesis {
        &self.target
    }

    fn advance(&mut self) -> Emission {
        let x = vec![self.points.random_range(0.0..1.0)];
        let y = self.current.predict_scalar(x[0]);
        let emission = Emission {
            t: self.t,
            x,
            y,
            target: self.target.clone(),
        };
        self.t += 1;
        let delta = self.schedule.delta_at(self.t);
        if delta >= 1.0 {
            self.current = ThresholdHypothesis {
                cut: self.drift.random_range(0.0..1.0),
                polarity: if self.drift.random() {
                    Label::Positive
                } else {
                    Label::Negative
                },
            };
        } else if delta > 0.0 {
            let c = self.current.cut;
            let up: bool = self.drift.random();
            let (first, second) = if up { (c + delta, c - delta) } else { (c - delta, c + delta) };
            self.current.cut = if (0.0..=1.0).contains(&first) {
                first
            } else if (0.0..=1.0).contains(&second) {
                second
            } else if c > 0.5 {
                0.0
            } else {
                1.0
            };
        }
        self.target = self.current.into();
        emission
    }
}

fn halfspace(w: &[f64]) -> Hypothesis {
    HalfspaceHypothesis::new(UnitVector::new(w.to_vec()).expect("unit weight")).into()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    v.into_iter().map(|c| c / n).collect()
}

fn orthogonal_direction<R: Rng>(w: &[f64], rng: &mut R) -> Vec<f64> {
    loop {
        let g = sample_sphere_coords(w.len(), rng);
        let p = dot(&g, w);
        let u: Vec<f64> = g.iter().zip(w).map(|(g, w)| g - p * w).collect();
        let n = dot(&u, &u).sqrt();
        if n > 1e-8 {
            return u.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Everything needed to construct an environment by name.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    pub kind: String,
    pub dimension: usize,
    pub schedule: DriftSchedule,
    pub walk_support: WalkSupport,
    /// Rotating environment only: keep one rotation plane and orientation.
    pub forced_direction: bool,
    pub seed: u64,
}

pub type EnvironmentFactory = fn(&EnvironmentSpec) -> Result<Box<dyn DriftEnvironment>>;

/// Name → constructor table for environments.
pub struct EnvironmentRegistry {
    entries: Vec<(&'static str, EnvironmentFactory)>,
}

impl Default for EnvironmentRegistry {
    fn default() -> Self {
        let mut r = Self { entries: Vec::new() };
        r.register("rotating", |s| {
            let env = RotatingHalfspaceEnv::new(s.dimension, s.schedule, s.seed)?;
            Ok(Box::new(if s.forced_direction { env.with_forced_direction() } else { env }))
        });
        r.register("random_walk", |s| {
            if s.dimension != 2 {
                return Err(invalid("dimension", "random_walk is planar (d = 2)"));
            }
            Ok(Box::new(RandomWalk2dEnv::new(s.schedule, s.walk_support, s.seed)?))
        });
        r.register("threshold", |s| {
            if s.dimension != 1 {
                return Err(invalid("dimension", "threshold environment has d = 1"));
            }
            Ok(Box::new(DriftingThresholdEnv::new(s.schedule, s.seed)?))
        });
        r
    }
}

impl EnvironmentRegistry {
    pub fn register(&mut self, name: &'static str, factory: EnvironmentFactory) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, factory));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn build(&self, spec: &EnvironmentSpec) -> Result<Box<dyn DriftEnvironment>> {
        let (_, factory) = self
            .entries
            .iter()
            .find(|(n, _)| *n == spec.kind)
            .ok_or_else(|| DriftError::UnknownName {
                registry: "environment",
                name: spec.kind.clone(),
            })?;
        factory(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_disagreements(env: &mut dyn DriftEnvironment, steps: usize) -> Vec<(f64, f64)> {
        (0..steps)
            .map(|_| {
                let e = env.advance();
                let bound = env.schedule().delta_at(env.round());
                (e.target.disagreement(env.target()).unwrap(), bound)
            })
            .collect()
    }

    #[test]
    fn schedule_values() {
        let c = DriftSchedule::constant(0.3);
        assert_eq!(c.delta_at(1), 0.0);
        assert_eq!(c.delta_at(2), 0.3);
        let p = DriftSchedule::PowerDecay { scale: 4.0, exponent: 1.0 };
        assert_eq!(p.delta_at(2), 1.0);
        assert_eq!(p.delta_at(8), 0.5);
        let j = DriftSchedule::ConstantWithJumps { delta: 0.01, jump_period: 5 };
        assert_eq!(j.delta_at(5), 1.0);
        assert!(j.is_jump(10));
        assert_eq!(j.delta_at(6), 0.01);
        assert!(DriftSchedule::constant(1.5).validate().is_err());
        assert!(DriftSchedule::ConstantWithJumps { delta: 0.1, jump_period: 0 }
            .validate()
            .is_err());
    }

    #[test]
    fn zero_drift_keeps_target_fixed() {
        let mut env = RotatingHalfspaceEnv::new(4, DriftSchedule::constant(0.0), 3).unwrap();
        let first = env.target().clone();
        for _ in 0..100 {
            env.advance();
        }
        assert_eq!(env.target(), &first);
    }

    #[test]
    fn forced_rotation_angles_add() {
        let mut env = RotatingHalfspaceEnv::new(2, DriftSchedule::constant(0.1), 9)
            .unwrap()
            .with_forced_direction();
        let first = env.target().clone();
        for _ in 0..5 {
            env.advance();
        }
        assert!((first.disagreement(env.target()).unwrap() - 0.5).abs() < 1e-12);

        let mut env = RotatingHalfspaceEnv::new(6, DriftSchedule::constant(0.05), 9)
            .unwrap()
            .with_forced_direction();
        let first = env.target().clone();
        for _ in 0..7 {
            env.advance();
        }
        assert!((first.disagreement(env.target()).unwrap() - 0.35).abs() < 1e-9);
    }

    #[test]
    fn rotating_step_equals_delta() {
        let mut env = RotatingHalfspaceEnv::new(5, DriftSchedule::constant(0.01), 4).unwrap();
        for (d, bound) in step_disagreements(&mut env, 1000) {
            assert!((d - 0.01).abs() < 1e-9);
            assert_eq!(bound, 0.01);
        }
        assert!(RotatingHalfspaceEnv::new(1, DriftSchedule::constant(0.0), 0).is_err());
    }

    #[test]
    fn frozen_hypothesis_error_accumulates_linearly() {
        let mut env = RotatingHalfspaceEnv::new(2, DriftSchedule::constant(0.002), 5)
            .unwrap()
            .with_forced_direction();
        let frozen = env.target().clone();
        for _ in 0..50 {
            env.advance();
        }
        let e = env.advance();
        assert_eq!(e.t, 51);
        assert!((e.exact_error(&frozen).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn emission_oracle_endpoints() {
        let mut env = RotatingHalfspaceEnv::new(3, DriftSchedule::constant(0.05), 6).unwrap();
        for _ in 0..20 {
            let e = env.advance();
            assert_eq!(e.exact_error(&e.target).unwrap(), 0.0);
            assert!((e.exact_error(&e.target.complement()).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(e.y, e.target.predict(&e.x));
        }
    }

    #[test]
    fn random_walk_static_cases() {
        let mut env = RandomWalk2dEnv::new(DriftSchedule::constant(0.2), WalkSupport::ZeroOne, 1)
            .unwrap()
            .with_forced_step(0);
        for _ in 0..100 {
            env.advance();
        }
        assert_eq!(env.angle(), 0.0);
        let mut env =
            RandomWalk2dEnv::new(DriftSchedule::constant(0.0), WalkSupport::PlusMinus, 1).unwrap();
        for _ in 0..100 {
            env.advance();
        }
        assert_eq!(env.angle(), 0.0);
    }

    #[test]
    fn random_walk_is_unbiased() {
        let delta = 0.2;
        let n = 10_000;
        let mut env =
            RandomWalk2dEnv::new(DriftSchedule::constant(delta), WalkSupport::PlusMinus, 77).unwrap();
        for _ in 0..n {
            env.advance();
        }
        // φ_n is a sum of n independent ±0.2π steps
        let sigma = delta * PI * (n as f64).sqrt();
        assert!(env.angle().abs() < 3.0 * sigma);
        let mean_step = env.angle() / n as f64;
        assert!(mean_step.abs() < 3.0 * delta * PI / (n as f64).sqrt());
    }

    #[test]
    fn drift_constraint_holds_for_every_environment() {
        let schedules = [
            DriftSchedule::constant(0.03),
            DriftSchedule::PowerDecay { scale: 1.0, exponent: 1.0 },
            DriftSchedule::ConstantWithJumps { delta: 0.02, jump_period: 97 },
            DriftSchedule::constant(0.7),
        ];
        let registry = EnvironmentRegistry::default();
        for schedule in schedules {
            for (kind, dim) in [("rotating", 2), ("rotating", 7), ("random_walk", 2), ("threshold", 1)] {
                for support in [WalkSupport::PlusMinus, WalkSupport::ZeroOne] {
                    let spec = EnvironmentSpec {
                        kind: kind.into(),
                        dimension: dim,
                        schedule,
                        walk_support: support,
                        forced_direction: false,
                        seed: 12,
                    };
                    let mut env = registry.build(&spec).unwrap();
                    for (d, bound) in step_disagreements(env.as_mut(), 10_000) {
                        assert!(d <= bound + 1e-9, "{kind}: {d} > {bound}");
                    }
                }
            }
        }
    }

    #[test]
    fn identical_seeds_give_identical_streams() {
        let registry = EnvironmentRegistry::default();
        for (kind, dim) in [("rotating", 3), ("random_walk", 2), ("threshold", 1)] {
            let spec = EnvironmentSpec {
                kind: kind.into(),
                dimension: dim,
                schedule: DriftSchedule::ConstantWithJumps { delta: 0.01, jump_period: 500 },
                walk_support: WalkSupport::PlusMinus,
                forced_direction: kind == "rotating",
                seed: 2024,
            };
            let mut a = registry.build(&spec).unwrap();
            let mut b = registry.build(&spec).unwrap();
            for _ in 0..10_000 {
                let (ea, eb) = (a.advance(), b.advance());
                assert_eq!(ea, eb);
                assert!(ea.x.iter().zip(&eb.x).all(|(p, q)| p.to_bits() == q.to_bits()));
            }
        }
    }

    #[test]
    fn empirical_error_matches_oracle() {
        let mut env = RotatingHalfspaceEnv::new(3, DriftSchedule::constant(0.01), 8).unwrap();
        let frozen = env.target().clone();
        for _ in 0..30 {
            env.advance();
        }
        let target = env.target().clone();
        let exact = frozen.disagreement(&target).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let wrong = (0..n)
            .filter(|_| {
                let x = sample_sphere_coords(3, &mut rng);
                frozen.predict(&x) != target.predict(&x)
            })
            .count();
        assert!((wrong as f64 / n as f64 - exact).abs() < 0.01);
    }

    #[test]
    fn registry_rejects_unknown_kind() {
        let spec = EnvironmentSpec {
            kind: "nope".into(),
            dimension: 2,
            schedule: DriftSchedule::constant(0.0),
            walk_support: WalkSupport::PlusMinus,
            forced_direction: false,
            seed: 0,
        };
        assert!(matches!(
            EnvironmentRegistry::default().build(&spec),
            Err(DriftError::UnknownName { .. })
        ));
    }
}
