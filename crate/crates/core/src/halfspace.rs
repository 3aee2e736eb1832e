//! Polynomial-time tracking of a drifting homogeneous halfspace under the
//! uniform sphere: a modified Perceptron warm start followed by margin-based
//! batches that minimize a hinge loss inside a shrinking ball.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::environment::DriftEnvironment;
use crate::error::{invalid, DriftError, Result};
use crate::geometry::{dot, hinge_unchecked, log_cap, norm, UnitVector};
use crate::hypothesis::{HalfspaceHypothesis, Hypothesis, Label};
use crate::learner::{run_learner, OnlineLearner};
use crate::trace::RunTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// Warm-start length taken from `m0`.
    #[default]
    Practical,
    /// Warm-start length from the closed form `max{⌈128 ln 32 / c1⌉, ⌈512 ln(4/δ)⌉}`.
    Theoretical,
}

/// Tunable constants of the batch schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblParams {
    pub kappa: f64,
    /// Confidence parameter `δ`.
    pub confidence: f64,
    pub c5: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
    pub c10: f64,
    pub m0: usize,
    /// Lower clamp on `α`; keeps `K_max` finite when `Δ = 0`.
    pub alpha_floor: f64,
    pub mode: ScheduleMode,
    /// Return the last computed weight instead of the one at index `K_max - 1`.
    pub return_last: bool,
    pub hinge_budget: usize,
}

impl AblParams {
    /// Defaults with `c8 = κ` and `c9 = 1/κ³` tied to the given `κ`.
    pub fn with_kappa(kappa: f64) -> Self {
        Self {
            kappa,
            confidence: 0.05,
            c5: 1.0,
            c7: 1.0,
            c8: kappa,
            c9: 1.0 / (kappa * kappa * kappa),
            c10: PI * 2f64.sqrt() / 8.0,
            m0: 2000,
            alpha_floor: 1.0 / 16.0,
            mode: ScheduleMode::Practical,
            return_last: false,
            hinge_budget: 2000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(invalid("kappa", format!("must lie in (0, 1), got {}", self.kappa)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(invalid("confidence", format!("must lie in (0, 1), got {}", self.confidence)));
        }
        for (name, v) in [("c5", self.c5), ("c7", self.c7), ("c8", self.c8), ("c9", self.c9), ("c10", self.c10)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.alpha_floor > 0.0 && self.alpha_floor <= 1.0) {
            return Err(invalid("alpha_floor", format!("must lie in (0, 1], got {}", self.alpha_floor)));
        }
        if self.m0 < 1 {
            return Err(invalid("m0", "must be at least 1"));
        }
        if self.hinge_budget < 1 {
            return Err(invalid("hinge_budget", "must be at least 1"));
        }
        Ok(())
    }
}

impl Default for AblParams {
    fn default() -> Self {
        Self::with_kappa(0.1)
    }
}

/// Parameters of margin round `k` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblRound {
    pub k: usize,
    /// `m_k`: rounds consumed.
    pub rounds: usize,
    /// `τ_k`: hinge margin.
    pub tau: f64,
    /// `b_{k-1}`: half-width of the query band around `w_{k-1}`.
    pub band: f64,
    /// `r_k`: radius of the search ball around `w_{k-1}`.
    pub radius: f64,
    /// `δ_k`.
    pub delta: f64,
}

/// Fully derived batch schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblSchedule {
    pub dimension: usize,
    /// Drift rate `Δ` the schedule is tuned for.
    pub drift: f64,
    pub params: AblParams,
    pub alpha: f64,
    pub m0: usize,
    pub k_max: usize,
    pub rounds: Vec<AblRound>,
    /// `M`, the batch length.
    pub batch_len: usize,
}

impl AblSchedule {
    pub fn new(dimension: usize, drift: f64, params: AblParams) -> Result<Self> {
        if dimension < 1 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&drift) {
            return Err(invalid("delta", format!("drift rate must lie in [0, 1], got {drift}")));
        }
        params.validate()?;
        let d = dimension as f64;
        let kappa = params.kappa;
        let conf = params.confidence;

        let raw = params.c9 * (drift * d * log_cap(1.0 / (kappa * conf))).sqrt();
        let alpha = raw.clamp(params.alpha_floor, 1.0);
        let k_max = (1.0 / alpha).log2().ceil().max(0.0) as usize;
        let outer = (4.0 / alpha).log2().ceil();

        let m0 = match params.mode {
            ScheduleMode::Practical => params.m0,
            ScheduleMode::Theoretical => {
                let c1 = PI * PI / (d * 400.0 * 2f64.powi(15));
                let a = (128.0 / c1 * 32f64.ln()).ceil();
                let b = (512.0 * (4.0 / conf).ln()).ceil();
                a.max(b) as usize
            }
        };

        let sqrt_d = d.sqrt();
        let rounds: Vec<AblRound> = (1..=k_max)
            .map(|k| {
                let two_k = 2f64.powi(k as i32);
                let gap = outer - k as f64;
                let delta_k = conf / (gap * gap);
                AblRound {
                    k,
                    rounds: (params.c5 * (two_k / (kappa * kappa)) * d * log_cap(1.0 / (kappa * delta_k))).ceil()
                        as usize,
                    tau: params.c8 * 2f64.powi(-(k as i32)) / sqrt_d,
                    band: params.c7 * 2f64.powi(1 - k as i32) / sqrt_d,
                    radius: params.c10 * 2f64.powi(-(k as i32)),
                    delta: delta_k,
                }
            })
            .collect();
        let batch_len = m0 + rounds.iter().map(|r| r.rounds).sum::<usize>();
        Ok(Self {
            dimension,
            drift,
            params,
            alpha,
            m0,
            k_max,
            rounds,
            batch_len,
        })
    }

    /// `M₁ = M − m₀`, the rounds spent in margin batches.
    pub fn margin_rounds(&self) -> usize {
        self.batch_len - self.m0
    }

    /// Index into `w_0..w_{K_max}` of the weight returned at batch end.
    pub fn returned_index(&self) -> usize {
        if self.k_max == 0 {
            0
        } else if self.params.return_last {
            self.k_max
        } else {
            self.k_max - 1
        }
    }

    /// `key = value` lines covering every derived quantity.
    pub fn dump(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "d = {}", self.dimension);
        let _ = writeln!(s, "drift = {}", self.drift);
        let _ = writeln!(s, "confidence = {}", p.confidence);
        let _ = writeln!(s, "kappa = {}", p.kappa);
        for (k, v) in [("c5", p.c5), ("c7", p.c7), ("c8", p.c8), ("c9", p.c9), ("c10", p.c10)] {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "mode = {:?}", p.mode);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "k_max = {}", self.k_max);
        let _ = writeln!(s, "m0 = {}", self.m0);
        let _ = writeln!(s, "M = {}", self.batch_len);
        let _ = writeln!(s, "M1 = {}", self.margin_rounds());
        let _ = writeln!(s, "returned_index = {}", self.returned_index());
        for r in &self.rounds {
            let _ = writeln!(
                s,
                "round[{}] = m {} tau {} band {} radius {} delta {}",
                r.k, r.rounds, r.tau, r.band, r.radius, r.delta
            );
        }
        s
    }
}

/// Labeled points collected inside the band `|w·x| ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryBatch {
    center: UnitVector,
    band: f64,
    points: Vec<f64>,
    labels: Vec<f64>,
}

impl QueryBatch {
    pub fn new(center: UnitVector, band: f64) -> Result<Self> {
        if !(band >= 0.0) {
            return Err(invalid("band", format!("must be nonnegative, got {band}")));
        }
        Ok(Self {
            center,
            band,
            points: Vec::new(),
            labels: Vec::new(),
        })
    }

    pub fn center(&self) -> &UnitVector {
        &self.center
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn in_band(&self, x: &[f64]) -> bool {
        self.center.dot(x).abs() <= self.band
    }

    /// Stores `(x, y)` iff `x` lies in the band.
    pub fn try_push(&mut self, x: &[f64], y: Label) -> Result<bool> {
        if x.len() != self.center.dim() {
            return Err(DriftError::DimensionMismatch {
                expected: self.center.dim(),
                found: x.len(),
            });
        }
        if !self.in_band(x) {
            return Ok(false);
        }
        self.points.extend_from_slice(x);
        self.labels.push(y.value());
        Ok(true)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], Label)> {
        self.points
            .chunks_exact(self.center.dim())
            .zip(&self.labels)
            .map(|(x, &y)| (x, Label::from_sign(y)))
    }

    /// `Σ ℓ_τ(y (v·x))`.
    pub fn hinge_loss(&self, v: &[f64], tau: f64) -> f64 {
        self.points
            .chunks_exact(self.center.dim())
            .zip(&self.labels)
            .map(|(x, y)| hinge_unchecked(y * dot(v, x), tau))
            .sum()
    }

    fn loss_and_subgradient(&self, v: &[f64], tau: f64, grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        for (x, y) in self.points.chunks_exact(self.center.dim()).zip(&self.labels) {
            let margin = y * dot(v, x);
            if margin < tau {
                loss += 1.0 - margin / tau;
                let s = y / tau;
                grad.iter_mut().zip(x).for_each(|(g, xi)| *g -= s * xi);
            }
        }
        loss
    }
}

/// `w − 2(w·x)x`, the reflection across the hyperplane normal to `x`.
pub fn reflect(w: &[f64], x: &[f64]) -> Vec<f64> {
    let s = 2.0 * dot(w, x);
    w.iter().zip(x).map(|(wi, xi)| wi - s * xi).collect()
}

/// Reflects `w` through `x` when `sign(w·x) ≠ y`, otherwise returns `w`.
pub fn mod_perceptron_update(w: &UnitVector, x: &UnitVector, y: Label) -> UnitVector {
    if Label::from_sign(w.dot(x.as_slice())) == y {
        return w.clone();
    }
    UnitVector::new(reflect(w.as_slice(), x.as_slice())).unwrap_or_else(|_| w.clone())
}

/// Euclidean projection onto `{v : ‖v‖ ≤ 1, ‖v − c‖ ≤ r}` for a unit `c`.
fn project_two_balls(z: &[f64], c: &[f64], r: f64) -> Vec<f64> {
    let nz = norm(z);
    let diff: Vec<f64> = z.iter().zip(c).map(|(a, b)| a - b).collect();
    let nd = norm(&diff);
    if nz <= 1.0 && nd <= r {
        return z.to_vec();
    }
    if nz > 1.0 {
        let p: Vec<f64> = z.iter().map(|a| a / nz).collect();
        let pd: Vec<f64> = p.iter().zip(c).map(|(a, b)| a - b).collect();
        if norm(&pd) <= r {
            return p;
        }
    }
    if nd > r {
        let p: Vec<f64> = c.iter().zip(&diff).map(|(ci, di)| ci + r * di / nd).collect();
        if norm(&p) <= 1.0 {
            return p;
        }
    }
    // Both constraints active: nearest point of the circle where the spheres meet.
    let a = 1.0 - r * r / 2.0;
    let rho = (1.0 - a * a).max(0.0).sqrt();
    let along = dot(z, c);
    let mut u: Vec<f64> = z.iter().zip(c).map(|(zi, ci)| zi - along * ci).collect();
    let nu = norm(&u);
    if nu > 0.0 {
        u.iter_mut().for_each(|ui| *ui /= nu);
    } else {
        // Any direction orthogonal to c.
        let j = (0..c.len()).min_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs())).unwrap_or(0);
        u = vec![0.0; c.len()];
        u[j] = 1.0;
        let cj = c[j];
        u.iter_mut().zip(c).for_each(|(ui, ci)| *ui -= cj * ci);
        let n = norm(&u);
        u.iter_mut().for_each(|ui| *ui /= n);
    }
    c.iter().zip(&u).map(|(ci, ui)| a * ci + rho * ui).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HingeSolution {
    pub v: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
}

/// Projected subgradient descent for `Σ ℓ_τ(y (v·x))` over
/// `‖v − w_prev‖ ≤ r`, `0 < ‖v‖ ≤ 1`, with step `r/√t`; returns the best
/// iterate seen. The first iterate is `w_prev`, so an empty batch returns it.
pub fn hinge_minimize_ball(
    batch: &QueryBatch,
    w_prev: &UnitVector,
    r: f64,
    tau: f64,
    kappa: f64,
    budget: usize,
) -> Result<HingeSolution> {
    for (name, v) in [("radius", r), ("tau", tau), ("kappa", kappa)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    if w_prev.dim() != batch.center.dim() {
        return Err(DriftError::DimensionMismatch {
            expected: batch.center.dim(),
            found: w_prev.dim(),
        });
    }
    let c = w_prev.as_slice();
    let mut v = c.to_vec();
    let mut grad = vec![0.0; c.len()];
    let mut best = HingeSolution {
        v: v.clone(),
        loss: batch.hinge_loss(&v, tau),
        iterations: 0,
    };
    if batch.is_empty() {
        return Ok(best);
    }
    for t in 1..=budget {
        let loss = batch.loss_and_subgradient(&v, tau, &mut grad);
        if loss < best.loss {
            best = HingeSolution {
                v: v.clone(),
                loss,
                iterations: t - 1,
            };
        }
        let g = norm(&grad);
        if g == 0.0 {
            break;
        }
        let step = r / (t as f64).sqrt() / g;
        let z: Vec<f64> = v.iter().zip(&grad).map(|(vi, gi)| vi - step * gi).collect();
        let next = project_two_balls(&z, c, r);
        if norm(&next) > 0.0 {
            v = next;
        }
    }
    let loss = batch.hinge_loss(&v, tau);
    if loss < best.loss {
        best = HingeSolution {
            v,
            loss,
            iterations: budget,
        };
    }
    Ok(best)
}

fn play_round(
    env: &mut dyn DriftEnvironment,
    predictor: &Hypothesis,
    trace: &mut RunTrace,
    query: impl FnOnce(&[f64]) -> bool,
) -> Result<(Vec<f64>, Label, bool)> {
    let e = env.advance();
    let mistake = predictor.predict(&e.x) != e.y;
    let error = e.exact_error(predictor)?;
    let queried = query(&e.x);
    trace.push(mistake, queried, error);
    Ok((e.x, e.y, queried))
}

/// Runs `m0` rounds predicting with `predictor` and querying every label;
/// the internal weight starts at `start` and is reflected on its own mistakes.
pub fn mod_perceptron_init(
    env: &mut dyn DriftEnvironment,
    m0: usize,
    predictor: &Hypothesis,
    start: UnitVector,
) -> Result<(UnitVector, RunTrace)> {
    if m0 < 1 {
        return Err(invalid("m0", "must be at least 1"));
    }
    let mut w = start.into_inner();
    let mut trace = RunTrace::with_capacity(m0);
    for _ in 0..m0 {
        let (x, y, _) = play_round(env, predictor, &mut trace, |_| true)?;
        if Label::from_sign(dot(&w, &x)) != y {
            w = reflect(&w, &x);
        }
    }
    Ok((UnitVector::new(w)?, trace))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblOutcome {
    pub hypothesis: HalfspaceHypothesis,
    pub queries: usize,
    /// `w_0, …, w_{K_max}`.
    pub weights: Vec<UnitVector>,
    pub trace: RunTrace,
}

/// Runs the `K_max` margin rounds of one batch starting from `w0`.
pub fn abl_batch(
    env: &mut dyn DriftEnvironment,
    predictor: &Hypothesis,
    schedule: &AblSchedule,
    w0: UnitVector,
) -> Result<AblOutcome> {
    let mut weights = vec![w0];
    let mut trace = RunTrace::with_capacity(schedule.margin_rounds());
    for round in &schedule.rounds {
        let w_prev = weights.last().unwrap().clone();
        let mut batch = QueryBatch::new(w_prev.clone(), round.band)?;
        for _ in 0..round.rounds {
            let (x, y, queried) = play_round(env, predictor, &mut trace, |x| batch.in_band(x))?;
            if queried {
                batch.try_push(&x, y)?;
            }
        }
        weights.push(margin_step(&batch, &w_prev, round, &schedule.params)?);
    }
    Ok(AblOutcome {
        hypothesis: HalfspaceHypothesis::new(weights[schedule.returned_index()].clone()),
        queries: trace.total_queries(),
        weights,
        trace,
    })
}

fn margin_step(batch: &QueryBatch, w_prev: &UnitVector, round: &AblRound, p: &AblParams) -> Result<UnitVector> {
    let sol = hinge_minimize_ball(batch, w_prev, round.radius, round.tau, p.kappa, p.hinge_budget)?;
    UnitVector::new(sol.v)
}

enum Phase {
    Perceptron {
        w: Vec<f64>,
        left: usize,
    },
    Margin {
        /// 0-based index into `schedule.rounds`.
        idx: usize,
        weights: Vec<UnitVector>,
        batch: QueryBatch,
        left: usize,
    },
}

/// Batches of `M` rounds; each batch predicts with the previous batch's output
/// while running the warm start and the margin rounds on the stream.
pub struct DriftingHalfspaces {
    schedule: AblSchedule,
    predictor: Hypothesis,
    phase: Phase,
    batches: usize,
}

impl DriftingHalfspaces {
    pub fn new(schedule: AblSchedule) -> Result<Self> {
        let w = UnitVector::basis(schedule.dimension)?;
        Ok(Self {
            phase: Phase::Perceptron {
                w: w.as_slice().to_vec(),
                left: schedule.m0,
            },
            predictor: Hypothesis::Halfspace(HalfspaceHypothesis::new(w)),
            schedule,
            batches: 0,
        })
    }

    pub fn schedule(&self) -> &AblSchedule {
        &self.schedule
    }

    /// Number of completed batches.
    pub fn batches(&self) -> usize {
        self.batches
    }

    fn start_margin(&self, w0: UnitVector) -> Result<Phase> {
        let round = &self.schedule.rounds[0];
        Ok(Phase::Margin {
            idx: 0,
            batch: QueryBatch::new(w0.clone(), round.band)?,
            weights: vec![w0],
            left: round.rounds,
        })
    }

    fn finish_batch(&mut self, weights: Vec<UnitVector>) {
        let w = weights[self.schedule.returned_index()].clone();
        self.phase = Phase::Perceptron {
            w: w.as_slice().to_vec(),
            left: self.schedule.m0,
        };
        self.predictor = Hypothesis::Halfspace(HalfspaceHypothesis::new(w));
        self.batches += 1;
    }
}

impl OnlineLearner for DriftingHalfspaces {
    fn name(&self) -> &'static str {
        "drifting_halfspaces"
    }

    fn current(&self) -> &Hypothesis {
        &self.predictor
    }

    fn wants_label(&mut self, x: &[f64]) -> bool {
        match &self.phase {
            Phase::Perceptron { .. } => true,
            Phase::Margin { batch, .. } => batch.in_band(x),
        }
    }

    fn update(&mut self, x: &[f64], label: Option<Label>) -> Result<()> {
        match &mut self.phase {
            Phase::Perceptron { w, left } => {
                let y = label.ok_or_else(|| DriftError::InvalidState("warm start needs every label".into()))?;
                if x.len() != w.len() {
                    return Err(DriftError::DimensionMismatch {
                        expected: w.len(),
                        found: x.len(),
                    });
                }
                if Label::from_sign(dot(w, x)) != y {
                    *w = reflect(w, x);
                }
                *left -= 1;
                if *left == 0 {
                    let w0 = UnitVector::new(std::mem::take(w))?;
                    if self.schedule.k_max == 0 {
                        self.finish_batch(vec![w0]);
                    } else {
                        self.phase = self.start_margin(w0)?;
                    }
                }
            }
            Phase::Margin {
                idx,
                weights,
                batch,
                left,
            } => {
                if let Some(y) = label {
                    batch.try_push(x, y)?;
                }
                *left -= 1;
                if *left == 0 {
                    let round = self.schedule.rounds[*idx];
                    let w_k = margin_step(batch, weights.last().unwrap(), &round, &self.schedule.params)?;
                    weights.push(w_k.clone());
                    *idx += 1;
                    if *idx == self.schedule.k_max {
                        let weights = std::mem::take(weights);
                        self.finish_batch(weights);
                    } else {
                        let next = self.schedule.rounds[*idx];
                        *batch = QueryBatch::new(w_k, next.band)?;
                        *left = next.rounds;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Plays `horizon` rounds of [`DriftingHalfspaces`]; a trailing partial batch is allowed.
pub fn run_drifting_halfspaces(
    env: &mut dyn DriftEnvironment,
    horizon: usize,
    schedule: AblSchedule,
) -> Result<RunTrace> {
    if env.dimension() != schedule.dimension {
        return Err(DriftError::DimensionMismatch {
            expected: schedule.dimension,
            found: env.dimension(),
        });
    }
    let mut learner = DriftingHalfspaces::new(schedule)?;
    run_learner(env, &mut learner, horizon)
}
