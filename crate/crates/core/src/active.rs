//! Disagreement-based active learning over an explicit finite class, run in
//! fresh batches of `M` rounds with doubling epochs inside each batch.

use std::f64::consts::E;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::DriftEnvironment;
use crate::error::{invalid, DriftError, Result};
use crate::geometry::sample_unit_sphere;
use crate::hypothesis::{FiniteClass, Hypothesis, Label};
use crate::learner::{run_learner, OnlineLearner};
use crate::trace::RunTrace;

/// Alive members of a [`FiniteClass`], kept in increasing index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionSpace {
    alive: Vec<usize>,
}

impl VersionSpace {
    pub fn full(class: &FiniteClass) -> Self {
        Self {
            alive: (0..class.len()).collect(),
        }
    }

    /// Subset by index; indices are sorted and deduplicated.
    pub fn from_indices(class: &FiniteClass, mut alive: Vec<usize>) -> Result<Self> {
        alive.sort_unstable();
        alive.dedup();
        if alive.is_empty() {
            return Err(DriftError::InvalidState("version space is empty".into()));
        }
        if alive.iter().any(|&i| i >= class.len()) {
            return Err(invalid("alive", "index outside the class"));
        }
        Ok(Self { alive })
    }

    pub fn alive(&self) -> &[usize] {
        &self.alive
    }

    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.alive.binary_search(&i).is_ok()
    }
}

/// Whether two alive hypotheses disagree at `x`.
pub fn dis_membership(class: &FiniteClass, v: &VersionSpace, x: &[f64]) -> Result<bool> {
    let Some((&first, rest)) = v.alive.split_first() else {
        return Err(DriftError::InvalidState("version space is empty".into()));
    };
    let y = class.get(first).predict(x);
    Ok(rest.iter().any(|&i| class.get(i).predict(x) != y))
}

/// `log₂(1/√(dΔ)) + 2^{2k+2}·e·Δ`.
pub fn threshold_tk(k: usize, d: usize, drift: f64) -> Result<f64> {
    let dd = d as f64 * drift;
    if !(dd > 0.0 && dd <= 1.0) {
        return Err(invalid("delta", format!("d·Δ must lie in (0, 1], got {dd}")));
    }
    Ok((1.0 / dd.sqrt()).log2() + 2f64.powi(2 * k as i32 + 2) * E * drift)
}

/// Mistake counts of the alive hypotheses on `queried`, aligned with `v.alive()`.
pub fn mistake_counts(class: &FiniteClass, v: &VersionSpace, queried: &[(Vec<f64>, Label)]) -> Vec<usize> {
    v.alive
        .iter()
        .map(|&i| {
            let h = class.get(i);
            queried.iter().filter(|(x, y)| h.predict(x) != *y).count()
        })
        .collect()
}

/// Keeps the alive hypotheses whose mistakes on `queried` exceed the
/// minimum by at most `tk`; returns them with the lowest-index minimizer.
pub fn prune_version_space(
    class: &FiniteClass,
    v: &VersionSpace,
    queried: &[(Vec<f64>, Label)],
    tk: f64,
) -> Result<(VersionSpace, usize)> {
    if v.is_empty() {
        return Err(DriftError::InvalidState("version space is empty".into()));
    }
    if queried.is_empty() {
        return Ok((v.clone(), v.alive[0]));
    }
    let counts = mistake_counts(class, v, queried);
    let (best_pos, &best) = counts
        .iter()
        .enumerate()
        .min_by_key(|&(i, c)| (*c, i))
        .expect("nonempty");
    let alive = v
        .alive
        .iter()
        .zip(&counts)
        .filter(|&(_, &c)| (c - best) as f64 <= tk)
        .map(|(&i, _)| i)
        .collect();
    Ok((VersionSpace { alive }, v.alive[best_pos]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActiveConfig {
    /// Batch constant `c₁`.
    pub c1: f64,
    /// Resolution of the planar angle grid used as the class.
    pub grid_size: usize,
}

impl Default for ActiveConfig {
    fn default() -> Self {
        Self {
            c1: 1.0,
            grid_size: 1024,
        }
    }
}

impl ActiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(invalid("c1", format!("must be positive, got {}", self.c1)));
        }
        if self.grid_size < 1 {
            return Err(invalid("grid_size", "must be at least 1"));
        }
        Ok(())
    }

    pub fn schedule(&self, dimension: usize, drift: f64) -> Result<ActiveSchedule> {
        ActiveSchedule::new(self, dimension, drift)
    }
}

/// Derived batch structure: `M` and the per-epoch thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSchedule {
    pub dimension: usize,
    pub drift: f64,
    pub c1: f64,
    /// `M = ⌈c₁√(d/Δ)⌉₂`, at least 4.
    pub batch_len: usize,
    /// `T̂_k` for epochs `k = 0..log₂(M/2)`.
    pub thresholds: Vec<f64>,
}

impl ActiveSchedule {
    pub fn new(cfg: &ActiveConfig, dimension: usize, drift: f64) -> Result<Self> {
        cfg.validate()?;
        if dimension < 1 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        let raw = cfg.c1 * (dimension as f64 / drift).sqrt();
        if !(drift > 0.0) || !raw.is_finite() || raw > (1u64 << 40) as f64 {
            return Err(invalid("delta", format!("drift rate {drift} gives no finite batch length")));
        }
        let batch_len = (raw.ceil().max(1.0) as usize).next_power_of_two().max(4);
        let epochs = batch_len.trailing_zeros() as usize;
        let thresholds = (0..epochs)
            .map(|k| threshold_tk(k, dimension, drift))
            .collect::<Result<_>>()?;
        Ok(Self {
            dimension,
            drift,
            c1: cfg.c1,
            batch_len,
            thresholds,
        })
    }

    pub fn epochs(&self) -> usize {
        self.thresholds.len()
    }

    /// Epoch of 1-based in-batch round `s`; `None` for round 1.
    pub fn epoch_of(s: usize) -> Option<usize> {
        (s >= 2).then(|| (usize::BITS - (s - 1).leading_zeros() - 1) as usize)
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d = {}", self.dimension);
        let _ = writeln!(s, "drift = {}", self.drift);
        let _ = writeln!(s, "c1 = {}", self.c1);
        let _ = writeln!(s, "M = {}", self.batch_len);
        let _ = writeln!(s, "epochs = {}", self.epochs());
        for (k, t) in self.thresholds.iter().enumerate() {
            let _ = writeln!(s, "T[{k}] = {t}");
        }
        s
    }
}

/// Outcome of one epoch, kept for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub batch: usize,
    pub k: usize,
    pub rounds: usize,
    pub queries: usize,
    pub alive_before: usize,
    pub alive_after: usize,
    pub best: usize,
}

pub struct DriftingActive {
    class: FiniteClass,
    schedule: ActiveSchedule,
    version: VersionSpace,
    queried: Vec<(Vec<f64>, Label)>,
    best: usize,
    /// 1-based position of the upcoming round in its batch.
    s: usize,
    batch: usize,
    epoch_rounds: usize,
    log: Vec<EpochRecord>,
}

impl DriftingActive {
    pub fn new(class: FiniteClass, schedule: ActiveSchedule) -> Self {
        Self {
            version: VersionSpace::full(&class),
            class,
            schedule,
            queried: Vec::new(),
            best: 0,
            s: 1,
            batch: 0,
            epoch_rounds: 0,
            log: Vec::new(),
        }
    }

    pub fn version_space(&self) -> &VersionSpace {
        &self.version
    }

    pub fn class(&self) -> &FiniteClass {
        &self.class
    }

    pub fn schedule(&self) -> &ActiveSchedule {
        &self.schedule
    }

    pub fn epoch_log(&self) -> &[EpochRecord] {
        &self.log
    }
}

impl OnlineLearner for DriftingActive {
    fn name(&self) -> &'static str {
        "drifting_active"
    }

    fn current(&self) -> &Hypothesis {
        self.class.get(self.best)
    }

    fn wants_label(&mut self, x: &[f64]) -> bool {
        // A singleton or an empty region never asks; errors only arise on an empty space.
        self.s >= 2 && dis_membership(&self.class, &self.version, x).unwrap_or(false)
    }

    fn update(&mut self, x: &[f64], label: Option<Label>) -> Result<()> {
        if let Some(y) = label {
            self.queried.push((x.to_vec(), y));
        }
        let s = self.s;
        if s >= 2 {
            self.epoch_rounds += 1;
        }
        // epoch k ends at round 2^{k+1}
        if s >= 2 && s.is_power_of_two() {
            let k = s.trailing_zeros() as usize - 1;
            let tk = self.schedule.thresholds[k];
            let (next, best) = prune_version_space(&self.class, &self.version, &self.queried, tk)?;
            self.log.push(EpochRecord {
                batch: self.batch,
                k,
                rounds: self.epoch_rounds,
                queries: self.queried.len(),
                alive_before: self.version.len(),
                alive_after: next.len(),
                best,
            });
            self.version = next;
            self.best = best;
            self.queried.clear();
            self.epoch_rounds = 0;
        }
        if s == self.schedule.batch_len {
            self.version = VersionSpace::full(&self.class);
            self.best = 0;
            self.s = 1;
            self.batch += 1;
        } else {
            self.s += 1;
        }
        Ok(())
    }
}

pub fn run_drifting_active(
    env: &mut dyn DriftEnvironment,
    horizon: usize,
    schedule: ActiveSchedule,
    class: FiniteClass,
) -> Result<RunTrace> {
    let mut learner = DriftingActive::new(class, schedule);
    run_learner(env, &mut learner, horizon)
}

/// A draw from the marginal matching the hypothesis kind: uniform sphere
/// for halfspaces, uniform `[0, 1]` for thresholds.
pub fn sample_matching_point<R: Rng + ?Sized>(h: &Hypothesis, rng: &mut R) -> Result<Vec<f64>> {
    match h {
        Hypothesis::Halfspace(hs) => Ok(sample_unit_sphere(hs.weight.dim(), rng)?.into_inner()),
        Hypothesis::Threshold(_) => Ok(vec![rng.random::<f64>()]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    pub r: f64,
    pub ball_size: usize,
    /// Monte Carlo estimate of `P(DIS(B(h, r)))`.
    pub dis_mass: f64,
    pub ratio: f64,
    /// `1.96·√(p(1−p)/n)/r`.
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEstimate {
    pub theta: f64,
    pub half_width: f64,
    pub points: Vec<ThetaPoint>,
}

/// `max_r P(DIS(B(h, r)))/r` over `r_grid`, with `B(h, r)` formed from the
/// exact pairwise distances and the DIS mass estimated from `n` draws.
pub fn estimate_disagreement_coefficient(
    class: &FiniteClass,
    h: &Hypothesis,
    r0: f64,
    r_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<ThetaEstimate> {
    if r_grid.is_empty() {
        return Err(invalid("r_grid", "must be nonempty"));
    }
    if !(r0 > 0.0) {
        return Err(invalid("r0", format!("must be positive, got {r0}")));
    }
    if let Some(r) = r_grid.iter().find(|&&r| !(r > r0)) {
        return Err(invalid("r_grid", format!("radius {r} does not exceed r0 = {r0}")));
    }
    if n < 1 {
        return Err(invalid("samples", "must be at least 1"));
    }
    let dist: Vec<f64> = class
        .hypotheses()
        .iter()
        .map(|g| g.disagreement(h))
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(r_grid.len());
    for (j, &r) in r_grid.iter().enumerate() {
        let ball: Vec<usize> = (0..class.len()).filter(|&i| dist[i] <= r).collect();
        let dis_mass = if ball.len() < 2 {
            0.0
        } else {
            let v = VersionSpace { alive: ball.clone() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let mut hits = 0usize;
            for _ in 0..n {
                let x = sample_matching_point(h, &mut rng)?;
                hits += dis_membership(class, &v, &x)? as usize;
            }
            hits as f64 / n as f64
        };
        points.push(ThetaPoint {
            r,
            ball_size: ball.len(),
            dis_mass,
            ratio: dis_mass / r,
            half_width: 1.96 * (dis_mass * (1.0 - dis_mass) / n as f64).sqrt() / r,
        });
    }
    let best = points
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .expect("nonempty grid");
    Ok(ThetaEstimate {
        theta: best.ratio,
        half_width: best.half_width,
        points,
    })
}
