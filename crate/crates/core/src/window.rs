//! Window-based ERM under drift: exact ERM for one-parameter classes, the
//! adaptive window selector and the known-drift window baseline.
//!
//! Both supported classes are parameterised by a scalar key on which every
//! labeled point switches prediction at exactly two breakpoints. Cells are
//! maximal key intervals `(lo, hi]` (or single keys `[v, v]`) of constant
//! behaviour; each point's prediction is one label on `(p1, p2]` and the
//! opposite label elsewhere.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::environment::DriftSchedule;
use crate::error::{invalid, DriftError, Result};
use crate::geometry::log_cap;
use crate::hypothesis::{HalfspaceHypothesis, Hypothesis, Label, ThresholdHypothesis};
use crate::learner::OnlineLearner;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Label,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Label) -> Self {
        Self { x, y }
    }
}

/// Observations in arrival order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    samples: Vec<Sample>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples(samples: Vec<Sample>) -> Self {
        Self { samples }
    }

    pub fn push(&mut self, sample: Sample) {
        self.samples.push(sample);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// The `m` most recent samples, oldest first.
    pub fn window(&self, m: usize) -> Result<&[Sample]> {
        if m == 0 || m > self.samples.len() {
            return Err(invalid(
                "window",
                format!("length {m} outside 1..={}", self.samples.len()),
            ));
        }
        Ok(&self.samples[self.samples.len() - m..])
    }
}

/// Position on a class's key line. Keys compare as integers so that no
/// arithmetic is ever applied to a stored cut.
pub type Key = u64;

const NEGATIVE_POLARITY: Key = 1 << 63;

/// How a labeled point cuts the key line: the class predicts `middle` on
/// keys in `(p1, p2]` and `middle.flip()` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub p1: Key,
    pub p2: Key,
    pub middle: Label,
    pub label: Label,
}

impl Cut {
    #[inline]
    fn middle_mistaken(&self) -> bool {
        self.middle != self.label
    }
}

/// A hypothesis class whose behaviour on a sample is determined by a cell of
/// a scalar key line, which is what makes exact ERM tractable.
pub trait ErmClass: Send + Sync {
    fn name(&self) -> &'static str;
    fn dimension(&self) -> usize;
    fn vc_dim(&self) -> usize;
    /// Cells before any point is seen, sorted by key.
    fn initial_cells(&self) -> Vec<(Key, Key)>;
    fn cut(&self, sample: &Sample) -> Result<Cut>;
    /// Canonical member of the cell `(lo, hi]`, or of `[lo, lo]` when `lo == hi`.
    fn representative(&self, lo: Key, hi: Key) -> Key;
    fn hypothesis(&self, key: Key) -> Hypothesis;
    /// Tie-breaking order over keys.
    fn order(&self, a: Key, b: Key) -> Ordering;

    /// The hypothesis deployed before any data arrives.
    fn canonical_first(&self) -> Hypothesis {
        let (lo, hi) = self.initial_cells()[0];
        self.hypothesis(self.representative(lo, hi))
    }
}

/// Thresholds on `[0, 1]` with either polarity; the key of `(c, ±1)` is the
/// bit pattern of `c`, with the top bit set for polarity -1.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThresholdClass;

impl ErmClass for ThresholdClass {
    fn name(&self) -> &'static str {
        "threshold"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn vc_dim(&self) -> usize {
        2
    }

    fn initial_cells(&self) -> Vec<(Key, Key)> {
        let (zero, one) = (0f64.to_bits(), 1f64.to_bits());
        vec![
            (zero, zero),
            (zero, one),
            (zero | NEGATIVE_POLARITY, zero | NEGATIVE_POLARITY),
            (zero | NEGATIVE_POLARITY, one | NEGATIVE_POLARITY),
        ]
    }

    fn cut(&self, sample: &Sample) -> Result<Cut> {
        match sample.x.as_slice() {
            // `+ 0.0` folds -0.0 into +0.0
            [x] if (0.0..=1.0).contains(x) => Ok(Cut {
                p1: (x + 0.0).to_bits(),
                p2: (x + 0.0).to_bits() | NEGATIVE_POLARITY,
                middle: Label::Negative,
                label: sample.y,
            }),
            _ => Err(invalid("x", "threshold samples are scalars in [0, 1]")),
        }
    }

    fn representative(&self, _lo: Key, hi: Key) -> Key {
        hi
    }

    fn hypothesis(&self, key: Key) -> Hypothesis {
        let (cut, polarity) = split_threshold_key(key);
        ThresholdHypothesis { cut, polarity }.into()
    }

    fn order(&self, a: Key, b: Key) -> Ordering {
        let (ca, pa) = split_threshold_key(a);
        let (cb, pb) = split_threshold_key(b);
        ca.total_cmp(&cb).then((pa == Label::Negative).cmp(&(pb == Label::Negative)))
    }
}

fn split_threshold_key(key: Key) -> (f64, Label) {
    let cut = f64::from_bits(key & !NEGATIVE_POLARITY);
    if key & NEGATIVE_POLARITY == 0 {
        (cut, Label::Positive)
    } else {
        (cut, Label::Negative)
    }
}

/// Homogeneous halfspaces in the plane keyed by normal angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Halfspace2dClass;

impl ErmClass for Halfspace2dClass {
    fn name(&self) -> &'static str {
        "halfspace_2d"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn vc_dim(&self) -> usize {
        2
    }

    fn initial_cells(&self) -> Vec<(Key, Key)> {
        vec![(0f64.to_bits(), 0f64.to_bits()), (0f64.to_bits(), TAU.to_bits())]
    }

    fn cut(&self, sample: &Sample) -> Result<Cut> {
        let [a, b] = sample.x.as_slice() else {
            return Err(invalid("x", "planar samples have two coordinates"));
        };
        if *a == 0.0 && *b == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(invalid("x", "planar samples must be finite and nonzero"));
        }
        let angle = b.atan2(*a);
        let start = wrap_angle(angle - PI / 2.0).to_bits();
        let end = wrap_angle(angle + PI / 2.0).to_bits();
        // positive on the closed arc from start to end
        Ok(if start < end {
            Cut { p1: start, p2: end, middle: Label::Positive, label: sample.y }
        } else {
            Cut { p1: end, p2: start, middle: Label::Negative, label: sample.y }
        })
    }

    fn representative(&self, lo: Key, hi: Key) -> Key {
        (0.5 * (f64::from_bits(lo) + f64::from_bits(hi))).to_bits()
    }

    fn hypothesis(&self, key: Key) -> Hypothesis {
        HalfspaceHypothesis::from_angle(f64::from_bits(key)).into()
    }

    fn order(&self, a: Key, b: Key) -> Ordering {
        a.cmp(&b)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU) + 0.0;
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Name → constructor table for ERM classes.
pub fn erm_class(name: &str) -> Result<Box<dyn ErmClass>> {
    match name {
        "threshold" => Ok(Box::new(ThresholdClass)),
        "halfspace_2d" => Ok(Box::new(Halfspace2dClass)),
        _ => Err(DriftError::UnknownName { registry: "erm class", name: name.to_string() }),
    }
}

/// Sorted behaviour cells with per-cell mistake counts and running maximum
/// ratios, stored column-wise.
#[derive(Debug, Default)]
struct Cells {
    lo: Vec<Key>,
    hi: Vec<Key>,
    rep: Vec<Key>,
    count: Vec<f64>,
    score: Vec<f64>,
}

impl Cells {
    fn reset(&mut self, class: &dyn ErmClass) {
        self.lo.clear();
        self.hi.clear();
        self.rep.clear();
        self.count.clear();
        self.score.clear();
        for (lo, hi) in class.initial_cells() {
            self.lo.push(lo);
            self.hi.push(hi);
            self.rep.push(class.representative(lo, hi));
            self.count.push(0.0);
            self.score.push(0.0);
        }
    }

    fn len(&self) -> usize {
        self.rep.len()
    }

    /// Index of the cell with `lo < p < hi`, if any.
    fn straddling(&self, p: Key) -> Option<usize> {
        let n = self.len();
        // cells are sorted and disjoint, so nothing outside the span straddles
        if p <= self.lo[0] || p >= self.hi[n - 1] {
            return None;
        }
        let j = self.hi.partition_point(|&h| h < p);
        (j < n && self.lo[j] < p && p < self.hi[j]).then_some(j)
    }

    fn split_at(&mut self, p: Key, class: &dyn ErmClass) {
        if let Some(j) = self.straddling(p) {
            let (lo, hi) = (self.lo[j], self.hi[j]);
            self.hi[j] = p;
            self.rep[j] = class.representative(lo, p);
            self.lo.insert(j + 1, p);
            self.hi.insert(j + 1, hi);
            self.rep.insert(j + 1, class.representative(p, hi));
            self.count.insert(j + 1, self.count[j]);
            self.score.insert(j + 1, self.score[j]);
        }
    }

    /// Index range of cells whose representative lies in `(p1, p2]`.
    fn middle(&self, p1: Key, p2: Key) -> (usize, usize) {
        (self.rank(p1), self.rank(p2))
    }

    /// Number of representatives `<= p`.
    #[inline]
    fn rank(&self, p: Key) -> usize {
        let n = self.len();
        if p < self.rep[0] {
            0
        } else if p >= self.rep[n - 1] {
            n
        } else {
            self.rep.partition_point(|&r| r <= p)
        }
    }

    /// Adds one mistake to `range` at level `level`; returns the largest
    /// resulting score in the range.
    fn bump(&mut self, range: std::ops::Range<usize>, level: f64) -> f64 {
        let mut worst = 0.0f64;
        for (c, s) in self.count[range.clone()].iter_mut().zip(&mut self.score[range]) {
            *c += 1.0;
            *s = s.max(*c / level);
            worst = worst.max(*s);
        }
        worst
    }

    /// Drops cells with score `>= k`; cells before `from` must all be alive.
    fn retain_below(&mut self, k: f64, from: usize) {
        let n = self.len();
        let Some(first) = self.score[from..].iter().position(|&s| s >= k) else {
            return;
        };
        let mut w = from + first;
        let mut r = w;
        while r < n {
            while r < n && self.score[r] >= k {
                r += 1;
            }
            let start = r;
            while r < n && self.score[r] < k {
                r += 1;
            }
            if start < r {
                self.lo.copy_within(start..r, w);
                self.hi.copy_within(start..r, w);
                self.rep.copy_within(start..r, w);
                self.count.copy_within(start..r, w);
                self.score.copy_within(start..r, w);
                w += r - start;
            }
        }
        self.lo.truncate(w);
        self.hi.truncate(w);
        self.rep.truncate(w);
        self.count.truncate(w);
        self.score.truncate(w);
    }

    /// Lowest count, ties by class order.
    fn best_by_count(&self, class: &dyn ErmClass) -> usize {
        (0..self.len())
            .min_by(|&a, &b| {
                self.count[a]
                    .total_cmp(&self.count[b])
                    .then_with(|| class.order(self.rep[a], self.rep[b]))
            })
            .expect("cells are never empty")
    }

    /// Lowest score, ties by class order.
    fn best_by_score(&self, class: &dyn ErmClass) -> usize {
        (0..self.len())
            .min_by(|&a, &b| {
                self.score[a]
                    .total_cmp(&self.score[b])
                    .then_with(|| class.order(self.rep[a], self.rep[b]))
            })
            .expect("cells are never empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErmResult {
    pub hypothesis: Hypothesis,
    pub mistakes: usize,
}

/// Exact empirical risk minimiser over `window`, ties by class order.
pub fn erm(class: &dyn ErmClass, window: &[Sample]) -> Result<ErmResult> {
    if window.is_empty() {
        return Err(invalid("window", "ERM needs at least one sample"));
    }
    let cuts = window.iter().map(|s| class.cut(s)).collect::<Result<Vec<_>>>()?;
    Ok(erm_cuts(class, &cuts))
}

fn erm_cuts(class: &dyn ErmClass, cuts: &[Cut]) -> ErmResult {
    let mut breaks: Vec<Key> = cuts.iter().flat_map(|c| [c.p1, c.p2]).collect();
    breaks.sort_unstable();
    breaks.dedup();

    let mut cells = Cells::default();
    for (lo, hi) in class.initial_cells() {
        let mut left = lo;
        if lo < hi {
            let from = breaks.partition_point(|&b| b <= lo);
            for &b in breaks[from..].iter().take_while(|&&b| b < hi) {
                cells.lo.push(left);
                cells.hi.push(b);
                left = b;
            }
        }
        cells.lo.push(left);
        cells.hi.push(hi);
    }
    cells.rep = cells
        .lo
        .iter()
        .zip(&cells.hi)
        .map(|(&lo, &hi)| class.representative(lo, hi))
        .collect();

    let n = cells.rep.len();
    let mut diff = vec![0i64; n + 1];
    for c in cuts {
        let (i1, i2) = cells.middle(c.p1, c.p2);
        if c.middle_mistaken() {
            diff[i1] += 1;
            diff[i2] -= 1;
        } else {
            diff[0] += 1;
            diff[i1] -= 1;
            diff[i2] += 1;
        }
    }
    let mut running = 0i64;
    cells.count = diff[..n]
        .iter()
        .map(|d| {
            running += d;
            running as f64
        })
        .collect();
    let best = cells.best_by_count(class);
    ErmResult {
        hypothesis: class.hypothesis(cells.rep[best]),
        mistakes: cells.count[best] as usize,
    }
}

/// Exact ERM over thresholds on `[0, 1]`.
pub fn erm_threshold(window: &[Sample]) -> Result<(ThresholdHypothesis, usize)> {
    let r = erm(&ThresholdClass, window)?;
    let h = *r.hypothesis.as_threshold().expect("threshold class");
    Ok((h, r.mistakes))
}

/// Exact ERM over homogeneous halfspaces in the plane.
pub fn erm_halfspace_2d(window: &[Sample]) -> Result<(HalfspaceHypothesis, usize)> {
    let r = erm(&Halfspace2dClass, window)?;
    let h = r.hypothesis.as_halfspace().expect("halfspace class").clone();
    Ok((h, r.mistakes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceSchedule {
    #[default]
    Fixed,
    /// `δ_T = 1/T` at round `T`.
    PerRound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveConfig {
    pub k: f64,
    pub delta: f64,
    pub vc_dim: usize,
    pub confidence_schedule: ConfidenceSchedule,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self { k: 8.0, delta: 0.05, vc_dim: 2, confidence_schedule: ConfidenceSchedule::Fixed }
    }
}

impl AdaptiveConfig {
    /// `K = 145c²` for a concentration constant `c`.
    pub fn theoretical_k(c: f64) -> f64 {
        145.0 * c * c
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) {
            return Err(invalid("k", format!("must be positive, got {}", self.k)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid("delta", format!("must lie in (0, 1], got {}", self.delta)));
        }
        if self.vc_dim == 0 {
            return Err(invalid("vc_dim", "must be at least 1"));
        }
        Ok(())
    }

    /// Confidence used when predicting round `t`.
    pub fn delta_at(&self, t: usize) -> f64 {
        match self.confidence_schedule {
            ConfidenceSchedule::Fixed => self.delta,
            ConfidenceSchedule::PerRound => 1.0 / t.max(1) as f64,
        }
    }

    /// `d·Log(m/d) + Log(1/δ)`.
    pub fn level(&self, m: usize, delta: f64) -> f64 {
        let d = self.vc_dim as f64;
        d * log_cap(m as f64 / d) + log_cap(1.0 / delta)
    }
}

/// `max_{m' ≤ m}` of the mistakes of `h` on the last `m'` samples over the
/// confidence level at `m'`, evaluated at the configured (fixed-round) δ.
pub fn window_score(history: &History, h: &Hypothesis, m: usize, cfg: &AdaptiveConfig) -> Result<f64> {
    window_score_at(history, h, m, cfg, cfg.delta_at(history.len() + 1))
}

fn window_score_at(history: &History, h: &Hypothesis, m: usize, cfg: &AdaptiveConfig, delta: f64) -> Result<f64> {
    let window = history.window(m)?;
    let mut mistakes = 0usize;
    let mut best = 0.0f64;
    for (i, s) in window.iter().rev().enumerate() {
        if h.predict(&s.x) != s.y {
            mistakes += 1;
            best = best.max(mistakes as f64 / cfg.level(i + 1, delta));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveFit {
    /// Selected window length `m̂`.
    pub window: usize,
    pub hypothesis: Hypothesis,
    /// Score of the hypothesis at `m̂`.
    pub score: f64,
    /// Mistakes of the hypothesis on the last `m̂` samples.
    pub mistakes: usize,
}

/// Largest window on which some hypothesis keeps every suffix ratio below
/// `K`, together with the minimum-score hypothesis on that window.
pub fn adaptive_fit(history: &History, cfg: &AdaptiveConfig, class: &dyn ErmClass) -> Result<AdaptiveFit> {
    cfg.validate()?;
    if history.is_empty() {
        return Err(invalid("history", "adaptive fit needs at least one sample"));
    }
    let cuts = history.samples().iter().map(|s| class.cut(s)).collect::<Result<Vec<_>>>()?;
    let mut search = WindowSearch::default();
    Ok(search.fit(&cuts, cfg, cfg.delta_at(history.len() + 1), class))
}

/// Reusable buffers for the backward window search.
#[derive(Debug, Default)]
struct WindowSearch {
    cells: Cells,
    /// `d·Log(m/d)` at index `m - 1`, for the `d` in `complexity_dim`.
    complexity: Vec<f64>,
    complexity_dim: usize,
}

impl WindowSearch {
    fn prepare_levels(&mut self, n: usize, d: usize) {
        if self.complexity_dim != d {
            self.complexity.clear();
            self.complexity_dim = d;
        }
        let df = d as f64;
        while self.complexity.len() < n {
            let m = self.complexity.len() + 1;
            self.complexity.push(df * log_cap(m as f64 / df));
        }
    }

    /// `cuts` oldest first, nonempty.
    fn fit(&mut self, cuts: &[Cut], cfg: &AdaptiveConfig, delta: f64, class: &dyn ErmClass) -> AdaptiveFit {
        self.prepare_levels(cuts.len(), cfg.vc_dim);
        let confidence = log_cap(1.0 / delta);
        let complexity = &self.complexity;
        // same operations as `AdaptiveConfig::level`
        let level = |m: usize| complexity[m - 1] + confidence;
        let cells = &mut self.cells;
        cells.reset(class);
        let k = cfg.k;
        let mut window = 0;
        for (i, c) in cuts.iter().rev().enumerate() {
            let m = i + 1;
            if cells.straddling(c.p1).is_none() && cells.straddling(c.p2).is_none() {
                let (i1, i2) = cells.middle(c.p1, c.p2);
                let n = cells.len();
                let (none_hit, all_hit) = if c.middle_mistaken() {
                    (i1 == i2, i1 == 0 && i2 == n)
                } else {
                    (i1 == 0 && i2 == n, i1 == i2)
                };
                if none_hit {
                    // ratios only decay when no count moves
                    window = m;
                    continue;
                }
                // stop before a step that would leave no cell below K
                if all_hit {
                    let least = cells.count.iter().copied().fold(f64::INFINITY, f64::min);
                    if (least + 1.0) / level(m) >= k {
                        break;
                    }
                }
            } else {
                cells.split_at(c.p1, class);
                cells.split_at(c.p2, class);
            }
            let (i1, i2) = cells.middle(c.p1, c.p2);
            let l = level(m);
            let (worst, from) = if c.middle_mistaken() {
                (cells.bump(i1..i2, l), i1)
            } else {
                let n = cells.len();
                (cells.bump(0..i1, l).max(cells.bump(i2..n, l)), 0)
            };
            if worst >= k {
                cells.retain_below(k, from);
            }
            debug_assert!(cells.len() > 0);
            window = m;
        }
        debug_assert!(window >= 1, "a cell consistent with one point always survives");
        let best = cells.best_by_score(class);
        AdaptiveFit {
            window,
            hypothesis: class.hypothesis(cells.rep[best]),
            score: cells.score[best],
            mistakes: cells.count[best] as usize,
        }
    }
}

/// Window length minimising the drift-plus-complexity objective
/// `(1/m)·Σ_{i=t-m}^{t-1} Σ_{j=i+1}^{t} Δ_j + d·Log(m/d)/m`, ties to the
/// smaller `m`.
pub fn nonadaptive_window(schedule: &DriftSchedule, t: usize, d: usize) -> Result<usize> {
    if t < 2 {
        return Err(invalid("t", "the window needs at least one past round (t >= 2)"));
    }
    if d == 0 {
        return Err(invalid("vc_dim", "must be at least 1"));
    }
    let mut drift = DriftPrefix::default();
    drift.extend_to(schedule, t);
    Ok(drift.best_window(t, d))
}

/// `P(k) = Σ_{j ≤ k} Δ_j` and its running sum `Q(k) = Σ_{i ≤ k} P(i)`.
#[derive(Debug, Default, Clone)]
struct DriftPrefix {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl DriftPrefix {
    fn extend_to(&mut self, schedule: &DriftSchedule, t: usize) {
        if self.p.is_empty() {
            self.p.push(0.0);
            self.q.push(0.0);
        }
        while self.p.len() <= t {
            let k = self.p.len();
            let p = self.p[k - 1] + schedule.delta_at(k);
            self.p.push(p);
            self.q.push(self.q[k - 1] + p);
        }
    }

    fn best_window(&self, t: usize, d: usize) -> usize {
        let df = d as f64;
        let mut best = (1, f64::INFINITY);
        for m in 1..t {
            // Σ_{i=t-m}^{t-1} (P(t) - P(i))
            let inner = m as f64 * self.p[t] - (self.q[t - 1] - self.q[t - m - 1]);
            let objective = inner / m as f64 + df * log_cap(m as f64 / df) / m as f64;
            if objective < best.1 {
                best = (m, objective);
            }
        }
        best.0
    }
}

/// Refits on the adaptively chosen window after every labeled point.
pub struct AdaptiveWindowLearner {
    class: Box<dyn ErmClass>,
    cfg: AdaptiveConfig,
    cuts: Vec<Cut>,
    search: WindowSearch,
    current: Hypothesis,
    last_fit: Option<AdaptiveFit>,
}

impl AdaptiveWindowLearner {
    pub fn new(class: Box<dyn ErmClass>, cfg: AdaptiveConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            current: class.canonical_first(),
            class,
            cfg,
            cuts: Vec::new(),
            search: WindowSearch::default(),
            last_fit: None,
        })
    }

    pub fn last_fit(&self) -> Option<&AdaptiveFit> {
        self.last_fit.as_ref()
    }
}

impl OnlineLearner for AdaptiveWindowLearner {
    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn current(&self) -> &Hypothesis {
        &self.current
    }

    fn wants_label(&mut self, _x: &[f64]) -> bool {
        true
    }

    fn update(&mut self, x: &[f64], label: Option<Label>) -> Result<()> {
        let Some(y) = label else { return Ok(()) };
        self.cuts.push(self.class.cut(&Sample::new(x.to_vec(), y))?);
        let delta = self.cfg.delta_at(self.cuts.len() + 1);
        let fit = self.search.fit(&self.cuts, &self.cfg, delta, self.class.as_ref());
        self.current = fit.hypothesis.clone();
        self.last_fit = Some(fit);
        Ok(())
    }
}

/// ERM on the window that is optimal for a known drift schedule.
pub struct NonadaptiveWindowLearner {
    class: Box<dyn ErmClass>,
    schedule: DriftSchedule,
    vc_dim: usize,
    cuts: Vec<Cut>,
    drift: DriftPrefix,
    current: Hypothesis,
    last_window: Option<usize>,
}

impl NonadaptiveWindowLearner {
    pub fn new(class: Box<dyn ErmClass>, schedule: DriftSchedule, vc_dim: usize) -> Result<Self> {
        schedule.validate()?;
        if vc_dim == 0 {
            return Err(invalid("vc_dim", "must be at least 1"));
        }
        Ok(Self {
            current: class.canonical_first(),
            class,
            schedule,
            vc_dim,
            cuts: Vec::new(),
            drift: DriftPrefix::default(),
            last_window: None,
        })
    }

    pub fn last_window(&self) -> Option<usize> {
        self.last_window
    }
}

impl OnlineLearner for NonadaptiveWindowLearner {
    fn name(&self) -> &'static str {
        "nonadaptive"
    }

    fn current(&self) -> &Hypothesis {
        &self.current
    }

    fn wants_label(&mut self, _x: &[f64]) -> bool {
        true
    }

    fn update(&mut self, x: &[f64], label: Option<Label>) -> Result<()> {
        let Some(y) = label else { return Ok(()) };
        self.cuts.push(self.class.cut(&Sample::new(x.to_vec(), y))?);
        let t = self.cuts.len() + 1;
        self.drift.extend_to(&self.schedule, t);
        let m = self.drift.best_window(t, self.vc_dim);
        let fit = erm_cuts(self.class.as_ref(), &self.cuts[self.cuts.len() - m..]);
        self.current = fit.hypothesis;
        self.last_window = Some(m);
        Ok(())
    }
}
