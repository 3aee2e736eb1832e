//! Hypothesis representations: homogeneous halfspaces on the sphere and
//! one-dimensional thresholds on `[0, 1]`, plus explicit finite classes.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DriftError, Result};
use crate::geometry::{angle_between, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// Sign rule with `sign(0) = +1`.
    #[inline]
    pub fn from_sign(v: f64) -> Self {
        if v >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    #[inline]
    pub fn flip(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => write!(f, "+1"),
            Label::Negative => write!(f, "-1"),
        }
    }
}

/// `x -> sign(w·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceHypothesis {
    pub weight: UnitVector,
}

impl HalfspaceHypothesis {
    pub fn new(weight: UnitVector) -> Self {
        Self { weight }
    }

    pub fn from_angle(angle: f64) -> Self {
        Self::new(UnitVector::from_angle(angle))
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> Label {
        Label::from_sign(self.weight.dot(x))
    }
}

/// `x -> polarity · sign(x - cut)` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdHypothesis {
    pub cut: f64,
    pub polarity: Label,
}

impl ThresholdHypothesis {
    pub fn new(cut: f64, polarity: Label) -> Result<Self> {
        if !(0.0..=1.0).contains(&cut) {
            return Err(invalid("cut", format!("must lie in [0, 1], got {cut}")));
        }
        Ok(Self { cut, polarity })
    }

    #[inline]
    pub fn predict_scalar(&self, x: f64) -> Label {
        if x >= self.cut {
            self.polarity
        } else {
            self.polarity.flip()
        }
    }

    /// Disagreement mass under the uniform distribution on `[0, 1]`.
    pub fn disagreement(&self, other: &ThresholdHypothesis) -> f64 {
        let gap = (self.cut - other.cut).abs();
        if self.polarity == other.polarity {
            gap
        } else {
            1.0 - gap
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Hypothesis {
    Halfspace(HalfspaceHypothesis),
    Threshold(ThresholdHypothesis),
}

impl Hypothesis {
    #[inline]
    pub fn predict(&self, x: &[f64]) -> Label {
        match self {
            Hypothesis::Halfspace(h) => h.predict(x),
            Hypothesis::Threshold(h) => h.predict_scalar(x[0]),
        }
    }

    /// The pointwise complement `x -> -h(x)`, up to boundary ties.
    pub fn complement(&self) -> Hypothesis {
        match self {
            Hypothesis::Halfspace(h) => {
                Hypothesis::Halfspace(HalfspaceHypothesis::new(h.weight.negated()))
            }
            Hypothesis::Threshold(h) => Hypothesis::Threshold(ThresholdHypothesis {
                cut: h.cut,
                polarity: h.polarity.flip(),
            }),
        }
    }

    /// Exact disagreement mass under the class's reference distribution
    /// (uniform sphere for halfspaces, uniform `[0, 1]` for thresholds).
    pub fn disagreement(&self, other: &Hypothesis) -> Result<f64> {
        match (self, other) {
            (Hypothesis::Halfspace(a), Hypothesis::Halfspace(b)) => {
                if a.weight.dim() != b.weight.dim() {
                    return Err(DriftError::DimensionMismatch {
                        expected: a.weight.dim(),
                        found: b.weight.dim(),
                    });
                }
                Ok(angle_between(a.weight.as_slice(), b.weight.as_slice()) / PI)
            }
            (Hypothesis::Threshold(a), Hypothesis::Threshold(b)) => Ok(a.disagreement(b)),
            _ => Err(DriftError::KindMismatch(
                "halfspace vs threshold".to_string(),
            )),
        }
    }

    pub fn as_halfspace(&self) -> Option<&HalfspaceHypothesis> {
        match self {
            Hypothesis::Halfspace(h) => Some(h),
            _ => None,
        }
    }

    pub fn as_threshold(&self) -> Option<&ThresholdHypothesis> {
        match self {
            Hypothesis::Threshold(h) => Some(h),
            _ => None,
        }
    }
}

impl From<HalfspaceHypothesis> for Hypothesis {
    fn from(h: HalfspaceHypothesis) -> Self {
        Hypothesis::Halfspace(h)
    }
}

impl From<ThresholdHypothesis> for Hypothesis {
    fn from(h: ThresholdHypothesis) -> Self {
        Hypothesis::Threshold(h)
    }
}

/// Fraction of `sample` on which `h` and `g` disagree.
pub fn empirical_disagreement(h: &Hypothesis, g: &Hypothesis, sample: &[Vec<f64>]) -> Result<f64> {
    if sample.is_empty() {
        return Err(invalid("sample", "must be nonempty"));
    }
    let n = sample
        .iter()
        .filter(|x| h.predict(x) != g.predict(x))
        .count();
    Ok(n as f64 / sample.len() as f64)
}

/// An explicit, ordered, nonempty hypothesis class. Index order is the
/// canonical tie-breaking order.
#[derive(Debug, Clone)]
pub struct FiniteClass {
    hypotheses: Vec<Hypothesis>,
}

impl FiniteClass {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Result<Self> {
        let Some(first) = hypotheses.first() else {
            return Err(invalid("hypotheses", "class must be nonempty"));
        };
        for h in &hypotheses[1..] {
            // same kind and dimension throughout
            first.disagreement(h)?;
        }
        Ok(Self { hypotheses })
    }

    /// `n` planar halfspaces at angles `2πi/n`, `i = 0..n`.
    pub fn angle_grid(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("grid_size", "must be at least 1"));
        }
        Self::new(
            (0..n)
                .map(|i| HalfspaceHypothesis::from_angle(2.0 * PI * i as f64 / n as f64).into())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn get(&self, i: usize) -> &Hypothesis {
        &self.hypotheses[i]
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    /// Exact pairwise disagreement mass.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.hypotheses[i]
            .disagreement(&self.hypotheses[j])
            .expect("class members share a kind")
    }

    /// Index of the member closest to `h` (lowest index on ties).
    pub fn nearest(&self, h: &Hypothesis) -> Result<usize> {
        let mut best = (0, f64::INFINITY);
        for (i, g) in self.hypotheses.iter().enumerate() {
            let d = g.disagreement(h)?;
            if d < best.1 {
                best = (i, d);
            }
        }
        Ok(best.0)
    }
}
