//! Geometry of the uniform distribution on the unit sphere, plus the two
//! scalar helpers (capped logarithm and hinge loss) used across the learners.

use std::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DriftError, Result};

/// `ln(max{x, e})`. Always at least 1.
pub fn log_cap(x: f64) -> f64 {
    if x > E {
        x.ln()
    } else {
        1.0
    }
}

/// Hinge loss `max{0, 1 - x / tau}` with margin `tau > 0`.
pub fn hinge(x: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(invalid("tau", format!("margin must be positive, got {tau}")));
    }
    Ok(hinge_unchecked(x, tau))
}

#[inline]
pub(crate) fn hinge_unchecked(x: f64, tau: f64) -> f64 {
    (1.0 - x / tau).max(0.0)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point of the unit sphere in `R^d`. Renormalized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("coords", "dimension must be at least 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coords", "coordinates must be finite"));
        }
        let n = norm(&coords);
        if n == 0.0 {
            return Err(invalid("coords", "cannot normalize the zero vector"));
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / n).collect(),
        })
    }

    /// `(cos angle, sin angle)` in the plane.
    pub fn from_angle(angle: f64) -> Self {
        Self {
            coords: vec![angle.cos(), angle.sin()],
        }
    }

    /// First standard basis vector of `R^d`.
    pub fn basis(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        let mut coords = vec![0.0; dim];
        coords[0] = 1.0;
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.coords
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.coords, x)
    }

    pub fn negated(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    /// Polar angle in `[0, 2π)`; only meaningful in the plane.
    pub fn angle(&self) -> f64 {
        let a = self.coords[1].atan2(self.coords[0]);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }
}

/// Uniform draw from the unit sphere in `R^d`.
pub fn sample_unit_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitVector> {
    if dim == 0 {
        return Err(invalid("dimension", "must be at least 1"));
    }
    Ok(UnitVector {
        coords: sample_sphere_coords(dim, rng),
    })
}

pub(crate) fn sample_sphere_coords<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&g);
        if n > 0.0 {
            return g.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Probability mass on which two homogeneous halfspaces disagree under the
/// uniform sphere: `arccos(u·v) / π`.
pub fn halfspace_disagreement(u: &UnitVector, v: &UnitVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(DriftError::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(angle_between(u.as_slice(), v.as_slice()) / PI)
}

pub(crate) fn angle_between(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v).clamp(-1.0, 1.0).acos()
}

/// Exact `P(|w·X| <= gamma)` for `X` uniform on the sphere in `R^d`.
///
/// `(w·X)^2` is Beta(1/2, (d-1)/2) distributed, so the band mass is the
/// regularized incomplete beta function at `min{gamma^2, 1}`.
pub fn band_probability(dim: usize, gamma: f64) -> Result<f64> {
    if dim < 2 {
        return Err(invalid("dimension", "band probability needs d >= 2"));
    }
    if !(gamma >= 0.0) {
        return Err(invalid("gamma", format!("must be nonnegative, got {gamma}")));
    }
    if gamma >= 1.0 {
        return Ok(1.0);
    }
    regularized_incomplete_beta(gamma * gamma, 0.5, (dim as f64 - 1.0) / 2.0)
}

/// `I_x(a, b)` by Lentz's continued fraction.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid("x", format!("must lie in [0, 1], got {x}")));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(invalid("shape", "beta shape parameters must be positive"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // the fraction converges fast on this side of the mode
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_continued_fraction(x, a, b) / a)
    } else {
        Ok(1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b)
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation (g = 7, 9 terms), accurate to ~1e-15 for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
