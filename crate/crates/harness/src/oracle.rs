//! Independent oracles for the exact and derived quantities: brute-force
//! window selection, grid search for the hinge solver, Monte Carlo band
//! masses and the circle's disagreement coefficient.

use std::f64::consts::{E, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use drift_core::active::estimate_disagreement_coefficient;
use drift_core::geometry::{band_probability, norm, sample_unit_sphere};
use drift_core::halfspace::{hinge_minimize_ball, QueryBatch};
use drift_core::window::{adaptive_fit, AdaptiveConfig, History, Sample, ThresholdClass};
use drift_core::{FiniteClass, Label, UnitVector};

use crate::error::{HarnessError, Result};

pub const SUITES: [&str; 5] = ["window", "hinge", "geometry", "theta", "all"];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub suite: &'static str,
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    /// Allowed `|observed − expected|`, or the allowed excess for one-sided checks.
    pub tolerance: f64,
    pub pass: bool,
}

impl fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {}: observed {} oracle {} tol {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.observed,
            self.expected,
            self.tolerance
        )
    }
}

fn two_sided(suite: &'static str, name: String, observed: f64, expected: f64, tolerance: f64) -> OracleCheck {
    OracleCheck {
        suite,
        name,
        observed,
        expected,
        tolerance,
        pass: (observed - expected).abs() <= tolerance,
    }
}

pub fn run_suite(name: &str) -> Result<Vec<OracleCheck>> {
    match name {
        "window" => Ok(window_suite()),
        "hinge" => Ok(hinge_suite()),
        "geometry" => Ok(geometry_suite()),
        "theta" => Ok(theta_suite()),
        "all" => {
            let mut all = window_suite();
            all.extend(hinge_suite());
            all.extend(geometry_suite());
            all.extend(theta_suite());
            Ok(all)
        }
        other => Err(HarnessError::Usage(format!(
            "unknown oracle suite `{other}`; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

fn ln_cap(x: f64) -> f64 {
    x.max(E).ln()
}

/// Exhaustive `(h, m, m′)` search over the 18 grid thresholds. Returns
/// `(m̂, score, mistakes)` with ties broken by `(cut, + before −)`.
pub fn brute_force_window(samples: &[(usize, bool)], k: f64, delta: f64, vc: usize) -> (usize, f64, usize) {
    let n = samples.len();
    let d = vc as f64;
    let level = |m: usize| d * ln_cap(m as f64 / d) + ln_cap(1.0 / delta);
    let predict = |cut: usize, pos: bool, x: usize| (x >= cut) == pos;
    let hyps: Vec<(usize, bool)> = (0..=8).flat_map(|c| [(c, true), (c, false)]).collect();
    let score = |h: (usize, bool), m: usize| {
        let mut best = 0.0f64;
        for mp in 1..=m {
            let wrong = samples[n - mp..].iter().filter(|&&(x, y)| predict(h.0, h.1, x) != y).count();
            best = best.max(wrong as f64 / level(mp));
        }
        best
    };
    let m_hat = (1..=n).rev().find(|&m| hyps.iter().any(|&h| score(h, m) < k)).unwrap_or(1);
    let mut best = (f64::INFINITY, 0usize);
    for &h in &hyps {
        let s = score(h, m_hat);
        if s < best.0 {
            let wrong = samples[n - m_hat..].iter().filter(|&&(x, y)| predict(h.0, h.1, x) != y).count();
            best = (s, wrong);
        }
    }
    (m_hat, best.0, best.1)
}

const WINDOW_CONFIGS: [(f64, f64, usize); 3] = [(0.5, 0.2, 1), (2.0, 0.05, 2), (8.0, 1.0, 1)];

/// Histories over the grid `{0, 1/8, …, 1}`: every label pattern at every
/// length ≤ 8, with all point sequences up to length 3 and 64 seeded point
/// sequences for longer histories.
pub fn window_histories() -> Vec<Vec<(usize, bool)>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for n in 1..=8usize {
        let xs: Vec<Vec<usize>> = if n <= 3 {
            (0..9usize.pow(n as u32))
                .map(|mut code| {
                    (0..n)
                        .map(|_| {
                            let x = code % 9;
                            code /= 9;
                            x
                        })
                        .collect()
                })
                .collect()
        } else {
            (0..64).map(|_| (0..n).map(|_| rng.random_range(0..9)).collect()).collect()
        };
        for x in &xs {
            for labels in 0..1u32 << n {
                out.push(x.iter().enumerate().map(|(i, &xi)| (xi, labels >> i & 1 == 1)).collect());
            }
        }
    }
    out
}

pub fn window_suite() -> Vec<OracleCheck> {
    let histories = window_histories();
    let mut checks = Vec::new();
    for (k, delta, vc) in WINDOW_CONFIGS {
        let cfg = AdaptiveConfig {
            k,
            delta,
            vc_dim: vc,
            ..AdaptiveConfig::default()
        };
        let mut mismatches = 0usize;
        for h in &histories {
            let hist = History::from_samples(
                h.iter()
                    .map(|&(x, y)| Sample::new(vec![x as f64 / 8.0], if y { Label::Positive } else { Label::Negative }))
                    .collect(),
            );
            let fit = adaptive_fit(&hist, &cfg, &ThresholdClass).expect("valid history");
            let (m_hat, score, mistakes) = brute_force_window(h, k, delta, vc);
            if fit.window != m_hat || fit.mistakes != mistakes || (fit.score - score).abs() > 1e-12 {
                mismatches += 1;
            }
        }
        checks.push(two_sided(
            "window",
            format!("K={k} delta={delta} d={vc} ({} histories) mismatches", histories.len()),
            mismatches as f64,
            0.0,
            0.0,
        ));
    }
    checks
}

/// `(instance loss, grid-oracle loss, κ|W| + resolution)` for one seeded 2D instance.
pub fn hinge_instance(seed: u64) -> (f64, f64, f64) {
    let (r, tau, kappa, n, grid) = (0.3, 0.2, 0.05, 20usize, 400usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = sample_unit_sphere(2, &mut rng).expect("d = 2");
    let target = UnitVector::from_angle(w.angle() + rng.random_range(-0.4..0.4));
    let mut batch = QueryBatch::new(w.clone(), 0.5).expect("positive band");
    while batch.len() < n {
        let x = sample_unit_sphere(2, &mut rng).expect("d = 2");
        let mut y = Label::from_sign(target.dot(x.as_slice()));
        if rng.random_bool(0.1) {
            y = y.flip();
        }
        batch.try_push(x.as_slice(), y).expect("matching dimension");
    }
    let sol = hinge_minimize_ball(&batch, &w, r, tau, kappa, 2000).expect("valid instance");
    let c = w.as_slice();
    let step = 2.0 * r / (grid - 1) as f64;
    let mut best = f64::INFINITY;
    for i in 0..grid {
        for j in 0..grid {
            let v = [c[0] - r + i as f64 * step, c[1] - r + j as f64 * step];
            let nv = norm(&v);
            if nv > 0.0 && nv <= 1.0 && norm(&[v[0] - c[0], v[1] - c[1]]) <= r {
                best = best.min(batch.hinge_loss(&v, tau));
            }
        }
    }
    // loss is (|W|/τ)-Lipschitz; the nearest grid point is within step·√2/2
    let resolution = n as f64 / tau * step * 2f64.sqrt() / 2.0;
    (sol.loss, best, kappa * n as f64 + resolution)
}

pub fn hinge_suite() -> Vec<OracleCheck> {
    (0..50u64)
        .map(|seed| {
            let (loss, oracle, slack) = hinge_instance(seed);
            OracleCheck {
                suite: "hinge",
                name: format!("instance {seed} loss <= grid + slack"),
                observed: loss,
                expected: oracle,
                tolerance: slack,
                pass: loss <= oracle + slack,
            }
        })
        .collect()
}

pub const GEOMETRY_DIMS: [usize; 4] = [2, 3, 5, 10];
pub const GEOMETRY_GAMMAS: [f64; 4] = [0.05, 0.1, 0.3, 0.7];

pub fn geometry_suite() -> Vec<OracleCheck> {
    let n = 1_000_000;
    let mut checks = Vec::new();
    for d in GEOMETRY_DIMS {
        let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
        // |e₁·X| for uniform X
        let first: Vec<f64> = (0..n)
            .map(|_| sample_unit_sphere(d, &mut rng).expect("d >= 2").as_slice()[0].abs())
            .collect();
        for g in GEOMETRY_GAMMAS {
            let mc = first.iter().filter(|&&v| v <= g).count() as f64 / n as f64;
            let exact = band_probability(d, g).expect("valid arguments");
            checks.push(two_sided("geometry", format!("band d={d} gamma={g} vs Monte Carlo"), exact, mc, 3e-3));
        }
    }
    let exact = |d, g| band_probability(d, g).expect("valid arguments");
    checks.push(two_sided("geometry", "band d=3 gamma=0.25 exact".into(), exact(3, 0.25), 0.25, 1e-9));
    checks.push(two_sided(
        "geometry",
        "band d=2 gamma=sqrt(2)/2 exact".into(),
        exact(2, 2f64.sqrt() / 2.0),
        0.5,
        1e-9,
    ));
    checks
}

pub fn theta_suite() -> Vec<OracleCheck> {
    let class = FiniteClass::angle_grid(1024).expect("nonempty grid");
    let h = class.get(0).clone();
    let est = estimate_disagreement_coefficient(&class, &h, 0.01, &[0.05, 0.1, 0.2], 1_000_000, 17)
        .expect("valid estimator arguments");
    let mut checks = vec![two_sided(
        "theta",
        format!("1024-angle grid, r in {{0.05, 0.1, 0.2}} (MC half-width {:.4})", est.half_width),
        est.theta,
        2.0,
        0.05,
    )];
    // the angle-ball of radius r is an arc of half-width ⌊πr/step⌋·step; its DIS mass is twice that over π
    let step = 2.0 * PI / 1024.0;
    for p in &est.points {
        let arc = (PI * p.r / step + 1e-9).floor() * step;
        checks.push(two_sided(
            "theta",
            format!("DIS mass at r={}", p.r),
            p.dis_mass,
            2.0 * arc / PI,
            4.0 * p.half_width * p.r,
        ));
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_usage_error() {
        assert!(matches!(run_suite("nope"), Err(HarnessError::Usage(_))));
    }

    #[test]
    fn brute_force_examples() {
        // a clean history fits entirely
        let h = [(1, false), (5, true), (7, true)];
        assert_eq!(brute_force_window(&h, 8.0, 1.0, 1), (3, 0.0, 0));
        // contradicting labels at one point with a tiny K keep only the last sample
        let h = [(4, true), (4, false), (4, true)];
        assert_eq!(brute_force_window(&h, 0.4, 1.0, 1).0, 1);
    }

    #[test]
    fn history_enumeration_covers_short_lengths() {
        let hs = window_histories();
        assert_eq!(hs.iter().filter(|h| h.len() == 2).count(), 81 * 4);
        assert_eq!(hs.iter().filter(|h| h.len() == 8).count(), 64 * 256);
    }
}
