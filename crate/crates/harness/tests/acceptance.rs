//! The ten acceptance criteria at their stated tolerances. Every criterion
//! runs and prints a PASS/FAIL line; the binary fails if any of them failed.

use std::fs;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use drift_core::active::{ActiveConfig, DriftingActive};
use drift_core::geometry::{norm, sample_unit_sphere};
use drift_core::halfspace::{mod_perceptron_update, reflect, AblSchedule};
use drift_core::window::{erm_class, AdaptiveConfig, AdaptiveWindowLearner};
use drift_core::*;
use drift_harness::config::{parse_config, ExperimentConfig};
use drift_harness::oracle::{geometry_suite, hinge_suite, theta_suite, window_suite, OracleCheck};
use drift_harness::run::{run_experiment, run_seed, trace_path};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn from_oracle(checks: Vec<OracleCheck>) -> Verdict {
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.to_string()).collect();
    let detail = if failed.is_empty() {
        format!("{} oracle checks agree", checks.len())
    } else {
        format!("{} of {} oracle checks disagree: {}", failed.len(), checks.len(), failed.join("; "))
    };
    verdict(failed.is_empty(), detail)
}

fn config(text: &str) -> ExperimentConfig {
    parse_config(text).expect("acceptance configs are valid")
}

fn reflection_invariant() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut w = UnitVector::basis(2).unwrap();
    for i in 0..100_000usize {
        let d = [2, 3, 5, 10, 50][i % 5];
        if w.dim() != d {
            w = sample_unit_sphere(d, &mut rng).unwrap();
        }
        let x = sample_unit_sphere(d, &mut rng).unwrap();
        // the label that forces a reflection
        let y = Label::from_sign(w.dot(x.as_slice())).flip();
        worst = worst.max((norm(&reflect(w.as_slice(), x.as_slice())) - 1.0).abs());
        w = mod_perceptron_update(&w, &x, y);
        worst = worst.max((norm(w.as_slice()) - 1.0).abs());
        if rng.random_bool(0.5) {
            w = mod_perceptron_update(&w, &x, y.flip());
        }
    }
    verdict(worst < 1e-12, format!("max |‖w′‖ − 1| = {worst:e} over 10⁵ updates"))
}

fn sqrt_drift_scaling() -> Verdict {
    let template = |delta: f64| {
        format!(
            r#"
horizon = 1
seeds = {:?}
[environment]
kind = "rotating"
dimension = 2
delta = {delta}
forced_direction = true
[learner]
kind = "drifting_halfspaces"
[learner.halfspace]
c9 = 4.0
c5 = 0.05
m0 = 100
"#,
            (0..20).collect::<Vec<u64>>()
        )
    };
    let mut rates = Vec::new();
    let mut notes = Vec::new();
    for delta in [1e-4, 4e-4] {
        let mut cfg = config(&template(delta));
        let spec = cfg.learner_spec();
        let s = AblSchedule::new(2, delta, spec.halfspace).unwrap();
        let m = s.batch_len;
        cfg.horizon = 10 * m;
        let (mut mistakes, mut rounds) = (0usize, 0usize);
        for &seed in &cfg.seeds {
            let trace = run_seed(&cfg, seed).unwrap();
            // the first batch is excluded
            let rest = &trace.records()[m..];
            mistakes += rest.iter().filter(|r| r.mistake).count();
            rounds += rest.len();
        }
        let rate = mistakes as f64 / rounds as f64;
        notes.push(format!("Δ={delta}: M={m} rate {rate:.4}"));
        rates.push(rate);
    }
    let ratio = rates[1] / rates[0];
    verdict(
        (1.5..=2.8).contains(&ratio),
        format!("ratio {ratio:.3} in [1.5, 2.8] ({})", notes.join(", ")),
    )
}

fn lower_bound_floor() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for delta in [0.05f64, 0.2] {
        let cfg = config(&format!(
            r#"
horizon = 20000
seeds = {:?}
[environment]
kind = "random_walk"
delta = {delta}
[learner]
kind = "adaptive"
"#,
            (0..10).collect::<Vec<u64>>()
        ));
        let floor = 0.9 * delta.min(0.5);
        let rates: Vec<f64> = cfg
            .seeds
            .iter()
            .map(|&s| run_seed(&cfg, s).unwrap().mistake_rate(0..cfg.horizon))
            .collect();
        let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        pass &= min >= floor;
        notes.push(format!("Δ={delta}: min rate {min:.4} ≥ {floor:.4}"));
    }
    verdict(pass, notes.join(", "))
}

fn sublinearity() -> Verdict {
    let cfg = config(&format!(
        r#"
horizon = 20000
seeds = {:?}
[environment]
kind = "rotating"
dimension = 2
[environment.schedule]
kind = "power_decay"
scale = 1.0
exponent = 1.0
[learner]
kind = "adaptive"
"#,
        (0..10).collect::<Vec<u64>>()
    ));
    let half = cfg.horizon / 2;
    let mut wins = 0;
    let mut ratios = Vec::new();
    for &seed in &cfg.seeds {
        let t = run_seed(&cfg, seed).unwrap();
        let (early, late) = (t.mistake_rate(0..half), t.mistake_rate(half..cfg.horizon));
        wins += (late <= 0.5 * early) as usize;
        ratios.push(format!("{:.2}", late / early));
    }
    verdict(
        wins > cfg.seeds.len() / 2,
        format!("{wins}/10 seeds with late ≤ ½·early (late/early: {})", ratios.join(" ")),
    )
}

fn active_label_savings() -> Verdict {
    let (delta, horizon) = (1e-4, 20_000usize);
    let schedule = ActiveConfig {
        c1: 16.0,
        grid_size: 1024,
    }
    .schedule(2, delta)
    .unwrap();
    let class = FiniteClass::angle_grid(1024).unwrap();
    let last = schedule.epochs() - 1;
    let (mut queries, mut first, mut final_epoch) = (0usize, (0usize, 0usize), (0usize, 0usize));
    let (mut active_mistakes, mut passive_mistakes) = (0usize, 0usize);
    let mut worst_overall = 0.0f64;
    for seed in 0..10u64 {
        let mut env = RotatingHalfspaceEnv::new(2, DriftSchedule::constant(delta), seed).unwrap();
        let mut learner = DriftingActive::new(class.clone(), schedule.clone());
        let trace = run_learner(&mut env, &mut learner, horizon).unwrap();
        queries += trace.total_queries();
        worst_overall = worst_overall.max(trace.total_queries() as f64 / horizon as f64);
        active_mistakes += trace.total_mistakes();
        for r in learner.epoch_log() {
            if r.k == 0 {
                first = (first.0 + r.queries, first.1 + r.rounds);
            }
            if r.k == last {
                final_epoch = (final_epoch.0 + r.queries, final_epoch.1 + r.rounds);
            }
        }
        let mut env = RotatingHalfspaceEnv::new(2, DriftSchedule::constant(delta), seed).unwrap();
        let mut passive =
            AdaptiveWindowLearner::new(erm_class("halfspace_2d").unwrap(), AdaptiveConfig::default()).unwrap();
        passive_mistakes += run_learner(&mut env, &mut passive, horizon).unwrap().total_mistakes();
    }
    let overall = queries as f64 / (10 * horizon) as f64;
    let (f0, fl) = (
        first.0 as f64 / first.1 as f64,
        final_epoch.0 as f64 / final_epoch.1 as f64,
    );
    let (ra, rp) = (
        active_mistakes as f64 / (10 * horizon) as f64,
        passive_mistakes as f64 / (10 * horizon) as f64,
    );
    let parts = [
        (worst_overall <= 0.5, format!("queries {overall:.3} (worst seed {worst_overall:.3}) ≤ 0.5")),
        (fl <= 0.25 * f0, format!("last-epoch fraction {fl:.3} ≤ ¼ of first-epoch {f0:.3}")),
        (ra <= 3.0 * rp, format!("mistake rate {ra:.4} within 3× of adaptive {rp:.4}")),
    ];
    let detail = parts
        .iter()
        .map(|(ok, s)| format!("{}{s}", if *ok { "" } else { "NOT " }))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(parts.iter().all(|p| p.0), format!("M={} epochs={}: {detail}", schedule.batch_len, last + 1))
}

fn drift_and_determinism() -> Verdict {
    let schedules = [
        DriftSchedule::constant(0.01),
        DriftSchedule::constant(0.3),
        DriftSchedule::PowerDecay {
            scale: 1.0,
            exponent: 0.5,
        },
        DriftSchedule::ConstantWithJumps {
            delta: 0.005,
            jump_period: 500,
        },
    ];
    let mut worst = f64::NEG_INFINITY;
    let mut envs = 0;
    for (i, &schedule) in schedules.iter().enumerate() {
        let seed = 40 + i as u64;
        let mut all: Vec<Box<dyn DriftEnvironment>> = vec![
            Box::new(RotatingHalfspaceEnv::new(2, schedule, seed).unwrap()),
            Box::new(RotatingHalfspaceEnv::new(5, schedule, seed).unwrap()),
            Box::new(RotatingHalfspaceEnv::new(2, schedule, seed).unwrap().with_forced_direction()),
            Box::new(RandomWalk2dEnv::new(schedule, WalkSupport::PlusMinus, seed).unwrap()),
            Box::new(RandomWalk2dEnv::new(schedule, WalkSupport::ZeroOne, seed).unwrap()),
            Box::new(DriftingThresholdEnv::new(schedule, seed).unwrap()),
        ];
        for env in all.iter_mut() {
            envs += 1;
            for _ in 0..10_000 {
                let e = env.advance();
                // er(h*_t, h*_{t+1}) ≤ Δ_{t+1}
                let step = e.target.disagreement(env.target()).unwrap();
                worst = worst.max(step - schedule.delta_at(e.t + 1));
            }
        }
    }
    let drift_ok = worst <= 1e-12;

    let mut identical = true;
    for (kind, extra) in [
        ("adaptive", ""),
        ("nonadaptive", ""),
        ("drifting_halfspaces", "[learner.halfspace]\nm0 = 100\n"),
        ("drifting_active", "[learner.active]\ngrid_size = 256\n"),
    ] {
        let cfg = config(&format!(
            "horizon = 3000\nseeds = [11, 12]\n[environment]\nkind = \"rotating\"\ndelta = 0.001\n[learner]\nkind = \"{kind}\"\n{extra}"
        ));
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let out_a = run_experiment(&cfg, a.path(), true).unwrap();
        let out_b = run_experiment(&cfg, b.path(), false).unwrap();
        identical &= fs::read(&out_a.summary_path).unwrap() == fs::read(&out_b.summary_path).unwrap();
        for &s in &cfg.seeds {
            identical &= fs::read(trace_path(a.path(), &out_a.digest, s)).unwrap()
                == fs::read(trace_path(b.path(), &out_b.digest, s)).unwrap();
        }
    }
    verdict(
        drift_ok && identical,
        format!(
            "max excess drift {worst:e} over {envs} environments × 10⁴ steps; reruns byte-identical: {identical}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("reflection invariant", reflection_invariant),
        ("window-ERM exactness", || from_oracle(window_suite())),
        ("hinge solver optimality", || from_oracle(hinge_suite())),
        ("geometry oracle", || from_oracle(geometry_suite())),
        ("square-root drift scaling", sqrt_drift_scaling),
        ("lower-bound floor", lower_bound_floor),
        ("sublinear mistakes", sublinearity),
        ("active label savings", active_label_savings),
        ("disagreement coefficient", || from_oracle(theta_suite())),
        ("drift bound and determinism", drift_and_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        failed += !v.pass as usize;
        println!(
            "criterion {:>2} [{}] {name}: {} ({:.1}s)",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
