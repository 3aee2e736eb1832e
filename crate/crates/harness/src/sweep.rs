//! One-axis parameter sweeps over a config template.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::config::{parse_config, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::run::{run_seeds, SummaryRow};

pub const SWEEP_HEADER: &str = "axis,value,seed,mistakes,queries,mistake_rate,final_rate,mean_error";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    pub mistakes: usize,
    pub queries: usize,
    pub mistake_rate: f64,
    pub final_rate: f64,
    pub mean_error: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Fully qualified key that was varied.
    pub axis: String,
    /// Digest of the materialized template.
    pub digest: String,
    pub rows: Vec<SweepRow>,
}

fn lookup<'a>(table: &'a Table, path: &str) -> Option<&'a Value> {
    let mut parts = path.split('.');
    let mut cur = table.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

fn assign(table: &mut Table, path: &str, value: Value) {
    let parts: Vec<&str> = path.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .expect("intermediate keys are tables");
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
}

/// Resolves `axis` to a numeric key of the materialized template and the key
/// to write in the raw template (which may use the `environment.delta` shorthand).
fn resolve_axis(raw: &Table, full: &Table, axis: &str) -> Result<(String, String, bool)> {
    let qualified = match axis {
        "delta" | "environment.delta" => "environment.schedule.delta",
        other => other,
    };
    let integral = match lookup(full, qualified) {
        Some(Value::Integer(_)) => true,
        Some(Value::Float(_)) => false,
        _ => {
            return Err(HarnessError::Invalid {
                key: "axis".into(),
                reason: format!("`{axis}` is not a numeric config key"),
            })
        }
    };
    let raw_key = if qualified == "environment.schedule.delta" && lookup(raw, "environment.delta").is_some() {
        "environment.delta"
    } else {
        qualified
    };
    Ok((qualified.to_string(), raw_key.to_string(), integral))
}

/// The template with `axis` set to `value`, re-materialized and validated.
pub fn config_at(template: &str, axis: &str, value: f64) -> Result<ExperimentConfig> {
    let base = parse_config(template)?;
    let full: Table = toml::from_str(&base.to_toml()).expect("serialized config parses");
    let mut raw: Table = toml::from_str(template).map_err(|e| HarnessError::Parse {
        line: None,
        message: e.message().to_string(),
    })?;
    let (_, raw_key, integral) = resolve_axis(&raw, &full, axis)?;
    let v = if integral {
        if value.fract() != 0.0 || value < 0.0 {
            return Err(HarnessError::Invalid {
                key: axis.into(),
                reason: format!("integer key cannot take {value}"),
            });
        }
        Value::Integer(value as i64)
    } else {
        Value::Float(value)
    };
    assign(&mut raw, &raw_key, v);
    parse_config(&toml::to_string(&raw).expect("table serializes"))
}

/// Runs every `(value, seed)` pair; rows are ordered by value, then seed.
pub fn sweep(template: &str, axis: &str, values: &[f64], parallel: bool) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(HarnessError::Invalid {
            key: "values".into(),
            reason: "sweep needs at least one value".into(),
        });
    }
    let base = parse_config(template)?;
    let full: Table = toml::from_str(&base.to_toml()).expect("serialized config parses");
    let raw: Table = toml::from_str(template).expect("template parsed above");
    let (qualified, _, _) = resolve_axis(&raw, &full, axis)?;
    let mut rows = Vec::new();
    for &value in values {
        let cfg = config_at(template, axis, value)?;
        let digest = cfg.digest();
        for (seed, trace) in run_seeds(&cfg, parallel)? {
            let s = SummaryRow::from_trace(&digest, seed, &trace);
            rows.push(SweepRow {
                value,
                seed,
                mistakes: s.mistakes,
                queries: s.queries,
                mistake_rate: s.mistakes as f64 / trace.len() as f64,
                final_rate: s.final_rate,
                mean_error: s.mean_error,
            });
        }
    }
    Ok(SweepResult {
        axis: qualified,
        digest: base.digest(),
        rows,
    })
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(SWEEP_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                self.axis, r.value, r.seed, r.mistakes, r.queries, r.mistake_rate, r.final_rate, r.mean_error
            );
        }
        s
    }

    /// `(value, mean, min, max)` of the mistake rate per axis value, in first-seen order.
    pub fn aggregate(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
        for r in &self.rows {
            match out.iter_mut().find(|(v, _)| *v == r.value) {
                Some((_, rates)) => rates.push(r.mistake_rate),
                None => out.push((r.value, vec![r.mistake_rate])),
            }
        }
        out.into_iter()
            .map(|(v, rates)| {
                let mean = rates.iter().sum::<f64>() / rates.len() as f64;
                let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
                let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (v, mean, min, max)
            })
            .collect()
    }

    /// Mean mistake rate against the axis value with min/max whiskers.
    pub fn svg(&self) -> String {
        let (w, h, left, right, top, bottom) = (640.0, 420.0, 70.0, 20.0, 30.0, 60.0);
        let mut pts = self.aggregate();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let lo = pts.first().map_or(0.0, |p| p.0);
        let hi = pts.last().map_or(1.0, |p| p.0);
        let log = lo > 0.0 && hi / lo >= 10.0;
        let tx = |v: f64| if log { v.log10() } else { v };
        let (a, b) = (tx(lo), tx(hi));
        let span = if b > a { b - a } else { 1.0 };
        let ymax = pts.iter().map(|p| p.3).fold(0.0, f64::max).max(1e-12) * 1.1;
        let x = |v: f64| {
            if b > a {
                left + (tx(v) - a) / span * (w - left - right)
            } else {
                (left + w - right) / 2.0
            }
        };
        let y = |r: f64| h - bottom - r / ymax * (h - top - bottom);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<path d="M{left} {top} V{} H{}" fill="none" stroke="black"/>"#,
            h - bottom,
            w - right
        );
        for i in 0..=4 {
            let r = ymax * i as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" font-size="11" text-anchor="end">{:.3}</text>"#,
                left - 6.0,
                y(r) + 4.0,
                r
            );
        }
        for p in &pts {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
                x(p.0),
                h - bottom + 16.0,
                p.0
            );
            let _ = writeln!(
                s,
                r#"<path d="M{0:.1} {1:.1} V{2:.1} M{3:.1} {1:.1} H{4:.1} M{3:.1} {2:.1} H{4:.1}" stroke="gray"/>"#,
                x(p.0),
                y(p.2),
                y(p.3),
                x(p.0) - 4.0,
                x(p.0) + 4.0
            );
        }
        let line: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", x(p.0), y(p.1))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue"/>"#, line.join(" "));
        for p in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="steelblue"/>"#, x(p.0), y(p.1));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}{}</text>"#,
            (left + w - right) / 2.0,
            h - 15.0,
            self.axis,
            if log { " (log scale)" } else { "" }
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">mistake rate</text>"#,
            (top + h - bottom) / 2.0,
            (top + h - bottom) / 2.0
        );
        s.push_str("</svg>\n");
        s
    }

    /// Writes the CSV, and the SVG iff `plot`; returns the written paths.
    pub fn write(&self, dir: &Path, plot: bool) -> Result<Vec<PathBuf>> {
        crate::run::ensure_writable(dir)?;
        let stem = format!("sweep_{}_{}", self.digest, self.axis.replace('.', "-"));
        let csv = dir.join(format!("{stem}.csv"));
        fs::write(&csv, self.to_csv()).map_err(|e| HarnessError::io(&csv, e))?;
        let mut out = vec![csv];
        if plot {
            let svg = dir.join(format!("{stem}.svg"));
            fs::write(&svg, self.svg()).map_err(|e| HarnessError::io(&svg, e))?;
            out.push(svg);
        }
        Ok(out)
    }
}
