use std::fmt::Write as _;
use std::io;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const TRACE_HEADER: &str = "t,mistake,queried,exact_error,cum_mistakes,cum_queries";

/// One round of a learner run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub mistake: bool,
    pub queried: bool,
    /// Exact error rate of the deployed hypothesis against the round's target.
    pub exact_error: f64,
    pub cum_mistakes: usize,
    pub cum_queries: usize,
}

/// Per-round record of a run. Cumulative counts are maintained on push.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    records: Vec<RoundRecord>,
}

impl RunTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            records: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, mistake: bool, queried: bool, exact_error: f64) {
        let (cm, cq) = self
            .records
            .last()
            .map_or((0, 0), |r| (r.cum_mistakes, r.cum_queries));
        self.records.push(RoundRecord {
            t: self.records.len() + 1,
            mistake,
            queried,
            exact_error,
            cum_mistakes: cm + mistake as usize,
            cum_queries: cq + queried as usize,
        });
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_mistakes(&self) -> usize {
        self.records.last().map_or(0, |r| r.cum_mistakes)
    }

    pub fn total_queries(&self) -> usize {
        self.records.last().map_or(0, |r| r.cum_queries)
    }

    /// Mistake frequency over the 0-based round index range.
    pub fn mistake_rate(&self, range: Range<usize>) -> f64 {
        let slice = &self.records[range];
        if slice.is_empty() {
            return 0.0;
        }
        slice.iter().filter(|r| r.mistake).count() as f64 / slice.len() as f64
    }

    pub fn query_rate(&self, range: Range<usize>) -> f64 {
        let slice = &self.records[range];
        if slice.is_empty() {
            return 0.0;
        }
        slice.iter().filter(|r| r.queried).count() as f64 / slice.len() as f64
    }

    pub fn mean_exact_error(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.exact_error).sum::<f64>() / self.records.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.t, r.mistake as u8, r.queried as u8, r.exact_error, r.cum_mistakes, r.cum_queries
            );
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    /// Parses the CSV written by [`RunTrace::to_csv`], checking that the
    /// cumulative columns are the running sums of the indicators.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(TRACE_HEADER) {
            return Err(invalid("trace", "missing or unexpected header"));
        }
        let mut trace = RunTrace::new();
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(invalid("trace", format!("row {} has {} fields", i + 1, f.len())));
            }
            let flag = |s: &str| match s {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(invalid("trace", format!("bad indicator `{s}` on row {}", i + 1))),
            };
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| invalid("trace", format!("bad integer `{s}` on row {}", i + 1)))
            };
            let err: f64 = f[3]
                .parse()
                .map_err(|_| invalid("trace", format!("bad float on row {}", i + 1)))?;
            trace.push(flag(f[1])?, flag(f[2])?, err);
            let r = trace.records.last().unwrap();
            if num(f[0])? != r.t || num(f[4])? != r.cum_mistakes || num(f[5])? != r.cum_queries {
                return Err(invalid("trace", format!("inconsistent counts on row {}", i + 1)));
            }
        }
        Ok(trace)
    }
}
