//! Timing harness comparing the relational engine against the backtracking
//! matcher, with results as CSV.
//!
//! Per pattern, up to three rows:
//!
//! * `gj` — generic join, wall time including index construction;
//! * `gj-noindex` — the same run with the index build subtracted, i.e. what
//!   a match costs once tries are warm;
//! * `em` — the backtracking matcher.
//!
//! Every repetition drops the trie cache first so each one pays (and
//! measures) the index build; the repetition with the smallest total is
//! reported, and `gj` / `gj-noindex` always come from the same repetition
//! so `gj.time_ns - gj.index_time_ns == gj-noindex.time_ns` holds exactly.
//!
//! When both engines run, their match sets are compared before any timing
//! is reported; a mismatch aborts with the symmetric difference.

use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

use crate::baseline::bt_ematch;
use crate::egraph::EGraph;
use crate::error::{Error, Result};
use crate::gj::{Engine, MatchOptions};
use crate::matchset::MatchSet;
use crate::pattern::Pattern;

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct BenchRecord {
    pub pattern: String,
    pub engine: String,
    pub egraph_nodes: usize,
    pub result_count: usize,
    pub time_ns: u128,
    pub index_time_ns: u128,
    pub intersection_steps: u64,
    pub candidates: u64,
}

/// Which engines a benchmark run times. The cross-engine agreement gate
/// applies only to [`BenchEngines::Both`]; single-engine runs have nothing
/// to compare against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchEngines {
    Gj,
    Em,
    Both,
}

/// Times every pattern with both engines. `reps` must be at least 1.
pub fn run_bench(eg: &EGraph, patterns: &[Pattern], reps: usize) -> Result<Vec<BenchRecord>> {
    run_bench_engines(eg, patterns, reps, BenchEngines::Both)
}

/// Times every pattern with the selected engines.
pub fn run_bench_engines(
    eg: &EGraph,
    patterns: &[Pattern],
    reps: usize,
    engines: BenchEngines,
) -> Result<Vec<BenchRecord>> {
    assert!(reps >= 1, "need at least one repetition");
    let mut engine = Engine::new(eg)?;
    let n_nodes = eg.n_nodes();
    let opts = MatchOptions::default();
    let mut records = Vec::with_capacity(patterns.len() * 3);
    for p in patterns {
        let pat = std::slice::from_ref(p);

        let gj = if engines != BenchEngines::Em {
            let mut best: Option<(Duration, Duration, MatchSet)> = None;
            for _ in 0..reps {
                engine.drop_indexes();
                let t0 = Instant::now();
                let ms = engine.ematch(eg, pat, &opts)?;
                let total = t0.elapsed();
                let index = engine.last_index_time();
                if best.as_ref().is_none_or(|(t, _, _)| total < *t) {
                    best = Some((total, index, ms));
                }
            }
            best
        } else {
            None
        };

        let em = if engines != BenchEngines::Gj {
            let mut best: Option<(Duration, MatchSet)> = None;
            for _ in 0..reps {
                let t0 = Instant::now();
                let ms = bt_ematch(eg, pat)?;
                let total = t0.elapsed();
                if best.as_ref().is_none_or(|(t, _)| total < *t) {
                    best = Some((total, ms));
                }
            }
            best
        } else {
            None
        };

        if let (Some((_, _, gj_ms)), Some((_, em_ms))) = (&gj, &em) {
            if !gj_ms.same_matches(em_ms) {
                return Err(Error::EngineDisagreement {
                    pattern: p.to_string(),
                    diff: gj_ms.diff(em_ms, 5),
                });
            }
        }

        if let Some((gj_total, gj_index, gj_ms)) = gj {
            records.push(BenchRecord {
                pattern: p.to_string(),
                engine: "gj".into(),
                egraph_nodes: n_nodes,
                result_count: gj_ms.len(),
                time_ns: gj_total.as_nanos(),
                index_time_ns: gj_index.as_nanos(),
                intersection_steps: gj_ms.counters.intersection_steps,
                candidates: 0,
            });
            records.push(BenchRecord {
                pattern: p.to_string(),
                engine: "gj-noindex".into(),
                egraph_nodes: n_nodes,
                result_count: gj_ms.len(),
                time_ns: gj_total.saturating_sub(gj_index).as_nanos(),
                index_time_ns: 0,
                intersection_steps: gj_ms.counters.intersection_steps,
                candidates: 0,
            });
        }
        if let Some((em_total, em_ms)) = em {
            records.push(BenchRecord {
                pattern: p.to_string(),
                engine: "em".into(),
                egraph_nodes: n_nodes,
                result_count: em_ms.len(),
                time_ns: em_total.as_nanos(),
                index_time_ns: 0,
                intersection_steps: 0,
                candidates: em_ms.counters.candidates,
            });
        }
    }
    Ok(records)
}

/// Writes records as CSV with a header row.
pub fn write_csv<W: std::io::Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads records back from CSV produced by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("csv: {other:?}"))),
    }
}
