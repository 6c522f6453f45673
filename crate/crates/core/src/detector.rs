//! Stuck-screen detection over periodic polls, and offline tarpit
//! extraction from exploration traces.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::snapshot::ScreenSignature;

pub const DEFAULT_TRIGGER_MS: u64 = 10_000;
pub const POLL_INTERVAL_MS: u64 = 1_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DetectorError {
    #[error("poll at {at} ms precedes previous poll at {previous} ms")]
    TimeRegression { previous: u64, at: u64 },
    #[error("trace line {line}: {reason}")]
    MalformedTrace { line: u64, reason: String },
    #[error("trace io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PollRecord {
    pub signature: ScreenSignature,
    pub at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TarpitEvent {
    pub signature: ScreenSignature,
    pub stuck_since: u64,
    pub fired_at: u64,
}

/// Fires once per continuous same-signature interval that lasts at least
/// `trigger_ms`.
#[derive(Debug, Clone)]
pub struct Detector {
    trigger_ms: u64,
    current: Option<ScreenSignature>,
    stuck_since: u64,
    last_at: Option<u64>,
    fired: bool,
}

impl Default for Detector {
    fn default() -> Self {
        Self::new(DEFAULT_TRIGGER_MS)
    }
}

impl Detector {
    pub fn new(trigger_ms: u64) -> Self {
        Self {
            trigger_ms,
            current: None,
            stuck_since: 0,
            last_at: None,
            fired: false,
        }
    }

    pub fn trigger_ms(&self) -> u64 {
        self.trigger_ms
    }

    pub fn observe(&mut self, record: PollRecord) -> Result<Option<TarpitEvent>, DetectorError> {
        if let Some(previous) = self.last_at {
            if record.at < previous {
                return Err(DetectorError::TimeRegression {
                    previous,
                    at: record.at,
                });
            }
        }
        self.last_at = Some(record.at);
        if self.current.as_ref() != Some(&record.signature) {
            self.current = Some(record.signature);
            self.stuck_since = record.at;
            self.fired = false;
            return Ok(None);
        }
        if !self.fired && record.at - self.stuck_since >= self.trigger_ms {
            self.fired = true;
            return Ok(Some(TarpitEvent {
                signature: record.signature,
                stuck_since: self.stuck_since,
                fired_at: record.at,
            }));
        }
        Ok(None)
    }

    /// Forgets the current interval; the next poll starts a fresh one.
    pub fn reset(&mut self) {
        self.current = None;
        self.fired = false;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub screen_id: String,
    /// Action kind, e.g. `tap`, `type`, `back`.
    pub action: String,
    pub at: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TarpitParams {
    pub min_actions: usize,
    pub min_ms: u64,
    pub top_k: usize,
}

impl Default for TarpitParams {
    fn default() -> Self {
        Self {
            min_actions: 5,
            min_ms: 10_000,
            top_k: 200,
        }
    }
}

/// Total time attributed to each screen: step `i` owns `[at_i, at_{i+1})`.
pub fn dwell_times(trace: &[TraceStep]) -> BTreeMap<String, u64> {
    let mut dwell = BTreeMap::new();
    for (i, step) in trace.iter().enumerate() {
        let span = trace
            .get(i + 1)
            .map_or(0, |next| next.at.saturating_sub(step.at));
        *dwell.entry(step.screen_id.clone()).or_insert(0) += span;
    }
    dwell
}

/// Screens with a long repetitive run, united with the `top_k` screens by
/// dwell time (ties by screen id).
pub fn extract_tarpits(trace: &[TraceStep], params: TarpitParams) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut start = 0;
    while start < trace.len() {
        let mut end = start;
        while end + 1 < trace.len() && trace[end + 1].screen_id == trace[start].screen_id {
            end += 1;
        }
        let count = end - start + 1;
        let span = trace[end].at.saturating_sub(trace[start].at);
        if count >= params.min_actions && span >= params.min_ms {
            out.insert(trace[start].screen_id.clone());
        }
        start = end + 1;
    }
    let mut ranked: Vec<(String, u64)> = dwell_times(trace).into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.extend(ranked.into_iter().take(params.top_k).map(|(id, _)| id));
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    screen_id: String,
    action_kind: String,
    at_ms: u64,
}

pub fn write_trace<W: Write>(writer: W, trace: &[TraceStep]) -> Result<(), DetectorError> {
    let mut w = csv::Writer::from_writer(writer);
    for step in trace {
        w.serialize(TraceRow {
            screen_id: step.screen_id.clone(),
            action_kind: step.action.clone(),
            at_ms: step.at,
        })
        .map_err(|e| DetectorError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| DetectorError::Io(e.to_string()))
}

/// Reads `screen_id,action_kind,at_ms` records (header row required).
pub fn read_trace<R: Read>(reader: R) -> Result<Vec<TraceStep>, DetectorError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out: Vec<TraceStep> = Vec::new();
    for row in r.deserialize::<TraceRow>() {
        let row = row.map_err(|e| DetectorError::MalformedTrace {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        if let Some(prev) = out.last() {
            if row.at_ms < prev.at {
                return Err(DetectorError::MalformedTrace {
                    line: out.len() as u64 + 2,
                    reason: format!("time {} precedes {}", row.at_ms, prev.at),
                });
            }
        }
        out.push(TraceStep {
            screen_id: row.screen_id,
            action: row.action_kind,
            at: row.at_ms,
        });
    }
    Ok(out)
}
