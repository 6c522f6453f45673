//! The exploration control loop and the session metrics built on its
//! reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::{Detector, DetectorError, PollRecord, TarpitEvent, DEFAULT_TRIGGER_MS, POLL_INTERVAL_MS};
use crate::device::{
    ActionMix, DeviceAdapter, DeviceError, RandomExplorer, SimApp, SimDevice, SpecError,
    DEFAULT_EXPLORE_COST_MS, DEFAULT_HEURISTIC_COST_MS,
};
use crate::matcher::Lexicon;
use crate::motifs::{tarpit_candidates, FusedModel, MotifLabel, MotifPrediction};
use crate::navigator::{navigate, FormValueStore, HeuristicKind, NavigatorConfig};
use crate::snapshot::{signature, UiSnapshot};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("reports come from different apps: {0:?} and {1:?}")]
    MixedApps(String, String),
    #[error("percent increase needs a positive base")]
    ZeroBase,
    #[error("coverage series needs at least two values (R_0 and R_1)")]
    ShortSeries,
    #[error("report: {0}")]
    Report(String),
}

/// Anything that ranks motifs for a screen.
pub trait ScreenClassifier {
    fn predict(&self, snapshot: &UiSnapshot) -> MotifPrediction;
}

impl ScreenClassifier for FusedModel {
    fn predict(&self, snapshot: &UiSnapshot) -> MotifPrediction {
        FusedModel::predict(self, snapshot)
    }
}

impl<F: Fn(&UiSnapshot) -> MotifPrediction> ScreenClassifier for F {
    fn predict(&self, snapshot: &UiSnapshot) -> MotifPrediction {
        self(snapshot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub seed: u64,
    /// Explorer actions; heuristic actions are not counted against it.
    pub action_budget: usize,
    pub time_budget_ms: Option<u64>,
    pub trigger_ms: u64,
    pub navigator: NavigatorConfig,
    pub navigator_enabled: bool,
    /// Navigator stays off until the logical clock reaches this offset.
    pub navigator_after_ms: u64,
    pub explore_cost_ms: u64,
    pub heuristic_cost_ms: u64,
    pub mix: ActionMix,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            action_budget: 1000,
            time_budget_ms: None,
            trigger_ms: DEFAULT_TRIGGER_MS,
            navigator: NavigatorConfig::default(),
            navigator_enabled: true,
            navigator_after_ms: 0,
            explore_cost_ms: DEFAULT_EXPLORE_COST_MS,
            heuristic_cost_ms: DEFAULT_HEURISTIC_COST_MS,
            mix: ActionMix::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
}

impl Tally {
    pub fn total(&self) -> usize {
        self.passed + self.failed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptLog {
    pub kind: HeuristicKind,
    pub passed: bool,
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    pub screen_id: String,
    pub event: TarpitEvent,
    /// Empty when the navigator was inactive for this event.
    pub candidates: Vec<MotifLabel>,
    pub attempts: Vec<AttemptLog>,
    pub escalated_restart: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionReport {
    pub version: u32,
    pub app_id: String,
    pub seed: u64,
    pub navigator_enabled: bool,
    pub covered_screens: BTreeSet<String>,
    pub covered_transitions: BTreeSet<String>,
    pub coverage: usize,
    pub coverage_universe: usize,
    pub tarpit_events: Vec<EventLog>,
    pub heuristic_attempts: BTreeMap<HeuristicKind, Tally>,
    /// Every device action, explorer and heuristic alike.
    pub actions_performed: usize,
    pub explorer_actions: usize,
    pub restarts: usize,
    pub elapsed_ms: u64,
    /// `(logical ms, coverage)` at every coverage change.
    pub timeline: Vec<(u64, usize)>,
}

impl SessionReport {
    /// Canonical serialization; identical sessions produce identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        let report: Self = serde_json::from_str(text).map_err(|e| EngineError::Report(e.to_string()))?;
        if report.version != REPORT_FORMAT_VERSION {
            return Err(EngineError::Report(format!("unsupported report version {}", report.version)));
        }
        Ok(report)
    }
}

/// Random exploration with 1 Hz stuck polling; every tarpit event pauses the
/// explorer while the navigator tries to escape.
pub fn run_session(
    app: &SimApp,
    classifier: &dyn ScreenClassifier,
    store: &FormValueStore,
    lexicon: &Lexicon,
    config: &SessionConfig,
) -> Result<SessionReport, EngineError> {
    let mut device = SimDevice::with_threshold(app.clone(), store.clone(), lexicon, config.navigator.threshold);
    device.set_action_cost(config.explore_cost_ms);
    let mut nav_store = store.clone();
    let mut explorer = RandomExplorer::new(config.seed, config.mix);
    let mut detector = Detector::new(config.trigger_ms);
    let mut next_poll = 0u64;
    let mut explorer_actions = 0usize;
    let mut events = Vec::new();
    let mut tallies: BTreeMap<HeuristicKind, Tally> = BTreeMap::new();
    let mut timeline = vec![(0, device.coverage())];
    let mut restarts = 0;

    let note = |device: &SimDevice, timeline: &mut Vec<(u64, usize)>| {
        let cov = device.coverage();
        if timeline.last().is_none_or(|(_, c)| *c != cov) {
            timeline.push((device.now_ms(), cov));
        }
    };
    let out_of_time = |device: &SimDevice| config.time_budget_ms.is_some_and(|t| device.now_ms() >= t);

    loop {
        while next_poll <= device.now_ms() {
            let snap = device.capture()?;
            let record = PollRecord {
                signature: signature(&snap),
                at: next_poll,
            };
            next_poll += POLL_INTERVAL_MS;
            let Some(event) = detector.observe(record)? else {
                continue;
            };
            let active = config.navigator_enabled && device.now_ms() >= config.navigator_after_ms;
            let mut log = EventLog {
                screen_id: snap.window.clone(),
                event,
                candidates: Vec::new(),
                attempts: Vec::new(),
                escalated_restart: false,
            };
            if active {
                device.set_action_cost(config.heuristic_cost_ms);
                let snap = device.capture()?;
                let prediction = classifier.predict(&snap);
                log.candidates = tarpit_candidates(&prediction, config.navigator.top_n);
                let outcome = navigate(&snap, &prediction, &mut device, &mut nav_store, lexicon, &config.navigator)?;
                device.set_action_cost(config.explore_cost_ms);
                for a in &outcome.attempts {
                    let t = tallies.entry(a.kind).or_default();
                    if a.succeeded() {
                        t.passed += 1;
                    } else {
                        t.failed += 1;
                    }
                    log.attempts.push(AttemptLog {
                        kind: a.kind,
                        passed: a.succeeded(),
                        applicable: a.applicable,
                    });
                }
                log.escalated_restart = outcome.escalated_restart;
                restarts += usize::from(outcome.escalated_restart);
                detector.reset();
                // polls are paused while the plan runs and resume on the next tick
                next_poll = (device.now_ms() / POLL_INTERVAL_MS + 1) * POLL_INTERVAL_MS;
                note(&device, &mut timeline);
            }
            events.push(log);
        }
        if explorer_actions >= config.action_budget || out_of_time(&device) {
            break;
        }
        let snap = device.capture()?;
        let action = explorer.next_action(&snap);
        device.perform(&action)?;
        explorer_actions += 1;
        note(&device, &mut timeline);
    }

    Ok(SessionReport {
        version: REPORT_FORMAT_VERSION,
        app_id: app.id.clone(),
        seed: config.seed,
        navigator_enabled: config.navigator_enabled,
        covered_screens: device.covered_screens().clone(),
        covered_transitions: device.covered_transitions().clone(),
        coverage: device.coverage(),
        coverage_universe: app.coverage_universe(),
        tarpit_events: events,
        heuristic_attempts: tallies,
        actions_performed: device.trace().len(),
        explorer_actions,
        restarts,
        elapsed_ms: device.now_ms(),
        timeline,
    })
}

fn same_app(reports: &[SessionReport]) -> Result<(), EngineError> {
    if let Some(first) = reports.first() {
        if let Some(other) = reports.iter().find(|r| r.app_id != first.app_id) {
            return Err(EngineError::MixedApps(first.app_id.clone(), other.app_id.clone()));
        }
    }
    Ok(())
}

/// Size of the union of covered screens plus covered transitions.
pub fn set_union_coverage(reports: &[SessionReport]) -> Result<usize, EngineError> {
    same_app(reports)?;
    let screens: BTreeSet<&String> = reports.iter().flat_map(|r| &r.covered_screens).collect();
    let transitions: BTreeSet<&String> = reports.iter().flat_map(|r| &r.covered_transitions).collect();
    Ok(screens.len() + transitions.len())
}

/// Coverage values `R_0..R_n` sampled every `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSeries {
    pub values: Vec<f64>,
    pub dt: f64,
}

impl CoverageSeries {
    /// `R_i` = union coverage of the first `i` reports; `R_0 = 0`.
    pub fn cumulative(reports: &[SessionReport], dt: f64) -> Result<Self, EngineError> {
        let mut values = vec![0.0];
        for i in 1..=reports.len() {
            values.push(set_union_coverage(&reports[..i])? as f64);
        }
        Ok(Self { values, dt })
    }
}

/// Trapezoid area `sum 0.5 * (R_{i-1} + R_i) * dt`.
pub fn auc(series: &CoverageSeries) -> Result<f64, EngineError> {
    if series.values.len() < 2 {
        return Err(EngineError::ShortSeries);
    }
    Ok(series
        .values
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]) * series.dt)
        .sum())
}

/// `100 * (new - base) / base`, rounded to one decimal.
pub fn percent_increase(base: f64, new: f64) -> Result<f64, EngineError> {
    if base <= 0.0 {
        return Err(EngineError::ZeroBase);
    }
    Ok((1000.0 * (new - base) / base).round() / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicRow {
    pub kind: Option<HeuristicKind>,
    pub passed: usize,
    pub failed: usize,
    pub total: usize,
    /// `None` when there were no attempts.
    pub pass_rate: Option<f64>,
}

impl HeuristicRow {
    fn new(kind: Option<HeuristicKind>, t: Tally) -> Self {
        let total = t.total();
        Self {
            kind,
            passed: t.passed,
            failed: t.failed,
            total,
            pass_rate: (total > 0).then(|| 100.0 * t.passed as f64 / total as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicTable {
    pub rows: Vec<HeuristicRow>,
    pub aggregate: HeuristicRow,
}

impl HeuristicTable {
    pub fn render(&self) -> String {
        let mut out = String::from("heuristic            passed  failed   total   %pass\n");
        let rate = |r: &HeuristicRow| r.pass_rate.map_or("n/a".to_string(), |p| format!("{p:.1}"));
        for r in &self.rows {
            let name = r.kind.map_or("?".into(), |k| k.to_string());
            let _ = writeln!(out, "{name:<20} {:>6} {:>7} {:>7} {:>7}", r.passed, r.failed, r.total, rate(r));
        }
        let a = &self.aggregate;
        let _ = writeln!(out, "{:<20} {:>6} {:>7} {:>7} {:>7}", "all", a.passed, a.failed, a.total, rate(a));
        out
    }
}

/// Per-kind and aggregate pass rates summed over the reports.
pub fn heuristic_success_table(reports: &[SessionReport]) -> HeuristicTable {
    let mut sums: BTreeMap<HeuristicKind, Tally> = BTreeMap::new();
    for r in reports {
        for (kind, t) in &r.heuristic_attempts {
            let s = sums.entry(*kind).or_default();
            s.passed += t.passed;
            s.failed += t.failed;
        }
    }
    let total = sums.values().fold(Tally::default(), |acc, t| Tally {
        passed: acc.passed + t.passed,
        failed: acc.failed + t.failed,
    });
    HeuristicTable {
        rows: sums.into_iter().map(|(k, t)| HeuristicRow::new(Some(k), t)).collect(),
        aggregate: HeuristicRow::new(None, total),
    }
}
