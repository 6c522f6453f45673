//! Motif-specific escape heuristics: plan construction, execution against a
//! device, and the top-N fallback with restart escalation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::{DeviceAdapter, DeviceError};
use crate::matcher::{match_label, normalize, Lexicon, DEFAULT_THRESHOLD};
use crate::motifs::{tarpit_candidates, MotifLabel, MotifPrediction};
use crate::snapshot::{signature, Bounds, RegionSource, ScreenSignature, TextRegion, UiNode, UiSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UiAction {
    Tap { x: u32, y: u32 },
    TypeText { node_id: usize, text: String },
    Back,
    Restart,
    Wait { ms: u64 },
}

impl UiAction {
    /// Short kind name used in traces.
    pub fn kind(&self) -> &'static str {
        match self {
            UiAction::Tap { .. } => "tap",
            UiAction::TypeText { .. } => "type",
            UiAction::Back => "back",
            UiAction::Restart => "restart",
            UiAction::Wait { .. } => "wait",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HeuristicKind {
    LogIn,
    Onboarding,
    Player,
    Advertisement,
    Viewer,
    Form,
    WebBrowser,
    Search,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 8] = [
        HeuristicKind::LogIn,
        HeuristicKind::Onboarding,
        HeuristicKind::Player,
        HeuristicKind::Advertisement,
        HeuristicKind::Viewer,
        HeuristicKind::Form,
        HeuristicKind::WebBrowser,
        HeuristicKind::Search,
    ];

    pub fn from_motif(label: MotifLabel) -> Option<Self> {
        Some(match label {
            MotifLabel::LogIn => HeuristicKind::LogIn,
            MotifLabel::Onboarding => HeuristicKind::Onboarding,
            MotifLabel::Player => HeuristicKind::Player,
            MotifLabel::Advertisement => HeuristicKind::Advertisement,
            MotifLabel::Viewer => HeuristicKind::Viewer,
            MotifLabel::Form => HeuristicKind::Form,
            MotifLabel::WebBrowser => HeuristicKind::WebBrowser,
            MotifLabel::Search => HeuristicKind::Search,
            _ => return None,
        })
    }

    pub fn motif(self) -> MotifLabel {
        match self {
            HeuristicKind::LogIn => MotifLabel::LogIn,
            HeuristicKind::Onboarding => MotifLabel::Onboarding,
            HeuristicKind::Player => MotifLabel::Player,
            HeuristicKind::Advertisement => MotifLabel::Advertisement,
            HeuristicKind::Viewer => MotifLabel::Viewer,
            HeuristicKind::Form => MotifLabel::Form,
            HeuristicKind::WebBrowser => MotifLabel::WebBrowser,
            HeuristicKind::Search => MotifLabel::Search,
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.motif().name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionPlan {
    pub kind: HeuristicKind,
    pub actions: Vec<UiAction>,
}

#[derive(Debug, Error, PartialEq)]
pub enum NavError {
    #[error("no element on the screen suits the {0} heuristic")]
    NoApplicableTarget(HeuristicKind),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("store: {0}")]
    Malformed(String),
    #[error("store column {0:?} has no values")]
    EmptyColumn(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct StoreColumn {
    name: String,
    values: Vec<String>,
    cursor: usize,
}

/// Preset column values used to fill input fields. Each column hands out its
/// values round-robin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormValueStore {
    columns: Vec<StoreColumn>,
}

impl FormValueStore {
    pub fn from_columns<I, N, V>(columns: I) -> Result<Self, StoreError>
    where
        I: IntoIterator<Item = (N, Vec<V>)>,
        N: Into<String>,
        V: Into<String>,
    {
        let mut out = Vec::new();
        for (name, values) in columns {
            let name = name.into();
            let values: Vec<String> = values.into_iter().map(Into::into).collect();
            if values.is_empty() {
                return Err(StoreError::EmptyColumn(name));
            }
            out.push(StoreColumn {
                name,
                values,
                cursor: 0,
            });
        }
        Ok(Self { columns: out })
    }

    /// Header row of column names, then rows of values; empty cells are
    /// skipped so columns may have different lengths.
    pub fn parse_csv(text: &str) -> Result<Self, StoreError> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| StoreError::Malformed(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let mut values: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for record in reader.records() {
            let record = record.map_err(|e| StoreError::Malformed(e.to_string()))?;
            for (i, cell) in record.iter().enumerate() {
                if i >= headers.len() {
                    return Err(StoreError::Malformed(format!(
                        "row has more cells than the {} headers",
                        headers.len()
                    )));
                }
                if !cell.is_empty() {
                    values[i].push(cell.to_string());
                }
            }
        }
        Self::from_columns(headers.into_iter().zip(values))
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let text = std::fs::read_to_string(path).map_err(|e| StoreError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse_csv(&text)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn values(&self, column: &str) -> Option<&[String]> {
        self.columns
            .iter()
            .find(|c| c.name == column)
            .map(|c| c.values.as_slice())
    }

    /// Current value of `column`, advancing its cursor.
    pub fn next_value(&mut self, column: &str) -> Option<String> {
        let col = self.columns.iter_mut().find(|c| c.name == column)?;
        let value = col.values[col.cursor].clone();
        col.cursor = (col.cursor + 1) % col.values.len();
        Some(value)
    }

    pub fn reset_cursors(&mut self) {
        for c in &mut self.columns {
            c.cursor = 0;
        }
    }

    /// Store column matching a field label.
    pub fn match_column(&self, label: &str, lexicon: &Lexicon, threshold: f64) -> Option<String> {
        match_label(label, &self.column_names(), lexicon, threshold).map(|m| m.candidate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavigatorConfig {
    pub threshold: f64,
    /// How many tarpit heuristics to try before restarting.
    pub top_n: usize,
    pub onboarding_pages: usize,
}

impl Default for NavigatorConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            top_n: 3,
            onboarding_pages: 5,
        }
    }
}

const LOGIN_INTENTS: &[&str] = &["log in", "sign in", "submit"];
const ONBOARDING_INTENTS: &[&str] = &["next", "continue", "skip", "done", "get started"];
const PLAYER_INTENTS: &[&str] = &["settings", "share", "more"];
const AD_INTENTS: &[&str] = &["close", "x", "dismiss", "skip ad"];
const FORM_INTENTS: &[&str] = &["submit", "done", "save", "continue", "next"];
const SEARCH_FIELD_INTENTS: &[&str] = &["search", "query", "find"];
const SEARCH_BUTTON_INTENTS: &[&str] = &["search", "go"];
const AD_BAND: f64 = 0.15;
const LABEL_REACH: f64 = 1.5;

struct Context<'a> {
    snapshot: &'a UiSnapshot,
    lexicon: &'a Lexicon,
    threshold: f64,
}

impl Context<'_> {
    fn tap(&self, b: &Bounds) -> UiAction {
        let (cx, cy) = b.center();
        let (w, h) = self.snapshot.screen_size;
        UiAction::Tap {
            x: cx.min(w - 1),
            y: cy.min(h - 1),
        }
    }

    fn screen_center(&self) -> UiAction {
        let (w, h) = self.snapshot.screen_size;
        UiAction::Tap { x: w / 2, y: h / 2 }
    }

    /// Node label, or the text of recognizer regions overlapping it.
    fn visible_text(&self, node: &UiNode) -> String {
        if !node.label.trim().is_empty() {
            return node.label.clone();
        }
        self.snapshot
            .text_regions
            .iter()
            .filter(|r| r.bounds.intersection(&node.bounds).is_some())
            .map(|r| r.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn intent_score(&self, text: &str, intents: &[&str]) -> Option<f64> {
        match_label(text, intents, self.lexicon, self.threshold).map(|m| m.score)
    }

    /// Best-scoring clickable node whose text matches one of `intents`.
    /// Ties go to the node whose literal text is the earlier intent (so
    /// "Next" beats its synonym "Skip"), then to document order.
    fn clickable_matching(&self, intents: &[&str]) -> Option<&UiNode> {
        let mut best: Option<(&UiNode, f64, usize)> = None;
        for node in self.snapshot.nodes().filter(|n| n.clickable && !n.editable) {
            let text = self.visible_text(node);
            let Some(m) = match_label(&text, intents, self.lexicon, self.threshold) else {
                continue;
            };
            let literal = normalize(&text);
            let rank = intents.iter().position(|i| *i == literal).unwrap_or(intents.len());
            if best.is_none_or(|(_, s, r)| m.score > s || (m.score == s && rank < r)) {
                best = Some((node, m.score, rank));
            }
        }
        best.map(|(n, _, _)| n)
    }

    fn smallest<'n>(&self, nodes: impl Iterator<Item = &'n UiNode>) -> Option<&'n UiNode> {
        nodes
            .filter(|n| n.bounds.area() > 0)
            .min_by(|a, b| a.bounds.area().cmp(&b.bounds.area()).then(a.node_id.cmp(&b.node_id)))
    }

    /// Editable nodes sorted top-to-bottom, then left-to-right.
    fn fields(&self) -> Vec<&UiNode> {
        let mut fields: Vec<&UiNode> = self.snapshot.nodes().filter(|n| n.editable).collect();
        fields.sort_by_key(|n| (n.bounds.top, n.bounds.left, n.node_id));
        fields
    }

    /// The field's own label, else the nearest text above or to the left
    /// within `LABEL_REACH` field heights.
    fn field_label(&self, field: &UiNode) -> Option<String> {
        if !field.label.trim().is_empty() {
            return Some(field.label.clone());
        }
        let reach = (f64::from(field.bounds.height()) * LABEL_REACH).round() as u32;
        let derived = self
            .snapshot
            .nodes()
            .filter(|n| n.node_id != field.node_id && !n.editable)
            .filter_map(|n| TextRegion::new(&n.label, n.bounds, RegionSource::HierarchyLabel));
        let regions = self.snapshot.text_regions.iter().cloned().chain(derived);
        let b = &field.bounds;
        let mut best: Option<(u32, String)> = None;
        for r in regions {
            let rb = &r.bounds;
            let h_overlap = rb.left < b.right && b.left < rb.right;
            let v_overlap = rb.top < b.bottom && b.top < rb.bottom;
            let distance = if rb.bottom <= b.top && h_overlap {
                Some(b.top - rb.bottom)
            } else if rb.right <= b.left && v_overlap {
                Some(b.left - rb.right)
            } else {
                None
            };
            if let Some(d) = distance.filter(|d| *d <= reach) {
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, r.text));
                }
            }
        }
        best.map(|(_, t)| t)
    }

    /// TypeText actions for every field whose label maps to a store column.
    fn fill_fields(&self, store: &mut FormValueStore) -> Vec<UiAction> {
        let mut actions = Vec::new();
        for field in self.fields() {
            let Some(label) = self.field_label(field) else {
                continue;
            };
            let Some(column) = store.match_column(&label, self.lexicon, self.threshold) else {
                continue;
            };
            if let Some(text) = store.next_value(&column) {
                actions.push(UiAction::TypeText {
                    node_id: field.node_id,
                    text,
                });
            }
        }
        actions
    }
}

pub fn build_plan(
    kind: HeuristicKind,
    snapshot: &UiSnapshot,
    store: &mut FormValueStore,
    lexicon: &Lexicon,
    config: &NavigatorConfig,
) -> Result<ActionPlan, NavError> {
    let cx = Context {
        snapshot,
        lexicon,
        threshold: config.threshold,
    };
    let none = || NavError::NoApplicableTarget(kind);
    let actions = match kind {
        HeuristicKind::LogIn | HeuristicKind::Form => {
            let intents = if kind == HeuristicKind::LogIn {
                LOGIN_INTENTS
            } else {
                FORM_INTENTS
            };
            let mut actions = cx.fill_fields(store);
            let button = cx.clickable_matching(intents);
            if actions.is_empty() && button.is_none() {
                return Err(none());
            }
            if let Some(b) = button {
                actions.push(cx.tap(&b.bounds));
            }
            actions
        }
        HeuristicKind::Onboarding => {
            let button = cx.clickable_matching(ONBOARDING_INTENTS).ok_or_else(none)?;
            let tap = cx.tap(&button.bounds);
            let mut actions = Vec::new();
            for page in 0..config.onboarding_pages.max(1) {
                if page > 0 {
                    actions.push(UiAction::Wait { ms: 500 });
                }
                actions.push(tap.clone());
            }
            actions
        }
        HeuristicKind::Player => {
            let clickable = || snapshot.nodes().filter(|n| n.clickable);
            let target = cx
                .smallest(clickable().filter(|n| cx.intent_score(&cx.visible_text(n), PLAYER_INTENTS).is_some()))
                .or_else(|| cx.smallest(clickable()))
                .ok_or_else(none)?;
            vec![cx.tap(&target.bounds)]
        }
        HeuristicKind::Advertisement => {
            let band = (f64::from(snapshot.screen_size.1) * AD_BAND) as u32;
            let target = cx.clickable_matching(AD_INTENTS).or_else(|| {
                cx.smallest(snapshot.nodes().filter(|n| n.clickable && n.bounds.bottom <= band))
            });
            match target {
                Some(n) => vec![cx.tap(&n.bounds)],
                None => vec![UiAction::Back],
            }
        }
        HeuristicKind::Viewer => {
            let follow = snapshot
                .leaves()
                .find(|n| n.clickable && n.bounds.area() > 0)
                .map(|n| cx.tap(&n.bounds))
                .unwrap_or(UiAction::Back);
            vec![cx.screen_center(), UiAction::Wait { ms: 500 }, follow]
        }
        HeuristicKind::WebBrowser => vec![UiAction::Back, UiAction::Wait { ms: 1000 }],
        HeuristicKind::Search => {
            let field = cx
                .fields()
                .into_iter()
                .find(|f| {
                    cx.field_label(f)
                        .is_some_and(|l| cx.intent_score(&l, SEARCH_FIELD_INTENTS).is_some())
                })
                .ok_or_else(none)?;
            let column = store
                .match_column("query", lexicon, config.threshold)
                .ok_or_else(none)?;
            let text = store.next_value(&column).ok_or_else(none)?;
            let submit = cx
                .clickable_matching(SEARCH_BUTTON_INTENTS)
                .map(|n| &n.bounds)
                .unwrap_or(&field.bounds);
            vec![
                UiAction::TypeText {
                    node_id: field.node_id,
                    text,
                },
                cx.tap(submit),
            ]
        }
    };
    Ok(ActionPlan { kind, actions })
}

/// Runs a plan, returning the screen signatures before and after. A
/// `TypeText` whose target is gone (or no longer editable) is skipped.
pub fn execute<D: DeviceAdapter + ?Sized>(
    plan: &ActionPlan,
    device: &mut D,
) -> Result<(ScreenSignature, ScreenSignature), DeviceError> {
    let before = signature(&device.capture()?);
    for action in &plan.actions {
        if let UiAction::TypeText { node_id, .. } = action {
            let fresh = device.capture()?;
            if !fresh.find(*node_id).is_some_and(|n| n.editable) {
                continue;
            }
        }
        device.perform(action)?;
    }
    let after = signature(&device.capture()?);
    Ok((before, after))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub kind: HeuristicKind,
    pub before: ScreenSignature,
    pub after: ScreenSignature,
    /// False when no element suited the heuristic and nothing was executed.
    pub applicable: bool,
}

impl Attempt {
    pub fn succeeded(&self) -> bool {
        self.before != self.after
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavigationOutcome {
    pub succeeded: bool,
    pub attempts: Vec<Attempt>,
    pub escalated_restart: bool,
}

/// Tries the top tarpit heuristics in ranked order and stops at the first
/// screen change; restarts the app when none helps.
pub fn navigate<D: DeviceAdapter + ?Sized>(
    snapshot: &UiSnapshot,
    prediction: &MotifPrediction,
    device: &mut D,
    store: &mut FormValueStore,
    lexicon: &Lexicon,
    config: &NavigatorConfig,
) -> Result<NavigationOutcome, DeviceError> {
    let mut attempts = Vec::new();
    let mut current = snapshot.clone();
    for (i, label) in tarpit_candidates(prediction, config.top_n).into_iter().enumerate() {
        let kind = HeuristicKind::from_motif(label).expect("tarpit motifs map to heuristics");
        if i > 0 {
            current = device.capture()?;
        }
        let attempt = match build_plan(kind, &current, store, lexicon, config) {
            Ok(plan) => {
                let (before, after) = execute(&plan, device)?;
                Attempt {
                    kind,
                    before,
                    after,
                    applicable: true,
                }
            }
            Err(NavError::NoApplicableTarget(_)) => {
                let sig = signature(&current);
                Attempt {
                    kind,
                    before: sig.clone(),
                    after: sig,
                    applicable: false,
                }
            }
            Err(NavError::Device(e)) => return Err(e),
        };
        let done = attempt.succeeded();
        attempts.push(attempt);
        if done {
            return Ok(NavigationOutcome {
                succeeded: true,
                attempts,
                escalated_restart: false,
            });
        }
    }
    device.restart()?;
    Ok(NavigationOutcome {
        succeeded: false,
        attempts,
        escalated_restart: true,
    })
}

/// True when `text` is a label the heuristics would treat as `intent`.
pub fn matches_intent(text: &str, intent: &str, lexicon: &Lexicon, threshold: f64) -> bool {
    !normalize(text).is_empty() && match_label(text, &[intent], lexicon, threshold).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snapshot::parse_document;

    fn snap(xml: &str) -> UiSnapshot {
        parse_document(xml).unwrap().into_snapshot(vec![]).unwrap()
    }

    fn store() -> FormValueStore {
        FormValueStore::parse_csv(
            "first name,surname,query,username,password\nAda,Lovelace,weather,ada.l,Secret#1\nGrace,Hopper,,g.hopper,\n",
        )
        .unwrap()
    }

    const FORM: &str = r#"<node class="android.widget.FrameLayout" bounds="[0,0][1080,1920]">
  <node class="android.widget.EditText" text="First name" bounds="[100,300][980,420]" editable="true"/>
  <node class="android.widget.EditText" text="Surname" bounds="[100,500][980,620]" editable="true"/>
  <node class="android.widget.Button" text="Submit" bounds="[100,800][980,920]" clickable="true"/>
</node>"#;

    #[test]
    fn form_plan_types_then_submits() {
        let s = snap(FORM);
        let mut st = store();
        let plan = build_plan(HeuristicKind::Form, &s, &mut st, &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(
            plan.actions,
            vec![
                UiAction::TypeText { node_id: 1, text: "Ada".into() },
                UiAction::TypeText { node_id: 2, text: "Lovelace".into() },
                UiAction::Tap { x: 540, y: 860 },
            ]
        );
        let again = build_plan(HeuristicKind::Form, &s, &mut st, &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(again.actions[0], UiAction::TypeText { node_id: 1, text: "Grace".into() });
    }

    #[test]
    fn field_label_from_text_above() {
        let s = snap(
            r#"<node class="F" bounds="[0,0][1080,1920]">
  <node class="T" text="Last name" bounds="[100,200][500,260]"/>
  <node class="android.widget.EditText" bounds="[100,300][980,400]" editable="true"/>
  <node class="T" text="Far away" bounds="[100,1000][500,1060]"/>
  <node class="android.widget.EditText" bounds="[100,1500][980,1600]" editable="true"/>
</node>"#,
        );
        let mut st = store();
        let plan = build_plan(HeuristicKind::Form, &s, &mut st, &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(plan.actions, vec![UiAction::TypeText { node_id: 2, text: "Lovelace".into() }]);
    }

    #[test]
    fn ad_close_button() {
        let s = snap(
            r#"<node class="F" bounds="[0,0][1080,1920]">
  <node class="android.widget.ImageView" bounds="[0,0][1080,1920]" clickable="true"/>
  <node class="android.widget.ImageButton" text="X" bounds="[1032,24][1056,48]" clickable="true"/>
</node>"#,
        );
        let plan = build_plan(HeuristicKind::Advertisement, &s, &mut store(), &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(plan.actions, vec![UiAction::Tap { x: 1044, y: 36 }]);
    }

    #[test]
    fn ad_falls_back_to_band_then_back() {
        let banded = snap(
            r#"<node class="F" bounds="[0,0][1080,1920]">
  <node class="I" bounds="[0,0][1080,1920]" clickable="true"/>
  <node class="I" bounds="[980,40][1040,100]" clickable="true"/>
  <node class="I" bounds="[10,40][200,100]" clickable="true"/>
</node>"#,
        );
        let plan = build_plan(HeuristicKind::Advertisement, &banded, &mut store(), &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(plan.actions, vec![UiAction::Tap { x: 1010, y: 70 }]);
        let bare = snap(r#"<node class="I" bounds="[0,0][1080,1920]"/>"#);
        let plan = build_plan(HeuristicKind::Advertisement, &bare, &mut store(), &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(plan.actions, vec![UiAction::Back]);
    }

    #[test]
    fn viewer_without_clickables() {
        let s = snap(r#"<node class="android.widget.ImageView" bounds="[0,0][1080,1920]"/>"#);
        let plan = build_plan(HeuristicKind::Viewer, &s, &mut store(), &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(
            plan.actions,
            vec![UiAction::Tap { x: 540, y: 960 }, UiAction::Wait { ms: 500 }, UiAction::Back]
        );
    }

    #[test]
    fn player_prefers_settings_then_smallest() {
        let s = snap(
            r#"<node class="F" bounds="[0,0][1080,1920]">
  <node class="V" bounds="[0,0][1080,700]" clickable="true"/>
  <node class="B" text="Play" bounds="[500,750][580,830]" clickable="true"/>
  <node class="B" text="Share" bounds="[900,750][1060,900]" clickable="true"/>
</node>"#,
        );
        let plan = build_plan(HeuristicKind::Player, &s, &mut store(), &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(plan.actions, vec![UiAction::Tap { x: 980, y: 825 }]);
    }

    #[test]
    fn search_without_field_is_inapplicable() {
        let s = snap(FORM);
        let err = build_plan(HeuristicKind::Search, &s, &mut store(), &Lexicon::builtin(), &NavigatorConfig::default()).unwrap_err();
        assert_eq!(err, NavError::NoApplicableTarget(HeuristicKind::Search));
    }

    #[test]
    fn onboarding_taps_five_pages() {
        let s = snap(
            r#"<node class="F" bounds="[0,0][1080,1920]">
  <node class="B" text="Next" bounds="[800,1700][1000,1800]" clickable="true"/>
</node>"#,
        );
        let plan = build_plan(HeuristicKind::Onboarding, &s, &mut store(), &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(plan.actions.len(), 9);
        assert_eq!(plan.actions.iter().filter(|a| a.kind() == "tap").count(), 5);
    }

    #[test]
    fn equal_scores_prefer_earlier_intent() {
        let s = snap(
            r#"<node class="F" bounds="[0,0][1080,1920]">
  <node class="B" text="Skip" bounds="[40,1700][300,1800]" clickable="true"/>
  <node class="B" text="Next" bounds="[800,1700][1000,1800]" clickable="true"/>
</node>"#,
        );
        let plan = build_plan(HeuristicKind::Onboarding, &s, &mut store(), &Lexicon::builtin(), &NavigatorConfig::default()).unwrap();
        assert_eq!(plan.actions[0], UiAction::Tap { x: 900, y: 1750 });
    }

    #[test]
    fn store_round_robin_and_validation() {
        let mut st = store();
        assert_eq!(st.values("password").unwrap(), &["Secret#1".to_string()]);
        assert_eq!(st.next_value("password").unwrap(), "Secret#1");
        assert_eq!(st.next_value("password").unwrap(), "Secret#1");
        assert_eq!(st.next_value("nope"), None);
        assert!(matches!(
            FormValueStore::parse_csv("a,b\n1,\n"),
            Err(StoreError::EmptyColumn(c)) if c == "b"
        ));
    }
}
