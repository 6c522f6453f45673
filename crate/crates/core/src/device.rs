//! Device adapter contract and a deterministic simulated device driven by a
//! scripted app model.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::TraceStep;
use crate::matcher::{match_label, Lexicon, DEFAULT_THRESHOLD};
use crate::motifs::MotifLabel;
use crate::navigator::{FormValueStore, UiAction};
use crate::snapshot::{parse_hierarchy, Bounds, RegionSource, TextRegion, UiNode, UiSnapshot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeviceError {
    #[error("device unresponsive: {0}")]
    Unresponsive(String),
    #[error("unsupported action: {0}")]
    Unsupported(String),
}

/// What the control loop needs from a device.
pub trait DeviceAdapter {
    /// Current screen; never changes device state.
    fn capture(&self) -> Result<UiSnapshot, DeviceError>;
    fn perform(&mut self, action: &UiAction) -> Result<(), DeviceError>;
    /// Back to the start screen with transient state cleared.
    fn restart(&mut self) -> Result<(), DeviceError>;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{path}: {reason}")]
pub struct SpecError {
    /// Location of the offending element, e.g. `transitions[2].guard.node`.
    pub path: String,
    pub reason: String,
}

impl SpecError {
    fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AppSpecDoc {
    id: String,
    start: String,
    #[serde(default = "default_screen_size")]
    screen_size: [u32; 2],
    screens: Vec<ScreenSpec>,
    #[serde(default)]
    transitions: Vec<TransitionSpec>,
}

fn default_screen_size() -> [u32; 2] {
    [1080, 1920]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScreenSpec {
    id: String,
    motif: String,
    #[serde(default)]
    activity: Option<String>,
    hierarchy: String,
    #[serde(default)]
    regions: Vec<RegionSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionSpec {
    text: String,
    bounds: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionSpec {
    from: String,
    to: String,
    guard: GuardSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum GuardSpec {
    Tap { node: String },
    TypedAndSubmit { fields: Vec<FieldSpec>, submit: String },
    Back,
    Sequence { steps: Vec<GuardSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldSpec {
    node: String,
    column: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimScreen {
    pub screen_id: String,
    pub motif: MotifLabel,
    pub activity: String,
    pub root: UiNode,
    pub regions: Vec<TextRegion>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequiredField {
    pub node_id: usize,
    /// Column name as the app understands it; resolved against the session
    /// store with the matcher.
    pub column: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    TapNode(usize),
    TypedAndSubmit {
        fields: Vec<RequiredField>,
        submit: usize,
    },
    BackPress,
    SequenceOf(Vec<Guard>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTransition {
    pub from: String,
    pub to: String,
    pub guard: Guard,
}

impl SimTransition {
    fn key(&self, index: usize) -> String {
        format!("{}->{}#{index}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimApp {
    pub id: String,
    pub screens: Vec<SimScreen>,
    pub transitions: Vec<SimTransition>,
    pub start: String,
    pub screen_size: (u32, u32),
}

/// `#N` addresses node id N; anything else is the label of the first node
/// (document order) carrying it.
fn resolve_node(root: &UiNode, reference: &str, path: &str) -> Result<usize, SpecError> {
    if let Some(id) = reference.strip_prefix('#') {
        let id: usize = id
            .parse()
            .map_err(|_| SpecError::new(path, format!("bad node id {reference:?}")))?;
        return root
            .find(id)
            .map(|n| n.node_id)
            .ok_or_else(|| SpecError::new(path, format!("no node with id {id}")));
    }
    root.iter()
        .find(|n| n.label == reference)
        .map(|n| n.node_id)
        .ok_or_else(|| SpecError::new(path, format!("no node labeled {reference:?}")))
}

fn resolve_guard(spec: &GuardSpec, root: &UiNode, path: &str, nested: bool) -> Result<Guard, SpecError> {
    Ok(match spec {
        GuardSpec::Tap { node } => Guard::TapNode(resolve_node(root, node, &format!("{path}.node"))?),
        GuardSpec::Back => Guard::BackPress,
        GuardSpec::TypedAndSubmit { fields, submit } => {
            if fields.is_empty() {
                return Err(SpecError::new(format!("{path}.fields"), "at least one field required"));
            }
            let mut out = Vec::new();
            for (i, f) in fields.iter().enumerate() {
                let fpath = format!("{path}.fields[{i}]");
                let node_id = resolve_node(root, &f.node, &format!("{fpath}.node"))?;
                if !root.find(node_id).is_some_and(|n| n.editable) {
                    return Err(SpecError::new(format!("{fpath}.node"), "field is not editable"));
                }
                out.push(RequiredField {
                    node_id,
                    column: f.column.clone(),
                });
            }
            Guard::TypedAndSubmit {
                fields: out,
                submit: resolve_node(root, submit, &format!("{path}.submit"))?,
            }
        }
        GuardSpec::Sequence { steps } => {
            if nested {
                return Err(SpecError::new(path, "sequences cannot nest"));
            }
            if steps.is_empty() {
                return Err(SpecError::new(format!("{path}.steps"), "empty sequence"));
            }
            let steps = steps
                .iter()
                .enumerate()
                .map(|(i, s)| resolve_guard(s, root, &format!("{path}.steps[{i}]"), true))
                .collect::<Result<_, _>>()?;
            Guard::SequenceOf(steps)
        }
    })
}

impl SimApp {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let doc: AppSpecDoc = toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .map(|s| format!("byte {}", s.start))
                .unwrap_or_else(|| "document".into());
            SpecError::new(path, e.message().to_string())
        })?;
        let [w, h] = doc.screen_size;
        if w == 0 || h == 0 {
            return Err(SpecError::new("screen_size", "dimensions must be positive"));
        }
        let mut screens: Vec<SimScreen> = Vec::new();
        for (i, s) in doc.screens.iter().enumerate() {
            let path = format!("screens[{i}]");
            if screens.iter().any(|x| x.screen_id == s.id) {
                return Err(SpecError::new(format!("{path}.id"), format!("duplicate screen {:?}", s.id)));
            }
            let motif: MotifLabel = s
                .motif
                .parse()
                .map_err(|e: crate::motifs::MotifError| SpecError::new(format!("{path}.motif"), e.to_string()))?;
            let root = parse_hierarchy(&s.hierarchy)
                .map_err(|e| SpecError::new(format!("{path}.hierarchy"), e.to_string()))?;
            let mut regions = Vec::new();
            for (j, r) in s.regions.iter().enumerate() {
                let rpath = format!("{path}.regions[{j}]");
                let bounds = Bounds::parse(&r.bounds).map_err(|e| SpecError::new(&rpath, e.to_string()))?;
                let region = TextRegion::new(&r.text, bounds, RegionSource::ExternalRecognizer)
                    .ok_or_else(|| SpecError::new(format!("{rpath}.text"), "blank text"))?;
                regions.push(region);
            }
            screens.push(SimScreen {
                screen_id: s.id.clone(),
                motif,
                activity: s.activity.clone().unwrap_or_else(|| s.id.clone()),
                root,
                regions,
            });
        }
        let find = |id: &str| screens.iter().find(|s| s.screen_id == id);
        if find(&doc.start).is_none() {
            return Err(SpecError::new("start", format!("unknown screen {:?}", doc.start)));
        }
        let mut transitions = Vec::new();
        for (i, t) in doc.transitions.iter().enumerate() {
            let path = format!("transitions[{i}]");
            let from = find(&t.from)
                .ok_or_else(|| SpecError::new(format!("{path}.from"), format!("unknown screen {:?}", t.from)))?;
            if find(&t.to).is_none() {
                return Err(SpecError::new(format!("{path}.to"), format!("unknown screen {:?}", t.to)));
            }
            transitions.push(SimTransition {
                from: t.from.clone(),
                to: t.to.clone(),
                guard: resolve_guard(&t.guard, &from.root, &format!("{path}.guard"), false)?,
            });
        }
        Ok(Self {
            id: doc.id,
            screens,
            transitions,
            start: doc.start,
            screen_size: (w, h),
        })
    }

    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpecError::new(path.display().to_string(), e.to_string()))?;
        Self::parse(&text).map_err(|e| SpecError::new(format!("{}: {}", path.display(), e.path), e.reason))
    }

    /// Screens plus transitions.
    pub fn coverage_universe(&self) -> usize {
        self.screens.len() + self.transitions.len()
    }

    pub fn screen(&self, id: &str) -> Option<&SimScreen> {
        self.screens.iter().find(|s| s.screen_id == id)
    }

    fn screen_index(&self, id: &str) -> usize {
        self.screens
            .iter()
            .position(|s| s.screen_id == id)
            .expect("validated screen reference")
    }
}

pub const DEFAULT_EXPLORE_COST_MS: u64 = 200;
pub const DEFAULT_HEURISTIC_COST_MS: u64 = 1000;

/// Deterministic state machine over a [`SimApp`] with a logical clock.
#[derive(Debug, Clone)]
pub struct SimDevice {
    app: SimApp,
    store: FormValueStore,
    /// Store column for each (transition, field) pair, resolved once.
    field_columns: BTreeMap<(usize, usize), Option<String>>,
    current: usize,
    typed: BTreeMap<usize, String>,
    progress: Vec<usize>,
    clock: u64,
    action_cost: u64,
    trace: Vec<TraceStep>,
    visited: BTreeSet<String>,
    fired: BTreeSet<String>,
}

fn collect_fields<'g>(guard: &'g Guard, out: &mut Vec<&'g RequiredField>) {
    match guard {
        Guard::TypedAndSubmit { fields, .. } => out.extend(fields),
        Guard::SequenceOf(steps) => steps.iter().for_each(|s| collect_fields(s, out)),
        _ => {}
    }
}

impl SimDevice {
    pub fn new(app: SimApp, store: FormValueStore, lexicon: &Lexicon) -> Self {
        Self::with_threshold(app, store, lexicon, DEFAULT_THRESHOLD)
    }

    pub fn with_threshold(app: SimApp, store: FormValueStore, lexicon: &Lexicon, threshold: f64) -> Self {
        let mut field_columns = BTreeMap::new();
        let names = store.column_names();
        for (t, tr) in app.transitions.iter().enumerate() {
            let mut fields = Vec::new();
            collect_fields(&tr.guard, &mut fields);
            for (f, field) in fields.into_iter().enumerate() {
                let column = match_label(&field.column, &names, lexicon, threshold).map(|m| m.candidate);
                field_columns.insert((t, f), column);
            }
        }
        let current = app.screen_index(&app.start);
        let mut device = Self {
            progress: vec![0; app.transitions.len()],
            visited: BTreeSet::from([app.start.clone()]),
            app,
            store,
            field_columns,
            current,
            typed: BTreeMap::new(),
            clock: 0,
            action_cost: DEFAULT_EXPLORE_COST_MS,
            trace: Vec::new(),
            fired: BTreeSet::new(),
        };
        device.current = current;
        device
    }

    pub fn app(&self) -> &SimApp {
        &self.app
    }

    pub fn now_ms(&self) -> u64 {
        self.clock
    }

    /// Logical duration of every non-`Wait` action from now on.
    pub fn set_action_cost(&mut self, ms: u64) {
        self.action_cost = ms;
    }

    pub fn action_cost(&self) -> u64 {
        self.action_cost
    }

    pub fn current_screen(&self) -> &SimScreen {
        &self.app.screens[self.current]
    }

    pub fn typed_text(&self, node_id: usize) -> Option<&str> {
        self.typed.get(&node_id).map(String::as_str)
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    pub fn covered_screens(&self) -> &BTreeSet<String> {
        &self.visited
    }

    pub fn covered_transitions(&self) -> &BTreeSet<String> {
        &self.fired
    }

    pub fn coverage(&self) -> usize {
        self.visited.len() + self.fired.len()
    }

    fn node_bounds(&self, node_id: usize) -> Option<Bounds> {
        self.current_screen().root.find(node_id).map(|n| n.bounds)
    }

    fn tapped(&self, node_id: usize, action: &UiAction) -> bool {
        match action {
            UiAction::Tap { x, y } => self.node_bounds(node_id).is_some_and(|b| b.contains(*x, *y)),
            _ => false,
        }
    }

    /// Whether a single (non-sequence) step is satisfied by `action`.
    fn step_matches(&self, transition: usize, field_offset: &mut usize, guard: &Guard, action: &UiAction) -> bool {
        match guard {
            Guard::TapNode(n) => self.tapped(*n, action),
            Guard::BackPress => *action == UiAction::Back,
            Guard::TypedAndSubmit { fields, submit } => {
                let base = *field_offset;
                *field_offset += fields.len();
                self.tapped(*submit, action)
                    && fields.iter().enumerate().all(|(i, f)| {
                        let column = self.field_columns.get(&(transition, base + i)).cloned().flatten();
                        match (column, self.typed.get(&f.node_id)) {
                            (Some(c), Some(text)) => self
                                .store
                                .values(&c)
                                .is_some_and(|vals| vals.iter().any(|v| v == text)),
                            _ => false,
                        }
                    })
            }
            Guard::SequenceOf(_) => unreachable!("sequences are flattened by the caller"),
        }
    }

    fn enter(&mut self, transition: usize) {
        let tr = &self.app.transitions[transition];
        self.fired.insert(tr.key(transition));
        self.visited.insert(tr.to.clone());
        self.current = self.app.screen_index(&tr.to);
        self.typed.clear();
        self.progress.iter_mut().for_each(|p| *p = 0);
    }

    /// Advances sequence progress for every outgoing transition and fires
    /// the first satisfied one in declaration order.
    fn evaluate(&mut self, action: &UiAction) {
        let here = self.current_screen().screen_id.clone();
        let mut fire = None;
        for t in 0..self.app.transitions.len() {
            if self.app.transitions[t].from != here {
                continue;
            }
            let guard = self.app.transitions[t].guard.clone();
            let satisfied = match &guard {
                Guard::SequenceOf(steps) => {
                    let mut offset = 0;
                    let next = &steps[self.progress[t]];
                    // fields of earlier steps precede this one in the column table
                    for s in &steps[..self.progress[t]] {
                        if let Guard::TypedAndSubmit { fields, .. } = s {
                            offset += fields.len();
                        }
                    }
                    if self.step_matches(t, &mut offset, next, action) {
                        self.progress[t] += 1;
                    } else {
                        let mut first_offset = 0;
                        self.progress[t] = usize::from(self.step_matches(t, &mut first_offset, &steps[0], action));
                    }
                    self.progress[t] == steps.len()
                }
                single => self.step_matches(t, &mut 0, single, action),
            };
            if satisfied && fire.is_none() {
                fire = Some(t);
            }
        }
        if let Some(t) = fire {
            self.enter(t);
        }
    }

    fn record(&mut self, action: &UiAction) {
        self.trace.push(TraceStep {
            screen_id: self.current_screen().screen_id.clone(),
            action: action.kind().to_string(),
            at: self.clock,
        });
        self.clock += match action {
            UiAction::Wait { ms } => *ms,
            _ => self.action_cost,
        };
    }

    fn reset_to_start(&mut self) {
        self.current = self.app.screen_index(&self.app.start);
        self.typed.clear();
        self.progress.iter_mut().for_each(|p| *p = 0);
    }

    /// Adds `ms` of idle time without recording an action.
    pub fn advance_clock(&mut self, ms: u64) {
        self.clock += ms;
    }
}

impl DeviceAdapter for SimDevice {
    fn capture(&self) -> Result<UiSnapshot, DeviceError> {
        let screen = self.current_screen();
        Ok(UiSnapshot {
            hierarchy: Some(screen.root.clone()),
            text_regions: screen.regions.clone(),
            activity: screen.activity.clone(),
            window: screen.screen_id.clone(),
            captured_at: self.clock,
            screen_size: self.app.screen_size,
        })
    }

    fn perform(&mut self, action: &UiAction) -> Result<(), DeviceError> {
        self.record(action);
        match action {
            UiAction::Wait { .. } => {}
            UiAction::Restart => self.reset_to_start(),
            UiAction::Tap { x, y } => {
                let (w, h) = self.app.screen_size;
                if *x < w && *y < h {
                    self.evaluate(action);
                }
            }
            UiAction::Back => self.evaluate(action),
            UiAction::TypeText { node_id, text } => {
                if self.current_screen().root.find(*node_id).is_some_and(|n| n.editable) {
                    self.typed.insert(*node_id, text.clone());
                }
                self.evaluate(action);
            }
        }
        Ok(())
    }

    fn restart(&mut self) -> Result<(), DeviceError> {
        self.perform(&UiAction::Restart)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionMix {
    pub tap: f64,
    pub back: f64,
    pub type_text: f64,
}

impl Default for ActionMix {
    fn default() -> Self {
        Self {
            tap: 0.8,
            back: 0.1,
            type_text: 0.1,
        }
    }
}

pub const TOKEN_LEN: usize = 6;
const TOKEN_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

/// Seeded random input generator. It never restarts the app.
#[derive(Debug, Clone)]
pub struct RandomExplorer {
    rng: ChaCha8Rng,
    mix: ActionMix,
}

impl RandomExplorer {
    pub fn new(seed: u64, mix: ActionMix) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            mix,
        }
    }

    pub fn token(&mut self) -> String {
        (0..TOKEN_LEN)
            .map(|_| TOKEN_ALPHABET[self.rng.random_range(0..TOKEN_ALPHABET.len())] as char)
            .collect()
    }

    fn random_tap(&mut self, size: (u32, u32)) -> UiAction {
        UiAction::Tap {
            x: self.rng.random_range(0..size.0),
            y: self.rng.random_range(0..size.1),
        }
    }

    /// Next action for the given screen. A typing draw on a screen without
    /// editable nodes becomes a tap.
    pub fn next_action(&mut self, snapshot: &UiSnapshot) -> UiAction {
        let total = self.mix.tap + self.mix.back + self.mix.type_text;
        let u = self.rng.random::<f64>() * total;
        if u < self.mix.tap {
            return self.random_tap(snapshot.screen_size);
        }
        if u < self.mix.tap + self.mix.back {
            return UiAction::Back;
        }
        let editable: Vec<usize> = snapshot.nodes().filter(|n| n.editable).map(|n| n.node_id).collect();
        if editable.is_empty() {
            return self.random_tap(snapshot.screen_size);
        }
        let node_id = editable[self.rng.random_range(0..editable.len())];
        let text = self.token();
        UiAction::TypeText { node_id, text }
    }
}

/// Drives `device` for `budget` actions and returns the trace they produced.
pub fn random_explorer(
    device: &mut SimDevice,
    seed: u64,
    budget: usize,
    mix: ActionMix,
) -> Result<Vec<TraceStep>, DeviceError> {
    let start = device.trace().len();
    let mut explorer = RandomExplorer::new(seed, mix);
    for _ in 0..budget {
        let snap = device.capture()?;
        let action = explorer.next_action(&snap);
        device.perform(&action)?;
    }
    Ok(device.trace()[start..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    const APP: &str = r#"
id = "mini"
start = "a"

[[screens]]
id = "a"
motif = "Form"
hierarchy = '''
<node class="F" bounds="[0,0][1080,1920]">
  <node class="android.widget.EditText" text="First name" bounds="[0,100][1080,200]" editable="true"/>
  <node class="android.widget.EditText" text="Surname" bounds="[0,300][1080,400]" editable="true"/>
  <node class="B" text="Submit" bounds="[0,500][1080,600]" clickable="true"/>
  <node class="B" text="Help" bounds="[0,700][1080,800]" clickable="true"/>
</node>
'''

[[screens]]
id = "b"
motif = "Feed"
hierarchy = '<node class="F" bounds="[0,0][1080,1920]"/>'

[[transitions]]
from = "a"
to = "b"
guard = { kind = "typed_and_submit", submit = "Submit", fields = [
  { node = "First name", column = "first name" },
  { node = "Surname", column = "last name" },
] }

[[transitions]]
from = "a"
to = "b"
guard = { kind = "sequence", steps = [{ kind = "tap", node = "Help" }, { kind = "back" }] }

[[transitions]]
from = "b"
to = "a"
guard = { kind = "back" }
"#;

    fn device() -> SimDevice {
        let store = FormValueStore::parse_csv("first name,surname\nAda,Lovelace\n").unwrap();
        SimDevice::new(SimApp::parse(APP).unwrap(), store, &Lexicon::builtin())
    }

    fn tap(y: u32) -> UiAction {
        UiAction::Tap { x: 10, y }
    }

    #[test]
    fn minimal_spec() {
        let app = SimApp::parse(
            "id = \"one\"\nstart = \"s\"\n[[screens]]\nid = \"s\"\nmotif = \"Splash\"\nhierarchy = '<node class=\"F\" bounds=\"[0,0][10,10]\"/>'\n",
        )
        .unwrap();
        assert_eq!(app.coverage_universe(), 1);
    }

    #[test]
    fn dangling_reference_rejected() {
        let bad = APP.replace("to = \"b\"\nguard = { kind = \"typed", "to = \"x\"\nguard = { kind = \"typed");
        let err = SimApp::parse(&bad).unwrap_err();
        assert_eq!(err.path, "transitions[0].to");
        let bad = APP.replace("node = \"Help\"", "node = \"Nope\"");
        assert_eq!(SimApp::parse(&bad).unwrap_err().path, "transitions[1].guard.steps[0].node");
    }

    #[test]
    fn partial_form_does_not_fire() {
        let mut d = device();
        d.perform(&UiAction::TypeText { node_id: 1, text: "Ada".into() }).unwrap();
        d.perform(&tap(550)).unwrap();
        assert_eq!(d.current_screen().screen_id, "a");
        d.perform(&UiAction::TypeText { node_id: 2, text: "Lovelace".into() }).unwrap();
        d.perform(&tap(550)).unwrap();
        assert_eq!(d.current_screen().screen_id, "b");
        assert_eq!(d.coverage(), 3);
    }

    #[test]
    fn random_text_never_satisfies() {
        let mut d = device();
        d.perform(&UiAction::TypeText { node_id: 1, text: "abc123".into() }).unwrap();
        d.perform(&UiAction::TypeText { node_id: 2, text: "Lovelace".into() }).unwrap();
        d.perform(&tap(550)).unwrap();
        assert_eq!(d.current_screen().screen_id, "a");
    }

    #[test]
    fn sequence_guard_and_reset() {
        let mut d = device();
        d.perform(&tap(750)).unwrap();
        d.perform(&tap(1500)).unwrap();
        d.perform(&UiAction::Back).unwrap();
        assert_eq!(d.current_screen().screen_id, "a");
        d.perform(&tap(750)).unwrap();
        d.perform(&UiAction::Wait { ms: 300 }).unwrap();
        d.perform(&UiAction::Back).unwrap();
        assert_eq!(d.current_screen().screen_id, "b");
    }

    #[test]
    fn restart_clears_state() {
        let mut d = device();
        d.perform(&UiAction::TypeText { node_id: 1, text: "Ada".into() }).unwrap();
        d.perform(&tap(750)).unwrap();
        d.perform(&UiAction::Back).unwrap();
        assert_eq!(d.current_screen().screen_id, "b");
        d.restart().unwrap();
        assert_eq!(d.current_screen().screen_id, "a");
        assert_eq!(d.typed_text(1), None);
        assert_eq!(d.trace().len(), 4);
        assert_eq!(d.now_ms(), 800);
    }

    #[test]
    fn capture_is_pure_and_invalid_taps_are_noops() {
        let mut d = device();
        let a = d.capture().unwrap();
        assert_eq!(a, d.capture().unwrap());
        d.perform(&UiAction::Tap { x: 5000, y: 5000 }).unwrap();
        assert_eq!(d.trace().len(), 1);
        assert_eq!(d.current_screen().screen_id, "a");
    }

    #[test]
    fn explorer_is_seeded() {
        let mut a = device();
        let mut b = device();
        assert!(random_explorer(&mut a, 3, 0, ActionMix::default()).unwrap().is_empty());
        let ta = random_explorer(&mut a, 9, 200, ActionMix::default()).unwrap();
        let tb = random_explorer(&mut b, 9, 200, ActionMix::default()).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(ta.len(), 200);
    }

    #[test]
    fn tokens_are_short_lowercase_alnum() {
        let mut e = RandomExplorer::new(1, ActionMix::default());
        for _ in 0..100 {
            let t = e.token();
            assert_eq!(t.len(), TOKEN_LEN);
            assert!(t.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()));
        }
    }
}
