use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use tarpitnav::device::SimApp;
use tarpitnav::engine::{heuristic_success_table, run_session, SessionConfig, SessionReport};
use tarpitnav::matcher::Lexicon;
use tarpitnav::motifs::{MotifLabel, MotifPrediction};
use tarpitnav::navigator::{FormValueStore, HeuristicKind};
use tarpitnav::snapshot::UiSnapshot;

const PER_KIND: [&str; 8] = [
    "login_tarpit",
    "onboarding_tarpit",
    "player_tarpit",
    "ad_tarpit",
    "viewer_tarpit",
    "form_tarpit",
    "webbrowser_tarpit",
    "search_tarpit",
];

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn app(name: &str) -> SimApp {
    SimApp::load(&fixtures().join("apps").join(format!("{name}.toml"))).unwrap()
}

fn store() -> FormValueStore {
    FormValueStore::load(&fixtures().join("store.csv")).unwrap()
}

/// Ranks the screen's true motif first; the simulator exposes the screen id
/// as the window name.
fn oracle(app: &SimApp) -> impl Fn(&UiSnapshot) -> MotifPrediction + '_ {
    move |snap: &UiSnapshot| {
        let motif = app.screen(&snap.window).map_or(MotifLabel::List, |s| s.motif);
        MotifPrediction::forced(&[motif])
    }
}

fn session(app: &SimApp, seed: u64, budget: usize, navigator: bool) -> SessionReport {
    let config = SessionConfig {
        seed,
        action_budget: budget,
        navigator_enabled: navigator,
        ..SessionConfig::default()
    };
    run_session(app, &oracle(app), &store(), &Lexicon::builtin(), &config).unwrap()
}

#[test]
fn zero_budget_covers_only_the_start_screen() {
    let a = app("composite_1");
    let r = session(&a, 3, 0, true);
    assert_eq!(r.coverage, 1);
    assert_eq!(r.covered_screens.iter().collect::<Vec<_>>(), [&a.start]);
    assert!(r.covered_transitions.is_empty());
    assert_eq!(r.actions_performed, 0);
    assert!(r.tarpit_events.is_empty());
}

#[test]
fn ad_baseline_stays_behind_the_ad_unless_it_hits_the_glyph() {
    let a = app("ad_tarpit");
    let mut lucky = 0;
    for seed in 0..20 {
        let base = session(&a, seed, 600, false);
        let nav = session(&a, seed, 600, true);
        // the only way past the ad is a tap on its close glyph
        if base.covered_transitions.contains("ad->content#0") {
            lucky += 1;
            assert!(base.coverage <= nav.coverage, "seed {seed}");
        } else {
            assert_eq!(base.coverage, 1, "seed {seed}");
            assert!(base.coverage < nav.coverage, "seed {seed}");
        }
    }
    assert!(lucky <= 2, "{lucky} of 20 baseline runs hit a 10 px target");
}

#[test]
fn disabled_navigator_only_logs() {
    for name in PER_KIND.iter().chain(&["composite_2"]) {
        let a = app(name);
        let r = session(&a, 1, 300, false);
        assert!(r.heuristic_attempts.is_empty(), "{name}");
        assert_eq!(r.restarts, 0);
        assert_eq!(r.actions_performed, r.explorer_actions);
        for e in &r.tarpit_events {
            assert!(e.candidates.is_empty() && e.attempts.is_empty() && !e.escalated_restart);
        }
    }
}

#[test]
fn navigator_never_loses_coverage_on_tarpit_fixtures() {
    for name in PER_KIND {
        let a = app(name);
        for seed in 0..10 {
            let base = session(&a, seed, 400, false);
            let nav = session(&a, seed, 400, true);
            assert!(nav.coverage >= base.coverage, "{name} seed {seed}: {} < {}", nav.coverage, base.coverage);
        }
    }
}

#[test]
fn report_accounting_is_consistent() {
    for name in ["composite_1", "composite_2", "composite_3"] {
        let a = app(name);
        let r = session(&a, 5, 500, true);
        assert_eq!(r.coverage, r.covered_screens.len() + r.covered_transitions.len());
        assert_eq!(r.coverage_universe, a.coverage_universe());
        let mut recount: BTreeMap<HeuristicKind, (usize, usize)> = BTreeMap::new();
        for e in &r.tarpit_events {
            assert!(e.event.fired_at - e.event.stuck_since >= 10_000);
            for at in &e.attempts {
                let t = recount.entry(at.kind).or_default();
                if at.passed {
                    t.0 += 1;
                } else {
                    t.1 += 1;
                }
            }
        }
        let tallies: BTreeMap<HeuristicKind, (usize, usize)> =
            r.heuristic_attempts.iter().map(|(k, t)| (*k, (t.passed, t.failed))).collect();
        assert_eq!(tallies, recount, "{name}");
        let table = heuristic_success_table(std::slice::from_ref(&r));
        let total: usize = recount.values().map(|(p, f)| p + f).sum();
        assert_eq!(table.aggregate.total, total);
        assert!(r.timeline.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 < w[1].1));
        assert_eq!(r.timeline.last().unwrap().1, r.coverage);
    }
}

#[test]
fn navigator_offset_keeps_early_events_passive() {
    let a = app("composite_3");
    let config = SessionConfig {
        seed: 2,
        action_budget: 800,
        navigator_after_ms: 60_000,
        ..SessionConfig::default()
    };
    let r = run_session(&a, &oracle(&a), &store(), &Lexicon::builtin(), &config).unwrap();
    assert!(!r.tarpit_events.is_empty());
    for e in &r.tarpit_events {
        assert_eq!(e.candidates.is_empty(), e.event.fired_at < 60_000, "{:?}", e.event);
    }
}

#[test]
fn reports_round_trip_and_repeat_exactly() {
    let a = app("composite_1");
    let r = session(&a, 8, 300, true);
    let text = r.to_json();
    assert_eq!(SessionReport::from_json(&text).unwrap(), r);
    assert_eq!(session(&a, 8, 300, true).to_json(), text);
    assert!(SessionReport::from_json(&text.replace("\"version\": 1", "\"version\": 9")).is_err());
}
