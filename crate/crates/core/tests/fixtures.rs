use std::path::{Path, PathBuf};

use tarpitnav::detector::{extract_tarpits, read_trace, TarpitParams};
use tarpitnav::device::SimApp;
use tarpitnav::matcher::Lexicon;
use tarpitnav::navigator::FormValueStore;
use tarpitnav::snapshot::UiSnapshot;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[test]
fn every_app_spec_loads() {
    let mut n = 0;
    for entry in std::fs::read_dir(fixtures().join("apps")).unwrap() {
        let path = entry.unwrap().path();
        let app = SimApp::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(app.coverage_universe() > app.screens.len());
        n += 1;
    }
    assert_eq!(n, 11);
}

#[test]
fn tarpit_apps_start_on_their_tarpit() {
    for (name, motif) in [
        ("login_tarpit", "LogIn"),
        ("onboarding_tarpit", "Onboarding"),
        ("player_tarpit", "Player"),
        ("ad_tarpit", "Advertisement"),
        ("viewer_tarpit", "Viewer"),
        ("form_tarpit", "Form"),
        ("webbrowser_tarpit", "WebBrowser"),
        ("search_tarpit", "Search"),
    ] {
        let app = SimApp::load(&fixtures().join("apps").join(format!("{name}.toml"))).unwrap();
        assert_eq!(app.screen(&app.start).unwrap().motif.name(), motif);
    }
}

/// Random typing produces 6-character lowercase alphanumeric tokens; no store
/// value may look like one, or a lucky token could pass a form guard.
#[test]
fn store_values_are_unreachable_by_random_tokens() {
    let store = FormValueStore::load(&fixtures().join("store.csv")).unwrap();
    for column in store.column_names() {
        for v in store.values(column).unwrap() {
            let token_like = v.len() == 6 && v.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit());
            assert!(!token_like, "{column}: {v:?}");
        }
    }
}

#[test]
fn shipped_lexicon_file_matches_builtin() {
    let lex = Lexicon::load(&fixtures().join("lexicon.txt")).unwrap();
    assert_eq!(lex, Lexicon::builtin());
}

#[test]
fn login_screen_fixture() {
    let snap = UiSnapshot::load(&fixtures().join("login_screen.xml"), None).unwrap();
    assert_eq!(snap.node_count(), 4);
    assert_eq!(snap.nodes().filter(|n| n.editable).count(), 2);
    assert_eq!(snap.activity, "com.example.auth.LoginActivity");
}

#[test]
fn twelve_screen_trace() {
    let trace = read_trace(std::fs::File::open(fixtures().join("trace_12_screens.csv")).unwrap()).unwrap();
    let ids: std::collections::BTreeSet<_> = trace.iter().map(|t| t.screen_id.as_str()).collect();
    assert_eq!(ids.len(), 12);
    let run = |top_k| {
        extract_tarpits(&trace, TarpitParams { top_k, ..TarpitParams::default() })
            .into_iter()
            .collect::<Vec<_>>()
    };
    // s02, s05, s08 and s12 each have a run of >= 5 actions over >= 10 s;
    // s07 and the second s02 visit are too short in count or time
    assert_eq!(run(0), ["s02", "s05", "s08", "s12"]);
    // dwell: s02 20 s, s08 18 s, s07 16 s, then s05 and s06 tie at 15 s
    assert_eq!(run(2), ["s02", "s05", "s08", "s12"]);
    assert_eq!(run(3), ["s02", "s05", "s07", "s08", "s12"]);
    assert_eq!(run(4), ["s02", "s05", "s07", "s08", "s12"]);
    assert_eq!(run(5), ["s02", "s05", "s06", "s07", "s08", "s12"]);
}
