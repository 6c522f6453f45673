use proptest::prelude::*;

use tarpitnav::detector::{Detector, PollRecord};
use tarpitnav::engine::{auc, percent_increase, CoverageSeries};
use tarpitnav::matcher::{normalize, score, Lexicon};
use tarpitnav::silhouette::{channel_fractions, render, Pixel};
use tarpitnav::snapshot::{parse_hierarchy, serialize_hierarchy, signature, Bounds, ScreenSignature, UiNode, UiSnapshot};

fn leaf() -> impl Strategy<Value = UiNode> {
    (0u32..400, 0u32..700, 0u32..200, 0u32..300, any::<bool>(), any::<bool>()).prop_map(|(l, t, w, h, text, click)| UiNode {
        class_name: "android.widget.TextView".into(),
        label: if text { "label".into() } else { String::new() },
        bounds: Bounds::new(l, t, l + w, t + h).unwrap(),
        clickable: click,
        ..UiNode::default()
    })
}

fn tree() -> impl Strategy<Value = UiNode> {
    leaf().prop_recursive(3, 24, 4, |inner| {
        (leaf(), prop::collection::vec(inner, 1..4)).prop_map(|(mut parent, children)| {
            parent.class_name = "android.widget.LinearLayout".into();
            parent.children = children;
            parent
        })
    })
}

fn snapshot(root: UiNode) -> UiSnapshot {
    let mut root = root;
    root.renumber();
    UiSnapshot::new(Some(root), Vec::new(), "A", "main", (360, 640)).unwrap()
}

fn rename_classes(node: &mut UiNode) {
    node.class_name = format!("x.{}", node.class_name.len());
    for c in &mut node.children {
        rename_classes(c);
    }
}

proptest! {
    #[test]
    fn raster_ignores_class_names(root in tree(), cw in 1u32..80, ch in 1u32..120) {
        let a = snapshot(root.clone());
        let mut renamed = root;
        rename_classes(&mut renamed);
        let b = snapshot(renamed);
        prop_assert_eq!(render(&a, (cw, ch)).to_ppm(), render(&b, (cw, ch)).to_ppm());
    }

    #[test]
    fn fractions_partition_the_canvas(root in tree(), cw in 1u32..80, ch in 1u32..120, grid in 1u32..10) {
        let img = render(&snapshot(root), (cw, ch));
        prop_assert_eq!(img.pixels().len(), (cw * ch) as usize);
        let f = channel_fractions(&img, grid);
        prop_assert_eq!(f.len(), (3 * grid * grid) as usize);
        for cell in f.chunks(3) {
            prop_assert!((cell.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hierarchy_round_trips(root in tree()) {
        let snap = snapshot(root);
        let text = serialize_hierarchy(snap.hierarchy.as_ref().unwrap());
        let back = parse_hierarchy(&text).unwrap();
        prop_assert_eq!(Some(&back), snap.hierarchy.as_ref());
        let again = UiSnapshot::new(Some(back), Vec::new(), "A", "main", (360, 640)).unwrap();
        prop_assert_eq!(signature(&again), signature(&snap));
    }

    #[test]
    fn percent_increase_sign(base in 1u32..100_000, new in 0u32..100_000) {
        let p = percent_increase(f64::from(base), f64::from(new)).unwrap();
        // one decimal of rounding may flatten tiny changes to zero, never flip them
        let consistent = if new >= base { p >= 0.0 } else { p <= 0.0 };
        prop_assert!(consistent);
        if new == base {
            prop_assert_eq!(p, 0.0);
        }
        let exact = 100.0 * (f64::from(new) - f64::from(base)) / f64::from(base);
        prop_assert!((p - exact).abs() <= 0.05 + 1e-9);
    }

    #[test]
    fn auc_scales_with_interval(values in prop::collection::vec(0.0f64..1000.0, 2..50), dt in 0.1f64..10.0) {
        let one = auc(&CoverageSeries { values: values.clone(), dt: 1.0 }).unwrap();
        let scaled = auc(&CoverageSeries { values, dt }).unwrap();
        prop_assert!((scaled - one * dt).abs() <= 1e-9 * scaled.abs().max(1.0));
    }

    #[test]
    fn labels_match_themselves(label in "[A-Za-z ]{0,20}") {
        let lex = Lexicon::builtin();
        let s = score(&label, &label, &lex);
        if normalize(&label).is_empty() {
            prop_assert_eq!(s, 0.0);
        } else {
            prop_assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn detector_never_fires_early(
        gaps in prop::collection::vec(0u64..4000, 1..200),
        screens in prop::collection::vec(0u64..3, 200),
        trigger in 0u64..20_000,
    ) {
        let mut d = Detector::new(trigger);
        let mut at = 0;
        for (gap, s) in gaps.iter().zip(&screens) {
            at += gap;
            let record = PollRecord {
                signature: ScreenSignature { activity: "A".into(), window: "w".into(), structure_digest: *s },
                at,
            };
            if let Some(e) = d.observe(record).unwrap() {
                prop_assert!(e.fired_at - e.stuck_since >= trigger);
                prop_assert_eq!(e.fired_at, at);
            }
        }
    }
}

#[test]
fn full_cover_leaf_fills_canvas() {
    let root = UiNode {
        class_name: "F".into(),
        bounds: Bounds::new(0, 0, 360, 640).unwrap(),
        ..UiNode::default()
    };
    let img = render(&snapshot(root), (36, 64));
    assert_eq!(img.count(Pixel::NonText), 36 * 64);
}
