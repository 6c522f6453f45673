//! Design-motif taxonomy, screen clustering and the fused motif classifier.

mod classifier;
mod dataset;
mod forest;
mod kmeans;
mod mlp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classifier::{
    evaluate, metrics_from_confusion, predict, train, train_with, ClassMetrics, Combiner, EvalReport,
    FusedModel, TrainConfig, MODEL_FORMAT_VERSION,
};
pub use dataset::{load_manifest, write_manifest, LabeledScreen, ManifestRecord};
pub use forest::{DecisionTree, ForestParams, RandomForest};
pub use kmeans::{cluster_screens, kmeans, Clustering, KMeansFit};
pub use mlp::{Mlp, MlpParams};

#[derive(Debug, Error)]
pub enum MotifError {
    #[error("unknown motif label {0:?}")]
    UnknownLabel(String),
    #[error("fewer distinct points ({distinct}) than kmin ({kmin})")]
    DegenerateInput { distinct: usize, kmin: usize },
    #[error("invalid clustering input: {0}")]
    InvalidInput(String),
    #[error("label {label} has {count} sample(s); at least 2 are required")]
    InsufficientClassSupport { label: MotifLabel, count: usize },
    #[error("invalid split fraction {0}")]
    InvalidSplit(f64),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("duplicate source id {0:?}")]
    DuplicateSourceId(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("model archive error: {0}")]
    Archive(String),
    #[error(transparent)]
    Snapshot(#[from] crate::snapshot::SnapshotError),
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
}

/// The 21 design motifs, in enumeration (tie-break) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MotifLabel {
    Advertisement,
    CalendarTimeWeather,
    Catalog,
    Feed,
    Form,
    HomeMenu,
    List,
    LogIn,
    Map,
    Onboarding,
    Player,
    PopUp,
    Product,
    Search,
    Settings,
    Splash,
    TermsAndConditions,
    TravelBooking,
    TypeMessage,
    Viewer,
    WebBrowser,
}

pub const MOTIF_COUNT: usize = 21;

impl MotifLabel {
    pub const ALL: [MotifLabel; MOTIF_COUNT] = [
        MotifLabel::Advertisement,
        MotifLabel::CalendarTimeWeather,
        MotifLabel::Catalog,
        MotifLabel::Feed,
        MotifLabel::Form,
        MotifLabel::HomeMenu,
        MotifLabel::List,
        MotifLabel::LogIn,
        MotifLabel::Map,
        MotifLabel::Onboarding,
        MotifLabel::Player,
        MotifLabel::PopUp,
        MotifLabel::Product,
        MotifLabel::Search,
        MotifLabel::Settings,
        MotifLabel::Splash,
        MotifLabel::TermsAndConditions,
        MotifLabel::TravelBooking,
        MotifLabel::TypeMessage,
        MotifLabel::Viewer,
        MotifLabel::WebBrowser,
    ];

    /// Motifs that tend to trap exploration, each with a navigation heuristic.
    pub const TARPITS: [MotifLabel; 8] = [
        MotifLabel::LogIn,
        MotifLabel::Onboarding,
        MotifLabel::Player,
        MotifLabel::Advertisement,
        MotifLabel::Viewer,
        MotifLabel::Form,
        MotifLabel::WebBrowser,
        MotifLabel::Search,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn is_tarpit(self) -> bool {
        Self::TARPITS.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            MotifLabel::Advertisement => "Advertisement",
            MotifLabel::CalendarTimeWeather => "CalendarTimeWeather",
            MotifLabel::Catalog => "Catalog",
            MotifLabel::Feed => "Feed",
            MotifLabel::Form => "Form",
            MotifLabel::HomeMenu => "HomeMenu",
            MotifLabel::List => "List",
            MotifLabel::LogIn => "LogIn",
            MotifLabel::Map => "Map",
            MotifLabel::Onboarding => "Onboarding",
            MotifLabel::Player => "Player",
            MotifLabel::PopUp => "PopUp",
            MotifLabel::Product => "Product",
            MotifLabel::Search => "Search",
            MotifLabel::Settings => "Settings",
            MotifLabel::Splash => "Splash",
            MotifLabel::TermsAndConditions => "TermsAndConditions",
            MotifLabel::TravelBooking => "TravelBooking",
            MotifLabel::TypeMessage => "TypeMessage",
            MotifLabel::Viewer => "Viewer",
            MotifLabel::WebBrowser => "WebBrowser",
        }
    }
}

impl fmt::Display for MotifLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotifLabel {
    type Err = MotifError;

    /// Case-, space- and punctuation-insensitive: "Log-in" parses as `LogIn`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.name().to_lowercase() == key)
            .ok_or_else(|| MotifError::UnknownLabel(s.to_string()))
    }
}

/// All 21 motifs ranked by probability, ties in enumeration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifPrediction {
    pub ranked: Vec<(MotifLabel, f64)>,
}

impl MotifPrediction {
    /// `probs` is indexed by label enumeration order. Negative or non-finite
    /// entries are treated as zero; the rest are renormalized to sum to one
    /// (an all-zero input becomes uniform).
    pub fn from_probabilities(probs: &[f64]) -> Self {
        assert_eq!(probs.len(), MOTIF_COUNT, "expected one probability per motif");
        let clean: Vec<f64> = probs
            .iter()
            .map(|&p| if p.is_finite() && p > 0.0 { p } else { 0.0 })
            .collect();
        let total: f64 = clean.iter().sum();
        let mut ranked: Vec<(MotifLabel, f64)> = MotifLabel::ALL
            .iter()
            .zip(&clean)
            .map(|(&l, &p)| {
                let p = if total > 0.0 {
                    p / total
                } else {
                    1.0 / MOTIF_COUNT as f64
                };
                (l, p)
            })
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self { ranked }
    }

    pub fn top(&self) -> MotifLabel {
        self.ranked[0].0
    }

    pub fn probability(&self, label: MotifLabel) -> f64 {
        self.ranked
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    }

    /// Ranking where `first` leads, followed by the remaining motifs in
    /// `order`; probabilities decrease geometrically. Used to force a
    /// particular ranking in tests and in the CLI.
    pub fn forced(order: &[MotifLabel]) -> Self {
        let mut seen = Vec::new();
        for &l in order.iter().chain(MotifLabel::ALL.iter()) {
            if !seen.contains(&l) {
                seen.push(l);
            }
        }
        let mut probs = vec![0.0; MOTIF_COUNT];
        let mut weight = 1.0;
        for l in &seen {
            probs[l.index()] = weight;
            weight *= 0.5;
        }
        Self::from_probabilities(&probs)
    }
}

/// The first `n` tarpit motifs in ranked order.
pub fn tarpit_candidates(pred: &MotifPrediction, n: usize) -> Vec<MotifLabel> {
    pred.ranked
        .iter()
        .map(|(l, _)| *l)
        .filter(|l| l.is_tarpit())
        .take(n)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taxonomy_sizes() {
        assert_eq!(MotifLabel::ALL.len(), 21);
        assert_eq!(MotifLabel::TARPITS.len(), 8);
        for (i, l) in MotifLabel::ALL.iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(l.name().parse::<MotifLabel>().unwrap(), *l);
        }
        assert_eq!("log-in".parse::<MotifLabel>().unwrap(), MotifLabel::LogIn);
        assert_eq!("Web browser".parse::<MotifLabel>().unwrap(), MotifLabel::WebBrowser);
        assert!("Carousel".parse::<MotifLabel>().is_err());
    }

    #[test]
    fn uniform_ranking_is_enumeration_order() {
        let p = MotifPrediction::from_probabilities(&[1.0; 21]);
        let order: Vec<MotifLabel> = p.ranked.iter().map(|(l, _)| *l).collect();
        assert_eq!(order, MotifLabel::ALL.to_vec());
        let total: f64 = p.ranked.iter().map(|(_, x)| x).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn candidates_filter_by_subset() {
        let p = MotifPrediction::forced(&[
            MotifLabel::Settings,
            MotifLabel::LogIn,
            MotifLabel::Feed,
            MotifLabel::Search,
        ]);
        // the remaining order is enumeration order, whose first tarpit is Advertisement
        assert_eq!(
            tarpit_candidates(&p, 3),
            vec![MotifLabel::LogIn, MotifLabel::Search, MotifLabel::Advertisement]
        );
    }

    #[test]
    fn candidates_when_tarpits_rank_last() {
        let non_tarpit: Vec<MotifLabel> =
            MotifLabel::ALL.iter().copied().filter(|l| !l.is_tarpit()).collect();
        let mut order = non_tarpit.clone();
        order.extend([MotifLabel::Viewer, MotifLabel::Form, MotifLabel::Player]);
        let p = MotifPrediction::forced(&order);
        assert_eq!(
            tarpit_candidates(&p, 3),
            vec![MotifLabel::Viewer, MotifLabel::Form, MotifLabel::Player]
        );
    }

    #[test]
    fn candidates_exhaust_subset() {
        let p = MotifPrediction::from_probabilities(&[1.0; 21]);
        let all = tarpit_candidates(&p, 8);
        assert_eq!(all.len(), 8);
        assert_eq!(tarpit_candidates(&p, 20), all);
        let ranked: Vec<MotifLabel> = p.ranked.iter().map(|(l, _)| *l).collect();
        let positions: Vec<usize> = all
            .iter()
            .map(|l| ranked.iter().position(|r| r == l).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn degenerate_probabilities_normalize() {
        let mut probs = [0.0; 21];
        probs[3] = f64::NAN;
        probs[4] = -1.0;
        let p = MotifPrediction::from_probabilities(&probs);
        assert_eq!(p.top(), MotifLabel::Advertisement);
        assert!((p.probability(MotifLabel::Feed) - 1.0 / 21.0).abs() < 1e-12);
    }
}
