//! Two base classifiers (visual forest, textual network) fused by a forest
//! over their concatenated class probabilities.
//!
//! The combiner is trained on out-of-fold base predictions so it never sees
//! probabilities a base produced for its own training rows.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forest::{ForestParams, RandomForest};
use super::mlp::{Mlp, MlpParams};
use super::{LabeledScreen, MotifError, MotifLabel, MotifPrediction, MOTIF_COUNT};
use crate::features::{screen_document, visual_features, ScreenDocument, TfidfVectorizer};
use crate::silhouette::DEFAULT_CANVAS;
use crate::snapshot::UiSnapshot;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub canvas: (u32, u32),
    pub grid: u32,
    pub forest: ForestParams,
    pub mlp: MlpParams,
    pub folds: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            canvas: DEFAULT_CANVAS,
            grid: 8,
            forest: ForestParams::default(),
            mlp: MlpParams::default(),
            folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Combiner {
    Forest(RandomForest),
    /// Ignores its input; every motif gets the same probability.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedModel {
    pub version: u32,
    pub config: TrainConfig,
    pub vectorizer: TfidfVectorizer,
    pub visual_base: RandomForest,
    pub textual_base: Mlp,
    pub combiner: Combiner,
    pub training_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: MotifLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: usize,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Classes that occur in the truth or the predictions.
    pub per_class: Vec<ClassMetrics>,
    /// Row = true class, column = predicted class, both in `labels` order.
    pub labels: Vec<MotifLabel>,
    pub confusion: Vec<Vec<usize>>,
}

/// Precision of a never-predicted class (and recall of an absent class) is 0.
/// Macro averages run over classes present in the truth or the predictions.
pub fn metrics_from_confusion(labels: &[MotifLabel], confusion: Vec<Vec<usize>>) -> EvalReport {
    let n = labels.len();
    let total: usize = confusion.iter().flatten().sum();
    let correct: usize = (0..n).map(|i| confusion[i][i]).sum();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut per_class = Vec::new();
    for i in 0..n {
        let support: usize = confusion[i].iter().sum();
        let predicted: usize = (0..n).map(|r| confusion[r][i]).sum();
        if support == 0 && predicted == 0 {
            continue;
        }
        let precision = ratio(confusion[i][i], predicted);
        let recall = ratio(confusion[i][i], support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            label: labels[i],
            precision,
            recall,
            f1,
            support,
        });
    }
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if per_class.is_empty() {
            0.0
        } else {
            per_class.iter().map(f).sum::<f64>() / per_class.len() as f64
        }
    };
    EvalReport {
        samples: total,
        accuracy: ratio(correct, total),
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        macro_f1: mean(|c| c.f1),
        per_class: per_class.clone(),
        labels: labels.to_vec(),
        confusion,
    }
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed
        .wrapping_add(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Prepared {
    visual: Vec<Vec<f64>>,
    docs: Vec<ScreenDocument>,
    labels: Vec<usize>,
}

fn prepare(screens: &[&LabeledScreen], config: &TrainConfig) -> Prepared {
    Prepared {
        visual: screens
            .iter()
            .map(|s| visual_features(&s.snapshot, config.canvas, config.grid).values)
            .collect(),
        docs: screens.iter().map(|s| screen_document(&s.snapshot)).collect(),
        labels: screens.iter().map(|s| s.label.index()).collect(),
    }
}

fn fit_bases(
    visual: &[Vec<f64>],
    text: &[Vec<(usize, f64)>],
    labels: &[usize],
    text_dim: usize,
    config: &TrainConfig,
    seed: u64,
) -> (RandomForest, Mlp) {
    let forest = RandomForest::fit(visual, labels, MOTIF_COUNT, config.forest, derive_seed(seed, 1));
    let mlp = Mlp::fit(text, labels, text_dim, MOTIF_COUNT, config.mlp, derive_seed(seed, 2));
    (forest, mlp)
}

/// Stratified assignment of `labels` rows into `folds` buckets.
fn stratified_folds(labels: &[usize], folds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut fold_of = vec![0; labels.len()];
    for class in 0..MOTIF_COUNT {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(rng);
        for (pos, i) in members.into_iter().enumerate() {
            fold_of[i] = pos % folds;
        }
    }
    fold_of
}

pub fn train(
    dataset: &[LabeledScreen],
    split: f64,
    seed: u64,
) -> Result<(FusedModel, EvalReport), MotifError> {
    train_with(dataset, split, seed, &TrainConfig::default())
}

/// Stratified seeded split, out-of-fold stacking, held-out evaluation.
pub fn train_with(
    dataset: &[LabeledScreen],
    split: f64,
    seed: u64,
    config: &TrainConfig,
) -> Result<(FusedModel, EvalReport), MotifError> {
    if !(split > 0.0 && split < 1.0) {
        return Err(MotifError::InvalidSplit(split));
    }
    if dataset.is_empty() {
        return Err(MotifError::EmptyDataset);
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in dataset {
        if !seen.insert(s.source_id.as_str()) {
            return Err(MotifError::DuplicateSourceId(s.source_id.clone()));
        }
    }
    let mut per_label: Vec<Vec<usize>> = vec![Vec::new(); MOTIF_COUNT];
    for (i, s) in dataset.iter().enumerate() {
        per_label[s.label.index()].push(i);
    }
    for (label, members) in MotifLabel::ALL.iter().zip(&per_label) {
        if members.len() == 1 {
            return Err(MotifError::InsufficientClassSupport {
                label: *label,
                count: 1,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for members in per_label.iter_mut().filter(|m| !m.is_empty()) {
        members.shuffle(&mut rng);
        let held = ((members.len() as f64) * (1.0 - split)).round() as usize;
        let held = held.clamp(1, members.len() - 1);
        test_idx.extend_from_slice(&members[..held]);
        train_idx.extend_from_slice(&members[held..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let train_screens: Vec<&LabeledScreen> = train_idx.iter().map(|&i| &dataset[i]).collect();
    let test_screens: Vec<LabeledScreen> = test_idx.iter().map(|&i| dataset[i].clone()).collect();
    let model = fit_model(&train_screens, config, seed)?;
    let report = evaluate(&model, &test_screens);
    Ok((model, report))
}

/// Fits vectorizer, bases and combiner on every given screen.
pub fn fit_model(
    screens: &[&LabeledScreen],
    config: &TrainConfig,
    seed: u64,
) -> Result<FusedModel, MotifError> {
    let prep = prepare(screens, config);
    let vectorizer = TfidfVectorizer::fit(&prep.docs)?;
    let text: Vec<Vec<(usize, f64)>> = prep
        .docs
        .iter()
        .map(|d| vectorizer.transform(d).entries)
        .collect();
    let dim = vectorizer.dimension();

    let folds = config.folds.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
    let fold_of = stratified_folds(&prep.labels, folds, &mut rng);
    let mut stacked = vec![Vec::new(); screens.len()];
    for fold in 0..folds {
        let (inner, outer): (Vec<usize>, Vec<usize>) =
            (0..screens.len()).partition(|&i| fold_of[i] != fold);
        if outer.is_empty() || inner.is_empty() {
            continue;
        }
        let pick = |v: &[Vec<f64>]| inner.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        let inner_text: Vec<Vec<(usize, f64)>> = inner.iter().map(|&i| text[i].clone()).collect();
        let inner_labels: Vec<usize> = inner.iter().map(|&i| prep.labels[i]).collect();
        let (forest, mlp) = fit_bases(
            &pick(&prep.visual),
            &inner_text,
            &inner_labels,
            dim,
            config,
            derive_seed(seed, 10 + fold as u64),
        );
        for &i in &outer {
            let mut row = forest.predict_proba(&prep.visual[i]);
            row.extend(mlp.predict_proba(&text[i]));
            stacked[i] = row;
        }
    }
    let (visual_base, textual_base) =
        fit_bases(&prep.visual, &text, &prep.labels, dim, config, derive_seed(seed, 4));
    let combiner = RandomForest::fit(
        &stacked,
        &prep.labels,
        MOTIF_COUNT,
        config.forest,
        derive_seed(seed, 5),
    );
    Ok(FusedModel {
        version: MODEL_FORMAT_VERSION,
        config: *config,
        vectorizer,
        visual_base,
        textual_base,
        combiner: Combiner::Forest(combiner),
        training_seed: seed,
    })
}

impl FusedModel {
    /// The 42 combiner inputs: visual probabilities then textual ones.
    pub fn base_probabilities(&self, snapshot: &UiSnapshot) -> Vec<f64> {
        let visual = visual_features(snapshot, self.config.canvas, self.config.grid);
        let text = self.vectorizer.transform(&screen_document(snapshot));
        let mut row = self.visual_base.predict_proba(&visual.values);
        row.extend(self.textual_base.predict_proba(&text.entries));
        row
    }

    pub fn predict(&self, snapshot: &UiSnapshot) -> MotifPrediction {
        let probs = match &self.combiner {
            Combiner::Forest(f) => f.predict_proba(&self.base_probabilities(snapshot)),
            Combiner::Uniform => vec![1.0; MOTIF_COUNT],
        };
        MotifPrediction::from_probabilities(&probs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MotifError> {
        let model: Self =
            serde_json::from_str(text).map_err(|e| MotifError::Archive(e.to_string()))?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(MotifError::Archive(format!(
                "unsupported model version {}",
                model.version
            )));
        }
        if model.vectorizer.dimension() != model.textual_base.input_dim {
            return Err(MotifError::Archive(
                "vectorizer does not match the textual classifier".into(),
            ));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), MotifError> {
        fs::write(path, self.to_json()).map_err(|e| MotifError::Archive(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, MotifError> {
        let text = fs::read_to_string(path)
            .map_err(|e| MotifError::Archive(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

pub fn predict(model: &FusedModel, snapshot: &UiSnapshot) -> MotifPrediction {
    model.predict(snapshot)
}

pub fn evaluate(model: &FusedModel, testset: &[LabeledScreen]) -> EvalReport {
    let mut confusion = vec![vec![0usize; MOTIF_COUNT]; MOTIF_COUNT];
    for screen in testset {
        let predicted = model.predict(&screen.snapshot).top();
        confusion[screen.label.index()][predicted.index()] += 1;
    }
    metrics_from_confusion(&MotifLabel::ALL, confusion)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_toy_metrics() {
        let r = metrics_from_confusion(
            &[MotifLabel::LogIn, MotifLabel::Form],
            vec![vec![1, 1], vec![0, 2]],
        );
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.per_class[0].precision, 1.0);
        assert_eq!(r.per_class[0].recall, 0.5);
        assert!((r.per_class[1].precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.per_class[1].recall, 1.0);
    }

    #[test]
    fn perfect_predictions() {
        let r = metrics_from_confusion(
            &[MotifLabel::LogIn, MotifLabel::Form, MotifLabel::Map],
            vec![vec![3, 0, 0], vec![0, 2, 0], vec![0, 0, 0]],
        );
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.per_class.len(), 2);
    }

    #[test]
    fn never_predicted_class_has_zero_precision() {
        let r = metrics_from_confusion(
            &[MotifLabel::LogIn, MotifLabel::Form],
            vec![vec![0, 2], vec![0, 1]],
        );
        assert_eq!(r.per_class[0].precision, 0.0);
        assert_eq!(r.per_class[0].f1, 0.0);
    }

    #[test]
    fn derive_seed_spreads() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
