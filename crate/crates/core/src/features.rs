//! Visual and textual feature extraction.
//!
//! Visual features are grid-occupancy fractions of the silhouette raster.
//! Textual features are TF-IDF weights over a "screen document": one
//! templated sentence per hierarchy node plus one per free-standing text
//! region. Both sit behind the [`Embedder`] trait so a learned encoder can
//! replace them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::silhouette::{channel_fractions, render};
use crate::snapshot::{fnv1a64, UiSnapshot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("cannot fit a vectorizer on an empty corpus")]
    EmptyCorpus,
    #[error("embedder unavailable: {0}")]
    EmbedderUnavailable(String),
    #[error("unsupported vectorizer format version {0}")]
    UnsupportedVersion(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualFeatures {
    pub values: Vec<f64>,
    pub grid: u32,
}

pub fn visual_features(snapshot: &UiSnapshot, canvas: (u32, u32), grid: u32) -> VisualFeatures {
    VisualFeatures {
        values: channel_fractions(&render(snapshot, canvas), grid),
        grid,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScreenDocument {
    pub sentences: Vec<String>,
}

fn position_bucket(cx: u64, cy: u64, w: u64, h: u64) -> &'static str {
    let col = if 3 * cx < w {
        0
    } else if 3 * cx < 2 * w {
        1
    } else {
        2
    };
    let row = if 3 * cy < h {
        0
    } else if 3 * cy < 2 * h {
        1
    } else {
        2
    };
    const NAMES: [[&str; 3]; 3] = [
        ["top-left", "top-center", "top-right"],
        ["center-left", "center", "center-right"],
        ["bottom-left", "bottom-center", "bottom-right"],
    ];
    NAMES[row][col]
}

fn size_bucket(len: u64, screen: u64, names: [&'static str; 3]) -> &'static str {
    if 3 * len < screen {
        names[0]
    } else if 3 * len < 2 * screen {
        names[1]
    } else {
        names[2]
    }
}

/// Renders the snapshot as sentences.
///
/// A leaf without a label borrows the text of every region overlapping it;
/// regions borrowed this way are not repeated as `text ...` sentences.
pub fn screen_document(snapshot: &UiSnapshot) -> ScreenDocument {
    let (sw, sh) = (
        u64::from(snapshot.screen_size.0),
        u64::from(snapshot.screen_size.1),
    );
    let mut consumed = vec![false; snapshot.text_regions.len()];
    let mut sentences = Vec::new();
    for node in snapshot.nodes() {
        let mut label = node.label.trim().to_string();
        if label.is_empty() && node.is_leaf() {
            let borrowed: Vec<&str> = snapshot
                .text_regions
                .iter()
                .enumerate()
                .filter(|(_, r)| r.bounds.intersection(&node.bounds).is_some())
                .map(|(i, r)| {
                    consumed[i] = true;
                    r.text.as_str()
                })
                .collect();
            label = borrowed.join(" ");
        }
        if label.is_empty() {
            label = "unlabeled".to_string();
        }
        let (cx, cy) = node.bounds.center();
        sentences.push(format!(
            "{} inside {} labeled {} at {} size {} by {}",
            node.class_name,
            node.ancestor_class,
            label,
            position_bucket(u64::from(cx), u64::from(cy), sw, sh),
            size_bucket(u64::from(node.bounds.width()), sw, ["narrow", "medium", "wide"]),
            size_bucket(u64::from(node.bounds.height()), sh, ["short", "medium", "tall"]),
        ));
    }
    for (region, used) in snapshot.text_regions.iter().zip(consumed) {
        if !used {
            sentences.push(format!("text {}", region.text));
        }
    }
    ScreenDocument { sentences }
}

/// Lowercased whitespace tokens with punctuation removed.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(|raw| {
        let token: String = raw
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        (!token.is_empty()).then_some(token)
    })
}

impl ScreenDocument {
    pub fn term_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for sentence in &self.sentences {
            for token in tokenize(sentence) {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
        counts
    }
}

pub const VECTORIZER_FORMAT_VERSION: u32 = 1;

/// Fitted TF-IDF state: lexicographic vocabulary with smoothed idf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfVectorizer {
    pub version: u32,
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub vocabulary_id: u64,
}

/// Sparse, L2-normalized TF-IDF vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextFeatures {
    /// Non-zero entries as `(vocabulary index, weight)`, ascending index.
    pub entries: Vec<(usize, f64)>,
    pub dimension: usize,
    pub vocabulary_id: u64,
}

impl TextFeatures {
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }
}

impl TfidfVectorizer {
    pub const MIN_COUNT: usize = 2;

    pub fn fit(corpus: &[ScreenDocument]) -> Result<Self, FeatureError> {
        if corpus.is_empty() {
            return Err(FeatureError::EmptyCorpus);
        }
        let mut total: BTreeMap<String, usize> = BTreeMap::new();
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in corpus {
            for (token, count) in doc.term_counts() {
                *total.entry(token.clone()).or_insert(0) += count;
                *df.entry(token).or_insert(0) += 1;
            }
        }
        let n = corpus.len() as f64;
        let (vocabulary, idf): (Vec<String>, Vec<f64>) = total
            .into_iter()
            .filter(|(_, c)| *c >= Self::MIN_COUNT)
            .map(|(t, _)| {
                let d = df[&t] as f64;
                let idf = ((1.0 + n) / (1.0 + d)).ln() + 1.0;
                (t, idf)
            })
            .unzip();
        let vocabulary_id = fnv1a64(vocabulary.join("\n").as_bytes());
        Ok(Self {
            version: VECTORIZER_FORMAT_VERSION,
            vocabulary,
            idf,
            vocabulary_id,
        })
    }

    pub fn dimension(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.vocabulary
            .binary_search_by(|t| t.as_str().cmp(token))
            .ok()
    }

    /// Raw in-vocabulary term frequencies, before idf weighting.
    pub fn term_frequencies(&self, doc: &ScreenDocument) -> Vec<(usize, usize)> {
        doc.term_counts()
            .into_iter()
            .filter_map(|(t, c)| self.index_of(&t).map(|i| (i, c)))
            .collect()
    }

    pub fn transform(&self, doc: &ScreenDocument) -> TextFeatures {
        let mut entries: Vec<(usize, f64)> = self
            .term_frequencies(doc)
            .into_iter()
            .map(|(i, tf)| (i, tf as f64 * self.idf[i]))
            .collect();
        let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut entries {
                *v /= norm;
            }
        }
        TextFeatures {
            entries,
            dimension: self.dimension(),
            vocabulary_id: self.vocabulary_id,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("vectorizer serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FeatureError> {
        let v: Self = serde_json::from_str(text)
            .map_err(|e| FeatureError::EmbedderUnavailable(e.to_string()))?;
        if v.version != VECTORIZER_FORMAT_VERSION {
            return Err(FeatureError::UnsupportedVersion(v.version));
        }
        Ok(v)
    }
}

pub fn fit_text_vectorizer(corpus: &[ScreenDocument]) -> Result<TfidfVectorizer, FeatureError> {
    TfidfVectorizer::fit(corpus)
}

pub fn text_features(doc: &ScreenDocument, vectorizer: &TfidfVectorizer) -> TextFeatures {
    vectorizer.transform(doc)
}

/// Maps a snapshot to a fixed-length real vector.
pub trait Embedder {
    fn dimension(&self) -> usize;
    fn embed(&self, snapshot: &UiSnapshot) -> Result<Vec<f64>, FeatureError>;
}

/// Visual fractions followed by dense TF-IDF weights.
#[derive(Debug, Clone)]
pub struct DefaultEmbedder {
    pub canvas: (u32, u32),
    pub grid: u32,
    pub vectorizer: TfidfVectorizer,
}

impl Embedder for DefaultEmbedder {
    fn dimension(&self) -> usize {
        3 * (self.grid * self.grid) as usize + self.vectorizer.dimension()
    }

    fn embed(&self, snapshot: &UiSnapshot) -> Result<Vec<f64>, FeatureError> {
        let mut out = visual_features(snapshot, self.canvas, self.grid).values;
        out.extend(self.vectorizer.transform(&screen_document(snapshot)).to_dense());
        Ok(out)
    }
}

/// Always returns zeros; for wiring tests.
#[derive(Debug, Clone, Copy)]
pub struct NullEmbedder {
    pub dimension: usize,
}

impl Embedder for NullEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, _snapshot: &UiSnapshot) -> Result<Vec<f64>, FeatureError> {
        Ok(vec![0.0; self.dimension])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snapshot::{parse_hierarchy, Bounds, RegionSource, TextRegion};

    fn snapshot(xml: Option<&str>, regions: Vec<TextRegion>) -> UiSnapshot {
        UiSnapshot::new(
            xml.map(|x| parse_hierarchy(x).unwrap()),
            regions,
            "A",
            "w",
            (1080, 1920),
        )
        .unwrap()
    }

    fn doc(sentences: &[&str]) -> ScreenDocument {
        ScreenDocument {
            sentences: sentences.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn full_screen_image_sentence() {
        let s = snapshot(
            Some(r#"<node class="ImageView" bounds="[0,0][1080,1920]"/>"#),
            vec![],
        );
        assert_eq!(
            screen_document(&s).sentences,
            vec!["ImageView inside  labeled unlabeled at center size wide by tall"]
        );
    }

    #[test]
    fn labeled_top_center_button() {
        let s = snapshot(
            Some(
                r#"<node class="FrameLayout" bounds="[0,0][1080,1920]">
                     <node class="Button" text="Sign in" bounds="[440,100][640,200]"/>
                   </node>"#,
            ),
            vec![],
        );
        let d = screen_document(&s);
        assert_eq!(
            d.sentences[1],
            "Button inside FrameLayout labeled Sign in at top-center size narrow by short"
        );
    }

    #[test]
    fn regions_only() {
        let r = TextRegion::new(
            "Hello",
            Bounds::new(0, 0, 10, 10).unwrap(),
            RegionSource::ExternalRecognizer,
        )
        .unwrap();
        assert_eq!(screen_document(&snapshot(None, vec![r])).sentences, vec!["text Hello"]);
    }

    #[test]
    fn region_supplies_missing_label() {
        let r = TextRegion::new(
            "Buy now",
            Bounds::new(0, 0, 100, 50).unwrap(),
            RegionSource::ExternalRecognizer,
        )
        .unwrap();
        let s = snapshot(
            Some(r#"<node class="ImageView" bounds="[0,0][200,100]"/>"#),
            vec![r],
        );
        let d = screen_document(&s);
        assert_eq!(d.sentences.len(), 1);
        assert!(d.sentences[0].contains("labeled Buy now at"));
    }

    #[test]
    fn idf_values() {
        let v = TfidfVectorizer::fit(&[doc(&["a a b b c"])]).unwrap();
        assert_eq!(v.vocabulary, vec!["a", "b"]);
        assert!(v.idf.iter().all(|&x| (x - 1.0).abs() < 1e-12));

        let v = TfidfVectorizer::fit(&[doc(&["rare rare x"]), doc(&["x y"]), doc(&["x y"])])
            .unwrap();
        assert_eq!(v.vocabulary, vec!["rare", "x", "y"]);
        assert!((v.idf[0] - (2.0f64.ln() + 1.0)).abs() < 1e-12);
        assert!((v.idf[0] - 1.6931).abs() < 1e-4);
        assert!((v.idf[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert_eq!(TfidfVectorizer::fit(&[]), Err(FeatureError::EmptyCorpus));
    }

    #[test]
    fn transform_normalization() {
        let v = TfidfVectorizer::fit(&[doc(&["alpha alpha beta"]), doc(&["beta gamma gamma"])])
            .unwrap();
        let none = v.transform(&doc(&["zzz"]));
        assert!(none.entries.is_empty());
        assert_eq!(none.to_dense(), vec![0.0; v.dimension()]);

        let one = v.transform(&doc(&["Alpha, alpha!"]));
        assert_eq!(one.entries, vec![(0, 1.0)]);

        let mixed = v.transform(&doc(&["alpha beta gamma gamma"]));
        let norm: f64 = mixed.entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tokenizer_strips_punctuation() {
        let t: Vec<String> = tokenize("Top-Left, e-mail: 42!! ...").collect();
        assert_eq!(t, vec!["topleft", "email", "42"]);
    }

    #[test]
    fn vectorizer_json_round_trip() {
        let v = TfidfVectorizer::fit(&[doc(&["a a b"])]).unwrap();
        assert_eq!(TfidfVectorizer::from_json(&v.to_json()).unwrap(), v);
        let mut bad = v.clone();
        bad.version = 9;
        assert_eq!(
            TfidfVectorizer::from_json(&bad.to_json()),
            Err(FeatureError::UnsupportedVersion(9))
        );
    }

    #[test]
    fn embedders() {
        let v = TfidfVectorizer::fit(&[doc(&["imageview imageview"])]).unwrap();
        let e = DefaultEmbedder {
            canvas: (16, 16),
            grid: 2,
            vectorizer: v.clone(),
        };
        let s = snapshot(
            Some(r#"<node class="ImageView" bounds="[0,0][1080,1920]"/>"#),
            vec![],
        );
        let a = e.embed(&s).unwrap();
        assert_eq!(a.len(), 12 + v.dimension());
        assert_eq!(a.len(), e.dimension());
        assert_eq!(a, e.embed(&s.clone()).unwrap());
        let n = NullEmbedder { dimension: 5 };
        assert_eq!(n.embed(&s).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn blank_visual_features() {
        let f = visual_features(&snapshot(None, vec![]), (30, 40), 3);
        assert_eq!(f.values.len(), 27);
        for cell in f.values.chunks(3) {
            assert_eq!(cell, [1.0, 0.0, 0.0]);
        }
    }
}
