//! Per-script GMM training, average log-likelihood classification and the
//! confusion-matrix evaluation harness.
//!
//! A word contributes six frames, its feature vectors `f1..f6` in order, and
//! is scored against each script by the mean log-density of those frames.
//! Two ways of modeling the frames are supported (see [`FrameModeling`]):
//!
//! - `PerPosition` (default): each script keeps six mixtures, one per frame
//!   position, and frame `t` is scored by the script's mixture for position
//!   `t`.
//! - `Pooled`: each script keeps a single mixture fit on all frames of all its
//!   words, and every frame is scored by it. This treats a word as an
//!   unordered bag of frames, so it cannot tell a word from its left-right
//!   mirror: mirroring swaps `(f1, f2)` with `(f3, f4)` and only reverses
//!   `f6`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::WordFeatures;
use crate::gmm::{self, EmConfig, FitReport, GmmDocument, GmmModel};

const FORMAT_VERSION: u64 = 1;

/// Frames per word.
pub const FRAMES_PER_WORD: usize = 6;

/// `[f1, f2, f3, f4, f5, f6]`.
pub fn frames_of(word: &WordFeatures) -> Vec<Vec<f64>> {
    word.vectors().to_vec()
}

/// How a script's mixtures relate to the six frame positions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FrameModeling {
    /// One mixture per frame position.
    #[default]
    PerPosition,
    /// One mixture shared by all frames.
    Pooled,
}

impl FrameModeling {
    pub fn models_per_script(self) -> usize {
        match self {
            FrameModeling::PerPosition => FRAMES_PER_WORD,
            FrameModeling::Pooled => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub order: usize,
    pub seed: u64,
    pub em: EmConfig,
    pub frames: FrameModeling,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            order: 128,
            seed: 42,
            em: EmConfig::default(),
            frames: FrameModeling::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    /// Mixture order actually used per script, after capping at the number of
    /// training vectors each mixture sees.
    pub effective_orders: BTreeMap<String, usize>,
    /// One fit per mixture, in frame-position order.
    pub fits: BTreeMap<String, Vec<FitReport>>,
    pub warnings: Vec<String>,
}

/// The mixtures of one script.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptModel {
    gmms: Vec<GmmModel>,
}

impl ScriptModel {
    pub fn new(gmms: Vec<GmmModel>) -> Result<Self> {
        if gmms.len() != 1 && gmms.len() != FRAMES_PER_WORD {
            return Err(Error::InvalidModel(format!(
                "a script needs 1 or {FRAMES_PER_WORD} mixtures, got {}",
                gmms.len()
            )));
        }
        Ok(Self { gmms })
    }

    pub fn gmms(&self) -> &[GmmModel] {
        &self.gmms
    }

    pub fn frame_modeling(&self) -> FrameModeling {
        if self.gmms.len() == 1 {
            FrameModeling::Pooled
        } else {
            FrameModeling::PerPosition
        }
    }

    pub fn dim(&self) -> usize {
        self.gmms[0].dim()
    }

    /// Mean over frames of `ln p(y_t | mixture for t)`.
    pub fn score(&self, frames: &[Vec<f64>]) -> Result<f64> {
        match self.gmms.as_slice() {
            [pooled] => pooled.avg_log_likelihood(frames),
            per_position => {
                if frames.len() != per_position.len() {
                    return Err(Error::DimensionMismatch {
                        expected: per_position.len(),
                        actual: frames.len(),
                    });
                }
                let mut total = 0.0;
                for (gmm, y) in per_position.iter().zip(frames) {
                    total += gmm.log_density(y)?;
                }
                Ok(total / frames.len() as f64)
            }
        }
    }
}

impl From<GmmModel> for ScriptModel {
    fn from(gmm: GmmModel) -> Self {
        Self { gmms: vec![gmm] }
    }
}

/// Fitted mixtures for every script, all over `side`-dimensional frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptModelSet {
    side: usize,
    order: usize,
    frames: FrameModeling,
    models: BTreeMap<String, ScriptModel>,
}

#[derive(Serialize, Deserialize)]
struct ModelSetDocument {
    format_version: u64,
    side: usize,
    order: usize,
    frame_modeling: FrameModeling,
    labels: Vec<String>,
    models: Vec<LabeledModel>,
}

#[derive(Serialize, Deserialize)]
struct LabeledModel {
    label: String,
    gmms: Vec<GmmDocument>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: String,
    pub scores: BTreeMap<String, f64>,
}

impl ScriptModelSet {
    /// `order` is the requested mixture order; individual models may be
    /// smaller when a script had fewer frames than that.
    pub fn new(side: usize, order: usize, models: BTreeMap<String, ScriptModel>) -> Result<Self> {
        if models.len() < 2 {
            return Err(Error::TooFewScripts(models.len()));
        }
        let frames = models.values().next().expect("non-empty").frame_modeling();
        for model in models.values() {
            if model.frame_modeling() != frames {
                return Err(Error::InvalidModel("scripts mix frame modelings".into()));
            }
            for gmm in model.gmms() {
                if gmm.dim() != side {
                    return Err(Error::DimensionMismatch {
                        expected: side,
                        actual: gmm.dim(),
                    });
                }
                if gmm.order() > order {
                    return Err(Error::InvalidModel(format!(
                        "mixture order {} exceeds set order {order}",
                        gmm.order()
                    )));
                }
            }
        }
        Ok(Self {
            side,
            order,
            frames,
            models,
        })
    }

    pub fn frame_modeling(&self) -> FrameModeling {
        self.frames
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn labels(&self) -> Vec<String> {
        self.models.keys().cloned().collect()
    }

    pub fn models(&self) -> &BTreeMap<String, ScriptModel> {
        &self.models
    }

    /// Average log-likelihood per script; ties go to the first label.
    pub fn classify(&self, word: &WordFeatures) -> Result<Classification> {
        if word.n() != self.side {
            return Err(Error::DimensionMismatch {
                expected: self.side,
                actual: word.n(),
            });
        }
        let frames = frames_of(word);
        let mut scores = BTreeMap::new();
        for (label, model) in &self.models {
            scores.insert(label.clone(), model.score(&frames)?);
        }
        Ok(Classification {
            label: argmax(&scores).to_string(),
            scores,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = ModelSetDocument {
            format_version: FORMAT_VERSION,
            side: self.side,
            order: self.order,
            frame_modeling: self.frames,
            labels: self.labels(),
            models: self
                .models
                .iter()
                .map(|(label, m)| LabeledModel {
                    label: label.clone(),
                    gmms: m.gmms.iter().map(GmmModel::to_document).collect(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("model set serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Json {
            path: "<memory>".into(),
            source: e,
        })?;
        match value.get("format_version").and_then(serde_json::Value::as_u64) {
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(Error::UnsupportedVersion(v)),
            None => return Err(Error::InvalidModel("missing format_version".into())),
        }
        let doc: ModelSetDocument = serde_json::from_value(value).map_err(|e| Error::Json {
            path: "<memory>".into(),
            source: e,
        })?;
        let mut models = BTreeMap::new();
        for entry in doc.models {
            let gmms = entry
                .gmms
                .into_iter()
                .map(GmmModel::from_document)
                .collect::<Result<Vec<_>>>()?;
            let model = ScriptModel::new(gmms)?;
            if model.frame_modeling() != doc.frame_modeling {
                return Err(Error::InvalidModel(format!(
                    "script {} does not match frame_modeling {:?}",
                    entry.label, doc.frame_modeling
                )));
            }
            if models.insert(entry.label.clone(), model).is_some() {
                return Err(Error::InvalidModel(format!("duplicate label {}", entry.label)));
            }
        }
        let labels: Vec<&String> = models.keys().collect();
        let mut declared: Vec<&String> = doc.labels.iter().collect();
        declared.sort();
        if labels != declared {
            return Err(Error::InvalidModel("label list does not match models".into()));
        }
        Self::new(doc.side, doc.order, models)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Errors carry the file path.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                path: path.to_path_buf(),
                source,
            },
            other => Error::in_file(path, other),
        })
    }
}

fn argmax(scores: &BTreeMap<String, f64>) -> &str {
    let mut best: Option<(&str, f64)> = None;
    for (label, &s) in scores {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((label, s));
        }
    }
    best.expect("at least one score").0
}

fn word_dim(corpus: &BTreeMap<String, Vec<WordFeatures>>) -> Result<usize> {
    let mut dim = None;
    for (label, words) in corpus {
        if words.is_empty() {
            return Err(Error::EmptyScript(label.clone()));
        }
        for w in words {
            match dim {
                None => dim = Some(w.n()),
                Some(d) if d != w.n() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        actual: w.n(),
                    })
                }
                _ => {}
            }
        }
    }
    dim.ok_or(Error::TooFewScripts(0))
}

/// Fits each script's mixtures.
///
/// Mixtures train in parallel; each uses a seed derived from `config.seed`,
/// its label and its frame position, so a script's model does not depend on
/// the other scripts. A mixture's order is capped at the number of vectors it
/// is fit on, with a warning.
pub fn train(
    corpus: &BTreeMap<String, Vec<WordFeatures>>,
    config: &TrainConfig,
) -> Result<(ScriptModelSet, TrainReport)> {
    if corpus.len() < 2 {
        return Err(Error::TooFewScripts(corpus.len()));
    }
    let side = word_dim(corpus)?;
    let per_script = config.frames.models_per_script();
    let jobs: Vec<(&String, usize)> = corpus
        .keys()
        .flat_map(|label| (0..per_script).map(move |pos| (label, pos)))
        .collect();
    let fitted: Vec<(usize, GmmModel, FitReport)> = jobs
        .par_iter()
        .map(|&(label, pos)| {
            let words = &corpus[label];
            let (data, seed): (Vec<Vec<f64>>, u64) = match config.frames {
                FrameModeling::Pooled => (
                    words.iter().flat_map(frames_of).collect(),
                    crate::derive_seed(config.seed, label),
                ),
                FrameModeling::PerPosition => (
                    words.iter().map(|w| w.vectors()[pos].clone()).collect(),
                    crate::derive_seed(config.seed, &format!("{label}/f{}", pos + 1)),
                ),
            };
            let order = config.order.min(data.len());
            let (model, fit) = gmm::fit(&data, order, seed, &config.em)?;
            Ok((order, model, fit))
        })
        .collect::<Result<_>>()?;

    let mut report = TrainReport::default();
    let mut models = BTreeMap::new();
    for (label, chunk) in corpus.keys().zip(fitted.chunks(per_script)) {
        let order = chunk.iter().map(|(o, _, _)| *o).min().expect("non-empty");
        if order < config.order {
            report.warnings.push(format!(
                "script {label}: only {order} training vectors per mixture, order reduced from {} to {order}",
                config.order
            ));
        }
        report.effective_orders.insert(label.clone(), order);
        report
            .fits
            .insert(label.clone(), chunk.iter().map(|(_, _, f)| f.clone()).collect());
        let gmms = chunk.iter().map(|(_, m, _)| m.clone()).collect();
        models.insert(label.clone(), ScriptModel::new(gmms)?);
    }
    Ok((ScriptModelSet::new(side, config.order, models)?, report))
}

/// Confusion matrix with per-class and unweighted average accuracy.
///
/// Rows are the true labels present in the test set, columns every model
/// label.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub true_labels: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
    pub per_class_accuracy: Vec<f64>,
    pub average_accuracy: f64,
}

impl EvalReport {
    /// Tallies `(true, predicted)` pairs against the model label list.
    pub fn from_predictions(labels: &[String], pairs: &[(String, String)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::NoTestSamples);
        }
        let col = |l: &str| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))
        };
        let mut true_labels: Vec<String> = pairs.iter().map(|(t, _)| t.clone()).collect();
        true_labels.sort();
        true_labels.dedup();
        let mut confusion = vec![vec![0usize; labels.len()]; true_labels.len()];
        for (t, p) in pairs {
            col(t)?;
            let row = true_labels.binary_search(t).expect("row label collected above");
            confusion[row][col(p)?] += 1;
        }
        let per_class_accuracy: Vec<f64> = true_labels
            .iter()
            .zip(&confusion)
            .map(|(t, row)| {
                let hits = row[col(t).expect("checked")] as f64;
                100.0 * hits / row.iter().sum::<usize>() as f64
            })
            .collect();
        let average_accuracy = per_class_accuracy.iter().sum::<f64>() / per_class_accuracy.len() as f64;
        Ok(Self {
            labels: labels.to_vec(),
            true_labels,
            confusion,
            per_class_accuracy,
            average_accuracy,
        })
    }

    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    pub fn accuracy_of(&self, label: &str) -> Option<f64> {
        let i = self.true_labels.iter().position(|l| l == label)?;
        Some(self.per_class_accuracy[i])
    }

    /// `true_label,pred_label,count` for every cell, then a blank line and the
    /// `label,accuracy_percent` summary ending in `average,<value>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true_label,pred_label,count\n");
        for (t, row) in self.true_labels.iter().zip(&self.confusion) {
            for (p, count) in self.labels.iter().zip(row) {
                let _ = writeln!(out, "{t},{p},{count}");
            }
        }
        out.push_str("\nlabel,accuracy_percent\n");
        for (t, acc) in self.true_labels.iter().zip(&self.per_class_accuracy) {
            let _ = writeln!(out, "{t},{acc}");
        }
        let _ = writeln!(out, "average,{}", self.average_accuracy);
        out
    }

    /// One column per script plus the average, like a recognition-rate table.
    pub fn to_table(&self) -> String {
        let mut header = vec!["scripts".to_string()];
        header.extend(self.true_labels.iter().cloned());
        header.push("average".into());
        let mut values = vec!["% recognition".to_string()];
        values.extend(self.per_class_accuracy.iter().map(|a| format!("{a:.2}")));
        values.push(format!("{:.2}", self.average_accuracy));
        let widths: Vec<usize> = header.iter().zip(&values).map(|(h, v)| h.len().max(v.len())).collect();
        let line = |cells: &[String]| -> String {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
        };
        let mut out = line(&header);
        out.push('\n');
        out.push_str(&line(&values));
        out.push('\n');
        out
    }
}

/// Classifies every test word. Test labels must all be model labels.
pub fn evaluate(models: &ScriptModelSet, test: &BTreeMap<String, Vec<WordFeatures>>) -> Result<EvalReport> {
    let labels = models.labels();
    if let Some(unknown) = test.keys().find(|l| !models.models.contains_key(*l)) {
        return Err(Error::UnknownLabel(unknown.clone()));
    }
    let jobs: Vec<(&String, &WordFeatures)> = test
        .iter()
        .flat_map(|(label, words)| words.iter().map(move |w| (label, w)))
        .collect();
    let pairs = jobs
        .par_iter()
        .map(|(label, w)| Ok(((*label).clone(), models.classify(w)?.label)))
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_predictions(&labels, &pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub order: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub order: usize,
    /// A script label, or `average`.
    pub label: String,
    pub accuracy: f64,
}

/// Train and evaluate once per mixture order.
pub fn sweep_orders(
    corpus: &BTreeMap<String, Vec<WordFeatures>>,
    test: &BTreeMap<String, Vec<WordFeatures>>,
    orders: &[usize],
    config: &TrainConfig,
) -> Result<Vec<SweepResult>> {
    if orders.is_empty() {
        return Err(Error::Usage("at least one order is required".into()));
    }
    orders
        .iter()
        .map(|&order| {
            let cfg = TrainConfig { order, ..*config };
            let (models, _) = train(corpus, &cfg)?;
            Ok(SweepResult {
                order,
                report: evaluate(&models, test)?,
            })
        })
        .collect()
}

/// Flattens sweep results to `L + 1` rows per order.
pub fn sweep_rows(results: &[SweepResult]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for r in results {
        for (label, &accuracy) in r.report.true_labels.iter().zip(&r.report.per_class_accuracy) {
            rows.push(SweepRow {
                order: r.order,
                label: label.clone(),
                accuracy,
            });
        }
        rows.push(SweepRow {
            order: r.order,
            label: "average".into(),
            accuracy: r.report.average_accuracy,
        });
    }
    rows
}

pub fn sweep_table_csv(results: &[SweepResult]) -> String {
    let mut out = String::from("order,label,accuracy_percent\n");
    for row in sweep_rows(results) {
        let _ = writeln!(out, "{},{},{}", row.order, row.label, row.accuracy);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(n: usize, fill: impl Fn(usize, usize) -> f64) -> WordFeatures {
        let vectors: [Vec<f64>; 6] = std::array::from_fn(|i| (0..n).map(|j| fill(i, j)).collect());
        WordFeatures::from_vectors(vectors).unwrap()
    }

    fn spherical(dim: usize, centre: f64) -> GmmModel {
        GmmModel::new(vec![1.0], vec![vec![centre; dim]], vec![vec![1.0; dim]]).unwrap()
    }

    fn set(entries: &[(&str, GmmModel)]) -> ScriptModelSet {
        let dim = entries[0].1.dim();
        ScriptModelSet::new(
            dim,
            8,
            entries.iter().map(|(l, m)| (l.to_string(), m.clone().into())).collect(),
        )
        .unwrap()
    }

    fn s(x: &str) -> String {
        x.to_string()
    }

    #[test]
    fn frames_are_the_six_vectors_in_order() {
        let w = word(4, |i, j| (i * 10 + j) as f64);
        let frames = frames_of(&w);
        assert_eq!(frames.len(), FRAMES_PER_WORD);
        assert!(frames.iter().all(|f| f.len() == 4));
        assert_eq!(frames[0], w.f(1));
        assert_eq!(frames[5], w.f(6));
        assert_eq!(frames, frames_of(&w));
        let z = frames_of(&word(3, |_, _| 0.0));
        assert!(z.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn dominating_model_wins() {
        let models = set(&[("a", spherical(3, 5.0)), ("b", spherical(3, 0.0)), ("c", spherical(3, -9.0))]);
        let c = models.classify(&word(3, |_, _| 0.0)).unwrap();
        assert_eq!(c.label, "b");
        assert_eq!(c.scores.len(), 3);
    }

    #[test]
    fn identical_models_tie_to_first_label() {
        let models = set(&[("zeta", spherical(3, 0.0)), ("alpha", spherical(3, 0.0))]);
        let c = models.classify(&word(3, |_, j| j as f64)).unwrap();
        assert_eq!(c.label, "alpha");
        assert_eq!(c.scores["alpha"], c.scores["zeta"]);
    }

    #[test]
    fn argmax_ignores_common_shift() {
        let scores: BTreeMap<String, f64> = [("a", -3.0), ("b", -1.5), ("c", -2.0)]
            .into_iter()
            .map(|(l, v)| (s(l), v))
            .collect();
        let shifted: BTreeMap<String, f64> = scores.iter().map(|(l, v)| (l.clone(), v + 1234.5)).collect();
        assert_eq!(argmax(&scores), "b");
        assert_eq!(argmax(&shifted), "b");
    }

    #[test]
    fn classify_dimension_check() {
        let models = set(&[("a", spherical(3, 0.0)), ("b", spherical(3, 1.0))]);
        assert!(matches!(
            models.classify(&word(4, |_, _| 0.0)),
            Err(Error::DimensionMismatch { expected: 3, actual: 4 })
        ));
    }

    #[test]
    fn model_set_needs_two_scripts() {
        let one: BTreeMap<String, ScriptModel> = [(s("a"), spherical(3, 0.0).into())].into_iter().collect();
        assert!(matches!(ScriptModelSet::new(3, 1, one), Err(Error::TooFewScripts(1))));
    }

    #[test]
    fn perfect_predictions() {
        let labels = vec![s("a"), s("b"), s("c")];
        let pairs: Vec<(String, String)> = labels
            .iter()
            .flat_map(|l| std::iter::repeat_n((l.clone(), l.clone()), 4))
            .collect();
        let r = EvalReport::from_predictions(&labels, &pairs).unwrap();
        assert_eq!(r.confusion, vec![vec![4, 0, 0], vec![0, 4, 0], vec![0, 0, 4]]);
        assert_eq!(r.per_class_accuracy, vec![100.0; 3]);
        assert_eq!(r.average_accuracy, 100.0);
    }

    #[test]
    fn constant_prediction_gives_quarter_average() {
        let labels = vec![s("a"), s("b"), s("c"), s("d")];
        let pairs: Vec<(String, String)> = labels
            .iter()
            .flat_map(|l| std::iter::repeat_n((l.clone(), s("a")), 5))
            .collect();
        let r = EvalReport::from_predictions(&labels, &pairs).unwrap();
        assert_eq!(r.per_class_accuracy, vec![100.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.average_accuracy, 25.0);
    }

    #[test]
    fn hand_tallied_confusion() {
        let labels = vec![s("a"), s("b"), s("c")];
        let raw = [
            ("a", "a"), ("a", "a"), ("a", "b"), ("a", "a"),
            ("b", "b"), ("b", "c"), ("b", "c"),
            ("c", "c"), ("c", "c"), ("c", "a"), ("c", "c"), ("c", "c"),
        ];
        let pairs: Vec<(String, String)> = raw.iter().map(|(t, p)| (s(t), s(p))).collect();
        let r = EvalReport::from_predictions(&labels, &pairs).unwrap();
        // tallied by hand from the list above
        assert_eq!(r.confusion, vec![vec![3, 1, 0], vec![0, 1, 2], vec![1, 0, 4]]);
        assert_eq!(r.total(), 12);
        assert_eq!(r.per_class_accuracy, vec![75.0, 100.0 / 3.0, 80.0]);
        assert_eq!(r.average_accuracy, (75.0 + 100.0 / 3.0 + 80.0) / 3.0);

        let csv = r.to_csv();
        assert!(csv.starts_with("true_label,pred_label,count\na,a,3\na,b,1\na,c,0\n"));
        assert!(csv.contains("\nlabel,accuracy_percent\na,75\n"));
        assert!(csv.ends_with(&format!("average,{}\n", r.average_accuracy)));
        assert_eq!(r.to_table().lines().count(), 2);
    }

    #[test]
    fn eval_errors() {
        let labels = vec![s("a"), s("b")];
        assert!(matches!(EvalReport::from_predictions(&labels, &[]), Err(Error::NoTestSamples)));
        assert!(matches!(
            EvalReport::from_predictions(&labels, &[(s("x"), s("a"))]),
            Err(Error::UnknownLabel(_))
        ));
        let models = set(&[("a", spherical(3, 0.0)), ("b", spherical(3, 1.0))]);
        let test: BTreeMap<String, Vec<WordFeatures>> =
            [(s("q"), vec![word(3, |_, _| 0.0)])].into_iter().collect();
        assert!(matches!(evaluate(&models, &test), Err(Error::UnknownLabel(_))));
    }

    fn toy_corpus(words: usize) -> BTreeMap<String, Vec<WordFeatures>> {
        let mut corpus = BTreeMap::new();
        for (k, label) in ["lo", "hi"].iter().enumerate() {
            let ws = (0..words)
                .map(|w| word(5, |i, j| k as f64 * 3.0 + ((w * 7 + i * 3 + j) % 5) as f64 * 0.1))
                .collect();
            corpus.insert(label.to_string(), ws);
        }
        corpus
    }

    fn pooled(order: usize) -> TrainConfig {
        TrainConfig {
            order,
            frames: FrameModeling::Pooled,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn pooled_training_fits_all_frames() {
        let (models, report) = train(&toy_corpus(100), &pooled(8)).unwrap();
        assert_eq!(models.frame_modeling(), FrameModeling::Pooled);
        assert_eq!(models.labels(), vec![s("hi"), s("lo")]);
        for m in models.models().values() {
            assert_eq!(m.gmms().len(), 1);
            assert_eq!(m.gmms()[0].order(), 8);
        }
        assert!(report.warnings.is_empty());
        assert_eq!(report.fits["lo"].len(), 1);
    }

    #[test]
    fn per_position_training_fits_one_mixture_per_frame() {
        let corpus = toy_corpus(20);
        let (models, report) = train(&corpus, &TrainConfig { order: 4, ..TrainConfig::default() }).unwrap();
        assert_eq!(models.frame_modeling(), FrameModeling::PerPosition);
        for m in models.models().values() {
            assert_eq!(m.gmms().len(), FRAMES_PER_WORD);
            assert!(m.gmms().iter().all(|g| g.order() == 4 && g.dim() == 5));
        }
        assert_eq!(report.fits["hi"].len(), FRAMES_PER_WORD);
        assert_eq!(evaluate(&models, &corpus).unwrap().average_accuracy, 100.0);
    }

    #[test]
    fn order_is_capped_by_training_vectors() {
        let corpus = toy_corpus(5);
        let (models, report) = train(&corpus, &pooled(128)).unwrap();
        assert_eq!(models.side(), 5);
        assert_eq!(models.order(), 128);
        for m in models.models().values() {
            assert_eq!(m.gmms()[0].order(), 30);
        }
        assert_eq!(report.effective_orders["lo"], 30);
        assert_eq!(report.warnings.len(), 2);

        let (models, report) = train(&corpus, &TrainConfig::default()).unwrap();
        assert!(models.models().values().all(|m| m.gmms().iter().all(|g| g.order() == 5)));
        assert_eq!(report.effective_orders["hi"], 5);

        let r = evaluate(&models, &corpus).unwrap();
        assert_eq!(r.average_accuracy, 100.0);
    }

    // Mirroring swaps (f1,f2) with (f3,f4) and reverses f6. The pooled score
    // sees the same bag of frames either way; per-position models do not.
    #[test]
    fn mirrored_words_separate_only_per_position() {
        let base = |w: usize| -> [Vec<f64>; 6] {
            let j = (w % 3) as f64 * 0.01;
            [
                vec![0.9 + j, 0.8, 0.7, 0.0],
                vec![0.1, 0.2 + j, 0.0, 0.0],
                vec![0.3, 0.3, 0.3 + j, 0.0],
                vec![0.6 + j, 0.5, 0.0, 0.0],
                vec![0.4, 0.4, 0.4, 0.4 + j],
                vec![0.2, 0.5 + j, 0.5 + j, 0.2],
            ]
        };
        let mirror = |v: [Vec<f64>; 6]| -> [Vec<f64>; 6] {
            let [f1, f2, f3, f4, f5, mut f6] = v;
            f6.reverse();
            [f3, f4, f1, f2, f5, f6]
        };
        let mut corpus = BTreeMap::new();
        corpus.insert(s("a"), (0..12).map(|w| WordFeatures::from_vectors(base(w)).unwrap()).collect::<Vec<_>>());
        corpus.insert(s("b"), (0..12).map(|w| WordFeatures::from_vectors(mirror(base(w))).unwrap()).collect());
        let by_position = train(&corpus, &TrainConfig { order: 2, ..TrainConfig::default() }).unwrap().0;
        assert_eq!(evaluate(&by_position, &corpus).unwrap().average_accuracy, 100.0);
        let bag = train(&corpus, &pooled(2)).unwrap().0;
        let r = evaluate(&bag, &corpus).unwrap();
        assert!(r.average_accuracy <= 75.0, "{:?}", r.per_class_accuracy);
    }

    #[test]
    fn train_errors() {
        let mut corpus = toy_corpus(3);
        corpus.insert(s("empty"), vec![]);
        assert!(matches!(train(&corpus, &TrainConfig::default()), Err(Error::EmptyScript(_))));

        let mut corpus = toy_corpus(3);
        corpus.get_mut("lo").unwrap().push(word(6, |_, _| 0.0));
        assert!(matches!(
            train(&corpus, &TrainConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));

        let mut corpus = toy_corpus(3);
        corpus.remove("lo");
        assert!(matches!(train(&corpus, &TrainConfig::default()), Err(Error::TooFewScripts(1))));
    }

    #[test]
    fn model_set_json_round_trip() {
        for cfg in [TrainConfig { order: 3, ..TrainConfig::default() }, pooled(3)] {
            let (models, _) = train(&toy_corpus(4), &cfg).unwrap();
            let text = models.to_json();
            assert_eq!(ScriptModelSet::from_json(&text).unwrap(), models);
        }
        let (models, _) = train(&toy_corpus(4), &pooled(3)).unwrap();
        let text = models.to_json();
        let mislabeled = text.replace("\"frame_modeling\": \"pooled\"", "\"frame_modeling\": \"per_position\"");
        assert!(ScriptModelSet::from_json(&mislabeled).is_err());
        let broken = text.replacen("\"format_version\": 1", "\"format_version\": 7", 1);
        assert!(matches!(ScriptModelSet::from_json(&broken), Err(Error::UnsupportedVersion(7))));
    }

    #[test]
    fn sweep_shape() {
        let corpus = toy_corpus(4);
        let cfg = TrainConfig::default();
        let results = sweep_orders(&corpus, &corpus, &[1, 2, 4], &cfg).unwrap();
        assert_eq!(sweep_rows(&results).len(), 3 * (2 + 1));
        let single = sweep_orders(&corpus, &corpus, &[2], &cfg).unwrap();
        let (models, _) = train(&corpus, &TrainConfig { order: 2, ..cfg }).unwrap();
        assert_eq!(single[0].report, evaluate(&models, &corpus).unwrap());
        assert!(sweep_orders(&corpus, &corpus, &[], &cfg).is_err());
    }
}
