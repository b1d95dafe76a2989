//! Scoring predicted phrases against gold annotations.
//!
//! Spans are compared by token indices within a sentence. In full mode both
//! boundaries must coincide; in partial mode one shared boundary suffices.
//! Matching is one-to-one and greedy in text order. Counts are summed over
//! the whole corpus before precision and recall are computed (micro
//! averaging).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::error::{Error, Result};
use crate::extract::NounPhrase;
use crate::pipeline::{predict, Corpus, EntitySources, PipelineConfig, Variant};

/// Tokens `start..=end` of one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub doc_id: String,
    pub sentence_id: String,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(doc_id: &str, sentence_id: &str, start: usize, end: usize) -> Self {
        Span {
            doc_id: doc_id.to_string(),
            sentence_id: sentence_id.to_string(),
            start,
            end,
        }
    }

    fn same_sentence(&self, other: &Span) -> bool {
        self.doc_id == other.doc_id && self.sentence_id == other.sentence_id
    }
}

impl From<&NounPhrase> for Span {
    fn from(p: &NounPhrase) -> Self {
        Span::new(&p.doc_id, &p.sentence_id, p.start, p.end)
    }
}

/// The noun phrases an annotator marked in one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub doc_id: String,
    pub clusters: Vec<Span>,
}

impl GoldAnnotation {
    /// Checks that spans are well-formed and do not overlap within a sentence.
    pub fn new(doc_id: &str, mut clusters: Vec<Span>) -> Result<Self> {
        clusters.sort_by(|a, b| {
            (&a.sentence_id, a.start, a.end).cmp(&(&b.sentence_id, b.start, b.end))
        });
        for c in &clusters {
            if c.doc_id != doc_id {
                return Err(Error::Invalid(format!(
                    "gold span of document {} filed under {doc_id}",
                    c.doc_id
                )));
            }
            if c.start == 0 || c.start > c.end {
                return Err(Error::Invalid(format!(
                    "gold span {}..{} in {}/{} is malformed",
                    c.start, c.end, c.doc_id, c.sentence_id
                )));
            }
        }
        for pair in clusters.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.same_sentence(b) && b.start <= a.end {
                return Err(Error::Invalid(format!(
                    "gold spans {}..{} and {}..{} overlap in {}/{}",
                    a.start, a.end, b.start, b.end, a.doc_id, a.sentence_id
                )));
            }
        }
        Ok(GoldAnnotation {
            doc_id: doc_id.to_string(),
            clusters,
        })
    }
}

/// Group gold spans by document, validating each document.
pub fn group_gold(spans: &[Span]) -> Result<Vec<GoldAnnotation>> {
    let mut order = Vec::new();
    let mut by_doc: HashMap<&str, Vec<Span>> = HashMap::new();
    for s in spans {
        by_doc
            .entry(&s.doc_id)
            .or_insert_with(|| {
                order.push(s.doc_id.as_str());
                Vec::new()
            })
            .push(s.clone());
    }
    order
        .into_iter()
        .map(|doc| GoldAnnotation::new(doc, by_doc.remove(doc).unwrap_or_default()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Full,
    Partial,
}

impl MatchMode {
    pub const ALL: [MatchMode; 2] = [MatchMode::Full, MatchMode::Partial];

    pub fn matches(self, pred: &Span, gold: &Span) -> bool {
        match self {
            MatchMode::Full => match_full(pred, gold),
            MatchMode::Partial => match_partial(pred, gold),
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Full => "full",
            MatchMode::Partial => "partial",
        })
    }
}

impl std::str::FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(MatchMode::Full),
            "partial" => Ok(MatchMode::Partial),
            other => Err(Error::Config(format!("unknown match mode '{other}'"))),
        }
    }
}

pub fn match_full(pred: &Span, gold: &Span) -> bool {
    pred.same_sentence(gold) && pred.start == gold.start && pred.end == gold.end
}

pub fn match_partial(pred: &Span, gold: &Span) -> bool {
    pred.same_sentence(gold) && (pred.start == gold.start || pred.end == gold.end)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        ConfusionCounts { tp, fp, fn_ }
    }
}

impl Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, rhs: Self) -> Self {
        ConfusionCounts::new(self.tp + rhs.tp, self.fp + rhs.fp, self.fn_ + rhs.fn_)
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// Count matches between predictions and gold spans.
///
/// Predictions are taken sentence by sentence in text order; each one claims
/// the first unclaimed gold span it matches.
pub fn score(preds: &[Span], golds: &[Span], mode: MatchMode) -> ConfusionCounts {
    let mut gold_by_sentence: HashMap<(&str, &str), Vec<(&Span, bool)>> = HashMap::new();
    for g in golds {
        gold_by_sentence
            .entry((&g.doc_id, &g.sentence_id))
            .or_default()
            .push((g, false));
    }
    for list in gold_by_sentence.values_mut() {
        list.sort_by_key(|(g, _)| (g.start, g.end));
    }

    let mut ordered: Vec<&Span> = preds.iter().collect();
    ordered.sort();

    let mut tp = 0;
    for p in ordered {
        let Some(list) = gold_by_sentence.get_mut(&(p.doc_id.as_str(), p.sentence_id.as_str()))
        else {
            continue;
        };
        if let Some(slot) = list
            .iter_mut()
            .find(|(g, used)| !used && mode.matches(p, g))
        {
            slot.1 = true;
            tp += 1;
        }
    }
    ConfusionCounts::new(tp, preds.len() - tp, golds.len() - tp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and their harmonic mean; zero denominators give zero.
pub fn metrics(c: &ConfusionCounts) -> Metrics {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Metrics {
        precision,
        recall,
        f1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub variant: Variant,
    pub mode: MatchMode,
    #[serde(flatten)]
    pub counts: ConfusionCounts,
    #[serde(flatten)]
    pub metrics: Metrics,
}

impl MetricsReport {
    pub fn new(variant: Variant, mode: MatchMode, counts: ConfusionCounts) -> Self {
        MetricsReport {
            variant,
            mode,
            counts,
            metrics: metrics(&counts),
        }
    }
}

/// One singleton phrase per noun and per personal pronoun.
pub fn baseline_extract(sentence: &Sentence) -> Vec<NounPhrase> {
    sentence
        .tokens
        .iter()
        .filter(|t| t.upos == "NOUN" || (t.upos == "PRON" && t.has_feat("PronType", "Prs")))
        .map(|t| NounPhrase {
            doc_id: sentence.doc_id.clone(),
            sentence_id: sentence.sent_id.clone(),
            head: t.index,
            start: t.index,
            end: t.index,
            entity_derived: false,
        })
        .collect()
}

/// Metrics of every variant in every mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantTable {
    pub documents: usize,
    pub sentences: usize,
    pub reports: Vec<MetricsReport>,
}

impl VariantTable {
    pub fn get(&self, variant: Variant, mode: MatchMode) -> Option<&MetricsReport> {
        self.reports
            .iter()
            .find(|r| r.variant == variant && r.mode == mode)
    }

    /// Aligned plain-text tables, one per mode.
    pub fn render_text(&self, modes: &[MatchMode]) -> String {
        let mut out = format!(
            "# micro-averaged over {} documents, {} sentences\n",
            self.documents, self.sentences
        );
        for &mode in modes {
            let title = match mode {
                MatchMode::Full => "Full match",
                MatchMode::Partial => "Partial match",
            };
            out.push_str(&format!(
                "\n{title}\n{:<8}  {:>9}  {:>6}  {:>6}\n",
                "Variant", "Precision", "Recall", "F1"
            ));
            for variant in Variant::ALL {
                if let Some(r) = self.get(variant, mode) {
                    out.push_str(&format!(
                        "{:<8}  {:>9.3}  {:>6.3}  {:>6.3}\n",
                        variant.label(),
                        r.metrics.precision,
                        r.metrics.recall,
                        r.metrics.f1
                    ));
                }
            }
        }
        out
    }

    /// One JSON object per variant and mode.
    pub fn to_json_lines(&self, modes: &[MatchMode]) -> String {
        self.reports
            .iter()
            .filter(|r| modes.contains(&r.mode))
            .map(|r| serde_json::to_string(r).expect("report serializes") + "\n")
            .collect()
    }
}

/// Run the UD+NER, UD and baseline variants over a corpus and score each in
/// both modes.
///
/// Every document named in the gold spans must exist in the corpus; corpus
/// documents without gold spans are scored as having no phrases.
pub fn evaluate_variants(
    corpus: &Corpus,
    gold: &[Span],
    entities: &EntitySources<'_>,
    cfg: &PipelineConfig,
) -> Result<VariantTable> {
    let docs: BTreeSet<&str> = corpus
        .sentences()
        .iter()
        .map(|s| s.doc_id.as_str())
        .collect();
    let missing: BTreeSet<&str> = gold
        .iter()
        .map(|g| g.doc_id.as_str())
        .filter(|d| !docs.contains(d))
        .collect();
    if !missing.is_empty() {
        return Err(Error::DocumentMismatch(
            missing.into_iter().map(str::to_string).collect(),
        ));
    }
    group_gold(gold)?;

    let mut reports = Vec::new();
    for variant in Variant::ALL {
        let preds: Vec<Span> = predict(variant, corpus, entities, cfg)
            .iter()
            .map(Span::from)
            .collect();
        for mode in MatchMode::ALL {
            reports.push(MetricsReport::new(variant, mode, score(&preds, gold, mode)));
        }
    }
    Ok(VariantTable {
        documents: docs.len(),
        sentences: corpus.sentences().len(),
        reports,
    })
}
