//! Named-entity spans from gazetteers and external NER output, and their
//! merging into extracted noun phrases.
//!
//! A phrase and an entity span that share at least one token are replaced by
//! their union. Merging runs to a fixed point, so chains of overlapping spans
//! collapse into one phrase.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conllu::Sentence;
use crate::error::{Error, Result};
use crate::extract::{is_potential_head, ExtractionConfig, NounPhrase};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum EntityCategory {
    Person,
    Location,
    Organization,
    Misc,
    Country,
    City,
    Custom(String),
}

impl fmt::Display for EntityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EntityCategory::Person => "person",
            EntityCategory::Location => "location",
            EntityCategory::Organization => "organization",
            EntityCategory::Misc => "misc",
            EntityCategory::Country => "country",
            EntityCategory::City => "city",
            EntityCategory::Custom(name) => name,
        };
        f.write_str(name)
    }
}

impl From<&str> for EntityCategory {
    fn from(s: &str) -> Self {
        match s.trim().to_lowercase().as_str() {
            "person" | "persons" | "per" | "pers" => EntityCategory::Person,
            "location" | "locations" | "loc" => EntityCategory::Location,
            "organization" | "organisation" | "organizations" | "org" => {
                EntityCategory::Organization
            }
            "misc" => EntityCategory::Misc,
            "country" | "countries" => EntityCategory::Country,
            "city" | "cities" => EntityCategory::City,
            other => EntityCategory::Custom(other.to_string()),
        }
    }
}

impl From<String> for EntityCategory {
    fn from(s: String) -> Self {
        EntityCategory::from(s.as_str())
    }
}

impl From<EntityCategory> for String {
    fn from(c: EntityCategory) -> Self {
        c.to_string()
    }
}

impl FromStr for EntityCategory {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(EntityCategory::from(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanSource {
    Gazetteer,
    External,
}

/// Tokens `start..=end` of one sentence recognized as a named entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub doc_id: String,
    pub sentence_id: String,
    pub start: usize,
    pub end: usize,
    pub category: EntityCategory,
    pub confidence: f64,
    pub source: SpanSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NerConfig {
    /// Spans below this confidence are dropped; the comparison is inclusive.
    pub confidence_threshold: f64,
    pub merge_enabled: bool,
}

impl Default for NerConfig {
    fn default() -> Self {
        NerConfig {
            confidence_threshold: 0.8,
            merge_enabled: true,
        }
    }
}

impl NerConfig {
    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.confidence_threshold) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "confidence threshold {} outside [0, 1]",
                self.confidence_threshold
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerEntry {
    /// Tokens as written in the source list.
    pub tokens: Vec<String>,
    key: Vec<String>,
}

impl GazetteerEntry {
    fn parse(line: &str) -> Option<Self> {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            return None;
        }
        let key = tokens.iter().map(|t| t.to_lowercase()).collect();
        Some(GazetteerEntry { tokens, key })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Category-labelled lists of multiword names, matched case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: BTreeMap<EntityCategory, Vec<GazetteerEntry>>,
    // lowercased first token -> (category, position in its list)
    index: HashMap<String, Vec<(EntityCategory, usize)>>,
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add one entry; blank and duplicate entries are ignored.
    pub fn insert(&mut self, category: EntityCategory, entry: &str) -> bool {
        let Some(entry) = GazetteerEntry::parse(entry) else {
            return false;
        };
        let list = self.entries.entry(category.clone()).or_default();
        if list.iter().any(|e| e.key == entry.key) {
            return false;
        }
        self.index
            .entry(entry.key[0].clone())
            .or_default()
            .push((category, list.len()));
        list.push(entry);
        true
    }

    /// Register a category even if it ends up with no entries.
    pub fn add_category(&mut self, category: EntityCategory) {
        self.entries.entry(category).or_default();
    }

    pub fn categories(&self) -> impl Iterator<Item = &EntityCategory> {
        self.entries.keys()
    }

    pub fn entries(&self, category: &EntityCategory) -> &[GazetteerEntry] {
        self.entries
            .get(category)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn candidates(&self, first: &str) -> impl Iterator<Item = (&EntityCategory, &GazetteerEntry)> {
        self.index
            .get(first)
            .into_iter()
            .flatten()
            .map(|(cat, i)| (cat, &self.entries[cat][*i]))
    }
}

/// Load gazetteer lists: one entry per line, tokens separated by spaces.
pub fn load_gazetteer<C, P>(files: &[(C, P)]) -> Result<Gazetteer>
where
    C: Clone + Into<EntityCategory>,
    P: AsRef<Path>,
{
    let mut gazetteer = Gazetteer::new();
    for (category, path) in files {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let category: EntityCategory = category.clone().into();
        gazetteer.add_category(category.clone());
        for line in text.lines() {
            gazetteer.insert(category.clone(), line.trim());
        }
    }
    Ok(gazetteer)
}

/// Load every `*.txt` file of a directory, naming categories by file stem.
pub fn load_gazetteer_dir(dir: impl AsRef<Path>) -> Result<Gazetteer> {
    let dir = dir.as_ref();
    let mut files: Vec<(EntityCategory, PathBuf)> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
        .filter_map(|p| {
            let stem = p.file_stem()?.to_string_lossy().into_owned();
            Some((EntityCategory::from(stem.as_str()), p))
        })
        .collect();
    files.sort_by(|a, b| a.1.cmp(&b.1));
    load_gazetteer(&files)
}

/// Longest-match, left-to-right dictionary lookup over FORM and LEMMA.
pub fn match_gazetteer(sentence: &Sentence, gazetteer: &Gazetteer) -> Vec<EntitySpan> {
    let keys: Vec<(String, String)> = sentence
        .tokens
        .iter()
        .map(|t| (t.form.to_lowercase(), t.lemma.to_lowercase()))
        .collect();
    let fits = |pos: usize, word: &str| {
        keys.get(pos)
            .is_some_and(|(form, lemma)| form == word || lemma == word)
    };

    let mut spans = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let (form, lemma) = &keys[i];
        let mut firsts = vec![form.as_str()];
        if lemma != form {
            firsts.push(lemma.as_str());
        }
        let best = firsts
            .into_iter()
            .flat_map(|first| gazetteer.candidates(first))
            .filter(|(_, entry)| {
                entry
                    .key
                    .iter()
                    .enumerate()
                    .all(|(k, word)| fits(i + k, word))
            })
            .fold(
                None::<(&EntityCategory, &GazetteerEntry)>,
                |best, cand| match best {
                    Some(b) if b.1.len() >= cand.1.len() => Some(b),
                    _ => Some(cand),
                },
            );
        match best {
            Some((category, entry)) => {
                spans.push(EntitySpan {
                    doc_id: sentence.doc_id.clone(),
                    sentence_id: sentence.sent_id.clone(),
                    start: i + 1,
                    end: i + entry.len(),
                    category: category.clone(),
                    confidence: 1.0,
                    source: SpanSource::Gazetteer,
                });
                i += entry.len();
            }
            None => i += 1,
        }
    }
    spans
}

/// Read external NER spans: `doc_id  sentence_id  start  end  category  confidence`,
/// tab-separated. Blank lines and `#` comments are skipped.
pub fn load_external_spans(path: impl AsRef<Path>) -> Result<Vec<EntitySpan>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_external_spans(std::io::BufReader::new(file), &path.display().to_string())
}

pub fn parse_external_spans<R: BufRead>(input: R, source_name: &str) -> Result<Vec<EntitySpan>> {
    let mut spans = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::record(source_name, line_no, e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::record(source_name, line_no, msg);
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 6 {
            return Err(bad(format!("expected 6 fields, found {}", fields.len())));
        }
        let index = |name: &str, s: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(bad(format!("{name} '{s}' is not a positive integer"))),
            }
        };
        let start = index("start", fields[2])?;
        let end = index("end", fields[3])?;
        if start > end {
            return Err(bad(format!("start {start} is after end {end}")));
        }
        let confidence: f64 = fields[5]
            .trim()
            .parse()
            .map_err(|_| bad(format!("confidence '{}' is not a number", fields[5])))?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(bad(format!("confidence {confidence} outside [0, 1]")));
        }
        spans.push(EntitySpan {
            doc_id: fields[0].to_string(),
            sentence_id: fields[1].to_string(),
            start,
            end,
            category: EntityCategory::from(fields[4]),
            confidence,
            source: SpanSource::External,
        });
    }
    Ok(spans)
}

/// Keep spans whose confidence reaches the threshold, in order.
pub fn filter_spans(spans: Vec<EntitySpan>, cfg: &NerConfig) -> Vec<EntitySpan> {
    spans
        .into_iter()
        .filter(|s| s.confidence >= cfg.confidence_threshold)
        .collect()
}

type SentenceKey = (String, String);

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Merge entity spans into noun phrases.
///
/// Within a sentence, phrases and spans sharing tokens are replaced by their
/// union. The merged phrase keeps the head of its widest source phrase.
/// Spans that meet no phrase become phrases of their own, headed by their
/// last token when it is a potential head and by their first token
/// otherwise. Spans pointing outside their sentence are skipped with a
/// warning. Output is sorted by sentence, then start.
pub fn merge_spans(
    groups: &[NounPhrase],
    spans: &[EntitySpan],
    sentences: &[Sentence],
    cfg: &ExtractionConfig,
) -> Vec<NounPhrase> {
    let mut order: Vec<SentenceKey> = Vec::new();
    let mut by_sentence: HashMap<SentenceKey, (Vec<&NounPhrase>, Vec<&EntitySpan>)> =
        HashMap::new();
    let known: HashMap<SentenceKey, &Sentence> = sentences
        .iter()
        .map(|s| ((s.doc_id.clone(), s.sent_id.clone()), s))
        .collect();

    for g in groups {
        let key = (g.doc_id.clone(), g.sentence_id.clone());
        by_sentence
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Default::default()
            })
            .0
            .push(g);
    }
    for s in spans {
        let key = (s.doc_id.clone(), s.sentence_id.clone());
        let Some(sentence) = known.get(&key) else {
            log::warn!(
                "entity span refers to unknown sentence {}/{}; skipped",
                s.doc_id,
                s.sentence_id
            );
            continue;
        };
        if s.start == 0 || s.start > s.end || s.end > sentence.len() {
            log::warn!(
                "entity span {}..{} outside sentence {} of {} tokens; skipped",
                s.start,
                s.end,
                s.sentence_id,
                sentence.len()
            );
            continue;
        }
        by_sentence
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Default::default()
            })
            .1
            .push(s);
    }

    let position: HashMap<SentenceKey, usize> = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| ((s.doc_id.clone(), s.sent_id.clone()), i))
        .collect();
    order.sort_by_key(|k| position.get(k).copied().unwrap_or(usize::MAX));

    let mut out = Vec::with_capacity(groups.len());
    for key in &order {
        let (phrases, entity_spans) = &by_sentence[key];
        out.extend(merge_sentence(
            phrases,
            entity_spans,
            known.get(key).copied(),
            cfg,
        ));
    }
    out
}

fn merge_sentence(
    groups: &[&NounPhrase],
    spans: &[&EntitySpan],
    sentence: Option<&Sentence>,
    cfg: &ExtractionConfig,
) -> Vec<NounPhrase> {
    if spans.is_empty() {
        return groups.iter().map(|g| (*g).clone()).collect();
    }
    let g = groups.len();
    let intervals: Vec<(usize, usize)> = groups
        .iter()
        .map(|p| (p.start, p.end))
        .chain(spans.iter().map(|s| (s.start, s.end)))
        .collect();
    let intersects = |a: (usize, usize), b: (usize, usize)| a.0 <= b.1 && b.0 <= a.1;

    // phrases are linked only through spans, never directly to each other
    let mut uf = UnionFind::new(intervals.len());
    for j in g..intervals.len() {
        for i in 0..j {
            if intersects(intervals[i], intervals[j]) {
                uf.union(i, j);
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..intervals.len() {
        let root = uf.find(i);
        components.entry(root).or_default().push(i);
    }

    let mut merged: Vec<NounPhrase> = components
        .into_values()
        .map(|members| {
            let start = members.iter().map(|&i| intervals[i].0).min().unwrap_or(1);
            let end = members
                .iter()
                .map(|&i| intervals[i].1)
                .max()
                .unwrap_or(start);
            let sources: Vec<&NounPhrase> = members
                .iter()
                .filter(|&&i| i < g)
                .map(|&i| groups[i])
                .collect();
            match sources
                .iter()
                .max_by(|a, b| a.len().cmp(&b.len()).then(b.start.cmp(&a.start)))
            {
                Some(widest) => NounPhrase {
                    start,
                    end,
                    entity_derived: sources.iter().all(|p| p.entity_derived),
                    ..(*widest).clone()
                },
                None => {
                    let span = spans[members[0] - g];
                    let head = match sentence.and_then(|s| s.token(end)) {
                        Some(t) if is_potential_head(t, cfg) => end,
                        _ => start,
                    };
                    NounPhrase {
                        doc_id: span.doc_id.clone(),
                        sentence_id: span.sentence_id.clone(),
                        head,
                        start,
                        end,
                        entity_derived: true,
                    }
                }
            }
        })
        .collect();
    merged.sort_by(|a, b| {
        a.start
            .cmp(&b.start)
            .then(b.end.cmp(&a.end))
            .then(a.head.cmp(&b.head))
    });
    merged
}
