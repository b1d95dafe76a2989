//! Storage behind the annotation service: raw text is tokenized into
//! sentences, and annotators attach noun-phrase clusters to documents.
//!
//! Each document lives in two files of the storage directory:
//! `<doc_id>.doc.tsv` (`sentence_id  index  form`, one token per line) and
//! `<doc_id>.gold.tsv`, which uses the gold record format so saved clusters
//! can be fed straight to the evaluator.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::{GoldAnnotation, Span};
use crate::records::{parse_gold, write_gold};

const DOC_SUFFIX: &str = ".doc.tsv";
const GOLD_SUFFIX: &str = ".gold.tsv";

fn token_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| {
        Regex::new(r"[\p{L}\p{N}]+(?:[-'’ʼ][\p{L}\p{N}]+)*|[.!?…]+|\S").expect("valid pattern")
    })
}

fn ends_sentence(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| matches!(c, '.' | '!' | '?' | '…'))
}

fn closes_quote(token: &str) -> bool {
    matches!(token, "»" | "\"" | "”" | ")" | "’")
}

/// Rule-based tokenizer: words (with inner hyphens and apostrophes) and
/// punctuation marks, split into sentences after runs of `.`, `!`, `?`, `…`
/// (so `?..` and `!!!` stay single tokens).
pub fn tokenize(text: &str) -> Vec<Vec<String>> {
    let mut sentences = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut closing = false;
    for m in token_pattern().find_iter(text) {
        let token = m.as_str();
        if closing && !ends_sentence(token) && !closes_quote(token) {
            sentences.push(std::mem::take(&mut current));
            closing = false;
        }
        current.push(token.to_string());
        if ends_sentence(token) {
            closing = true;
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocToken {
    pub index: usize,
    pub form: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocSentence {
    pub sentence_id: String,
    pub tokens: Vec<DocToken>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub sentences: Vec<DocSentence>,
    pub clusters: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSummary {
    pub doc_id: String,
    pub sentences: usize,
    pub tokens: usize,
    pub clusters: usize,
}

/// A cluster as submitted by an annotator: token indices of one sentence.
/// The sentence may be omitted for single-sentence documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterInput {
    #[serde(default)]
    pub sentence_id: Option<String>,
    pub tokens: Vec<usize>,
}

/// Content-derived id: the first 12 hex digits of the text's SHA-256.
pub fn document_id_for(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn check_doc_id(doc_id: &str) -> Result<()> {
    let ok = !doc_id.is_empty()
        && doc_id.len() <= 128
        && !doc_id.starts_with('.')
        && doc_id
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::Invalid(format!("invalid document id '{doc_id}'")))
    }
}

/// File-backed document and cluster store. Writes are serialized and land
/// through a rename, so readers only ever see complete files.
#[derive(Debug)]
pub struct AnnotationStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl AnnotationStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(AnnotationStore {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn doc_path(&self, doc_id: &str) -> PathBuf {
        self.dir.join(format!("{doc_id}{DOC_SUFFIX}"))
    }

    fn gold_path(&self, doc_id: &str) -> PathBuf {
        self.dir.join(format!("{doc_id}{GOLD_SUFFIX}"))
    }

    fn write_atomic(&self, path: &Path, contents: &[u8]) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(contents)
            .and_then(|_| file.sync_all())
            .map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    /// Tokenize `text` and store it. Re-submitting a document replaces its
    /// tokens and drops clusters that no longer fit.
    pub fn create_document(&self, text: &str, doc_id: Option<&str>) -> Result<AnnotatedDocument> {
        let sentences = tokenize(text);
        if sentences.is_empty() {
            return Err(Error::Invalid("text contains no tokens".to_string()));
        }
        let doc_id = match doc_id {
            Some(id) => {
                check_doc_id(id)?;
                id.to_string()
            }
            None => document_id_for(text),
        };
        let sentences: Vec<DocSentence> = sentences
            .into_iter()
            .enumerate()
            .map(|(i, words)| DocSentence {
                sentence_id: format!("{doc_id}:{}", i + 1),
                tokens: words
                    .into_iter()
                    .enumerate()
                    .map(|(j, form)| DocToken { index: j + 1, form })
                    .collect(),
            })
            .collect();

        let mut contents = String::new();
        for s in &sentences {
            for t in &s.tokens {
                contents.push_str(&format!("{}\t{}\t{}\n", s.sentence_id, t.index, t.form));
            }
        }

        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let old_clusters = self.read_clusters(&doc_id)?;
        self.write_atomic(&self.doc_path(&doc_id), contents.as_bytes())?;
        let doc = AnnotatedDocument {
            doc_id: doc_id.clone(),
            clusters: old_clusters
                .into_iter()
                .filter(|c| fits(&sentences, c))
                .collect(),
            sentences,
        };
        let mut buf = Vec::new();
        write_gold(&mut buf, &doc.clusters).map_err(|e| Error::io(self.gold_path(&doc_id), e))?;
        self.write_atomic(&self.gold_path(&doc_id), &buf)?;
        Ok(doc)
    }

    /// Replace the clusters of a document. Non-contiguous clusters are split
    /// into contiguous runs; a token may belong to one cluster only.
    pub fn save_clusters(&self, doc_id: &str, clusters: &[ClusterInput]) -> Result<Vec<Span>> {
        check_doc_id(doc_id)?;
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let sentences = self.read_sentences(doc_id)?;

        let mut spans = Vec::new();
        for (n, cluster) in clusters.iter().enumerate() {
            let sentence = match &cluster.sentence_id {
                Some(id) => sentences
                    .iter()
                    .find(|s| &s.sentence_id == id)
                    .ok_or_else(|| {
                        Error::Invalid(format!("cluster {}: unknown sentence {id}", n + 1))
                    })?,
                None if sentences.len() == 1 => &sentences[0],
                None => {
                    return Err(Error::Invalid(format!(
                        "cluster {}: sentence_id is required for multi-sentence documents",
                        n + 1
                    )))
                }
            };
            let indices: BTreeSet<usize> = cluster.tokens.iter().copied().collect();
            if indices.is_empty() {
                return Err(Error::Invalid(format!("cluster {} is empty", n + 1)));
            }
            if let Some(bad) = indices
                .iter()
                .find(|&&i| i == 0 || i > sentence.tokens.len())
            {
                return Err(Error::Invalid(format!(
                    "cluster {}: token {bad} is not in sentence {}",
                    n + 1,
                    sentence.sentence_id
                )));
            }
            let mut run: Option<(usize, usize)> = None;
            for i in indices {
                run = match run {
                    Some((s, e)) if i == e + 1 => Some((s, i)),
                    Some((s, e)) => {
                        spans.push(Span::new(doc_id, &sentence.sentence_id, s, e));
                        Some((i, i))
                    }
                    None => Some((i, i)),
                };
            }
            if let Some((s, e)) = run {
                spans.push(Span::new(doc_id, &sentence.sentence_id, s, e));
            }
        }
        let gold = GoldAnnotation::new(doc_id, spans)
            .map_err(|e| Error::Invalid(format!("clusters rejected: {e}")))?;
        let mut ordered = gold.clusters;
        let position = |id: &str| sentences.iter().position(|s| s.sentence_id == id);
        ordered.sort_by_key(|s| (position(&s.sentence_id), s.start));

        let mut buf = Vec::new();
        write_gold(&mut buf, &ordered).map_err(|e| Error::io(self.gold_path(doc_id), e))?;
        self.write_atomic(&self.gold_path(doc_id), &buf)?;
        Ok(ordered)
    }

    pub fn load(&self, doc_id: &str) -> Result<AnnotatedDocument> {
        check_doc_id(doc_id)?;
        let sentences = self.read_sentences(doc_id)?;
        let clusters = self.read_clusters(doc_id)?;
        Ok(AnnotatedDocument {
            doc_id: doc_id.to_string(),
            sentences,
            clusters,
        })
    }

    pub fn list(&self) -> Result<Vec<DocumentSummary>> {
        let mut ids: Vec<String> = fs::read_dir(&self.dir)
            .map_err(|e| Error::io(&self.dir, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                e.file_name()
                    .to_str()
                    .and_then(|n| n.strip_suffix(DOC_SUFFIX))
                    .map(str::to_string)
            })
            .collect();
        ids.sort();
        ids.into_iter()
            .map(|id| {
                let doc = self.load(&id)?;
                Ok(DocumentSummary {
                    tokens: doc.sentences.iter().map(|s| s.tokens.len()).sum(),
                    sentences: doc.sentences.len(),
                    clusters: doc.clusters.len(),
                    doc_id: id,
                })
            })
            .collect()
    }

    /// All stored clusters, in gold record order.
    pub fn export_gold(&self) -> Result<Vec<Span>> {
        let mut all = Vec::new();
        for summary in self.list()? {
            all.extend(self.read_clusters(&summary.doc_id)?);
        }
        Ok(all)
    }

    fn read_sentences(&self, doc_id: &str) -> Result<Vec<DocSentence>> {
        let path = self.doc_path(doc_id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::NotFound(doc_id.to_string()))
            }
            Err(e) => return Err(Error::io(&path, e)),
        };
        let mut sentences: Vec<DocSentence> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let mut cols = line.splitn(3, '\t');
            let (Some(sid), Some(idx), Some(form)) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::record(
                    &path.display().to_string(),
                    i + 1,
                    "expected 3 fields",
                ));
            };
            let index: usize = idx.parse().map_err(|_| {
                Error::record(&path.display().to_string(), i + 1, "bad token index")
            })?;
            match sentences.last_mut() {
                Some(s) if s.sentence_id == sid => s.tokens.push(DocToken {
                    index,
                    form: form.to_string(),
                }),
                _ => sentences.push(DocSentence {
                    sentence_id: sid.to_string(),
                    tokens: vec![DocToken {
                        index,
                        form: form.to_string(),
                    }],
                }),
            }
        }
        Ok(sentences)
    }

    fn read_clusters(&self, doc_id: &str) -> Result<Vec<Span>> {
        let path = self.gold_path(doc_id);
        match fs::File::open(&path) {
            Ok(f) => parse_gold(std::io::BufReader::new(f), &path.display().to_string()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

fn fits(sentences: &[DocSentence], span: &Span) -> bool {
    sentences
        .iter()
        .any(|s| s.sentence_id == span.sentence_id && span.end <= s.tokens.len())
}
