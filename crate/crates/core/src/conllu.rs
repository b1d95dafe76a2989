//! Reading and writing the 10-column CoNLL-U format.
//!
//! Only syntactic-word lines are kept: multiword-token ranges (`3-4`) and
//! empty nodes (`5.1`) carry no basic-tree syntax and are skipped. DEPS and
//! MISC are preserved verbatim so that a sentence can be written back out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Morphological features, kept sorted by name as CoNLL-U prescribes.
pub type Features = BTreeMap<String, String>;

/// Document id used when the input names none.
pub const DEFAULT_DOC_ID: &str = "doc";

const EMPTY: &str = "_";

/// One syntactic word of a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position within the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: Features,
    /// Index of the governing token, 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// Minimal constructor for hand-built sentences; unused columns are `_`.
    pub fn new(index: usize, form: &str, upos: &str, head: usize, deprel: &str) -> Self {
        Token {
            index,
            form: form.to_string(),
            lemma: form.to_lowercase(),
            upos: upos.to_string(),
            xpos: EMPTY.to_string(),
            feats: Features::new(),
            head,
            deprel: deprel.to_string(),
            deps: EMPTY.to_string(),
            misc: EMPTY.to_string(),
        }
    }

    pub fn with_lemma(mut self, lemma: &str) -> Self {
        self.lemma = lemma.to_string();
        self
    }

    pub fn with_feat(mut self, name: &str, value: &str) -> Self {
        self.feats.insert(name.to_string(), value.to_string());
        self
    }

    pub fn feat(&self, name: &str) -> Option<&str> {
        self.feats.get(name).map(String::as_str)
    }

    pub fn has_feat(&self, name: &str, value: &str) -> bool {
        self.feat(name) == Some(value)
    }

    /// The universal part of the relation label: `flat:name` -> `flat`.
    pub fn base_deprel(&self) -> &str {
        self.deprel.split(':').next().unwrap_or_default()
    }

    pub fn to_conllu_line(&self) -> String {
        let feats = if self.feats.is_empty() {
            EMPTY.to_string()
        } else {
            self.feats
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join("|")
        };
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.index,
            self.form,
            self.lemma,
            self.upos,
            self.xpos,
            feats,
            self.head,
            self.deprel,
            self.deps,
            self.misc
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc_id: String,
    pub sent_id: String,
    /// Value of the `# text =` comment, when present.
    pub text: Option<String>,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by its 1-based index.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Forms of tokens `start..=end` joined by single spaces.
    pub fn surface(&self, start: usize, end: usize) -> String {
        (start..=end)
            .filter_map(|i| self.token(i))
            .map(|t| t.form.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# sent_id = {}", self.sent_id);
        if let Some(text) = &self.text {
            let _ = writeln!(out, "# text = {text}");
        }
        for token in &self.tokens {
            out.push_str(&token.to_conllu_line());
            out.push('\n');
        }
        out
    }
}

/// Parse CoNLL-U text; sentences without `# newdoc id` belong to [`DEFAULT_DOC_ID`].
pub fn parse_conllu<R: BufRead>(input: R) -> Result<Vec<Sentence>> {
    parse_conllu_with_doc(input, DEFAULT_DOC_ID)
}

pub fn parse_conllu_str(input: &str) -> Result<Vec<Sentence>> {
    parse_conllu(input.as_bytes())
}

/// Read a CoNLL-U file, using the file stem as the initial document id.
pub fn read_conllu_file(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let doc_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| DEFAULT_DOC_ID.to_string());
    parse_conllu_with_doc(BufReader::new(file), &doc_id)
}

/// Write sentences, emitting `# newdoc id` whenever the document changes.
pub fn write_conllu<W: Write>(mut out: W, sentences: &[Sentence]) -> io::Result<()> {
    let mut doc = DEFAULT_DOC_ID;
    for sentence in sentences {
        if sentence.doc_id != doc {
            writeln!(out, "# newdoc id = {}", sentence.doc_id)?;
            doc = &sentence.doc_id;
        }
        out.write_all(sentence.to_conllu().as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Parse CoNLL-U text. `# newdoc id = X` (or `# doc_id = X`) switches the
/// current document; sentences lacking `# sent_id` get `<doc_id>:<ordinal>`.
pub fn parse_conllu_with_doc<R: BufRead>(input: R, doc_id: &str) -> Result<Vec<Sentence>> {
    let mut parser = BlockParser::new(doc_id);
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        parser.feed(line.trim_end_matches('\r'), line_no)?;
    }
    parser.finish()
}

struct BlockParser {
    sentences: Vec<Sentence>,
    doc_id: String,
    ordinal: usize,
    sent_id: Option<String>,
    text: Option<String>,
    tokens: Vec<Token>,
    block_start: usize,
}

impl BlockParser {
    fn new(doc_id: &str) -> Self {
        BlockParser {
            sentences: Vec::new(),
            doc_id: doc_id.to_string(),
            ordinal: 0,
            sent_id: None,
            text: None,
            tokens: Vec::new(),
            block_start: 0,
        }
    }

    fn feed(&mut self, line: &str, line_no: usize) -> Result<()> {
        if line.trim().is_empty() {
            return self.flush();
        }
        if self.tokens.is_empty() && self.sent_id.is_none() && self.text.is_none() {
            self.block_start = line_no;
        }
        if let Some(comment) = line.strip_prefix('#') {
            self.comment(comment.trim());
            return Ok(());
        }
        if let Some(token) = parse_token_line(line, line_no, self.tokens.len() + 1)? {
            self.tokens.push(token);
        }
        Ok(())
    }

    fn comment(&mut self, comment: &str) {
        let (key, value) = match comment.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (comment, None),
        };
        match (key, value) {
            ("sent_id", Some(v)) if !v.is_empty() => self.sent_id = Some(v.to_string()),
            ("text", Some(v)) => self.text = Some(v.to_string()),
            ("newdoc id" | "doc_id", Some(v)) if !v.is_empty() => self.start_doc(v),
            _ => {}
        }
    }

    fn start_doc(&mut self, doc_id: &str) {
        if doc_id != self.doc_id {
            self.doc_id = doc_id.to_string();
            self.ordinal = 0;
        }
    }

    fn flush(&mut self) -> Result<()> {
        if self.tokens.is_empty() {
            // comment-only block
            self.sent_id = None;
            self.text = None;
            return Ok(());
        }
        self.ordinal += 1;
        let sent_id = self
            .sent_id
            .take()
            .unwrap_or_else(|| format!("{}:{}", self.doc_id, self.ordinal));
        let tokens = std::mem::take(&mut self.tokens);
        let n = tokens.len();
        if let Some(bad) = tokens.iter().find(|t| t.head > n) {
            return Err(Error::Structure {
                sentence: sent_id,
                message: format!(
                    "token {} has HEAD {} but the sentence has {} tokens (block at line {})",
                    bad.index, bad.head, n, self.block_start
                ),
            });
        }
        self.sentences.push(Sentence {
            doc_id: self.doc_id.clone(),
            sent_id,
            text: self.text.take(),
            tokens,
        });
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<Sentence>> {
        self.flush()?;
        Ok(self.sentences)
    }
}

fn parse_token_line(line: &str, line_no: usize, expected: usize) -> Result<Option<Token>> {
    let err = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(err(format!(
            "expected 10 tab-separated columns, found {}",
            cols.len()
        )));
    }
    let id = cols[0];
    if let Some((a, b)) = id.split_once('-') {
        if a.parse::<usize>().is_err() || b.parse::<usize>().is_err() {
            return Err(err(format!("malformed multiword token range '{id}'")));
        }
        return Ok(None);
    }
    if let Some((a, b)) = id.split_once('.') {
        if a.parse::<usize>().is_err() || b.parse::<usize>().is_err() {
            return Err(err(format!("malformed empty node id '{id}'")));
        }
        return Ok(None);
    }
    let index: usize = id
        .parse()
        .map_err(|_| err(format!("token id '{id}' is not an integer")))?;
    if index != expected {
        return Err(err(format!("expected token id {expected}, found {index}")));
    }
    let form = cols[1];
    let upos = cols[3];
    if form.is_empty() {
        return Err(err("empty FORM".to_string()));
    }
    if upos.is_empty() || upos == EMPTY {
        return Err(err("missing UPOS".to_string()));
    }
    let head: usize = cols[6]
        .parse()
        .map_err(|_| err(format!("HEAD '{}' is not an integer", cols[6])))?;
    Ok(Some(Token {
        index,
        form: form.to_string(),
        lemma: cols[2].to_string(),
        upos: upos.to_string(),
        xpos: cols[4].to_string(),
        feats: parse_feats(cols[5]).map_err(err)?,
        head,
        deprel: cols[7].to_string(),
        deps: cols[8].to_string(),
        misc: cols[9].to_string(),
    }))
}

fn parse_feats(column: &str) -> std::result::Result<Features, String> {
    if column == EMPTY || column.is_empty() {
        return Ok(Features::new());
    }
    column
        .split('|')
        .map(|pair| match pair.split_once('=') {
            Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
            _ => Err(format!("malformed feature '{pair}'")),
        })
        .collect()
}
