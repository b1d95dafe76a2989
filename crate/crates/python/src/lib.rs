//! Python bindings: `import ukrnp`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use ukrnp_core as core;

fn to_py_err(err: core::Error) -> PyErr {
    match err {
        core::Error::Io { .. } => PyIOError::new_err(err.to_string()),
        core::Error::NotFound(_) => PyKeyError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

#[pyclass(name = "Token", module = "ukrnp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyToken {
    inner: core::Token,
}

#[pymethods]
impl PyToken {
    #[getter]
    fn index(&self) -> usize {
        self.inner.index
    }
    #[getter]
    fn form(&self) -> &str {
        &self.inner.form
    }
    #[getter]
    fn lemma(&self) -> &str {
        &self.inner.lemma
    }
    #[getter]
    fn upos(&self) -> &str {
        &self.inner.upos
    }
    #[getter]
    fn feats(&self) -> BTreeMap<String, String> {
        self.inner.feats.clone()
    }
    #[getter]
    fn head(&self) -> usize {
        self.inner.head
    }
    #[getter]
    fn deprel(&self) -> &str {
        &self.inner.deprel
    }

    fn __repr__(&self) -> String {
        format!(
            "Token({}, {:?}, {}, head={}, {})",
            self.inner.index, self.inner.form, self.inner.upos, self.inner.head, self.inner.deprel
        )
    }
}

#[pyclass(name = "Sentence", module = "ukrnp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySentence {
    inner: core::Sentence,
}

#[pymethods]
impl PySentence {
    #[getter]
    fn doc_id(&self) -> &str {
        &self.inner.doc_id
    }
    #[getter]
    fn sent_id(&self) -> &str {
        &self.inner.sent_id
    }
    #[getter]
    fn text(&self) -> Option<&str> {
        self.inner.text.as_deref()
    }
    #[getter]
    fn tokens(&self) -> Vec<PyToken> {
        self.inner
            .tokens
            .iter()
            .map(|t| PyToken { inner: t.clone() })
            .collect()
    }

    /// Forms of tokens `start..=end` (1-based) joined by spaces.
    fn surface(&self, start: usize, end: usize) -> String {
        self.inner.surface(start, end)
    }

    fn to_conllu(&self) -> String {
        self.inner.to_conllu()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Sentence({:?}, {} tokens)",
            self.inner.sent_id,
            self.inner.len()
        )
    }
}

#[pyclass(name = "NounPhrase", module = "ukrnp", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyNounPhrase {
    inner: core::NounPhrase,
}

#[pymethods]
impl PyNounPhrase {
    #[new]
    #[pyo3(signature = (doc_id, sentence_id, head, start, end, entity_derived = false))]
    fn new(
        doc_id: String,
        sentence_id: String,
        head: usize,
        start: usize,
        end: usize,
        entity_derived: bool,
    ) -> PyResult<Self> {
        if start == 0 || start > end || head < start || head > end {
            return Err(PyValueError::new_err("need 1 <= start <= head <= end"));
        }
        Ok(PyNounPhrase {
            inner: core::NounPhrase {
                doc_id,
                sentence_id,
                head,
                start,
                end,
                entity_derived,
            },
        })
    }

    #[getter]
    fn doc_id(&self) -> &str {
        &self.inner.doc_id
    }
    #[getter]
    fn sentence_id(&self) -> &str {
        &self.inner.sentence_id
    }
    #[getter]
    fn head(&self) -> usize {
        self.inner.head
    }
    #[getter]
    fn start(&self) -> usize {
        self.inner.start
    }
    #[getter]
    fn end(&self) -> usize {
        self.inner.end
    }
    #[getter]
    fn entity_derived(&self) -> bool {
        self.inner.entity_derived
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "NounPhrase({:?}, {}..={}, head={})",
            self.inner.sentence_id, self.inner.start, self.inner.end, self.inner.head
        )
    }
}

#[pyclass(name = "EntitySpan", module = "ukrnp", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEntitySpan {
    inner: core::EntitySpan,
}

#[pymethods]
impl PyEntitySpan {
    #[new]
    #[pyo3(signature = (doc_id, sentence_id, start, end, category, confidence = 1.0))]
    fn new(
        doc_id: String,
        sentence_id: String,
        start: usize,
        end: usize,
        category: &str,
        confidence: f64,
    ) -> PyResult<Self> {
        if start == 0 || start > end {
            return Err(PyValueError::new_err("need 1 <= start <= end"));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(PyValueError::new_err("confidence must lie in [0, 1]"));
        }
        Ok(PyEntitySpan {
            inner: core::EntitySpan {
                doc_id,
                sentence_id,
                start,
                end,
                category: core::EntityCategory::from(category),
                confidence,
                source: core::SpanSource::External,
            },
        })
    }

    #[getter]
    fn doc_id(&self) -> &str {
        &self.inner.doc_id
    }
    #[getter]
    fn sentence_id(&self) -> &str {
        &self.inner.sentence_id
    }
    #[getter]
    fn start(&self) -> usize {
        self.inner.start
    }
    #[getter]
    fn end(&self) -> usize {
        self.inner.end
    }
    #[getter]
    fn category(&self) -> String {
        self.inner.category.to_string()
    }
    #[getter]
    fn confidence(&self) -> f64 {
        self.inner.confidence
    }

    fn __repr__(&self) -> String {
        format!(
            "EntitySpan({:?}, {}..={}, {}, {})",
            self.inner.sentence_id,
            self.inner.start,
            self.inner.end,
            self.inner.category,
            self.inner.confidence
        )
    }
}

#[pyclass(name = "ExtractionConfig", module = "ukrnp", skip_from_py_object)]
#[derive(Clone, Default)]
struct PyExtractionConfig {
    inner: core::ExtractionConfig,
}

#[pymethods]
impl PyExtractionConfig {
    #[new]
    #[pyo3(signature = (emit_nested = false, trim_boundary_punct = true, member_pos = None, head_pos = None))]
    fn new(
        emit_nested: bool,
        trim_boundary_punct: bool,
        member_pos: Option<Vec<String>>,
        head_pos: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let mut inner = core::ExtractionConfig {
            emit_nested,
            trim_boundary_punct,
            ..Default::default()
        };
        if let Some(pos) = member_pos {
            inner.member_pos = pos.into_iter().collect();
        }
        if let Some(pos) = head_pos {
            inner.head_pos = pos.into_iter().collect();
        }
        inner.validate().map_err(to_py_err)?;
        Ok(PyExtractionConfig { inner })
    }

    #[getter]
    fn emit_nested(&self) -> bool {
        self.inner.emit_nested
    }
    #[getter]
    fn trim_boundary_punct(&self) -> bool {
        self.inner.trim_boundary_punct
    }
    #[getter]
    fn member_pos(&self) -> Vec<String> {
        self.inner.member_pos.iter().cloned().collect()
    }
    #[getter]
    fn head_pos(&self) -> Vec<String> {
        self.inner.head_pos.iter().cloned().collect()
    }
}

#[pyclass(name = "Gazetteer", module = "ukrnp")]
#[derive(Default)]
struct PyGazetteer {
    inner: core::Gazetteer,
}

#[pymethods]
impl PyGazetteer {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    /// Load `<category>.txt` lists from a directory.
    #[staticmethod]
    fn load_dir(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyGazetteer {
            inner: core::load_gazetteer_dir(path).map_err(to_py_err)?,
        })
    }

    /// Add an entry; returns False for blanks and duplicates.
    fn insert(&mut self, category: &str, entry: &str) -> bool {
        self.inner
            .insert(core::EntityCategory::from(category), entry)
    }

    fn find(&self, sentence: &PySentence) -> Vec<PyEntitySpan> {
        core::match_gazetteer(&sentence.inner, &self.inner)
            .into_iter()
            .map(|inner| PyEntitySpan { inner })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn config_or_default(config: Option<PyRef<'_, PyExtractionConfig>>) -> core::ExtractionConfig {
    config.map(|c| c.inner.clone()).unwrap_or_default()
}

fn phrases_out(phrases: Vec<core::NounPhrase>) -> Vec<PyNounPhrase> {
    phrases
        .into_iter()
        .map(|inner| PyNounPhrase { inner })
        .collect()
}

/// Parse CoNLL-U text into sentences.
#[pyfunction]
#[pyo3(signature = (text, doc_id = "doc"))]
fn parse_conllu(text: &str, doc_id: &str) -> PyResult<Vec<PySentence>> {
    let sentences = core::parse_conllu_with_doc(text.as_bytes(), doc_id).map_err(to_py_err)?;
    Ok(sentences
        .into_iter()
        .map(|inner| PySentence { inner })
        .collect())
}

#[pyfunction]
fn read_conllu(path: std::path::PathBuf) -> PyResult<Vec<PySentence>> {
    let sentences = core::read_conllu_file(path).map_err(to_py_err)?;
    Ok(sentences
        .into_iter()
        .map(|inner| PySentence { inner })
        .collect())
}

/// Noun phrases of one sentence; raises ValueError if it is not a tree.
#[pyfunction]
#[pyo3(signature = (sentence, config = None))]
fn extract(
    sentence: &PySentence,
    config: Option<PyRef<'_, PyExtractionConfig>>,
) -> PyResult<Vec<PyNounPhrase>> {
    let tree = core::build_tree(sentence.inner.clone()).map_err(to_py_err)?;
    Ok(phrases_out(core::extract_sentence(
        &tree,
        &config_or_default(config),
    )))
}

#[pyfunction]
fn baseline_extract(sentence: &PySentence) -> Vec<PyNounPhrase> {
    phrases_out(core::baseline_extract(&sentence.inner))
}

#[pyfunction]
#[pyo3(signature = (phrases, spans, sentences, config = None))]
fn merge_spans(
    phrases: Vec<PyRef<'_, PyNounPhrase>>,
    spans: Vec<PyRef<'_, PyEntitySpan>>,
    sentences: Vec<PyRef<'_, PySentence>>,
    config: Option<PyRef<'_, PyExtractionConfig>>,
) -> Vec<PyNounPhrase> {
    let phrases: Vec<core::NounPhrase> = phrases.iter().map(|p| p.inner.clone()).collect();
    let spans: Vec<core::EntitySpan> = spans.iter().map(|s| s.inner.clone()).collect();
    let sentences: Vec<core::Sentence> = sentences.iter().map(|s| s.inner.clone()).collect();
    phrases_out(core::merge_spans(
        &phrases,
        &spans,
        &sentences,
        &config_or_default(config),
    ))
}

/// A span argument: a NounPhrase or a `(doc_id, sentence_id, start, end)` tuple.
fn span_of(obj: &Bound<'_, PyAny>) -> PyResult<core::Span> {
    if let Ok(p) = obj.extract::<PyRef<'_, PyNounPhrase>>() {
        return Ok(core::Span::from(&p.inner));
    }
    let (doc, sent, start, end): (String, String, usize, usize) = obj.extract()?;
    Ok(core::Span::new(&doc, &sent, start, end))
}

/// Match counts as a `(tp, fp, fn)` tuple; `mode` is "full" or "partial".
#[pyfunction]
#[pyo3(signature = (preds, golds, mode = "full"))]
fn score(
    preds: Vec<Bound<'_, PyAny>>,
    golds: Vec<Bound<'_, PyAny>>,
    mode: &str,
) -> PyResult<(usize, usize, usize)> {
    let mode: core::MatchMode = mode.parse().map_err(to_py_err)?;
    let preds = preds.iter().map(span_of).collect::<PyResult<Vec<_>>>()?;
    let golds = golds.iter().map(span_of).collect::<PyResult<Vec<_>>>()?;
    let c = core::score(&preds, &golds, mode);
    Ok((c.tp, c.fp, c.fn_))
}

/// `(precision, recall, f1)` from match counts.
#[pyfunction]
fn metrics(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let m = core::metrics(&core::ConfusionCounts::new(tp, fp, fn_));
    (m.precision, m.recall, m.f1)
}

#[pymodule]
fn ukrnp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyToken>()?;
    m.add_class::<PySentence>()?;
    m.add_class::<PyNounPhrase>()?;
    m.add_class::<PyEntitySpan>()?;
    m.add_class::<PyExtractionConfig>()?;
    m.add_class::<PyGazetteer>()?;
    m.add_function(wrap_pyfunction!(parse_conllu, m)?)?;
    m.add_function(wrap_pyfunction!(read_conllu, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_extract, m)?)?;
    m.add_function(wrap_pyfunction!(merge_spans, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    Ok(())
}
