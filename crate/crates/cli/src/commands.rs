use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ukrnp_core::{
    evaluate_variants, load_external_spans, load_gazetteer_dir, predict, prediction_records,
    read_conllu_file, read_gold_file, write_predictions, Corpus, EntitySources, EntitySpan,
    Gazetteer, MatchMode, PipelineConfig, Variant, VariantTable,
};

/// Inputs shared by `extract` and `evaluate`.
#[derive(Debug, Clone, Default)]
pub struct CorpusInputs {
    pub conllu: PathBuf,
    pub gazetteer: Option<PathBuf>,
    pub ner: Option<PathBuf>,
}

pub struct LoadedInputs {
    pub corpus: Corpus,
    pub gazetteer: Option<Gazetteer>,
    pub external: Vec<EntitySpan>,
}

impl LoadedInputs {
    pub fn entities(&self) -> EntitySources<'_> {
        EntitySources {
            gazetteer: self.gazetteer.as_ref(),
            external: &self.external,
        }
    }
}

pub fn load_inputs(inputs: &CorpusInputs) -> Result<LoadedInputs> {
    let sentences = read_conllu_file(&inputs.conllu)
        .with_context(|| format!("cannot read corpus {}", inputs.conllu.display()))?;
    let corpus = Corpus::new(sentences);
    for err in corpus.skipped() {
        log::warn!("skipped sentence: {err}");
    }
    let gazetteer = inputs
        .gazetteer
        .as_deref()
        .map(|dir| {
            load_gazetteer_dir(dir)
                .with_context(|| format!("cannot load gazetteer {}", dir.display()))
        })
        .transpose()?;
    let external = match &inputs.ner {
        Some(path) => load_external_spans(path)
            .with_context(|| format!("cannot load entity spans {}", path.display()))?,
        None => Vec::new(),
    };
    Ok(LoadedInputs {
        corpus,
        gazetteer,
        external,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractSummary {
    pub variant: Variant,
    pub documents: usize,
    pub sentences: usize,
    pub groups: usize,
}

/// Without an explicit variant, entity inputs select UD+NER.
pub fn choose_variant(requested: Option<Variant>, inputs: &CorpusInputs) -> Variant {
    requested.unwrap_or(if inputs.gazetteer.is_some() || inputs.ner.is_some() {
        Variant::UdNer
    } else {
        Variant::Ud
    })
}

pub fn run_extract(
    inputs: &CorpusInputs,
    variant: Option<Variant>,
    cfg: &PipelineConfig,
    out: &Path,
) -> Result<ExtractSummary> {
    cfg.validate()?;
    let loaded = load_inputs(inputs)?;
    let variant = choose_variant(variant, inputs);
    let phrases = predict(variant, &loaded.corpus, &loaded.entities(), cfg);
    let records = prediction_records(&phrases, loaded.corpus.sentences());

    let file = File::create(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut writer = BufWriter::new(file);
    write_predictions(&mut writer, &records)
        .and_then(|_| writer.flush())
        .with_context(|| format!("cannot write {}", out.display()))?;

    Ok(ExtractSummary {
        variant,
        documents: loaded.corpus.document_count(),
        sentences: loaded.corpus.sentences().len(),
        groups: records.len(),
    })
}

pub fn run_evaluate(
    inputs: &CorpusInputs,
    gold: &Path,
    cfg: &PipelineConfig,
) -> Result<VariantTable> {
    cfg.validate()?;
    let loaded = load_inputs(inputs)?;
    let gold =
        read_gold_file(gold).with_context(|| format!("cannot read gold {}", gold.display()))?;
    let table = evaluate_variants(&loaded.corpus, &gold, &loaded.entities(), cfg)?;
    Ok(table)
}

pub fn modes_for(mode: Option<MatchMode>) -> Vec<MatchMode> {
    match mode {
        Some(m) => vec![m],
        None => MatchMode::ALL.to_vec(),
    }
}

pub fn check_threshold(threshold: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&threshold) {
        bail!("threshold {threshold} is outside [0, 1]");
    }
    Ok(threshold)
}
