#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use proptest::prelude::*;
use ukrnp_core::{
    build_tree, load_external_spans, load_gazetteer_dir, read_conllu_file, read_gold_file, Corpus,
    DependencyTree, EntitySpan, Gazetteer, Sentence, Span, Token,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn corpus() -> Corpus {
    Corpus::new(read_conllu_file(fixture("corpus.conllu")).expect("fixture corpus parses"))
}

pub fn gold() -> Vec<Span> {
    read_gold_file(fixture("gold.tsv")).expect("fixture gold parses")
}

pub fn gazetteer() -> Gazetteer {
    load_gazetteer_dir(fixture("gazetteer")).expect("fixture gazetteer loads")
}

pub fn external_spans() -> Vec<EntitySpan> {
    load_external_spans(fixture("ner_spans.tsv")).expect("fixture spans load")
}

pub fn tree_by_id<'a>(corpus: &'a Corpus, sent_id: &str) -> &'a DependencyTree {
    corpus
        .trees()
        .iter()
        .find(|t| t.sentence().sent_id == sent_id)
        .unwrap_or_else(|| panic!("no tree for {sent_id}"))
}

/// Maximum bipartite matching by exhaustive search over gold subsets
/// (memoized on prediction index and used-gold mask).
pub fn max_matching(
    preds: &[Span],
    golds: &[Span],
    matches: impl Fn(&Span, &Span) -> bool,
) -> usize {
    assert!(golds.len() <= 16);
    fn go(
        i: usize,
        used: u32,
        preds: &[Span],
        golds: &[Span],
        matches: &dyn Fn(&Span, &Span) -> bool,
        memo: &mut HashMap<(usize, u32), usize>,
    ) -> usize {
        if i == preds.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, used)) {
            return v;
        }
        let mut best = go(i + 1, used, preds, golds, matches, memo);
        for (j, g) in golds.iter().enumerate() {
            if used & (1 << j) == 0 && matches(&preds[i], g) {
                best = best.max(1 + go(i + 1, used | (1 << j), preds, golds, matches, memo));
            }
        }
        memo.insert((i, used), best);
        best
    }
    go(0, 0, preds, golds, &matches, &mut HashMap::new())
}

const UPOS: &[&str] = &[
    "NOUN", "PROPN", "PRON", "X", "ADJ", "ADP", "ADV", "DET", "NUM", "AUX", "VERB", "PUNCT",
    "CCONJ", "SCONJ", "PART",
];
const DEPRELS: &[&str] = &[
    "nmod",
    "flat",
    "flat:name",
    "flat:title",
    "amod",
    "case",
    "det",
    "conj",
    "cc",
    "compound",
    "fixed",
    "obj",
    "nsubj",
    "punct",
    "acl",
    "nummod",
];

#[derive(Debug, Clone)]
pub struct TokenSpec {
    pub upos: usize,
    pub deprel: usize,
    pub infinitive: bool,
    pub foreign: bool,
}

/// A random dependency tree: tokens are attached one by one, in a random
/// order, to a token attached earlier. The trees need not be projective.
pub fn arb_tree(max_len: usize) -> impl Strategy<Value = DependencyTree> {
    (1..=max_len)
        .prop_flat_map(|n| {
            let specs = proptest::collection::vec(
                (
                    0..UPOS.len(),
                    0..DEPRELS.len(),
                    any::<bool>(),
                    any::<bool>(),
                )
                    .prop_map(|(upos, deprel, infinitive, foreign)| TokenSpec {
                        upos,
                        deprel,
                        infinitive,
                        foreign,
                    }),
                n,
            );
            let order = Just((1..=n).collect::<Vec<usize>>()).prop_shuffle();
            let picks = proptest::collection::vec(any::<prop::sample::Index>(), n);
            (specs, order, picks)
        })
        .prop_map(|(specs, order, picks)| {
            let n = specs.len();
            let mut heads = vec![0; n + 1];
            for k in 1..n {
                heads[order[k]] = order[picks[k].index(k)];
            }
            let tokens = (1..=n)
                .map(|i| {
                    let spec = &specs[i - 1];
                    let upos = UPOS[spec.upos];
                    let deprel = if heads[i] == 0 {
                        "root"
                    } else {
                        DEPRELS[spec.deprel]
                    };
                    let mut t = Token::new(i, &format!("w{i}"), upos, heads[i], deprel);
                    if upos == "VERB" {
                        t = t.with_feat("VerbForm", if spec.infinitive { "Inf" } else { "Fin" });
                    }
                    if upos == "X" && spec.foreign {
                        t = t.with_feat("Foreign", "Yes");
                    }
                    t
                })
                .collect();
            build_tree(Sentence {
                doc_id: "r".into(),
                sent_id: "r:1".into(),
                text: None,
                tokens,
            })
            .expect("generated trees are well-formed")
        })
}

/// Spans over sentences `s1`..`s{sentences}` with tokens `1..=len`.
pub fn arb_spans(max: usize, sentences: usize, len: usize) -> impl Strategy<Value = Vec<Span>> {
    proptest::collection::vec((1..=sentences, 1..=len, 0..len), 0..=max).prop_map(move |raw| {
        raw.into_iter()
            .map(|(s, start, extra)| {
                let end = (start + extra).min(len);
                Span::new("d", &format!("s{s}"), start, end)
            })
            .collect()
    })
}

/// Pairwise non-overlapping spans per sentence, as gold annotations are.
pub fn arb_disjoint_spans(
    max: usize,
    sentences: usize,
    len: usize,
) -> impl Strategy<Value = Vec<Span>> {
    arb_spans(max, sentences, len).prop_map(|spans| {
        let mut kept: Vec<Span> = Vec::new();
        for s in spans {
            let clash = kept
                .iter()
                .any(|k| k.sentence_id == s.sentence_id && k.start <= s.end && s.start <= k.end);
            if !clash {
                kept.push(s);
            }
        }
        kept
    })
}
