//! Noun phrase extraction by walking dependency trees.
//!
//! Every potential head grows a group from its children: left children are
//! tried from the nearest one outward, then right children likewise. A child
//! is absorbed together with its own group, grown by the same rules, when it
//! is an admissible member and its group touches the current span. The first
//! rejection on a side ends absorption on that side; later children there are
//! left to form groups of their own.
//!
//! Number and gender agreement between head and dependents is not checked.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::conllu::Token;
use crate::error::{Error, Result};
use crate::tree::DependencyTree;

pub const PUNCT: &str = "PUNCT";
const FOREIGN_X: &str = "X";

/// Relations that never attach a nested potential head.
const MWE_RELATIONS: [&str; 2] = ["fixed", "compound"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// POS labels that may head a group.
    pub head_pos: BTreeSet<String>,
    /// `X` heads a group only when marked `Foreign=Yes`.
    pub require_foreign_for_x: bool,
    /// POS labels admissible as group members.
    pub member_pos: BTreeSet<String>,
    /// Relations (universal part) through which a nested potential head joins.
    pub head_attach_relations: BTreeSet<String>,
    /// Also emit the groups of heads absorbed into a larger group.
    pub emit_nested: bool,
    /// Drop punctuation at group boundaries.
    pub trim_boundary_punct: bool,
}

fn labels(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            head_pos: labels(&["NOUN", "PRON", "PROPN", "X"]),
            require_foreign_for_x: true,
            member_pos: labels(&[
                "ADJ", "ADV", "ADP", "DET", "AUX", "NUM", "NOUN", "PROPN", "X", "PRON", "VERB",
                PUNCT,
            ]),
            head_attach_relations: labels(&["flat", "nmod"]),
            emit_nested: false,
            trim_boundary_punct: true,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        let stray: Vec<&str> = self
            .head_pos
            .iter()
            .filter(|p| !self.member_pos.contains(*p) && p.as_str() != FOREIGN_X)
            .map(String::as_str)
            .collect();
        if stray.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "head POS labels missing from the member set: {}",
                stray.join(", ")
            )))
        }
    }
}

/// A contiguous span of tokens `start..=end` with a designated head.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NounPhrase {
    pub doc_id: String,
    pub sentence_id: String,
    pub head: usize,
    pub start: usize,
    pub end: usize,
    /// Set for phrases created from entity spans alone.
    #[serde(default)]
    pub entity_derived: bool,
}

impl NounPhrase {
    pub fn members(&self) -> RangeInclusive<usize> {
        self.start..=self.end
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overlaps(&self, other: &NounPhrase) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

pub fn is_potential_head(token: &Token, cfg: &ExtractionConfig) -> bool {
    cfg.head_pos.contains(&token.upos)
        && (token.upos != FOREIGN_X
            || !cfg.require_foreign_for_x
            || token.has_feat("Foreign", "Yes"))
}

/// Whether `child`, a direct dependent of `head`, is an admissible group member.
///
/// Verbs must be infinitives. A child that could head its own group joins
/// only through one of the configured relations, never through `fixed` or
/// `compound`, and only if none of its own direct dependents is outside the
/// member set.
pub fn may_join(
    child: &Token,
    head: &Token,
    tree: &DependencyTree,
    cfg: &ExtractionConfig,
) -> bool {
    debug_assert_eq!(child.head, head.index);
    if !cfg.member_pos.contains(&child.upos) {
        return false;
    }
    if child.upos == "VERB" && !child.has_feat("VerbForm", "Inf") {
        return false;
    }
    if is_potential_head(child, cfg) {
        let rel = child.base_deprel();
        if MWE_RELATIONS.contains(&rel) || !cfg.head_attach_relations.contains(rel) {
            return false;
        }
        let forbidden_child = tree
            .children(child.index)
            .iter()
            .any(|&c| !cfg.member_pos.contains(&tree.token(c).upos));
        if forbidden_child {
            return false;
        }
    }
    true
}

/// Span each token would cover as the head of its own group, before any
/// boundary trimming. Slot 0 is unused.
fn grown_spans(tree: &DependencyTree, cfg: &ExtractionConfig) -> Vec<(usize, usize)> {
    let n = tree.len();
    let mut spans = vec![(0, 0); n + 1];

    // pre-order, reversed, puts every child before its parent
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![tree.root()];
    while let Some(node) = stack.pop() {
        order.push(node);
        stack.extend_from_slice(tree.children(node));
    }

    for &node in order.iter().rev() {
        let head = tree.token(node);
        let (mut start, mut end) = (node, node);
        for c in tree.left_children(node) {
            let (cs, ce) = spans[c];
            if !may_join(tree.token(c), head, tree, cfg) || ce + 1 != start {
                break;
            }
            start = cs;
        }
        for c in tree.right_children(node) {
            let (cs, ce) = spans[c];
            if !may_join(tree.token(c), head, tree, cfg) || cs != end + 1 {
                break;
            }
            end = ce;
        }
        spans[node] = (start, end);
    }
    spans
}

fn trim(tree: &DependencyTree, (mut start, mut end): (usize, usize)) -> (usize, usize) {
    while start < end && tree.token(start).upos == PUNCT {
        start += 1;
    }
    while end > start && tree.token(end).upos == PUNCT {
        end -= 1;
    }
    (start, end)
}

/// Extract the noun phrases of one sentence, sorted by start index.
pub fn extract_sentence(tree: &DependencyTree, cfg: &ExtractionConfig) -> Vec<NounPhrase> {
    let spans = grown_spans(tree, cfg);
    let heads: Vec<usize> = tree
        .in_order()
        .into_iter()
        .filter(|&i| is_potential_head(tree.token(i), cfg))
        .collect();

    // Groups of different heads are either nested or disjoint, so the
    // maximal ones are those not inside an earlier, wider group.
    let mut candidates: Vec<(usize, usize, usize)> =
        heads.iter().map(|&h| (spans[h].0, spans[h].1, h)).collect();
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));

    let mut kept = Vec::new();
    let mut covered_to = 0;
    for (start, end, head) in candidates {
        let nested = start <= covered_to;
        if nested && !cfg.emit_nested {
            continue;
        }
        covered_to = covered_to.max(end);
        kept.push((start, end, head));
    }

    let sentence = tree.sentence();
    let mut phrases: Vec<NounPhrase> = kept
        .into_iter()
        .map(|(start, end, head)| {
            let (start, end) = if cfg.trim_boundary_punct {
                trim(tree, (start, end))
            } else {
                (start, end)
            };
            NounPhrase {
                doc_id: sentence.doc_id.clone(),
                sentence_id: sentence.sent_id.clone(),
                head,
                start,
                end,
                entity_derived: false,
            }
        })
        .collect();
    phrases.sort_by(|a, b| {
        a.start
            .cmp(&b.start)
            .then(b.end.cmp(&a.end))
            .then(a.head.cmp(&b.head))
    });
    phrases
}

/// Per-sentence extraction over a document, in input order.
pub fn extract_document(trees: &[DependencyTree], cfg: &ExtractionConfig) -> Vec<NounPhrase> {
    trees
        .iter()
        .flat_map(|t| extract_sentence(t, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::Sentence;
    use crate::tree::build_tree;

    fn tree(tokens: Vec<Token>) -> DependencyTree {
        build_tree(Sentence {
            doc_id: "d".into(),
            sent_id: "d:1".into(),
            text: None,
            tokens,
        })
        .unwrap()
    }

    fn spans(phrases: &[NounPhrase]) -> Vec<(usize, usize)> {
        phrases.iter().map(|p| (p.start, p.end)).collect()
    }

    #[test]
    fn potential_heads() {
        let cfg = ExtractionConfig::default();
        assert!(is_potential_head(
            &Token::new(1, "час", "NOUN", 0, "root"),
            &cfg
        ));
        assert!(is_potential_head(
            &Token::new(1, "Facebook", "X", 0, "root").with_feat("Foreign", "Yes"),
            &cfg
        ));
        assert!(!is_potential_head(
            &Token::new(1, "новий", "ADJ", 0, "root"),
            &cfg
        ));
        assert!(!is_potential_head(
            &Token::new(1, "abc", "X", 0, "root"),
            &cfg
        ));

        let lax = ExtractionConfig {
            require_foreign_for_x: false,
            ..ExtractionConfig::default()
        };
        assert!(is_potential_head(
            &Token::new(1, "abc", "X", 0, "root"),
            &lax
        ));
    }

    #[test]
    fn flat_proper_noun_joins() {
        let t = tree(vec![
            Token::new(1, "міністр", "NOUN", 0, "root"),
            Token::new(2, "Лілія", "PROPN", 1, "flat:title"),
        ]);
        let cfg = ExtractionConfig::default();
        assert!(may_join(t.token(2), t.token(1), &t, &cfg));
    }

    #[test]
    fn nmod_with_conjunction_child_is_rejected() {
        let t = tree(vec![
            Token::new(1, "освіти", "NOUN", 0, "root"),
            Token::new(2, "і", "CCONJ", 3, "cc"),
            Token::new(3, "науки", "NOUN", 1, "nmod"),
        ]);
        let cfg = ExtractionConfig::default();
        assert!(!may_join(t.token(3), t.token(1), &t, &cfg));
    }

    #[test]
    fn finite_verb_is_rejected_infinitive_joins() {
        let cfg = ExtractionConfig::default();
        let t = tree(vec![
            Token::new(1, "бажання", "NOUN", 0, "root"),
            Token::new(2, "вчитися", "VERB", 1, "acl"),
        ]);
        assert!(!may_join(t.token(2), t.token(1), &t, &cfg));
        let t = tree(vec![
            Token::new(1, "бажання", "NOUN", 0, "root"),
            Token::new(2, "вчитися", "VERB", 1, "acl").with_feat("VerbForm", "Inf"),
        ]);
        assert!(may_join(t.token(2), t.token(1), &t, &cfg));
    }

    #[test]
    fn compound_and_fixed_never_attach_a_head() {
        let mut cfg = ExtractionConfig::default();
        cfg.head_attach_relations.insert("compound".into());
        cfg.head_attach_relations.insert("fixed".into());
        for rel in ["compound", "fixed"] {
            let t = tree(vec![
                Token::new(1, "кілометр", "NOUN", 0, "root"),
                Token::new(2, "тест", "NOUN", 1, rel),
            ]);
            assert!(!may_join(t.token(2), t.token(1), &t, &cfg), "{rel}");
        }
    }

    #[test]
    fn non_head_members_ignore_relation() {
        // a numeral attached through compound is still a plain member
        let t = tree(vec![
            Token::new(1, "п'ятдесят", "NUM", 3, "nummod"),
            Token::new(2, "один", "NUM", 1, "compound"),
            Token::new(3, "кілометр", "NOUN", 0, "root"),
        ]);
        let found = extract_sentence(&t, &ExtractionConfig::default());
        assert_eq!(spans(&found), [(1, 3)]);
        assert_eq!(found[0].head, 3);
    }

    #[test]
    fn infinitive_group() {
        let t = tree(vec![
            Token::new(1, "бажання", "NOUN", 0, "root"),
            Token::new(2, "вчитися", "VERB", 1, "xcomp").with_feat("VerbForm", "Inf"),
        ]);
        let found = extract_sentence(&t, &ExtractionConfig::default());
        assert_eq!(spans(&found), [(1, 2)]);
        assert_eq!(found[0].head, 1);
    }

    #[test]
    fn lone_verb_has_no_group() {
        let t = tree(vec![Token::new(1, "іди", "VERB", 0, "root")]);
        assert!(extract_sentence(&t, &ExtractionConfig::default()).is_empty());
    }

    #[test]
    fn rejection_stops_the_side_and_frees_the_rest() {
        // мама(1) і(2) тато(3): тато joins мама through conj -> rejected,
        // so it heads its own group; "і" sits between and blocks contiguity
        let t = tree(vec![
            Token::new(1, "мама", "NOUN", 0, "root"),
            Token::new(2, "і", "CCONJ", 3, "cc"),
            Token::new(3, "тато", "NOUN", 1, "conj"),
        ]);
        let found = extract_sentence(&t, &ExtractionConfig::default());
        assert_eq!(spans(&found), [(1, 1), (3, 3)]);
    }

    #[test]
    fn gap_blocks_absorption() {
        // червоний(1) дуже(2) колір(3) where the particle hangs off the verb
        let t = tree(vec![
            Token::new(1, "червоний", "ADJ", 3, "amod"),
            Token::new(2, "дуже", "PART", 4, "advmod"),
            Token::new(3, "колір", "NOUN", 4, "nsubj"),
            Token::new(4, "є", "VERB", 0, "root"),
        ]);
        let found = extract_sentence(&t, &ExtractionConfig::default());
        assert_eq!(spans(&found), [(3, 3)]);
    }

    #[test]
    fn boundary_punct_is_trimmed() {
        let t = tree(vec![
            Token::new(1, "«", "PUNCT", 2, "punct"),
            Token::new(2, "Нафтогаз", "PROPN", 0, "root"),
            Token::new(3, "»", "PUNCT", 2, "punct"),
        ]);
        let found = extract_sentence(&t, &ExtractionConfig::default());
        assert_eq!(spans(&found), [(2, 2)]);

        let keep = ExtractionConfig {
            trim_boundary_punct: false,
            ..ExtractionConfig::default()
        };
        assert_eq!(spans(&extract_sentence(&t, &keep)), [(1, 3)]);
    }

    #[test]
    fn nested_emission() {
        // посаду голови правління: three nested nmod heads
        let t = tree(vec![
            Token::new(1, "посаду", "NOUN", 0, "root"),
            Token::new(2, "голови", "NOUN", 1, "nmod"),
            Token::new(3, "правління", "NOUN", 2, "nmod"),
        ]);
        let flat = extract_sentence(&t, &ExtractionConfig::default());
        assert_eq!(spans(&flat), [(1, 3)]);
        let nested = ExtractionConfig {
            emit_nested: true,
            ..ExtractionConfig::default()
        };
        assert_eq!(
            spans(&extract_sentence(&t, &nested)),
            [(1, 3), (2, 3), (3, 3)]
        );
    }

    #[test]
    fn config_validation() {
        assert!(ExtractionConfig::default().validate().is_ok());
        let mut cfg = ExtractionConfig::default();
        cfg.member_pos.remove("X");
        assert!(cfg.validate().is_ok());
        cfg.member_pos.remove("PRON");
        assert!(cfg.validate().is_err());
    }
}
