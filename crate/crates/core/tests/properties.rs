mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use ukrnp_core::{
    build_tree, extract_sentence, filter_spans, is_potential_head, match_full, match_partial,
    merge_spans, metrics, parse_conllu_str, score, write_conllu, ConfusionCounts, DependencyTree,
    EntityCategory, EntitySpan, ExtractionConfig, MatchMode, NerConfig, NounPhrase, SpanSource,
};

fn descendants_or_self(tree: &DependencyTree, node: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        seen.insert(n);
        stack.extend_from_slice(tree.children(n));
    }
    seen
}

fn arb_entity_spans(len: usize) -> impl Strategy<Value = Vec<EntitySpan>> {
    proptest::collection::vec((1..=len, 0..3usize), 0..4).prop_map(move |raw| {
        raw.into_iter()
            .map(|(start, extra)| EntitySpan {
                doc_id: "r".into(),
                sentence_id: "r:1".into(),
                start,
                end: (start + extra).min(len),
                category: EntityCategory::Person,
                confidence: 1.0,
                source: SpanSource::Gazetteer,
            })
            .collect()
    })
}

fn tree_and_spans() -> impl Strategy<Value = (DependencyTree, Vec<EntitySpan>)> {
    arb_tree(12).prop_flat_map(|tree| {
        let n = tree.len();
        (Just(tree), arb_entity_spans(n))
    })
}

fn covered(phrases: &[NounPhrase]) -> BTreeSet<usize> {
    phrases.iter().flat_map(|p| p.members()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn conllu_round_trip(
        tree in arb_tree(10),
        lemmas in proptest::collection::vec("[а-яіїєґa-z0-9'.-]{1,8}", 10),
        misc in proptest::collection::vec(prop_oneof![Just("_".to_string()), Just("SpaceAfter=No".to_string())], 10),
    ) {
        let mut sentence = tree.sentence().clone();
        for (t, (l, m)) in sentence.tokens.iter_mut().zip(lemmas.iter().zip(&misc)) {
            t.lemma = l.clone();
            t.misc = m.clone();
        }
        let mut buf = Vec::new();
        write_conllu(&mut buf, std::slice::from_ref(&sentence)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = parse_conllu_str(&text).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(&back[0].tokens, &sentence.tokens);
        prop_assert_eq!(&back[0].sent_id, &sentence.sent_id);
    }

    #[test]
    fn child_lists_partition_non_root_tokens(tree in arb_tree(15)) {
        let mut seen = vec![0usize; tree.len() + 1];
        for i in 1..=tree.len() {
            for &c in tree.children(i) {
                prop_assert_eq!(tree.token(c).head, i);
                seen[c] += 1;
            }
        }
        for (i, &count) in seen.iter().enumerate().skip(1) {
            prop_assert_eq!(count, usize::from(i != tree.root()));
        }
    }

    #[test]
    fn a_cycle_yields_exactly_one_error(tree in arb_tree(8)) {
        prop_assume!(tree.len() >= 2);
        let mut sentence = tree.sentence().clone();
        let root = tree.root();
        let child = tree.children(root).first().copied();
        prop_assume!(child.is_some());
        sentence.tokens[root - 1].head = child.unwrap();
        prop_assert!(build_tree(sentence).is_err());
    }

    #[test]
    fn groups_are_subtree_intervals(tree in arb_tree(12), nested in any::<bool>(), trim in any::<bool>()) {
        let cfg = ExtractionConfig { emit_nested: nested, trim_boundary_punct: trim, ..ExtractionConfig::default() };
        for p in extract_sentence(&tree, &cfg) {
            prop_assert!(p.start <= p.head && p.head <= p.end);
            let subtree = descendants_or_self(&tree, p.head);
            for i in p.members() {
                prop_assert!(subtree.contains(&i), "token {} outside the subtree of {}", i, p.head);
            }
            prop_assert!(is_potential_head(tree.token(p.head), &cfg));
            if trim {
                prop_assert_ne!(tree.token(p.start).upos.as_str(), "PUNCT");
                prop_assert_ne!(tree.token(p.end).upos.as_str(), "PUNCT");
            }
        }
    }

    #[test]
    fn maximal_groups_do_not_overlap(tree in arb_tree(12)) {
        let groups = extract_sentence(&tree, &ExtractionConfig::default());
        for (i, a) in groups.iter().enumerate() {
            for b in &groups[i + 1..] {
                prop_assert!(!a.overlaps(b), "{:?} overlaps {:?}", a, b);
            }
        }
    }

    #[test]
    fn extraction_is_deterministic(tree in arb_tree(12)) {
        let cfg = ExtractionConfig::default();
        let rebuilt = build_tree(tree.sentence().clone()).unwrap();
        prop_assert_eq!(extract_sentence(&tree, &cfg), extract_sentence(&rebuilt, &cfg));
    }

    #[test]
    fn every_potential_head_is_covered(tree in arb_tree(12)) {
        let cfg = ExtractionConfig::default();
        let groups = extract_sentence(&tree, &cfg);
        let members = covered(&groups);
        for i in 1..=tree.len() {
            if is_potential_head(tree.token(i), &cfg) {
                prop_assert!(members.contains(&i), "head {} dropped", i);
            }
        }
    }

    #[test]
    fn removing_a_member_label_never_enlarges_groups(tree in arb_tree(12), pick in any::<prop::sample::Index>()) {
        let full = ExtractionConfig::default();
        let removable: Vec<String> = full.member_pos.difference(&full.head_pos).cloned().collect();
        let mut reduced = full.clone();
        reduced.member_pos.remove(&removable[pick.index(removable.len())]);
        let before = extract_sentence(&tree, &full);
        for g in extract_sentence(&tree, &reduced) {
            prop_assert!(
                before.iter().any(|b| b.start <= g.start && g.end <= b.end),
                "{:?} not inside any group of {:?}", g, before
            );
        }
    }

    #[test]
    fn merge_with_no_spans_is_identity(tree in arb_tree(12)) {
        let cfg = ExtractionConfig::default();
        let groups = extract_sentence(&tree, &cfg);
        prop_assert_eq!(merge_spans(&groups, &[], &[tree.sentence().clone()], &cfg), groups);
    }

    #[test]
    fn merge_is_idempotent_and_never_drops_tokens((tree, spans) in tree_and_spans()) {
        let cfg = ExtractionConfig::default();
        let sentences = [tree.sentence().clone()];
        let groups = extract_sentence(&tree, &cfg);
        let once = merge_spans(&groups, &spans, &sentences, &cfg);
        let twice = merge_spans(&once, &spans, &sentences, &cfg);
        prop_assert_eq!(&twice, &once);

        let out = covered(&once);
        prop_assert!(covered(&groups).is_subset(&out));
        for s in &spans {
            prop_assert!((s.start..=s.end).all(|i| out.contains(&i)));
        }
        for (i, a) in once.iter().enumerate() {
            prop_assert!(a.start <= a.head && a.head <= a.end);
            for b in &once[i + 1..] {
                prop_assert!(!a.overlaps(b));
            }
        }
    }

    #[test]
    fn threshold_filter_is_inclusive(confs in proptest::collection::vec(0u32..=100, 0..12), t in 0u32..=100) {
        let spans: Vec<EntitySpan> = confs.iter().map(|&c| EntitySpan {
            doc_id: "d".into(), sentence_id: "s".into(), start: 1, end: 1,
            category: EntityCategory::Misc, confidence: f64::from(c) / 100.0, source: SpanSource::External,
        }).collect();
        let threshold = f64::from(t) / 100.0;
        let cfg = NerConfig { confidence_threshold: threshold, ..NerConfig::default() };
        let kept = filter_spans(spans.clone(), &cfg);
        let expected: Vec<EntitySpan> = spans.into_iter().filter(|s| s.confidence >= threshold).collect();
        prop_assert_eq!(kept, expected);
    }

    #[test]
    fn counting_identities_and_metric_bounds(
        preds in arb_spans(8, 2, 6),
        golds in arb_spans(8, 2, 6),
    ) {
        for mode in MatchMode::ALL {
            let c = score(&preds, &golds, mode);
            prop_assert_eq!(c.tp + c.fp, preds.len());
            prop_assert_eq!(c.tp + c.fn_, golds.len());
            let m = metrics(&c);
            for v in [m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert_eq!(m.f1 == 0.0, c.tp == 0);
        }
    }

    #[test]
    fn full_mode_is_a_maximum_matching(
        preds in arb_spans(8, 2, 5),
        golds in arb_spans(8, 2, 5),
    ) {
        let c = score(&preds, &golds, MatchMode::Full);
        prop_assert_eq!(c.tp, max_matching(&preds, &golds, match_full));
    }

    #[test]
    fn partial_mode_never_beats_the_optimum(
        preds in arb_spans(8, 2, 6),
        golds in arb_disjoint_spans(8, 2, 6),
    ) {
        let greedy = score(&preds, &golds, MatchMode::Partial).tp;
        let best = max_matching(&preds, &golds, match_partial);
        prop_assert!(greedy <= best);
        if greedy < best {
            eprintln!("partial greedy gap: greedy {greedy}, optimum {best}, preds {preds:?}, golds {golds:?}");
        }
    }

    #[test]
    fn prediction_order_does_not_matter(
        (preds, shuffled) in arb_spans(8, 2, 6).prop_flat_map(|p| (Just(p.clone()), Just(p).prop_shuffle())),
        golds in arb_disjoint_spans(8, 2, 6),
    ) {
        for mode in MatchMode::ALL {
            prop_assert_eq!(score(&preds, &golds, mode), score(&shuffled, &golds, mode));
        }
    }

    #[test]
    fn partial_dominates_full(preds in arb_spans(8, 2, 6), golds in arb_disjoint_spans(8, 2, 6)) {
        let full = score(&preds, &golds, MatchMode::Full);
        let partial = score(&preds, &golds, MatchMode::Partial);
        prop_assert!(partial.tp >= full.tp);
        prop_assert!(metrics(&partial).f1 >= metrics(&full).f1);
    }

    #[test]
    fn full_match_implies_partial(a in arb_spans(1, 1, 6), b in arb_spans(1, 1, 6)) {
        if let (Some(a), Some(b)) = (a.first(), b.first()) {
            prop_assert!(!match_full(a, b) || match_partial(a, b));
        }
    }
}

#[test]
fn zero_counts_give_zero_metrics() {
    let m = metrics(&ConfusionCounts::new(0, 0, 0));
    assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
}
