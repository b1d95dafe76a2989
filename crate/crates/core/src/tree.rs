//! Dependency trees with ordered child access.

use crate::conllu::{Sentence, Token};
use crate::error::{Error, Result};

/// A sentence together with its rooted basic dependency tree.
///
/// Child lists are sorted by text position, so the children to the left of a
/// token can be walked nearest-first by iterating the left part in reverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyTree {
    sentence: Sentence,
    root: usize,
    // indexed by token index; slot 0 is unused
    children: Vec<Vec<usize>>,
}

impl DependencyTree {
    pub fn sentence(&self) -> &Sentence {
        &self.sentence
    }

    pub fn into_sentence(self) -> Sentence {
        self.sentence
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.sentence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentence.is_empty()
    }

    /// Token by 1-based index. Panics if out of range.
    pub fn token(&self, index: usize) -> &Token {
        &self.sentence.tokens[index - 1]
    }

    pub fn children(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    /// Children positioned before `index`, nearest first.
    pub fn left_children(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let kids = self.children(index);
        let split = kids.partition_point(|&c| c < index);
        kids[..split].iter().rev().copied()
    }

    /// Children positioned after `index`, nearest first.
    pub fn right_children(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let kids = self.children(index);
        let split = kids.partition_point(|&c| c < index);
        kids[split..].iter().copied()
    }

    /// Token indices in in-order: left subtrees, the node, right subtrees.
    pub fn in_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![(self.root, false)];
        while let Some((node, expanded)) = stack.pop() {
            if expanded {
                out.push(node);
                continue;
            }
            let kids = self.children(node);
            let split = kids.partition_point(|&c| c < node);
            for &c in kids[split..].iter().rev() {
                stack.push((c, false));
            }
            stack.push((node, true));
            for &c in kids[..split].iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }
}

/// Build the dependency tree of a sentence.
///
/// Fails with a structural error when the sentence has no root, several
/// roots, or a cycle; no partial tree is ever returned.
pub fn build_tree(sentence: Sentence) -> Result<DependencyTree> {
    let n = sentence.len();
    let structural = |message: String| Error::Structure {
        sentence: sentence.sent_id.clone(),
        message,
    };
    if n == 0 {
        return Err(structural("sentence has no tokens".to_string()));
    }
    let roots: Vec<usize> = sentence
        .tokens
        .iter()
        .filter(|t| t.head == 0)
        .map(|t| t.index)
        .collect();
    let root = match roots.as_slice() {
        [r] => *r,
        [] => return Err(structural("no token has HEAD 0".to_string())),
        many => return Err(structural(format!("multiple roots: {many:?}"))),
    };

    let mut children = vec![Vec::new(); n + 1];
    for token in &sentence.tokens {
        if token.head > n {
            return Err(structural(format!(
                "token {} has HEAD {} outside the sentence",
                token.index, token.head
            )));
        }
        if token.head != 0 {
            children[token.head].push(token.index);
        }
    }
    // tokens are visited in index order, so each list is already sorted

    // With exactly one root and every other token having one head, the
    // graph is a tree iff every token is reachable from the root.
    let mut seen = vec![false; n + 1];
    let mut stack = vec![root];
    let mut reached = 0;
    while let Some(node) = stack.pop() {
        if std::mem::replace(&mut seen[node], true) {
            continue;
        }
        reached += 1;
        stack.extend(children[node].iter().copied());
    }
    if reached != n {
        let stray: Vec<usize> = (1..=n).filter(|&i| !seen[i]).collect();
        return Err(structural(format!("cycle through tokens {stray:?}")));
    }

    Ok(DependencyTree {
        sentence,
        root,
        children,
    })
}

/// Build trees for every sentence, skipping (and logging) malformed ones.
///
/// Returns the trees in input order together with the errors of the skipped
/// sentences.
pub fn build_trees_lenient(sentences: Vec<Sentence>) -> (Vec<DependencyTree>, Vec<Error>) {
    let mut trees = Vec::with_capacity(sentences.len());
    let mut skipped = Vec::new();
    for sentence in sentences {
        match build_tree(sentence) {
            Ok(tree) => trees.push(tree),
            Err(e) => {
                log::warn!("skipping malformed sentence: {e}");
                skipped.push(e);
            }
        }
    }
    (trees, skipped)
}
