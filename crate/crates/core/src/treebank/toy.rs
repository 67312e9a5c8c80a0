//! Synthetic diagnostic corpora.
//!
//! Two label rules over randomly grown binary trees:
//!
//! * **tag majority** — partition the tag alphabet into `num_classes` equal
//!   buckets; the label is the bucket that wins a strict majority over the
//!   buckets of *left-child tags of inner nodes*.  Ties are discarded.
//!   Because tags are drawn independently of the tree shape and the words,
//!   and the bucket partition is symmetric, the label carries no information
//!   a tag-blind model can reach: wordbags and shape statistics are
//!   independent of it by construction.
//! * **word majority** — same construction over the bucket of each leaf
//!   word.  Tags are irrelevant to this rule, which makes it the control:
//!   tag-blind models can solve it.
//!
//! Sampling fills exact per-class quotas (rejection on ties and on filled
//! classes), so every corpus is class-balanced, then splits 8/1/1 into
//! train/dev/test stratified by class.

use super::sexpr::{RawKind, RawTree};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("invalid toy spec: {0}")]
    InvalidSpec(String),
    #[error(
        "could not fill class quotas after {attempts} attempts; \
         the rule appears degenerate for this configuration"
    )]
    Degenerate { attempts: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToyRule {
    TagMajority,
    WordMajority,
}

impl ToyRule {
    pub fn parse(s: &str) -> Option<ToyRule> {
        match s.to_ascii_lowercase().as_str() {
            "tag" => Some(ToyRule::TagMajority),
            "word" => Some(ToyRule::WordMajority),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ToyRule::TagMajority => "tag",
            ToyRule::WordMajority => "word",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ToySpec {
    pub rule: ToyRule,
    /// Total number of examples across all splits.
    pub size: usize,
    pub num_tags: usize,
    pub num_words: usize,
    /// Tree depth in edges, drawn uniformly from `depth_min..=depth_max`.
    pub depth_min: usize,
    pub depth_max: usize,
    pub num_classes: usize,
}

impl ToySpec {
    pub fn tag_alphabet(&self) -> Vec<String> {
        (0..self.num_tags).map(|i| format!("T{i}")).collect()
    }

    pub fn word_alphabet(&self) -> Vec<String> {
        (0..self.num_words).map(|i| format!("w{i}")).collect()
    }

    fn validate(&self) -> Result<(), ToyError> {
        let bad = |m: String| Err(ToyError::InvalidSpec(m));
        if self.num_classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.num_classes));
        }
        if self.depth_min < 1 {
            return bad("depth_min must be at least 1 (a lone leaf has no composition)".into());
        }
        if self.depth_max < self.depth_min {
            return bad(format!(
                "depth range {}..={} is empty",
                self.depth_min, self.depth_max
            ));
        }
        if self.size < 10 * self.num_classes {
            return bad(format!(
                "size {} is too small for {} classes with 8/1/1 splits",
                self.size, self.num_classes
            ));
        }
        if self.num_words == 0 {
            return bad("need at least one word".into());
        }
        if self.num_tags == 0 {
            return bad("need at least one tag".into());
        }
        let (alphabet, kind) = match self.rule {
            ToyRule::TagMajority => (self.num_tags, "tags"),
            ToyRule::WordMajority => (self.num_words, "words"),
        };
        if alphabet % self.num_classes != 0 {
            return bad(format!(
                "{kind} ({alphabet}) must divide evenly into {} class buckets \
                 so the rule is symmetric",
                self.num_classes
            ));
        }
        Ok(())
    }

    /// The class bucket of one alphabet index.
    fn bucket(&self, idx: usize, alphabet: usize) -> usize {
        idx * self.num_classes / alphabet
    }

    /// Applies the labeling rule.  `None` means the example is rejected
    /// (no strict majority).
    pub fn label_of(&self, tree: &RawTree) -> Option<usize> {
        let index: HashMap<String, usize> = match self.rule {
            ToyRule::TagMajority => self.tag_alphabet(),
            ToyRule::WordMajority => self.word_alphabet(),
        }
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
        let alphabet = index.len();

        let mut counts = vec![0usize; self.num_classes];
        let mut count = |token: &str| {
            let idx = *index
                .get(token)
                .unwrap_or_else(|| panic!("toy rule: token {token:?} is not in the alphabet"));
            counts[self.bucket(idx, alphabet)] += 1;
        };
        match self.rule {
            ToyRule::TagMajority => visit(tree, &mut |t| {
                if let RawKind::Children(cs) = &t.kind {
                    count(&cs[0].tag);
                }
            }),
            ToyRule::WordMajority => visit(tree, &mut |t| {
                if let RawKind::Word(w) = &t.kind {
                    count(w);
                }
            }),
        }

        let best = *counts.iter().max().unwrap();
        let winners: Vec<usize> = (0..self.num_classes)
            .filter(|&c| counts[c] == best)
            .collect();
        match winners.as_slice() {
            [one] if best > 0 => Some(*one),
            _ => None,
        }
    }
}

fn visit(t: &RawTree, f: &mut impl FnMut(&RawTree)) {
    f(t);
    if let RawKind::Children(cs) = &t.kind {
        for c in cs {
            visit(c, f);
        }
    }
}

/// Stratified 8/1/1 split of one generation run.
#[derive(Clone, Debug)]
pub struct ToyData {
    pub train: Vec<RawTree>,
    pub dev: Vec<RawTree>,
    pub test: Vec<RawTree>,
}

pub fn gen_toy_corpus(spec: &ToySpec, seed: u64) -> Result<ToyData, ToyError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tags = spec.tag_alphabet();
    let words = spec.word_alphabet();

    // Exact per-class quotas; remainder goes to the low classes.
    let base = spec.size / spec.num_classes;
    let extra = spec.size % spec.num_classes;
    let mut remaining: Vec<usize> = (0..spec.num_classes)
        .map(|c| base + usize::from(c < extra))
        .collect();
    let mut by_class: Vec<Vec<RawTree>> = vec![Vec::new(); spec.num_classes];

    let max_attempts = 200 * spec.size + 1000;
    let mut attempts = 0;
    while remaining.iter().any(|&r| r > 0) {
        attempts += 1;
        if attempts > max_attempts {
            return Err(ToyError::Degenerate { attempts });
        }
        let depth = rng.random_range(spec.depth_min..=spec.depth_max);
        let mut tree = gen_tree(&mut rng, depth, &tags, &words);
        let Some(label) = spec.label_of(&tree) else {
            continue;
        };
        if remaining[label] == 0 {
            continue;
        }
        remaining[label] -= 1;
        tree.label = Some(label);
        by_class[label].push(tree);
    }

    // Stratified split: per class, 8/10 to train, the rest split between
    // dev and test with the odd example alternating by class so the totals
    // come out exact.
    let mut data = ToyData {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
    };
    for (c, mut items) in by_class.into_iter().enumerate() {
        let n = items.len();
        let n_train = n * 8 / 10;
        let rest = n - n_train;
        let n_dev = rest / 2 + usize::from(rest % 2 == 1 && c % 2 == 0);
        let tail = items.split_off(n_train);
        data.train.extend(items);
        let (dev, test) = {
            let mut tail = tail;
            let test = tail.split_off(n_dev);
            (tail, test)
        };
        data.dev.extend(dev);
        data.test.extend(test);
    }
    data.train.shuffle(&mut rng);
    data.dev.shuffle(&mut rng);
    data.test.shuffle(&mut rng);
    Ok(data)
}

/// Grows a random binary tree of exactly `depth` edges: one child continues
/// the deep path, the other gets a strictly smaller random depth; sides are
/// swapped at random.
fn gen_tree<R: Rng>(rng: &mut R, depth: usize, tags: &[String], words: &[String]) -> RawTree {
    if depth == 0 {
        let tag = &tags[rng.random_range(0..tags.len())];
        let word = &words[rng.random_range(0..words.len())];
        return RawTree::leaf(tag, word);
    }
    let deep = gen_tree(rng, depth - 1, tags, words);
    let other_depth = rng.random_range(0..depth);
    let other = gen_tree(rng, other_depth, tags, words);
    let (left, right) = if rng.random::<bool>() {
        (deep, other)
    } else {
        (other, deep)
    };
    let tag = &tags[rng.random_range(0..tags.len())];
    RawTree::inner(tag, vec![left, right])
}
