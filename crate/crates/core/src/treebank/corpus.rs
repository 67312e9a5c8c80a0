//! Indexed binary trees and corpus files.
//!
//! After parsing and binarization, trees are indexed against word/tag
//! vocabularies into [`Tree`], which is binary *by construction* — the
//! encoders downstream cannot receive an n-ary node.  Rejecting wider nodes
//! happens here, with file/line context.
//!
//! File formats (one example per line, blank lines skipped):
//!
//! * classify: `(<sexpr>)`
//! * match:    `(<sexpr>)\t(<sexpr>)\t<label>`

use super::sexpr::{parse_sexpr, RawKind, RawTree};
use super::vocab::Vocab;
use super::TreebankError;
use crate::Task;
use std::fmt::Write as _;
use std::path::Path;

/// A binary tree with interned words and tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    pub tag: usize,
    pub label: Option<usize>,
    pub kind: TreeKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeKind {
    Leaf { word: usize },
    Inner { left: Box<Tree>, right: Box<Tree> },
}

impl Tree {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, TreeKind::Leaf { .. })
    }

    pub fn num_leaves(&self) -> usize {
        match &self.kind {
            TreeKind::Leaf { .. } => 1,
            TreeKind::Inner { left, right } => left.num_leaves() + right.num_leaves(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        match &self.kind {
            TreeKind::Leaf { .. } => 1,
            TreeKind::Inner { left, right } => 1 + left.num_nodes() + right.num_nodes(),
        }
    }

    pub fn depth(&self) -> usize {
        match &self.kind {
            TreeKind::Leaf { .. } => 0,
            TreeKind::Inner { left, right } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Number of nodes carrying a label.
    pub fn num_labeled(&self) -> usize {
        let own = usize::from(self.label.is_some());
        match &self.kind {
            TreeKind::Leaf { .. } => own,
            TreeKind::Inner { left, right } => own + left.num_labeled() + right.num_labeled(),
        }
    }

    /// Leaf words rendered through the vocabulary, joined with spaces.
    pub fn sentence(&self, words: &Vocab) -> String {
        let mut out = String::new();
        self.render_sentence(words, &mut out);
        out
    }

    fn render_sentence(&self, words: &Vocab, out: &mut String) {
        match &self.kind {
            TreeKind::Leaf { word } => {
                if !out.is_empty() {
                    out.push(' ');
                }
                let _ = write!(out, "{}", words.get(*word));
            }
            TreeKind::Inner { left, right } => {
                left.render_sentence(words, out);
                right.render_sentence(words, out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Example {
    Single { tree: Tree },
    Pair { first: Tree, second: Tree, label: usize },
}

/// One line of a corpus file, before indexing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawExample {
    Single(RawTree),
    Pair(RawTree, RawTree, usize),
}

/// Indexes a binary raw tree with fixed vocabularies (unknowns map to UNK).
pub fn index_tree(raw: &RawTree, words: &Vocab, tags: &Vocab) -> Result<Tree, String> {
    index_impl(raw, &mut |w| words.lookup(w), &mut |t| tags.lookup(t))
}

/// Indexes a binary raw tree, adding unseen words/tags to the vocabularies.
pub fn index_tree_interning(
    raw: &RawTree,
    words: &mut Vocab,
    tags: &mut Vocab,
) -> Result<Tree, String> {
    // Intern in a first pass (pre-order), then index against the now-fixed
    // vocabularies.
    collect_tokens(raw, words, tags);
    index_impl(raw, &mut |w| words.lookup(w), &mut |t| tags.lookup(t))
}

fn collect_tokens(raw: &RawTree, words: &mut Vocab, tags: &mut Vocab) {
    tags.intern(&raw.tag);
    match &raw.kind {
        RawKind::Word(w) => {
            words.intern(w);
        }
        RawKind::Children(cs) => {
            for c in cs {
                collect_tokens(c, words, tags);
            }
        }
    }
}

fn index_impl(
    raw: &RawTree,
    word_of: &mut dyn FnMut(&str) -> usize,
    tag_of: &mut dyn FnMut(&str) -> usize,
) -> Result<Tree, String> {
    let tag = tag_of(&raw.tag);
    match &raw.kind {
        RawKind::Word(w) => Ok(Tree {
            tag,
            label: raw.label,
            kind: TreeKind::Leaf { word: word_of(w) },
        }),
        RawKind::Children(cs) => {
            if cs.len() != 2 {
                return Err(format!(
                    "node {:?} has {} children; trees must be binarized first",
                    raw.tag,
                    cs.len()
                ));
            }
            let left = index_impl(&cs[0], word_of, tag_of)?;
            let right = index_impl(&cs[1], word_of, tag_of)?;
            Ok(Tree {
                tag,
                label: raw.label,
                kind: TreeKind::Inner {
                    left: Box::new(left),
                    right: Box::new(right),
                },
            })
        }
    }
}

/// Largest label in the raw examples, plus one.  `None` when nothing is
/// labeled.
pub fn derive_num_classes(examples: &[RawExample]) -> Option<usize> {
    fn max_label(t: &RawTree) -> Option<usize> {
        let mut best = t.label;
        if let RawKind::Children(cs) = &t.kind {
            for c in cs {
                best = best.max(max_label(c));
            }
        }
        best
    }
    let mut best: Option<usize> = None;
    for e in examples {
        best = match e {
            RawExample::Single(t) => best.max(max_label(t)),
            RawExample::Pair(a, b, l) => best.max(Some(*l)).max(max_label(a)).max(max_label(b)),
        };
    }
    best.map(|b| b + 1)
}

/// Reads a corpus file without touching any vocabulary.
pub fn read_raw_file(path: &Path, task: Task) -> Result<Vec<RawExample>, TreebankError> {
    let text = std::fs::read_to_string(path).map_err(|source| TreebankError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        match task {
            Task::Classify => {
                let tree = parse_sexpr(line).map_err(|source| TreebankError::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    source,
                })?;
                out.push(RawExample::Single(tree));
            }
            Task::Match => {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 3 {
                    return Err(TreebankError::Data {
                        path: path.to_path_buf(),
                        line: line_no,
                        message: format!(
                            "match lines need 3 tab-separated fields (tree, tree, label), got {}",
                            fields.len()
                        ),
                    });
                }
                let parse = |text: &str| {
                    parse_sexpr(text).map_err(|source| TreebankError::Parse {
                        path: path.to_path_buf(),
                        line: line_no,
                        source,
                    })
                };
                let first = parse(fields[0])?;
                let second = parse(fields[1])?;
                let label: usize = fields[2].trim().parse().map_err(|_| TreebankError::Data {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("bad pair label {:?}", fields[2]),
                })?;
                out.push(RawExample::Pair(first, second, label));
            }
        }
    }
    Ok(out)
}

/// Writes examples in the canonical line formats.
pub fn write_raw_file(path: &Path, examples: &[RawExample]) -> Result<(), TreebankError> {
    let mut out = String::new();
    for e in examples {
        match e {
            RawExample::Single(t) => {
                out.push_str(&t.to_sexpr());
            }
            RawExample::Pair(a, b, l) => {
                let _ = write!(out, "{}\t{}\t{}", a.to_sexpr(), b.to_sexpr(), l);
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| TreebankError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Vocabularies and indexed splits ready for training.
#[derive(Clone, Debug)]
pub struct LoadedData {
    pub words: Vocab,
    pub tags: Vocab,
    pub num_classes: usize,
    pub task: Task,
    pub train: Vec<Example>,
    pub dev: Vec<Example>,
}

/// Loads train and dev files, building vocabularies from both.
///
/// Every tree must already be binary; classify examples must carry a root
/// label (evaluation scores the root).  The class count is derived from the
/// labels present across both splits.
pub fn load_training_data(
    train_path: &Path,
    dev_path: &Path,
    task: Task,
) -> Result<LoadedData, TreebankError> {
    let train_raw = read_raw_file(train_path, task)?;
    let dev_raw = read_raw_file(dev_path, task)?;

    let mut all = train_raw.clone();
    all.extend(dev_raw.iter().cloned());
    let num_classes = derive_num_classes(&all).ok_or_else(|| TreebankError::File {
        path: train_path.to_path_buf(),
        message: "no labels found in the data".to_string(),
    })?;
    if num_classes < 2 {
        return Err(TreebankError::File {
            path: train_path.to_path_buf(),
            message: format!("need at least 2 classes, found {num_classes}"),
        });
    }

    let mut words = Vocab::new();
    let mut tags = Vocab::new();
    let index_split = |raw: &[RawExample],
                           path: &Path,
                           words: &mut Vocab,
                           tags: &mut Vocab|
     -> Result<Vec<Example>, TreebankError> {
        let mut out = Vec::with_capacity(raw.len());
        for (i, e) in raw.iter().enumerate() {
            out.push(index_example(e, i + 1, path, task, num_classes, |r| {
                index_tree_interning(r, words, tags)
            })?);
        }
        Ok(out)
    };
    let train = index_split(&train_raw, train_path, &mut words, &mut tags)?;
    let dev = index_split(&dev_raw, dev_path, &mut words, &mut tags)?;

    Ok(LoadedData {
        words,
        tags,
        num_classes,
        task,
        train,
        dev,
    })
}

/// Vocabularies and one indexed example set, for runs that split a single
/// file themselves (cross-validation).
#[derive(Clone, Debug)]
pub struct LoadedFile {
    pub words: Vocab,
    pub tags: Vocab,
    pub num_classes: usize,
    pub task: Task,
    pub examples: Vec<Example>,
}

/// Loads one file, building vocabularies and the class count from it alone.
/// Validation matches [`load_training_data`]: binary trees, root labels on
/// classify examples, labels in range.
pub fn load_single_file(path: &Path, task: Task) -> Result<LoadedFile, TreebankError> {
    let raw = read_raw_file(path, task)?;
    let num_classes = derive_num_classes(&raw).ok_or_else(|| TreebankError::File {
        path: path.to_path_buf(),
        message: "no labels found in the data".to_string(),
    })?;
    if num_classes < 2 {
        return Err(TreebankError::File {
            path: path.to_path_buf(),
            message: format!("need at least 2 classes, found {num_classes}"),
        });
    }
    let mut words = Vocab::new();
    let mut tags = Vocab::new();
    let mut examples = Vec::with_capacity(raw.len());
    for (i, e) in raw.iter().enumerate() {
        examples.push(index_example(e, i + 1, path, task, num_classes, |r| {
            index_tree_interning(r, &mut words, &mut tags)
        })?);
    }
    Ok(LoadedFile {
        words,
        tags,
        num_classes,
        task,
        examples,
    })
}

/// Loads one file against fixed vocabularies (for `eval` / `inspect-z`).
/// Unknown words and tags fall back to UNK; labels must fit `num_classes`.
pub fn load_eval_data(
    path: &Path,
    task: Task,
    words: &Vocab,
    tags: &Vocab,
    num_classes: usize,
) -> Result<Vec<Example>, TreebankError> {
    let raw = read_raw_file(path, task)?;
    raw.iter()
        .enumerate()
        .map(|(i, e)| {
            index_example(e, i + 1, path, task, num_classes, |r| {
                index_tree(r, words, tags)
            })
        })
        .collect()
}

fn index_example(
    raw: &RawExample,
    item: usize,
    path: &Path,
    task: Task,
    num_classes: usize,
    mut index: impl FnMut(&RawTree) -> Result<Tree, String>,
) -> Result<Example, TreebankError> {
    let data_err = |message: String| TreebankError::Data {
        path: path.to_path_buf(),
        line: item,
        message,
    };
    let check_labels = |t: &Tree| -> Result<(), TreebankError> {
        let mut bad = None;
        visit(t, &mut |n| {
            if let Some(l) = n.label {
                if l >= num_classes && bad.is_none() {
                    bad = Some(l);
                }
            }
        });
        match bad {
            Some(l) => Err(data_err(format!(
                "label {l} out of range for {num_classes} classes"
            ))),
            None => Ok(()),
        }
    };
    match (task, raw) {
        (Task::Classify, RawExample::Single(t)) => {
            let tree = index(t).map_err(&data_err)?;
            if tree.label.is_none() {
                return Err(data_err(
                    "classify example has no root label; evaluation scores the root".to_string(),
                ));
            }
            check_labels(&tree)?;
            Ok(Example::Single { tree })
        }
        (Task::Match, RawExample::Pair(a, b, l)) => {
            let first = index(a).map_err(&data_err)?;
            let second = index(b).map_err(&data_err)?;
            if *l >= num_classes {
                return Err(data_err(format!(
                    "pair label {l} out of range for {num_classes} classes"
                )));
            }
            check_labels(&first)?;
            check_labels(&second)?;
            Ok(Example::Pair {
                first,
                second,
                label: *l,
            })
        }
        _ => unreachable!("read_raw_file yields examples matching the task"),
    }
}

fn visit(t: &Tree, f: &mut impl FnMut(&Tree)) {
    f(t);
    if let TreeKind::Inner { left, right } = &t.kind {
        visit(left, f);
        visit(right, f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;
    use std::path::PathBuf;

    fn tmp_file(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn index_rejects_nonbinary() {
        let raw = parse_sexpr("(X#0 (A a) (B b) (C c))").unwrap();
        let err = index_tree(&raw, &Vocab::new(), &Vocab::new()).unwrap_err();
        assert!(err.contains("3 children"), "{err}");
    }

    #[test]
    fn interning_builds_vocabs_in_first_seen_order() {
        let raw = parse_sexpr("(S#0 (NP (DT the) (NN film)) (VB rocks))").unwrap();
        let mut words = Vocab::new();
        let mut tags = Vocab::new();
        let tree = index_tree_interning(&raw, &mut words, &mut tags).unwrap();
        assert_eq!(tags.tokens(), &["<unk>", "S", "NP", "DT", "NN", "VB"]);
        assert_eq!(words.tokens(), &["<unk>", "the", "film", "rocks"]);
        assert_eq!(tree.num_leaves(), 3);
        assert_eq!(tree.sentence(&words), "the film rocks");
    }

    #[test]
    fn fixed_vocab_maps_unknowns_to_unk() {
        let mut words = Vocab::new();
        let mut tags = Vocab::new();
        words.intern("known");
        tags.intern("NN");
        let raw = parse_sexpr("(NN#0 mystery)").unwrap();
        let tree = index_tree(&raw, &words, &tags).unwrap();
        match tree.kind {
            TreeKind::Leaf { word } => assert_eq!(word, Vocab::UNK),
            _ => panic!("expected leaf"),
        }
        assert_eq!(tree.tag, 1);
    }

    #[test]
    fn load_training_data_round_trip() {
        let (_dir, train) = tmp_file("(S#1 (A a) (B b))\n\n(S#0 (A a) (C c))\n");
        let (_dir2, dev) = tmp_file("(S#1 (C c) (B b))\n");
        let data = load_training_data(&train, &dev, Task::Classify).unwrap();
        assert_eq!(data.num_classes, 2);
        assert_eq!(data.train.len(), 2);
        assert_eq!(data.dev.len(), 1);
        assert_eq!(data.words.len(), 4); // unk a b c
    }

    #[test]
    fn single_file_loader_builds_vocabs_and_classes_from_one_file() {
        let (_dir, path) = tmp_file("(S#1 (A a) (B b))\n(S#0 (A a) (C c))\n(S#2 (C c) (B b))\n");
        let data = load_single_file(&path, Task::Classify).unwrap();
        assert_eq!(data.num_classes, 3);
        assert_eq!(data.examples.len(), 3);
        assert_eq!(data.words.len(), 4); // unk a b c
        let (_dir2, unlabeled) = tmp_file("(S (A a) (B b))\n");
        let err = load_single_file(&unlabeled, Task::Classify).unwrap_err();
        assert!(err.to_string().contains("no labels"), "{err}");
    }

    #[test]
    fn classify_without_root_label_is_rejected() {
        let (_dir, train) = tmp_file("(S (A a) (B b))\n(S#0 (A a) (B b))\n");
        let (_dir2, dev) = tmp_file("(S#1 (A a) (B b))\n");
        let err = load_training_data(&train, &dev, Task::Classify).unwrap_err();
        assert!(err.to_string().contains("no root label"), "{err}");
    }

    #[test]
    fn match_lines_parse_and_validate() {
        let (_dir, train) =
            tmp_file("(S (A a) (B b))\t(S (B b) (A a))\t2\n(S (A a) (B b))\t(S (A a) (A a))\t0\n");
        let (_dir2, dev) = tmp_file("(S (A a) (B b))\t(S (B b) (B b))\t1\n");
        let data = load_training_data(&train, &dev, Task::Match).unwrap();
        assert_eq!(data.num_classes, 3);
        match &data.train[0] {
            Example::Pair { label, .. } => assert_eq!(*label, 2),
            _ => panic!("expected pair"),
        }
    }

    #[test]
    fn malformed_match_line_is_a_data_error() {
        let (_dir, path) = tmp_file("(S (A a) (B b))\t1\n");
        let err = read_raw_file(&path, Task::Match).unwrap_err();
        assert!(err.to_string().contains("3 tab-separated fields"), "{err}");
    }

    #[test]
    fn parse_errors_carry_path_line_offset() {
        let (_dir, path) = tmp_file("(S#0 (A a) (B b))\n(S#0 (A a)\n");
        let err = read_raw_file(&path, Task::Classify).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2:"), "{msg}");
        assert!(msg.contains("byte offset"), "{msg}");
    }

    #[test]
    fn eval_loader_enforces_class_range() {
        let mut words = Vocab::new();
        let mut tags = Vocab::new();
        let raw = parse_sexpr("(S#5 (A a) (B b))").unwrap();
        index_tree_interning(&raw, &mut words, &mut tags).unwrap();
        let (_dir, path) = tmp_file("(S#5 (A a) (B b))\n");
        let err = load_eval_data(&path, Task::Classify, &words, &tags, 3).unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn write_then_read_is_identity() {
        let items = vec![
            RawExample::Single(parse_sexpr("(S#1 (A a) (B b))").unwrap()),
            RawExample::Single(parse_sexpr("(S#0 (A a) (@S (B b) (C c)))").unwrap()),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_raw_file(&path, &items).unwrap();
        assert_eq!(read_raw_file(&path, Task::Classify).unwrap(), items);

        let pairs = vec![RawExample::Pair(
            parse_sexpr("(S (A a) (B b))").unwrap(),
            parse_sexpr("(S (B b) (A a))").unwrap(),
            4,
        )];
        let path2 = dir.path().join("pairs.txt");
        write_raw_file(&path2, &pairs).unwrap();
        assert_eq!(read_raw_file(&path2, Task::Match).unwrap(), pairs);
    }
}
