//! Ranking of scale-signal dimensions by tag-pair dominance.
//!
//! For every dimension of the recurrent-term scale signal, inner-node rows
//! are grouped by the (left child tag, right child tag) pair and each
//! group's mean absolute value is compared against the corpus-wide mean and
//! standard deviation of that dimension.  A dimension whose top pair sits
//! far above the corpus mean (in corpus σ units) is "dominated" by that
//! pair: the hypernetwork enlarges this row of the composition matrix for
//! one syntactic environment in particular.
//!
//! The report is deterministic: groups tie-break on tag names, dimensions
//! on their index.

use crate::models::{collect_zsignals, Model, SignalError, ZRow};
use crate::treebank::{Example, Tree, TreeKind, Vocab};
use serde::Serialize;
use std::collections::HashMap;

/// One tag pair's statistics for one dimension.
#[derive(Clone, Debug, Serialize)]
pub struct DimGroup {
    pub left_tag: String,
    pub right_tag: String,
    pub count: usize,
    pub mean_abs: f64,
    /// A few example phrases headed by this pair ([`rank`] leaves this
    /// empty; [`analyze`] fills it from the corpus).
    pub examples: Vec<String>,
}

/// One dimension's ranking entry.
#[derive(Clone, Debug, Serialize)]
pub struct DimReport {
    pub dim: usize,
    pub corpus_mean_abs: f64,
    pub corpus_std_abs: f64,
    /// Top tag pairs by mean absolute value, largest first.
    pub top: Vec<DimGroup>,
    /// `(top pair mean − corpus mean) / corpus std`; zero when the
    /// dimension has no spread or no admissible group.
    pub separation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZReport {
    pub variant: String,
    pub trees: usize,
    pub rows: usize,
    /// Groups below this size are not ranked.
    pub min_count: usize,
    /// Per-dimension entries, highest separation first.
    pub dims: Vec<DimReport>,
}

impl ZReport {
    pub fn max_separation(&self) -> f64 {
        self.dims.first().map_or(0.0, |d| d.separation)
    }

    /// Flat tidy TSV: one line per (dimension, ranked pair).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "dim\trank\tleft_tag\tright_tag\tcount\tgroup_mean_abs\tcorpus_mean_abs\tcorpus_std_abs\tseparation\n",
        );
        for d in &self.dims {
            for (rank, g) in d.top.iter().enumerate() {
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
                    d.dim,
                    rank + 1,
                    g.left_tag,
                    g.right_tag,
                    g.count,
                    g.mean_abs,
                    d.corpus_mean_abs,
                    d.corpus_std_abs,
                    d.separation
                ));
            }
        }
        out
    }
}

fn trees_of(example: &Example) -> Vec<&Tree> {
    match example {
        Example::Single { tree } => vec![tree],
        Example::Pair { first, second, .. } => vec![first, second],
    }
}

/// Collects signals over a corpus and ranks dimensions by tag-pair
/// dominance.  `top_k` limits the pairs kept per dimension; `min_count`
/// excludes rare pairs from the ranking.
pub fn analyze(
    model: &Model,
    examples: &[Example],
    top_k: usize,
    min_count: usize,
) -> Result<ZReport, SignalError> {
    let mut rows = Vec::new();
    let mut trees = 0;
    let mut phrases: HashMap<(String, String), Vec<String>> = HashMap::new();
    for ex in examples {
        for tree in trees_of(ex) {
            let words = leaf_words(tree);
            for row in collect_zsignals(model, tree)? {
                let key = (
                    model.tags.get(row.left_tag).to_string(),
                    model.tags.get(row.right_tag).to_string(),
                );
                let seen = phrases.entry(key).or_default();
                if seen.len() < 3 {
                    let phrase: Vec<&str> = words[row.span.0..row.span.1]
                        .iter()
                        .map(|&w| model.words.get(w))
                        .collect();
                    seen.push(phrase.join(" "));
                }
                rows.push(row);
            }
            trees += 1;
        }
    }
    let mut dims = rank(&rows, &model.tags, top_k, min_count);
    for d in &mut dims {
        for g in &mut d.top {
            if let Some(seen) = phrases.get(&(g.left_tag.clone(), g.right_tag.clone())) {
                g.examples = seen.clone();
            }
        }
    }
    Ok(ZReport {
        variant: model.meta.variant.name().to_string(),
        trees,
        rows: rows.len(),
        min_count,
        dims,
    })
}

/// The statistics core, separated from signal collection for direct
/// testing.
pub fn rank(rows: &[ZRow], tags: &Vocab, top_k: usize, min_count: usize) -> Vec<DimReport> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let width = first.z_rec.len();
    let n = rows.len() as f64;

    let mut out = Vec::with_capacity(width);
    for dim in 0..width {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut groups: HashMap<(usize, usize), (usize, f64)> = HashMap::new();
        for row in rows {
            let v = row.z_rec.at(dim).abs();
            sum += v;
            sumsq += v * v;
            let entry = groups.entry((row.left_tag, row.right_tag)).or_insert((0, 0.0));
            entry.0 += 1;
            entry.1 += v;
        }
        let mean = sum / n;
        let var = (sumsq / n - mean * mean).max(0.0);
        let std = var.sqrt();

        let mut top: Vec<DimGroup> = groups
            .into_iter()
            .filter(|(_, (count, _))| *count >= min_count)
            .map(|((l, r), (count, s))| DimGroup {
                left_tag: tags.get(l).to_string(),
                right_tag: tags.get(r).to_string(),
                count,
                mean_abs: s / count as f64,
                examples: Vec::new(),
            })
            .collect();
        top.sort_by(|a, b| {
            b.mean_abs
                .partial_cmp(&a.mean_abs)
                .unwrap()
                .then_with(|| (&a.left_tag, &a.right_tag).cmp(&(&b.left_tag, &b.right_tag)))
        });
        top.truncate(top_k);

        let separation = match top.first() {
            Some(g) if std > 1e-12 => (g.mean_abs - mean) / std,
            _ => 0.0,
        };
        out.push(DimReport {
            dim,
            corpus_mean_abs: mean,
            corpus_std_abs: std,
            top,
            separation,
        });
    }
    out.sort_by(|a, b| {
        b.separation
            .partial_cmp(&a.separation)
            .unwrap()
            .then_with(|| a.dim.cmp(&b.dim))
    });
    out
}

/// Flat per-node TSV dump of the signals themselves, with resolved names
/// and one column per signal dimension.
pub fn dump_rows_tsv(model: &Model, examples: &[Example]) -> Result<String, SignalError> {
    let width = model.meta.dims.scale_len(model.meta.variant);
    let mut out = String::from("sentence\tpath\ttag\tleft_tag\tright_tag\tphrase");
    for dim in 0..width {
        out.push_str(&format!("\tz{dim}"));
    }
    out.push('\n');
    let mut sentence = 0;
    for ex in examples {
        for tree in trees_of(ex) {
            let words = leaf_words(tree);
            for row in collect_zsignals(model, tree)? {
                let phrase: Vec<&str> = words[row.span.0..row.span.1]
                    .iter()
                    .map(|&w| model.words.get(w))
                    .collect();
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    sentence,
                    if row.path.is_empty() { "." } else { &row.path },
                    model.tags.get(row.tag),
                    model.tags.get(row.left_tag),
                    model.tags.get(row.right_tag),
                    phrase.join(" "),
                ));
                for v in row.z_rec.data() {
                    out.push_str(&format!("\t{v:.6}"));
                }
                out.push('\n');
            }
            sentence += 1;
        }
    }
    Ok(out)
}

fn leaf_words(tree: &Tree) -> Vec<usize> {
    fn walk(t: &Tree, out: &mut Vec<usize>) {
        match &t.kind {
            TreeKind::Leaf { word } => out.push(*word),
            TreeKind::Inner { left, right } => {
                walk(left, out);
                walk(right, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, &mut out);
    out
}
