//! Straight-line scalar reference implementations used by the test suites.
//!
//! Everything here is written as plain loops over `Vec<f64>`, independent of
//! the tape engine: no autodiff, no shared kernels, no tensor type.  The
//! test suites run both implementations over the same parameters and demand
//! agreement, so this crate is deliberately boring and explicit.
//!
//! Parameter access is by canonical name through [`tghyper::params::ParamSet`]
//! (values only); tree access is the indexed [`tghyper::treebank::Tree`].
//!
//! Conventions shared with the main implementation (these are the contract,
//! not code reuse):
//!
//! * matrices are row-major; `mat_vec` computes `y[i] = sum_j W[i][j] x[j]`
//! * LSTM gate stacks are ordered `(g, i, f_left, f_right, o)`
//! * the head-lexicalization input is `[t_j; t_l; t_r; x_l; x_r]`
//! * the fused input is `[t_j; t_l; t_r; x_j; h_l; h_r]` (concat fusion) or
//!   `relu(Wt [t_j;t_l;t_r] ⊙ Ws [x_j;h_l;h_r] + b)` (multiplicative fusion)
//! * missing children contribute zero vectors; inner nodes carry no word
//!   input, so the input-side term exists only at leaves
//! * evaluation mode: no dropout anywhere

use tghyper::params::ParamSet;
use tghyper::treebank::{Tree, TreeKind};

/// Dimensions, named independently of the main crate.
#[derive(Clone, Copy, Debug)]
pub struct RefDims {
    pub word: usize,
    pub hidden: usize,
    pub hyper: usize,
    pub fused: usize,
    pub tag: usize,
}

/// Which encoder to emulate.
#[derive(Clone, Copy, Debug)]
pub struct RefKind {
    /// TreeLSTM cell (otherwise plain tanh composition).
    pub lstm: bool,
    /// Tag-guided hypernetwork present (otherwise the static baseline).
    pub hyper: bool,
    /// Multiplicative fusion (otherwise concat fusion); hyper only.
    pub multi_fusion: bool,
}

/// Per-node results in post-order (left subtree, right subtree, node);
/// the root is last.
#[derive(Clone, Debug, Default)]
pub struct RefNode {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub hyper_h: Vec<f64>,
    pub hyper_c: Vec<f64>,
    pub head: Vec<f64>,
    pub fused: Vec<f64>,
    /// Scale applied to the recurrent term (inner nodes of hyper variants;
    /// all nodes for the LSTM form).
    pub scale_rec: Vec<f64>,
    pub label: Option<usize>,
}

// ── scalar building blocks ──────────────────────────────────────────────

pub fn mat_vec(rows: usize, cols: usize, w: &[f64], x: &[f64]) -> Vec<f64> {
    assert_eq!(w.len(), rows * cols);
    assert_eq!(x.len(), cols);
    let mut y = vec![0.0; rows];
    for i in 0..rows {
        let mut acc = 0.0;
        for j in 0..cols {
            acc += w[i * cols + j] * x[j];
        }
        y[i] = acc;
    }
    y
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn tanh_v(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.tanh()).collect()
}

pub fn sigmoid_v(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| 1.0 / (1.0 + (-v).exp())).collect()
}

pub fn relu_v(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

pub fn cat(parts: &[&[f64]]) -> Vec<f64> {
    let mut out = Vec::new();
    for p in parts {
        out.extend_from_slice(p);
    }
    out
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

pub fn cross_entropy(logits: &[f64], target: usize) -> f64 {
    -softmax(logits)[target].ln()
}

// ── parameter access ────────────────────────────────────────────────────

fn vec_param(set: &ParamSet, name: &str) -> Vec<f64> {
    let id = set
        .id(name)
        .unwrap_or_else(|| panic!("reference: missing parameter {name:?}"));
    set.value(id).data().to_vec()
}

fn row(set: &ParamSet, name: &str, idx: usize, width: usize) -> Vec<f64> {
    let table = vec_param(set, name);
    table[idx * width..(idx + 1) * width].to_vec()
}

// ── the encoders ────────────────────────────────────────────────────────

/// Runs the selected encoder over `tree` in evaluation mode and returns all
/// node states in post-order.
pub fn encode(set: &ParamSet, dims: &RefDims, kind: &RefKind, tree: &Tree) -> Vec<RefNode> {
    let mut out = Vec::new();
    walk(set, dims, kind, tree, &mut out);
    out
}

fn walk(
    set: &ParamSet,
    dims: &RefDims,
    kind: &RefKind,
    tree: &Tree,
    out: &mut Vec<RefNode>,
) -> usize {
    let mut node = RefNode {
        label: tree.label,
        ..RefNode::default()
    };
    match &tree.kind {
        TreeKind::Leaf { word } => {
            let x = row(set, "word_emb", *word, dims.word);
            if kind.hyper {
                let t_j = row(set, "tag_emb", tree.tag, dims.tag);
                let zero_t = vec![0.0; dims.tag];
                let zero_h = vec![0.0; dims.hidden];
                node.head = x.clone();
                node.fused = fuse(set, dims, kind, &t_j, &zero_t, &zero_t, &x, &zero_h, &zero_h);
                let (hh, hc) = hyper_cell(
                    set,
                    dims,
                    kind,
                    &node.fused,
                    &vec![0.0; dims.hyper],
                    &vec![0.0; dims.hyper],
                    &vec![0.0; dims.hyper],
                    &vec![0.0; dims.hyper],
                );
                node.hyper_h = hh;
                node.hyper_c = hc;
                if kind.lstm {
                    // z_w ⊙ (W x) + z_b, gates, no recurrent term at a leaf.
                    let z_in = scale_signal(set, dims, kind, "scale_in", &node.hyper_h);
                    let z_bias = scale_signal(set, dims, kind, "scale_bias", &node.hyper_h);
                    node.scale_rec = scale_signal(set, dims, kind, "scale_rec", &node.hyper_h);
                    let wx = mat_vec(
                        5 * dims.hidden,
                        dims.word,
                        &vec_param(set, "main_w"),
                        &x,
                    );
                    let pre = add(&mul(&z_in, &wx), &z_bias);
                    let (h, c) = lstm_from_pre(dims.hidden, &pre, &vec![0.0; dims.hidden], &vec![0.0; dims.hidden]);
                    node.h = h;
                    node.c = c;
                } else {
                    // The plain-composition family keeps the static leaf
                    // transform; the scale signals are consumed at inner
                    // nodes only.
                    let lin = mat_vec(dims.hidden, dims.word, &vec_param(set, "leaf_w"), &x);
                    node.h = tanh_v(&add(&lin, &vec_param(set, "leaf_b")));
                }
            } else if kind.lstm {
                let wx = mat_vec(5 * dims.hidden, dims.word, &vec_param(set, "main_w"), &x);
                let pre = add(&wx, &vec_param(set, "main_b"));
                let (h, c) = lstm_from_pre(dims.hidden, &pre, &vec![0.0; dims.hidden], &vec![0.0; dims.hidden]);
                node.h = h;
                node.c = c;
            } else {
                let lin = mat_vec(dims.hidden, dims.word, &vec_param(set, "leaf_w"), &x);
                node.h = tanh_v(&add(&lin, &vec_param(set, "leaf_b")));
            }
            out.push(node);
        }
        TreeKind::Inner { left, right } => {
            let li = walk(set, dims, kind, left, out);
            let ri = walk(set, dims, kind, right, out);
            let (hl, hr) = (out[li].h.clone(), out[ri].h.clone());
            let hlr = cat(&[&hl, &hr]);
            if kind.hyper {
                let t_j = row(set, "tag_emb", tree.tag, dims.tag);
                let t_l = row(set, "tag_emb", left.tag, dims.tag);
                let t_r = row(set, "tag_emb", right.tag, dims.tag);
                let (xl, xr) = (out[li].head.clone(), out[ri].head.clone());

                // Head lexicalization: a = sigmoid(W [t_j;t_l;t_r;x_l;x_r] + b),
                // head = a ⊙ x_l + (1-a) ⊙ x_r.
                let gate_in = cat(&[&t_j, &t_l, &t_r, &xl, &xr]);
                let a = sigmoid_v(&add(
                    &mat_vec(
                        dims.word,
                        3 * dims.tag + 2 * dims.word,
                        &vec_param(set, "headlex_w"),
                        &gate_in,
                    ),
                    &vec_param(set, "headlex_b"),
                ));
                let one_minus: Vec<f64> = a.iter().map(|v| 1.0 - v).collect();
                node.head = add(&mul(&a, &xl), &mul(&one_minus, &xr));

                node.fused = fuse(set, dims, kind, &t_j, &t_l, &t_r, &node.head, &hl, &hr);
                let (hh, hc) = hyper_cell(
                    set,
                    dims,
                    kind,
                    &node.fused,
                    &out[li].hyper_h,
                    &out[ri].hyper_h,
                    &out[li].hyper_c,
                    &out[ri].hyper_c,
                );
                node.hyper_h = hh;
                node.hyper_c = hc;
                node.scale_rec = scale_signal(set, dims, kind, "scale_rec", &node.hyper_h);
                let z_bias = scale_signal(set, dims, kind, "scale_bias", &node.hyper_h);

                if kind.lstm {
                    let u_term = mat_vec(
                        5 * dims.hidden,
                        2 * dims.hidden,
                        &vec_param(set, "main_u"),
                        &hlr,
                    );
                    let pre = add(&mul(&node.scale_rec, &u_term), &z_bias);
                    let (h, c) = lstm_from_pre(dims.hidden, &pre, &out[li].c, &out[ri].c);
                    node.h = h;
                    node.c = c;
                } else {
                    let u_term =
                        mat_vec(dims.hidden, 2 * dims.hidden, &vec_param(set, "main_u"), &hlr);
                    node.h = tanh_v(&add(&mul(&node.scale_rec, &u_term), &z_bias));
                }
            } else if kind.lstm {
                let u_term = mat_vec(
                    5 * dims.hidden,
                    2 * dims.hidden,
                    &vec_param(set, "main_u"),
                    &hlr,
                );
                let pre = add(&u_term, &vec_param(set, "main_b"));
                let (h, c) = lstm_from_pre(dims.hidden, &pre, &out[li].c, &out[ri].c);
                node.h = h;
                node.c = c;
            } else {
                let u_term =
                    mat_vec(dims.hidden, 2 * dims.hidden, &vec_param(set, "main_u"), &hlr);
                node.h = tanh_v(&add(&u_term, &vec_param(set, "main_b")));
            }
            out.push(node);
        }
    }
    out.len() - 1
}

/// Gate stack `(g, i, f_l, f_r, o)` applied to a pre-activation of length
/// `5*hidden`: `c = i⊙g + f_l⊙c_l + f_r⊙c_r`, `h = o ⊙ tanh(c)`.
fn lstm_from_pre(hidden: usize, pre: &[f64], c_l: &[f64], c_r: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(pre.len(), 5 * hidden);
    let g = tanh_v(&pre[0..hidden]);
    let i = sigmoid_v(&pre[hidden..2 * hidden]);
    let f_l = sigmoid_v(&pre[2 * hidden..3 * hidden]);
    let f_r = sigmoid_v(&pre[3 * hidden..4 * hidden]);
    let o = sigmoid_v(&pre[4 * hidden..5 * hidden]);
    let mut c = vec![0.0; hidden];
    for k in 0..hidden {
        c[k] = i[k] * g[k] + f_l[k] * c_l[k] + f_r[k] * c_r[k];
    }
    let h: Vec<f64> = (0..hidden).map(|k| o[k] * c[k].tanh()).collect();
    (h, c)
}

/// The hypernetwork cell: a small copy of the main cell over fused inputs.
#[allow(clippy::too_many_arguments)]
fn hyper_cell(
    set: &ParamSet,
    dims: &RefDims,
    kind: &RefKind,
    fused: &[f64],
    hh_l: &[f64],
    hh_r: &[f64],
    hc_l: &[f64],
    hc_r: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let hlr = cat(&[hh_l, hh_r]);
    if kind.lstm {
        let rows = 5 * dims.hyper;
        let wx = mat_vec(rows, dims.fused, &vec_param(set, "hyper_w"), fused);
        let uh = mat_vec(rows, 2 * dims.hyper, &vec_param(set, "hyper_u"), &hlr);
        let pre = add(&add(&wx, &uh), &vec_param(set, "hyper_b"));
        lstm_from_pre(dims.hyper, &pre, hc_l, hc_r)
    } else {
        let wx = mat_vec(dims.hyper, dims.fused, &vec_param(set, "hyper_w"), fused);
        let uh = mat_vec(dims.hyper, 2 * dims.hyper, &vec_param(set, "hyper_u"), &hlr);
        let h = tanh_v(&add(&add(&wx, &uh), &vec_param(set, "hyper_b")));
        (h, Vec::new())
    }
}

/// One scale signal: `W_(.) hyper_h + b_(.)`.
fn scale_signal(
    set: &ParamSet,
    dims: &RefDims,
    kind: &RefKind,
    stem: &str,
    hyper_h: &[f64],
) -> Vec<f64> {
    let rows = if kind.lstm { 5 * dims.hidden } else { dims.hidden };
    let w = vec_param(set, &format!("{stem}_w"));
    let b = vec_param(set, &format!("{stem}_b"));
    add(&mat_vec(rows, dims.hyper, &w, hyper_h), &b)
}

#[allow(clippy::too_many_arguments)]
fn fuse(
    set: &ParamSet,
    dims: &RefDims,
    kind: &RefKind,
    t_j: &[f64],
    t_l: &[f64],
    t_r: &[f64],
    head: &[f64],
    h_l: &[f64],
    h_r: &[f64],
) -> Vec<f64> {
    if kind.multi_fusion {
        let t_bar = cat(&[t_j, t_l, t_r]);
        let s_bar = cat(&[head, h_l, h_r]);
        let wt = mat_vec(dims.fused, 3 * dims.tag, &vec_param(set, "fuse_tag_w"), &t_bar);
        let ws = mat_vec(
            dims.fused,
            dims.word + 2 * dims.hidden,
            &vec_param(set, "fuse_sem_w"),
            &s_bar,
        );
        relu_v(&add(&mul(&wt, &ws), &vec_param(set, "fuse_b")))
    } else {
        let x = cat(&[t_j, t_l, t_r, head, h_l, h_r]);
        let lin = mat_vec(
            dims.fused,
            3 * dims.tag + dims.word + 2 * dims.hidden,
            &vec_param(set, "fuse_w"),
            &x,
        );
        relu_v(&add(&lin, &vec_param(set, "fuse_b")))
    }
}

// ── output heads ────────────────────────────────────────────────────────

/// `W_s h + b_s`.
pub fn classify_logits(set: &ParamSet, num_classes: usize, hidden: usize, h: &[f64]) -> Vec<f64> {
    add(
        &mat_vec(num_classes, hidden, &vec_param(set, "cls_w"), h),
        &vec_param(set, "cls_b"),
    )
}

/// Pair features `[h_s ⊙ h_t; |h_s - h_t|]` through a ReLU layer, then the
/// class projection.
pub fn match_logits(
    set: &ParamSet,
    num_classes: usize,
    hidden: usize,
    mlp: usize,
    h_s: &[f64],
    h_t: &[f64],
) -> Vec<f64> {
    let prod = mul(h_s, h_t);
    let diff: Vec<f64> = h_s.iter().zip(h_t).map(|(a, b)| (a - b).abs()).collect();
    let feats = cat(&[&prod, &diff]);
    let hid = relu_v(&add(
        &mat_vec(mlp, 2 * hidden, &vec_param(set, "mlp_w"), &feats),
        &vec_param(set, "mlp_b"),
    ));
    add(
        &mat_vec(num_classes, mlp, &vec_param(set, "cls_w"), &hid),
        &vec_param(set, "cls_b"),
    )
}

/// Sum of cross-entropies over every labeled node of the tree.
pub fn tree_loss(
    set: &ParamSet,
    dims: &RefDims,
    kind: &RefKind,
    num_classes: usize,
    tree: &Tree,
) -> f64 {
    let nodes = encode(set, dims, kind, tree);
    let mut loss = 0.0;
    for n in &nodes {
        if let Some(label) = n.label {
            let logits = classify_logits(set, num_classes, dims.hidden, &n.h);
            loss += cross_entropy(&logits, label);
        }
    }
    loss
}
