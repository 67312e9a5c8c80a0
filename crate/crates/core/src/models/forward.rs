//! The forward pass: one tape per tree, all six variants.
//!
//! Node processing order is post-order (left, right, parent), and the
//! returned state/info vectors follow it, root last.  For hyper variants
//! each node carries, besides the main state: the tag-aware *head word*
//! (leaf embedding, or a learned soft choice between the children's heads),
//! the *fused input* feeding the hypernetwork, the hypernetwork state, and
//! the scale signals applied to the main cell.
//!
//! Scale signals are computed only where they are consumed: at every node
//! for the LSTM form (the input-term scale acts at leaves, the recurrent
//! scale at inner nodes), and at inner nodes only for the plain form, whose
//! leaves keep the static transform.

use super::{Fusion, ModelMeta};
use crate::params::{ParamId, ParamSet};
use crate::tape::{Tape, ValueId};
use crate::tensor::Tensor;
use crate::training::dropout::DropoutCtx;
use crate::treebank::{Tree, TreeKind};
use std::collections::HashMap;

/// Scale signals applied to one main cell.
#[derive(Clone, Copy, Debug)]
pub struct ScaleIds {
    /// Scales the input-side term (LSTM form, leaves only).
    pub input: Option<ValueId>,
    /// Scales the recurrent term.
    pub recurrent: ValueId,
    /// Replaces the static bias.
    pub bias: ValueId,
}

#[derive(Clone, Copy, Debug)]
pub struct NodeState {
    pub h: ValueId,
    pub c: Option<ValueId>,
    pub hyper_h: Option<ValueId>,
    pub hyper_c: Option<ValueId>,
    /// Head word vector (hyper variants).
    pub head: Option<ValueId>,
    /// Fused hypernetwork input (hyper variants).
    pub fused: Option<ValueId>,
    pub scale: Option<ScaleIds>,
}

#[derive(Clone, Debug)]
pub struct NodeInfo {
    pub tag: usize,
    pub word: Option<usize>,
    pub label: Option<usize>,
    /// Child indices into the post-order vectors.
    pub left: Option<usize>,
    pub right: Option<usize>,
    /// Leaf span `[start, end)` in sentence positions.
    pub span: (usize, usize),
    /// Root-to-node path as `L`/`R` steps; empty at the root.
    pub path: String,
}

impl NodeInfo {
    pub fn is_leaf(&self) -> bool {
        self.left.is_none()
    }
}

/// All node states of one encoded tree, post-order, root last.
#[derive(Debug)]
pub struct TreeStates {
    pub nodes: Vec<NodeState>,
    pub info: Vec<NodeInfo>,
}

impl TreeStates {
    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn root_h(&self) -> ValueId {
        self.nodes[self.root()].h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Encodes `tree` onto `tape`, reading parameters from `set`.
///
/// Word and tag indices must fit the tables (guaranteed for corpora indexed
/// against the model's vocabularies); violations panic via the row lookup.
pub fn forward(
    meta: &ModelMeta,
    set: &ParamSet,
    tape: &mut Tape,
    tree: &Tree,
    dropout: &mut DropoutCtx,
) -> TreeStates {
    let mut enc = Encoder {
        meta,
        set,
        tape,
        dropout,
        nodes: Vec::new(),
        info: Vec::new(),
        consts: HashMap::new(),
        next_leaf: 0,
    };
    enc.encode(tree, String::new());
    TreeStates {
        nodes: enc.nodes,
        info: enc.info,
    }
}

struct Encoder<'a> {
    meta: &'a ModelMeta,
    set: &'a ParamSet,
    tape: &'a mut Tape,
    dropout: &'a mut DropoutCtx,
    nodes: Vec<NodeState>,
    info: Vec<NodeInfo>,
    /// Cached constant vectors: (length, value) -> tape id.
    consts: HashMap<(usize, u64), ValueId>,
    next_leaf: usize,
}

impl Encoder<'_> {
    fn constant(&mut self, len: usize, value: f64) -> ValueId {
        let key = (len, value.to_bits());
        if let Some(&id) = self.consts.get(&key) {
            return id;
        }
        let id = self.tape.constant(Tensor::full(&[len], value));
        self.consts.insert(key, id);
        id
    }

    fn zero(&mut self, len: usize) -> ValueId {
        self.constant(len, 0.0)
    }

    fn param(&mut self, id: ParamId) -> ValueId {
        self.tape.param(self.set, id)
    }

    fn row_of(&mut self, table: ParamId, row: usize) -> ValueId {
        let t = self.param(table);
        self.tape.select_row(t, row)
    }

    /// `W x + b`.
    fn affine(&mut self, w: ParamId, x: ValueId, b: ParamId) -> ValueId {
        let wv = self.param(w);
        let bv = self.param(b);
        let lin = self.tape.matvec(wv, x);
        self.tape.add(lin, bv)
    }

    fn encode(&mut self, tree: &Tree, path: String) -> usize {
        match &tree.kind {
            TreeKind::Leaf { word } => self.encode_leaf(tree, *word, path),
            TreeKind::Inner { left, right } => {
                let li = self.encode(left, path.clone() + "L");
                let ri = self.encode(right, path.clone() + "R");
                self.encode_inner(tree, li, ri, path)
            }
        }
    }

    fn encode_leaf(&mut self, tree: &Tree, word: usize, path: String) -> usize {
        let d = self.meta.dims;
        let ids = self.meta.ids;
        let variant = self.meta.variant;

        let raw_x = self.row_of(ids.word_emb, word);
        let x = match self.dropout.emb_mask(d.word_dim) {
            Some(m) => self.tape.mask_mul(raw_x, m),
            None => raw_x,
        };

        let state = if variant.is_hyper() {
            let t_j = self.row_of(ids.tag_emb.unwrap(), tree.tag);
            let zero_t = self.zero(d.tag_dim);
            let zero_h = self.zero(d.hidden_dim);
            let fused = self.fuse(t_j, zero_t, zero_t, x, zero_h, zero_h);
            let (hyper_h, hyper_c) = self.hyper_cell(fused, None);

            if variant.is_lstm() {
                let z_in = self.scale_signal(ids.scale_in_w, ids.scale_in_b, hyper_h);
                let z_rec = self.scale_signal(ids.scale_rec_w, ids.scale_rec_b, hyper_h);
                let z_bias = self.scale_signal(ids.scale_bias_w, ids.scale_bias_b, hyper_h);
                let wm = self.param(ids.main_w.unwrap());
                let wx = self.tape.matvec(wm, x);
                let scaled = self.tape.mul(z_in, wx);
                let pre = self.tape.add(scaled, z_bias);
                let (h, c) = self.lstm_cell(d.hidden_dim, pre, None, true);
                NodeState {
                    h,
                    c: Some(c),
                    hyper_h: Some(hyper_h),
                    hyper_c,
                    head: Some(x),
                    fused: Some(fused),
                    scale: Some(ScaleIds {
                        input: Some(z_in),
                        recurrent: z_rec,
                        bias: z_bias,
                    }),
                }
            } else {
                // Plain-composition family: static leaf transform; scale
                // signals are consumed at inner nodes only.
                let pre = self.affine(ids.leaf_w.unwrap(), x, ids.leaf_b.unwrap());
                let h = self.tape.tanh(pre);
                NodeState {
                    h,
                    c: None,
                    hyper_h: Some(hyper_h),
                    hyper_c,
                    head: Some(x),
                    fused: Some(fused),
                    scale: None,
                }
            }
        } else if variant.is_lstm() {
            let pre = self.affine(ids.main_w.unwrap(), x, ids.main_b.unwrap());
            let (h, c) = self.lstm_cell(d.hidden_dim, pre, None, true);
            NodeState {
                h,
                c: Some(c),
                hyper_h: None,
                hyper_c: None,
                head: None,
                fused: None,
                scale: None,
            }
        } else {
            let pre = self.affine(ids.leaf_w.unwrap(), x, ids.leaf_b.unwrap());
            let h = self.tape.tanh(pre);
            NodeState {
                h,
                c: None,
                hyper_h: None,
                hyper_c: None,
                head: None,
                fused: None,
                scale: None,
            }
        };

        let span = (self.next_leaf, self.next_leaf + 1);
        self.next_leaf += 1;
        self.nodes.push(state);
        self.info.push(NodeInfo {
            tag: tree.tag,
            word: Some(word),
            label: tree.label,
            left: None,
            right: None,
            span,
            path,
        });
        self.nodes.len() - 1
    }

    fn encode_inner(&mut self, tree: &Tree, li: usize, ri: usize, path: String) -> usize {
        let d = self.meta.dims;
        let ids = self.meta.ids;
        let variant = self.meta.variant;
        let (ls, rs) = (self.nodes[li], self.nodes[ri]);
        let h_lr = self.tape.concat(&[ls.h, rs.h]);

        let state = if variant.is_hyper() {
            let t_j = self.row_of(ids.tag_emb.unwrap(), tree.tag);
            let t_l = self.row_of(ids.tag_emb.unwrap(), self.info[li].tag);
            let t_r = self.row_of(ids.tag_emb.unwrap(), self.info[ri].tag);
            let (x_l, x_r) = (ls.head.unwrap(), rs.head.unwrap());

            // Head lexicalization: a soft choice between the children's
            // head words, gated by the three tags and both heads.
            let gate_in = self.tape.concat(&[t_j, t_l, t_r, x_l, x_r]);
            let gate_pre = self.affine(ids.headlex_w.unwrap(), gate_in, ids.headlex_b.unwrap());
            let a = self.tape.sigmoid(gate_pre);
            let ones = self.constant(d.word_dim, 1.0);
            let one_minus = self.tape.sub(ones, a);
            let left_part = self.tape.mul(a, x_l);
            let right_part = self.tape.mul(one_minus, x_r);
            let head = self.tape.add(left_part, right_part);

            let fused = self.fuse(t_j, t_l, t_r, head, ls.h, rs.h);
            let (hyper_h, hyper_c) = self.hyper_cell(fused, Some((&ls, &rs)));
            let z_rec = self.scale_signal(ids.scale_rec_w, ids.scale_rec_b, hyper_h);
            let z_bias = self.scale_signal(ids.scale_bias_w, ids.scale_bias_b, hyper_h);

            let um = self.param(ids.main_u);
            let u_term = self.tape.matvec(um, h_lr);
            let scaled = self.tape.mul(z_rec, u_term);
            let pre = self.tape.add(scaled, z_bias);
            if variant.is_lstm() {
                let (h, c) = self.lstm_cell(
                    d.hidden_dim,
                    pre,
                    Some((ls.c.unwrap(), rs.c.unwrap())),
                    true,
                );
                NodeState {
                    h,
                    c: Some(c),
                    hyper_h: Some(hyper_h),
                    hyper_c,
                    head: Some(head),
                    fused: Some(fused),
                    scale: Some(ScaleIds {
                        input: None,
                        recurrent: z_rec,
                        bias: z_bias,
                    }),
                }
            } else {
                let h = self.tape.tanh(pre);
                NodeState {
                    h,
                    c: None,
                    hyper_h: Some(hyper_h),
                    hyper_c,
                    head: Some(head),
                    fused: Some(fused),
                    scale: Some(ScaleIds {
                        input: None,
                        recurrent: z_rec,
                        bias: z_bias,
                    }),
                }
            }
        } else {
            let um = self.param(ids.main_u);
            let u_term = self.tape.matvec(um, h_lr);
            let bias = self.param(ids.main_b.unwrap());
            let pre = self.tape.add(u_term, bias);
            if variant.is_lstm() {
                let (h, c) = self.lstm_cell(
                    d.hidden_dim,
                    pre,
                    Some((ls.c.unwrap(), rs.c.unwrap())),
                    true,
                );
                NodeState {
                    h,
                    c: Some(c),
                    hyper_h: None,
                    hyper_c: None,
                    head: None,
                    fused: None,
                    scale: None,
                }
            } else {
                let h = self.tape.tanh(pre);
                NodeState {
                    h,
                    c: None,
                    hyper_h: None,
                    hyper_c: None,
                    head: None,
                    fused: None,
                    scale: None,
                }
            }
        };

        let span = (self.info[li].span.0, self.info[ri].span.1);
        self.nodes.push(state);
        self.info.push(NodeInfo {
            tag: tree.tag,
            word: None,
            label: tree.label,
            left: Some(li),
            right: Some(ri),
            span,
            path,
        });
        self.nodes.len() - 1
    }

    /// Gate stack `(g, i, f_l, f_r, o)` over a `5*hidden` pre-activation.
    /// `main` cells take recurrent dropout on the `i ⊙ g` update; the
    /// hypernetwork cell does not.
    fn lstm_cell(
        &mut self,
        hidden: usize,
        pre: ValueId,
        children: Option<(ValueId, ValueId)>,
        main: bool,
    ) -> (ValueId, ValueId) {
        let g_pre = self.tape.slice(pre, 0, hidden);
        let g = self.tape.tanh(g_pre);
        let i_pre = self.tape.slice(pre, hidden, hidden);
        let i = self.tape.sigmoid(i_pre);
        let fl_pre = self.tape.slice(pre, 2 * hidden, hidden);
        let f_l = self.tape.sigmoid(fl_pre);
        let fr_pre = self.tape.slice(pre, 3 * hidden, hidden);
        let f_r = self.tape.sigmoid(fr_pre);
        let o_pre = self.tape.slice(pre, 4 * hidden, hidden);
        let o = self.tape.sigmoid(o_pre);

        let mut update = self.tape.mul(i, g);
        if main {
            if let Some(m) = self.dropout.rec_mask(hidden) {
                update = self.tape.mask_mul(update, m);
            }
        }
        let c = match children {
            Some((c_l, c_r)) => {
                let keep_l = self.tape.mul(f_l, c_l);
                let keep_r = self.tape.mul(f_r, c_r);
                let partial = self.tape.add(update, keep_l);
                self.tape.add(partial, keep_r)
            }
            None => update,
        };
        let c_act = self.tape.tanh(c);
        let h = self.tape.mul(o, c_act);
        (h, c)
    }

    /// The hypernetwork cell: same form as the main cell, over fused inputs.
    /// `children: None` at leaves (zero child states, recurrent term
    /// dropped).
    fn hyper_cell(
        &mut self,
        fused: ValueId,
        children: Option<(&NodeState, &NodeState)>,
    ) -> (ValueId, Option<ValueId>) {
        let d = self.meta.dims;
        let ids = self.meta.ids;
        let wx = {
            let w = self.param(ids.hyper_w.unwrap());
            self.tape.matvec(w, fused)
        };
        let base = {
            let b = self.param(ids.hyper_b.unwrap());
            self.tape.add(wx, b)
        };
        let pre = match children {
            Some((l, r)) => {
                let cat = self.tape.concat(&[l.hyper_h.unwrap(), r.hyper_h.unwrap()]);
                let u = self.param(ids.hyper_u.unwrap());
                let u_term = self.tape.matvec(u, cat);
                self.tape.add(base, u_term)
            }
            None => base,
        };
        if self.meta.variant.is_lstm() {
            let cells = children.map(|(l, r)| (l.hyper_c.unwrap(), r.hyper_c.unwrap()));
            let (h, c) = self.lstm_cell(d.hyper_dim, pre, cells, false);
            (h, Some(c))
        } else {
            (self.tape.tanh(pre), None)
        }
    }

    fn scale_signal(
        &mut self,
        w: Option<ParamId>,
        b: Option<ParamId>,
        hyper_h: ValueId,
    ) -> ValueId {
        self.affine(w.unwrap(), hyper_h, b.unwrap())
    }

    /// The fused hypernetwork input.
    #[allow(clippy::too_many_arguments)]
    fn fuse(
        &mut self,
        t_j: ValueId,
        t_l: ValueId,
        t_r: ValueId,
        head: ValueId,
        h_l: ValueId,
        h_r: ValueId,
    ) -> ValueId {
        let ids = self.meta.ids;
        match self.meta.fusion {
            Fusion::Concat => {
                let x = self.tape.concat(&[t_j, t_l, t_r, head, h_l, h_r]);
                let pre = self.affine(ids.fuse_w.unwrap(), x, ids.fuse_b.unwrap());
                self.tape.relu(pre)
            }
            Fusion::Multi => {
                let t_bar = self.tape.concat(&[t_j, t_l, t_r]);
                let s_bar = self.tape.concat(&[head, h_l, h_r]);
                let wt = self.param(ids.fuse_tag_w.unwrap());
                let t_proj = self.tape.matvec(wt, t_bar);
                let ws = self.param(ids.fuse_sem_w.unwrap());
                let s_proj = self.tape.matvec(ws, s_bar);
                let prod = self.tape.mul(t_proj, s_proj);
                let b = self.param(ids.fuse_b.unwrap());
                let pre = self.tape.add(prod, b);
                self.tape.relu(pre)
            }
        }
    }
}
