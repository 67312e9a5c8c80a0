//! Reverse-mode autodiff on a per-tree tape.
//!
//! The tape is an append-only arena: every operation pushes one node holding
//! the computed value and enough bookkeeping to replay the step backwards.
//! Composition builds a fresh tape per tree (define-by-run), calls
//! [`Tape::backward`] on a scalar output, and hands the parameter gradients
//! to the optimizer via [`Tape::add_param_grads`].
//!
//! Shape violations are internal programming errors and panic with the
//! primitive name and both shapes; user-facing errors live in the treebank
//! and training layers.

use crate::params::{ParamId, ParamSet};
use crate::tensor::Tensor;
use std::collections::HashMap;

/// Handle to one value on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ValueId(usize);

#[derive(Clone, Debug)]
enum Op {
    /// Constant input; receives a gradient but propagates nowhere.
    Leaf,
    /// Binding of a [`ParamSet`] parameter; gradient is exported.
    ParamLeaf,
    /// out = W x
    MatVec { w: ValueId, x: ValueId },
    /// out = a + b (elementwise)
    Add { a: ValueId, b: ValueId },
    /// out = a - b (elementwise)
    Sub { a: ValueId, b: ValueId },
    /// out = a ⊙ b (elementwise)
    Mul { a: ValueId, b: ValueId },
    /// out = tanh(x)
    Tanh { x: ValueId },
    /// out = 1 / (1 + exp(-x))
    Sigmoid { x: ValueId },
    /// out = max(x, 0)
    Relu { x: ValueId },
    /// out = |x|
    Abs { x: ValueId },
    /// out = concatenation of 1-D parts
    Concat { parts: Vec<ValueId> },
    /// out = x[offset .. offset + len]
    Slice {
        x: ValueId,
        offset: usize,
        len: usize,
    },
    /// out = factor * x
    Scale { x: ValueId, factor: f64 },
    /// out = x ⊙ mask, mask constant (dropout)
    MaskMul { x: ValueId, mask: Tensor },
    /// out = m[row, :] (embedding lookup)
    SelectRow { m: ValueId, row: usize },
    /// out = -log softmax(logits)[target]; probs cached at record time
    SoftmaxCrossEntropy {
        logits: ValueId,
        target: usize,
        probs: Vec<f64>,
    },
}

struct Node {
    value: Tensor,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Tensor>>,
    /// Parameter bindings in first-bind order, so gradient export is
    /// deterministic.
    bound: Vec<(ParamId, ValueId)>,
    bound_index: HashMap<ParamId, ValueId>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op) -> ValueId {
        self.nodes.push(Node { value, op });
        ValueId(self.nodes.len() - 1)
    }

    /// Records a constant input (no gradient flows out of it).
    pub fn constant(&mut self, value: Tensor) -> ValueId {
        self.push(value, Op::Leaf)
    }

    /// Binds a parameter onto the tape.  Binding the same parameter twice
    /// returns the same node, so its gradient accumulates across all uses.
    pub fn param(&mut self, set: &ParamSet, id: ParamId) -> ValueId {
        if let Some(&vid) = self.bound_index.get(&id) {
            return vid;
        }
        let vid = self.push(set.value(id).clone(), Op::ParamLeaf);
        self.bound.push((id, vid));
        self.bound_index.insert(id, vid);
        vid
    }

    pub fn value(&self, id: ValueId) -> &Tensor {
        &self.nodes[id.0].value
    }

    /// Gradient of the last `backward` output w.r.t. `id`, if any flowed.
    pub fn grad(&self, id: ValueId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }

    // ── primitives ──────────────────────────────────────────────────────

    pub fn matvec(&mut self, w: ValueId, x: ValueId) -> ValueId {
        let (wv, xv) = (&self.nodes[w.0].value, &self.nodes[x.0].value);
        assert!(
            wv.is_matrix() && xv.is_vector() && wv.cols() == xv.len(),
            "matvec: incompatible shapes {:?} x {:?}",
            wv.shape(),
            xv.shape()
        );
        let (rows, cols) = (wv.rows(), wv.cols());
        let mut out = vec![0.0; rows];
        let wd = wv.data();
        let xd = xv.data();
        for i in 0..rows {
            let mut acc = 0.0;
            let row = &wd[i * cols..(i + 1) * cols];
            for j in 0..cols {
                acc += row[j] * xd[j];
            }
            out[i] = acc;
        }
        self.push(Tensor::vector(out), Op::MatVec { w, x })
    }

    fn elementwise(&mut self, a: ValueId, b: ValueId, name: &str, f: fn(f64, f64) -> f64) -> Tensor {
        let (av, bv) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert!(
            av.shape() == bv.shape(),
            "{name}: shape mismatch {:?} vs {:?}",
            av.shape(),
            bv.shape()
        );
        let mut out = av.clone();
        for (o, &r) in out.data_mut().iter_mut().zip(bv.data()) {
            *o = f(*o, r);
        }
        out
    }

    pub fn add(&mut self, a: ValueId, b: ValueId) -> ValueId {
        let out = self.elementwise(a, b, "add", |x, y| x + y);
        self.push(out, Op::Add { a, b })
    }

    pub fn sub(&mut self, a: ValueId, b: ValueId) -> ValueId {
        let out = self.elementwise(a, b, "sub", |x, y| x - y);
        self.push(out, Op::Sub { a, b })
    }

    pub fn mul(&mut self, a: ValueId, b: ValueId) -> ValueId {
        let out = self.elementwise(a, b, "mul", |x, y| x * y);
        self.push(out, Op::Mul { a, b })
    }

    fn unary(&mut self, x: ValueId, f: fn(f64) -> f64) -> Tensor {
        let mut out = self.nodes[x.0].value.clone();
        for v in out.data_mut().iter_mut() {
            *v = f(*v);
        }
        out
    }

    pub fn tanh(&mut self, x: ValueId) -> ValueId {
        let out = self.unary(x, f64::tanh);
        self.push(out, Op::Tanh { x })
    }

    pub fn sigmoid(&mut self, x: ValueId) -> ValueId {
        let out = self.unary(x, |v| 1.0 / (1.0 + (-v).exp()));
        self.push(out, Op::Sigmoid { x })
    }

    pub fn relu(&mut self, x: ValueId) -> ValueId {
        let out = self.unary(x, |v| v.max(0.0));
        self.push(out, Op::Relu { x })
    }

    pub fn abs(&mut self, x: ValueId) -> ValueId {
        let out = self.unary(x, f64::abs);
        self.push(out, Op::Abs { x })
    }

    /// Concatenates 1-D values in order.
    pub fn concat(&mut self, parts: &[ValueId]) -> ValueId {
        assert!(!parts.is_empty(), "concat: no parts given");
        let mut out = Vec::new();
        for &p in parts {
            let v = &self.nodes[p.0].value;
            assert!(
                v.is_vector(),
                "concat: parts must be vectors, got shape {:?}",
                v.shape()
            );
            out.extend_from_slice(v.data());
        }
        self.push(
            Tensor::vector(out),
            Op::Concat {
                parts: parts.to_vec(),
            },
        )
    }

    /// Contiguous sub-vector `x[offset .. offset + len]`.
    pub fn slice(&mut self, x: ValueId, offset: usize, len: usize) -> ValueId {
        let v = &self.nodes[x.0].value;
        assert!(
            v.is_vector() && offset + len <= v.len(),
            "slice: range {offset}..{} out of bounds for shape {:?}",
            offset + len,
            v.shape()
        );
        let out = Tensor::vector(v.data()[offset..offset + len].to_vec());
        self.push(out, Op::Slice { x, offset, len })
    }

    pub fn scale(&mut self, x: ValueId, factor: f64) -> ValueId {
        let mut out = self.nodes[x.0].value.clone();
        for v in out.data_mut().iter_mut() {
            *v *= factor;
        }
        self.push(out, Op::Scale { x, factor })
    }

    /// Elementwise product with a constant mask (inverted dropout).
    pub fn mask_mul(&mut self, x: ValueId, mask: Tensor) -> ValueId {
        let v = &self.nodes[x.0].value;
        assert!(
            v.shape() == mask.shape(),
            "mask_mul: shape mismatch {:?} vs {:?}",
            v.shape(),
            mask.shape()
        );
        let mut out = v.clone();
        for (o, &m) in out.data_mut().iter_mut().zip(mask.data()) {
            *o *= m;
        }
        self.push(out, Op::MaskMul { x, mask })
    }

    /// Row lookup into a matrix (embedding tables).
    pub fn select_row(&mut self, m: ValueId, row: usize) -> ValueId {
        let v = &self.nodes[m.0].value;
        assert!(
            v.is_matrix() && row < v.rows(),
            "select_row: row {row} out of bounds for shape {:?}",
            v.shape()
        );
        let cols = v.cols();
        let out = Tensor::vector(v.data()[row * cols..(row + 1) * cols].to_vec());
        self.push(out, Op::SelectRow { m, row })
    }

    /// Fused softmax + cross-entropy: `-ln softmax(logits)[target]`,
    /// computed stably via the max-shift trick.  Output has shape `[1]`.
    pub fn softmax_cross_entropy(&mut self, logits: ValueId, target: usize) -> ValueId {
        let v = &self.nodes[logits.0].value;
        assert!(
            v.is_vector() && target < v.len(),
            "softmax_cross_entropy: target {target} out of bounds for shape {:?}",
            v.shape()
        );
        let probs = softmax(v.data());
        let d = v.data();
        let m = d.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let log_z = d.iter().map(|&l| (l - m).exp()).sum::<f64>().ln() + m;
        let loss = log_z - d[target];
        self.push(
            Tensor::scalar(loss),
            Op::SoftmaxCrossEntropy {
                logits,
                target,
                probs,
            },
        )
    }

    // ── backward ────────────────────────────────────────────────────────

    /// Reverse sweep from a scalar output.  Clears any gradients from a
    /// previous sweep first, so two sweeps on one tape stay independent.
    pub fn backward(&mut self, output: ValueId) {
        assert!(
            self.nodes[output.0].value.is_scalar(),
            "backward: output must have shape [1], got {:?}",
            self.nodes[output.0].value.shape()
        );
        self.grads = (0..self.nodes.len()).map(|_| None).collect();
        self.grads[output.0] = Some(Tensor::scalar(1.0));

        for i in (0..self.nodes.len()).rev() {
            let Some(d) = self.grads[i].clone() else {
                continue;
            };
            let op = self.nodes[i].op.clone();
            match op {
                Op::Leaf | Op::ParamLeaf => {}
                Op::MatVec { w, x } => {
                    let wv = self.nodes[w.0].value.clone();
                    let xv = self.nodes[x.0].value.clone();
                    let (rows, cols) = (wv.rows(), wv.cols());
                    {
                        let gw = self.slot(w);
                        for r in 0..rows {
                            for c in 0..cols {
                                gw.data_mut()[r * cols + c] += d.at(r) * xv.at(c);
                            }
                        }
                    }
                    let gx = self.slot(x);
                    for c in 0..cols {
                        let mut acc = 0.0;
                        for r in 0..rows {
                            acc += wv.at2(r, c) * d.at(r);
                        }
                        gx.data_mut()[c] += acc;
                    }
                }
                Op::Add { a, b } => {
                    self.accum(a, d.data(), |g, d| g + d);
                    self.accum(b, d.data(), |g, d| g + d);
                }
                Op::Sub { a, b } => {
                    self.accum(a, d.data(), |g, d| g + d);
                    self.accum(b, d.data(), |g, d| g - d);
                }
                Op::Mul { a, b } => {
                    let av = self.nodes[a.0].value.clone();
                    let bv = self.nodes[b.0].value.clone();
                    self.accum_zip(a, d.data(), bv.data(), |g, d, o| g + d * o);
                    self.accum_zip(b, d.data(), av.data(), |g, d, o| g + d * o);
                }
                Op::Tanh { x } => {
                    let y = self.nodes[i].value.clone();
                    self.accum_zip(x, d.data(), y.data(), |g, d, y| g + d * (1.0 - y * y));
                }
                Op::Sigmoid { x } => {
                    let y = self.nodes[i].value.clone();
                    self.accum_zip(x, d.data(), y.data(), |g, d, y| g + d * y * (1.0 - y));
                }
                Op::Relu { x } => {
                    let xv = self.nodes[x.0].value.clone();
                    self.accum_zip(x, d.data(), xv.data(), |g, d, x| {
                        if x > 0.0 {
                            g + d
                        } else {
                            g
                        }
                    });
                }
                Op::Abs { x } => {
                    let xv = self.nodes[x.0].value.clone();
                    self.accum_zip(x, d.data(), xv.data(), |g, d, x| g + d * sign(x));
                }
                Op::Concat { parts } => {
                    let mut offset = 0;
                    for p in parts {
                        let len = self.nodes[p.0].value.len();
                        let piece = d.data()[offset..offset + len].to_vec();
                        self.accum(p, &piece, |g, d| g + d);
                        offset += len;
                    }
                }
                Op::Slice { x, offset, len } => {
                    let gx = self.slot(x);
                    for k in 0..len {
                        gx.data_mut()[offset + k] += d.at(k);
                    }
                }
                Op::Scale { x, factor } => {
                    self.accum(x, d.data(), move |g, d| g + factor * d);
                }
                Op::MaskMul { x, mask } => {
                    self.accum_zip(x, d.data(), mask.data(), |g, d, m| g + d * m);
                }
                Op::SelectRow { m, row } => {
                    let cols = self.nodes[m.0].value.cols();
                    let gm = self.slot(m);
                    for c in 0..cols {
                        gm.data_mut()[row * cols + c] += d.at(c);
                    }
                }
                Op::SoftmaxCrossEntropy {
                    logits,
                    target,
                    probs,
                } => {
                    let dy = d.at(0);
                    let gl = self.slot(logits);
                    for (k, &p) in probs.iter().enumerate() {
                        let indicator = if k == target { 1.0 } else { 0.0 };
                        gl.data_mut()[k] += dy * (p - indicator);
                    }
                }
            }
        }
    }

    fn slot(&mut self, id: ValueId) -> &mut Tensor {
        let shape = self.nodes[id.0].value.shape().to_vec();
        self.grads[id.0].get_or_insert_with(|| Tensor::zeros(&shape))
    }

    fn accum(&mut self, id: ValueId, d: &[f64], f: impl Fn(f64, f64) -> f64) {
        let g = self.slot(id);
        for (gv, &dv) in g.data_mut().iter_mut().zip(d) {
            *gv = f(*gv, dv);
        }
    }

    fn accum_zip(&mut self, id: ValueId, d: &[f64], other: &[f64], f: impl Fn(f64, f64, f64) -> f64) {
        let g = self.slot(id);
        for ((gv, &dv), &ov) in g.data_mut().iter_mut().zip(d).zip(other) {
            *gv = f(*gv, dv, ov);
        }
    }

    /// Adds this tape's parameter gradients into the set's accumulators.
    /// Call after `backward`; parameters the tape never bound are untouched.
    pub fn add_param_grads(&self, set: &mut ParamSet) {
        for &(pid, vid) in &self.bound {
            if let Some(g) = self.grads.get(vid.0).and_then(|g| g.as_ref()) {
                let acc = &mut set.get_mut(pid).grad;
                for (a, &gv) in acc.data_mut().iter_mut().zip(g.data()) {
                    *a += gv;
                }
            }
        }
    }

    /// Gradient for a bound parameter after `backward`, if it was reached.
    pub fn param_grad(&self, id: ParamId) -> Option<&Tensor> {
        let vid = self.bound_index.get(&id)?;
        self.grads.get(vid.0).and_then(|g| g.as_ref())
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Numerically stable softmax over a slice.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = logits.iter().map(|&l| (l - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN_3: f64 = 1.098_612_288_668_109_8;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn tanh_of_zero_vector_is_zero() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::zeros(&[3]));
        let y = tape.tanh(x);
        assert_eq!(tape.value(y).data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn sigmoid_of_zero_vector_is_half() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::zeros(&[2]));
        let y = tape.sigmoid(x);
        assert_eq!(tape.value(y).data(), &[0.5, 0.5]);
    }

    #[test]
    fn matvec_identity_returns_input() {
        let mut tape = Tape::new();
        let w = tape.constant(Tensor::matrix(3, 3, vec![
            1.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, //
            0.0, 0.0, 1.0,
        ]));
        let x = tape.constant(Tensor::vector(vec![2.0, -1.0, 0.5]));
        let y = tape.matvec(w, x);
        assert_eq!(tape.value(y).data(), &[2.0, -1.0, 0.5]);
    }

    #[test]
    fn uniform_logits_cross_entropy_is_ln_3() {
        let mut tape = Tape::new();
        let logits = tape.constant(Tensor::zeros(&[3]));
        let loss = tape.softmax_cross_entropy(logits, 1);
        assert!(close(tape.value(loss).at(0), LN_3, 1e-12));
    }

    #[test]
    fn tanh_gradient_at_zero_is_one() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::scalar(0.0));
        let y = tape.tanh(x);
        tape.backward(y);
        assert_eq!(tape.grad(x).unwrap().at(0), 1.0);
    }

    #[test]
    fn elementwise_product_gradients_swap_operands() {
        // loss = sum(x ⊙ y) with x=(1,2), y=(3,4): d/dx = y, d/dy = x.
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(vec![1.0, 2.0]));
        let y = tape.constant(Tensor::vector(vec![3.0, 4.0]));
        let p = tape.mul(x, y);
        let ones = tape.constant(Tensor::matrix(1, 2, vec![1.0, 1.0]));
        let loss = tape.matvec(ones, p);
        tape.backward(loss);
        assert_eq!(tape.grad(x).unwrap().data(), &[3.0, 4.0]);
        assert_eq!(tape.grad(y).unwrap().data(), &[1.0, 2.0]);
    }

    #[test]
    fn softmax_cross_entropy_gradient_is_probs_minus_onehot() {
        let mut tape = Tape::new();
        let logits = tape.constant(Tensor::zeros(&[3]));
        let loss = tape.softmax_cross_entropy(logits, 0);
        tape.backward(loss);
        let g = tape.grad(logits).unwrap();
        assert!(close(g.at(0), 1.0 / 3.0 - 1.0, 1e-12));
        assert!(close(g.at(1), 1.0 / 3.0, 1e-12));
        assert!(close(g.at(2), 1.0 / 3.0, 1e-12));
    }

    #[test]
    fn backward_clears_previous_sweep() {
        // Two backward sweeps on one tape must not accumulate into each other.
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::scalar(3.0));
        let a = tape.scale(x, 2.0);
        let b = tape.scale(x, 5.0);
        tape.backward(a);
        assert_eq!(tape.grad(x).unwrap().at(0), 2.0);
        tape.backward(b);
        assert_eq!(tape.grad(x).unwrap().at(0), 5.0);
    }

    #[test]
    fn param_bound_twice_accumulates_gradient() {
        let mut set = ParamSet::new();
        let w = set.register("w", Tensor::scalar(4.0));
        let mut tape = Tape::new();
        let a = tape.param(&set, w);
        let b = tape.param(&set, w);
        assert_eq!(a, b);
        let y = tape.mul(a, b); // y = w^2, dy/dw = 2w = 8
        tape.backward(y);
        assert_eq!(tape.param_grad(w).unwrap().at(0), 8.0);
    }

    #[test]
    fn concat_slice_round_trip_routes_gradient() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::vector(vec![1.0, 2.0]));
        let b = tape.constant(Tensor::vector(vec![3.0]));
        let cat = tape.concat(&[a, b]);
        let piece = tape.slice(cat, 1, 2); // (2, 3)
        let ones = tape.constant(Tensor::matrix(1, 2, vec![1.0, 1.0]));
        let loss = tape.matvec(ones, piece);
        assert_eq!(tape.value(loss).at(0), 5.0);
        tape.backward(loss);
        assert_eq!(tape.grad(a).unwrap().data(), &[0.0, 1.0]);
        assert_eq!(tape.grad(b).unwrap().data(), &[1.0]);
    }

    #[test]
    fn select_row_gradient_lands_on_row() {
        let mut tape = Tape::new();
        let m = tape.constant(Tensor::matrix(3, 2, vec![0.0; 6]));
        let r = tape.select_row(m, 1);
        let ones = tape.constant(Tensor::matrix(1, 2, vec![1.0, 1.0]));
        let loss = tape.matvec(ones, r);
        tape.backward(loss);
        assert_eq!(
            tape.grad(m).unwrap().data(),
            &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn relu_and_abs_gradients() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(vec![-2.0, 3.0]));
        let r = tape.relu(x);
        let ones = tape.constant(Tensor::matrix(1, 2, vec![1.0, 1.0]));
        let loss = tape.matvec(ones, r);
        tape.backward(loss);
        assert_eq!(tape.grad(x).unwrap().data(), &[0.0, 1.0]);

        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(vec![-2.0, 3.0]));
        let a = tape.abs(x);
        let ones = tape.constant(Tensor::matrix(1, 2, vec![1.0, 1.0]));
        let loss = tape.matvec(ones, a);
        assert_eq!(tape.value(loss).at(0), 5.0);
        tape.backward(loss);
        assert_eq!(tape.grad(x).unwrap().data(), &[-1.0, 1.0]);
    }

    #[test]
    fn mask_mul_scales_gradient_by_mask() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(vec![1.0, 1.0, 1.0]));
        let y = tape.mask_mul(x, Tensor::vector(vec![2.0, 0.0, 2.0]));
        assert_eq!(tape.value(y).data(), &[2.0, 0.0, 2.0]);
        let ones = tape.constant(Tensor::matrix(1, 3, vec![1.0; 3]));
        let loss = tape.matvec(ones, y);
        tape.backward(loss);
        assert_eq!(tape.grad(x).unwrap().data(), &[2.0, 0.0, 2.0]);
    }

    #[test]
    #[should_panic(expected = "matvec: incompatible shapes")]
    fn matvec_shape_mismatch_panics() {
        let mut tape = Tape::new();
        let w = tape.constant(Tensor::matrix(2, 3, vec![0.0; 6]));
        let x = tape.constant(Tensor::vector(vec![0.0, 0.0]));
        tape.matvec(w, x);
    }

    #[test]
    #[should_panic(expected = "add: shape mismatch")]
    fn add_shape_mismatch_panics() {
        let mut tape = Tape::new();
        let a = tape.constant(Tensor::vector(vec![0.0; 3]));
        let b = tape.constant(Tensor::vector(vec![0.0; 4]));
        tape.add(a, b);
    }

    #[test]
    #[should_panic(expected = "backward: output must have shape [1]")]
    fn backward_from_non_scalar_panics() {
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(vec![1.0, 2.0]));
        let y = tape.tanh(x);
        tape.backward(y);
    }

    #[test]
    fn forward_values_are_deterministic() {
        let run = || {
            let mut tape = Tape::new();
            let x = tape.constant(Tensor::vector(vec![0.3, -0.7, 0.11]));
            let w = tape.constant(Tensor::matrix(3, 3, vec![
                0.1, -0.2, 0.3, //
                0.4, 0.5, -0.6, //
                -0.7, 0.8, 0.9,
            ]));
            let h = tape.matvec(w, x);
            let t = tape.tanh(h);
            let loss = tape.softmax_cross_entropy(t, 2);
            tape.value(loss).at(0)
        };
        // Bitwise identical across runs.
        assert_eq!(run().to_bits(), run().to_bits());
    }

    #[test]
    fn softmax_is_stable_for_large_logits() {
        let p = softmax(&[1000.0, 1000.0, -1000.0]);
        assert!(close(p[0], 0.5, 1e-12) && close(p[1], 0.5, 1e-12));
        assert!(p[2] >= 0.0 && p[2] < 1e-300);
    }
}
