//! AdaGrad with L2 weight decay.
//!
//! Each element keeps a running sum of squared gradients; the update is
//!
//! ```text
//! g      = grad + l2 * weight
//! sumsq += g^2
//! w     -= lr * g / (sqrt(sumsq) + 1e-8)
//! ```
//!
//! Gradients are zeroed after the step; fixed parameters are skipped but
//! still cleared, so a frozen table never drifts and never accumulates.

use crate::params::ParamSet;

const EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug)]
pub struct AdaGrad {
    pub lr: f64,
    pub l2: f64,
}

impl AdaGrad {
    pub fn new(lr: f64, l2: f64) -> AdaGrad {
        assert!(lr > 0.0, "adagrad: learning rate must be positive, got {lr}");
        assert!(l2 >= 0.0, "adagrad: l2 must be non-negative, got {l2}");
        AdaGrad { lr, l2 }
    }

    /// Applies one update from the accumulated gradients, then zeroes them.
    pub fn step(&self, set: &mut ParamSet) {
        for (_, p) in set.iter_mut() {
            if p.fixed {
                p.grad.fill(0.0);
                continue;
            }
            let n = p.value.len();
            for i in 0..n {
                let g = p.grad.at(i) + self.l2 * p.value.at(i);
                let s = p.sumsq.at(i) + g * g;
                p.sumsq.set(i, s);
                p.value.set(i, p.value.at(i) - self.lr * g / (s.sqrt() + EPS));
            }
            p.grad.fill(0.0);
        }
    }
}
