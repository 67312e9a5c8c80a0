//! Inverted dropout with a per-run seeded stream.
//!
//! Three sites consume masks: word embeddings at leaves, the `i ⊙ g` cell
//! update inside main TreeLSTM cells (recurrent dropout), and the hidden
//! state entering an output head.  Masks scale surviving elements by
//! `1/keep`, so evaluation needs no rescaling — in eval mode every site is
//! the identity.

use crate::tape::{Tape, ValueId};
use crate::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Samples one inverted-dropout mask: each element is `1/(1-rate)` with
/// probability `1-rate`, else `0`.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Tensor {
    assert!(
        (0.0..1.0).contains(&rate),
        "dropout: rate must be in [0, 1), got {rate}"
    );
    let keep = 1.0 - rate;
    let mut mask = Tensor::zeros(&[len]);
    for v in mask.data_mut().iter_mut() {
        if rng.random::<f64>() < keep {
            *v = 1.0 / keep;
        }
    }
    mask
}

/// Applies dropout to a tape value.  Identity when not training or when the
/// rate is zero.
pub fn apply_dropout<R: Rng + ?Sized>(
    tape: &mut Tape,
    x: ValueId,
    rate: f64,
    train: bool,
    rng: &mut R,
) -> ValueId {
    if !train || rate == 0.0 {
        return x;
    }
    let mask = dropout_mask(tape.value(x).len(), rate, rng);
    tape.mask_mul(x, mask)
}

/// The dropout state a forward pass threads through the tree.
pub struct DropoutCtx {
    train: bool,
    /// Rate for embeddings and for the hidden state under an output head.
    drop_rate: f64,
    /// Rate for the recurrent cell-update term.
    rec_rate: f64,
    rng: Option<ChaCha8Rng>,
}

impl DropoutCtx {
    /// Evaluation mode: every mask request returns `None`.
    pub fn eval() -> DropoutCtx {
        DropoutCtx {
            train: false,
            drop_rate: 0.0,
            rec_rate: 0.0,
            rng: None,
        }
    }

    /// Training mode with its own seeded stream.
    pub fn train(drop_rate: f64, rec_rate: f64, seed: u64) -> DropoutCtx {
        assert!(
            (0.0..1.0).contains(&drop_rate) && (0.0..1.0).contains(&rec_rate),
            "dropout: rates must be in [0, 1), got {drop_rate} and {rec_rate}"
        );
        DropoutCtx {
            train: true,
            drop_rate,
            rec_rate,
            rng: Some(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    pub fn is_train(&self) -> bool {
        self.train
    }

    fn mask(&mut self, len: usize, rate: f64) -> Option<Tensor> {
        if !self.train || rate == 0.0 {
            return None;
        }
        let rng = self.rng.as_mut().expect("training dropout context has an rng");
        Some(dropout_mask(len, rate, rng))
    }

    /// Mask for a word embedding.
    pub fn emb_mask(&mut self, len: usize) -> Option<Tensor> {
        let rate = self.drop_rate;
        self.mask(len, rate)
    }

    /// Mask for the `i ⊙ g` term of a main TreeLSTM cell.
    pub fn rec_mask(&mut self, len: usize) -> Option<Tensor> {
        let rate = self.rec_rate;
        self.mask(len, rate)
    }

    /// Mask for a hidden state entering an output head.
    pub fn out_mask(&mut self, len: usize) -> Option<Tensor> {
        let rate = self.drop_rate;
        self.mask(len, rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(vec![1.0, 2.0, 3.0]));
        let y = apply_dropout(&mut tape, x, 0.0, true, &mut rng);
        assert_eq!(x, y);
    }

    #[test]
    fn eval_mode_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut tape = Tape::new();
        let x = tape.constant(Tensor::vector(vec![1.0, 2.0, 3.0]));
        let y = apply_dropout(&mut tape, x, 0.9, false, &mut rng);
        assert_eq!(x, y);
        let mut ctx = DropoutCtx::eval();
        assert!(ctx.emb_mask(5).is_none());
        assert!(ctx.rec_mask(5).is_none());
        assert!(ctx.out_mask(5).is_none());
    }

    #[test]
    fn masks_preserve_the_mean_and_hit_the_rate() {
        // Monte-Carlo: with rate 0.5 the masked value has expectation equal
        // to the input; over many draws the mean settles within 1%.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 200_000;
        let mut sum = 0.0;
        let mut zeros = 0usize;
        for _ in 0..n {
            let m = dropout_mask(1, 0.5, &mut rng);
            sum += m.at(0);
            zeros += usize::from(m.at(0) == 0.0);
        }
        let mean = sum / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        let zero_frac = zeros as f64 / n as f64;
        assert!((zero_frac - 0.5).abs() < 0.01, "zero fraction {zero_frac}");
    }

    #[test]
    fn surviving_elements_are_scaled_by_inverse_keep() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = dropout_mask(1000, 0.25, &mut rng);
        for &v in m.data() {
            assert!(v == 0.0 || (v - 1.0 / 0.75).abs() < 1e-15);
        }
    }

    #[test]
    fn train_stream_is_seeded() {
        let mut a = DropoutCtx::train(0.5, 0.25, 9);
        let mut b = DropoutCtx::train(0.5, 0.25, 9);
        for _ in 0..10 {
            assert_eq!(a.emb_mask(8), b.emb_mask(8));
            assert_eq!(a.rec_mask(4), b.rec_mask(4));
        }
    }

    #[test]
    #[should_panic(expected = "rate must be in [0, 1)")]
    fn rate_one_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        dropout_mask(4, 1.0, &mut rng);
    }
}
