//! Named trainable parameters with their optimizer state.
//!
//! A [`ParamSet`] owns every tensor a model trains: its current value, the
//! gradient accumulator the tape writes into, and the AdaGrad sum-of-squares
//! history.  Parameters are addressed by [`ParamId`] (cheap, `Copy`) and
//! registered under unique canonical names so checkpoints can be re-bound
//! after a round-trip.

use crate::tensor::Tensor;
use std::collections::HashMap;

/// Handle to one parameter inside a [`ParamSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

#[derive(Clone, Debug)]
pub struct Param {
    name: String,
    pub value: Tensor,
    /// Gradient accumulator; zeroed by the optimizer after each step.
    pub grad: Tensor,
    /// AdaGrad running sum of squared gradients.
    pub sumsq: Tensor,
    /// Fixed parameters are skipped by the optimizer (e.g. frozen embeddings)
    /// but still receive gradients on the tape.
    pub fixed: bool,
}

impl Param {
    pub fn name(&self) -> &str {
        &self.name
    }
}

#[derive(Clone, Debug, Default)]
pub struct ParamSet {
    params: Vec<Param>,
    by_name: HashMap<String, ParamId>,
}

impl ParamSet {
    pub fn new() -> ParamSet {
        ParamSet::default()
    }

    /// Registers a new parameter.  Names must be unique within the set;
    /// iteration order is registration order.
    pub fn register(&mut self, name: &str, value: Tensor) -> ParamId {
        assert!(
            !self.by_name.contains_key(name),
            "param: duplicate registration of {name:?}"
        );
        let id = ParamId(self.params.len());
        let shape = value.shape().to_vec();
        self.params.push(Param {
            name: name.to_string(),
            value,
            grad: Tensor::zeros(&shape),
            sumsq: Tensor::zeros(&shape),
            fixed: false,
        });
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Param {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Param {
        &mut self.params[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied()
    }

    pub fn set_fixed(&mut self, id: ParamId, fixed: bool) {
        self.params[id.0].fixed = fixed;
    }

    /// Parameters in registration order.
    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Param)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (ParamId, &mut Param)> {
        self.params
            .iter_mut()
            .enumerate()
            .map(|(i, p)| (ParamId(i), p))
    }

    pub fn zero_grads(&mut self) {
        for p in self.params.iter_mut() {
            p.grad.fill(0.0);
        }
    }

    pub fn total_elems(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_and_lookup() {
        let mut set = ParamSet::new();
        let a = set.register("a", Tensor::vector(vec![1.0, 2.0]));
        let b = set.register("b", Tensor::matrix(2, 2, vec![0.0; 4]));
        assert_eq!(set.len(), 2);
        assert_eq!(set.id("a"), Some(a));
        assert_eq!(set.id("b"), Some(b));
        assert_eq!(set.id("c"), None);
        assert_eq!(set.get(a).name(), "a");
        assert_eq!(set.get(b).grad.shape(), &[2, 2]);
    }

    #[test]
    #[should_panic(expected = "duplicate registration")]
    fn duplicate_names_rejected() {
        let mut set = ParamSet::new();
        set.register("w", Tensor::scalar(0.0));
        set.register("w", Tensor::scalar(1.0));
    }

    #[test]
    fn iteration_order_is_registration_order() {
        let mut set = ParamSet::new();
        for name in ["z", "m", "a", "q"] {
            set.register(name, Tensor::scalar(0.0));
        }
        let names: Vec<&str> = set.iter().map(|(_, p)| p.name()).collect();
        assert_eq!(names, vec!["z", "m", "a", "q"]);
    }

    #[test]
    fn zero_grads_clears_accumulator() {
        let mut set = ParamSet::new();
        let id = set.register("w", Tensor::vector(vec![1.0, 1.0]));
        set.get_mut(id).grad = Tensor::vector(vec![3.0, -2.0]);
        set.zero_grads();
        assert_eq!(set.get(id).grad, Tensor::zeros(&[2]));
    }
}
