//! Token vocabularies with a reserved unknown slot at index 0.
//!
//! Checkpoints persist a vocabulary as its plain token list and rebuild the
//! lookup index through [`Vocab::from_tokens`].

use std::collections::HashMap;

pub const UNK_TOKEN: &str = "<unk>";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Index of the unknown token (always 0).
    pub const UNK: usize = 0;

    pub fn new() -> Vocab {
        let mut v = Vocab {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        v.push(UNK_TOKEN.to_string());
        v
    }

    /// Rebuilds a vocabulary from a checkpointed token list.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Vocab, String> {
        if tokens.first().map(String::as_str) != Some(UNK_TOKEN) {
            return Err(format!(
                "vocabulary must start with {UNK_TOKEN:?}, got {:?}",
                tokens.first()
            ));
        }
        let mut v = Vocab {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for t in tokens {
            if v.index.contains_key(&t) {
                return Err(format!("duplicate token {t:?} in vocabulary"));
            }
            v.push(t);
        }
        Ok(v)
    }

    fn push(&mut self, token: String) -> usize {
        let idx = self.tokens.len();
        self.index.insert(token.clone(), idx);
        self.tokens.push(token);
        idx
    }

    /// Returns the token's index, adding it if new.
    pub fn intern(&mut self, token: &str) -> usize {
        match self.index.get(token) {
            Some(&i) => i,
            None => self.push(token.to_string()),
        }
    }

    /// Returns the token's index, or [`Vocab::UNK`] if unseen.
    pub fn lookup(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(Vocab::UNK)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn get(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

impl Default for Vocab {
    fn default() -> Vocab {
        Vocab::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unk_is_reserved_at_zero() {
        let v = Vocab::new();
        assert_eq!(v.len(), 1);
        assert_eq!(v.get(Vocab::UNK), UNK_TOKEN);
        assert_eq!(v.lookup("anything"), Vocab::UNK);
    }

    #[test]
    fn intern_is_idempotent_and_ordered() {
        let mut v = Vocab::new();
        let a = v.intern("the");
        let b = v.intern("film");
        assert_eq!(v.intern("the"), a);
        assert_eq!((a, b), (1, 2));
        assert_eq!(v.lookup("film"), 2);
        assert_eq!(v.lookup("unknown"), Vocab::UNK);
    }

    #[test]
    fn from_tokens_round_trips() {
        let mut v = Vocab::new();
        v.intern("a");
        v.intern("b");
        let rebuilt = Vocab::from_tokens(v.tokens().to_vec()).unwrap();
        assert_eq!(rebuilt, v);
        assert_eq!(rebuilt.lookup("b"), 2);
    }

    #[test]
    fn from_tokens_rejects_bad_lists() {
        assert!(Vocab::from_tokens(vec!["a".into()]).is_err());
        assert!(
            Vocab::from_tokens(vec![UNK_TOKEN.into(), "a".into(), "a".into()]).is_err()
        );
    }
}
