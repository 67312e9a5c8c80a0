//! Parenthesized constituency trees.
//!
//! Grammar (whitespace-separated tokens, parens reserved):
//!
//! ```text
//! tree  := '(' tag word ')'          leaf
//!        | '(' tag tree+ ')'         inner node (any arity)
//! tag   := token, optionally suffixed '#<label>' with an integer label
//! ```
//!
//! `#` inside a tag token is reserved for the label suffix.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("byte offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// A tree as written: string tags and words, any arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTree {
    pub tag: String,
    /// Supervision attached to this node via the `tag#label` suffix.
    pub label: Option<usize>,
    pub kind: RawKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawKind {
    Word(String),
    Children(Vec<RawTree>),
}

impl RawTree {
    pub fn leaf(tag: &str, word: &str) -> RawTree {
        RawTree {
            tag: tag.to_string(),
            label: None,
            kind: RawKind::Word(word.to_string()),
        }
    }

    pub fn inner(tag: &str, children: Vec<RawTree>) -> RawTree {
        RawTree {
            tag: tag.to_string(),
            label: None,
            kind: RawKind::Children(children),
        }
    }

    pub fn with_label(mut self, label: usize) -> RawTree {
        self.label = Some(label);
        self
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, RawKind::Word(_))
    }

    /// Every inner node has exactly two children.
    pub fn is_binary(&self) -> bool {
        match &self.kind {
            RawKind::Word(_) => true,
            RawKind::Children(cs) => cs.len() == 2 && cs.iter().all(|c| c.is_binary()),
        }
    }

    /// Leaf words, left to right.
    pub fn leaf_words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.kind {
            RawKind::Word(w) => out.push(w),
            RawKind::Children(cs) => {
                for c in cs {
                    c.collect_words(out);
                }
            }
        }
    }

    pub fn num_leaves(&self) -> usize {
        match &self.kind {
            RawKind::Word(_) => 1,
            RawKind::Children(cs) => cs.iter().map(RawTree::num_leaves).sum(),
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        match &self.kind {
            RawKind::Word(_) => 0,
            RawKind::Children(cs) => 1 + cs.iter().map(RawTree::depth).max().unwrap_or(0),
        }
    }

    /// Canonical single-line rendering; inverse of [`parse_sexpr`].
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.render(&mut s);
        s
    }

    fn render(&self, out: &mut String) {
        check_token(&self.tag, "tag");
        out.push('(');
        out.push_str(&self.tag);
        if let Some(l) = self.label {
            out.push('#');
            out.push_str(&l.to_string());
        }
        match &self.kind {
            RawKind::Word(w) => {
                check_token(w, "word");
                out.push(' ');
                out.push_str(w);
            }
            RawKind::Children(cs) => {
                for c in cs {
                    out.push(' ');
                    c.render(out);
                }
            }
        }
        out.push(')');
    }
}

fn check_token(tok: &str, what: &str) {
    assert!(
        !tok.is_empty()
            && !tok.contains(|c: char| c.is_whitespace() || c == '(' || c == ')')
            && !(what == "tag" && tok.contains('#')),
        "to_sexpr: {what} {tok:?} contains reserved characters"
    );
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, at: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset: at,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn token(&mut self) -> Result<(usize, &'a str), ParseError> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || b == b'(' || b == b')' {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return self.err(start, "expected a token");
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| ParseError {
                offset: start,
                message: "token is not valid UTF-8".to_string(),
            })?;
        Ok((start, s))
    }

    fn tree(&mut self) -> Result<RawTree, ParseError> {
        self.skip_ws();
        let open = self.pos;
        if self.peek() != Some(b'(') {
            return self.err(self.pos, "expected '('");
        }
        self.pos += 1;
        self.skip_ws();
        let (tag_at, tag_tok) = self.token()?;
        let (tag, label) = split_label(tag_tok).map_err(|m| ParseError {
            offset: tag_at,
            message: m,
        })?;

        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                let mut children = Vec::new();
                while self.peek() == Some(b'(') {
                    children.push(self.tree()?);
                    self.skip_ws();
                }
                if self.peek() != Some(b')') {
                    return self.err(self.pos, "expected a child subtree or ')'");
                }
                self.pos += 1;
                Ok(RawTree {
                    tag: tag.to_string(),
                    label,
                    kind: RawKind::Children(children),
                })
            }
            Some(b')') => self.err(open, format!("node {tag:?} has no word and no children")),
            Some(_) => {
                let (_, word) = self.token()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return self.err(self.pos, "leaf must contain exactly one word");
                }
                self.pos += 1;
                Ok(RawTree {
                    tag: tag.to_string(),
                    label,
                    kind: RawKind::Word(word.to_string()),
                })
            }
            None => self.err(self.pos, "unexpected end of input inside a node"),
        }
    }
}

/// Splits an optional `#<integer>` label suffix off a tag token.
fn split_label(tok: &str) -> Result<(&str, Option<usize>), String> {
    match tok.rsplit_once('#') {
        None => Ok((tok, None)),
        Some((tag, suffix)) => {
            if tag.is_empty() {
                return Err(format!("empty tag in token {tok:?}"));
            }
            match suffix.parse::<usize>() {
                Ok(l) => Ok((tag, Some(l))),
                Err(_) => Err(format!(
                    "bad label suffix {suffix:?} in token {tok:?} ('#' is reserved for integer labels)"
                )),
            }
        }
    }
}

/// Parses one tree from `text`.  Anything but trailing whitespace after the
/// closing paren is an error; offsets in errors are byte positions in `text`.
pub fn parse_sexpr(text: &str) -> Result<RawTree, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.peek().is_none() {
        return Err(ParseError {
            offset: 0,
            message: "empty input".to_string(),
        });
    }
    let tree = p.tree()?;
    p.skip_ws();
    if let Some(_) = p.peek() {
        return Err(ParseError {
            offset: p.pos,
            message: "trailing content after the tree".to_string(),
        });
    }
    Ok(tree)
}
