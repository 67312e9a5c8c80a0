//! Conversion of arbitrary-arity trees to strictly binary form.
//!
//! Nodes with more than two children are folded into a chain of synthetic
//! nodes tagged `@<tag>`; the original node keeps its tag and label, the
//! synthetic nodes carry no label.  Unary chains collapse onto the child,
//! keeping the child's tag; a label on the collapsed parent survives only if
//! the child has none.  Binary trees are a fixed point.

use super::sexpr::{RawKind, RawTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinarizeDirection {
    /// Fold extra children to the right: `(X a b c)` → `(X a (@X b c))`.
    Right,
    /// Fold extra children to the left: `(X a b c)` → `(X (@X a b) c)`.
    Left,
}

impl BinarizeDirection {
    pub fn parse(s: &str) -> Option<BinarizeDirection> {
        match s.to_ascii_lowercase().as_str() {
            "right" => Some(BinarizeDirection::Right),
            "left" => Some(BinarizeDirection::Left),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BinarizeDirection::Right => "right",
            BinarizeDirection::Left => "left",
        }
    }
}

pub fn binarize(tree: &RawTree, dir: BinarizeDirection) -> RawTree {
    match &tree.kind {
        RawKind::Word(_) => tree.clone(),
        RawKind::Children(cs) => {
            let kids: Vec<RawTree> = cs.iter().map(|c| binarize(c, dir)).collect();
            match kids.len() {
                0 => unreachable!("parser admits no childless inner nodes"),
                1 => {
                    // Unary collapse: the child wins the tag; the parent's
                    // label survives only when the child carries none.
                    let mut child = kids.into_iter().next().unwrap();
                    if child.label.is_none() {
                        child.label = tree.label;
                    }
                    child
                }
                2 => {
                    let mut kids = kids;
                    let right = kids.pop().unwrap();
                    let left = kids.pop().unwrap();
                    RawTree {
                        tag: tree.tag.clone(),
                        label: tree.label,
                        kind: RawKind::Children(vec![left, right]),
                    }
                }
                _ => {
                    let synth = format!("@{}", tree.tag);
                    let folded = match dir {
                        BinarizeDirection::Right => {
                            let mut iter = kids.into_iter().rev();
                            let mut acc = iter.next().unwrap();
                            for left in iter {
                                acc = RawTree {
                                    tag: synth.clone(),
                                    label: None,
                                    kind: RawKind::Children(vec![left, acc]),
                                };
                            }
                            acc
                        }
                        BinarizeDirection::Left => {
                            let mut iter = kids.into_iter();
                            let mut acc = iter.next().unwrap();
                            for right in iter {
                                acc = RawTree {
                                    tag: synth.clone(),
                                    label: None,
                                    kind: RawKind::Children(vec![acc, right]),
                                };
                            }
                            acc
                        }
                    };
                    // The top of the fold is the original node.
                    RawTree {
                        tag: tree.tag.clone(),
                        label: tree.label,
                        kind: folded.kind,
                    }
                }
            }
        }
    }
}
