//! Binary node labels.
//!
//! The root is the empty string; a node `k` has lower child `k0` and upper
//! child `k1`. The path from the root to a node is the set of its prefixes.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Text used for the empty (root) label.
pub const ROOT_TEXT: &str = "λ";

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeLabel {
    bits: Vec<bool>,
}

impl NodeLabel {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self {
            bits: bits.to_vec(),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Length of the string, i.e. the depth of the node.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_root(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_root()
    }

    /// `self` followed by `upper` (false = 0 = lower, true = 1 = upper).
    pub fn child(&self, upper: bool) -> Self {
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(upper);
        Self { bits }
    }

    pub fn parent(&self) -> Option<Self> {
        if self.is_root() {
            None
        } else {
            Some(Self::from_bits(&self.bits[..self.bits.len() - 1]))
        }
    }

    /// The length-`i` prefix.
    pub fn prefix(&self, i: usize) -> Self {
        Self::from_bits(&self.bits[..i])
    }

    /// All prefixes from the root to `self` inclusive, ordered by length.
    pub fn prefixes(&self) -> Vec<Self> {
        (0..=self.len()).map(|i| self.prefix(i)).collect()
    }

    pub fn is_prefix_of(&self, other: &Self) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn last(&self) -> Option<bool> {
        self.bits.last().copied()
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str(ROOT_TEXT);
        }
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for NodeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == ROOT_TEXT {
            return Ok(Self::root());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::MalformedInput(format!(
                    "invalid label character {other:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|bits| Self { bits })
    }
}
