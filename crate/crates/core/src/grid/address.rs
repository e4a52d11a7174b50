use serde::{Deserialize, Serialize};
use std::fmt;

/// Path from the root: the i-th entry is the child index taken at level i+1.
///
/// Lexicographic order on addresses is left-to-right order on disjoint cells.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellAddress(Vec<u8>);

impl CellAddress {
    pub fn root() -> Self {
        CellAddress(Vec::new())
    }

    pub fn new(digits: Vec<u8>) -> Self {
        CellAddress(digits)
    }

    pub fn from_slice(digits: &[u8]) -> Self {
        CellAddress(digits.to_vec())
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn child(&self, d: u8) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(d);
        CellAddress(v)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(CellAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn prefix(&self, k: usize) -> Self {
        CellAddress(self.0[..k.min(self.0.len())].to_vec())
    }

    /// Ancestor-or-self test.
    pub fn is_prefix_of(&self, other: &CellAddress) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn is_strict_prefix_of(&self, other: &CellAddress) -> bool {
        other.0.len() > self.0.len() && self.is_prefix_of(other)
    }

    pub fn common_prefix_len(&self, other: &CellAddress) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    /// Smallest address greater than every descendant of `self`, if one exists.
    pub fn subtree_end(&self) -> Option<Self> {
        let mut v = self.0.clone();
        while let Some(last) = v.pop() {
            if last < u8::MAX {
                v.push(last + 1);
                return Some(CellAddress(v));
            }
        }
        None
    }
}

impl From<Vec<u8>> for CellAddress {
    fn from(v: Vec<u8>) -> Self {
        CellAddress(v)
    }
}

impl fmt::Display for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for CellAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
