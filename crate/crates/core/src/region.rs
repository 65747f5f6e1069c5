use std::ops::Range;

use crate::error::{Error, Result};

/// Sorted, duplicate-free set of qubit indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Region(Vec<usize>);

impl Region {
    pub fn new<I: IntoIterator<Item = usize>>(qubits: I) -> Self {
        let mut v: Vec<usize> = qubits.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Region(v)
    }

    pub fn range(r: Range<usize>) -> Self {
        Region(r.collect())
    }

    pub fn empty() -> Self {
        Region(Vec::new())
    }

    pub fn qubits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0.binary_search(&q).is_ok()
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::new(self.0.iter().chain(&other.0).copied())
    }

    pub fn complement(&self, n: usize) -> Region {
        Region((0..n).filter(|q| !self.contains(*q)).collect())
    }

    pub fn check(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&q) if q >= n => Err(Error::QubitOutOfRange { index: q, n }),
            _ => Ok(()),
        }
    }

    /// Errors if any two of `regions` share a qubit.
    pub fn check_disjoint(regions: &[&Region]) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for r in regions {
            for &q in &r.0 {
                if !seen.insert(q) {
                    return Err(Error::OverlappingRegions(q));
                }
            }
        }
        Ok(())
    }
}

impl From<Range<usize>> for Region {
    fn from(r: Range<usize>) -> Self {
        Region::range(r)
    }
}

impl From<Vec<usize>> for Region {
    fn from(v: Vec<usize>) -> Self {
        Region::new(v)
    }
}

impl<const N: usize> From<[usize; N]> for Region {
    fn from(v: [usize; N]) -> Self {
        Region::new(v)
    }
}
