//! Lexicographic enumeration of k-subsets of `0..n`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Strictly increasing predictor indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetCandidate(Vec<usize>);

impl SubsetCandidate {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let increasing = indices.windows(2).all(|w| w[0] < w[1]);
        if !increasing || indices.last().is_some_and(|&i| i >= n) {
            return Err(Error::Dimension(format!(
                "subset {indices:?} is not strictly increasing within 0..{n}"
            )));
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Iterator over k-subsets in lexicographic order, optionally starting mid-stream.
#[derive(Debug, Clone)]
pub struct KSubsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl KSubsets {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::InvalidSparsity { k, max: n });
        }
        Ok(Self {
            n,
            current: Some((0..k).collect()),
        })
    }

    /// Starts at the subset of lexicographic rank `rank`.
    pub fn starting_at(n: usize, k: usize, rank: u128) -> Result<Self> {
        let mut it = Self::new(n, k)?;
        it.current = unrank(n, k, rank);
        Ok(it)
    }

    /// Advances `s` to its lexicographic successor; false when `s` was the last.
    pub fn advance(s: &mut [usize], n: usize) -> bool {
        let k = s.len();
        let Some(i) = (0..k).rev().find(|&i| s[i] < n - k + i) else {
            return false;
        };
        s[i] += 1;
        for j in i + 1..k {
            s[j] = s[j - 1] + 1;
        }
        true
    }
}

impl Iterator for KSubsets {
    type Item = SubsetCandidate;

    fn next(&mut self) -> Option<SubsetCandidate> {
        let cur = self.current.as_mut()?;
        let out = cur.clone();
        if !Self::advance(cur, self.n) {
            self.current = None;
        }
        Some(SubsetCandidate(out))
    }
}

/// The subset at lexicographic position `rank`, or `None` past the end.
pub fn unrank(n: usize, k: usize, mut rank: u128) -> Option<Vec<usize>> {
    if rank >= binomial(n, k) {
        return None;
    }
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let remaining = k - slot - 1;
        let mut v = next;
        loop {
            // Subsets whose `slot` entry is `v`.
            let block = binomial(n - v - 1, remaining);
            if rank < block {
                break;
            }
            rank -= block;
            v += 1;
        }
        out.push(v);
        next = v + 1;
    }
    Some(out)
}

/// All `C(n, k)` subsets in lexicographic order.
pub fn enumerate_subsets(n: usize, k: usize) -> Result<KSubsets> {
    KSubsets::new(n, k)
}
