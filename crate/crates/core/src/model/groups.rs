use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-overlapping partition of `p` nodes into `g` sensitive groups.
///
/// Labels are dense integers `0..g`. Every group has at least two members, so
/// the within-group pair count `p_a^2 - p_a` is never zero, and `g >= 2` since
/// the bias metrics compare distinct groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAssignment {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl GroupAssignment {
    pub fn new(labels: Vec<usize>, groups: usize) -> Result<Self> {
        if groups < 2 {
            return Err(Error::InvalidGroups(format!(
                "need at least 2 groups, got {groups}"
            )));
        }
        let mut sizes = vec![0usize; groups];
        for (i, &l) in labels.iter().enumerate() {
            if l >= groups {
                return Err(Error::InvalidGroups(format!(
                    "node {i} has label {l}, outside 0..{groups}"
                )));
            }
            sizes[l] += 1;
        }
        if let Some((a, &sz)) = sizes.iter().enumerate().find(|(_, &s)| s < 2) {
            return Err(Error::InvalidGroups(format!(
                "group {a} has {sz} member(s); every group needs at least 2"
            )));
        }
        Ok(Self { labels, sizes })
    }

    /// Infers `g` as one more than the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let g = labels.iter().copied().max().map_or(0, |m| m + 1);
        Self::new(labels, g)
    }

    /// Maps arbitrary labels to `0..g` in sorted order. Labels that all parse
    /// as integers are sorted numerically, otherwise lexicographically.
    /// Returns the assignment and the original label of each group index.
    pub fn from_raw_labels<S: AsRef<str>>(raw: &[S]) -> Result<(Self, Vec<String>)> {
        let trimmed: Vec<&str> = raw.iter().map(|s| s.as_ref().trim()).collect();
        let numeric: Option<Vec<i64>> = trimmed.iter().map(|s| s.parse::<i64>().ok()).collect();
        let (labels, names) = match numeric {
            Some(nums) => {
                let distinct: Vec<i64> = nums.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
                let labels = nums
                    .iter()
                    .map(|v| distinct.binary_search(v).expect("present"))
                    .collect();
                (labels, distinct.iter().map(|v| v.to_string()).collect())
            }
            None => {
                let distinct: Vec<&str> = trimmed.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
                let labels = trimmed
                    .iter()
                    .map(|v| distinct.binary_search(v).expect("present"))
                    .collect();
                (labels, distinct.iter().map(|v| v.to_string()).collect::<Vec<_>>())
            }
        };
        let g = names.len();
        Ok((Self::new(labels, g)?, names))
    }

    /// Node count `p`.
    pub fn p(&self) -> usize {
        self.labels.len()
    }

    /// Group count `g`.
    pub fn g(&self) -> usize {
        self.sizes.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    /// Group sizes `p_a`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, a: usize) -> usize {
        self.sizes[a]
    }

    /// The 0/1 membership vector `z_a`.
    pub fn indicator(&self, a: usize) -> Result<Vec<f64>> {
        if a >= self.g() {
            return Err(Error::GroupOutOfRange {
                index: a,
                groups: self.g(),
            });
        }
        Ok(self
            .labels
            .iter()
            .map(|&l| if l == a { 1.0 } else { 0.0 })
            .collect())
    }

    pub fn members(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == a)
            .map(|(i, _)| i)
    }

    pub fn same_group(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    /// Applies a node relabelling: node `i` of the result is node `perm[i]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                actual: perm.len(),
            });
        }
        Self::new(perm.iter().map(|&k| self.labels[k]).collect(), self.g())
    }
}
