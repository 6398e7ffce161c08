use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relabels `labels` to canonical form: the first cohort gets cluster 0 and
/// new labels are handed out in order of first appearance.
///
/// Returns the relabeled vector and, for each new label, the old label it
/// came from.
pub fn canonicalize(labels: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut old_of_new: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        let new = match old_of_new.iter().position(|&o| o == l) {
            Some(p) => p,
            None => {
                old_of_new.push(l);
                old_of_new.len() - 1
            }
        };
        out.push(new);
    }
    (out, old_of_new)
}

/// A set partition of the cohorts in canonical label form.
///
/// Labels are zero-based in memory; serialized and displayed forms are
/// one-based (cluster 1 is the cluster of the first cohort).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let (labels, old) = canonicalize(labels);
        Self { k: old.len(), labels }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
            k: n,
        }
    }

    pub fn one_cluster(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            k: usize::from(n > 0),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn labels_one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of occupied clusters.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Cohort indices of each cluster, clusters in label order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l].push(i);
        }
        blocks
    }

    pub fn is_canonical(&self) -> bool {
        let mut next = 0;
        for &l in &self.labels {
            if l > next {
                return false;
            }
            if l == next {
                next += 1;
            }
        }
        next == self.k
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.labels_one_based()
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(one_based: Vec<usize>) -> Result<Self> {
        if one_based.contains(&0) {
            return Err(Error::Format("partition labels are one-based".into()));
        }
        let zero_based: Vec<usize> = one_based.iter().map(|l| l - 1).collect();
        let p = Partition::from_labels(&zero_based);
        if p.labels != zero_based {
            return Err(Error::Format(format!("partition {one_based:?} is not canonical")));
        }
        Ok(p)
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let blocks: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| {
                let items: Vec<String> = b.iter().map(|i| (i + 1).to_string()).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        write!(f, "{}", blocks.join(" "))
    }
}
