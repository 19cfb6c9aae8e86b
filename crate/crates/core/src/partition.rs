//! Splits the label space into possible and impossible candidates for a
//! query, from the auxiliary model's distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, LabelSpace};
use crate::labeling::ranked_indices;
use crate::store::EmotionDistribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePartition {
    /// Most probable first.
    pub possible: Vec<EmotionLabel>,
    /// In label-space order.
    pub impossible: Vec<EmotionLabel>,
}

impl CandidatePartition {
    /// Every label possible, in label-space order.
    pub fn all_possible(space: &LabelSpace) -> Self {
        CandidatePartition {
            possible: space.labels().to_vec(),
            impossible: Vec::new(),
        }
    }

    /// Possible labels then impossible ones.
    pub fn iter(&self) -> impl Iterator<Item = &EmotionLabel> {
        self.possible.iter().chain(&self.impossible)
    }
}

/// Default `k3` used when a config leaves it unset.
pub fn default_k3(n: usize) -> usize {
    n.div_ceil(4).max(1)
}

pub fn divide_candidates(
    dist: &EmotionDistribution,
    k3: usize,
    aligned: &LabelSpace,
) -> Result<CandidatePartition> {
    if dist.len() != aligned.len() {
        return Err(Error::DimensionMismatch {
            left: dist.len(),
            right: aligned.len(),
        });
    }
    if k3 < 1 || k3 > aligned.len() {
        return Err(Error::out_of_range(
            "k3",
            format!("{k3} not in [1, {}]", aligned.len()),
        ));
    }
    let ranked = ranked_indices(dist);
    let mut in_possible = vec![false; aligned.len()];
    let possible: Vec<EmotionLabel> = ranked[..k3]
        .iter()
        .map(|&i| {
            in_possible[i] = true;
            aligned.labels()[i].clone()
        })
        .collect();
    let impossible = aligned
        .iter()
        .enumerate()
        .filter(|(i, _)| !in_possible[*i])
        .map(|(_, l)| l.clone())
        .collect();
    Ok(CandidatePartition {
        possible,
        impossible,
    })
}
