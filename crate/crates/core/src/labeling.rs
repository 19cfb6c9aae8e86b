//! Dynamic soft labels for retrieved demonstrations.
//!
//! The auxiliary model's top-`k2` emotions for a demonstration are mixed
//! into its ground-truth label with weight `alpha`: every predicted emotion
//! other than the ground truth gets `alpha * p`, and the ground truth keeps
//! `1 - alpha * S`, where `S` sums those non-ground-truth probabilities.
//! When the ground truth is not among the predictions it is inserted with
//! the same `1 - alpha * S` weight, so the entries always sum to one.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, LabelSpace};
use crate::store::EmotionDistribution;

pub const DEFAULT_ALPHA: f64 = 0.2;
pub const DEFAULT_K2: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftLabelEntry {
    pub label: EmotionLabel,
    pub weight: f64,
}

/// Weighted labels for one demonstration, heaviest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftLabel {
    pub entries: Vec<SoftLabelEntry>,
}

impl SoftLabel {
    pub fn hard(label: EmotionLabel) -> Self {
        SoftLabel {
            entries: vec![SoftLabelEntry { label, weight: 1.0 }],
        }
    }

    pub fn weight_of(&self, label: &EmotionLabel) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| &e.label == label)
            .map(|e| e.weight)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }
}

/// Sorts `(label index, prob)` pairs by descending probability, ties by
/// ascending index.
fn by_prob_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Indices of `dist` ranked by descending probability with index tie-break.
pub(crate) fn ranked_indices(dist: &EmotionDistribution) -> Vec<usize> {
    let mut pairs: Vec<(usize, f64)> = dist.probs().iter().copied().enumerate().collect();
    pairs.sort_by(by_prob_then_index);
    pairs.into_iter().map(|(i, _)| i).collect()
}

/// The `k2` most probable emotions of a distribution over `space`.
pub fn top_k2_emotions(
    dist: &EmotionDistribution,
    space: &LabelSpace,
    k2: usize,
) -> Result<Vec<(EmotionLabel, f64)>> {
    if dist.len() != space.len() {
        return Err(Error::DimensionMismatch {
            left: dist.len(),
            right: space.len(),
        });
    }
    if k2 < 1 || k2 > space.len() {
        return Err(Error::out_of_range(
            "k2",
            format!("{k2} not in [1, {}]", space.len()),
        ));
    }
    Ok(ranked_indices(dist)
        .into_iter()
        .take(k2)
        .map(|i| (space.labels()[i].clone(), dist.probs()[i]))
        .collect())
}

/// Mixes the ground truth with the predicted emotions. Zero-weight entries
/// are dropped; the result is ordered by descending weight with ties in
/// `space` order.
pub fn build_soft_label(
    gt: &EmotionLabel,
    predicted: &[(EmotionLabel, f64)],
    alpha: f64,
    space: &LabelSpace,
) -> Result<SoftLabel> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::out_of_range("alpha", format!("{alpha} not in [0, 1)")));
    }
    let gt_index = space
        .index_of(gt)
        .ok_or_else(|| Error::UnknownLabel(gt.to_string()))?;
    let mut others: Vec<(usize, f64)> = Vec::with_capacity(predicted.len());
    for (label, p) in predicted {
        if !p.is_finite() || *p < 0.0 {
            return Err(Error::out_of_range("probability", format!("{p} for `{label}`")));
        }
        let i = space
            .index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        if i == gt_index {
            continue;
        }
        if others.iter().any(|(j, _)| *j == i) {
            return Err(Error::InvalidLabelSpace(format!("`{label}` predicted twice")));
        }
        others.push((i, *p));
    }

    let others_sum: f64 = others.iter().map(|(_, p)| p).sum();
    let gt_weight = 1.0 - alpha * others_sum;
    if gt_weight <= 0.0 {
        return Err(Error::NonPositiveGroundTruth(gt_weight));
    }

    let mut weighted: Vec<(usize, f64)> = Vec::with_capacity(others.len() + 1);
    weighted.push((gt_index, gt_weight));
    weighted.extend(
        others
            .into_iter()
            .map(|(i, p)| (i, alpha * p))
            .filter(|(_, w)| *w > 0.0),
    );
    weighted.sort_by(by_prob_then_index);

    let label = SoftLabel {
        entries: weighted
            .into_iter()
            .map(|(i, weight)| SoftLabelEntry {
                label: space.labels()[i].clone(),
                weight,
            })
            .collect(),
    };
    debug_assert!((label.total() - 1.0).abs() < 1e-9);
    Ok(label)
}
