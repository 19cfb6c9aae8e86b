//! Accuracy and macro-F1 over parsed predictions.
//!
//! Macro-F1 averages over every label of the space, including labels with no
//! support. Any 0/0 ratio counts as 0, and an unparseable prediction is a
//! false negative for its gold class and a false positive for none.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, LabelSpace};
use crate::prompting::ParsedPrediction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: EmotionLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn check_lengths(preds: &[ParsedPrediction], golds: &[EmotionLabel]) -> Result<()> {
    if preds.len() != golds.len() {
        return Err(Error::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::Empty("predictions"));
    }
    Ok(())
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn accuracy(preds: &[ParsedPrediction], golds: &[EmotionLabel]) -> Result<f64> {
    check_lengths(preds, golds)?;
    let hits = preds
        .iter()
        .zip(golds)
        .filter(|(p, g)| p.label() == Some(*g))
        .count();
    Ok(ratio(hits, golds.len()))
}

pub fn per_class(
    preds: &[ParsedPrediction],
    golds: &[EmotionLabel],
    space: &LabelSpace,
) -> Result<Vec<ClassMetrics>> {
    check_lengths(preds, golds)?;
    let n = space.len();
    let (mut tp, mut fp, mut fn_) = (vec![0usize; n], vec![0usize; n], vec![0usize; n]);
    for (pred, gold) in preds.iter().zip(golds) {
        let g = space
            .index_of(gold)
            .ok_or_else(|| Error::UnknownLabel(gold.to_string()))?;
        match pred.label().and_then(|l| space.index_of(l)) {
            Some(p) if p == g => tp[g] += 1,
            Some(p) => {
                fp[p] += 1;
                fn_[g] += 1;
            }
            None => fn_[g] += 1,
        }
    }
    Ok((0..n)
        .map(|i| {
            let precision = ratio(tp[i], tp[i] + fp[i]);
            let recall = ratio(tp[i], tp[i] + fn_[i]);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                label: space.labels()[i].clone(),
                precision,
                recall,
                f1,
                support: tp[i] + fn_[i],
            }
        })
        .collect())
}

pub fn macro_f1(
    preds: &[ParsedPrediction],
    golds: &[EmotionLabel],
    space: &LabelSpace,
) -> Result<f64> {
    let classes = per_class(preds, golds, space)?;
    Ok(classes.iter().map(|c| c.f1).sum::<f64>() / classes.len() as f64)
}

pub fn evaluate(
    preds: &[ParsedPrediction],
    golds: &[EmotionLabel],
    space: &LabelSpace,
) -> Result<Metrics> {
    let per_class = per_class(preds, golds, space)?;
    let macro_f1 = per_class.iter().map(|c| c.f1).sum::<f64>() / per_class.len() as f64;
    Ok(Metrics {
        accuracy: accuracy(preds, golds)?,
        macro_f1,
        per_class,
    })
}
