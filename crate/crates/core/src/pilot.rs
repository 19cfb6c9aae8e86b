//! Similarity-binned accuracy for fixed demonstration sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub correct: usize,
    /// `None` for an empty bin.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotObservation {
    pub set_index: usize,
    pub query_id: String,
    pub similarity: f64,
    pub correct: bool,
}

/// Equal-width bins over [-1, 1]; the last bin is closed on the right.
pub fn bin_edges(bins: usize) -> Result<Vec<(f64, f64)>> {
    if bins == 0 {
        return Err(Error::out_of_range("bins", "must be at least 1"));
    }
    let width = 2.0 / bins as f64;
    Ok((0..bins)
        .map(|i| {
            let lower = -1.0 + i as f64 * width;
            let upper = if i + 1 == bins { 1.0 } else { -1.0 + (i + 1) as f64 * width };
            (lower, upper)
        })
        .collect())
}

pub fn bin_index(similarity: f64, bins: usize) -> usize {
    let pos = ((similarity.clamp(-1.0, 1.0) + 1.0) / 2.0 * bins as f64).floor() as usize;
    pos.min(bins - 1)
}

pub fn aggregate(observations: &[PilotObservation], bins: usize) -> Result<Vec<PilotBin>> {
    let edges = bin_edges(bins)?;
    let mut out: Vec<PilotBin> = edges
        .into_iter()
        .map(|(lower, upper)| PilotBin {
            lower,
            upper,
            count: 0,
            correct: 0,
            accuracy: None,
        })
        .collect();
    for obs in observations {
        let bin = &mut out[bin_index(obs.similarity, bins)];
        bin.count += 1;
        bin.correct += usize::from(obs.correct);
    }
    for bin in &mut out {
        if bin.count > 0 {
            bin.accuracy = Some(bin.correct as f64 / bin.count as f64);
        }
    }
    Ok(out)
}
