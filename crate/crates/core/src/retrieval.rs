//! Exact cosine-similarity retrieval of demonstrations.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::{AuxStore, EmotionVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredNeighbor {
    pub sample_id: String,
    pub score: f64,
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Cosine similarity of two slices. Summation runs in index order for every
/// term, so `cosine_slices(u, v) == cosine_slices(v, u)` bit for bit.
pub fn cosine_slices(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let nu = dot(u, u);
    let nv = dot(v, v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateVector);
    }
    let c = dot(u, v) / (nu.sqrt() * nv.sqrt());
    Ok(c.clamp(-1.0, 1.0))
}

pub fn cosine(u: &EmotionVector, v: &EmotionVector) -> Result<f64> {
    cosine_slices(u.as_slice(), v.as_slice())
}

/// Heap entry ordered so the *worst* retained neighbor sits on top: lower
/// score is greater, and among equal scores the larger id is greater.
struct Worst<'a> {
    score: f64,
    id: &'a str,
}

impl PartialEq for Worst<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Worst<'_> {}

impl PartialOrd for Worst<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Worst<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| self.id.cmp(other.id))
    }
}

/// Ranking order of results: score descending, then id ascending.
pub fn rank_order(a: &ScoredNeighbor, b: &ScoredNeighbor) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.sample_id.cmp(&b.sample_id))
}

/// The `k1` candidates most similar to `query`, best first. A zero-norm
/// candidate is an error rather than a zero score.
pub fn top_k_among<'a, I>(query: &EmotionVector, candidates: I, k1: usize) -> Result<Vec<ScoredNeighbor>>
where
    I: IntoIterator<Item = (&'a str, &'a EmotionVector)>,
{
    if k1 == 0 {
        return Err(Error::out_of_range("k1", "must be at least 1"));
    }
    let q = query.as_slice();
    let qn = dot(q, q);
    if qn == 0.0 {
        return Err(Error::DegenerateVector);
    }
    let qn = qn.sqrt();

    let mut heap: BinaryHeap<Worst<'a>> = BinaryHeap::with_capacity(k1 + 1);
    let mut seen_any = false;
    for (id, vec) in candidates {
        seen_any = true;
        let v = vec.as_slice();
        if v.len() != q.len() {
            return Err(Error::DimensionMismatch {
                left: q.len(),
                right: v.len(),
            });
        }
        let vn = dot(v, v);
        if vn == 0.0 {
            return Err(Error::InvalidRecord {
                id: id.to_string(),
                message: "degenerate vector: zero norm".into(),
            });
        }
        let score = (dot(q, v) / (qn * vn.sqrt())).clamp(-1.0, 1.0);
        let entry = Worst { score, id };
        if heap.len() < k1 {
            heap.push(entry);
        } else if let Some(top) = heap.peek() {
            if entry < *top {
                heap.pop();
                heap.push(entry);
            }
        }
    }
    if !seen_any {
        return Err(Error::EmptyPool);
    }
    let mut out: Vec<ScoredNeighbor> = heap
        .into_iter()
        .map(|w| ScoredNeighbor {
            sample_id: w.id.to_string(),
            score: w.score,
        })
        .collect();
    out.sort_by(rank_order);
    Ok(out)
}

/// Top-`k1` retrieval over every record of `store` except `exclude_ids`.
pub fn top_k_similar(
    query: &EmotionVector,
    store: &AuxStore,
    k1: usize,
    exclude_ids: &HashSet<String>,
) -> Result<Vec<ScoredNeighbor>> {
    top_k_among(
        query,
        store
            .records()
            .filter(|r| !exclude_ids.contains(&r.sample_id))
            .map(|r| (r.sample_id.as_str(), &r.vector)),
        k1,
    )
}
