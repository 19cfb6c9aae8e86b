//! Browser bindings for the demo page: soft labels, candidate partitions and
//! nearest-neighbor retrieval over 2-D points. Results cross the boundary as
//! JSON strings.

use eicl_core::labeling::{build_soft_label, top_k2_emotions};
use eicl_core::partition::divide_candidates;
use eicl_core::retrieval::top_k_among;
use eicl_core::{EmotionDistribution, EmotionVector, LabelSpace};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const DEMO_LABELS: [&str; 8] = [
    "afraid", "angry", "anxious", "excited", "grateful", "joyful", "proud", "sad",
];

fn space() -> LabelSpace {
    LabelSpace::from_strs("demo", &DEMO_LABELS).expect("demo labels are valid")
}

/// Scales non-negative slider weights to a distribution.
fn normalize(raw: &[f64]) -> eicl_core::Result<EmotionDistribution> {
    let total: f64 = raw.iter().map(|x| x.max(0.0)).sum();
    let probs = if total > 0.0 {
        raw.iter().map(|x| x.max(0.0) / total).collect()
    } else {
        vec![1.0 / raw.len() as f64; raw.len()]
    };
    EmotionDistribution::new(probs)
}

#[derive(Serialize)]
struct SoftLabelView<'a> {
    label: &'a str,
    weight: f64,
}

pub fn soft_label_json(raw: &[f64], gt: usize, alpha: f64, k2: usize) -> eicl_core::Result<String> {
    let space = space();
    let dist = normalize(raw)?;
    let gt = space
        .get(gt)
        .ok_or_else(|| eicl_core::Error::UnknownLabel(format!("index {gt}")))?
        .clone();
    let predicted = top_k2_emotions(&dist, &space, k2)?;
    let soft = build_soft_label(&gt, &predicted, alpha, &space)?;
    let view: Vec<SoftLabelView> = soft
        .entries
        .iter()
        .map(|e| SoftLabelView {
            label: e.label.as_str(),
            weight: e.weight,
        })
        .collect();
    Ok(serde_json::to_string(&view).expect("view serializes"))
}

pub fn partition_json(raw: &[f64], k3: usize) -> eicl_core::Result<String> {
    let dist = normalize(raw)?;
    let p = divide_candidates(&dist, k3, &space())?;
    Ok(serde_json::to_string(&p).expect("partition serializes"))
}

#[derive(Serialize)]
struct Neighbor {
    index: usize,
    score: f64,
}

/// `points` holds x, y pairs; ids are point indices.
pub fn retrieve_json(points: &[f64], qx: f64, qy: f64, k1: usize) -> eicl_core::Result<String> {
    let query = EmotionVector::new(vec![qx, qy])?;
    let vectors = points
        .chunks_exact(2)
        .map(|p| EmotionVector::new(p.to_vec()))
        .collect::<eicl_core::Result<Vec<_>>>()?;
    let ids: Vec<String> = (0..vectors.len()).map(|i| format!("{i:06}")).collect();
    let found = top_k_among(&query, ids.iter().map(String::as_str).zip(&vectors), k1)?;
    let view: Vec<Neighbor> = found
        .into_iter()
        .map(|n| Neighbor {
            index: n.sample_id.parse().expect("ids are indices"),
            score: n.score,
        })
        .collect();
    Ok(serde_json::to_string(&view).expect("neighbors serialize"))
}

fn js(r: eicl_core::Result<String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn labels() -> String {
    serde_json::to_string(&DEMO_LABELS).expect("labels serialize")
}

#[wasm_bindgen]
pub fn soft_label(raw: &[f64], gt: usize, alpha: f64, k2: usize) -> Result<String, JsError> {
    js(soft_label_json(raw, gt, alpha, k2))
}

#[wasm_bindgen]
pub fn partition(raw: &[f64], k3: usize) -> Result<String, JsError> {
    js(partition_json(raw, k3))
}

#[wasm_bindgen]
pub fn retrieve(points: &[f64], qx: f64, qy: f64, k1: usize) -> Result<String, JsError> {
    js(retrieve_json(points, qx, qy, k1))
}
