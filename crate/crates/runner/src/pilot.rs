//! Similarity-vs-accuracy pilot: fixed demonstration sets, queries binned
//! by their maximum cosine to the set.

use std::collections::HashMap;

use eicl_core::metrics;
use eicl_core::pilot::{aggregate, PilotBin, PilotObservation};
use eicl_core::retrieval::{cosine, rank_order};
use eicl_core::{ParsedPrediction, Sample, ScoredNeighbor};
use eicl_gateway::Gateway;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Result, RunError};
use crate::experiment::{dispatch, prepare, registry, Plan};
use crate::inputs::Inputs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotReport {
    pub config: serde_json::Value,
    pub example_sets: Vec<Vec<String>>,
    pub total_queries: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub bins: Vec<PilotBin>,
    pub observations: Vec<PilotObservation>,
}

/// Request tag for one query answered with one example set.
pub fn pilot_tag(set_index: usize, query_id: &str) -> String {
    format!("set{set_index}/{query_id}")
}

/// Example sets from the config, or seeded disjoint draws from train.
pub fn example_sets(cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<Vec<String>>> {
    if let Some(sets) = &cfg.pilot.example_sets {
        let train: std::collections::HashSet<&str> =
            inputs.corpus.train().iter().map(|s| s.id.as_str()).collect();
        for id in sets.iter().flatten() {
            if !train.contains(id.as_str()) {
                return Err(RunError::Config(format!("pilot example `{id}` is not a train sample")));
            }
        }
        if sets.is_empty() || sets.iter().any(Vec::is_empty) {
            return Err(RunError::Config("pilot example sets must be non-empty".into()));
        }
        return Ok(sets.clone());
    }
    let seed = cfg
        .seed
        .ok_or_else(|| RunError::Config("pilot without explicit example_sets requires a seed".into()))?;
    let needed = cfg.pilot.sets * cfg.pilot.set_size;
    let mut ids: Vec<&str> = inputs.corpus.train().iter().map(|s| s.id.as_str()).collect();
    if ids.len() < needed {
        return Err(RunError::Config(format!(
            "pilot needs {needed} train samples, corpus has {}",
            ids.len()
        )));
    }
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(ids[..needed]
        .chunks(cfg.pilot.set_size)
        .map(|c| c.iter().map(|s| s.to_string()).collect())
        .collect())
}

/// `n` evenly spaced positions in `0..len`, always including both ends.
fn spread(len: usize, n: usize) -> Vec<usize> {
    if n >= len {
        return (0..len).collect();
    }
    if n == 1 {
        return vec![0];
    }
    (0..n).map(|i| i * (len - 1) / (n - 1)).collect()
}

pub async fn run_pilot(cfg: &RunConfig, inputs: &Inputs, gateway: &Gateway) -> Result<PilotReport> {
    let bounds = cfg.check_params();
    if !bounds.is_empty() {
        return Err(RunError::Config(bounds.join("; ")));
    }
    let plan = Plan::resolve(cfg, inputs)?;
    let registry = registry(cfg)?;
    let template = registry.get(&plan.template_id)?;
    let sets = example_sets(cfg, inputs)?;
    let train: HashMap<&str, &Sample> = inputs.corpus.train().iter().map(|s| (s.id.as_str(), s)).collect();

    let mut prepared = Vec::new();
    let mut meta = Vec::new();
    for (set_index, set) in sets.iter().enumerate() {
        let mut ranked: Vec<(f64, &Sample, Vec<ScoredNeighbor>)> = Vec::new();
        for q in inputs.corpus.test() {
            let qv = &inputs.emotion.get_record(&q.id)?.vector;
            let mut scored = set
                .iter()
                .map(|id| {
                    Ok(ScoredNeighbor {
                        sample_id: id.clone(),
                        score: cosine(qv, &inputs.emotion.get_record(id)?.vector)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            scored.sort_by(rank_order);
            ranked.push((scored[0].score, q, scored));
        }
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
        let picks = spread(ranked.len(), cfg.pilot.queries_per_set.unwrap_or(ranked.len()));
        for i in picks {
            let (similarity, q, scored) = &ranked[i];
            let demos: Vec<(Sample, f64)> = scored
                .iter()
                .map(|n| ((*train[n.sample_id.as_str()]).clone(), n.score))
                .collect();
            let mut p = prepare(cfg, inputs, &plan, template, q, &demos)?;
            p.request.request_tag = pilot_tag(set_index, &q.id);
            prepared.push(p);
            meta.push((set_index, *similarity));
        }
    }

    let records = dispatch(prepared, inputs, &plan.template_id, gateway).await;
    let observations: Vec<PilotObservation> = records
        .iter()
        .zip(&meta)
        .map(|(r, (set_index, similarity))| PilotObservation {
            set_index: *set_index,
            query_id: r.query_id.clone(),
            similarity: *similarity,
            correct: r.correct(),
        })
        .collect();
    let preds: Vec<ParsedPrediction> = records.iter().map(|r| r.prediction.clone()).collect();
    let golds: Vec<_> = records.iter().map(|r| r.gold.clone()).collect();
    let m = metrics::evaluate(&preds, &golds, &inputs.aligned)?;
    Ok(PilotReport {
        config: cfg.snapshot(),
        example_sets: sets,
        total_queries: observations.len(),
        accuracy: m.accuracy,
        macro_f1: m.macro_f1,
        bins: aggregate(&observations, cfg.pilot.bins)?,
        observations,
    })
}
