#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use eicl_core::{AuxStore, Corpus, EmotionLabel, LabelSpace, Sample};
use eicl_gateway::{ChatProvider, EchoFirstPossible, Gateway, RetryPolicy, Scripted};
use eicl_runner::fixture::shipped_dir;
use eicl_runner::{Inputs, RunConfig};

pub const STEP_LABELS: [&str; 3] = ["calm", "glad", "upset"];

pub fn shipped_config() -> RunConfig {
    RunConfig::load(shipped_dir().join("config.json")).expect("shipped config loads")
}

pub fn shipped_inputs() -> (RunConfig, Inputs) {
    let cfg = shipped_config();
    let inputs = Inputs::load(&cfg).expect("shipped fixture loads");
    (cfg, inputs)
}

pub fn gateway(provider: impl ChatProvider + 'static) -> Gateway {
    Gateway::new(Arc::new(provider), RetryPolicy::immediate(0), 4)
}

pub fn echo() -> Gateway {
    gateway(EchoFirstPossible)
}

pub fn oracle(inputs: &Inputs) -> Gateway {
    gateway(Scripted::oracle(inputs.test_golds()))
}

pub fn scripted() -> Gateway {
    let text = std::fs::read_to_string(shipped_dir().join("script.json")).unwrap();
    let table: HashMap<String, String> = serde_json::from_str(&text).unwrap();
    gateway(Scripted::new(table))
}

/// Two-dimensional pilot fixture. Every example points along +x; query `i`
/// sits at an angle spread over (0, pi), so its similarity to any example is
/// `cos(angle)`. A query's distribution peaks on its gold label iff its
/// similarity exceeds `threshold`, so the echo mock is right exactly then.
pub fn step_inputs(threshold: f64, queries: usize, examples: usize) -> (RunConfig, Inputs, Vec<f64>) {
    let space = LabelSpace::from_strs("step", &STEP_LABELS).unwrap();
    let mut store = AuxStore::new(space.clone(), 2);
    let gold = EmotionLabel::new("glad").unwrap();
    let mut train = Vec::new();
    for i in 0..examples {
        let id = format!("ex-{i}");
        store
            .insert(id.clone(), vec![1.0 + i as f64, 0.0], vec![0.1, 0.8, 0.1])
            .unwrap();
        train.push(Sample {
            id,
            text: format!("example {i}"),
            gold: gold.clone(),
        });
    }
    let mut test = Vec::new();
    let mut sims = Vec::new();
    for i in 0..queries {
        let angle = std::f64::consts::PI * (i as f64 + 0.5) / queries as f64;
        let (s, c) = angle.sin_cos();
        let id = format!("q-{i:03}");
        let probs = if c > threshold {
            vec![0.2, 0.7, 0.1]
        } else {
            vec![0.1, 0.2, 0.7]
        };
        store.insert(id.clone(), vec![c, s], probs).unwrap();
        test.push(Sample {
            id,
            text: format!("query {i}"),
            gold: gold.clone(),
        });
        sims.push(c);
    }
    let corpus = Corpus::new("step", space.clone(), train, test).unwrap();
    let inputs = Inputs::new(corpus, space, store, None).unwrap();
    let mut cfg = RunConfig {
        corpus: PathBuf::from("step.jsonl"),
        emotion_store: PathBuf::from("step_store.jsonl"),
        k2: 2,
        ..RunConfig::default()
    };
    cfg.pilot.example_sets = Some(vec![(0..examples).map(|i| format!("ex-{i}")).collect()]);
    (cfg, inputs, sims)
}
