//! Deterministic synthetic fixture: corpus, emotion and semantic stores,
//! a scripted reply table and a ready-to-run config.
//!
//! Vectors are noisy copies of per-label prototypes; probabilities are a
//! softmax over prototype similarities, so the auxiliary argmax is right
//! most of the time but not always.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use eicl_core::{AuxStore, Corpus, EmotionLabel, LabelSpace, Sample};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, RunError};

pub const DEFAULT_SEED: u64 = 20240611;

/// Labels shared by corpus and emotion store.
pub const ALIGNED: [&str; 8] = [
    "afraid", "angry", "anxious", "excited", "grateful", "joyful", "proud", "sad",
];
/// Corpus-only label, dropped by alignment.
pub const CORPUS_ONLY: &str = "nostalgic";
/// Emotion-store labels, deliberately in a different order.
pub const AUX: [&str; 10] = [
    "joyful", "sad", "angry", "neutral", "afraid", "surprised", "proud", "anxious", "grateful",
    "excited",
];

const DIM: usize = 16;
const SEMANTIC_DIM: usize = 12;
const TRAIN_PER_LABEL: usize = 70;
const TEST_PER_LABEL: usize = 15;
const TRAIN_CORPUS_ONLY: usize = 40;
const TEST_CORPUS_ONLY: usize = 10;
const VECTOR_NOISE: f64 = 1.0;
const LOGIT_SCALE: f64 = 6.0;
const LOGIT_NOISE: f64 = 1.5;

const SUBJECTS: [&str; 8] = [
    "the interview",
    "my sister's wedding",
    "the storm last night",
    "our old neighborhood",
    "the exam results",
    "the new job",
    "the hospital visit",
    "the team's final match",
];

fn phrases(label: &str) -> [&'static str; 3] {
    match label {
        "afraid" => ["I was terrified about {}.", "{} scared me half to death.", "I could not sleep, {} frightened me."],
        "angry" => ["I am furious about {}.", "{} made my blood boil.", "Honestly, {} was infuriating."],
        "anxious" => ["I keep worrying about {}.", "{} has me on edge all week.", "My stomach is in knots over {}."],
        "excited" => ["I can't wait for {}!", "{} is going to be amazing.", "Counting the hours until {}!"],
        "grateful" => ["I am so thankful for {}.", "{} reminded me how lucky I am.", "Big thanks to everyone for {}."],
        "joyful" => ["{} made me so happy.", "I was smiling all day after {}.", "Pure delight, {}."],
        "proud" => ["I nailed {} and I'm proud of it.", "{} showed what we can do.", "So proud of how {} went."],
        "sad" => ["{} left me heartbroken.", "I cried after {}.", "Everything feels grey since {}."],
        _ => ["I keep thinking back to {}.", "{} reminds me of simpler times.", "I miss the days before {}."],
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn round(x: f64, places: i32) -> f64 {
    let s = 10f64.powi(places);
    (x * s).round() / s
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub corpus: Corpus,
    pub emotion: AuxStore,
    pub semantic: AuxStore,
    /// Scripted replies keyed by test id.
    pub script: BTreeMap<String, String>,
    pub config: serde_json::Value,
}

pub fn generate(seed: u64) -> Result<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prototypes: Vec<Vec<f64>> = (0..AUX.len())
        .map(|_| unit((0..DIM).map(|_| gaussian(&mut rng)).collect()))
        .collect();
    let aux_space = LabelSpace::from_strs("emotion", &AUX)?;
    // the corpus-only label sits between its two nearest aux neighbors
    let proto_of = |label: &str| -> Vec<f64> {
        match aux_space.iter().position(|l| l.as_str() == label) {
            Some(i) => prototypes[i].clone(),
            None => {
                let (a, b) = (&prototypes[1], &prototypes[3]);
                unit(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
        }
    };

    let mut plan: Vec<(&str, bool)> = Vec::new();
    for label in ALIGNED {
        plan.extend(std::iter::repeat_n((label, true), TRAIN_PER_LABEL));
        plan.extend(std::iter::repeat_n((label, false), TEST_PER_LABEL));
    }
    plan.extend(std::iter::repeat_n((CORPUS_ONLY, true), TRAIN_CORPUS_ONLY));
    plan.extend(std::iter::repeat_n((CORPUS_ONLY, false), TEST_CORPUS_ONLY));
    plan.shuffle(&mut rng);

    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut emotion = AuxStore::new(aux_space.clone(), DIM);
    emotion.set_metadata("producer", "eicl synth".into());
    emotion.set_metadata("pooling", "none (synthetic prototypes)".into());
    let semantic_space = LabelSpace::from_strs("semantic", &["negative", "positive"])?;
    let mut semantic = AuxStore::new(semantic_space, SEMANTIC_DIM);
    semantic.set_metadata("producer", "eicl synth".into());
    let semantic_mix: Vec<Vec<f64>> = (0..SEMANTIC_DIM)
        .map(|_| (0..DIM).map(|_| gaussian(&mut rng)).collect())
        .collect();

    for (label, is_train) in plan {
        let split = if is_train { &mut train } else { &mut test };
        let id = format!("{}-{:04}", if is_train { "tr" } else { "te" }, split.len() + 1);
        let options = phrases(label);
        let sentence = options[rng.random_range(0..options.len())];
        let subject = SUBJECTS[rng.random_range(0..SUBJECTS.len())];
        let mut text = sentence.replacen("{}", subject, 1);
        if let Some(first) = text.get(..1) {
            text = first.to_uppercase() + &text[1..];
        }
        split.push(Sample {
            id: id.clone(),
            text,
            gold: EmotionLabel::new(label)?,
        });

        let proto = proto_of(label);
        let vector: Vec<f64> = proto
            .iter()
            .map(|x| round(x + VECTOR_NOISE * gaussian(&mut rng) / (DIM as f64).sqrt(), 4))
            .collect();
        let vn = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        let logits: Vec<f64> = prototypes
            .iter()
            .map(|p| {
                let cos = p.iter().zip(&vector).map(|(a, b)| a * b).sum::<f64>() / vn;
                LOGIT_SCALE * cos + LOGIT_NOISE * gaussian(&mut rng)
            })
            .collect();
        let probs: Vec<f64> = softmax(&logits).into_iter().map(|p| round(p, 6)).collect();
        emotion.insert(id.clone(), vector.clone(), probs)?;

        // semantic vectors: a fixed random projection plus heavy noise
        let sv: Vec<f64> = semantic_mix
            .iter()
            .map(|row| {
                let proj = row.iter().zip(&vector).map(|(a, b)| a * b).sum::<f64>();
                round(0.4 * proj + gaussian(&mut rng), 4)
            })
            .collect();
        semantic.insert(id, sv, vec![0.5, 0.5])?;
    }

    let mut script = BTreeMap::new();
    for s in &test {
        let roll: f64 = rng.random();
        let other = ALIGNED[rng.random_range(0..ALIGNED.len())];
        let reply = if roll < 0.45 {
            s.gold.to_string()
        } else if roll < 0.6 {
            format!("The emotion is {}.", s.gold.as_str().to_uppercase())
        } else if roll < 0.85 {
            other.to_string()
        } else if roll < 0.93 {
            "I cannot tell from this text.".to_string()
        } else {
            format!("{} or {}", s.gold, other)
        };
        script.insert(s.id.clone(), reply);
    }

    let space = {
        let mut labels: Vec<&str> = ALIGNED.to_vec();
        labels.push(CORPUS_ONLY);
        labels.sort_unstable();
        LabelSpace::from_strs("corpus", &labels)?
    };
    let corpus = Corpus::new("corpus", space, train, test)?;
    let config = serde_json::json!({
        "name": "synthetic",
        "corpus": "corpus.jsonl",
        "emotion_store": "emotion_store.jsonl",
        "semantic_store": "semantic_store.jsonl",
        "provider": { "kind": "mock", "mock": "echo-first-possible" },
        "seed": seed,
        "output_dir": "out"
    });
    Ok(Fixture {
        corpus,
        emotion,
        semantic,
        script,
        config,
    })
}

impl Fixture {
    /// File name and contents of every fixture file.
    pub fn files(&self) -> Vec<(&'static str, Vec<u8>)> {
        let mut corpus = Vec::new();
        self.corpus.write_jsonl(&mut corpus).expect("in-memory write");
        let mut emotion = Vec::new();
        self.emotion.write_jsonl(&mut emotion).expect("in-memory write");
        let mut semantic = Vec::new();
        self.semantic.write_jsonl(&mut semantic).expect("in-memory write");
        let mut script = serde_json::to_vec_pretty(&self.script).expect("script serializes");
        script.push(b'\n');
        let mut config = serde_json::to_vec_pretty(&self.config).expect("config serializes");
        config.push(b'\n');
        vec![
            ("corpus.jsonl", corpus),
            ("emotion_store.jsonl", emotion),
            ("semantic_store.jsonl", semantic),
            ("script.json", script),
            ("config.json", config),
        ]
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in self.files() {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| RunError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Directory of the fixture shipped with this crate.
pub fn shipped_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic")
}
