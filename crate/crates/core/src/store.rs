//! Auxiliary-model outputs: one emotion vector and one probability
//! distribution per sample, read from a line-delimited JSON store file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::LabelSpace;

pub const DEFAULT_DIMENSION: usize = 768;

/// Tolerance on the sum of a stored distribution.
pub const DISTRIBUTION_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionVector(Vec<f64>);

impl EmotionVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRecord {
                id: String::new(),
                message: "non-finite vector entry".into(),
            });
        }
        Ok(EmotionVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Probabilities indexed by a label space's order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionDistribution(Vec<f64>);

impl EmotionDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_distribution(&probs).map_err(|message| Error::InvalidRecord {
            id: String::new(),
            message,
        })?;
        Ok(EmotionDistribution(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest probability; ties go to the lower index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }
}

fn check_distribution(probs: &[f64]) -> std::result::Result<(), String> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite()) {
        return Err(format!("non-finite probability {p}"));
    }
    if let Some(p) = probs.iter().find(|&&p| p < 0.0) {
        return Err(format!("negative probability {p}"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_SUM_TOLERANCE {
        return Err(format!("distribution sum {sum}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxRecord {
    pub sample_id: String,
    pub vector: EmotionVector,
    pub dist: EmotionDistribution,
}

/// First line of a store file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreHeader {
    pub aux_labels: Vec<String>,
    pub dimension: usize,
    /// Anything else the producer recorded (pooling choice, checkpoint, ...).
    #[serde(flatten)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreLine {
    id: String,
    vector: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AuxStore {
    aux_label_space: LabelSpace,
    dimension: usize,
    metadata: BTreeMap<String, serde_json::Value>,
    records: BTreeMap<String, AuxRecord>,
}

impl AuxStore {
    pub fn new(aux_label_space: LabelSpace, dimension: usize) -> Self {
        AuxStore {
            aux_label_space,
            dimension,
            metadata: BTreeMap::new(),
            records: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>, probs: Vec<f64>) -> Result<()> {
        let id = id.into();
        let invalid = |message: String| Error::InvalidRecord {
            id: id.clone(),
            message,
        };
        if self.records.contains_key(&id) {
            return Err(invalid("duplicate id".into()));
        }
        if vector.len() != self.dimension {
            return Err(invalid(format!(
                "vector length {} does not match dimension {}",
                vector.len(),
                self.dimension
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite vector entry".into()));
        }
        if probs.len() != self.aux_label_space.len() {
            return Err(invalid(format!(
                "{} probabilities for {} auxiliary labels",
                probs.len(),
                self.aux_label_space.len()
            )));
        }
        check_distribution(&probs).map_err(invalid)?;
        self.records.insert(
            id.clone(),
            AuxRecord {
                sample_id: id,
                vector: EmotionVector(vector),
                dist: EmotionDistribution(probs),
            },
        );
        Ok(())
    }

    pub fn aux_label_space(&self) -> &LabelSpace {
        &self.aux_label_space
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn metadata(&self) -> &BTreeMap<String, serde_json::Value> {
        &self.metadata
    }

    pub fn set_metadata(&mut self, key: impl Into<String>, value: serde_json::Value) {
        self.metadata.insert(key.into(), value);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.records.contains_key(id)
    }

    /// Fails loudly on a missing id; callers must never skip samples.
    pub fn get_record(&self, id: &str) -> Result<&AuxRecord> {
        self.records
            .get(id)
            .ok_or_else(|| Error::MissingAuxRecord(id.to_string()))
    }

    /// Records in ascending id order.
    pub fn records(&self) -> impl Iterator<Item = &AuxRecord> {
        self.records.values()
    }

    pub fn header(&self) -> StoreHeader {
        StoreHeader {
            aux_labels: self
                .aux_label_space
                .iter()
                .map(|l| l.as_str().to_string())
                .collect(),
            dimension: self.dimension,
            metadata: self.metadata.clone(),
        }
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        serde_json::to_writer(&mut w, &self.header())?;
        w.write_all(b"\n")?;
        for rec in self.records.values() {
            let line = StoreLine {
                id: rec.sample_id.clone(),
                vector: rec.vector.0.clone(),
                probs: rec.dist.0.clone(),
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Reads and validates a whole store file. Any invalid record aborts the
/// ingest.
pub fn ingest_store(path: impl AsRef<Path>) -> Result<AuxStore> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?;
    let header: StoreHeader =
        serde_json::from_str(first).map_err(|e| parse_err(1, format!("bad header: {e}")))?;
    if header.dimension == 0 {
        return Err(parse_err(1, "dimension must be positive".into()));
    }
    let space_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "aux".into());
    let space = LabelSpace::from_strs(space_name, &header.aux_labels)?;
    let mut store = AuxStore::new(space, header.dimension);
    store.metadata = header.metadata;
    for (i, line) in lines {
        let rec: StoreLine =
            serde_json::from_str(line).map_err(|e| parse_err(i + 1, e.to_string()))?;
        store.insert(rec.id, rec.vector, rec.probs)?;
    }
    Ok(store)
}

/// Restricts a distribution over `aux_space` to the labels of `aligned` (in
/// `aligned` order) and renormalizes to sum 1.
pub fn project_distribution(
    dist: &EmotionDistribution,
    aux_space: &LabelSpace,
    aligned: &LabelSpace,
) -> Result<EmotionDistribution> {
    if dist.len() != aux_space.len() {
        return Err(Error::DimensionMismatch {
            left: dist.len(),
            right: aux_space.len(),
        });
    }
    let mut kept = Vec::with_capacity(aligned.len());
    for label in aligned.iter() {
        let i = aux_space
            .index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        kept.push(dist.0[i]);
    }
    let mass: f64 = kept.iter().sum();
    if mass <= 0.0 {
        return Err(Error::NoAlignedMass);
    }
    for p in &mut kept {
        *p /= mass;
    }
    Ok(EmotionDistribution(kept))
}
