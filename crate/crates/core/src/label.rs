//! Emotion labels and ordered label spaces.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A canonical emotion category name.
///
/// Canonical form is trimmed, lower-cased, with every internal whitespace run
/// collapsed to a single space. No synonym mapping is applied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EmotionLabel(String);

impl EmotionLabel {
    pub fn new(raw: &str) -> Result<Self> {
        let canonical = canonicalize(raw);
        if canonical.is_empty() {
            return Err(Error::EmptyLabel);
        }
        Ok(EmotionLabel(canonical))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn canonicalize(raw: &str) -> String {
    raw.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for EmotionLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for EmotionLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        EmotionLabel::new(&raw).map_err(serde::de::Error::custom)
    }
}

/// An ordered set of distinct labels. The order indexes probability vectors.
#[derive(Debug, Clone)]
pub struct LabelSpace {
    name: String,
    labels: Vec<EmotionLabel>,
    index: HashMap<EmotionLabel, usize>,
}

impl LabelSpace {
    pub fn new(name: impl Into<String>, labels: Vec<EmotionLabel>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidLabelSpace(format!(
                "need at least 2 labels, got {}",
                labels.len()
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidLabelSpace(format!("duplicate label `{label}`")));
            }
        }
        Ok(LabelSpace {
            name: name.into(),
            labels,
            index,
        })
    }

    pub fn from_strs<S: AsRef<str>>(name: impl Into<String>, raw: &[S]) -> Result<Self> {
        let labels = raw
            .iter()
            .map(|s| EmotionLabel::new(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, labels)
    }

    /// Reads a sidecar file with one label per line. Blank lines are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::from_strs(name, &raw)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[EmotionLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &EmotionLabel) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn contains(&self, label: &EmotionLabel) -> bool {
        self.index.contains_key(label)
    }

    pub fn get(&self, i: usize) -> Option<&EmotionLabel> {
        self.labels.get(i)
    }

    pub fn iter(&self) -> impl Iterator<Item = &EmotionLabel> {
        self.labels.iter()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

impl PartialEq for LabelSpace {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

/// Intersection of two label spaces, in the target's order.
pub fn align_label_spaces(aux: &LabelSpace, target: &LabelSpace) -> Result<LabelSpace> {
    let shared: Vec<EmotionLabel> = target
        .iter()
        .filter(|l| aux.contains(l))
        .cloned()
        .collect();
    if shared.len() < 2 {
        return Err(Error::IncompatibleLabelSpaces {
            shared: shared.len(),
        });
    }
    let name = format!("{}∩{}", aux.name(), target.name());
    LabelSpace::new(name, shared)
}
