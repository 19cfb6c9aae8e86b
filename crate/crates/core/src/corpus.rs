//! Labeled corpora in line-delimited JSON, split into train and test.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, LabelSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Maps split tags found in the data file to train/test membership.
#[derive(Debug, Clone)]
pub struct SplitSpec(HashMap<String, Split>);

impl SplitSpec {
    pub fn new() -> Self {
        SplitSpec(HashMap::new())
    }

    pub fn with(mut self, tag: impl Into<String>, split: Split) -> Self {
        self.0.insert(tag.into(), split);
        self
    }

    pub fn resolve(&self, tag: &str) -> Option<Split> {
        self.0.get(tag).copied()
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::new()
            .with("train", Split::Train)
            .with("test", Split::Test)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub text: String,
    pub gold: EmotionLabel,
}

/// Immutable once built; train and test ids are disjoint and every gold is in
/// `label_space`.
#[derive(Debug, Clone)]
pub struct Corpus {
    name: String,
    label_space: LabelSpace,
    train: Vec<Sample>,
    test: Vec<Sample>,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: Option<String>,
    text: Option<String>,
    label: Option<String>,
    split: Option<String>,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    text: &'a str,
    label: &'a str,
    split: Split,
}

impl Corpus {
    pub fn new(
        name: impl Into<String>,
        label_space: LabelSpace,
        train: Vec<Sample>,
        test: Vec<Sample>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in train.iter().chain(&test) {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::InvalidCorpus(format!("duplicate id `{}`", s.id)));
            }
            if s.text.is_empty() {
                return Err(Error::InvalidCorpus(format!("sample `{}` has empty text", s.id)));
            }
            if !label_space.contains(&s.gold) {
                return Err(Error::InvalidCorpus(format!(
                    "sample `{}` has gold `{}` outside the label space",
                    s.id, s.gold
                )));
            }
        }
        Ok(Corpus {
            name: name.into(),
            label_space,
            train,
            test,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.label_space
    }

    pub fn train(&self) -> &[Sample] {
        &self.train
    }

    pub fn test(&self) -> &[Sample] {
        &self.test
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn samples(&self) -> impl Iterator<Item = &Sample> {
        self.train.iter().chain(&self.test)
    }

    /// Writes the corpus back in the line-delimited format, train then test.
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for (split, samples) in [(Split::Train, &self.train), (Split::Test, &self.test)] {
            for s in samples {
                let rec = OutRecord {
                    id: &s.id,
                    text: &s.text,
                    label: s.gold.as_str(),
                    split,
                };
                serde_json::to_writer(&mut w, &rec)?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

/// Loads a corpus file. Without `label_space`, the space is the sorted set of
/// distinct labels encountered.
pub fn load_corpus(
    path: impl AsRef<Path>,
    split_spec: &SplitSpec,
    label_space: Option<LabelSpace>,
) -> Result<Corpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut seen: HashSet<String> = HashSet::new();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(line).map_err(|e| parse_err(lineno, e.to_string()))?;
        let id = match raw.id {
            Some(id) if !id.is_empty() => id,
            _ => return Err(parse_err(lineno, "missing id".into())),
        };
        if !seen.insert(id.clone()) {
            return Err(parse_err(lineno, format!("duplicate id `{id}`")));
        }
        let text = raw
            .text
            .filter(|t| !t.is_empty())
            .ok_or_else(|| parse_err(lineno, format!("record `{id}` has no text")))?;
        let label = raw
            .label
            .ok_or_else(|| parse_err(lineno, format!("record `{id}` has no label")))?;
        let gold = EmotionLabel::new(&label)
            .map_err(|_| parse_err(lineno, format!("record `{id}` has an empty label")))?;
        let tag = raw
            .split
            .ok_or_else(|| parse_err(lineno, format!("record `{id}` has no split")))?;
        let split = split_spec
            .resolve(&tag)
            .ok_or_else(|| parse_err(lineno, format!("unknown split tag `{tag}`")))?;
        let sample = Sample { id, text, gold };
        match split {
            Split::Train => train.push(sample),
            Split::Test => test.push(sample),
        }
    }
    if train.is_empty() && test.is_empty() {
        return Err(Error::InvalidCorpus(format!("{} is empty", path.display())));
    }

    let label_space = match label_space {
        Some(space) => space,
        None => {
            let distinct: BTreeSet<EmotionLabel> =
                train.iter().chain(&test).map(|s| s.gold.clone()).collect();
            LabelSpace::new(corpus_name(path), distinct.into_iter().collect())?
        }
    };
    Corpus::new(corpus_name(path), label_space, train, test)
}

fn corpus_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into())
}

/// Keeps exactly the samples whose gold is in `aligned`; the corpus adopts
/// `aligned` as its label space.
pub fn filter_corpus(corpus: &Corpus, aligned: &LabelSpace) -> Result<Corpus> {
    if let Some(extra) = aligned.iter().find(|l| !corpus.label_space.contains(l)) {
        return Err(Error::UnknownLabel(extra.to_string()));
    }
    let keep = |samples: &[Sample]| -> Vec<Sample> {
        samples
            .iter()
            .filter(|s| aligned.contains(&s.gold))
            .cloned()
            .collect()
    };
    let train = keep(&corpus.train);
    let test = keep(&corpus.test);
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidCorpus(format!(
            "filtering `{}` leaves {} train and {} test samples",
            corpus.name,
            train.len(),
            test.len()
        )));
    }
    Corpus::new(corpus.name.clone(), aligned.clone(), train, test)
}
