//! Per-query traces and run-level reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, LabelSpace};
use crate::labeling::SoftLabelEntry;
use crate::metrics::{self, ClassMetrics};
use crate::partition::CandidatePartition;
use crate::prompting::ParsedPrediction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoTrace {
    pub sample_id: String,
    pub score: f64,
    pub gold: EmotionLabel,
    pub soft_label: Vec<SoftLabelEntry>,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub query_id: String,
    pub gold: EmotionLabel,
    pub demos: Vec<DemoTrace>,
    pub partition: CandidatePartition,
    pub prompt_template_id: String,
    pub prompt: String,
    pub raw_response: String,
    pub prediction: ParsedPrediction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport_error: Option<String>,
}

impl RunRecord {
    pub fn correct(&self) -> bool {
        self.prediction.label() == Some(&self.gold)
    }
}

/// Hyperparameters actually applied, after the mode's overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSettings {
    pub alpha: f64,
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    pub template_id: String,
    pub provider_id: String,
    pub retrieval: String,
    pub label_space: Vec<EmotionLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The resolved run configuration, enough to re-run the experiment.
    pub config: serde_json::Value,
    pub effective: EffectiveSettings,
    pub results: RunResults,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResults {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub unparseable_count: usize,
    pub transport_failures: usize,
    pub records: Vec<RunRecord>,
}

impl RunResults {
    pub fn from_records(records: Vec<RunRecord>, space: &LabelSpace) -> Result<Self> {
        let preds: Vec<ParsedPrediction> = records.iter().map(|r| r.prediction.clone()).collect();
        let golds: Vec<EmotionLabel> = records.iter().map(|r| r.gold.clone()).collect();
        let m = metrics::evaluate(&preds, &golds, space)?;
        let transport_failures = records.iter().filter(|r| r.transport_error.is_some()).count();
        let unparseable_count = records
            .iter()
            .filter(|r| r.transport_error.is_none() && r.prediction.label().is_none())
            .count();
        Ok(RunResults {
            accuracy: m.accuracy,
            macro_f1: m.macro_f1,
            per_class: m.per_class,
            unparseable_count,
            transport_failures,
            records,
        })
    }
}

impl RunReport {
    pub fn label_space(&self) -> Result<LabelSpace> {
        LabelSpace::new("report", self.effective.label_space.clone())
    }

    /// Recomputes the aggregates from the records and checks they match the
    /// stored values exactly.
    pub fn verify(&self) -> Result<()> {
        let again = RunResults::from_records(self.results.records.clone(), &self.label_space()?)?;
        let same = again.accuracy == self.results.accuracy
            && again.macro_f1 == self.results.macro_f1
            && again.per_class == self.results.per_class
            && again.unparseable_count == self.results.unparseable_count
            && again.transport_failures == self.results.transport_failures;
        if same {
            Ok(())
        } else {
            Err(Error::InvalidCorpus(format!(
                "report aggregates do not match records: stored accuracy {} / macro-F1 {}, recomputed {} / {}",
                self.results.accuracy, self.results.macro_f1, again.accuracy, again.macro_f1
            )))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: RunReport = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "report".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        report.verify()?;
        Ok(report)
    }
}
