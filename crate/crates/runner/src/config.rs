//! Declarative run configuration.
//!
//! Precedence, lowest first: built-in defaults, the JSON config file,
//! command-line flags. Relative paths resolve against the config file's
//! directory; the resolved config is what every report embeds.

use std::fmt;
use std::path::{Path, PathBuf};

use eicl_core::labeling::{DEFAULT_ALPHA, DEFAULT_K2};
use eicl_gateway::{MockKind, ProviderConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RunError};

pub const DEFAULT_K1: usize = 5;
pub const DEFAULT_MODEL: &str = "gpt-3.5-turbo";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Full pipeline.
    EIcl,
    /// Demonstrations chosen by semantic vectors or at random.
    #[serde(alias = "w/o-ese")]
    WoEse,
    /// Hard labels (alpha forced to 0).
    #[serde(alias = "w/o-dsl")]
    WoDsl,
    /// No exclusion (k3 forced to N).
    #[serde(alias = "w/o-eep")]
    WoEep,
    /// Semantic retrieval, hard labels, full label list.
    IclBaseline,
    /// No demonstrations, full label list.
    ZeroShot,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("mode serializes");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown mode `{s}`"))
    }
}

/// What the `w/o ESE` ablation retrieves with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EseAblation {
    Semantic,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProviderSpec {
    Mock {
        mock: MockKind,
        /// JSON object `{request tag: reply}` for the scripted mock.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        script: Option<PathBuf>,
    },
    Http(ProviderConfig),
}

impl Default for ProviderSpec {
    fn default() -> Self {
        ProviderSpec::Mock {
            mock: MockKind::EchoFirstPossible,
            script: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Alpha,
    K2,
    K3,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::K2 => "k2",
            SweepAxis::K3 => "k3",
        })
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "alpha" => Ok(SweepAxis::Alpha),
            "k2" => Ok(SweepAxis::K2),
            "k3" => Ok(SweepAxis::K3),
            _ => Err(format!("unknown sweep axis `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PilotSpec {
    pub sets: usize,
    pub set_size: usize,
    /// Queries answered per set, spread evenly over the similarity ranking;
    /// all test queries when unset.
    pub queries_per_set: Option<usize>,
    pub bins: usize,
    /// Explicit example sets as lists of train ids; drawn at random when
    /// unset.
    pub example_sets: Option<Vec<Vec<String>>>,
}

impl Default for PilotSpec {
    fn default() -> Self {
        PilotSpec {
            sets: 8,
            set_size: 5,
            queries_per_set: None,
            bins: 10,
            example_sets: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub corpus: PathBuf,
    /// Sidecar label list for the corpus (one label per line).
    pub label_space: Option<PathBuf>,
    pub emotion_store: PathBuf,
    pub semantic_store: Option<PathBuf>,
    /// Explicit aligned label list; otherwise the intersection of the
    /// emotion store's labels and the corpus labels.
    pub aligned_labels: Option<PathBuf>,
    pub alpha: f64,
    pub k1: usize,
    pub k2: usize,
    pub k3: Option<usize>,
    pub mode: Mode,
    pub template_id: String,
    pub template_dir: Option<PathBuf>,
    pub ese_ablation: EseAblation,
    pub provider: ProviderSpec,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub sweep: Option<SweepSpec>,
    pub pilot: PilotSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            name: "run".into(),
            corpus: PathBuf::new(),
            label_space: None,
            emotion_store: PathBuf::new(),
            semantic_store: None,
            aligned_labels: None,
            alpha: DEFAULT_ALPHA,
            k1: DEFAULT_K1,
            k2: DEFAULT_K2,
            k3: None,
            mode: Mode::EIcl,
            template_id: "e-icl".into(),
            template_dir: None,
            ese_ablation: EseAblation::Semantic,
            provider: ProviderSpec::default(),
            model_id: DEFAULT_MODEL.into(),
            temperature: 0.0,
            max_tokens: eicl_gateway::types::DEFAULT_MAX_TOKENS,
            output_dir: PathBuf::from("out"),
            seed: None,
            sweep: None,
            pilot: PilotSpec::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if !p.as_os_str().is_empty() && p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    /// Reads a config file. A saved report is accepted too: its embedded
    /// `config` is used.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        if value.get("results").is_some() {
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
        }
        let mut cfg: RunConfig = serde_json::from_value(value)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let base = std::path::absolute(&base).unwrap_or(base);
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.corpus);
        resolve(base, &mut self.emotion_store);
        resolve(base, &mut self.output_dir);
        for p in [
            &mut self.label_space,
            &mut self.semantic_store,
            &mut self.aligned_labels,
            &mut self.template_dir,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, p);
        }
        if let ProviderSpec::Mock {
            script: Some(script),
            ..
        } = &mut self.provider
        {
            resolve(base, script);
        }
    }

    /// Range checks that need no file access.
    pub fn check_bounds(&self) -> Vec<String> {
        let mut out = self.check_params();
        if self.corpus.as_os_str().is_empty() {
            out.push("corpus path is required".into());
        }
        if self.emotion_store.as_os_str().is_empty() {
            out.push("emotion_store path is required".into());
        }
        if self.needs_random_retrieval() && self.seed.is_none() {
            out.push("mode wo-ese with random retrieval requires a seed".into());
        }
        if self.mode == Mode::IclBaseline && self.semantic_store.is_none() {
            out.push("mode icl-baseline requires semantic_store".into());
        }
        out
    }

    /// Hyperparameter, provider, sweep and pilot checks.
    pub fn check_params(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..1.0).contains(&self.alpha) {
            out.push(format!("alpha {} out of range [0, 1)", self.alpha));
        }
        if self.k1 < 1 {
            out.push("k1 must be at least 1".into());
        }
        if self.k2 < 1 {
            out.push("k2 must be at least 1".into());
        }
        if self.k3 == Some(0) {
            out.push("k3 must be at least 1".into());
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            out.push(format!("temperature {} is negative", self.temperature));
        }
        if self.max_tokens == 0 {
            out.push("max_tokens must be positive".into());
        }
        if let ProviderSpec::Http(p) = &self.provider {
            if let Err(e) = p.validate() {
                out.push(e);
            }
        }
        if let ProviderSpec::Mock { mock: MockKind::Scripted, script: None } = &self.provider {
            out.push("scripted mock requires a script file".into());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                out.push("sweep needs at least one value".into());
            }
            for v in &sweep.values {
                let ok = match sweep.axis {
                    SweepAxis::Alpha => (0.0..1.0).contains(v),
                    SweepAxis::K2 | SweepAxis::K3 => *v >= 1.0 && v.fract() == 0.0,
                };
                if !ok {
                    out.push(format!("sweep value {v} invalid for axis {}", sweep.axis));
                }
            }
        }
        if self.pilot.bins < 1 {
            out.push("pilot bins must be at least 1".into());
        }
        if self.pilot.sets < 1 || self.pilot.set_size < 1 {
            out.push("pilot needs at least one set of at least one example".into());
        }
        out
    }

    pub fn needs_random_retrieval(&self) -> bool {
        self.mode == Mode::WoEse
            && (self.ese_ablation == EseAblation::Random || self.semantic_store.is_none())
    }

    /// Applies one sweep value.
    pub fn with_axis_value(&self, axis: SweepAxis, value: f64) -> RunConfig {
        let mut cfg = self.clone();
        match axis {
            SweepAxis::Alpha => cfg.alpha = value,
            SweepAxis::K2 => cfg.k2 = value as usize,
            SweepAxis::K3 => cfg.k3 = Some(value as usize),
        }
        cfg
    }

    pub fn snapshot(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Formats a sweep value for file names and CSV cells.
pub fn format_axis_value(axis: SweepAxis, value: f64) -> String {
    match axis {
        SweepAxis::Alpha => format!("{value}"),
        SweepAxis::K2 | SweepAxis::K3 => format!("{}", value as usize),
    }
}
