//! Loading and cross-checking corpus, stores and label spaces.

use std::collections::HashMap;

use eicl_core::{
    align_label_spaces, filter_corpus, ingest_store, load_corpus, AuxStore, Corpus, LabelSpace,
    SplitSpec,
};

use crate::config::{Mode, ProviderSpec, RunConfig};
use crate::error::{Result, RunError};

/// Everything a run reads from disk, already aligned.
#[derive(Debug, Clone)]
pub struct Inputs {
    /// Restricted to the aligned label space.
    pub corpus: Corpus,
    pub aligned: LabelSpace,
    pub emotion: AuxStore,
    pub semantic: Option<AuxStore>,
}

impl Inputs {
    pub fn new(
        corpus: Corpus,
        aligned: LabelSpace,
        emotion: AuxStore,
        semantic: Option<AuxStore>,
    ) -> Result<Self> {
        let corpus = filter_corpus(&corpus, &aligned)?;
        Ok(Inputs {
            corpus,
            aligned,
            emotion,
            semantic,
        })
    }

    pub fn load(cfg: &RunConfig) -> Result<Self> {
        let space = cfg.label_space.as_ref().map(LabelSpace::load).transpose()?;
        let corpus = load_corpus(&cfg.corpus, &SplitSpec::default(), space)?;
        let emotion = ingest_store(&cfg.emotion_store)?;
        let semantic = cfg.semantic_store.as_ref().map(ingest_store).transpose()?;
        let aligned = resolve_aligned(cfg, &emotion, &corpus)?;
        Self::new(corpus, aligned, emotion, semantic)
    }

    /// Ids of every corpus sample lacking a record in `store`.
    pub fn missing_from(&self, store: &AuxStore) -> Vec<String> {
        self.corpus
            .samples()
            .filter(|s| !store.contains(&s.id))
            .map(|s| s.id.clone())
            .collect()
    }

    /// Gold label per test id, for the oracle mock.
    pub fn test_golds(&self) -> HashMap<String, String> {
        self.corpus
            .test()
            .iter()
            .map(|s| (s.id.clone(), s.gold.as_str().to_string()))
            .collect()
    }
}

fn resolve_aligned(cfg: &RunConfig, emotion: &AuxStore, corpus: &Corpus) -> Result<LabelSpace> {
    let natural = align_label_spaces(emotion.aux_label_space(), corpus.label_space())?;
    match &cfg.aligned_labels {
        None => Ok(natural),
        Some(path) => {
            let explicit = LabelSpace::load(path)?;
            if let Some(l) = explicit.iter().find(|l| !natural.contains(l)) {
                return Err(RunError::Config(format!(
                    "aligned label `{l}` is not shared by the emotion store and the corpus"
                )));
            }
            Ok(explicit)
        }
    }
}

/// Every inconsistency between config, corpus and stores. No network use.
pub fn validate(cfg: &RunConfig) -> Vec<String> {
    let mut findings = cfg.check_bounds();
    if !findings.is_empty() {
        return findings;
    }
    let mut note = |r: std::result::Result<(), String>| {
        if let Err(e) = r {
            findings.push(e);
        }
    };

    let space = match cfg.label_space.as_ref().map(LabelSpace::load).transpose() {
        Ok(s) => s,
        Err(e) => {
            note(Err(e.to_string()));
            None
        }
    };
    let corpus = load_corpus(&cfg.corpus, &SplitSpec::default(), space).map_err(|e| e.to_string());
    let emotion = ingest_store(&cfg.emotion_store).map_err(|e| e.to_string());
    let semantic = cfg
        .semantic_store
        .as_ref()
        .map(|p| ingest_store(p).map_err(|e| e.to_string()))
        .transpose();
    if let ProviderSpec::Mock { script: Some(p), .. } = &cfg.provider {
        if let Err(e) = std::fs::read_to_string(p) {
            note(Err(format!("script {}: {e}", p.display())));
        }
    }
    let registry = match &cfg.template_dir {
        Some(dir) => eicl_core::TemplateRegistry::with_dir(dir),
        None => Ok(eicl_core::TemplateRegistry::builtin()),
    };
    match registry {
        Ok(reg) => {
            // icl-baseline and zero-shot pick their own template
            if !matches!(cfg.mode, Mode::IclBaseline | Mode::ZeroShot) {
                if let Err(e) = reg.get(&cfg.template_id) {
                    note(Err(e.to_string()));
                }
            }
        }
        Err(e) => note(Err(e.to_string())),
    }

    let (corpus, emotion, semantic) = match (corpus, emotion, semantic) {
        (Ok(c), Ok(e), Ok(s)) => (c, e, s),
        (c, e, s) => {
            for err in [c.err(), e.err(), s.err()].into_iter().flatten() {
                note(Err(err));
            }
            return findings;
        }
    };
    let aligned = match resolve_aligned(cfg, &emotion, &corpus) {
        Ok(a) => a,
        Err(e) => {
            note(Err(e.to_string()));
            return findings;
        }
    };
    let inputs = match Inputs::new(corpus, aligned, emotion, semantic) {
        Ok(i) => i,
        Err(e) => {
            note(Err(e.to_string()));
            return findings;
        }
    };
    let n = inputs.aligned.len();
    if cfg.mode != Mode::ZeroShot && cfg.k2 > n {
        note(Err(format!("k2 {} exceeds the {n} aligned labels", cfg.k2)));
    }
    if let Some(k3) = cfg.k3 {
        if k3 > n {
            note(Err(format!("k3 {k3} exceeds the {n} aligned labels")));
        }
    }
    if let Some(sweep) = &cfg.sweep {
        for v in &sweep.values {
            if matches!(sweep.axis, crate::config::SweepAxis::K2 | crate::config::SweepAxis::K3)
                && *v as usize > n
            {
                note(Err(format!("sweep value {v} exceeds the {n} aligned labels")));
            }
        }
    }
    for id in inputs.missing_from(&inputs.emotion) {
        note(Err(format!("emotion store has no record for sample `{id}`")));
    }
    if let Some(sem) = &inputs.semantic {
        for id in inputs.missing_from(sem) {
            note(Err(format!("semantic store has no record for sample `{id}`")));
        }
    }
    // projected distributions must keep some mass
    for s in inputs.corpus.samples() {
        if let Ok(rec) = inputs.emotion.get_record(&s.id) {
            if let Err(e) = eicl_core::project_distribution(
                &rec.dist,
                inputs.emotion.aux_label_space(),
                &inputs.aligned,
            ) {
                note(Err(format!("sample `{}`: {e}", s.id)));
            }
        }
    }
    findings
}
