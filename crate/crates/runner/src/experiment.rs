//! End-to-end runs: retrieval, soft labels, candidate division, prompting,
//! dispatch, parsing and scoring.

use std::collections::{HashMap, HashSet};

use eicl_core::labeling::{build_soft_label, top_k2_emotions};
use eicl_core::partition::{default_k3, divide_candidates};
use eicl_core::prompting::{parse_response, render_prompt, Demonstration, Template, TemplateRegistry, ZERO_SHOT};
use eicl_core::report::{DemoTrace, EffectiveSettings, RunRecord, RunReport, RunResults};
use eicl_core::retrieval::{cosine, rank_order, top_k_among};
use eicl_core::{project_distribution, AuxStore, CandidatePartition, ParsedPrediction, Sample, ScoredNeighbor};
use eicl_gateway::{ChatRequest, Gateway};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{EseAblation, Mode, RunConfig, SweepAxis};
use crate::error::{Result, RunError};
use crate::inputs::Inputs;

/// Which vectors pick the demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retrieval {
    Emotion,
    Semantic,
    Random(u64),
    None,
}

impl Retrieval {
    fn describe(self) -> String {
        match self {
            Retrieval::Emotion => "emotion".into(),
            Retrieval::Semantic => "semantic".into(),
            Retrieval::Random(seed) => format!("random(seed={seed})"),
            Retrieval::None => "none".into(),
        }
    }
}

/// Settings after the mode's overrides.
#[derive(Debug, Clone)]
pub struct Plan {
    pub alpha: f64,
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    pub template_id: String,
    pub retrieval: Retrieval,
}

impl Plan {
    pub fn resolve(cfg: &RunConfig, inputs: &Inputs) -> Result<Self> {
        let n_labels = inputs.aligned.len();
        let k3 = cfg.k3.unwrap_or_else(|| default_k3(n_labels));
        let mut plan = Plan {
            alpha: cfg.alpha,
            k1: cfg.k1,
            k2: cfg.k2,
            k3,
            template_id: cfg.template_id.clone(),
            retrieval: Retrieval::Emotion,
        };
        match cfg.mode {
            Mode::EIcl => {}
            Mode::WoEse => {
                plan.retrieval = if cfg.ese_ablation == EseAblation::Random || inputs.semantic.is_none() {
                    Retrieval::Random(cfg.seed.ok_or_else(|| {
                        RunError::Config("random retrieval requires a seed".into())
                    })?)
                } else {
                    Retrieval::Semantic
                }
            }
            Mode::WoDsl => plan.alpha = 0.0,
            Mode::WoEep => plan.k3 = n_labels,
            Mode::IclBaseline => {
                plan.retrieval = Retrieval::Semantic;
                plan.alpha = 0.0;
                plan.k3 = n_labels;
                plan.template_id = "icl".into();
            }
            Mode::ZeroShot => {
                plan.retrieval = Retrieval::None;
                plan.k1 = 0;
                plan.k2 = 0;
                plan.alpha = 0.0;
                plan.k3 = n_labels;
                plan.template_id = ZERO_SHOT.into();
            }
        }
        Ok(plan)
    }
}

/// Neighbor lists per test query, reusable across runs that share `k1`
/// and the retrieval source.
#[derive(Debug, Clone, Default)]
pub struct RetrievalCache {
    key: Option<(usize, Retrieval)>,
    neighbors: HashMap<String, Vec<ScoredNeighbor>>,
}

impl RetrievalCache {
    fn ensure(&mut self, inputs: &Inputs, plan: &Plan) -> Result<()> {
        let key = (plan.k1, plan.retrieval);
        if self.key == Some(key) {
            return Ok(());
        }
        self.neighbors = retrieve_all(inputs, plan)?;
        self.key = Some(key);
        Ok(())
    }
}

fn retrieval_store(inputs: &Inputs, retrieval: Retrieval) -> Result<&AuxStore> {
    match retrieval {
        Retrieval::Semantic => inputs
            .semantic
            .as_ref()
            .ok_or_else(|| RunError::Config("semantic retrieval requires semantic_store".into())),
        _ => Ok(&inputs.emotion),
    }
}

fn retrieve_all(inputs: &Inputs, plan: &Plan) -> Result<HashMap<String, Vec<ScoredNeighbor>>> {
    let mut out = HashMap::new();
    match plan.retrieval {
        Retrieval::None => {}
        Retrieval::Emotion | Retrieval::Semantic => {
            let store = retrieval_store(inputs, plan.retrieval)?;
            let pool: Vec<(&str, &eicl_core::EmotionVector)> = inputs
                .corpus
                .train()
                .iter()
                .map(|s| Ok((s.id.as_str(), &store.get_record(&s.id)?.vector)))
                .collect::<Result<_>>()?;
            for q in inputs.corpus.test() {
                let qv = &store.get_record(&q.id)?.vector;
                let candidates = pool.iter().filter(|(id, _)| *id != q.id).copied();
                out.insert(q.id.clone(), top_k_among(qv, candidates, plan.k1)?);
            }
        }
        Retrieval::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let train = inputs.corpus.train();
            if train.is_empty() {
                return Err(eicl_core::Error::EmptyPool.into());
            }
            for q in inputs.corpus.test() {
                let qv = &inputs.emotion.get_record(&q.id)?.vector;
                let picks = rand::seq::index::sample(&mut rng, train.len(), plan.k1.min(train.len()));
                let mut chosen = picks
                    .into_iter()
                    .map(|i| {
                        let s = &train[i];
                        Ok(ScoredNeighbor {
                            sample_id: s.id.clone(),
                            score: cosine(qv, &inputs.emotion.get_record(&s.id)?.vector)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                chosen.sort_by(rank_order);
                out.insert(q.id.clone(), chosen);
            }
        }
    }
    Ok(out)
}

pub(crate) fn registry(cfg: &RunConfig) -> Result<TemplateRegistry> {
    Ok(match &cfg.template_dir {
        Some(dir) => TemplateRegistry::with_dir(dir)?,
        None => TemplateRegistry::builtin(),
    })
}

/// A query ready to send: its prompt and the partial trace.
pub(crate) struct Prepared {
    pub query: Sample,
    pub demos: Vec<DemoTrace>,
    pub partition: CandidatePartition,
    pub request: ChatRequest,
    pub prompt: String,
}

pub(crate) fn demonstration(
    inputs: &Inputs,
    plan: &Plan,
    sample: &Sample,
    score: f64,
    template: &Template,
) -> Result<(Demonstration, DemoTrace)> {
    let rec = inputs.emotion.get_record(&sample.id)?;
    let dist = project_distribution(&rec.dist, inputs.emotion.aux_label_space(), &inputs.aligned)?;
    let predicted = top_k2_emotions(&dist, &inputs.aligned, plan.k2)?;
    let soft = build_soft_label(&sample.gold, &predicted, plan.alpha, &inputs.aligned)?;
    let trace = DemoTrace {
        sample_id: sample.id.clone(),
        score,
        gold: sample.gold.clone(),
        soft_label: soft.entries.clone(),
        rendered: template.label_style.render(&soft),
    };
    Ok((
        Demonstration {
            sample: sample.clone(),
            soft_label: soft,
            score,
        },
        trace,
    ))
}

pub(crate) fn prepare(
    cfg: &RunConfig,
    inputs: &Inputs,
    plan: &Plan,
    template: &Template,
    query: &Sample,
    neighbors: &[(Sample, f64)],
) -> Result<Prepared> {
    let mut demos = Vec::with_capacity(neighbors.len());
    let mut traces = Vec::with_capacity(neighbors.len());
    for (sample, score) in neighbors {
        let (d, t) = demonstration(inputs, plan, sample, *score, template)?;
        demos.push(d);
        traces.push(t);
    }
    let rec = inputs.emotion.get_record(&query.id)?;
    let dist = project_distribution(&rec.dist, inputs.emotion.aux_label_space(), &inputs.aligned)?;
    let partition = divide_candidates(&dist, plan.k3, &inputs.aligned)?;
    let prompt = render_prompt(query, &demos, &partition, template)?;
    let mut request = ChatRequest::new(
        cfg.model_id.clone(),
        prompt.system_text.clone(),
        prompt.user_text.clone(),
        query.id.clone(),
    );
    request.temperature = cfg.temperature;
    request.max_tokens = cfg.max_tokens;
    Ok(Prepared {
        query: query.clone(),
        demos: traces,
        partition,
        request,
        prompt: prompt.user_text,
    })
}

/// Sends prepared queries and turns the replies into records.
pub(crate) async fn dispatch(
    prepared: Vec<Prepared>,
    inputs: &Inputs,
    template_id: &str,
    gateway: &Gateway,
) -> Vec<RunRecord> {
    let reqs: Vec<ChatRequest> = prepared.iter().map(|p| p.request.clone()).collect();
    let responses = gateway.complete_batch(&reqs).await;
    prepared
        .into_iter()
        .zip(responses)
        .map(|(p, resp)| {
            let (raw, prediction, transport_error) = match resp {
                Ok(r) => {
                    let pred = parse_response(&r.text, &inputs.aligned, &p.partition);
                    (r.text, pred, None)
                }
                Err(e) => (
                    String::new(),
                    ParsedPrediction::Unparseable(String::new()),
                    Some(e.to_string()),
                ),
            };
            RunRecord {
                query_id: p.query.id,
                gold: p.query.gold,
                demos: p.demos,
                partition: p.partition,
                prompt_template_id: template_id.to_string(),
                prompt: p.prompt,
                raw_response: raw,
                prediction,
                transport_error,
            }
        })
        .collect()
}

pub async fn run_experiment(cfg: &RunConfig, inputs: &Inputs, gateway: &Gateway) -> Result<RunReport> {
    run_with_cache(cfg, inputs, gateway, &mut RetrievalCache::default()).await
}

pub async fn run_with_cache(
    cfg: &RunConfig,
    inputs: &Inputs,
    gateway: &Gateway,
    cache: &mut RetrievalCache,
) -> Result<RunReport> {
    let bounds = cfg.check_params();
    if !bounds.is_empty() {
        return Err(RunError::Config(bounds.join("; ")));
    }
    let plan = Plan::resolve(cfg, inputs)?;
    let registry = registry(cfg)?;
    let template = registry.get(&plan.template_id)?;
    cache.ensure(inputs, &plan)?;

    let train: HashMap<&str, &Sample> = inputs.corpus.train().iter().map(|s| (s.id.as_str(), s)).collect();
    let mut prepared = Vec::with_capacity(inputs.corpus.test().len());
    for q in inputs.corpus.test() {
        let neighbors: Vec<(Sample, f64)> = match plan.retrieval {
            Retrieval::None => Vec::new(),
            _ => cache.neighbors[&q.id]
                .iter()
                .map(|n| (train[n.sample_id.as_str()].clone(), n.score))
                .collect(),
        };
        prepared.push(prepare(cfg, inputs, &plan, template, q, &neighbors)?);
    }
    let records = dispatch(prepared, inputs, &plan.template_id, gateway).await;
    let results = RunResults::from_records(records, &inputs.aligned)?;
    let report = RunReport {
        config: cfg.snapshot(),
        effective: effective(&plan, gateway, inputs),
        results,
    };
    Ok(report)
}

fn effective(plan: &Plan, gateway: &Gateway, inputs: &Inputs) -> EffectiveSettings {
    EffectiveSettings {
        alpha: plan.alpha,
        k1: plan.k1,
        k2: plan.k2,
        k3: plan.k3,
        template_id: plan.template_id.clone(),
        provider_id: gateway.provider_id().to_string(),
        retrieval: plan.retrieval.describe(),
        label_space: inputs.aligned.labels().to_vec(),
    }
}

/// One run per value of `axis`, sharing retrieval.
pub async fn run_sweep(
    cfg: &RunConfig,
    inputs: &Inputs,
    gateway: &Gateway,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<(f64, RunReport)>> {
    let mut cache = RetrievalCache::default();
    let mut out = Vec::with_capacity(values.len());
    for &v in values {
        let run_cfg = cfg.with_axis_value(axis, v);
        let report = run_with_cache(&run_cfg, inputs, gateway, &mut cache).await?;
        out.push((v, report));
    }
    Ok(out)
}

/// Sample ids referenced by a set of records, for consistency checks.
pub fn demo_ids(report: &RunReport) -> HashSet<String> {
    report
        .results
        .records
        .iter()
        .flat_map(|r| r.demos.iter().map(|d| d.sample_id.clone()))
        .collect()
}
