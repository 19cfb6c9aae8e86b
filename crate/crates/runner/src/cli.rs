//! The `eicl` command line.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use eicl_core::report::RunReport;
use eicl_core::ingest_store;
use eicl_gateway::{
    ChatProvider, EchoFirstPossible, Gateway, MemoryTrace, MockKind, RetryPolicy, Scripted,
};

use crate::config::{Mode, ProviderSpec, RunConfig, SweepAxis, SweepSpec};
use crate::error::RunError;
use crate::inputs::{validate, Inputs};
use crate::pilot::{pilot_tag, run_pilot};
use crate::{experiment, fixture, output};

const MOCK_CONCURRENCY: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "eicl", version, about = "Emotion-aware in-context learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check config, corpus, stores and label spaces for consistency.
    Validate(ConfigArgs),
    /// Run one experiment and write report.json, predictions.csv, trace.jsonl.
    Run(ConfigArgs),
    /// One run per value of a hyperparameter.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        axis: Option<SweepAxis>,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Similarity-binned accuracy over fixed example sets.
    Pilot {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        sets: Option<usize>,
        #[arg(long)]
        set_size: Option<usize>,
        #[arg(long)]
        queries_per_set: Option<usize>,
    },
    /// Pretty-print an existing report.
    Report { path: PathBuf },
    /// Validate a store file and summarize it.
    Ingest { path: PathBuf },
    /// Write the synthetic fixture.
    Synth {
        #[arg(long, default_value = "fixture")]
        out: PathBuf,
        #[arg(long, default_value_t = fixture::DEFAULT_SEED)]
        seed: u64,
    },
}

/// Config file plus flag overrides. Flags win over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    #[arg(short, long)]
    pub config: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub k1: Option<usize>,
    #[arg(long)]
    pub k2: Option<usize>,
    #[arg(long)]
    pub k3: Option<usize>,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub template: Option<String>,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replace the provider with a mock.
    #[arg(long, value_parser = parse_mock)]
    pub mock: Option<MockKind>,
    /// Reply table for the scripted mock.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
}

fn parse_mock(s: &str) -> Result<MockKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown mock `{s}`"))
}

impl ConfigArgs {
    pub fn resolve(&self) -> crate::Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.k1 {
            cfg.k1 = v;
        }
        if let Some(v) = self.k2 {
            cfg.k2 = v;
        }
        if let Some(v) = self.k3 {
            cfg.k3 = Some(v);
        }
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = &self.template {
            cfg.template_id = v.clone();
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = absolute(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = Some(v);
        }
        if let Some(v) = &self.model {
            cfg.model_id = v.clone();
        }
        if self.mock.is_some() || self.script.is_some() {
            let (kind, script) = match &cfg.provider {
                ProviderSpec::Mock { mock, script } => (*mock, script.clone()),
                ProviderSpec::Http(_) => (MockKind::EchoFirstPossible, None),
            };
            let kind = self.mock.unwrap_or(if self.script.is_some() { MockKind::Scripted } else { kind });
            cfg.provider = ProviderSpec::Mock {
                mock: kind,
                script: self.script.as_deref().map(absolute).or(script),
            };
        }
        Ok(cfg)
    }
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Failure split by exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(Vec<String>),
    Runtime(String),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        if e.is_validation() {
            Failure::Validation(vec![e.to_string()])
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Validation(_) => ExitCode::from(1),
            Failure::Runtime(_) => ExitCode::from(2),
        }
    }
}

/// Builds the gateway for a config. `oracle` supplies gold replies keyed by
/// request tag and is only consulted for the oracle mock.
pub fn build_gateway(
    cfg: &RunConfig,
    oracle: impl FnOnce() -> HashMap<String, String>,
) -> crate::Result<Gateway> {
    let provider: Arc<dyn ChatProvider> = match &cfg.provider {
        ProviderSpec::Http(pc) => return Ok(Gateway::from_config(pc)?),
        ProviderSpec::Mock { mock, script } => match mock {
            MockKind::EchoFirstPossible => Arc::new(EchoFirstPossible),
            MockKind::Oracle => Arc::new(Scripted::oracle(oracle())),
            MockKind::Scripted => {
                let path = script
                    .as_ref()
                    .ok_or_else(|| RunError::Config("scripted mock requires `script`".into()))?;
                let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
                let table: HashMap<String, String> = serde_json::from_str(&text)
                    .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
                Arc::new(Scripted::new(table))
            }
        },
    };
    Ok(Gateway::new(provider, RetryPolicy::immediate(0), MOCK_CONCURRENCY))
}

fn check(cfg: &RunConfig) -> Result<(), Failure> {
    let findings = validate(cfg);
    if findings.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(findings))
    }
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn print_scores(out: &mut impl Write, accuracy: f64, macro_f1: f64) -> Result<(), Failure> {
    writeln!(out, "accuracy={accuracy:.4}")
        .and_then(|_| writeln!(out, "macro_f1={macro_f1:.4}"))
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn say(out: &mut impl Write, line: impl std::fmt::Display) -> Result<(), Failure> {
    writeln!(out, "{line}").map_err(|e| Failure::Runtime(e.to_string()))
}

pub fn execute(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    match cli.command {
        Command::Validate(args) => {
            let cfg = args.resolve()?;
            check(&cfg)?;
            say(out, "OK")
        }
        Command::Run(args) => {
            let cfg = args.resolve()?;
            check(&cfg)?;
            let inputs = Inputs::load(&cfg)?;
            let trace = Arc::new(MemoryTrace::default());
            let gateway = build_gateway(&cfg, || inputs.test_golds())?.with_trace(trace.clone());
            let report = runtime()?.block_on(experiment::run_experiment(&cfg, &inputs, &gateway))?;
            let files = output::write_run(&cfg.output_dir, &report, &trace.entries())?;
            for f in files {
                tracing::info!(path = %f.display(), "wrote");
            }
            say(out, format!("unparseable={}", report.results.unparseable_count))?;
            say(out, format!("transport_failures={}", report.results.transport_failures))?;
            print_scores(out, report.results.accuracy, report.results.macro_f1)
        }
        Command::Sweep { config, axis, values } => {
            let mut cfg = config.resolve()?;
            if let (Some(axis), Some(values)) = (axis, values.clone()) {
                cfg.sweep = Some(SweepSpec { axis, values });
            } else if axis.is_some() || values.is_some() {
                return Err(Failure::Validation(vec!["--axis and --values go together".into()]));
            }
            let sweep = cfg
                .sweep
                .clone()
                .ok_or_else(|| Failure::Validation(vec!["sweep needs an axis and values".into()]))?;
            check(&cfg)?;
            let inputs = Inputs::load(&cfg)?;
            let trace = Arc::new(MemoryTrace::default());
            let gateway = build_gateway(&cfg, || inputs.test_golds())?.with_trace(trace.clone());
            let runs = runtime()?.block_on(experiment::run_sweep(
                &cfg,
                &inputs,
                &gateway,
                sweep.axis,
                &sweep.values,
            ))?;
            output::write_sweep(&cfg.output_dir, sweep.axis, &runs, &trace.entries())?;
            for (v, r) in &runs {
                say(
                    out,
                    format!(
                        "{}={} accuracy={:.4} macro_f1={:.4}",
                        sweep.axis,
                        crate::config::format_axis_value(sweep.axis, *v),
                        r.results.accuracy,
                        r.results.macro_f1
                    ),
                )?;
            }
            let (_, last) = runs.last().expect("sweep has values");
            print_scores(out, last.results.accuracy, last.results.macro_f1)
        }
        Command::Pilot {
            config,
            bins,
            sets,
            set_size,
            queries_per_set,
        } => {
            let mut cfg = config.resolve()?;
            if let Some(v) = bins {
                cfg.pilot.bins = v;
            }
            if let Some(v) = sets {
                cfg.pilot.sets = v;
            }
            if let Some(v) = set_size {
                cfg.pilot.set_size = v;
            }
            if queries_per_set.is_some() {
                cfg.pilot.queries_per_set = queries_per_set;
            }
            check(&cfg)?;
            let inputs = Inputs::load(&cfg)?;
            let trace = Arc::new(MemoryTrace::default());
            let sets = crate::pilot::example_sets(&cfg, &inputs)?.len();
            let gateway = build_gateway(&cfg, || {
                let golds = inputs.test_golds();
                (0..sets)
                    .flat_map(|i| golds.iter().map(move |(id, g)| (pilot_tag(i, id), g.clone())))
                    .collect()
            })?
            .with_trace(trace.clone());
            let report = runtime()?.block_on(run_pilot(&cfg, &inputs, &gateway))?;
            output::write_pilot(&cfg.output_dir, &report, &trace.entries())?;
            for b in &report.bins {
                let acc = b.accuracy.map(|a| format!("{a:.4}")).unwrap_or_else(|| "-".into());
                say(out, format!("[{:+.2}, {:+.2}] n={} accuracy={acc}", b.lower, b.upper, b.count))?;
            }
            print_scores(out, report.accuracy, report.macro_f1)
        }
        Command::Report { path } => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            let report = RunReport::from_json(&text)
                .map_err(|e| Failure::Validation(vec![format!("{}: {e}", path.display())]))?;
            print_report(out, &report)
        }
        Command::Ingest { path } => {
            let store = ingest_store(&path).map_err(|e| Failure::Validation(vec![e.to_string()]))?;
            say(out, format!("records={}", store.len()))?;
            say(out, format!("dimension={}", store.dimension()))?;
            let labels: Vec<&str> = store.aux_label_space().iter().map(|l| l.as_str()).collect();
            say(out, format!("labels={}", labels.join(",")))?;
            say(out, "OK")
        }
        Command::Synth { out: dir, seed } => {
            let fx = fixture::generate(seed)?;
            for f in fx.write(&dir)? {
                say(out, f.display())?;
            }
            Ok(())
        }
    }
}

fn print_report(out: &mut impl Write, report: &RunReport) -> Result<(), Failure> {
    let e = &report.effective;
    let mode = report.config.get("mode").and_then(|m| m.as_str()).unwrap_or("?");
    say(out, format!("mode: {mode}"))?;
    say(out, format!("provider: {}", e.provider_id))?;
    say(out, format!("template: {}", e.template_id))?;
    say(out, format!("retrieval: {}", e.retrieval))?;
    say(out, format!("alpha={} k1={} k2={} k3={}", e.alpha, e.k1, e.k2, e.k3))?;
    say(out, format!("queries: {}", report.results.records.len()))?;
    say(out, format!("unparseable: {}", report.results.unparseable_count))?;
    say(out, format!("transport failures: {}", report.results.transport_failures))?;
    say(out, "")?;
    say(out, format!("{:<20} {:>9} {:>9} {:>9} {:>8}", "label", "precision", "recall", "f1", "support"))?;
    for c in &report.results.per_class {
        say(
            out,
            format!(
                "{:<20} {:>9.4} {:>9.4} {:>9.4} {:>8}",
                c.label.as_str(),
                c.precision,
                c.recall,
                c.f1,
                c.support
            ),
        )?;
    }
    print_scores(out, report.results.accuracy, report.results.macro_f1)
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Validation(findings) => {
                    for line in findings {
                        eprintln!("error: {line}");
                    }
                }
                Failure::Runtime(msg) => eprintln!("error: {msg}"),
            }
            f.exit_code()
        }
    }
}
