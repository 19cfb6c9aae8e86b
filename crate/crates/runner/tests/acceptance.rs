//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any gating criterion fails.

mod common;

use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use eicl_core::labeling::{build_soft_label, top_k2_emotions};
use eicl_core::metrics::{accuracy, macro_f1};
use eicl_core::partition::divide_candidates;
use eicl_core::retrieval::{cosine_slices, top_k_similar};
use eicl_core::{AuxStore, EmotionDistribution, EmotionLabel, LabelSpace, ParsedPrediction};
use eicl_runner::config::{Mode, RunConfig};
use eicl_runner::experiment::run_experiment;
use eicl_runner::fixture::shipped_dir;
use eicl_runner::pilot::run_pilot;
use eicl_runner::Inputs;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn labels(n: usize) -> LabelSpace {
    let raw: Vec<String> = (0..n).map(|i| format!("l{i:02}")).collect();
    LabelSpace::from_strs("synthetic", &raw).unwrap()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random distribution; with `ties` the probabilities sit on a coarse grid.
fn random_dist(rng: &mut ChaCha8Rng, n: usize, ties: bool) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            if ties {
                rng.random_range(0..4) as f64
            } else {
                (2.0 * normal(rng)).exp()
            }
        })
        .collect();
    let raw = if raw.iter().all(|x| *x == 0.0) { vec![1.0; n] } else { raw };
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap()
}

// --- retrieval -----------------------------------------------------------

fn naive_cosine(u: &[f64], v: &[f64]) -> f64 {
    let mut d = 0.0;
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..u.len() {
        d += u[i] * v[i];
    }
    for x in u {
        a += x * x;
    }
    for x in v {
        b += x * x;
    }
    (d / (a.sqrt() * b.sqrt())).clamp(-1.0, 1.0)
}

fn retrieval_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let space = labels(2);
    let mut duplicated = 0usize;
    for instance in 0..200 {
        let size = rng.random_range(10..=2000);
        let dim = rng.random_range(4..=64);
        let k1 = rng.random_range(1..=10);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(size);
        for i in 0..size {
            if i > 0 && rng.random_bool(0.15) {
                let j = rng.random_range(0..i);
                vectors.push(vectors[j].clone());
                duplicated += 1;
            } else {
                vectors.push((0..dim).map(|_| normal(&mut rng)).collect());
            }
        }
        let mut store = AuxStore::new(space.clone(), dim);
        for (i, v) in vectors.iter().enumerate() {
            store.insert(format!("s{i:04}"), v.clone(), vec![0.5, 0.5]).unwrap();
        }
        // half the queries come from the store and exclude themselves
        let (query, exclude): (Vec<f64>, HashSet<String>) = if instance % 2 == 0 {
            let q = rng.random_range(0..size);
            (vectors[q].clone(), [format!("s{q:04}")].into())
        } else {
            ((0..dim).map(|_| normal(&mut rng)).collect(), HashSet::new())
        };
        let qv = eicl_core::EmotionVector::new(query.clone()).unwrap();
        let got: Vec<String> = top_k_similar(&qv, &store, k1, &exclude)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|n| n.sample_id)
            .collect();

        let mut all: Vec<(f64, String)> = vectors
            .iter()
            .enumerate()
            .map(|(i, v)| (naive_cosine(&query, v), format!("s{i:04}")))
            .filter(|(_, id)| !exclude.contains(id))
            .collect();
        all.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let want: Vec<String> = all.into_iter().take(k1).map(|(_, id)| id).collect();
        ensure!(got == want, "instance {instance}: got {got:?}, oracle {want:?}");
    }
    Ok(format!("200 instances, {duplicated} duplicated vectors"))
}

// --- cosine --------------------------------------------------------------

/// Error-free transformations for a double-double reference.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn dd_add(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(x.0, y.0);
    let e = e + x.1 + y.1;
    two_sum(s, e)
}

fn dd_dot(u: &[f64], v: &[f64]) -> (f64, f64) {
    u.iter()
        .zip(v)
        .fold((0.0, 0.0), |acc, (a, b)| dd_add(acc, two_prod(*a, *b)))
}

fn dd_mul(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let (p, e) = two_prod(x.0, y.0);
    two_sum(p, e + x.0 * y.1 + x.1 * y.0)
}

fn dd_sqrt(x: (f64, f64)) -> (f64, f64) {
    let s = x.0.sqrt();
    let (p, e) = two_prod(s, s);
    let r = ((x.0 - p) - e + x.1) / (2.0 * s);
    two_sum(s, r)
}

fn dd_div(x: (f64, f64), y: (f64, f64)) -> f64 {
    let q = x.0 / y.0;
    let (p, e) = two_prod(q, y.0);
    let r = (x.0 - p - e + x.1 - q * y.1) / y.0;
    q + r
}

fn reference_cosine(u: &[f64], v: &[f64]) -> f64 {
    let denom = dd_sqrt(dd_mul(dd_dot(u, u), dd_dot(v, v)));
    dd_div(dd_dot(u, v), denom)
}

fn cosine_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for pair in 0..10_000 {
        let dim = rng.random_range(2..=768);
        let scale_u = 10f64.powi(rng.random_range(-3..=3));
        let scale_v = 10f64.powi(rng.random_range(-3..=3));
        let u: Vec<f64> = (0..dim).map(|_| scale_u * normal(&mut rng)).collect();
        let mut v: Vec<f64> = (0..dim).map(|_| scale_v * normal(&mut rng)).collect();
        if pair % 10 == 0 {
            // near-parallel pairs stress cancellation in the denominator
            v = u.iter().map(|x| x * 3.0 + 1e-6 * normal(&mut rng)).collect();
        }
        let got = cosine_slices(&u, &v).map_err(|e| e.to_string())?;
        let want = reference_cosine(&u, &v).clamp(-1.0, 1.0);
        worst = worst.max((got - want).abs());
        ensure!((got - want).abs() <= 1e-9, "pair {pair}: {got} vs reference {want}");

        ensure!(
            got.to_bits() == cosine_slices(&v, &u).unwrap().to_bits(),
            "pair {pair}: asymmetric"
        );
        let self_sim = cosine_slices(&u, &u).unwrap();
        ensure!((self_sim - 1.0).abs() <= 1e-12, "pair {pair}: self similarity {self_sim}");
        let c = 10f64.powi(rng.random_range(-4..=4)) * rng.random_range(0.5..2.0);
        let scaled: Vec<f64> = u.iter().map(|x| x * c).collect();
        let s = cosine_slices(&scaled, &v).unwrap();
        ensure!((s - got).abs() <= 1e-12, "pair {pair}: scale {c} moved {got} to {s}");

        // disjoint supports are exactly orthogonal
        let a: Vec<f64> = u.iter().enumerate().map(|(i, x)| if i % 2 == 0 { *x } else { 0.0 }).collect();
        let b: Vec<f64> = v.iter().enumerate().map(|(i, x)| if i % 2 == 1 { *x } else { 0.0 }).collect();
        let o = cosine_slices(&a, &b).unwrap();
        ensure!(o == 0.0, "pair {pair}: orthogonal pair scored {o}");
    }
    Ok(format!("10000 pairs, max |diff| {worst:.2e}"))
}

// --- soft labels ---------------------------------------------------------

fn soft_label_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for t in 0..10_000 {
        let n = rng.random_range(2..=41);
        let space = labels(n);
        let probs = random_dist(&mut rng, n, t % 5 == 0);
        let dist = EmotionDistribution::new(probs.clone()).unwrap();
        let k2 = rng.random_range(1..=n);
        let alpha: f64 = rng.random_range(0.0..1.0);
        let gt_i = rng.random_range(0..n);
        let gt = space.labels()[gt_i].clone();

        let predicted = top_k2_emotions(&dist, &space, k2).map_err(|e| e.to_string())?;
        let soft = build_soft_label(&gt, &predicted, alpha, &space).map_err(|e| e.to_string())?;
        ensure!((soft.total() - 1.0).abs() <= 1e-9, "tuple {t}: weights sum {}", soft.total());

        // independent top-k2 and S
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
        let s: f64 = order[..k2].iter().filter(|&&i| i != gt_i).map(|&i| probs[i]).sum();
        let gt_w = soft.weight_of(&gt).unwrap_or(0.0);
        ensure!(
            (gt_w - (1.0 - alpha * s)).abs() <= 1e-12,
            "tuple {t}: gt weight {gt_w}, expected {}",
            1.0 - alpha * s
        );

        let hard = build_soft_label(&gt, &predicted, 0.0, &space).unwrap();
        ensure!(
            hard.entries.len() == 1 && hard.entries[0].label == gt && hard.entries[0].weight == 1.0,
            "tuple {t}: alpha=0 is not the hard label"
        );

        let alpha2 = alpha + (1.0 - alpha) * rng.random_range(0.0..1.0);
        let soft2 = build_soft_label(&gt, &predicted, alpha2, &space).unwrap();
        ensure!(
            soft2.weight_of(&gt).unwrap_or(0.0) <= gt_w + 1e-15,
            "tuple {t}: gt weight rose with alpha"
        );
        for e in &soft.entries {
            if e.label != gt {
                let w2 = soft2.weight_of(&e.label).unwrap_or(0.0);
                ensure!(w2 + 1e-15 >= e.weight, "tuple {t}: `{}` fell with alpha", e.label);
            }
        }
    }
    Ok("10000 tuples".into())
}

// --- partition -----------------------------------------------------------

fn partition_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut checked = 0usize;
    for d in 0..100 {
        let n = if d < 10 { 41 } else { rng.random_range(2..=41) };
        let space = labels(n);
        let probs = random_dist(&mut rng, n, d % 3 == 0);
        let dist = EmotionDistribution::new(probs.clone()).unwrap();
        for k3 in 1..=n {
            let p = divide_candidates(&dist, k3, &space).map_err(|e| e.to_string())?;
            ensure!(p.possible.len() == k3, "dist {d} k3 {k3}: |possible| {}", p.possible.len());
            ensure!(p.impossible.len() == n - k3, "dist {d} k3 {k3}: |impossible| wrong");
            let a: HashSet<&EmotionLabel> = p.possible.iter().collect();
            let b: HashSet<&EmotionLabel> = p.impossible.iter().collect();
            ensure!(a.is_disjoint(&b), "dist {d} k3 {k3}: overlap");
            ensure!(a.len() + b.len() == n, "dist {d} k3 {k3}: union misses labels");
            let prob = |l: &EmotionLabel| probs[space.index_of(l).unwrap()];
            let min_p = p.possible.iter().map(prob).fold(f64::INFINITY, f64::min);
            let max_i = p.impossible.iter().map(prob).fold(f64::NEG_INFINITY, f64::max);
            ensure!(min_p >= max_i, "dist {d} k3 {k3}: {min_p} < {max_i}");
            checked += 1;
        }
    }
    Ok(format!("100 distributions, {checked} (distribution, k3) cases"))
}

// --- end to end ----------------------------------------------------------

/// Aux-argmax accuracy read straight from the shipped files, without the
/// library's loaders.
fn scanned_argmax_accuracy(dir: &Path) -> (f64, usize, usize, usize) {
    let store_text = std::fs::read_to_string(dir.join("emotion_store.jsonl")).unwrap();
    let mut lines = store_text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    let aux: Vec<String> = header["aux_labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let mut probs: HashMap<String, Vec<f64>> = HashMap::new();
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let p = v["probs"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        probs.insert(v["id"].as_str().unwrap().to_string(), p);
    }

    let corpus_text = std::fs::read_to_string(dir.join("corpus.jsonl")).unwrap();
    let rows: Vec<serde_json::Value> =
        corpus_text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let mut corpus_labels: Vec<String> =
        rows.iter().map(|r| r["label"].as_str().unwrap().to_string()).collect();
    corpus_labels.sort();
    corpus_labels.dedup();
    let aligned: Vec<&String> = corpus_labels.iter().filter(|l| aux.contains(l)).collect();

    let (mut hits, mut total, mut train) = (0usize, 0usize, 0usize);
    for r in &rows {
        let gold = r["label"].as_str().unwrap();
        if !aligned.iter().any(|l| *l == gold) {
            continue;
        }
        if r["split"] == "train" {
            train += 1;
            continue;
        }
        let p = &probs[r["id"].as_str().unwrap()];
        let mut best = 0;
        for (i, l) in aligned.iter().enumerate() {
            let pi = p[aux.iter().position(|a| a == *l).unwrap()];
            let pb = p[aux.iter().position(|a| a == aligned[best]).unwrap()];
            if pi > pb {
                best = i;
            }
        }
        total += 1;
        hits += usize::from(aligned[best] == gold);
    }
    (hits as f64 / total as f64, total, train, aligned.len())
}

fn end_to_end() -> Outcome {
    let (cfg, inputs) = common::shipped_inputs();
    let (expected, tests, trains, n_labels) = scanned_argmax_accuracy(&shipped_dir());
    ensure!(
        tests >= 100 && trains >= 500 && n_labels == 8,
        "fixture too small: {tests} test, {trains} train, {n_labels} labels"
    );
    let rt = runtime();
    let echo = rt
        .block_on(run_experiment(&cfg, &inputs, &common::echo()))
        .map_err(|e| e.to_string())?;
    ensure!(
        echo.results.accuracy == expected,
        "echo accuracy {} but scanned argmax accuracy {expected}",
        echo.results.accuracy
    );
    let oracle = rt
        .block_on(run_experiment(&cfg, &inputs, &common::oracle(&inputs)))
        .map_err(|e| e.to_string())?;
    ensure!(
        oracle.results.accuracy == 1.0 && oracle.results.macro_f1 == 1.0,
        "oracle scored {} / {}",
        oracle.results.accuracy,
        oracle.results.macro_f1
    );
    Ok(format!(
        "{tests} queries, echo accuracy {expected:.4} matches scan, oracle 1.0/1.0"
    ))
}

// --- metrics -------------------------------------------------------------

#[allow(clippy::needless_range_loop)]
fn oracle_scores(preds: &[Option<usize>], golds: &[usize], n: usize) -> (f64, f64) {
    let mut confusion = vec![vec![0usize; n + 1]; n];
    for (p, g) in preds.iter().zip(golds) {
        confusion[*g][p.unwrap_or(n)] += 1;
    }
    let correct: usize = (0..n).map(|c| confusion[c][c]).sum();
    let acc = correct as f64 / golds.len() as f64;
    let mut f1_sum = 0.0;
    for c in 0..n {
        let tp = confusion[c][c] as f64;
        let fp = (0..n).filter(|&g| g != c).map(|g| confusion[g][c]).sum::<usize>() as f64;
        let fn_ = (0..=n).filter(|&p| p != c).map(|p| confusion[c][p]).sum::<usize>() as f64;
        let prec = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
        let rec = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
        f1_sum += if prec + rec == 0.0 { 0.0 } else { 2.0 * prec * rec / (prec + rec) };
    }
    (acc, f1_sum / n as f64)
}

fn metric_oracle() -> Outcome {
    let space = LabelSpace::from_strs("abc", &["a", "b", "c"]).unwrap();
    let l = |s: &str| EmotionLabel::new(s).unwrap();
    let golds = [l("a"), l("a"), l("b"), l("c")];
    let preds: Vec<ParsedPrediction> =
        ["a", "b", "b", "b"].iter().map(|s| ParsedPrediction::Label(l(s))).collect();
    let f1 = macro_f1(&preds, &golds, &space).map_err(|e| e.to_string())?;
    ensure!((f1 - 7.0 / 18.0).abs() <= 1e-12, "hand example gave {f1}");
    ensure!(format!("{f1:.4}") == "0.3889", "hand example rounds to {f1:.4}");
    ensure!(accuracy(&preds, &golds).unwrap() == 0.5, "hand example accuracy");

    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut worst = 0.0f64;
    for set in 0..500 {
        let (n, len) = if set == 0 { (6, 200) } else { (rng.random_range(2..=10), rng.random_range(1..=200)) };
        let space = labels(n);
        // some classes never occur as gold
        let used = rng.random_range(1..=n);
        let golds: Vec<usize> = (0..len).map(|_| rng.random_range(0..used)).collect();
        let preds: Vec<Option<usize>> = golds
            .iter()
            .map(|&g| match rng.random_range(0..10) {
                0 => None,
                1..=5 => Some(g),
                _ => Some(rng.random_range(0..n)),
            })
            .collect();
        let gl: Vec<EmotionLabel> = golds.iter().map(|&g| space.labels()[g].clone()).collect();
        let pl: Vec<ParsedPrediction> = preds
            .iter()
            .map(|p| match p {
                Some(i) => ParsedPrediction::Label(space.labels()[*i].clone()),
                None => ParsedPrediction::Unparseable("no idea".into()),
            })
            .collect();
        let (acc, f1) = oracle_scores(&preds, &golds, n);
        let got_acc = accuracy(&pl, &gl).map_err(|e| e.to_string())?;
        let got_f1 = macro_f1(&pl, &gl, &space).map_err(|e| e.to_string())?;
        worst = worst.max((got_acc - acc).abs()).max((got_f1 - f1).abs());
        ensure!((got_acc - acc).abs() <= 1e-12, "set {set}: accuracy {got_acc} vs {acc}");
        ensure!((got_f1 - f1).abs() <= 1e-12, "set {set}: macro-F1 {got_f1} vs {f1}");
    }
    Ok(format!("hand example {f1:.4}, 500 sets, max |diff| {worst:.1e}"))
}

// --- ablations -----------------------------------------------------------

/// Everything in a report except the config snapshot, whose `mode` field
/// necessarily names the mode that was run.
fn comparable(report: &eicl_core::report::RunReport) -> (String, String, Vec<String>) {
    (
        serde_json::to_string(&report.effective).unwrap(),
        serde_json::to_string(&report.results).unwrap(),
        report.results.records.iter().map(|r| r.prompt.clone()).collect(),
    )
}

fn ablation_identities() -> Outcome {
    let (cfg, inputs) = common::shipped_inputs();
    let rt = runtime();
    let run = |c: &RunConfig| rt.block_on(run_experiment(c, &inputs, &common::scripted())).unwrap();

    let wo_dsl = run(&RunConfig { mode: Mode::WoDsl, ..cfg.clone() });
    let alpha0 = run(&RunConfig { alpha: 0.0, ..cfg.clone() });
    ensure!(comparable(&wo_dsl) == comparable(&alpha0), "wo-dsl differs from alpha=0");

    let n = inputs.aligned.len();
    let wo_eep = run(&RunConfig { mode: Mode::WoEep, ..cfg.clone() });
    let k3n = run(&RunConfig { k3: Some(n), ..cfg.clone() });
    ensure!(comparable(&wo_eep) == comparable(&k3n), "wo-eep differs from k3=N");

    let full = run(&cfg);
    ensure!(comparable(&full) != comparable(&wo_dsl), "ablation had no effect");
    Ok(format!("{} prompts compared per pair", wo_dsl.results.records.len()))
}

// --- pilot ---------------------------------------------------------------

fn pilot_monotonicity() -> Outcome {
    let rt = runtime();
    let (mut cfg, inputs, _) = common::step_inputs(0.0, 40, 5);
    cfg.pilot.bins = 4;
    let report = rt.block_on(run_pilot(&cfg, &inputs, &common::echo())).map_err(|e| e.to_string())?;
    let acc: Vec<Option<f64>> = report.bins.iter().map(|b| b.accuracy).collect();
    ensure!(
        acc == vec![Some(0.0), Some(0.0), Some(1.0), Some(1.0)],
        "4-bin step gave {acc:?}"
    );

    for threshold in [-0.6, -0.1, 0.3, 0.75] {
        let (mut cfg, inputs, _) = common::step_inputs(threshold, 120, 5);
        cfg.pilot.bins = 10;
        let report = rt.block_on(run_pilot(&cfg, &inputs, &common::echo())).map_err(|e| e.to_string())?;
        let occupied: Vec<f64> = report.bins.iter().filter_map(|b| b.accuracy).collect();
        ensure!(
            occupied.windows(2).all(|w| w[0] <= w[1]),
            "threshold {threshold}: bins {occupied:?} not non-decreasing"
        );
    }
    Ok("step fixture [0, 0, 1, 1]; 4 thresholds non-decreasing".into())
}

// --- determinism ---------------------------------------------------------

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = shipped_dir().join("config.json");
    let script = shipped_dir().join("script.json");
    // same config, same output directory; keep the first run's bytes
    let out = dir.path().join("out");
    let names = ["report.json", "predictions.csv"];
    let mut first: Vec<Vec<u8>> = Vec::new();
    let mut compared = Vec::new();
    for run in 0..2 {
        let status = Command::new(env!("CARGO_BIN_EXE_eicl"))
            .arg("run")
            .arg("--config")
            .arg(&config)
            .arg("--script")
            .arg(&script)
            .arg("--output-dir")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(status.status.success(), "run {run} failed: {}", String::from_utf8_lossy(&status.stderr));
        let bytes: Vec<Vec<u8>> = names
            .iter()
            .map(|n| std::fs::read(out.join(n)).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        if run == 0 {
            first = bytes;
        } else {
            for ((name, a), b) in names.iter().zip(&first).zip(&bytes) {
                ensure!(a == b, "{name} differs between runs");
                compared.push(format!("{name} ({} bytes)", a.len()));
            }
        }
    }
    Ok(compared.join(", "))
}

// --- live smoke ----------------------------------------------------------

enum Live {
    Skipped(String),
    Ran(Outcome),
}

fn live_smoke() -> Live {
    let Ok(path) = std::env::var("EICL_LIVE_CONFIG") else {
        return Live::Skipped("EICL_LIVE_CONFIG not set".into());
    };
    let outcome = (|| -> Outcome {
        let cfg = RunConfig::load(&path).map_err(|e| e.to_string())?;
        let eicl_runner::config::ProviderSpec::Http(pc) = &cfg.provider else {
            return Err("live config must use an http provider".into());
        };
        let inputs = Inputs::load(&cfg).map_err(|e| e.to_string())?;
        ensure!(inputs.corpus.test().len() >= 50, "need at least 50 aligned test queries");
        let gateway = eicl_gateway::Gateway::from_config(pc).map_err(|e| e.to_string())?;
        let rt = runtime();
        let mut scores = Vec::new();
        for mode in [Mode::ZeroShot, Mode::EIcl] {
            let c = RunConfig { mode, ..cfg.clone() };
            let r = rt.block_on(run_experiment(&c, &inputs, &gateway)).map_err(|e| e.to_string())?;
            let json = r.to_json();
            eicl_core::report::RunReport::from_json(&json).map_err(|e| e.to_string())?;
            let limit = r.results.records.len() / 10;
            ensure!(
                r.results.unparseable_count <= limit,
                "{mode}: {} unparseable of {}",
                r.results.unparseable_count,
                r.results.records.len()
            );
            scores.push(r.results.accuracy);
        }
        let direction = if scores[0] < scores[1] { "zero-shot < e-icl" } else { "zero-shot >= e-icl" };
        Ok(format!("zero-shot {:.4}, e-icl {:.4} ({direction})", scores[0], scores[1]))
    })();
    Live::Ran(outcome)
}

// --- harness -------------------------------------------------------------

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "retrieval oracle equivalence", budget: Some(Duration::from_secs(10)), check: retrieval_oracle },
        Criterion { name: "cosine correctness", budget: None, check: cosine_correctness },
        Criterion { name: "soft-label algebra", budget: Some(Duration::from_secs(5)), check: soft_label_algebra },
        Criterion { name: "partition laws", budget: Some(Duration::from_secs(5)), check: partition_laws },
        Criterion { name: "end-to-end offline integration", budget: Some(Duration::from_secs(30)), check: end_to_end },
        Criterion { name: "metric oracle", budget: None, check: metric_oracle },
        Criterion { name: "ablation identities", budget: None, check: ablation_identities },
        Criterion { name: "pilot monotonicity", budget: None, check: pilot_monotonicity },
        Criterion { name: "determinism", budget: None, check: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = started.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:<34} {detail} [{elapsed:.2?}]", c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:<34} {why} [{elapsed:.2?}]", c.name);
            }
        }
    }
    match live_smoke() {
        Live::Skipped(why) => println!("SKIP  {:<34} {why} (non-gating)", "live smoke"),
        Live::Ran(Ok(detail)) => println!("PASS  {:<34} {detail} (non-gating)", "live smoke"),
        Live::Ran(Err(why)) => println!("FAIL  {:<34} {why} (non-gating)", "live smoke"),
    }
    println!("{} of {} gating criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
