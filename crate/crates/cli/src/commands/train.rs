//! `train`: the toy transformer on a word-level corpus.

use vqt_core::qtransformer::{save_checkpoint, train, EpochRecord, ModelConfig, TrainOptions, TrainReport};
use vqt_core::vqdp::ShotBudget;

use super::{load_corpus, runtime, with_defaults};
use crate::corpus::{tokenize, Vocab};
use crate::error::{CliError, CliResult};
use crate::output::{csv, opt, RunOutput};
use crate::settings::Settings;
use crate::svg;

/// Model keys, passed through to [`ModelConfig::set`].
const MODEL_KEYS: [&str; 14] = [
    "vocab",
    "seq_len",
    "d_model",
    "d_ff",
    "blocks",
    "heads",
    "nq_addr",
    "nq_data",
    "d_mlp",
    "dropout",
    "lr",
    "batch",
    "attn_norm",
    "expressive",
];

pub fn defaults() -> Settings {
    let model = ModelConfig::default();
    let model_pairs: Vec<(&str, String)> = model
        .to_pairs()
        .into_iter()
        .filter(|(k, _)| MODEL_KEYS.contains(k))
        .collect();
    let mut extra: Vec<(&str, &str)> = vec![
        ("shots", "1024"),
        ("epochs", "50"),
        ("runs", "1"),
        ("corpus", ""),
        ("val_fraction", "0.1"),
        ("checkpoint", "true"),
    ];
    extra.extend(model_pairs.iter().map(|(k, v)| (*k, v.as_str())));
    with_defaults("train", "analytic", &extra)
}

pub fn model_config(settings: &Settings) -> CliResult<ModelConfig> {
    let mut cfg = ModelConfig::default();
    for key in MODEL_KEYS {
        cfg.set(key, settings.raw(key))?;
    }
    cfg.shots = settings.get("shots")?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub reports: Vec<TrainReport>,
}

impl TrainSummary {
    pub fn mean_final_loss(&self) -> f64 {
        self.reports.iter().map(|r| r.final_loss()).sum::<f64>() / self.reports.len() as f64
    }

    pub fn mean_initial_loss(&self) -> f64 {
        self.reports.iter().map(|r| r.initial_loss).sum::<f64>() / self.reports.len() as f64
    }
}

fn log_rows(run: usize, records: &[EpochRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            vec![
                run.to_string(),
                r.epoch.to_string(),
                r.loss.to_string(),
                r.qpl.to_string(),
                opt(r.val_loss),
                opt(r.val_qpl),
                r.circuits_executed.to_string(),
            ]
        })
        .collect()
}

const LOG_HEADER: &str = "run,epoch,loss,qpl,val_loss,val_qpl,circuits_executed";

pub fn run(settings: &Settings) -> CliResult<TrainSummary> {
    let seed: u64 = settings.get("seed")?;
    let epochs: usize = settings.get("epochs")?;
    let runs: usize = settings.get("runs")?;
    let val_fraction: f64 = settings.get("val_fraction")?;
    if runs == 0 {
        return Err(CliError::Config("runs must be positive".into()));
    }
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(CliError::Config(format!("val_fraction {val_fraction} outside [0, 1)")));
    }
    let cfg = model_config(settings)?;
    let rt = runtime(settings, ShotBudget::PerAddress(cfg.shots))?;
    let words = tokenize(&load_corpus(settings)?);
    let vocab = Vocab::build(&words, cfg.vocab);
    let tokens = vocab.encode(&words);
    let mut out = RunOutput::create(settings)?;

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut timings = Vec::new();
    let seeds: Vec<u64> = (0..runs as u64).map(|r| seed.wrapping_add(r)).collect();
    for (run, &run_seed) in seeds.iter().enumerate() {
        let mut done: Vec<EpochRecord> = Vec::new();
        let result = train(
            &cfg,
            &tokens,
            &rt,
            TrainOptions {
                epochs,
                seed: run_seed,
                val_fraction,
            },
            |r| {
                eprintln!("run {run} epoch {} loss {:.4} qpl {:.3}", r.epoch, r.loss, r.qpl);
                done.push(r.clone());
            },
        );
        let (params, report) = match result {
            Ok(ok) => ok,
            Err(e) => {
                rows.extend(log_rows(run, &done));
                out.write("train_log.csv", &csv(LOG_HEADER, rows))?;
                out.write("failure.txt", &format!("run {run} (seed {run_seed}) aborted: {e}\n"))?;
                return Err(e.into());
            }
        };
        rows.extend(log_rows(run, &report.epochs));
        timings.push(report.epochs.iter().map(|e| e.wall_seconds).collect::<Vec<_>>());
        if settings.get::<bool>("checkpoint")? {
            let name = format!("checkpoint_run{run}.txt");
            let mut text = Vec::new();
            save_checkpoint(&mut text, &cfg, &params)?;
            out.write(&name, &String::from_utf8(text).expect("checkpoint text is UTF-8"))?;
        }
        reports.push(report);
    }
    out.write("train_log.csv", &csv(LOG_HEADER, rows))?;

    let mut summary_rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(run, r)| {
            let last = r.epochs.last();
            vec![
                run.to_string(),
                r.initial_loss.to_string(),
                r.final_loss().to_string(),
                r.final_loss().exp().to_string(),
                opt(last.and_then(|e| e.val_loss)),
                opt(last.and_then(|e| e.val_qpl)),
                last.map_or(0, |e| e.circuits_executed).to_string(),
            ]
        })
        .collect();
    let summary = TrainSummary { reports };
    let mean_final = summary.mean_final_loss();
    summary_rows.push(vec![
        "mean".into(),
        summary.mean_initial_loss().to_string(),
        mean_final.to_string(),
        mean_final.exp().to_string(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    out.write(
        "summary.csv",
        &csv(
            "run,initial_loss,final_loss,final_qpl,final_val_loss,final_val_qpl,circuits_executed",
            summary_rows,
        ),
    )?;
    out.write_svg("loss.svg", || {
        let pts: Vec<(f64, f64)> = (0..epochs)
            .map(|e| {
                let mean = summary.reports.iter().map(|r| r.epochs[e].loss).sum::<f64>() / runs as f64;
                ((e + 1) as f64, mean)
            })
            .collect();
        svg::line(&pts, "training loss", "epoch", "loss")
    })?;
    for (run, r) in summary.reports.iter().enumerate() {
        println!(
            "train run {run}: loss {:.4} -> {:.4} (QPL {:.3})",
            r.initial_loss,
            r.final_loss(),
            r.final_loss().exp()
        );
    }
    if runs > 1 {
        println!(
            "train: mean final loss {mean_final:.4} (QPL {:.3}) over {runs} runs",
            mean_final.exp()
        );
    }
    out.finish(
        settings,
        &seeds,
        serde_json::json!({ "q_dim": cfg.q_dim(), "epoch_seconds": timings }),
    )?;
    Ok(summary)
}
