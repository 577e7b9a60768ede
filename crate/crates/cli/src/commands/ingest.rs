//! `ingest-check`: tokenizer and vocabulary statistics of a corpus.

use vqt_core::qtransformer::make_windows;

use super::{load_corpus, metrics_csv};
use crate::corpus::{tokenize, Vocab};
use crate::error::{CliError, CliResult};
use crate::output::{csv, RunOutput};
use crate::settings::Settings;
use crate::svg;

pub fn defaults() -> Settings {
    Settings::new(
        "ingest-check",
        &[
            ("corpus", ""),
            ("vocab", "100"),
            ("seq_len", "6"),
            ("batch", "5"),
            ("val_fraction", "0.1"),
            ("out", "results/ingest-check"),
            ("svg", "false"),
        ],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestSummary {
    pub words: usize,
    pub distinct: usize,
    pub oov_rate: f64,
    pub train_windows: usize,
    pub val_windows: usize,
}

pub fn run(settings: &Settings) -> CliResult<IngestSummary> {
    let text = load_corpus(settings)?;
    let size: usize = settings.get("vocab")?;
    let seq_len: usize = settings.get("seq_len")?;
    let batch: usize = settings.get("batch")?;
    let val_fraction: f64 = settings.get("val_fraction")?;
    if size == 0 || seq_len == 0 || batch == 0 {
        return Err(CliError::Config("vocab, seq_len and batch must be positive".into()));
    }
    let words = tokenize(&text);
    if words.is_empty() {
        return Err(CliError::Config("corpus contains no words".into()));
    }
    let vocab = Vocab::build(&words, size);
    let tokens = vocab.encode(&words);
    let oov = tokens.iter().filter(|&&t| t == vocab.oov_id()).count();
    let mut distinct: Vec<&String> = words.iter().collect();
    distinct.sort();
    distinct.dedup();
    let windows = make_windows(&tokens, seq_len).len();
    let val = (windows as f64 * val_fraction).floor() as usize;
    let summary = IngestSummary {
        words: words.len(),
        distinct: distinct.len(),
        oov_rate: oov as f64 / words.len() as f64,
        train_windows: windows - val,
        val_windows: val,
    };
    let mut out = RunOutput::create(settings)?;
    out.write(
        "ingest.csv",
        &metrics_csv(&[
            ("characters", text.chars().count().to_string()),
            ("words", summary.words.to_string()),
            ("distinct_words", summary.distinct.to_string()),
            ("vocab_size", size.to_string()),
            ("oov_tokens", oov.to_string()),
            ("oov_rate", summary.oov_rate.to_string()),
            ("windows", windows.to_string()),
            ("train_windows", summary.train_windows.to_string()),
            ("val_windows", val.to_string()),
            ("batches_per_epoch", (summary.train_windows / batch).to_string()),
        ]),
    )?;
    out.write(
        "vocab.csv",
        &csv(
            "id,word,count",
            (0..vocab.len()).map(|i| vec![i.to_string(), vocab.word(i).to_string(), vocab.count(i).to_string()]),
        ),
    )?;
    out.write_svg("rank_frequency.svg", || {
        let pts: Vec<(f64, f64)> = (0..vocab.oov_id())
            .filter(|&i| vocab.count(i) > 0)
            .map(|i| (((i + 1) as f64).ln(), (vocab.count(i) as f64).ln()))
            .collect();
        svg::scatter(&pts, "rank-frequency", "ln rank", "ln count", false)
    })?;
    println!(
        "ingest-check: {} words, {} distinct, OOV rate {:.4}, {} training windows",
        summary.words, summary.distinct, summary.oov_rate, summary.train_windows
    );
    out.finish(settings, &[], serde_json::Value::Null)?;
    Ok(summary)
}
