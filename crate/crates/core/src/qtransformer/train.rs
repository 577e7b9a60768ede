use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;

use super::config::ModelConfig;
use super::model::{loss, PassSeeds};
use super::optim::AdamW;
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::vqdp::QuantumRuntime;

/// Exponential of the mean next-token negative log-likelihood of `logits`
/// (`rows × V`) at `targets`.
pub fn quantum_perplexity(logits: ndarray::ArrayView2<f64>, targets: &[usize]) -> Result<f64> {
    if logits.nrows() != targets.len() || targets.is_empty() {
        return Err(Error::argument("one target per logit row required"));
    }
    let mut nll = 0.0;
    for (row, &t) in logits.rows().into_iter().zip(targets) {
        if t >= row.len() {
            return Err(Error::argument(format!("target {t} outside vocabulary")));
        }
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let log_z = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        // Guard the log against underflow to an exact zero probability.
        nll -= (row[t] - log_z).max(f64::MIN_POSITIVE.ln());
    }
    Ok((nll / targets.len() as f64).exp())
}

/// Training windows: `T + 1` consecutive tokens starting every `T` tokens,
/// split into inputs and next-token targets.
pub fn make_windows(tokens: &[usize], seq_len: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start + seq_len < tokens.len() {
        let w = &tokens[start..start + seq_len + 1];
        out.push((w[..seq_len].to_vec(), w[1..].to_vec()));
        start += seq_len;
    }
    out
}

fn stack(windows: &[&(Vec<usize>, Vec<usize>)]) -> (Array2<usize>, Array2<usize>) {
    let t = windows[0].0.len();
    let x = Array2::from_shape_fn((windows.len(), t), |(b, i)| windows[b].0[i]);
    let y = Array2::from_shape_fn((windows.len(), t), |(b, i)| windows[b].1[i]);
    (x, y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub seed: u64,
    /// Trailing fraction of windows held out for validation.
    pub val_fraction: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 50,
            seed: 0,
            val_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training loss over the epoch's steps.
    pub loss: f64,
    pub qpl: f64,
    pub val_loss: Option<f64>,
    pub val_qpl: Option<f64>,
    /// Circuits executed since training started.
    pub circuits_executed: u64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training-set loss of the initial parameters.
    pub initial_loss: f64,
    pub epochs: Vec<EpochRecord>,
    pub train_windows: usize,
    pub val_windows: usize,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        self.epochs.last().map_or(self.initial_loss, |e| e.loss)
    }
}

fn mean_loss(
    cfg: &ModelConfig,
    params: &mut ModelParams,
    rt: &QuantumRuntime,
    windows: &[(Vec<usize>, Vec<usize>)],
    seed: u64,
) -> Result<f64> {
    let refs: Vec<&(Vec<usize>, Vec<usize>)> = windows.iter().collect();
    let mut total = 0.0;
    let mut n = 0usize;
    for (i, chunk) in refs.chunks(cfg.batch).enumerate() {
        let (x, y) = stack(chunk);
        let seeds = PassSeeds {
            circuits: derive_seed(seed, i as u64),
            dropout: None,
        };
        total += loss(cfg, params, rt, x.view(), y.view(), seeds, false)? * chunk.len() as f64;
        n += chunk.len();
    }
    Ok(total / n as f64)
}

/// Trains a freshly initialised model on `tokens` with AdamW. Batches that
/// cannot be filled are dropped. `on_epoch` sees every record as it is made.
pub fn train(
    cfg: &ModelConfig,
    tokens: &[usize],
    rt: &QuantumRuntime,
    opts: TrainOptions,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(ModelParams, TrainReport)> {
    cfg.validate()?;
    rt.validate()?;
    if let Some(&bad) = tokens.iter().find(|&&t| t >= cfg.vocab) {
        return Err(Error::argument(format!(
            "token {bad} outside vocabulary of {}",
            cfg.vocab
        )));
    }
    let windows = make_windows(tokens, cfg.seq_len);
    let n_val = (windows.len() as f64 * opts.val_fraction).floor() as usize;
    let (train_w, val_w) = windows.split_at(windows.len() - n_val);
    if train_w.len() < cfg.batch {
        return Err(Error::argument(format!(
            "corpus yields {} training windows, fewer than one batch of {}",
            train_w.len(),
            cfg.batch
        )));
    }
    let mut params = ModelParams::init(cfg, derive_seed(opts.seed, 1))?;
    let mut opt = AdamW::new(&params, cfg.lr);
    let mut shuffle_rng = rng_from_seed(derive_seed(opts.seed, 2));
    let start_circuits = rt.circuits_executed();
    let eval_seed = derive_seed(opts.seed, 3);
    let initial_loss = mean_loss(cfg, &mut params, rt, train_w, eval_seed)?;
    let mut order: Vec<usize> = (0..train_w.len()).collect();
    let mut records = Vec::with_capacity(opts.epochs);
    let mut step = 0u64;
    for epoch in 1..=opts.epochs {
        let t0 = Instant::now();
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        let mut n_steps = 0usize;
        for batch in order.chunks_exact(cfg.batch) {
            let chunk: Vec<&(Vec<usize>, Vec<usize>)> = batch.iter().map(|&i| &train_w[i]).collect();
            let (x, y) = stack(&chunk);
            params.zero_grad();
            let seeds = PassSeeds {
                circuits: derive_seed(opts.seed, 0x1000_0000 + step),
                dropout: Some(derive_seed(opts.seed, 0x2000_0000 + step)),
            };
            let l =
                loss(cfg, &mut params, rt, x.view(), y.view(), seeds, true).map_err(|e| annotate(e, epoch, n_steps))?;
            opt.step(&mut params);
            if let Some(name) = params.first_non_finite() {
                return Err(Error::NonFinite(format!(
                    "tensor {name} after epoch {epoch}, step {n_steps} (loss {l})"
                )));
            }
            total += l;
            n_steps += 1;
            step += 1;
        }
        let train_loss = total / n_steps as f64;
        let val_loss = if val_w.is_empty() {
            None
        } else {
            Some(mean_loss(cfg, &mut params, rt, val_w, eval_seed)?)
        };
        let record = EpochRecord {
            epoch,
            loss: train_loss,
            qpl: train_loss.exp(),
            val_loss,
            val_qpl: val_loss.map(f64::exp),
            circuits_executed: rt.circuits_executed() - start_circuits,
            wall_seconds: t0.elapsed().as_secs_f64(),
        };
        on_epoch(&record);
        records.push(record);
    }
    Ok((
        params,
        TrainReport {
            initial_loss,
            epochs: records,
            train_windows: train_w.len(),
            val_windows: val_w.len(),
        },
    ))
}

fn annotate(e: Error, epoch: usize, step: usize) -> Error {
    match e {
        Error::NonFinite(what) => Error::NonFinite(format!("{what} at epoch {epoch}, step {step}")),
        other => other,
    }
}
