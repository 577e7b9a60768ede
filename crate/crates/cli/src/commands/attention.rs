//! `attention-compare`: quantum `Q·Kᵀ` against the classical product on
//! random tensors.

use ndarray::{Array3, Axis};
use rand::Rng;
use vqt_core::qtransformer::layers::{bmm, bt};
use vqt_core::rng::{derive_seed, rng_from_seed};
use vqt_core::vqdp::stats::log_log_slope;
use vqt_core::vqdp::{vqdp_matmul, ShotBudget};

use super::{metrics_csv, runtime, with_defaults};
use crate::error::{CliError, CliResult};
use crate::output::{csv, histogram_csv, symmetric_histogram, RunOutput};
use crate::settings::Settings;
use crate::svg;

pub fn defaults() -> Settings {
    with_defaults(
        "attention-compare",
        "statevector",
        &[
            ("shots", "3000000"),
            ("batch", "10"),
            ("seq", "10"),
            ("features", "10"),
            ("sweep", "0.25,1,4"),
            ("bins", "40"),
        ],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionSummary {
    pub mean_abs_dev: f64,
    /// Mean absolute deviation in percent of the score range `2d`.
    pub rel_range_pct: f64,
    /// Mean absolute deviation in percent of `d`.
    pub rel_d_pct: f64,
    pub max_abs_dev: f64,
    /// `(total shots, mean absolute deviation)` per sweep point.
    pub sweep: Vec<(u64, f64)>,
    pub sweep_slope: Option<f64>,
}

fn random_tensor(shape: (usize, usize, usize), seed: u64) -> Array3<f64> {
    let mut rng = rng_from_seed(seed);
    Array3::from_shape_fn(shape, |_| rng.random_range(-1.0..=1.0))
}

fn mean_abs(a: &Array3<f64>, b: &Array3<f64>) -> f64 {
    (a - b).mapv(f64::abs).mean().unwrap_or(0.0)
}

pub fn run(settings: &Settings) -> CliResult<AttentionSummary> {
    let seed: u64 = settings.get("seed")?;
    let shots: u64 = settings.get("shots")?;
    let (b, t, d): (usize, usize, usize) = (settings.get("batch")?, settings.get("seq")?, settings.get("features")?);
    let sweep: Vec<f64> = settings.get_list("sweep")?;
    let bins: usize = settings.get("bins")?;
    if b == 0 || t == 0 || d == 0 || bins == 0 {
        return Err(CliError::Config(
            "batch, seq, features and bins must be positive".into(),
        ));
    }
    let per_circuit = |total: u64| (total / d as u64).max(1);
    let q = random_tensor((b, t, d), derive_seed(seed, 0));
    let k = random_tensor((b, t, d), derive_seed(seed, 1));
    let classical = bmm(q.view(), bt(k.view()).view());
    let mut out = RunOutput::create(settings)?;

    let rt = runtime(settings, ShotBudget::PerCircuit(per_circuit(shots)))?;
    let main_seed = derive_seed(seed, 2);
    let att = vqdp_matmul(&rt, q.view(), k.view(), main_seed)?;
    let dev = &att.scores - &classical;

    out.write(
        "deviations.csv",
        &csv(
            "b,i,j,classical,quantum,deviation,variance",
            dev.indexed_iter().map(|((bb, i, j), &e)| {
                vec![
                    bb.to_string(),
                    i.to_string(),
                    j.to_string(),
                    classical[[bb, i, j]].to_string(),
                    att.scores[[bb, i, j]].to_string(),
                    e.to_string(),
                    att.variance[[bb, i, j]].to_string(),
                ]
            }),
        ),
    )?;
    let per_ij = dev.mapv(f64::abs).mean_axis(Axis(0)).expect("batch is positive");
    out.write(
        "error_matrix.csv",
        &csv(
            "i,j,mean_abs_dev",
            per_ij
                .indexed_iter()
                .map(|((i, j), v)| vec![i.to_string(), j.to_string(), v.to_string()]),
        ),
    )?;
    let dev_values: Vec<f64> = dev.iter().copied().collect();
    let max_abs = dev_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let hist = symmetric_histogram(&dev_values, bins);
    out.write("deviation_hist.csv", &histogram_csv(&hist))?;

    let mut sweep_rows = Vec::new();
    for (idx, m) in sweep.iter().enumerate() {
        if m.is_nan() || *m <= 0.0 {
            return Err(CliError::Config(format!("sweep multiplier {m} must be positive")));
        }
        let total = (shots as f64 * m).round() as u64;
        let rt = runtime(settings, ShotBudget::PerCircuit(per_circuit(total)))?;
        let a = vqdp_matmul(&rt, q.view(), k.view(), derive_seed(seed, 3 + idx as u64))?;
        sweep_rows.push((per_circuit(total) * d as u64, mean_abs(&a.scores, &classical)));
    }
    let scale = d as f64;
    out.write(
        "shot_sweep.csv",
        &csv(
            "shots,mean_abs_dev,rel_range_pct,rel_d_pct",
            sweep_rows.iter().map(|&(s, e)| {
                vec![
                    s.to_string(),
                    e.to_string(),
                    (100.0 * e / (2.0 * scale)).to_string(),
                    (100.0 * e / scale).to_string(),
                ]
            }),
        ),
    )?;
    let slope = if rt.is_exact() || sweep_rows.len() < 2 {
        None
    } else {
        let xs: Vec<f64> = sweep_rows.iter().map(|r| r.0 as f64).collect();
        let ys: Vec<f64> = sweep_rows.iter().map(|r| r.1).collect();
        log_log_slope(&xs, &ys).ok()
    };

    let mad = dev.mapv(f64::abs).mean().unwrap_or(0.0);
    let summary = AttentionSummary {
        mean_abs_dev: mad,
        rel_range_pct: 100.0 * mad / (2.0 * scale),
        rel_d_pct: 100.0 * mad / scale,
        max_abs_dev: max_abs,
        sweep: sweep_rows,
        sweep_slope: slope,
    };
    let rmse = (dev.mapv(|v| v * v).mean().unwrap_or(0.0)).sqrt();
    out.write(
        "summary.csv",
        &metrics_csv(&[
            ("batch", b.to_string()),
            ("seq", t.to_string()),
            ("features", d.to_string()),
            ("circuits", att.circuits.to_string()),
            ("shots_per_circuit", att.shots_per_circuit.to_string()),
            ("shots_total", (att.shots_per_circuit * d as u64).to_string()),
            ("missing_addresses", att.missing.to_string()),
            ("mean_abs_dev", mad.to_string()),
            ("rel_range_pct", summary.rel_range_pct.to_string()),
            ("rel_d_pct", summary.rel_d_pct.to_string()),
            ("max_abs_dev", max_abs.to_string()),
            ("rmse", rmse.to_string()),
            ("sweep_slope", crate::output::opt(slope)),
        ]),
    )?;
    out.write_svg("deviation_hist.svg", || {
        svg::histogram(&hist, "quantum − classical attention scores", "deviation")
    })?;
    out.write_svg("scores.svg", || {
        let pts: Vec<(f64, f64)> = classical.iter().copied().zip(att.scores.iter().copied()).collect();
        svg::scatter(&pts, "attention scores", "classical", "quantum", true)
    })?;
    println!(
        "attention-compare: mean |dev| {mad:.5} = {:.3}% of range 2d, {:.3}% of d",
        summary.rel_range_pct, summary.rel_d_pct
    );
    out.finish(settings, &[seed], serde_json::Value::Null)?;
    Ok(summary)
}
