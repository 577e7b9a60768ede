//! `product-accuracy`: random pair batches through the product circuit,
//! estimate versus truth.

use rand::Rng;
use vqt_core::noise::fit_scale;
use vqt_core::rng::{derive_seed, rng_from_seed};
use vqt_core::vqdp::stats::mean_and_variance;
use vqt_core::vqdp::{
    build_vqdp_circuit, resource_report, write_products_csv, PairBatch, QuantumRuntime, ShotBudget, PRODUCTS_CSV_HEADER,
};

use super::{metrics_csv, runtime, with_defaults};
use crate::error::{CliError, CliResult};
use crate::output::{histogram_csv, opt, symmetric_histogram, RunOutput};
use crate::settings::Settings;
use crate::svg;

pub fn defaults() -> Settings {
    with_defaults(
        "product-accuracy",
        "statevector",
        &[
            ("shots", "80000"),
            ("pairs", "32"),
            ("batches", "30"),
            ("bins", "40"),
            ("grid", "4,8,16,32,64,128"),
        ],
    )
}

/// Header of `grid.csv`, one row per batch size at its recommended shots.
pub const GRID_HEADER: &str = "batch_size,n_qubits,shots,cx_count,cx_depth,residual_std,rmse,missing_addresses";

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSummary {
    pub residual_std: f64,
    /// Mean and standard deviation over batches of the per-batch residual
    /// standard deviation.
    pub batch_std_mean: f64,
    pub batch_std_sd: f64,
    pub rmse: f64,
    pub calibration_scale: f64,
    pub missing: usize,
    pub grid: Vec<GridRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub batch_size: usize,
    pub n_qubits: usize,
    pub shots: u64,
    pub cx_count: usize,
    pub cx_depth: usize,
    pub residual_std: f64,
    pub rmse: f64,
    pub missing: usize,
}

/// Estimates and truths of `batches` random batches of `pairs` pairs.
struct Sweep {
    truth: Vec<f64>,
    estimates: Vec<f64>,
    batch_stds: Vec<f64>,
    missing: usize,
    shape: (usize, usize, usize),
}

impl Sweep {
    fn residuals(&self) -> Vec<f64> {
        self.estimates.iter().zip(&self.truth).map(|(z, t)| z - t).collect()
    }

    fn rmse(&self) -> f64 {
        let r = self.residuals();
        (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()
    }
}

fn random_batch(pairs: usize, seed: u64) -> CliResult<PairBatch> {
    let mut rng = rng_from_seed(seed);
    Ok(PairBatch::from_pairs(
        (0..pairs)
            .map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
            .collect(),
    )?)
}

/// Rejects sampled runs with fewer shots than addresses, pointing at the
/// resource report's suggestion.
fn check_shots(rt: &QuantumRuntime, pairs: usize, shots: u64) -> CliResult<()> {
    let report = resource_report(pairs, 2)?;
    let addresses = 1u64 << (report.n_qubits - 2);
    if !rt.is_exact() && shots < addresses {
        return Err(CliError::Config(format!(
            "{shots} shots cannot cover the {addresses} addresses of a {pairs}-pair batch; \
             the resource report suggests {} shots",
            report.recommended_shots
        )));
    }
    Ok(())
}

/// Runs `batches` batches; `seed_of(run)` gives each batch's seed and
/// `csv` receives the per-pair rows.
fn sweep(
    rt: &QuantumRuntime,
    pairs: usize,
    batches: usize,
    seed_of: impl Fn(usize) -> u64,
    mut csv: Option<&mut String>,
) -> CliResult<Sweep> {
    let mut s = Sweep {
        truth: Vec::new(),
        estimates: Vec::new(),
        batch_stds: Vec::new(),
        missing: 0,
        shape: (0, 0, 0),
    };
    for run in 0..batches {
        let run_seed = seed_of(run);
        let batch = random_batch(pairs, derive_seed(run_seed, 0))?;
        if run == 0 {
            let c = build_vqdp_circuit(&batch)?;
            s.shape = (c.n_qubits(), c.cx_count(), c.cx_depth());
        }
        let est = rt.products(&batch, derive_seed(run_seed, 1))?;
        s.missing += est.missing;
        if let Some(csv) = csv.as_deref_mut() {
            let mut buf = Vec::new();
            write_products_csv(&mut buf, run, &batch, &est.z, est.table.as_ref())?;
            csv.push_str(&String::from_utf8(buf).expect("ascii csv"));
        }
        let truth = batch.truth();
        let residuals: Vec<f64> = (0..pairs).map(|l| est.z[l] - truth[l]).collect();
        s.batch_stds.push(mean_and_variance(&residuals).1.sqrt());
        s.truth.extend_from_slice(&truth[..pairs]);
        s.estimates.extend_from_slice(&est.z[..pairs]);
    }
    Ok(s)
}

pub fn run(settings: &Settings) -> CliResult<ProductSummary> {
    let seed: u64 = settings.get("seed")?;
    let shots: u64 = settings.get("shots")?;
    let pairs: usize = settings.get("pairs")?;
    let batches: usize = settings.get("batches")?;
    let bins: usize = settings.get("bins")?;
    let grid_sizes: Vec<usize> = settings.get_list("grid")?;
    if pairs == 0 || batches == 0 || bins == 0 || grid_sizes.contains(&0) {
        return Err(CliError::Config(
            "pairs, batches, bins and grid sizes must be positive".into(),
        ));
    }
    let rt = runtime(settings, ShotBudget::PerCircuit(shots))?;
    check_shots(&rt, pairs, shots)?;
    let mut out = RunOutput::create(settings)?;

    let seeds: Vec<u64> = (0..batches).map(|run| derive_seed(seed, run as u64)).collect();
    let mut csv = String::from(PRODUCTS_CSV_HEADER);
    csv.push('\n');
    let main = sweep(&rt, pairs, batches, |run| seeds[run], Some(&mut csv))?;
    out.write("products.csv", &csv)?;

    let residuals = main.residuals();
    let (res_mean, res_var) = mean_and_variance(&residuals);
    let rmse = main.rmse();
    let (std_mean, std_var) = mean_and_variance(&main.batch_stds);
    // A linear fit needs spread in the estimates; exact runs on constant data
    // have none, so the calibration columns are left empty then.
    let calibration = fit_scale(&main.estimates, &main.truth).ok();
    let (n_qubits, cx, depth) = main.shape;
    let hist = symmetric_histogram(&residuals, bins);
    out.write("residual_hist.csv", &histogram_csv(&hist))?;

    let mut grid = Vec::with_capacity(grid_sizes.len());
    for &size in &grid_sizes {
        let report = resource_report(size, 2)?;
        let grid_rt = runtime(settings, ShotBudget::PerCircuit(report.recommended_shots))?;
        // Each size draws from its own stream, independent of the main sweep.
        let stream = derive_seed(seed, 0x4000_0000 + size as u64);
        let s = sweep(&grid_rt, size, batches, |run| derive_seed(stream, run as u64), None)?;
        grid.push(GridRow {
            batch_size: size,
            n_qubits: s.shape.0,
            shots: report.recommended_shots,
            cx_count: s.shape.1,
            cx_depth: s.shape.2,
            residual_std: mean_and_variance(&s.residuals()).1.sqrt(),
            rmse: s.rmse(),
            missing: s.missing,
        });
    }
    out.write(
        "grid.csv",
        &crate::output::csv(
            GRID_HEADER,
            grid.iter().map(|g| {
                vec![
                    g.batch_size.to_string(),
                    g.n_qubits.to_string(),
                    if rt.is_exact() {
                        String::new()
                    } else {
                        g.shots.to_string()
                    },
                    g.cx_count.to_string(),
                    g.cx_depth.to_string(),
                    g.residual_std.to_string(),
                    g.rmse.to_string(),
                    g.missing.to_string(),
                ]
            }),
        ),
    )?;

    let summary = ProductSummary {
        residual_std: res_var.sqrt(),
        batch_std_mean: std_mean,
        batch_std_sd: std_var.sqrt(),
        rmse,
        calibration_scale: calibration.map_or(f64::NAN, |c| c.scale),
        missing: main.missing,
        grid,
    };
    out.write(
        "summary.csv",
        &metrics_csv(&[
            ("pairs", pairs.to_string()),
            ("batches", batches.to_string()),
            ("n_qubits", n_qubits.to_string()),
            ("cx_count", cx.to_string()),
            ("cx_depth", depth.to_string()),
            (
                "shots_per_circuit",
                if rt.is_exact() {
                    String::new()
                } else {
                    shots.to_string()
                },
            ),
            ("residual_mean", res_mean.to_string()),
            ("residual_std", summary.residual_std.to_string()),
            ("batch_residual_std_mean", std_mean.to_string()),
            ("batch_residual_std_sd", summary.batch_std_sd.to_string()),
            ("rmse", rmse.to_string()),
            ("calibration_scale", opt(calibration.map(|c| c.scale))),
            ("calibration_intercept", opt(calibration.map(|c| c.intercept))),
            ("calibrated_rmse", opt(calibration.map(|c| c.fit_rmse))),
            ("missing_addresses", main.missing.to_string()),
        ]),
    )?;
    out.write_svg("products.svg", || {
        let pts: Vec<(f64, f64)> = main.truth.iter().copied().zip(main.estimates.iter().copied()).collect();
        svg::scatter(&pts, "estimated vs exact products", "x·y", "estimate", true)
    })?;
    out.write_svg("residual_hist.svg", || {
        svg::histogram(&hist, "estimate − exact product", "residual")
    })?;
    println!(
        "product-accuracy: {batches} batches of {pairs} pairs, residual std {:.5}, rmse {:.5}",
        summary.residual_std, rmse
    );
    for g in &summary.grid {
        println!(
            "  batch {:>4}: {} qubits, {} shots, CX {} depth {}, rmse {:.5}",
            g.batch_size, g.n_qubits, g.shots, g.cx_count, g.cx_depth, g.rmse
        );
    }
    out.finish(settings, &seeds, serde_json::Value::Null)?;
    Ok(summary)
}
