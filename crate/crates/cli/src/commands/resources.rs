//! `resources`: qubits, CX count, CX depth and shots per batch size.

use vqt_core::encode::compile_qcrank;
use vqt_core::encode::ValueVector;
use vqt_core::vqdp::{build_vqdp_circuit, resource_report, PairBatch};

use crate::error::{CliError, CliResult};
use crate::output::{csv, RunOutput};
use crate::settings::Settings;

pub fn defaults() -> Settings {
    Settings::new(
        "resources",
        &[
            ("sizes", ""),
            ("n_data", "2"),
            ("dump_circuits", "false"),
            ("out", "results/resources"),
            ("svg", "false"),
        ],
    )
}

/// Batch sizes always tabulated; `sizes` adds to them.
pub const TABLE_SIZES: [usize; 6] = [4, 8, 16, 32, 64, 128];

/// One table row: the formula next to the compiled circuit's counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceRow {
    pub batch_size: usize,
    pub n_qubits: usize,
    pub cx_count: usize,
    pub cx_depth: usize,
    pub recommended_shots: u64,
    pub compiled_cx_count: usize,
    pub compiled_cx_depth: usize,
}

pub fn run(settings: &Settings) -> CliResult<Vec<ResourceRow>> {
    let mut sizes: Vec<usize> = TABLE_SIZES.to_vec();
    sizes.extend(settings.get_list::<usize>("sizes")?);
    sizes.sort_unstable();
    sizes.dedup();
    let n_data: usize = settings.get("n_data")?;
    let dump: bool = settings.get("dump_circuits")?;
    if sizes.contains(&0) {
        return Err(CliError::Config("batch sizes must be positive".into()));
    }
    let mut out = RunOutput::create(settings)?;
    let mut rows = Vec::new();
    for &n in &sizes {
        let r = resource_report(n, n_data)?;
        // Product circuit for two data qubits; a plain loader otherwise.
        let circuit = if n_data == 2 {
            build_vqdp_circuit(&PairBatch::from_pairs(vec![(0.5, 0.5); n])?)?
        } else {
            let k = 1usize << (r.n_qubits - n_data);
            let data = vec![ValueVector::new(vec![0.5; k])?; n_data];
            compile_qcrank(&data, r.n_qubits - n_data, n_data)?
        };
        if dump {
            out.write(&format!("circuit_{n}.txt"), &circuit.dump())?;
        }
        rows.push(ResourceRow {
            batch_size: n,
            n_qubits: r.n_qubits,
            cx_count: r.cx_count,
            cx_depth: r.cx_depth,
            recommended_shots: r.recommended_shots,
            compiled_cx_count: circuit.cx_count(),
            compiled_cx_depth: circuit.cx_depth(),
        });
    }
    out.write(
        "resources.csv",
        &csv(
            "batch_size,n_qubits,recommended_shots,cx_count,cx_depth,compiled_cx_count,compiled_cx_depth",
            rows.iter().map(|r| {
                vec![
                    r.batch_size.to_string(),
                    r.n_qubits.to_string(),
                    r.recommended_shots.to_string(),
                    r.cx_count.to_string(),
                    r.cx_depth.to_string(),
                    r.compiled_cx_count.to_string(),
                    r.compiled_cx_depth.to_string(),
                ]
            }),
        ),
    )?;
    println!(
        "{:>8} {:>7} {:>9} {:>6} {:>8}",
        "batch", "qubits", "shots", "CX", "depth"
    );
    for r in &rows {
        println!(
            "{:>8} {:>7} {:>9} {:>6} {:>8}",
            r.batch_size, r.n_qubits, r.recommended_shots, r.cx_count, r.cx_depth
        );
    }
    out.finish(settings, &[], serde_json::Value::Null)?;
    Ok(rows)
}
