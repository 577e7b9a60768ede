use std::io::Write;

use super::pairs::{PairBatch, PairLayout};
use super::table::ShotTable;

/// Header of the per-address product CSV. `b` and `j` are empty for flat
/// batches, where `i` is the pair index; `n0` and `n1` are empty for exact
/// runs.
pub const PRODUCTS_CSV_HEADER: &str = "run,addr,b,i,j,x,y,truth,z_hat,n0,n1";

/// Writes one row per valid address. `z` holds the estimates (imputed 0 for
/// addresses without shots) and `table` the raw counts of a sampled run.
pub fn write_products_csv<W: Write>(
    mut w: W,
    run: usize,
    batch: &PairBatch,
    z: &[f64],
    table: Option<&ShotTable>,
) -> std::io::Result<()> {
    for (addr, &z_hat) in z.iter().enumerate().take(batch.n_valid()) {
        let (x, y) = batch.pair(addr);
        let (b, i, j) = match batch.layout() {
            PairLayout::Flat => (String::new(), addr.to_string(), String::new()),
            PairLayout::Attention { .. } => {
                let (b, i, j) = batch.index_of(addr).expect("valid address");
                (b.to_string(), i.to_string(), j.to_string())
            }
        };
        let (n0, n1) = match table {
            Some(t) => {
                let (n0, n1) = t.counts(addr);
                (n0.to_string(), n1.to_string())
            }
            None => (String::new(), String::new()),
        };
        writeln!(w, "{run},{addr},{b},{i},{j},{x},{y},{},{},{n0},{n1}", x * y, z_hat)?;
    }
    Ok(())
}
