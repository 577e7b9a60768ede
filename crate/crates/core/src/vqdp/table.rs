use crate::error::{Error, Result};
use crate::sim::ShotOutcome;

/// Per-address shot counts for each measured data qubit.
///
/// Measurement outcomes are read as `[address bits | data bits]`, the address
/// in the high bits. For the product circuit `n_data == 1` and the single data
/// bit is the EHands output qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotTable {
    n_addr: usize,
    n_data: usize,
    n0: Vec<u64>,
    n1: Vec<u64>,
    shots_total: u64,
}

impl ShotTable {
    pub fn from_outcomes(outcomes: &[ShotOutcome], n_addr: usize, n_data: usize) -> Result<Self> {
        let k = 1usize << n_addr;
        let mut n0 = vec![0u64; k * n_data];
        let mut n1 = vec![0u64; k * n_data];
        let mut total = 0;
        for o in outcomes {
            if o.n_bits != n_addr + n_data {
                return Err(Error::argument(format!(
                    "outcome has {} bits, expected {} address + {} data",
                    o.n_bits, n_addr, n_data
                )));
            }
            let addr = o.outcome >> n_data;
            for d in 0..n_data {
                let idx = addr * n_data + d;
                if o.bit(n_addr + d) {
                    n1[idx] += o.multiplicity;
                } else {
                    n0[idx] += o.multiplicity;
                }
            }
            total += o.multiplicity;
        }
        Ok(ShotTable {
            n_addr,
            n_data,
            n0,
            n1,
            shots_total: total,
        })
    }

    pub(crate) fn from_counts(n_addr: usize, n_data: usize, n0: Vec<u64>, n1: Vec<u64>) -> Self {
        let shots_total = (0..1usize << n_addr).map(|l| n0[l * n_data] + n1[l * n_data]).sum();
        ShotTable {
            n_addr,
            n_data,
            n0,
            n1,
            shots_total,
        }
    }

    pub fn n_addr(&self) -> usize {
        self.n_addr
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn shots_total(&self) -> u64 {
        self.shots_total
    }

    /// `(n0, n1)` of data qubit 0 at `addr`.
    pub fn counts(&self, addr: usize) -> (u64, u64) {
        self.counts_at(addr, 0)
    }

    pub fn counts_at(&self, addr: usize, data: usize) -> (u64, u64) {
        let i = addr * self.n_data + data;
        (self.n0[i], self.n1[i])
    }

    /// Shots whose address bits equal `addr`.
    pub fn address_shots(&self, addr: usize) -> u64 {
        let (a, b) = self.counts(addr);
        a + b
    }

    /// `(n0 - n1) / (n0 + n1)` for data qubit 0, `None` if no shot hit `addr`.
    pub fn z_hat(&self, addr: usize) -> Option<f64> {
        self.z_hat_at(addr, 0)
    }

    pub fn z_hat_at(&self, addr: usize, data: usize) -> Option<f64> {
        let (n0, n1) = self.counts_at(addr, data);
        let n = n0 + n1;
        (n > 0).then(|| (n0 as f64 - n1 as f64) / n as f64)
    }

    pub fn missing_addresses(&self) -> Vec<usize> {
        (0..1usize << self.n_addr)
            .filter(|&l| self.address_shots(l) == 0)
            .collect()
    }
}
