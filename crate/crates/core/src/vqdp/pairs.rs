use ndarray::ArrayView3;

use crate::encode::ValueVector;
use crate::error::{Error, Result};

/// How the valid addresses map back to tensor indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLayout {
    /// A plain list of pairs; address `ℓ` is list position `ℓ`.
    Flat,
    /// Attention layout, `ℓ = b·T² + i·T + j`.
    Attention { batch: usize, seq: usize },
}

/// Value pairs loaded behind a `⌈log₂ N⌉`-qubit address register. Addresses
/// past the `N` valid pairs hold `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pairs: Vec<(f64, f64)>,
    n_addr: usize,
    layout: PairLayout,
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

fn check(x: f64, location: impl FnOnce() -> String) -> Result<()> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            value: x,
            location: location(),
        })
    }
}

impl PairBatch {
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::argument("a pair batch needs at least one pair"));
        }
        for (l, &(x, y)) in pairs.iter().enumerate() {
            check(x, || format!("pair {l} (x)"))?;
            check(y, || format!("pair {l} (y)"))?;
        }
        Ok(PairBatch {
            n_addr: ceil_log2(pairs.len()),
            pairs,
            layout: PairLayout::Flat,
        })
    }

    /// Builds the `B·T²` attention pairs `(x, y) = f(b, i, j)`. `f` reports
    /// out-of-range values itself so errors can name the source tensor.
    pub fn from_fn<F>(batch: usize, seq: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> Result<(f64, f64)>,
    {
        if batch == 0 || seq == 0 {
            return Err(Error::argument("batch and sequence length must be positive"));
        }
        let mut pairs = Vec::with_capacity(batch * seq * seq);
        for b in 0..batch {
            for i in 0..seq {
                for j in 0..seq {
                    pairs.push(f(b, i, j)?);
                }
            }
        }
        Ok(PairBatch {
            n_addr: ceil_log2(pairs.len()),
            pairs,
            layout: PairLayout::Attention { batch, seq },
        })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn layout(&self) -> PairLayout {
        self.layout
    }

    pub fn n_addr(&self) -> usize {
        self.n_addr
    }

    /// Number of valid pairs `N`.
    pub fn n_valid(&self) -> usize {
        self.pairs.len()
    }

    /// `2^{n_addr}`, including padding.
    pub fn n_addresses(&self) -> usize {
        1 << self.n_addr
    }

    pub fn is_padding(&self, addr: usize) -> bool {
        addr >= self.pairs.len()
    }

    pub fn addr_of(&self, b: usize, i: usize, j: usize) -> Option<usize> {
        match self.layout {
            PairLayout::Attention { batch, seq } if b < batch && i < seq && j < seq => {
                Some(b * seq * seq + i * seq + j)
            }
            PairLayout::Flat if b == 0 && j == 0 && i < self.pairs.len() => Some(i),
            _ => None,
        }
    }

    /// Inverse of [`PairBatch::addr_of`] on valid addresses. Flat batches
    /// report `(0, ℓ, 0)`.
    pub fn index_of(&self, addr: usize) -> Option<(usize, usize, usize)> {
        if self.is_padding(addr) {
            return None;
        }
        Some(match self.layout {
            PairLayout::Attention { seq, .. } => (addr / (seq * seq), (addr / seq) % seq, addr % seq),
            PairLayout::Flat => (0, addr, 0),
        })
    }

    /// Pair at `addr`, `(0, 0)` for padding.
    pub fn pair(&self, addr: usize) -> (f64, f64) {
        self.pairs.get(addr).copied().unwrap_or((0.0, 0.0))
    }

    /// Exact product `x·y` for every address, padding included.
    pub fn truth(&self) -> Vec<f64> {
        (0..self.n_addresses())
            .map(|l| {
                let (x, y) = self.pair(l);
                x * y
            })
            .collect()
    }

    /// The x and y value vectors, zero padded to `2^{n_addr}`.
    pub fn value_vectors(&self) -> Result<(ValueVector, ValueVector)> {
        let len = self.n_addresses();
        let xs = self.pairs.iter().map(|p| p.0).collect();
        let ys = self.pairs.iter().map(|p| p.1).collect();
        Ok((ValueVector::padded(xs, len)?, ValueVector::padded(ys, len)?))
    }
}

/// Pairs `(Q[b,i,k], K[b,j,k])` for one feature `k`.
pub fn build_pair_batch(q: ArrayView3<f64>, k: ArrayView3<f64>, feature: usize) -> Result<PairBatch> {
    if q.shape() != k.shape() {
        return Err(Error::argument(format!(
            "query shape {:?} differs from key shape {:?}",
            q.shape(),
            k.shape()
        )));
    }
    let (b, t, d) = q.dim();
    if feature >= d {
        return Err(Error::argument(format!("feature {feature} out of range for d = {d}")));
    }
    PairBatch::from_fn(b, t, |bb, i, j| {
        let x = q[[bb, i, feature]];
        let y = k[[bb, j, feature]];
        check(x, || format!("Q[b={bb}, i={i}, k={feature}]"))?;
        check(y, || format!("K[b={bb}, j={j}, k={feature}]"))?;
        Ok((x, y))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn address_counts() {
        for (b, t, n, n_addr) in [(1, 2, 4, 2), (1, 3, 9, 4), (2, 4, 32, 5)] {
            let q = Array3::<f64>::zeros((b, t, 1));
            let batch = build_pair_batch(q.view(), q.view(), 0).unwrap();
            assert_eq!(batch.n_valid(), n);
            assert_eq!(batch.n_addr(), n_addr);
        }
        let q = Array3::<f64>::zeros((1, 3, 1));
        let batch = build_pair_batch(q.view(), q.view(), 0).unwrap();
        assert_eq!((0..16).filter(|&l| batch.is_padding(l)).count(), 7);
        assert_eq!(batch.pair(12), (0.0, 0.0));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(32), 5);
        assert_eq!(ceil_log2(33), 6);
    }

    #[test]
    fn addresses_round_trip() {
        let q = Array3::<f64>::zeros((3, 4, 2));
        let batch = build_pair_batch(q.view(), q.view(), 1).unwrap();
        for b in 0..3 {
            for i in 0..4 {
                for j in 0..4 {
                    let l = batch.addr_of(b, i, j).unwrap();
                    assert_eq!(l, b * 16 + i * 4 + j);
                    assert_eq!(batch.index_of(l), Some((b, i, j)));
                }
            }
        }
        assert_eq!(batch.index_of(48), None);
        assert_eq!(batch.addr_of(3, 0, 0), None);
    }

    #[test]
    fn out_of_range_names_location() {
        let mut q = Array3::<f64>::zeros((2, 2, 3));
        q[[1, 0, 2]] = 1.2;
        let k = Array3::<f64>::zeros((2, 2, 3));
        let err = build_pair_batch(q.view(), k.view(), 2).unwrap_err();
        match err {
            Error::Domain { value, location } => {
                assert_eq!(value, 1.2);
                assert_eq!(location, "Q[b=1, i=0, k=2]");
            }
            other => panic!("{other:?}"),
        }
        assert!(build_pair_batch(q.view(), k.view(), 0).is_ok());
    }
}
