use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::distance::{l2_estimate_cached, wl_distance, L2Config};
use crate::rng::derive_seed;
use crate::vmf::VmfParams;

/// Symmetric, non-negative dissimilarities with an exactly zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates a full row-major `n x n` matrix.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidArgument(format!("{} entries for a {n}x{n} matrix", data.len())));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("diagonal entry {i} is not zero")));
            }
            for j in (i + 1)..n {
                let v = data[i * n + j];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidArgument(format!("entry ({i}, {j}) = {v} is not a distance")));
                }
                if v != data[j * n + i] {
                    return Err(Error::InvalidArgument(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds the matrix from a function evaluated once per unordered pair `i < j`.
    pub fn from_pairs<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let values: Vec<f64> = pairs.par_iter().map(|&(i, j)| f(i, j)).collect::<Result<_>>()?;
        let mut data = vec![0.0; n * n];
        for (&(i, j), v) in pairs.iter().zip(values) {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Numerical(format!("distance ({i}, {j}) = {v}")));
            }
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Dissimilarity used for a pairwise matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Wl,
    L2Mc(L2Config),
}

/// All pairwise distances between `items`.
///
/// Monte-Carlo entries use the seed `derive_seed(seed, [i, j])` for `i < j`, so
/// the result does not depend on evaluation order or thread count.
pub fn pairwise_matrix(items: &[VmfParams], metric: Metric, seed: u64) -> Result<DistanceMatrix> {
    if items.is_empty() {
        return Err(Error::Empty("no items for a distance matrix"));
    }
    let d = items[0].dim();
    if let Some(bad) = items.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
    }
    match metric {
        Metric::Wl => DistanceMatrix::from_pairs(items.len(), |i, j| wl_distance(&items[i], &items[j])),
        Metric::L2Mc(cfg) => {
            let log_c: Vec<f64> = items.iter().map(VmfParams::log_normalizer).collect();
            DistanceMatrix::from_pairs(items.len(), |i, j| {
                let pair_seed = derive_seed(seed, &[i as u64, j as u64]);
                l2_estimate_cached(&items[i], log_c[i], &items[j], log_c[j], pair_seed, &cfg).map(|e| e.value)
            })
        }
    }
}
