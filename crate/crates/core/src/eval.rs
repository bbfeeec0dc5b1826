//! Evaluation helpers on distance matrices: KNN voting, classical and
//! stress-minimizing MDS, seeded Euclidean k-means and cluster purity.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;
use crate::rng;

/// Majority label among the `k` nearest training items.
///
/// `distances[i]` is the distance from the query to training item `i`. Equal
/// distances at the `k`-th place are resolved by index. Vote ties go to the
/// label with the smaller mean distance among its voters, then the smaller label.
pub fn knn_predict(distances: &[f64], labels: &[usize], k: usize) -> Result<usize> {
    if distances.is_empty() {
        return Err(Error::Empty("no training items"));
    }
    if distances.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} distances but {} labels",
            distances.len(),
            labels.len()
        )));
    }
    if k == 0 || k > distances.len() {
        return Err(Error::TargetOutOfRange { target: k, n: distances.len() });
    }
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    let mut votes: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for &i in &order[..k] {
        let e = votes.entry(labels[i]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += distances[i];
    }
    // BTreeMap iterates labels in increasing order, so a strict comparison keeps the smaller label
    let mut best: Option<(usize, usize, f64)> = None;
    for (&label, &(count, sum)) in &votes {
        let mean = sum / count as f64;
        let better = match best {
            None => true,
            Some((_, c, m)) => count > c || (count == c && mean < m),
        };
        if better {
            best = Some((label, count, mean));
        }
    }
    Ok(best.expect("k >= 1").0)
}

/// Classical MDS coordinates, one row per item.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub n: usize,
    pub dim: usize,
    /// Row-major `n x dim`.
    pub coords: Vec<f64>,
    /// Eigenvalues of the double-centred Gram matrix, largest first, for the kept axes.
    pub eigenvalues: Vec<f64>,
    /// Set when fewer than `dim` eigenvalues were positive and columns were zero-padded.
    pub padded: bool,
}

impl Embedding {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

/// Torgerson scaling: eigendecomposition of `-1/2 J D^2 J`.
///
/// Each axis is oriented so its largest-magnitude coordinate is positive.
pub fn mds_embed(dm: &DistanceMatrix, dim: usize) -> Result<Embedding> {
    let n = dm.len();
    if dim == 0 || dim >= n {
        return Err(Error::InvalidArgument(format!("embedding dimension {dim} needs 1 <= dim < {n}")));
    }
    let sq = DMatrix::from_fn(n, n, |i, j| dm.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let gram = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut coords = vec![0.0; n * dim];
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut padded = false;
    for (axis, &idx) in order.iter().take(dim).enumerate() {
        let lambda = eig.eigenvalues[idx];
        // eigenvalues at rounding level of the spectrum count as zero
        if lambda <= 1e-12 * scale {
            padded = true;
            eigenvalues.push(0.0);
            continue;
        }
        eigenvalues.push(lambda);
        let v = eig.eigenvectors.column(idx);
        let pivot = (0..n).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a))).unwrap();
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        let s = sign * lambda.sqrt();
        for i in 0..n {
            coords[i * dim + axis] = s * v[i];
        }
    }
    if padded {
        log::warn!("only {} of {dim} MDS eigenvalues are positive; padding with zeros", eigenvalues.iter().filter(|v| **v > 0.0).count());
    }
    Ok(Embedding { n, dim, coords, eigenvalues, padded })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmacofConfig {
    pub max_iters: usize,
    /// Stop when the relative stress decrease of one iteration falls below this.
    pub tol: f64,
}

impl Default for SmacofConfig {
    fn default() -> Self {
        Self { max_iters: 1000, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmacofResult {
    /// Final coordinates; `eigenvalues` and `padded` describe the classical start.
    pub embedding: Embedding,
    /// Raw stress `sum_{i<j} (|x_i - x_j| - d_ij)^2` after each iteration, starting value first.
    pub stress_trace: Vec<f64>,
    pub converged: bool,
}

impl SmacofResult {
    pub fn stress(&self) -> f64 {
        *self.stress_trace.last().expect("stress of the starting point")
    }
}

fn raw_stress(dm: &DistanceMatrix, x: &[f64], dim: usize) -> f64 {
    let n = dm.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = sq_dist(&x[i * dim..(i + 1) * dim], &x[j * dim..(j + 1) * dim]).sqrt() - dm.get(i, j);
            total += e * e;
        }
    }
    total
}

/// Metric MDS by stress majorization (Guttman transforms), started from the
/// classical embedding. Stress never increases between iterations.
pub fn mds_smacof(dm: &DistanceMatrix, dim: usize, cfg: &SmacofConfig) -> Result<SmacofResult> {
    let start = mds_embed(dm, dim)?;
    let n = start.n;
    let mut x = start.coords.clone();
    let mut next = vec![0.0; n * dim];
    let mut stress_trace = vec![raw_stress(dm, &x, dim)];
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        next.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let xi = &x[i * dim..(i + 1) * dim];
            let mut diag = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let xj = &x[j * dim..(j + 1) * dim];
                let d = sq_dist(xi, xj).sqrt();
                // coincident points contribute nothing to the majorizer
                let b = if d > 0.0 { dm.get(i, j) / d } else { 0.0 };
                diag += b;
                for a in 0..dim {
                    next[i * dim + a] -= b * xj[a];
                }
            }
            for a in 0..dim {
                next[i * dim + a] += diag * xi[a];
            }
        }
        next.iter_mut().for_each(|v| *v /= n as f64);
        std::mem::swap(&mut x, &mut next);
        let s = raw_stress(dm, &x, dim);
        let prev = *stress_trace.last().unwrap();
        stress_trace.push(s);
        if prev - s <= cfg.tol * prev {
            converged = true;
            break;
        }
    }
    let embedding = Embedding { coords: x, ..start };
    Ok(SmacofResult { embedding, stress_trace, converged })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` by inertia.
pub fn kmeans(points: &[f64], dim: usize, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult> {
    if dim == 0 || points.len() % dim != 0 {
        return Err(Error::InvalidArgument(format!("{} values do not form rows of {dim}", points.len())));
    }
    let n = points.len() / dim;
    if k == 0 || k > n {
        return Err(Error::TargetOutOfRange { target: k, n });
    }
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut best: Option<KMeansResult> = None;
    for restart in 0..restarts.max(1) {
        let mut r = rng::stream(rng::derive_seed(seed, &[restart as u64]), rng::TAG_KMEANS);
        let mut centers: Vec<Vec<f64>> = vec![row(r.random_range(0..n)).to_vec()];
        let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(row(i), &centers[0])).collect();
        while centers.len() < k {
            let total: f64 = nearest.iter().sum();
            let pick = if total > 0.0 {
                let u = r.random::<f64>() * total;
                let mut acc = 0.0;
                nearest
                    .iter()
                    .position(|&v| {
                        acc += v;
                        u < acc
                    })
                    .unwrap_or(n - 1)
            } else {
                r.random_range(0..n)
            };
            centers.push(row(pick).to_vec());
            let c = centers.last().unwrap();
            for (i, v) in nearest.iter_mut().enumerate() {
                *v = v.min(sq_dist(row(i), c));
            }
        }

        let mut labels = vec![usize::MAX; n];
        for _ in 0..300 {
            let mut changed = false;
            for (i, l) in labels.iter_mut().enumerate() {
                let c = (0..k)
                    .min_by(|&a, &b| sq_dist(row(i), &centers[a]).total_cmp(&sq_dist(row(i), &centers[b])))
                    .unwrap();
                if *l != c {
                    *l = c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let mut sums = vec![vec![0.0; dim]; k];
            let mut counts = vec![0usize; k];
            for (i, &l) in labels.iter().enumerate() {
                counts[l] += 1;
                sums[l].iter_mut().zip(row(i)).for_each(|(s, x)| *s += x);
            }
            for c in 0..k {
                // an emptied cluster keeps its previous center
                if counts[c] > 0 {
                    centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
                }
            }
        }
        let inertia: f64 = labels.iter().enumerate().map(|(i, &l)| sq_dist(row(i), &centers[l])).sum();
        if best.as_ref().map_or(true, |b| inertia < b.inertia) {
            best = Some(KMeansResult { labels, centers, inertia });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Fraction of items whose cluster's majority truth label equals their own.
pub fn purity(clusters: &[usize], truth: &[usize]) -> Result<f64> {
    if clusters.len() != truth.len() {
        return Err(Error::InvalidArgument(format!("{} cluster labels but {} truth labels", clusters.len(), truth.len())));
    }
    if clusters.is_empty() {
        return Err(Error::Empty("no labels for purity"));
    }
    let mut table: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&c, &t) in clusters.iter().zip(truth) {
        *table.entry(c).or_default().entry(t).or_default() += 1;
    }
    let majority: usize = table.values().map(|m| m.values().copied().max().unwrap_or(0)).sum();
    Ok(majority as f64 / clusters.len() as f64)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use super::*;
    use rand::{Rng, SeedableRng};

    fn euclidean(points: &[[f64; 2]]) -> DistanceMatrix {
        DistanceMatrix::from_pairs(points.len(), |i, j| Ok(sq_dist(&points[i], &points[j]).sqrt())).unwrap()
    }

    #[test]
    fn knn_examples() {
        let labels = [0, 1, 2, 1];
        assert_eq!(knn_predict(&[0.5, 0.0, 0.7, 0.9], &labels, 1).unwrap(), 1);
        assert_eq!(knn_predict(&[0.1, 0.2, 0.3], &[4, 4, 4], 3).unwrap(), 4);
        // one vote each: smallest mean distance wins
        assert_eq!(knn_predict(&[0.3, 0.2, 0.9], &[0, 1, 2], 2).unwrap(), 1);
        // equal count and mean: smaller label wins
        assert_eq!(knn_predict(&[0.2, 0.2], &[5, 3], 2).unwrap(), 3);
        assert!(knn_predict(&[], &[], 1).is_err());
        assert!(knn_predict(&[1.0], &[0], 2).is_err());
    }

    #[test]
    fn knn_matches_brute_force_majority() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            // three classes at separated distance bands
            let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
            let d: Vec<f64> = labels.iter().map(|&l| l as f64 + r.random::<f64>() * 1.5).collect();
            let predicted = knn_predict(&d, &labels, 5).unwrap();
            let mut idx: Vec<usize> = (0..30).collect();
            idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
            let mut counts = [0usize; 3];
            idx[..5].iter().for_each(|&i| counts[labels[i]] += 1);
            let top = *counts.iter().max().unwrap();
            assert_eq!(counts[predicted], top);
            if counts.iter().filter(|&&c| c == top).count() == 1 {
                assert_eq!(predicted, counts.iter().position(|&c| c == top).unwrap());
            }
            assert_eq!(predicted, knn_predict(&d, &labels, 5).unwrap());
        }
    }

    #[test]
    fn mds_equilateral_triangle() {
        let dm = DistanceMatrix::new(3, vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let e = mds_embed(&dm, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((sq_dist(e.row(i), e.row(j)).sqrt() - dm.get(i, j)).abs() < 1e-9);
            }
        }
        assert!(!e.padded);
    }

    #[test]
    fn mds_recovers_planar_configuration() {
        let pts = [[0.0, 0.0], [3.0, 1.0], [-1.0, 2.0], [2.5, -4.0], [0.3, 0.7], [-2.0, -1.5]];
        let dm = euclidean(&pts);
        let e = mds_embed(&dm, 2).unwrap();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                assert!((sq_dist(e.row(i), e.row(j)).sqrt() - dm.get(i, j)).abs() < 1e-9);
            }
        }
        for axis in 0..2 {
            let mean: f64 = (0..pts.len()).map(|i| e.row(i)[axis]).sum::<f64>() / pts.len() as f64;
            assert!(mean.abs() < 1e-9);
        }
    }

    #[test]
    fn mds_pads_collinear_input() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [7.0, 0.0]];
        let e = mds_embed(&euclidean(&pts), 3).unwrap();
        assert!(e.padded);
        assert!((0..4).all(|i| e.row(i)[1] == 0.0 && e.row(i)[2] == 0.0));
        assert!(((e.row(3)[0] - e.row(0)[0]).abs() - 7.0).abs() < 1e-9);
        assert!(mds_embed(&euclidean(&pts), 4).is_err());
        assert!(mds_embed(&euclidean(&pts), 0).is_err());
    }

    #[test]
    fn smacof_keeps_exact_euclidean_input() {
        let pts = [[0.0, 0.0], [3.0, 1.0], [-1.0, 2.0], [2.5, -4.0], [0.3, 0.7]];
        let dm = euclidean(&pts);
        let r = mds_smacof(&dm, 2, &SmacofConfig::default()).unwrap();
        assert!(r.stress() < 1e-18);
        let e = &r.embedding;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                assert!((sq_dist(e.row(i), e.row(j)).sqrt() - dm.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn smacof_lowers_stress_on_arc_distances() {
        // arc lengths on a circle are not Euclidean-realizable
        let t: Vec<f64> = (0..24).map(|i| i as f64 * 0.26).collect();
        let dm = DistanceMatrix::from_pairs(t.len(), |i, j| {
            let a = (t[i] - t[j]).abs() % (2.0 * std::f64::consts::PI);
            Ok(a.min(2.0 * std::f64::consts::PI - a))
        })
        .unwrap();
        let r = mds_smacof(&dm, 2, &SmacofConfig::default()).unwrap();
        for w in r.stress_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert!(r.stress() < 0.9 * r.stress_trace[0]);
        for axis in 0..2 {
            let mean: f64 = (0..24).map(|i| r.embedding.row(i)[axis]).sum::<f64>() / 24.0;
            assert!(mean.abs() < 1e-9);
        }
    }

    #[test]
    fn kmeans_and_purity() {
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for (c, (cx, cy)) in [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)].iter().enumerate() {
            for _ in 0..20 {
                pts.extend([cx + r.random::<f64>(), cy + r.random::<f64>()]);
                truth.push(c);
            }
        }
        let km = kmeans(&pts, 2, 3, 5, 7).unwrap();
        assert_eq!(purity(&km.labels, &truth).unwrap(), 1.0);
        assert_eq!(km, kmeans(&pts, 2, 3, 5, 7).unwrap());
        assert_eq!(purity(&[0, 0, 0, 0], &[0, 1, 0, 1]).unwrap(), 0.5);
        assert_eq!(purity(&[0, 1, 2, 3], &[0, 1, 0, 1]).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn classical_mds_is_an_isometry_on_planar_points(
            pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..12)
        ) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            let dm = euclidean(&pts);
            let e = mds_embed(&dm, 2).unwrap();
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    let got = sq_dist(e.row(i), e.row(j)).sqrt();
                    prop_assert!((got - dm.get(i, j)).abs() <= 1e-8);
                }
            }
        }

        #[test]
        fn smacof_never_increases_stress(seed in any::<u64>(), n in 3usize..16) {
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let dm = DistanceMatrix::from_pairs(n, |_, _| Ok(0.0)).unwrap();
            let vals: Vec<f64> = (0..n * n).map(|_| r.random::<f64>() + 0.1).collect();
            let dm = DistanceMatrix::from_pairs(dm.len(), |i, j| Ok(vals[i * n + j])).unwrap();
            let res = mds_smacof(&dm, 2, &SmacofConfig { max_iters: 200, tol: 1e-12 }).unwrap();
            for w in res.stress_trace.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
            }
        }

        #[test]
        fn knn_ignores_neighbour_order(seed in any::<u64>(), n in 1usize..30, k in 1usize..8) {
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let dist: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
            let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
            let k = k.min(n);
            let a = knn_predict(&dist, &labels, k).unwrap();
            let rd: Vec<f64> = dist.iter().rev().cloned().collect();
            let rl: Vec<usize> = labels.iter().rev().cloned().collect();
            prop_assert_eq!(a, knn_predict(&rd, &rl, k).unwrap());
        }
    }
}
