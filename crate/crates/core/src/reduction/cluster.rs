use rand::seq::IndexedRandom;

use super::Partition;
use crate::error::{Error, Result};
use crate::geometry::DistanceMatrix;
use crate::rng;

fn check_k(target_k: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty("distance matrix has no rows"));
    }
    if target_k == 0 || target_k > n {
        return Err(Error::TargetOutOfRange { target: target_k, n });
    }
    Ok(())
}

/// Agglomerative single linkage cut at `target_k` clusters.
///
/// Clusters are identified by their smallest member; equal linkage heights go
/// to the lexicographically smallest pair of identifiers.
pub fn hclust_single_linkage(dm: &DistanceMatrix, target_k: usize) -> Result<Partition> {
    let n = dm.len();
    check_k(target_k, n)?;
    let mut link: Vec<f64> = dm.as_slice().to_vec();
    let mut active = vec![true; n];
    let mut label: Vec<usize> = (0..n).collect();
    for _ in 0..(n - target_k) {
        let (mut a, mut b, mut best) = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in (0..n).filter(|&i| active[i]) {
            for j in ((i + 1)..n).filter(|&j| active[j]) {
                let v = link[i * n + j];
                if v < best || a == usize::MAX {
                    (a, b, best) = (i, j, v);
                }
            }
        }
        // Lance-Williams update for single linkage: d(a+b, k) = min(d(a, k), d(b, k))
        for k in 0..n {
            let v = link[a * n + k].min(link[b * n + k]);
            link[a * n + k] = v;
            link[k * n + a] = v;
        }
        active[b] = false;
        label.iter_mut().filter(|l| **l == b).for_each(|l| *l = a);
    }
    Ok(Partition::from_labels(&label))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMedoidsResult {
    pub partition: Partition,
    /// Medoid of each cluster, indexed by partition label.
    pub medoids: Vec<usize>,
    pub cost: f64,
    /// Cost after BUILD and after every accepted swap.
    pub cost_trace: Vec<f64>,
    pub swaps: usize,
}

fn total_cost(dm: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..dm.len())
        .map(|i| medoids.iter().map(|&m| dm.get(i, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Picks among exactly tied candidates with the tie-breaking stream.
fn pick(candidates: &[usize], r: &mut rng::VmfRng) -> usize {
    if candidates.len() == 1 {
        candidates[0]
    } else {
        *candidates.choose(r).expect("non-empty candidates")
    }
}

/// PAM clustering: greedy BUILD, then best-improvement SWAP until no swap
/// lowers the cost or `max_iters` swaps were made.
pub fn kmedoids(dm: &DistanceMatrix, target_k: usize, seed: u64, max_iters: usize) -> Result<Partition> {
    Ok(kmedoids_detailed(dm, target_k, seed, max_iters)?.partition)
}

pub fn kmedoids_detailed(dm: &DistanceMatrix, target_k: usize, seed: u64, max_iters: usize) -> Result<KMedoidsResult> {
    let n = dm.len();
    check_k(target_k, n)?;
    let mut ties = rng::stream(seed, rng::TAG_MEDOID_TIES);

    // BUILD
    let mut medoids: Vec<usize> = Vec::with_capacity(target_k);
    let mut nearest = vec![f64::INFINITY; n];
    while medoids.len() < target_k {
        let mut best = f64::INFINITY;
        let mut candidates = Vec::new();
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            let cost: f64 = (0..n).map(|i| nearest[i].min(dm.get(i, c))).sum();
            if cost < best {
                best = cost;
                candidates.clear();
            }
            if cost == best {
                candidates.push(c);
            }
        }
        let chosen = pick(&candidates, &mut ties);
        medoids.push(chosen);
        for (i, v) in nearest.iter_mut().enumerate() {
            *v = v.min(dm.get(i, chosen));
        }
    }

    // SWAP
    let mut cost = total_cost(dm, &medoids);
    let mut cost_trace = vec![cost];
    let mut swaps = 0;
    while swaps < max_iters {
        let mut best = cost;
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        let mut trial = medoids.clone();
        for slot in 0..target_k {
            for o in (0..n).filter(|o| !medoids.contains(o)) {
                trial[slot] = o;
                let c = total_cost(dm, &trial);
                if c < best {
                    best = c;
                    candidates.clear();
                }
                if c == best && c < cost {
                    candidates.push((slot, o));
                }
            }
            trial[slot] = medoids[slot];
        }
        // require a strict decrease beyond rounding so the loop terminates
        if candidates.is_empty() || best >= cost - 1e-12 * cost.abs() {
            break;
        }
        let idx: Vec<usize> = (0..candidates.len()).collect();
        let (slot, o) = candidates[pick(&idx, &mut ties)];
        medoids[slot] = o;
        cost = best;
        cost_trace.push(cost);
        swaps += 1;
    }

    // nearest-medoid assignment; a medoid always keeps itself, ties go to the earlier medoid
    let mut labels = vec![0usize; n];
    for (i, l) in labels.iter_mut().enumerate() {
        *l = match medoids.iter().position(|&m| m == i) {
            Some(s) => s,
            None => (0..target_k)
                .min_by(|&a, &b| dm.get(i, medoids[a]).total_cmp(&dm.get(i, medoids[b])))
                .unwrap(),
        };
    }
    let partition = Partition::from_labels(&labels);
    let mut ordered = vec![0; target_k];
    for (slot, &m) in medoids.iter().enumerate() {
        ordered[partition.assignment()[m]] = m;
        debug_assert_eq!(labels[m], slot);
    }
    Ok(KMedoidsResult { partition, medoids: ordered, cost, cost_trace, swaps })
}
