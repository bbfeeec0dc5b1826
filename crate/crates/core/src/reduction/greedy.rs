use super::{check_target, merge_group, ReductionMethod, ReductionTrace, TraceEvent};
use crate::barycenter::BarycenterConfig;
use crate::error::Result;
use crate::geometry::wl_distance;
use crate::vmf::{VmfMixture, VmfParams};

/// Repeatedly merges the WL-closest pair until `target_k` components remain.
///
/// Ties go to the lexicographically smallest `(i, j)`. The merged component
/// takes slot `i`, slot `j` is removed, and only distances involving the new
/// component are recomputed.
pub fn greedy_reduce(m: &VmfMixture, target_k: usize, cfg: &BarycenterConfig) -> Result<(VmfMixture, ReductionTrace)> {
    check_target(target_k, m.len())?;
    cfg.validate()?;
    let mut comps: Vec<VmfParams> = m.components().to_vec();
    let mut weights: Vec<f64> = m.weights().to_vec();
    let n = comps.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = wl_distance(&comps[i], &comps[j])?;
            dist[i][j] = v;
            dist[j][i] = v;
        }
    }

    let mut events = Vec::with_capacity(n - target_k);
    while comps.len() > target_k {
        let live = comps.len();
        let (mut bi, mut bj, mut best) = (0, 1, f64::INFINITY);
        for i in 0..live {
            for j in (i + 1)..live {
                if dist[i][j] < best {
                    (bi, bj, best) = (i, j, dist[i][j]);
                }
            }
        }
        let (merged, weight) = merge_group(&comps, &weights, &[bi, bj], cfg)?;
        comps[bi] = merged.clone();
        weights[bi] = weight;
        comps.remove(bj);
        weights.remove(bj);
        dist.remove(bj);
        dist.iter_mut().for_each(|row| {
            row.remove(bj);
        });
        for k in 0..comps.len() {
            if k != bi {
                let v = wl_distance(&comps[bi], &comps[k])?;
                dist[bi][k] = v;
                dist[k][bi] = v;
            }
        }
        events.push(TraceEvent {
            step: events.len(),
            merged: vec![bi, bj],
            weight,
            result: merged,
            distance: Some(best),
        });
    }
    let reduced = VmfMixture::from_unnormalized(comps, weights)?;
    Ok((reduced, ReductionTrace { method: ReductionMethod::Greedy, events }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barycenter::barycenter;
    use crate::reduction::tests::law;

    #[test]
    fn identical_pair_merges_first() {
        let a = law(&[1.0, 0.0, 0.0], 3.0);
        let b = law(&[0.0, 1.0, 0.0], 3.0);
        let m = VmfMixture::from_unnormalized(vec![a.clone(), b.clone(), b.clone()], vec![0.5, 0.2, 0.3]).unwrap();
        let (r, trace) = greedy_reduce(&m, 2, &Default::default()).unwrap();
        assert_eq!(trace.events[0].merged, vec![1, 2]);
        assert!((r.weights()[1] - 0.5).abs() < 1e-15);
        assert_eq!(r.components()[0], a);
        assert!(wl_distance(&r.components()[1], &b).unwrap() < 1e-12);
    }

    #[test]
    fn two_components_collapse_to_barycenter() {
        let a = law(&[1.0, 0.0, 0.0], 1.0);
        let b = law(&[0.0, 1.0, 0.0], 4.0);
        let m = VmfMixture::from_unnormalized(vec![a.clone(), b.clone()], vec![0.25, 0.75]).unwrap();
        let (r, trace) = greedy_reduce(&m, 1, &Default::default()).unwrap();
        let direct = barycenter(&[a, b], &[0.25, 0.75], &Default::default()).unwrap();
        assert_eq!(r.components()[0], direct.params);
        assert_eq!(r.weights(), &[1.0]);
        assert_eq!(trace.events.len(), 1);
    }

    #[test]
    fn ties_break_lexicographically() {
        // coordinate axes: every non-antipodal pair sits at exactly pi/2
        let comps = vec![
            law(&[1.0, 0.0, 0.0], 5.0),
            law(&[0.0, 1.0, 0.0], 5.0),
            law(&[0.0, 0.0, 1.0], 5.0),
            law(&[-1.0, 0.0, 0.0], 5.0),
        ];
        let m = VmfMixture::from_unnormalized(comps, vec![0.25; 4]).unwrap();
        let (_, trace) = greedy_reduce(&m, 3, &Default::default()).unwrap();
        assert_eq!(trace.events[0].merged, vec![0, 1]);
    }

    #[test]
    fn untouched_components_survive_unchanged() {
        let comps: Vec<VmfParams> = [0.0, 0.05, 1.5, 3.0]
            .iter()
            .map(|&t: &f64| law(&[t.cos(), t.sin()], 7.0))
            .collect();
        let m = VmfMixture::from_unnormalized(comps.clone(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let (r, _) = greedy_reduce(&m, 3, &Default::default()).unwrap();
        assert_eq!(&r.components()[1..], &comps[2..]);
        assert_eq!(&r.weights()[1..], &[0.3, 0.4]);
    }

    #[test]
    fn incremental_matrix_matches_fresh_recomputation() {
        let comps: Vec<VmfParams> = (0..9)
            .map(|i| {
                let t = (i * i) as f64 * 0.37;
                law(&[t.cos(), t.sin(), 0.3 * (i as f64 - 4.0)], 2.0 + i as f64)
            })
            .collect();
        let weights: Vec<f64> = (1..=9).map(|i| i as f64).collect();
        let m = VmfMixture::from_unnormalized(comps, weights).unwrap();
        let (_, trace) = greedy_reduce(&m, 2, &Default::default()).unwrap();

        // naive replay that rebuilds every distance each step
        let mut comps = m.components().to_vec();
        let mut w = m.weights().to_vec();
        for e in &trace.events {
            let mut best = (f64::INFINITY, 0, 0);
            for i in 0..comps.len() {
                for j in (i + 1)..comps.len() {
                    let v = wl_distance(&comps[i], &comps[j]).unwrap();
                    if v < best.0 {
                        best = (v, i, j);
                    }
                }
            }
            assert_eq!(e.merged, vec![best.1, best.2]);
            assert_eq!(e.distance, Some(best.0));
            let (i, j) = (best.1, best.2);
            let (p, wt) = merge_group(&comps, &w, &[i, j], &Default::default()).unwrap();
            comps[i] = p;
            w[i] = wt;
            comps.remove(j);
            w.remove(j);
        }
    }
}
