//! Mixture reduction: greedy pairwise merging and one-shot partitional methods.
//!
//! Every path replaces a group of components by their WL barycenter under
//! within-group normalized weights, and gives the result the group's total
//! weight. Each merge is recorded in a [`ReductionTrace`].
//!
//! Index semantics of [`TraceEvent::merged`] differ by method. Greedy events
//! index the mixture as it stood just before the event: the merged component
//! takes the slot of the smallest index and the other slots are removed.
//! Partitional events all index the input mixture, one event per cluster.

mod cluster;
mod greedy;

use std::io::Write;

use serde::Serialize;

pub use cluster::{hclust_single_linkage, kmedoids, kmedoids_detailed, KMedoidsResult};
pub use greedy::greedy_reduce;

use crate::barycenter::{barycenter, BarycenterConfig};
use crate::error::{Error, Result};
use crate::geometry::{pairwise_matrix, Metric};
use crate::vmf::{VmfMixture, VmfParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionMethod {
    Greedy,
    Hclust,
    Kmedoids,
}

impl ReductionMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Greedy => "greedy",
            Self::Hclust => "hclust",
            Self::Kmedoids => "kmedoids",
        }
    }
}

impl std::str::FromStr for ReductionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Self::Greedy),
            "hclust" => Ok(Self::Hclust),
            "kmedoids" => Ok(Self::Kmedoids),
            other => Err(Error::InvalidArgument(format!("unknown reduction method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub step: usize,
    pub merged: Vec<usize>,
    pub weight: f64,
    pub result: VmfParams,
    /// WL distance between the merged pair (greedy only).
    pub distance: Option<f64>,
}

#[derive(Serialize)]
struct EventLine<'a> {
    step: usize,
    merged: &'a [usize],
    weight: f64,
    mu: &'a [f64],
    kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionTrace {
    pub method: ReductionMethod,
    pub events: Vec<TraceEvent>,
}

impl ReductionTrace {
    /// Writes one JSON object per event.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.events {
            let line = EventLine {
                step: e.step,
                merged: &e.merged,
                weight: e.weight,
                mu: e.result.mu(),
                kappa: e.result.kappa(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Replays the trace over the input weights; entry `t` holds the live
    /// weights after event `t`.
    pub fn weight_history(&self, initial: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut groups: Vec<(Vec<usize>, f64)> = initial.iter().enumerate().map(|(i, &w)| (vec![i], w)).collect();
        let mut history = Vec::with_capacity(self.events.len());
        for e in &self.events {
            self.apply(&mut groups, e)?;
            history.push(groups.iter().map(|g| g.1).collect());
        }
        Ok(history)
    }

    /// Input indices summarized by each output component.
    pub fn provenance(&self, n_input: usize) -> Result<Vec<Vec<usize>>> {
        let mut groups: Vec<(Vec<usize>, f64)> = (0..n_input).map(|i| (vec![i], 0.0)).collect();
        for e in &self.events {
            self.apply(&mut groups, e)?;
        }
        let mut out: Vec<Vec<usize>> = groups.into_iter().map(|g| g.0).collect();
        out.iter_mut().for_each(|g| g.sort_unstable());
        Ok(out)
    }

    fn apply(&self, groups: &mut Vec<(Vec<usize>, f64)>, e: &TraceEvent) -> Result<()> {
        let bad = || Error::InvalidArgument(format!("trace event {} does not fit the mixture", e.step));
        match self.method {
            ReductionMethod::Greedy => {
                let mut idx = e.merged.clone();
                idx.sort_unstable();
                idx.dedup();
                if idx.len() != e.merged.len() || idx.last().map_or(true, |&i| i >= groups.len()) {
                    return Err(bad());
                }
                let mut members = Vec::new();
                for &i in idx.iter().rev() {
                    members.extend(groups[i].0.iter().copied());
                    if i != idx[0] {
                        groups.remove(i);
                    }
                }
                groups[idx[0]] = (members, e.weight);
            }
            ReductionMethod::Hclust | ReductionMethod::Kmedoids => {
                // one-shot: input indices; merged groups collapse into the first member's slot
                let slot = |groups: &Vec<(Vec<usize>, f64)>, input: usize| {
                    groups.iter().position(|g| g.0.contains(&input) && g.0.len() == 1)
                };
                let first = *e.merged.first().ok_or_else(bad)?;
                let target = slot(groups, first).ok_or_else(bad)?;
                let mut removed = Vec::new();
                for &i in &e.merged[1..] {
                    removed.push(slot(groups, i).ok_or_else(bad)?);
                }
                groups[target] = (e.merged.clone(), e.weight);
                removed.sort_unstable();
                for i in removed.into_iter().rev() {
                    groups.remove(i);
                }
            }
        }
        Ok(())
    }
}

/// Cluster assignment with labels `0..k` numbered by first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Relabels arbitrary cluster ids by order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { assignment, k: map.len() }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn num_clusters(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Members of each cluster, in increasing index order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

fn check_target(target_k: usize, n: usize) -> Result<()> {
    if target_k == 0 || target_k >= n {
        Err(Error::TargetOutOfRange { target: target_k, n })
    } else {
        Ok(())
    }
}

/// Barycenter of `members` under weights renormalized within the group.
///
/// Antipodal or zero-mean configurations are reported with the member indices.
pub(crate) fn merge_group(
    components: &[VmfParams],
    weights: &[f64],
    members: &[usize],
    cfg: &BarycenterConfig,
) -> Result<(VmfParams, f64)> {
    let total: f64 = members.iter().map(|&i| weights[i]).sum();
    if members.len() == 1 {
        return Ok((components[members[0]].clone(), total));
    }
    let group: Vec<VmfParams> = members.iter().map(|&i| components[i].clone()).collect();
    let local: Vec<f64> = members.iter().map(|&i| weights[i] / total).collect();
    match barycenter(&group, &local, cfg) {
        Ok(r) => Ok((r.params, total)),
        Err(Error::Antipodal(_)) | Err(Error::ZeroExtrinsicMean) => {
            Err(Error::Antipodal(format!(" while merging components {members:?}")))
        }
        Err(e) => Err(e),
    }
}

/// Partitions the components on their WL distances (weights ignored), then
/// replaces each cluster by its weighted barycenter.
pub fn partitional_reduce(
    m: &VmfMixture,
    target_k: usize,
    method: ReductionMethod,
    cfg: &BarycenterConfig,
    seed: u64,
) -> Result<(VmfMixture, ReductionTrace)> {
    check_target(target_k, m.len())?;
    cfg.validate()?;
    let dm = pairwise_matrix(m.components(), Metric::Wl, seed)?;
    let partition = match method {
        ReductionMethod::Hclust => hclust_single_linkage(&dm, target_k)?,
        ReductionMethod::Kmedoids => kmedoids(&dm, target_k, seed, 100)?,
        ReductionMethod::Greedy => {
            return Err(Error::InvalidArgument("greedy is not a partitional method".into()));
        }
    };
    let mut components = Vec::with_capacity(target_k);
    let mut weights = Vec::with_capacity(target_k);
    let mut events = Vec::with_capacity(target_k);
    for (step, members) in partition.clusters().into_iter().enumerate() {
        let (params, weight) = merge_group(m.components(), m.weights(), &members, cfg)?;
        events.push(TraceEvent { step, merged: members, weight, result: params.clone(), distance: None });
        components.push(params);
        weights.push(weight);
    }
    let reduced = VmfMixture::from_unnormalized(components, weights)?;
    Ok((reduced, ReductionTrace { method, events }))
}

/// Dispatches to [`greedy_reduce`] or [`partitional_reduce`].
pub fn reduce(
    m: &VmfMixture,
    target_k: usize,
    method: ReductionMethod,
    cfg: &BarycenterConfig,
    seed: u64,
) -> Result<(VmfMixture, ReductionTrace)> {
    match method {
        ReductionMethod::Greedy => greedy_reduce(m, target_k, cfg),
        _ => partitional_reduce(m, target_k, method, cfg, seed),
    }
}
