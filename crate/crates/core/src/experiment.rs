//! The two simulation scenarios on the circle.
//!
//! `sim1` draws 100 vMF laws for each cell of a direction (north / south) by
//! concentration (low / high) design, embeds the WL and Monte-Carlo `L2`
//! distance matrices in the plane with stress-minimizing MDS, and scores a
//! 4-means clustering of each embedding by purity against the design cell.
//! Classical scaling alone is not used here: the arc-length part of WL is far
//! from Euclidean, and its double-centred spectrum puts within-group direction
//! spread ahead of the concentration split.
//!
//! `sim2` samples 400 points from an equal-weight mixture with means on the
//! coordinate axes and `kappa = 10`, fits mixtures with `K = 2..=10`
//! components, reduces the fitted 10-component model with each reduction
//! method, and tabulates BIC against `K`.
//!
//! Seeds: every stage draws from `rng::stream(derive_seed(seed, [stage]), TAG_EXPERIMENT)`
//! or passes `derive_seed(seed, [stage, ..])` to a library routine.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;

use crate::barycenter::BarycenterConfig;
use crate::error::{Error, Result};
use crate::eval::{kmeans, mds_smacof, purity, Embedding, SmacofConfig};
use crate::fit::{bic, fit_em, FitConfig, FitResult};
use crate::geometry::{pairwise_matrix, DistanceMatrix, L2Config, Metric};
use crate::io::{format_f64, write_distance_matrix, write_mixture, write_samples};
use crate::reduction::{reduce, ReductionMethod, ReductionTrace};
use crate::rng::{derive_seed, stream, TAG_EXPERIMENT};
use crate::vmf::{sample_mixture, SampleSet, VmfMixture, VmfParams};

const STAGE_PARAMS: u64 = 1;
const STAGE_L2: u64 = 2;
const STAGE_KMEANS: u64 = 3;
const STAGE_SAMPLE: u64 = 4;
const STAGE_FIT: u64 = 5;
const STAGE_REDUCE: u64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Sim1,
    Sim2,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sim1" => Ok(Self::Sim1),
            "sim2" => Ok(Self::Sim2),
            other => Err(Error::InvalidArgument(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Design cells of `sim1`, in item order.
pub const SIM1_TYPES: [&str; 4] = ["north-high", "north-low", "south-high", "south-low"];

pub const SIM1_PER_TYPE: usize = 100;

/// Monte-Carlo schedule for the `sim1` `L2` matrix: one batch of 1024 sphere points per pair.
pub const SIM1_L2: L2Config = L2Config { rel_tol: 1e-6, initial_draws: 1024, max_draws: 1024 };

#[derive(Debug, Clone)]
pub struct Sim1Result {
    pub laws: Vec<VmfParams>,
    pub thetas: Vec<f64>,
    /// Index into [`SIM1_TYPES`] for each law.
    pub types: Vec<usize>,
    pub wl: DistanceMatrix,
    pub l2: DistanceMatrix,
    pub wl_embedding: Embedding,
    pub l2_embedding: Embedding,
    pub wl_clusters: Vec<usize>,
    pub l2_clusters: Vec<usize>,
    pub wl_purity: f64,
    pub l2_purity: f64,
}

pub fn sim1_laws(seed: u64) -> (Vec<VmfParams>, Vec<f64>, Vec<usize>) {
    let mut r = stream(derive_seed(seed, &[STAGE_PARAMS]), TAG_EXPERIMENT);
    let mut laws = Vec::with_capacity(4 * SIM1_PER_TYPE);
    let mut thetas = Vec::with_capacity(4 * SIM1_PER_TYPE);
    let mut types = Vec::with_capacity(4 * SIM1_PER_TYPE);
    for (t, name) in SIM1_TYPES.iter().enumerate() {
        let north = name.starts_with("north");
        let high = name.ends_with("high");
        for _ in 0..SIM1_PER_TYPE {
            let theta = if north {
                r.random_range(15.0 * PI / 8.0..17.0 * PI / 8.0)
            } else {
                r.random_range(7.0 * PI / 8.0..9.0 * PI / 8.0)
            };
            let kappa = if high { r.random_range(9.9..10.1) } else { r.random_range(0.9..1.1) };
            laws.push(VmfParams::from_direction(vec![theta.cos(), theta.sin()], kappa).expect("valid law"));
            thetas.push(theta);
            types.push(t);
        }
    }
    (laws, thetas, types)
}

fn cluster_embedding(e: &Embedding, seed: u64) -> Result<Vec<usize>> {
    Ok(kmeans(&e.coords, e.dim, 4, 10, seed)?.labels)
}

pub fn run_sim1(seed: u64) -> Result<Sim1Result> {
    let (laws, thetas, types) = sim1_laws(seed);
    let wl = pairwise_matrix(&laws, Metric::Wl, 0)?;
    let l2 = pairwise_matrix(&laws, Metric::L2Mc(SIM1_L2), derive_seed(seed, &[STAGE_L2]))?;
    let wl_embedding = mds_smacof(&wl, 2, &SmacofConfig::default())?.embedding;
    let l2_embedding = mds_smacof(&l2, 2, &SmacofConfig::default())?.embedding;
    let km_seed = derive_seed(seed, &[STAGE_KMEANS]);
    let wl_clusters = cluster_embedding(&wl_embedding, km_seed)?;
    let l2_clusters = cluster_embedding(&l2_embedding, km_seed)?;
    let wl_purity = purity(&wl_clusters, &types)?;
    let l2_purity = purity(&l2_clusters, &types)?;
    Ok(Sim1Result { laws, thetas, types, wl, l2, wl_embedding, l2_embedding, wl_clusters, l2_clusters, wl_purity, l2_purity })
}

/// Writes the `sim1` tables into `dir`.
pub fn write_sim1(dir: &Path, r: &Sim1Result) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut params = String::from("id,type,theta,kappa\n");
    for (i, law) in r.laws.iter().enumerate() {
        params.push_str(&format!(
            "{i},{},{},{}\n",
            SIM1_TYPES[r.types[i]],
            format_f64(r.thetas[i]),
            format_f64(law.kappa())
        ));
    }
    std::fs::write(dir.join("sim1_params.csv"), params)?;
    write_distance_matrix(std::fs::File::create(dir.join("sim1_wl_dist.csv"))?, &r.wl)?;
    write_distance_matrix(std::fs::File::create(dir.join("sim1_l2_dist.csv"))?, &r.l2)?;
    for (name, e, clusters) in [("wl", &r.wl_embedding, &r.wl_clusters), ("l2", &r.l2_embedding, &r.l2_clusters)] {
        let mut out = String::from("id,type,x1,x2,cluster\n");
        for i in 0..e.n {
            let row = e.row(i);
            out.push_str(&format!(
                "{i},{},{},{},{}\n",
                SIM1_TYPES[r.types[i]],
                format_f64(row[0]),
                format_f64(row[1]),
                clusters[i]
            ));
        }
        std::fs::write(dir.join(format!("sim1_{name}_mds.csv")), out)?;
    }
    let purity = format!("metric,purity\nwl,{}\nl2,{}\n", format_f64(r.wl_purity), format_f64(r.l2_purity));
    std::fs::write(dir.join("sim1_purity.csv"), purity)?;
    Ok(())
}

pub const SIM2_N: usize = 400;
pub const SIM2_KAPPA: f64 = 10.0;
pub const SIM2_K_RANGE: std::ops::RangeInclusive<usize> = 2..=10;
pub const SIM2_METHODS: [ReductionMethod; 3] = [ReductionMethod::Greedy, ReductionMethod::Hclust, ReductionMethod::Kmedoids];

pub fn sim2_truth() -> VmfMixture {
    let comps = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
        .iter()
        .map(|m| VmfParams::new(m.to_vec(), SIM2_KAPPA).expect("unit axis"))
        .collect();
    VmfMixture::new(comps, vec![0.25; 4]).expect("equal weights")
}

#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub k: usize,
    pub mixture: VmfMixture,
    pub log_likelihood: f64,
    pub bic: f64,
}

#[derive(Debug, Clone)]
pub struct Sim2Result {
    pub data: SampleSet,
    /// Best-of-restarts fits for `K = 2..=10`, in order.
    pub fits: Vec<FitResult>,
    /// Per method, reductions of the 10-component fit to `K = 2..=9`, in order.
    pub reduced: Vec<(ReductionMethod, Vec<ReducedModel>)>,
    /// Greedy trace from 10 components down to 2.
    pub greedy_trace: ReductionTrace,
}

impl Sim2Result {
    /// `(K, fitted, greedy, hclust, kmedoids)` BIC rows; the reduced columns equal
    /// the fitted value at `K = 10`.
    pub fn bic_table(&self) -> Vec<(usize, [f64; 4])> {
        SIM2_K_RANGE
            .map(|k| {
                let fitted = self.fits[k - 2].bic;
                let mut row = [fitted; 4];
                for (c, (_, models)) in self.reduced.iter().enumerate() {
                    if let Some(m) = models.iter().find(|m| m.k == k) {
                        row[c + 1] = m.bic;
                    }
                }
                (k, row)
            })
            .collect()
    }

    /// `K` with the smallest BIC in column `col` of [`Sim2Result::bic_table`]; ties go to the smaller `K`.
    pub fn argmin_k(&self, col: usize) -> usize {
        self.bic_table()
            .into_iter()
            .fold((0, f64::INFINITY), |best, (k, row)| if row[col] < best.1 { (k, row[col]) } else { best })
            .0
    }
}

pub fn run_sim2(seed: u64) -> Result<Sim2Result> {
    let data = sample_mixture(&sim2_truth(), SIM2_N, derive_seed(seed, &[STAGE_SAMPLE]));
    let d = data.dim();
    let fits = SIM2_K_RANGE
        .map(|k| fit_em(&data, &FitConfig::new(k, derive_seed(seed, &[STAGE_FIT, k as u64]))))
        .collect::<Result<Vec<_>>>()?;
    let top = &fits.last().expect("non-empty K range").mixture;
    let cfg = BarycenterConfig::default();
    let reduce_seed = derive_seed(seed, &[STAGE_REDUCE]);
    let mut reduced = Vec::new();
    for method in SIM2_METHODS {
        let mut models = Vec::new();
        for k in 2..top.len() {
            let (mixture, _) = reduce(top, k, method, &cfg, reduce_seed)?;
            let ll = mixture.log_likelihood(&data)?;
            models.push(ReducedModel { k, bic: bic(ll, k, d, data.len()), log_likelihood: ll, mixture });
        }
        reduced.push((method, models));
    }
    let (_, greedy_trace) = reduce(top, 2, ReductionMethod::Greedy, &cfg, reduce_seed)?;
    Ok(Sim2Result { data, fits, reduced, greedy_trace })
}

/// Writes the `sim2` tables into `dir`.
pub fn write_sim2(dir: &Path, r: &Sim2Result) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_samples(std::fs::File::create(dir.join("sim2_samples.csv"))?, &r.data, true)?;
    let mut table = String::from("K,fitted,greedy,hclust,kmedoids\n");
    for (k, row) in r.bic_table() {
        let cells: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        table.push_str(&format!("{k},{}\n", cells.join(",")));
    }
    std::fs::write(dir.join("sim2_bic.csv"), table)?;

    let mut fit_table = String::from("K,loglik,bic,iterations,converged\n");
    for f in &r.fits {
        fit_table.push_str(&format!(
            "{},{},{},{},{}\n",
            f.mixture.len(),
            format_f64(f.log_likelihood),
            format_f64(f.bic),
            f.iterations,
            f.converged
        ));
        write_mixture(&dir.join(format!("sim2_fit_k{}.json", f.mixture.len())), &f.mixture)?;
    }
    std::fs::write(dir.join("sim2_fits.csv"), fit_table)?;
    for (method, models) in &r.reduced {
        if let Some(m) = models.iter().find(|m| m.k == 4) {
            write_mixture(&dir.join(format!("sim2_{}_k4.json", method.name())), &m.mixture)?;
        }
    }
    let mut trace = Vec::new();
    r.greedy_trace.write_jsonl(&mut trace)?;
    std::fs::write(dir.join("sim2_greedy_trace.jsonl"), trace)?;
    Ok(())
}

/// Runs a scenario and writes its tables into `dir`.
pub fn run(scenario: Scenario, seed: u64, dir: &Path) -> Result<()> {
    match scenario {
        Scenario::Sim1 => write_sim1(dir, &run_sim1(seed)?),
        Scenario::Sim2 => write_sim2(dir, &run_sim2(seed)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{geodesic_distance, wl_distance};

    #[test]
    fn sim1_design() {
        let (laws, thetas, types) = sim1_laws(3);
        assert_eq!(laws.len(), 400);
        for ((law, &theta), &t) in laws.iter().zip(&thetas).zip(&types) {
            let (north, high) = (SIM1_TYPES[t].starts_with("north"), SIM1_TYPES[t].ends_with("high"));
            let (lo, hi) = if north { (15.0 * PI / 8.0, 17.0 * PI / 8.0) } else { (7.0 * PI / 8.0, 9.0 * PI / 8.0) };
            assert!((lo..hi).contains(&theta));
            let (klo, khi) = if high { (9.9, 10.1) } else { (0.9, 1.1) };
            assert!((klo..khi).contains(&law.kappa()));
        }
        assert_eq!(types.iter().filter(|&&t| t == 2).count(), 100);
        assert_eq!(sim1_laws(3).1, thetas);
    }

    #[test]
    fn sim1_wl_matrix_is_elementwise() {
        let (laws, _, _) = sim1_laws(0);
        let dm = pairwise_matrix(&laws, Metric::Wl, 0).unwrap();
        for i in (0..400).step_by(37) {
            for j in (0..400).step_by(41) {
                assert_eq!(dm.get(i, j), wl_distance(&laws[i], &laws[j]).unwrap());
            }
        }
    }

    #[test]
    fn sim1_outputs() {
        let r = run_sim1(1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_sim1(dir.path(), &r).unwrap();
        for name in ["sim1_wl_mds.csv", "sim1_l2_mds.csv", "sim1_params.csv"] {
            let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
            assert_eq!(text.lines().count(), 401, "{name}");
        }
        assert!(r.wl_purity >= 0.95, "wl purity {}", r.wl_purity);
    }

    #[test]
    fn greedy_recovers_axes_from_ten_components() {
        let r = run_sim2(2).unwrap();
        let greedy = &r.reduced[0].1;
        let four = greedy.iter().find(|m| m.k == 4).unwrap();
        let truth = sim2_truth();
        for t in truth.components() {
            let nearest = four
                .mixture
                .components()
                .iter()
                .map(|c| geodesic_distance(c.mu(), t.mu()).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 0.15, "{nearest}");
        }
        let table = r.bic_table();
        assert_eq!(table.len(), 9);
        assert!(table.last().unwrap().1.iter().all(|&v| v == table.last().unwrap().1[0]));
    }
}
