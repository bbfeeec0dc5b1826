//! `vmfgeom` command-line interface.
//!
//! Exit codes: 0 on success, 2 on usage or input errors, 3 on numerical failure.
//! Every numeric value is printed with 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use vmfgeom::eval::{mds_embed, mds_smacof, SmacofConfig};
use vmfgeom::experiment::{self, Scenario};
use vmfgeom::fit::{fit_em, FitConfig};
use vmfgeom::geometry::{l2_estimate, wl_distance, wl_interpolate, L2Config};
use vmfgeom::io::{
    create_write, format_f64, mixture_to_json, open_read, read_distance_matrix, read_mixture, read_samples,
    write_fit_metadata, write_mixture, write_rows, write_samples, FitMetadata, LabelColumn,
};
use vmfgeom::reduction::{reduce, ReductionMethod};
use vmfgeom::vmf::{sample_mixture, VmfMixture, VmfParams};
use vmfgeom::{barycenter, BarycenterConfig, Error};

const THREADS_VAR: &str = "VMFGEOM_THREADS";

#[derive(Parser)]
#[command(name = "vmfgeom", version, about = "Geometry, reduction and fitting for von Mises-Fisher laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistMetric {
    Wl,
    L2,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbedMethod {
    Classical,
    Smacof,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Greedy,
    Hclust,
    Kmedoids,
}

impl From<MethodArg> for ReductionMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Greedy => ReductionMethod::Greedy,
            MethodArg::Hclust => ReductionMethod::Hclust,
            MethodArg::Kmedoids => ReductionMethod::Kmedoids,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Sim1,
    Sim2,
}

#[derive(clap::Args)]
struct SolverArgs {
    /// Step size of the Frechet-mean gradient iteration.
    #[arg(long, default_value_t = 0.25)]
    step_size: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl SolverArgs {
    fn config(&self) -> BarycenterConfig {
        BarycenterConfig { step_size: self.step_size, max_iters: self.max_iters, tol: self.tol }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two single-component mixture files.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "wl")]
        metric: DistMetric,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative-change stopping rule of the Monte-Carlo L2 estimate.
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
    },
    /// WL barycenter of the components of a mixture under its weights.
    Barycenter {
        mixture: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Reduce a mixture to K components; writes the mixture and a JSON-lines trace.
    Reduce {
        mixture: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "greedy")]
        method: MethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the output path with extension `trace.jsonl`.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Fit a K-component mixture to samples by EM.
    Fit {
        samples: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1e5)]
        kappa_cap: f64,
        /// The samples file starts with a header row.
        #[arg(long)]
        header: bool,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the output path with extension `meta.json`.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Draw labelled samples from a mixture.
    Sample {
        mixture: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        header: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Points along the WL geodesic between two laws, one file per step.
    Interpolate {
        a: PathBuf,
        b: PathBuf,
        /// Number of intervals; writes steps + 1 files including both endpoints.
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed a distance matrix in Euclidean coordinates.
    Embed {
        matrix: PathBuf,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_enum, default_value = "classical")]
        method: EmbedMethod,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the simulated studies and write its tables.
    Experiment {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn single_law(path: &Path) -> vmfgeom::Result<VmfParams> {
    let m = read_mixture(path)?;
    if m.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "{} holds {} components; a single law is required",
            path.display(),
            m.len()
        )));
    }
    Ok(m.components()[0].clone())
}

fn output(path: Option<&Path>) -> vmfgeom::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(create_write(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn emit_mixture(path: Option<&Path>, m: &VmfMixture) -> vmfgeom::Result<()> {
    match path {
        Some(p) => write_mixture(p, m),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(mixture_to_json(m)?.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> vmfgeom::Result<()> {
    match cli.command {
        Command::Dist { a, b, metric, seed, rel_tol } => {
            let (p, q) = (single_law(&a)?, single_law(&b)?);
            let value = match metric {
                DistMetric::Wl => wl_distance(&p, &q)?,
                DistMetric::L2 => {
                    let est = l2_estimate(&p, &q, seed, &L2Config::with_rel_tol(rel_tol))?;
                    if !est.converged {
                        warn!("L2 estimate stopped at the draw cap ({} points)", est.draws);
                    }
                    est.value
                }
            };
            println!("{}", format_f64(value));
        }
        Command::Barycenter { mixture, out, solver } => {
            let m = read_mixture(&mixture)?;
            let r = barycenter(m.components(), m.weights(), &solver.config())?;
            if !r.converged {
                warn!("Frechet mean stopped after {} iterations (last step {:e})", r.iterations, r.final_change);
            }
            info!("gradient norm {:e} after {} iterations", r.gradient_norm, r.iterations);
            emit_mixture(out.as_deref(), &VmfMixture::single(r.params))?;
        }
        Command::Reduce { mixture, k, method, seed, out, trace, solver } => {
            let m = read_mixture(&mixture)?;
            let (reduced, events) = reduce(&m, k, method.into(), &solver.config(), seed)?;
            write_mixture(&out, &reduced)?;
            let trace = trace.unwrap_or_else(|| out.with_extension("trace.jsonl"));
            let mut w = io::BufWriter::new(create_write(&trace)?);
            events.write_jsonl(&mut w)?;
            w.flush()?;
        }
        Command::Fit { samples, k, restarts, seed, max_iters, tol, kappa_cap, header, out, meta } => {
            let data = read_samples(open_read(&samples)?, header, LabelColumn::Auto)?;
            let cfg = FitConfig { k, restarts, max_iters, tol, seed, kappa_cap };
            let fit = fit_em(&data, &cfg)?;
            if !fit.converged {
                warn!("EM did not converge within {max_iters} iterations");
            }
            write_mixture(&out, &fit.mixture)?;
            let meta = meta.unwrap_or_else(|| out.with_extension("meta.json"));
            write_fit_metadata(&meta, &FitMetadata::from(&fit))?;
        }
        Command::Sample { mixture, n, seed, header, out } => {
            let m = read_mixture(&mixture)?;
            let data = sample_mixture(&m, n, seed);
            write_samples(output(out.as_deref())?, &data, header)?;
        }
        Command::Interpolate { a, b, steps, out } => {
            if steps == 0 {
                return Err(Error::InvalidArgument("--steps must be at least 1".into()));
            }
            let (p, q) = (single_law(&a)?, single_law(&b)?);
            fs::create_dir_all(&out)?;
            let width = steps.to_string().len();
            for i in 0..=steps {
                let t = i as f64 / steps as f64;
                let law = wl_interpolate(&p, &q, t)?;
                write_mixture(&out.join(format!("step_{i:0width$}.json")), &VmfMixture::single(law))?;
            }
        }
        Command::Embed { matrix, dim, method, out } => {
            let dm = read_distance_matrix(open_read(&matrix)?)?;
            let e = match method {
                EmbedMethod::Classical => mds_embed(&dm, dim)?,
                EmbedMethod::Smacof => mds_smacof(&dm, dim, &SmacofConfig::default())?.embedding,
            };
            let names: Vec<String> = (1..=dim).map(|a| format!("x{a}")).collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            write_rows(output(out.as_deref())?, &e.coords, dim, Some(&names))?;
        }
        Command::Experiment { scenario, seed, out } => {
            let scenario = match scenario {
                ScenarioArg::Sim1 => Scenario::Sim1,
                ScenarioArg::Sim2 => Scenario::Sim2,
            };
            experiment::run(scenario, seed, &out)?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
