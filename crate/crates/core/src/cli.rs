//! Command-line harness: `synth`, `dist`, `fit`, `sweep` and `compare`.
//!
//! Argument types are plain clap derives so the commands can be driven
//! in-process through [`run`]; the `fkmwc` binary only parses arguments and
//! maps errors to exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::baselines::{self, FcmConfig};
use crate::dataset::{self, BlobSpec, DataMatrix, LabelVector};
use crate::distance::{self, AdjacencyMatrix, DistanceKind, DistanceMatrix, DistanceParams};
use crate::error::{Error, Result};
use crate::metrics;
use crate::report::{self, ClusterReport, DistanceDescriptor, Format};
use crate::solver::{self, SolverConfig, DEFAULT_LAMBDA, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[derive(Debug, Parser)]
#[command(name = "fkmwc", version, about = "Centroid-free fuzzy k-means clustering")]
pub struct Cli {
    /// Worker threads for distance construction and parallel runs.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic Gaussian-blob dataset and its labels.
    Synth(SynthArgs),
    /// Build a distance matrix and write it as CSV.
    Dist(DistArgs),
    /// Cluster one dataset and print a report.
    Fit(FitArgs),
    /// Fit once per lambda in a grid.
    Sweep(SweepArgs),
    /// Run the solver next to the k-means and fuzzy c-means baselines.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceChoice {
    Euclidean,
    Knn,
    Butterworth,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Kmeans,
    Fcm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SeedPolicy {
    /// Every grid point uses `--seed`.
    #[default]
    Same,
    /// Grid point `i` uses `--seed + i`.
    Increment,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Sample matrix CSV (one row per sample).
    #[arg(long, group = "source")]
    pub input: Option<PathBuf>,
    /// Precomputed N x N distance matrix CSV.
    #[arg(long, group = "source")]
    pub precomputed: Option<PathBuf>,
    /// Symmetric N x N similarity matrix CSV, for `--distance butterworth`.
    #[arg(long, group = "source")]
    pub adjacency: Option<PathBuf>,
    /// Generated blobs `N_PER,K,DIM,SEP,SPREAD,SEED`; supplies its own labels.
    #[arg(long, group = "source", value_name = "N_PER,K,DIM,SEP,SPREAD,SEED")]
    pub blobs: Option<String>,
    /// The input CSV starts with a header line.
    #[arg(long)]
    pub header: bool,
    /// Standardize features to zero mean and unit variance before use.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DistanceFlags {
    /// Neighbourhood size for `--distance knn`.
    #[arg(long, default_value_t = 10)]
    pub knn_k: usize,
    /// Butterworth cut-off; defaults to the mean nonzero similarity.
    #[arg(long)]
    pub omega: Option<f64>,
    /// RBF width for kernel and butterworth distances; defaults to the
    /// median pairwise Euclidean distance.
    #[arg(long)]
    pub kernel_sigma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    /// Number of clusters.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include the per-iteration objective trace in reports.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Args)]
pub struct OutputFlags {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub n_per: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..), default_value_t = 2)]
    pub dim: u32,
    #[arg(long, default_value_t = 20.0)]
    pub sep: f64,
    #[arg(long, default_value_t = 1.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Data CSV path.
    #[arg(long)]
    pub output: PathBuf,
    /// Label file path (one integer per line).
    #[arg(long)]
    pub labels_output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = DistanceChoice::Euclidean)]
    pub distance: DistanceChoice,
    #[command(flatten)]
    pub params: DistanceFlags,
    /// Write the matrix here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = DistanceChoice::Euclidean)]
    pub distance: DistanceChoice,
    #[command(flatten)]
    pub params: DistanceFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Ground-truth labels (one integer per line).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = DistanceChoice::Euclidean)]
    pub distance: DistanceChoice,
    #[command(flatten)]
    pub params: DistanceFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Comma-separated lambda grid, reported in the given order.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub lambdas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SeedPolicy::Same)]
    pub seed_policy: SeedPolicy,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputFlags,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Distance backends for the centroid-free solver (repeatable).
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [DistanceChoice::Euclidean])]
    pub distance: Vec<DistanceChoice>,
    #[command(flatten)]
    pub params: DistanceFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Baseline::Kmeans, Baseline::Fcm])]
    pub baselines: Vec<Baseline>,
    /// Fuzzifier of the fuzzy c-means baseline.
    #[arg(long, default_value_t = 2.0)]
    pub fuzzifier: f64,
    /// Required unless the data comes from `--blobs`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputFlags,
}

/// Text produced by a command: `stdout` is the machine-readable payload,
/// `stderr` carries human-oriented notes.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub stdout: String,
    pub stderr: String,
}

/// Runs a parsed command, inside a dedicated thread pool when `--threads`
/// is given.
pub fn run(cli: &Cli) -> Result<CommandOutput> {
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| Error::param("threads", e.to_string()))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}

fn dispatch(command: &Command) -> Result<CommandOutput> {
    match command {
        Command::Synth(a) => cmd_synth(a),
        Command::Dist(a) => cmd_dist(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

enum Source {
    Data(DataMatrix),
    Adjacency(AdjacencyMatrix),
    Distance(DistanceMatrix),
}

struct Loaded {
    source: Source,
    descriptor: String,
    labels: Option<LabelVector>,
}

fn parse_blobs(spec: &str) -> Result<BlobSpec> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Error::param("blobs", format!("expected N_PER,K,DIM,SEP,SPREAD,SEED, got {spec:?}"));
    if parts.len() != 6 {
        return Err(bad());
    }
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
    let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
    Ok(BlobSpec {
        n_per_cluster: int(parts[0])?,
        k: int(parts[1])?,
        dim: int(parts[2])?,
        separation: real(parts[3])?,
        spread: real(parts[4])?,
        seed: parts[5].parse().map_err(|_| bad())?,
    })
}

fn load_input(input: &InputArgs) -> Result<Loaded> {
    let standardize = |x: DataMatrix| if input.standardize { x.standardized() } else { x };
    let suffix = if input.standardize { " (standardized)" } else { "" };
    if let Some(path) = &input.input {
        let x = dataset::load_matrix_csv(path, input.header)?;
        return Ok(Loaded {
            source: Source::Data(standardize(x)),
            descriptor: format!("{}{suffix}", path.display()),
            labels: None,
        });
    }
    if let Some(spec) = &input.blobs {
        let spec = parse_blobs(spec)?;
        let blobs = spec.generate()?;
        return Ok(Loaded {
            source: Source::Data(standardize(blobs.data)),
            descriptor: format!(
                "blobs(n_per={},k={},dim={},sep={},spread={},seed={}){suffix}",
                spec.n_per_cluster, spec.k, spec.dim, spec.separation, spec.spread, spec.seed
            ),
            labels: Some(blobs.labels),
        });
    }
    if let Some(path) = &input.precomputed {
        return Ok(Loaded {
            source: Source::Distance(distance::load_distance_csv(path)?),
            descriptor: path.display().to_string(),
            labels: None,
        });
    }
    if let Some(path) = &input.adjacency {
        let s = dataset::load_matrix_csv(path, input.header)?;
        return Ok(Loaded {
            source: Source::Adjacency(AdjacencyMatrix::new(s.into_inner())?),
            descriptor: path.display().to_string(),
            labels: None,
        });
    }
    Err(Error::param(
        "input",
        "one of --input, --blobs, --precomputed or --adjacency is required",
    ))
}

fn build_distance(source: &Source, choice: DistanceChoice, flags: &DistanceFlags) -> Result<DistanceMatrix> {
    let width = |x: &DataMatrix| flags.kernel_sigma.unwrap_or_else(|| distance::median_heuristic_width(x));
    let butterworth = |s: &AdjacencyMatrix| {
        let omega = match flags.omega {
            Some(o) => o,
            None => distance::default_omega(s)?,
        };
        distance::butterworth_distance_matrix(s, omega)
    };
    match (source, choice) {
        (Source::Distance(d), _) => Ok(d.clone()),
        (Source::Data(x), DistanceChoice::Euclidean) => Ok(distance::squared_euclidean_matrix(x)),
        (Source::Data(x), DistanceChoice::Knn) => distance::knn_distance_matrix(x, flags.knn_k),
        (Source::Data(x), DistanceChoice::Kernel) => distance::kernel_distance_matrix(x, width(x)),
        (Source::Data(x), DistanceChoice::Butterworth) => butterworth(&distance::rbf_affinity(x, width(x))?),
        (Source::Adjacency(s), DistanceChoice::Butterworth) => butterworth(s),
        (Source::Adjacency(_), other) => Err(Error::param(
            "distance",
            format!("--adjacency input only supports butterworth, not {other:?}"),
        )),
    }
}

fn resolve_labels(path: &Option<PathBuf>, loaded: &Loaded) -> Result<Option<LabelVector>> {
    match path {
        Some(p) => Ok(Some(dataset::load_labels(p)?)),
        None => Ok(loaded.labels.clone()),
    }
}

fn check_labels(labels: &Option<LabelVector>, n: usize) -> Result<()> {
    match labels {
        Some(l) if l.len() != n => Err(Error::DimensionMismatch(format!(
            "{} labels for {n} samples",
            l.len()
        ))),
        _ => Ok(()),
    }
}

fn descriptor(d: &DistanceMatrix) -> DistanceDescriptor {
    DistanceDescriptor {
        kind: d.kind(),
        params: d.params(),
    }
}

fn emit(text: String, output: &Option<PathBuf>) -> Result<CommandOutput> {
    match output {
        Some(path) => {
            write_file(path, &text)?;
            Ok(CommandOutput {
                stdout: String::new(),
                stderr: format!("wrote {}\n", path.display()),
            })
        }
        None => Ok(CommandOutput {
            stdout: text,
            stderr: String::new(),
        }),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<CommandOutput> {
    let spec = BlobSpec {
        n_per_cluster: args.n_per as usize,
        k: args.k as usize,
        dim: args.dim as usize,
        separation: args.sep,
        spread: args.spread,
        seed: args.seed,
    };
    let blobs = spec.generate()?;
    dataset::write_matrix_csv(&blobs.data, &args.output)?;
    dataset::write_labels(&blobs.labels, &args.labels_output)?;
    Ok(CommandOutput {
        stdout: String::new(),
        stderr: format!(
            "wrote {} samples to {} and labels to {}\n",
            blobs.data.n_samples(),
            args.output.display(),
            args.labels_output.display()
        ),
    })
}

pub fn cmd_dist(args: &DistArgs) -> Result<CommandOutput> {
    let loaded = load_input(&args.input)?;
    let d = build_distance(&loaded.source, args.distance, &args.params)?;
    let summary = distance::validate_distance_matrix(&d)?;
    let mut out = match &args.output {
        Some(path) => {
            distance::write_distance_csv(&d, path)?;
            CommandOutput {
                stdout: String::new(),
                stderr: format!("wrote {}\n", path.display()),
            }
        }
        None => CommandOutput {
            stdout: dataset::matrix_to_csv(d.values()),
            stderr: String::new(),
        },
    };
    out.stderr.push_str(&format!("{} [{}]\n", summary, descriptor(&d).compact()));
    Ok(out)
}

struct FitJob<'a> {
    d: &'a DistanceMatrix,
    k: usize,
    cfg: SolverConfig,
    dataset: &'a str,
    labels: Option<&'a LabelVector>,
    trace: bool,
}

fn fkmwc_report(job: &FitJob<'_>) -> ClusterReport {
    let distance_kind = descriptor(job.d);
    let mut report = ClusterReport {
        run_id: ClusterReport::make_run_id("fkmwc", &distance_kind, job.k, Some(job.cfg.lambda), job.cfg.seed),
        method: "fkmwc".into(),
        dataset: job.dataset.to_string(),
        distance_kind,
        k: job.k,
        lambda: Some(job.cfg.lambda),
        seed: job.cfg.seed,
        iterations: 0,
        converged: false,
        objective_final: None,
        objective_trace: None,
        acc: None,
        nmi: None,
        purity_majority: None,
        purity_pairs: None,
        error: None,
        wall_time_ms: 0,
    };
    let start = Instant::now();
    let outcome = solver::fit(job.d, job.k, &job.cfg).and_then(|state| {
        let scores = job
            .labels
            .map(|truth| metrics::score_all(truth, &solver::hard_labels(&state.y)))
            .transpose()?;
        Ok((state, scores))
    });
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    match outcome {
        Ok((state, scores)) => {
            report.iterations = state.iterations;
            report.converged = state.converged;
            report.objective_final = Some(state.objective());
            if job.trace {
                report.objective_trace = Some(state.trace_pairs());
            }
            if let Some(s) = scores {
                report.set_scores(s);
            }
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

fn solver_config(flags: &SolverFlags, lambda: f64, seed: u64) -> Result<SolverConfig> {
    let cfg = SolverConfig {
        lambda,
        tol: flags.tol,
        max_iter: flags.max_iter,
        seed,
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_fit(args: &FitArgs) -> Result<CommandOutput> {
    let cfg = solver_config(&args.solver, args.lambda, args.solver.seed)?;
    let loaded = load_input(&args.input)?;
    let labels = resolve_labels(&args.labels, &loaded)?;
    let d = build_distance(&loaded.source, args.distance, &args.params)?;
    check_labels(&labels, d.n())?;
    let report = fkmwc_report(&FitJob {
        d: &d,
        k: args.solver.k as usize,
        cfg,
        dataset: &loaded.descriptor,
        labels: labels.as_ref(),
        trace: args.solver.trace,
    });
    if let Some(msg) = &report.error {
        // a single fit has nothing to fall back on
        return Err(Error::Report(format!("fit failed: {msg}")));
    }
    emit(report::render_one(&report, args.out.format)?, &args.out.output)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<CommandOutput> {
    if args.lambdas.is_empty() {
        return Err(Error::param("lambdas", "grid must not be empty"));
    }
    let configs = args
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let seed = match args.seed_policy {
                SeedPolicy::Same => args.solver.seed,
                SeedPolicy::Increment => args.solver.seed.wrapping_add(i as u64),
            };
            solver_config(&args.solver, lambda, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let loaded = load_input(&args.input)?;
    let labels = resolve_labels(&args.labels, &loaded)?;
    let d = build_distance(&loaded.source, args.distance, &args.params)?;
    check_labels(&labels, d.n())?;

    let reports: Vec<ClusterReport> = configs
        .into_par_iter()
        .map(|cfg| {
            fkmwc_report(&FitJob {
                d: &d,
                k: args.solver.k as usize,
                cfg,
                dataset: &loaded.descriptor,
                labels: labels.as_ref(),
                trace: args.solver.trace,
            })
        })
        .collect();
    let failed = reports.iter().filter(|r| r.error.is_some()).count();
    let mut out = emit(report::render_many(&reports, args.out.format)?, &args.out.output)?;
    if failed > 0 {
        out.stderr.push_str(&format!("{failed} of {} sweep points failed\n", reports.len()));
    }
    Ok(out)
}

fn baseline_report(
    method: Baseline,
    x: &DataMatrix,
    k: usize,
    seed: u64,
    fuzzifier: f64,
    dataset: &str,
    truth: &LabelVector,
) -> Result<ClusterReport> {
    let start = Instant::now();
    let (name, iterations, converged, objective, labels) = match method {
        Baseline::Kmeans => {
            let fit = baselines::kmeans_fit(x, k, seed, 300)?;
            ("kmeans", fit.iterations, fit.converged, fit.objective, fit.labels)
        }
        Baseline::Fcm => {
            let cfg = FcmConfig {
                fuzzifier,
                seed,
                ..Default::default()
            };
            let fit = baselines::fcm_fit(x, k, &cfg)?;
            let y = fit.membership.values();
            let mut objective = 0.0;
            for i in 0..x.n_samples() {
                for l in 0..k {
                    let d: f64 = x
                        .row(i)
                        .iter()
                        .zip(fit.centroids.row(l))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    objective += y[[i, l]].powf(fuzzifier) * d;
                }
            }
            let labels = solver::hard_labels(&fit.membership);
            ("fcm", fit.iterations, fit.converged, objective, labels)
        }
    };
    let wall_time_ms = start.elapsed().as_millis() as u64;
    let distance_kind = DistanceDescriptor {
        kind: DistanceKind::EuclideanSq,
        params: DistanceParams::default(),
    };
    let mut report = ClusterReport {
        run_id: ClusterReport::make_run_id(name, &distance_kind, k, None, seed),
        method: name.into(),
        dataset: dataset.to_string(),
        distance_kind,
        k,
        lambda: None,
        seed,
        iterations,
        converged,
        objective_final: Some(objective),
        objective_trace: None,
        acc: None,
        nmi: None,
        purity_majority: None,
        purity_pairs: None,
        error: None,
        wall_time_ms,
    };
    report.set_scores(metrics::score_all(truth, &labels)?);
    Ok(report)
}

pub fn cmd_compare(args: &CompareArgs) -> Result<CommandOutput> {
    let k = args.solver.k as usize;
    let cfg = solver_config(&args.solver, args.lambda, args.solver.seed)?;
    let loaded = load_input(&args.input)?;
    let truth = resolve_labels(&args.labels, &loaded)?
        .ok_or_else(|| Error::param("labels", "compare needs ground-truth labels"))?;
    if !args.baselines.is_empty() && !matches!(loaded.source, Source::Data(_)) {
        return Err(Error::param("baselines", "baselines need a sample matrix input"));
    }
    let matrices = args
        .distance
        .iter()
        .map(|&c| build_distance(&loaded.source, c, &args.params))
        .collect::<Result<Vec<_>>>()?;
    for d in &matrices {
        check_labels(&Some(truth.clone()), d.n())?;
    }

    let mut reports: Vec<ClusterReport> = matrices
        .par_iter()
        .map(|d| {
            fkmwc_report(&FitJob {
                d,
                k,
                cfg,
                dataset: &loaded.descriptor,
                labels: Some(&truth),
                trace: args.solver.trace,
            })
        })
        .collect();
    if let Source::Data(x) = &loaded.source {
        check_labels(&Some(truth.clone()), x.n_samples())?;
        let rows = args
            .baselines
            .par_iter()
            .map(|&b| baseline_report(b, x, k, args.solver.seed, args.fuzzifier, &loaded.descriptor, &truth))
            .collect::<Result<Vec<_>>>()?;
        reports.extend(rows);
    }
    emit(report::render_many(&reports, args.out.format)?, &args.out.output)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("fkmwc").chain(args.iter().copied()))
    }

    #[test]
    fn blob_descriptor_parsing() {
        let spec = parse_blobs("50,3,2,20,1,7").unwrap();
        assert_eq!(spec.n_per_cluster, 50);
        assert_eq!(spec.seed, 7);
        assert!(parse_blobs("50,3,2").is_err());
        assert!(parse_blobs("a,3,2,20,1,7").is_err());
    }

    #[test]
    fn usage_errors_are_caught_by_the_parser() {
        assert!(parse(&["synth", "--n-per", "5", "--k", "0", "--output", "a", "--labels-output", "b"]).is_err());
        assert!(parse(&["sweep", "--blobs", "5,2,2,20,1,0", "--k", "2"]).is_err());
        assert!(parse(&["fit", "--blobs", "5,2,2,20,1,0", "--input", "x.csv", "--k", "2"]).is_err());
        assert!(parse(&["fit", "--blobs", "5,2,2,20,1,0", "--k", "2"]).is_ok());
    }

    #[test]
    fn knn_k_zero_is_rejected() {
        let cli = parse(&["dist", "--blobs", "5,2,2,20,1,0", "--distance", "knn", "--knn-k", "0"]).unwrap();
        let err = run(&cli).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "k_neighbors", .. }));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn missing_source_is_a_usage_error() {
        let cli = parse(&["fit", "--k", "2"]).unwrap();
        assert_eq!(run(&cli).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn sweep_reports_follow_grid_order() {
        let cli = parse(&["sweep", "--blobs", "10,2,2,20,1,3", "--k", "2", "--lambdas", "20,1,10,5"]).unwrap();
        let out = run(&cli).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        let lambdas: Vec<f64> = v.as_array().unwrap().iter().map(|r| r["lambda"].as_f64().unwrap()).collect();
        assert_eq!(lambdas, vec![20.0, 1.0, 10.0, 5.0]);
    }

    #[test]
    fn seed_policy_increment() {
        let cli = parse(&[
            "sweep", "--blobs", "10,2,2,20,1,3", "--k", "2", "--lambdas", "1,2,3", "--seed", "4", "--seed-policy",
            "increment",
        ])
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&run(&cli).unwrap().stdout).unwrap();
        let seeds: Vec<u64> = v.as_array().unwrap().iter().map(|r| r["seed"].as_u64().unwrap()).collect();
        assert_eq!(seeds, vec![4, 5, 6]);
    }

    #[test]
    fn adjacency_input_only_for_butterworth() {
        let src = Source::Adjacency(AdjacencyMatrix::new(ndarray::array![[0.0, 1.0], [1.0, 0.0]]).unwrap());
        let flags = DistanceFlags {
            knn_k: 1,
            omega: None,
            kernel_sigma: None,
        };
        assert!(build_distance(&src, DistanceChoice::Knn, &flags).is_err());
        let d = build_distance(&src, DistanceChoice::Butterworth, &flags).unwrap();
        assert!((d.values()[[0, 1]] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
