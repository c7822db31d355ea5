//! Command-line front end. Every command is deterministic given its inputs,
//! flags and seed. Exit codes: 0 success, 1 usage or data error, 2 failed
//! verification.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::embedding::evaluate_subspace_learning;
use crate::error::{Error, Result};
use crate::graph::{Provenance, SimilarityGraph};
use crate::matrix_io::{
    canonicalize_labels, labels_path, load_graph, load_labels, load_matrix, save_graph, save_labels, save_matrix,
    Orientation,
};
use crate::metrics::{accuracy, clustering_error, nmi};
use crate::spectral::spectral_cluster;
use crate::synth::{
    sample_union_of_subspaces, synth_trajectories, two_ray_clusters, CorruptionKind, CorruptionSpec, Dependence,
    SubspaceSpec,
};
use crate::verify::{run_verification, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "l2graph", version, about = "L2-graph construction, spectral clustering and subspace learning")]
pub struct Cli {
    /// key=value file with defaults for any long flag; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a similarity graph from a data matrix.
    Graph(GraphCmd),
    /// Spectral clustering of a data matrix or a prebuilt graph.
    Cluster(ClusterCmd),
    /// Graph-regularized embedding followed by 1-NN classification.
    Embed(EmbedCmd),
    /// Generate synthetic data.
    Synth(SynthCmd),
    /// Corrupt a data matrix.
    Corrupt(CorruptCmd),
    /// Randomized checks of the closed-form results.
    Verify(VerifyCmd),
    /// Time graph construction over a grid of sizes.
    Bench(BenchCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builder {
    L2,
    Gaussian,
    Lle,
}

#[derive(Debug, Clone, Args)]
pub struct BuilderArgs {
    #[arg(long, value_enum, default_value = "l2")]
    pub builder: Builder,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
}

impl BuilderArgs {
    pub fn provenance(&self) -> Provenance {
        builder_provenance(self.builder, self.lambda, self.k, self.tau)
    }
}

fn builder_provenance(builder: Builder, lambda: f64, k: usize, tau: f64) -> Provenance {
    match builder {
        Builder::L2 => Provenance::L2 { lambda, k },
        Builder::Gaussian => Provenance::Gaussian { tau, k },
        Builder::Lle => Provenance::Lle { k },
    }
}

#[derive(Debug, Clone, Args)]
pub struct LayoutArgs {
    /// Input files store one sample per row instead of per column.
    #[arg(long)]
    pub samples_as_rows: bool,
}

impl LayoutArgs {
    fn orientation(&self) -> Orientation {
        if self.samples_as_rows {
            Orientation::SamplesAsRows
        } else {
            Orientation::SamplesAsColumns
        }
    }
}

#[derive(Debug, Args)]
pub struct GraphCmd {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub builder: BuilderArgs,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

#[derive(Debug, Args)]
pub struct ClusterCmd {
    /// Data matrix; the graph is built with the builder flags.
    #[arg(long = "in", conflicts_with = "graph", required_unless_present = "graph")]
    pub input: Option<PathBuf>,
    /// Prebuilt graph file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Ground-truth labels (defaults to the input's sibling label file).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Number of clusters.
    #[arg(long)]
    pub l: usize,
    /// Label file to write; metadata goes next to it as `.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics CSV destination (stdout when absent).
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run seeds `seed..seed+repeat` and add mean and median rows.
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[command(flatten)]
    pub builder: BuilderArgs,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

#[derive(Debug, Args)]
pub struct EmbedCmd {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated embedding dimensions.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
    pub d_grid: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub builder: BuilderArgs,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Subspaces,
    Trajectories,
    Rays,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    #[arg(long, value_enum, default_value = "subspaces")]
    pub kind: SynthKind,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub ambient_dim: usize,
    #[arg(long, default_value_t = 5)]
    pub subspaces: usize,
    #[arg(long, default_value_t = 4)]
    pub subspace_dim: usize,
    /// Points per subspace, per motion or per ray.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Basis directions shared by every subspace (0 = independent).
    #[arg(long, default_value_t = 0)]
    pub overlap: usize,
    #[arg(long, default_value_t = 2)]
    pub motions: usize,
    #[arg(long, default_value_t = 30)]
    pub frames: usize,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorruptKind {
    Gaussian,
    Pixel,
}

#[derive(Debug, Args)]
pub struct CorruptCmd {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: CorruptKind,
    #[arg(long)]
    pub ratio: f64,
    #[arg(long, default_value_t = 1.0)]
    pub fraction: f64,
    #[arg(long, default_value_t = 255.0)]
    pub pixel_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub layout: LayoutArgs,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_failure: bool,
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "l2,lle")]
    pub builders: Vec<Builder>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `argv` (program name first), merge the config file and run.
/// Returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Append `--key value` for every config entry whose flag is not already on the
/// command line. `true`/`false` values toggle bare flags.
fn merge_config(mut argv: Vec<String>) -> Result<Vec<String>> {
    let path = argv.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            argv.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_owned)
        }
    });
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(Path::new(&path), e))?;
    let present = |argv: &[String], flag: &str| {
        argv.iter()
            .any(|a| a == flag || a.strip_prefix(flag).is_some_and(|rest| rest.starts_with('=')))
    };
    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("{path}:{}: expected key=value, got {line:?}", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let flag = format!("--{key}");
        if key == "config" || present(&argv, &flag) {
            continue;
        }
        match value.trim() {
            "true" => extra.push(flag),
            "false" => {}
            v => {
                extra.push(flag);
                extra.push(v.to_owned());
            }
        }
    }
    argv.extend(extra);
    Ok(argv)
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Graph(c) => cmd_graph(&c),
        Command::Cluster(c) => cmd_cluster(&c),
        Command::Embed(c) => cmd_embed(&c),
        Command::Synth(c) => cmd_synth(&c),
        Command::Corrupt(c) => cmd_corrupt(&c),
        Command::Verify(c) => cmd_verify(&c),
        Command::Bench(c) => cmd_bench(&c),
    }
}

fn cmd_graph(c: &GraphCmd) -> Result<i32> {
    let data = load_matrix(&c.input, c.layout.orientation())?;
    let start = Instant::now();
    let graph = c.builder.provenance().build(&data)?;
    let seconds = start.elapsed().as_secs_f64();
    save_graph(&graph, &c.out)?;
    println!("seconds={seconds:.6}");
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRun {
    pub seed: u64,
    pub labels: Vec<usize>,
    pub ac: Option<f64>,
    pub nmi: Option<f64>,
    pub error: Option<f64>,
    pub seconds: f64,
}

fn cmd_cluster(c: &ClusterCmd) -> Result<i32> {
    if c.repeat == 0 {
        return Err(Error::InvalidArgument("--repeat must be at least 1".into()));
    }
    // Either the matrix (graph built per run, timed) or a fixed prebuilt graph.
    let (dataset, data, prebuilt, default_truth) = match (&c.input, &c.graph) {
        (Some(path), _) => {
            let data = load_matrix(path, c.layout.orientation())?;
            (stem(path), Some(data), None, None)
        }
        (None, Some(path)) => {
            let graph = load_graph(path)?;
            let lp = labels_path(path);
            (stem(path), None, Some(graph), lp.exists().then_some(lp))
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let truth = match c.truth.as_ref().or(default_truth.as_ref()) {
        Some(path) => Some(canonicalize_labels(&load_labels(path)?)),
        None => data.as_ref().and_then(|d| d.labels().map(<[usize]>::to_vec)),
    };

    let mut runs = Vec::with_capacity(c.repeat);
    let mut provenance = Provenance::External;
    let mut first_meta = None;
    for r in 0..c.repeat {
        let seed = c.seed + r as u64;
        let start = Instant::now();
        let built;
        let graph: &SimilarityGraph = match (&data, &prebuilt) {
            (Some(d), _) => {
                built = c.builder.provenance().build(d)?;
                &built
            }
            (None, Some(g)) => g,
            (None, None) => unreachable!(),
        };
        provenance = graph.provenance();
        let assignment = spectral_cluster(graph, c.l, seed)?;
        let seconds = start.elapsed().as_secs_f64();
        let scores = match &truth {
            Some(t) => {
                if t.len() != assignment.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} truth labels for {} samples",
                        t.len(),
                        assignment.len()
                    )));
                }
                Some((
                    accuracy(&assignment.labels, t)?,
                    nmi(&assignment.labels, t)?,
                    clustering_error(&assignment.labels, t)?,
                ))
            }
            None => None,
        };
        if first_meta.is_none() {
            first_meta = Some(assignment.metadata_json(seed));
        }
        runs.push(ClusterRun {
            seed,
            labels: assignment.labels,
            ac: scores.map(|s| s.0),
            nmi: scores.map(|s| s.1),
            error: scores.map(|s| s.2),
            seconds,
        });
    }

    save_labels(&c.out, &runs[0].labels)?;
    let meta_path = c.out.with_extension("meta.json");
    let meta = first_meta.expect("at least one run");
    fs::write(&meta_path, meta + "\n").map_err(|e| Error::io(&meta_path, e))?;

    if truth.is_some() {
        let csv = cluster_metrics_csv(&dataset, provenance, &runs);
        emit(&csv, c.metrics_out.as_deref())?;
    } else {
        eprintln!("no ground-truth labels; metrics omitted");
    }
    Ok(EXIT_OK)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn params_field(p: Provenance) -> String {
    let text = p.to_string();
    text.split_whitespace().skip(1).collect::<Vec<_>>().join(" ")
}

/// Metrics CSV: one row per run, plus mean and median rows when there are several.
pub fn cluster_metrics_csv(dataset: &str, provenance: Provenance, runs: &[ClusterRun]) -> String {
    let mut out = String::from("dataset,builder,params,seed,ac,nmi,error,seconds\n");
    let prefix = format!("{dataset},{},{}", provenance.name(), params_field(provenance));
    let row = |out: &mut String, seed: &str, ac: f64, nmi: f64, err: f64, secs: f64| {
        let _ = writeln!(out, "{prefix},{seed},{ac:.4},{nmi:.4},{err:.4},{secs:.6}");
    };
    for r in runs {
        row(
            &mut out,
            &r.seed.to_string(),
            r.ac.unwrap_or(f64::NAN),
            r.nmi.unwrap_or(f64::NAN),
            r.error.unwrap_or(f64::NAN),
            r.seconds,
        );
    }
    if runs.len() > 1 {
        let col = |f: fn(&ClusterRun) -> f64| runs.iter().map(f).collect::<Vec<_>>();
        let columns = [
            col(|r| r.ac.unwrap_or(f64::NAN)),
            col(|r| r.nmi.unwrap_or(f64::NAN)),
            col(|r| r.error.unwrap_or(f64::NAN)),
            col(|r| r.seconds),
        ];
        let means: Vec<f64> = columns.iter().map(|c| mean(c)).collect();
        let medians: Vec<f64> = columns.iter().map(|c| median(c)).collect();
        row(&mut out, "mean", means[0], means[1], means[2], means[3]);
        row(&mut out, "median", medians[0], medians[1], medians[2], medians[3]);
    }
    out
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_embed(c: &EmbedCmd) -> Result<i32> {
    let train = load_matrix(&c.train, c.layout.orientation())?;
    let test = load_matrix(&c.test, c.layout.orientation())?;
    let table = evaluate_subspace_learning(&train, &test, c.builder.provenance(), &c.d_grid)?;
    emit(&table.to_csv(), c.out.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_synth(c: &SynthCmd) -> Result<i32> {
    let (data, header) = match c.kind {
        SynthKind::Subspaces => {
            let mut spec = SubspaceSpec::independent(c.ambient_dim, c.subspaces, c.subspace_dim, c.points);
            spec.noise_sigma = c.noise;
            if c.overlap > 0 {
                spec.dependence = Dependence::SharedBasis { overlap: c.overlap };
            }
            let data = sample_union_of_subspaces(&spec, c.seed)?;
            (data, format!("{spec} seed={}", c.seed))
        }
        SynthKind::Trajectories => {
            let data = synth_trajectories(c.motions, c.frames, c.points, c.noise, c.seed)?;
            let header = format!(
                "trajectories motions={} frames={} points={} noise={} seed={}",
                c.motions, c.frames, c.points, c.noise, c.seed
            );
            (data, header)
        }
        SynthKind::Rays => {
            let data = two_ray_clusters(c.points, c.seed)?;
            (data, format!("rays points={} seed={}", c.points, c.seed))
        }
    };
    save_matrix(&data, &c.out, c.layout.orientation(), &[header])?;
    Ok(EXIT_OK)
}

fn cmd_corrupt(c: &CorruptCmd) -> Result<i32> {
    if c.ratio == 0.0 {
        fs::copy(&c.input, &c.out).map_err(|e| Error::io(&c.out, e))?;
        let (src, dst) = (labels_path(&c.input), labels_path(&c.out));
        if src.exists() {
            fs::copy(&src, &dst).map_err(|e| Error::io(&dst, e))?;
        }
        return Ok(EXIT_OK);
    }
    let data = load_matrix(&c.input, c.layout.orientation())?;
    let spec = CorruptionSpec {
        kind: match c.kind {
            CorruptKind::Gaussian => CorruptionKind::Gaussian,
            CorruptKind::Pixel => CorruptionKind::RandomPixel,
        },
        ratio: c.ratio,
        fraction_of_samples: c.fraction,
        pixel_max: c.pixel_max,
        seed: c.seed,
    };
    let corrupted = spec.apply(&data)?;
    let header = format!(
        "corruption kind={} ratio={} fraction={} pixel_max={} seed={}",
        match c.kind {
            CorruptKind::Gaussian => "gaussian",
            CorruptKind::Pixel => "pixel",
        },
        c.ratio,
        c.fraction,
        c.pixel_max,
        c.seed
    );
    save_matrix(&corrupted, &c.out, c.layout.orientation(), &[header])?;
    Ok(EXIT_OK)
}

fn cmd_verify(c: &VerifyCmd) -> Result<i32> {
    let report = run_verification(VerifyOptions {
        seed: c.seed,
        instances: c.instances,
        inject_failure: c.inject_failure,
    })?;
    for check in &report.checks {
        println!("{check}");
    }
    let mut failed = false;
    for check in report.checks.iter().filter(|c| !c.ok()) {
        failed = true;
        eprintln!(
            "FAILED {}: {}",
            check.name,
            check.witness.as_deref().unwrap_or("no witness recorded")
        );
    }
    Ok(if failed { EXIT_VERIFY_FAILED } else { EXIT_OK })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub sizes: Vec<usize>,
    pub builders: Vec<Builder>,
    pub repeats: usize,
    pub seed: u64,
    pub lambda: f64,
    /// Neighborhood size for the l2 and Gaussian builders; LLE uses `n / 10`.
    pub k: usize,
    pub tau: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            sizes: vec![100, 200, 400],
            builders: vec![Builder::L2, Builder::Lle],
            repeats: 10,
            seed: 0,
            lambda: 0.1,
            k: 5,
            tau: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub builder: Builder,
    pub n: usize,
    pub mean_seconds: f64,
}

/// Mean wall-clock construction time per (builder, n) on `n` points drawn from
/// five 4-dimensional subspaces of ℝ⁵⁰. One warmup run per cell is discarded.
pub fn run_bench(opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    if opts.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for &builder in &opts.builders {
        for &n in &opts.sizes {
            if n < 5 || n % 5 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "benchmark sizes must be positive multiples of 5, got {n}"
                )));
            }
            let spec = SubspaceSpec::independent(50, 5, 4, n / 5);
            let data = sample_union_of_subspaces(&spec, opts.seed)?;
            let k = match builder {
                Builder::Lle => (n / 10).max(1),
                _ => opts.k,
            };
            let provenance = builder_provenance(builder, opts.lambda, k, opts.tau);
            provenance.build(&data)?;
            let mut total = 0.0;
            for _ in 0..opts.repeats {
                let start = Instant::now();
                let graph = provenance.build(&data)?;
                total += start.elapsed().as_secs_f64();
                std::hint::black_box(graph);
            }
            rows.push(BenchRow {
                builder,
                n,
                mean_seconds: total / opts.repeats as f64,
            });
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("builder,n,mean_seconds\n");
    for r in rows {
        let name = builder_provenance(r.builder, 0.0, 0, 0.0).name();
        let _ = writeln!(out, "{name},{},{:.6}", r.n, r.mean_seconds);
    }
    out
}

fn cmd_bench(c: &BenchCmd) -> Result<i32> {
    let rows = run_bench(&BenchOptions {
        sizes: c.sizes.clone(),
        builders: c.builders.clone(),
        repeats: c.repeats,
        seed: c.seed,
        lambda: c.lambda,
        k: c.k,
        tau: c.tau,
    })?;
    emit(&bench_csv(&rows), c.out.as_deref())?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn config_fills_missing_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# defaults\nlambda=0.5\nk = 7\nsamples_as_rows=true\n").unwrap();
        let merged = merge_config(args(&["l2graph", "graph", "--k", "3", "--config", cfg.to_str().unwrap()])).unwrap();
        assert!(merged.ends_with(&args(&["--lambda", "0.5", "--samples-as-rows"])));
        assert_eq!(merged.iter().filter(|a| *a == "--k").count(), 1);
    }

    #[test]
    fn median_of_even_count_averages() {
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
        assert_eq!(median(&[5.0]), 5.0);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["l2graph", "verify", "--bogus"]), EXIT_ERROR);
    }

    #[test]
    fn metrics_csv_adds_summary_rows() {
        let run = |seed, ac| ClusterRun {
            seed,
            labels: vec![],
            ac: Some(ac),
            nmi: Some(ac),
            error: Some(1.0 - ac),
            seconds: 0.0,
        };
        let csv = cluster_metrics_csv("d", Provenance::L2 { lambda: 0.1, k: 3 }, &[run(0, 1.0), run(1, 0.5)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("d,l2,lambda=0.1 k=3,0,1.0000"));
        assert!(lines[3].contains(",mean,0.7500,"));
        assert!(lines[4].contains(",median,0.7500,"));
    }
}
