use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use dkwarp::metrics::{self, GridSpec, LowerBound};
use dkwarp::search::{knn_dk_batch, knn_dk_sub_batch, knn_dtw_batch};
use dkwarp::{
    dk_full, dtw_banded, dtw_early_abandon, envelope, gdk, generate, lb_box, lb_keogh, lb_sigma_min, sparse_dk,
    znormalize, BandRadius, Dataset, Exec, GenKind, GenOverrides, GenParams, SearchReport, ThresholdedDistance,
    TimeSeries,
};

#[derive(Parser)]
#[command(name = "dkwarp", version, about = "Elastic distances and k-NN search for multi-dimensional time series")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic dataset.
    Generate(GenerateArgs),
    /// Distance between the first series of two dataset files.
    Dist(DistArgs),
    /// k nearest neighbors of every series in a query file.
    Knn(KnnArgs),
    /// Run an experiment grid and emit CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ram,
    Cbf,
    Iid,
}

impl From<Kind> for GenKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Ram => GenKind::Ram,
            Kind::Cbf => GenKind::Cbf,
            Kind::Iid => GenKind::Iid,
        }
    }
}

#[derive(Args)]
struct GenFlags {
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    distortion: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
}

impl GenFlags {
    fn overrides(&self) -> GenOverrides {
        GenOverrides {
            classes: self.classes,
            reps: self.reps,
            noise_sigma: self.noise,
            distortion: self.distortion,
            radius: self.radius,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    len: usize,
    #[command(flatten)]
    gen: GenFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistMetric {
    Dtw,
    Dk,
    Gdk,
    Lbbox,
    Lbkeogh,
    Lbsigmamin,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, value_enum)]
    metric: DistMetric,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Band radius in indices.
    #[arg(long)]
    band: Option<usize>,
    /// Threshold: dk and gdk stop above it; dtw with --abandon.
    #[arg(long)]
    eps: Option<f64>,
    /// Early-abandoning DTW; needs --eps.
    #[arg(long)]
    abandon: bool,
    /// z-normalize each dimension first.
    #[arg(long)]
    znorm: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KnnMetric {
    Dtw,
    Dk,
}

#[derive(Args)]
struct KnnArgs {
    #[arg(long, value_enum)]
    metric: KnnMetric,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    band: Option<usize>,
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Match the query anywhere inside each data series (dk only).
    #[arg(long)]
    subsequence: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchKind {
    Tightness,
    Pruning,
    Speedup,
    Accuracy,
    Lemmas,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LemmaStat {
    /// E[sum of minima] / E[minimum of sums]
    Ratio,
    /// E[sum of minima] alone
    Min,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    bench: BenchKind,
    /// Generator (default: iid for tightness, ram for speedup, cbf otherwise).
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
    lens: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pairs: usize,
    #[arg(long, default_value_t = 0.125)]
    rratio: f64,
    /// Tightness: report E[LB]/E[DTW] instead of the mean ratio.
    #[arg(long)]
    ratio_of_means: bool,
    /// Tightness: use LB_Keogh (1-dimensional only).
    #[arg(long)]
    keogh: bool,
    /// Speedup: timed repetitions per cell.
    #[arg(long, default_value_t = 3)]
    timing_reps: usize,
    /// Lemmas: window sizes.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    r: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, value_enum, default_value = "ratio")]
    stat: LemmaStat,
    #[command(flatten)]
    gen: GenFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure and whether the caller, rather than the data or environment,
/// is to blame.
struct Failure {
    usage: bool,
    err: anyhow::Error,
}

impl From<dkwarp::Error> for Failure {
    fn from(e: dkwarp::Error) -> Self {
        Failure { usage: e.is_usage(), err: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure { usage: false, err }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { usage: true, err: anyhow::anyhow!(msg.into()) }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(if f.usage { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("starting worker pool")?;
    }
    match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a, cli.seed),
        Cmd::Dist(a) => cmd_dist(a),
        Cmd::Knn(a) => cmd_knn(a),
        Cmd::Bench(a) => cmd_bench(a, cli.seed),
    }
}

fn cmd_generate(a: GenerateArgs, seed: u64) -> Outcome {
    let p = a.gen.overrides().apply(GenParams::defaults(a.kind.into(), a.dim, a.len, seed));
    let ds = generate(&p)?;
    ds.save(&a.out)?;
    println!(
        "wrote {} series ({} generator, dim {}, length {}) to {}",
        ds.len(),
        p.kind.name(),
        p.dim,
        p.length,
        a.out.display()
    );
    Ok(())
}

fn first_series(path: &Path, znorm: bool) -> Outcome<TimeSeries> {
    let s = Dataset::load(path)?.into_series().swap_remove(0);
    Ok(if znorm { znormalize(&s) } else { s })
}

fn cmd_dist(a: DistArgs) -> Outcome {
    use DistMetric::*;
    let banded = matches!(a.metric, Dtw | Lbbox | Lbkeogh | Lbsigmamin);
    match (banded, a.band) {
        (true, None) => return Err(usage("this metric needs --band")),
        (false, Some(_)) => return Err(usage("--band applies only to dtw and the lower bounds")),
        _ => {}
    }
    if a.abandon && a.metric != Dtw {
        return Err(usage("--abandon applies only to dtw"));
    }
    match (a.metric, a.eps, a.abandon) {
        (Dtw, Some(_), false) => return Err(usage("--eps with dtw needs --abandon")),
        (Dtw, None, true) => return Err(usage("--abandon needs --eps")),
        (Lbbox | Lbkeogh | Lbsigmamin, Some(_), _) => return Err(usage("--eps does not apply to lower bounds")),
        _ => {}
    }
    if let Some(e) = a.eps {
        if e.is_nan() || e < 0.0 {
            return Err(usage(format!("--eps must be nonnegative, got {e}")));
        }
    }
    let s = first_series(&a.a, a.znorm)?;
    let t = first_series(&a.b, a.znorm)?;
    let r = BandRadius(a.band.unwrap_or(0));
    let eps = a.eps.unwrap_or(f64::INFINITY);
    let out = match a.metric {
        Dtw if a.abandon => thresholded(dtw_early_abandon(&s, &t, r, eps)?, eps),
        Dtw => dtw_banded(&s, &t, r)?.to_string(),
        Dk if a.eps.is_some() => thresholded(sparse_dk(&s, &t, eps)?, eps),
        Dk => dk_full(&s, &t)?.to_string(),
        Gdk => {
            let g = gdk(&s, &t, eps)?;
            if g > eps {
                format!("exceeds {eps}")
            } else {
                g.to_string()
            }
        }
        Lbbox => lb_box(&s, &envelope(&t, r))?.to_string(),
        Lbkeogh => lb_keogh(&s, &envelope(&t, r))?.to_string(),
        Lbsigmamin => lb_sigma_min(&s, &t, r)?.to_string(),
    };
    println!("{out}");
    Ok(())
}

fn thresholded(d: ThresholdedDistance, eps: f64) -> String {
    match d {
        ThresholdedDistance::Exact(v) => v.to_string(),
        ThresholdedDistance::Exceeds(_) => format!("exceeds {eps}"),
    }
}

fn cmd_knn(a: KnnArgs) -> Outcome {
    if a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    match (a.metric, a.band, a.subsequence) {
        (KnnMetric::Dtw, _, true) => return Err(usage("--subsequence is only available with dk")),
        (KnnMetric::Dtw, None, _) => return Err(usage("dtw needs --band")),
        (KnnMetric::Dk, Some(_), _) => return Err(usage("--band applies only to dtw")),
        _ => {}
    }
    let queries = Dataset::load(&a.query)?;
    let data = Dataset::load(&a.data)?;
    let exec = Exec::Parallel;
    let reports: Vec<SearchReport> = match a.metric {
        KnnMetric::Dtw => knn_dtw_batch(queries.series(), &data, a.k, BandRadius(a.band.unwrap_or(0)), exec)?,
        KnnMetric::Dk if a.subsequence => knn_dk_sub_batch(queries.series(), &data, a.k, exec)?,
        KnnMetric::Dk => knn_dk_batch(queries.series(), &data, a.k, exec)?,
    };
    let mut out = std::io::stdout().lock();
    let mut total = 0.0;
    for rep in &reports {
        for (rank, n) in rep.neighbors.iter().enumerate() {
            let label = data.series()[n.index].label().unwrap_or("");
            write!(out, "{},{},{},{}", rank + 1, n.index, label, n.distance).context("writing results")?;
            if let Some((start, end)) = n.span {
                write!(out, ",{start},{end}").context("writing results")?;
            }
            writeln!(out).context("writing results")?;
        }
        let c = rep.counters;
        writeln!(
            out,
            "# candidates={} lb_computed={} lb_pruned={} full_dp={} abandoned={} gdk_calls={} dp_cells={}",
            c.candidates, c.lb_computed, c.lb_pruned, c.full_dp, c.abandoned, c.gdk_calls, c.dp_cells
        )
        .context("writing results")?;
        total += rep.wall_time;
    }
    eprintln!("{} queries in {:.3} s", reports.len(), total);
    Ok(())
}

fn cmd_bench(a: BenchArgs, seed: u64) -> Outcome {
    let kind = a.kind.unwrap_or(match a.bench {
        BenchKind::Tightness => Kind::Iid,
        BenchKind::Speedup => Kind::Ram,
        _ => Kind::Cbf,
    });
    let spec = GridSpec {
        kind: kind.into(),
        overrides: a.gen.overrides(),
        dims: a.dims.clone(),
        lens: a.lens.clone(),
        r_ratio: a.rratio,
        seed,
    };
    let exec = Exec::Parallel;
    let rows = match a.bench {
        BenchKind::Tightness => {
            if a.keogh && a.dims.iter().any(|&k| k != 1) {
                return Err(usage("--keogh needs --dims 1"));
            }
            let bound = if a.keogh { LowerBound::Keogh } else { LowerBound::Box };
            let g = metrics::tightness_grid_with(&spec, a.pairs, bound, exec)?;
            if a.ratio_of_means { g.ratio_of_means } else { g.mean_of_ratios }.csv_rows()
        }
        BenchKind::Pruning => metrics::pruning_grid(&spec, exec)?.csv_rows(),
        BenchKind::Speedup => metrics::speedup_grid(&spec, a.timing_reps)?.csv_rows(),
        BenchKind::Accuracy => {
            let (dtw, dk) = metrics::accuracy_grid(&spec, exec)?;
            dtw.csv_rows() + &dk.csv_rows()
        }
        BenchKind::Lemmas => lemma_rows(&a, seed)?,
    };
    let csv = format!("{}\n{rows}", metrics::CSV_HEADER);
    match &a.out {
        Some(p) => fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    eprintln!("{} rows", rows.lines().count());
    Ok(())
}

fn lemma_rows(a: &BenchArgs, seed: u64) -> Outcome<String> {
    let mut cells = Vec::new();
    for &k in &a.dims {
        for &r in &a.r {
            let e = metrics::lemma_mins_ratio(r, k, a.samples, seed)?;
            let (value, stderr) = match a.stat {
                LemmaStat::Ratio => (e.ratio(), e.ratio_se()),
                LemmaStat::Min => (e.sum_of_mins, e.sum_of_mins_se),
            };
            cells.push(metrics::GridCell { k, n: 0, r, samples: e.samples, value, stderr });
        }
    }
    let kind = match a.stat {
        LemmaStat::Ratio => "lemma_ratio",
        LemmaStat::Min => "lemma_min",
    };
    Ok(metrics::csv_rows(kind, &cells))
}
