//! Experiment estimators: LB_Box tightness, pruning power, 1-NN accuracy,
//! DK-over-DTW speedup, and Monte Carlo checks of how windowed minima
//! behave as the dimensionality and the window grow.
//!
//! Grid experiments sweep dimensionality `k` and length `n`; each cell owns
//! a PRNG derived from `(seed, k, n)`, so results do not depend on the
//! order or thread in which cells run.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::dtw::dtw_banded;
use crate::error::{Error, Result};
use crate::lb::{envelope, lb_box, lb_keogh, Envelope};
use crate::par::Exec;
use crate::search::{scan_dk, scan_dtw, ScanPlan};
use crate::series::{BandRadius, TimeSeries};
use crate::synth::{generate, shape_tuple_count, GenKind, GenOverrides, GenParams};

pub const CSV_HEADER: &str = "kind,k,n,r,samples,value,stderr";

/// `lb_box / dtw_banded`, with `0 / 0 = 1`.
pub fn tightness(s: &TimeSeries, t: &TimeSeries, r: BandRadius) -> Result<f64> {
    tightness_with(s, t, r, LowerBound::Box)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LowerBound {
    #[default]
    Box,
    /// Only defined for 1-dimensional series.
    Keogh,
}

fn bound_and_dtw(s: &TimeSeries, t: &TimeSeries, r: BandRadius, bound: LowerBound) -> Result<(f64, f64)> {
    let env = envelope(t, r);
    let lb = match bound {
        LowerBound::Box => lb_box(s, &env)?,
        LowerBound::Keogh => lb_keogh(s, &env)?,
    };
    let dtw = dtw_banded(s, t, r)?;
    if !dtw.is_finite() {
        return Err(Error::invalid("band admits no warping path"));
    }
    Ok((lb, dtw))
}

pub fn tightness_with(s: &TimeSeries, t: &TimeSeries, r: BandRadius, bound: LowerBound) -> Result<f64> {
    let (lb, dtw) = bound_and_dtw(s, t, r, bound)?;
    Ok(ratio(lb, dtw))
}

fn ratio(lb: f64, dtw: f64) -> f64 {
    if dtw == 0.0 {
        1.0
    } else {
        lb / dtw
    }
}

/// One `(k, n)` cell of a grid experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub k: usize,
    pub n: usize,
    pub r: usize,
    pub samples: usize,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub kind: String,
    pub dims: Vec<usize>,
    pub lens: Vec<usize>,
    /// Row-major over `dims` then `lens`.
    pub cells: Vec<GridCell>,
}

impl GridResult {
    pub fn cell(&self, k: usize, n: usize) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.k == k && c.n == n)
    }

    pub fn values(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.value).collect()
    }

    /// CSV rows without the header.
    pub fn csv_rows(&self) -> String {
        csv_rows(&self.kind, &self.cells)
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}", self.csv_rows())
    }
}

pub fn csv_rows(kind: &str, cells: &[GridCell]) -> String {
    let mut out = String::new();
    for c in cells {
        let _ = writeln!(out, "{kind},{},{},{},{},{},{}", c.k, c.n, c.r, c.samples, c.value, c.stderr);
    }
    out
}

/// Both aggregate forms of a tightness sweep: the mean of per-pair ratios,
/// and the ratio of mean bound to mean DTW.
#[derive(Debug, Clone, PartialEq)]
pub struct TightnessGrid {
    pub mean_of_ratios: GridResult,
    pub ratio_of_means: GridResult,
}

/// Grid sweep parameters shared by all experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub kind: GenKind,
    /// Applied over each cell's generator defaults.
    pub overrides: GenOverrides,
    pub dims: Vec<usize>,
    pub lens: Vec<usize>,
    /// Band radius as a fraction of the length: `r = round(r_ratio * n)`.
    pub r_ratio: f64,
    pub seed: u64,
}

impl GridSpec {
    fn axes(&self) -> Vec<(usize, usize)> {
        self.dims.iter().flat_map(|&k| self.lens.iter().map(move |&n| (k, n))).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.lens.is_empty() {
            return Err(Error::invalid("grid needs at least one dimension and one length"));
        }
        if self.dims.contains(&0) || self.lens.iter().any(|&n| n < 2) {
            return Err(Error::invalid("grid dimensions must be >= 1 and lengths >= 2"));
        }
        if !(self.r_ratio.is_finite() && self.r_ratio >= 0.0) {
            return Err(Error::invalid(format!("band ratio must be nonnegative, got {}", self.r_ratio)));
        }
        Ok(())
    }

    fn radius(&self, n: usize) -> BandRadius {
        BandRadius::from_ratio(self.r_ratio, n)
    }

    /// Generator parameters for cell `(k, n)`, adjusted to stay valid at
    /// that size.
    pub fn params(&self, k: usize, n: usize) -> GenParams {
        let mut p = self.overrides.apply(GenParams::defaults(self.kind, k, n, cell_seed(self.seed, k, n)));
        p.distortion = p.distortion.min(n - 1);
        if p.kind == GenKind::Cbf {
            p.classes = p.classes.min(shape_tuple_count(k));
        }
        p
    }

    fn dataset(&self, k: usize, n: usize) -> Result<Dataset> {
        generate(&self.params(k, n))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Per-cell seed, independent of evaluation order.
pub fn cell_seed(seed: u64, k: usize, n: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ k as u64) ^ n as u64)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Pairs of series for one tightness cell: fresh i.i.d. series for the
/// `Iid` generator, otherwise random distinct members of a generated set.
fn cell_pairs(spec: &GridSpec, k: usize, n: usize, pairs: usize) -> Result<Vec<(TimeSeries, TimeSeries)>> {
    let seed = cell_seed(spec.seed, k, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if spec.kind == GenKind::Iid {
        let mut fresh = || {
            let v = (0..n * k).map(|_| StandardNormal.sample(&mut rng)).collect();
            TimeSeries::from_flat(v, k, None)
        };
        return (0..pairs).map(|_| Ok((fresh()?, fresh()?))).collect();
    }
    let ds = spec.dataset(k, n)?;
    if ds.len() < 2 {
        return Err(Error::invalid("need at least two series to form pairs"));
    }
    use rand::Rng;
    Ok((0..pairs)
        .map(|_| {
            let i = rng.random_range(0..ds.len());
            let j = (i + rng.random_range(1..ds.len())) % ds.len();
            (ds.series()[i].clone(), ds.series()[j].clone())
        })
        .collect())
}

/// Mean tightness per `(k, n)` cell over `pairs` random pairs.
pub fn tightness_grid(spec: &GridSpec, pairs: usize, exec: Exec) -> Result<TightnessGrid> {
    tightness_grid_with(spec, pairs, LowerBound::Box, exec)
}

pub fn tightness_grid_with(spec: &GridSpec, pairs: usize, bound: LowerBound, exec: Exec) -> Result<TightnessGrid> {
    spec.validate()?;
    if pairs == 0 {
        return Err(Error::invalid("pairs per cell must be at least 1"));
    }
    let axes = spec.axes();
    let cells = exec.map_slice(&axes, |&(k, n)| -> Result<(GridCell, GridCell)> {
        let r = spec.radius(n);
        let samples = cell_pairs(spec, k, n, pairs)?
            .iter()
            .map(|(s, t)| bound_and_dtw(s, t, r, bound))
            .collect::<Result<Vec<_>>>()?;
        let ratios: Vec<f64> = samples.iter().map(|&(lb, d)| ratio(lb, d)).collect();
        let (mean, se) = mean_stderr(&ratios);
        let (rom, rom_se) = ratio_of_means(&samples);
        let cell = |value, stderr| GridCell { k, n, r: r.get(), samples: pairs, value, stderr };
        Ok((cell(mean, se), cell(rom, rom_se)))
    });
    let (mor, rom): (Vec<_>, Vec<_>) = cells.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let grid =
        |kind: &str, cells| GridResult { kind: kind.into(), dims: spec.dims.clone(), lens: spec.lens.clone(), cells };
    Ok(TightnessGrid { mean_of_ratios: grid("tightness", mor), ratio_of_means: grid("tightness_rom", rom) })
}

/// `sum(x) / sum(y)` with a delta-method standard error.
fn ratio_of_means(xy: &[(f64, f64)]) -> (f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    if my == 0.0 {
        return (1.0, 0.0);
    }
    let r = mx / my;
    if xy.len() < 2 {
        return (r, 0.0);
    }
    let resid = xy.iter().map(|&(x, y)| (x - r * y).powi(2)).sum::<f64>() / (n - 1.0);
    (r, (resid / n).sqrt() / my)
}

/// How each query's 1-NN scan is ordered in a pruning-power measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PruningScan {
    /// Every query scans all of `data` in index order.
    #[default]
    Natural,
    /// `queries` and `data` coincide; query `i` scans from index `i`, so it
    /// meets itself first.
    SelfFirst,
    /// `queries` and `data` coincide; query `i` scans everything but `i`.
    LeaveOneOut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruningStats {
    /// Mean over queries of (pruned candidates / scanned candidates).
    pub mean: f64,
    pub stderr: f64,
    pub queries: usize,
}

/// Fraction of DTW computations LB_Box lets a 1-NN scan skip, averaged over
/// the queries.
pub fn pruning_power(queries: &Dataset, data: &Dataset, r: BandRadius, exec: Exec) -> Result<f64> {
    Ok(pruning_power_with(queries.series(), data.series(), r, PruningScan::Natural, exec)?.mean)
}

pub fn pruning_power_with(
    queries: &[TimeSeries],
    data: &[TimeSeries],
    r: BandRadius,
    scan: PruningScan,
    exec: Exec,
) -> Result<PruningStats> {
    if queries.is_empty() || data.is_empty() {
        return Err(Error::invalid("pruning power needs queries and data"));
    }
    if scan != PruningScan::Natural && queries.len() != data.len() {
        return Err(Error::invalid("self-referencing scans need queries == data"));
    }
    if scan == PruningScan::LeaveOneOut && data.len() < 2 {
        return Err(Error::invalid("leave-one-out needs at least two series"));
    }
    for q in queries {
        for s in data {
            if q.dim() != s.dim() {
                return Err(Error::DimensionMismatch { left: q.dim(), right: s.dim() });
            }
            if q.len() != s.len() {
                return Err(Error::LengthMismatch { left: q.len(), right: s.len() });
            }
        }
    }
    let envs: Vec<Envelope> = exec.map_slice(data, |s| envelope(s, r));
    let fractions = exec.map_range(queries.len(), |qi| {
        let plan = match scan {
            PruningScan::Natural => ScanPlan::default(),
            PruningScan::SelfFirst => ScanPlan { start: qi, skip: None },
            PruningScan::LeaveOneOut => ScanPlan { start: 0, skip: Some(qi) },
        };
        let (_, c) = scan_dtw(&queries[qi], data, &envs, 1, r, plan);
        c.lb_pruned as f64 / c.candidates as f64
    });
    let (mean, stderr) = mean_stderr(&fractions);
    Ok(PruningStats { mean, stderr, queries: queries.len() })
}

/// Leave-one-out pruning power per `(k, n)` cell of generated data.
pub fn pruning_grid(spec: &GridSpec, exec: Exec) -> Result<GridResult> {
    spec.validate()?;
    let axes = spec.axes();
    let cells = exec
        .map_slice(&axes, |&(k, n)| -> Result<GridCell> {
            let ds = spec.dataset(k, n)?;
            let r = spec.radius(n);
            // cells already run in parallel
            let st = pruning_power_with(ds.series(), ds.series(), r, PruningScan::LeaveOneOut, Exec::Sequential)?;
            Ok(GridCell { k, n, r: r.get(), samples: st.queries, value: st.mean, stderr: st.stderr })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult { kind: "pruning".into(), dims: spec.dims.clone(), lens: spec.lens.clone(), cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Dtw(BandRadius),
    Dk,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Dtw(_) => "dtw",
            Metric::Dk => "dk",
        }
    }
}

/// Leave-one-out 1-NN classification accuracy; ties go to the lowest index.
pub fn loo_accuracy(data: &Dataset, metric: Metric, exec: Exec) -> Result<f64> {
    if !data.is_labeled() {
        return Err(Error::invalid("accuracy needs a labeled dataset"));
    }
    if data.len() < 2 {
        return Err(Error::invalid("accuracy needs at least two series"));
    }
    let series = data.series();
    let envs: Vec<Envelope> = match metric {
        Metric::Dtw(r) => {
            let n = series[0].len();
            if let Some(s) = series.iter().find(|s| s.len() != n) {
                return Err(Error::LengthMismatch { left: n, right: s.len() });
            }
            exec.map_slice(series, |s| envelope(s, r))
        }
        Metric::Dk => Vec::new(),
    };
    let hits = exec.map_range(series.len(), |i| {
        let plan = ScanPlan { start: 0, skip: Some(i) };
        let (nn, _) = match metric {
            Metric::Dtw(r) => scan_dtw(&series[i], series, &envs, 1, r, plan),
            Metric::Dk => scan_dk(&series[i], series, 1, plan),
        };
        series[nn[0].index].label() == series[i].label()
    });
    Ok(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
}

/// Leave-one-out accuracy under both metrics for each `(k, n)` cell.
pub fn accuracy_grid(spec: &GridSpec, exec: Exec) -> Result<(GridResult, GridResult)> {
    spec.validate()?;
    let axes = spec.axes();
    let cells = exec
        .map_slice(&axes, |&(k, n)| -> Result<(GridCell, GridCell)> {
            let ds = spec.dataset(k, n)?;
            let r = spec.radius(n);
            let cell =
                |value| GridCell { k, n, r: r.get(), samples: ds.len(), value, stderr: binomial_se(value, ds.len()) };
            Ok((
                cell(loo_accuracy(&ds, Metric::Dtw(r), Exec::Sequential)?),
                cell(loo_accuracy(&ds, Metric::Dk, Exec::Sequential)?),
            ))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (dtw, dk): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
    let grid =
        |kind: &str, cells| GridResult { kind: kind.into(), dims: spec.dims.clone(), lens: spec.lens.clone(), cells };
    Ok((grid("accuracy_dtw", dtw), grid("accuracy_dk", dk)))
}

fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Speedup {
    /// Median seconds for the LB_Box-pruned DTW 1-NN scans.
    pub dtw_secs: f64,
    /// Median seconds for the two-phase DK 1-NN scans.
    pub dk_secs: f64,
    /// `dtw_secs / dk_secs`; above 1 means DK is faster.
    pub ratio: f64,
    /// Per-repetition `dtw / dk` ratios.
    pub rep_ratios: Vec<f64>,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn time_secs(f: impl Fn()) -> f64 {
    let t = Instant::now();
    f();
    t.elapsed().as_secs_f64()
}

/// Wall-clock speedup of DK 1-NN search over LB_Box-pruned DTW 1-NN search
/// for every query. One untimed warm-up pass, then the median of `reps`
/// (at least 3) timed passes of each. Runs on the calling thread.
pub fn speedup(queries: &Dataset, data: &Dataset, r: BandRadius, reps: usize) -> Result<Speedup> {
    let qs = queries.series();
    let ds = data.series();
    if let Some(q) = qs.iter().find(|q| q.len() != ds[0].len() || q.dim() != ds[0].dim()) {
        return Err(Error::LengthMismatch { left: q.len(), right: ds[0].len() });
    }
    measure_speedup(
        reps,
        || {
            let envs: Vec<Envelope> = ds.iter().map(|s| envelope(s, r)).collect();
            for q in qs {
                std::hint::black_box(scan_dtw(q, ds, &envs, 1, r, ScanPlan::default()));
            }
        },
        || {
            for q in qs {
                std::hint::black_box(scan_dk(q, ds, 1, ScanPlan::default()));
            }
        },
    )
}

/// [`speedup`] where each series of `data` queries all the others.
pub fn speedup_loo(data: &Dataset, r: BandRadius, reps: usize) -> Result<Speedup> {
    let ds = data.series();
    if ds.len() < 2 {
        return Err(Error::invalid("leave-one-out needs at least two series"));
    }
    if let Some(s) = ds.iter().find(|s| s.len() != ds[0].len()) {
        return Err(Error::LengthMismatch { left: ds[0].len(), right: s.len() });
    }
    measure_speedup(
        reps,
        || {
            let envs: Vec<Envelope> = ds.iter().map(|s| envelope(s, r)).collect();
            for i in 0..ds.len() {
                std::hint::black_box(scan_dtw(&ds[i], ds, &envs, 1, r, ScanPlan { start: 0, skip: Some(i) }));
            }
        },
        || {
            for i in 0..ds.len() {
                std::hint::black_box(scan_dk(&ds[i], ds, 1, ScanPlan { start: 0, skip: Some(i) }));
            }
        },
    )
}

fn measure_speedup(reps: usize, dtw: impl Fn(), dk: impl Fn()) -> Result<Speedup> {
    let reps = reps.max(3);
    dtw();
    dk();
    let mut dtw_t = Vec::with_capacity(reps);
    let mut dk_t = Vec::with_capacity(reps);
    for _ in 0..reps {
        dtw_t.push(time_secs(&dtw));
        dk_t.push(time_secs(&dk));
    }
    let dtw_secs = median(&dtw_t);
    let dk_secs = median(&dk_t).max(1e-9);
    Ok(Speedup {
        dtw_secs,
        dk_secs,
        ratio: dtw_secs / dk_secs,
        rep_ratios: dtw_t.iter().zip(&dk_t).map(|(a, b)| a / b.max(1e-9)).collect(),
    })
}

/// Leave-one-out speedup per `(k, n)` cell. Cells run one after another so
/// that timings do not compete for cores.
pub fn speedup_grid(spec: &GridSpec, reps: usize) -> Result<GridResult> {
    spec.validate()?;
    let mut cells = Vec::new();
    for (k, n) in spec.axes() {
        let ds = spec.dataset(k, n)?;
        let r = spec.radius(n);
        let sp = speedup_loo(&ds, r, reps)?;
        let (_, se) = mean_stderr(&sp.rep_ratios);
        cells.push(GridCell { k, n, r: r.get(), samples: sp.rep_ratios.len(), value: sp.ratio, stderr: se });
    }
    Ok(GridResult { kind: "speedup".into(), dims: spec.dims.clone(), lens: spec.lens.clone(), cells })
}

/// Monte Carlo estimates over i.i.d. squared standard normals `D[l][j]`
/// (`l < window`, `j < dims`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinsEstimate {
    /// `E[sum_j min_l D[l][j]]`
    pub sum_of_mins: f64,
    pub sum_of_mins_se: f64,
    /// `E[min_l sum_j D[l][j]]`
    pub min_of_sums: f64,
    pub min_of_sums_se: f64,
    pub samples: usize,
}

impl MinsEstimate {
    pub fn ratio(&self) -> f64 {
        self.sum_of_mins / self.min_of_sums
    }

    /// Delta-method standard error of [`MinsEstimate::ratio`], ignoring the
    /// correlation between numerator and denominator.
    pub fn ratio_se(&self) -> f64 {
        let r = self.ratio();
        r * ((self.sum_of_mins_se / self.sum_of_mins).powi(2) + (self.min_of_sums_se / self.min_of_sums).powi(2)).sqrt()
    }
}

pub fn lemma_mins_ratio(window: usize, dims: usize, samples: usize, seed: u64) -> Result<MinsEstimate> {
    if window == 0 || dims == 0 || samples == 0 {
        return Err(Error::invalid("window, dims and samples must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(seed, dims, window));
    let mut som = Vec::with_capacity(samples);
    let mut mos = Vec::with_capacity(samples);
    let mut d = vec![0.0; window * dims];
    for _ in 0..samples {
        for x in d.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x = z * z;
        }
        let sum_of_mins: f64 =
            (0..dims).map(|j| (0..window).map(|l| d[l * dims + j]).fold(f64::INFINITY, f64::min)).sum();
        let min_of_sums = d.chunks_exact(dims).map(|row| row.iter().sum::<f64>()).fold(f64::INFINITY, f64::min);
        som.push(sum_of_mins);
        mos.push(min_of_sums);
    }
    let (a, a_se) = mean_stderr(&som);
    let (b, b_se) = mean_stderr(&mos);
    Ok(MinsEstimate { sum_of_mins: a, sum_of_mins_se: a_se, min_of_sums: b, min_of_sums_se: b_se, samples })
}

/// Spearman rank correlation; tied values share their average rank.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &p in &idx[i..=j] {
            out[p] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::gen_iid_gaussian;

    fn multi(points: &[&[f64]]) -> TimeSeries {
        TimeSeries::new(points.iter().map(|p| p.to_vec()).collect(), None).unwrap()
    }

    fn iid_spec(dims: Vec<usize>, lens: Vec<usize>) -> GridSpec {
        GridSpec { kind: GenKind::Iid, overrides: GenOverrides::default(), dims, lens, r_ratio: 0.125, seed: 5 }
    }

    #[test]
    fn tightness_examples() {
        let s = multi(&[&[1.0, 2.0], &[3.0, 0.0]]);
        assert_eq!(tightness(&s, &s, BandRadius(1)).unwrap(), 1.0);
        let t = multi(&[&[0.0, 1.0], &[0.0, 0.0], &[1.0, 0.0]]);
        let q = multi(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(tightness(&q, &t, BandRadius(2)).unwrap(), 0.0);
        let ds = gen_iid_gaussian(3, 20, 30, 1).unwrap();
        for w in ds.series().windows(2) {
            let v = tightness(&w[0], &w[1], BandRadius(3)).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn keogh_grid_matches_box_grid_in_one_dimension() {
        let spec = iid_spec(vec![1], vec![16, 32]);
        let a = tightness_grid_with(&spec, 50, LowerBound::Box, Exec::Sequential).unwrap();
        let b = tightness_grid_with(&spec, 50, LowerBound::Keogh, Exec::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_is_deterministic_across_exec_modes() {
        let spec = iid_spec(vec![1, 2], vec![16, 24]);
        let a = tightness_grid(&spec, 20, Exec::Sequential).unwrap();
        let b = tightness_grid(&spec, 20, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean_of_ratios.cells.len(), 4);
        assert!(a.mean_of_ratios.cells.iter().all(|c| (0.0..=1.0).contains(&c.value) && c.samples == 20));
    }

    #[test]
    fn stderr_shrinks_with_samples() {
        let spec = iid_spec(vec![2], vec![32]);
        let small = tightness_grid(&spec, 50, Exec::Parallel).unwrap().mean_of_ratios.cells[0].stderr;
        let large = tightness_grid(&spec, 800, Exec::Parallel).unwrap().mean_of_ratios.cells[0].stderr;
        // 16x the samples should cut the error about 4x
        let factor = small / large;
        assert!((2.5..6.0).contains(&factor), "factor {factor}");
    }

    #[test]
    fn csv_layout() {
        let spec = iid_spec(vec![1, 2], vec![16]);
        let csv = tightness_grid(&spec, 5, Exec::Sequential).unwrap().mean_of_ratios.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("tightness,1,16,2,5,"));
    }

    #[test]
    fn self_first_scan_prunes_nearly_everything() {
        let ds = gen_iid_gaussian(2, 32, 40, 3).unwrap();
        let st = pruning_power_with(ds.series(), ds.series(), BandRadius(3), PruningScan::SelfFirst, Exec::Parallel)
            .unwrap();
        assert!(st.mean > 0.9, "{}", st.mean);
        let nat = pruning_power(&ds, &ds, BandRadius(3), Exec::Parallel).unwrap();
        assert!((0.0..=1.0).contains(&nat));
    }

    #[test]
    fn pruning_power_rejects_mismatched_lengths() {
        let a = gen_iid_gaussian(2, 32, 4, 3).unwrap();
        let b = gen_iid_gaussian(2, 30, 4, 3).unwrap();
        assert!(pruning_power(&a, &b, BandRadius(3), Exec::Sequential).unwrap_err().is_usage());
    }

    #[test]
    fn accuracy_trivial_cases() {
        let ds = gen_iid_gaussian(2, 16, 10, 4).unwrap();
        assert!(loo_accuracy(&ds, Metric::Dk, Exec::Sequential).unwrap_err().is_usage());
        let same: Vec<TimeSeries> = ds.into_series().into_iter().map(|s| s.with_label("x")).collect();
        let same = Dataset::from_series(same).unwrap();
        assert_eq!(loo_accuracy(&same, Metric::Dk, Exec::Sequential).unwrap(), 1.0);
        assert_eq!(loo_accuracy(&same, Metric::Dtw(BandRadius(2)), Exec::Sequential).unwrap(), 1.0);
    }

    #[test]
    fn random_labels_give_chance_accuracy() {
        use rand::Rng;
        let ds = gen_iid_gaussian(2, 16, 400, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let labeled: Vec<TimeSeries> =
            ds.into_series().into_iter().map(|s| s.with_label(if rng.random::<bool>() { "a" } else { "b" })).collect();
        let ds = Dataset::from_series(labeled).unwrap();
        for m in [Metric::Dk, Metric::Dtw(BandRadius(2))] {
            let acc = loo_accuracy(&ds, m, Exec::Parallel).unwrap();
            assert!((acc - 0.5).abs() <= 0.1, "{m:?}: {acc}");
        }
    }

    #[test]
    fn noise_free_generated_data_is_separable() {
        for p in [GenParams::cbf(3, 40, 1), GenParams::ram(2, 40, 1)] {
            let p = p.with(|p| {
                p.noise_sigma = 0.0;
                p.distortion = 0;
            });
            let ds = generate(&p).unwrap();
            assert_eq!(loo_accuracy(&ds, Metric::Dk, Exec::Parallel).unwrap(), 1.0);
        }
    }

    #[test]
    fn lemma_singleton_window() {
        let e = lemma_mins_ratio(1, 5, 200, 3).unwrap();
        assert!((e.sum_of_mins - e.min_of_sums).abs() < 1e-9);
    }

    #[test]
    fn speedup_timer_sanity() {
        let ds = gen_iid_gaussian(2, 24, 20, 2).unwrap();
        let a = speedup(&ds, &ds, BandRadius(3), 3).unwrap();
        assert!(a.ratio > 0.0 && a.dtw_secs > 0.0 && a.rep_ratios.len() == 3);
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }
}
