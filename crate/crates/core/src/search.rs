//! k-NN, ε-NN and subsequence query drivers with pruning counters.
//!
//! Every driver returns exactly the neighbors a brute-force scan would:
//! sorted by distance, ties broken by ascending dataset index. A single
//! query is scanned sequentially so that every candidate sees the tightest
//! threshold known so far; the `*_batch` variants spread independent
//! queries over the worker pool.

use std::time::Instant;

use crate::dataset::Dataset;
use crate::dk::{gdk, gdk_sub, sparse_sub, sparse_whole, SubMatch, ThresholdedDistance};
use crate::dtw::dtw_early_abandon;
use crate::error::{Error, Result};
use crate::lb::{envelope, lb_box_capped, Envelope};
use crate::par::Exec;
use crate::series::{check_dims, BandRadius, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
    /// Matched window `start..=end` in the candidate, for subsequence queries.
    pub span: Option<(usize, usize)>,
}

impl Neighbor {
    fn precedes(&self, distance: f64, index: usize) -> bool {
        (self.distance, self.index) < (distance, index)
    }
}

/// Work done by one query. `lb_pruned + abandoned + full_dp` equals the
/// number of candidates scanned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub candidates: usize,
    pub lb_computed: usize,
    pub lb_pruned: usize,
    pub full_dp: usize,
    pub abandoned: usize,
    pub gdk_calls: usize,
    /// DK cells whose point distance was evaluated by the sparse program.
    pub dp_cells: usize,
}

impl Counters {
    pub fn is_conserved(&self) -> bool {
        self.lb_pruned + self.abandoned + self.full_dp == self.candidates
    }

    pub fn merge(&mut self, other: &Counters) {
        self.candidates += other.candidates;
        self.lb_computed += other.lb_computed;
        self.lb_pruned += other.lb_pruned;
        self.full_dp += other.full_dp;
        self.abandoned += other.abandoned;
        self.gdk_calls += other.gdk_calls;
        self.dp_cells += other.dp_cells;
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub neighbors: Vec<Neighbor>,
    pub counters: Counters,
    /// Seconds.
    pub wall_time: f64,
}

impl SearchReport {
    /// Equality ignoring `wall_time`.
    pub fn same_outcome(&self, other: &SearchReport) -> bool {
        self.neighbors == other.neighbors && self.counters == other.counters
    }

    pub fn indices(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.index).collect()
    }
}

/// The `k` best neighbors so far, kept sorted.
#[derive(Debug)]
pub(crate) struct TopK {
    k: usize,
    items: Vec<Neighbor>,
}

impl TopK {
    pub(crate) fn new(k: usize) -> Self {
        TopK { k, items: Vec::with_capacity(k + 1) }
    }

    /// Whether a candidate at `(distance, index)` would enter the set.
    pub(crate) fn admits(&self, distance: f64, index: usize) -> bool {
        self.items.len() < self.k || {
            let kth = &self.items[self.k - 1];
            (distance, index) < (kth.distance, kth.index)
        }
    }

    /// Distance of the current k-th neighbor, or infinity while not full.
    pub(crate) fn threshold(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[self.k - 1].distance
        }
    }

    pub(crate) fn offer(&mut self, n: Neighbor) {
        if !self.admits(n.distance, n.index) {
            return;
        }
        let pos = self.items.partition_point(|x| x.precedes(n.distance, n.index));
        self.items.insert(pos, n);
        self.items.truncate(self.k);
    }

    pub(crate) fn into_vec(self) -> Vec<Neighbor> {
        self.items
    }
}

/// Scan order over a candidate list: a rotation starting at `start`,
/// optionally skipping one index (leave-one-out).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ScanPlan {
    pub start: usize,
    pub skip: Option<usize>,
}

impl ScanPlan {
    fn order(self, n: usize) -> impl Iterator<Item = usize> {
        (0..n).map(move |o| (o + self.start) % n).filter(move |&i| Some(i) != self.skip)
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    Ok(())
}

fn check_dtw_inputs(query: &TimeSeries, series: &[TimeSeries]) -> Result<()> {
    for s in series {
        check_dims(query, s)?;
        if s.len() != query.len() {
            return Err(Error::LengthMismatch { left: query.len(), right: s.len() });
        }
    }
    Ok(())
}

fn check_dk_inputs(query: &TimeSeries, series: &[TimeSeries]) -> Result<()> {
    series.iter().try_for_each(|s| check_dims(query, s))
}

/// LB_Box-pruned, early-abandoning k-NN under banded DTW.
///
/// For each candidate the query is compared against the candidate's
/// envelope; if the bound cannot beat the current k-th neighbor the DTW is
/// skipped, otherwise DTW runs with the k-th distance as abandon threshold.
pub fn knn_dtw(query: &TimeSeries, data: &Dataset, k: usize, r: BandRadius) -> Result<SearchReport> {
    check_k(k)?;
    check_dtw_inputs(query, data.series())?;
    let clock = Instant::now();
    let envs: Vec<Envelope> = data.series().iter().map(|s| envelope(s, r)).collect();
    let (neighbors, counters) = scan_dtw(query, data.series(), &envs, k, r, ScanPlan::default());
    Ok(SearchReport { neighbors, counters, wall_time: clock.elapsed().as_secs_f64() })
}

/// [`knn_dtw`] for many queries. Envelopes are built once and shared.
pub fn knn_dtw_batch(
    queries: &[TimeSeries],
    data: &Dataset,
    k: usize,
    r: BandRadius,
    exec: Exec,
) -> Result<Vec<SearchReport>> {
    check_k(k)?;
    for q in queries {
        check_dtw_inputs(q, data.series())?;
    }
    let envs = exec.map_slice(data.series(), |s| envelope(s, r));
    Ok(exec.map_slice(queries, |q| {
        let clock = Instant::now();
        let (neighbors, counters) = scan_dtw(q, data.series(), &envs, k, r, ScanPlan::default());
        SearchReport { neighbors, counters, wall_time: clock.elapsed().as_secs_f64() }
    }))
}

/// Inputs are validated by the caller.
pub(crate) fn scan_dtw(
    query: &TimeSeries,
    series: &[TimeSeries],
    envs: &[Envelope],
    k: usize,
    r: BandRadius,
    plan: ScanPlan,
) -> (Vec<Neighbor>, Counters) {
    let mut best = TopK::new(k);
    let mut c = Counters::default();
    for i in plan.order(series.len()) {
        c.candidates += 1;
        let cap = best.threshold();
        c.lb_computed += 1;
        let lb = lb_box_capped(query, &envs[i], cap);
        if lb > cap || !best.admits(lb, i) {
            c.lb_pruned += 1;
            continue;
        }
        match dtw_early_abandon(query, &series[i], r, cap).expect("validated inputs") {
            ThresholdedDistance::Exact(d) => {
                c.full_dp += 1;
                best.offer(Neighbor { index: i, distance: d, span: None });
            }
            ThresholdedDistance::Exceeds(_) => c.abandoned += 1,
        }
    }
    (best.into_vec(), c)
}

/// Two-phase k-NN under the dog-keeper distance.
///
/// Phase one runs the greedy bound against every candidate and keeps the k
/// smallest upper bounds; the k-th of them caps phase two, a scan with the
/// sparse program whose threshold tightens as exact neighbors are found.
pub fn knn_dk(query: &TimeSeries, data: &Dataset, k: usize) -> Result<SearchReport> {
    check_k(k)?;
    check_dk_inputs(query, data.series())?;
    let clock = Instant::now();
    let (neighbors, counters) = scan_dk(query, data.series(), k, ScanPlan::default());
    Ok(SearchReport { neighbors, counters, wall_time: clock.elapsed().as_secs_f64() })
}

pub fn knn_dk_batch(queries: &[TimeSeries], data: &Dataset, k: usize, exec: Exec) -> Result<Vec<SearchReport>> {
    check_k(k)?;
    for q in queries {
        check_dk_inputs(q, data.series())?;
    }
    Ok(exec.map_slice(queries, |q| {
        let clock = Instant::now();
        let (neighbors, counters) = scan_dk(q, data.series(), k, ScanPlan::default());
        SearchReport { neighbors, counters, wall_time: clock.elapsed().as_secs_f64() }
    }))
}

/// The k smallest values seen, unordered by index. Used for phase-one
/// upper bounds, where only the k-th value matters.
struct SmallestK {
    k: usize,
    values: Vec<f64>,
}

impl SmallestK {
    fn new(k: usize) -> Self {
        SmallestK { k, values: Vec::with_capacity(k + 1) }
    }

    fn threshold(&self) -> f64 {
        if self.values.len() < self.k {
            f64::INFINITY
        } else {
            self.values[self.k - 1]
        }
    }

    fn offer(&mut self, v: f64) {
        if v >= self.threshold() && self.values.len() >= self.k {
            return;
        }
        let pos = self.values.partition_point(|&x| x <= v);
        self.values.insert(pos, v);
        self.values.truncate(self.k);
    }
}

pub(crate) fn scan_dk(
    query: &TimeSeries,
    series: &[TimeSeries],
    k: usize,
    plan: ScanPlan,
) -> (Vec<Neighbor>, Counters) {
    let mut c = Counters::default();
    let mut bounds = SmallestK::new(k);
    for i in plan.order(series.len()) {
        c.gdk_calls += 1;
        bounds.offer(gdk(query, &series[i], bounds.threshold()).expect("validated inputs"));
    }
    let cap = bounds.threshold();

    let mut best = TopK::new(k);
    for i in plan.order(series.len()) {
        c.candidates += 1;
        let eps = cap.min(best.threshold());
        let (res, cells) = sparse_whole(query, &series[i], eps);
        c.dp_cells += cells;
        match res {
            ThresholdedDistance::Exact(d) => {
                c.full_dp += 1;
                best.offer(Neighbor { index: i, distance: d, span: None });
            }
            ThresholdedDistance::Exceeds(_) => c.abandoned += 1,
        }
    }
    (best.into_vec(), c)
}

/// k-NN where each candidate is scored by its best-matching window against
/// the query (subsequence dog-keeper distance).
pub fn knn_dk_sub(query: &TimeSeries, data: &Dataset, k: usize) -> Result<SearchReport> {
    check_k(k)?;
    check_dk_inputs(query, data.series())?;
    let clock = Instant::now();
    let (neighbors, counters) = scan_dk_sub(query, data.series(), k);
    Ok(SearchReport { neighbors, counters, wall_time: clock.elapsed().as_secs_f64() })
}

pub fn knn_dk_sub_batch(queries: &[TimeSeries], data: &Dataset, k: usize, exec: Exec) -> Result<Vec<SearchReport>> {
    check_k(k)?;
    for q in queries {
        check_dk_inputs(q, data.series())?;
    }
    Ok(exec.map_slice(queries, |q| {
        let clock = Instant::now();
        let (neighbors, counters) = scan_dk_sub(q, data.series(), k);
        SearchReport { neighbors, counters, wall_time: clock.elapsed().as_secs_f64() }
    }))
}

fn scan_dk_sub(query: &TimeSeries, series: &[TimeSeries], k: usize) -> (Vec<Neighbor>, Counters) {
    let mut c = Counters::default();
    let mut bounds = SmallestK::new(k);
    for s in series {
        c.gdk_calls += 1;
        bounds.offer(gdk_sub(query, s, bounds.threshold()).expect("validated inputs").distance);
    }
    let cap = bounds.threshold();

    let mut best = TopK::new(k);
    for (i, s) in series.iter().enumerate() {
        c.candidates += 1;
        let (hit, cells) = sparse_sub(query, s, cap.min(best.threshold()));
        c.dp_cells += cells;
        match hit {
            Some(m) => {
                c.full_dp += 1;
                best.offer(Neighbor { index: i, distance: m.distance, span: Some((m.start, m.end)) });
            }
            None => c.abandoned += 1,
        }
    }
    (best.into_vec(), c)
}

/// All candidates within dog-keeper distance `eps` of the query, with their
/// exact distances.
pub fn epsnn_dk(query: &TimeSeries, data: &Dataset, eps: f64) -> Result<SearchReport> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::invalid(format!("eps must be nonnegative, got {eps}")));
    }
    check_dk_inputs(query, data.series())?;
    let clock = Instant::now();
    let mut c = Counters::default();
    let mut neighbors = Vec::new();
    for (i, s) in data.series().iter().enumerate() {
        c.candidates += 1;
        let (res, cells) = sparse_whole(query, s, eps);
        c.dp_cells += cells;
        match res {
            ThresholdedDistance::Exact(d) => {
                c.full_dp += 1;
                neighbors.push(Neighbor { index: i, distance: d, span: None });
            }
            ThresholdedDistance::Exceeds(_) => c.abandoned += 1,
        }
    }
    neighbors.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
    Ok(SearchReport { neighbors, counters: c, wall_time: clock.elapsed().as_secs_f64() })
}

/// Best window of `haystack` matching `query` within `eps`, seeded with the
/// greedy subsequence bound. `None` if no window is within `eps`.
pub fn sub_search_dk(query: &TimeSeries, haystack: &TimeSeries, eps: f64) -> Result<Option<SubMatch>> {
    check_dims(query, haystack)?;
    let seed = gdk_sub(query, haystack, eps)?.distance;
    Ok(sparse_sub(query, haystack, eps.min(seed)).0)
}
