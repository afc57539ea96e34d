//! Reference implementations written straight from the recursive
//! definitions, plus random inputs. Slow on purpose.
#![allow(dead_code)]

use std::collections::HashMap;

use dkwarp::{Dataset, TimeSeries};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn d(a: &[f64], b: &[f64]) -> f64 {
    sq(a, b).sqrt()
}

/// DTW over suffixes `s[i..]`, `t[j..]`, restricted to `|i - j| <= r`.
pub fn dtw_oracle(s: &TimeSeries, t: &TimeSeries, r: usize) -> f64 {
    fn go(
        s: &TimeSeries,
        t: &TimeSeries,
        r: usize,
        i: usize,
        j: usize,
        memo: &mut HashMap<(usize, usize), f64>,
    ) -> f64 {
        if i >= s.len() || j >= t.len() || i.abs_diff(j) > r {
            return f64::INFINITY;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let cost = sq(s.point(i), t.point(j));
        let v = if i + 1 == s.len() && j + 1 == t.len() {
            cost
        } else {
            let a = go(s, t, r, i + 1, j + 1, memo);
            let b = go(s, t, r, i, j + 1, memo);
            let c = go(s, t, r, i + 1, j, memo);
            cost + a.min(b).min(c)
        };
        memo.insert((i, j), v);
        v
    }
    go(s, t, r, 0, 0, &mut HashMap::new())
}

/// DK over suffixes, straight from the recursive definition.
pub fn dk_oracle(s: &TimeSeries, t: &TimeSeries) -> f64 {
    fn go(s: &TimeSeries, t: &TimeSeries, i: usize, j: usize, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if i >= s.len() || j >= t.len() {
            return f64::INFINITY;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let here = d(s.point(i), t.point(j));
        let v = if i + 1 == s.len() && j + 1 == t.len() {
            here
        } else {
            let rest = go(s, t, i + 1, j + 1, memo).min(go(s, t, i, j + 1, memo)).min(go(s, t, i + 1, j, memo));
            here.max(rest)
        };
        memo.insert((i, j), v);
        v
    }
    go(s, t, 0, 0, &mut HashMap::new())
}

/// Smallest DK between `s` and any contiguous window of `t`.
pub fn sub_oracle(s: &TimeSeries, t: &TimeSeries) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..t.len() {
        for b in a + 1..=t.len() {
            best = best.min(dk_oracle(s, &t.subsequence(a..b).unwrap()));
        }
    }
    best
}

/// The `k` smallest `(distance, index)` pairs.
pub fn brute_knn(
    q: &TimeSeries,
    data: &[TimeSeries],
    k: usize,
    f: impl Fn(&TimeSeries, &TimeSeries) -> f64,
) -> Vec<(usize, f64)> {
    let mut all: Vec<(f64, usize)> = data.iter().enumerate().map(|(i, s)| (f(q, s), i)).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.into_iter().take(k).map(|(dist, i)| (i, dist)).collect()
}

/// Gaussian values; with `coarse`, rounded to a small integer grid so
/// that equal distances are common.
pub fn series(rng: &mut ChaCha8Rng, len: usize, dim: usize, coarse: bool) -> TimeSeries {
    let v = (0..len * dim)
        .map(|_| {
            let x: f64 = StandardNormal.sample(rng);
            if coarse {
                (x * 1.5).round()
            } else {
                x
            }
        })
        .collect();
    TimeSeries::from_flat(v, dim, None).unwrap()
}

pub fn random_series(rng: &mut ChaCha8Rng, max_len: usize, dim: usize) -> TimeSeries {
    let len = rng.random_range(1..=max_len);
    let coarse = rng.random_bool(0.3);
    series(rng, len, dim, coarse)
}

pub fn labeled_dataset(rng: &mut ChaCha8Rng, size: usize, len: usize, dim: usize, coarse: bool) -> Dataset {
    let classes = rng.random_range(1..=5);
    let s = (0..size)
        .map(|_| {
            let label = rng.random_range(0..classes).to_string();
            series(rng, len, dim, coarse).with_label(label)
        })
        .collect();
    Dataset::from_series(s).unwrap()
}
