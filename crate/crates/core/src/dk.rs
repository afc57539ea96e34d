//! The dog-keeper distance (discrete Fréchet distance) and its fast
//! evaluation strategies.
//!
//! Unlike DTW the path cost is the maximum, not the sum, of the point
//! distances along a warping path, and distances are plain Euclidean (not
//! squared). Since only `max` and `min` are involved, every evaluation
//! order yields bit-identical results.
//!
//! - [`dk_full`]: the quadratic dynamic program.
//! - [`gdk`] / [`gdk_sub`]: a linear greedy walk whose value is an upper
//!   bound, cheap enough to seed a search threshold.
//! - [`sparse_dk`] / [`sparse_dk_sub`]: the dynamic program restricted to
//!   cells whose value stays within a threshold.

use crate::error::Result;
use crate::series::{check_dims, dist, TimeSeries};

/// Outcome of a distance computation run against a threshold `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdedDistance {
    /// The exact distance, which is `<= eps`.
    Exact(f64),
    /// The distance is strictly greater than the carried threshold.
    Exceeds(f64),
}

impl ThresholdedDistance {
    pub fn exact(self) -> Option<f64> {
        match self {
            ThresholdedDistance::Exact(d) => Some(d),
            ThresholdedDistance::Exceeds(_) => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, ThresholdedDistance::Exact(_))
    }
}

/// Best alignment of a query against some contiguous window of a longer
/// series. `start..=end` are indices into the longer series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubMatch {
    pub distance: f64,
    pub start: usize,
    pub end: usize,
}

/// Full quadratic DK; `O(m)` memory.
pub fn dk_full(s: &TimeSeries, t: &TimeSeries) -> Result<f64> {
    check_dims(s, t)?;
    let m = s.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for j in 0..t.len() {
        let tj = t.point(j);
        for i in 0..m {
            let d = dist(s.point(i), tj);
            cur[i] = if i == 0 && j == 0 {
                d
            } else {
                let below = if i > 0 { cur[i - 1] } else { f64::INFINITY };
                let diag = if i > 0 { prev[i - 1] } else { f64::INFINITY };
                d.max(below.min(prev[i]).min(diag))
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Greedy dog-keeper: follows the locally cheapest step from `(0, 0)` and
/// returns the largest distance met. Once one series is exhausted the
/// remaining forced steps to `(m-1, n-1)` are taken as well, so with
/// `eps = inf` the result is never below [`dk_full`].
///
/// Returns as soon as the running maximum exceeds `eps`; that partial value
/// is then itself `> eps`.
pub fn gdk(s: &TimeSeries, t: &TimeSeries, eps: f64) -> Result<f64> {
    check_dims(s, t)?;
    let (m, n) = (s.len(), t.len());
    let (mut i, mut j) = (0, 0);
    let mut g = dist(s.point(0), t.point(0));
    if g > eps {
        return Ok(g);
    }
    while i + 1 < m && j + 1 < n {
        let (ni, nj, d) = greedy_step(s, t, i, j);
        i = ni;
        j = nj;
        g = g.max(d);
        if g > eps {
            return Ok(g);
        }
    }
    while i + 1 < m {
        i += 1;
        g = g.max(dist(s.point(i), t.point(j)));
        if g > eps {
            return Ok(g);
        }
    }
    while j + 1 < n {
        j += 1;
        g = g.max(dist(s.point(i), t.point(j)));
        if g > eps {
            return Ok(g);
        }
    }
    Ok(g)
}

/// Greedy subsequence variant: starts at the closest point of `t` to
/// `s[0]` and walks until the last point of `s` is aligned.
pub fn gdk_sub(s: &TimeSeries, t: &TimeSeries, eps: f64) -> Result<SubMatch> {
    check_dims(s, t)?;
    let (m, n) = (s.len(), t.len());
    let s0 = s.point(0);
    let (start, mut g) =
        (0..n)
            .map(|j| (j, dist(s0, t.point(j))))
            .fold((0, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best });
    let (mut i, mut j) = (0, start);
    while i + 1 < m && g <= eps {
        let (ni, nj, d) =
            if j + 1 < n { greedy_step(s, t, i, j) } else { (i + 1, j, dist(s.point(i + 1), t.point(j))) };
        i = ni;
        j = nj;
        g = g.max(d);
    }
    Ok(SubMatch { distance: g, start, end: j })
}

/// Cheapest of the three moves from `(i, j)`; both successors must exist.
/// Ties prefer the diagonal, then advancing `i`.
#[inline]
fn greedy_step(s: &TimeSeries, t: &TimeSeries, i: usize, j: usize) -> (usize, usize, f64) {
    let diag = dist(s.point(i + 1), t.point(j + 1));
    let down = dist(s.point(i + 1), t.point(j));
    let right = dist(s.point(i), t.point(j + 1));
    if diag <= down && diag <= right {
        (i + 1, j + 1, diag)
    } else if down <= right {
        (i + 1, j, down)
    } else {
        (i, j + 1, right)
    }
}

/// Sparse dog-keeper distance for whole-series matching.
///
/// Only cells whose point distance and accumulated value are both `<= eps`
/// are kept, and only their neighbours are visited in the next step. With
/// `eps = inf` this visits every cell and equals [`dk_full`].
pub fn sparse_dk(s: &TimeSeries, t: &TimeSeries, eps: f64) -> Result<ThresholdedDistance> {
    check_dims(s, t)?;
    Ok(sparse_whole(s, t, eps).0)
}

/// Sparse dog-keeper distance for subsequence matching: every column of `t`
/// may start a match and every column may end one. Returns the best match
/// with distance `<= eps`; among equal distances the earliest end wins.
pub fn sparse_dk_sub(s: &TimeSeries, t: &TimeSeries, eps: f64) -> Result<Option<SubMatch>> {
    check_dims(s, t)?;
    Ok(sparse_sub(s, t, eps).0)
}

/// `dk_full(a, c) <= dk_full(a, b) + dk_full(b, c) + 1e-9`.
pub fn dk_triangle_check(a: &TimeSeries, b: &TimeSeries, c: &TimeSeries) -> Result<bool> {
    let ac = dk_full(a, c)?;
    let ab = dk_full(a, b)?;
    let bc = dk_full(b, c)?;
    Ok(ac <= ab + bc + 1e-9)
}

/// One column of the sparse table: the surviving rows in ascending order,
/// their accumulated values, and the column where each one's path started.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseColumn {
    indices: Vec<usize>,
    values: Vec<f64>,
    starts: Vec<usize>,
}

impl SparseColumn {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn clear(&mut self) {
        self.indices.clear();
        self.values.clear();
        self.starts.clear();
    }

    fn push(&mut self, i: usize, v: f64, start: usize) {
        debug_assert!(self.indices.last().is_none_or(|&l| l < i));
        self.indices.push(i);
        self.values.push(v);
        self.starts.push(start);
    }

    fn last(&self) -> Option<(usize, f64, usize)> {
        let k = self.indices.len().checked_sub(1)?;
        Some((self.indices[k], self.values[k], self.starts[k]))
    }
}

/// Fills `cur` with column `k` computed from `prev` (column `k-1`). When
/// `seed_row0` is set, cell `(0, k)` also gets a virtual predecessor of
/// value 0 starting at column `k`. Returns the number of cells whose point
/// distance was evaluated.
fn sweep_column(
    s: &TimeSeries,
    tk: &[f64],
    k: usize,
    eps: f64,
    seed_row0: bool,
    prev: &SparseColumn,
    cur: &mut SparseColumn,
) -> usize {
    const INF: f64 = f64::INFINITY;
    let m = s.len();
    let np = prev.indices.len();
    let mut cells = 0;
    let mut p = 0;
    let mut i = match (seed_row0, prev.indices.first()) {
        (true, _) => 0,
        (false, Some(&f)) => f,
        (false, None) => return 0,
    };
    while i < m {
        while p < np && prev.indices[p] + 1 < i {
            p += 1;
        }
        // predecessor candidates: virtual, below (D[i-1]), left (E[i]), diagonal (E[i-1])
        let (mut pred, mut start) = if seed_row0 && i == 0 { (0.0, k) } else { (INF, 0) };
        if let Some((bi, bv, bs)) = cur.last() {
            if bi + 1 == i && bv < pred {
                pred = bv;
                start = bs;
            }
        }
        let mut q = p;
        if q < np && prev.indices[q] + 1 == i {
            if prev.values[q] < pred {
                pred = prev.values[q];
                start = prev.starts[q];
            }
            q += 1;
        }
        let prev_has_i = q < np && prev.indices[q] == i;
        if prev_has_i {
            if prev.values[q] < pred {
                pred = prev.values[q];
                start = prev.starts[q];
            }
            q += 1;
        }

        let mut survived = false;
        if pred <= eps && pred < INF {
            cells += 1;
            let d = dist(s.point(i), tk);
            if d <= eps {
                cur.push(i, d.max(pred), start);
                survived = true;
            }
        }

        if survived || prev_has_i {
            i += 1;
        } else if q < np {
            i = prev.indices[q];
        } else {
            break;
        }
    }
    cells
}

pub(crate) fn sparse_whole(s: &TimeSeries, t: &TimeSeries, eps: f64) -> (ThresholdedDistance, usize) {
    let m = s.len();
    let mut prev = SparseColumn::default();
    let mut cur = SparseColumn::default();
    let mut cells = 0;
    for k in 0..t.len() {
        cur.clear();
        cells += sweep_column(s, t.point(k), k, eps, k == 0, &prev, &mut cur);
        if cur.is_empty() {
            return (ThresholdedDistance::Exceeds(eps), cells);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    match prev.last() {
        Some((i, v, _)) if i == m - 1 => (ThresholdedDistance::Exact(v), cells),
        _ => (ThresholdedDistance::Exceeds(eps), cells),
    }
}

pub(crate) fn sparse_sub(s: &TimeSeries, t: &TimeSeries, eps: f64) -> (Option<SubMatch>, usize) {
    let m = s.len();
    let mut prev = SparseColumn::default();
    let mut cur = SparseColumn::default();
    let mut cells = 0;
    let mut best: Option<SubMatch> = None;
    for k in 0..t.len() {
        cur.clear();
        cells += sweep_column(s, t.point(k), k, eps, true, &prev, &mut cur);
        if let Some((i, v, start)) = cur.last() {
            if i == m - 1 && best.is_none_or(|b| v < b.distance) {
                best = Some(SubMatch { distance: v, start, end: k });
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (best, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uni(v: &[f64]) -> TimeSeries {
        TimeSeries::univariate(v.to_vec()).unwrap()
    }

    /// Maximum cost over every monotone warping path, minimized by
    /// exhaustive enumeration. Exponential; short inputs only.
    fn brute_force_dk(s: &TimeSeries, t: &TimeSeries) -> f64 {
        fn walk(s: &TimeSeries, t: &TimeSeries, i: usize, j: usize, acc: f64) -> f64 {
            let acc = acc.max(dist(s.point(i), t.point(j)));
            if i + 1 == s.len() && j + 1 == t.len() {
                return acc;
            }
            let mut best = f64::INFINITY;
            if i + 1 < s.len() {
                best = best.min(walk(s, t, i + 1, j, acc));
            }
            if j + 1 < t.len() {
                best = best.min(walk(s, t, i, j + 1, acc));
            }
            if i + 1 < s.len() && j + 1 < t.len() {
                best = best.min(walk(s, t, i + 1, j + 1, acc));
            }
            best
        }
        walk(s, t, 0, 0, 0.0)
    }

    fn window_oracle(s: &TimeSeries, t: &TimeSeries) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..t.len() {
            for b in a + 1..=t.len() {
                best = best.min(dk_full(s, &t.subsequence(a..b).unwrap()).unwrap());
            }
        }
        best
    }

    #[test]
    fn dk_examples() {
        let s = uni(&[0.0, 0.0]);
        let t = uni(&[1.0, 1.0]);
        assert_eq!(dk_full(&s, &t).unwrap(), 1.0);
        assert_eq!(dk_full(&t, &t).unwrap(), 0.0);
        let s = uni(&[0.0, 10.0, 0.0]);
        let t = uni(&[0.0, 0.0]);
        assert_eq!(dk_full(&s, &t).unwrap(), 10.0);
        assert_eq!(brute_force_dk(&s, &t), 10.0);
    }

    #[test]
    fn dk_rejects_dimension_mismatch() {
        let a = TimeSeries::from_flat(vec![0.0, 0.0], 2, None).unwrap();
        let b = uni(&[0.0]);
        assert!(dk_full(&a, &b).unwrap_err().is_usage());
        assert!(gdk(&a, &b, 1.0).unwrap_err().is_usage());
        assert!(gdk_sub(&a, &b, 1.0).unwrap_err().is_usage());
        assert!(sparse_dk(&a, &b, 1.0).unwrap_err().is_usage());
        assert!(sparse_dk_sub(&a, &b, 1.0).unwrap_err().is_usage());
    }

    #[test]
    fn gdk_examples() {
        let s = uni(&[1.0, 1.0, 5.0, 2.0]);
        assert_eq!(gdk(&s, &s, f64::INFINITY).unwrap(), 0.0);
        let t = uni(&[4.0, 1.0, 5.0, 2.0]);
        assert_eq!(gdk(&s, &t, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn gdk_completes_the_forced_tail() {
        // The cheap route runs along the diagonal and hits the end of s
        // early; the tail to (m-1, n-1) costs 9.
        let s = uni(&[0.0, 0.0]);
        let t = uni(&[0.0, 0.0, 0.0, 9.0]);
        assert_eq!(gdk(&s, &t, f64::INFINITY).unwrap(), 9.0);
        assert_eq!(dk_full(&s, &t).unwrap(), 9.0);
    }

    #[test]
    fn gdk_sub_examples() {
        let t = uni(&[5.0, 1.0, 2.0, 3.0, 7.0, 0.5]);
        let s = t.subsequence(1..4).unwrap();
        let hit = gdk_sub(&s, &t, f64::INFINITY).unwrap();
        assert_eq!(hit, SubMatch { distance: 0.0, start: 1, end: 3 });

        let one = uni(&[6.5]);
        let hit = gdk_sub(&one, &t, f64::INFINITY).unwrap();
        assert_eq!(hit, SubMatch { distance: 0.5, start: 4, end: 4 });
    }

    #[test]
    fn sparse_no_admissible_start() {
        let s = uni(&[5.0, 0.0]);
        let t = uni(&[0.0, 0.0, 0.0]);
        let (res, cells) = sparse_whole(&s, &t, 4.0);
        assert_eq!(res, ThresholdedDistance::Exceeds(4.0));
        assert_eq!(cells, 1);
    }

    #[test]
    fn sparse_sub_exact_containment() {
        let t = uni(&[5.0, 1.0, 2.0, 3.0, 7.0, 0.5]);
        let s = t.subsequence(2..5).unwrap();
        let hit = sparse_dk_sub(&s, &t, 0.0).unwrap().unwrap();
        assert_eq!(hit, SubMatch { distance: 0.0, start: 2, end: 4 });
        assert_eq!(sparse_dk_sub(&uni(&[100.0]), &t, 1.0).unwrap(), None);
    }

    #[test]
    fn triangle_trivial_cases() {
        let a = uni(&[1.0, 2.0, 3.0]);
        let b = uni(&[0.0, 5.0]);
        assert!(dk_triangle_check(&a, &a, &a).unwrap());
        assert!(dk_triangle_check(&a, &b, &a).unwrap());
    }

    fn series(n: usize, k: usize) -> impl Strategy<Value = TimeSeries> {
        proptest::collection::vec(-5.0..5.0f64, n * k).prop_map(move |v| TimeSeries::from_flat(v, k, None).unwrap())
    }

    fn pair(max_len: usize) -> impl Strategy<Value = (TimeSeries, TimeSeries)> {
        (1..max_len, 1..max_len, 1usize..4).prop_flat_map(|(m, n, k)| (series(m, k), series(n, k)))
    }

    proptest! {
        #[test]
        fn full_dp_matches_path_enumeration((s, t) in pair(6)) {
            prop_assert_eq!(dk_full(&s, &t).unwrap(), brute_force_dk(&s, &t));
        }

        #[test]
        fn dk_symmetric_and_zero_on_self((s, t) in pair(20)) {
            prop_assert_eq!(dk_full(&s, &t).unwrap(), dk_full(&t, &s).unwrap());
            prop_assert_eq!(dk_full(&s, &s).unwrap(), 0.0);
        }

        #[test]
        fn greedy_is_an_upper_bound((s, t) in pair(30)) {
            prop_assert!(gdk(&s, &t, f64::INFINITY).unwrap() >= dk_full(&s, &t).unwrap());
        }

        #[test]
        fn sparse_unbounded_equals_full((s, t) in pair(30)) {
            prop_assert_eq!(sparse_dk(&s, &t, f64::INFINITY).unwrap(), ThresholdedDistance::Exact(dk_full(&s, &t).unwrap()));
        }

        #[test]
        fn sparse_threshold_is_sound((s, t) in pair(30), eps in 0.0..8.0f64) {
            let full = dk_full(&s, &t).unwrap();
            match sparse_dk(&s, &t, eps).unwrap() {
                ThresholdedDistance::Exact(d) => { prop_assert_eq!(d, full); prop_assert!(d <= eps); }
                ThresholdedDistance::Exceeds(e) => { prop_assert_eq!(e, eps); prop_assert!(full > eps); }
            }
        }

        #[test]
        fn sparse_threshold_monotone((s, t) in pair(20), eps in 0.0..8.0f64, extra in 0.0..4.0f64) {
            if let ThresholdedDistance::Exact(d) = sparse_dk(&s, &t, eps).unwrap() {
                prop_assert_eq!(sparse_dk(&s, &t, eps + extra).unwrap(), ThresholdedDistance::Exact(d));
            }
        }

        #[test]
        fn sub_matches_window_oracle((s, t) in pair(12), eps in 0.0..8.0f64) {
            let oracle = window_oracle(&s, &t);
            let unbounded = sparse_dk_sub(&s, &t, f64::INFINITY).unwrap().unwrap();
            prop_assert_eq!(unbounded.distance, oracle);
            let window = t.subsequence(unbounded.start..unbounded.end + 1).unwrap();
            prop_assert_eq!(dk_full(&s, &window).unwrap(), oracle);
            match sparse_dk_sub(&s, &t, eps).unwrap() {
                Some(hit) => prop_assert_eq!(hit.distance, oracle),
                None => prop_assert!(oracle > eps),
            }
            prop_assert!(gdk_sub(&s, &t, f64::INFINITY).unwrap().distance >= oracle);
        }
    }
}
