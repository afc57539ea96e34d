//! Dynamic time warping under a Sakoe-Chiba band.
//!
//! Values are sums of squared point distances along the cheapest warping
//! path; no final square root is taken. The table is filled from the last
//! cell `(m-1, n-1)` backwards, so every cell holds
//! `cost(i, j) + min(successors)` exactly as the suffix recursion defines
//! it. Only two columns along the shorter series are kept.

use crate::dk::ThresholdedDistance;
use crate::error::Result;
use crate::series::{check_dims, sq_dist, BandRadius, TimeSeries};

/// Banded DTW. Returns `f64::INFINITY` when no warping path fits in the
/// band, i.e. when the lengths differ by more than `r`.
pub fn dtw_banded(s: &TimeSeries, t: &TimeSeries, r: BandRadius) -> Result<f64> {
    check_dims(s, t)?;
    Ok(match banded(s, t, r.get(), f64::INFINITY) {
        Some(v) => v,
        None => unreachable!("an infinite threshold never abandons"),
    })
}

/// Banded DTW that gives up as soon as a whole column of the table exceeds
/// `eps`. `Exact(d)` always has `d <= eps`.
pub fn dtw_early_abandon(s: &TimeSeries, t: &TimeSeries, r: BandRadius, eps: f64) -> Result<ThresholdedDistance> {
    check_dims(s, t)?;
    Ok(match banded(s, t, r.get(), eps) {
        Some(d) if d <= eps => ThresholdedDistance::Exact(d),
        _ => ThresholdedDistance::Exceeds(eps),
    })
}

/// `None` when abandoned.
fn banded(s: &TimeSeries, t: &TimeSeries, r: usize, eps: f64) -> Option<f64> {
    // Cost and recurrence are symmetric under transposition, so walk the
    // longer series column by column and keep buffers for the shorter one.
    let (cols, rows) = if s.len() >= t.len() { (s, t) } else { (t, s) };
    let n = cols.len();
    let m = rows.len();
    if n - m > r {
        return Some(f64::INFINITY);
    }

    // Index m is a permanent infinite sentinel.
    let mut next = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    for j in (0..n).rev() {
        let lo = j.saturating_sub(r);
        let hi = (j + r).min(m - 1);
        cur[hi + 1] = f64::INFINITY;
        if lo > 0 {
            cur[lo - 1] = f64::INFINITY;
        }
        let cp = cols.point(j);
        let mut col_min = f64::INFINITY;
        for i in (lo..=hi).rev() {
            let c = sq_dist(rows.point(i), cp);
            let v = if i == m - 1 && j == n - 1 { c } else { c + cur[i + 1].min(next[i]).min(next[i + 1]) };
            cur[i] = v;
            col_min = col_min.min(v);
        }
        if col_min > eps {
            return None;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Some(next[0])
}
