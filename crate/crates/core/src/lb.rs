//! Envelopes and the DTW lower bounds built on them.
//!
//! All bounds here are in squared units, matching [`crate::dtw`]. For a band
//! radius `r` and equal-length series the chain
//! `lb_box(s, envelope(t, r)) <= lb_sigma_min(s, t, r) <= dtw_banded(s, t, r)`
//! holds, with `lb_box == lb_keogh` for 1-dimensional input.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::series::{check_same_shape, sq_dist, BandRadius, TimeSeries};

/// Per-index axis-aligned bounding boxes of a series under a band radius.
///
/// `lower(i)[j]` and `upper(i)[j]` are the minimum and maximum of component
/// `j` over the window `max(0, i-r) ..= min(n-1, i+r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    lower: Vec<f64>,
    upper: Vec<f64>,
    dim: usize,
    radius: BandRadius,
}

#[allow(clippy::len_without_is_empty)]
impl Envelope {
    pub fn len(&self) -> usize {
        self.lower.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> BandRadius {
        self.radius
    }

    #[inline]
    pub fn lower(&self, i: usize) -> &[f64] {
        &self.lower[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn upper(&self, i: usize) -> &[f64] {
        &self.upper[i * self.dim..(i + 1) * self.dim]
    }
}

/// Builds the envelope of `t` in `O(n * k)` using monotonic deques.
pub fn envelope(t: &TimeSeries, r: BandRadius) -> Envelope {
    let n = t.len();
    let dim = t.dim();
    let mut lower = vec![0.0; n * dim];
    let mut upper = vec![0.0; n * dim];
    let mut column = Vec::with_capacity(n);
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for j in 0..dim {
        column.clear();
        column.extend(t.points().map(|p| p[j]));
        sliding_min_max(&column, r.get(), &mut lo, &mut hi);
        for i in 0..n {
            lower[i * dim + j] = lo[i];
            upper[i * dim + j] = hi[i];
        }
    }
    Envelope { lower, upper, dim, radius: r }
}

/// Windowed min and max over `[i-r, i+r]` clamped to the slice. Each index
/// enters and leaves each deque at most once.
fn sliding_min_max(values: &[f64], r: usize, lo: &mut Vec<f64>, hi: &mut Vec<f64>) {
    let n = values.len();
    lo.clear();
    hi.clear();
    let mut min_q: VecDeque<usize> = VecDeque::with_capacity((2 * r + 1).min(n));
    let mut max_q: VecDeque<usize> = VecDeque::with_capacity((2 * r + 1).min(n));
    for head in 0..n + r {
        if head < n {
            let v = values[head];
            while min_q.back().is_some_and(|&b| values[b] >= v) {
                min_q.pop_back();
            }
            min_q.push_back(head);
            while max_q.back().is_some_and(|&b| values[b] <= v) {
                max_q.pop_back();
            }
            max_q.push_back(head);
        }
        if head >= r {
            let i = head - r;
            let oldest = i.saturating_sub(r);
            while min_q.front().is_some_and(|&f| f < oldest) {
                min_q.pop_front();
            }
            while max_q.front().is_some_and(|&f| f < oldest) {
                max_q.pop_front();
            }
            lo.push(values[min_q[0]]);
            hi.push(values[max_q[0]]);
        }
    }
}

/// Distance from `x` to the interval `[l, u]`.
pub fn dist_to_interval(x: f64, l: f64, u: f64) -> Result<f64> {
    if l > u {
        return Err(Error::invalid(format!("empty interval [{l}, {u}]")));
    }
    Ok(interval_gap(x, l, u))
}

#[inline]
fn interval_gap(x: f64, l: f64, u: f64) -> f64 {
    if x < l {
        l - x
    } else if x > u {
        x - u
    } else {
        0.0
    }
}

fn check_envelope(s: &TimeSeries, env: &Envelope) -> Result<()> {
    if s.dim() != env.dim() {
        return Err(Error::DimensionMismatch { left: s.dim(), right: env.dim() });
    }
    if s.len() != env.len() {
        return Err(Error::LengthMismatch { left: s.len(), right: env.len() });
    }
    Ok(())
}

/// Keogh's bound for 1-dimensional series.
pub fn lb_keogh(s: &TimeSeries, env: &Envelope) -> Result<f64> {
    check_envelope(s, env)?;
    if s.dim() != 1 {
        return Err(Error::invalid(format!("lb_keogh takes 1-dimensional series, got dimensionality {}", s.dim())));
    }
    let mut sum = 0.0;
    for (i, p) in s.points().enumerate() {
        let g = interval_gap(p[0], env.lower[i], env.upper[i]);
        sum += g * g;
    }
    Ok(sum)
}

/// Sum of squared distances from each query point to its bounding box.
pub fn lb_box(s: &TimeSeries, env: &Envelope) -> Result<f64> {
    check_envelope(s, env)?;
    Ok(lb_box_capped(s, env, f64::INFINITY))
}

/// `lb_box`, stopping as soon as the partial sum exceeds `cap`. The return
/// value is then a partial sum that is still `> cap`.
pub(crate) fn lb_box_capped(s: &TimeSeries, env: &Envelope, cap: f64) -> f64 {
    let dim = s.dim();
    let mut sum = 0.0;
    for (i, p) in s.points().enumerate() {
        let lo = &env.lower[i * dim..(i + 1) * dim];
        let hi = &env.upper[i * dim..(i + 1) * dim];
        let mut cell = 0.0;
        for j in 0..dim {
            let g = interval_gap(p[j], lo[j], hi[j]);
            cell += g * g;
        }
        sum += cell;
        if sum > cap {
            break;
        }
    }
    sum
}

/// Sum over `i` of the smallest squared distance from `s_i` to any
/// `t_{i+l}` with `|l| <= r`. Costs `O(n * r * k)`.
pub fn lb_sigma_min(s: &TimeSeries, t: &TimeSeries, r: BandRadius) -> Result<f64> {
    check_same_shape(s, t)?;
    let n = s.len();
    let r = r.get();
    let mut sum = 0.0;
    for i in 0..n {
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(n - 1);
        let si = s.point(i);
        let best = (lo..=hi).map(|j| sq_dist(si, t.point(j))).fold(f64::INFINITY, f64::min);
        sum += best;
    }
    Ok(sum)
}

/// Shifts and scales each component to zero mean and unit (population)
/// standard deviation. Constant components become all zeros.
pub fn znormalize(s: &TimeSeries) -> TimeSeries {
    let n = s.len();
    let dim = s.dim();
    let mut values = s.as_flat().to_vec();
    for j in 0..dim {
        let col = || values.iter().skip(j).step_by(dim);
        let mean = col().sum::<f64>() / n as f64;
        let (min, max) = col().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let sd = if min == max { 0.0 } else { (col().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt() };
        for v in values.iter_mut().skip(j).step_by(dim) {
            *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
        }
    }
    TimeSeries::from_flat(values, dim, s.label().map(str::to_owned))
        .expect("normalizing finite values keeps them finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtw::dtw_banded;
    use proptest::prelude::*;

    fn uni(v: &[f64]) -> TimeSeries {
        TimeSeries::univariate(v.to_vec()).unwrap()
    }

    fn multi(points: &[&[f64]]) -> TimeSeries {
        TimeSeries::new(points.iter().map(|p| p.to_vec()).collect(), None).unwrap()
    }

    /// Direct windowed scan, independent of the deque implementation.
    fn naive_envelope(t: &TimeSeries, r: usize) -> (Vec<f64>, Vec<f64>) {
        let n = t.len();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for i in 0..n {
            for j in 0..t.dim() {
                let w = (i.saturating_sub(r)..=(i + r).min(n - 1)).map(|q| t.point(q)[j]);
                lo.push(w.clone().fold(f64::INFINITY, f64::min));
                hi.push(w.fold(f64::NEG_INFINITY, f64::max));
            }
        }
        (lo, hi)
    }

    #[test]
    fn envelope_small_example() {
        let env = envelope(&uni(&[1.0, 3.0, 2.0]), BandRadius(1));
        assert_eq!(env.lower, vec![1.0, 1.0, 2.0]);
        assert_eq!(env.upper, vec![3.0, 3.0, 3.0]);
    }

    #[test]
    fn envelope_zero_radius_is_identity() {
        let t = multi(&[&[1.0, -1.0], &[4.0, 0.5], &[2.0, 2.0]]);
        let env = envelope(&t, BandRadius(0));
        assert_eq!(env.lower, t.as_flat());
        assert_eq!(env.upper, t.as_flat());
    }

    #[test]
    fn envelope_full_window_is_columnwise_range() {
        let t = multi(&[&[1.0, -1.0], &[4.0, 0.5], &[2.0, 2.0]]);
        for r in [2, 3, 10] {
            let env = envelope(&t, BandRadius(r));
            for i in 0..3 {
                assert_eq!(env.lower(i), &[1.0, -1.0]);
                assert_eq!(env.upper(i), &[4.0, 2.0]);
            }
        }
    }

    #[test]
    fn dist_to_interval_cases() {
        assert_eq!(dist_to_interval(0.0, 1.0, 3.0).unwrap(), 1.0);
        assert_eq!(dist_to_interval(5.0, 1.0, 3.0).unwrap(), 2.0);
        assert_eq!(dist_to_interval(2.0, 1.0, 3.0).unwrap(), 0.0);
        assert!(dist_to_interval(2.0, 3.0, 1.0).unwrap_err().is_usage());
    }

    #[test]
    fn lb_keogh_hand_sum() {
        let env = envelope(&uni(&[1.0, 3.0, 2.0]), BandRadius(1));
        let s = uni(&[0.0, 0.0, 0.0]);
        assert_eq!(lb_keogh(&s, &env).unwrap(), 6.0);
        assert_eq!(lb_box(&s, &env).unwrap(), 6.0);
    }

    #[test]
    fn lb_keogh_self_and_midpoints() {
        let t = uni(&[1.0, 5.0, -2.0, 0.5]);
        for r in 0..5 {
            assert_eq!(lb_keogh(&t, &envelope(&t, BandRadius(r))).unwrap(), 0.0);
        }
        let mid = uni(&[1.5; 4]);
        assert_eq!(lb_keogh(&mid, &envelope(&t, BandRadius(3))).unwrap(), 0.0);
    }

    #[test]
    fn lb_keogh_rejects_multidimensional_and_length_mismatch() {
        let t = multi(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let env = envelope(&t, BandRadius(1));
        assert!(lb_keogh(&t, &env).unwrap_err().is_usage());
        let env1 = envelope(&uni(&[1.0, 2.0, 3.0]), BandRadius(1));
        assert!(lb_keogh(&uni(&[1.0, 2.0]), &env1).unwrap_err().is_usage());
        assert!(lb_box(&t, &env1).unwrap_err().is_usage());
    }

    #[test]
    fn sneak_past_box() {
        let t = multi(&[&[0.0, 1.0], &[0.0, 0.0], &[1.0, 0.0]]);
        let s = multi(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let r = BandRadius(2);
        let lb = lb_box(&s, &envelope(&t, r)).unwrap();
        let sigma = lb_sigma_min(&s, &t, r).unwrap();
        let dtw = dtw_banded(&s, &t, r).unwrap();
        assert_eq!(lb, 0.0);
        // every s_i is at squared distance 1 from (0,1) and (1,0)
        assert_eq!(sigma, 3.0);
        assert!(dtw >= sigma && dtw > 0.0);
    }

    #[test]
    fn lb_sigma_min_examples() {
        assert_eq!(lb_sigma_min(&uni(&[0.0, 0.0]), &uni(&[1.0, 2.0]), BandRadius(0)).unwrap(), 5.0);
        let t = uni(&[3.0, 1.0, 4.0]);
        assert_eq!(lb_sigma_min(&t, &t, BandRadius(2)).unwrap(), 0.0);
        assert!(lb_sigma_min(&uni(&[0.0]), &t, BandRadius(1)).is_err());
    }

    #[test]
    fn znormalize_examples() {
        let z = znormalize(&uni(&[0.0, 2.0]));
        assert_eq!(z.as_flat(), &[-1.0, 1.0]);
        let z = znormalize(&multi(&[&[0.1, 1.0], &[0.1, 3.0], &[0.1, 2.0]]));
        assert_eq!(z.component(0), vec![0.0; 3]);
    }

    fn series(n: usize, k: usize) -> impl Strategy<Value = TimeSeries> {
        proptest::collection::vec(-10.0..10.0f64, n * k).prop_map(move |v| TimeSeries::from_flat(v, k, None).unwrap())
    }

    fn pair() -> impl Strategy<Value = (TimeSeries, TimeSeries, usize)> {
        (1usize..20, 1usize..5, 0usize..25).prop_flat_map(|(n, k, r)| (series(n, k), series(n, k), Just(r)))
    }

    proptest! {
        #[test]
        fn envelope_matches_naive_scan((t, _, r) in pair()) {
            let env = envelope(&t, BandRadius(r));
            let (lo, hi) = naive_envelope(&t, r);
            prop_assert_eq!(&env.lower, &lo);
            prop_assert_eq!(&env.upper, &hi);
            prop_assert!(env.lower.iter().zip(&env.upper).all(|(l, u)| l <= u));
        }

        #[test]
        fn lower_bound_chain((s, t, r) in pair()) {
            let r = BandRadius(r);
            let lb = lb_box(&s, &envelope(&t, r)).unwrap();
            let sigma = lb_sigma_min(&s, &t, r).unwrap();
            let dtw = dtw_banded(&s, &t, r).unwrap();
            prop_assert!(lb >= 0.0);
            prop_assert!(lb <= sigma * (1.0 + 1e-9) + 1e-12);
            prop_assert!(sigma <= dtw * (1.0 + 1e-9) + 1e-12);
        }

        #[test]
        fn lb_box_equals_lb_keogh_in_one_dimension((s, t) in (1usize..30).prop_flat_map(|n| (series(n, 1), series(n, 1))), r in 0usize..10) {
            let env = envelope(&t, BandRadius(r));
            prop_assert_eq!(lb_box(&s, &env).unwrap().to_bits(), lb_keogh(&s, &env).unwrap().to_bits());
        }

        #[test]
        fn znormalize_is_idempotent((s, _, _) in pair()) {
            let once = znormalize(&s);
            let twice = znormalize(&once);
            for (a, b) in once.as_flat().iter().zip(twice.as_flat()) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
