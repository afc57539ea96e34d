//! The basic operands: multi-dimensional time series, band radii and the
//! Euclidean point distance.

use crate::error::{Error, Result};

/// An ordered sequence of `len` points in `dim`-dimensional real space.
///
/// Points are stored row-major in one flat buffer; `point(i)` is the slice
/// `values[i*dim .. (i+1)*dim]`. A series is never empty and never contains
/// non-finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    dim: usize,
    label: Option<String>,
}

#[allow(clippy::len_without_is_empty)]
impl TimeSeries {
    pub fn new(points: Vec<Vec<f64>>, label: Option<String>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        let mut values = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Validation(format!("point {i} has {} components, expected {dim}", p.len())));
            }
            values.extend_from_slice(p);
        }
        Self::from_flat(values, dim, label)
    }

    pub fn from_flat(values: Vec<f64>, dim: usize, label: Option<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("dimensionality must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::Validation("series must contain at least one point".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::Validation(format!(
                "{} values do not form whole {dim}-dimensional points",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite component in point {}", pos / dim)));
        }
        Ok(TimeSeries { values, dim, label })
    }

    /// Builds a 1-dimensional series.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::from_flat(values, 1, None)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// The projection onto one coordinate axis.
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.points().map(|p| p[j]).collect()
    }

    /// A copy of the points `range`, keeping the label.
    pub fn subsequence(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::invalid(format!(
                "subsequence {}..{} out of bounds for length {}",
                range.start,
                range.end,
                self.len()
            )));
        }
        Ok(TimeSeries {
            values: self.values[range.start * self.dim..range.end * self.dim].to_vec(),
            dim: self.dim,
            label: self.label.clone(),
        })
    }
}

/// Sakoe-Chiba band radius: admissible alignments satisfy `|i - j| <= r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BandRadius(pub usize);

impl BandRadius {
    /// `round(ratio * len)`.
    pub fn from_ratio(ratio: f64, len: usize) -> Self {
        BandRadius((ratio * len as f64).round().max(0.0) as usize)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl From<usize> for BandRadius {
    fn from(r: usize) -> Self {
        BandRadius(r)
    }
}

/// Euclidean distance between two points of equal dimensionality.
pub fn point_dist(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
    }
    Ok(sq_dist(a, b).sqrt())
}

/// Squared Euclidean distance. Callers guarantee equal lengths.
#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

pub(crate) fn check_dims(s: &TimeSeries, t: &TimeSeries) -> Result<()> {
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch { left: s.dim(), right: t.dim() });
    }
    Ok(())
}

pub(crate) fn check_same_shape(s: &TimeSeries, t: &TimeSeries) -> Result<()> {
    check_dims(s, t)?;
    if s.len() != t.len() {
        return Err(Error::LengthMismatch { left: s.len(), right: t.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_dist_examples() {
        assert_eq!(point_dist(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(point_dist(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert_eq!(point_dist(&[2.5, -1.0, 7.0], &[2.5, -1.0, 7.0]).unwrap(), 0.0);
    }

    #[test]
    fn point_dist_rejects_mismatch() {
        let err = point_dist(&[1.0, 2.0], &[1.0]).unwrap_err();
        assert!(err.is_usage());
    }

    #[test]
    fn series_rejects_ragged_and_non_finite() {
        assert!(TimeSeries::new(vec![vec![1.0, 2.0], vec![3.0]], None).is_err());
        assert!(TimeSeries::new(vec![], None).is_err());
        assert!(TimeSeries::univariate(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::univariate(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn series_accessors() {
        let s = TimeSeries::new(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]], None).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.dim(), 2);
        assert_eq!(s.point(1), &[3.0, 4.0]);
        assert_eq!(s.component(1), vec![2.0, 4.0, 6.0]);
        let sub = s.subsequence(1..3).unwrap();
        assert_eq!(sub.as_flat(), &[3.0, 4.0, 5.0, 6.0]);
        assert!(s.subsequence(2..2).is_err());
    }

    #[test]
    fn band_from_ratio_rounds() {
        assert_eq!(BandRadius::from_ratio(0.125, 64), BandRadius(8));
        assert_eq!(BandRadius::from_ratio(0.1, 15), BandRadius(2));
    }

    fn point(k: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-100.0..100.0f64, k)
    }

    proptest! {
        #[test]
        fn point_dist_is_a_metric(
            (a, b, c) in (1usize..6).prop_flat_map(|k| (point(k), point(k), point(k)))
        ) {
            let ab = point_dist(&a, &b).unwrap();
            let ba = point_dist(&b, &a).unwrap();
            let bc = point_dist(&b, &c).unwrap();
            let ac = point_dist(&a, &c).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(point_dist(&a, &a).unwrap(), 0.0);
            prop_assert!(ac <= (ab + bc) * (1.0 + 1e-9));
            if a != b {
                prop_assert!(ab > 0.0);
            }
        }
    }
}
