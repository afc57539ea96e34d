//! Seeded synthetic workloads.
//!
//! - RAM: smooth random-acceleration trajectories inside a ball, one
//!   prototype per class, representatives obtained by a bounded monotone
//!   time warp plus noise.
//! - CBF: the cylinder / bell / funnel shapes, one shape per dimension, so a
//!   class is a tuple of shapes (27 classes for 3 dimensions).
//! - i.i.d. standard normal series.
//!
//! Output is a pure function of [`GenParams`], seed included.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenKind {
    Ram,
    Cbf,
    Iid,
}

impl GenKind {
    pub fn name(self) -> &'static str {
        match self {
            GenKind::Ram => "ram",
            GenKind::Cbf => "cbf",
            GenKind::Iid => "iid",
        }
    }
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ram" => Ok(GenKind::Ram),
            "cbf" => Ok(GenKind::Cbf),
            "iid" => Ok(GenKind::Iid),
            other => Err(Error::invalid(format!("unknown generator kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub kind: GenKind,
    pub dim: usize,
    pub length: usize,
    pub classes: usize,
    /// Representatives per class. For `Iid` the series count is
    /// `classes * reps`.
    pub reps: usize,
    pub noise_sigma: f64,
    /// Largest temporal displacement, in indices.
    pub distortion: usize,
    /// RAM only: prototypes are scaled into the ball of this radius.
    pub radius: f64,
    pub seed: u64,
}

impl GenParams {
    /// RAM with distortion 25, radius 50, 50 classes and 2 representatives.
    /// Distortion is capped below the length.
    pub fn ram(dim: usize, length: usize, seed: u64) -> Self {
        GenParams {
            kind: GenKind::Ram,
            dim,
            length,
            classes: 50,
            reps: 2,
            noise_sigma: 1.0,
            distortion: 25.min(length.saturating_sub(1)),
            radius: 50.0,
            seed,
        }
    }

    /// CBF with 27 classes (fewer when the dimensionality cannot supply
    /// 27 distinct shape tuples) and 3 representatives.
    pub fn cbf(dim: usize, length: usize, seed: u64) -> Self {
        GenParams {
            kind: GenKind::Cbf,
            dim,
            length,
            classes: 27.min(shape_tuple_count(dim)),
            reps: 3,
            noise_sigma: 1.0,
            distortion: (length / 10).min(length.saturating_sub(1)),
            radius: 50.0,
            seed,
        }
    }

    pub fn iid(dim: usize, length: usize, count: usize, seed: u64) -> Self {
        GenParams {
            kind: GenKind::Iid,
            dim,
            length,
            classes: count,
            reps: 1,
            noise_sigma: 0.0,
            distortion: 0,
            radius: 50.0,
            seed,
        }
    }

    /// The default parameters of `kind` at this size. `Iid` gets 100 series.
    pub fn defaults(kind: GenKind, dim: usize, length: usize, seed: u64) -> Self {
        match kind {
            GenKind::Ram => GenParams::ram(dim, length, seed),
            GenKind::Cbf => GenParams::cbf(dim, length, seed),
            GenKind::Iid => GenParams::iid(dim, length, 100, seed),
        }
    }

    pub fn with(mut self, f: impl FnOnce(&mut GenParams)) -> Self {
        f(&mut self);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(m));
        if self.dim == 0 {
            return fail("dim must be at least 1".into());
        }
        if self.length < 2 {
            return fail(format!("length must be at least 2, got {}", self.length));
        }
        if self.classes == 0 || self.reps == 0 {
            return fail("classes and reps must be at least 1".into());
        }
        if self.distortion >= self.length {
            return fail(format!("distortion {} must be below the length {}", self.distortion, self.length));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail(format!("noise sigma must be finite and nonnegative, got {}", self.noise_sigma));
        }
        if self.kind == GenKind::Ram && !(self.radius.is_finite() && self.radius > 0.0) {
            return fail(format!("radius must be positive, got {}", self.radius));
        }
        if self.kind == GenKind::Cbf && self.classes > shape_tuple_count(self.dim) {
            return fail(format!(
                "{} classes requested but only {} distinct shape tuples exist in {} dimensions",
                self.classes,
                shape_tuple_count(self.dim),
                self.dim
            ));
        }
        Ok(())
    }

    fn meta(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("generator".into(), self.kind.name().into()),
            ("dim".into(), self.dim.to_string()),
            ("length".into(), self.length.to_string()),
            ("classes".into(), self.classes.to_string()),
            ("reps".into(), self.reps.to_string()),
            ("noise_sigma".into(), self.noise_sigma.to_string()),
            ("distortion".into(), self.distortion.to_string()),
            ("radius".into(), self.radius.to_string()),
            ("seed".into(), self.seed.to_string()),
        ])
    }
}

/// Explicit choices layered over [`GenParams::defaults`], so that sweeps
/// over sizes keep size-dependent defaults for everything left unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenOverrides {
    pub classes: Option<usize>,
    pub reps: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub distortion: Option<usize>,
    pub radius: Option<f64>,
}

impl GenOverrides {
    pub fn apply(&self, mut p: GenParams) -> GenParams {
        if let Some(c) = self.classes {
            p.classes = c;
        }
        if let Some(r) = self.reps {
            p.reps = r;
        }
        if let Some(s) = self.noise_sigma {
            p.noise_sigma = s;
        }
        if let Some(d) = self.distortion {
            p.distortion = d;
        }
        if let Some(r) = self.radius {
            p.radius = r;
        }
        p
    }
}

/// `3^dim`, saturating.
pub(crate) fn shape_tuple_count(dim: usize) -> usize {
    (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(3)).unwrap_or(usize::MAX)
}

pub fn generate(p: &GenParams) -> Result<Dataset> {
    match p.kind {
        GenKind::Ram => gen_ram(p),
        GenKind::Cbf => gen_cbf(p),
        GenKind::Iid => {
            p.validate()?;
            let ds = gen_iid_gaussian(p.dim, p.length, p.classes * p.reps, p.seed)?;
            Dataset::new(ds.into_series(), p.meta())
        }
    }
}

/// Gaussian noise truncated at three standard deviations per component, so
/// a noisy point never leaves the `3 * sigma * sqrt(k)` ball around its
/// clean position.
fn noise(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= 3.0 {
            return sigma * z;
        }
    }
}

/// Monotone map of `0..n` onto fractional positions in `[0, n-1]` with
/// `|warp(i) - i| <= distortion`.
fn random_warp(rng: &mut ChaCha8Rng, n: usize, distortion: usize) -> Vec<f64> {
    if distortion == 0 {
        return (0..n).map(|i| i as f64).collect();
    }
    let mut w = Vec::with_capacity(n);
    let mut acc = 0.0;
    w.push(0.0);
    for _ in 1..n {
        acc += rng.random_range(0.0..2.0);
        w.push(acc);
    }
    let scale = if acc > 0.0 { (n - 1) as f64 / acc } else { 0.0 };
    let d = distortion as f64;
    w.iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            (x * scale).clamp(i - d, i + d).clamp(0.0, (n - 1) as f64)
        })
        .collect()
}

fn interpolate(proto: &[f64], dim: usize, pos: f64, out: &mut Vec<f64>) {
    let n = proto.len() / dim;
    let lo = (pos.floor() as usize).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    let f = pos - lo as f64;
    for j in 0..dim {
        let a = proto[lo * dim + j];
        let b = proto[hi * dim + j];
        out.push(a + (b - a) * f);
    }
}

pub fn gen_ram(p: &GenParams) -> Result<Dataset> {
    if p.kind != GenKind::Ram {
        return Err(Error::invalid("gen_ram needs kind = ram"));
    }
    p.validate()?;
    let (n, k) = (p.length, p.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut series = Vec::with_capacity(p.classes * p.reps);
    for class in 0..p.classes {
        let proto = ram_prototype(&mut rng, n, k, p.radius);
        for _ in 0..p.reps {
            let warp = random_warp(&mut rng, n, p.distortion);
            let mut values = Vec::with_capacity(n * k);
            for &pos in &warp {
                interpolate(&proto, k, pos, &mut values);
            }
            for v in values.iter_mut() {
                *v += noise(&mut rng, p.noise_sigma);
            }
            series.push(TimeSeries::from_flat(values, k, Some(class.to_string()))?);
        }
    }
    Dataset::new(series, p.meta())
}

/// Integrates i.i.d. Gaussian accelerations twice per dimension, centers
/// the result and scales it so the farthest point lies on the sphere of
/// radius `radius`.
fn ram_prototype(rng: &mut ChaCha8Rng, n: usize, k: usize, radius: f64) -> Vec<f64> {
    let mut proto = vec![0.0; n * k];
    for j in 0..k {
        let (mut vel, mut pos) = (0.0, 0.0);
        for i in 0..n {
            let acc: f64 = StandardNormal.sample(rng);
            vel += acc;
            pos += vel;
            proto[i * k + j] = pos;
        }
        let mean = (0..n).map(|i| proto[i * k + j]).sum::<f64>() / n as f64;
        for i in 0..n {
            proto[i * k + j] -= mean;
        }
    }
    let max_norm = proto.chunks_exact(k).map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    if max_norm > 0.0 {
        let scale = radius / max_norm;
        for v in proto.iter_mut() {
            *v *= scale;
        }
    }
    proto
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Shape {
    Cylinder,
    Bell,
    Funnel,
}

impl Shape {
    const ALL: [Shape; 3] = [Shape::Cylinder, Shape::Bell, Shape::Funnel];

    fn value(self, t: usize, onset: usize, end: usize) -> f64 {
        if t < onset || t > end {
            return 0.0;
        }
        let span = (end - onset) as f64;
        match self {
            Shape::Cylinder => 1.0,
            Shape::Bell => (t - onset) as f64 / span,
            Shape::Funnel => (end - t) as f64 / span,
        }
    }
}

const CBF_AMPLITUDE: f64 = 6.0;

pub fn gen_cbf(p: &GenParams) -> Result<Dataset> {
    if p.kind != GenKind::Cbf {
        return Err(Error::invalid("gen_cbf needs kind = cbf"));
    }
    p.validate()?;
    let (n, k) = (p.length, p.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let tuples = shape_tuples(&mut rng, k, p.classes);
    let mut series = Vec::with_capacity(p.classes * p.reps);
    for (class, shapes) in tuples.iter().enumerate() {
        let windows: Vec<(usize, usize)> = (0..k).map(|_| cbf_window(&mut rng, n)).collect();
        for _ in 0..p.reps {
            // one displacement per representative: time is shared by all dimensions
            let d = p.distortion as i64;
            let offsets = (rng.random_range(-d..=d), rng.random_range(-d..=d));
            let jittered: Vec<(usize, usize)> = windows.iter().map(|&(a, b)| jitter_window(a, b, offsets, n)).collect();
            let mut values = vec![0.0; n * k];
            for t in 0..n {
                for j in 0..k {
                    let (a, b) = jittered[j];
                    values[t * k + j] = CBF_AMPLITUDE * shapes[j].value(t, a, b);
                }
            }
            for v in values.iter_mut() {
                *v += noise(&mut rng, p.noise_sigma);
            }
            series.push(TimeSeries::from_flat(values, k, Some(class.to_string()))?);
        }
    }
    Dataset::new(series, p.meta())
}

/// `count` distinct shape tuples: all of them in lexicographic order when
/// every tuple is requested, otherwise a seeded random selection.
fn shape_tuples(rng: &mut ChaCha8Rng, k: usize, count: usize) -> Vec<Vec<Shape>> {
    let decode = |mut code: usize| -> Vec<Shape> {
        let mut t = vec![Shape::Cylinder; k];
        for slot in t.iter_mut().rev() {
            *slot = Shape::ALL[code % 3];
            code /= 3;
        }
        t
    };
    if count == shape_tuple_count(k) {
        return (0..count).map(decode).collect();
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let t: Vec<Shape> = (0..k).map(|_| Shape::ALL[rng.random_range(0..3)]).collect();
        if seen.insert(t.clone()) {
            out.push(t);
        }
    }
    out
}

/// Onset in `[n/8, n/4]`, duration in `[n/4, 3n/4]`, clipped to the series.
fn cbf_window(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let nf = n as f64;
    let a = (rng.random_range(nf / 8.0..=nf / 4.0).round() as usize).min(n - 2);
    let dur = (rng.random_range(nf / 4.0..=3.0 * nf / 4.0).round() as usize).max(1);
    (a, (a + dur).min(n - 1))
}

/// Shifts onset and end by the given offsets, keeping a nonempty window
/// inside the series.
fn jitter_window(a: usize, b: usize, (da, db): (i64, i64), n: usize) -> (usize, usize) {
    let shift = |x: usize, off: i64| (x as i64 + off).clamp(0, n as i64 - 1) as usize;
    let a2 = shift(a, da);
    let b2 = shift(b, db);
    if a2 < b2 {
        (a2, b2)
    } else if a2 + 1 < n {
        (a2, a2 + 1)
    } else {
        (a2 - 1, a2)
    }
}

/// `count` unlabeled series of i.i.d. standard normal points.
pub fn gen_iid_gaussian(dim: usize, length: usize, count: usize, seed: u64) -> Result<Dataset> {
    if dim == 0 || length == 0 || count == 0 {
        return Err(Error::invalid("dim, length and count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let series = (0..count)
        .map(|_| {
            let values = (0..dim * length).map(|_| StandardNormal.sample(&mut rng)).collect();
            TimeSeries::from_flat(values, dim, None)
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = BTreeMap::from([
        ("generator".into(), "iid".into()),
        ("dim".into(), dim.to_string()),
        ("length".into(), length.to_string()),
        ("count".into(), count.to_string()),
        ("seed".into(), seed.to_string()),
    ]);
    Dataset::new(series, meta)
}
