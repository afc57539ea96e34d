//! Nearest-neighbor search over multi-dimensional time series.
//!
//! Two elastic distances are provided:
//!
//! - banded dynamic time warping ([`dtw`]), pruned with the LB_Box lower
//!   bound ([`lb`]);
//! - the dog-keeper (discrete Fréchet) distance ([`dk`]), pruned with a
//!   greedy upper bound and a sparse, threshold-limited dynamic program.
//!
//! [`search`] drives k-NN, ε-NN and subsequence queries with instrumentation,
//! [`synth`] generates the synthetic workloads and [`metrics`] implements the
//! tightness / pruning power / speedup / accuracy experiments.

pub mod dataset;
pub mod dk;
pub mod dtw;
pub mod error;
pub mod lb;
pub mod metrics;
pub mod par;
pub mod search;
pub mod series;
pub mod synth;

pub use dataset::Dataset;
pub use dk::{
    dk_full, dk_triangle_check, gdk, gdk_sub, sparse_dk, sparse_dk_sub, SparseColumn, SubMatch, ThresholdedDistance,
};
pub use dtw::{dtw_banded, dtw_early_abandon};
pub use error::{Error, Result};
pub use lb::{dist_to_interval, envelope, lb_box, lb_keogh, lb_sigma_min, znormalize, Envelope};
pub use par::Exec;
pub use search::{epsnn_dk, knn_dk, knn_dk_sub, knn_dtw, sub_search_dk, Counters, Neighbor, SearchReport};
pub use series::{point_dist, BandRadius, TimeSeries};
pub use synth::{gen_cbf, gen_iid_gaussian, gen_ram, generate, GenKind, GenOverrides, GenParams};
