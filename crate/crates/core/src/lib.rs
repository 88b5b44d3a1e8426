//! Numerical experiments with C¹ expanding maps of the circle: orbits,
//! empirical measures under a weak* metric, partition entropy and the Pesin
//! residual, Ulam approximations of equilibrium measures, and Monte-Carlo
//! scans for SRB-like measures.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle_map;
pub mod entropy;
pub mod equilibrium;
pub mod error;
pub mod measures;
pub mod srb_like;

pub use circle_map::{canonical, circle_distance, CircleMap, Family, MapSpec, Start};
pub use entropy::{
    entropy_estimate, lyapunov_exponent, make_partition, pesin_residual, refine, supported_depth,
    EntropyEstimate, Partition, PesinReport, RefinedPartition,
};
pub use equilibrium::{
    kr_membership, pressure_estimate, ulam_matrix, Assembly, CellLayout, KrVerdict,
    PressureEstimate, UlamMatrix,
};
pub use error::{Error, Result};
pub use measures::{
    weak_star_distance, EmpiricalMeasure, GridMeasure, GridTable, Measure, TestFamily,
};
pub use srb_like::{
    basin_fraction, deviation_decay, initial_points, p_limit_set, srb_like_candidates,
    srb_like_candidates_from, Candidate, DecayPoint, PLimitEstimate, ScanParams, SrbLikeReport,
};
