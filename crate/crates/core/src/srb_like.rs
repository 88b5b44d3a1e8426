//! Monte-Carlo experiments on empirical averages `σₙ(x)`:
//!
//! * p-limit sets, approximated by snapshots of `σₙ(x)` at geometric
//!   checkpoints `n_max / 2ʲ`;
//! * SRB-like candidates: terminal measures of Lebesgue-sampled points,
//!   clustered by single linkage under the weak* metric, each cluster weighted
//!   by its share of the sample;
//! * the Lebesgue fraction of the basin of ε-weak attraction of a measure;
//! * the deviation-decay experiment: how often `σₙ(x)` stays at distance
//!   `≥ ε` from a reference equilibrium measure as `n` grows.
//!
//! The exact distance from `σₙ(x)` to the set `K_r` cannot be computed. The
//! decay experiment measures the distance to one reference member of
//! `K₀ ⊆ K_r` (typically the Ulam stationary measure), which bounds the
//! distance to `K_r` from above. A small deviation fraction therefore
//! implies a small fraction for `K_r` itself.
//!
//! All per-point work runs in parallel; results are collected in sample
//! order so identical seeds give bit-identical reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle_map::{CircleMap, Start};
use crate::entropy::{
    check_sampling, estimate_from_profile, refine, supported_depth, Partition, PesinReport,
    RefinedPartition, MIN_DEPTH,
};
use crate::error::{Error, Result};
use crate::measures::{
    cell_of, locate_arc, GridMeasure, GridTable, TestFamily, DEFAULT_TRUNCATION,
};

pub const DEFAULT_EPSILON_CLUSTER: f64 = 0.05;
pub const DEFAULT_GRID: usize = 1024;
pub const DEFAULT_CHECKPOINTS: usize = 8;
/// Clusters holding less than this share of the sample are not flagged SRB-like.
pub const DEFAULT_MIN_BASIN_WEIGHT: f64 = 0.05;
/// Deepest refinement used for candidate entropies.
pub const MAX_SCAN_DEPTH: usize = 10;
/// Residual above which an atomic-profile candidate is consistent with zero entropy.
pub const ATOMIC_RESIDUAL_FLOOR: f64 = 0.2;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Geometric checkpoints `n_max >> j`, ascending, duplicates and zeros removed.
pub fn geometric_checkpoints(n_max: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..count)
        .rev()
        .filter_map(|j| n_max.checked_shr(j as u32))
        .filter(|&n| n > 0)
        .collect();
    out.dedup();
    out
}

/// Lebesgue sample: a golden-ratio sequence with a seeded phase, jittered by
/// up to one spacing, each point carrying its own digit seed.
pub fn initial_points(sample_count: usize, seed: u64) -> Vec<Start> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: f64 = rng.gen_range(0.0..1.0);
    let spacing = 1.0 / sample_count.max(1) as f64;
    (0..sample_count)
        .map(|i| {
            let jitter: f64 = rng.gen_range(0.0..spacing);
            let x0 = crate::circle_map::canonical(phase + i as f64 * GOLDEN + jitter);
            Start::Typical {
                x0,
                seed: rng.gen(),
            }
        })
        .collect()
}

/// What one orbit leaves behind.
struct Trace {
    snapshots: Vec<GridMeasure>,
    log_derivative_mean: f64,
    cylinder_counts: Vec<u64>,
}

fn trace(
    map: &CircleMap,
    start: &Start,
    checkpoints: &[usize],
    grid_k: usize,
    cylinders: Option<&[f64]>,
) -> Result<Trace> {
    let n = *checkpoints.last().expect("at least one checkpoint");
    let mut counts = vec![0u64; grid_k];
    let mut cyl = vec![0u64; cylinders.map_or(0, <[f64]>::len)];
    let mut log_sum = 0.0;
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0;
    for (step, x) in map.iter_from(start)?.take(n).enumerate() {
        counts[cell_of(x, grid_k)] += 1;
        log_sum += map.log_derivative(x);
        if let Some(b) = cylinders {
            cyl[locate_arc(b, x)] += 1;
        }
        if step + 1 == checkpoints[next_checkpoint] {
            snapshots.push(GridMeasure::from_weights(
                counts.iter().map(|&c| c as f64).collect(),
            )?);
            next_checkpoint += 1;
        }
    }
    Ok(Trace {
        snapshots,
        log_derivative_mean: log_sum / n as f64,
        cylinder_counts: cyl,
    })
}

/// Groups embeddings whose single-linkage chains stay below `threshold`.
/// Clusters are listed by their smallest member.
pub fn single_linkage(
    embeddings: &[Vec<f64>],
    family: &TestFamily<'_>,
    threshold: f64,
) -> Vec<Vec<usize>> {
    let n = embeddings.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if family.distance(&embeddings[i], &embeddings[j]) < threshold {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[r]].push(i);
    }
    clusters
}

fn max_pairwise(embeddings: &[Vec<f64>], family: &TestFamily<'_>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..embeddings.len() {
        for j in (i + 1)..embeddings.len() {
            worst = worst.max(family.distance(&embeddings[i], &embeddings[j]));
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub representative: GridMeasure,
    pub members: Vec<usize>,
}

/// Snapshots of `σ_{nᵢ}(x)` and their clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLimitEstimate {
    pub x0: f64,
    pub checkpoints: Vec<usize>,
    pub snapshots: Vec<GridMeasure>,
    /// Representative is the latest snapshot of the cluster.
    pub clusters: Vec<Cluster>,
    /// Largest weak* distance among the later half of the snapshots.
    pub dispersion: f64,
}

pub fn p_limit_set(
    map: &CircleMap,
    start: &Start,
    n_max: usize,
    checkpoint_count: usize,
    grid_k: usize,
    epsilon_cluster: f64,
) -> Result<PLimitEstimate> {
    if n_max < 10_000 {
        return Err(Error::BadParams(format!(
            "n_max must be at least 10^4, got {n_max}"
        )));
    }
    if checkpoint_count == 0 {
        return Err(Error::BadParams("need at least one checkpoint".into()));
    }
    check_epsilon(epsilon_cluster)?;
    let checkpoints = geometric_checkpoints(n_max, checkpoint_count);
    let tr = trace(map, start, &checkpoints, grid_k, None)?;
    let family = TestFamily::with_default_truncation(map);
    let table = family.grid_table(grid_k);
    let embeddings = tr
        .snapshots
        .iter()
        .map(|s| table.embed(s))
        .collect::<Result<Vec<_>>>()?;
    let clusters = single_linkage(&embeddings, &family, epsilon_cluster)
        .into_iter()
        .map(|members| Cluster {
            representative: tr.snapshots[*members.last().expect("non-empty")].clone(),
            members,
        })
        .collect();
    let late = checkpoints.len() / 2;
    Ok(PLimitEstimate {
        x0: start.x0(),
        checkpoints,
        dispersion: max_pairwise(&embeddings[late..], &family),
        snapshots: tr.snapshots,
        clusters,
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::BadParams(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Parameters of an SRB-like scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanParams {
    pub sample_count: usize,
    pub n: usize,
    pub grid_k: usize,
    pub epsilon_cluster: f64,
    pub min_basin_weight: f64,
    pub checkpoint_count: usize,
    /// Refinement depth for candidate entropies; chosen from `n` when absent.
    pub q_max: Option<usize>,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            sample_count: 200,
            n: 100_000,
            grid_k: DEFAULT_GRID,
            epsilon_cluster: DEFAULT_EPSILON_CLUSTER,
            min_basin_weight: DEFAULT_MIN_BASIN_WEIGHT,
            checkpoint_count: DEFAULT_CHECKPOINTS,
            q_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Equal-weight average of the members' terminal measures.
    pub measure: GridMeasure,
    pub basin_weight: f64,
    pub members: Vec<usize>,
    /// Entropy and Lyapunov exponent of the pooled member orbits.
    pub pesin: PesinReport,
    pub atomic: bool,
    pub srb_like: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrbLikeReport {
    pub candidates: Vec<Candidate>,
    /// Sample indices whose late snapshots disagree by more than `epsilon_cluster`.
    pub non_convergent: Vec<usize>,
    pub sample_count: usize,
    pub n: usize,
    pub epsilon_cluster: f64,
    pub q_used: usize,
}

impl SrbLikeReport {
    pub fn flagged(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.srb_like)
    }
}

/// Scan over the Lebesgue sample drawn by [`initial_points`].
pub fn srb_like_candidates(
    map: &CircleMap,
    params: &ScanParams,
    seed: u64,
) -> Result<SrbLikeReport> {
    if params.sample_count < 100 {
        return Err(Error::BadParams(format!(
            "sample_count must be at least 100, got {}",
            params.sample_count
        )));
    }
    srb_like_candidates_from(map, &initial_points(params.sample_count, seed), params)
}

/// Scan over explicitly given starting points.
pub fn srb_like_candidates_from(
    map: &CircleMap,
    starts: &[Start],
    params: &ScanParams,
) -> Result<SrbLikeReport> {
    if starts.is_empty() || params.n == 0 || params.checkpoint_count == 0 {
        return Err(Error::BadParams(
            "need starting points, n >= 1 and a checkpoint".into(),
        ));
    }
    check_epsilon(params.epsilon_cluster)?;
    let base = Partition::branch(map)?;
    let q = match params.q_max {
        Some(q) => q,
        None => supported_depth(base.atom_count(), map.degree(), params.n, MAX_SCAN_DEPTH),
    };
    if q < MIN_DEPTH {
        return Err(Error::UnderSampled {
            samples: params.n,
            cylinders: base.atom_count() * map.degree().pow(MIN_DEPTH as u32 - 1),
            required: base.atom_count()
                * map.degree().pow(MIN_DEPTH as u32 - 1)
                * crate::entropy::SAMPLES_PER_CYLINDER,
        });
    }
    let refined: RefinedPartition = refine(map, &base, q)?;
    let checkpoints = geometric_checkpoints(params.n, params.checkpoint_count);
    let family = TestFamily::new(map, DEFAULT_TRUNCATION)?;
    let table: GridTable = family.grid_table(params.grid_k);

    let traces: Vec<(Trace, Vec<Vec<f64>>)> = starts
        .par_iter()
        .map(|s| {
            let tr = trace(
                map,
                s,
                &checkpoints,
                params.grid_k,
                Some(refined.breakpoints()),
            )?;
            let emb = tr
                .snapshots
                .iter()
                .map(|g| table.embed(g))
                .collect::<Result<Vec<_>>>()?;
            Ok((tr, emb))
        })
        .collect::<Result<_>>()?;

    let late = checkpoints.len() / 2;
    let (convergent, non_convergent): (Vec<usize>, Vec<usize>) = (0..traces.len())
        .partition(|&i| max_pairwise(&traces[i].1[late..], &family) <= params.epsilon_cluster);

    let terminal: Vec<Vec<f64>> = convergent
        .iter()
        .map(|&i| traces[i].1.last().expect("snapshot").clone())
        .collect();
    let mut candidates = Vec::new();
    for group in single_linkage(&terminal, &family, params.epsilon_cluster) {
        let members: Vec<usize> = group.iter().map(|&g| convergent[g]).collect();
        let finals: Vec<GridMeasure> = members
            .iter()
            .map(|&i| traces[i].0.snapshots.last().expect("snapshot").clone())
            .collect();
        let measure = GridMeasure::average(&finals)?;

        let mut pooled = vec![0u64; refined.arc_count()];
        for &i in &members {
            for (p, c) in pooled.iter_mut().zip(&traces[i].0.cylinder_counts) {
                *p += c;
            }
        }
        let total: u64 = pooled.iter().sum();
        check_sampling(Some(total as usize), refined.atom_count_at(q))?;
        let masses: Vec<f64> = pooled.iter().map(|&c| c as f64 / total as f64).collect();
        let estimate = estimate_from_profile(&refined.entropy_profile_from_masses(&masses));
        let lyapunov = members
            .iter()
            .map(|&i| traces[i].0.log_derivative_mean)
            .sum::<f64>()
            / members.len() as f64;

        let basin_weight = members.len() as f64 / starts.len() as f64;
        candidates.push(Candidate {
            atomic: measure.is_atomic_profile(),
            srb_like: basin_weight >= params.min_basin_weight,
            measure,
            basin_weight,
            members,
            pesin: PesinReport::new(lyapunov, &estimate),
        });
    }
    Ok(SrbLikeReport {
        candidates,
        non_convergent,
        sample_count: starts.len(),
        n: params.n,
        epsilon_cluster: params.epsilon_cluster,
        q_used: q,
    })
}

/// Fraction of Lebesgue-sampled `x` with `dist(σₙ(x), μ) < ε`.
pub fn basin_fraction(
    map: &CircleMap,
    mu: &GridMeasure,
    epsilon: f64,
    sample_count: usize,
    n: usize,
    seed: u64,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    if sample_count == 0 || n == 0 {
        return Err(Error::BadParams(
            "sample_count and n must be positive".into(),
        ));
    }
    let distances = terminal_distances(map, mu, &[n], sample_count, seed)?;
    let hits = distances.iter().filter(|d| d[0] < epsilon).count();
    Ok(hits as f64 / sample_count as f64)
}

/// `dist(σ_{n_j}(x_i), reference)` for every sample `i` and checkpoint `j`.
fn terminal_distances(
    map: &CircleMap,
    reference: &GridMeasure,
    checkpoints: &[usize],
    sample_count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let family = TestFamily::new(map, DEFAULT_TRUNCATION)?;
    let table = family.grid_table(reference.cells());
    let target = table.embed(reference)?;
    initial_points(sample_count, seed)
        .par_iter()
        .map(|s| {
            let tr = trace(map, s, checkpoints, reference.cells(), None)?;
            tr.snapshots
                .iter()
                .map(|g| Ok(family.distance(&table.embed(g)?, &target)))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: usize,
    /// Share of samples with `dist(σₙ(x), reference) ≥ ε`.
    pub fraction: f64,
    /// `e^{n(ε − r)}`.
    pub analytic_bound: f64,
}

/// The deviation-decay experiment; requires `0 < ε < r/2`.
pub fn deviation_decay(
    map: &CircleMap,
    reference: &GridMeasure,
    r: f64,
    epsilon: f64,
    n_list: &[usize],
    sample_count: usize,
    seed: u64,
) -> Result<Vec<DecayPoint>> {
    if !(epsilon > 0.0 && epsilon < r / 2.0) {
        return Err(Error::BadParams(format!(
            "need 0 < epsilon < r/2, got epsilon = {epsilon}, r = {r}"
        )));
    }
    if n_list.is_empty() {
        return Err(Error::BadParams("n_list must not be empty".into()));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadParams(
            "n_list must be positive and strictly increasing".into(),
        ));
    }
    if sample_count == 0 {
        return Err(Error::BadParams("sample_count must be positive".into()));
    }
    let distances = terminal_distances(map, reference, n_list, sample_count, seed)?;
    Ok(n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let far = distances.iter().filter(|d| d[j] >= epsilon).count();
            DecayPoint {
                n,
                fraction: far as f64 / sample_count as f64,
                analytic_bound: (n as f64 * (epsilon - r)).exp(),
            }
        })
        .collect())
}

/// True when no fraction rises above its predecessor by more than two binomial
/// standard deviations, `σ = √(p(1−p)/N)` with `p` the pooled pair mean.
pub fn nonincreasing_within_noise(points: &[DecayPoint], sample_count: usize) -> bool {
    points.windows(2).all(|w| {
        let p = 0.5 * (w[0].fraction + w[1].fraction);
        let sigma = (p * (1.0 - p) / sample_count as f64).sqrt();
        w[1].fraction <= w[0].fraction + 2.0 * sigma
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn checkpoints_are_geometric() {
        assert_eq!(
            geometric_checkpoints(10_000, 4),
            vec![1250, 2500, 5000, 10_000]
        );
        assert_eq!(geometric_checkpoints(3, 4), vec![1, 3]);
    }

    #[test]
    fn initial_points_are_deterministic_and_spread() {
        let a = initial_points(200, 5);
        assert_eq!(a, initial_points(200, 5));
        assert_ne!(a, initial_points(200, 6));
        let mut xs: Vec<f64> = a.iter().map(Start::x0).collect();
        xs.sort_by(f64::total_cmp);
        let max_gap = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!(max_gap < 0.03);
    }

    #[test]
    fn fixed_point_has_a_single_atomic_p_limit() {
        let f = CircleMap::linear(2).unwrap();
        let est = p_limit_set(&f, &Start::Point(0.0), 10_000, 6, 256, 0.05).unwrap();
        assert_eq!(est.clusters.len(), 1);
        assert_eq!(est.dispersion, 0.0);
        assert!(est.snapshots.iter().all(|s| s.mass()[0] == 1.0));
    }

    #[test]
    fn period_two_orbit_has_a_single_p_limit() {
        let f = CircleMap::linear(2).unwrap();
        let est = p_limit_set(&f, &Start::Rational { num: 1, den: 3 }, 10_000, 6, 3, 0.05).unwrap();
        assert_eq!(est.clusters.len(), 1);
        let rep = &est.clusters[0].representative;
        assert_abs_diff_eq!(rep.mass()[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.mass()[2], 0.5, epsilon = 1e-12);
        assert!(est.dispersion < 1e-3);
    }

    #[test]
    fn typical_doubling_orbit_settles_near_lebesgue() {
        let f = CircleMap::linear(2).unwrap();
        let est = p_limit_set(
            &f,
            &Start::Typical { x0: 0.41, seed: 42 },
            1_000_000,
            8,
            1024,
            0.05,
        )
        .unwrap();
        assert_eq!(est.clusters.len(), 1);
        assert!(est.dispersion < 0.02, "dispersion {}", est.dispersion);
        let family = TestFamily::with_default_truncation(&f);
        let table = family.grid_table(1024);
        let d = family.distance(
            &table.embed(est.snapshots.last().unwrap()).unwrap(),
            &table.embed(&GridMeasure::uniform(1024).unwrap()).unwrap(),
        );
        assert!(d < 0.01);
    }

    #[test]
    fn p_limit_rejects_short_runs() {
        let f = CircleMap::linear(2).unwrap();
        assert!(p_limit_set(&f, &Start::Point(0.1), 999, 4, 64, 0.05).is_err());
    }

    #[test]
    fn basin_fraction_examples() {
        let f = CircleMap::linear(2).unwrap();
        let lebesgue = GridMeasure::uniform(1024).unwrap();
        let frac = basin_fraction(&f, &lebesgue, 0.05, 200, 100_000, 3).unwrap();
        assert!(frac >= 0.95, "{frac}");

        let mut atom = vec![0.0; 1024];
        atom[0] = 1.0;
        let delta = GridMeasure::new(atom).unwrap();
        let frac = basin_fraction(&f, &delta, 0.05, 200, 100_000, 3).unwrap();
        assert!(frac <= 0.02, "{frac}");

        let family = TestFamily::with_default_truncation(&f);
        let frac = basin_fraction(&f, &delta, family.diameter_bound(), 100, 1000, 3).unwrap();
        assert_eq!(frac, 1.0);
    }

    #[test]
    fn basin_fraction_grows_with_epsilon() {
        let f = CircleMap::smooth_perturbed(2, 0.1).unwrap();
        let lebesgue = GridMeasure::uniform(256).unwrap();
        let mut last = 0.0;
        for eps in [0.005, 0.01, 0.02, 0.04, 0.08] {
            let frac = basin_fraction(&f, &lebesgue, eps, 100, 2000, 8).unwrap();
            assert!(frac >= last);
            last = frac;
        }
    }

    #[test]
    fn decay_rejects_bad_hypotheses() {
        let f = CircleMap::linear(2).unwrap();
        let leb = GridMeasure::uniform(64).unwrap();
        assert!(deviation_decay(&f, &leb, 0.2, 0.1, &[10], 10, 0).is_err());
        assert!(deviation_decay(&f, &leb, 0.2, 0.05, &[], 10, 0).is_err());
        assert!(deviation_decay(&f, &leb, 0.2, 0.05, &[100, 10], 10, 0).is_err());
    }

    #[test]
    fn point_masses_are_far_from_lebesgue() {
        let f = CircleMap::linear(2).unwrap();
        let leb = GridMeasure::uniform(1024).unwrap();
        let pts = deviation_decay(&f, &leb, 0.2, 0.05, &[1], 300, 4).unwrap();
        assert!(pts[0].fraction > 0.95);
        assert_abs_diff_eq!(pts[0].analytic_bound, (-0.15f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn doubling_scan_finds_lebesgue() {
        let f = CircleMap::linear(2).unwrap();
        let params = ScanParams::default();
        let report = srb_like_candidates(&f, &params, 1).unwrap();
        assert_eq!(report.candidates.len(), 1);
        let c = &report.candidates[0];
        assert!(c.basin_weight > 0.95);
        assert!(c.srb_like && !c.atomic);
        let lebesgue = GridMeasure::uniform(params.grid_k).unwrap();
        assert!(c.measure.l1_distance(&lebesgue).unwrap() < 0.05);
        assert!(c.pesin.residual.abs() < 0.05);
    }

    #[test]
    fn tripling_scan_recovers_log3() {
        let f = CircleMap::linear(3).unwrap();
        let report = srb_like_candidates(&f, &ScanParams::default(), 2).unwrap();
        assert_eq!(report.candidates.len(), 1);
        let h = report.candidates[0].pesin.entropy_est;
        assert!((h - 3f64.ln()).abs() < 0.05 * 3f64.ln(), "{h}");
    }

    #[test]
    fn injected_fixed_point_forms_an_unflagged_atomic_cluster() {
        let f = CircleMap::linear(2).unwrap();
        let mut starts = initial_points(199, 4);
        starts.push(Start::Point(0.0));
        let params = ScanParams {
            n: 20_000,
            ..ScanParams::default()
        };
        let report = srb_like_candidates_from(&f, &starts, &params).unwrap();
        let atomic: Vec<&Candidate> = report.candidates.iter().filter(|c| c.atomic).collect();
        assert_eq!(atomic.len(), 1);
        assert!(!atomic[0].srb_like);
        assert!(atomic[0].pesin.residual > ATOMIC_RESIDUAL_FLOOR);
        assert_abs_diff_eq!(
            atomic[0].pesin.residual,
            std::f64::consts::LN_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn scans_are_reproducible() {
        let f = CircleMap::nonhoelder(2, 0.05).unwrap();
        let params = ScanParams {
            n: 20_000,
            ..ScanParams::default()
        };
        let a = srb_like_candidates(&f, &params, 9).unwrap();
        let b = srb_like_candidates(&f, &params, 9).unwrap();
        assert_eq!(a, b);
    }
}
