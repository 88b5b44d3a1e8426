//! Ulam discretization of the push-forward operator, its stationary vector,
//! the entropy rate of the resulting Markov chain, and the pressure
//! `P = h − ∫ log|f'| dπ` of the potential `ψ = −log|f'|`.
//!
//! `entries[i][j]` is the Lebesgue fraction of cell `i` that `f` sends into
//! cell `j`. Cells are either the `k` uniform cells of a [`GridMeasure`] or the
//! depth-`q` cylinders of the branch partition ([`UlamMatrix::markov`]).
//!
//! The entropy rate of a uniform-grid chain does not converge to the metric
//! entropy of a nonlinear map: the image of a cell straddles cell boundaries
//! at an essentially random offset, which adds about `½·E[H_binary(u)]` nats
//! per step regardless of `k`. On Markov cells every image is an exact union
//! of cells, and the rate converges to `h`. [`pressure_estimate`] therefore
//! uses Markov cells for nonlinear maps. Linear maps are Markov on any
//! uniform grid.
//!
//! Assembly runs in parallel; results are collected in cell order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle_map::CircleMap;
use crate::entropy::{refine, Partition};
use crate::error::{Error, Result};
use crate::measures::{GridMeasure, Measure};

/// Row sums must equal 1 within this tolerance.
pub const ROW_TOLERANCE: f64 = 1e-10;
/// Power iteration stops once an L1 step falls below this.
pub const POWER_TOLERANCE: f64 = 1e-12;
pub const MAX_POWER_ITERATIONS: usize = 100_000;
pub const DEFAULT_SAMPLES_PER_CELL: usize = 256;
/// Slack on the `K_r` membership test for rounding in exact inputs.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// How transition fractions are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Assembly {
    /// Exact interval-image intersection through the monotone lift.
    Exact,
    /// `samples_per_cell` jittered midpoints per cell, images binned.
    Stratified { samples_per_cell: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellLayout {
    Uniform,
    Markov,
}

/// Row-stochastic transition matrix in row-sparse storage.
#[derive(Debug, Clone)]
pub struct UlamMatrix {
    layout: CellLayout,
    edges: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    stationary: Option<Vec<f64>>,
}

/// `ulam_matrix(map, k, assembly)` on `k` uniform cells.
pub fn ulam_matrix(map: &CircleMap, k: usize, assembly: Assembly) -> Result<UlamMatrix> {
    match assembly {
        Assembly::Exact => UlamMatrix::exact(map, k),
        Assembly::Stratified {
            samples_per_cell,
            seed,
        } => UlamMatrix::stratified(map, k, samples_per_cell, seed),
    }
}

impl UlamMatrix {
    pub fn exact(map: &CircleMap, k: usize) -> Result<Self> {
        check_cells(k)?;
        let edges = uniform_edges(k);
        let rows = exact_rows(map, &edges)?;
        Self::finish(CellLayout::Uniform, edges, rows)
    }

    pub fn stratified(
        map: &CircleMap,
        k: usize,
        samples_per_cell: usize,
        seed: u64,
    ) -> Result<Self> {
        check_cells(k)?;
        if samples_per_cell == 0 {
            return Err(Error::BadParams("samples_per_cell must be positive".into()));
        }
        let edges = uniform_edges(k);
        let width = 1.0 / k as f64;
        let sub = width / samples_per_cell as f64;
        // one random stream per row keeps rows independent of scheduling
        let rows = (0..k)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let mut counts: Vec<(usize, f64)> = Vec::new();
                for m in 0..samples_per_cell {
                    let jitter: f64 = rng.gen_range(-0.5..0.5);
                    let x = i as f64 * width + (m as f64 + 0.5 + jitter) * sub;
                    let j = locate_cell(&edges, map.apply(x.min(1.0 - f64::EPSILON)));
                    add_entry(&mut counts, j, 1.0);
                }
                counts
            })
            .collect();
        Self::finish(CellLayout::Uniform, edges, rows)
    }

    /// Cells are the `d^depth` cylinders of the branch partition.
    pub fn markov(map: &CircleMap, depth: usize) -> Result<Self> {
        let base = Partition::branch(map)?;
        let refined = refine(map, &base, depth)?;
        let mut edges = refined.breakpoints().to_vec();
        if edges[0] != 0.0 {
            return Err(Error::BadParams(
                "branch partition must start at the fixed point 0".into(),
            ));
        }
        edges.push(1.0);
        let rows = exact_rows(map, &edges)?;
        Self::finish(CellLayout::Markov, edges, rows)
    }

    fn finish(
        layout: CellLayout,
        edges: Vec<f64>,
        mut rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let total: f64 = row.iter().map(|&(_, p)| p).sum();
            if !(total > 0.0) {
                return Err(Error::NonFinite("assembling an empty Ulam row"));
            }
            for entry in row.iter_mut() {
                entry.1 /= total;
            }
        }
        let matrix = UlamMatrix {
            layout,
            edges,
            rows,
            stationary: None,
        };
        debug_assert!(matrix.max_row_defect() < ROW_TOLERANCE);
        Ok(matrix)
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn layout(&self) -> CellLayout {
        self.layout
    }

    /// Cell boundaries `0 = e₀ < … < e_k = 1`.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Nonzero entries `(j, p_ij)` of row `i`, sorted by `j`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c == j)
            .map_or(0.0, |&(_, p)| p)
    }

    /// `max_i |Σ_j p_ij − 1|`.
    pub fn max_row_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `(i, j, p_ij)` for every nonzero entry in row-major order.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, p)| (i, j, p)))
    }

    /// `π ↦ πP`.
    pub fn apply_left(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.k()];
        for (row, &w) in self.rows.iter().zip(pi) {
            if w == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += w * p;
            }
        }
        out
    }

    /// Power iteration from the uniform vector. A period-2 oscillation is
    /// resolved by averaging two successive iterates.
    pub fn solve(&mut self) -> Result<&[f64]> {
        if self.stationary.is_none() {
            self.stationary = Some(self.power_iterate()?);
        }
        Ok(self.stationary.as_deref().expect("just solved"))
    }

    fn power_iterate(&self) -> Result<Vec<f64>> {
        let k = self.k();
        let mut prev: Option<Vec<f64>> = None;
        let mut pi = vec![1.0 / k as f64; k];
        let mut last_step = f64::INFINITY;
        for _ in 0..MAX_POWER_ITERATIONS {
            let mut next = self.apply_left(&pi);
            let total: f64 = next.iter().sum();
            next.iter_mut().for_each(|v| *v /= total);
            last_step = l1(&next, &pi);
            if last_step < POWER_TOLERANCE {
                return Ok(next);
            }
            if let Some(p) = &prev {
                if l1(&next, p) < POWER_TOLERANCE {
                    return Ok(next.iter().zip(&pi).map(|(a, b)| 0.5 * (a + b)).collect());
                }
            }
            prev = Some(std::mem::replace(&mut pi, next));
        }
        Err(Error::NoConvergence {
            iterations: MAX_POWER_ITERATIONS,
            last_step,
        })
    }

    pub fn stationary(&self) -> Option<&[f64]> {
        self.stationary.as_deref()
    }

    /// `‖πP − π‖₁` for the solved vector.
    pub fn stationarity_residual(&self) -> Result<f64> {
        let pi = self.stationary.as_deref().ok_or(Error::NotSolved)?;
        Ok(l1(&self.apply_left(pi), pi))
    }

    /// The stationary vector as a measure on `k` uniform cells. Markov cells
    /// are projected with their density held constant on each cell.
    pub fn stationary_measure(&mut self) -> Result<GridMeasure> {
        let k = self.k();
        self.solve()?;
        let pi = self.stationary.as_deref().expect("solved");
        match self.layout {
            CellLayout::Uniform => GridMeasure::from_weights(pi.to_vec()),
            CellLayout::Markov => GridMeasure::from_cells(&self.edges, pi, k),
        }
    }

    /// `−Σ_i π_i Σ_j p_ij log p_ij`.
    pub fn markov_entropy(&self) -> Result<f64> {
        let pi = self.stationary.as_deref().ok_or(Error::NotSolved)?;
        Ok(self
            .rows
            .iter()
            .zip(pi)
            .map(|(row, &w)| {
                w * row
                    .iter()
                    .filter(|&&(_, p)| p > 0.0)
                    .map(|&(_, p)| -p * p.ln())
                    .sum::<f64>()
            })
            .sum())
    }

    /// `Σ_i π_i log|f'(mᵢ)|` with `mᵢ` the midpoint of cell `i`.
    pub fn lyapunov(&self, map: &CircleMap) -> Result<f64> {
        let pi = self.stationary.as_deref().ok_or(Error::NotSolved)?;
        Ok(pi
            .iter()
            .enumerate()
            .map(|(i, &w)| w * map.log_derivative(0.5 * (self.edges[i] + self.edges[i + 1])))
            .sum())
    }

    /// Builds a matrix from explicit rows on uniform cells, normalizing each row.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let k = rows.len();
        check_cells(k)?;
        if rows.iter().flatten().any(|&(j, p)| j >= k || !(p >= 0.0)) {
            return Err(Error::BadParams(
                "row entries must be nonnegative and in range".into(),
            ));
        }
        Self::finish(CellLayout::Uniform, uniform_edges(k), rows)
    }
}

fn check_cells(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::BadParams(format!("need at least 2 cells, got {k}")));
    }
    Ok(())
}

fn uniform_edges(k: usize) -> Vec<f64> {
    (0..=k).map(|i| i as f64 / k as f64).collect()
}

fn locate_cell(edges: &[f64], x: f64) -> usize {
    let k = edges.len() - 1;
    edges[..k].partition_point(|&e| e <= x).saturating_sub(1)
}

fn add_entry(row: &mut Vec<(usize, f64)>, j: usize, w: f64) {
    match row.iter_mut().find(|(c, _)| *c == j) {
        Some(entry) => entry.1 += w,
        None => row.push((j, w)),
    }
}

fn exact_rows(map: &CircleMap, edges: &[f64]) -> Result<Vec<Vec<(usize, f64)>>> {
    let k = edges.len() - 1;
    let d = map.degree();
    // every point where the source or the target cell can change
    let preimages: Vec<f64> = (0..d * k)
        .into_par_iter()
        .map(|idx| map.lift_inverse(edges[idx % k] + (idx / k) as f64))
        .collect::<Result<_>>()?;
    let mut cuts: Vec<f64> = edges.to_vec();
    cuts.extend(preimages);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|b, a| *b - *a < 1e-15);
    if *cuts.last().expect("non-empty") < 1.0 {
        cuts.push(1.0);
    }

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let i = locate_cell(edges, mid);
        let j = locate_cell(edges, map.apply(mid));
        add_entry(&mut rows[i], j, (b - a) / (edges[i + 1] - edges[i]));
    }
    Ok(rows)
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Markov entropy, Lyapunov exponent and pressure of the Ulam chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    pub markov_entropy: f64,
    pub lyapunov: f64,
    /// `markov_entropy − lyapunov`.
    pub pressure: f64,
    pub k: usize,
    pub layout: CellLayout,
}

/// Pressure of `ψ = −log|f'|` from an Ulam chain with `k` cells.
///
/// Linear maps use `k` uniform cells. Other maps use the branch-partition
/// cylinders, so `k` must be a power of the degree.
pub fn pressure_estimate(map: &CircleMap, k: usize) -> Result<PressureEstimate> {
    let mut matrix = if map.is_linear() {
        UlamMatrix::exact(map, k)?
    } else {
        let depth = exact_log(k, map.degree()).ok_or_else(|| {
            Error::BadParams(format!(
                "k = {k} must be a power of the degree {} for a nonlinear map",
                map.degree()
            ))
        })?;
        UlamMatrix::markov(map, depth)?
    };
    matrix.solve()?;
    let markov_entropy = matrix.markov_entropy()?;
    let lyapunov = matrix.lyapunov(map)?;
    Ok(PressureEstimate {
        markov_entropy,
        lyapunov,
        pressure: markov_entropy - lyapunov,
        k,
        layout: matrix.layout(),
    })
}

fn exact_log(k: usize, base: usize) -> Option<usize> {
    let mut q = 0;
    let mut v = 1usize;
    while v < k {
        v = v.checked_mul(base)?;
        q += 1;
    }
    (v == k && q >= 1).then_some(q)
}

/// Outcome of a `K_r` membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrVerdict {
    pub member: bool,
    /// `entropy_est − ∫ log|f'| dμ + r`; membership means a nonnegative margin.
    pub margin: f64,
}

/// Tests `h_μ + ∫ψ dμ ≥ −r`. With `r = 0` this is the equilibrium-state test.
pub fn kr_membership<M: Measure>(
    map: &CircleMap,
    measure: &M,
    r: f64,
    entropy_est: f64,
) -> Result<KrVerdict> {
    if !(r >= 0.0) {
        return Err(Error::BadParams(format!("r must be nonnegative, got {r}")));
    }
    let lyapunov = measure.integrate(|x| map.log_derivative(x))?;
    let margin = entropy_est - lyapunov + r;
    Ok(KrVerdict {
        member: margin >= -MEMBERSHIP_SLACK,
        margin,
    })
}
