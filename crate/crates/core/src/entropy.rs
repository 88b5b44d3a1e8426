//! Interval partitions of the circle, their dynamical refinements
//! `𝓟^q = 𝓟 ∨ f⁻¹𝓟 ∨ … ∨ f^{-(q−1)}𝓟`, Shannon entropy of partitions, and
//! the metric-entropy estimate `H(𝓟^q, μ) / q`.
//!
//! The refinement is built geometrically: the breakpoints of `𝓟^q` are the
//! pullbacks of the base breakpoints under `f^{-j}`, `j < q`, obtained from the
//! inverse branches. Each arc between consecutive breakpoints is labelled with
//! the itinerary (word) of its midpoint. Masses of `𝓟^q` atoms are sums over
//! arcs sharing a word; coarser levels group arcs by word prefix.
//!
//! For the entropy limit to equal `h_μ` the base partition has to be
//! generating. We accept any partition whose atoms are each mapped
//! injectively by `f`: cylinders then shrink at least geometrically under
//! backward iteration. The branch partition cut at the preimages of the fixed
//! point 0 is the canonical choice; it is Markov, so depth-`q` cylinders
//! number exactly `dᵠ` and `H(𝓟^q)/q` carries only an `O(1/q)` bias.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circle_map::{canonical, CircleMap};
use crate::error::{Error, Result};
use crate::measures::{locate_arc, Measure};

/// Breakpoints closer than this are merged when building refinements.
pub const MERGE_TOLERANCE: f64 = 1e-13;
/// Empirical measures need this many points per cylinder.
pub const SAMPLES_PER_CYLINDER: usize = 100;
/// `|residual|` below which Pesin's formula is reported as holding.
pub const PESIN_TOLERANCE: f64 = 0.05;
/// Smallest depth accepted by [`entropy_estimate`].
pub const MIN_DEPTH: usize = 4;

/// A closed-open arc `[start, start + length)` of the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub length: f64,
}

impl Arc {
    pub fn midpoint(&self) -> f64 {
        canonical(self.start + 0.5 * self.length)
    }

    pub fn contains(&self, x: f64) -> bool {
        canonical(x - self.start) < self.length
    }
}

/// A finite partition of the circle into arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    breakpoints: Vec<f64>,
}

impl Partition {
    /// Atoms are the arcs between consecutive breakpoints, the last one wrapping through 0.
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::BadParams(
                "a partition needs at least 2 breakpoints".into(),
            ));
        }
        if let Some(&x) = breakpoints.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::Domain(x));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadParams(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Partition { breakpoints })
    }

    /// `k` arcs of length `1/k` starting at `offset`.
    pub fn uniform(k: usize, offset: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::BadParams(format!("need at least 2 atoms, got {k}")));
        }
        if !(0.0..1.0 / k as f64).contains(&offset) {
            return Err(Error::BadParams(format!(
                "offset {offset} outside [0, 1/{k})"
            )));
        }
        Self::new((0..k).map(|i| offset + i as f64 / k as f64).collect())
    }

    /// The branch (Markov) partition at the preimages of the fixed point 0.
    pub fn branch(map: &CircleMap) -> Result<Self> {
        Self::new(map.branch_points()?)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn atom_count(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn atom(&self, i: usize) -> Arc {
        let m = self.breakpoints.len();
        let start = self.breakpoints[i];
        let end = if i + 1 < m {
            self.breakpoints[i + 1]
        } else {
            self.breakpoints[0] + 1.0
        };
        Arc {
            start,
            length: end - start,
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = Arc> + '_ {
        (0..self.atom_count()).map(|i| self.atom(i))
    }

    pub fn diameter(&self) -> f64 {
        self.atoms().map(|a| a.length).fold(0.0, f64::max)
    }

    /// Index of the atom containing `x`; breakpoints belong to the atom on their right.
    pub fn locate(&self, x: f64) -> usize {
        locate_arc(&self.breakpoints, x)
    }

    /// True when `f` is injective on every atom, i.e. the lift grows by at
    /// most 1 across each atom.
    pub fn injective_under(&self, map: &CircleMap) -> bool {
        let d = map.degree() as f64;
        self.atoms().all(|a| {
            let end = a.start + a.length;
            let growth = if end <= 1.0 {
                map.lift(end) - map.lift(a.start)
            } else {
                d - map.lift(a.start) + map.lift(end - 1.0)
            };
            growth <= 1.0 + 1e-12
        })
    }
}

/// `make_partition(k, offset)`.
pub fn make_partition(k: usize, offset: f64) -> Result<Partition> {
    Partition::uniform(k, offset)
}

/// The dynamical refinement `𝓟^q` as labelled arcs.
#[derive(Debug, Clone)]
pub struct RefinedPartition {
    base: Partition,
    depth: usize,
    breakpoints: Vec<f64>,
    words: Vec<Vec<u16>>,
    /// `prefix_ids[q-1][arc]` numbers the distinct length-`q` prefixes.
    prefix_ids: Vec<Vec<usize>>,
    prefix_counts: Vec<usize>,
}

impl RefinedPartition {
    pub fn base(&self) -> &Partition {
        &self.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Sorted arc endpoints; arc `i` is `[b_i, b_{i+1})` and the last one wraps.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn arc_count(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn arc(&self, i: usize) -> Arc {
        let m = self.breakpoints.len();
        let start = self.breakpoints[i];
        let end = if i + 1 < m {
            self.breakpoints[i + 1]
        } else {
            self.breakpoints[0] + 1.0
        };
        Arc {
            start,
            length: end - start,
        }
    }

    /// Symbol word of arc `i`: the base atoms visited by `x, f(x), …, f^{q−1}(x)`.
    pub fn word(&self, i: usize) -> &[u16] {
        &self.words[i]
    }

    /// Number of distinct atoms of `𝓟^q` for `q ≤ depth`.
    pub fn atom_count_at(&self, q: usize) -> usize {
        self.prefix_counts[q - 1]
    }

    pub fn diameter(&self) -> f64 {
        (0..self.arc_count())
            .map(|i| self.arc(i).length)
            .fold(0.0, f64::max)
    }

    /// Arc containing `x`.
    pub fn locate(&self, x: f64) -> usize {
        locate_arc(&self.breakpoints, x)
    }

    /// `H(𝓟^q, μ)` for `q = 1..=depth`, from masses of the depth-`depth` arcs.
    pub fn entropy_profile_from_masses(&self, arc_masses: &[f64]) -> Vec<f64> {
        (0..self.depth)
            .map(|level| {
                let mut grouped = vec![0.0; self.prefix_counts[level]];
                for (&id, &m) in self.prefix_ids[level].iter().zip(arc_masses) {
                    grouped[id] += m;
                }
                shannon(&grouped)
            })
            .collect()
    }

    pub fn entropy_profile<M: Measure>(&self, measure: &M) -> Vec<f64> {
        self.entropy_profile_from_masses(&measure.arc_masses(&self.breakpoints))
    }
}

/// Builds `𝓟^q` by pulling breakpoints back through the inverse branches.
pub fn refine(map: &CircleMap, base: &Partition, q: usize) -> Result<RefinedPartition> {
    if q == 0 {
        return Err(Error::BadParams(
            "refinement depth must be at least 1".into(),
        ));
    }
    let mut level: Vec<f64> = base.breakpoints().to_vec();
    let mut all = level.clone();
    for _ in 1..q {
        let mut next = Vec::with_capacity(level.len() * map.degree());
        for &y in &level {
            next.extend(map.inverse_branches(y)?.points);
        }
        next = merge_sorted(next);
        all.extend_from_slice(&next);
        level = next;
    }
    let breakpoints = merge_sorted(all);

    let words: Vec<Vec<u16>> = (0..breakpoints.len())
        .map(|i| {
            let end = breakpoints
                .get(i + 1)
                .copied()
                .unwrap_or(breakpoints[0] + 1.0);
            let mut x = canonical(0.5 * (breakpoints[i] + end));
            let mut word = Vec::with_capacity(q);
            for _ in 0..q {
                word.push(base.locate(x) as u16);
                x = map.apply(x);
            }
            word
        })
        .collect();

    let mut prefix_ids = Vec::with_capacity(q);
    let mut prefix_counts = Vec::with_capacity(q);
    for len in 1..=q {
        let mut ids: HashMap<&[u16], usize> = HashMap::new();
        let assigned: Vec<usize> = words
            .iter()
            .map(|w| {
                let next = ids.len();
                *ids.entry(&w[..len]).or_insert(next)
            })
            .collect();
        prefix_counts.push(ids.len());
        prefix_ids.push(assigned);
    }

    Ok(RefinedPartition {
        base: base.clone(),
        depth: q,
        breakpoints,
        words,
        prefix_ids,
        prefix_counts,
    })
}

fn merge_sorted(mut points: Vec<f64>) -> Vec<f64> {
    points.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(points.len());
    for p in points {
        match out.last() {
            Some(&last) if p - last < MERGE_TOLERANCE => {}
            _ => out.push(p),
        }
    }
    // a point just below 1 coincides with 0 on the circle
    if out.len() > 1 && out[0] + 1.0 - out[out.len() - 1] < MERGE_TOLERANCE {
        out.pop();
    }
    out
}

/// `−Σ pᵢ log pᵢ` with `0·log 0 = 0`.
pub fn shannon(masses: &[f64]) -> f64 {
    masses
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        + 0.0 // no negative zero for point masses
}

/// `H(𝓟, μ)` for a base partition.
pub fn partition_entropy<M: Measure>(partition: &Partition, measure: &M) -> f64 {
    shannon(&measure.arc_masses(partition.breakpoints()))
}

/// `H(𝓟^q, μ)` at the full depth of a refinement.
pub fn refined_entropy<M: Measure>(refined: &RefinedPartition, measure: &M) -> f64 {
    *refined
        .entropy_profile(measure)
        .last()
        .expect("refinement depth is at least 1")
}

/// Result of [`entropy_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// `H(𝓟^{q_used}, μ) / q_used`.
    pub entropy_est: f64,
    pub q_used: usize,
    /// `H(𝓟^q, μ) / q` for `q = 1..=q_used`.
    pub diagnostics: Vec<f64>,
}

impl EntropyEstimate {
    /// An externally supplied entropy value with no refinement diagnostics.
    pub fn given(entropy_est: f64) -> Self {
        EntropyEstimate {
            entropy_est,
            q_used: 0,
            diagnostics: Vec::new(),
        }
    }
}

/// Deepest `q ≤ cap` for which a Markov base partition with `atoms` atoms
/// leaves at least [`SAMPLES_PER_CYLINDER`] points per cylinder.
pub fn supported_depth(atoms: usize, degree: usize, samples: usize, cap: usize) -> usize {
    let mut q = 0;
    let mut cylinders = atoms;
    while q < cap && cylinders.saturating_mul(SAMPLES_PER_CYLINDER) <= samples {
        q += 1;
        cylinders = cylinders.saturating_mul(degree);
    }
    q
}

/// Estimates `h_μ` by `H(𝓟^{q_max}, μ) / q_max`, keeping the whole profile.
pub fn entropy_estimate<M: Measure>(
    map: &CircleMap,
    measure: &M,
    base: &Partition,
    q_max: usize,
) -> Result<EntropyEstimate> {
    if q_max < MIN_DEPTH {
        return Err(Error::BadParams(format!(
            "q_max must be at least {MIN_DEPTH}, got {q_max}"
        )));
    }
    if !base.injective_under(map) {
        return Err(Error::BadParams(
            "every base atom must be mapped injectively (use a finer or branch-aligned partition)"
                .into(),
        ));
    }
    let refined = refine(map, base, q_max)?;
    check_sampling(measure.sample_size(), refined.atom_count_at(q_max))?;
    let profile = refined.entropy_profile(measure);
    Ok(estimate_from_profile(&profile))
}

pub(crate) fn check_sampling(samples: Option<usize>, cylinders: usize) -> Result<()> {
    if let Some(n) = samples {
        let required = cylinders * SAMPLES_PER_CYLINDER;
        if n < required {
            return Err(Error::UnderSampled {
                samples: n,
                cylinders,
                required,
            });
        }
    }
    Ok(())
}

pub(crate) fn estimate_from_profile(profile: &[f64]) -> EntropyEstimate {
    let diagnostics: Vec<f64> = profile
        .iter()
        .enumerate()
        .map(|(i, h)| h / (i + 1) as f64)
        .collect();
    EntropyEstimate {
        entropy_est: *diagnostics.last().unwrap_or(&0.0),
        q_used: profile.len(),
        diagnostics,
    }
}

/// Entropy, Lyapunov exponent and their difference for one measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PesinReport {
    /// `∫ log|f'| dμ`.
    pub lyapunov: f64,
    pub entropy_est: f64,
    /// `lyapunov − entropy_est`; nonnegative up to estimator error.
    pub residual: f64,
    pub q_used: usize,
    pub diagnostics: Vec<f64>,
    pub pesin_holds: bool,
    /// Entropy rate of the Ulam chain, when the measure came from one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub markov_entropy: Option<f64>,
}

impl PesinReport {
    pub fn new(lyapunov: f64, estimate: &EntropyEstimate) -> Self {
        let residual = lyapunov - estimate.entropy_est;
        PesinReport {
            lyapunov,
            entropy_est: estimate.entropy_est,
            residual,
            q_used: estimate.q_used,
            diagnostics: estimate.diagnostics.clone(),
            pesin_holds: residual.abs() < PESIN_TOLERANCE,
            markov_entropy: None,
        }
    }
}

/// `∫ log|f'| dμ`.
pub fn lyapunov_exponent<M: Measure>(map: &CircleMap, measure: &M) -> Result<f64> {
    measure.integrate(|x| map.log_derivative(x))
}

/// Compares the entropy estimate with the Lyapunov exponent of the measure.
pub fn pesin_residual<M: Measure>(
    map: &CircleMap,
    measure: &M,
    estimate: &EntropyEstimate,
) -> Result<PesinReport> {
    Ok(PesinReport::new(lyapunov_exponent(map, measure)?, estimate))
}
