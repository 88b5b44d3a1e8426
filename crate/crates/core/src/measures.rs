//! Probability measures on the circle and the series weak* metric.
//!
//! Two representations are used throughout: [`EmpiricalMeasure`], a weighted
//! sum of point masses (the empirical average `σₙ(x) = (1/n) Σ δ_{fʲ(x)}` is
//! the main instance), and [`GridMeasure`], a histogram on `k` uniform cells.
//!
//! The metric is
//!
//! ```text
//! dist(μ, ν) = Σ_{i=0}^{I} 2^{-i} |∫φᵢ dμ − ∫φᵢ dν|
//! ```
//!
//! with `φ₀ = −log|f'|` and, for `i ≥ 1`, the trigonometric functions
//! `(1 + cos 2πmx)/2` and `(1 + sin 2πmx)/2` for `m = 1, 2, …`, interleaved in
//! that order. All `φᵢ`, `i ≥ 1`, take values in `[0, 1]`. The series is
//! truncated at `I` terms; the omitted tail is at most `2^{-I}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circle_map::{CircleMap, Start};
use crate::error::{Error, Result};

/// Tolerance on total mass.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Default truncation of the metric series.
pub const DEFAULT_TRUNCATION: usize = 32;
/// Smallest truncation accepted by [`TestFamily::new`].
pub const MIN_TRUNCATION: usize = 16;

/// Anything that can integrate a function and report the mass of arcs.
pub trait Measure {
    /// `∫ f dμ`. Fails if `f` is non-finite on the support.
    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64>;

    /// Masses of the arcs `[b₀, b₁), …, [b_{m−1}, b₀ + 1)` cut by the sorted
    /// breakpoints `b` in `[0, 1)`. A point lying on a breakpoint belongs to
    /// the arc on its right.
    fn arc_masses(&self, breakpoints: &[f64]) -> Vec<f64>;

    fn total_mass(&self) -> f64;

    /// Number of sample points behind the measure, if it is a sample.
    fn sample_size(&self) -> Option<usize> {
        None
    }
}

/// Index of the arc containing `x` under the right-atom rule.
#[inline]
pub(crate) fn locate_arc(breakpoints: &[f64], x: f64) -> usize {
    let idx = breakpoints.partition_point(|&b| b <= x);
    if idx == 0 {
        breakpoints.len() - 1
    } else {
        idx - 1
    }
}

/// Weighted point masses; weights sum to 1.
///
/// Measures built by [`EmpiricalMeasure::uniform`] or
/// [`EmpiricalMeasure::from_orbit`] count as samples and report a sample
/// size; explicitly weighted atoms are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<f64>,
    weights: Vec<f64>,
    sampled: bool,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::BadParams(format!(
                "need matching non-empty points/weights, got {} and {}",
                points.len(),
                weights.len()
            )));
        }
        if let Some(&x) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return Err(Error::Domain(x));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::BadParams(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !mass_is_one(total, weights.len()) {
            return Err(Error::BadParams(format!("weights sum to {total}, not 1")));
        }
        Ok(EmpiricalMeasure {
            points,
            weights,
            sampled: false,
        })
    }

    /// Equal weights on every point; repeated points keep their multiplicity.
    pub fn uniform(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::BadParams("empty point set".into()));
        }
        let w = 1.0 / n as f64;
        let weights = vec![w; n];
        let total: f64 = weights.iter().sum();
        // renormalize the last weight so the sum is 1 to rounding
        let mut weights = weights;
        weights[n - 1] += 1.0 - total;
        Ok(EmpiricalMeasure {
            sampled: true,
            ..Self::new(points, weights)?
        })
    }

    pub fn dirac(x: f64) -> Result<Self> {
        Self::new(vec![x], vec![1.0])
    }

    /// The empirical average of `n` orbit points after `burn_in` iterates.
    pub fn from_orbit(map: &CircleMap, start: &Start, n: usize, burn_in: usize) -> Result<Self> {
        Self::uniform(map.orbit_from(start, n, burn_in)?)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `f*ν`: every support point moves to its image, weights unchanged.
    pub fn pushforward(&self, map: &CircleMap) -> EmpiricalMeasure {
        EmpiricalMeasure {
            points: self.points.iter().map(|&x| map.apply(x)).collect(),
            weights: self.weights.clone(),
            sampled: self.sampled,
        }
    }

    /// Histogram on `k` uniform cells: cell `i` holds the weight of `[i/k, (i+1)/k)`.
    pub fn to_grid(&self, k: usize) -> Result<GridMeasure> {
        if k < 2 {
            return Err(Error::BadParams(format!(
                "grid needs at least 2 cells, got {k}"
            )));
        }
        let mut mass = vec![0.0; k];
        if self.sampled {
            // equal weights: count, then divide once
            for &x in &self.points {
                mass[cell_of(x, k)] += 1.0;
            }
        } else {
            for (&x, &w) in self.points.iter().zip(&self.weights) {
                mass[cell_of(x, k)] += w;
            }
        }
        GridMeasure::from_weights(mass)
    }
}

impl Measure for EmpiricalMeasure {
    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite("integrating over an empirical measure"));
            }
            acc += w * v;
        }
        Ok(acc)
    }

    fn arc_masses(&self, breakpoints: &[f64]) -> Vec<f64> {
        let mut mass = vec![0.0; breakpoints.len()];
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            mass[locate_arc(breakpoints, x)] += w;
        }
        mass
    }

    fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn sample_size(&self) -> Option<usize> {
        self.sampled.then_some(self.points.len())
    }
}

/// Total mass check; naive summation of `n` terms drifts by about `n·ε`.
fn mass_is_one(total: f64, n: usize) -> bool {
    (total - 1.0).abs() <= MASS_TOLERANCE.max(4.0 * n as f64 * f64::EPSILON)
}

#[inline]
pub(crate) fn cell_of(x: f64, k: usize) -> usize {
    ((x * k as f64) as usize).min(k - 1)
}

/// Probability masses on `k` uniform cells `[i/k, (i+1)/k)`.
///
/// Integration evaluates the integrand at cell midpoints (error `O(1/k)` for
/// Lipschitz integrands). Arc masses treat the density as constant on each cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    mass: Vec<f64>,
}

impl GridMeasure {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::BadParams(format!(
                "grid needs at least 2 cells, got {}",
                mass.len()
            )));
        }
        if mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::BadParams(
                "grid masses must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = mass.iter().sum();
        if !mass_is_one(total, mass.len()) {
            return Err(Error::BadParams(format!(
                "grid masses sum to {total}, not 1"
            )));
        }
        Ok(GridMeasure { mass })
    }

    /// Normalizes nonnegative weights to a probability vector.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::BadParams(
                "weights must have positive finite total".into(),
            ));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// Lebesgue measure on `k` cells.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; k])
    }

    /// Projects masses on arbitrary cells `[edges[i], edges[i+1])` (edges run
    /// from 0 to 1) onto `k` uniform cells, spreading each mass uniformly over
    /// its cell.
    pub fn from_cells(edges: &[f64], masses: &[f64], k: usize) -> Result<Self> {
        if edges.len() != masses.len() + 1 {
            return Err(Error::BadParams(
                "edges must have one more entry than masses".into(),
            ));
        }
        let mut out = vec![0.0; k];
        let width = 1.0 / k as f64;
        for (i, &m) in masses.iter().enumerate() {
            let (a, b) = (edges[i], edges[i + 1]);
            if b <= a || m == 0.0 {
                continue;
            }
            let density = m / (b - a);
            let first = cell_of(a, k);
            let last = cell_of(b, k).min(k - 1);
            for (j, slot) in out.iter_mut().enumerate().take(last + 1).skip(first) {
                let lo = a.max(j as f64 * width);
                let hi = b.min((j + 1) as f64 * width);
                if hi > lo {
                    *slot += density * (hi - lo);
                }
            }
        }
        Self::from_weights(out)
    }

    pub fn cells(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.mass.len() as f64
    }

    /// `Σ |mᵢ − m'ᵢ|`, equal to the L1 distance of the piecewise-constant densities.
    pub fn l1_distance(&self, other: &GridMeasure) -> Result<f64> {
        if self.cells() != other.cells() {
            return Err(Error::BadParams(format!(
                "grid sizes differ: {} vs {}",
                self.cells(),
                other.cells()
            )));
        }
        Ok(self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Total mass of the `cells` heaviest cells.
    pub fn top_mass(&self, cells: usize) -> f64 {
        let mut sorted = self.mass.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        sorted.iter().take(cells).sum()
    }

    /// More than 90% of the mass sits in at most three cells.
    pub fn is_atomic_profile(&self) -> bool {
        self.top_mass(3) > 0.9
    }

    /// Convex combination with equal weights.
    pub fn average(measures: &[GridMeasure]) -> Result<Self> {
        let first = measures
            .first()
            .ok_or_else(|| Error::BadParams("cannot average zero measures".into()))?;
        let k = first.cells();
        let mut acc = vec![0.0; k];
        for m in measures {
            if m.cells() != k {
                return Err(Error::BadParams("grid sizes differ".into()));
            }
            for (a, v) in acc.iter_mut().zip(&m.mass) {
                *a += v;
            }
        }
        Self::from_weights(acc)
    }

    fn cdf(&self, prefix: &[f64], x: f64) -> f64 {
        let k = self.mass.len();
        let pos = x * k as f64;
        let j = (pos as usize).min(k - 1);
        prefix[j] + (pos - j as f64) * self.mass[j]
    }
}

impl Measure for GridMeasure {
    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (i, &m) in self.mass.iter().enumerate() {
            let v = f(self.midpoint(i));
            if !v.is_finite() {
                return Err(Error::NonFinite("integrating over a grid measure"));
            }
            acc += m * v;
        }
        Ok(acc)
    }

    fn arc_masses(&self, breakpoints: &[f64]) -> Vec<f64> {
        let mut prefix = Vec::with_capacity(self.mass.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &m in &self.mass {
            acc += m;
            prefix.push(acc);
        }
        let cdf: Vec<f64> = breakpoints.iter().map(|&b| self.cdf(&prefix, b)).collect();
        let m = breakpoints.len();
        (0..m)
            .map(|i| {
                let v = if i + 1 < m {
                    cdf[i + 1] - cdf[i]
                } else {
                    acc - cdf[m - 1] + cdf[0]
                };
                v.max(0.0)
            })
            .collect()
    }

    fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// The countable test family of the weak* metric, truncated at `I` terms.
#[derive(Debug, Clone)]
pub struct TestFamily<'a> {
    map: &'a CircleMap,
    truncation: usize,
}

impl<'a> TestFamily<'a> {
    pub fn new(map: &'a CircleMap, truncation: usize) -> Result<Self> {
        if truncation < MIN_TRUNCATION {
            return Err(Error::BadParams(format!(
                "truncation must be at least {MIN_TRUNCATION}, got {truncation}"
            )));
        }
        Ok(TestFamily { map, truncation })
    }

    pub fn with_default_truncation(map: &'a CircleMap) -> Self {
        TestFamily {
            map,
            truncation: DEFAULT_TRUNCATION,
        }
    }

    pub fn map(&self) -> &CircleMap {
        self.map
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `φᵢ(x)` for `0 ≤ i ≤ I`.
    pub fn phi(&self, i: usize, x: f64) -> f64 {
        if i == 0 {
            return -self.map.log_derivative(x);
        }
        let m = i.div_ceil(2) as f64;
        let angle = 2.0 * PI * m * x;
        if i % 2 == 1 {
            0.5 * (1.0 + angle.cos())
        } else {
            0.5 * (1.0 + angle.sin())
        }
    }

    /// `(∫φ₀ dμ, …, ∫φ_I dμ)`.
    pub fn embed<M: Measure>(&self, measure: &M) -> Result<Vec<f64>> {
        (0..=self.truncation)
            .map(|i| measure.integrate(|x| self.phi(i, x)))
            .collect()
    }

    /// Embedding of an empirical measure using a trigonometric recurrence,
    /// about an order of magnitude cheaper than [`TestFamily::embed`].
    pub fn embed_points(&self, points: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.truncation + 1];
        let harmonics = self.truncation.div_ceil(2);
        for (&x, &w) in points.iter().zip(weights) {
            let phi0 = -self.map.log_derivative(x);
            if !phi0.is_finite() {
                return Err(Error::NonFinite("evaluating -log|f'|"));
            }
            acc[0] += w * phi0;
            let (s1, c1) = (2.0 * PI * x).sin_cos();
            let (mut s, mut c) = (s1, c1);
            for m in 1..=harmonics {
                let i = 2 * m - 1;
                acc[i] += w * 0.5 * (1.0 + c);
                if i < self.truncation {
                    acc[i + 1] += w * 0.5 * (1.0 + s);
                }
                (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
            }
        }
        Ok(acc)
    }

    /// Precomputed `φᵢ` at the midpoints of `k` uniform cells.
    pub fn grid_table(&self, k: usize) -> GridTable {
        let values = (0..=self.truncation)
            .map(|i| {
                (0..k)
                    .map(|j| self.phi(i, (j as f64 + 0.5) / k as f64))
                    .collect()
            })
            .collect();
        GridTable { k, values }
    }

    /// Distance between two embeddings.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut scale = 1.0;
        let mut acc = 0.0;
        for (x, y) in a.iter().zip(b).take(self.truncation + 1) {
            acc += scale * (x - y).abs();
            scale *= 0.5;
        }
        acc
    }

    /// `sup |φ₀|` over the validation grid of the map.
    pub fn sup_phi0(&self) -> f64 {
        self.map
            .min_derivative()
            .ln()
            .abs()
            .max(self.map.max_derivative().ln().abs())
    }

    /// An upper bound on the distance between any two probability measures.
    pub fn diameter_bound(&self) -> f64 {
        let phi0_range = self.map.max_derivative().ln() - self.map.min_derivative().ln();
        phi0_range + (1.0 - 0.5_f64.powi(self.truncation as i32))
    }
}

/// `φᵢ` sampled at grid midpoints; embeds a [`GridMeasure`] by dot products.
#[derive(Debug, Clone)]
pub struct GridTable {
    k: usize,
    values: Vec<Vec<f64>>,
}

impl GridTable {
    pub fn cells(&self) -> usize {
        self.k
    }

    pub fn embed(&self, measure: &GridMeasure) -> Result<Vec<f64>> {
        if measure.cells() != self.k {
            return Err(Error::BadParams(format!(
                "table built for {} cells, measure has {}",
                self.k,
                measure.cells()
            )));
        }
        Ok(self
            .values
            .iter()
            .map(|row| row.iter().zip(measure.mass()).map(|(v, m)| v * m).sum())
            .collect())
    }
}

/// The truncated series metric between two measures.
pub fn weak_star_distance<A: Measure, B: Measure>(
    a: &A,
    b: &B,
    family: &TestFamily<'_>,
) -> Result<f64> {
    let ea = family.embed(a)?;
    let eb = family.embed(b)?;
    Ok(family.distance(&ea, &eb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn doubling() -> CircleMap {
        CircleMap::linear(2).unwrap()
    }

    #[test]
    fn empirical_measure_examples() {
        let f = doubling();
        let delta = EmpiricalMeasure::from_orbit(&f, &Start::Point(0.0), 5, 0).unwrap();
        assert!(delta.points().iter().all(|&x| x == 0.0));
        assert_abs_diff_eq!(delta.total_mass(), 1.0, epsilon = 1e-15);

        let two =
            EmpiricalMeasure::from_orbit(&f, &Start::Rational { num: 1, den: 3 }, 2, 0).unwrap();
        assert_eq!(two.weights(), &[0.5, 0.5]);
        assert_eq!(two.points(), &[1.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn integrate_examples() {
        let f = doubling();
        let delta = EmpiricalMeasure::dirac(0.0).unwrap();
        assert_eq!(delta.integrate(|x| f.log_derivative(x)).unwrap(), 2f64.ln());

        let grid = GridMeasure::uniform(4).unwrap();
        assert_eq!(grid.integrate(|_| 1.0).unwrap(), 1.0);

        let g = CircleMap::smooth_perturbed(2, 0.1).unwrap();
        let two = EmpiricalMeasure::new(vec![1.0 / 3.0, 2.0 / 3.0], vec![0.5, 0.5]).unwrap();
        let expected = 0.5
            * ((2.0 + 0.1 * (2.0 * PI / 3.0).cos()).ln()
                + (2.0 + 0.1 * (4.0 * PI / 3.0).cos()).ln());
        assert_abs_diff_eq!(
            two.integrate(|x| g.log_derivative(x)).unwrap(),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn integrate_reports_non_finite() {
        let delta = EmpiricalMeasure::dirac(0.5).unwrap();
        assert!(matches!(
            delta.integrate(|_| f64::INFINITY),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn distance_between_two_diracs_by_direct_summation() {
        let f = doubling();
        let family = TestFamily::new(&f, 16).unwrap();
        let a = EmpiricalMeasure::dirac(0.0).unwrap();
        let b = EmpiricalMeasure::dirac(0.5).unwrap();
        // φ₀ is constant, so only the trigonometric terms contribute
        let mut oracle = 0.0;
        for i in 1..=16usize {
            let m = i.div_ceil(2) as f64;
            let (pa, pb) = if i % 2 == 1 {
                (1.0, 0.5 * (1.0 + (PI * m).cos()))
            } else {
                (0.5, 0.5 * (1.0 + (PI * m).sin()))
            };
            oracle += (pa - pb).abs() / 2f64.powi(i as i32);
        }
        let d = weak_star_distance(&a, &b, &family).unwrap();
        assert_abs_diff_eq!(d, oracle, epsilon = 1e-14);
        assert_eq!(weak_star_distance(&a, &a, &family).unwrap(), 0.0);
    }

    #[test]
    fn truncation_below_minimum_is_rejected() {
        let f = doubling();
        assert!(TestFamily::new(&f, 8).is_err());
    }

    #[test]
    fn pushforward_examples() {
        let f = doubling();
        let delta0 = EmpiricalMeasure::dirac(0.0).unwrap();
        assert_eq!(delta0.pushforward(&f), delta0);
        let two = EmpiricalMeasure::new(vec![1.0 / 3.0, 2.0 / 3.0], vec![0.5, 0.5]).unwrap();
        let pushed = two.pushforward(&f);
        assert_abs_diff_eq!(pushed.points()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pushed.points()[1], 1.0 / 3.0, epsilon = 1e-15);
        let d = EmpiricalMeasure::dirac(0.1).unwrap().pushforward(&f);
        assert_eq!(d.points(), &[0.2]);
    }

    #[test]
    fn to_grid_examples() {
        let delta = EmpiricalMeasure::dirac(0.0).unwrap();
        assert_eq!(delta.to_grid(4).unwrap().mass(), &[1.0, 0.0, 0.0, 0.0]);
        let two = EmpiricalMeasure::new(vec![1.0 / 3.0, 2.0 / 3.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(two.to_grid(3).unwrap().mass(), &[0.0, 0.5, 0.5]);
        assert!(delta.to_grid(1).is_err());
    }

    #[test]
    fn to_grid_of_low_discrepancy_points_is_flat() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let points: Vec<f64> = (0..1_000_000)
            .map(|i| (i as f64 * golden).fract())
            .collect();
        let grid = EmpiricalMeasure::uniform(points)
            .unwrap()
            .to_grid(100)
            .unwrap();
        for &m in grid.mass() {
            assert!((m - 0.01).abs() < 1e-3);
        }
    }

    #[test]
    fn grid_arc_masses_follow_cell_density() {
        let grid = GridMeasure::new(vec![0.5, 0.25, 0.25, 0.0]).unwrap();
        let arcs = grid.arc_masses(&[0.125, 0.5]);
        assert_abs_diff_eq!(arcs[0], 0.25 + 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(arcs[1], 0.25 + 0.0 + 0.25, epsilon = 1e-15);
    }

    #[test]
    fn empirical_arc_masses_use_right_atom_rule() {
        let m = EmpiricalMeasure::new(vec![0.5, 0.1, 0.9], vec![0.5, 0.25, 0.25]).unwrap();
        let arcs = m.arc_masses(&[0.2, 0.5]);
        // 0.5 sits on a breakpoint and goes right; 0.1 wraps into the last arc
        assert_eq!(arcs, vec![0.0, 1.0]);
    }

    #[test]
    fn cell_projection_conserves_mass() {
        let edges = [0.0, 0.3, 0.35, 1.0];
        let g = GridMeasure::from_cells(&edges, &[0.2, 0.5, 0.3], 10).unwrap();
        assert_abs_diff_eq!(g.total_mass(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.mass()[3], 0.5 + 0.3 * 0.05 / 0.65, epsilon = 1e-12);
    }

    #[test]
    fn recurrence_embedding_matches_direct_one() {
        let f = CircleMap::smooth_perturbed(2, 0.1).unwrap();
        let family = TestFamily::with_default_truncation(&f);
        let m = EmpiricalMeasure::from_orbit(&f, &Start::Point(0.123), 1000, 0).unwrap();
        let direct = family.embed(&m).unwrap();
        let fast = family.embed_points(m.points(), m.weights()).unwrap();
        for (a, b) in direct.iter().zip(&fast) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    fn grid_strategy(k: usize) -> impl Strategy<Value = GridMeasure> {
        proptest::collection::vec(0.0f64..1.0, k)
            .prop_filter("positive total", |w| w.iter().sum::<f64>() > 1e-3)
            .prop_map(|w| GridMeasure::from_weights(w).unwrap())
    }

    proptest! {
        #[test]
        fn pushforward_matches_composition(
            points in proptest::collection::vec(0.0f64..1.0, 1..40),
            freq in 1u32..6,
            phase in 0.0f64..1.0,
        ) {
            let f = CircleMap::smooth_perturbed(3, 0.4).unwrap();
            let nu = EmpiricalMeasure::uniform(points).unwrap();
            let test = |x: f64| (2.0 * PI * (freq as f64 * x + phase)).cos();
            let lhs = nu.pushforward(&f).integrate(test).unwrap();
            let rhs = nu.integrate(|x| test(f.apply(x))).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10);
            prop_assert!((nu.pushforward(&f).total_mass() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn truncation_tail_is_controlled(a in grid_strategy(64), b in grid_strategy(64)) {
            let f = CircleMap::smooth_perturbed(2, 0.1).unwrap();
            let short = TestFamily::new(&f, 16).unwrap();
            let long = TestFamily::new(&f, 32).unwrap();
            let d16 = weak_star_distance(&a, &b, &short).unwrap();
            let d32 = weak_star_distance(&a, &b, &long).unwrap();
            prop_assert!((d32 - d16).abs() <= 2f64.powi(-16) * short.sup_phi0().max(1.0));
        }
    }
}
