//! Expanding maps of the circle `S¹ = [0, 1) / ~`.
//!
//! Three families are provided:
//!
//! * `linear`: `x ↦ d·x mod 1`;
//! * `smooth_perturbed`: `x ↦ d·x + (c / 2π)·sin(2πx) mod 1`, with derivative
//!   `d + c·cos(2πx)`;
//! * `nonhoelder`: a C¹ map whose derivative `d + c·(η(x) − η̄)` has modulus of
//!   continuity `η(x) = 1 / log(e + 1/ρ(x))` at the fixed point 0, where `ρ` is
//!   the circle distance to 0. Such a derivative is continuous but not Hölder
//!   for any exponent. The lift is tabulated by cumulative trapezoidal
//!   quadrature and evaluated by linear interpolation.
//!
//! Every map fixes 0 and has a lift `F: [0, 1] → [0, d]` with `F(0) = 0` and
//! `F(1) = d`.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid used to certify expansion at construction time.
pub const VALIDATION_GRID: usize = 100_000;
/// Required margin above 1 for the sampled minimum derivative.
pub const EXPANSION_MARGIN: f64 = 1e-6;
/// Number of quadrature intervals backing the non-Hölder lift.
pub const QUADRATURE_NODES: usize = 1 << 16;
/// Bisection steps for branch inversion.
pub const BISECTION_STEPS: usize = 60;
/// Accepted circle-distance residual for an inverted branch.
pub const INVERSE_TOLERANCE: f64 = 1e-12;

/// Reduces `x` into `[0, 1)`. The value `1.0` produced by rounding maps to 0.
#[inline]
pub fn canonical(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the circle of circumference 1.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = canonical(a - b);
    d.min(1.0 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Linear,
    SmoothPerturbed,
    Nonhoelder,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Linear => "linear",
            Family::SmoothPerturbed => "smooth_perturbed",
            Family::Nonhoelder => "nonhoelder",
        };
        f.write_str(name)
    }
}

/// Serializable description of a map, persisted into every result file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub family: Family,
    pub degree: u32,
    #[serde(default)]
    pub c: f64,
}

impl MapSpec {
    pub fn linear(degree: u32) -> Self {
        MapSpec {
            family: Family::Linear,
            degree,
            c: 0.0,
        }
    }

    pub fn smooth_perturbed(degree: u32, c: f64) -> Self {
        MapSpec {
            family: Family::SmoothPerturbed,
            degree,
            c,
        }
    }

    pub fn nonhoelder(degree: u32, c: f64) -> Self {
        MapSpec {
            family: Family::Nonhoelder,
            degree,
            c,
        }
    }
}

#[derive(Clone)]
enum Kind {
    Linear,
    Smooth {
        c: f64,
    },
    Nonhoelder {
        c: f64,
        mean_eta: f64,
        /// Lift values at `j / QUADRATURE_NODES`, `j = 0..=QUADRATURE_NODES`.
        table: Arc<[f64]>,
    },
}

/// The modulus shape `1 / log(e + 1/ρ)` of the non-Hölder family; zero at ρ = 0.
#[inline]
pub fn log_modulus(rho: f64) -> f64 {
    if rho <= 0.0 {
        0.0
    } else {
        1.0 / (E + 1.0 / rho).ln()
    }
}

/// An expanding circle map of degree `d ≥ 2`. Immutable once built.
#[derive(Clone)]
pub struct CircleMap {
    spec: MapSpec,
    degree: usize,
    kind: Kind,
    min_derivative: f64,
    max_derivative: f64,
}

impl fmt::Debug for CircleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleMap")
            .field("spec", &self.spec)
            .field("min_derivative", &self.min_derivative)
            .field("max_derivative", &self.max_derivative)
            .finish()
    }
}

impl CircleMap {
    /// Builds and validates a map from its specification.
    pub fn new(spec: MapSpec) -> Result<Self> {
        if spec.degree < 2 || spec.degree > 64 {
            return Err(Error::BadParams(format!(
                "degree must lie in 2..=64, got {}",
                spec.degree
            )));
        }
        if !spec.c.is_finite() {
            return Err(Error::BadParams(format!(
                "amplitude c = {} is not finite",
                spec.c
            )));
        }
        let d = spec.degree as f64;
        let kind = match spec.family {
            Family::Linear => {
                if spec.c != 0.0 {
                    return Err(Error::BadParams(
                        "linear maps take no amplitude (c must be 0)".into(),
                    ));
                }
                Kind::Linear
            }
            Family::SmoothPerturbed => Kind::Smooth { c: spec.c },
            Family::Nonhoelder => nonhoelder_kind(d, spec.c),
        };
        let mut map = CircleMap {
            spec,
            degree: spec.degree as usize,
            kind,
            min_derivative: f64::NAN,
            max_derivative: f64::NAN,
        };
        let (lo, hi) = map.derivative_range(VALIDATION_GRID);
        if !(lo > 1.0 + EXPANSION_MARGIN) {
            return Err(Error::NotExpanding {
                min_derivative: lo,
                threshold: 1.0 + EXPANSION_MARGIN,
            });
        }
        map.min_derivative = lo;
        map.max_derivative = hi;
        Ok(map)
    }

    pub fn linear(degree: u32) -> Result<Self> {
        Self::new(MapSpec::linear(degree))
    }

    pub fn smooth_perturbed(degree: u32, c: f64) -> Result<Self> {
        Self::new(MapSpec::smooth_perturbed(degree, c))
    }

    pub fn nonhoelder(degree: u32, c: f64) -> Result<Self> {
        Self::new(MapSpec::nonhoelder(degree, c))
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Family parameters beyond the degree.
    pub fn params(&self) -> Vec<f64> {
        match self.kind {
            Kind::Linear => Vec::new(),
            Kind::Smooth { c } | Kind::Nonhoelder { c, .. } => vec![c],
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, Kind::Linear)
    }

    /// Minimum derivative over the validation grid.
    pub fn min_derivative(&self) -> f64 {
        self.min_derivative
    }

    /// Maximum derivative over the validation grid.
    pub fn max_derivative(&self) -> f64 {
        self.max_derivative
    }

    /// The lift `F` on `[0, 1]`, increasing from 0 to `degree`.
    #[inline]
    pub fn lift(&self, x: f64) -> f64 {
        let d = self.degree as f64;
        match &self.kind {
            Kind::Linear => d * x,
            Kind::Smooth { c } => d * x + c / (2.0 * PI) * (2.0 * PI * x).sin(),
            Kind::Nonhoelder { table, .. } => {
                let pos = x.clamp(0.0, 1.0) * QUADRATURE_NODES as f64;
                let j = (pos as usize).min(QUADRATURE_NODES - 1);
                let t = pos - j as f64;
                table[j] + t * (table[j + 1] - table[j])
            }
        }
    }

    /// `f(x)` without the domain check; `x` is assumed to lie in `[0, 1)`.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        canonical(self.lift(x))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.apply(x))
    }

    /// `f'(x)` for `x` in `[0, 1)`.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        let d = self.degree as f64;
        match &self.kind {
            Kind::Linear => d,
            Kind::Smooth { c } => d + c * (2.0 * PI * x).cos(),
            Kind::Nonhoelder { c, mean_eta, .. } => {
                d + c * (log_modulus(circle_distance(x, 0.0)) - mean_eta)
            }
        }
    }

    /// `log |f'(x)|`, the negative of the potential ψ.
    #[inline]
    pub fn log_derivative(&self, x: f64) -> f64 {
        self.derivative(x).abs().ln()
    }

    /// Minimum of `f'` over the grid `i / grid`; fails if it is not above 1.
    pub fn validate_expanding(&self, grid: usize) -> Result<f64> {
        if grid < 1000 {
            return Err(Error::BadParams(format!(
                "validation grid must have at least 1000 points, got {grid}"
            )));
        }
        let (lo, _) = self.derivative_range(grid);
        if !(lo > 1.0) {
            return Err(Error::NotExpanding {
                min_derivative: lo,
                threshold: 1.0,
            });
        }
        Ok(lo)
    }

    fn derivative_range(&self, grid: usize) -> (f64, f64) {
        (0..grid)
            .map(|i| self.derivative(i as f64 / grid as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Solves `F(x) = y` for `y` in `[0, degree]`.
    pub fn lift_inverse(&self, y: f64) -> Result<f64> {
        let d = self.degree as f64;
        if let Kind::Linear = self.kind {
            return Ok((y / d).clamp(0.0, 1.0));
        }
        let branch = (y.floor().max(0.0) as usize).min(self.degree - 1);
        if !(0.0..=d).contains(&y) {
            return Err(Error::Convergence { target: y, branch });
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.lift(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let best = if (self.lift(lo) - y).abs() <= (self.lift(hi) - y).abs() {
            lo
        } else {
            hi
        };
        if (self.lift(best) - y).abs() > INVERSE_TOLERANCE {
            return Err(Error::Convergence { target: y, branch });
        }
        Ok(best)
    }

    /// The `degree` preimages of `y`, one per monotone branch, in increasing order.
    pub fn inverse_branches(&self, y: f64) -> Result<BranchPreimages> {
        check_domain(y)?;
        let mut points = Vec::with_capacity(self.degree);
        let mut residuals = Vec::with_capacity(self.degree);
        for branch in 0..self.degree {
            let x = self.lift_inverse(y + branch as f64)?;
            let x = if x >= 1.0 { prev_below_one() } else { x };
            let residual = circle_distance(self.apply(x), y);
            if residual > INVERSE_TOLERANCE {
                return Err(Error::Convergence { target: y, branch });
            }
            if let Some(&last) = points.last() {
                if x <= last {
                    return Err(Error::Convergence { target: y, branch });
                }
            }
            points.push(x);
            residuals.push(residual);
        }
        Ok(BranchPreimages {
            target: y,
            points,
            residuals,
        })
    }

    /// Preimages of the fixed point 0: the left endpoints of the monotone branches.
    pub fn branch_points(&self) -> Result<Vec<f64>> {
        Ok(self.inverse_branches(0.0)?.points)
    }

    /// `n` orbit points of `x0` after discarding `burn_in` iterates.
    pub fn orbit(&self, x0: f64, n: usize, burn_in: usize) -> Result<Vec<f64>> {
        self.orbit_from(&Start::Point(x0), n, burn_in)
    }

    pub fn orbit_from(&self, start: &Start, n: usize, burn_in: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::BadParams("orbit length must be at least 1".into()));
        }
        Ok(self.iter_from(start)?.skip(burn_in).take(n).collect())
    }

    /// An endless orbit iterator; the first item is the starting point itself.
    pub fn iter_from(&self, start: &Start) -> Result<Orbit<'_>> {
        let state = match (*start, &self.kind) {
            (Start::Rational { num, den }, Kind::Linear) => {
                check_rational(num, den)?;
                State::Rational {
                    num: num as u128,
                    den: den as u128,
                }
            }
            (Start::Rational { num, den }, _) => {
                check_rational(num, den)?;
                State::Float(num as f64 / den as f64)
            }
            (Start::Point(x0), Kind::Linear) => {
                check_domain(x0)?;
                State::Fixed {
                    s: to_fixed(x0),
                    tail: None,
                }
            }
            (Start::Typical { x0, seed }, Kind::Linear) => {
                check_domain(x0)?;
                State::Fixed {
                    s: to_fixed(x0),
                    tail: Some(ChaCha8Rng::seed_from_u64(seed)),
                }
            }
            (Start::Point(x0), _) | (Start::Typical { x0, .. }, _) => {
                check_domain(x0)?;
                State::Float(x0)
            }
        };
        Ok(Orbit { map: self, state })
    }
}

fn nonhoelder_kind(d: f64, c: f64) -> Kind {
    let n = QUADRATURE_NODES;
    let h = 1.0 / n as f64;
    let eta: Vec<f64> = (0..=n)
        .map(|j| log_modulus(circle_distance(j as f64 * h, 0.0)))
        .collect();
    // trapezoidal mean, so the cumulative table closes at d up to rounding
    let mean_eta = h * (eta[1..n].iter().sum::<f64>() + 0.5 * (eta[0] + eta[n]));
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for j in 0..n {
        let left = d + c * (eta[j] - mean_eta);
        let right = d + c * (eta[j + 1] - mean_eta);
        acc += 0.5 * h * (left + right);
        table.push(acc);
    }
    let scale = d / acc;
    for v in table.iter_mut() {
        *v *= scale;
    }
    table[n] = d;
    Kind::Nonhoelder {
        c,
        mean_eta,
        table: table.into(),
    }
}

fn check_domain(x: f64) -> Result<()> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(x))
    }
}

fn check_rational(num: u64, den: u64) -> Result<()> {
    if den == 0 || num >= den {
        return Err(Error::BadParams(format!(
            "rational start {num}/{den} must satisfy 0 <= num < den"
        )));
    }
    Ok(())
}

fn prev_below_one() -> f64 {
    f64::from_bits(1.0_f64.to_bits() - 1)
}

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

fn to_fixed(x: f64) -> u128 {
    (x * TWO_POW_128) as u128
}

fn from_fixed(s: u128) -> f64 {
    canonical(s as f64 / TWO_POW_128)
}

/// The monotone-branch preimages of a target point.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPreimages {
    pub target: f64,
    pub points: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Where an orbit starts.
///
/// `Point` follows the exact orbit of the given double. For linear maps that
/// orbit is computed in 128-bit fixed point, so a dyadic start such as 0.1
/// stays exact; it also means every double is eventually fixed under the
/// doubling map, as it should be. `Typical` treats `x0` as the leading digits
/// of a real number whose remaining base-`d` digits are drawn from a seeded
/// generator, giving Lebesgue-typical orbits of linear maps. `Rational` orbits
/// of linear maps are computed exactly on the numerator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Point(f64),
    Rational { num: u64, den: u64 },
    Typical { x0: f64, seed: u64 },
}

impl Start {
    pub fn x0(&self) -> f64 {
        match *self {
            Start::Point(x) | Start::Typical { x0: x, .. } => x,
            Start::Rational { num, den } => num as f64 / den as f64,
        }
    }
}

#[allow(clippy::large_enum_variant)] // one per orbit
enum State {
    Float(f64),
    Fixed { s: u128, tail: Option<ChaCha8Rng> },
    Rational { num: u128, den: u128 },
}

/// Endless forward orbit of a [`CircleMap`].
pub struct Orbit<'a> {
    map: &'a CircleMap,
    state: State,
}

impl Iterator for Orbit<'_> {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let d = self.map.degree as u128;
        let current = match &mut self.state {
            State::Float(x) => {
                let cur = *x;
                *x = self.map.apply(cur);
                cur
            }
            State::Fixed { s, tail } => {
                let cur = from_fixed(*s);
                // d·x mod 1 on the known digits, plus the carry from the hidden tail
                let carry = match tail {
                    Some(rng) => rng.gen_range(0..d),
                    None => 0,
                };
                *s = s.wrapping_mul(d).wrapping_add(carry);
                cur
            }
            State::Rational { num, den } => {
                let cur = *num as f64 / *den as f64;
                *num = (*num * d) % *den;
                cur
            }
        };
        Some(current)
    }
}
