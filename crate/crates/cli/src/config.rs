//! Experiment configs. Every subcommand reads one JSON object of the form
//! `{"map": {...}, "seed": N, "output_dir": "...", "params": {...}}`;
//! unknown keys are rejected at every level. The resolved config (defaults
//! filled in, `--seed` applied) is embedded in every output file. The output
//! location is left out so that runs into different directories compare equal.

use std::fmt;
use std::path::{Path, PathBuf};

use ergolab_core::{Assembly, CircleMap, MapSpec, Start};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(deserialize = "P: Deserialize<'de> + Default")
)]
pub struct Experiment<P> {
    pub map: MapSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub params: P,
}

impl<P: Serialize> Experiment<P> {
    pub fn circle_map(&self) -> CliResult<CircleMap> {
        Ok(CircleMap::new(self.map)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configs serialize")
    }
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Starting point: a number in `[0, 1)`, an exact rational `"p/q"`, or
/// `"random"` for a seeded Lebesgue-typical point.
///
/// A number is taken literally. Under a linear map every double is an
/// eventually fixed point, so use `"random"` for typical behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum X0 {
    Value(f64),
    Rational {
        num: u64,
        den: u64,
    },
    #[default]
    Random,
}

impl X0 {
    pub fn start(self, seed: u64) -> CliResult<Start> {
        match self {
            X0::Value(x) if (0.0..1.0).contains(&x) => Ok(Start::Point(x)),
            X0::Value(x) => Err(ergolab_core::Error::Domain(x).into()),
            X0::Rational { num, den } if den > 0 && num < den => Ok(Start::Rational { num, den }),
            X0::Rational { num, den } => Err(CliError::Config(format!(
                "x0 = {num}/{den} is not in [0, 1)"
            ))),
            X0::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(Start::Typical {
                    x0: rng.gen_range(0.0..1.0),
                    seed: rng.gen(),
                })
            }
        }
    }
}

impl fmt::Display for X0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            X0::Value(x) => write!(f, "{x}"),
            X0::Rational { num, den } => write!(f, "{num}/{den}"),
            X0::Random => f.write_str("random"),
        }
    }
}

impl Serialize for X0 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            X0::Value(x) => s.serialize_f64(*x),
            other => s.collect_str(other),
        }
    }
}

impl<'de> Deserialize<'de> for X0 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(x) => Ok(X0::Value(x)),
            Repr::Text(t) if t == "random" => Ok(X0::Random),
            Repr::Text(t) => {
                let (p, q) = t
                    .split_once('/')
                    .ok_or_else(|| serde::de::Error::custom(format!("bad x0 {t:?}")))?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<u64>()
                        .map_err(|_| serde::de::Error::custom(format!("bad x0 {t:?}")))
                };
                Ok(X0::Rational {
                    num: parse(p)?,
                    den: parse(q)?,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateParams {
    pub x0: X0,
    pub n: usize,
    pub burn_in: usize,
    pub grid_k: usize,
    /// Orbit points written to `orbit.csv`.
    pub orbit_head: usize,
}

impl Default for SimulateParams {
    fn default() -> Self {
        SimulateParams {
            x0: X0::Random,
            n: 1_000_000,
            burn_in: 0,
            grid_k: 1024,
            orbit_head: 1000,
        }
    }
}

/// The measure whose entropy is estimated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSource {
    Orbit {
        #[serde(default)]
        x0: X0,
        n: usize,
        #[serde(default)]
        burn_in: usize,
    },
    Dirac {
        x: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyParams {
    pub measure: MeasureSource,
    /// Chosen from the sample size when absent.
    pub q_max: Option<usize>,
    /// Radius of the `K_r` membership test.
    pub r: f64,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            measure: MeasureSource::Orbit {
                x0: X0::Random,
                n: 1_000_000,
                burn_in: 0,
            },
            q_max: None,
            r: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UlamParams {
    pub k: usize,
    pub assembly: Assembly,
    /// Cell counts for the pressure study. Defaults to `[k]` when that is
    /// admissible, else the largest power of the degree not above `k`.
    pub pressure_ks: Option<Vec<usize>>,
}

impl Default for UlamParams {
    fn default() -> Self {
        UlamParams {
            k: 1024,
            assembly: Assembly::Exact,
            pressure_ks: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Lebesgue,
    Ulam,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayParams {
    pub r: f64,
    pub epsilon: f64,
    pub n_list: Vec<usize>,
    pub sample_count: usize,
    pub reference: Reference,
    pub grid_k: usize,
}

impl Default for DecayParams {
    fn default() -> Self {
        DecayParams {
            r: 0.2,
            epsilon: 0.05,
            n_list: vec![100, 1000, 10_000, 100_000],
            sample_count: 500,
            reference: Reference::Lebesgue,
            grid_k: 1024,
        }
    }
}

/// `report` merges earlier output directories; it has no map.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
}
