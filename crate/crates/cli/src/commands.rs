use std::path::{Path, PathBuf};

use ergolab_core::entropy::MIN_DEPTH;
use ergolab_core::srb_like::nonincreasing_within_noise;
use ergolab_core::{
    deviation_decay, entropy_estimate, kr_membership, lyapunov_exponent, pesin_residual,
    pressure_estimate, srb_like_candidates, supported_depth, ulam_matrix, Assembly, CircleMap,
    EmpiricalMeasure, GridMeasure, Measure, Partition, ScanParams,
};
use serde_json::{json, Value};

use crate::config::{
    load, DecayParams, EntropyParams, Experiment, MeasureSource, Reference, ReportConfig,
    SimulateParams, UlamParams,
};
use crate::error::{CliError, CliResult};
use crate::output::{num, Outputs};

/// Smallest grid the CLI accepts for Ulam runs.
pub const MIN_ULAM_CELLS: usize = 16;
/// Depth cap for automatically chosen refinements.
pub const MAX_AUTO_DEPTH: usize = 10;

pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

const DEFAULT_OUT: &str = "ergolab-out";

fn prepare<P>(config: &Path, o: &Overrides) -> CliResult<(Experiment<P>, PathBuf)>
where
    P: serde::de::DeserializeOwned + Default,
{
    let mut cfg: Experiment<P> = load(config)?;
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    let out = o
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok((cfg, out))
}

pub fn simulate(config: &Path, o: &Overrides) -> CliResult<Vec<PathBuf>> {
    let (cfg, dir) = prepare::<SimulateParams>(config, o)?;
    let map = cfg.circle_map()?;
    let p = &cfg.params;
    if p.n == 0 {
        return Err(CliError::Config("n must be positive".into()));
    }
    let start = p.x0.start(cfg.seed)?;
    let orbit = map.orbit_from(&start, p.n, p.burn_in)?;
    let head: Vec<f64> = orbit.iter().take(p.orbit_head).copied().collect();
    let measure = EmpiricalMeasure::uniform(orbit)?;
    let grid = measure.to_grid(p.grid_k)?;
    let lebesgue = GridMeasure::uniform(p.grid_k)?;

    let mut out = Outputs::new(&dir, cfg.to_json())?;
    out.grid("histogram.csv", &grid)?;
    out.csv(
        "orbit.csv",
        "i,x",
        head.iter()
            .enumerate()
            .map(|(i, x)| format!("{i},{}", num(*x))),
    )?;
    out.json(
        "simulate.json",
        json!({
            "map": cfg.map,
            "start": start,
            "n": p.n,
            "lyapunov": lyapunov_exponent(&map, &measure)?,
            "l1_to_lebesgue": grid.l1_distance(&lebesgue)?,
            "top3_mass": grid.top_mass(3),
            "atomic_profile": grid.is_atomic_profile(),
        }),
    )?;
    Ok(out.finish())
}

pub fn entropy(config: &Path, o: &Overrides) -> CliResult<Vec<PathBuf>> {
    let (cfg, dir) = prepare::<EntropyParams>(config, o)?;
    let map = cfg.circle_map()?;
    let p = &cfg.params;
    let (measure, provenance) = match &p.measure {
        MeasureSource::Orbit { x0, n, burn_in } => {
            let start = x0.start(cfg.seed)?;
            let m = EmpiricalMeasure::from_orbit(&map, &start, *n, *burn_in)?;
            (
                m,
                json!({"kind": "orbit", "start": start, "n": n, "burn_in": burn_in}),
            )
        }
        MeasureSource::Dirac { x } => (
            EmpiricalMeasure::dirac(*x)?,
            json!({"kind": "dirac", "x": x}),
        ),
    };
    let base = Partition::branch(&map)?;
    let q = p.q_max.unwrap_or_else(|| match measure.sample_size() {
        Some(n) => {
            supported_depth(base.atom_count(), map.degree(), n, MAX_AUTO_DEPTH).max(MIN_DEPTH)
        }
        None => MAX_AUTO_DEPTH,
    });
    let estimate = entropy_estimate(&map, &measure, &base, q)?;
    let report = pesin_residual(&map, &measure, &estimate)?;
    let kr = kr_membership(&map, &measure, p.r, estimate.entropy_est)?;

    let mut out = Outputs::new(&dir, cfg.to_json())?;
    let mut fields = serde_json::to_value(&report)?;
    fields["map"] = serde_json::to_value(cfg.map)?;
    fields["measure_provenance"] = provenance;
    fields["kr"] = serde_json::to_value(kr)?;
    out.json("pesin_report.json", fields)?;
    Ok(out.finish())
}

/// Pressure cell counts: `[k]` when admissible for the map, else the largest
/// power of the degree not above `k`.
fn default_pressure_ks(map: &CircleMap, k: usize) -> Vec<usize> {
    if map.is_linear() {
        return vec![k];
    }
    let mut v = map.degree();
    while v * map.degree() <= k {
        v *= map.degree();
    }
    vec![v]
}

pub fn ulam(config: &Path, o: &Overrides) -> CliResult<Vec<PathBuf>> {
    let (cfg, dir) = prepare::<UlamParams>(config, o)?;
    let map = cfg.circle_map()?;
    let p = &cfg.params;
    if p.k < MIN_ULAM_CELLS {
        return Err(CliError::Config(format!(
            "k must be at least {MIN_ULAM_CELLS}, got {}",
            p.k
        )));
    }
    let mut matrix = ulam_matrix(&map, p.k, p.assembly)?;
    let stationary = matrix.stationary_measure()?;
    let residual = matrix.stationarity_residual()?;
    let ks = p
        .pressure_ks
        .clone()
        .unwrap_or_else(|| default_pressure_ks(&map, p.k));
    let pressures = ks
        .iter()
        .map(|&k| pressure_estimate(&map, k))
        .collect::<Result<Vec<_>, _>>()?;
    let decreasing = pressures
        .windows(2)
        .all(|w| w[1].pressure.abs() <= w[0].pressure.abs());

    let mut out = Outputs::new(&dir, cfg.to_json())?;
    out.csv(
        "matrix.csv",
        "i,j,p",
        matrix
            .triples()
            .map(|(i, j, v)| format!("{i},{j},{}", num(v))),
    )?;
    out.grid("stationary.csv", &stationary)?;
    out.json(
        "pressure.json",
        json!({
            "map": cfg.map,
            "k": p.k,
            "max_row_defect": matrix.max_row_defect(),
            "stationarity_residual": residual,
            "stationary_lyapunov": lyapunov_exponent(&map, &stationary)?,
            "l1_to_lebesgue": stationary.l1_distance(&GridMeasure::uniform(p.k)?)?,
            "pressure": pressures,
            "abs_pressure_nonincreasing": decreasing,
        }),
    )?;
    Ok(out.finish())
}

pub fn srb_scan(config: &Path, o: &Overrides) -> CliResult<Vec<PathBuf>> {
    let (cfg, dir) = prepare::<ScanParams>(config, o)?;
    let map = cfg.circle_map()?;
    let report = srb_like_candidates(&map, &cfg.params, cfg.seed)?;
    let mut out = Outputs::new(&dir, cfg.to_json())?;
    out.json(
        "srb_report.json",
        json!({
            "map": cfg.map,
            "seed": cfg.seed,
            "report": report,
        }),
    )?;
    Ok(out.finish())
}

pub fn decay(config: &Path, o: &Overrides) -> CliResult<Vec<PathBuf>> {
    let (cfg, dir) = prepare::<DecayParams>(config, o)?;
    let map = cfg.circle_map()?;
    let p = &cfg.params;
    let reference = match p.reference {
        Reference::Lebesgue => GridMeasure::uniform(p.grid_k)?,
        Reference::Ulam => ulam_matrix(&map, p.grid_k, Assembly::Exact)?.stationary_measure()?,
    };
    let points = deviation_decay(
        &map,
        &reference,
        p.r,
        p.epsilon,
        &p.n_list,
        p.sample_count,
        cfg.seed,
    )?;
    let mut out = Outputs::new(&dir, cfg.to_json())?;
    out.csv(
        "decay.csv",
        "n,fraction,analytic_bound",
        points
            .iter()
            .map(|d| format!("{},{},{}", d.n, num(d.fraction), num(d.analytic_bound))),
    )?;
    out.json(
        "decay.json",
        json!({
            "map": cfg.map,
            "points": points,
            "nonincreasing_within_noise": nonincreasing_within_noise(&points, p.sample_count),
        }),
    )?;
    Ok(out.finish())
}

pub fn report(config: &Path, o: &Overrides) -> CliResult<Vec<PathBuf>> {
    let mut cfg: ReportConfig = load(config)?;
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if cfg.inputs.is_empty() {
        return Err(CliError::Config("inputs must not be empty".into()));
    }
    let dir = o
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for input in &cfg.inputs {
        let mut files: Vec<PathBuf> = std::fs::read_dir(input)
            .map_err(CliError::io(input))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .filter(|p| p.file_name().is_some_and(|n| n != "summary.json"))
            .collect();
        files.sort();
        for file in files {
            let source = format!(
                "{}/{}",
                input.display(),
                file.file_name().expect("listed file").to_string_lossy()
            );
            let text = std::fs::read_to_string(&file).map_err(CliError::io(&file))?;
            let content: Value = serde_json::from_str(&text)?;
            if let Value::Object(m) = &content {
                for (key, value) in m {
                    if let Some(v) = value.as_f64() {
                        rows.push(format!("{source},{key},{}", num(v)));
                    }
                }
            }
            runs.push(json!({"source": source, "content": content}));
        }
    }
    let mut out = Outputs::new(&dir, serde_json::to_value(&cfg)?)?;
    out.json("summary.json", json!({ "runs": runs }))?;
    out.csv("summary.csv", "source,metric,value", rows)?;
    Ok(out.finish())
}
