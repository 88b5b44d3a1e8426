//! Fixtures shared by the kernel benchmarks.

use ergolab_core::{CircleMap, Result};

/// One map per family at degree 2, with moderate perturbations.
pub fn fixtures() -> Result<Vec<(&'static str, CircleMap)>> {
    Ok(vec![
        ("linear", CircleMap::linear(2)?),
        ("smooth_perturbed", CircleMap::smooth_perturbed(2, 0.1)?),
        ("nonhoelder", CircleMap::nonhoelder(2, 0.05)?),
    ])
}
