//! Frozen values from an independent vectorised simulation
//! (2·10⁶ Lebesgue-random points, 60 burn-in steps, 100 averaged steps)
//! and from an independent dense Ulam implementation.

use ergolab_core::{
    lyapunov_exponent, pressure_estimate, ulam_matrix, Assembly, CircleMap, UlamMatrix,
};

/// `∫ log f' dμ_SRB` for `x ↦ 2x + (0.1/2π) sin 2πx`.
const SMOOTH_LYAPUNOV: f64 = 0.692_581;
/// SRB masses of the eight cells `[i/8, (i+1)/8)`.
const SMOOTH_EIGHTHS: [f64; 8] = [
    0.125_050_5,
    0.125_340_5,
    0.125_225_5,
    0.124_523_0,
    0.124_662_0,
    0.124_620_5,
    0.125_279_5,
    0.125_298_5,
];
/// Entropy rate minus Lyapunov exponent of the uniform-cell Ulam chain, `k = 256`.
const SMOOTH_UNIFORM_GRID_OVERSHOOT: f64 = 0.225;

fn smooth() -> CircleMap {
    CircleMap::smooth_perturbed(2, 0.1).unwrap()
}

#[test]
fn ulam_lyapunov_matches_simulation() {
    let f = smooth();
    let p = pressure_estimate(&f, 1024).unwrap();
    assert!(
        (p.lyapunov - SMOOTH_LYAPUNOV).abs() < 5e-5,
        "{}",
        p.lyapunov
    );
    let pi = ulam_matrix(&f, 1024, Assembly::Exact)
        .unwrap()
        .stationary_measure()
        .unwrap();
    let lambda = lyapunov_exponent(&f, &pi).unwrap();
    assert!((lambda - SMOOTH_LYAPUNOV).abs() < 5e-5, "{lambda}");
}

#[test]
fn ulam_density_matches_simulation() {
    let f = smooth();
    let pi = ulam_matrix(&f, 1024, Assembly::Exact)
        .unwrap()
        .stationary_measure()
        .unwrap();
    for (i, chunk) in pi.mass().chunks(128).enumerate() {
        let m: f64 = chunk.iter().sum();
        assert!((m - SMOOTH_EIGHTHS[i]).abs() < 5e-4, "cell {i}: {m}");
    }
}

#[test]
fn uniform_cell_entropy_rate_overshoots() {
    let f = smooth();
    let mut m = UlamMatrix::exact(&f, 256).unwrap();
    m.solve().unwrap();
    let gap = m.markov_entropy().unwrap() - m.lyapunov(&f).unwrap();
    assert!((gap - SMOOTH_UNIFORM_GRID_OVERSHOOT).abs() < 0.005, "{gap}");
}
