use serde::{Deserialize, Serialize};

use crate::interaction::{triangular_lattice_energy, PairError, CUTOFF, HARD_CORE};

/// Per-particle energy of the infinite triangular lattice with spacing `a`.
pub fn lattice_energy_oracle(spacing: f64) -> Result<f64, PairError> {
    triangular_lattice_energy(spacing)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeMinimum {
    pub spacing: f64,
    pub energy: f64,
    pub grid_points: usize,
}

/// Grid search for the lowest per-particle lattice energy over spacings in
/// `[1, 3]`.
pub fn minimize_lattice_energy(grid_points: usize) -> LatticeMinimum {
    let n = grid_points.max(2);
    let mut best = LatticeMinimum { spacing: HARD_CORE, energy: f64::INFINITY, grid_points: n };
    for k in 0..n {
        let a = HARD_CORE + (CUTOFF - HARD_CORE) * k as f64 / (n - 1) as f64;
        let e = triangular_lattice_energy(a).expect("spacing within the admissible range");
        if e < best.energy {
            best.spacing = a;
            best.energy = e;
        }
    }
    best
}
