//! The soft-core pair potential and energy bookkeeping over particle
//! configurations.
//!
//! `v(r) = +∞` for `r < 1`, `r - 3` for `1 <= r <= 3`, and `0` beyond. The
//! total potential energy sums `v` over unordered pairs.

mod cells;
mod config;
mod snapshot;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cells::CellList;
pub use config::{ConfigurationError, MoveError, ParticleConfiguration};
pub use snapshot::{Snapshot, SnapshotError};

/// Hard-core diameter.
pub const HARD_CORE: f64 = 1.0;
/// Range of the attractive well; `v` vanishes beyond it.
pub const CUTOFF: f64 = 3.0;

pub(crate) const HARD_CORE_SQ: f64 = HARD_CORE * HARD_CORE;
pub(crate) const CUTOFF_SQ: f64 = CUTOFF * CUTOFF;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum PairError {
    #[error("pair distance {0} is inside the hard core")]
    HardCore(f64),
    #[error("pair distance is not a number")]
    NotANumber,
}

/// Two particles closer than the hard-core diameter.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("particles {first} and {second} overlap at distance {distance}")]
pub struct Overlap {
    pub first: usize,
    pub second: usize,
    pub distance: f64,
}

/// Whether particles interact through the pair potential or not at all.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    #[default]
    SoftCore,
    /// No potential and no hard core: the ideal gas.
    Ideal,
}

/// Pair energy at distance `r`. The hard core is reported as an error, never
/// as a large number.
pub fn pair_energy(r: f64) -> Result<f64, PairError> {
    if r.is_nan() {
        return Err(PairError::NotANumber);
    }
    if r < HARD_CORE {
        Err(PairError::HardCore(r))
    } else if r <= CUTOFF {
        Ok(r - CUTOFF)
    } else {
        Ok(0.0)
    }
}

/// Well energy for a squared distance already known to be `>= 1`.
#[inline(always)]
pub(crate) fn well_energy_sq(r2: f64) -> f64 {
    if r2 <= CUTOFF_SQ {
        r2.sqrt() - CUTOFF
    } else {
        0.0
    }
}

#[inline(always)]
pub(crate) fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Per-particle energy of the infinite triangular lattice with spacing `a`
/// (half the sum of `v` over lattice vectors).
pub fn triangular_lattice_energy(spacing: f64) -> Result<f64, PairError> {
    if spacing.is_nan() {
        return Err(PairError::NotANumber);
    }
    if spacing < HARD_CORE {
        return Err(PairError::HardCore(spacing));
    }
    // |i e1 + j e2|² = a² (i² + ij + j²) for e1 = (1, 0), e2 = (1/2, √3/2).
    let reach = (2.0 * CUTOFF / spacing).ceil() as i64 + 1;
    let mut sum = 0.0;
    for i in -reach..=reach {
        for j in -reach..=reach {
            let n = i * i + i * j + j * j;
            if n == 0 {
                continue;
            }
            let r = spacing * (n as f64).sqrt();
            if r <= CUTOFF {
                sum += r - CUTOFF;
            }
        }
    }
    Ok(0.5 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_values() {
        assert_eq!(pair_energy(0.5), Err(PairError::HardCore(0.5)));
        assert_eq!(pair_energy(1.0), Ok(-2.0));
        assert_eq!(pair_energy(2.0), Ok(-1.0));
        assert_eq!(pair_energy(3.0), Ok(0.0));
        assert_eq!(pair_energy(4.0), Ok(0.0));
        assert_eq!(pair_energy(f64::NAN), Err(PairError::NotANumber));
        assert_eq!(pair_energy(f64::INFINITY), Ok(0.0));
    }

    #[test]
    fn continuity_at_well_edge() {
        let below = pair_energy(3.0 - 1e-12).unwrap();
        let above = pair_energy(3.0 + 1e-12).unwrap();
        assert!(below.abs() < 1e-11 && above == 0.0);
    }

    #[test]
    fn lattice_beyond_cutoff_is_zero() {
        assert_eq!(triangular_lattice_energy(3.1), Ok(0.0));
        assert!(triangular_lattice_energy(0.99).is_err());
        // Only the first shell (6 neighbours) interacts just below the edge.
        let e = triangular_lattice_energy(2.99).unwrap();
        assert!((e - 3.0 * (2.99 - 3.0)).abs() < 1e-12);
    }
}
