use thiserror::Error;

use crate::geometry::{Dimension, GeometryError, Point, ScaledContainer};

use super::{dist_sq, well_energy_sq, CellList, Interaction, Overlap, HARD_CORE_SQ};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigurationError {
    #[error("particle {index} at {position:?} is outside the container")]
    Outside { index: usize, position: Point },
    #[error(transparent)]
    Overlap(#[from] Overlap),
    #[error("particle {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Why a proposed single-particle move cannot be accepted.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum MoveError {
    #[error("proposed position is outside the container")]
    Outside,
    #[error(transparent)]
    Overlap(#[from] Overlap),
}

/// Particle positions inside a container, with a cell list kept in sync.
#[derive(Clone, Debug)]
pub struct ParticleConfiguration {
    container: ScaledContainer,
    positions: Vec<Point>,
    cells: CellList,
    interaction: Interaction,
}

impl ParticleConfiguration {
    /// Validates containment and (for the soft-core model) the hard core.
    pub fn new(
        container: ScaledContainer,
        positions: Vec<Point>,
        interaction: Interaction,
    ) -> Result<Self, ConfigurationError> {
        let dim = container.dimension();
        let mut positions = positions;
        for (index, p) in positions.iter_mut().enumerate() {
            if dim == Dimension::Two {
                p[2] = 0.0;
            }
            if !p.iter().all(|c| c.is_finite()) {
                return Err(ConfigurationError::NonFinite { index });
            }
            if !container.contains(p) {
                return Err(ConfigurationError::Outside { index, position: *p });
            }
        }
        let cells = CellList::build(&positions, container.bounding_radius(), dim);
        let config = ParticleConfiguration { container, positions, cells, interaction };
        config.total_potential_energy()?;
        Ok(config)
    }

    pub fn container(&self) -> &ScaledContainer {
        &self.container
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dimension(&self) -> Dimension {
        self.container.dimension()
    }

    pub fn interaction(&self) -> Interaction {
        self.interaction
    }

    pub fn cells(&self) -> &CellList {
        &self.cells
    }

    /// Rebuilds the cell list from the current positions.
    pub fn rebuild_cells(&mut self) -> &CellList {
        self.cells.rebuild(&self.positions, self.container.bounding_radius());
        &self.cells
    }

    /// Sum of the pair potential over unordered pairs, using the cell list.
    pub fn total_potential_energy(&self) -> Result<f64, Overlap> {
        if self.interaction == Interaction::Ideal {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (i, p) in self.positions.iter().enumerate() {
            let mut partial = 0.0;
            self.cells.try_for_each_candidate(p, |j| {
                if j > i {
                    let r2 = dist_sq(p, &self.positions[j]);
                    if r2 < HARD_CORE_SQ {
                        return Err(Overlap { first: i, second: j, distance: r2.sqrt() });
                    }
                    partial += well_energy_sq(r2);
                }
                Ok(())
            })?;
            total += partial;
        }
        Ok(total)
    }

    /// Interaction energy of a particle placed at `at` with every particle
    /// except `skip`.
    fn energy_at(&self, skip: usize, at: &Point) -> Result<f64, Overlap> {
        let mut e = 0.0;
        self.cells.try_for_each_candidate(at, |j| {
            if j != skip {
                let r2 = dist_sq(at, &self.positions[j]);
                if r2 < HARD_CORE_SQ {
                    return Err(Overlap { first: skip, second: j, distance: r2.sqrt() });
                }
                e += well_energy_sq(r2);
            }
            Ok(())
        })?;
        Ok(e)
    }

    /// `E(x_j -> to) - E`, from cell neighbourhoods only.
    pub fn delta_energy_move(&self, particle: usize, to: &Point) -> Result<f64, MoveError> {
        if !self.container.contains(to) {
            return Err(MoveError::Outside);
        }
        if self.interaction == Interaction::Ideal {
            return Ok(0.0);
        }
        let new = self.energy_at(particle, to)?;
        let old = self.energy_at(particle, &self.positions[particle])?;
        Ok(new - old)
    }

    /// Moves a particle without checks; callers validate with
    /// [`Self::delta_energy_move`] first.
    pub fn apply_move(&mut self, particle: usize, to: Point) {
        self.cells.move_particle(particle, &to);
        self.positions[particle] = to;
    }

    /// Writes into `out` this configuration rescaled about the origin to
    /// `volume`, reusing `out`'s allocations. Containment is preserved by
    /// construction; the hard core is not checked.
    pub fn rescale_into(&self, volume: f64, out: &mut ParticleConfiguration) -> Result<(), GeometryError> {
        let container = self.container.with_volume(volume)?;
        let factor = container.scale() / self.container.scale();
        out.positions.clear();
        out.positions.extend(self.positions.iter().map(|p| [p[0] * factor, p[1] * factor, p[2] * factor]));
        out.container = container;
        out.interaction = self.interaction;
        out.cells.rebuild(&out.positions, out.container.bounding_radius());
        Ok(())
    }

    /// Full O(N²) admissibility check independent of the cell list.
    pub fn admissibility_scan(&self) -> Result<(), ConfigurationError> {
        for (index, p) in self.positions.iter().enumerate() {
            if !self.container.contains(p) {
                return Err(ConfigurationError::Outside { index, position: *p });
            }
        }
        if self.interaction == Interaction::SoftCore {
            for i in 0..self.positions.len() {
                for j in i + 1..self.positions.len() {
                    let r2 = dist_sq(&self.positions[i], &self.positions[j]);
                    if r2 < HARD_CORE_SQ {
                        return Err(Overlap { first: i, second: j, distance: r2.sqrt() }.into());
                    }
                }
            }
        }
        Ok(())
    }
}
