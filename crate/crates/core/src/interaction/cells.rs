use crate::geometry::{Dimension, Point};

use super::CUTOFF;

/// Uniform grid over the container's bounding cube with cell edge at least
/// the interaction cutoff, so every interacting pair shares a cell or sits in
/// adjacent cells. No periodic wrapping.
#[derive(Clone, Debug)]
pub struct CellList {
    dim: Dimension,
    lower: f64,
    edge: f64,
    counts: [usize; 3],
    cells: Vec<Vec<u32>>,
    cell_of: Vec<u32>,
}

impl CellList {
    pub fn build(positions: &[Point], bounding_radius: f64, dim: Dimension) -> Self {
        let mut list = CellList {
            dim,
            lower: 0.0,
            edge: 1.0,
            counts: [1; 3],
            cells: Vec::new(),
            cell_of: Vec::new(),
        };
        list.rebuild(positions, bounding_radius);
        list
    }

    /// Rebuilds in place, reusing allocations.
    pub fn rebuild(&mut self, positions: &[Point], bounding_radius: f64) {
        let width = 2.0 * bounding_radius;
        let per_axis = ((width / CUTOFF).floor() as usize).max(1);
        self.lower = -bounding_radius;
        self.edge = width / per_axis as f64;
        self.counts = match self.dim {
            Dimension::Two => [per_axis, per_axis, 1],
            Dimension::Three => [per_axis; 3],
        };
        let total = self.counts.iter().product();
        self.cells.truncate(total);
        self.cells.iter_mut().for_each(Vec::clear);
        self.cells.resize_with(total, Vec::new);
        self.cell_of.clear();
        for (i, p) in positions.iter().enumerate() {
            let c = self.cell_index(&self.coords(p));
            self.cells[c].push(i as u32);
            self.cell_of.push(c as u32);
        }
    }

    pub fn edge(&self) -> f64 {
        self.edge
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn particle_count(&self) -> usize {
        self.cell_of.len()
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }

    pub fn cell_of(&self, particle: usize) -> usize {
        self.cell_of[particle] as usize
    }

    pub fn members(&self, cell: usize) -> &[u32] {
        &self.cells[cell]
    }

    #[inline]
    fn coords(&self, p: &Point) -> [usize; 3] {
        let mut c = [0usize; 3];
        for k in 0..self.dim.get() {
            let t = ((p[k] - self.lower) / self.edge).floor();
            c[k] = if t <= 0.0 { 0 } else { (t as usize).min(self.counts[k] - 1) };
        }
        c
    }

    #[inline]
    fn cell_index(&self, c: &[usize; 3]) -> usize {
        c[0] + self.counts[0] * (c[1] + self.counts[1] * c[2])
    }

    /// Calls `f` for every particle in the cell of `p` and the adjacent cells.
    #[inline]
    pub fn try_for_each_candidate<E>(
        &self,
        p: &Point,
        mut f: impl FnMut(usize) -> Result<(), E>,
    ) -> Result<(), E> {
        let c = self.coords(p);
        let range = |k: usize| {
            let lo = c[k].saturating_sub(1);
            let hi = (c[k] + 1).min(self.counts[k] - 1);
            lo..=hi
        };
        for z in range(2) {
            for y in range(1) {
                for x in range(0) {
                    for &j in &self.cells[self.cell_index(&[x, y, z])] {
                        f(j as usize)?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn candidates(&self, p: &Point) -> Vec<usize> {
        let mut out = Vec::new();
        let _ = self.try_for_each_candidate::<()>(p, |j| {
            out.push(j);
            Ok(())
        });
        out
    }

    pub fn move_particle(&mut self, particle: usize, to: &Point) {
        let old = self.cell_of[particle] as usize;
        let new = self.cell_index(&self.coords(to));
        if old == new {
            return;
        }
        let members = &mut self.cells[old];
        let pos = members.iter().position(|&j| j as usize == particle).expect("particle in its cell");
        members.swap_remove(pos);
        self.cells[new].push(particle as u32);
        self.cell_of[particle] = new as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_particle_single_occupied_cell() {
        let cl = CellList::build(&[[0.3, -0.2, 0.0]], 10.0, Dimension::Two);
        assert_eq!(cl.occupied_cells(), 1);
        assert!(cl.edge() >= CUTOFF);
    }

    #[test]
    fn near_pair_is_found_across_cell_faces() {
        // Straddle a cell boundary.
        let cl0 = CellList::build(&[], 10.0, Dimension::Two);
        let b = -10.0 + cl0.edge();
        let pts = [[b - 1.45, 0.0, 0.0], [b + 1.45, 0.0, 0.0]];
        let cl = CellList::build(&pts, 10.0, Dimension::Two);
        assert_ne!(cl.cell_of(0), cl.cell_of(1));
        assert!(cl.candidates(&pts[0]).contains(&1));
        assert!(cl.candidates(&pts[1]).contains(&0));
    }

    #[test]
    fn small_box_uses_one_cell() {
        let cl = CellList::build(&[[0.0; 3], [1.0, 0.0, 0.0]], 1.0, Dimension::Three);
        assert_eq!(cl.cell_count(), 1);
        assert_eq!(cl.candidates(&[0.0; 3]).len(), 2);
    }

    #[test]
    fn moving_updates_membership() {
        let pts = [[-8.0, -8.0, 0.0], [8.0, 8.0, 0.0]];
        let mut cl = CellList::build(&pts, 10.0, Dimension::Two);
        cl.move_particle(0, &[7.5, 8.0, 0.0]);
        assert_eq!(cl.cell_of(0), cl.cell_of(1));
        assert_eq!(cl.members(cl.cell_of(1)).len(), 2);
    }
}
