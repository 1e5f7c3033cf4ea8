//! Uniform 1-D grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform grid on `[x_min, x_max]` with `n_cells` cells.
///
/// Cell `i` spans `[edge(i), edge(i+1)]`; there are `n_cells + 1` edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n_cells < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells, got {n_cells}"
            )));
        }
        let grid = Self {
            x_min,
            x_max,
            n_cells,
        };
        if !(grid.dx() > 0.0 && grid.dx().is_finite()) {
            return Err(Error::InvalidGrid("dx must be positive and finite".into()));
        }
        Ok(grid)
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    #[inline]
    pub fn edge(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn edges(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_cells).map(|i| self.edge(i))
    }

    /// Index of the cell containing `x`, clamped to the grid.
    pub fn cell_index(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx()).floor();
        (i.max(0.0) as usize).min(self.n_cells - 1)
    }

    /// Index of the edge nearest to `x`.
    pub fn nearest_edge(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx()).round();
        (i.max(0.0) as usize).min(self.n_cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid::new(-4.0, 4.0, 8).unwrap();
        assert!((g.dx() - 1.0).abs() < 1e-15);
        assert!((g.edge(0) + 4.0).abs() < 1e-15);
        assert!((g.edge(8) - 4.0).abs() < 1e-15);
        assert!((g.center(4) - 0.5).abs() < 1e-15);
        assert_eq!(g.cell_index(-3.5), 0);
        assert_eq!(g.cell_index(3.99), 7);
        assert_eq!(g.nearest_edge(0.4), 4);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid::new(1.0, 0.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(f64::NAN, 1.0, 4).is_err());
    }
}
