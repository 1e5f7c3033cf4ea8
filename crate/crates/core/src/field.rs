//! Piecewise-constant density fields on uniform grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Symbolic initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Datum {
    Constant { value: f64 },
    /// Left state `a` for `x < jump`, right state `b` for `x > jump`.
    Riemann { a: f64, b: f64, jump: f64 },
}

/// A piecewise-constant density sample: one value per cell, extended beyond
/// the grid by constant extrapolation of the outermost cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.n_cells,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidField(
                "all values must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Build a field by sampling `f` at cell midpoints.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n_cells).map(|i| f(grid.center(i))).collect();
        Self::new(grid, values)
    }

    /// Left boundary value (constant extrapolation).
    #[inline]
    pub fn left_boundary(&self) -> f64 {
        self.values[0]
    }

    /// Right boundary value (constant extrapolation).
    #[inline]
    pub fn right_boundary(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when every cell is at least `q_min`.
    pub fn bounded_below_by(&self, q_min: f64) -> bool {
        self.min() >= q_min
    }

    /// True when adjacent differences all share the sign of `sign` (within `tol`).
    pub fn is_monotone(&self, nondecreasing: bool, tol: f64) -> bool {
        self.values.windows(2).all(|w| {
            let d = w[1] - w[0];
            if nondecreasing {
                d >= -tol
            } else {
                d <= tol
            }
        })
    }

    /// ∫ q dx over `window` (overlap-weighted).
    pub fn mass(&self, window: (f64, f64)) -> f64 {
        let mut total = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let lo = self.grid.edge(i).max(window.0);
            let hi = self.grid.edge(i + 1).min(window.1);
            if hi > lo {
                total += v * (hi - lo);
            }
        }
        // Constant extrapolation beyond the grid.
        if window.0 < self.grid.x_min {
            total += self.left_boundary() * (self.grid.x_min.min(window.1) - window.0);
        }
        if window.1 > self.grid.x_max {
            total += self.right_boundary() * (window.1 - self.grid.x_max.max(window.0));
        }
        total
    }
}

/// Resolve a symbolic datum on a grid. Riemann jumps are snapped to the
/// nearest cell edge so the discrete initial TV is exact.
pub fn field_from_datum(datum: Datum, grid: Grid) -> Result<Field> {
    match datum {
        Datum::Constant { value } => Field::new(grid, vec![value; grid.n_cells]),
        Datum::Riemann { a, b, jump } => {
            if !(jump > grid.x_min && jump < grid.x_max) {
                return Err(Error::InvalidScenario(format!(
                    "riemann jump {jump} outside open domain ({}, {})",
                    grid.x_min, grid.x_max
                )));
            }
            let jump_edge = grid.nearest_edge(jump);
            let values = (0..grid.n_cells)
                .map(|i| if i < jump_edge { a } else { b })
                .collect();
            Field::new(grid, values)
        }
    }
}

/// Total variation: sum of absolute interior jumps. The constant boundary
/// extension contributes nothing.
pub fn total_variation(f: &Field) -> f64 {
    f.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Total variation of a slice of point samples (used for edge-valued data).
pub fn total_variation_of(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// L¹ distance between piecewise-constant fields on possibly different grids,
/// restricted to `window`. Exact: integrates |a−b| over the union of both
/// edge sets, with constant extrapolation beyond either grid.
pub fn l1_distance_cross(a: &Field, b: &Field, window: (f64, f64)) -> f64 {
    let value_at = |f: &Field, x: f64| -> f64 {
        if x < f.grid.x_min {
            f.left_boundary()
        } else if x >= f.grid.x_max {
            f.right_boundary()
        } else {
            f.values[f.grid.cell_index(x)]
        }
    };
    let mut cuts: Vec<f64> = Vec::new();
    cuts.push(window.0);
    cuts.push(window.1);
    for f in [a, b] {
        for i in 0..=f.grid.n_cells {
            let e = f.grid.edge(i);
            if e > window.0 && e < window.1 {
                cuts.push(e);
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        total += (value_at(a, mid) - value_at(b, mid)).abs() * (w[1] - w[0]);
    }
    total
}

/// L¹ distance between two fields restricted to `window`.
pub fn l1_distance(a: &Field, b: &Field, window: (f64, f64)) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let grid = a.grid;
    let mut total = 0.0;
    for i in 0..grid.n_cells {
        let lo = grid.edge(i).max(window.0);
        let hi = grid.edge(i + 1).min(window.1);
        if hi > lo {
            total += (a.values[i] - b.values[i]).abs() * (hi - lo);
        }
    }
    Ok(total)
}
