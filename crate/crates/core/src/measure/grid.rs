use std::fmt;

use crate::error::{Error, Result};

/// Coordinate axis of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisId {
    X,
    Y,
}

impl AxisId {
    pub fn position(self) -> usize {
        match self {
            AxisId::X => 0,
            AxisId::Y => 1,
        }
    }
}

impl fmt::Display for AxisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisId::X => f.write_str("x"),
            AxisId::Y => f.write_str("y"),
        }
    }
}

/// One axis of a uniform midpoint grid: `n` cells of equal width on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidGrid(format!(
                "axis domain [{lo}, {hi}] must be a finite interval with lo < hi"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("axis needs at least one point".into()));
        }
        Ok(Axis { lo, hi, n })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    /// Cell-centered node `j`.
    pub fn node(&self, j: usize) -> f64 {
        self.lo + (j as f64 + 0.5) * self.width()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
}

/// A 1-D or 2-D rectangular midpoint grid.
///
/// Nodes are numbered x-fastest: node `k` of a 2-D grid sits at
/// `(ix, iy) = (k % nx, k / nx)`. Every cell carries the same quadrature
/// weight, the cell volume.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        match axes.len() {
            1 | 2 => Ok(GridSpec { axes }),
            d => Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {d}"))),
        }
    }

    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        GridSpec::new(vec![Axis::new(lo, hi, n)?])
    }

    pub fn rectangle(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Self> {
        GridSpec::new(vec![Axis::new(x.0, x.1, x.2)?, Axis::new(y.0, y.1, y.2)?])
    }

    /// Midpoint grid on `(0, 1)`.
    pub fn unit_interval(n: usize) -> Result<Self> {
        GridSpec::line(0.0, 1.0, n)
    }

    /// Midpoint grid on the unit square with `n` points per axis.
    pub fn unit_square(n: usize) -> Result<Self> {
        GridSpec::rectangle((0.0, 1.0, n), (0.0, 1.0, n))
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, id: AxisId) -> Result<&Axis> {
        self.axes
            .get(id.position())
            .ok_or_else(|| Error::InvalidGrid(format!("axis {id} does not exist on a {}-D grid", self.dim())))
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::width).product()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.hi - a.lo).product()
    }

    pub fn quadrature_weights(&self) -> Vec<f64> {
        vec![self.cell_volume(); self.len()]
    }

    /// Index of node `k` along `axis`.
    #[inline]
    pub fn axis_index(&self, k: usize, axis: AxisId) -> usize {
        match axis {
            AxisId::X => k % self.axes[0].n,
            AxisId::Y => k / self.axes[0].n,
        }
    }

    /// Coordinate of node `k` along `axis`.
    #[inline]
    pub fn coord(&self, k: usize, axis: AxisId) -> f64 {
        self.axes[axis.position()].node(self.axis_index(k, axis))
    }

    /// Coordinates of node `k`; the slice has `dim()` entries.
    pub fn point(&self, k: usize) -> [f64; 2] {
        let x = self.coord(k, AxisId::X);
        let y = if self.dim() == 2 { self.coord(k, AxisId::Y) } else { 0.0 };
        [x, y]
    }

    /// The 1-D grid of a single axis.
    pub fn axis_grid(&self, axis: AxisId) -> Result<GridSpec> {
        Ok(GridSpec {
            axes: vec![*self.axis(axis)?],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_volume() {
        let g = GridSpec::rectangle((-1.0, 2.0, 7), (0.5, 1.0, 5)).unwrap();
        assert_eq!(g.len(), 35);
        let total: f64 = g.quadrature_weights().iter().sum();
        assert!((total - g.volume()).abs() < 1e-13);
        assert!(g.quadrature_weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn nodes_are_cell_centers() {
        let g = GridSpec::unit_interval(4).unwrap();
        assert_eq!(g.axes()[0].nodes(), vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn x_fastest_ordering() {
        let g = GridSpec::unit_square(3).unwrap();
        assert_eq!(g.axis_index(4, AxisId::X), 1);
        assert_eq!(g.axis_index(4, AxisId::Y), 1);
        assert_eq!(g.axis_index(5, AxisId::X), 2);
        assert_eq!(g.axis_index(5, AxisId::Y), 1);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Axis::new(1.0, 1.0, 3).is_err());
        assert!(Axis::new(0.0, 1.0, 0).is_err());
        assert!(Axis::new(0.0, f64::INFINITY, 3).is_err());
        assert!(GridSpec::new(vec![]).is_err());
        let a = Axis::new(0.0, 1.0, 2).unwrap();
        assert!(GridSpec::new(vec![a, a, a]).is_err());
        assert!(GridSpec::unit_interval(3).unwrap().axis(AxisId::Y).is_err());
    }
}
