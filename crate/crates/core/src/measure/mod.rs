//! Measures and densities on a fixed grid, with the divergence, integration
//! and log-partition kernels used throughout the engine.
//!
//! Extended-real conventions: `ln 0 = -inf`, `ln(a/0) = +inf` for `a > 0`,
//! and `0 * (±inf) = 0`. NaN is never produced on purpose; constructors
//! reject it.

mod grid;

use std::sync::Arc;

pub use grid::{Axis, AxisId, GridSpec};

use crate::error::{Error, Result};
use crate::reduce;

/// Input normalization tolerance for probability measures.
pub const PM_INPUT_TOL: f64 = 1e-9;
/// Drift tolerated after an explicit normalization.
pub const PM_INTERNAL_TOL: f64 = 1e-12;

/// A nonnegative finite measure: one cell mass per grid node.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    grid: Arc<GridSpec>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl DiscreteMeasure {
    pub fn new(grid: Arc<GridSpec>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: weights.len(),
            });
        }
        if let Some(k) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidValues(format!(
                "weight {} at node {k} is not a finite nonnegative number",
                weights[k]
            )));
        }
        Ok(Self::from_parts(grid, weights))
    }

    pub(crate) fn from_parts(grid: Arc<GridSpec>, weights: Vec<f64>) -> Self {
        let total_mass = reduce::sum(&weights);
        DiscreteMeasure {
            grid,
            weights,
            total_mass,
        }
    }

    /// Measure with the given Lebesgue density evaluated at the nodes.
    pub fn from_density<F>(grid: Arc<GridSpec>, density: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64,
    {
        let cell = grid.cell_volume();
        let weights = (0..grid.len()).map(|k| density(grid.point(k)) * cell).collect();
        DiscreteMeasure::new(grid, weights)
    }

    /// The uniform probability measure on the grid.
    pub fn uniform(grid: Arc<GridSpec>) -> Self {
        let n = grid.len();
        DiscreteMeasure::from_parts(grid, vec![1.0 / n as f64; n])
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_probability(&self, tol: f64) -> bool {
        (self.total_mass - 1.0).abs() <= tol
    }

    pub(crate) fn require_probability(&self, tol: f64) -> Result<()> {
        if self.is_probability(tol) {
            Ok(())
        } else {
            Err(Error::NotNormalized { mass: self.total_mass })
        }
    }

    pub fn same_grid(&self, other: &DiscreteMeasure) -> bool {
        same_grid(&self.grid, &other.grid)
    }

    /// Marginal along `axis`, as a measure on that axis' 1-D grid.
    pub fn marginal(&self, axis: AxisId) -> Result<DiscreteMeasure> {
        let sub = Arc::new(self.grid.axis_grid(axis)?);
        if self.grid.dim() == 1 {
            return Ok(DiscreteMeasure::from_parts(sub, self.weights.clone()));
        }
        let nx = self.grid.axes()[0].len();
        let ny = self.grid.axes()[1].len();
        let weights = match axis {
            AxisId::X => (0..nx)
                .map(|ix| reduce::sum_by(ny, |iy| self.weights[ix + nx * iy]))
                .collect(),
            AxisId::Y => (0..ny)
                .map(|iy| reduce::sum_by(nx, |ix| self.weights[ix + nx * iy]))
                .collect(),
        };
        Ok(DiscreteMeasure::from_parts(sub, weights))
    }

    /// Radon–Nikodym derivative w.r.t. `base`, with `0/0 = 0` and `a/0 = +inf`.
    pub fn density_wrt(&self, base: &DiscreteMeasure) -> Result<DensityVector> {
        check_grid(&self.grid, &base.grid)?;
        let values = self
            .weights
            .iter()
            .zip(&base.weights)
            .map(|(&p, &q)| ratio(p, q))
            .collect();
        Ok(DensityVector::from_parts(self.grid.clone(), values))
    }

    /// Density w.r.t. Lebesgue measure on the grid's domain.
    pub fn lebesgue_density(&self) -> DensityVector {
        let cell = self.grid.cell_volume();
        let values = self.weights.iter().map(|w| w / cell).collect();
        DensityVector::from_parts(self.grid.clone(), values)
    }

    /// Measure with weights `weights[k] * factor[k]` (`0 * inf = 0`).
    pub fn reweighted(&self, factor: &DensityVector) -> Result<DiscreteMeasure> {
        check_grid(&self.grid, &factor.grid)?;
        let mut weights = Vec::with_capacity(self.len());
        for (k, (&w, &f)) in self.weights.iter().zip(&factor.values).enumerate() {
            let v = ext_mul(w, f);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidValues(format!("reweighting produced {v} at node {k}")));
            }
            weights.push(v);
        }
        Ok(DiscreteMeasure::from_parts(self.grid.clone(), weights))
    }

    /// Total-variation distance `sum |p_k - q_k|`.
    pub fn total_variation(&self, other: &DiscreteMeasure) -> Result<f64> {
        check_grid(&self.grid, &other.grid)?;
        Ok(reduce::sum_by(self.len(), |k| {
            (self.weights[k] - other.weights[k]).abs()
        }))
    }
}

/// An extended-real function on the grid nodes.
///
/// Used for Radon–Nikodym derivatives, constraint statistics and dual
/// increments. Values may be `±inf`, never NaN.
#[derive(Debug, Clone)]
pub struct DensityVector {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
}

impl DensityVector {
    pub fn new(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidValues(format!("NaN at node {k}")));
        }
        Ok(DensityVector { grid, values })
    }

    pub(crate) fn from_parts(grid: Arc<GridSpec>, values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| !v.is_nan()));
        DensityVector { grid, values }
    }

    pub fn constant(grid: Arc<GridSpec>, c: f64) -> Self {
        let n = grid.len();
        DensityVector::from_parts(grid, vec![c; n])
    }

    /// Evaluate `f` at every node.
    pub fn from_fn<F>(grid: Arc<GridSpec>, f: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64,
    {
        let values = (0..grid.len()).map(|k| f(grid.point(k))).collect();
        DensityVector::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise `self - c` (infinite entries stay infinite).
    pub fn shifted(&self, c: f64) -> DensityVector {
        DensityVector::from_parts(self.grid.clone(), self.values.iter().map(|v| v - c).collect())
    }

    /// Pointwise `alpha * self` with `0 * inf = 0`.
    pub fn scaled(&self, alpha: f64) -> DensityVector {
        DensityVector::from_parts(
            self.grid.clone(),
            self.values.iter().map(|&v| ext_mul(alpha, v)).collect(),
        )
    }
}

pub(crate) fn same_grid(a: &Arc<GridSpec>, b: &Arc<GridSpec>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_grid(a: &Arc<GridSpec>, b: &Arc<GridSpec>) -> Result<()> {
    if same_grid(a, b) {
        Ok(())
    } else {
        Err(Error::GridMismatch("operands live on different grids"))
    }
}

/// Product under the `0 * (±inf) = 0` convention.
#[inline]
pub(crate) fn ext_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// `a / b` for `a, b >= 0` with `0/0 = 0` and `a/0 = +inf`.
#[inline]
pub(crate) fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

/// I-divergence `I(p|q) = sum_k p_k ln(p_k / q_k)`.
///
/// `p` must be a probability measure. `q` may be any finite measure; for
/// `c = q(total)` the result is `I(p | q/c) - ln c`, which can be negative
/// when `c > 1`. Returns `+inf` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    check_grid(&p.grid, &q.grid)?;
    p.require_probability(PM_INPUT_TOL)?;
    let c = q.total_mass;
    if p.weights.iter().zip(&q.weights).any(|(&pk, &qk)| pk > 0.0 && qk == 0.0) {
        return Ok(f64::INFINITY);
    }
    let inv_c = 1.0 / c;
    // Each term p ln(p/q') - p + q' = q' phi(p/q' - 1) is nonnegative; the leftover
    // (sum p - sum q') restores I(p|q') exactly.
    let [bregman, q_mass] = reduce::sums_by(p.len(), |k| {
        let pk = p.weights[k];
        let qk = q.weights[k] * inv_c;
        let term = if pk == 0.0 {
            qk
        } else {
            qk * bregman_ratio((pk - qk) / qk)
        };
        [term, qk]
    });
    let both_normalized = (p.total_mass - 1.0).abs() <= PM_INTERNAL_TOL && (c - 1.0).abs() <= PM_INTERNAL_TOL;
    if both_normalized {
        Ok(bregman)
    } else {
        Ok(bregman + (p.total_mass - q_mass) - c.ln())
    }
}

/// `(1+d) ln(1+d) - d`, accurate near `d = 0` where the direct form cancels.
fn bregman_ratio(d: f64) -> f64 {
    if d.abs() < 0.1 {
        // sum_{k>=2} (-1)^k d^k / (k (k-1))
        let mut power = d * d;
        let mut acc = 0.0;
        let mut k = 2.0;
        loop {
            let term = power / (k * (k - 1.0));
            acc += term;
            if term.abs() <= 1e-17 * acc.abs() {
                break;
            }
            power *= -d;
            k += 1.0;
        }
        acc
    } else {
        ((1.0 + d) * d.ln_1p() - d).max(0.0)
    }
}

/// `sum_k f_k m_k` in the canonical compensated order (`0 * inf = 0`).
pub fn integrate(f: &DensityVector, m: &DiscreteMeasure) -> Result<f64> {
    check_grid(&f.grid, &m.grid)?;
    if let Some(node) = (0..m.len()).find(|&k| m.weights[k] > 0.0 && f.values[k].is_infinite()) {
        return Err(Error::InfiniteIntegrand { node });
    }
    Ok(reduce::sum_by(m.len(), |k| ext_mul(f.values[k], m.weights[k])))
}

/// `ln sum_k e^{y_k} m_k`, shifted by the largest exponent over nodes of
/// positive mass so that no term overflows.
pub fn log_partition(y: &DensityVector, m: &DiscreteMeasure) -> Result<f64> {
    check_grid(&y.grid, &m.grid)?;
    if m.total_mass <= 0.0 {
        return Err(Error::Domain("log-partition of a zero measure"));
    }
    let shift = (0..m.len())
        .filter(|&k| m.weights[k] > 0.0)
        .map(|k| y.values[k])
        .fold(f64::NEG_INFINITY, f64::max);
    if shift.is_infinite() {
        return Ok(shift);
    }
    let s = reduce::sum_by(m.len(), |k| {
        let w = m.weights[k];
        if w > 0.0 {
            w * (y.values[k] - shift).exp()
        } else {
            0.0
        }
    });
    Ok(shift + s.ln())
}

/// Rescale to a probability measure; returns the measure and its former mass.
pub fn normalize(m: &DiscreteMeasure) -> Result<(DiscreteMeasure, f64)> {
    let c = m.total_mass;
    if c <= 0.0 {
        return Err(Error::Domain("cannot normalize a measure of zero mass"));
    }
    let weights = m.weights.iter().map(|w| w / c).collect();
    Ok((DiscreteMeasure::from_parts(m.grid.clone(), weights), c))
}
