//! Catalog of convex constraint sets and their exact single-set projections.

use std::sync::Arc;

use crate::dual_solve::{tilt_solve, SignConstraint, TiltProblem};
use crate::error::{Error, Result};
use crate::measure::{
    check_grid, ext_mul, log_partition, normalize, ratio, AxisId, DensityVector, DiscreteMeasure, GridSpec,
    PM_INPUT_TOL,
};
use crate::reduce::{self, Compensated};

/// One convex set of probability measures.
#[derive(Debug, Clone)]
pub enum Constraint {
    /// `{P : ∫ z dP >= 0}`.
    MomentInequality { z: Arc<DensityVector> },
    /// `{P : ∫ z dP = 0}`.
    MomentEquality { z: Arc<DensityVector> },
    /// `{P : P's marginal on `axis` equals target}`.
    FixedMarginal { axis: AxisId, target: DiscreteMeasure },
    /// `{P : P's marginal on `axis` is stochastically >= target}`.
    StochasticOrderMarginal { axis: AxisId, target: DiscreteMeasure },
}

impl Constraint {
    pub fn moment_inequality(z: DensityVector) -> Self {
        Constraint::MomentInequality { z: Arc::new(z) }
    }

    pub fn moment_equality(z: DensityVector) -> Self {
        Constraint::MomentEquality { z: Arc::new(z) }
    }

    pub fn fixed_marginal(axis: AxisId, target: DiscreteMeasure) -> Self {
        Constraint::FixedMarginal { axis, target }
    }

    pub fn stochastic_order(axis: AxisId, target: DiscreteMeasure) -> Self {
        Constraint::StochasticOrderMarginal { axis, target }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Constraint::MomentInequality { .. } => "moment_inequality",
            Constraint::MomentEquality { .. } => "moment_equality",
            Constraint::FixedMarginal { .. } => "fixed_marginal",
            Constraint::StochasticOrderMarginal { .. } => "stochastic_order_marginal",
        }
    }

    /// True for sets cut out by linear equalities.
    pub fn is_linear(&self) -> bool {
        matches!(
            self,
            Constraint::MomentEquality { .. } | Constraint::FixedMarginal { .. }
        )
    }

    /// Check that the constraint is well formed on `grid`.
    pub fn validate(&self, grid: &Arc<GridSpec>) -> Result<()> {
        match self {
            Constraint::MomentInequality { z } | Constraint::MomentEquality { z } => check_grid(grid, z.grid()),
            Constraint::FixedMarginal { axis, target } | Constraint::StochasticOrderMarginal { axis, target } => {
                let sub = Arc::new(grid.axis_grid(*axis)?);
                check_grid(&sub, target.grid())?;
                target.require_probability(PM_INPUT_TOL)
            }
        }
    }

    pub fn feasible(&self, p: &DiscreteMeasure, tol: f64) -> Result<Feasibility> {
        feasible(self, p, tol)
    }

    pub fn project(&self, s: &DiscreteMeasure) -> Result<Projection> {
        project(self, s)
    }
}

/// A dual increment `y` from one projection step.
#[derive(Debug, Clone)]
pub enum DualIncrement {
    Zero,
    /// `alpha * z`.
    Tilt {
        alpha: f64,
        z: Arc<DensityVector>,
    },
    /// A function of one coordinate, one value per axis node.
    Axis {
        axis: AxisId,
        values: Vec<f64>,
    },
}

impl DualIncrement {
    /// Value at node `k` of `grid`.
    #[inline]
    pub fn value(&self, grid: &GridSpec, k: usize) -> f64 {
        match self {
            DualIncrement::Zero => 0.0,
            DualIncrement::Tilt { alpha, z } => ext_mul(*alpha, z.values()[k]),
            DualIncrement::Axis { axis, values } => values[grid.axis_index(k, *axis)],
        }
    }

    pub fn to_density(&self, grid: &Arc<GridSpec>) -> DensityVector {
        let values = (0..grid.len()).map(|k| self.value(grid, k)).collect();
        DensityVector::from_parts(grid.clone(), values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub violation: f64,
}

/// Result of one exact projection `p = pi(s)`.
#[derive(Debug, Clone)]
pub struct Projection {
    /// The projected probability measure.
    pub measure: DiscreteMeasure,
    /// `dp/ds = e^y / ∫ e^y ds`.
    pub increment: DualIncrement,
    /// `I(p|s) = -ln ∫ e^y ds`.
    pub i_div: f64,
}

fn marginal_target(p: &DiscreteMeasure, axis: AxisId, target: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let m = p.marginal(axis)?;
    check_grid(m.grid(), target.grid())?;
    Ok(m)
}

/// Membership test with the violation measure of each kind.
///
/// Stochastic order uses left-closed prefix CDFs `F(j) = sum_{l <= j}`.
pub fn feasible(c: &Constraint, p: &DiscreteMeasure, tol: f64) -> Result<Feasibility> {
    let violation = match c {
        Constraint::MomentInequality { z } => (-crate::measure::integrate(z, p)?).max(0.0),
        Constraint::MomentEquality { z } => crate::measure::integrate(z, p)?.abs(),
        Constraint::FixedMarginal { axis, target } => {
            let m = marginal_target(p, *axis, target)?;
            reduce::sum_by(m.len(), |j| (m.weights()[j] - target.weights()[j]).abs())
        }
        Constraint::StochasticOrderMarginal { axis, target } => {
            let m = marginal_target(p, *axis, target)?;
            let (mut fp, mut fg) = (Compensated::default(), Compensated::default());
            let mut worst = 0.0_f64;
            for (a, b) in m.weights().iter().zip(target.weights()) {
                fp.add(*a);
                fg.add(*b);
                worst = worst.max(fp.value() - fg.value());
            }
            worst
        }
    };
    Ok(Feasibility {
        feasible: violation <= tol,
        violation,
    })
}

/// Exact I-projection of `s` (normalized first) onto the constraint set.
pub fn project(c: &Constraint, s: &DiscreteMeasure) -> Result<Projection> {
    project_with(c, s, TiltProblem::DEFAULT_ALPHA_CAP, TiltProblem::DEFAULT_TOL_GRAD)
}

/// [`project`] with explicit tilt-solver settings.
pub fn project_with(c: &Constraint, s: &DiscreteMeasure, alpha_cap: f64, tol_grad: f64) -> Result<Projection> {
    match c {
        Constraint::MomentInequality { z } => project_tilt(z, s, SignConstraint::NonNegative, alpha_cap, tol_grad),
        Constraint::MomentEquality { z } => project_tilt(z, s, SignConstraint::Free, alpha_cap, tol_grad),
        Constraint::FixedMarginal { axis, target } => project_marginal(*axis, target, s, false),
        Constraint::StochasticOrderMarginal { axis, target } => project_marginal(*axis, target, s, true),
    }
}

fn project_tilt(
    z: &Arc<DensityVector>,
    s: &DiscreteMeasure,
    sign: SignConstraint,
    alpha_cap: f64,
    tol_grad: f64,
) -> Result<Projection> {
    let mut tp = TiltProblem::new(s, z, sign);
    tp.alpha_cap = alpha_cap;
    tp.tol_grad = tol_grad;
    let sol = tilt_solve(&tp)?;
    let zv = z.values();
    let weights = s
        .weights()
        .iter()
        .zip(zv)
        .map(|(&w, &v)| {
            if w > 0.0 {
                w * (sol.alpha * v - sol.log_norm).exp()
            } else {
                0.0
            }
        })
        .collect();
    let increment = if sol.alpha == 0.0 {
        DualIncrement::Zero
    } else {
        DualIncrement::Tilt {
            alpha: sol.alpha,
            z: z.clone(),
        }
    };
    Ok(Projection {
        measure: DiscreteMeasure::from_parts(s.grid().clone(), weights),
        increment,
        i_div: -sol.log_norm,
    })
}

fn project_marginal(axis: AxisId, target: &DiscreteMeasure, s: &DiscreteMeasure, isotonic: bool) -> Result<Projection> {
    let (s1, _) = normalize(s)?;
    let m = marginal_target(&s1, axis, target)?;
    let (mw, gw) = (m.weights(), target.weights());
    let mut r = Vec::with_capacity(mw.len());
    for (j, (&mj, &gj)) in mw.iter().zip(gw).enumerate() {
        if mj == 0.0 && gj > 0.0 {
            return Err(Error::ProjectionUndefined { node: j });
        }
        r.push(ratio(gj, mj));
    }
    let a = if isotonic { isotonic_ratio(&r, mw)? } else { r };

    let grid = s.grid();
    let weights = s1
        .weights()
        .iter()
        .enumerate()
        .map(|(k, &w)| ext_mul(w, a[grid.axis_index(k, axis)]))
        .collect();
    let measure = DiscreteMeasure::from_parts(grid.clone(), weights);

    // y = ln a recentered so that ∫ y dG = 0
    let center = reduce::sum_by(a.len(), |j| if gw[j] > 0.0 { gw[j] * a[j].ln() } else { 0.0 });
    let values: Vec<f64> = a.iter().map(|&aj| aj.ln() - center).collect();
    let increment = DualIncrement::Axis { axis, values };
    let i_div = -log_partition(&increment.to_density(grid), s)?;
    Ok(Projection {
        measure,
        increment,
        i_div,
    })
}

/// Weighted isotonic regression over the nodes of positive weight; the
/// remaining slots copy a neighbour so the result stays nondecreasing.
fn isotonic_ratio(r: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let idx: Vec<usize> = (0..r.len()).filter(|&j| w[j] > 0.0).collect();
    if idx.is_empty() {
        return Err(Error::Domain("marginal has no mass"));
    }
    let vals: Vec<f64> = idx.iter().map(|&j| r[j]).collect();
    let wts: Vec<f64> = idx.iter().map(|&j| w[j]).collect();
    let fit = pava(&vals, &wts)?;
    let mut out = vec![0.0; r.len()];
    let mut next = 0;
    let mut last = fit[0];
    for (j, slot) in out.iter_mut().enumerate() {
        if next < idx.len() && idx[next] == j {
            last = fit[next];
            next += 1;
        }
        *slot = last;
    }
    Ok(out)
}

/// Pool-adjacent-violators: the nondecreasing vector closest to `values` in
/// weighted least squares. Equal neighbours are not pooled.
pub fn pava(values: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("pava needs at least one value"));
    }
    if values.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: values.len(),
            got: weights.len(),
        });
    }
    if let Some(k) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidValues(format!(
            "pava weight {} at {k} is not positive",
            weights[k]
        )));
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidValues(format!(
            "pava value {} at {k} is not finite",
            values[k]
        )));
    }
    // blocks: (weighted sum, weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let mut cur = (v * w, w, 1usize);
        while let Some(&(sw, ww, n)) = blocks.last() {
            if sw / ww > cur.0 / cur.1 {
                blocks.pop();
                cur = (sw + cur.0, ww + cur.1, n + cur.2);
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(values.len());
    for (sw, w, n) in blocks {
        let mean = sw / w;
        out.extend(std::iter::repeat_n(mean, n));
    }
    Ok(out)
}
