//! Brute-force reference solvers for small instances.
//!
//! Nothing here calls the engine, the projection rules or the tilt solver;
//! the only shared piece is [`kl_divergence`]. Two independent paths:
//!
//! * a parametric path for moment constraints, which enumerates active sets
//!   and minimizes `ln ∫ e^{sum alpha_j z_j} dq` by damped Newton on each;
//! * a primal-dual interior-point method on the simplex that handles every
//!   constraint kind as linear equalities and inequalities.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::constraints::Constraint;
use crate::error::{Error, Result};
use crate::measure::{kl_divergence, AxisId, DensityVector, DiscreteMeasure, GridSpec};

pub const MAX_NODES: usize = 64;
pub const MAX_CONSTRAINTS: usize = 3;
/// Residual below which the parametric path is trusted outright.
pub const KKT_ACCEPT: f64 = 1e-8;
/// Residual above which both paths count as failed.
pub const KKT_FAIL: f64 = 1e-6;

/// A desk-sized problem: full-support base on at most 64 nodes and at most
/// three constraints.
#[derive(Debug, Clone)]
pub struct SmallInstance {
    pub q: DiscreteMeasure,
    pub constraints: Vec<Constraint>,
}

impl SmallInstance {
    pub fn new(q: DiscreteMeasure, constraints: Vec<Constraint>) -> Result<Self> {
        if q.len() > MAX_NODES {
            return Err(Error::Precondition(format!(
                "oracle supports at most {MAX_NODES} nodes"
            )));
        }
        if constraints.len() > MAX_CONSTRAINTS {
            return Err(Error::Precondition(format!(
                "oracle supports at most {MAX_CONSTRAINTS} constraints"
            )));
        }
        if q.weights().iter().any(|&w| w <= 0.0) {
            return Err(Error::Precondition("oracle base must have full support".into()));
        }
        if (q.total_mass() - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { mass: q.total_mass() });
        }
        for c in &constraints {
            c.validate(q.grid())?;
        }
        Ok(SmallInstance { q, constraints })
    }

    fn moments(&self) -> Option<Vec<(&[f64], bool)>> {
        self.constraints
            .iter()
            .map(|c| match c {
                Constraint::MomentInequality { z } => Some((z.values(), false)),
                Constraint::MomentEquality { z } => Some((z.values(), true)),
                _ => None,
            })
            .collect()
    }
}

/// An oracle answer with its optimality residual.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub measure: DiscreteMeasure,
    pub residual: f64,
}

/// The I-projection of `inst.q` onto the intersection of its constraints.
///
/// Tries the parametric path when every constraint is a moment constraint,
/// then the interior-point path; fails if neither certifies a KKT residual
/// of at most 1e-6.
pub fn brute_force_projection(inst: &SmallInstance) -> Result<DiscreteMeasure> {
    let mut best: Option<OracleSolution> = None;
    if inst.moments().is_some() {
        if let Ok(sol) = parametric_projection(inst) {
            if sol.residual <= KKT_ACCEPT {
                return Ok(sol.measure);
            }
            best = Some(sol);
        }
    }
    if let Ok(sol) = interior_point_projection(inst) {
        if best.as_ref().is_none_or(|b| sol.residual < b.residual) {
            best = Some(sol);
        }
    }
    match best {
        Some(sol) if sol.residual <= KKT_FAIL => Ok(sol.measure),
        Some(sol) => Err(Error::OracleFailure { residual: sol.residual }),
        None => Err(Error::OracleFailure {
            residual: f64::INFINITY,
        }),
    }
}

struct Tilted {
    log_norm: f64,
    p: Vec<f64>,
}

fn tilt(q: &[f64], zs: &[&[f64]], alpha: &[f64]) -> Tilted {
    let expo: Vec<f64> = (0..q.len())
        .map(|k| zs.iter().zip(alpha).map(|(z, a)| a * z[k]).sum::<f64>())
        .collect();
    let shift = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = q.iter().zip(&expo).map(|(qk, e)| qk * (e - shift).exp()).collect();
    let total: f64 = w.iter().sum();
    Tilted {
        log_norm: shift + total.ln(),
        p: w.into_iter().map(|x| x / total).collect(),
    }
}

fn mean(p: &[f64], z: &[f64]) -> f64 {
    p.iter().zip(z).map(|(a, b)| a * b).sum()
}

/// Damped Newton on `psi(alpha) = ln ∫ e^{sum alpha_j z_j} dq` over the
/// free coordinates in `active`.
fn newton_on(q: &[f64], zs: &[&[f64]]) -> Option<Vec<f64>> {
    let d = zs.len();
    let mut alpha = vec![0.0; d];
    if d == 0 {
        return Some(alpha);
    }
    for _ in 0..200 {
        let t = tilt(q, zs, &alpha);
        let g: Vec<f64> = zs.iter().map(|z| mean(&t.p, z)).collect();
        if g.iter().all(|v| v.abs() <= 1e-14) {
            return Some(alpha);
        }
        let h = DMatrix::from_fn(d, d, |a, b| {
            let (ma, mb) = (g[a], g[b]);
            t.p.iter()
                .enumerate()
                .map(|(k, pk)| pk * (zs[a][k] - ma) * (zs[b][k] - mb))
                .sum::<f64>()
        });
        let gv = DVector::from_vec(g.clone());
        let step = h
            .clone()
            .lu()
            .solve(&gv)
            .or_else(|| h.pseudo_inverse(1e-14).ok().map(|pi| pi * &gv))?;
        let slope = -gv.dot(&step);
        let mut lr = 1.0;
        loop {
            let cand: Vec<f64> = alpha.iter().zip(step.iter()).map(|(a, s)| a - lr * s).collect();
            let v = tilt(q, zs, &cand).log_norm;
            if v <= t.log_norm + 1e-4 * lr * slope || lr < 1e-12 {
                alpha = cand;
                break;
            }
            lr *= 0.5;
        }
        if alpha.iter().any(|a| !a.is_finite() || a.abs() > 1e6) {
            return None;
        }
    }
    Some(alpha)
}

/// Active-set enumeration for moment constraints.
pub fn parametric_projection(inst: &SmallInstance) -> Result<OracleSolution> {
    let moments = inst
        .moments()
        .ok_or_else(|| Error::Precondition("parametric path needs moment constraints only".into()))?;
    let q = inst.q.weights();
    let t = moments.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << t) {
        // equalities are always active
        if moments
            .iter()
            .enumerate()
            .any(|(j, (_, eq))| *eq && mask & (1 << j) == 0)
        {
            continue;
        }
        let active: Vec<usize> = (0..t).filter(|j| mask & (1 << j) != 0).collect();
        let zs: Vec<&[f64]> = active.iter().map(|&j| moments[j].0).collect();
        let Some(sub) = newton_on(q, &zs) else { continue };
        let mut alpha = vec![0.0; t];
        for (a, &j) in sub.iter().zip(&active) {
            alpha[j] = *a;
        }
        let all: Vec<&[f64]> = moments.iter().map(|(z, _)| *z).collect();
        let tl = tilt(q, &all, &alpha);
        let mut residual = 0.0_f64;
        for (j, (z, eq)) in moments.iter().enumerate() {
            let m = mean(&tl.p, z);
            if mask & (1 << j) != 0 {
                residual = residual.max(m.abs());
                if !eq {
                    residual = residual.max(-alpha[j]);
                }
            } else {
                residual = residual.max(-m);
            }
        }
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, tl.p));
        }
    }
    let (residual, p) = best.ok_or(Error::OracleFailure {
        residual: f64::INFINITY,
    })?;
    Ok(OracleSolution {
        measure: DiscreteMeasure::new(inst.q.grid().clone(), p)?,
        residual,
    })
}

struct LinearSystem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    g: DMatrix<f64>,
    h: DVector<f64>,
}

fn axis_rows(grid: &GridSpec, axis: AxisId) -> Vec<Vec<f64>> {
    let len = grid.axes()[axis.position()].len();
    let mut rows = vec![vec![0.0; grid.len()]; len];
    #[allow(clippy::needless_range_loop)]
    for k in 0..grid.len() {
        let j = if grid.dim() == 1 { k } else { grid.axis_index(k, axis) };
        rows[j][k] = 1.0;
    }
    rows
}

fn linearize(inst: &SmallInstance) -> Result<LinearSystem> {
    let n = inst.q.len();
    let grid = inst.q.grid();
    let mut eq_rows: Vec<(Vec<f64>, f64)> = vec![(vec![1.0; n], 1.0)];
    let mut ineq_rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &inst.constraints {
        match c {
            Constraint::MomentInequality { z } => ineq_rows.push((z.values().to_vec(), 0.0)),
            Constraint::MomentEquality { z } => eq_rows.push((z.values().to_vec(), 0.0)),
            Constraint::FixedMarginal { axis, target } => {
                let rows = axis_rows(grid, *axis);
                let last = rows.len() - 1;
                // the last row follows from the others and total mass one
                for (j, row) in rows.into_iter().enumerate().take(last) {
                    eq_rows.push((row, target.weights()[j]));
                }
            }
            Constraint::StochasticOrderMarginal { axis, target } => {
                let rows = axis_rows(grid, *axis);
                let mut cum_row = vec![0.0; n];
                let mut cum_g = 0.0;
                for (j, row) in rows.iter().enumerate().take(rows.len() - 1) {
                    for (c, r) in cum_row.iter_mut().zip(row) {
                        *c += r;
                    }
                    cum_g += target.weights()[j];
                    ineq_rows.push((cum_row.iter().map(|v| -v).collect(), -cum_g));
                }
            }
        }
    }
    let to_mat = |rows: &[(Vec<f64>, f64)]| {
        (
            DMatrix::from_fn(rows.len(), n, |r, c| rows[r].0[c]),
            DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1)),
        )
    };
    let (a, b) = to_mat(&eq_rows);
    let (g, h) = to_mat(&ineq_rows);
    Ok(LinearSystem { a, b, g, h })
}

struct Residuals {
    dual: DVector<f64>,
    eq: DVector<f64>,
    ineq: DVector<f64>,
    comp: DVector<f64>,
}

impl Residuals {
    fn norm(&self) -> f64 {
        [&self.dual, &self.eq, &self.ineq, &self.comp]
            .iter()
            .map(|v| v.amax())
            .fold(0.0, f64::max)
    }
}

#[allow(clippy::too_many_arguments)]
fn residuals(
    sys: &LinearSystem,
    q: &DVector<f64>,
    p: &DVector<f64>,
    s: &DVector<f64>,
    lam: &DVector<f64>,
    nu: &DVector<f64>,
    target: f64,
) -> Residuals {
    let grad = p.zip_map(q, |pk, qk| (pk / qk).ln() + 1.0);
    Residuals {
        dual: grad - sys.a.tr_mul(nu) - sys.g.tr_mul(lam),
        eq: &sys.a * p - &sys.b,
        ineq: &sys.g * p - s - &sys.h,
        comp: lam.component_mul(s).add_scalar(-target),
    }
}

fn max_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(1.0, f64::min)
}

/// Primal-dual interior-point method for `min sum p ln(p/q)` subject to the
/// constraints written as linear rows.
pub fn interior_point_projection(inst: &SmallInstance) -> Result<OracleSolution> {
    let sys = linearize(inst)?;
    let n = inst.q.len();
    let m = sys.g.nrows();
    let r = sys.a.nrows();
    let q = DVector::from_column_slice(inst.q.weights());
    let mut p = q.clone();
    let mut s = (&sys.g * &p - &sys.h).map(|v| v.max(1.0));
    let mut lam = DVector::from_element(m, 1.0);
    let mut nu = DVector::zeros(r);

    for _ in 0..500 {
        let mu = if m > 0 { lam.dot(&s) / m as f64 } else { 0.0 };
        let res0 = residuals(&sys, &q, &p, &s, &lam, &nu, 0.0);
        if res0.norm() <= 1e-13 {
            break;
        }
        let sigma = if mu > 1e-6 { 0.1 } else { 0.01 };
        let target = sigma * mu;
        let res = residuals(&sys, &q, &p, &s, &lam, &nu, target);

        // reduced system in (dp, dnu)
        let d = lam.component_div(&s);
        let mut hmat = sys.g.tr_mul(&DMatrix::from_diagonal(&d)) * &sys.g;
        for k in 0..n {
            hmat[(k, k)] += 1.0 / p[k];
        }
        let rhs_p = -&res.dual - sys.g.tr_mul(&d.component_mul(&res.ineq)) - sys.g.tr_mul(&res.comp.component_div(&s));
        let mut kkt = DMatrix::zeros(n + r, n + r);
        kkt.view_mut((0, 0), (n, n)).copy_from(&hmat);
        kkt.view_mut((0, n), (n, r)).copy_from(&(-sys.a.transpose()));
        kkt.view_mut((n, 0), (r, n)).copy_from(&sys.a);
        let mut rhs = DVector::zeros(n + r);
        rhs.rows_mut(0, n).copy_from(&rhs_p);
        rhs.rows_mut(n, r).copy_from(&(-&res.eq));
        let sol = kkt
            .clone()
            .lu()
            .solve(&rhs)
            .or_else(|| kkt.pseudo_inverse(1e-15).ok().map(|pi| pi * &rhs))
            .ok_or(Error::OracleFailure {
                residual: f64::INFINITY,
            })?;
        let dp = sol.rows(0, n).into_owned();
        let dnu = sol.rows(n, r).into_owned();
        let dlam = d.component_mul(&(-&res.ineq - &sys.g * &dp)) - res.comp.component_div(&s);
        let ds = (-&res.comp - s.component_mul(&dlam)).component_div(&lam);

        let mut step = 0.995 * max_step(&p, &dp).min(max_step(&s, &ds)).min(max_step(&lam, &dlam));
        step = step.min(1.0);
        let before = res.norm();
        loop {
            let (p1, s1, l1, n1) = (&p + &dp * step, &s + &ds * step, &lam + &dlam * step, &nu + &dnu * step);
            let after = residuals(&sys, &q, &p1, &s1, &l1, &n1, target).norm();
            if after <= (1.0 - 1e-4 * step) * before || step < 1e-10 {
                p = p1;
                s = s1;
                lam = l1;
                nu = n1;
                break;
            }
            step *= 0.5;
        }
    }
    let residual = residuals(&sys, &q, &p, &s, &lam, &nu, 0.0).norm();
    let total: f64 = p.iter().sum();
    let weights: Vec<f64> = p.iter().map(|v| v.max(0.0) / total).collect();
    Ok(OracleSolution {
        measure: DiscreteMeasure::new(inst.q.grid().clone(), weights)?,
        residual,
    })
}

/// `max_p [I(p|r) + I(r|s) - I(p|s)]` over the samples; at most ~0 when `r`
/// is the projection of `s` onto a set containing every sample.
pub fn check_pythagorean(r: &DiscreteMeasure, s: &DiscreteMeasure, samples: &[DiscreteMeasure]) -> Result<f64> {
    let rs = kl_divergence(r, s)?;
    let mut worst = f64::NEG_INFINITY;
    for p in samples {
        let v = kl_divergence(p, r)? + rs - kl_divergence(p, s)?;
        worst = worst.max(v);
    }
    Ok(worst)
}

fn satisfies(p: &[f64], grid: &GridSpec, constraints: &[Constraint], tol: f64) -> bool {
    constraints.iter().all(|c| match c {
        Constraint::MomentInequality { z } => mean(p, z.values()) >= -tol,
        Constraint::MomentEquality { z } => mean(p, z.values()).abs() <= tol,
        Constraint::FixedMarginal { axis, target } | Constraint::StochasticOrderMarginal { axis, target } => {
            let rows = axis_rows(grid, *axis);
            let marg: Vec<f64> = rows.iter().map(|row| mean(p, row)).collect();
            let fixed = matches!(c, Constraint::FixedMarginal { .. });
            let (mut fp, mut fg) = (0.0, 0.0);
            marg.iter().zip(target.weights()).all(|(a, b)| {
                fp += a;
                fg += b;
                if fixed {
                    (a - b).abs() <= tol
                } else {
                    fp - fg <= tol
                }
            })
        }
    })
}

/// Random feasible measures near `base`: exponential tilts of `base` by
/// nonnegative combinations of the moment statistics, kept only when they
/// satisfy every constraint, plus mixtures of accepted samples.
pub fn feasible_tilt_samples<R: Rng + ?Sized>(
    base: &DiscreteMeasure,
    constraints: &[Constraint],
    count: usize,
    rng: &mut R,
) -> Result<Vec<DiscreteMeasure>> {
    let zs: Vec<&[f64]> = constraints
        .iter()
        .filter_map(|c| match c {
            Constraint::MomentInequality { z } | Constraint::MomentEquality { z } => Some(z.values()),
            _ => None,
        })
        .collect();
    let grid = base.grid();
    let b = base.weights();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 200 * count.max(1) {
        attempts += 1;
        if out.len() >= 2 && rng.random_bool(0.25) {
            let i = rng.random_range(0..out.len());
            let j = rng.random_range(0..out.len());
            let w: f64 = rng.random();
            let mix: Vec<f64> = out[i].iter().zip(&out[j]).map(|(a, c)| w * a + (1.0 - w) * c).collect();
            out.push(mix);
            continue;
        }
        let scale = 10f64.powf(rng.random_range(-3.0..0.5));
        let alpha: Vec<f64> = zs.iter().map(|_| scale * rng.random::<f64>()).collect();
        let expo: Vec<f64> = (0..b.len())
            .map(|k| {
                zs.iter()
                    .zip(&alpha)
                    .map(|(z, a)| if b[k] > 0.0 { a * z[k] } else { 0.0 })
                    .sum()
            })
            .collect();
        let shift = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = b.iter().zip(&expo).map(|(bk, e)| bk * (e - shift).exp()).collect();
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.into_iter().map(|x| x / total).collect();
        if satisfies(&p, grid, constraints, 0.0) {
            out.push(p);
        }
    }
    out.into_iter().map(|w| DiscreteMeasure::new(grid.clone(), w)).collect()
}

/// A random instance with 2 to 10 atoms and 1 to 3 moment inequalities
/// `∫ (g - c) dP >= 0`, each threshold chosen so that a random
/// full-support measure satisfies it with slack.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> SmallInstance {
    let n = rng.random_range(2..=10);
    let grid = Arc::new(GridSpec::unit_interval(n).expect("nonempty grid"));
    let pm = |rng: &mut R| -> Vec<f64> {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let t: f64 = w.iter().sum();
        w.into_iter().map(|x| x / t).collect()
    };
    let q = DiscreteMeasure::new(grid.clone(), pm(rng)).expect("valid weights");
    let v = pm(rng);
    let t = rng.random_range(1..=3);
    let constraints = (0..t)
        .map(|_| {
            let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let margin = rng.random_range(0.0..0.1);
            let c = mean(&v, &g) - margin;
            let z = DensityVector::new(grid.clone(), g.into_iter().map(|x| x - c).collect()).expect("finite");
            Constraint::moment_inequality(z)
        })
        .collect();
    SmallInstance { q, constraints }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(n: usize) -> Arc<GridSpec> {
        Arc::new(GridSpec::unit_interval(n).unwrap())
    }

    fn two_atom(q: [f64; 2]) -> SmallInstance {
        let g = line(2);
        let z = DensityVector::new(g.clone(), vec![-1.0, 1.0]).unwrap();
        SmallInstance::new(
            DiscreteMeasure::new(g, q.to_vec()).unwrap(),
            vec![Constraint::moment_inequality(z)],
        )
        .unwrap()
    }

    #[test]
    fn no_constraints_returns_base() {
        let g = line(4);
        let q = DiscreteMeasure::new(g, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let inst = SmallInstance::new(q.clone(), vec![]).unwrap();
        let p = brute_force_projection(&inst).unwrap();
        for (a, b) in p.weights().iter().zip(q.weights()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn two_atom_cases() {
        let p = brute_force_projection(&two_atom([0.5, 0.5])).unwrap();
        assert!((p.weights()[0] - 0.5).abs() < 1e-12);
        let p = brute_force_projection(&two_atom([0.8, 0.2])).unwrap();
        assert!((p.weights()[0] - 0.5).abs() < 1e-10);
        let ip = interior_point_projection(&two_atom([0.8, 0.2])).unwrap();
        assert!(ip.residual < 1e-9, "{}", ip.residual);
        assert!((ip.measure.weights()[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_oversized_or_degenerate_instances() {
        let g = line(65);
        assert!(SmallInstance::new(DiscreteMeasure::uniform(g), vec![]).is_err());
        let g = line(2);
        let q = DiscreteMeasure::new(g, vec![0.0, 1.0]).unwrap();
        assert!(SmallInstance::new(q, vec![]).is_err());
    }

    #[test]
    fn paths_agree_on_random_moment_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let inst = random_instance(&mut rng);
            let a = parametric_projection(&inst).unwrap();
            let b = interior_point_projection(&inst).unwrap();
            assert!(a.residual <= KKT_ACCEPT, "parametric residual {}", a.residual);
            assert!(b.residual <= KKT_ACCEPT, "interior-point residual {}", b.residual);
            let tv = a.measure.total_variation(&b.measure).unwrap();
            assert!(tv <= 1e-6, "tv {tv}");
            assert!(satisfies(a.measure.weights(), inst.q.grid(), &inst.constraints, 1e-8));
        }
    }

    #[test]
    fn interior_point_fixed_marginals_match_scaling() {
        let g = Arc::new(GridSpec::unit_square(3).unwrap());
        let q = DiscreteMeasure::new(g.clone(), (1..=9).map(|k| k as f64 / 45.0).collect()).unwrap();
        let gx = DiscreteMeasure::new(Arc::new(g.axis_grid(AxisId::X).unwrap()), vec![0.2, 0.5, 0.3]).unwrap();
        let gy = DiscreteMeasure::new(Arc::new(g.axis_grid(AxisId::Y).unwrap()), vec![0.4, 0.4, 0.2]).unwrap();
        let inst = SmallInstance::new(
            q.clone(),
            vec![
                Constraint::fixed_marginal(AxisId::X, gx.clone()),
                Constraint::fixed_marginal(AxisId::Y, gy.clone()),
            ],
        )
        .unwrap();
        let sol = interior_point_projection(&inst).unwrap();
        assert!(sol.residual < 1e-9, "{}", sol.residual);
        // plain row/column scaling to a fixed point
        let mut p = q.weights().to_vec();
        for _ in 0..2000 {
            for (axis, target) in [(AxisId::X, &gx), (AxisId::Y, &gy)] {
                let rows = axis_rows(&g, axis);
                for (row, t) in rows.iter().zip(target.weights()) {
                    let m = mean(&p, row);
                    for k in 0..9 {
                        if row[k] > 0.0 {
                            p[k] *= t / m;
                        }
                    }
                }
            }
        }
        for (a, b) in sol.measure.weights().iter().zip(&p) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn pythagorean_check_on_exact_projection() {
        let inst = two_atom([0.8, 0.2]);
        let r = brute_force_projection(&inst).unwrap();
        assert_eq!(
            check_pythagorean(&inst.q, &inst.q, std::slice::from_ref(&inst.q)).unwrap(),
            0.0
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples = feasible_tilt_samples(&r, &inst.constraints, 30, &mut rng).unwrap();
        assert!(samples.len() >= 20);
        assert!(check_pythagorean(&r, &inst.q, &samples).unwrap() <= 1e-8);
    }
}
