//! One-dimensional exponential-tilt dual problem.
//!
//! For a measure `s` and a statistic `z` the cumulant function
//! `phi(alpha) = ln ∫ e^{alpha z} ds` is convex. Its derivative is the
//! tilted mean of `z` and its second derivative the tilted variance. The
//! projection onto `{P : ∫ z dP >= 0}` (or `= 0`) is the tilt at the
//! minimizer of `phi` over `alpha >= 0` (or over all reals).

use crate::error::{Error, Result};
use crate::measure::{check_grid, DensityVector, DiscreteMeasure};
use crate::reduce;

const MAX_ITER: usize = 200;
const BRACKET_WIDTH: f64 = 1e-14;

/// Sign restriction on the tilt parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignConstraint {
    NonNegative,
    Free,
}

#[derive(Debug, Clone)]
pub struct TiltProblem<'a> {
    pub s: &'a DiscreteMeasure,
    pub z: &'a DensityVector,
    pub sign: SignConstraint,
    pub alpha_cap: f64,
    pub tol_grad: f64,
}

impl<'a> TiltProblem<'a> {
    pub const DEFAULT_ALPHA_CAP: f64 = 1e3;
    pub const DEFAULT_TOL_GRAD: f64 = 1e-12;

    pub fn new(s: &'a DiscreteMeasure, z: &'a DensityVector, sign: SignConstraint) -> Self {
        TiltProblem {
            s,
            z,
            sign,
            alpha_cap: Self::DEFAULT_ALPHA_CAP,
            tol_grad: Self::DEFAULT_TOL_GRAD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltSolution {
    pub alpha: f64,
    /// `phi(alpha) = ln ∫ e^{alpha z} ds`.
    pub log_norm: f64,
    pub iterations: usize,
}

/// Value and first two derivatives of the cumulant function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cumulant {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

fn check_support(s: &DiscreteMeasure, z: &DensityVector) -> Result<(f64, f64)> {
    check_grid(s.grid(), z.grid())?;
    if s.total_mass() <= 0.0 {
        return Err(Error::Domain("tilt of a zero measure"));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, (&w, &v)) in s.weights().iter().zip(z.values()).enumerate() {
        if w > 0.0 {
            if !v.is_finite() {
                return Err(Error::InfiniteIntegrand { node: k });
            }
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok((lo, hi))
}

/// `phi(alpha)` and its derivatives, evaluated with a log-sum-exp shift.
pub fn cumulant(s: &DiscreteMeasure, z: &DensityVector, alpha: f64) -> Result<Cumulant> {
    let (lo, hi) = check_support(s, z)?;
    Ok(cumulant_unchecked(s, z, alpha, lo, hi))
}

fn cumulant_unchecked(s: &DiscreteMeasure, z: &DensityVector, alpha: f64, lo: f64, hi: f64) -> Cumulant {
    let w = s.weights();
    let zv = z.values();
    let shift = if alpha >= 0.0 { alpha * hi } else { alpha * lo };
    let weight = |k: usize| {
        if w[k] > 0.0 {
            w[k] * (alpha * zv[k] - shift).exp()
        } else {
            0.0
        }
    };
    let [total, moment] = reduce::sums_by(w.len(), |k| {
        let e = weight(k);
        [e, if e > 0.0 { e * zv[k] } else { 0.0 }]
    });
    let mean = moment / total;
    // second pass keeps the variance nonnegative
    let var = reduce::sum_by(w.len(), |k| {
        let e = weight(k);
        if e > 0.0 {
            let d = zv[k] - mean;
            e * d * d
        } else {
            0.0
        }
    }) / total;
    Cumulant {
        value: shift + total.ln(),
        first: mean,
        second: var,
    }
}

/// Minimize `phi` over the allowed sign domain.
pub fn tilt_solve(tp: &TiltProblem<'_>) -> Result<TiltSolution> {
    if tp.alpha_cap.is_nan() || tp.alpha_cap <= 0.0 || tp.tol_grad.is_nan() || tp.tol_grad <= 0.0 {
        return Err(Error::InvalidOption("alpha_cap and tol_grad must be positive".into()));
    }
    let (lo, hi) = check_support(tp.s, tp.z)?;
    let eval = |a: f64| -> Result<Cumulant> {
        let c = cumulant_unchecked(tp.s, tp.z, a, lo, hi);
        if c.value.is_finite() && c.first.is_finite() && c.second.is_finite() {
            Ok(c)
        } else {
            Err(Error::NonFinite("cumulant of the tilt"))
        }
    };
    let done = |a: f64, it: usize| -> Result<TiltSolution> {
        Ok(TiltSolution {
            alpha: a,
            log_norm: eval(a)?.value,
            iterations: it,
        })
    };

    if lo == hi {
        // constant statistic: tilting changes nothing
        let ok = lo == 0.0 || (tp.sign == SignConstraint::NonNegative && lo > 0.0);
        return if ok {
            done(0.0, 0)
        } else {
            Err(Error::InfeasibleDirection {
                alpha_cap: tp.alpha_cap,
            })
        };
    }

    let tol = tp.tol_grad * (1.0 + lo.abs().max(hi.abs()));
    let g0 = eval(0.0)?.first;
    if g0.abs() <= tol || (tp.sign == SignConstraint::NonNegative && g0 >= 0.0) {
        return done(0.0, 0);
    }

    // The root lies on the side where the gradient changes sign.
    let dir = if g0 < 0.0 { 1.0 } else { -1.0 };
    let (mut a, mut b) = (0.0_f64, dir);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let g = eval(b)?.first;
        if g * dir >= 0.0 {
            break;
        }
        a = b;
        b *= 2.0;
        if b.abs() > tp.alpha_cap {
            return Err(Error::InfeasibleDirection {
                alpha_cap: tp.alpha_cap,
            });
        }
    }
    // (a, b) ordered so that phi'(lo_end) < 0 < phi'(hi_end)
    let (mut x_lo, mut x_hi) = if dir > 0.0 { (a, b) } else { (b, a) };
    let mut x = 0.5 * (x_lo + x_hi);
    let mut dx_old = (x_hi - x_lo).abs();
    let mut dx = dx_old;
    let mut c = eval(x)?;
    for _ in 0..MAX_ITER {
        iterations += 1;
        if c.first.abs() <= tol {
            break;
        }
        if c.first < 0.0 {
            x_lo = x;
        } else {
            x_hi = x;
        }
        if (x_hi - x_lo) <= BRACKET_WIDTH * x.abs().max(1.0) {
            break;
        }
        let newton = c.second > 0.0 && {
            let step = c.first / c.second;
            let cand = x - step;
            cand > x_lo && cand < x_hi && (2.0 * step).abs() <= dx_old.abs()
        };
        dx_old = dx;
        if newton {
            dx = c.first / c.second;
            x -= dx;
        } else {
            dx = 0.5 * (x_hi - x_lo);
            x = x_lo + dx;
        }
        c = eval(x)?;
    }
    Ok(TiltSolution {
        alpha: x,
        log_norm: c.value,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::GridSpec;
    use std::sync::Arc;

    fn uniform(n: usize) -> (Arc<GridSpec>, DiscreteMeasure) {
        let g = Arc::new(GridSpec::unit_interval(n).unwrap());
        let m = DiscreteMeasure::uniform(g.clone());
        (g, m)
    }

    // Independent check: the mean of the density proportional to e^{a x} on
    // (0,1) is 1/(1 - e^{-a}) - 1/a. Solve mean = 0.7 by bisection.
    fn continuous_tilt_for_mean(target: f64) -> f64 {
        let mean = |a: f64| 1.0 / (1.0 - (-a).exp()) - 1.0 / a;
        let (mut lo, mut hi) = (1e-6, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mean(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_statistic_returns_log_mass() {
        let g = Arc::new(GridSpec::unit_interval(4).unwrap());
        let s = DiscreteMeasure::new(g.clone(), vec![0.5, 0.5, 0.5, 1.0]).unwrap();
        let z = DensityVector::constant(g, 0.0);
        let sol = tilt_solve(&TiltProblem::new(&s, &z, SignConstraint::NonNegative)).unwrap();
        assert_eq!(sol.alpha, 0.0);
        assert!((sol.log_norm - 2.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn mean_constraint_matches_continuous_tilt() {
        let (g, s) = uniform(4096);
        let z = DensityVector::from_fn(g, |p| p[0] - 0.7).unwrap();
        let sol = tilt_solve(&TiltProblem::new(&s, &z, SignConstraint::NonNegative)).unwrap();
        let reference = continuous_tilt_for_mean(0.7);
        assert!((reference - 2.672).abs() < 1e-3, "{reference}");
        assert!((sol.alpha - reference).abs() < 1e-5, "{} vs {reference}", sol.alpha);
        let c = cumulant(&s, &z, sol.alpha).unwrap();
        assert!(c.first.abs() <= 1e-9);
    }

    #[test]
    fn inactive_constraint_gives_zero_tilt() {
        let (g, s) = uniform(512);
        let z = DensityVector::from_fn(g, |p| p[0] - 0.3).unwrap();
        let sol = tilt_solve(&TiltProblem::new(&s, &z, SignConstraint::NonNegative)).unwrap();
        assert_eq!(sol.alpha, 0.0);
        assert!(sol.log_norm.abs() < 1e-15);
    }

    #[test]
    fn free_sign_goes_negative() {
        let (g, s) = uniform(512);
        let z = DensityVector::from_fn(g, |p| p[0] - 0.3).unwrap();
        let sol = tilt_solve(&TiltProblem::new(&s, &z, SignConstraint::Free)).unwrap();
        assert!(sol.alpha < 0.0);
        assert!(cumulant(&s, &z, sol.alpha).unwrap().first.abs() < 1e-10);
    }

    #[test]
    fn unreachable_constraint_is_infeasible_direction() {
        let (g, s) = uniform(64);
        let z = DensityVector::from_fn(g.clone(), |p| p[0] - 1.5).unwrap();
        let err = tilt_solve(&TiltProblem::new(&s, &z, SignConstraint::NonNegative)).unwrap_err();
        assert!(matches!(err, Error::InfeasibleDirection { .. }));
        let c = DensityVector::constant(g, -1.0);
        let err = tilt_solve(&TiltProblem::new(&s, &c, SignConstraint::NonNegative)).unwrap_err();
        assert!(matches!(err, Error::InfeasibleDirection { .. }));
    }

    #[test]
    fn infinite_statistic_on_support_is_rejected() {
        let g = Arc::new(GridSpec::unit_interval(2).unwrap());
        let s = DiscreteMeasure::new(g.clone(), vec![0.0, 1.0]).unwrap();
        let z = DensityVector::new(g.clone(), vec![f64::NEG_INFINITY, 1.0]).unwrap();
        assert!(tilt_solve(&TiltProblem::new(&s, &z, SignConstraint::NonNegative)).is_ok());
        let z = DensityVector::new(g, vec![1.0, f64::NEG_INFINITY]).unwrap();
        assert!(matches!(
            tilt_solve(&TiltProblem::new(&s, &z, SignConstraint::NonNegative)),
            Err(Error::InfiniteIntegrand { node: 1 })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
            (2usize..24).prop_flat_map(|n| {
                (
                    proptest::collection::vec(0.01f64..1.0, n),
                    proptest::collection::vec(-1.0f64..1.0, n),
                )
            })
        }

        fn build(w: &[f64], z: &[f64]) -> (DiscreteMeasure, DensityVector) {
            let g = Arc::new(GridSpec::unit_interval(w.len()).unwrap());
            (
                DiscreteMeasure::new(g.clone(), w.to_vec()).unwrap(),
                DensityVector::new(g, z.to_vec()).unwrap(),
            )
        }

        proptest! {
            #[test]
            fn returned_alpha_is_a_minimum((w, z) in instance(), shift in -0.5f64..0.5) {
                let z: Vec<f64> = z.iter().map(|v| v + shift).collect();
                let (s, z) = build(&w, &z);
                let tp = TiltProblem::new(&s, &z, SignConstraint::NonNegative);
                let sol = match tilt_solve(&tp) {
                    Ok(sol) => sol,
                    Err(Error::InfeasibleDirection { .. }) => return Ok(()),
                    Err(e) => panic!("{e}"),
                };
                prop_assert!(sol.alpha >= 0.0);
                let c = cumulant(&s, &z, sol.alpha).unwrap();
                prop_assert!((sol.alpha * c.first).abs() <= 1e-9);
                for d in [1e-3, -1e-3, 1e-2, -1e-2] {
                    let a = sol.alpha + d * (1.0 + sol.alpha);
                    if a < 0.0 {
                        continue;
                    }
                    let v = cumulant(&s, &z, a).unwrap().value;
                    prop_assert!(v >= sol.log_norm - 1e-12, "phi({a}) = {v} < {}", sol.log_norm);
                }
            }

            #[test]
            fn analytic_gradient_matches_finite_differences((w, z) in instance(), alphas in proptest::collection::vec(-5.0f64..5.0, 20)) {
                let (s, z) = build(&w, &z);
                let h = 1e-5;
                for a in alphas {
                    let c = cumulant(&s, &z, a).unwrap();
                    let fd = (cumulant(&s, &z, a + h).unwrap().value - cumulant(&s, &z, a - h).unwrap().value) / (2.0 * h);
                    prop_assert!((c.first - fd).abs() <= 1e-6 * (1.0 + c.first.abs()));
                }
            }
        }
    }
}
