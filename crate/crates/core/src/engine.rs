//! The cyclic projection engine.
//!
//! Each step `(n, i)` projects onto constraint `i`. In corrected mode the
//! previous iterate is first divided by the factor `F_i = dP/dS` that the
//! same constraint applied one cycle earlier, so the step starts from
//! `S_{n,i} = P_{n,i-1} / F_i`. Naive mode projects `P_{n,i-1}` directly and
//! generally converges to the wrong point on non-linear sets.

use std::fmt;

use crate::constraints::{Constraint, DualIncrement};
use crate::error::{Error, Result};
use crate::measure::{
    check_grid, integrate, kl_divergence, log_partition, DensityVector, DiscreteMeasure, GridSpec, PM_INPUT_TOL,
};

/// Rows whose `mass_s` drops below this are flagged.
pub const LOW_MASS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Corrected,
    Naive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Corrected => "corrected",
            Mode::Naive => "naive",
        })
    }
}

/// What to do when a monitor exceeds its cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapPolicy {
    Warn,
    Abort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    pub mode: Mode,
    pub max_cycles: usize,
    /// Stop once the total-variation change over a cycle is at most this...
    pub tol_tv: f64,
    /// ...and every constraint holds within this.
    pub tol_feas: f64,
    /// Cap on `sup ∫ dS_{n,i}`.
    pub m1_cap: f64,
    /// Cap on `sup ∫ ln(dS_{n,i}/dQ) dP_{n,i}`.
    pub m2_cap: f64,
    pub on_cap: CapPolicy,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            mode: Mode::Corrected,
            max_cycles: 100,
            tol_tv: 1e-9,
            tol_feas: 1e-8,
            m1_cap: 1e6,
            m2_cap: 1e6,
            on_cap: CapPolicy::Warn,
        }
    }
}

impl EngineOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_cycles == 0 {
            return Err(Error::InvalidOption("max_cycles must be positive".into()));
        }
        for (name, v) in [
            ("tol_tv", self.tol_tv),
            ("tol_feas", self.tol_feas),
            ("m1_cap", self.m1_cap),
            ("m2_cap", self.m2_cap),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::InvalidOption(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Base measure `Q` and the ordered constraints `C_1..C_t`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub base: DiscreteMeasure,
    pub constraints: Vec<Constraint>,
    pub options: EngineOptions,
}

impl Problem {
    /// Validates the base (a probability measure), every constraint against
    /// the base grid, and the options. An empty constraint list is allowed.
    pub fn new(base: DiscreteMeasure, constraints: Vec<Constraint>, options: EngineOptions) -> Result<Self> {
        base.require_probability(PM_INPUT_TOL)?;
        for c in &constraints {
            c.validate(base.grid())?;
        }
        options.validate()?;
        Ok(Problem {
            base,
            constraints,
            options,
        })
    }

    pub fn grid(&self) -> &std::sync::Arc<GridSpec> {
        self.base.grid()
    }
}

/// Diagnostics of one projection step `(n, i)`.
///
/// `mass_s` and `b_integral` are taken on the dual representative
/// `e^{sum_{j != i} y_j} Q` of `S_{n,i}`, which differs from the primal
/// `S_{n,i}` by the constant `c_{n,i}`; the primal values are kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub cycle: usize,
    /// 1-based constraint index.
    pub index: usize,
    /// `I(P_{n,i} | S_{n,i})`, signed.
    pub i_div: f64,
    pub mass_s: f64,
    pub b_integral: f64,
    pub mass_s_primal: f64,
    pub b_integral_primal: f64,
    /// `ln c_{n,i}`; corrected mode only.
    pub ln_c: Option<f64>,
    /// `∫ y_{n,i} dP_{n,i}`.
    pub orthogonality: f64,
    /// `sum |P_{n,i} - P_{n,i-1}|`.
    pub step_tv: f64,
    /// `I(P_{n,i} | P_{n,i-1})`.
    pub step_kl: f64,
    /// Violation of constraint `i` by `P_{n,i}`.
    pub violation: f64,
    /// Half the spread of `ln(dP/dQ) - sum_j y_j` over the support; corrected mode only.
    pub reconstruction: Option<f64>,
    pub low_mass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    /// `-ln ∫ e^{sum_j y_{n,j}} dQ`; corrected mode only.
    pub dual_total: Option<f64>,
    pub i_div_sum: f64,
    /// `|i_div_sum - dual_total|`.
    pub dual_residual: Option<f64>,
    /// `sum |P_{n,t} - P_{n-1,t}|`.
    pub tv_change: f64,
    pub violations: Vec<f64>,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monitor {
    M1,
    M2,
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monitor::M1 => "M1",
            Monitor::M2 => "M2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Converged,
    MaxCycles,
    MonitorCap { monitor: Monitor, value: f64, cap: f64 },
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxCycles => "max_cycles",
            Termination::MonitorCap { .. } => "monitor_cap",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub mode: Mode,
    pub rows: Vec<StepRecord>,
    pub cycles: Vec<CycleRecord>,
    /// Running max of `mass_s`.
    pub m1: Option<f64>,
    /// Running max of `b_integral`.
    pub m2: Option<f64>,
    pub termination: Option<Termination>,
    pub warnings: Vec<String>,
}

impl Report {
    fn new(mode: Mode) -> Self {
        Report {
            mode,
            rows: Vec::new(),
            cycles: Vec::new(),
            m1: None,
            m2: None,
            termination: None,
            warnings: Vec::new(),
        }
    }

    pub fn latest_cycle(&self) -> Option<&CycleRecord> {
        self.cycles.last()
    }

    pub fn rows_of(&self, cycle: usize) -> impl Iterator<Item = &StepRecord> {
        self.rows.iter().filter(move |r| r.cycle == cycle)
    }

    pub fn row(&self, cycle: usize, index: usize) -> Option<&StepRecord> {
        self.rows.iter().find(|r| r.cycle == cycle && r.index == index)
    }
}

/// Mutable per-run state.
#[derive(Debug, Clone)]
pub struct EngineState {
    /// Cycle of the next step (1-based).
    pub cycle: usize,
    /// 0-based index of the next constraint.
    pub index: usize,
    /// Latest iterate `P_{n,i}`.
    pub current: DiscreteMeasure,
    /// `F_i = dP_{n-1,i} / dS_{n-1,i}` per constraint.
    pub corrections: Vec<DensityVector>,
    /// Latest dual increment per constraint.
    pub increments: Vec<DualIncrement>,
    /// Latest `I(P_{n,i} | S_{n,i})` per constraint.
    pub i_divs: Vec<Option<f64>>,
}

impl EngineState {
    fn new(problem: &Problem) -> Self {
        let t = problem.constraints.len();
        let grid = problem.grid();
        EngineState {
            cycle: 1,
            index: 0,
            current: problem.base.clone(),
            corrections: vec![DensityVector::constant(grid.clone(), 1.0); t],
            increments: vec![DualIncrement::Zero; t],
            i_divs: vec![None; t],
        }
    }

    /// `dP/dQ` of the current iterate.
    pub fn density(&self, q: &DiscreteMeasure) -> Result<DensityVector> {
        self.current.density_wrt(q)
    }

    fn dual_sum(&self, grid: &GridSpec, k: usize, skip: Option<usize>) -> f64 {
        let mut acc = 0.0;
        for (j, y) in self.increments.iter().enumerate() {
            if Some(j) != skip {
                acc += y.value(grid, k);
            }
        }
        acc
    }

    fn dual_density(&self, grid: &std::sync::Arc<GridSpec>, skip: Option<usize>) -> DensityVector {
        let values = (0..grid.len()).map(|k| self.dual_sum(grid, k, skip)).collect();
        DensityVector::from_parts(grid.clone(), values)
    }
}

/// Remove the previous effect of a constraint: `S = P_prev / F` with `0/0 = 0`.
pub fn adjust(p_prev: &DiscreteMeasure, correction: &DensityVector) -> Result<DiscreteMeasure> {
    check_grid(p_prev.grid(), correction.grid())?;
    let mut weights = Vec::with_capacity(p_prev.len());
    for (k, (&p, &f)) in p_prev.weights().iter().zip(correction.values()).enumerate() {
        if p == 0.0 {
            weights.push(0.0);
        } else if f == 0.0 {
            return Err(Error::ConventionViolation { node: k });
        } else {
            let w = p / f;
            if !w.is_finite() {
                return Err(Error::NonFinite("adjusted weight"));
            }
            weights.push(w);
        }
    }
    DiscreteMeasure::new(p_prev.grid().clone(), weights)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualTotal {
    pub value: f64,
    /// `|sum_i i_div - value|` using the latest step of each constraint.
    pub residual: f64,
}

/// `-ln ∫ e^{sum_j y_j} dQ` for the state's current increments.
pub fn dual_total(state: &EngineState, q: &DiscreteMeasure) -> Result<DualTotal> {
    let y = state.dual_density(q.grid(), None);
    let value = -log_partition(&y, q)?;
    let sum: f64 = state.i_divs.iter().flatten().sum();
    Ok(DualTotal {
        value,
        residual: (sum - value).abs(),
    })
}

/// `I(p_hat|Q) - sum_i I(P_{n,i}|S_{n,i})` over the latest complete cycle.
///
/// Requires `p_hat` to satisfy every constraint within `tol_feas` and a
/// corrected-mode report with at least one full cycle. For a feasible
/// `p_hat` the gap bounds `I(p_hat|P*)` from above, and by Pinsker the
/// variation distance to `P*` is at most `sqrt(2 gap)`.
pub fn error_bound(p_hat: &DiscreteMeasure, problem: &Problem, report: &Report) -> Result<f64> {
    if report.mode != Mode::Corrected {
        return Err(Error::Precondition("error bound needs a corrected-mode report".into()));
    }
    let cycle = report
        .latest_cycle()
        .ok_or_else(|| Error::Precondition("report has no complete cycle".into()))?;
    for (i, c) in problem.constraints.iter().enumerate() {
        let f = c.feasible(p_hat, problem.options.tol_feas)?;
        if !f.feasible {
            return Err(Error::Precondition(format!(
                "candidate violates constraint {} by {:e}",
                i + 1,
                f.violation
            )));
        }
    }
    let sum: f64 = report.rows_of(cycle.cycle).map(|r| r.i_div).sum();
    Ok(kl_divergence(p_hat, &problem.base)? - sum)
}

/// Runs the cyclic algorithm step by step.
#[derive(Debug)]
pub struct Engine<'a> {
    problem: &'a Problem,
    state: EngineState,
    report: Report,
    cycle_start: DiscreteMeasure,
    warned: [bool; 2],
}

impl<'a> Engine<'a> {
    pub fn new(problem: &'a Problem) -> Self {
        Engine {
            problem,
            state: EngineState::new(problem),
            report: Report::new(problem.options.mode),
            cycle_start: problem.base.clone(),
            warned: [false; 2],
        }
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn report(&self) -> &Report {
        &self.report
    }

    pub fn into_parts(self) -> (EngineState, Report) {
        (self.state, self.report)
    }

    fn halted(&self) -> bool {
        matches!(self.report.termination, Some(Termination::MonitorCap { .. }))
    }

    /// Perform the next projection step.
    pub fn step(&mut self) -> Result<StepRecord> {
        let t = self.problem.constraints.len();
        if t == 0 {
            return Err(Error::Precondition("problem has no constraints".into()));
        }
        let (n, i) = (self.state.cycle, self.state.index);
        self.step_inner(n, i).map_err(|e| e.at_step(n, i + 1))
    }

    fn step_inner(&mut self, n: usize, i: usize) -> Result<StepRecord> {
        let q = &self.problem.base;
        let grid = q.grid().clone();
        let corrected = self.problem.options.mode == Mode::Corrected;
        let p_prev = &self.state.current;

        let s = if corrected {
            adjust(p_prev, &self.state.corrections[i])?
        } else {
            p_prev.clone()
        };
        let proj = self.problem.constraints[i].project(&s)?;
        let p_new = proj.measure;

        let ln_ds_dq = s.density_wrt(q)?;
        let ln_ds_dq = DensityVector::from_parts(grid.clone(), ln_ds_dq.values().iter().map(|v| v.ln()).collect());
        let mass_s_primal = s.total_mass();
        let b_integral_primal = integrate(&ln_ds_dq, &p_new)?;

        let (mass_s, b_integral, ln_c) = if corrected {
            let others = self.state.dual_density(&grid, Some(i));
            let lp = log_partition(&others, q)?;
            (lp.exp(), integrate(&others, &p_new)?, Some(mass_s_primal.ln() - lp))
        } else {
            (mass_s_primal, b_integral_primal, None)
        };

        let y = proj.increment.to_density(&grid);
        let orthogonality = integrate(&y, &p_new)?;
        let step_tv = p_new.total_variation(p_prev)?;
        let step_kl = kl_divergence(&p_new, p_prev)?;
        let violation = self.problem.constraints[i]
            .feasible(&p_new, self.problem.options.tol_feas)?
            .violation;

        if corrected {
            self.state.corrections[i] = p_new.density_wrt(&s)?;
        }
        self.state.increments[i] = proj.increment;
        self.state.i_divs[i] = Some(proj.i_div);

        let reconstruction = if corrected {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for k in 0..grid.len() {
                let pk = p_new.weights()[k];
                if pk > 0.0 {
                    let d = (pk / q.weights()[k]).ln() - self.state.dual_sum(&grid, k, None);
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
            }
            Some(0.5 * (hi - lo))
        } else {
            None
        };

        self.state.current = p_new;
        let record = StepRecord {
            cycle: n,
            index: i + 1,
            i_div: proj.i_div,
            mass_s,
            b_integral,
            mass_s_primal,
            b_integral_primal,
            ln_c,
            orthogonality,
            step_tv,
            step_kl,
            violation,
            reconstruction,
            low_mass: mass_s < LOW_MASS,
        };
        self.monitor(&record);
        self.report.rows.push(record.clone());

        self.state.index += 1;
        if self.state.index == self.problem.constraints.len() {
            self.finish_cycle()?;
        }
        Ok(record)
    }

    fn monitor(&mut self, r: &StepRecord) {
        let m1 = self.report.m1.map_or(r.mass_s, |m| m.max(r.mass_s));
        let m2 = self.report.m2.map_or(r.b_integral, |m| m.max(r.b_integral));
        self.report.m1 = Some(m1);
        self.report.m2 = Some(m2);
        let opts = &self.problem.options;
        for (slot, monitor, value, cap) in [(0, Monitor::M1, m1, opts.m1_cap), (1, Monitor::M2, m2, opts.m2_cap)] {
            if value <= cap {
                continue;
            }
            match opts.on_cap {
                CapPolicy::Abort => {
                    if !self.halted() {
                        self.report.termination = Some(Termination::MonitorCap { monitor, value, cap });
                    }
                }
                CapPolicy::Warn => {
                    if !self.warned[slot] {
                        self.warned[slot] = true;
                        let msg = format!(
                            "{monitor} = {value:e} exceeds cap {cap:e} at step ({}, {})",
                            r.cycle, r.index
                        );
                        log::warn!("{msg}");
                        self.report.warnings.push(msg);
                    }
                }
            }
        }
    }

    fn finish_cycle(&mut self) -> Result<()> {
        let n = self.state.cycle;
        let q = &self.problem.base;
        let i_div_sum: f64 = self.report.rows_of(n).map(|r| r.i_div).sum();
        let (dual_total_value, dual_residual) = if self.problem.options.mode == Mode::Corrected {
            let d = dual_total(&self.state, q)?;
            (Some(d.value), Some((i_div_sum - d.value).abs()))
        } else {
            (None, None)
        };
        let p = &self.state.current;
        let tv_change = p.total_variation(&self.cycle_start)?;
        let mut violations = Vec::with_capacity(self.problem.constraints.len());
        for c in &self.problem.constraints {
            violations.push(c.feasible(p, self.problem.options.tol_feas)?.violation);
        }
        let max_violation = violations.iter().copied().fold(0.0, f64::max);
        log::debug!("cycle {n}: tv_change = {tv_change:e}, max_violation = {max_violation:e}, dual_total = {dual_total_value:?}");
        self.report.cycles.push(CycleRecord {
            cycle: n,
            dual_total: dual_total_value,
            i_div_sum,
            dual_residual,
            tv_change,
            violations,
            max_violation,
        });
        self.cycle_start = p.clone();
        self.state.cycle += 1;
        self.state.index = 0;
        Ok(())
    }

    /// Run the remaining steps of the current cycle. Returns `None` when a
    /// monitor cap with the abort policy stopped the cycle early.
    pub fn run_cycle(&mut self) -> Result<Option<CycleRecord>> {
        let n = self.state.cycle;
        while self.state.cycle == n {
            if self.halted() {
                return Ok(None);
            }
            self.step()?;
        }
        if self.halted() {
            return Ok(None);
        }
        Ok(self.report.cycles.last().cloned())
    }

    /// Run to termination and return the final iterate.
    pub fn run(&mut self) -> Result<DiscreteMeasure> {
        let opts = &self.problem.options;
        let t = self.problem.constraints.len();
        if t == 0 {
            self.report.termination = Some(Termination::Converged);
            return Ok(self.state.current.clone());
        }
        while self.state.cycle <= opts.max_cycles {
            let Some(cycle) = self.run_cycle()? else {
                return Ok(self.state.current.clone());
            };
            // a single projection is exact, so one cycle settles t = 1
            let settled = cycle.tv_change <= opts.tol_tv || t == 1;
            if settled && cycle.max_violation <= opts.tol_feas {
                self.report.termination = Some(Termination::Converged);
                return Ok(self.state.current.clone());
            }
        }
        self.report.termination = Some(Termination::MaxCycles);
        Ok(self.state.current.clone())
    }
}

/// Run `problem` to termination.
pub fn run(problem: &Problem) -> Result<(DiscreteMeasure, Report)> {
    let mut engine = Engine::new(problem);
    let solution = engine.run()?;
    let (_, report) = engine.into_parts();
    Ok((solution, report))
}

/// Sum of dual increments as a density; exposed for diagnostics.
pub fn dual_density(state: &EngineState, grid: &std::sync::Arc<GridSpec>) -> DensityVector {
    state.dual_density(grid, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::project;
    use crate::measure::AxisId;
    use std::sync::Arc;

    fn line(n: usize) -> Arc<GridSpec> {
        Arc::new(GridSpec::unit_interval(n).unwrap())
    }

    fn moment(g: &Arc<GridSpec>, f: impl Fn(f64) -> f64) -> Constraint {
        Constraint::moment_inequality(DensityVector::from_fn(g.clone(), |p| f(p[0])).unwrap())
    }

    #[test]
    fn adjust_examples() {
        let g = line(2);
        let p = DiscreteMeasure::new(g.clone(), vec![0.5, 0.5]).unwrap();
        let s = adjust(&p, &DensityVector::constant(g.clone(), 1.0)).unwrap();
        assert_eq!(s.weights(), p.weights());
        let s = adjust(&p, &DensityVector::new(g.clone(), vec![2.0, 0.5]).unwrap()).unwrap();
        assert_eq!(s.weights(), &[0.25, 1.0]);
        assert_eq!(s.total_mass(), 1.25);
        let z = DiscreteMeasure::new(g.clone(), vec![0.0, 1.0]).unwrap();
        let s = adjust(&z, &DensityVector::new(g.clone(), vec![0.0, 2.0]).unwrap()).unwrap();
        assert_eq!(s.weights(), &[0.0, 0.5]);
        let err = adjust(&p, &DensityVector::new(g, vec![1.0, 0.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ConventionViolation { node: 1 }));
    }

    #[test]
    fn single_constraint_is_one_projection() {
        let g = line(256);
        let q = DiscreteMeasure::uniform(g.clone());
        let c = moment(&g, |x| x - 0.7);
        let expected = project(&c, &q).unwrap().measure;
        let problem = Problem::new(q, vec![c], EngineOptions::default()).unwrap();
        let (sol, report) = run(&problem).unwrap();
        assert_eq!(report.termination, Some(Termination::Converged));
        assert_eq!(report.cycles.len(), 1);
        assert_eq!(sol.weights(), expected.weights());
    }

    #[test]
    fn no_constraints_returns_base() {
        let g = line(8);
        let q = DiscreteMeasure::uniform(g);
        let problem = Problem::new(q.clone(), vec![], EngineOptions::default()).unwrap();
        let (sol, report) = run(&problem).unwrap();
        assert_eq!(sol.weights(), q.weights());
        assert_eq!(report.termination, Some(Termination::Converged));
        assert!(report.cycles.is_empty());
    }

    #[test]
    fn dual_total_of_fresh_state_is_zero() {
        let g = line(8);
        let q = DiscreteMeasure::uniform(g.clone());
        let problem = Problem::new(q.clone(), vec![moment(&g, |x| x - 0.7)], EngineOptions::default()).unwrap();
        let engine = Engine::new(&problem);
        let d = dual_total(engine.state(), &q).unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn rejects_bad_problems() {
        let g = line(4);
        let half = DiscreteMeasure::new(g.clone(), vec![0.1; 4]).unwrap();
        assert!(matches!(
            Problem::new(half, vec![], EngineOptions::default()),
            Err(Error::NotNormalized { .. })
        ));
        let q = DiscreteMeasure::uniform(g.clone());
        let other = moment(&line(5), |x| x);
        assert!(Problem::new(q.clone(), vec![other], EngineOptions::default()).is_err());
        let y_marg = Constraint::fixed_marginal(AxisId::Y, q.clone());
        assert!(Problem::new(q.clone(), vec![y_marg], EngineOptions::default()).is_err());
        let opts = EngineOptions {
            tol_tv: 0.0,
            ..EngineOptions::default()
        };
        assert!(Problem::new(q, vec![], opts).is_err());
    }

    #[test]
    fn step_errors_carry_position() {
        let g = line(16);
        let q = DiscreteMeasure::uniform(g.clone());
        let problem = Problem::new(
            q,
            vec![moment(&g, |x| x - 0.2), moment(&g, |x| x - 2.0)],
            EngineOptions::default(),
        )
        .unwrap();
        let err = run(&problem).unwrap_err();
        match err {
            Error::Step { cycle, index, source } => {
                assert_eq!((cycle, index), (1, 2));
                assert!(matches!(*source, Error::InfeasibleDirection { .. }));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn monitor_cap_abort_stops_the_run() {
        let g = line(64);
        let q = DiscreteMeasure::uniform(g.clone());
        let opts = EngineOptions {
            m1_cap: 0.5,
            on_cap: CapPolicy::Abort,
            ..EngineOptions::default()
        };
        let problem = Problem::new(q, vec![moment(&g, |x| x - 0.7), moment(&g, |x| x * x - 0.7)], opts).unwrap();
        let (_, report) = run(&problem).unwrap();
        assert!(matches!(
            report.termination,
            Some(Termination::MonitorCap {
                monitor: Monitor::M1,
                ..
            })
        ));
        assert_eq!(report.rows.len(), 1);

        let warn = Problem {
            options: EngineOptions {
                m1_cap: 0.5,
                ..EngineOptions::default()
            },
            ..problem
        };
        let (_, report) = run(&warn).unwrap();
        assert_eq!(report.termination, Some(Termination::Converged));
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn max_cycles_is_reported() {
        let g = line(64);
        let q = DiscreteMeasure::uniform(g.clone());
        let opts = EngineOptions {
            max_cycles: 2,
            ..EngineOptions::default()
        };
        let problem = Problem::new(q, vec![moment(&g, |x| x - 0.7), moment(&g, |x| x * x - 0.7)], opts).unwrap();
        let (_, report) = run(&problem).unwrap();
        assert_eq!(report.termination, Some(Termination::MaxCycles));
        assert_eq!(report.cycles.len(), 2);
    }

    #[test]
    fn corrected_run_keeps_dual_bookkeeping() {
        let g = line(512);
        let q = DiscreteMeasure::uniform(g.clone());
        let problem = Problem::new(
            q.clone(),
            vec![moment(&g, |x| x - 0.7), moment(&g, |x| x * x - 0.7)],
            EngineOptions::default(),
        )
        .unwrap();
        let (sol, report) = run(&problem).unwrap();
        assert_eq!(report.termination, Some(Termination::Converged));
        for c in &report.cycles {
            assert!(c.dual_residual.unwrap() <= 1e-6);
        }
        for r in &report.rows {
            assert!(r.orthogonality.abs() <= 1e-8);
            assert!(r.reconstruction.unwrap() <= 1e-8);
        }
        let last = report.latest_cycle().unwrap().dual_total.unwrap();
        let kl = kl_divergence(&sol, &q).unwrap();
        assert!((last - kl).abs() <= 2e-8, "{last} vs {kl}");
        let gap = error_bound(&sol, &problem, &report).unwrap();
        assert!((-1e-8..=1e-8).contains(&gap), "{gap}");
    }

    #[test]
    fn error_bound_rejects_infeasible_candidates() {
        let g = line(64);
        let q = DiscreteMeasure::uniform(g.clone());
        let problem = Problem::new(q.clone(), vec![moment(&g, |x| x - 0.7)], EngineOptions::default()).unwrap();
        let (_, report) = run(&problem).unwrap();
        assert!(matches!(
            error_bound(&q, &problem, &report),
            Err(Error::Precondition(_))
        ));
    }
}
