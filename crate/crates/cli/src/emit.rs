//! Output files: `density.csv`, `diag.csv` and `summary.json`.

use std::fs;
use std::path::Path;

use iproj::{constraints, kl_divergence, DiscreteMeasure, Mode, Problem, Report, Termination};
use serde::Serialize;

use crate::{CliError, Result};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapInfo {
    pub monitor: String,
    pub value: f64,
    pub cap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub termination: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<CapInfo>,
    pub cycles: usize,
    pub mode: String,
    #[serde(rename = "M1")]
    pub m1: Option<f64>,
    #[serde(rename = "M2")]
    pub m2: Option<f64>,
    /// Dual objective after the last complete cycle; null in naive mode.
    pub dual_total: Option<f64>,
    pub i_div_sum: Option<f64>,
    pub violations: Vec<f64>,
    pub feasible: bool,
    pub kl_divergence: f64,
    pub base_mass: f64,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn new(problem: &Problem, solution: &DiscreteMeasure, report: &Report, base_mass: f64) -> Result<Self> {
        let tol = problem.options.tol_feas;
        let mut violations = Vec::with_capacity(problem.constraints.len());
        let mut feasible = true;
        for c in &problem.constraints {
            let f = constraints::feasible(c, solution, tol)?;
            feasible &= f.feasible;
            violations.push(f.violation);
        }
        let (termination, cap) = match report.termination {
            Some(Termination::MonitorCap { monitor, value, cap }) => (
                "monitor_cap".to_string(),
                Some(CapInfo {
                    monitor: monitor.to_string(),
                    value,
                    cap,
                }),
            ),
            Some(t) => (t.as_str().to_string(), None),
            None => ("unfinished".to_string(), None),
        };
        let last = report.latest_cycle();
        Ok(Summary {
            termination,
            cap,
            cycles: report.cycles.len(),
            mode: report.mode.to_string(),
            m1: report.m1,
            m2: report.m2,
            dual_total: last.and_then(|c| c.dual_total),
            i_div_sum: last.map(|c| c.i_div_sum),
            violations,
            feasible,
            kl_divergence: kl_divergence(solution, &problem.base)?,
            base_mass,
            warnings: report.warnings.clone(),
        })
    }
}

pub fn write_density(path: &Path, solution: &DiscreteMeasure, base: &DiscreteMeasure) -> Result<()> {
    let grid = solution.grid();
    let ratio = solution.density_wrt(base)?;
    let leb = solution.lebesgue_density();
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let header: &[&str] = if grid.dim() == 1 {
        &["x", "dP_dQ", "dP_dLebesgue"]
    } else {
        &["x", "y", "dP_dQ", "dP_dLebesgue"]
    };
    w.write_record(header).map_err(csv_err(path))?;
    let mut record = Vec::with_capacity(4);
    for k in 0..grid.len() {
        record.clear();
        let p = grid.point(k);
        record.extend(p[..grid.dim()].iter().map(|&c| fmt(c)));
        record.push(fmt(ratio.values()[k]));
        record.push(fmt(leb.values()[k]));
        w.write_record(&record).map_err(csv_err(path))?;
    }
    w.flush().map_err(write_err(path))
}

/// One row per step; cycle-level columns are filled on a cycle's last row.
pub fn write_diag(path: &Path, report: &Report) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["n", "i", "i_div", "mass_S", "b_integral", "dual_total", "tv_change"])
        .map_err(csv_err(path))?;
    for (r, row) in report.rows.iter().enumerate() {
        let last_of_cycle = report.rows.get(r + 1).is_none_or(|next| next.cycle != row.cycle);
        let closing = report
            .cycles
            .iter()
            .rev()
            .find(|c| c.cycle == row.cycle)
            .filter(|_| last_of_cycle);
        let dual = closing
            .and_then(|c| c.dual_total)
            .filter(|_| report.mode == Mode::Corrected)
            .map(fmt)
            .unwrap_or_default();
        let tv = closing.map(|c| fmt(c.tv_change)).unwrap_or_default();
        w.write_record([
            row.cycle.to_string(),
            row.index.to_string(),
            fmt(row.i_div),
            fmt(row.mass_s),
            fmt(row.b_integral),
            dual,
            tv,
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(write_err(path))
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    fs::write(path, text).map_err(write_err(path))
}

/// Write all three output files into `dir`, creating it if needed.
pub fn emit(
    dir: &Path,
    problem: &Problem,
    solution: &DiscreteMeasure,
    report: &Report,
    base_mass: f64,
) -> Result<Summary> {
    fs::create_dir_all(dir).map_err(write_err(dir))?;
    let summary = Summary::new(problem, solution, report, base_mass)?;
    write_density(&dir.join("density.csv"), solution, &problem.base)?;
    write_diag(&dir.join("diag.csv"), report)?;
    write_summary(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}
