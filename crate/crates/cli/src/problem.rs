//! The JSON problem file and its translation into an engine [`Problem`].

use std::path::{Path, PathBuf};
use std::sync::Arc;

use iproj::{
    normalize, Axis, AxisId, CapPolicy, Constraint, DensityVector, DiscreteMeasure, EngineOptions, GridSpec, Mode,
    Problem,
};
use serde::{Deserialize, Serialize};

use crate::tables::read_table;
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub grid: GridSection,
    pub base: BaseSection,
    #[serde(default)]
    pub constraints: Vec<ConstraintSection>,
    #[serde(default)]
    pub options: OptionsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: Vec<usize>,
    pub domain: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    Uniform,
    BilinearXy,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSection {
    pub kind: BaseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    MomentInequality,
    MomentEquality,
    FixedMarginal,
    StochasticOrderMarginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    X,
    Y,
}

impl From<AxisName> for AxisId {
    fn from(a: AxisName) -> Self {
        match a {
            AxisName::X => AxisId::X,
            AxisName::Y => AxisId::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Uniform,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub kind: TargetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// One constraint. Moment constraints take a named `function` or a `table`
/// plus a `threshold` (the set is `E[g] >= threshold`, or `=`); marginal
/// constraints take an `axis` and a `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSection {
    pub kind: ConstraintKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<AxisName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Corrected,
    Naive,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Corrected => Mode::Corrected,
            ModeName::Naive => Mode::Naive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapName {
    Warn,
    Abort,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cycles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_tv: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_feas: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m1_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_cap: Option<CapName>,
}

impl OptionsSection {
    pub fn to_options(&self) -> EngineOptions {
        let d = EngineOptions::default();
        EngineOptions {
            mode: self.mode.map_or(d.mode, Mode::from),
            max_cycles: self.max_cycles.unwrap_or(d.max_cycles),
            tol_tv: self.tol_tv.unwrap_or(d.tol_tv),
            tol_feas: self.tol_feas.unwrap_or(d.tol_feas),
            m1_cap: self.m1_cap.unwrap_or(d.m1_cap),
            m2_cap: self.m2_cap.unwrap_or(d.m2_cap),
            on_cap: match self.on_cap {
                Some(CapName::Abort) => CapPolicy::Abort,
                Some(CapName::Warn) => CapPolicy::Warn,
                None => d.on_cap,
            },
        }
    }
}

impl ProblemFile {
    /// Pretty JSON with a trailing newline; parsing it back yields the same bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files always serialize");
        s.push('\n');
        s
    }
}

/// A parsed problem together with its source document.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub file: ProblemFile,
    pub problem: Problem,
    /// Total mass of the base before normalization.
    pub base_mass: f64,
}

pub fn parse_problem(path: &Path) -> Result<LoadedProblem> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_str(&text, &dir)
}

/// Parse a JSON document; table paths are resolved against `base_dir`.
pub fn parse_str(text: &str, base_dir: &Path) -> Result<LoadedProblem> {
    let file = deserialize(text)?;
    build(file, base_dir)
}

pub fn deserialize(text: &str) -> Result<ProblemFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::schema(
            if path == "." { "document".to_string() } else { path },
            e.into_inner().to_string(),
        )
    })
}

fn resolve(base_dir: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

fn build_grid(g: &GridSection) -> Result<Arc<GridSpec>> {
    if !(1..=2).contains(&g.dim) {
        return Err(CliError::schema("grid.dim", format!("must be 1 or 2, got {}", g.dim)));
    }
    if g.n.len() != g.dim {
        return Err(CliError::schema(
            "grid.n",
            format!("needs {} entries, got {}", g.dim, g.n.len()),
        ));
    }
    if g.domain.len() != g.dim {
        return Err(CliError::schema(
            "grid.domain",
            format!("needs {} intervals, got {}", g.dim, g.domain.len()),
        ));
    }
    let mut axes = Vec::with_capacity(g.dim);
    for (d, (&n, [lo, hi])) in g.n.iter().zip(&g.domain).enumerate() {
        let axis = Axis::new(*lo, *hi, n).map_err(|e| CliError::schema(format!("grid.domain[{d}]"), e.to_string()))?;
        axes.push(axis);
    }
    Ok(Arc::new(GridSpec::new(axes)?))
}

fn density_measure(grid: Arc<GridSpec>, density: Vec<f64>, at: &str) -> Result<(DiscreteMeasure, f64)> {
    let cell = grid.cell_volume();
    let m = DiscreteMeasure::new(grid, density.into_iter().map(|v| v * cell).collect())
        .map_err(|e| CliError::schema(at, e.to_string()))?;
    let (m, mass) = normalize(&m).map_err(|e| CliError::schema(at, e.to_string()))?;
    Ok((m, mass))
}

fn build_base(b: &BaseSection, grid: &Arc<GridSpec>, base_dir: &Path) -> Result<(DiscreteMeasure, f64)> {
    let density: Vec<f64> = match b.kind {
        BaseKind::Uniform => vec![1.0 / grid.volume(); grid.len()],
        BaseKind::BilinearXy => {
            if grid.dim() != 2 {
                return Err(CliError::schema("base.kind", "bilinear_xy needs a 2-D grid"));
            }
            (0..grid.len())
                .map(|k| {
                    let [x, y] = grid.point(k);
                    0.8 * (1.0 + x * y)
                })
                .collect()
        }
        BaseKind::Table => {
            let p = b
                .path
                .as_deref()
                .ok_or_else(|| CliError::schema("base.path", "required for a table base"))?;
            read_table(&resolve(base_dir, p), grid)?
        }
    };
    if b.kind != BaseKind::Table && b.path.is_some() {
        return Err(CliError::schema("base.path", "only allowed for a table base"));
    }
    density_measure(grid.clone(), density, "base")
}

/// Values of a named statistic at the grid nodes.
pub fn named_function(name: &str, grid: &GridSpec) -> Option<Vec<f64>> {
    let needs_y = matches!(name, "y" | "y2" | "lny" | "x_plus_y" | "xy");
    if needs_y && grid.dim() < 2 {
        return None;
    }
    let f: fn([f64; 2]) -> f64 = match name {
        "x" => |p| p[0],
        "y" => |p| p[1],
        "x2" => |p| p[0] * p[0],
        "y2" => |p| p[1] * p[1],
        "lnx" => |p| p[0].ln(),
        "lny" => |p| p[1].ln(),
        "x_plus_y" => |p| p[0] + p[1],
        "xy" => |p| p[0] * p[1],
        _ => return None,
    };
    Some((0..grid.len()).map(|k| f(grid.point(k))).collect())
}

pub const NAMED_FUNCTIONS: [&str; 8] = ["x", "y", "x2", "y2", "lnx", "lny", "x_plus_y", "xy"];

fn build_constraint(i: usize, c: &ConstraintSection, grid: &Arc<GridSpec>, base_dir: &Path) -> Result<Constraint> {
    let at = |field: &str| format!("constraints[{i}].{field}");
    let forbid = |present: bool, field: &str, why: &str| -> Result<()> {
        if present {
            Err(CliError::schema(at(field), why.to_string()))
        } else {
            Ok(())
        }
    };
    match c.kind {
        ConstraintKind::MomentInequality | ConstraintKind::MomentEquality => {
            forbid(c.axis.is_some(), "axis", "not used by moment constraints")?;
            forbid(c.target.is_some(), "target", "not used by moment constraints")?;
            let threshold = c
                .threshold
                .ok_or_else(|| CliError::schema(at("threshold"), "required for moment constraints"))?;
            if !threshold.is_finite() {
                return Err(CliError::schema(at("threshold"), "must be finite"));
            }
            let g = match (&c.function, &c.table) {
                (Some(name), None) => named_function(name, grid).ok_or_else(|| {
                    CliError::schema(
                        at("function"),
                        format!(
                            "unknown function `{name}` for a {}-D grid (known: {})",
                            grid.dim(),
                            NAMED_FUNCTIONS.join(", ")
                        ),
                    )
                })?,
                (None, Some(path)) => read_table(&resolve(base_dir, path), grid)?,
                (Some(_), Some(_)) => {
                    return Err(CliError::schema(at("table"), "give either function or table, not both"))
                }
                (None, None) => {
                    return Err(CliError::schema(
                        at("function"),
                        "moment constraints need a function or a table",
                    ))
                }
            };
            let z = DensityVector::new(grid.clone(), g.into_iter().map(|v| v - threshold).collect())
                .map_err(|e| CliError::schema(at("function"), e.to_string()))?;
            Ok(if c.kind == ConstraintKind::MomentInequality {
                Constraint::moment_inequality(z)
            } else {
                Constraint::moment_equality(z)
            })
        }
        ConstraintKind::FixedMarginal | ConstraintKind::StochasticOrderMarginal => {
            forbid(c.function.is_some(), "function", "not used by marginal constraints")?;
            forbid(c.table.is_some(), "table", "not used by marginal constraints")?;
            forbid(c.threshold.is_some(), "threshold", "not used by marginal constraints")?;
            let axis: AxisId = c
                .axis
                .ok_or_else(|| CliError::schema(at("axis"), "required for marginal constraints"))?
                .into();
            let sub = Arc::new(
                grid.axis_grid(axis)
                    .map_err(|e| CliError::schema(at("axis"), e.to_string()))?,
            );
            let t = c
                .target
                .as_ref()
                .ok_or_else(|| CliError::schema(at("target"), "required for marginal constraints"))?;
            let density = match t.kind {
                TargetKind::Uniform => {
                    if t.path.is_some() {
                        return Err(CliError::schema(at("target.path"), "only allowed for a table target"));
                    }
                    vec![1.0; sub.len()]
                }
                TargetKind::Table => {
                    let p = t
                        .path
                        .as_deref()
                        .ok_or_else(|| CliError::schema(at("target.path"), "required for a table target"))?;
                    read_table(&resolve(base_dir, p), &sub)?
                }
            };
            let (target, _) = density_measure(sub, density, &at("target"))?;
            Ok(if c.kind == ConstraintKind::FixedMarginal {
                Constraint::fixed_marginal(axis, target)
            } else {
                Constraint::stochastic_order(axis, target)
            })
        }
    }
}

pub fn build(file: ProblemFile, base_dir: &Path) -> Result<LoadedProblem> {
    let grid = build_grid(&file.grid)?;
    let (base, base_mass) = build_base(&file.base, &grid, base_dir)?;
    let constraints = file
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| build_constraint(i, c, &grid, base_dir))
        .collect::<Result<Vec<_>>>()?;
    let options = file.options.to_options();
    options
        .validate()
        .map_err(|e| CliError::schema("options", e.to_string()))?;
    let problem = Problem::new(base, constraints, options)?;
    Ok(LoadedProblem {
        file,
        problem,
        base_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedProblem> {
        parse_str(text, Path::new("."))
    }

    #[test]
    fn minimal_document() {
        let p = parse(r#"{"grid": {"dim": 1, "n": [8], "domain": [[0, 1]]}, "base": {"kind": "uniform"}}"#).unwrap();
        assert!(p.problem.constraints.is_empty());
        assert_eq!(p.problem.options, EngineOptions::default());
        assert!((p.base_mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_path() {
        let err = parse(
            r#"{"grid": {"dim": 1, "n": [8], "domain": [[0, 1]]}, "base": {"kind": "uniform"},
                "constraints": [{"kind": "moment_inequality", "function": "x", "threshold": 0.5, "colour": 1}]}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("constraints[0]"), "{msg}");
        assert!(msg.contains("colour"), "{msg}");
        assert_eq!(err.exit_code(), crate::exit::INPUT);
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let cases = [
            (
                r#"{"kind": "moment_inequality", "function": "x"}"#,
                "constraints[0].threshold",
            ),
            (
                r#"{"kind": "moment_inequality", "function": "cosx", "threshold": 0}"#,
                "constraints[0].function",
            ),
            (
                r#"{"kind": "moment_inequality", "function": "y", "threshold": 0}"#,
                "constraints[0].function",
            ),
            (
                r#"{"kind": "fixed_marginal", "target": {"kind": "uniform"}}"#,
                "constraints[0].axis",
            ),
            (r#"{"kind": "fixed_marginal", "axis": "x"}"#, "constraints[0].target"),
            (
                r#"{"kind": "fixed_marginal", "axis": "y", "target": {"kind": "uniform"}}"#,
                "constraints[0].axis",
            ),
        ];
        for (c, path) in cases {
            let doc = format!(
                r#"{{"grid": {{"dim": 1, "n": [8], "domain": [[0, 1]]}}, "base": {{"kind": "uniform"}}, "constraints": [{c}]}}"#
            );
            let err = parse(&doc).unwrap_err();
            assert!(err.to_string().starts_with(path), "{err} for {c}");
        }
        let err =
            parse(r#"{"grid": {"dim": 3, "n": [8], "domain": [[0, 1]]}, "base": {"kind": "uniform"}}"#).unwrap_err();
        assert!(err.to_string().starts_with("grid.dim"));
        let err = parse(r#"{"grid": {"dim": 1, "n": [8], "domain": [[0, 1]]}, "base": {"kind": "bilinear_xy"}}"#)
            .unwrap_err();
        assert!(err.to_string().starts_with("base.kind"));
    }

    #[test]
    fn named_functions_on_a_square() {
        let g = GridSpec::unit_square(2).unwrap();
        assert_eq!(named_function("x_plus_y", &g).unwrap(), vec![0.5, 1.0, 1.0, 1.5]);
        assert_eq!(named_function("xy", &g).unwrap()[3], 0.5625);
        for name in NAMED_FUNCTIONS {
            assert!(named_function(name, &g).is_some());
        }
        assert!(named_function("exp", &g).is_none());
    }

    #[test]
    fn options_override_defaults() {
        let p = parse(
            r#"{"grid": {"dim": 1, "n": [8], "domain": [[0, 1]]}, "base": {"kind": "uniform"},
                "options": {"mode": "naive", "max_cycles": 7, "on_cap": "abort"}}"#,
        )
        .unwrap();
        assert_eq!(p.problem.options.mode, Mode::Naive);
        assert_eq!(p.problem.options.max_cycles, 7);
        assert_eq!(p.problem.options.on_cap, CapPolicy::Abort);
        let err = parse(
            r#"{"grid": {"dim": 1, "n": [8], "domain": [[0, 1]]}, "base": {"kind": "uniform"}, "options": {"tol_tv": -1}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("options"));
    }
}
