//! Built-in example problems.

use crate::problem::{
    BaseKind, BaseSection, ConstraintKind, ConstraintSection, GridSection, OptionsSection, ProblemFile,
};

pub const NAMES: [&str; 2] = ["ex31", "ex32"];

fn moment(function: &str, threshold: f64) -> ConstraintSection {
    ConstraintSection {
        kind: ConstraintKind::MomentInequality,
        function: Some(function.to_string()),
        table: None,
        threshold: Some(threshold),
        axis: None,
        target: None,
    }
}

/// Uniform base on [0,1] with `E[X] >= 0.7` and `E[X^2] >= 0.7`.
pub fn ex31() -> ProblemFile {
    ProblemFile {
        grid: GridSection {
            dim: 1,
            n: vec![4096],
            domain: vec![[0.0, 1.0]],
        },
        base: BaseSection {
            kind: BaseKind::Uniform,
            path: None,
        },
        constraints: vec![moment("x", 0.7), moment("x2", 0.7)],
        options: OptionsSection::default(),
    }
}

/// Density `0.8(1+xy)` on the unit square with `E[ln X] >= -0.5` and
/// `E[X+Y] >= 1.3`.
pub fn ex32() -> ProblemFile {
    ProblemFile {
        grid: GridSection {
            dim: 2,
            n: vec![256, 256],
            domain: vec![[0.0, 1.0], [0.0, 1.0]],
        },
        base: BaseSection {
            kind: BaseKind::BilinearXy,
            path: None,
        },
        constraints: vec![moment("lnx", -0.5), moment("x_plus_y", 1.3)],
        options: OptionsSection::default(),
    }
}

pub fn by_name(name: &str) -> Option<ProblemFile> {
    match name {
        "ex31" => Some(ex31()),
        "ex32" => Some(ex32()),
        _ => None,
    }
}
