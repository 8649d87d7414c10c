//! Convergence studies: per-level errors and a fitted log-log order.

use serde::Serialize;
use swlab::field::Grid;
use swlab::sample::SeededRng;

use crate::checks::{
    adjoint_defects, dirac_variation_errors, fit, holonomy_errors, kahler_identity_error, lc_errors, stream, VariationRegime,
    ADJOINT_PAIRS, CURVED_METRIC_AMP, HOLONOMY_SAMPLES,
};
use crate::report::Bound;
use crate::{Error, Result};

/// Errors at or below this level are treated as rounding noise.
pub const SATURATION_FLOOR: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    /// Step size t or ε; levels strictly decreasing.
    Step,
    /// Grid size n; levels strictly increasing, order fitted against h = 2π/n.
    Grid,
}

pub struct StudySpec {
    pub name: &'static str,
    pub variable: Variable,
    pub expected: Bound,
    run: fn(&StudyInput) -> Result<Vec<f64>>,
}

pub struct StudyInput {
    pub seed: u64,
    /// Grid for step studies.
    pub grid: Grid,
    pub levels: Vec<f64>,
}

impl StudyInput {
    fn grids(&self) -> Result<Vec<Grid>> {
        self.levels.iter().map(|&n| Ok(Grid::new(n as usize)?)).collect()
    }
}

pub const STUDIES: &[StudySpec] = &[
    StudySpec {
        name: "dirac-variation",
        variable: Variable::Step,
        expected: Bound::Within { center: 2.0, half_width: 0.1 },
        run: |i| dirac_variation_errors(i.seed, i.grid, VariationRegime::ConstantBackground, &i.levels),
    },
    StudySpec {
        name: "dirac-variation-rotating",
        variable: Variable::Step,
        expected: Bound::Within { center: 2.0, half_width: 0.1 },
        run: |i| dirac_variation_errors(i.seed, i.grid, VariationRegime::RotatingFrame, &i.levels),
    },
    StudySpec { name: "holonomy", variable: Variable::Step, expected: Bound::AtLeast { value: 1.0 }, run: holonomy_rms },
    StudySpec {
        name: "lc-variation",
        variable: Variable::Step,
        expected: Bound::Within { center: 2.0, half_width: 0.1 },
        run: |i| lc_errors(i.seed, i.grid, &i.levels),
    },
    StudySpec {
        name: "adjoint-curved",
        variable: Variable::Grid,
        expected: Bound::AtLeast { value: 1.9 },
        run: |i| adjoint_defects(i.seed, &i.grids()?, CURVED_METRIC_AMP, ADJOINT_PAIRS),
    },
    StudySpec {
        name: "kahler-identity",
        variable: Variable::Grid,
        expected: Bound::AtLeast { value: 0.0 },
        run: |i| Ok(i.grids()?.into_iter().map(|g| kahler_identity_error(i.seed, g)).collect()),
    },
];

pub fn find_study(name: &str) -> Option<&'static StudySpec> {
    STUDIES.iter().find(|s| s.name == name)
}

/// RMS over the holonomy samples at each ε.
fn holonomy_rms(i: &StudyInput) -> Result<Vec<f64>> {
    let mut r: SeededRng = stream(i.seed, "holonomy.ratio");
    let mut ss = vec![0.0; i.levels.len()];
    for _ in 0..HOLONOMY_SAMPLES {
        for (acc, e) in ss.iter_mut().zip(holonomy_errors(&mut r, &i.levels)?) {
            *acc += e * e;
        }
    }
    Ok(ss.into_iter().map(|s| (s / HOLONOMY_SAMPLES as f64).sqrt()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyReport {
    pub check: String,
    pub variable: Variable,
    pub levels: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of log(error) against log(step) or log(h).
    pub order: f64,
    /// RMS residual of that fit in log space.
    pub residual: f64,
    pub expected: Bound,
    /// All errors at the rounding floor; the order is meaningless and not judged.
    pub saturated: bool,
    /// Some refinement failed to reduce the error.
    pub non_monotone: bool,
    pub pass: bool,
}

impl StudyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study fields serialize")
    }
}

pub fn convergence_study(check: &str, seed: u64, grid: Grid, levels: &[f64]) -> Result<StudyReport> {
    let spec = find_study(check).ok_or_else(|| Error::UnknownCheck(check.to_string()))?;
    if levels.len() < 3 {
        return Err(Error::Study(format!("{} levels given, at least 3 needed", levels.len())));
    }
    match spec.variable {
        Variable::Step => {
            if levels.iter().any(|l| !l.is_finite() || *l <= 0.0) || levels.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::Study("step levels must be positive and strictly decreasing".into()));
            }
        }
        Variable::Grid => {
            let bad = |l: &f64| l.fract() != 0.0 || *l < 4.0 || (*l as usize) % 2 != 0;
            if levels.iter().any(bad) || levels.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Study("grid levels must be even integers ≥ 4, strictly increasing".into()));
            }
        }
    }
    let errors = (spec.run)(&StudyInput { seed, grid, levels: levels.to_vec() })?;
    let x: Vec<f64> = match spec.variable {
        Variable::Step => levels.to_vec(),
        Variable::Grid => levels.iter().map(|n| std::f64::consts::TAU / n).collect(),
    };
    let saturated = errors.iter().all(|e| e.abs() <= SATURATION_FLOOR);
    let non_monotone = errors.windows(2).any(|w| w[1] >= w[0]);
    let (order, residual) = if saturated { (0.0, 0.0) } else { fit(&x, &errors) };
    let pass = saturated || (!non_monotone && spec.expected.admits(order));
    Ok(StudyReport {
        check: check.to_string(),
        variable: spec.variable,
        levels: levels.to_vec(),
        errors,
        order,
        residual,
        expected: spec.expected,
        saturated,
        non_monotone,
        pass,
    })
}
