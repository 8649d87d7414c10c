//! Plain-text `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! seed = 7
//! grid = 8
//! grids = 6, 12
//! kernel_grid = 4
//! epsilons = 1e-2, 5e-3, 2.5e-3
//! suites = clifford, holonomy
//! tol.adjoint.flat = 1e-10
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Clifford,
    Metric,
    Calculus,
    DiracVariation,
    Adjoint,
    Holonomy,
    KahlerKernel,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Clifford,
        Suite::Metric,
        Suite::Calculus,
        Suite::DiracVariation,
        Suite::Adjoint,
        Suite::Holonomy,
        Suite::KahlerKernel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Clifford => "clifford",
            Suite::Metric => "metric",
            Suite::Calculus => "calculus",
            Suite::DiracVariation => "dirac-variation",
            Suite::Adjoint => "adjoint",
            Suite::Holonomy => "holonomy",
            Suite::KahlerKernel => "kahler-kernel",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Working grid for single-grid checks.
    pub grid: usize,
    /// Refinement ladder for grid-convergence checks.
    pub grids: Vec<usize>,
    /// Grid for the dense kernel assembly.
    pub kernel_grid: usize,
    /// Step ladder for difference quotients and holonomy loops.
    pub epsilons: Vec<f64>,
    /// Overrides of the default check tolerances, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    pub suites: Vec<Suite>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 1,
            grid: 8,
            grids: vec![6, 12],
            kernel_grid: 4,
            epsilons: vec![1e-2, 5e-3, 2.5e-3],
            tolerances: BTreeMap::new(),
            suites: Suite::ALL.to_vec(),
        }
    }
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = SuiteConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Config(format!("line {}: {msg}", k + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "seed" => c.seed = value.parse().map_err(|_| bad("seed must be an unsigned integer"))?,
                "grid" => c.grid = value.parse().map_err(|_| bad("grid must be an integer"))?,
                "kernel_grid" => c.kernel_grid = value.parse().map_err(|_| bad("kernel_grid must be an integer"))?,
                "grids" => c.grids = list(value).map_err(|_| bad("grids must be integers"))?,
                "epsilons" => c.epsilons = list(value).map_err(|_| bad("epsilons must be reals"))?,
                "suites" => c.suites = list(value)?,
                _ => match key.strip_prefix("tol.") {
                    Some(name) if !name.is_empty() => {
                        let tol: f64 = value.parse().map_err(|_| bad("tolerance must be a real"))?;
                        c.tolerances.insert(name.to_string(), tol);
                    }
                    _ => return Err(bad(&format!("unknown key '{key}'"))),
                },
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for &n in [self.grid, self.kernel_grid].iter().chain(&self.grids) {
            if n < 4 || n % 2 != 0 {
                return Err(Error::Config(format!("grid size {n} must be even and at least 4")));
            }
        }
        if self.grids.len() < 2 || self.grids.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("grids must list at least two strictly increasing sizes".into()));
        }
        if self.epsilons.len() < 3 {
            return Err(Error::Config("epsilon ladder needs at least three levels".into()));
        }
        if self.epsilons.iter().any(|e| !e.is_finite() || *e <= 0.0) || self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("epsilon ladder must be positive and strictly decreasing".into()));
        }
        for (name, tol) in &self.tolerances {
            if !tol.is_finite() {
                return Err(Error::Config(format!("tolerance for {name} is not finite")));
            }
        }
        Ok(())
    }
}

fn list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, T::Err> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}
