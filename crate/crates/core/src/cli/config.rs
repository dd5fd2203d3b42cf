//! Run configuration: a TOML file with the sections `coefficient`, `problem`, `solver`
//! and `output`, plus the top-level exponent `p`.
//!
//! ```toml
//! p = 3.0
//!
//! [coefficient]
//! dim = 1
//! lambda = 14.0
//! periodic = { kind = "cosine", base = 2.0, amplitude = 1.0 }
//! defect = { kind = "exponential", amplitude = 10.0, rate = 1.0 }
//!
//! [problem]
//! rhs = { kind = "polynomial", coefficients = [0.0, 2.0] }
//! omega = [-0.5, 0.5]
//! eps = [0.1, 0.05, 0.01, 0.005, 0.001, 0.0005]
//!
//! [solver]
//! seed = 42
//!
//! [output]
//! format = "csv"
//! path = "out"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeffs::{Coefficient, DefectCoefficient, DefectSpec, Field, PeriodicCoefficient, PeriodicSpec, TabulatedGrid};
use crate::error::{ConfigError, Error, Result};
use crate::oned::{CorrectorKind, QuadratureSpec, RhsSpec, TABLE_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientBlock {
    pub dim: usize,
    pub lambda: f64,
    /// Catalog entry; exclusive with `grid_file`.
    pub periodic: Option<PeriodicSpec>,
    /// Tabulated periodic samples, resolved relative to the config file.
    pub grid_file: Option<PathBuf>,
    pub defect: Option<DefectSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    #[serde(default = "default_rhs")]
    pub rhs: RhsSpec,
    #[serde(default = "default_omega")]
    pub omega: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_kind")]
    pub corrector: CorrectorKind,
    /// Averaging scale exponent: `delta = eps^nu`.
    #[serde(default = "one")]
    pub nu: f64,
    /// Directions for the cell and defect subcommands.
    #[serde(default)]
    pub xi: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    /// Nodes per axis of the periodic cell grid.
    pub cell_grid: Option<usize>,
    /// Mesh resolution of the truncated defect domain.
    #[serde(default = "default_cells_per_unit")]
    pub cells_per_unit: usize,
    /// Half-width of the truncated defect domain; derived from the decay radius if absent.
    pub radius: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    /// Samples per inequality for `ineq`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub format: OutputFormat,
    /// Output directory.
    #[serde(default = "default_path")]
    pub path: PathBuf,
    /// Significant digits in CSV.
    #[serde(default = "default_precision")]
    pub precision: usize,
}

fn default_rhs() -> RhsSpec {
    RhsSpec::Polynomial { coefficients: vec![0.0, 2.0] }
}
fn default_omega() -> Vec<f64> {
    vec![-0.5, 0.5]
}
fn default_eps() -> Vec<f64> {
    TABLE_EPS.to_vec()
}
fn default_kind() -> CorrectorKind {
    CorrectorKind::Full
}
fn one() -> f64 {
    1.0
}
fn default_cells_per_unit() -> usize {
    32
}
fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    50_000
}
fn default_samples() -> usize {
    1_000_000
}
fn default_path() -> PathBuf {
    PathBuf::from("out")
}
fn default_precision() -> usize {
    6
}

impl Default for ProblemBlock {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}
impl Default for SolverBlock {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}
impl Default for OutputBlock {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: f64,
    pub coefficient: CoefficientBlock,
    pub problem: ProblemBlock,
    pub solver: SolverBlock,
    pub output: OutputBlock,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Reads and validates `path`; all violations are reported together.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![ConfigError::new("path", format!("{}: {e}", path.display()))]))?;
    let mut cfg = parse_config_str(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    if let Some(g) = &cfg.coefficient.grid_file {
        let full = cfg.base_dir.join(g);
        if !full.exists() {
            return Err(Error::Config(vec![ConfigError::new("coefficient.grid_file", format!("{} not found", full.display()))]));
        }
    }
    Ok(cfg)
}

/// Parses and validates config text.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| Error::Config(vec![ConfigError::new("<file>", e.message().to_string())]))?;
    let mut errs = Vec::new();

    for key in table.keys() {
        if !matches!(key.as_str(), "p" | "coefficient" | "problem" | "solver" | "output") {
            errs.push(ConfigError::new(key.clone(), "unknown key"));
        }
    }
    let p = match table.get("p") {
        None => {
            errs.push(ConfigError::new("p", "missing"));
            f64::NAN
        }
        Some(v) => match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
            Some(p) => p,
            None => {
                errs.push(ConfigError::new("p", "must be a number"));
                f64::NAN
            }
        },
    };
    if p.is_finite() && p < 2.0 {
        errs.push(ConfigError::new("p", "requires p ≥ 2"));
    }

    let coefficient = section::<CoefficientBlock>(&table, "coefficient", true, &mut errs);
    let problem = section::<ProblemBlock>(&table, "problem", false, &mut errs);
    let solver = section::<SolverBlock>(&table, "solver", false, &mut errs);
    let output = section::<OutputBlock>(&table, "output", false, &mut errs);

    if let Some(c) = &coefficient {
        if !(1..=2).contains(&c.dim) {
            errs.push(ConfigError::new("coefficient.dim", "must be 1 or 2"));
        }
        if !(c.lambda > 1.0) {
            errs.push(ConfigError::new("coefficient.lambda", "must exceed 1"));
        }
        match (&c.periodic, &c.grid_file) {
            (None, None) => errs.push(ConfigError::new("coefficient.periodic", "give a catalog entry or grid_file")),
            (Some(_), Some(_)) => errs.push(ConfigError::new("coefficient.grid_file", "exclusive with coefficient.periodic")),
            _ => {}
        }
    }
    if let Some(pb) = &problem {
        if pb.omega.len() != 2 || pb.omega[0] != -0.5 || pb.omega[1] != 0.5 {
            errs.push(ConfigError::new("problem.omega", "only [-0.5, 0.5] is supported"));
        }
        if pb.eps.is_empty() || pb.eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            errs.push(ConfigError::new("problem.eps", "entries must lie in (0, 1]"));
        } else if pb.eps.windows(2).any(|w| w[1] >= w[0]) {
            errs.push(ConfigError::new("problem.eps", "must be strictly decreasing"));
        }
        if !(pb.nu > 0.0 && pb.nu <= 1.0) {
            errs.push(ConfigError::new("problem.nu", "must lie in (0, 1]"));
        }
        if let Some(c) = &coefficient {
            if pb.xi.iter().any(|x| x.len() != c.dim) {
                errs.push(ConfigError::new("problem.xi", format!("every direction needs {} components", c.dim)));
            }
        }
    }
    if let Some(s) = &solver {
        if !(s.tol > 0.0) {
            errs.push(ConfigError::new("solver.tol", "must be > 0"));
        }
        if s.max_iter == 0 {
            errs.push(ConfigError::new("solver.max_iter", "must be > 0"));
        }
        if s.cell_grid.is_some_and(|n| n < 4) {
            errs.push(ConfigError::new("solver.cell_grid", "must be ≥ 4"));
        }
        if s.cells_per_unit < 16 {
            errs.push(ConfigError::new("solver.cells_per_unit", "must be ≥ 16"));
        }
        if s.radius.is_some_and(|r| !(r >= 0.5)) {
            errs.push(ConfigError::new("solver.radius", "must be ≥ 0.5"));
        }
        if s.samples == 0 {
            errs.push(ConfigError::new("solver.samples", "must be > 0"));
        }
        if s.quadrature.order == 0 || s.quadrature.cells_per_period == 0 {
            errs.push(ConfigError::new("solver.quadrature", "order and cells_per_period must be > 0"));
        }
    }
    if let Some(o) = &output {
        if !(1..=17).contains(&o.precision) {
            errs.push(ConfigError::new("output.precision", "must lie in 1..=17"));
        }
    }

    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    Ok(RunConfig {
        p,
        coefficient: coefficient.expect("checked"),
        problem: problem.expect("checked"),
        solver: solver.expect("checked"),
        output: output.expect("checked"),
        base_dir: PathBuf::new(),
    })
}

fn section<T: serde::de::DeserializeOwned + Default>(
    table: &toml::Table,
    name: &str,
    required: bool,
    errs: &mut Vec<ConfigError>,
) -> Option<T> {
    match table.get(name) {
        None if required => {
            errs.push(ConfigError::new(name, "missing section"));
            None
        }
        None => Some(T::default()),
        Some(v) => match v.clone().try_into::<T>() {
            Ok(t) => Some(t),
            Err(e) => {
                errs.push(ConfigError::new(name, e.message().to_string()));
                None
            }
        },
    }
}

impl Default for CoefficientBlock {
    fn default() -> Self {
        Self { dim: 1, lambda: 2.0, periodic: Some(PeriodicSpec::Constant { value: 1.0 }), grid_file: None, defect: None }
    }
}

impl RunConfig {
    /// Builds the coefficient described by the `coefficient` block.
    pub fn build_coefficient(&self) -> Result<Coefficient> {
        let c = &self.coefficient;
        let per = match (&c.periodic, &c.grid_file) {
            (Some(spec), _) => PeriodicCoefficient::catalog(spec.clone(), c.lambda, c.dim)?,
            (None, Some(file)) => {
                let grid = TabulatedGrid::load(self.base_dir.join(file))?;
                if grid.dim != c.dim {
                    return Err(Error::InvalidInput(format!("grid file has dimension {}, config says {}", grid.dim, c.dim)));
                }
                PeriodicCoefficient::new(Field::Tabulated(Arc::new(grid)), c.lambda, c.dim)?
            }
            (None, None) => return Err(Error::InvalidInput("no periodic coefficient".into())),
        };
        Coefficient::new(per, c.defect.clone().map(DefectCoefficient::catalog), self.p)
    }

    /// Directions for `cell` and `defect`: the configured list or the unit vectors.
    pub fn directions(&self) -> Vec<Vec<f64>> {
        if !self.problem.xi.is_empty() {
            return self.problem.xi.clone();
        }
        let d = self.coefficient.dim;
        (0..d).map(|k| (0..d).map(|j| if j == k { 1.0 } else { 0.0 }).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BENCHMARK: &str = r#"
p = 3.0
[coefficient]
dim = 1
lambda = 14.0
periodic = { kind = "cosine", base = 2.0, amplitude = 1.0 }
defect = { kind = "exponential", amplitude = 10.0, rate = 1.0 }
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(BENCHMARK).unwrap();
        assert_eq!(c.problem.eps, TABLE_EPS.to_vec());
        assert_eq!(c.output.precision, 6);
        assert_eq!(c.output.format, OutputFormat::Csv);
        let coef = c.build_coefficient().unwrap();
        assert!((coef.evaluate(&[0.0]) - 13.0).abs() < 1e-14);
    }

    #[test]
    fn small_p_is_rejected() {
        let text = BENCHMARK.replace("p = 3.0", "p = 1.5");
        match parse_config_str(&text) {
            Err(Error::Config(e)) => assert_eq!(e, vec![ConfigError::new("p", "requires p ≥ 2")]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let text = "p = 1.0\n[solver]\ntol = -1.0\n[output]\nprecision = 40\n";
        let Err(Error::Config(e)) = parse_config_str(text) else { panic!() };
        let fields: Vec<&str> = e.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(fields, vec!["p", "coefficient", "solver.tol", "output.precision"]);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = format!("{BENCHMARK}\n[solver]\ntolerance = 1e-9\n");
        let Err(Error::Config(e)) = parse_config_str(&text) else { panic!() };
        assert_eq!(e[0].field, "solver");
    }
}
