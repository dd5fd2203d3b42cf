//! Coefficient model `a = a_per + a_defect` and its structural assumptions:
//! uniform bounds `1/lambda < a < lambda`, Lipschitz metadata and integrability
//! of the defect.
//!
//! Coefficients are closed-form catalog entries, tabulated periodic grids with
//! multilinear interpolation, or arbitrary user closures.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::conjugate;
use crate::quad::GaussLegendre;

/// Scalar field on `R^d`.
pub type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Default per-axis validation resolution in 1D.
pub const DEFAULT_RESOLUTION_1D: usize = 1 << 10;
/// Default per-axis validation resolution in 2D.
pub const DEFAULT_RESOLUTION_2D: usize = 1 << 7;
/// Absolute level below which the defect counts as negligible.
pub const DEFAULT_TAIL_BOUND: f64 = 1e-6;

/// One-dimensional profile of a laminate `a_0(y_1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LaminateProfile {
    /// `base + amplitude * cos(2 pi y_1)`.
    Cosine { base: f64, amplitude: f64 },
    /// `inner` on `|y_1| < fraction / 2` (per period), `outer` elsewhere.
    TwoPhase { inner: f64, outer: f64, fraction: f64 },
}

impl LaminateProfile {
    pub fn eval(&self, y1: f64) -> f64 {
        match *self {
            LaminateProfile::Cosine { base, amplitude } => base + amplitude * (2.0 * PI * y1).cos(),
            LaminateProfile::TwoPhase { inner, outer, fraction } => {
                let r = y1 - y1.round();
                if r.abs() < 0.5 * fraction {
                    inner
                } else {
                    outer
                }
            }
        }
    }
}

/// Closed-form periodic coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PeriodicSpec {
    Constant { value: f64 },
    /// `base + amplitude * prod_i cos(2 pi y_i)`.
    Cosine { base: f64, amplitude: f64 },
    /// `base + amplitude * mean_i cos(2 pi y_i)`.
    CosineSum { base: f64, amplitude: f64 },
    /// Depends on the first coordinate only.
    Laminate { profile: LaminateProfile },
}

impl PeriodicSpec {
    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            PeriodicSpec::Constant { value } => *value,
            PeriodicSpec::Cosine { base, amplitude } => {
                base + amplitude * y.iter().map(|t| (2.0 * PI * t).cos()).product::<f64>()
            }
            PeriodicSpec::CosineSum { base, amplitude } => {
                base + amplitude * y.iter().map(|t| (2.0 * PI * t).cos()).sum::<f64>() / y.len() as f64
            }
            PeriodicSpec::Laminate { profile } => profile.eval(y[0]),
        }
    }
}

/// Closed-form localized defects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DefectSpec {
    /// `amplitude * exp(-rate |y|)`.
    Exponential { amplitude: f64, rate: f64 },
    /// `amplitude * exp(-|y|^2 / width^2)`.
    Gaussian { amplitude: f64, width: f64 },
}

impl DefectSpec {
    pub fn eval(&self, y: &[f64]) -> f64 {
        let r2: f64 = y.iter().map(|t| t * t).sum();
        match *self {
            DefectSpec::Exponential { amplitude, rate } => amplitude * (-rate * r2.sqrt()).exp(),
            DefectSpec::Gaussian { amplitude, width } => amplitude * (-r2 / (width * width)).exp(),
        }
    }

    /// Radius beyond which `|a_defect| < tail`.
    pub fn decay_radius(&self, tail: f64) -> f64 {
        match *self {
            DefectSpec::Exponential { amplitude, rate } => (amplitude.abs() / tail).ln().max(0.0) / rate,
            DefectSpec::Gaussian { amplitude, width } => width * (amplitude.abs() / tail).ln().max(0.0).sqrt(),
        }
    }
}

/// Periodic grid of samples on the unit cell, interpolated multilinearly with periodic wrap.
///
/// Node `i` along an axis sits at `-1/2 + i/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedGrid {
    pub dim: usize,
    pub resolution: usize,
    /// Row-major, first coordinate slowest.
    pub values: Vec<f64>,
}

impl TabulatedGrid {
    pub fn new(dim: usize, resolution: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("tabulated grid dimension {dim} not in 1..=3")));
        }
        if resolution < 2 {
            return Err(Error::InvalidInput("tabulated grid needs resolution >= 2".into()));
        }
        let expected = resolution.pow(dim as u32);
        if values.len() != expected {
            return Err(Error::InvalidInput(format!(
                "tabulated grid expects {expected} values, found {}",
                values.len()
            )));
        }
        Ok(Self { dim, resolution, values })
    }

    /// Parses the text format: a header `d resolution` followed by row-major values.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split_whitespace())
            .map(str::to_owned);
        let mut header = |name: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::InvalidInput(format!("tabulated grid: missing {name}")))?
                .parse::<usize>()
                .map_err(|e| Error::InvalidInput(format!("tabulated grid: bad {name}: {e}")))
        };
        let dim = header("dimension")?;
        let resolution = header("resolution")?;
        let values = tokens
            .map(|t| t.parse::<f64>().map_err(|e| Error::InvalidInput(format!("tabulated grid value {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, resolution, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let n = self.resolution;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for k in 0..self.dim {
            let t = (y[k] + 0.5) * n as f64;
            let f = t.floor();
            base[k] = (f as i64).rem_euclid(n as i64) as usize;
            frac[k] = t - f;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut w = 1.0;
            let mut idx = 0usize;
            for k in 0..self.dim {
                let bit = (corner >> k) & 1;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                idx = idx * n + (base[k] + bit) % n;
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        acc
    }
}

/// Evaluable scalar field: catalog entry, tabulated grid or closure.
#[derive(Clone)]
pub enum Field {
    Periodic(PeriodicSpec),
    Defect(DefectSpec),
    Tabulated(Arc<TabulatedGrid>),
    Custom(FieldFn),
}

impl Field {
    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            Field::Periodic(s) => s.eval(y),
            Field::Defect(s) => s.eval(y),
            Field::Tabulated(g) => g.eval(y),
            Field::Custom(f) => f(y),
        }
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Periodic(s) => write!(f, "{s:?}"),
            Field::Defect(s) => write!(f, "{s:?}"),
            Field::Tabulated(g) => write!(f, "Tabulated(d={}, n={})", g.dim, g.resolution),
            Field::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Periodic part `a_per` with its declared bounds.
#[derive(Debug, Clone)]
pub struct PeriodicCoefficient {
    pub field: Field,
    /// Declared coercivity bound: `1/lambda < a < lambda`.
    pub lambda: f64,
    /// Declared Lipschitz constant (metadata, not verified).
    pub lipschitz: f64,
    pub dim: usize,
}

impl PeriodicCoefficient {
    pub fn new(field: Field, lambda: f64, dim: usize) -> Result<Self> {
        if !(lambda > 1.0) {
            return Err(Error::InvalidInput(format!("lambda must exceed 1, got {lambda}")));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("dimension {dim} not supported")));
        }
        Ok(Self { field, lambda, lipschitz: f64::INFINITY, dim })
    }

    pub fn catalog(spec: PeriodicSpec, lambda: f64, dim: usize) -> Result<Self> {
        let lip = match &spec {
            PeriodicSpec::Constant { .. } => 0.0,
            PeriodicSpec::Cosine { amplitude, .. } => 2.0 * PI * amplitude.abs() * (dim as f64).sqrt(),
            PeriodicSpec::CosineSum { amplitude, .. } => 2.0 * PI * amplitude.abs(),
            PeriodicSpec::Laminate { profile: LaminateProfile::Cosine { amplitude, .. } } => 2.0 * PI * amplitude.abs(),
            PeriodicSpec::Laminate { profile: LaminateProfile::TwoPhase { .. } } => f64::INFINITY,
        };
        Ok(Self::new(Field::Periodic(spec), lambda, dim)?.with_lipschitz(lip))
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.field.eval(y)
    }
}

/// Localized defect `a_defect`.
#[derive(Debug, Clone)]
pub struct DefectCoefficient {
    pub field: Field,
    /// Radius beyond which `|a_defect|` is below `tail_bound`.
    pub decay_radius: f64,
    pub tail_bound: f64,
    /// Numerical estimate of `||a_defect||_{L^{p'}}`; filled in by [`Coefficient::new`].
    pub lp_prime_norm_estimate: f64,
}

impl DefectCoefficient {
    pub fn new(field: Field, decay_radius: f64, tail_bound: f64) -> Self {
        Self { field, decay_radius, tail_bound, lp_prime_norm_estimate: f64::NAN }
    }

    pub fn catalog(spec: DefectSpec) -> Self {
        let r = spec.decay_radius(DEFAULT_TAIL_BOUND);
        Self::new(Field::Defect(spec), r, DEFAULT_TAIL_BOUND)
    }

    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.field.eval(y)
    }
}

/// Full coefficient `a = a_per + a_defect` together with the exponent `p`.
#[derive(Debug, Clone)]
pub struct Coefficient {
    pub periodic: PeriodicCoefficient,
    pub defect: Option<DefectCoefficient>,
    pub p: f64,
}

impl Coefficient {
    pub fn new(periodic: PeriodicCoefficient, defect: Option<DefectCoefficient>, p: f64) -> Result<Self> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::InvalidInput(format!("requires p >= 2, got {p}")));
        }
        let mut defect = defect;
        if let Some(d) = defect.as_mut() {
            let radius = (4.0 * d.decay_radius).max(8.0);
            d.lp_prime_norm_estimate = box_integral(&d.field, periodic.dim, radius, conjugate(p)).powf(1.0 / conjugate(p));
        }
        Ok(Self { periodic, defect, p })
    }

    /// Coefficient of the numerical experiment: `2 + cos(2 pi y) + 10 exp(-|y|)` in 1D.
    pub fn benchmark_1d(p: f64) -> Result<Self> {
        let per = PeriodicCoefficient::catalog(PeriodicSpec::Cosine { base: 2.0, amplitude: 1.0 }, 14.0, 1)?;
        let def = DefectCoefficient::catalog(DefectSpec::Exponential { amplitude: 10.0, rate: 1.0 });
        Self::new(per, Some(def), p)
    }

    pub fn dim(&self) -> usize {
        self.periodic.dim
    }

    pub fn lambda(&self) -> f64 {
        self.periodic.lambda
    }

    pub fn has_defect(&self) -> bool {
        self.defect.is_some()
    }

    /// Same periodic part, no defect.
    pub fn periodic_only(&self) -> Self {
        Self { periodic: self.periodic.clone(), defect: None, p: self.p }
    }

    /// `a_per(y) + a_defect(y)`; exactly `a_per(y)` without a defect.
    #[inline]
    pub fn evaluate(&self, y: &[f64]) -> f64 {
        let a = self.periodic.eval(y);
        match &self.defect {
            Some(d) => a + d.eval(y),
            None => a,
        }
    }

    #[inline]
    pub fn defect_at(&self, y: &[f64]) -> f64 {
        self.defect.as_ref().map_or(0.0, |d| d.eval(y))
    }

    /// Samples the coefficient on uniform grids and checks the structural assumptions.
    ///
    /// Fails with [`Error::AssumptionViolated`] when a sample leaves `(1/lambda, lambda)`;
    /// softer findings (periodicity residual, non-converging defect tail) are listed in
    /// the report.
    pub fn validate(&self, resolution: usize) -> Result<ValidationReport> {
        if resolution < 2 {
            return Err(Error::InvalidInput("grid_resolution must be >= 2".into()));
        }
        let d = self.dim();
        let lambda = self.lambda();
        let mut warnings = Vec::new();

        let mut per_min = f64::INFINITY;
        let mut per_max = f64::NEG_INFINITY;
        let mut period_res: f64 = 0.0;
        let mut worst = None;
        let mut y = vec![0.0; d];
        let mut shifted = vec![0.0; d];
        for idx in 0..resolution.pow(d as u32) {
            grid_point(idx, resolution, -0.5, 1.0 / resolution as f64, &mut y);
            let v = self.periodic.eval(&y);
            per_min = per_min.min(v);
            per_max = per_max.max(v);
            if !(v > 1.0 / lambda && v < lambda) && worst.is_none() {
                worst = Some((y.clone(), v, "a_per"));
            }
            for k in 0..d {
                shifted.copy_from_slice(&y);
                shifted[k] += 1.0;
                period_res = period_res.max((self.periodic.eval(&shifted) - v).abs());
            }
        }
        if period_res > 1e-12 {
            warnings.push(format!("periodicity residual {period_res:e} exceeds 1e-12"));
        }

        let (mut a_min, mut a_max) = (per_min, per_max);
        let mut tail = None;
        if let Some(def) = &self.defect {
            let half = def.decay_radius.max(0.5) + 1.0;
            let cap = (4.0e6f64).powf(1.0 / d as f64) as usize;
            let per_axis = ((resolution as f64 * 2.0 * half).ceil() as usize).min(cap).max(resolution);
            let h = 2.0 * half / (per_axis - 1) as f64;
            for idx in 0..per_axis.pow(d as u32) {
                grid_point(idx, per_axis, -half, h, &mut y);
                let v = self.evaluate(&y);
                a_min = a_min.min(v);
                a_max = a_max.max(v);
                if !(v > 1.0 / lambda && v < lambda) && worst.is_none() {
                    worst = Some((y.clone(), v, "a"));
                }
            }
            let t = defect_tail(def, d, self.p);
            if !t.converged {
                warnings.push("defect L^{p'} box integrals do not settle".into());
            }
            if t.max_beyond_radius > def.tail_bound {
                warnings.push(format!(
                    "|a_defect| = {:e} beyond decay radius exceeds tail bound {:e}",
                    t.max_beyond_radius, def.tail_bound
                ));
            }
            tail = Some(t);
        }

        if let Some((y, v, which)) = worst {
            return Err(Error::AssumptionViolated(format!(
                "ellipticity: {which}({y:?}) = {v} outside ({}, {lambda})",
                1.0 / lambda
            )));
        }
        Ok(ValidationReport {
            resolution,
            lambda,
            a_per_min: per_min,
            a_per_max: per_max,
            a_min,
            a_max,
            periodicity_residual: period_res,
            tail,
            warnings,
        })
    }
}

/// Findings of [`Coefficient::validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub resolution: usize,
    pub lambda: f64,
    pub a_per_min: f64,
    pub a_per_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub periodicity_residual: f64,
    pub tail: Option<TailEstimate>,
    pub warnings: Vec<String>,
}

/// Integrability witness for the defect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailEstimate {
    /// `(r, int_{[-r,r]^d} |a_defect|^{p'})` on dyadic radii.
    pub box_integrals: Vec<(f64, f64)>,
    pub cauchy_differences: Vec<f64>,
    pub converged: bool,
    pub max_beyond_radius: f64,
}

fn defect_tail(def: &DefectCoefficient, d: usize, p: f64) -> TailEstimate {
    let q = conjugate(p);
    let mut radius = 1.0;
    let mut box_integrals = Vec::new();
    while radius < 4.0 * def.decay_radius.max(1.0) {
        box_integrals.push((radius, box_integral(&def.field, d, radius, q)));
        radius *= 2.0;
    }
    box_integrals.push((radius, box_integral(&def.field, d, radius, q)));
    let cauchy: Vec<f64> = box_integrals.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let last = box_integrals.last().map_or(0.0, |b| b.1);
    let converged = cauchy.last().is_none_or(|c| *c <= 1e-6 * last.max(1e-300));
    let outer = 2.0 * def.decay_radius.max(1.0);
    TailEstimate {
        box_integrals,
        cauchy_differences: cauchy,
        converged,
        max_beyond_radius: tail_max(def, d, def.decay_radius, outer, 512),
    }
}

/// Largest sampled `|a_defect|` on the shell `radius <= |y|_inf <= outer`.
pub fn tail_max(def: &DefectCoefficient, d: usize, radius: f64, outer: f64, samples: usize) -> f64 {
    let mut best: f64 = 0.0;
    let mut y = vec![0.0; d];
    let h = 2.0 * outer / (samples - 1) as f64;
    for idx in 0..samples.pow(d as u32) {
        grid_point(idx, samples, -outer, h, &mut y);
        let r = y.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if r >= radius {
            best = best.max(def.eval(&y).abs());
        }
    }
    best
}

/// `int_{[-r, r]^d} |f|^q` by tensor Gauss-Legendre on unit-size cells.
fn box_integral(f: &Field, d: usize, r: f64, q: f64) -> f64 {
    let gl = GaussLegendre::new(8);
    let cells = ((2.0 * r * if d == 1 { 8.0 } else { 2.0 }).ceil() as usize).max(2);
    let h = 2.0 * r / cells as f64;
    let mut pts = Vec::with_capacity(cells * gl.nodes.len());
    for c in 0..cells {
        let mid = -r + h * (c as f64 + 0.5);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            pts.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    let m = pts.len();
    let mut y = vec![0.0; d];
    let mut acc = 0.0;
    for idx in 0..m.pow(d as u32) {
        let mut rem = idx;
        let mut w = 1.0;
        for k in (0..d).rev() {
            let (x, wk) = pts[rem % m];
            y[k] = x;
            w *= wk;
            rem /= m;
        }
        acc += w * f.eval(&y).abs().powf(q);
    }
    acc
}

/// Writes the `idx`-th point of a tensor grid (first coordinate slowest).
pub(crate) fn grid_point(idx: usize, n: usize, origin: f64, h: f64, y: &mut [f64]) {
    let mut rem = idx;
    for k in (0..y.len()).rev() {
        y[k] = origin + h * (rem % n) as f64;
        rem /= n;
    }
}
