//! Exact one-dimensional pipeline on `Omega = (-1/2, 1/2)` with homogeneous Dirichlet data.
//!
//! In 1D the oscillating solution is explicit up to a flux constant:
//! `u_eps' = ((-F + C_eps) / a(x/eps))^{1/(p-1)}` (signed power), where `F` is the
//! antiderivative of `f` from `-1/2` and `C_eps` makes `u_eps'` integrate to zero.
//! The homogenized problem has the same form with the constant coefficient
//! `a* = (int_Q a_per^{-1/(p-1)})^{-(p-1)}`, and the correctors are explicit too.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{Coefficient, PeriodicCoefficient};
use crate::error::{Error, Result};
use crate::num::signed_pow;
use crate::quad::CompositeRule;
use crate::root::bisect_secant;

/// Width at which the flux-constant bisection stops.
pub const ROOT_XTOL: f64 = 1e-13;

/// Geometric grading towards the sign changes of `u'`.
const GRADING_RATIO: f64 = 0.15;
const GRADING_LEVELS: usize = 8;

/// Composite Gauss-Legendre settings for oscillating integrands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub order: usize,
    /// Cells per `eps`-period.
    pub cells_per_period: usize,
    /// Lower bound on the number of cells over `Omega`.
    pub min_cells: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { order: 8, cells_per_period: 64, min_cells: 1024 }
    }
}

impl QuadratureSpec {
    /// Uniform rule on `Omega` resolving the period `eps`, with an even cell count so
    /// that `x = 0` is a partition point.
    pub fn rule(&self, eps: f64) -> CompositeRule {
        let mut cells = ((self.cells_per_period as f64 / eps).ceil() as usize).max(self.min_cells);
        cells += cells % 2;
        CompositeRule::uniform(-0.5, 0.5, cells, self.order)
    }
}

/// Catalog right-hand sides with closed-form antiderivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RhsSpec {
    /// `f(x) = sum_k coefficients[k] x^k`.
    Polynomial { coefficients: Vec<f64> },
    /// `f(x) = amplitude * sin(2 pi frequency x)`.
    Sine { amplitude: f64, frequency: f64 },
}

/// Right-hand side `f` on `Omega`.
#[derive(Clone)]
pub enum Rhs {
    Catalog(RhsSpec),
    /// Closure plus a numerically tabulated antiderivative.
    Custom { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, antiderivative: Arc<Antiderivative> },
}

impl std::fmt::Debug for Rhs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rhs::Catalog(s) => write!(f, "{s:?}"),
            Rhs::Custom { .. } => write!(f, "Custom(..)"),
        }
    }
}

impl Rhs {
    /// `f(x) = 2x`, the right-hand side of the reference experiment.
    pub fn linear_2x() -> Self {
        Rhs::Catalog(RhsSpec::Polynomial { coefficients: vec![0.0, 2.0] })
    }

    pub fn zero() -> Self {
        Rhs::Catalog(RhsSpec::Polynomial { coefficients: vec![] })
    }

    pub fn custom(f: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Self {
        let rule = CompositeRule::uniform(-0.5, 0.5, 4096, 8);
        let anti = antiderivative(|x| f(x), &rule);
        Rhs::Custom { f, antiderivative: Arc::new(anti) }
    }

    pub fn f(&self, x: f64) -> f64 {
        match self {
            Rhs::Catalog(RhsSpec::Polynomial { coefficients }) => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
            }
            Rhs::Catalog(RhsSpec::Sine { amplitude, frequency }) => amplitude * (2.0 * PI * frequency * x).sin(),
            Rhs::Custom { f, .. } => f(x),
        }
    }

    /// `F(x) = int_{-1/2}^x f`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        match self {
            Rhs::Catalog(RhsSpec::Polynomial { coefficients }) => {
                let prim = |t: f64| {
                    coefficients
                        .iter()
                        .enumerate()
                        .rev()
                        .fold(0.0, |acc, (k, c)| acc * t + c / (k as f64 + 1.0))
                        * t
                };
                prim(x) - prim(-0.5)
            }
            Rhs::Catalog(RhsSpec::Sine { amplitude, frequency }) => {
                if *frequency == 0.0 {
                    return 0.0;
                }
                let k = 2.0 * PI * frequency;
                -amplitude / k * ((k * x).cos() - (-0.5 * k).cos())
            }
            Rhs::Custom { antiderivative, .. } => antiderivative.eval(x),
        }
    }

    pub fn is_catalog(&self) -> bool {
        matches!(self, Rhs::Catalog(_))
    }
}

/// Tabulated antiderivative `F(x) = int_{-1/2}^x f`: cumulative cell integrals plus a
/// Gauss rule on the partial cell.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    rule: CompositeRule,
    cumulative: Vec<f64>,
    f_nodes: Vec<f64>,
}

impl Antiderivative {
    pub fn eval(&self, x: f64) -> f64 {
        let c = self.rule.locate(x);
        let (l, r) = (self.rule.edges[c], self.rule.edges[c + 1]);
        if x <= l {
            return self.cumulative[c];
        }
        // integrate the degree-(order-1) interpolant of f on the cell from l to x
        let q = self.rule.order;
        let nodes: Vec<f64> = self.rule.nodes[c * q..(c + 1) * q].to_vec();
        let vals = &self.f_nodes[c * q..(c + 1) * q];
        let interp = |t: f64| -> f64 {
            (0..q)
                .map(|k| {
                    vals[k]
                        * (0..q).filter(|&m| m != k).map(|m| (t - nodes[m]) / (nodes[k] - nodes[m])).product::<f64>()
                })
                .sum()
        };
        let gl = crate::quad::GaussLegendre::new(q);
        self.cumulative[c] + gl.integrate(l, x.min(r), interp)
    }
}

/// Builds `F(x) = int_{-1/2}^x f` on the partition of `rule`.
pub fn antiderivative<F: Fn(f64) -> f64>(f: F, rule: &CompositeRule) -> Antiderivative {
    let f_nodes: Vec<f64> = rule.nodes.iter().map(|&x| f(x)).collect();
    let (_, cumulative) = rule.cumulative(&f_nodes, 0);
    Antiderivative { rule: rule.clone(), cumulative, f_nodes }
}

/// One-dimensional oscillating problem `-(a(x/eps) u'|u'|^{p-2})' = f`, `u(+-1/2) = 0`.
#[derive(Debug, Clone)]
pub struct Problem1D {
    pub coefficient: Coefficient,
    pub rhs: Rhs,
    pub epsilon: f64,
    pub quadrature: QuadratureSpec,
}

impl Problem1D {
    pub fn new(coefficient: Coefficient, rhs: Rhs, epsilon: f64, quadrature: QuadratureSpec) -> Result<Self> {
        if coefficient.dim() != 1 {
            return Err(Error::InvalidInput("1D problem needs a 1D coefficient".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        Ok(Self { coefficient, rhs, epsilon, quadrature })
    }

    /// The reference experiment: `p = 3`, `f = 2x`, `a = 2 + cos(2 pi y) + 10 exp(-|y|)`.
    pub fn benchmark(epsilon: f64) -> Result<Self> {
        Self::new(Coefficient::benchmark_1d(3.0)?, Rhs::linear_2x(), epsilon, QuadratureSpec::default())
    }

    pub fn p(&self) -> f64 {
        self.coefficient.p
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.coefficient.clone(), self.rhs.clone(), epsilon, self.quadrature)
    }
}

/// Gradient `u' = ((-F + C) / a)^{1/(p-1)}` tabulated on a rule, with its flux constant.
#[derive(Debug, Clone)]
pub struct FluxSolution1D {
    /// Flux constant `C`.
    pub c: f64,
    /// `|int u'|` at the returned constant.
    pub mean_residual: f64,
    pub iterations: usize,
    pub p: f64,
    pub rule: Arc<CompositeRule>,
    /// `u'` at the rule nodes.
    pub grad: Vec<f64>,
    /// `F` at the rule nodes.
    pub antiderivative: Vec<f64>,
    /// Coefficient at the rule nodes (`a(x/eps)` or `a*`).
    pub coefficient: Vec<f64>,
}

impl FluxSolution1D {
    /// `u'` at an arbitrary point given `F(x)` and the coefficient there.
    pub fn gradient_from(&self, big_f: f64, a: f64) -> f64 {
        signed_pow((self.c - big_f) / a, 1.0 / (self.p - 1.0))
    }

    /// `G(C) = int ((-F + C)/a)^{1/(p-1)}` on the stored rule.
    pub fn flux_integral(&self, c: f64) -> f64 {
        flux_integral(&self.rule, &self.antiderivative, &self.coefficient, self.p, c)
    }
}

fn flux_integral(rule: &CompositeRule, big_f: &[f64], a: &[f64], p: f64, c: f64) -> f64 {
    let beta = 1.0 / (p - 1.0);
    rule.weights
        .iter()
        .zip(big_f)
        .zip(a)
        .map(|((w, f), a)| w * signed_pow((c - f) / a, beta))
        .sum()
}

/// Solves for the flux constant on `rule` given the coefficient sampled at the nodes.
///
/// `G(C)` is continuous and strictly increasing, with `G(min F) <= 0 <= G(max F)`.
pub fn solve_flux_on_rule(rule: Arc<CompositeRule>, rhs: &Rhs, a_nodes: Vec<f64>, p: f64) -> Result<FluxSolution1D> {
    let big_f: Vec<f64> = rule.nodes.iter().map(|&x| rhs.antiderivative(x)).collect();
    let (mut lo, mut hi) = big_f.iter().fold((0.0f64, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    let end = rhs.antiderivative(0.5);
    lo = lo.min(end);
    hi = hi.max(end);
    let (c, iterations) = if hi - lo == 0.0 {
        (lo, 0)
    } else {
        let r = bisect_secant(|c| flux_integral(&rule, &big_f, &a_nodes, p, c), lo, hi, ROOT_XTOL)?;
        (r.root, r.iterations)
    };
    let beta = 1.0 / (p - 1.0);
    let grad: Vec<f64> = big_f.iter().zip(&a_nodes).map(|(f, a)| signed_pow((c - f) / a, beta)).collect();
    let mean_residual = rule.sum(&grad).abs();
    Ok(FluxSolution1D { c, mean_residual, iterations, p, rule, grad, antiderivative: big_f, coefficient: a_nodes })
}

/// Flux constant `C_eps` and gradient `u_eps'` of the oscillating problem.
pub fn solve_flux_constant(prob: &Problem1D) -> Result<FluxSolution1D> {
    solve_flux_refined(prob, &prob.quadrature.rule(prob.epsilon), None)
}

fn solve_flux_with_rule(prob: &Problem1D, rule: Arc<CompositeRule>) -> Result<FluxSolution1D> {
    let eps = prob.epsilon;
    let a_nodes: Vec<f64> = rule.nodes.iter().map(|&x| prob.coefficient.evaluate(&[x / eps])).collect();
    solve_flux_on_rule(rule, &prob.rhs, a_nodes, prob.p())
}

/// Solves once, splits the rule where `u'` vanishes (the integrand has a root-type
/// singularity there for `p > 2`) and solves again.
fn solve_flux_refined(prob: &Problem1D, rule: &CompositeRule, a_const: Option<f64>) -> Result<FluxSolution1D> {
    refine_at_roots(&prob.rhs, rule, |rule| match a_const {
        Some(a) => {
            let n = rule.nodes.len();
            solve_flux_on_rule(rule, &prob.rhs, vec![a; n], prob.p())
        }
        None => solve_flux_with_rule(prob, rule),
    })
}

fn refine_at_roots(
    rhs: &Rhs,
    rule: &CompositeRule,
    sample: impl Fn(Arc<CompositeRule>) -> Result<FluxSolution1D>,
) -> Result<FluxSolution1D> {
    let mut sol = sample(Arc::new(rule.clone()))?;
    for _ in 0..4 {
        let roots = sign_change_points(rhs, sol.c);
        if roots.is_empty() {
            break;
        }
        let next = sample(Arc::new(rule.graded_at(&roots, GRADING_RATIO, GRADING_LEVELS)))?;
        let done = (next.c - sol.c).abs() <= 1e-15;
        sol = next;
        if done {
            break;
        }
    }
    Ok(sol)
}

/// Homogenized solution `(u*)' = ((-F + C*)/a*)^{1/(p-1)}`.
pub fn solve_homogenized_1d(rhs: &Rhs, a_star: f64, p: f64, quadrature: &QuadratureSpec) -> Result<FluxSolution1D> {
    if !(a_star > 0.0) {
        return Err(Error::InvalidInput(format!("a* must be positive, got {a_star}")));
    }
    refine_at_roots(rhs, &quadrature.rule(1.0), |rule| {
        let n = rule.nodes.len();
        solve_flux_on_rule(rule, rhs, vec![a_star; n], p)
    })
}

/// `a* = (int_Q a_per^{-1/(p-1)})^{-(p-1)}` on a composite rule over the unit cell.
///
/// The mean is taken of `a_per / a_per(0)` and normalized by the rule's total weight,
/// so a constant coefficient is reproduced bit for bit.
pub fn homogenized_coefficient_1d(a_per: &PeriodicCoefficient, p: f64, cells: usize, order: usize) -> f64 {
    let rule = CompositeRule::uniform(-0.5, 0.5, cells, order);
    let beta = 1.0 / (p - 1.0);
    let a_ref = a_per.eval(&[0.0]);
    let mean = rule.integrate(|y| (a_per.eval(&[y]) / a_ref).powf(-beta)) / rule.integrate(|_| 1.0);
    a_ref * mean.powf(-(p - 1.0))
}

/// Default-resolution `a*`.
pub fn a_star_1d(a_per: &PeriodicCoefficient, p: f64) -> f64 {
    homogenized_coefficient_1d(a_per, p, 4096, 8)
}

/// Which coefficient a corrector is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectorKind {
    /// Built from `a_per` alone.
    Periodic,
    /// Built from `a = a_per + a_defect`.
    Full,
}

impl std::str::FromStr for CorrectorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "full" => Ok(Self::Full),
            _ => Err(Error::InvalidInput(format!("unknown corrector kind {s:?}"))),
        }
    }
}

/// Explicit 1D corrector: `xi + w_xi' = xi (a*/a_kind)^{1/(p-1)}`.
#[derive(Debug, Clone)]
pub struct Corrector1D {
    pub xi: f64,
    pub kind: CorrectorKind,
    pub a_star: f64,
    coefficient: Coefficient,
}

impl Corrector1D {
    /// `w_xi'(y)`.
    pub fn grad(&self, y: f64) -> f64 {
        let a = match self.kind {
            CorrectorKind::Periodic => self.coefficient.periodic.eval(&[y]),
            CorrectorKind::Full => self.coefficient.evaluate(&[y]),
        };
        self.xi * (self.a_star / a).powf(1.0 / (self.coefficient.p - 1.0)) - self.xi
    }

    /// Non-periodic part `w~_xi' = w_xi' - (w_xi^per)'`.
    pub fn defect_grad(&self, y: f64) -> f64 {
        let beta = 1.0 / (self.coefficient.p - 1.0);
        let u = self.xi * (self.a_star / self.coefficient.periodic.eval(&[y])).powf(beta);
        let ratio = self.coefficient.defect_at(&[y]) / self.coefficient.evaluate(&[y]);
        -u + u * (1.0 - ratio).powf(beta)
    }

    /// Far-field equivalent `-(1/(p-1)) a_defect (xi + (w^per)') / a`.
    pub fn defect_grad_asymptote(&self, y: f64) -> f64 {
        let beta = 1.0 / (self.coefficient.p - 1.0);
        let u = self.xi * (self.a_star / self.coefficient.periodic.eval(&[y])).powf(beta);
        -beta * self.coefficient.defect_at(&[y]) * u / self.coefficient.evaluate(&[y])
    }
}

/// Explicit corrector in direction `xi`, with `a*` from the periodic part.
pub fn corrector_1d(xi: f64, c: &Coefficient, kind: CorrectorKind) -> Result<Corrector1D> {
    if c.dim() != 1 {
        return Err(Error::InvalidInput("corrector_1d needs a 1D coefficient".into()));
    }
    Ok(Corrector1D { xi, kind, a_star: a_star_1d(&c.periodic, c.p), coefficient: c.clone() })
}

/// Remainder norms for one corrector kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderNorms {
    /// `||u_eps' - (u*)'(1 + w'(./eps))||_{L^inf}`.
    pub linf: f64,
    /// Same in `L^2(Omega)`.
    pub l2: f64,
    /// Including the `- eps w(./eps) (u*)''` term.
    pub linf_second_order: f64,
    pub l2_second_order: f64,
}

/// One row of a remainder table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemainderReport {
    pub eps: f64,
    pub c_eps: f64,
    pub c_star: f64,
    pub a_star: f64,
    pub periodic: RemainderNorms,
    pub full: RemainderNorms,
    pub nodes: usize,
    pub warnings: Vec<String>,
}

impl RemainderReport {
    pub fn norms(&self, kind: CorrectorKind) -> &RemainderNorms {
        match kind {
            CorrectorKind::Periodic => &self.periodic,
            CorrectorKind::Full => &self.full,
        }
    }
}

/// Everything a remainder or convergence computation at one `eps` needs.
pub struct EpsSolve {
    pub a_star: f64,
    pub homogenized: FluxSolution1D,
    pub oscillating: FluxSolution1D,
    pub warnings: Vec<String>,
}

/// Points of `Omega` where `-F + C` vanishes, located on a fine scan.
fn sign_change_points(rhs: &Rhs, c: f64) -> Vec<f64> {
    let n = 4096;
    let s = |x: f64| c - rhs.antiderivative(x);
    let mut out = Vec::new();
    let mut prev_x = -0.5;
    let mut prev = s(prev_x);
    for i in 1..=n {
        let x = -0.5 + i as f64 / n as f64;
        let v = s(x);
        if prev == 0.0 && i > 1 {
            out.push(prev_x);
        } else if prev * v < 0.0 {
            let (mut a, mut b) = (prev_x, x);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if s(a) * s(m) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev_x = x;
        prev = v;
    }
    out
}

/// Solves the homogenized and oscillating problems on a common rule, split at the
/// points where `(u*)''` is singular.
pub fn solve_pair(prob: &Problem1D) -> Result<EpsSolve> {
    let p = prob.p();
    let a_star = a_star_1d(&prob.coefficient.periodic, p);
    let base = prob.quadrature.rule(prob.epsilon);
    let coarse = solve_flux_refined(prob, &base, Some(a_star))?;
    let coarse_eps = solve_flux_refined(prob, &base, None)?;
    let roots = sign_change_points(&prob.rhs, coarse.c);
    let mut split = roots.clone();
    split.extend(sign_change_points(&prob.rhs, coarse_eps.c));
    let rule = Arc::new(base.split_at(&[0.0]).graded_at(&split, GRADING_RATIO, GRADING_LEVELS));
    let n = rule.nodes.len();
    let homogenized = solve_flux_on_rule(rule.clone(), &prob.rhs, vec![a_star; n], p)?;
    let oscillating = solve_flux_with_rule(prob, rule)?;
    let mut warnings = Vec::new();
    if p > 2.0 && !roots.is_empty() {
        let at: Vec<String> = roots.iter().map(|r| format!("{r:.6}")).collect();
        warnings.push(format!(
            "RegularityWarning: (u*)'' is singular at [{}]; second-order remainder norms depend on the quadrature",
            at.join(", ")
        ));
    }
    Ok(EpsSolve { a_star, homogenized, oscillating, warnings })
}

/// Remainders of the two-scale expansion for both corrector kinds at one `eps`.
pub fn remainder_report(prob: &Problem1D) -> Result<RemainderReport> {
    let s = solve_pair(prob)?;
    let periodic = remainders_from(prob, &s, CorrectorKind::Periodic);
    let full = if prob.coefficient.has_defect() { remainders_from(prob, &s, CorrectorKind::Full) } else { periodic };
    Ok(RemainderReport {
        eps: prob.epsilon,
        c_eps: s.oscillating.c,
        c_star: s.homogenized.c,
        a_star: s.a_star,
        periodic,
        full,
        nodes: s.oscillating.rule.nodes.len(),
        warnings: s.warnings,
    })
}

/// Remainder norms for a single corrector kind.
pub fn remainder_norms(prob: &Problem1D, kind: CorrectorKind) -> Result<RemainderNorms> {
    let s = solve_pair(prob)?;
    Ok(remainders_from(prob, &s, kind))
}

/// Unit corrector gradient `w_1'(y)` of the given kind.
fn unit_corrector_grad(c: &Coefficient, a_star: f64, kind: CorrectorKind, y: f64) -> f64 {
    let a = match kind {
        CorrectorKind::Periodic => c.periodic.eval(&[y]),
        CorrectorKind::Full => c.evaluate(&[y]),
    };
    (a_star / a).powf(1.0 / (c.p - 1.0)) - 1.0
}

/// First-order remainder `u_eps' - (u*)'(1 + w'(x/eps))` at an arbitrary point.
fn first_order_at(prob: &Problem1D, s: &EpsSolve, kind: CorrectorKind, x: f64) -> f64 {
    let eps = prob.epsilon;
    let big_f = prob.rhs.antiderivative(x);
    let a = prob.coefficient.evaluate(&[x / eps]);
    let ue = s.oscillating.gradient_from(big_f, a);
    let us = s.homogenized.gradient_from(big_f, s.a_star);
    ue - us * (1.0 + unit_corrector_grad(&prob.coefficient, s.a_star, kind, x / eps))
}

fn remainders_from(prob: &Problem1D, s: &EpsSolve, kind: CorrectorKind) -> RemainderNorms {
    let eps = prob.epsilon;
    let p = prob.p();
    let beta = 1.0 / (p - 1.0);
    let rule = &s.oscillating.rule;
    let c = &prob.coefficient;
    let wgrad: Vec<f64> = rule.nodes.iter().map(|&x| unit_corrector_grad(c, s.a_star, kind, x / eps)).collect();
    // w(x/eps) = (1/eps) int_0^x w'(t/eps) dt, anchored at w(0) = 0
    let anchor = rule.edges.iter().position(|e| *e == 0.0).unwrap_or(rule.cells() / 2);
    let (w_nodes, _) = rule.cumulative(&wgrad, anchor);
    let mut r1 = Vec::with_capacity(rule.nodes.len());
    let mut r2 = Vec::with_capacity(rule.nodes.len());
    for (i, &x) in rule.nodes.iter().enumerate() {
        let us = s.homogenized.grad[i];
        let first = s.oscillating.grad[i] - us * (1.0 + wgrad[i]);
        let sv = (s.homogenized.c - s.homogenized.antiderivative[i]) / s.a_star;
        let uss = if sv == 0.0 { 0.0 } else { beta * sv.abs().powf(beta - 1.0) * (-prob.rhs.f(x)) / s.a_star };
        r1.push(first);
        r2.push(first - w_nodes[i] / eps * eps * uss);
    }
    let edge_max = rule.edges.iter().map(|&x| first_order_at(prob, s, kind, x).abs()).fold(0.0f64, f64::max);
    let linf = r1.iter().fold(edge_max, |m, v| m.max(v.abs()));
    let linf2 = r2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    RemainderNorms { linf, l2: rule.lq_norm(&r1, 2.0), linf_second_order: linf2, l2_second_order: rule.lq_norm(&r2, 2.0) }
}

/// One report per `eps`, computed in parallel and returned in input order.
pub fn table_sweep(template: &Problem1D, eps_list: &[f64]) -> Result<Vec<RemainderReport>> {
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("eps list is empty".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("eps list must be strictly decreasing".into()));
    }
    eps_list
        .par_iter()
        .map(|&eps| remainder_report(&template.with_epsilon(eps)?))
        .collect()
}

/// `eps` values of the reference tables.
pub const TABLE_EPS: [f64; 6] = [0.1, 0.05, 0.01, 0.005, 0.001, 0.0005];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{DefectCoefficient, DefectSpec, LaminateProfile, PeriodicSpec};

    fn constant_coeff(v: f64, p: f64) -> Coefficient {
        let per = PeriodicCoefficient::catalog(PeriodicSpec::Constant { value: v }, 10.0, 1).unwrap();
        Coefficient::new(per, None, p).unwrap()
    }

    #[test]
    fn antiderivative_examples() {
        let rule = CompositeRule::uniform(-0.5, 0.5, 64, 8);
        let zero = antiderivative(|_| 0.0, &rule);
        assert_eq!(zero.eval(0.1), 0.0);
        let lin = antiderivative(|x| 2.0 * x, &rule);
        let one = antiderivative(|_| 1.0, &rule);
        for x in [-0.5, -0.3, 0.0, 0.123, 0.5] {
            assert!((lin.eval(x) - (x * x - 0.25)).abs() < 1e-14);
            assert!((one.eval(x) - (x + 0.5)).abs() < 1e-14);
            assert!((Rhs::linear_2x().antiderivative(x) - (x * x - 0.25)).abs() < 1e-15);
        }
        let custom = Rhs::custom(Arc::new(|x: f64| (3.0 * x).cos()));
        let exact = |x: f64| ((3.0 * x).sin() - (-1.5f64).sin()) / 3.0;
        assert!((custom.antiderivative(0.37) - exact(0.37)).abs() < 1e-13);
    }

    #[test]
    fn sine_antiderivative_matches_quadrature() {
        let rhs = Rhs::Catalog(RhsSpec::Sine { amplitude: 1.5, frequency: 1.0 });
        let rule = CompositeRule::uniform(-0.5, 0.5, 64, 8);
        let num = antiderivative(|x| rhs.f(x), &rule);
        for x in [-0.4, 0.0, 0.3] {
            assert!((num.eval(x) - rhs.antiderivative(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_rhs_gives_zero_flux() {
        let prob = Problem1D::new(Coefficient::benchmark_1d(3.0).unwrap(), Rhs::zero(), 0.1, QuadratureSpec::default()).unwrap();
        let s = solve_flux_constant(&prob).unwrap();
        assert_eq!(s.c, 0.0);
        assert!(s.grad.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn flux_constant_matches_closed_form_for_unit_coefficient() {
        // a = 1, p = 3, f = 2x: with b^2 = C + 1/4 the flux integral is
        // 2 (pi b^2/4 - sqrt(1/4 - b^2)/4 + (b^2/2) ln((1/2 + sqrt(1/4 - b^2))/b)); bisect it
        let rhs = Rhs::linear_2x();
        let g = |c: f64| {
            let b2 = c + 0.25;
            let b = b2.sqrt();
            let t = (0.25 - b2).sqrt();
            2.0 * (PI * b2 / 4.0 - t / 4.0 + 0.5 * b2 * ((0.5 + t) / b).ln())
        };
        let (mut lo, mut hi) = (-0.25 + 1e-300, 0.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if g(m) < 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        let prob = Problem1D::new(constant_coeff(1.0, 3.0), rhs, 1.0, QuadratureSpec::default()).unwrap();
        let s = solve_flux_constant(&prob).unwrap();
        assert!(s.c > -0.25 && s.c < 0.0);
        assert!((s.c - 0.5 * (lo + hi)).abs() < 1e-11, "{} vs {}", s.c, 0.5 * (lo + hi));
        assert!(s.mean_residual < 1e-12);
    }

    #[test]
    fn benchmark_flux_constant_is_bounded_and_monotone_in_c() {
        let prob = Problem1D::benchmark(0.1).unwrap();
        let s = solve_flux_constant(&prob).unwrap();
        assert!(s.c.abs() <= 0.25);
        assert!(s.mean_residual <= 1e-11);
        let grid: Vec<f64> = (0..=40).map(|i| -0.25 + 0.5 * i as f64 / 40.0).collect();
        let vals: Vec<f64> = grid.iter().map(|c| s.flux_integral(*c)).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn a_star_examples() {
        let c = constant_coeff(2.5, 3.0);
        let a = a_star_1d(&c.periodic, 3.0);
        assert!((a - 2.5).abs() < 1e-12, "{a}");
        // two-phase harmonic-type mean
        let per = PeriodicCoefficient::catalog(
            PeriodicSpec::Laminate { profile: LaminateProfile::TwoPhase { inner: 1.0, outer: 4.0, fraction: 0.5 } },
            10.0,
            1,
        )
        .unwrap();
        let p = 3.0;
        let exact = ((1f64.powf(-0.5) + 4f64.powf(-0.5)) / 2.0).powf(-2.0);
        assert!((homogenized_coefficient_1d(&per, p, 1024, 8) - exact).abs() < 1e-12);
    }

    #[test]
    fn a_star_benchmark_matches_dense_quadrature() {
        // oracle: 2^20-node midpoint rule, spectrally accurate for smooth periodic integrands
        let n = 1 << 20;
        let mean: f64 = (0..n)
            .map(|i| {
                let y = -0.5 + (i as f64 + 0.5) / n as f64;
                (2.0 + (2.0 * PI * y).cos()).powf(-0.5)
            })
            .sum::<f64>()
            / n as f64;
        let oracle = mean.powf(-2.0);
        let c = Coefficient::benchmark_1d(3.0).unwrap();
        let a = a_star_1d(&c.periodic, 3.0);
        assert!((a - oracle).abs() < 1e-12, "{a} vs {oracle}");
        assert!((a - 1.798_102_407_346_95).abs() < 1e-11);
        assert!(a > 1.0 / 14.0 && a < 14.0);
    }

    #[test]
    fn correctors_trivial_cases() {
        let c = constant_coeff(2.0, 3.0);
        let w = corrector_1d(1.3, &c, CorrectorKind::Full).unwrap();
        assert!(w.grad(0.17).abs() < 1e-12, "{}", w.grad(0.17));
        let per = Coefficient::benchmark_1d(3.0).unwrap().periodic_only();
        let wp = corrector_1d(0.7, &per, CorrectorKind::Periodic).unwrap();
        let wf = corrector_1d(0.7, &per, CorrectorKind::Full).unwrap();
        for y in [0.0, 0.2, 3.7] {
            assert_eq!(wp.grad(y), wf.grad(y));
        }
    }

    #[test]
    fn corrector_homogeneity_and_zero_mean() {
        let c = Coefficient::benchmark_1d(3.0).unwrap();
        let w1 = corrector_1d(1.0, &c, CorrectorKind::Periodic).unwrap();
        let rule = CompositeRule::uniform(-0.5, 0.5, 256, 8);
        assert!(rule.integrate(|y| w1.grad(y)).abs() < 1e-12);
        for t in [-2.0, 0.5, 3.0] {
            let wt = corrector_1d(t, &c, CorrectorKind::Full).unwrap();
            let wf = corrector_1d(1.0, &c, CorrectorKind::Full).unwrap();
            for y in [-0.3, 0.0, 1.25, 7.0] {
                assert!((wt.grad(y) - t * wf.grad(y)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn defect_corrector_far_field() {
        let c = Coefficient::benchmark_1d(3.0).unwrap();
        let w = corrector_1d(1.0, &c, CorrectorKind::Full).unwrap();
        for y in [10.0, 12.5, 15.0, 20.0, -11.0] {
            let r = w.defect_grad(y) / w.defect_grad_asymptote(y);
            assert!((r - 1.0).abs() < 0.2, "y = {y}: ratio {r}");
        }
        // the closed form is the difference of full and periodic correctors
        let wp = corrector_1d(1.0, &c, CorrectorKind::Periodic).unwrap();
        for y in [0.0, 0.7, 3.0] {
            assert!((w.grad(y) - wp.grad(y) - w.defect_grad(y)).abs() < 1e-14);
        }
    }

    #[test]
    fn homogenized_constant_independent_of_a_star() {
        let q = QuadratureSpec::default();
        let a = solve_homogenized_1d(&Rhs::linear_2x(), 1.0, 3.0, &q).unwrap();
        let b = solve_homogenized_1d(&Rhs::linear_2x(), 7.5, 3.0, &q).unwrap();
        assert!((a.c - b.c).abs() < 1e-12);
        let z = solve_homogenized_1d(&Rhs::zero(), 2.0, 3.0, &q).unwrap();
        assert_eq!(z.c, 0.0);
    }

    #[test]
    fn constant_coefficient_remainders_vanish() {
        for (a, p) in [(2.0, 3.0), (0.7, 4.5), (3.0, 2.0)] {
            let prob = Problem1D::new(constant_coeff(a, p), Rhs::linear_2x(), 0.1, QuadratureSpec::default()).unwrap();
            let r = remainder_report(&prob).unwrap();
            assert_eq!(r.a_star, a);
            for n in [r.periodic, r.full] {
                assert!(n.linf < 1e-14 && n.l2 < 1e-14, "{n:?}");
                assert!(n.linf_second_order < 1e-14 && n.l2_second_order < 1e-14, "{n:?}");
            }
        }
    }

    #[test]
    fn sweep_validates_eps_list() {
        let t = Problem1D::benchmark(0.1).unwrap();
        assert!(table_sweep(&t, &[]).is_err());
        assert!(table_sweep(&t, &[0.05, 0.1]).is_err());
    }

    #[test]
    fn gaussian_defect_problem_runs() {
        let per = PeriodicCoefficient::catalog(PeriodicSpec::Cosine { base: 2.0, amplitude: 1.0 }, 10.0, 1).unwrap();
        let def = DefectCoefficient::catalog(DefectSpec::Gaussian { amplitude: 2.0, width: 1.0 });
        let c = Coefficient::new(per, Some(def), 2.5).unwrap();
        let prob = Problem1D::new(c, Rhs::linear_2x(), 0.05, QuadratureSpec::default()).unwrap();
        let r = remainder_report(&prob).unwrap();
        assert!(r.full.linf.is_finite() && r.full.linf < r.periodic.linf);
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(64))]

        #[test]
        fn a_star_bounds_and_zero_mean_corrector(base in 1.5f64..5.0, amp in 0.0f64..1.0, p in 2.0f64..6.0, xi in -3.0f64..3.0) {
            let amp = amp * (base - 1.0);
            let per = PeriodicCoefficient::catalog(PeriodicSpec::Cosine { base, amplitude: amp }, 20.0, 1).unwrap();
            let a = a_star_1d(&per, p);
            proptest::prop_assert!(a >= base - amp - 1e-12 && a <= base + 1e-12);
            let c = Coefficient::new(per, None, p).unwrap();
            let w = corrector_1d(xi, &c, CorrectorKind::Periodic).unwrap();
            let rule = CompositeRule::uniform(-0.5, 0.5, 512, 8);
            proptest::prop_assert!(rule.integrate(|y| w.grad(y)).abs() <= 1e-10 * xi.abs().max(1.0));
        }
    }
}
