//! Non-periodic corrector `w~_xi` on a truncated box `[-R, R]^d`.
//!
//! With `u = xi + grad w_xi^per` and `h = a_defect |u|^{p-2} u`, the corrector minimizes
//! `F(v) = (1/p) int a g_u(grad v) + int h . grad v`, where
//! `g_u(z) = |u + z|^p - |u|^p - p |u|^{p-2} u . z >= 0`.
//! The mesh is aligned with the cell mesh so that `u` is constant on each element.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::{CellSolve, CellSolver, PeriodicGrid};
use crate::coeffs::Coefficient;
use crate::error::{Error, Result};
use crate::num::{conjugate, norm};
use crate::oned::{corrector_1d, CorrectorKind};
use crate::solver::{minimize, AxisKind, LaplacePreconditioner, Mesh, Objective, OptimOptions};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 50_000;
/// Periods added beyond the decay radius by [`TruncatedDomain::default_for`].
pub const DEFAULT_MARGIN: f64 = 16.0;
/// Inner radius of the dyadic annuli.
pub const ANNULUS_R0: f64 = 1.0;
/// Outermost-annulus share of `||grad w~||_p^p` above which a truncation warning is issued.
pub const TRUNCATION_SHARE_LIMIT: f64 = 0.05;

/// Treatment of the artificial boundary at `|y|_inf = R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Minimize the truncated functional over all fields (no constraint at the boundary).
    #[default]
    Natural,
    /// Pin the field to zero on the boundary.
    Dirichlet,
}

/// The box `[-R, R]^d` with `cells_per_unit` elements per unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedDomain {
    pub dim: usize,
    pub r: f64,
    pub cells_per_unit: usize,
    pub boundary: Boundary,
}

impl TruncatedDomain {
    pub fn new(dim: usize, r: f64, cells_per_unit: usize, boundary: Boundary) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidInput(format!("defect solves support d = 1, 2; got d = {dim}")));
        }
        if cells_per_unit < 16 {
            return Err(Error::InvalidInput(format!("need at least 16 cells per unit length, got {cells_per_unit}")));
        }
        if !(r >= 0.5) {
            return Err(Error::InvalidInput(format!("half-width must be at least 1/2, got {r}")));
        }
        let shift = (r - 0.5) * cells_per_unit as f64;
        if (shift - shift.round()).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "R = {r} does not align the mesh with the cell mesh at {cells_per_unit} cells per unit"
            )));
        }
        Ok(Self { dim, r, cells_per_unit, boundary })
    }

    /// `R` = decay radius + 16 periods, rounded up to a half-integer.
    pub fn default_for(c: &Coefficient, cells_per_unit: usize) -> Result<Self> {
        let decay = c.defect.as_ref().map_or(0.0, |d| d.decay_radius);
        let r = (decay + DEFAULT_MARGIN - 0.5).ceil() + 0.5;
        Self::new(c.dim(), r, cells_per_unit, Boundary::Natural)
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_unit as f64
    }

    pub fn intervals(&self) -> usize {
        (2.0 * self.r * self.cells_per_unit as f64).round() as usize
    }

    pub fn mesh(&self) -> Result<Mesh> {
        let kind = match self.boundary {
            Boundary::Natural => AxisKind::Free,
            Boundary::Dirichlet => AxisKind::Dirichlet,
        };
        Mesh::new(self.dim, self.intervals(), self.h(), -self.r, kind)
    }

    pub fn cell_grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.dim, self.cells_per_unit)
    }
}

/// Source of the periodic gradient `u = xi + grad w_xi^per`.
#[derive(Debug, Clone)]
pub enum PeriodicGradient {
    /// Closed form (1D): `u = xi (a*/a_per)^{1/(p-1)}`.
    Closed1D { xi: f64, a_star: f64 },
    /// Numerical cell solve, extended periodically.
    Cell(CellSolve),
}

impl PeriodicGradient {
    pub fn at(&self, c: &Coefficient, y: &[f64]) -> Vec<f64> {
        match self {
            PeriodicGradient::Closed1D { xi, a_star } => {
                vec![xi * (a_star / c.periodic.eval(y)).powf(1.0 / (c.p - 1.0))]
            }
            PeriodicGradient::Cell(s) => s.grad_at(y),
        }
    }
}

/// Per-element data of the truncated problem.
#[derive(Debug, Clone)]
pub struct DefectField {
    pub domain: TruncatedDomain,
    /// Nodal values of `w~` (free nodes only for Dirichlet truncation).
    pub values: Vec<f64>,
    /// `|u|^{p-2}` per element.
    pub weight: Vec<f64>,
}

/// Minimizer of the truncated functional.
#[derive(Debug, Clone)]
pub struct DefectSolve {
    pub xi: Vec<f64>,
    pub p: f64,
    pub field: DefectField,
    /// `grad w~`, `dim` entries per element.
    pub grads: Vec<f64>,
    /// `u` per element.
    pub u: Vec<f64>,
    pub rhs_h: Vec<f64>,
    pub centroids: Vec<[f64; 2]>,
    pub area: f64,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub energy_trace: Vec<f64>,
    pub norms: WuNorms,
    pub tail: TailReport,
    pub truncation_share: f64,
    pub warnings: Vec<String>,
}

impl DefectSolve {
    pub fn dim(&self) -> usize {
        self.field.domain.dim
    }

    /// `||grad w~||_{L^q}` over the box.
    pub fn grad_lq(&self, q: f64) -> f64 {
        let d = self.dim();
        (self.grads.chunks(d).map(|g| norm(g).powf(q)).sum::<f64>() * self.area).powf(1.0 / q)
    }
}

/// Norms entering the weighted space `W_u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WuNorms {
    pub lp: f64,
    /// `|| |u|^{(p-2)/2} grad w~ ||_{L^2}`.
    pub weighted_l2: f64,
    pub wu: f64,
    /// `W_u` norm accumulated annulus by annulus.
    pub wu_by_annuli: f64,
    pub lp_prime: f64,
    /// `||h||_{L^{p'}}`.
    pub rhs_lp_prime: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
    /// `int |grad w~|^{p'}` over the annulus.
    pub lp_prime_integral: f64,
    /// `int |grad w~|^p`.
    pub lp_integral: f64,
    /// `int |u|^{p-2} |grad w~|^2`.
    pub weighted_integral: f64,
    pub cumulative_lp_prime: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailReport {
    pub annuli: Vec<Annulus>,
    /// Consecutive ratios of annulus integrals of `|grad w~|^{p'}`.
    pub tail_ratios: Vec<f64>,
    pub lp_prime_norm: f64,
    pub lp_prime_over_xi: f64,
}

/// Shared mesh, coefficient samples and preconditioner for one coefficient and domain.
#[derive(Debug, Clone)]
pub struct DefectSolver {
    pub coefficient: Coefficient,
    pub domain: TruncatedDomain,
    pub mesh: Mesh,
    /// `a` per element.
    pub a: Vec<f64>,
    /// `a_defect` per element.
    pub a_defect: Vec<f64>,
    pub options: OptimOptions,
    precond: LaplacePreconditioner,
    cell: Option<CellSolver>,
}

struct DefectEnergy<'a> {
    mesh: &'a Mesh,
    a: &'a [f64],
    u: &'a [f64],
    h: &'a [f64],
    p: f64,
}

impl DefectEnergy<'_> {
    fn element_terms(&self, z: &[f64], u: &[f64], a: f64, h: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let p = self.p;
        let d = z.len();
        let mut w = [0.0; 2];
        for c in 0..d {
            w[c] = u[c] + z[c];
        }
        let nw = norm(&w[..d]);
        let nu = norm(u);
        let su = nu.powf(p - 2.0);
        let uz: f64 = (0..d).map(|c| u[c] * z[c]).sum();
        let hz: f64 = (0..d).map(|c| h[c] * z[c]).sum();
        let g = nw.powf(p) - nu.powf(p) - p * su * uz;
        if let Some(out) = grad {
            let sw = nw.powf(p - 2.0);
            for c in 0..d {
                out[c] = a * (sw * w[c] - su * u[c]) + h[c];
            }
        }
        a * g / p + hz
    }
}

impl Objective for DefectEnergy<'_> {
    fn value(&self, v: &[f64]) -> f64 {
        let d = self.mesh.dim;
        let mut z = vec![0.0; self.mesh.elements.len() * d];
        self.mesh.gradients(v, &mut z);
        let mut e = 0.0;
        for k in 0..self.a.len() {
            let r = k * d..(k + 1) * d;
            e += self.element_terms(&z[r.clone()], &self.u[r.clone()], self.a[k], &self.h[r], None);
        }
        e * self.mesh.area
    }

    fn value_grad(&self, v: &[f64], out: &mut [f64]) -> f64 {
        let d = self.mesh.dim;
        let mut z = vec![0.0; self.mesh.elements.len() * d];
        self.mesh.gradients(v, &mut z);
        let mut flux = vec![0.0; z.len()];
        let mut e = 0.0;
        for k in 0..self.a.len() {
            let r = k * d..(k + 1) * d;
            e += self.element_terms(&z[r.clone()], &self.u[r.clone()], self.a[k], &self.h[r.clone()], Some(&mut flux[r]));
        }
        self.mesh.scatter(&flux, out);
        e * self.mesh.area
    }
}

impl DefectSolver {
    /// In 1D the periodic gradient comes from the closed form; in 2D from cell solves on
    /// the aligned cell grid.
    pub fn new(coefficient: &Coefficient, domain: TruncatedDomain) -> Result<Self> {
        if coefficient.dim() != domain.dim {
            return Err(Error::InvalidInput("coefficient and domain dimensions differ".into()));
        }
        let mesh = domain.mesh()?;
        let d = domain.dim;
        let a: Vec<f64> = mesh.elements.iter().map(|e| coefficient.evaluate(&e.centroid[..d])).collect();
        let a_defect: Vec<f64> = mesh.elements.iter().map(|e| coefficient.defect_at(&e.centroid[..d])).collect();
        let precond = LaplacePreconditioner::for_mesh(&mesh);
        let cell = if d == 1 { None } else { Some(CellSolver::new(&coefficient.periodic, coefficient.p, domain.cell_grid()?)?) };
        let options = OptimOptions { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, ..Default::default() };
        Ok(Self { coefficient: coefficient.clone(), domain, mesh, a, a_defect, options, precond, cell })
    }

    /// Uses numerical cell solves for the periodic gradient in 1D as well.
    pub fn with_cell_solver(mut self) -> Result<Self> {
        self.cell = Some(CellSolver::new(&self.coefficient.periodic, self.coefficient.p, self.domain.cell_grid()?)?);
        Ok(self)
    }

    pub fn with_tolerance(mut self, tol: f64, max_iter: usize) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        self.options.tol = tol;
        self.options.max_iter = max_iter;
        Ok(self)
    }

    /// Periodic gradient for direction `xi`.
    pub fn periodic_gradient(&self, xi: &[f64]) -> Result<PeriodicGradient> {
        match &self.cell {
            Some(cs) => Ok(PeriodicGradient::Cell(cs.solve(xi)?)),
            None => {
                let w = corrector_1d(xi[0], &self.coefficient, CorrectorKind::Periodic)?;
                Ok(PeriodicGradient::Closed1D { xi: xi[0], a_star: w.a_star })
            }
        }
    }

    /// `u` per element.
    pub fn element_u(&self, pg: &PeriodicGradient) -> Vec<f64> {
        let d = self.domain.dim;
        self.mesh.elements.iter().flat_map(|e| pg.at(&self.coefficient, &e.centroid[..d])).collect()
    }

    /// `h = a_defect |u|^{p-2} u` per element.
    pub fn assemble_rhs(&self, u: &[f64]) -> Vec<f64> {
        let d = self.domain.dim;
        let p = self.coefficient.p;
        let mut h = vec![0.0; u.len()];
        for (k, ad) in self.a_defect.iter().enumerate() {
            let uu = &u[k * d..(k + 1) * d];
            let s = ad * norm(uu).powf(p - 2.0);
            for c in 0..d {
                h[k * d + c] = s * uu[c];
            }
        }
        h
    }

    /// Discrete `F(v)` for nodal values `v`.
    pub fn energy(&self, u: &[f64], h: &[f64], v: &[f64]) -> f64 {
        DefectEnergy { mesh: &self.mesh, a: &self.a, u, h, p: self.coefficient.p }.value(v)
    }

    /// `W_u` norm of nodal values `v`.
    pub fn wu_norm(&self, u: &[f64], v: &[f64]) -> f64 {
        let d = self.domain.dim;
        let p = self.coefficient.p;
        let mut z = vec![0.0; self.mesh.elements.len() * d];
        self.mesh.gradients(v, &mut z);
        let (mut lp, mut l2) = (0.0, 0.0);
        for (zz, uu) in z.chunks(d).zip(u.chunks(d)) {
            let n = norm(zz);
            lp += n.powf(p);
            l2 += norm(uu).powf(p - 2.0) * n * n;
        }
        (lp * self.mesh.area).powf(1.0 / p) + (l2 * self.mesh.area).sqrt()
    }

    pub fn solve(&self, xi: &[f64]) -> Result<DefectSolve> {
        let pg = self.periodic_gradient(xi)?;
        self.solve_with(xi, &pg)
    }

    pub fn solve_with(&self, xi: &[f64], pg: &PeriodicGradient) -> Result<DefectSolve> {
        let d = self.domain.dim;
        if xi.len() != d {
            return Err(Error::InvalidInput(format!("xi has {} components, expected {d}", xi.len())));
        }
        let p = self.coefficient.p;
        let u = self.element_u(pg);
        let h = self.assemble_rhs(&u);
        let nx = norm(xi);
        let nu = self.mesh.unknowns();
        let (mut values, energy, residual, iterations, trace) = if nx == 0.0 || h.iter().all(|v| *v == 0.0) {
            (vec![0.0; nu], 0.0, 0.0, 0, vec![0.0])
        } else {
            let obj = DefectEnergy { mesh: &self.mesh, a: &self.a, u: &u, h: &h, p };
            let mean_a = self.a.iter().sum::<f64>() / self.a.len() as f64;
            let opts = OptimOptions {
                residual_scale: nx.powf(p - 1.0),
                initial_step: 1.0 / ((p - 1.0) * mean_a * nx.powf(p - 2.0)),
                ..self.options
            };
            let pre = |g: &[f64], out: &mut [f64]| self.precond.apply(g, out);
            let r = minimize(&obj, &pre, vec![0.0; nu], &opts);
            if !r.converged {
                return Err(Error::NoConvergence { iterations: r.iterations, residual: r.residual });
            }
            (r.x, r.energy, r.residual, r.iterations, r.energy_trace)
        };
        if self.domain.boundary == Boundary::Natural {
            self.normalize_on_unit_cell(&mut values);
        }
        let mut grads = vec![0.0; self.mesh.elements.len() * d];
        self.mesh.gradients(&values, &mut grads);
        let weight: Vec<f64> = u.chunks(d).map(|uu| norm(uu).powf(p - 2.0)).collect();
        let centroids: Vec<[f64; 2]> = self.mesh.elements.iter().map(|e| e.centroid).collect();
        let mut solve = DefectSolve {
            xi: xi.to_vec(),
            p,
            field: DefectField { domain: self.domain, values, weight },
            grads,
            u,
            rhs_h: h,
            centroids,
            area: self.mesh.area,
            energy,
            residual,
            iterations,
            energy_trace: trace,
            norms: WuNorms { lp: 0.0, weighted_l2: 0.0, wu: 0.0, wu_by_annuli: 0.0, lp_prime: 0.0, rhs_lp_prime: 0.0 },
            tail: TailReport { annuli: Vec::new(), tail_ratios: Vec::new(), lp_prime_norm: 0.0, lp_prime_over_xi: 0.0 },
            truncation_share: 0.0,
            warnings: Vec::new(),
        };
        fill_reports(&mut solve, self.domain.r);
        if solve.truncation_share > TRUNCATION_SHARE_LIMIT {
            solve.warnings.push(format!(
                "TruncationWarning: outermost annulus carries {:.1}% of ||grad w~||_p^p",
                100.0 * solve.truncation_share
            ));
        }
        if let Some(def) = &self.coefficient.defect {
            if self.domain.r < def.decay_radius {
                solve.warnings.push(format!(
                    "TruncationWarning: R = {} is below the defect decay radius {:.3}",
                    self.domain.r, def.decay_radius
                ));
            }
        }
        Ok(solve)
    }

    /// Shifts nodal values so that their mean over the nodes in `Q` vanishes.
    fn normalize_on_unit_cell(&self, v: &mut [f64]) {
        let m = self.mesh.m;
        let h = self.mesh.h;
        let inside = |i: usize| {
            let x = -self.domain.r + i as f64 * h;
            (-0.5..0.5).contains(&x)
        };
        let (mut s, mut n) = (0.0, 0usize);
        for (k, x) in v.iter().enumerate() {
            let ok = if self.domain.dim == 1 { inside(k) } else { inside(k / m) && inside(k % m) };
            if ok {
                s += x;
                n += 1;
            }
        }
        if n > 0 {
            let mean = s / n as f64;
            v.iter_mut().for_each(|x| *x -= mean);
        }
    }
}

fn annulus_index(y: &[f64]) -> usize {
    let r = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if r <= ANNULUS_R0 {
        0
    } else {
        (r / ANNULUS_R0).log2().ceil().max(1.0) as usize
    }
}

fn fill_reports(s: &mut DefectSolve, r_max: f64) {
    let d = s.dim();
    let p = s.p;
    let pp = conjugate(p);
    let k_max = annulus_index(&vec![r_max; d]);
    let mut annuli: Vec<Annulus> = (0..=k_max)
        .map(|k| Annulus {
            inner: if k == 0 { 0.0 } else { ANNULUS_R0 * 2f64.powi(k as i32 - 1) },
            outer: (ANNULUS_R0 * 2f64.powi(k as i32)).min(r_max),
            lp_prime_integral: 0.0,
            lp_integral: 0.0,
            weighted_integral: 0.0,
            cumulative_lp_prime: 0.0,
        })
        .collect();
    let (mut lp, mut l2, mut lpp, mut hpp) = (0.0, 0.0, 0.0, 0.0);
    for (e, c) in s.centroids.iter().enumerate() {
        let g = norm(&s.grads[e * d..(e + 1) * d]);
        let wgt = s.field.weight[e];
        let k = annulus_index(&c[..d]).min(k_max);
        let a = &mut annuli[k];
        a.lp_integral += g.powf(p) * s.area;
        a.lp_prime_integral += g.powf(pp) * s.area;
        a.weighted_integral += wgt * g * g * s.area;
        lp += g.powf(p);
        l2 += wgt * g * g;
        lpp += g.powf(pp);
        hpp += norm(&s.rhs_h[e * d..(e + 1) * d]).powf(pp);
    }
    let mut cum = 0.0;
    for a in annuli.iter_mut() {
        cum += a.lp_prime_integral;
        a.cumulative_lp_prime = cum;
    }
    let lp_n = (lp * s.area).powf(1.0 / p);
    let l2_n = (l2 * s.area).sqrt();
    let sum_lp: f64 = annuli.iter().map(|a| a.lp_integral).sum();
    let sum_w: f64 = annuli.iter().map(|a| a.weighted_integral).sum();
    s.norms = WuNorms {
        lp: lp_n,
        weighted_l2: l2_n,
        wu: lp_n + l2_n,
        wu_by_annuli: sum_lp.powf(1.0 / p) + sum_w.sqrt(),
        lp_prime: (lpp * s.area).powf(1.0 / pp),
        rhs_lp_prime: (hpp * s.area).powf(1.0 / pp),
    };
    let tail_ratios = annuli
        .windows(2)
        .map(|w| if w[0].lp_prime_integral > 0.0 { w[1].lp_prime_integral / w[0].lp_prime_integral } else { 0.0 })
        .collect();
    s.truncation_share = if sum_lp > 0.0 { annuli.last().map_or(0.0, |a| a.lp_integral) / sum_lp } else { 0.0 };
    let nx = norm(&s.xi);
    s.tail = TailReport {
        tail_ratios,
        lp_prime_norm: s.norms.lp_prime,
        lp_prime_over_xi: if nx > 0.0 { s.norms.lp_prime / nx } else { 0.0 },
        annuli,
    };
}

/// Solves the truncated defect problem in direction `xi`.
pub fn solve_defect(
    xi: &[f64],
    c: &Coefficient,
    domain: TruncatedDomain,
    tol: f64,
    max_iter: usize,
) -> Result<DefectSolve> {
    DefectSolver::new(c, domain)?.with_tolerance(tol, max_iter)?.solve(xi)
}

/// Annulus table of an existing solve.
pub fn integrability_report(solve: &DefectSolve) -> TailReport {
    solve.tail.clone()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityEntry {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub distance: f64,
    pub numerator: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub beta_tilde: f64,
    pub gamma_est: f64,
    pub entries: Vec<ContinuityEntry>,
    pub max_ratio: f64,
    /// `max ratio` at the smallest distance over `max ratio` at the largest.
    pub growth: f64,
    pub skipped: usize,
}

/// Pairs `(xi, xi + delta e)` with seeded base points `xi` and unit vectors `e`.
pub fn scan_pairs(dim: usize, deltas: &[f64], bases: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..bases {
        let xi: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let mut e: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = norm(&e).max(1e-12);
        e.iter_mut().for_each(|v| *v /= n);
        for &delta in deltas {
            out.push((xi.clone(), xi.iter().zip(&e).map(|(a, b)| a + delta * b).collect()));
        }
    }
    out
}

/// Hölder quotients `||grad w~_xi - grad w~_eta||_{L^p} / ((|xi|^{1-b} + |eta|^{1-b}) |xi - eta|^b)`
/// with `b = (gamma_est / (p-1)) min(1, p-2)`.
pub fn continuity_scan(solver: &DefectSolver, pairs: &[(Vec<f64>, Vec<f64>)], gamma_est: f64) -> Result<ContinuityReport> {
    let p = solver.coefficient.p;
    let b = (gamma_est / (p - 1.0)) * (p - 2.0).min(1.0);
    let d = solver.domain.dim;
    let entries: Vec<Option<ContinuityEntry>> = pairs
        .par_iter()
        .map(|(xi, eta)| -> Result<Option<ContinuityEntry>> {
            let diff: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
            let dist = norm(&diff);
            if dist <= 1e-9 {
                return Ok(None);
            }
            let sx = solver.solve(xi)?;
            let se = solver.solve(eta)?;
            let sum: f64 = sx
                .grads
                .chunks(d)
                .zip(se.grads.chunks(d))
                .map(|(a, b)| {
                    let z: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                    norm(&z).powf(p)
                })
                .sum();
            let num = (sum * sx.area).powf(1.0 / p);
            let den = (norm(xi).powf(1.0 - b) + norm(eta).powf(1.0 - b)) * dist.powf(b);
            Ok(Some(ContinuityEntry { xi: xi.clone(), eta: eta.clone(), distance: dist, numerator: num, ratio: num / den }))
        })
        .collect::<Result<_>>()?;
    let skipped = entries.iter().filter(|e| e.is_none()).count();
    let entries: Vec<ContinuityEntry> = entries.into_iter().flatten().collect();
    let max_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let growth = growth_factor(&entries);
    Ok(ContinuityReport { beta_tilde: b, gamma_est, entries, max_ratio, growth, skipped })
}

fn growth_factor(entries: &[ContinuityEntry]) -> f64 {
    if entries.is_empty() {
        return 1.0;
    }
    let dmin = entries.iter().map(|e| e.distance).fold(f64::INFINITY, f64::min);
    let dmax = entries.iter().map(|e| e.distance).fold(0.0, f64::max);
    let max_at = |d: f64| entries.iter().filter(|e| (e.distance / d - 1.0).abs() < 1e-6).map(|e| e.ratio).fold(0.0, f64::max);
    let hi = max_at(dmax);
    if hi > 0.0 {
        max_at(dmin) / hi
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoercivityReport {
    /// Data offset `K = 1 + ||h||_{L^{p'}}^{p'}`.
    pub offset: f64,
    /// Largest `c` with `F(v) >= c (-K + ||v||_{W_u}^2)` on the samples.
    pub c_est: f64,
    /// Smallest `C` with `F(v) <= C (K + ||v||_{W_u}^p)` on the samples.
    pub big_c_est: f64,
    pub samples: usize,
    pub holds: bool,
}

/// Evaluates both sides of the coercivity sandwich on seeded random fields (plus the minimizer).
///
/// The lower bound is affine in `||v||^2` with an offset growing with `||h||_{L^{p'}}`:
/// at the minimizer `F < 0`, so a data-independent offset cannot hold in general.
pub fn coercivity_sandwich(solver: &DefectSolver, solve: &DefectSolve, samples: usize, seed: u64) -> CoercivityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = solver.mesh.unknowns();
    let p = solver.coefficient.p;
    let offset = 1.0 + solve.norms.rhs_lp_prime.powf(conjugate(p));
    let mut fields: Vec<Vec<f64>> = (0..samples)
        .map(|i| {
            let amp = 10f64.powf(-1.0 + 3.0 * (i as f64) / samples.max(1) as f64);
            let mut level = 0.0;
            (0..n)
                .map(|_| {
                    level += rng.random_range(-1.0..1.0) * solver.mesh.h;
                    amp * level
                })
                .collect()
        })
        .collect();
    fields.push(solve.field.values.clone());
    let mut lower_max = f64::NEG_INFINITY;
    let mut upper_min = f64::INFINITY;
    let mut big_c: f64 = 0.0;
    for v in &fields {
        let f = solver.energy(&solve.u, &solve.rhs_h, v);
        let w = solver.wu_norm(&solve.u, v);
        let den = w * w - offset;
        if den > 0.0 {
            upper_min = upper_min.min(f / den);
        } else if den < 0.0 {
            lower_max = lower_max.max(f / den);
        }
        big_c = big_c.max(f / (offset + w.powf(p)));
    }
    let c_est = if upper_min.is_finite() { upper_min } else { lower_max.max(0.0) + 1.0 };
    let holds = c_est > 0.0 && c_est >= lower_max;
    CoercivityReport { offset, c_est, big_c_est: big_c, samples: fields.len(), holds }
}
