//! Periodic cell problem on `Q = (-1/2, 1/2)^d`, `d = 1, 2`.
//!
//! The corrector `w_xi` minimizes `(1/p) int_Q a_per |xi + grad v|^p` over periodic `v`.
//! The discrete problem uses P1 elements on a structured periodic mesh with the
//! coefficient sampled at element centroids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::PeriodicCoefficient;
use crate::error::{Error, Result};
use crate::num::{dot, norm};
use crate::solver::{minimize, LaplacePreconditioner, Mesh, Objective, OptimOptions};

pub const DEFAULT_GRID_1D: usize = 256;
pub const DEFAULT_GRID_2D: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 20_000;

/// Uniform periodic lattice on `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    pub dim: usize,
    /// Nodes per axis.
    pub n: usize,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidInput(format!("cell grid needs n >= 4, got {n}")));
        }
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidInput(format!("cell solves support d = 1, 2; got d = {dim}")));
        }
        Ok(Self { dim, n })
    }

    pub fn default_for(dim: usize) -> Result<Self> {
        Self::new(dim, if dim == 1 { DEFAULT_GRID_1D } else { DEFAULT_GRID_2D })
    }

    pub fn nodes(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        1.0 / self.nodes() as f64
    }

    pub fn mesh(&self) -> Mesh {
        Mesh::unit_cell(self.dim, self.n).expect("grid validated")
    }
}

/// Nodal values of a periodic function.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    pub grid: PeriodicGrid,
    pub values: Vec<f64>,
    pub mean: f64,
}

impl PeriodicField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(Error::InvalidInput(format!("field has {} values, grid has {} nodes", values.len(), grid.nodes())));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(Self { grid, values, mean })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self { grid, values: vec![0.0; grid.nodes()], mean: 0.0 }
    }

    /// Subtracts the mean.
    pub fn normalize(&mut self) {
        let m = self.values.iter().sum::<f64>() / self.values.len() as f64;
        self.values.iter_mut().for_each(|v| *v -= m);
        self.mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
    }
}

/// Discrete minimizer for one direction `xi`.
#[derive(Debug, Clone)]
pub struct CellSolve {
    pub xi: Vec<f64>,
    pub field: PeriodicField,
    pub energy: f64,
    /// `xi + grad w` on each element, `dim` entries per element.
    pub grad_field: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub energy_trace: Vec<f64>,
    /// Coefficient at element centroids.
    pub coefficient: Vec<f64>,
    pub p: f64,
    mesh: Mesh,
}

impl CellSolve {
    pub fn dim(&self) -> usize {
        self.grid().dim
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.field.grid
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn elements(&self) -> usize {
        self.mesh.elements.len()
    }

    pub fn element_area(&self) -> f64 {
        self.mesh.area
    }

    /// `grad w` on each element.
    pub fn corrector_grad(&self) -> Vec<f64> {
        let d = self.dim();
        self.grad_field.iter().enumerate().map(|(k, g)| g - self.xi[k % d]).collect()
    }

    /// `xi + grad w` at `y`, extended periodically.
    pub fn grad_at(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let e = self.mesh.locate(y);
        self.grad_field[e * d..(e + 1) * d].to_vec()
    }

    /// `a*(xi) = int_Q a_per (xi + grad w)|xi + grad w|^{p-2}`.
    pub fn a_star(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (e, a) in self.coefficient.iter().enumerate() {
            let z = &self.grad_field[e * d..(e + 1) * d];
            let s = a * norm(z).powf(self.p - 2.0) * self.mesh.area;
            for c in 0..d {
                out[c] += s * z[c];
            }
        }
        out
    }

    /// `min_e |xi + grad w| / |xi|`.
    pub fn min_gradient_ratio(&self) -> f64 {
        let d = self.dim();
        let nx = norm(&self.xi);
        if nx == 0.0 {
            return 1.0;
        }
        self.grad_field.chunks(d).map(norm).fold(f64::INFINITY, f64::min) / nx
    }
}

/// Discrete `L^p(Q)` norm of an element-wise vector field.
pub fn element_lp_norm(values: &[f64], dim: usize, area: f64, p: f64) -> f64 {
    (values.chunks(dim).map(|z| norm(z).powf(p)).sum::<f64>() * area).powf(1.0 / p)
}

/// Discrete `L^p` distance between two element-wise vector fields on the same mesh.
pub fn element_lp_distance(a: &[f64], b: &[f64], dim: usize, area: f64, p: f64) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    element_lp_norm(&diff, dim, area, p)
}

struct CellEnergy<'a> {
    mesh: &'a Mesh,
    a: &'a [f64],
    xi: &'a [f64],
    p: f64,
}

impl CellEnergy<'_> {
    fn shifted_grads(&self, v: &[f64]) -> Vec<f64> {
        let d = self.mesh.dim;
        let mut g = vec![0.0; self.mesh.elements.len() * d];
        self.mesh.gradients(v, &mut g);
        for (k, x) in g.iter_mut().enumerate() {
            *x += self.xi[k % d];
        }
        g
    }
}

impl Objective for CellEnergy<'_> {
    fn value(&self, v: &[f64]) -> f64 {
        let d = self.mesh.dim;
        let z = self.shifted_grads(v);
        z.chunks(d).zip(self.a).map(|(z, a)| a * norm(z).powf(self.p)).sum::<f64>() * self.mesh.area / self.p
    }

    fn value_grad(&self, v: &[f64], out: &mut [f64]) -> f64 {
        let d = self.mesh.dim;
        let mut z = self.shifted_grads(v);
        let mut e = 0.0;
        for (zz, a) in z.chunks_mut(d).zip(self.a) {
            let r = norm(zz);
            e += a * r.powf(self.p);
            let s = a * r.powf(self.p - 2.0);
            zz.iter_mut().for_each(|x| *x *= s);
        }
        self.mesh.scatter(&z, out);
        e * self.mesh.area / self.p
    }
}

/// Reusable cell solver: mesh, sampled coefficient and preconditioner.
#[derive(Debug, Clone)]
pub struct CellSolver {
    pub grid: PeriodicGrid,
    pub p: f64,
    pub mesh: Mesh,
    pub coefficient: Vec<f64>,
    pub options: OptimOptions,
    precond: LaplacePreconditioner,
}

impl CellSolver {
    pub fn new(a_per: &PeriodicCoefficient, p: f64, grid: PeriodicGrid) -> Result<Self> {
        if a_per.dim != grid.dim {
            return Err(Error::InvalidInput(format!("coefficient dimension {} vs grid dimension {}", a_per.dim, grid.dim)));
        }
        if !(p >= 2.0) {
            return Err(Error::InvalidInput(format!("requires p >= 2, got {p}")));
        }
        let mesh = grid.mesh();
        let coefficient: Vec<f64> = mesh.elements.iter().map(|e| a_per.eval(&e.centroid[..grid.dim])).collect();
        let precond = LaplacePreconditioner::for_mesh(&mesh);
        let options = OptimOptions { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, ..Default::default() };
        Ok(Self { grid, p, mesh, coefficient, options, precond })
    }

    pub fn with_tolerance(mut self, tol: f64, max_iter: usize) -> Self {
        self.options.tol = tol;
        self.options.max_iter = max_iter;
        self
    }

    /// Discrete cell energy of `xi + grad v`.
    pub fn energy(&self, xi: &[f64], v: &PeriodicField) -> f64 {
        CellEnergy { mesh: &self.mesh, a: &self.coefficient, xi, p: self.p }.value(&v.values)
    }

    pub fn solve(&self, xi: &[f64]) -> Result<CellSolve> {
        let d = self.grid.dim;
        if xi.len() != d {
            return Err(Error::InvalidInput(format!("xi has {} components, expected {d}", xi.len())));
        }
        let obj = CellEnergy { mesh: &self.mesh, a: &self.coefficient, xi, p: self.p };
        let nx = norm(xi);
        let zero = PeriodicField::zeros(self.grid);
        if nx == 0.0 {
            return Ok(self.package(xi, zero, 0.0, 0, 0.0, true, vec![0.0]));
        }
        let mean_a = self.coefficient.iter().sum::<f64>() / self.coefficient.len() as f64;
        let opts = OptimOptions {
            residual_scale: nx.powf(self.p - 1.0),
            initial_step: 1.0 / ((self.p - 1.0) * mean_a * nx.powf(self.p - 2.0)),
            ..self.options
        };
        let pre = |g: &[f64], out: &mut [f64]| self.precond.apply(g, out);
        let r = minimize(&obj, &pre, zero.values.clone(), &opts);
        let mut field = PeriodicField::new(self.grid, r.x)?;
        field.normalize();
        if !r.converged {
            return Err(Error::NoConvergence { iterations: r.iterations, residual: r.residual });
        }
        Ok(self.package(xi, field, r.energy, r.iterations, r.residual, true, r.energy_trace))
    }

    #[allow(clippy::too_many_arguments)]
    fn package(
        &self,
        xi: &[f64],
        field: PeriodicField,
        energy: f64,
        iterations: usize,
        residual: f64,
        converged: bool,
        energy_trace: Vec<f64>,
    ) -> CellSolve {
        let d = self.grid.dim;
        let mut grad_field = vec![0.0; self.mesh.elements.len() * d];
        self.mesh.gradients(&field.values, &mut grad_field);
        for (k, g) in grad_field.iter_mut().enumerate() {
            *g += xi[k % d];
        }
        let energy = if iterations == 0 { self.energy(xi, &field) } else { energy };
        CellSolve {
            xi: xi.to_vec(),
            field,
            energy,
            grad_field,
            iterations,
            residual,
            converged,
            energy_trace,
            coefficient: self.coefficient.clone(),
            p: self.p,
            mesh: self.mesh.clone(),
        }
    }
}

/// Discrete cell energy `(1/p) int_Q a_per |xi + grad v|^p`.
pub fn discrete_energy(xi: &[f64], v: &PeriodicField, a_per: &PeriodicCoefficient, p: f64) -> Result<f64> {
    Ok(CellSolver::new(a_per, p, v.grid)?.energy(xi, v))
}

/// Solves the cell problem in direction `xi`.
pub fn solve_cell(
    xi: &[f64],
    a_per: &PeriodicCoefficient,
    p: f64,
    grid: PeriodicGrid,
    tol: f64,
    max_iter: usize,
) -> Result<CellSolve> {
    CellSolver::new(a_per, p, grid)?.with_tolerance(tol, max_iter).solve(xi)
}

/// Table of `a*(xi)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogenizedOperator {
    pub entries: Vec<(Vec<f64>, Vec<f64>)>,
    pub p: f64,
    /// `a*` with `a*(xi) = a* xi |xi|^{p-2}` in 1D.
    pub scalar_1d: Option<f64>,
    /// Relative gap between `scalar_1d` and the quadrature formula.
    pub cross_check_1d: Option<f64>,
}

/// Evaluates `a*` on a list of directions (in parallel, results in input order).
pub fn homogenized_operator(
    xi_list: &[Vec<f64>],
    a_per: &PeriodicCoefficient,
    p: f64,
    grid: PeriodicGrid,
) -> Result<HomogenizedOperator> {
    let solver = CellSolver::new(a_per, p, grid)?;
    homogenized_operator_with(&solver, xi_list, a_per)
}

pub fn homogenized_operator_with(
    solver: &CellSolver,
    xi_list: &[Vec<f64>],
    a_per: &PeriodicCoefficient,
) -> Result<HomogenizedOperator> {
    let p = solver.p;
    let solves: Vec<CellSolve> = xi_list.par_iter().map(|xi| solver.solve(xi)).collect::<Result<_>>()?;
    let entries: Vec<(Vec<f64>, Vec<f64>)> = solves.iter().map(|s| (s.xi.clone(), s.a_star())).collect();
    let (mut scalar_1d, mut cross_check_1d) = (None, None);
    if solver.grid.dim == 1 {
        if let Some((xi, a)) = entries.iter().find(|(xi, _)| xi[0] != 0.0) {
            let s = a[0] / (xi[0] * xi[0].abs().powf(p - 2.0));
            let q = crate::oned::a_star_1d(a_per, p);
            scalar_1d = Some(s);
            cross_check_1d = Some((s - q).abs() / q);
        }
    }
    Ok(HomogenizedOperator { entries, p, scalar_1d, cross_check_1d })
}

/// Numerical checks of the structural properties of the periodic correctors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectorPropertiesReport {
    /// `max ||grad w_{t xi} - t grad w_xi||_{L^p} / ||t grad w_xi||_{L^p}` (absolute when the denominator vanishes).
    pub homogeneity_max_deviation: f64,
    /// `max ||grad w_xi - grad w_eta||_{L^p} / ((|xi|^{1-b} + |eta|^{1-b}) |xi - eta|^b)`, `b = 1/(p-1)`.
    pub holder_ratio_max: f64,
    /// `max ||grad w_xi||_{L^p} / |xi|`.
    pub bound_ratio_max: f64,
    pub pairs: usize,
    /// Empirical `L^inf` continuity exponent.
    pub gamma_est: f64,
    /// `(a*(xi) - a*(eta)) . (xi - eta)` minimum over the pairs.
    pub monotonicity_min: f64,
}

fn random_xi(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        if norm(&v) > 0.1 {
            return v;
        }
    }
}

/// Homogeneity, Hölder continuity and boundedness of `xi -> grad w_xi` on seeded samples.
pub fn check_corrector_properties(a_per: &PeriodicCoefficient, p: f64, grid: PeriodicGrid, xi_samples: usize, seed: u64) -> Result<CorrectorPropertiesReport> {
    let solver = CellSolver::new(a_per, p, grid)?;
    let d = grid.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..xi_samples).map(|_| (random_xi(&mut rng, d), random_xi(&mut rng, d))).collect();
    let area = solver.mesh.area;
    let beta = 1.0 / (p - 1.0);
    let per_pair: Vec<(f64, f64, f64, f64)> = pairs
        .par_iter()
        .map(|(xi, eta)| -> Result<(f64, f64, f64, f64)> {
            let sx = solver.solve(xi)?;
            let se = solver.solve(eta)?;
            let gx = sx.corrector_grad();
            let ge = se.corrector_grad();
            let dist = element_lp_distance(&gx, &ge, d, area, p);
            let diff: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
            let den = (norm(xi).powf(1.0 - beta) + norm(eta).powf(1.0 - beta)) * norm(&diff).powf(beta);
            let bound = (element_lp_norm(&gx, d, area, p) / norm(xi)).max(element_lp_norm(&ge, d, area, p) / norm(eta));
            // homogeneity with t = -2, 0.5, 3
            let mut hom: f64 = 0.0;
            for t in [-2.0, 0.5, 3.0] {
                let txi: Vec<f64> = xi.iter().map(|v| t * v).collect();
                let st = solver.solve(&txi)?;
                let scaled: Vec<f64> = gx.iter().map(|v| t * v).collect();
                let num = element_lp_distance(&st.corrector_grad(), &scaled, d, area, p);
                let base = element_lp_norm(&scaled, d, area, p);
                hom = hom.max(if base > 0.0 { num / base } else { num });
            }
            let mono = dot(&sub(&sx.a_star(), &se.a_star()), &diff);
            Ok((hom, dist / den, bound, mono))
        })
        .collect::<Result<_>>()?;
    let gamma_est = match pairs.first() {
        Some((xi, _)) => holder_exponent_estimate(&solver, xi, &[1e-1, 1e-2, 1e-3])?,
        None => 1.0,
    };
    Ok(CorrectorPropertiesReport {
        homogeneity_max_deviation: per_pair.iter().map(|r| r.0).fold(0.0, f64::max),
        holder_ratio_max: per_pair.iter().map(|r| r.1).fold(0.0, f64::max),
        bound_ratio_max: per_pair.iter().map(|r| r.2).fold(0.0, f64::max),
        pairs: per_pair.len(),
        gamma_est,
        monotonicity_min: per_pair.iter().map(|r| r.3).fold(f64::INFINITY, f64::min),
    })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Slope of `log ||grad w_xi - grad w_{xi+delta e}||_{L^inf}` against `log delta`, clamped to `(0, 1]`.
pub fn holder_exponent_estimate(solver: &CellSolver, xi: &[f64], deltas: &[f64]) -> Result<f64> {
    let base = solver.solve(xi)?.corrector_grad();
    let dir: Vec<f64> = {
        let n = norm(xi).max(1e-300);
        xi.iter().map(|v| v / n).collect()
    };
    let mut pts = Vec::new();
    for &delta in deltas {
        let eta: Vec<f64> = xi.iter().zip(&dir).map(|(a, e)| a + delta * e).collect();
        let g = solver.solve(&eta)?.corrector_grad();
        let linf = base.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if linf > 0.0 {
            pts.push((delta.ln(), linf.ln()));
        }
    }
    if pts.len() < 2 {
        return Ok(1.0);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((sxy / sxx).clamp(1e-3, 1.0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonDegeneracyReport {
    /// `min |xi + grad w_xi| / |xi|` over elements and samples.
    pub c_est: f64,
    pub per_sample: Vec<(Vec<f64>, f64)>,
    pub threshold: f64,
    pub passed: bool,
}

/// Checks the non-degeneracy `|xi + grad w_xi| >= c |xi|`.
pub fn check_non_degeneracy(
    a_per: &PeriodicCoefficient,
    p: f64,
    grid: PeriodicGrid,
    xi_samples: &[Vec<f64>],
    threshold: f64,
) -> Result<NonDegeneracyReport> {
    let solver = CellSolver::new(a_per, p, grid)?;
    check_non_degeneracy_with(&solver, xi_samples, threshold)
}

pub fn check_non_degeneracy_with(solver: &CellSolver, xi_samples: &[Vec<f64>], threshold: f64) -> Result<NonDegeneracyReport> {
    let per_sample: Vec<(Vec<f64>, f64)> = xi_samples
        .par_iter()
        .filter(|xi| norm(xi) > 0.0)
        .map(|xi| Ok((xi.clone(), solver.solve(xi)?.min_gradient_ratio())))
        .collect::<Result<_>>()?;
    let c_est = per_sample.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    Ok(NonDegeneracyReport { c_est, per_sample, threshold, passed: c_est > threshold })
}
