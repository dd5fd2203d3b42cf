//! Preconditioned gradient descent with Barzilai-Borwein steps and Armijo backtracking.

use serde::{Deserialize, Serialize};

use crate::num::dot;

/// Smooth convex objective on `R^n`.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;
    /// Returns the value and writes the gradient.
    fn value_grad(&self, x: &[f64], g: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimOptions {
    /// Stop when the scaled dual residual `sqrt(g . P^{-1} g) / residual_scale` drops below.
    pub tol: f64,
    pub max_iter: usize,
    pub residual_scale: f64,
    /// Trial step of the first iteration.
    pub initial_step: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 20_000, residual_scale: 1.0, initial_step: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Energy after every accepted step, starting with the initial energy.
    pub energy_trace: Vec<f64>,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Minimizes `obj` from `x0`. `precond(g, out)` applies an approximation of the inverse
/// Hessian.
pub fn minimize<O: Objective + ?Sized>(
    obj: &O,
    precond: &dyn Fn(&[f64], &mut [f64]),
    x0: Vec<f64>,
    opts: &OptimOptions,
) -> OptimResult {
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut e = obj.value_grad(&x, &mut g);
    let mut z = vec![0.0; n];
    precond(&g, &mut z);
    let scale = opts.residual_scale.max(f64::MIN_POSITIVE);
    let mut res = dot(&g, &z).max(0.0).sqrt() / scale;
    let mut trace = vec![e];
    let mut alpha = opts.initial_step;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut z_new = vec![0.0; n];
    let mut iterations = 0;
    while res > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let gz = dot(&g, &z);
        let mut t = alpha;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            for i in 0..n {
                x_new[i] = x[i] - t * z[i];
            }
            let e_try = obj.value(&x_new);
            if e_try <= e - ARMIJO_C1 * t * gz {
                accepted = true;
            } else if e_try <= e + 10.0 * f64::EPSILON * e.abs() {
                // energy differences are at round-off level; fall back on the residual
                obj.value_grad(&x_new, &mut g_new);
                precond(&g_new, &mut z_new);
                let r_try = dot(&g_new, &z_new).max(0.0).sqrt() / scale;
                accepted = r_try < res;
            }
            if accepted {
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        let e_new = obj.value_grad(&x_new, &mut g_new);
        precond(&g_new, &mut z_new);
        // BB2 step in the preconditioned metric: (s.y) / (y.P^{-1}y)
        let mut sy = 0.0;
        let mut yz = 0.0;
        for i in 0..n {
            let s = x_new[i] - x[i];
            let y = g_new[i] - g[i];
            sy += s * y;
            yz += y * (z_new[i] - z[i]);
        }
        alpha = if sy > 0.0 && yz > 0.0 { (sy / yz).clamp(1e-12, 1e12) } else { 2.0 * t };
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        std::mem::swap(&mut z, &mut z_new);
        e = e_new;
        res = dot(&g, &z).max(0.0).sqrt() / scale;
        trace.push(e);
    }
    OptimResult { x, energy: e, residual: res, iterations, converged: res <= opts.tol, energy_trace: trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quartic;

    impl Objective for Quartic {
        fn value(&self, x: &[f64]) -> f64 {
            x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v.powi(4) / 4.0 + 0.5 * v * v - v).sum()
        }
        fn value_grad(&self, x: &[f64], g: &mut [f64]) -> f64 {
            for (i, v) in x.iter().enumerate() {
                g[i] = (i as f64 + 1.0) * v.powi(3) + v - 1.0;
            }
            self.value(x)
        }
    }

    #[test]
    fn minimizes_separable_quartic() {
        let id = |g: &[f64], out: &mut [f64]| out.copy_from_slice(g);
        let r = minimize(&Quartic, &id, vec![3.0; 5], &OptimOptions::default());
        assert!(r.converged);
        for (i, v) in r.x.iter().enumerate() {
            // root of (i+1) v^3 + v - 1 = 0
            let k = i as f64 + 1.0;
            assert!((k * v.powi(3) + v - 1.0).abs() < 1e-8);
        }
        assert!(r.energy_trace.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    }

    #[test]
    fn stops_at_max_iter() {
        let id = |g: &[f64], out: &mut [f64]| out.copy_from_slice(g);
        let opts = OptimOptions { max_iter: 1, ..Default::default() };
        let r = minimize(&Quartic, &id, vec![3.0; 5], &opts);
        assert_eq!(r.iterations, 1);
        assert!(!r.converged);
    }
}
