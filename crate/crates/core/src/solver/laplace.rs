//! Inverse of the tensor-product graph Laplacian, applied through per-axis eigenbases.
//!
//! Used as the preconditioner of the energy minimizers. Constants lie in the kernel
//! for periodic and free meshes; that component is dropped, so the output has zero
//! nodal mean.

use std::f64::consts::PI;

use super::mesh::{AxisKind, Mesh};

#[derive(Debug, Clone)]
pub struct LaplacePreconditioner {
    dim: usize,
    m: usize,
    /// `basis[i * m + k]`: entry `i` of eigenvector `k` (orthonormal).
    basis: Vec<f64>,
    eig: Vec<f64>,
    scale: f64,
    /// Set in 1D, where the solve runs through cumulative sums instead.
    kind_1d: Option<AxisKind>,
}

impl LaplacePreconditioner {
    pub fn new(mesh: &Mesh) -> Self {
        let m = mesh.m;
        let mut basis = vec![0.0; m * m];
        let mut eig = vec![0.0; m];
        match mesh.kind {
            AxisKind::Periodic => {
                let mf = m as f64;
                let mut k = 0;
                let mut freq = 0;
                while k < m {
                    let theta = 2.0 * PI * freq as f64 / mf;
                    let lam = 2.0 - 2.0 * theta.cos();
                    if freq == 0 || 2 * freq == m {
                        for i in 0..m {
                            basis[i * m + k] = (theta * i as f64).cos() / mf.sqrt();
                        }
                        eig[k] = lam;
                        k += 1;
                    } else {
                        let c = (2.0 / mf).sqrt();
                        for i in 0..m {
                            basis[i * m + k] = c * (theta * i as f64).cos();
                            basis[i * m + k + 1] = c * (theta * i as f64).sin();
                        }
                        eig[k] = lam;
                        eig[k + 1] = lam;
                        k += 2;
                    }
                    freq += 1;
                }
            }
            AxisKind::Free => {
                let mf = m as f64;
                for k in 0..m {
                    let c = if k == 0 { (1.0 / mf).sqrt() } else { (2.0 / mf).sqrt() };
                    for i in 0..m {
                        basis[i * m + k] = c * (PI * k as f64 * (i as f64 + 0.5) / mf).cos();
                    }
                    eig[k] = 2.0 - 2.0 * (PI * k as f64 / mf).cos();
                }
            }
            AxisKind::Dirichlet => {
                let mf = (m + 1) as f64;
                let c = (2.0 / mf).sqrt();
                for k in 0..m {
                    for i in 0..m {
                        basis[i * m + k] = c * (PI * (k + 1) as f64 * (i + 1) as f64 / mf).sin();
                    }
                    eig[k] = 2.0 - 2.0 * (PI * (k + 1) as f64 / mf).cos();
                }
            }
        }
        let scale = mesh.h.powi(mesh.dim as i32 - 2);
        Self { dim: mesh.dim, m, basis, eig, scale, kind_1d: None }
    }

    /// Preconditioner whose 1D solve runs in linear time; no dense basis is built.
    pub fn new_1d(mesh: &Mesh) -> Self {
        assert_eq!(mesh.dim, 1);
        Self { dim: 1, m: mesh.m, basis: Vec::new(), eig: Vec::new(), scale: 1.0 / mesh.h, kind_1d: Some(mesh.kind) }
    }

    /// Chooses the linear-time 1D path when available.
    pub fn for_mesh(mesh: &Mesh) -> Self {
        if mesh.dim == 1 {
            Self::new_1d(mesh)
        } else {
            Self::new(mesh)
        }
    }

    /// 1D solve through the edge differences `f_i = x_{i+1} - x_i`, which satisfy
    /// `f_{i-1} - f_i = g_i`.
    fn apply_path(&self, g: &[f64], out: &mut [f64]) {
        let m = self.m;
        let kind = self.kind_1d.expect("1D path");
        let mean_g = if kind == AxisKind::Dirichlet { 0.0 } else { g.iter().sum::<f64>() / m as f64 };
        let mut s = 0.0;
        let partial: Vec<f64> = g
            .iter()
            .map(|v| {
                s += (v - mean_g) / self.scale;
                s
            })
            .collect();
        match kind {
            AxisKind::Free => {
                out[0] = 0.0;
                for i in 0..m - 1 {
                    out[i + 1] = out[i] - partial[i];
                }
            }
            AxisKind::Periodic => {
                let f0 = partial.iter().sum::<f64>() / m as f64;
                out[0] = 0.0;
                for i in 0..m - 1 {
                    out[i + 1] = out[i] + f0 - partial[i];
                }
            }
            AxisKind::Dirichlet => {
                // m + 1 edge differences summing to zero
                let f0 = partial.iter().sum::<f64>() / (m + 1) as f64;
                out[0] = f0;
                for i in 0..m - 1 {
                    out[i + 1] = out[i] + f0 - partial[i];
                }
                return;
            }
        }
        let mean = out.iter().sum::<f64>() / m as f64;
        out.iter_mut().for_each(|x| *x -= mean);
    }

    /// `out = L^+ g`.
    pub fn apply(&self, g: &[f64], out: &mut [f64]) {
        let m = self.m;
        let tiny = 1e-12;
        if self.dim == 1 && self.kind_1d.is_some() {
            self.apply_path(g, out);
            return;
        }
        if self.dim == 1 {
            let mut c = vec![0.0; m];
            for i in 0..m {
                let gi = g[i];
                let row = &self.basis[i * m..(i + 1) * m];
                for k in 0..m {
                    c[k] += row[k] * gi;
                }
            }
            for k in 0..m {
                c[k] = if self.eig[k] > tiny { c[k] / (self.scale * self.eig[k]) } else { 0.0 };
            }
            for i in 0..m {
                let row = &self.basis[i * m..(i + 1) * m];
                out[i] = row.iter().zip(&c).map(|(b, c)| b * c).sum();
            }
            return;
        }
        // 2D: C = B^T G B, divide, G' = B C B^T
        let t = self.transform(g, true);
        let mut c = t;
        for k in 0..m {
            for l in 0..m {
                let lam = self.eig[k] + self.eig[l];
                let idx = k * m + l;
                c[idx] = if lam > tiny { c[idx] / (self.scale * lam) } else { 0.0 };
            }
        }
        let r = self.transform(&c, false);
        out.copy_from_slice(&r);
    }

    /// Forward (`B^T X B`) or backward (`B X B^T`) change of basis of an `m x m` array.
    fn transform(&self, x: &[f64], forward: bool) -> Vec<f64> {
        let m = self.m;
        let b = |i: usize, k: usize| if forward { self.basis[i * m + k] } else { self.basis[k * m + i] };
        // first axis
        let mut tmp = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                let bik = b(i, k);
                if bik == 0.0 {
                    continue;
                }
                let src = &x[i * m..(i + 1) * m];
                let dst = &mut tmp[k * m..(k + 1) * m];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += bik * s;
                }
            }
        }
        // second axis
        let mut out = vec![0.0; m * m];
        let mut bt = vec![0.0; m * m];
        for j in 0..m {
            for l in 0..m {
                bt[j * m + l] = b(j, l);
            }
        }
        for k in 0..m {
            let row = &tmp[k * m..(k + 1) * m];
            let dst = &mut out[k * m..(k + 1) * m];
            for (j, &r) in row.iter().enumerate() {
                if r == 0.0 {
                    continue;
                }
                let brow = &bt[j * m..(j + 1) * m];
                for (d, bb) in dst.iter_mut().zip(brow) {
                    *d += r * bb;
                }
            }
        }
        out
    }
}
