//! Structured P1 meshes on boxes in one and two dimensions.
//!
//! Axis `k` is split into `n` intervals of width `h`; in 2D every square is cut along
//! its rising diagonal into a lower-right and an upper-left triangle. On this
//! triangulation the gradient of a P1 function is a pair of forward differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marks a node pinned to zero.
pub const FIXED: usize = usize::MAX;

/// Boundary treatment, applied on every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Last node identified with the first.
    Periodic,
    /// All nodes free (natural boundary condition).
    Free,
    /// Boundary nodes pinned to zero.
    Dirichlet,
}

/// One simplex: gradient component `c` is `(v[plus[c]] - v[minus[c]]) / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub plus: [usize; 2],
    pub minus: [usize; 2],
    pub centroid: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    /// Intervals per axis.
    pub n: usize,
    pub h: f64,
    /// Lower corner coordinate (same on each axis).
    pub origin: f64,
    pub kind: AxisKind,
    /// Unknowns per axis.
    pub m: usize,
    pub elements: Vec<Element>,
    /// Element measure.
    pub area: f64,
}

impl Mesh {
    /// Mesh of `[origin, origin + n h]^dim`.
    pub fn new(dim: usize, n: usize, h: f64, origin: f64, kind: AxisKind) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidInput(format!("discrete solvers support d = 1, 2; got d = {dim}")));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 intervals per axis, got {n}")));
        }
        let m = match kind {
            AxisKind::Periodic => n,
            AxisKind::Free => n + 1,
            AxisKind::Dirichlet => n - 1,
        };
        let map = |i: usize| -> usize {
            match kind {
                AxisKind::Periodic => i % n,
                AxisKind::Free => i,
                AxisKind::Dirichlet => {
                    if i == 0 || i == n {
                        FIXED
                    } else {
                        i - 1
                    }
                }
            }
        };
        let mut elements = Vec::new();
        let x = |i: usize| origin + i as f64 * h;
        if dim == 1 {
            for i in 0..n {
                elements.push(Element { plus: [map(i + 1), FIXED], minus: [map(i), FIXED], centroid: [x(i) + 0.5 * h, 0.0] });
            }
        } else {
            let id = |i: usize, j: usize| -> usize {
                let (a, b) = (map(i), map(j));
                if a == FIXED || b == FIXED {
                    FIXED
                } else {
                    a * m + b
                }
            };
            for i in 0..n {
                for j in 0..n {
                    elements.push(Element {
                        plus: [id(i + 1, j), id(i + 1, j + 1)],
                        minus: [id(i, j), id(i + 1, j)],
                        centroid: [x(i) + 2.0 * h / 3.0, x(j) + h / 3.0],
                    });
                    elements.push(Element {
                        plus: [id(i + 1, j + 1), id(i, j + 1)],
                        minus: [id(i, j + 1), id(i, j)],
                        centroid: [x(i) + h / 3.0, x(j) + 2.0 * h / 3.0],
                    });
                }
            }
        }
        let area = if dim == 1 { h } else { 0.5 * h * h };
        Ok(Self { dim, n, h, origin, kind, m, elements, area })
    }

    /// Periodic mesh of the unit cell `[-1/2, 1/2)^dim`.
    pub fn unit_cell(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, 1.0 / n as f64, -0.5, AxisKind::Periodic)
    }

    pub fn unknowns(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn side(&self) -> f64 {
        self.n as f64 * self.h
    }

    /// Element gradients, `dim` entries per element.
    pub fn gradients(&self, v: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let inv = 1.0 / self.h;
        let at = |k: usize| if k == FIXED { 0.0 } else { v[k] };
        for (e, el) in self.elements.iter().enumerate() {
            for c in 0..d {
                out[e * d + c] = (at(el.plus[c]) - at(el.minus[c])) * inv;
            }
        }
    }

    /// Adjoint of [`Mesh::gradients`] weighted by the element measure:
    /// `out_k = sum_e area * flux_e . dG_e/dv_k`.
    pub fn scatter(&self, flux: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let s = self.area / self.h;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (e, el) in self.elements.iter().enumerate() {
            for c in 0..d {
                let q = s * flux[e * d + c];
                if el.plus[c] != FIXED {
                    out[el.plus[c]] += q;
                }
                if el.minus[c] != FIXED {
                    out[el.minus[c]] -= q;
                }
            }
        }
    }

    /// Element containing `y`, after periodic wrap for periodic meshes.
    pub fn locate(&self, y: &[f64]) -> usize {
        let side = self.side();
        let local = |t: f64| -> (usize, f64) {
            let mut s = t - self.origin;
            if self.kind == AxisKind::Periodic {
                s -= side * (s / side).floor();
            }
            let f = (s / self.h).clamp(0.0, self.n as f64 - 1e-9);
            let i = f.floor() as usize;
            (i.min(self.n - 1), f - i as f64)
        };
        if self.dim == 1 {
            return local(y[0]).0;
        }
        let (i, fx) = local(y[0]);
        let (j, fy) = local(y[1]);
        2 * (i * self.n + j) + usize::from(fy > fx)
    }

    /// Zero-mean normalization over the nodes (periodic and free meshes).
    pub fn remove_mean(&self, v: &mut [f64]) {
        if self.kind == AxisKind::Dirichlet || v.is_empty() {
            return;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_of_linear_function_are_exact() {
        let mesh = Mesh::new(2, 4, 0.25, -0.5, AxisKind::Free).unwrap();
        let m = mesh.m;
        let v: Vec<f64> = (0..m * m)
            .map(|k| {
                let (i, j) = (k / m, k % m);
                let (x, y) = (-0.5 + 0.25 * i as f64, -0.5 + 0.25 * j as f64);
                2.0 * x - 3.0 * y
            })
            .collect();
        let mut g = vec![0.0; mesh.elements.len() * 2];
        mesh.gradients(&v, &mut g);
        for e in 0..mesh.elements.len() {
            assert!((g[2 * e] - 2.0).abs() < 1e-12 && (g[2 * e + 1] + 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scatter_is_adjoint_of_gradient() {
        for kind in [AxisKind::Periodic, AxisKind::Free, AxisKind::Dirichlet] {
            for dim in [1, 2] {
                let mesh = Mesh::new(dim, 5, 0.2, 0.0, kind).unwrap();
                let nu = mesh.unknowns();
                let v: Vec<f64> = (0..nu).map(|k| ((k * 7 + 3) % 11) as f64 - 5.0).collect();
                let flux: Vec<f64> = (0..mesh.elements.len() * dim).map(|k| ((k * 5 + 1) % 13) as f64 * 0.1).collect();
                let mut g = vec![0.0; flux.len()];
                mesh.gradients(&v, &mut g);
                let lhs: f64 = g.iter().zip(&flux).map(|(a, b)| a * b).sum::<f64>() * mesh.area;
                let mut s = vec![0.0; nu];
                mesh.scatter(&flux, &mut s);
                let rhs: f64 = s.iter().zip(&v).map(|(a, b)| a * b).sum();
                assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0), "{kind:?} {dim}");
            }
        }
    }

    #[test]
    fn locate_finds_centroids() {
        let mesh = Mesh::unit_cell(2, 6).unwrap();
        for (e, el) in mesh.elements.iter().enumerate() {
            assert_eq!(mesh.locate(&el.centroid), e);
            assert_eq!(mesh.locate(&[el.centroid[0] + 3.0, el.centroid[1] - 2.0]), e);
        }
    }

    #[test]
    fn unknown_counts() {
        assert_eq!(Mesh::new(2, 8, 0.1, 0.0, AxisKind::Periodic).unwrap().unknowns(), 64);
        assert_eq!(Mesh::new(2, 8, 0.1, 0.0, AxisKind::Free).unwrap().unknowns(), 81);
        assert_eq!(Mesh::new(1, 8, 0.1, 0.0, AxisKind::Dirichlet).unwrap().unknowns(), 7);
        assert!(Mesh::new(3, 8, 0.1, 0.0, AxisKind::Free).is_err());
    }
}
