//! Gauss-Legendre quadrature, single-interval and composite.

use std::f64::consts::PI;

use crate::num::compensated_sum;

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `order`-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

impl GaussLegendre {
    /// Matrix `S[j][k] = int_{-1}^{t_j} L_k(t) dt` with `L_k` the Lagrange basis on the
    /// nodes; applied to nodal values it integrates the interpolant from `-1` to each node.
    pub fn partial_integration_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        let t = &self.nodes;
        let lagrange = |k: usize, x: f64| -> f64 {
            (0..n).filter(|&m| m != k).map(|m| (x - t[m]) / (t[k] - t[m])).product()
        };
        (0..n)
            .map(|j| (0..n).map(|k| self.integrate(-1.0, t[j], |x| lagrange(k, x))).collect())
            .collect()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule on a partition of `[a, b]`, with nodes and
/// weights materialised so integrands can be pre-evaluated once.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    /// Partition points, increasing, `edges[0] = a`, `edges[last] = b`.
    pub edges: Vec<f64>,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// Uniform partition of `[a, b]` into `cells` cells.
    pub fn uniform(a: f64, b: f64, cells: usize, order: usize) -> Self {
        let h = (b - a) / cells as f64;
        let edges = (0..=cells).map(|i| if i == cells { b } else { a + h * i as f64 }).collect();
        Self::from_edges(edges, order)
    }

    /// Builds the rule from explicit partition points.
    pub fn from_edges(edges: Vec<f64>, order: usize) -> Self {
        let gl = GaussLegendre::new(order);
        let cells = edges.len() - 1;
        let mut nodes = Vec::with_capacity(cells * order);
        let mut weights = Vec::with_capacity(cells * order);
        for c in 0..cells {
            let (l, r) = (edges[c], edges[c + 1]);
            let half = 0.5 * (r - l);
            let mid = 0.5 * (r + l);
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(mid + half * x);
                weights.push(w * half);
            }
        }
        Self { edges, order, nodes, weights }
    }

    /// Inserts extra partition points (e.g. known singularities) and rebuilds.
    pub fn split_at(&self, points: &[f64]) -> Self {
        let (a, b) = (self.edges[0], *self.edges.last().unwrap());
        let mut edges = self.edges.clone();
        for &x in points {
            if x > a && x < b {
                edges.push(x);
            }
        }
        edges.sort_by(|u, v| u.partial_cmp(v).unwrap());
        edges.dedup_by(|u, v| (*u - *v).abs() < 1e-14 * (b - a));
        Self::from_edges(edges, self.order)
    }

    /// Splits at `points` and grades geometrically towards each of them, so that
    /// integrands with an algebraic singularity at a point are integrated to
    /// near machine precision.
    pub fn graded_at(&self, points: &[f64], ratio: f64, levels: usize) -> Self {
        let (a, b) = (self.edges[0], *self.edges.last().unwrap());
        let mut extra = Vec::new();
        for &x in points {
            if !(x > a && x < b) {
                continue;
            }
            let c = self.locate(x);
            let h = self.edges[c + 1] - self.edges[c];
            extra.push(x);
            let mut d = h;
            for _ in 0..levels {
                d *= ratio;
                extra.push(x - d);
                extra.push(x + d);
            }
        }
        self.split_at(&extra)
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    /// Sum of `w_i * values_i`.
    pub fn sum(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        compensated_sum(self.weights.iter().zip(values).map(|(w, v)| w * v))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)))
    }

    /// `(sum w |v|^q)^{1/q}`.
    pub fn lq_norm(&self, values: &[f64], q: f64) -> f64 {
        compensated_sum(self.weights.iter().zip(values).map(|(w, v)| w * v.abs().powf(q))).powf(1.0 / q)
    }

    /// Integral from `edges[anchor]` to every node (and to every edge), given the
    /// integrand at the nodes. Returns `(at_nodes, at_edges)`.
    pub fn cumulative(&self, values: &[f64], anchor: usize) -> (Vec<f64>, Vec<f64>) {
        let gl = GaussLegendre::new(self.order);
        let s = gl.partial_integration_matrix();
        let q = self.order;
        let cells = self.cells();
        let mut at_edges = vec![0.0; cells + 1];
        for c in 0..cells {
            at_edges[c + 1] = at_edges[c] + self.weights[c * q..(c + 1) * q].iter().zip(&values[c * q..(c + 1) * q]).map(|(w, v)| w * v).sum::<f64>();
        }
        let shift = at_edges[anchor];
        at_edges.iter_mut().for_each(|v| *v -= shift);
        let mut at_nodes = vec![0.0; cells * q];
        for c in 0..cells {
            let half = 0.5 * (self.edges[c + 1] - self.edges[c]);
            let vals = &values[c * q..(c + 1) * q];
            for j in 0..q {
                let part: f64 = s[j].iter().zip(vals).map(|(a, b)| a * b).sum();
                at_nodes[c * q + j] = at_edges[c] + half * part;
            }
        }
        (at_nodes, at_edges)
    }

    /// Cell index containing `x`, clamped to the partition.
    pub fn locate(&self, x: f64) -> usize {
        match self.edges.binary_search_by(|e| e.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.cells() - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.cells() - 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_up_to_degree_2n_minus_1() {
        let gl = GaussLegendre::new(8);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        for deg in 0..16 {
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let got = gl.integrate(-1.0, 1.0, |x| x.powi(deg));
            assert!((got - exact).abs() < 1e-13, "degree {deg}: {got} vs {exact}");
        }
    }

    #[test]
    fn composite_rule_integrates_cosine_period() {
        let r = CompositeRule::uniform(-0.5, 0.5, 16, 8);
        let v = r.integrate(|y| 2.0 + (2.0 * PI * y).cos());
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_integrates_polynomials_exactly() {
        let r = CompositeRule::uniform(-0.5, 0.5, 6, 4);
        let vals: Vec<f64> = r.nodes.iter().map(|x| 3.0 * x * x).collect();
        let (nodes, edges) = r.cumulative(&vals, 3);
        for (x, v) in r.nodes.iter().zip(&nodes) {
            assert!((v - x.powi(3)).abs() < 1e-14);
        }
        for (x, v) in r.edges.iter().zip(&edges) {
            assert!((v - x.powi(3)).abs() < 1e-14);
        }
    }

    #[test]
    fn split_adds_edges_and_locate_finds_cells() {
        let r = CompositeRule::uniform(0.0, 1.0, 4, 3).split_at(&[0.3, 0.25]);
        assert_eq!(r.edges, vec![0.0, 0.25, 0.3, 0.5, 0.75, 1.0]);
        assert_eq!(r.locate(0.26), 1);
        assert_eq!(r.locate(1.0), 4);
        assert_eq!(r.locate(0.0), 0);
    }

    proptest::proptest! {
        #[test]
        fn composite_rule_integrates_cubics(a in -2.0f64..0.0, w in 0.1f64..3.0, cells in 1usize..40,
                                            c in proptest::array::uniform4(-3.0f64..3.0)) {
            let b = a + w;
            let rule = CompositeRule::uniform(a, b, cells, 2);
            let prim = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
            let got = rule.integrate(|x| c[0] + c[1] * x + c[2] * x * x + c[3] * x.powi(3));
            proptest::prop_assert!((got - (prim(b) - prim(a))).abs() < 1e-11);
        }
    }
}
