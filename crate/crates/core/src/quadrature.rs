//! Gauss–Legendre rules and one-dimensional Lagrange bases on the unit interval.
//!
//! Everything in the crate lives on `[0, 1]`: time slabs are mapped to it and
//! spatial reference cells are `[0, 1]^2`.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[0, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[0, 1]`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `count`-point Gauss–Legendre rule on `[0, 1]`; exact for polynomials of
/// degree `2 * count - 1`.
pub fn gauss_nodes(count: usize) -> Result<GaussRule> {
    if count < 1 {
        return Err(Error::InvalidOrder(format!(
            "Gauss rule needs at least one point, got {count}"
        )));
    }
    let n = count;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots of P_n come in symmetric pairs; compute the upper half by Newton.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is in (0, 1]; map +-x from [-1, 1] onto [0, 1].
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
    Ok(GaussRule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `count` equispaced points on `[0, 1]` including both endpoints.
pub fn equispaced_nodes(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..count).map(|i| i as f64 / (count - 1) as f64).collect(),
    }
}

/// Lagrange basis `{phi_j}` with `phi_j(x_i) = delta_ij` on the given nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    denominators: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(nodes: Vec<f64>) -> Self {
        let denominators = (0..nodes.len())
            .map(|j| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != j)
                    .map(|(_, &xm)| nodes[j] - xm)
                    .product()
            })
            .collect();
        Self {
            nodes,
            denominators,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn value(&self, j: usize, x: f64) -> f64 {
        let num: f64 = self
            .nodes
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != j)
            .map(|(_, &xm)| x - xm)
            .product();
        num / self.denominators[j]
    }

    pub fn derivative(&self, j: usize, x: f64) -> f64 {
        let n = self.nodes.len();
        let mut sum = 0.0;
        for m in (0..n).filter(|&m| m != j) {
            let prod: f64 = (0..n)
                .filter(|&l| l != j && l != m)
                .map(|l| x - self.nodes[l])
                .product();
            sum += prod;
        }
        sum / self.denominators[j]
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        (0..self.len()).map(|j| self.value(j, x)).collect()
    }

    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        (0..self.len()).map(|j| self.derivative(j, x)).collect()
    }
}

/// Tensor-product Gauss rule on the unit square: `(point, weight)` pairs.
pub fn tensor_rule(points_per_axis: usize) -> Vec<([f64; 2], f64)> {
    let rule = gauss_nodes(points_per_axis.max(1)).expect("count >= 1");
    let mut out = Vec::with_capacity(rule.len() * rule.len());
    for (j, &y) in rule.nodes.iter().enumerate() {
        for (i, &x) in rule.nodes.iter().enumerate() {
            out.push(([x, y], rule.weights[i] * rule.weights[j]));
        }
    }
    out
}
