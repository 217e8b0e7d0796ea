//! Time-slab Lagrange bases and tableau coefficients for cGP(r) and dG(r).
//!
//! All coefficients live on the reference slab `[0, 1]`. With `s = (t - t_{n-1}) / tau_n`
//! the derivative tableau `alpha_ij = int phi_j' phi_i` is independent of `tau_n`,
//! while mass-type weights scale linearly with `tau_n` and are stored unscaled.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_nodes, LagrangeBasis};

/// Time discretization family and polynomial degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimeScheme {
    /// Continuous Galerkin–Petrov, trial degree `r >= 1`.
    Cgp(usize),
    /// Discontinuous Galerkin, degree `r >= 0`.
    Dg(usize),
}

impl TimeScheme {
    pub fn degree(self) -> usize {
        match self {
            TimeScheme::Cgp(r) | TimeScheme::Dg(r) => r,
        }
    }

    pub fn is_continuous(self) -> bool {
        matches!(self, TimeScheme::Cgp(_))
    }

    pub fn basis(self) -> Result<TimeSlabBasis> {
        match self {
            TimeScheme::Cgp(r) => build_cgp_basis(r),
            TimeScheme::Dg(r) => build_dg_basis(r),
        }
    }

    /// `"cgp"` or `"dg"`, as used in scenario files.
    pub fn family(self) -> &'static str {
        match self {
            TimeScheme::Cgp(_) => "cgp",
            TimeScheme::Dg(_) => "dg",
        }
    }

    pub fn from_parts(family: &str, degree: usize) -> Result<Self> {
        match family.to_ascii_lowercase().as_str() {
            "cgp" | "cg" => Ok(TimeScheme::Cgp(degree)),
            "dg" => Ok(TimeScheme::Dg(degree)),
            other => Err(Error::InvalidInput(format!(
                "unknown time scheme family {other:?} (expected \"cgp\" or \"dg\")"
            ))),
        }
    }
}

impl fmt::Display for TimeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeScheme::Cgp(r) => write!(f, "cGP({r})"),
            TimeScheme::Dg(r) => write!(f, "dG({r})"),
        }
    }
}

impl FromStr for TimeScheme {
    type Err = Error;

    /// Accepts `cGP(1)`, `cgp1`, `dG(0)`, `dg0` and similar spellings.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let split = lower
            .find(|c: char| c.is_ascii_digit() || c == '(')
            .ok_or_else(|| Error::InvalidInput(format!("cannot parse time scheme {s:?}")))?;
        let (family, rest) = lower.split_at(split);
        let digits = rest.trim_matches(|c| c == '(' || c == ')');
        let degree = digits
            .parse::<usize>()
            .map_err(|_| Error::InvalidInput(format!("cannot parse time scheme {s:?}")))?;
        TimeScheme::from_parts(family, degree)
    }
}

/// Reference-slab Lagrange basis and its tableau for one scheme and degree.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSlabBasis {
    pub scheme: TimeScheme,
    /// Nodes `s_0 < ... < s_r` on `[0, 1]`.
    pub nodes: Vec<f64>,
    /// `alpha_ij = int_0^1 phi_j'(s) phi_i(s) ds` for all `i, j = 0..=r`.
    /// For cGP only rows `1..=r` are test rows; row 0 is kept for diagnostics.
    pub alpha: DMatrix<f64>,
    /// `int_0^1 phi_i(s)^2 ds`; multiply by `tau_n` for the physical value.
    pub beta_ref: Vec<f64>,
    /// Reference integral of the test function attached to row `i`; this is the
    /// weight that multiplies `tau_n` in front of the flux divergence and the
    /// source term. Zero for the cGP row 0, which carries no test function.
    pub test_weights: Vec<f64>,
    /// `gamma_i = phi_i(0)`; dG only.
    pub gamma: Option<Vec<f64>>,
    /// `alpha_ij + gamma_i gamma_j`; dG only.
    pub alpha_tilde: Option<DMatrix<f64>>,
    lagrange: LagrangeBasis,
}

impl TimeSlabBasis {
    pub fn degree(&self) -> usize {
        self.scheme.degree()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Node indices whose coefficients are unknowns of the slab problem.
    pub fn unknown_nodes(&self) -> Range<usize> {
        match self.scheme {
            TimeScheme::Cgp(r) => 1..r + 1,
            TimeScheme::Dg(r) => 0..r + 1,
        }
    }

    /// The matrix multiplying the storage terms: `alpha` for cGP and
    /// `alpha_tilde` for dG.
    pub fn storage_matrix(&self) -> &DMatrix<f64> {
        self.alpha_tilde.as_ref().unwrap_or(&self.alpha)
    }

    /// Basis values `phi_j(s)`.
    pub fn values_at(&self, s: f64) -> Vec<f64> {
        self.lagrange.values(s)
    }

    /// Basis derivatives `phi_j'(s)` on the reference slab.
    pub fn derivatives_at(&self, s: f64) -> Vec<f64> {
        self.lagrange.derivatives(s)
    }

    /// Values at the right end of the slab (the left limit `t_n^-` for dG).
    pub fn end_values(&self) -> Vec<f64> {
        self.values_at(1.0)
    }

    /// Evaluates `sum_j coeffs[j] phi_j(s)` for vector-valued coefficients.
    pub fn evaluate(&self, coeffs: &[Vec<f64>], s: f64) -> Vec<f64> {
        combine(coeffs, &self.values_at(s))
    }

    /// Physical time of node `j` on the slab `[t_start, t_start + tau]`.
    pub fn node_time(&self, j: usize, t_start: f64, tau: f64) -> f64 {
        t_start + tau * self.nodes[j]
    }
}

/// `sum_j weights[j] * coeffs[j]`.
pub fn combine(coeffs: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = coeffs.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (c, &w) in coeffs.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(c) {
            *o += w * v;
        }
    }
    out
}

fn tableau(nodes: &[f64]) -> (LagrangeBasis, DMatrix<f64>, Vec<f64>) {
    let basis = LagrangeBasis::new(nodes.to_vec());
    let n = nodes.len();
    // Integrands have degree <= 2r; n + 1 points integrate degree 2n + 1 exactly.
    let rule = gauss_nodes(n + 1).expect("n >= 1");
    let mut alpha = DMatrix::zeros(n, n);
    let mut beta = vec![0.0; n];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = basis.values(x);
        let d = basis.derivatives(x);
        for i in 0..n {
            beta[i] += w * v[i] * v[i];
            for j in 0..n {
                alpha[(i, j)] += w * d[j] * v[i];
            }
        }
    }
    (basis, alpha, beta)
}

/// cGP(r): nodes `{0} ∪ Gauss_r`, test rows `1..=r`.
pub fn build_cgp_basis(r: usize) -> Result<TimeSlabBasis> {
    if r < 1 {
        return Err(Error::InvalidOrder(format!(
            "cGP requires degree r >= 1, got {r}"
        )));
    }
    let gauss = gauss_nodes(r)?;
    let mut nodes = Vec::with_capacity(r + 1);
    nodes.push(0.0);
    nodes.extend_from_slice(&gauss.nodes);
    let (lagrange, alpha, beta_ref) = tableau(&nodes);
    // Test functions are the degree r-1 Lagrange polynomials on the Gauss
    // points; their integrals are the Gauss weights.
    let mut test_weights = vec![0.0];
    test_weights.extend_from_slice(&gauss.weights);
    Ok(TimeSlabBasis {
        scheme: TimeScheme::Cgp(r),
        nodes,
        alpha,
        beta_ref,
        test_weights,
        gamma: None,
        alpha_tilde: None,
        lagrange,
    })
}

/// dG(r): nodes are the `(r+1)`-point Gauss points, all rows are test rows.
pub fn build_dg_basis(r: usize) -> Result<TimeSlabBasis> {
    let gauss = gauss_nodes(r + 1)?;
    let nodes = gauss.nodes.clone();
    let (lagrange, alpha, beta_ref) = tableau(&nodes);
    let gamma = lagrange.values(0.0);
    let n = nodes.len();
    let alpha_tilde = DMatrix::from_fn(n, n, |i, j| alpha[(i, j)] + gamma[i] * gamma[j]);
    Ok(TimeSlabBasis {
        scheme: TimeScheme::Dg(r),
        nodes,
        alpha,
        test_weights: beta_ref.clone(),
        beta_ref,
        gamma: Some(gamma),
        alpha_tilde: Some(alpha_tilde),
        lagrange,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exact polynomial integration on [0, 1] via monomial coefficients.
    fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    fn poly_integral(p: &[f64]) -> f64 {
        p.iter()
            .enumerate()
            .map(|(k, c)| c / (k as f64 + 1.0))
            .sum()
    }

    fn poly_derivative(p: &[f64]) -> Vec<f64> {
        if p.len() <= 1 {
            return vec![0.0];
        }
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect()
    }

    #[test]
    fn cgp1_tableau_matches_symbolic_integration() {
        // phi_0 = 1 - 2s, phi_1 = 2s on nodes {0, 1/2}.
        let phi = [vec![1.0, -2.0], vec![0.0, 2.0]];
        let b = build_cgp_basis(1).unwrap();
        assert_eq!(b.nodes, vec![0.0, 0.5]);
        for i in 0..2 {
            for j in 0..2 {
                let exact = poly_integral(&poly_mul(&poly_derivative(&phi[j]), &phi[i]));
                assert!((b.alpha[(i, j)] - exact).abs() < 1e-14);
            }
        }
        assert!((b.alpha[(1, 0)] + 2.0).abs() < 1e-14);
        assert!((b.alpha[(1, 1)] - 2.0).abs() < 1e-14);
        assert!((b.beta_ref[1] - 4.0 / 3.0).abs() < 1e-14);
        assert!((b.alpha[(1, 0)] + b.alpha[(1, 1)]).abs() < 1e-14);
        assert_eq!(b.test_weights, vec![0.0, 1.0]);
        assert!(b.gamma.is_none() && b.alpha_tilde.is_none());
    }

    #[test]
    fn dg0_tableau_is_trivial() {
        let b = build_dg_basis(0).unwrap();
        assert_eq!(b.nodes, vec![0.5]);
        assert_eq!(b.alpha[(0, 0)], 0.0);
        assert_eq!(b.gamma.as_ref().unwrap()[0], 1.0);
        assert_eq!(b.alpha_tilde.as_ref().unwrap()[(0, 0)], 1.0);
        assert!((b.beta_ref[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dg1_gamma_is_basis_at_left_endpoint() {
        let b = build_dg_basis(1).unwrap();
        let g = b.gamma.as_ref().unwrap();
        let s3 = 3f64.sqrt();
        assert!((g[0] - (1.0 + s3) / 2.0).abs() < 1e-14);
        assert!((g[1] - (1.0 - s3) / 2.0).abs() < 1e-14);
        assert!((g[0] - 1.36603).abs() < 1e-5);
    }

    #[test]
    fn cgp_requires_positive_degree() {
        assert!(matches!(build_cgp_basis(0), Err(Error::InvalidOrder(_))));
    }

    fn quad_form(m: &DMatrix<f64>, c: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..c.len() {
            for j in 0..c.len() {
                acc += m[(i, j)] * c[j] * c[i];
            }
        }
        acc
    }

    #[test]
    fn tableau_invariants_hold_for_random_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in 0..=4 {
            let mut schemes = vec![build_dg_basis(r).unwrap()];
            if r >= 1 {
                schemes.push(build_cgp_basis(r).unwrap());
            }
            for b in schemes {
                let n = b.num_nodes();
                assert!(b.beta_ref.iter().all(|&x| x > 0.0));
                for i in 0..n {
                    let row: f64 = (0..n).map(|j| b.alpha[(i, j)]).sum();
                    assert!(row.abs() < 1e-12);
                }
                let ends = b.end_values();
                let starts = b.values_at(0.0);
                for _ in 0..100 {
                    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let c1: f64 = c.iter().zip(&ends).map(|(a, b)| a * b).sum();
                    let c0: f64 = c.iter().zip(&starts).map(|(a, b)| a * b).sum();
                    let lhs = quad_form(&b.alpha, &c);
                    assert!((lhs - 0.5 * (c1 * c1 - c0 * c0)).abs() < 1e-11);
                    if let Some(at) = &b.alpha_tilde {
                        let lhs = quad_form(at, &c);
                        assert!((lhs - 0.5 * c1 * c1 - 0.5 * c0 * c0).abs() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_is_tau_independent_and_end_values_reproduce_polynomials() {
        // A degree-r polynomial is reproduced exactly by its nodal values.
        let b = build_cgp_basis(3).unwrap();
        let f = |s: f64| 1.0 - 2.0 * s + 0.5 * s.powi(3);
        let coeffs: Vec<Vec<f64>> = b.nodes.iter().map(|&s| vec![f(s)]).collect();
        assert!((b.evaluate(&coeffs, 1.0)[0] - f(1.0)).abs() < 1e-13);
        assert!((b.evaluate(&coeffs, 0.3)[0] - f(0.3)).abs() < 1e-13);
    }

    #[test]
    fn scheme_parsing_round_trips() {
        for s in [
            TimeScheme::Cgp(1),
            TimeScheme::Cgp(2),
            TimeScheme::Dg(0),
            TimeScheme::Dg(3),
        ] {
            assert_eq!(s.to_string().parse::<TimeScheme>().unwrap(), s);
        }
        assert_eq!("dg1".parse::<TimeScheme>().unwrap(), TimeScheme::Dg(1));
        assert!("rk4".parse::<TimeScheme>().is_err());
    }
}
