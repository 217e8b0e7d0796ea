//! Reference elements on the unit square.

use crate::quadrature::{equispaced_nodes, gauss_nodes, LagrangeBasis};

/// Discontinuous tensor-product `Q_s` with nodes at the Gauss points.
#[derive(Debug, Clone)]
pub struct PressureElement {
    pub degree: usize,
    basis: LagrangeBasis,
}

impl PressureElement {
    pub fn new(degree: usize) -> Self {
        let nodes = gauss_nodes(degree + 1).expect("count >= 1").nodes;
        Self {
            degree,
            basis: LagrangeBasis::new(nodes),
        }
    }

    pub fn num_dofs(&self) -> usize {
        (self.degree + 1).pow(2)
    }

    pub fn values(&self, xi: [f64; 2]) -> Vec<f64> {
        let vx = self.basis.values(xi[0]);
        let vy = self.basis.values(xi[1]);
        let n = self.degree + 1;
        let mut out = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                out.push(vx[a] * vy[b]);
            }
        }
        out
    }
}

/// One Raviart–Thomas shape function `sign * N_a(ξ_c) G_k(ξ_other) e_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RtShape {
    component: usize,
    normal_index: usize,
    transverse_index: usize,
    sign: f64,
}

/// `RT_s` on the square: `Q_{s+1,s} × Q_{s,s+1}`.
///
/// Local dofs come first per facet (`s + 1` each, in local facet order, along
/// the facet's reference parameter), then the interior dofs of the x and y
/// components. A facet dof equals the outward normal flux density `v̂·n̂` at
/// the corresponding Gauss point of the facet.
#[derive(Debug, Clone)]
pub struct FluxElement {
    pub degree: usize,
    normal: LagrangeBasis,
    transverse: LagrangeBasis,
    shapes: Vec<RtShape>,
}

impl FluxElement {
    pub fn new(degree: usize) -> Self {
        let s = degree;
        let mut normal_nodes = vec![0.0];
        if s > 0 {
            normal_nodes.extend(gauss_nodes(s).expect("s >= 1").nodes);
        }
        normal_nodes.push(1.0);
        let transverse = LagrangeBasis::new(gauss_nodes(s + 1).expect("count >= 1").nodes);
        let mut shapes = Vec::with_capacity(2 * (s + 1) * (s + 2));
        let facet_shapes = [
            (0usize, 0usize, -1.0),
            (0, s + 1, 1.0),
            (1, 0, -1.0),
            (1, s + 1, 1.0),
        ];
        for &(component, normal_index, sign) in &facet_shapes {
            for k in 0..=s {
                shapes.push(RtShape {
                    component,
                    normal_index,
                    transverse_index: k,
                    sign,
                });
            }
        }
        for component in 0..2 {
            for k in 0..=s {
                for a in 1..=s {
                    shapes.push(RtShape {
                        component,
                        normal_index: a,
                        transverse_index: k,
                        sign: 1.0,
                    });
                }
            }
        }
        Self {
            degree,
            normal: LagrangeBasis::new(normal_nodes),
            transverse,
            shapes,
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.shapes.len()
    }

    pub fn dofs_per_facet(&self) -> usize {
        self.degree + 1
    }

    pub fn num_interior_dofs(&self) -> usize {
        self.num_dofs() - 4 * self.dofs_per_facet()
    }

    /// Reference vector fields `v̂_i(ξ)`.
    pub fn values(&self, xi: [f64; 2]) -> Vec<[f64; 2]> {
        let nx = self.normal.values(xi[0]);
        let ny = self.normal.values(xi[1]);
        let gx = self.transverse.values(xi[0]);
        let gy = self.transverse.values(xi[1]);
        self.shapes
            .iter()
            .map(|sh| {
                if sh.component == 0 {
                    [sh.sign * nx[sh.normal_index] * gy[sh.transverse_index], 0.0]
                } else {
                    [0.0, sh.sign * gx[sh.transverse_index] * ny[sh.normal_index]]
                }
            })
            .collect()
    }

    /// Reference divergences `div̂ v̂_i(ξ)`.
    pub fn divergences(&self, xi: [f64; 2]) -> Vec<f64> {
        let dx = self.normal.derivatives(xi[0]);
        let dy = self.normal.derivatives(xi[1]);
        let gx = self.transverse.values(xi[0]);
        let gy = self.transverse.values(xi[1]);
        self.shapes
            .iter()
            .map(|sh| {
                if sh.component == 0 {
                    sh.sign * dx[sh.normal_index] * gy[sh.transverse_index]
                } else {
                    sh.sign * gx[sh.transverse_index] * dy[sh.normal_index]
                }
            })
            .collect()
    }
}

/// Continuous `Q_l` scalar shape functions on equispaced nodes; the vector
/// displacement space uses two copies, local dof `2 * node + component`.
#[derive(Debug, Clone)]
pub struct DisplacementElement {
    pub degree: usize,
    basis: LagrangeBasis,
}

/// Where a local displacement node sits on the reference square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLocation {
    Vertex(usize),
    /// `(local facet, position along the facet parameter)`.
    Facet(usize, usize),
    Interior(usize),
}

impl DisplacementElement {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "continuous displacement degree must be >= 1");
        Self {
            degree,
            basis: LagrangeBasis::new(equispaced_nodes(degree + 1)),
        }
    }

    pub fn num_nodes(&self) -> usize {
        (self.degree + 1).pow(2)
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.num_nodes()
    }

    /// Reference coordinates of local node `a + (l + 1) b`.
    pub fn node_point(&self, node: usize) -> [f64; 2] {
        let n = self.degree + 1;
        let nodes = self.basis.nodes();
        [nodes[node % n], nodes[node / n]]
    }

    pub fn node_location(&self, node: usize) -> NodeLocation {
        let l = self.degree;
        let (a, b) = (node % (l + 1), node / (l + 1));
        let ea = a == 0 || a == l;
        let eb = b == 0 || b == l;
        match (ea, eb) {
            (true, true) => NodeLocation::Vertex(match (a == 0, b == 0) {
                (true, true) => 0,
                (false, true) => 1,
                (false, false) => 2,
                (true, false) => 3,
            }),
            (true, false) => NodeLocation::Facet(if a == 0 { 0 } else { 1 }, b - 1),
            (false, true) => NodeLocation::Facet(if b == 0 { 2 } else { 3 }, a - 1),
            (false, false) => NodeLocation::Interior((a - 1) + (l - 1) * (b - 1)),
        }
    }

    pub fn values(&self, xi: [f64; 2]) -> Vec<f64> {
        let vx = self.basis.values(xi[0]);
        let vy = self.basis.values(xi[1]);
        let n = self.degree + 1;
        let mut out = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                out.push(vx[a] * vy[b]);
            }
        }
        out
    }

    /// Reference gradients `∇̂ N_i(ξ)`.
    pub fn gradients(&self, xi: [f64; 2]) -> Vec<[f64; 2]> {
        let vx = self.basis.values(xi[0]);
        let vy = self.basis.values(xi[1]);
        let dx = self.basis.derivatives(xi[0]);
        let dy = self.basis.derivatives(xi[1]);
        let n = self.degree + 1;
        let mut out = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                out.push([dx[a] * vy[b], vx[a] * dy[b]]);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rt_dimension_and_facet_dofs() {
        for s in 0..4 {
            let e = FluxElement::new(s);
            assert_eq!(e.num_dofs(), 2 * (s + 1) * (s + 2));
            // Facet dof k of local facet f is the outward normal density at
            // the k-th facet Gauss point and vanishes on every other facet node.
            let g = gauss_nodes(s + 1).unwrap().nodes;
            let normals = crate::mesh::REFERENCE_NORMALS;
            for f in 0..4 {
                for (k, &t) in g.iter().enumerate() {
                    let xi = match f {
                        0 => [0.0, t],
                        1 => [1.0, t],
                        2 => [t, 0.0],
                        _ => [t, 1.0],
                    };
                    let v = e.values(xi);
                    for (i, vi) in v.iter().enumerate() {
                        let flux = vi[0] * normals[f][0] + vi[1] * normals[f][1];
                        let expected = if i == f * (s + 1) + k { 1.0 } else { 0.0 };
                        assert!((flux - expected).abs() < 1e-12, "s={s} f={f} k={k} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn rt0_divergence_is_constant() {
        let e = FluxElement::new(0);
        let d0 = e.divergences([0.1, 0.7]);
        let d1 = e.divergences([0.9, 0.2]);
        assert_eq!(d0, d1);
        assert_eq!(d0, vec![1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn displacement_nodes_are_classified() {
        let e = DisplacementElement::new(2);
        assert_eq!(e.node_location(0), NodeLocation::Vertex(0));
        assert_eq!(e.node_location(2), NodeLocation::Vertex(1));
        assert_eq!(e.node_location(8), NodeLocation::Vertex(2));
        assert_eq!(e.node_location(6), NodeLocation::Vertex(3));
        assert_eq!(e.node_location(1), NodeLocation::Facet(2, 0));
        assert_eq!(e.node_location(3), NodeLocation::Facet(0, 0));
        assert_eq!(e.node_location(5), NodeLocation::Facet(1, 0));
        assert_eq!(e.node_location(7), NodeLocation::Facet(3, 0));
        assert_eq!(e.node_location(4), NodeLocation::Interior(0));
        let sum: f64 = e.values([0.3, 0.8]).iter().sum();
        assert!((sum - 1.0).abs() < 1e-14);
    }
}
