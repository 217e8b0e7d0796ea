//! Degree-of-freedom layouts for the pressure, flux and displacement spaces.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::element::{DisplacementElement, FluxElement, NodeLocation, PressureElement};
use crate::mesh::{BoundaryTag, Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Pressure,
    Flux,
    Displacement,
}

#[derive(Debug, Clone)]
pub enum SpaceElement {
    Pressure(PressureElement),
    Flux(FluxElement),
    Displacement(DisplacementElement),
}

/// Per-tag displacement components fixed to zero, `[x, y]`.
pub type DisplacementConstraints = BTreeMap<BoundaryTag, [bool; 2]>;

/// Global numbering of one finite element space on a mesh.
///
/// Constrained dofs carry homogeneous essential values; operators are
/// assembled on all dofs and restricted to [`DofMap::free_dofs`] by the solver.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub kind: SpaceKind,
    pub degree: usize,
    pub mesh: Arc<Mesh>,
    pub element: SpaceElement,
    num_dofs: usize,
    cell_dofs: Vec<Vec<usize>>,
    cell_signs: Vec<Vec<f64>>,
    constrained: Vec<bool>,
    free: Vec<usize>,
}

impl DofMap {
    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        &self.cell_dofs[cell]
    }

    /// Orientation signs of the local basis functions; all `1` except for
    /// flux facet dofs seen from the non-owning cell.
    pub fn cell_signs(&self, cell: usize) -> &[f64] {
        &self.cell_signs[cell]
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn constrained_dofs(&self) -> Vec<usize> {
        (0..self.num_dofs)
            .filter(|&d| self.constrained[d])
            .collect()
    }

    /// Unconstrained dofs in increasing order.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    /// Scatters a free-dof vector into a full vector with zero essential values.
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_dofs];
        for (&d, &v) in self.free.iter().zip(free_values) {
            full[d] = v;
        }
        full
    }

    /// Gathers the free entries of a full vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| full[d]).collect()
    }

    pub fn pressure_element(&self) -> &PressureElement {
        match &self.element {
            SpaceElement::Pressure(e) => e,
            _ => panic!("not a pressure space"),
        }
    }

    pub fn flux_element(&self) -> &FluxElement {
        match &self.element {
            SpaceElement::Flux(e) => e,
            _ => panic!("not a flux space"),
        }
    }

    pub fn displacement_element(&self) -> &DisplacementElement {
        match &self.element {
            SpaceElement::Displacement(e) => e,
            _ => panic!("not a displacement space"),
        }
    }

    /// Physical coordinates of every scalar displacement node, indexed by
    /// `dof / 2`.
    pub fn displacement_nodes(&self) -> Vec<Point> {
        let e = self.displacement_element();
        let mut nodes = vec![[0.0; 2]; self.num_dofs / 2];
        for c in 0..self.mesh.num_cells() {
            let geo = self.mesh.geometry(c);
            for a in 0..e.num_nodes() {
                nodes[self.cell_dofs[c][2 * a] / 2] = geo.map(e.node_point(a));
            }
        }
        nodes
    }

    fn finish(mut self) -> Self {
        self.free = (0..self.num_dofs)
            .filter(|&d| !self.constrained[d])
            .collect();
        self
    }
}

fn check_tags<'a>(mesh: &Mesh, tags: impl Iterator<Item = &'a BoundaryTag>) -> Result<()> {
    let present = mesh.tags();
    for tag in tags {
        if !present.contains(tag) {
            return Err(Error::InvalidBoundarySpec(format!(
                "tag {tag} does not occur on the mesh boundary"
            )));
        }
    }
    Ok(())
}

/// Discontinuous `Q_s`: `(s + 1)^2` dofs per cell, numbered cell by cell.
pub fn build_pressure_space(mesh: Arc<Mesh>, s: usize) -> DofMap {
    let element = PressureElement::new(s);
    let n = element.num_dofs();
    let cells = mesh.num_cells();
    DofMap {
        kind: SpaceKind::Pressure,
        degree: s,
        num_dofs: cells * n,
        cell_dofs: (0..cells).map(|c| (c * n..(c + 1) * n).collect()).collect(),
        cell_signs: vec![vec![1.0; n]; cells],
        constrained: vec![false; cells * n],
        free: Vec::new(),
        element: SpaceElement::Pressure(element),
        mesh,
    }
    .finish()
}

/// `RT_s` with facet dofs first (facet-major, along the facet's global
/// parameter), then cell interior dofs. Facets tagged in `essential` get
/// `q·n = 0`.
pub fn build_flux_space(
    mesh: Arc<Mesh>,
    s: usize,
    essential: &BTreeSet<BoundaryTag>,
) -> Result<DofMap> {
    check_tags(&mesh, essential.iter())?;
    let element = FluxElement::new(s);
    let per_facet = element.dofs_per_facet();
    let interior = element.num_interior_dofs();
    let facet_total = mesh.num_facets() * per_facet;
    let num_dofs = facet_total + mesh.num_cells() * interior;
    let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
    let mut cell_signs = Vec::with_capacity(mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let mut dofs = Vec::with_capacity(element.num_dofs());
        let mut signs = Vec::with_capacity(element.num_dofs());
        for lf in 0..4 {
            let f = mesh.cell_facets[c][lf];
            let aligned = mesh.local_facet_aligned(c, lf);
            let sign = if mesh.facets[f].owner.0 == c {
                1.0
            } else {
                -1.0
            };
            for k in 0..per_facet {
                let kg = if aligned { k } else { per_facet - 1 - k };
                dofs.push(f * per_facet + kg);
                signs.push(sign);
            }
        }
        for i in 0..interior {
            dofs.push(facet_total + c * interior + i);
            signs.push(1.0);
        }
        cell_dofs.push(dofs);
        cell_signs.push(signs);
    }
    let mut constrained = vec![false; num_dofs];
    for (f, facet) in mesh.facets.iter().enumerate() {
        if facet.tag.as_ref().is_some_and(|t| essential.contains(t)) {
            for k in 0..per_facet {
                constrained[f * per_facet + k] = true;
            }
        }
    }
    Ok(DofMap {
        kind: SpaceKind::Flux,
        degree: s,
        num_dofs,
        cell_dofs,
        cell_signs,
        constrained,
        free: Vec::new(),
        element: SpaceElement::Flux(element),
        mesh,
    }
    .finish())
}

/// Continuous vector `Q_degree`; scalar nodes are numbered vertices first,
/// then facet-interior nodes, then cell-interior nodes, and dof
/// `2 * node + component`.
pub fn build_displacement_space(
    mesh: Arc<Mesh>,
    degree: usize,
    dirichlet: &DisplacementConstraints,
) -> Result<DofMap> {
    if degree < 1 {
        return Err(Error::InvalidOrder(
            "displacement degree must be >= 1".into(),
        ));
    }
    check_tags(&mesh, dirichlet.keys())?;
    let element = DisplacementElement::new(degree);
    let per_facet = degree - 1;
    let per_cell = per_facet * per_facet;
    let nv = mesh.num_vertices();
    let nf = mesh.num_facets();
    let num_nodes = nv + nf * per_facet + mesh.num_cells() * per_cell;
    let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let mut dofs = Vec::with_capacity(element.num_dofs());
        for a in 0..element.num_nodes() {
            let node = match element.node_location(a) {
                NodeLocation::Vertex(v) => mesh.cells[c][v],
                NodeLocation::Facet(lf, k) => {
                    let f = mesh.cell_facets[c][lf];
                    let kg = if mesh.local_facet_aligned(c, lf) {
                        k
                    } else {
                        per_facet - 1 - k
                    };
                    nv + f * per_facet + kg
                }
                NodeLocation::Interior(i) => nv + nf * per_facet + c * per_cell + i,
            };
            dofs.push(2 * node);
            dofs.push(2 * node + 1);
        }
        cell_dofs.push(dofs);
    }
    let num_dofs = 2 * num_nodes;
    let mut constrained = vec![false; num_dofs];
    for (f, facet) in mesh.facets.iter().enumerate() {
        let Some(mask) = facet.tag.as_ref().and_then(|t| dirichlet.get(t)) else {
            continue;
        };
        let mut nodes = facet.vertices.to_vec();
        nodes.extend((0..per_facet).map(|k| nv + f * per_facet + k));
        for node in nodes {
            for comp in 0..2 {
                if mask[comp] {
                    constrained[2 * node + comp] = true;
                }
            }
        }
    }
    let n = element.num_dofs();
    Ok(DofMap {
        kind: SpaceKind::Displacement,
        degree,
        num_dofs,
        cell_dofs,
        cell_signs: vec![vec![1.0; n]; mesh.num_cells()],
        constrained,
        free: Vec::new(),
        element: SpaceElement::Displacement(element),
        mesh,
    }
    .finish())
}

/// The three spaces of one discretization, sharing a mesh.
#[derive(Debug, Clone)]
pub struct Spaces {
    pub mesh: Arc<Mesh>,
    pub pressure: DofMap,
    pub flux: DofMap,
    pub displacement: DofMap,
}

impl Spaces {
    /// Pressure degree `s`, flux `RT_s`, displacement degree `s + 1`.
    pub fn new(
        mesh: Arc<Mesh>,
        s: usize,
        no_flow: &BTreeSet<BoundaryTag>,
        dirichlet: &DisplacementConstraints,
    ) -> Result<Self> {
        Ok(Self {
            pressure: build_pressure_space(mesh.clone(), s),
            flux: build_flux_space(mesh.clone(), s, no_flow)?,
            displacement: build_displacement_space(mesh.clone(), s + 1, dirichlet)?,
            mesh,
        })
    }

    pub fn degree(&self) -> usize {
        self.pressure.degree
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_lshape_mesh, build_rectangle_mesh, default_tag, Rect};

    fn square(n: usize) -> Arc<Mesh> {
        Arc::new(build_rectangle_mesh(Rect::unit(), n, n).unwrap())
    }

    #[test]
    fn pressure_counts() {
        assert_eq!(build_pressure_space(square(2), 0).num_dofs(), 4);
        assert_eq!(build_pressure_space(square(2), 1).num_dofs(), 16);
        let l = Arc::new(build_lshape_mesh(1).unwrap());
        assert_eq!(build_pressure_space(l, 0).num_dofs(), 12);
    }

    #[test]
    fn flux_counts() {
        let none = BTreeSet::new();
        let v = build_flux_space(square(2), 0, &none).unwrap();
        assert_eq!(v.num_dofs(), 12);
        assert_eq!(v.num_free(), 12);
        let all = BTreeSet::from([default_tag()]);
        let v = build_flux_space(square(2), 0, &all).unwrap();
        assert_eq!(v.num_free(), 4);
        let bad = BTreeSet::from([BoundaryTag::TractionTop]);
        assert!(matches!(
            build_flux_space(square(2), 0, &bad),
            Err(Error::InvalidBoundarySpec(_))
        ));
    }

    #[test]
    fn flux_facet_dofs_agree_between_neighbors() {
        let none = BTreeSet::new();
        let mesh = Arc::new(build_lshape_mesh(1).unwrap());
        let v = build_flux_space(mesh.clone(), 2, &none).unwrap();
        for f in mesh.interior_facets() {
            let (c0, l0) = mesh.facets[f].owner;
            let (c1, l1) = mesh.facets[f].neighbor.unwrap();
            let d0: BTreeSet<_> = v.cell_dofs(c0)[l0 * 3..l0 * 3 + 3]
                .iter()
                .copied()
                .collect();
            let d1: BTreeSet<_> = v.cell_dofs(c1)[l1 * 3..l1 * 3 + 3]
                .iter()
                .copied()
                .collect();
            assert_eq!(d0, d1);
            assert_eq!(v.cell_signs(c0)[l0 * 3], 1.0);
            assert_eq!(v.cell_signs(c1)[l1 * 3], -1.0);
        }
    }

    #[test]
    fn displacement_counts() {
        let none = DisplacementConstraints::new();
        assert_eq!(
            build_displacement_space(square(2), 1, &none)
                .unwrap()
                .num_dofs(),
            18
        );
        assert_eq!(
            build_displacement_space(square(2), 2, &none)
                .unwrap()
                .num_dofs(),
            50
        );
        let clamp = DisplacementConstraints::from([(default_tag(), [true, true])]);
        assert_eq!(
            build_displacement_space(square(2), 1, &clamp)
                .unwrap()
                .num_free(),
            2
        );
        assert_eq!(
            build_displacement_space(square(2), 2, &clamp)
                .unwrap()
                .num_free(),
            18
        );
    }

    #[test]
    fn displacement_nodes_are_shared_consistently() {
        let none = DisplacementConstraints::new();
        let mesh = Arc::new(build_lshape_mesh(1).unwrap());
        let h = build_displacement_space(mesh.clone(), 3, &none).unwrap();
        let e = h.displacement_element();
        let nodes = h.displacement_nodes();
        for c in 0..mesh.num_cells() {
            let geo = mesh.geometry(c);
            for a in 0..e.num_nodes() {
                let p = geo.map(e.node_point(a));
                let q = nodes[h.cell_dofs(c)[2 * a] / 2];
                assert!((p[0] - q[0]).abs() + (p[1] - q[1]).abs() < 1e-14);
            }
        }
    }
}
