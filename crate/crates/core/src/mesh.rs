//! Conforming quadrilateral meshes with tagged boundary facets.
//!
//! Cells are stored counterclockwise starting at the vertex mapped from the
//! reference corner `(0, 0)`. Local facets follow the reference square:
//! `0` is `x̂ = 0`, `1` is `x̂ = 1`, `2` is `ŷ = 0`, `3` is `ŷ = 1`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quadrature::tensor_rule;

pub type Point = [f64; 2];

/// Local facet endpoints in the direction of increasing reference parameter.
pub const LOCAL_FACETS: [[usize; 2]; 4] = [[0, 3], [1, 2], [0, 1], [3, 2]];

/// Reference outward normals of the local facets.
pub const REFERENCE_NORMALS: [[f64; 2]; 4] = [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    NoFlow,
    OpenFlow,
    TractionTop,
    TractionFree,
    SymmetryX,
    SymmetryY,
    Custom(String),
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryTag::NoFlow => f.write_str("NoFlow"),
            BoundaryTag::OpenFlow => f.write_str("OpenFlow"),
            BoundaryTag::TractionTop => f.write_str("TractionTop"),
            BoundaryTag::TractionFree => f.write_str("TractionFree"),
            BoundaryTag::SymmetryX => f.write_str("SymmetryX"),
            BoundaryTag::SymmetryY => f.write_str("SymmetryY"),
            BoundaryTag::Custom(name) => f.write_str(name),
        }
    }
}

impl FromStr for BoundaryTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "NoFlow" => BoundaryTag::NoFlow,
            "OpenFlow" => BoundaryTag::OpenFlow,
            "TractionTop" => BoundaryTag::TractionTop,
            "TractionFree" => BoundaryTag::TractionFree,
            "SymmetryX" => BoundaryTag::SymmetryX,
            "SymmetryY" => BoundaryTag::SymmetryY,
            "" => return Err(Error::InvalidBoundarySpec("empty boundary tag".into())),
            other => BoundaryTag::Custom(other.to_string()),
        })
    }
}

/// Tag given to every boundary facet of a rectangle mesh.
pub fn default_tag() -> BoundaryTag {
    BoundaryTag::Custom("boundary".into())
}

/// A cell side. `vertices` are sorted ascending, which also fixes the global
/// parametrization direction of the facet.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub vertices: [usize; 2],
    /// `(cell, local facet)` of the owning cell; the global normal is the
    /// owner's outward normal.
    pub owner: (usize, usize),
    pub neighbor: Option<(usize, usize)>,
    pub tag: Option<BoundaryTag>,
}

impl Facet {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<[usize; 4]>,
    pub facets: Vec<Facet>,
    pub cell_facets: Vec<[usize; 4]>,
}

/// Bilinear map of one cell from the reference square.
#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    pub corners: [Point; 4],
}

impl CellGeometry {
    pub fn map(&self, xi: [f64; 2]) -> Point {
        let n = shape(xi);
        let mut p = [0.0; 2];
        for (w, c) in n.iter().zip(&self.corners) {
            p[0] += w * c[0];
            p[1] += w * c[1];
        }
        p
    }

    /// `J[r][c] = d x_r / d xi_c`.
    pub fn jacobian(&self, xi: [f64; 2]) -> [[f64; 2]; 2] {
        let [x, y] = xi;
        let dn = [
            [-(1.0 - y), -(1.0 - x)],
            [1.0 - y, -x],
            [y, x],
            [-y, 1.0 - x],
        ];
        let mut j = [[0.0; 2]; 2];
        for (d, c) in dn.iter().zip(&self.corners) {
            for r in 0..2 {
                j[r][0] += c[r] * d[0];
                j[r][1] += c[r] * d[1];
            }
        }
        j
    }

    pub fn area(&self) -> f64 {
        let c = &self.corners;
        let mut a = 0.0;
        for i in 0..4 {
            let p = c[i];
            let q = c[(i + 1) % 4];
            a += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * a
    }
}

fn shape(xi: [f64; 2]) -> [f64; 4] {
    let [x, y] = xi;
    [(1.0 - x) * (1.0 - y), x * (1.0 - y), x * y, (1.0 - x) * y]
}

pub fn det2(j: &[[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

impl Mesh {
    /// Builds facets and tags from vertices and counterclockwise cells.
    /// `tagger` receives a boundary facet's midpoint and outward unit normal.
    pub fn from_cells(
        vertices: Vec<Point>,
        cells: Vec<[usize; 4]>,
        tagger: impl Fn(Point, [f64; 2]) -> BoundaryTag,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidGeometry("mesh has no cells".into()));
        }
        let mut index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut facets: Vec<Facet> = Vec::new();
        let mut cell_facets = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidGeometry(format!(
                    "cell {c} references a missing vertex"
                )));
            }
            let mut ids = [0; 4];
            for (lf, [a, b]) in LOCAL_FACETS.iter().enumerate() {
                let (a, b) = (cell[*a], cell[*b]);
                let key = [a.min(b), a.max(b)];
                let id = *index.entry(key).or_insert_with(|| {
                    facets.push(Facet {
                        vertices: key,
                        owner: (c, lf),
                        neighbor: None,
                        tag: None,
                    });
                    facets.len() - 1
                });
                if facets[id].owner.0 != c {
                    if facets[id].neighbor.is_some() {
                        return Err(Error::InvalidGeometry(format!(
                            "facet {key:?} shared by more than two cells"
                        )));
                    }
                    facets[id].neighbor = Some((c, lf));
                }
                ids[lf] = id;
            }
            cell_facets.push(ids);
        }
        let mut mesh = Mesh {
            vertices,
            cells,
            facets,
            cell_facets,
        };
        mesh.retag(tagger);
        Ok(mesh)
    }

    /// Reassigns every boundary tag.
    pub fn retag(&mut self, tagger: impl Fn(Point, [f64; 2]) -> BoundaryTag) {
        for f in 0..self.facets.len() {
            if self.facets[f].is_boundary() {
                let tag = tagger(self.facet_midpoint(f), self.facet_normal(f));
                self.facets[f].tag = Some(tag);
            } else {
                self.facets[f].tag = None;
            }
        }
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.facets.len()).filter(|&f| self.facets[f].is_boundary())
    }

    pub fn interior_facets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.facets.len()).filter(|&f| !self.facets[f].is_boundary())
    }

    /// Boundary facets carrying `tag`.
    pub fn facets_with_tag<'a>(&'a self, tag: &'a BoundaryTag) -> impl Iterator<Item = usize> + 'a {
        (0..self.facets.len()).filter(move |&f| self.facets[f].tag.as_ref() == Some(tag))
    }

    /// Distinct tags in first-seen order.
    pub fn tags(&self) -> Vec<BoundaryTag> {
        let mut out: Vec<BoundaryTag> = Vec::new();
        for f in &self.facets {
            if let Some(t) = &f.tag {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
        }
        out
    }

    pub fn geometry(&self, cell: usize) -> CellGeometry {
        let c = self.cells[cell];
        CellGeometry {
            corners: [
                self.vertices[c[0]],
                self.vertices[c[1]],
                self.vertices[c[2]],
                self.vertices[c[3]],
            ],
        }
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        self.geometry(cell).area()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    pub fn cell_center(&self, cell: usize) -> Point {
        self.geometry(cell).map([0.5, 0.5])
    }

    pub fn facet_midpoint(&self, f: usize) -> Point {
        let [a, b] = self.facets[f].vertices;
        let (p, q) = (self.vertices[a], self.vertices[b]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    pub fn facet_length(&self, f: usize) -> f64 {
        let [a, b] = self.facets[f].vertices;
        let (p, q) = (self.vertices[a], self.vertices[b]);
        ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
    }

    /// Outward unit normal of the owning cell.
    pub fn facet_normal(&self, f: usize) -> [f64; 2] {
        let (cell, lf) = self.facets[f].owner;
        let c = self.cells[cell];
        let [a, b] = LOCAL_FACETS[lf];
        let (p, q) = (self.vertices[c[a]], self.vertices[c[b]]);
        let t = [q[0] - p[0], q[1] - p[1]];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        // Rotate the tangent so the normal points away from the cell center.
        let mut n = [t[1] / len, -t[0] / len];
        let center = self.cell_center(cell);
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        if n[0] * (mid[0] - center[0]) + n[1] * (mid[1] - center[1]) < 0.0 {
            n = [-n[0], -n[1]];
        }
        n
    }

    /// `true` if the local facet `lf` of `cell` runs in the facet's global
    /// parametrization direction.
    pub fn local_facet_aligned(&self, cell: usize, lf: usize) -> bool {
        let start = self.cells[cell][LOCAL_FACETS[lf][0]];
        start == self.facets[self.cell_facets[cell][lf]].vertices[0]
    }

    /// Largest facet length.
    pub fn mesh_size(&self) -> f64 {
        (0..self.num_facets())
            .map(|f| self.facet_length(f))
            .fold(0.0, f64::max)
    }

    /// Checks facet ownership, positive Jacobians at the tensor Gauss points
    /// up to `gauss_points` per axis, and that every boundary facet is tagged.
    pub fn validate(&self, gauss_points: usize) -> Result<()> {
        let mut count = vec![0usize; self.facets.len()];
        for ids in &self.cell_facets {
            for &f in ids {
                count[f] += 1;
            }
        }
        for (f, facet) in self.facets.iter().enumerate() {
            let expected = if facet.is_boundary() { 1 } else { 2 };
            if count[f] != expected {
                return Err(Error::InvalidGeometry(format!(
                    "facet {f} owned by {} cells, expected {expected}",
                    count[f]
                )));
            }
            if facet.is_boundary() && facet.tag.is_none() {
                return Err(Error::InvalidGeometry(format!(
                    "boundary facet {f} is untagged"
                )));
            }
        }
        for n in 1..=gauss_points.max(1) {
            let rule = tensor_rule(n);
            for c in 0..self.num_cells() {
                let g = self.geometry(c);
                for (xi, _) in &rule {
                    if det2(&g.jacobian(*xi)) <= 0.0 {
                        return Err(Error::InvalidGeometry(format!(
                            "cell {c} has non-positive Jacobian at {xi:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Plain-text dump for debugging: header, vertex block, cell block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "cells={} vertices={}",
            self.num_cells(),
            self.num_vertices()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "{} {}", v[0], v[1]);
        }
        for c in &self.cells {
            let _ = writeln!(s, "{} {} {} {}", c[0], c[1], c[2], c[3]);
        }
        s
    }
}

/// Structured `nx × ny` grid over `extent`, keeping cells for which
/// `keep(i, j)` holds. Unused vertices are dropped; cells are ordered row by
/// row from the bottom left.
fn masked_grid(
    extent: Rect,
    nx: usize,
    ny: usize,
    keep: impl Fn(usize, usize) -> bool,
    tagger: impl Fn(Point, [f64; 2]) -> BoundaryTag,
) -> Result<Mesh> {
    let mut id = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    let mut vertex = |i: usize, j: usize, vertices: &mut Vec<Point>| {
        let k = j * (nx + 1) + i;
        if id[k] == usize::MAX {
            id[k] = vertices.len();
            vertices.push([
                extent.x0 + (extent.x1 - extent.x0) * i as f64 / nx as f64,
                extent.y0 + (extent.y1 - extent.y0) * j as f64 / ny as f64,
            ]);
        }
        id[k]
    };
    for j in 0..ny {
        for i in 0..nx {
            if keep(i, j) {
                cells.push([
                    vertex(i, j, &mut vertices),
                    vertex(i + 1, j, &mut vertices),
                    vertex(i + 1, j + 1, &mut vertices),
                    vertex(i, j + 1, &mut vertices),
                ]);
            }
        }
    }
    Mesh::from_cells(vertices, cells, tagger)
}

/// Structured tensor mesh of a rectangle; all boundary facets get
/// [`default_tag`].
pub fn build_rectangle_mesh(extent: Rect, nx: usize, ny: usize) -> Result<Mesh> {
    let finite = [extent.x0, extent.x1, extent.y0, extent.y1]
        .iter()
        .all(|v| v.is_finite());
    if !finite || extent.x1 <= extent.x0 || extent.y1 <= extent.y0 {
        return Err(Error::InvalidGeometry(format!(
            "degenerate extent {extent:?}"
        )));
    }
    if nx < 1 || ny < 1 {
        return Err(Error::InvalidGeometry(format!(
            "subdivisions must be >= 1 per axis, got {nx}x{ny}"
        )));
    }
    masked_grid(extent, nx, ny, |_, _| true, |_, _| default_tag())
}

/// Boundary tags of the L-shaped benchmark domain (unit square minus its
/// upper-right quarter):
///
/// * top edge `y = 1`: [`BoundaryTag::TractionTop`] (open flow, loaded),
/// * the two re-entrant edges: [`BoundaryTag::TractionFree`],
/// * left and right edges: [`BoundaryTag::SymmetryX`] (`u_x = 0`),
/// * bottom edge: [`BoundaryTag::SymmetryY`] (`u_y = 0`).
pub fn lshape_tag(mid: Point, normal: [f64; 2]) -> BoundaryTag {
    const EPS: f64 = 1e-9;
    if normal[1] > 0.5 {
        if (mid[1] - 1.0).abs() < EPS {
            BoundaryTag::TractionTop
        } else {
            BoundaryTag::TractionFree
        }
    } else if normal[1] < -0.5 {
        BoundaryTag::SymmetryY
    } else if normal[0] > 0.5 && (mid[0] - 0.5).abs() < EPS {
        BoundaryTag::TractionFree
    } else {
        BoundaryTag::SymmetryX
    }
}

/// Uniform L-shaped mesh with `h = 2^-(level+1)`.
pub fn build_lshape_mesh(level: usize) -> Result<Mesh> {
    if level < 1 {
        return Err(Error::InvalidGeometry(format!(
            "L-shape refinement level must be >= 1, got {level}"
        )));
    }
    if level > 20 {
        return Err(Error::InvalidGeometry(format!(
            "refinement level {level} too large"
        )));
    }
    let n = 1usize << (level + 1);
    let half = n / 2;
    masked_grid(
        Rect::unit(),
        n,
        n,
        |i, j| !(i >= half && j >= half),
        lshape_tag,
    )
}

/// Splits every cell into four children through edge midpoints and the cell
/// center. Boundary tags are inherited from the parent facets.
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh> {
    let nv = mesh.num_vertices();
    let nf = mesh.num_facets();
    let mut vertices = mesh.vertices.clone();
    for f in 0..nf {
        vertices.push(mesh.facet_midpoint(f));
    }
    for c in 0..mesh.num_cells() {
        vertices.push(mesh.cell_center(c));
    }
    let mid = |f: usize| nv + f;
    let mut cells = Vec::with_capacity(4 * mesh.num_cells());
    for (c, v) in mesh.cells.iter().enumerate() {
        let fc = mesh.cell_facets[c];
        let (left, right, bottom, top) = (mid(fc[0]), mid(fc[1]), mid(fc[2]), mid(fc[3]));
        let center = nv + nf + c;
        cells.push([v[0], bottom, center, left]);
        cells.push([bottom, v[1], right, center]);
        cells.push([center, right, v[2], top]);
        cells.push([left, center, top, v[3]]);
    }
    // Child boundary facets are found by their endpoint pair.
    let mut inherited: HashMap<[usize; 2], BoundaryTag> = HashMap::new();
    for f in mesh.boundary_facets() {
        let [a, b] = mesh.facets[f].vertices;
        let tag = mesh.facets[f].tag.clone().unwrap_or_else(default_tag);
        let m = mid(f);
        inherited.insert([a.min(m), a.max(m)], tag.clone());
        inherited.insert([b.min(m), b.max(m)], tag);
    }
    let mut out = Mesh::from_cells(vertices, cells, |_, _| default_tag())?;
    for facet in out.facets.iter_mut().filter(|f| f.is_boundary()) {
        facet.tag = Some(inherited.get(&facet.vertices).cloned().ok_or_else(|| {
            Error::InvalidGeometry("refined boundary facet without parent".into())
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ownership_is_consistent(m: &Mesh) {
        m.validate(4).unwrap();
        let boundary = m.boundary_facets().count();
        let interior = m.interior_facets().count();
        assert_eq!(4 * m.num_cells(), boundary + 2 * interior);
    }

    #[test]
    fn unit_square_two_by_two_counts() {
        let m = build_rectangle_mesh(Rect::unit(), 2, 2).unwrap();
        assert_eq!(m.num_cells(), 4);
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_facets(), 12);
        ownership_is_consistent(&m);
    }

    #[test]
    fn single_cell_has_four_boundary_facets() {
        let m = build_rectangle_mesh(Rect::unit(), 1, 1).unwrap();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.boundary_facets().count(), 4);
        assert_eq!(m.interior_facets().count(), 0);
        assert!(m.facets.iter().all(|f| f.tag == Some(default_tag())));
    }

    #[test]
    fn rectangle_cells_are_congruent() {
        let m = build_rectangle_mesh(Rect::new(0.0, 2.0, 0.0, 1.0), 4, 2).unwrap();
        assert_eq!(m.num_cells(), 8);
        for c in 0..8 {
            assert!((m.cell_area(c) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_rectangles_are_rejected() {
        assert!(matches!(
            build_rectangle_mesh(Rect::new(0.0, 0.0, 0.0, 1.0), 2, 2),
            Err(Error::InvalidGeometry(_))
        ));
        assert!(matches!(
            build_rectangle_mesh(Rect::unit(), 0, 2),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn lshape_counts_area_and_tags() {
        for (m, cells, h) in [(1usize, 12usize, 0.25), (2, 48, 0.125), (3, 192, 0.0625)] {
            let mesh = build_lshape_mesh(m).unwrap();
            assert_eq!(mesh.num_cells(), cells);
            assert!((mesh.mesh_size() - h).abs() < 1e-15);
            assert!((mesh.total_area() - 0.75).abs() < 1e-12 * 0.75);
            ownership_is_consistent(&mesh);
            let top = mesh.facets_with_tag(&BoundaryTag::TractionTop).count();
            assert_eq!(top, 1 << m);
            let free = mesh.facets_with_tag(&BoundaryTag::TractionFree).count();
            assert_eq!(free, 2 << m);
        }
        assert!(matches!(
            build_lshape_mesh(0),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn refinement_quadruples_cells_and_doubles_boundary() {
        let m = build_rectangle_mesh(Rect::unit(), 2, 2).unwrap();
        let r = refine_uniform(&m).unwrap();
        assert_eq!(r.num_cells(), 16);
        assert_eq!(r.boundary_facets().count(), 2 * m.boundary_facets().count());
        assert!((r.total_area() - 1.0).abs() < 1e-12);
        ownership_is_consistent(&r);

        let l = build_lshape_mesh(1).unwrap();
        let lr = refine_uniform(&l).unwrap();
        let l2 = build_lshape_mesh(2).unwrap();
        assert_eq!(lr.num_cells(), l2.num_cells());
        for tag in l.tags() {
            assert_eq!(
                lr.facets_with_tag(&tag).count(),
                l2.facets_with_tag(&tag).count()
            );
        }
    }

    #[test]
    fn text_export_has_header() {
        let m = build_rectangle_mesh(Rect::unit(), 1, 1).unwrap();
        let text = m.to_text();
        assert!(text.starts_with("cells=1 vertices=4\n"));
        assert_eq!(text.lines().count(), 1 + 4 + 1);
    }

    #[test]
    fn tags_parse_back() {
        for t in [
            "NoFlow",
            "OpenFlow",
            "TractionTop",
            "TractionFree",
            "SymmetryX",
            "SymmetryY",
            "inlet",
        ] {
            assert_eq!(t.parse::<BoundaryTag>().unwrap().to_string(), t);
        }
    }
}
