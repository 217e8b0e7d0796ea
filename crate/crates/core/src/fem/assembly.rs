//! Cell-by-cell assembly of the bilinear forms and load vectors.

use crate::error::{Error, Result};
use crate::fem::space::DofMap;
use crate::mesh::{det2, CellGeometry, Mesh, Point};
use crate::quadrature::{gauss_nodes, tensor_rule};
use crate::sparse::SparseMatrix;

/// Mapped quadrature point of one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellPoint {
    pub xi: [f64; 2],
    pub x: Point,
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    /// Reference weight times `det`.
    pub weight: f64,
}

pub fn cell_points(geo: &CellGeometry, points_per_axis: usize) -> Vec<CellPoint> {
    tensor_rule(points_per_axis)
        .into_iter()
        .map(|(xi, w)| {
            let jac = geo.jacobian(xi);
            let det = det2(&jac);
            CellPoint {
                xi,
                x: geo.map(xi),
                jac,
                det,
                weight: w * det,
            }
        })
        .collect()
}

fn inverse_transpose(j: &[[f64; 2]; 2], det: f64) -> [[f64; 2]; 2] {
    [
        [j[1][1] / det, -j[1][0] / det],
        [-j[0][1] / det, j[0][0] / det],
    ]
}

/// Piola image `J v̂ / det J` of reference flux values.
pub fn piola(p: &CellPoint, v: [f64; 2]) -> [f64; 2] {
    [
        (p.jac[0][0] * v[0] + p.jac[0][1] * v[1]) / p.det,
        (p.jac[1][0] * v[0] + p.jac[1][1] * v[1]) / p.det,
    ]
}

/// Physical gradients of the scalar displacement shape functions.
pub fn physical_gradients(h: &DofMap, p: &CellPoint) -> Vec<[f64; 2]> {
    let g = inverse_transpose(&p.jac, p.det);
    h.displacement_element()
        .gradients(p.xi)
        .into_iter()
        .map(|d| {
            [
                g[0][0] * d[0] + g[0][1] * d[1],
                g[1][0] * d[0] + g[1][1] * d[1],
            ]
        })
        .collect()
}

struct Scatter {
    triplets: Vec<(usize, usize, f64)>,
}

impl Scatter {
    fn new() -> Self {
        Self {
            triplets: Vec::new(),
        }
    }

    fn add_local(
        &mut self,
        rows: &[usize],
        rsign: &[f64],
        cols: &[usize],
        csign: &[f64],
        local: &[f64],
    ) {
        let nc = cols.len();
        for (a, &r) in rows.iter().enumerate() {
            for (b, &c) in cols.iter().enumerate() {
                let v = local[a * nc + b];
                if v != 0.0 {
                    self.triplets.push((r, c, rsign[a] * csign[b] * v));
                }
            }
        }
    }

    fn finish(self, nrows: usize, ncols: usize) -> SparseMatrix {
        SparseMatrix::from_triplets(nrows, ncols, &self.triplets)
    }
}

/// `⟨p, w⟩` on the pressure space.
pub fn assemble_pressure_mass(w: &DofMap) -> SparseMatrix {
    let e = w.pressure_element();
    let n = e.num_dofs();
    let mut out = Scatter::new();
    for c in 0..w.mesh.num_cells() {
        let mut local = vec![0.0; n * n];
        for p in cell_points(&w.mesh.geometry(c), w.degree + 2) {
            let v = e.values(p.xi);
            for a in 0..n {
                for b in 0..n {
                    local[a * n + b] += p.weight * v[a] * v[b];
                }
            }
        }
        let dofs = w.cell_dofs(c);
        out.add_local(dofs, w.cell_signs(c), dofs, w.cell_signs(c), &local);
    }
    out.finish(w.num_dofs(), w.num_dofs())
}

/// Inverse of a symmetric positive definite 2×2 tensor.
pub fn spd_inverse(k: [[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let sym = (k[0][1] - k[1][0]).abs() <= 1e-12 * (k[0][0].abs() + k[1][1].abs());
    let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    if !sym || !(k[0][0] > 0.0) || !(det > 0.0) {
        return Err(Error::InvalidMaterial(format!(
            "permeability {k:?} is not symmetric positive definite"
        )));
    }
    Ok([
        [k[1][1] / det, -k[0][1] / det],
        [-k[1][0] / det, k[0][0] / det],
    ])
}

/// `⟨K⁻¹ q, v⟩` on the flux space.
pub fn assemble_flux_mass(v: &DofMap, k: [[f64; 2]; 2]) -> Result<SparseMatrix> {
    let kinv = spd_inverse(k)?;
    let e = v.flux_element();
    let n = e.num_dofs();
    let mut out = Scatter::new();
    for c in 0..v.mesh.num_cells() {
        let mut local = vec![0.0; n * n];
        for p in cell_points(&v.mesh.geometry(c), v.degree + 2) {
            let phys: Vec<[f64; 2]> = e.values(p.xi).into_iter().map(|r| piola(&p, r)).collect();
            let kphys: Vec<[f64; 2]> = phys
                .iter()
                .map(|q| {
                    [
                        kinv[0][0] * q[0] + kinv[0][1] * q[1],
                        kinv[1][0] * q[0] + kinv[1][1] * q[1],
                    ]
                })
                .collect();
            for a in 0..n {
                for b in 0..n {
                    local[a * n + b] +=
                        p.weight * (phys[a][0] * kphys[b][0] + phys[a][1] * kphys[b][1]);
                }
            }
        }
        let dofs = v.cell_dofs(c);
        out.add_local(dofs, v.cell_signs(c), dofs, v.cell_signs(c), &local);
    }
    Ok(out.finish(v.num_dofs(), v.num_dofs()))
}

/// `⟨∇·v, w⟩`: rows are pressure dofs, columns flux dofs.
pub fn assemble_div(v: &DofMap, w: &DofMap) -> SparseMatrix {
    let ev = v.flux_element();
    let ew = w.pressure_element();
    let (nv, nw) = (ev.num_dofs(), ew.num_dofs());
    let mut out = Scatter::new();
    for c in 0..v.mesh.num_cells() {
        let mut local = vec![0.0; nw * nv];
        for p in cell_points(&v.mesh.geometry(c), v.degree.max(w.degree) + 2) {
            // div v = div̂ v̂ / det J, and the weight carries det J.
            let ref_w = p.weight / p.det;
            let d = ev.divergences(p.xi);
            let q = ew.values(p.xi);
            for a in 0..nw {
                for b in 0..nv {
                    local[a * nv + b] += ref_w * q[a] * d[b];
                }
            }
        }
        out.add_local(
            w.cell_dofs(c),
            w.cell_signs(c),
            v.cell_dofs(c),
            v.cell_signs(c),
            &local,
        );
    }
    out.finish(w.num_dofs(), v.num_dofs())
}

/// `2μ⟨ε(u), ε(z)⟩ + λ⟨∇·u, ∇·z⟩`.
pub fn assemble_elasticity(h: &DofMap, mu: f64, lambda: f64) -> SparseMatrix {
    let nn = h.displacement_element().num_nodes();
    let n = 2 * nn;
    let mut out = Scatter::new();
    for c in 0..h.mesh.num_cells() {
        let mut local = vec![0.0; n * n];
        for p in cell_points(&h.mesh.geometry(c), h.degree + 1) {
            let g = physical_gradients(h, &p);
            for a in 0..nn {
                for b in 0..nn {
                    let dot = g[a][0] * g[b][0] + g[a][1] * g[b][1];
                    for ci in 0..2 {
                        for di in 0..2 {
                            let mut v = mu * g[a][di] * g[b][ci] + lambda * g[a][ci] * g[b][di];
                            if ci == di {
                                v += mu * dot;
                            }
                            local[(2 * a + ci) * n + 2 * b + di] += p.weight * v;
                        }
                    }
                }
            }
        }
        let dofs = h.cell_dofs(c);
        out.add_local(dofs, h.cell_signs(c), dofs, h.cell_signs(c), &local);
    }
    out.finish(h.num_dofs(), h.num_dofs())
}

/// `b⟨p, ∇·z⟩`: rows are displacement dofs, columns pressure dofs.
pub fn assemble_coupling(w: &DofMap, h: &DofMap, b: f64) -> SparseMatrix {
    let ew = w.pressure_element();
    let nn = h.displacement_element().num_nodes();
    let (nw, nh) = (ew.num_dofs(), 2 * nn);
    let mut out = Scatter::new();
    for c in 0..h.mesh.num_cells() {
        let mut local = vec![0.0; nh * nw];
        for p in cell_points(&h.mesh.geometry(c), w.degree.max(h.degree) + 2) {
            let g = physical_gradients(h, &p);
            let q = ew.values(p.xi);
            for a in 0..nn {
                for comp in 0..2 {
                    for k in 0..nw {
                        local[(2 * a + comp) * nw + k] += p.weight * b * g[a][comp] * q[k];
                    }
                }
            }
        }
        out.add_local(
            h.cell_dofs(c),
            h.cell_signs(c),
            w.cell_dofs(c),
            w.cell_signs(c),
            &local,
        );
    }
    out.finish(h.num_dofs(), w.num_dofs())
}

/// `⟨u, z⟩` on the displacement space, used for error norms.
pub fn assemble_displacement_mass(h: &DofMap) -> SparseMatrix {
    let e = h.displacement_element();
    let nn = e.num_nodes();
    let n = 2 * nn;
    let mut out = Scatter::new();
    for c in 0..h.mesh.num_cells() {
        let mut local = vec![0.0; n * n];
        for p in cell_points(&h.mesh.geometry(c), h.degree + 2) {
            let v = e.values(p.xi);
            for a in 0..nn {
                for b in 0..nn {
                    let m = p.weight * v[a] * v[b];
                    local[(2 * a) * n + 2 * b] += m;
                    local[(2 * a + 1) * n + 2 * b + 1] += m;
                }
            }
        }
        let dofs = h.cell_dofs(c);
        out.add_local(dofs, h.cell_signs(c), dofs, h.cell_signs(c), &local);
    }
    out.finish(h.num_dofs(), h.num_dofs())
}

/// `⟨f, w⟩` on the pressure space.
pub fn assemble_source(w: &DofMap, f: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let e = w.pressure_element();
    let mut out = vec![0.0; w.num_dofs()];
    for c in 0..w.mesh.num_cells() {
        let dofs = w.cell_dofs(c);
        for p in cell_points(&w.mesh.geometry(c), w.degree + 4) {
            let fx = f(p.x);
            for (a, v) in e.values(p.xi).into_iter().enumerate() {
                out[dofs[a]] += p.weight * fx * v;
            }
        }
    }
    out
}

/// `⟨g, z⟩` on the displacement space.
pub fn assemble_body_force(h: &DofMap, g: &dyn Fn(Point) -> [f64; 2]) -> Vec<f64> {
    let e = h.displacement_element();
    let mut out = vec![0.0; h.num_dofs()];
    for c in 0..h.mesh.num_cells() {
        let dofs = h.cell_dofs(c);
        for p in cell_points(&h.mesh.geometry(c), h.degree + 4) {
            let gx = g(p.x);
            for (a, v) in e.values(p.xi).into_iter().enumerate() {
                out[dofs[2 * a]] += p.weight * gx[0] * v;
                out[dofs[2 * a + 1]] += p.weight * gx[1] * v;
            }
        }
    }
    out
}

/// Reference point on local facet `lf` at parameter `t`.
pub fn facet_point(lf: usize, t: f64) -> [f64; 2] {
    match lf {
        0 => [0.0, t],
        1 => [1.0, t],
        2 => [t, 0.0],
        _ => [t, 1.0],
    }
}

/// Boundary facets of `mesh` selected by `pick`, with a quadrature along
/// each: `(owning cell, local facet, ŝ, physical point, outward normal,
/// weight times facet length)`.
fn boundary_points<'a>(
    mesh: &'a Mesh,
    pick: &'a dyn Fn(usize) -> bool,
    points: usize,
) -> impl Iterator<Item = (usize, usize, f64, Point, [f64; 2], f64)> + 'a {
    let rule = gauss_nodes(points).expect("points >= 1");
    mesh.boundary_facets()
        .filter(move |&f| pick(f))
        .flat_map(move |f| {
            let (c, lf) = mesh.facets[f].owner;
            let geo = mesh.geometry(c);
            let len = mesh.facet_length(f);
            let n = mesh.facet_normal(f);
            rule.nodes
                .clone()
                .into_iter()
                .zip(rule.weights.clone())
                .map(move |(t, w)| (c, lf, t, geo.map(facet_point(lf, t)), n, w * len))
        })
}

/// `-∫ p_D v·n` over the selected boundary facets: the natural pressure
/// condition in the Darcy equation.
pub fn assemble_boundary_pressure(
    v: &DofMap,
    pick: &dyn Fn(usize) -> bool,
    p_d: &dyn Fn(Point) -> f64,
) -> Vec<f64> {
    let e = v.flux_element();
    let per = e.dofs_per_facet();
    let mut out = vec![0.0; v.num_dofs()];
    for (c, lf, t, x, _n, wl) in boundary_points(&v.mesh, pick, v.degree + 4) {
        // v̂·n̂ dŝ equals v·n ds under the Piola map; the reference facet has
        // unit length, so divide the physical length back out.
        let len = v.mesh.facet_length(v.mesh.cell_facets[c][lf]);
        let vals = e.values(facet_point(lf, t));
        let nref = crate::mesh::REFERENCE_NORMALS[lf];
        let pd = p_d(x);
        for k in 0..per {
            let a = lf * per + k;
            let flux = vals[a][0] * nref[0] + vals[a][1] * nref[1];
            out[v.cell_dofs(c)[a]] -= v.cell_signs(c)[a] * pd * flux * wl / len;
        }
    }
    out
}

/// `∫ t·z` over the selected boundary facets.
pub fn assemble_traction(
    h: &DofMap,
    pick: &dyn Fn(usize) -> bool,
    traction: &dyn Fn(Point, [f64; 2]) -> [f64; 2],
) -> Vec<f64> {
    let e = h.displacement_element();
    let mut out = vec![0.0; h.num_dofs()];
    for (c, lf, t, x, n, wl) in boundary_points(&h.mesh, pick, h.degree + 4) {
        let tr = traction(x, n);
        let dofs = h.cell_dofs(c);
        for (a, v) in e.values(facet_point(lf, t)).into_iter().enumerate() {
            if v != 0.0 {
                out[dofs[2 * a]] += wl * tr[0] * v;
                out[dofs[2 * a + 1]] += wl * tr[1] * v;
            }
        }
    }
    out
}

/// Pressure field value at a reference point of a cell.
pub fn eval_pressure(w: &DofMap, coeffs: &[f64], cell: usize, xi: [f64; 2]) -> f64 {
    let dofs = w.cell_dofs(cell);
    w.pressure_element()
        .values(xi)
        .iter()
        .zip(dofs)
        .map(|(v, &d)| v * coeffs[d])
        .sum()
}

pub fn eval_flux(v: &DofMap, coeffs: &[f64], cell: usize, xi: [f64; 2]) -> [f64; 2] {
    let geo = v.mesh.geometry(cell);
    let jac = geo.jacobian(xi);
    let p = CellPoint {
        xi,
        x: geo.map(xi),
        jac,
        det: det2(&jac),
        weight: 0.0,
    };
    let mut r = [0.0; 2];
    for ((val, &d), s) in v
        .flux_element()
        .values(xi)
        .iter()
        .zip(v.cell_dofs(cell))
        .zip(v.cell_signs(cell))
    {
        r[0] += s * coeffs[d] * val[0];
        r[1] += s * coeffs[d] * val[1];
    }
    piola(&p, r)
}

pub fn eval_displacement(h: &DofMap, coeffs: &[f64], cell: usize, xi: [f64; 2]) -> [f64; 2] {
    let dofs = h.cell_dofs(cell);
    let mut u = [0.0; 2];
    for (a, v) in h.displacement_element().values(xi).into_iter().enumerate() {
        u[0] += v * coeffs[dofs[2 * a]];
        u[1] += v * coeffs[dofs[2 * a + 1]];
    }
    u
}

/// Nodal interpolant of a vector field into the displacement space.
pub fn interpolate_displacement(h: &DofMap, u: &dyn Fn(Point) -> [f64; 2]) -> Vec<f64> {
    let mut out = vec![0.0; h.num_dofs()];
    for (node, x) in h.displacement_nodes().into_iter().enumerate() {
        let v = u(x);
        out[2 * node] = v[0];
        out[2 * node + 1] = v[1];
    }
    out
}

/// L² projection of a scalar field onto the (cell-local) pressure space.
pub fn project_pressure(w: &DofMap, p: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let e = w.pressure_element();
    let n = e.num_dofs();
    let mut out = vec![0.0; w.num_dofs()];
    for c in 0..w.mesh.num_cells() {
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
        let mut rhs = nalgebra::DVector::<f64>::zeros(n);
        for q in cell_points(&w.mesh.geometry(c), w.degree + 4) {
            let v = e.values(q.xi);
            let pv = p(q.x);
            for a in 0..n {
                rhs[a] += q.weight * pv * v[a];
                for b in 0..n {
                    m[(a, b)] += q.weight * v[a] * v[b];
                }
            }
        }
        let x = m.lu().solve(&rhs).expect("local mass matrix is SPD");
        for (a, &d) in w.cell_dofs(c).iter().enumerate() {
            out[d] = x[a];
        }
    }
    out
}

/// `‖p_h − p‖_{L²(Ω)}` with `points_per_axis` Gauss points per cell.
pub fn pressure_l2_error(w: &DofMap, coeffs: &[f64], exact: &dyn Fn(Point) -> f64) -> f64 {
    let mut sum = 0.0;
    for c in 0..w.mesh.num_cells() {
        for p in cell_points(&w.mesh.geometry(c), w.degree + 5) {
            let e = eval_pressure(w, coeffs, c, p.xi) - exact(p.x);
            sum += p.weight * e * e;
        }
    }
    sum.sqrt()
}

pub fn flux_l2_error(v: &DofMap, coeffs: &[f64], exact: &dyn Fn(Point) -> [f64; 2]) -> f64 {
    let mut sum = 0.0;
    for c in 0..v.mesh.num_cells() {
        for p in cell_points(&v.mesh.geometry(c), v.degree + 5) {
            let q = eval_flux(v, coeffs, c, p.xi);
            let ex = exact(p.x);
            sum += p.weight * ((q[0] - ex[0]).powi(2) + (q[1] - ex[1]).powi(2));
        }
    }
    sum.sqrt()
}

pub fn displacement_l2_error(h: &DofMap, coeffs: &[f64], exact: &dyn Fn(Point) -> [f64; 2]) -> f64 {
    let mut sum = 0.0;
    for c in 0..h.mesh.num_cells() {
        for p in cell_points(&h.mesh.geometry(c), h.degree + 5) {
            let u = eval_displacement(h, coeffs, c, p.xi);
            let ex = exact(p.x);
            sum += p.weight * ((u[0] - ex[0]).powi(2) + (u[1] - ex[1]).powi(2));
        }
    }
    sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::space::{
        build_displacement_space, build_flux_space, build_pressure_space, DisplacementConstraints,
    };
    use crate::mesh::{build_lshape_mesh, build_rectangle_mesh, default_tag, Rect};
    use std::collections::BTreeSet;
    use std::sync::Arc;

    fn square(n: usize) -> Arc<Mesh> {
        Arc::new(build_rectangle_mesh(Rect::unit(), n, n).unwrap())
    }

    #[test]
    fn pressure_mass_is_diagonal_with_areas() {
        let m = assemble_pressure_mass(&build_pressure_space(square(1), 0));
        assert!((m.get(0, 0) - 1.0).abs() < 1e-15);
        let m = assemble_pressure_mass(&build_pressure_space(square(2), 0));
        for i in 0..4 {
            assert!((m.get(i, i) - 0.25).abs() < 1e-15);
        }
        assert_eq!(m.nnz(), 4);
        let w = build_pressure_space(Arc::new(build_lshape_mesh(1).unwrap()), 2);
        let m = assemble_pressure_mass(&w);
        let sums = m.mul_vec(&vec![1.0; w.num_dofs()]);
        let total: f64 = sums.iter().sum();
        assert!((total - 0.75).abs() < 1e-13);
    }

    #[test]
    fn flux_mass_scales_with_inverse_permeability() {
        let v = build_flux_space(square(2), 1, &BTreeSet::new()).unwrap();
        let a = assemble_flux_mass(&v, [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let b = assemble_flux_mass(&v, [[0.1, 0.0], [0.0, 0.1]]).unwrap();
        for (r, c, x) in a.triplets() {
            assert!((b.get(r, c) - 10.0 * x).abs() < 1e-12 * x.abs().max(1.0));
        }
        assert!(matches!(
            assemble_flux_mass(&v, [[1.0, 0.0], [0.0, -1.0]]),
            Err(Error::InvalidMaterial(_))
        ));
    }

    #[test]
    fn rt0_unit_cell_mass_matches_hand_values() {
        // Reference RT_0 on the unit cell: v0 = (x-1, 0), v1 = (x, 0),
        // v2 = (0, y-1), v3 = (0, y).
        let v = build_flux_space(square(1), 0, &BTreeSet::new()).unwrap();
        let m = assemble_flux_mass(&v, [[1.0, 0.0], [0.0, 1.0]])
            .unwrap()
            .to_dense();
        let signs = v.cell_signs(0);
        let d = v.cell_dofs(0);
        for a in 0..4 {
            for b in 0..4 {
                let got = m[(d[a], d[b])] * signs[a] * signs[b];
                let want = match (a == b, a / 2 == b / 2) {
                    (true, _) => 1.0 / 3.0,
                    (false, true) => -1.0 / 6.0,
                    _ => 0.0,
                };
                assert!((got - want).abs() < 1e-14, "{a} {b}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn div_on_unit_cell_is_plus_one_per_facet() {
        let v = build_flux_space(square(1), 0, &BTreeSet::new()).unwrap();
        let w = build_pressure_space(square(1), 0);
        let b = assemble_div(&v, &w);
        for a in 0..4 {
            let d = v.cell_dofs(0)[a];
            assert!((b.get(0, d) - v.cell_signs(0)[a]).abs() < 1e-14);
        }
    }

    #[test]
    fn elasticity_energy_and_kernel() {
        let (mu, lambda) = (0.7, 1.9);
        let h = build_displacement_space(square(1), 1, &DisplacementConstraints::new()).unwrap();
        let a = assemble_elasticity(&h, mu, lambda);
        let u = interpolate_displacement(&h, &|x| [x[0], 0.0]);
        let au = a.mul_vec(&u);
        let energy: f64 = au.iter().zip(&u).map(|(x, y)| x * y).sum();
        assert!((energy - (2.0 * mu + lambda)).abs() < 1e-12);
        for f in [
            &(|_x: Point| [1.0, 0.0]) as &dyn Fn(Point) -> [f64; 2],
            &|_x| [0.0, 1.0],
            &|x| [-x[1], x[0]],
        ] {
            let u = interpolate_displacement(&h, f);
            assert!(a.mul_vec(&u).iter().all(|v| v.abs() < 1e-11));
        }
    }

    #[test]
    fn coupling_value_is_b() {
        let w = build_pressure_space(square(1), 0);
        let h = build_displacement_space(square(1), 1, &DisplacementConstraints::new()).unwrap();
        let c = assemble_coupling(&w, &h, 3.5);
        let z = interpolate_displacement(&h, &|x| [x[0], 0.0]);
        let mut out = vec![0.0; 1];
        c.mul_transpose_vec_add(1.0, &z, &mut out);
        assert!((out[0] - 3.5).abs() < 1e-13);
    }

    #[test]
    fn sources_and_traction() {
        let w = build_pressure_space(square(2), 0);
        let f = assemble_source(&w, &|_| 1.0);
        assert!(f.iter().all(|v| (v - 0.25).abs() < 1e-14));
        let clamp = DisplacementConstraints::from([(default_tag(), [false, false])]);
        let h = build_displacement_space(square(2), 2, &clamp).unwrap();
        let all = |_f: usize| true;
        let t = assemble_traction(&h, &all, &|_, n| n);
        // ∫ n over a closed boundary vanishes.
        let sx: f64 = t.iter().step_by(2).sum();
        let sy: f64 = t.iter().skip(1).step_by(2).sum();
        assert!(sx.abs() < 1e-13 && sy.abs() < 1e-13);
    }

    #[test]
    fn boundary_pressure_matches_divergence_identity() {
        // ⟨p, ∇·v⟩ = ∫ p v·n for p ≡ 1, so the load equals minus the
        // column sums of the divergence operator.
        let mesh = Arc::new(build_lshape_mesh(1).unwrap());
        let v = build_flux_space(mesh.clone(), 1, &BTreeSet::new()).unwrap();
        let w = build_pressure_space(mesh, 1);
        let b = assemble_div(&v, &w);
        let ones = project_pressure(&w, &|_| 1.0);
        let mut col = vec![0.0; v.num_dofs()];
        b.mul_transpose_vec_add(1.0, &ones, &mut col);
        let load = assemble_boundary_pressure(&v, &|_| true, &|_| 1.0);
        for (a, b) in load.iter().zip(&col) {
            assert!((a + b).abs() < 1e-13);
        }
    }
}
