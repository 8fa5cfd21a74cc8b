//! Global P1 assembly of mass, stiffness and boundary-mass operators.
//!
//! Nodal coefficients are interpolated linearly inside elements. Volume
//! mass terms use the 4-point degree-2 tet rule, boundary mass the
//! 3-point midpoint triangle rule; stiffness integrands are piecewise
//! constant-times-linear and integrate exactly with the element mean of
//! the coefficient.

use alloc::vec;
use alloc::vec::Vec;

use super::element::mesh_element_gradients;
use super::quadrature::{TET_DEG2, TRI_DEG2};
use super::sparse::SparseOperator;
use crate::error::CoreError;
use crate::geo;
use crate::mesh::{BoundarySurface, Subdomain, TetMesh};

/// Coefficient inside an assembly integral: a constant or a nodal field
/// in the subdomain's local numbering.
#[derive(Clone, Copy)]
pub enum Coeff<'a> {
    Const(f64),
    Nodal(&'a [f64]),
}

impl<'a> Coeff<'a> {
    fn validate(&self, n_local: usize) -> Result<(), CoreError> {
        match self {
            Coeff::Const(c) => {
                if *c < 0.0 {
                    return Err(CoreError::NegativeCoefficient { node: 0, value: *c });
                }
            }
            Coeff::Nodal(field) => {
                if field.len() != n_local {
                    return Err(CoreError::FieldSizeMismatch {
                        expected: n_local,
                        got: field.len(),
                    });
                }
                for (i, &v) in field.iter().enumerate() {
                    if v < 0.0 {
                        return Err(CoreError::NegativeCoefficient { node: i, value: v });
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn at_local(&self, local: usize) -> f64 {
        match self {
            Coeff::Const(c) => *c,
            Coeff::Nodal(f) => f[local],
        }
    }
}

/// Sparsity pattern of the P1 node-adjacency graph on a subdomain.
pub fn subdomain_pattern(mesh: &TetMesh, sub: &Subdomain) -> Vec<Vec<usize>> {
    let n = sub.n_nodes();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &t in &sub.tets {
        let loc = sub.local_tet(mesh, t);
        for &a in &loc {
            for &b in &loc {
                rows[a].push(b);
            }
        }
    }
    for row in &mut rows {
        row.sort_unstable();
        row.dedup();
    }
    rows
}

/// Stiffness operator: integral of coeff * grad(phi_a) . grad(phi_b).
/// Symmetric positive semidefinite; constants lie in the kernel when
/// the coefficient covers the whole subdomain.
pub fn assemble_stiffness(
    mesh: &TetMesh,
    sub: &Subdomain,
    coeff: Coeff<'_>,
) -> Result<SparseOperator, CoreError> {
    coeff.validate(sub.n_nodes())?;
    let rows = subdomain_pattern(mesh, sub);
    let mut op = SparseOperator::from_pattern(sub.n_nodes(), sub.n_nodes(), &rows, true);
    for &t in &sub.tets {
        let (grads, vol) = mesh_element_gradients(mesh, t)?;
        let loc = sub.local_tet(mesh, t);
        // integrand is (const gradients) x (linear coeff): the element
        // mean of the coefficient integrates it exactly
        let cbar = loc.iter().map(|&l| coeff.at_local(l)).sum::<f64>() / 4.0;
        for a in 0..4 {
            for b in 0..4 {
                op.add(loc[a], loc[b], cbar * vol * geo::dot(grads[a], grads[b]));
            }
        }
    }
    Ok(op)
}

/// Directional stiffness: integral of coeff * d_k(phi_a) * d_l(phi_b).
/// Building block for the componentwise viscous operator.
pub fn assemble_directional_stiffness(
    mesh: &TetMesh,
    sub: &Subdomain,
    coeff: Coeff<'_>,
    k: usize,
    l: usize,
) -> Result<SparseOperator, CoreError> {
    coeff.validate(sub.n_nodes())?;
    let rows = subdomain_pattern(mesh, sub);
    let mut op = SparseOperator::from_pattern(sub.n_nodes(), sub.n_nodes(), &rows, k == l);
    for &t in &sub.tets {
        let (grads, vol) = mesh_element_gradients(mesh, t)?;
        let loc = sub.local_tet(mesh, t);
        let cbar = loc.iter().map(|&l2| coeff.at_local(l2)).sum::<f64>() / 4.0;
        for a in 0..4 {
            for b in 0..4 {
                op.add(loc[a], loc[b], cbar * vol * grads[a][k] * grads[b][l]);
            }
        }
    }
    Ok(op)
}

/// Mass operator: integral of coeff * phi_a * phi_b via the 4-point rule.
/// Symmetric positive definite for strictly positive coefficients.
pub fn assemble_mass(
    mesh: &TetMesh,
    sub: &Subdomain,
    coeff: Coeff<'_>,
) -> Result<SparseOperator, CoreError> {
    coeff.validate(sub.n_nodes())?;
    let rows = subdomain_pattern(mesh, sub);
    let mut op = SparseOperator::from_pattern(sub.n_nodes(), sub.n_nodes(), &rows, true);
    for &t in &sub.tets {
        let vol = mesh.tet_volume(t);
        let loc = sub.local_tet(mesh, t);
        let cv: [f64; 4] = [
            coeff.at_local(loc[0]),
            coeff.at_local(loc[1]),
            coeff.at_local(loc[2]),
            coeff.at_local(loc[3]),
        ];
        let mut local = [[0.0; 4]; 4];
        for (bary, w) in TET_DEG2 {
            let cq: f64 = (0..4).map(|i| cv[i] * bary[i]).sum();
            let wc = w * vol * cq;
            for a in 0..4 {
                for b in 0..4 {
                    local[a][b] += wc * bary[a] * bary[b];
                }
            }
        }
        for a in 0..4 {
            for b in 0..4 {
                op.add(loc[a], loc[b], local[a][b]);
            }
        }
    }
    Ok(op)
}

/// Boundary-mass operator over the artery wall: integral of
/// coeff * phi_a * phi_b on the surface triangles. `coeff` is a global
/// nodal field (length = mesh nodes); the operator lives in `sub`'s
/// numbering and its rows vanish off the surface.
pub fn assemble_boundary_mass(
    mesh: &TetMesh,
    surface: &BoundarySurface,
    sub: &Subdomain,
    coeff: &[f64],
) -> Result<SparseOperator, CoreError> {
    if coeff.len() != mesh.n_nodes() {
        return Err(CoreError::FieldSizeMismatch {
            expected: mesh.n_nodes(),
            got: coeff.len(),
        });
    }
    for &n in &surface.nodes {
        let v = coeff[n];
        if !v.is_finite() {
            return Err(CoreError::MissingSurfaceCoefficient { node: n });
        }
        if v < 0.0 {
            return Err(CoreError::NegativeCoefficient { node: n, value: v });
        }
    }
    // pattern from surface triangles only: interior rows stay empty
    let n = sub.n_nodes();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut local_tris: Vec<[usize; 3]> = Vec::with_capacity(surface.n_triangles());
    for tri in &surface.triangles {
        let loc = [
            sub.local_of(tri[0])
                .ok_or(CoreError::MissingSurfaceCoefficient { node: tri[0] })?,
            sub.local_of(tri[1])
                .ok_or(CoreError::MissingSurfaceCoefficient { node: tri[1] })?,
            sub.local_of(tri[2])
                .ok_or(CoreError::MissingSurfaceCoefficient { node: tri[2] })?,
        ];
        for &a in &loc {
            for &b in &loc {
                rows[a].push(b);
            }
        }
        local_tris.push(loc);
    }
    for row in &mut rows {
        row.sort_unstable();
        row.dedup();
    }
    let mut op = SparseOperator::from_pattern(n, n, &rows, true);
    for (i, tri) in surface.triangles.iter().enumerate() {
        let area = surface.areas[i];
        let loc = local_tris[i];
        let cv = [coeff[tri[0]], coeff[tri[1]], coeff[tri[2]]];
        let mut local = [[0.0; 3]; 3];
        for (bary, w) in TRI_DEG2 {
            let cq: f64 = (0..3).map(|k| cv[k] * bary[k]).sum();
            let wc = w * area * cq;
            for a in 0..3 {
                for b in 0..3 {
                    local[a][b] += wc * bary[a] * bary[b];
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                op.add(loc[a], loc[b], local[a][b]);
            }
        }
    }
    Ok(op)
}

/// Load vector for a pointwise source: integral of f(x) * phi_a via the
/// 4-point rule.
pub fn assemble_load<F: Fn([f64; 3]) -> f64>(
    mesh: &TetMesh,
    sub: &Subdomain,
    f: F,
) -> Result<Vec<f64>, CoreError> {
    let mut out = vec![0.0; sub.n_nodes()];
    for &t in &sub.tets {
        let vol = mesh.tet_volume(t);
        let coords = mesh.tet_coords(t);
        let loc = sub.local_tet(mesh, t);
        for (bary, w) in TET_DEG2 {
            let mut x = [0.0; 3];
            for i in 0..4 {
                x[0] += bary[i] * coords[i][0];
                x[1] += bary[i] * coords[i][1];
                x[2] += bary[i] * coords[i][2];
            }
            let fv = f(x);
            for a in 0..4 {
                out[loc[a]] += w * vol * fv * bary[a];
            }
        }
    }
    Ok(out)
}

/// Surface load vector: integral of s * phi_a over the wall with `s` a
/// global nodal field supported on surface nodes.
pub fn assemble_surface_load(
    mesh: &TetMesh,
    surface: &BoundarySurface,
    sub: &Subdomain,
    s: &[f64],
) -> Result<Vec<f64>, CoreError> {
    if s.len() != mesh.n_nodes() {
        return Err(CoreError::FieldSizeMismatch {
            expected: mesh.n_nodes(),
            got: s.len(),
        });
    }
    let mut out = vec![0.0; sub.n_nodes()];
    for (i, tri) in surface.triangles.iter().enumerate() {
        let area = surface.areas[i];
        let sv = [s[tri[0]], s[tri[1]], s[tri[2]]];
        let loc = [
            sub.local_of(tri[0])
                .ok_or(CoreError::MissingSurfaceCoefficient { node: tri[0] })?,
            sub.local_of(tri[1])
                .ok_or(CoreError::MissingSurfaceCoefficient { node: tri[1] })?,
            sub.local_of(tri[2])
                .ok_or(CoreError::MissingSurfaceCoefficient { node: tri[2] })?,
        ];
        for (bary, w) in TRI_DEG2 {
            let sq: f64 = (0..3).map(|k| sv[k] * bary[k]).sum();
            for a in 0..3 {
                out[loc[a]] += w * area * sq * bary[a];
            }
        }
    }
    Ok(out)
}
