//! Per-element P1 kernels: barycentric basis gradients and measures.

use crate::error::CoreError;
use crate::geo::{self, Vec3};
use crate::mesh::TetMesh;

/// Constant gradients of the four linear basis functions on a tet, plus
/// its volume. The gradients sum to the zero vector.
pub fn element_gradients(coords: &[Vec3; 4]) -> Result<([Vec3; 4], f64), CoreError> {
    let e1 = geo::sub(coords[1], coords[0]);
    let e2 = geo::sub(coords[2], coords[0]);
    let e3 = geo::sub(coords[3], coords[0]);
    let det = geo::dot(e1, geo::cross(e2, e3));
    let volume = det / 6.0;
    if volume.abs() < crate::mesh::DEGENERATE_VOLUME {
        return Err(CoreError::DegenerateTet {
            tet: usize::MAX,
            volume,
        });
    }
    // rows of the inverse Jacobian: grad of barycentric coords 1..3
    let g1 = geo::scale(geo::cross(e2, e3), 1.0 / det);
    let g2 = geo::scale(geo::cross(e3, e1), 1.0 / det);
    let g3 = geo::scale(geo::cross(e1, e2), 1.0 / det);
    let g0 = [
        -g1[0] - g2[0] - g3[0],
        -g1[1] - g2[1] - g3[1],
        -g1[2] - g2[2] - g3[2],
    ];
    Ok(([g0, g1, g2, g3], volume))
}

/// Gradients and volume for tet `i` of the mesh.
pub fn mesh_element_gradients(mesh: &TetMesh, i: usize) -> Result<([Vec3; 4], f64), CoreError> {
    element_gradients(&mesh.tet_coords(i)).map_err(|e| match e {
        CoreError::DegenerateTet { volume, .. } => CoreError::DegenerateTet { tet: i, volume },
        other => other,
    })
}

/// Gradient of a P1 field on one element from its nodal values. Computed
/// from differences against the first node so constant fields give an
/// exact zero vector.
#[inline]
pub fn element_field_gradient(grads: &[Vec3; 4], values: [f64; 4]) -> Vec3 {
    let mut g = [0.0; 3];
    for a in 1..4 {
        let dv = values[a] - values[0];
        g[0] += dv * grads[a][0];
        g[1] += dv * grads[a][1];
        g[2] += dv * grads[a][2];
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: [Vec3; 4] = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];

    #[test]
    fn reference_tet_gradients() {
        let (g, v) = element_gradients(&REF).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-16);
        let expect: [Vec3; 4] = [
            [-1.0, -1.0, -1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        for (ga, ea) in g.iter().zip(&expect) {
            for d in 0..3 {
                assert!((ga[d] - ea[d]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradients_sum_to_zero() {
        let coords: [Vec3; 4] = [
            [0.2, -0.1, 0.4],
            [1.3, 0.2, 0.1],
            [-0.2, 1.7, 0.3],
            [0.4, 0.5, 2.1],
        ];
        let (g, _) = element_gradients(&coords).unwrap();
        for d in 0..3 {
            let s: f64 = g.iter().map(|ga| ga[d]).sum();
            assert!(s.abs() < 1e-13);
        }
    }

    #[test]
    fn affine_scaling_halves_gradients() {
        let scaled: [Vec3; 4] = [
            [0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [0.0, 2.0, 0.0],
            [0.0, 0.0, 2.0],
        ];
        let (g, v) = element_gradients(&scaled).unwrap();
        let (gr, vr) = element_gradients(&REF).unwrap();
        assert!((v - 8.0 * vr).abs() < 1e-14);
        for a in 0..4 {
            for d in 0..3 {
                assert!((g[a][d] - gr[a][d] / 2.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_field_has_zero_gradient_exactly() {
        let coords: [Vec3; 4] = [
            [0.2, -0.1, 0.4],
            [1.3, 0.2, 0.1],
            [-0.2, 1.7, 0.3],
            [0.4, 0.5, 2.1],
        ];
        let (g, _) = element_gradients(&coords).unwrap();
        let grad = element_field_gradient(&g, [3.7, 3.7, 3.7, 3.7]);
        assert_eq!(grad, [0.0, 0.0, 0.0]);
    }
}
