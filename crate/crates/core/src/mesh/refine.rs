//! Uniform 1-to-8 tetrahedron refinement (regular/Bey pattern).
//!
//! Each tet is split into four corner tets and four interior tets tiling
//! the edge-midpoint octahedron around a fixed diagonal. The refined mesh
//! covers exactly the same polyhedral domain, so it is suitable for
//! convergence studies on a fixed geometry.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{CompartmentTable, TetMesh};
use crate::error::CoreError;

pub fn uniform_refine(mesh: &TetMesh, table: &CompartmentTable) -> Result<TetMesh, CoreError> {
    let mut nodes = mesh.nodes().to_vec();
    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut mid = |a: usize, b: usize, nodes: &mut Vec<[f64; 3]>| -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        *midpoint.entry(key).or_insert_with(|| {
            let pa = nodes[a];
            let pb = nodes[b];
            nodes.push([
                (pa[0] + pb[0]) / 2.0,
                (pa[1] + pb[1]) / 2.0,
                (pa[2] + pb[2]) / 2.0,
            ]);
            nodes.len() - 1
        })
    };

    let mut tets = Vec::with_capacity(mesh.n_tets() * 8);
    let mut labels = Vec::with_capacity(mesh.n_tets() * 8);
    for i in 0..mesh.n_tets() {
        let [v0, v1, v2, v3] = mesh.tet(i);
        let m01 = mid(v0, v1, &mut nodes);
        let m02 = mid(v0, v2, &mut nodes);
        let m03 = mid(v0, v3, &mut nodes);
        let m12 = mid(v1, v2, &mut nodes);
        let m13 = mid(v1, v3, &mut nodes);
        let m23 = mid(v2, v3, &mut nodes);
        let children: [[usize; 4]; 8] = [
            [v0, m01, m02, m03],
            [v1, m01, m12, m13],
            [v2, m02, m12, m23],
            [v3, m03, m13, m23],
            // octahedron tiled around the m02-m13 diagonal
            [m01, m02, m03, m13],
            [m01, m02, m12, m13],
            [m02, m03, m13, m23],
            [m02, m12, m13, m23],
        ];
        let label = mesh.tet_label(i);
        for child in children {
            tets.push(child);
            labels.push(label);
        }
    }
    TetMesh::new(nodes, tets, labels, table)
}
