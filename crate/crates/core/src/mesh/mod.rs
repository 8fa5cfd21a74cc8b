//! Labeled tetrahedral meshes: validation, subdomain views, artery-wall
//! extraction and the normalized microvessel-density field.
//!
//! The arterial domain is the union of tets labeled [`BLOOD_LABEL`]; the
//! microcirculation (tissue) domain is everything else.

mod refine;
mod synthetic;

pub use refine::uniform_refine;
pub use synthetic::{generate_synthetic_vessel, VesselKind, VesselSpec};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::geo::{self, Vec3};

/// Name of the arterial compartment; tets with this label form the flow
/// domain, all other labels form the tissue domain.
pub const BLOOD_LABEL: &str = "Blood vessels";

/// Tets with signed volume below this are rejected as degenerate (m^3).
pub const DEGENERATE_VOLUME: f64 = 1e-18;

/// One tissue compartment: name, background conductivity and microvessel
/// length density.
#[derive(Debug, Clone, PartialEq)]
pub struct Compartment {
    pub name: String,
    /// Background conductivity sigma_m (S/m).
    pub sigma_m: f64,
    /// Microvessel length density xi (1/m^2).
    pub xi: f64,
}

/// Table of compartments addressed by label id.
#[derive(Debug, Clone, PartialEq)]
pub struct CompartmentTable {
    entries: Vec<Compartment>,
}

impl CompartmentTable {
    pub fn new(entries: Vec<Compartment>) -> Result<Self, CoreError> {
        for e in &entries {
            if !(e.sigma_m > 0.0) {
                return Err(CoreError::InvalidConfig(alloc::format!(
                    "compartment '{}' must have sigma_m > 0",
                    e.name
                )));
            }
            if !(e.xi >= 0.0) {
                return Err(CoreError::InvalidConfig(alloc::format!(
                    "compartment '{}' must have xi >= 0",
                    e.name
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Default head-model table: the standard compartment conductivities
    /// with microvessel densities mapped per tissue class. Subcortical
    /// nuclei take the subcortical density; CSF and ventricles carry no
    /// microvessels.
    pub fn default_head() -> Self {
        const GM: f64 = 2.4e8;
        const WM: f64 = 1.4e8;
        const CB_GM: f64 = 3.0e8;
        const CB_WM: f64 = 1.0e8;
        const SUBCORT: f64 = 1.5e8;
        const BRAINSTEM: f64 = 2.9e8;
        let raw: &[(&str, f64, f64)] = &[
            (BLOOD_LABEL, 0.70, GM),
            ("Grey matter", 0.33, GM),
            ("White matter", 0.14, WM),
            ("Cerebellum cortex", 0.33, CB_GM),
            ("Cerebellum white matter", 0.14, CB_WM),
            ("Brainstem", 0.33, BRAINSTEM),
            ("Cingulate cortex", 0.14, SUBCORT),
            ("Ventral Diencephalon", 0.33, SUBCORT),
            ("Amygdala", 0.33, SUBCORT),
            ("Thalamus", 0.33, SUBCORT),
            ("Caudate", 0.33, SUBCORT),
            ("Accumbens", 0.33, SUBCORT),
            ("Putamen", 0.33, SUBCORT),
            ("Hippocampus", 0.33, SUBCORT),
            ("Pallidum", 0.33, SUBCORT),
            ("Ventricles", 0.33, 0.0),
            ("Cerebrospinal fluid (CSF)", 1.79, 0.0),
        ];
        let entries = raw
            .iter()
            .map(|&(name, sigma_m, xi)| Compartment {
                name: String::from(name),
                sigma_m,
                xi,
            })
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: usize) -> &Compartment {
        &self.entries[id]
    }

    pub fn entries(&self) -> &[Compartment] {
        &self.entries
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn blood_id(&self) -> Option<usize> {
        self.id_of(BLOOD_LABEL)
    }

    /// Replace the parameters of a named compartment or append a new one.
    pub fn upsert(&mut self, comp: Compartment) {
        match self.id_of(&comp.name) {
            Some(id) => self.entries[id] = comp,
            None => self.entries.push(comp),
        }
    }
}

/// Labeled tetrahedral mesh. Immutable after validation; tets are
/// consistently oriented to positive signed volume.
#[derive(Debug, Clone)]
pub struct TetMesh {
    nodes: Vec<Vec3>,
    tets: Vec<[usize; 4]>,
    tet_labels: Vec<usize>,
}

/// Signed volume of the tetrahedron (a, b, c, d).
pub fn tet_signed_volume(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    geo::dot(geo::sub(b, a), geo::cross(geo::sub(c, a), geo::sub(d, a))) / 6.0
}

impl TetMesh {
    /// Build a mesh from raw arrays, validating every type invariant:
    /// node references in range, labels present in the table, and tet
    /// volumes above the degeneracy threshold (negative tets are
    /// reoriented).
    pub fn new(
        nodes: Vec<Vec3>,
        mut tets: Vec<[usize; 4]>,
        tet_labels: Vec<usize>,
        table: &CompartmentTable,
    ) -> Result<Self, CoreError> {
        if tets.len() != tet_labels.len() {
            return Err(CoreError::InvalidConfig(String::from(
                "tets and tet_labels length mismatch",
            )));
        }
        for (i, tet) in tets.iter_mut().enumerate() {
            for &n in tet.iter() {
                if n >= nodes.len() {
                    return Err(CoreError::OrphanNodeReference { tet: i, node: n });
                }
            }
            let v = tet_signed_volume(
                nodes[tet[0]],
                nodes[tet[1]],
                nodes[tet[2]],
                nodes[tet[3]],
            );
            let v = if v < 0.0 {
                tet.swap(2, 3);
                -v
            } else {
                v
            };
            if v < DEGENERATE_VOLUME {
                return Err(CoreError::DegenerateTet { tet: i, volume: v });
            }
        }
        for (i, &label) in tet_labels.iter().enumerate() {
            if label >= table.len() {
                return Err(CoreError::UnknownCompartment {
                    label: alloc::format!("id {} (tet {})", label, i),
                });
            }
        }
        Ok(Self {
            nodes,
            tets,
            tet_labels,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn node(&self, i: usize) -> Vec3 {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn tet(&self, i: usize) -> [usize; 4] {
        self.tets[i]
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn tet_label(&self, i: usize) -> usize {
        self.tet_labels[i]
    }

    pub fn tet_labels(&self) -> &[usize] {
        &self.tet_labels
    }

    pub fn tet_coords(&self, i: usize) -> [Vec3; 4] {
        let t = self.tets[i];
        [
            self.nodes[t[0]],
            self.nodes[t[1]],
            self.nodes[t[2]],
            self.nodes[t[3]],
        ]
    }

    pub fn tet_volume(&self, i: usize) -> f64 {
        let [a, b, c, d] = self.tet_coords(i);
        tet_signed_volume(a, b, c, d)
    }

    pub fn tet_centroid(&self, i: usize) -> Vec3 {
        let [a, b, c, d] = self.tet_coords(i);
        [
            (a[0] + b[0] + c[0] + d[0]) / 4.0,
            (a[1] + b[1] + c[1] + d[1]) / 4.0,
            (a[2] + b[2] + c[2] + d[2]) / 4.0,
        ]
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_tets()).map(|i| self.tet_volume(i)).sum()
    }

    /// Subdomain of tets whose label satisfies `pred`; nodes are every
    /// node incident to a selected tet.
    pub fn subdomain_where<F: Fn(usize) -> bool>(&self, pred: F) -> Subdomain {
        let tets: Vec<usize> = (0..self.n_tets())
            .filter(|&i| pred(self.tet_labels[i]))
            .collect();
        let mut in_sub = vec![false; self.n_nodes()];
        for &t in &tets {
            for &n in &self.tets[t] {
                in_sub[n] = true;
            }
        }
        let nodes: Vec<usize> = (0..self.n_nodes()).filter(|&n| in_sub[n]).collect();
        let mut local = vec![usize::MAX; self.n_nodes()];
        for (l, &g) in nodes.iter().enumerate() {
            local[g] = l;
        }
        Subdomain {
            nodes,
            tets,
            local,
        }
    }

    /// Arterial flow domain: tets labeled [`BLOOD_LABEL`].
    pub fn vessel_subdomain(&self, table: &CompartmentTable) -> Subdomain {
        let blood = table.blood_id();
        self.subdomain_where(|l| Some(l) == blood)
    }

    /// Tissue (microcirculation) domain: everything except the vessels.
    pub fn tissue_subdomain(&self, table: &CompartmentTable) -> Subdomain {
        let blood = table.blood_id();
        self.subdomain_where(|l| Some(l) != blood)
    }

    /// Whole mesh as a subdomain.
    pub fn all_subdomain(&self) -> Subdomain {
        self.subdomain_where(|_| true)
    }

    /// Standalone mesh containing only the tets selected by `pred`
    /// (nodes renumbered compactly). Returns the new mesh and, per new
    /// node, its original index.
    pub fn extract_where<F: Fn(usize) -> bool>(
        &self,
        pred: F,
        table: &CompartmentTable,
    ) -> Result<(TetMesh, Vec<usize>), CoreError> {
        let sub = self.subdomain_where(pred);
        let nodes: Vec<Vec3> = sub.nodes.iter().map(|&g| self.nodes[g]).collect();
        let tets: Vec<[usize; 4]> = sub
            .tets
            .iter()
            .map(|&t| {
                let tet = self.tets[t];
                [
                    sub.local_of(tet[0]).unwrap(),
                    sub.local_of(tet[1]).unwrap(),
                    sub.local_of(tet[2]).unwrap(),
                    sub.local_of(tet[3]).unwrap(),
                ]
            })
            .collect();
        let labels: Vec<usize> = sub.tets.iter().map(|&t| self.tet_labels[t]).collect();
        let mesh = TetMesh::new(nodes, tets, labels, table)?;
        Ok((mesh, sub.nodes))
    }

    /// Volume-weighted average over tets incident to each node of a
    /// per-label value.
    pub fn nodal_average_by_label<F: Fn(usize) -> f64>(&self, value_of_label: F) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_nodes()];
        let mut wsum = vec![0.0; self.n_nodes()];
        for i in 0..self.n_tets() {
            let v = self.tet_volume(i);
            let val = value_of_label(self.tet_labels[i]);
            for &n in &self.tets[i] {
                acc[n] += v * val;
                wsum[n] += v;
            }
        }
        for n in 0..self.n_nodes() {
            if wsum[n] > 0.0 {
                acc[n] /= wsum[n];
            }
        }
        acc
    }

    /// Mean edge length over all tets (each edge counted once).
    pub fn mean_edge_length(&self) -> f64 {
        let mut seen = BTreeMap::new();
        for tet in &self.tets {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    let key = if tet[a] < tet[b] {
                        (tet[a], tet[b])
                    } else {
                        (tet[b], tet[a])
                    };
                    seen.entry(key).or_insert(());
                }
            }
        }
        if seen.is_empty() {
            return 0.0;
        }
        let total: f64 = seen
            .keys()
            .map(|&(a, b)| geo::dist(self.nodes[a], self.nodes[b]))
            .sum();
        total / seen.len() as f64
    }
}

/// View of a subset of the mesh: the tets of one physical domain and the
/// nodes they touch, with a global-to-local node map.
#[derive(Debug, Clone)]
pub struct Subdomain {
    /// Global node ids, ascending; the local index of a node is its
    /// position here.
    pub nodes: Vec<usize>,
    /// Global tet ids in the subdomain.
    pub tets: Vec<usize>,
    local: Vec<usize>,
}

impl Subdomain {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn local_of(&self, global: usize) -> Option<usize> {
        match self.local.get(global) {
            Some(&l) if l != usize::MAX => Some(l),
            _ => None,
        }
    }

    /// Local node indices of a global tet.
    pub fn local_tet(&self, mesh: &TetMesh, tet: usize) -> [usize; 4] {
        let t = mesh.tet(tet);
        [
            self.local[t[0]],
            self.local[t[1]],
            self.local[t[2]],
            self.local[t[3]],
        ]
    }

    /// Restrict a global nodal field to this subdomain's local numbering.
    pub fn restrict(&self, global_field: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&g| global_field[g]).collect()
    }
}

/// Triangulated artery wall with outward unit normals and areas.
#[derive(Debug, Clone)]
pub struct BoundarySurface {
    /// Triangles as global node triples, oriented so the normal points
    /// out of the vessel domain.
    pub triangles: Vec<[usize; 3]>,
    /// Outward unit normal per triangle.
    pub normals: Vec<Vec3>,
    /// Area per triangle (m^2).
    pub areas: Vec<f64>,
    /// Total surface area |dOmega| (m^2).
    pub total_area: f64,
    /// Sorted global ids of all nodes on the surface.
    pub nodes: Vec<usize>,
}

impl BoundarySurface {
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, mesh: &TetMesh, i: usize) -> [Vec3; 3] {
        let t = self.triangles[i];
        [mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2])]
    }

    /// Minimum distance from a point to the surface node set.
    pub fn node_distance(&self, mesh: &TetMesh, p: Vec3) -> f64 {
        self.nodes
            .iter()
            .map(|&n| geo::dist(p, mesh.node(n)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Faces of each tet in the order opposite to each vertex.
fn tet_faces(t: [usize; 4]) -> [[usize; 3]; 4] {
    [
        [t[1], t[2], t[3]],
        [t[0], t[3], t[2]],
        [t[0], t[1], t[3]],
        [t[0], t[2], t[1]],
    ]
}

fn sorted3(f: [usize; 3]) -> [usize; 3] {
    let mut s = f;
    s.sort_unstable();
    s
}

/// Boundary of an arbitrary tet subset: faces owned by exactly one tet
/// of the subset, oriented outward.
pub fn boundary_of_subdomain(
    mesh: &TetMesh,
    sub: &Subdomain,
) -> Result<BoundarySurface, CoreError> {
    // key -> (count, owner tet, oriented face)
    let mut face_map: BTreeMap<[usize; 3], (usize, [usize; 3])> = BTreeMap::new();
    for &t in &sub.tets {
        for face in tet_faces(mesh.tet(t)) {
            let key = sorted3(face);
            match face_map.get_mut(&key) {
                Some((count, _)) => *count += 1,
                None => {
                    face_map.insert(key, (1, face));
                }
            }
        }
    }
    let mut triangles = Vec::new();
    let mut normals = Vec::new();
    let mut areas = Vec::new();
    let mut total_area = 0.0;
    let mut node_set = BTreeMap::new();
    for (key, (count, face)) in &face_map {
        match count {
            1 => {
                // A positively oriented tet lists each face with outward
                // orientation in `tet_faces`.
                let a = mesh.node(face[0]);
                let b = mesh.node(face[1]);
                let c = mesh.node(face[2]);
                let n2 = geo::cross(geo::sub(b, a), geo::sub(c, a));
                let twice_area = geo::norm(n2);
                let area = 0.5 * twice_area;
                let normal = geo::scale(n2, 1.0 / twice_area);
                triangles.push(*face);
                normals.push(normal);
                areas.push(area);
                total_area += area;
                for &n in face {
                    node_set.entry(n).or_insert(());
                }
            }
            2 => {}
            _ => return Err(CoreError::NonManifoldSurface { face: *key }),
        }
    }
    Ok(BoundarySurface {
        triangles,
        normals,
        areas,
        total_area,
        nodes: node_set.into_keys().collect(),
    })
}

/// Artery wall: boundary of the vessel-labeled subdomain.
pub fn extract_boundary(
    mesh: &TetMesh,
    table: &CompartmentTable,
) -> Result<BoundarySurface, CoreError> {
    let sub = mesh.vessel_subdomain(table);
    boundary_of_subdomain(mesh, &sub)
}

/// Normalized microvessel density lambda = xi / xi_bar as a global nodal
/// field. Nodal xi is the volume-weighted average of adjacent-tet values;
/// xi_bar is the area-weighted mean of the nodal field over the artery
/// wall.
pub fn compute_lambda(
    mesh: &TetMesh,
    surface: &BoundarySurface,
    table: &CompartmentTable,
) -> Result<Vec<f64>, CoreError> {
    let xi = mesh.nodal_average_by_label(|l| table.get(l).xi);
    let mut integral = 0.0;
    for (i, tri) in surface.triangles.iter().enumerate() {
        let mean = (xi[tri[0]] + xi[tri[1]] + xi[tri[2]]) / 3.0;
        integral += surface.areas[i] * mean;
    }
    let xi_bar = integral / surface.total_area;
    if !(xi_bar > 0.0) {
        return Err(CoreError::ZeroMeanDensity);
    }
    Ok(xi.iter().map(|&v| v / xi_bar).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_table() -> CompartmentTable {
        CompartmentTable::default_head()
    }

    fn single_tet(label: &str, table: &CompartmentTable) -> Result<TetMesh, CoreError> {
        let id = table
            .id_of(label)
            .ok_or_else(|| CoreError::UnknownCompartment {
                label: String::from(label),
            })?;
        TetMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
            vec![[0, 1, 2, 3]],
            vec![id],
            table,
        )
    }

    #[test]
    fn single_tet_volume() {
        let table = unit_table();
        let mesh = single_tet(BLOOD_LABEL, &table).unwrap();
        assert_eq!(mesh.n_tets(), 1);
        assert!((mesh.tet_volume(0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_label_rejected() {
        let table = unit_table();
        let err = single_tet("Unknown", &table).unwrap_err();
        assert!(matches!(err, CoreError::UnknownCompartment { .. }));
    }

    #[test]
    fn orphan_reference_rejected() {
        let table = unit_table();
        let err = TetMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2, 7]],
            vec![0],
            &table,
        )
        .unwrap_err();
        assert_eq!(err, CoreError::OrphanNodeReference { tet: 0, node: 7 });
    }

    #[test]
    fn degenerate_tet_rejected() {
        let table = unit_table();
        let err = TetMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.5, 0.5, 0.0],
            ],
            vec![[0, 1, 2, 3]],
            vec![0],
            &table,
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::DegenerateTet { tet: 0, .. }));
    }

    #[test]
    fn negative_orientation_fixed() {
        let table = unit_table();
        let mesh = TetMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
            // swapped: negative signed volume as listed
            vec![[0, 2, 1, 3]],
            vec![0],
            &table,
        )
        .unwrap();
        assert!(mesh.tet_volume(0) > 0.0);
    }

    #[test]
    fn single_tet_boundary_is_all_faces() {
        let table = unit_table();
        let mesh = single_tet(BLOOD_LABEL, &table).unwrap();
        let surf = extract_boundary(&mesh, &table).unwrap();
        assert_eq!(surf.n_triangles(), 4);
        // total face area of the reference tet: three legs of area 1/2
        // plus the diagonal face of area sqrt(3)/2
        let expect = 1.5 + libm::sqrt(3.0) / 2.0;
        assert!((surf.total_area - expect).abs() < 1e-14);
        // normals are unit and point away from the opposite vertex
        for (i, tri) in surf.triangles.iter().enumerate() {
            let n = surf.normals[i];
            assert!((geo::norm(n) - 1.0).abs() < 1e-12);
            let centroid = {
                let [a, b, c] = surf.triangle_coords(&mesh, i);
                [
                    (a[0] + b[0] + c[0]) / 3.0,
                    (a[1] + b[1] + c[1]) / 3.0,
                    (a[2] + b[2] + c[2]) / 3.0,
                ]
            };
            let opposite = (0..4)
                .find(|v| !tri.contains(v))
                .map(|v| mesh.node(v))
                .unwrap();
            assert!(geo::dot(geo::sub(centroid, opposite), n) > 0.0);
        }
    }

    #[test]
    fn shared_face_excluded() {
        let table = unit_table();
        let blood = table.blood_id().unwrap();
        // two tets sharing face (0,1,2)
        let mesh = TetMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.3, 0.3, -1.0],
            ],
            vec![[0, 1, 2, 3], [0, 1, 2, 4]],
            vec![blood, blood],
            &table,
        )
        .unwrap();
        let surf = extract_boundary(&mesh, &table).unwrap();
        assert_eq!(surf.n_triangles(), 6);
    }

    #[test]
    fn lambda_uniform_is_one() {
        let table = unit_table();
        let mesh = single_tet(BLOOD_LABEL, &table).unwrap();
        let surf = extract_boundary(&mesh, &table).unwrap();
        let lambda = compute_lambda(&mesh, &surf, &table).unwrap();
        for v in lambda {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_zero_density_rejected() {
        let mut table = unit_table();
        table.upsert(Compartment {
            name: String::from(BLOOD_LABEL),
            sigma_m: 0.70,
            xi: 0.0,
        });
        let mesh = single_tet(BLOOD_LABEL, &table).unwrap();
        let surf = extract_boundary(&mesh, &table).unwrap();
        assert_eq!(
            compute_lambda(&mesh, &surf, &table).unwrap_err(),
            CoreError::ZeroMeanDensity
        );
    }

    #[test]
    fn lambda_two_compartment_values() {
        // Vessel tet (xi 2.4e8) plus a white-matter tet (xi 1.4e8) behind
        // the wall; the wall sits entirely on vessel faces so the
        // area-weighted mean is 2.4e8 wherever nodes touch only vessel
        // tets. Nodes shared with the WM tet average by volume.
        let table = unit_table();
        let blood = table.blood_id().unwrap();
        let wm = table.id_of("White matter").unwrap();
        let mesh = TetMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.3, 0.3, -1.0],
            ],
            vec![[0, 1, 2, 3], [0, 1, 2, 4]],
            vec![blood, wm],
            &table,
        )
        .unwrap();
        let sub = mesh.vessel_subdomain(&table);
        let surf = boundary_of_subdomain(&mesh, &sub).unwrap();
        let lambda = compute_lambda(&mesh, &surf, &table).unwrap();
        // node 3 touches only the vessel tet; node 4 only the WM tet
        let vols = (mesh.tet_volume(0), mesh.tet_volume(1));
        let xi3 = 2.4e8;
        let xi4 = 1.4e8;
        let xi_shared = (2.4e8 * vols.0 + 1.4e8 * vols.1) / (vols.0 + vols.1);
        // xi_bar: wall = 4 faces of the vessel tet; nodes 0,1,2 shared
        let tri_mean = |t: [usize; 3]| -> f64 {
            let of = |n: usize| match n {
                3 => xi3,
                4 => xi4,
                _ => xi_shared,
            };
            (of(t[0]) + of(t[1]) + of(t[2])) / 3.0
        };
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, t) in surf.triangles.iter().enumerate() {
            num += surf.areas[i] * tri_mean(*t);
            den += surf.areas[i];
        }
        let xi_bar = num / den;
        assert!((lambda[3] - xi3 / xi_bar).abs() < 1e-12);
        assert!((lambda[4] - xi4 / xi_bar).abs() < 1e-12);
        // area-weighted mean of lambda over the wall is 1
        let mut mean = 0.0;
        for (i, t) in surf.triangles.iter().enumerate() {
            mean += surf.areas[i] * (lambda[t[0]] + lambda[t[1]] + lambda[t[2]]) / 3.0;
        }
        mean /= surf.total_area;
        assert!((mean - 1.0).abs() < 1e-10);
    }

    #[test]
    fn restrict_and_local_maps() {
        let table = unit_table();
        let blood = table.blood_id().unwrap();
        let gm = table.id_of("Grey matter").unwrap();
        let mesh = TetMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.3, 0.3, -1.0],
            ],
            vec![[0, 1, 2, 3], [0, 1, 2, 4]],
            vec![blood, gm],
            &table,
        )
        .unwrap();
        let omega = mesh.vessel_subdomain(&table);
        assert_eq!(omega.nodes, vec![0, 1, 2, 3]);
        assert_eq!(omega.local_of(4), None);
        let field = vec![10.0, 11.0, 12.0, 13.0, 14.0];
        assert_eq!(omega.restrict(&field), vec![10.0, 11.0, 12.0, 13.0]);
        let tissue = mesh.tissue_subdomain(&table);
        assert_eq!(tissue.nodes, vec![0, 1, 2, 4]);
    }
}
