//! Synthetic vessel-in-box mesh generation.
//!
//! Two constructions, both structured and deterministic:
//!
//! * straight tube: a body-fitted O-grid whose innermost rings trace the
//!   tube wall exactly, extruded along the z axis and split into tets
//!   with an index-consistent prism rule;
//! * Y-bifurcation: a uniform Freudenthal grid over the box with cells
//!   labeled by a capsule-union membership test. The wall is then a
//!   lattice surface, which is sufficient for the bifurcating test
//!   geometry (only the straight tube carries an area-fidelity contract).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{CompartmentTable, TetMesh, BLOOD_LABEL};
use crate::error::CoreError;
use crate::geo::{self, Vec3};

/// Tube topology for the synthetic generator.
#[derive(Debug, Clone, PartialEq)]
pub enum VesselKind {
    Straight {
        /// Tube radius (m).
        radius: f64,
        /// Tube length along z (m), centered in the box.
        length: f64,
    },
    Bifurcation {
        parent_radius: f64,
        parent_length: f64,
        daughter_radius: f64,
        daughter_length: f64,
        /// Full angle between the two daughter branches (rad).
        angle: f64,
    },
}

/// Geometry request: a vessel inside an enclosing tissue box meshed at
/// target edge length `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselSpec {
    pub kind: VesselKind,
    /// Box extents (m); the cross-section must be square (x == y).
    pub box_size: [f64; 3],
    /// Target edge length (m).
    pub h: f64,
}

impl VesselSpec {
    /// Smallest vessel radius in the spec.
    pub fn min_radius(&self) -> f64 {
        match &self.kind {
            VesselKind::Straight { radius, .. } => *radius,
            VesselKind::Bifurcation {
                parent_radius,
                daughter_radius,
                ..
            } => parent_radius.min(*daughter_radius),
        }
    }

    /// Suggested pulse-support sphere at the inflow end of the vessel:
    /// (center, radius).
    pub fn inflow_site(&self) -> (Vec3, f64) {
        let cx = self.box_size[0] / 2.0;
        let cy = self.box_size[1] / 2.0;
        let z0 = match &self.kind {
            VesselKind::Straight { length, .. } => (self.box_size[2] - length) / 2.0,
            VesselKind::Bifurcation { .. } => 2.0 * self.h,
        };
        ([cx, cy, z0], 0.010)
    }

    /// Axis segments (start, end, radius) of the vessel.
    pub fn segments(&self) -> Vec<(Vec3, Vec3, f64)> {
        let cx = self.box_size[0] / 2.0;
        let cy = self.box_size[1] / 2.0;
        match &self.kind {
            VesselKind::Straight { radius, length } => {
                let z0 = (self.box_size[2] - length) / 2.0;
                alloc::vec![([cx, cy, z0], [cx, cy, z0 + length], *radius)]
            }
            VesselKind::Bifurcation {
                parent_radius,
                parent_length,
                daughter_radius,
                daughter_length,
                angle,
            } => {
                let z0 = 2.0 * self.h;
                let junction = [cx, cy, z0 + parent_length];
                let half = angle / 2.0;
                let (s, c) = (libm::sin(half), libm::cos(half));
                let left = [
                    junction[0] - s * daughter_length,
                    cy,
                    junction[2] + c * daughter_length,
                ];
                let right = [
                    junction[0] + s * daughter_length,
                    cy,
                    junction[2] + c * daughter_length,
                ];
                alloc::vec![
                    ([cx, cy, z0], junction, *parent_radius),
                    (junction, left, *daughter_radius),
                    (junction, right, *daughter_radius),
                ]
            }
        }
    }

    fn validate(&self) -> Result<(), CoreError> {
        let [bx, by, bz] = self.box_size;
        if !(self.h > 0.0) || !(bx > 0.0) || !(by > 0.0) || !(bz > 0.0) {
            return Err(CoreError::InfeasibleGeometry(String::from(
                "box extents and h must be positive",
            )));
        }
        if (bx - by).abs() > 1e-12 * bx.max(by) {
            return Err(CoreError::InfeasibleGeometry(String::from(
                "box cross-section must be square (x == y)",
            )));
        }
        let r = self.min_radius();
        if !(r > 0.0) {
            return Err(CoreError::InfeasibleGeometry(String::from(
                "vessel radius must be positive",
            )));
        }
        let max_r = match &self.kind {
            VesselKind::Straight { radius, .. } => *radius,
            VesselKind::Bifurcation {
                parent_radius,
                daughter_radius,
                ..
            } => parent_radius.max(*daughter_radius),
        };
        if max_r >= bx.min(by) / 2.0 {
            return Err(CoreError::InfeasibleGeometry(format!(
                "tube radius {} m reaches the box half-width {} m",
                max_r,
                bx.min(by) / 2.0
            )));
        }
        // every segment (dilated by its radius) must stay inside the box
        for (a, b, r_seg) in self.segments() {
            for p in [a, b] {
                for d in 0..3 {
                    if p[d] - r_seg < -1e-12 || p[d] + r_seg > self.box_size[d] + 1e-12 {
                        return Err(CoreError::InfeasibleGeometry(format!(
                            "vessel leaves the box near ({}, {}, {})",
                            p[0], p[1], p[2]
                        )));
                    }
                }
            }
        }
        if 2.0 * r < 4.0 * self.h * (1.0 - 1e-9) {
            return Err(CoreError::ResolutionTooCoarse {
                radius: r,
                h: self.h,
            });
        }
        Ok(())
    }
}

/// Generate a conforming labeled mesh for the requested vessel geometry.
/// Tube tets are labeled "Blood vessels", the remaining box "Grey matter".
pub fn generate_synthetic_vessel(
    spec: &VesselSpec,
    table: &CompartmentTable,
) -> Result<TetMesh, CoreError> {
    spec.validate()?;
    let blood = table
        .blood_id()
        .ok_or_else(|| CoreError::UnknownCompartment {
            label: String::from(BLOOD_LABEL),
        })?;
    let tissue = table
        .id_of("Grey matter")
        .ok_or_else(|| CoreError::UnknownCompartment {
            label: String::from("Grey matter"),
        })?;
    match &spec.kind {
        VesselKind::Straight { radius, length } => {
            generate_ogrid(spec, *radius, *length, blood, tissue, table)
        }
        VesselKind::Bifurcation { .. } => generate_lattice(spec, blood, tissue, table),
    }
}

/// Evenly spaced values covering [a, b] in `n` steps, endpoints exact.
fn linspace_into(zs: &mut Vec<f64>, a: f64, b: f64, n: usize) {
    for i in 1..=n {
        let t = i as f64 / n as f64;
        zs.push(a + t * (b - a));
    }
    // force the endpoint to be exact
    *zs.last_mut().unwrap() = b;
}

/// Split the prism over bottom nodes (t0,t1,t2) between plane k and k+1
/// into three tets. `tid` are template ids (used for the diagonal rule),
/// `node` maps (plane, template id) to a global node id.
fn split_prism(
    tid: [usize; 3],
    k: usize,
    node: &impl Fn(usize, usize) -> usize,
    out: &mut Vec<[usize; 4]>,
) {
    let mut s = tid;
    s.sort_unstable();
    let [a, b, c] = s;
    let (bot, top) = (k, k + 1);
    // quad-face diagonals run from the lower template id on the bottom
    // plane to the higher id on the top plane, so neighbors agree
    out.push([node(bot, a), node(bot, b), node(bot, c), node(top, c)]);
    out.push([node(bot, a), node(bot, b), node(top, c), node(top, b)]);
    out.push([node(bot, a), node(top, b), node(top, c), node(top, a)]);
}

fn generate_ogrid(
    spec: &VesselSpec,
    radius: f64,
    length: f64,
    blood: usize,
    tissue: usize,
    table: &CompartmentTable,
) -> Result<TetMesh, CoreError> {
    let [bx, by, bz] = spec.box_size;
    if length > bz + 1e-12 {
        return Err(CoreError::InfeasibleGeometry(format!(
            "tube length {length} m exceeds box height {bz} m"
        )));
    }
    let h = spec.h;
    let half_w = bx / 2.0;
    let (cx, cy) = (bx / 2.0, by / 2.0);

    // radial layout: nr_in rings inside the tube (ring nr_in lies exactly
    // on the wall), nr_out rings morphing from the wall circle to the box
    let nr_in = libm::round(radius / h).max(1.0) as usize;
    if 2 * nr_in < 4 {
        return Err(CoreError::ResolutionTooCoarse { radius, h });
    }
    let nr_out = libm::ceil((half_w - radius) / h).max(1.0) as usize;
    let nr = nr_in + nr_out;
    // multiple of 8 so the square's corner directions are sampled exactly
    let n_theta = {
        let want = libm::ceil((2.0 * core::f64::consts::PI * radius / h).max(8.0) / 8.0);
        8 * want as usize
    };

    // 2D template nodes: center + rings
    let n_tmpl = 1 + nr * n_theta;
    let tmpl_id = |ring: usize, sector: usize| -> usize {
        debug_assert!(ring >= 1);
        1 + (ring - 1) * n_theta + (sector % n_theta)
    };
    let mut tmpl_xy: Vec<[f64; 2]> = Vec::with_capacity(n_tmpl);
    tmpl_xy.push([cx, cy]);
    for ring in 1..=nr {
        for sector in 0..n_theta {
            let theta = 2.0 * core::f64::consts::PI * sector as f64 / n_theta as f64;
            let (st, ct) = (libm::sin(theta), libm::cos(theta));
            let rho = if ring <= nr_in {
                radius * ring as f64 / nr_in as f64
            } else {
                let s = (ring - nr_in) as f64 / nr_out as f64;
                let r_square = half_w / ct.abs().max(st.abs());
                radius + s * (r_square - radius)
            };
            tmpl_xy.push([cx + rho * ct, cy + rho * st]);
        }
    }

    // 2D template triangles (ids + whether the triangle lies in the tube
    // cross-section)
    let mut tmpl_tris: Vec<([usize; 3], bool)> = Vec::new();
    for sector in 0..n_theta {
        tmpl_tris.push(([0, tmpl_id(1, sector), tmpl_id(1, sector + 1)], true));
    }
    for ring in 1..nr {
        for sector in 0..n_theta {
            let a = tmpl_id(ring, sector);
            let b = tmpl_id(ring, sector + 1);
            let c = tmpl_id(ring + 1, sector + 1);
            let d = tmpl_id(ring + 1, sector);
            let in_tube = ring + 1 <= nr_in;
            tmpl_tris.push(([a, b, c], in_tube));
            tmpl_tris.push(([a, c, d], in_tube));
        }
    }

    // z planes with the tube ends as exact grid planes
    let z0 = (bz - length) / 2.0;
    let z1 = z0 + length;
    let mut zs: Vec<f64> = alloc::vec![0.0];
    if z0 > 1e-12 {
        linspace_into(&mut zs, 0.0, z0, libm::round(z0 / h).max(1.0) as usize);
    } else {
        *zs.last_mut().unwrap() = z0;
    }
    let slab_bot = zs.len() - 1;
    linspace_into(&mut zs, z0, z1, libm::round(length / h).max(1.0) as usize);
    let slab_top = zs.len() - 1;
    if bz - z1 > 1e-12 {
        linspace_into(&mut zs, z1, bz, libm::round((bz - z1) / h).max(1.0) as usize);
    }
    let n_planes = zs.len();

    // 3D nodes, plane-major
    let mut nodes: Vec<Vec3> = Vec::with_capacity(n_planes * n_tmpl);
    for &z in &zs {
        for xy in &tmpl_xy {
            nodes.push([xy[0], xy[1], z]);
        }
    }
    let node = |plane: usize, t: usize| plane * n_tmpl + t;

    let mut tets: Vec<[usize; 4]> = Vec::with_capacity((n_planes - 1) * tmpl_tris.len() * 3);
    let mut labels: Vec<usize> = Vec::with_capacity(tets.capacity());
    for k in 0..(n_planes - 1) {
        let in_tube_slab = k >= slab_bot && k < slab_top;
        for (tri, in_tube_tri) in &tmpl_tris {
            split_prism(*tri, k, &node, &mut tets);
            let label = if in_tube_slab && *in_tube_tri {
                blood
            } else {
                tissue
            };
            for _ in 0..3 {
                labels.push(label);
            }
        }
    }
    TetMesh::new(nodes, tets, labels, table)
}

/// Kuhn subdivision of the unit cube into six tets sharing the main
/// diagonal; translation-invariant, hence conforming on a uniform grid.
const KUHN: [[usize; 4]; 6] = [
    [0b000, 0b100, 0b110, 0b111],
    [0b000, 0b110, 0b010, 0b111],
    [0b000, 0b010, 0b011, 0b111],
    [0b000, 0b011, 0b001, 0b111],
    [0b000, 0b001, 0b101, 0b111],
    [0b000, 0b101, 0b100, 0b111],
];

fn generate_lattice(
    spec: &VesselSpec,
    blood: usize,
    tissue: usize,
    table: &CompartmentTable,
) -> Result<TetMesh, CoreError> {
    let [bx, by, bz] = spec.box_size;
    let h = spec.h;
    let nx = libm::round(bx / h).max(1.0) as usize;
    let ny = libm::round(by / h).max(1.0) as usize;
    let nz = libm::round(bz / h).max(1.0) as usize;
    let (hx, hy, hz) = (bx / nx as f64, by / ny as f64, bz / nz as f64);
    let segments = spec.segments();

    let node = |i: usize, j: usize, k: usize| i + j * (nx + 1) + k * (nx + 1) * (ny + 1);
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([i as f64 * hx, j as f64 * hy, k as f64 * hz]);
            }
        }
    }

    let corner = |i: usize, j: usize, k: usize, bits: usize| {
        node(
            i + ((bits >> 2) & 1),
            j + ((bits >> 1) & 1),
            k + (bits & 1),
        )
    };
    let mut tets = Vec::with_capacity(nx * ny * nz * 6);
    let mut labels = Vec::with_capacity(tets.capacity());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for pat in &KUHN {
                    let tet = [
                        corner(i, j, k, pat[0]),
                        corner(i, j, k, pat[1]),
                        corner(i, j, k, pat[2]),
                        corner(i, j, k, pat[3]),
                    ];
                    let centroid = {
                        let mut c = [0.0; 3];
                        for &n in &tet {
                            let p = nodes[n];
                            c[0] += p[0] / 4.0;
                            c[1] += p[1] / 4.0;
                            c[2] += p[2] / 4.0;
                        }
                        c
                    };
                    let inside = segments
                        .iter()
                        .any(|&(a, b, r)| geo::dist_to_segment(centroid, a, b) <= r);
                    tets.push(tet);
                    labels.push(if inside { blood } else { tissue });
                }
            }
        }
    }
    TetMesh::new(nodes, tets, labels, table)
}
