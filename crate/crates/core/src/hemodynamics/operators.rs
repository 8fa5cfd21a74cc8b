//! Flow parameters, the arteriole outflow coefficient, and the fixed
//! operators of the arterial solver (assembled once, reused by every
//! step).

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::fem::{
    assemble_boundary_mass, assemble_mass, assemble_stiffness, solve_spd, Coeff, SolveOptions,
    SparseOperator,
};
use crate::geo;
use crate::mesh::{BoundarySurface, Subdomain, TetMesh};

/// Physical and numerical flow parameters (SI units).
#[derive(Debug, Clone)]
pub struct FlowParams {
    /// Blood density rho (kg/m^3).
    pub density: f64,
    /// Reference dynamic viscosity (Pa s).
    pub mu_ref: f64,
    /// Total volumetric flow through the arteries (m^3/s).
    pub total_flow: f64,
    /// Reference average pressure (Pa).
    pub p_ref: f64,
    /// Arteriole cross-sectional area (m^2).
    pub arteriole_area: f64,
    /// Vessel distension factor.
    pub beta_dist: f64,
    /// Reference volume of cross-sectional change (m^3).
    pub v_ref: f64,
    /// Gravitational force density direction (m/s^2).
    pub gravity: [f64; 3],
    /// Convective smoothing parameter (scaled by mean edge length).
    pub eps_leray: f64,
    /// Shear-field smoothing parameter (scaled by mean edge length).
    pub eps_visc: f64,
    /// Time step (s).
    pub dt: f64,
    /// Multiplier on the zeta*lambda boundary coefficient.
    pub robin_scale: f64,
}

/// 1 mmHg in Pa (fixed conversion used throughout).
pub const MMHG_PA: f64 = 133.322;

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            density: 1050.0,
            mu_ref: 4.0e-3,
            total_flow: 750.0e-6 / 60.0, // 750 ml/min
            p_ref: 87.0 * MMHG_PA,
            arteriole_area: core::f64::consts::PI * 5.0e-6 * 5.0e-6, // D_a = 1e-5 m
            beta_dist: 0.2,
            v_ref: 1.0e-4,
            gravity: [0.0, 0.0, -9.81],
            eps_leray: 0.03,
            eps_visc: 0.01,
            dt: 2.0e-3,
            robin_scale: 1.0,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        let positives = [
            ("density", self.density),
            ("mu_ref", self.mu_ref),
            ("total_flow", self.total_flow),
            ("p_ref", self.p_ref),
            ("arteriole_area", self.arteriole_area),
            ("beta_dist", self.beta_dist),
            ("v_ref", self.v_ref),
            ("dt", self.dt),
            ("robin_scale", self.robin_scale),
        ];
        for (name, v) in positives {
            if !(v > 0.0) {
                return Err(CoreError::InvalidConfig(alloc::format!(
                    "flow parameter {name} must be positive"
                )));
            }
        }
        if self.eps_leray < 0.0 || self.eps_visc < 0.0 {
            return Err(CoreError::InvalidConfig(
                "smoothing parameters must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Arteriole outflow coefficient zeta = 8 pi mu Q / (|dOmega| A_a p_ref),
/// in 1/m.
pub fn compute_zeta(p: &FlowParams, surface_area: f64) -> Result<f64, CoreError> {
    if !(surface_area > 0.0) || !(p.p_ref > 0.0) {
        return Err(CoreError::InvalidConfig(
            "zeta requires positive wall area and reference pressure".into(),
        ));
    }
    Ok(8.0 * core::f64::consts::PI * p.mu_ref * p.total_flow
        / (surface_area * p.arteriole_area * p.p_ref))
}

/// Boundary wave-speed scale
/// nu_bar = (1 + beta^2) |dOmega| A_a p_ref / (8 pi mu beta^2 V_ref).
pub fn compute_nu_bar(p: &FlowParams, surface_area: f64) -> Result<f64, CoreError> {
    if !(p.beta_dist > 0.0) || !(p.v_ref > 0.0) {
        return Err(CoreError::InvalidConfig(
            "nu_bar requires positive beta and reference volume".into(),
        ));
    }
    let b2 = p.beta_dist * p.beta_dist;
    Ok((1.0 + b2) * surface_area * p.arteriole_area * p.p_ref
        / (8.0 * core::f64::consts::PI * p.mu_ref * b2 * p.v_ref))
}

/// Discrete Helmholtz filter (Mass + eps^2 Stiffness) x_tilde = Mass x.
/// Identity for eps = 0; constants are fixed points.
#[derive(Debug, Clone)]
pub struct HelmholtzFilter {
    matrix: SparseOperator,
    /// Filter length (m).
    pub eps_len: f64,
}

impl HelmholtzFilter {
    pub fn new(
        mass: &SparseOperator,
        stiffness: &SparseOperator,
        eps_len: f64,
    ) -> Self {
        let matrix = SparseOperator::linear_combination(1.0, mass, eps_len * eps_len, stiffness);
        Self { matrix, eps_len }
    }

    /// Smooth a nodal field; `warm` seeds the solve (the unsmoothed field
    /// is a good start).
    pub fn apply(
        &self,
        mass: &SparseOperator,
        x: &[f64],
        warm: Option<&[f64]>,
        opts: &SolveOptions,
    ) -> Result<Vec<f64>, CoreError> {
        let rhs = mass.apply(x);
        let (out, _) = solve_spd(&self.matrix, &rhs, warm.or(Some(x)), opts)?;
        Ok(out)
    }
}

/// Mean edge length over the tets of one subdomain.
fn mean_edge_length(mesh: &TetMesh, sub: &Subdomain) -> f64 {
    let mut seen = BTreeMap::new();
    for &t in &sub.tets {
        let tet = mesh.tet(t);
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
        .map(|&(a, b)| geo::dist(mesh.node(a), mesh.node(b)))
        .sum();
    total / seen.len() as f64
}

/// Time-independent operators of the arterial stage. Assembled once on
/// the vessel subdomain and shared by all steps.
pub struct FlowOperators {
    /// Unit-coefficient stiffness K on the vessel domain.
    pub stiffness: SparseOperator,
    /// Boundary mass M with coefficient robin_scale * zeta * lambda.
    pub boundary_mass: SparseOperator,
    /// Pressure system dt^2 K + M.
    pub pressure_matrix: SparseOperator,
    /// rho-weighted velocity mass C.
    pub mass_rho: SparseOperator,
    /// C restricted to interior (no-slip eliminated) nodes.
    pub mass_rho_interior: SparseOperator,
    /// Unit mass, right-hand side of the Helmholtz filters.
    pub mass_unit: SparseOperator,
    /// Convective (Leray) velocity filter.
    pub filter_leray: HelmholtzFilter,
    /// Shear-field filter feeding the viscosity law.
    pub filter_visc: HelmholtzFilter,
    /// Local indices of vessel nodes not on the wall.
    pub interior: Vec<usize>,
    /// Local indices of wall nodes.
    pub wall_local: Vec<usize>,
    /// Gravity load F^l = C f^l per component.
    pub gravity_load: [Vec<f64>; 3],
    /// Outflow coefficient.
    pub zeta: f64,
    /// Mean edge length of the vessel mesh (m).
    pub mean_edge: f64,
    pub dt: f64,
    pub density: f64,
}

impl FlowOperators {
    pub fn new(
        mesh: &TetMesh,
        omega: &Subdomain,
        surface: &BoundarySurface,
        lambda: &[f64],
        params: &FlowParams,
    ) -> Result<Self, CoreError> {
        params.validate()?;
        let zeta = compute_zeta(params, surface.total_area)?;
        let stiffness = assemble_stiffness(mesh, omega, Coeff::Const(1.0))?;
        let robin_coeff: Vec<f64> = lambda
            .iter()
            .map(|&l| params.robin_scale * zeta * l)
            .collect();
        let boundary_mass = assemble_boundary_mass(mesh, surface, omega, &robin_coeff)?;
        let pressure_matrix = SparseOperator::linear_combination(
            params.dt * params.dt,
            &stiffness,
            1.0,
            &boundary_mass,
        );
        let mass_rho = assemble_mass(mesh, omega, Coeff::Const(params.density))?;
        let mass_unit = assemble_mass(mesh, omega, Coeff::Const(1.0))?;

        let mut on_wall = vec![false; omega.n_nodes()];
        let mut wall_local = Vec::with_capacity(surface.nodes.len());
        for &g in &surface.nodes {
            if let Some(l) = omega.local_of(g) {
                on_wall[l] = true;
                wall_local.push(l);
            }
        }
        let interior: Vec<usize> = (0..omega.n_nodes()).filter(|&l| !on_wall[l]).collect();
        let mass_rho_interior = mass_rho.restrict(&interior);

        let mean_edge = mean_edge_length(mesh, omega);
        let filter_leray = HelmholtzFilter::new(
            &mass_unit,
            &stiffness,
            params.eps_leray * mean_edge,
        );
        let filter_visc = HelmholtzFilter::new(
            &mass_unit,
            &stiffness,
            params.eps_visc * mean_edge,
        );

        let ones = vec![1.0; omega.n_nodes()];
        let c_ones = mass_rho.apply(&ones);
        let gravity_load = [
            c_ones.iter().map(|&v| v * params.gravity[0]).collect(),
            c_ones.iter().map(|&v| v * params.gravity[1]).collect(),
            c_ones.iter().map(|&v| v * params.gravity[2]).collect(),
        ];

        Ok(Self {
            stiffness,
            boundary_mass,
            pressure_matrix,
            mass_rho,
            mass_rho_interior,
            mass_unit,
            filter_leray,
            filter_visc,
            interior,
            wall_local,
            gravity_load,
            zeta,
            mean_edge,
            dt: params.dt,
            density: params.density,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_reference_value() {
        let p = FlowParams::default();
        let z = compute_zeta(&p, 0.01).unwrap();
        // frozen 40-digit evaluation of 8 pi mu Q / (A A_a p)
        let expect = 137.9427596173261;
        assert!(((z - expect) / expect).abs() < 1e-12, "{z}");
    }

    #[test]
    fn zeta_scalings() {
        let p = FlowParams::default();
        let z1 = compute_zeta(&p, 0.01).unwrap();
        let z2 = compute_zeta(&p, 0.02).unwrap();
        assert!((z2 - z1 / 2.0).abs() < 1e-12 * z1);
        let mut p2 = p.clone();
        p2.mu_ref *= 2.0;
        let z3 = compute_zeta(&p2, 0.01).unwrap();
        assert!((z3 - 2.0 * z1).abs() < 1e-12 * z1);
    }

    #[test]
    fn nu_bar_unit_plug_in() {
        let p = FlowParams {
            mu_ref: 1.0,
            p_ref: 1.0,
            arteriole_area: 1.0,
            beta_dist: 1.0,
            v_ref: 1.0,
            ..FlowParams::default()
        };
        let nb = compute_nu_bar(&p, 1.0).unwrap();
        let expect = 2.0 / (8.0 * core::f64::consts::PI);
        assert!((nb - expect).abs() < 1e-15);
    }

    #[test]
    fn nu_bar_reference_value() {
        let p = FlowParams::default();
        let nb = compute_nu_bar(&p, 0.01).unwrap();
        // frozen 40-digit evaluation with beta = 0.2, V_ref = 1e-4
        let expect = 0.0235604971875;
        assert!(((nb - expect) / expect).abs() < 1e-12, "{nb}");
    }

    #[test]
    fn nu_bar_large_beta_prefactor() {
        let mut p = FlowParams::default();
        p.beta_dist = 1e8;
        let nb = compute_nu_bar(&p, 0.01).unwrap();
        let p_unit = FlowParams {
            beta_dist: 1.0,
            ..p.clone()
        };
        // (1+b^2)/b^2 -> 1 as b -> inf; compare against the b=1 value
        // whose prefactor is exactly 2
        let nb_unit = compute_nu_bar(&p_unit, 0.01).unwrap();
        assert!((nb / (nb_unit / 2.0) - 1.0).abs() < 1e-12);
    }
}
