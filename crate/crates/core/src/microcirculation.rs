//! Volumetric blood-concentration dynamics in the tissue domain: the
//! implicit diffusion-absorption recursion driven by a wall source.
//!
//! c_k = (U + dt R + dt T)^{-1} (U c_{k-1} + dt w), with U the mass,
//! R the lambda-weighted diffusion, T the absorption mass and w a wall
//! load built from the rectified arterial over-pressure.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::fem::{
    assemble_mass, assemble_stiffness, assemble_surface_load, solve_spd, Coeff, ScalarField,
    SolveOptions, SparseOperator,
};
use crate::hemodynamics::FlowParams;
use crate::mesh::{BoundarySurface, Subdomain, TetMesh};

/// Which cube-root volume constant scales the absorption amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsorptionRule {
    /// (45 pi / V_max)^(1/3), the standard calibration.
    Standard,
    /// (36 pi / V_max)^(1/3), the variant obtained by matching the
    /// outward flux through the surface of a volume-equivalent sphere.
    SphereFlux,
}

/// Microcirculation parameters.
#[derive(Debug, Clone)]
pub struct DiffusionParams {
    /// Effective diffusion coefficient (m^2/s); negative means "derive
    /// from the flow parameters".
    pub varsigma: f64,
    /// Pressure-decay fraction in the arterioles.
    pub theta: f64,
    /// Arteriole length (m).
    pub arteriole_length: f64,
    /// Source scaling (1/s); non-finite or non-positive means "calibrate
    /// from the stationary solve".
    pub kappa: f64,
    pub rule: AbsorptionRule,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            varsigma: -1.0,
            theta: 0.70,
            arteriole_length: 0.4e-3,
            kappa: -1.0,
            rule: AbsorptionRule::Standard,
        }
    }
}

impl DiffusionParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(CoreError::InvalidConfig(
                "pressure-decay fraction must lie in (0, 1]".into(),
            ));
        }
        if !(self.arteriole_length > 0.0) {
            return Err(CoreError::InvalidConfig(
                "arteriole length must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Effective diffusion coefficient varsigma = A_a p_ref / (8 pi mu).
pub fn compute_varsigma(p: &FlowParams) -> f64 {
    p.arteriole_area * p.p_ref / (8.0 * core::f64::consts::PI * p.mu_ref)
}

/// Nodal absorption amplitude
/// eps = varsigma * lambda * (theta / L) * (C pi / V_max)^(1/3)
/// with C = 45 (standard) or 36 (sphere-flux variant).
pub fn compute_epsilon(
    varsigma: f64,
    lambda_local: &[f64],
    theta: f64,
    arteriole_length: f64,
    v_max: f64,
    rule: AbsorptionRule,
) -> Result<Vec<f64>, CoreError> {
    if !(v_max > 0.0) {
        return Err(CoreError::InvalidConfig(
            "largest element volume must be positive".into(),
        ));
    }
    let c = match rule {
        AbsorptionRule::Standard => 45.0,
        AbsorptionRule::SphereFlux => 36.0,
    };
    let factor = varsigma * (theta / arteriole_length)
        * libm::cbrt(c * core::f64::consts::PI / v_max);
    Ok(lambda_local.iter().map(|&l| factor * l).collect())
}

/// Wall source vector w_i = int s phi_i over the artery wall with
/// s = kappa * lambda * max(p - p_diastolic, 0) / p_pulse on wall nodes.
/// `pressure_omega` is the arterial pressure in the flow domain's local
/// numbering.
#[allow(clippy::too_many_arguments)]
pub fn assemble_source(
    mesh: &TetMesh,
    surface: &BoundarySurface,
    tissue: &Subdomain,
    omega: &Subdomain,
    pressure_omega: &[f64],
    lambda: &[f64],
    kappa: f64,
    p_diastolic: f64,
    p_pulse: f64,
) -> Result<Vec<f64>, CoreError> {
    let mut s = vec![0.0; mesh.n_nodes()];
    for &g in &surface.nodes {
        let l = omega
            .local_of(g)
            .ok_or(CoreError::MissingSurfaceCoefficient { node: g })?;
        let over = (pressure_omega[l] - p_diastolic).max(0.0);
        s[g] = kappa * lambda[g] * over / p_pulse;
    }
    assemble_surface_load(mesh, surface, tissue, &s)
}

/// Fixed operators of the tissue stage.
pub struct MicroOperators {
    /// Mass U.
    pub mass: SparseOperator,
    /// Diffusion R with coefficient varsigma * lambda.
    pub diffusion: SparseOperator,
    /// Absorption mass T with the nodal amplitude.
    pub absorption: SparseOperator,
    /// System matrix U + dt R + dt T.
    pub system: SparseOperator,
    /// Largest tissue element volume (m^3).
    pub v_max: f64,
    pub varsigma: f64,
    /// Calibrated source scale.
    pub kappa: f64,
    pub dt: f64,
}

impl MicroOperators {
    /// Assemble the tissue operators and calibrate kappa (unless fixed in
    /// `params`): the stationary system (R + T) c = w with unit source
    /// shape s = lambda is solved once and kappa set so the wall maximum
    /// of the stationary concentration is one.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: &TetMesh,
        tissue: &Subdomain,
        omega: &Subdomain,
        surface: &BoundarySurface,
        lambda: &[f64],
        flow: &FlowParams,
        params: &DiffusionParams,
        dt: f64,
        opts: &SolveOptions,
    ) -> Result<Self, CoreError> {
        params.validate()?;
        let varsigma = if params.varsigma > 0.0 {
            params.varsigma
        } else {
            compute_varsigma(flow)
        };
        let v_max = tissue
            .tets
            .iter()
            .map(|&t| mesh.tet_volume(t))
            .fold(0.0f64, f64::max);
        let lambda_local = tissue.restrict(lambda);
        let eps = compute_epsilon(
            varsigma,
            &lambda_local,
            params.theta,
            params.arteriole_length,
            v_max,
            params.rule,
        )?;
        let diff_coeff: Vec<f64> = lambda_local.iter().map(|&l| varsigma * l).collect();
        let mass = assemble_mass(mesh, tissue, Coeff::Const(1.0))?;
        let diffusion = assemble_stiffness(mesh, tissue, Coeff::Nodal(&diff_coeff))?;
        let absorption = assemble_mass(mesh, tissue, Coeff::Nodal(&eps))?;
        let rt = SparseOperator::linear_combination(1.0, &diffusion, 1.0, &absorption);
        let system = SparseOperator::linear_combination(1.0, &mass, dt, &rt);

        let kappa = if params.kappa.is_finite() && params.kappa > 0.0 {
            params.kappa
        } else {
            let unit_w = assemble_surface_load(mesh, surface, tissue, lambda)?;
            let (c_inf, _) = solve_spd(&rt, &unit_w, None, opts)?;
            let wall_max = surface
                .nodes
                .iter()
                .filter_map(|&g| tissue.local_of(g))
                .map(|l| c_inf[l])
                .fold(0.0f64, f64::max);
            if !(wall_max > 0.0) {
                return Err(CoreError::InvalidConfig(
                    "source calibration failed: stationary wall concentration is zero".into(),
                ));
            }
            1.0 / wall_max
        };
        let _ = omega;
        Ok(Self {
            mass,
            diffusion,
            absorption,
            system,
            v_max,
            varsigma,
            kappa,
            dt,
        })
    }
}

/// Result of one implicit concentration update.
pub struct ConcentrationStep {
    pub field: ScalarField,
    /// How many nodes the [0, 1] clamp touched.
    pub clamped: usize,
}

/// One implicit Euler step of the diffusion-absorption recursion,
/// clamped to the physical range [0, 1] afterwards.
pub fn concentration_step(
    ops: &MicroOperators,
    c_prev: &ScalarField,
    w: &[f64],
    opts: &SolveOptions,
    step: usize,
) -> Result<ConcentrationStep, CoreError> {
    let n = c_prev.len();
    let mut rhs = ops.mass.apply(&c_prev.values);
    for (r, &wi) in rhs.iter_mut().zip(w) {
        *r += ops.dt * wi;
    }
    let (mut c, _) = solve_spd(&ops.system, &rhs, Some(&c_prev.values), opts)?;
    let mut clamped = 0;
    for v in c.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clamped += 1;
        } else if *v > 1.0 {
            *v = 1.0;
            clamped += 1;
        }
    }
    debug_assert_eq!(c.len(), n);
    let field = ScalarField {
        values: c,
        unit: "1",
        time_s: c_prev.time_s + ops.dt,
    };
    field.check_finite(step, "concentration")?;
    Ok(ConcentrationStep { field, clamped })
}
