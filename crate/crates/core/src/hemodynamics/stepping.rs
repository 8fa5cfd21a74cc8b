//! Time recursions of the arterial stage: the dynamic pressure solve and
//! the regularized explicit velocity update.
//!
//! Pressure: p_k = (dt^2 K + M)^{-1} (dt^2 D(u_{k-1}) + 2 M p_{k-1}
//!                - M p_{k-2} + M pb_k - 2 M pb_{k-1} + M pb_{k-2}).
//! Velocity: u_k = u_{k-1} + dt C^{-1} (-Q(p_k) - H(u~_{k-1}) u_{k-1}
//!                - L u_{k-1} - F), with no-slip wall rows eliminated.

use alloc::vec;
use alloc::vec::Vec;

use super::operators::FlowOperators;
use crate::error::CoreError;
use crate::fem::{
    element_field_gradient, mesh_element_gradients, solve_spd, ScalarField, SolveOptions,
    VectorField,
};
use crate::mesh::{Subdomain, TetMesh};

/// Rolling state of the arterial recursion.
#[derive(Debug, Clone)]
pub struct FlowState {
    /// p_{k-1}.
    pub pressure: ScalarField,
    /// p_{k-2}.
    pub pressure_prev: ScalarField,
    /// u_{k-1}.
    pub velocity: VectorField,
    /// Leray-smoothed u~_{k-1}.
    pub velocity_smoothed: VectorField,
    /// Viscosity field from the previous step's shear rate.
    pub viscosity: ScalarField,
    /// Boundary pulse at t_{k-1} and t_{k-2} on vessel nodes.
    pub pulse: Vec<f64>,
    pub pulse_prev: Vec<f64>,
    /// Index of the next step to execute (starts at 1).
    pub step: usize,
}

impl FlowState {
    /// Initial state: zero velocity, diastolic pressure on wall rows and
    /// zero elsewhere, viscosity at the zero-shear plateau, and the pulse
    /// history evaluated at t = 0 and t = -dt.
    pub fn initial(
        n_local: usize,
        wall_local: &[usize],
        diastolic_pa: f64,
        mu_zero: f64,
        pulse_at: impl Fn(f64) -> Vec<f64>,
        dt: f64,
    ) -> Self {
        let mut p0 = ScalarField::zeros(n_local, "Pa");
        for &l in wall_local {
            p0.values[l] = diastolic_pa;
        }
        Self {
            pressure: p0.clone(),
            pressure_prev: p0,
            velocity: VectorField::zeros(n_local, "m/s"),
            velocity_smoothed: VectorField::zeros(n_local, "m/s"),
            viscosity: ScalarField::constant(n_local, mu_zero, "Pa.s"),
            pulse: pulse_at(0.0),
            pulse_prev: pulse_at(-dt),
            step: 1,
        }
    }
}

/// Load vector D(u) of the pressure equation:
/// D_a = int 2 grad(phi_a) . ((grad u) grad mu)
///     - rho grad(phi_a) . ((grad u) u~).
/// The unsmoothed field supplies the velocity Jacobian; the smoothed
/// field rides in the convective product.
pub fn assemble_ppe_rhs(
    mesh: &TetMesh,
    omega: &Subdomain,
    u: &VectorField,
    u_smooth: &VectorField,
    mu: &ScalarField,
    density: f64,
) -> Result<Vec<f64>, CoreError> {
    let n = omega.n_nodes();
    for len in [u.len(), u_smooth.len(), mu.len()] {
        if len != n {
            return Err(CoreError::FieldSizeMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let mut out = vec![0.0; n];
    for &t in &omega.tets {
        let (grads, vol) = mesh_element_gradients(mesh, t)?;
        let loc = omega.local_tet(mesh, t);
        let mut jac = [[0.0; 3]; 3];
        for (l, row) in jac.iter_mut().enumerate() {
            *row = element_field_gradient(
                &grads,
                [
                    u.comps[l][loc[0]],
                    u.comps[l][loc[1]],
                    u.comps[l][loc[2]],
                    u.comps[l][loc[3]],
                ],
            );
        }
        let grad_mu = element_field_gradient(
            &grads,
            [
                mu.values[loc[0]],
                mu.values[loc[1]],
                mu.values[loc[2]],
                mu.values[loc[3]],
            ],
        );
        let mut us_mean = [0.0; 3];
        for (h, m) in us_mean.iter_mut().enumerate() {
            *m = (u_smooth.comps[h][loc[0]]
                + u_smooth.comps[h][loc[1]]
                + u_smooth.comps[h][loc[2]]
                + u_smooth.comps[h][loc[3]])
                / 4.0;
        }
        // v[l] = 2 (grad u)[l] . grad mu - rho (grad u)[l] . u~
        let mut v = [0.0; 3];
        for l in 0..3 {
            let mut visc = 0.0;
            let mut conv = 0.0;
            for h in 0..3 {
                visc += jac[l][h] * grad_mu[h];
                conv += jac[l][h] * us_mean[h];
            }
            v[l] = 2.0 * visc - density * conv;
        }
        for a in 0..4 {
            let mut acc = 0.0;
            for l in 0..3 {
                acc += grads[a][l] * v[l];
            }
            out[loc[a]] += vol * acc;
        }
    }
    Ok(out)
}

/// One pressure update. Returns the new field; the caller rotates the
/// state history.
pub fn pressure_step(
    ops: &FlowOperators,
    ppe_rhs: &[f64],
    p_prev: &ScalarField,
    p_prev2: &ScalarField,
    pulse_k: &[f64],
    pulse_km1: &[f64],
    pulse_km2: &[f64],
    opts: &SolveOptions,
    step: usize,
) -> Result<ScalarField, CoreError> {
    let n = p_prev.len();
    let mut v = vec![0.0; n];
    for i in 0..n {
        v[i] = 2.0 * p_prev.values[i] - p_prev2.values[i] + pulse_k[i] - 2.0 * pulse_km1[i]
            + pulse_km2[i];
    }
    let mut rhs = ops.boundary_mass.apply(&v);
    let dt2 = ops.dt * ops.dt;
    for (r, d) in rhs.iter_mut().zip(ppe_rhs) {
        *r += dt2 * d;
    }
    let (p, _) = solve_spd(&ops.pressure_matrix, &rhs, Some(&p_prev.values), opts)?;
    let field = ScalarField {
        values: p,
        unit: "Pa",
        time_s: p_prev.time_s + ops.dt,
    };
    field.check_finite(step, "pressure")?;
    Ok(field)
}

/// Right-hand side of the velocity update, assembled element-wise:
/// -Q(p) - H(u~) u - (L1 + L2) u - F.
pub fn velocity_rhs(
    mesh: &TetMesh,
    omega: &Subdomain,
    ops: &FlowOperators,
    p: &ScalarField,
    u: &VectorField,
    u_smooth: &VectorField,
    mu: &ScalarField,
) -> Result<[Vec<f64>; 3], CoreError> {
    let n = omega.n_nodes();
    let mut rhs = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for &t in &omega.tets {
        let (grads, vol) = mesh_element_gradients(mesh, t)?;
        let loc = omega.local_tet(mesh, t);

        let grad_p = element_field_gradient(
            &grads,
            [
                p.values[loc[0]],
                p.values[loc[1]],
                p.values[loc[2]],
                p.values[loc[3]],
            ],
        );
        let grad_mu = element_field_gradient(
            &grads,
            [
                mu.values[loc[0]],
                mu.values[loc[1]],
                mu.values[loc[2]],
                mu.values[loc[3]],
            ],
        );
        let mu_mean = (mu.values[loc[0]] + mu.values[loc[1]] + mu.values[loc[2]]
            + mu.values[loc[3]])
            / 4.0;

        let mut jac = [[0.0; 3]; 3];
        let mut u_sum = [0.0; 3];
        let mut u_mean = [0.0; 3];
        for l in 0..3 {
            let vals = [
                u.comps[l][loc[0]],
                u.comps[l][loc[1]],
                u.comps[l][loc[2]],
                u.comps[l][loc[3]],
            ];
            jac[l] = element_field_gradient(&grads, vals);
            u_sum[l] = vals[0] + vals[1] + vals[2] + vals[3];
            u_mean[l] = u_sum[l] / 4.0;
        }
        // antisymmetric part A[l][k] = d_k u^l - d_l u^k
        let mut asym = [[0.0; 3]; 3];
        for l in 0..3 {
            for k in 0..3 {
                asym[l][k] = jac[l][k] - jac[k][l];
            }
        }
        let us = |c: usize, i: usize| u_smooth.comps[c][loc[i]];

        for a in 0..4 {
            // H(u~)u row a: rho/20 V sum_c (g_a . u~_c)(sum_b u_b + u_c)
            let mut conv = [0.0; 3];
            for c in 0..4 {
                let gdot = grads[a][0] * us(0, c) + grads[a][1] * us(1, c) + grads[a][2] * us(2, c);
                for l in 0..3 {
                    conv[l] += gdot * (u_sum[l] + u.comps[l][loc[c]]);
                }
            }
            for l in 0..3 {
                let q_term = grad_p[l] * vol / 4.0; // -Q(p) contribution
                let h_term = ops.density * vol / 20.0 * conv[l];
                let mut l1 = 0.0;
                for k in 0..3 {
                    l1 += grads[a][k] * asym[l][k];
                }
                let l1_term = mu_mean * vol * l1;
                let gdot_mu =
                    grads[a][0] * grad_mu[0] + grads[a][1] * grad_mu[1] + grads[a][2] * grad_mu[2];
                let l2_term = -2.0 * gdot_mu * vol * u_mean[l];
                rhs[l][loc[a]] += q_term - h_term - l1_term - l2_term;
            }
        }
    }
    for l in 0..3 {
        for (r, f) in rhs[l].iter_mut().zip(&ops.gravity_load[l]) {
            *r -= f;
        }
    }
    Ok(rhs)
}

/// One explicit velocity update; wall rows stay at their no-slip value.
pub fn velocity_step(
    ops: &FlowOperators,
    rhs: &[Vec<f64>; 3],
    u_prev: &VectorField,
    opts: &SolveOptions,
    step: usize,
) -> Result<VectorField, CoreError> {
    let mut u = u_prev.clone();
    u.time_s = u_prev.time_s + ops.dt;
    let n_int = ops.interior.len();
    for l in 0..3 {
        let rhs_int: Vec<f64> = ops.interior.iter().map(|&i| rhs[l][i]).collect();
        let (du, _) = solve_spd(&ops.mass_rho_interior, &rhs_int, None, opts)?;
        for i in 0..n_int {
            u.comps[l][ops.interior[i]] += ops.dt * du[i];
        }
    }
    u.check_finite(step, "velocity")?;
    Ok(u)
}
