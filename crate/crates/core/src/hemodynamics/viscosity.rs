//! Shear rate of the velocity field and the Carreau-Yasuda viscosity law.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::fem::{element_field_gradient, mesh_element_gradients, ScalarField, VectorField};
use crate::mesh::{Subdomain, TetMesh};

/// Carreau-Yasuda parameters. Defaults: mu0 = 56e-3 Pa s,
/// mu_inf = 3.45e-3 Pa s, relaxation 1.902 s, index 0.22, transition 1.25.
#[derive(Debug, Clone, Copy)]
pub struct ViscosityParams {
    /// Zero-shear viscosity (Pa s).
    pub mu_zero: f64,
    /// Infinite-shear viscosity (Pa s).
    pub mu_inf: f64,
    /// Relaxation time (s).
    pub relaxation_s: f64,
    /// Power-law index.
    pub index: f64,
    /// Transition parameter.
    pub transition: f64,
}

impl Default for ViscosityParams {
    fn default() -> Self {
        Self {
            mu_zero: 56e-3,
            mu_inf: 3.45e-3,
            relaxation_s: 1.902,
            index: 0.22,
            transition: 1.25,
        }
    }
}

impl ViscosityParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.mu_zero > self.mu_inf && self.mu_inf > 0.0) {
            return Err(CoreError::InvalidConfig(
                "require mu_zero > mu_inf > 0".into(),
            ));
        }
        if !(self.relaxation_s > 0.0) || !(self.transition > 0.0) {
            return Err(CoreError::InvalidConfig(
                "relaxation time and transition parameter must be positive".into(),
            ));
        }
        if !(self.index > 0.0 && self.index < 1.0) {
            return Err(CoreError::InvalidConfig(
                "power-law index must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Carreau-Yasuda viscosity of a single shear-rate value:
/// mu_inf + (mu0 - mu_inf) (1 + (lambda |g|)^a)^((n-1)/a).
/// Bounded in (mu_inf, mu_zero] for every finite input.
pub fn carreau_yasuda_scalar(shear: f64, p: &ViscosityParams) -> f64 {
    let x = libm::pow(p.relaxation_s * shear.abs(), p.transition);
    p.mu_inf + (p.mu_zero - p.mu_inf) * libm::pow(1.0 + x, (p.index - 1.0) / p.transition)
}

/// Apply the viscosity law to a nodal shear-rate field.
pub fn carreau_yasuda(shear: &ScalarField, p: &ViscosityParams) -> ScalarField {
    ScalarField {
        values: shear
            .values
            .iter()
            .map(|&g| carreau_yasuda_scalar(g, p))
            .collect(),
        unit: "Pa.s",
        time_s: shear.time_s,
    }
}

/// Shear rate gamma = sqrt(1/2 S:S) with S = grad(u) + grad(u)^T,
/// computed per element (P1 gradients are constant) and projected to
/// nodes by volume-weighted averaging. Rigid rotations contribute
/// nothing; simple shear (G y, 0, 0) yields |G| exactly.
pub fn shear_rate(
    mesh: &TetMesh,
    sub: &Subdomain,
    u: &VectorField,
) -> Result<ScalarField, CoreError> {
    if u.len() != sub.n_nodes() {
        return Err(CoreError::FieldSizeMismatch {
            expected: sub.n_nodes(),
            got: u.len(),
        });
    }
    let mut acc = vec![0.0; sub.n_nodes()];
    let mut wsum = vec![0.0; sub.n_nodes()];
    for &t in &sub.tets {
        let (grads, vol) = mesh_element_gradients(mesh, t)?;
        let loc = sub.local_tet(mesh, t);
        // velocity Jacobian J[l][d] = d_d u^l, constant on the element
        let mut jac = [[0.0; 3]; 3];
        for (l, row) in jac.iter_mut().enumerate() {
            let vals = [
                u.comps[l][loc[0]],
                u.comps[l][loc[1]],
                u.comps[l][loc[2]],
                u.comps[l][loc[3]],
            ];
            *row = element_field_gradient(&grads, vals);
        }
        let mut frob2 = 0.0;
        for l in 0..3 {
            for d in 0..3 {
                let s = jac[l][d] + jac[d][l];
                frob2 += s * s;
            }
        }
        let gamma = libm::sqrt(0.5 * frob2);
        for &a in &loc {
            acc[a] += vol * gamma;
            wsum[a] += vol;
        }
    }
    for (a, w) in acc.iter_mut().zip(&wsum) {
        if *w > 0.0 {
            *a /= *w;
        }
    }
    Ok(ScalarField {
        values: acc,
        unit: "1/s",
        time_s: u.time_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CompartmentTable, TetMesh};
    use alloc::vec;

    #[test]
    fn zero_shear_gives_mu_zero() {
        let p = ViscosityParams::default();
        assert!((carreau_yasuda_scalar(0.0, &p) - 56e-3).abs() < 1e-15);
    }

    #[test]
    fn infinite_shear_limit() {
        let p = ViscosityParams::default();
        assert!(carreau_yasuda_scalar(1e9, &p) - 3.45e-3 < 1e-8);
        assert!(carreau_yasuda_scalar(1e9, &p) > 3.45e-3);
    }

    #[test]
    fn reference_point_matches_high_precision_oracle() {
        let p = ViscosityParams::default();
        let got = carreau_yasuda_scalar(1.0 / p.relaxation_s, &p);
        // mu_inf + (mu0 - mu_inf) * 2^((n-1)/a), evaluated at 40 digits
        let expect = 0.03754808610132704;
        assert!(((got - expect) / expect).abs() < 1e-12, "{got}");
    }

    #[test]
    fn monotone_and_bounded() {
        let p = ViscosityParams::default();
        let mut last = f64::INFINITY;
        for k in 0..200 {
            let g = 1e-4 * libm::pow(1.2, k as f64);
            let eta = carreau_yasuda_scalar(g, &p);
            assert!(eta > p.mu_inf && eta <= p.mu_zero);
            assert!(eta <= last + 1e-18);
            last = eta;
        }
    }

    fn two_tet_mesh() -> (TetMesh, CompartmentTable) {
        let table = CompartmentTable::default_head();
        let blood = table.blood_id().unwrap();
        let mesh = TetMesh::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [1.0, 1.0, 1.0],
            ],
            vec![[0, 1, 2, 3], [1, 2, 3, 4]],
            vec![blood, blood],
            &table,
        )
        .unwrap();
        (mesh, table)
    }

    #[test]
    fn shear_rate_zero_for_rest() {
        let (mesh, table) = two_tet_mesh();
        let sub = mesh.vessel_subdomain(&table);
        let u = VectorField::zeros(sub.n_nodes(), "m/s");
        let g = shear_rate(&mesh, &sub, &u).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn simple_shear_exact() {
        let (mesh, table) = two_tet_mesh();
        let sub = mesh.vessel_subdomain(&table);
        let mut u = VectorField::zeros(sub.n_nodes(), "m/s");
        let big_g = 2.5;
        for (l, &gn) in sub.nodes.iter().enumerate() {
            u.comps[0][l] = big_g * mesh.node(gn)[1];
        }
        let g = shear_rate(&mesh, &sub, &u).unwrap();
        for &v in &g.values {
            assert!((v - big_g).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn rigid_rotation_is_shear_free() {
        let (mesh, table) = two_tet_mesh();
        let sub = mesh.vessel_subdomain(&table);
        let mut u = VectorField::zeros(sub.n_nodes(), "m/s");
        let omega = 1.7;
        for (l, &gn) in sub.nodes.iter().enumerate() {
            let p = mesh.node(gn);
            u.comps[0][l] = -omega * p[1];
            u.comps[1][l] = omega * p[0];
        }
        let g = shear_rate(&mesh, &sub, &u).unwrap();
        for &v in &g.values {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_added_to_shear_changes_nothing() {
        let (mesh, table) = two_tet_mesh();
        let sub = mesh.vessel_subdomain(&table);
        let mut base = VectorField::zeros(sub.n_nodes(), "m/s");
        let mut with_rot = VectorField::zeros(sub.n_nodes(), "m/s");
        for (l, &gn) in sub.nodes.iter().enumerate() {
            let p = mesh.node(gn);
            base.comps[0][l] = 0.8 * p[1] + 0.1 * p[2];
            with_rot.comps[0][l] = base.comps[0][l] - 3.0 * p[1];
            with_rot.comps[1][l] = 3.0 * p[0];
        }
        let g1 = shear_rate(&mesh, &sub, &base).unwrap();
        let g2 = shear_rate(&mesh, &sub, &with_rot).unwrap();
        for (a, b) in g1.values.iter().zip(&g2.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
