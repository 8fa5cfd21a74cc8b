//! Effective tissue conductivity from volumetric blood concentration via
//! the two-phase mixture law
//! sigma = sigma_m (1 - c)^tau + sigma_f c^beta,
//! tau = log(1 - c^beta) / log(1 - c).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::mesh::{CompartmentTable, Subdomain, TetMesh};

/// Mixture-law parameters. The cementation exponent defaults to the
/// cylindrical-inhomogeneity limit 5/3.
#[derive(Debug, Clone, Copy)]
pub struct ArchieParams {
    pub beta_cem: f64,
    /// Blood conductivity (S/m).
    pub sigma_f: f64,
}

impl Default for ArchieParams {
    fn default() -> Self {
        Self {
            beta_cem: 5.0 / 3.0,
            sigma_f: 0.70,
        }
    }
}

impl ArchieParams {
    /// Default validation window [3/2, 5/3]; out-of-range exponents are
    /// rejected unless `allow_any_beta` is set.
    pub fn validate(&self, allow_any_beta: bool) -> Result<(), CoreError> {
        if !(self.sigma_f > 0.0) {
            return Err(CoreError::InvalidConfig(
                "blood conductivity must be positive".into(),
            ));
        }
        if !allow_any_beta && !(1.5..=5.0 / 3.0 + 1e-12).contains(&self.beta_cem) {
            return Err(CoreError::InvalidConfig(
                "cementation exponent outside [3/2, 5/3]".into(),
            ));
        }
        Ok(())
    }
}

/// Endpoint guard: tau is 0/0-indeterminate at both ends, so the limits
/// are returned analytically.
const ENDPOINT_EPS: f64 = 1e-12;

/// Effective conductivity for one concentration value in [0, 1].
pub fn archie(c: f64, sigma_m: f64, params: &ArchieParams) -> f64 {
    let c = c.clamp(0.0, 1.0);
    if c < ENDPOINT_EPS {
        return sigma_m;
    }
    if c > 1.0 - ENDPOINT_EPS {
        return params.sigma_f;
    }
    let cb = libm::pow(c, params.beta_cem);
    let tau = libm::log(1.0 - cb) / libm::log(1.0 - c);
    sigma_m * libm::pow(1.0 - c, tau) + params.sigma_f * cb
}

/// Nodal background conductivity: volume-weighted compartment average
/// over the tets adjacent to each node.
pub fn background_conductivity(mesh: &TetMesh, table: &CompartmentTable) -> Vec<f64> {
    mesh.nodal_average_by_label(|l| table.get(l).sigma_m)
}

/// Conductivity atlas over all mesh nodes: Archie's law on tissue nodes,
/// the blood conductivity on vessel nodes (the lumen is pure blood).
pub fn build_atlas(
    mesh: &TetMesh,
    tissue: &Subdomain,
    omega: &Subdomain,
    concentration_tissue: &[f64],
    sigma_background: &[f64],
    params: &ArchieParams,
) -> Result<Vec<f64>, CoreError> {
    if concentration_tissue.len() != tissue.n_nodes() {
        return Err(CoreError::FieldSizeMismatch {
            expected: tissue.n_nodes(),
            got: concentration_tissue.len(),
        });
    }
    let mut sigma = vec![0.0; mesh.n_nodes()];
    for g in 0..mesh.n_nodes() {
        sigma[g] = match tissue.local_of(g) {
            Some(l) => archie(concentration_tissue[l], sigma_background[g], params),
            None => params.sigma_f,
        };
    }
    // vessel nodes (including the wall) carry the blood conductivity
    for &g in &omega.nodes {
        sigma[g] = params.sigma_f;
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact() {
        let p = ArchieParams::default();
        assert_eq!(archie(0.0, 0.33, &p), 0.33);
        assert_eq!(archie(1.0, 0.33, &p), 0.70);
    }

    #[test]
    fn midpoint_matches_high_precision_oracle() {
        let p = ArchieParams::default();
        let got = archie(0.5, 0.33, &p);
        // frozen 40-digit evaluation of the mixture law at c = 1/2,
        // beta = 5/3, sigma_m = 0.33, sigma_f = 0.70
        let expect = 0.4465426971152758;
        assert!(((got - expect) / expect).abs() < 1e-12, "{got}");
    }

    #[test]
    fn endpoint_continuity() {
        let p = ArchieParams::default();
        assert!((archie(1.0 - 1e-8, 0.33, &p) - 0.70).abs() < 1e-6);
        assert!((archie(1e-8, 0.33, &p) - 0.33).abs() < 1e-6);
    }

    #[test]
    fn bounds_and_monotonicity_on_grid() {
        let p = ArchieParams::default();
        let (sm, sf) = (0.33, 0.70);
        let mut last = archie(0.0, sm, &p);
        for k in 1..=10_000 {
            let c = k as f64 / 10_000.0;
            let s = archie(c, sm, &p);
            assert!(s >= sm.min(sf) - 1e-14 && s <= sm.max(sf) + 1e-14);
            assert!(s >= last - 1e-12, "non-monotone at c = {c}");
            last = s;
        }
    }

    #[test]
    fn bounds_hold_when_fluid_less_conductive() {
        // CSF background above blood: mixing still stays inside phases
        let p = ArchieParams::default();
        for k in 0..=1000 {
            let c = k as f64 / 1000.0;
            let s = archie(c, 1.79, &p);
            assert!(s >= 0.70 - 1e-14 && s <= 1.79 + 1e-14);
        }
    }

    #[test]
    fn atlas_limits() {
        use crate::mesh::CompartmentTable;
        use alloc::vec;
        let table = CompartmentTable::default_head();
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
        let tissue = mesh.tissue_subdomain(&table);
        let omega = mesh.vessel_subdomain(&table);
        let bg = background_conductivity(&mesh, &table);
        let p = ArchieParams::default();

        // c = 0: tissue-only nodes carry the background map
        let c0 = vec![0.0; tissue.n_nodes()];
        let atlas = build_atlas(&mesh, &tissue, &omega, &c0, &bg, &p).unwrap();
        let tissue_only = 4; // node 4 touches only the GM tet
        assert!((atlas[tissue_only] - 0.33).abs() < 1e-14);
        // vessel nodes forced to blood conductivity
        for &g in &omega.nodes {
            assert_eq!(atlas[g], 0.70);
        }

        // c = 1 everywhere: the whole atlas is blood
        let c1 = vec![1.0; tissue.n_nodes()];
        let atlas = build_atlas(&mesh, &tissue, &omega, &c1, &bg, &p).unwrap();
        for &s in &atlas {
            assert_eq!(s, 0.70);
        }

        // mixed field: every node between its phases
        let cm: Vec<f64> = (0..tissue.n_nodes()).map(|i| 0.1 + 0.15 * i as f64).collect();
        let atlas = build_atlas(&mesh, &tissue, &omega, &cm, &bg, &p).unwrap();
        for (g, &s) in atlas.iter().enumerate() {
            let lo = bg[g].min(0.70) - 1e-12;
            let hi = bg[g].max(0.70) + 1e-12;
            assert!(s >= lo && s <= hi, "node {g}: {s} outside [{lo}, {hi}]");
        }
    }
}
