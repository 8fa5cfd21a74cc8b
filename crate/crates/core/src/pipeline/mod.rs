//! Coupled simulation loop: pulse -> pressure -> viscosity -> velocity ->
//! concentration -> conductivity per step, burn-in filtering, snapshot
//! recording and temporal summary statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::conductivity::{archie, background_conductivity, ArchieParams};
use crate::error::CoreError;
use crate::fem::{ScalarField, SolveOptions, VectorField};
use crate::geo::{self, Vec3};
use crate::hemodynamics::{
    assemble_ppe_rhs, carreau_yasuda, pressure_step, shear_rate, velocity_rhs, velocity_step,
    FlowOperators, FlowParams, FlowState, PulseSpec, ViscosityParams,
};
use crate::mesh::{
    boundary_of_subdomain, compute_lambda, BoundarySurface, CompartmentTable, Subdomain, TetMesh,
};
use crate::microcirculation::{
    assemble_source, concentration_step, DiffusionParams, MicroOperators,
};

/// Temporal quantile used for peak maps.
pub const PEAK_QUANTILE: f64 = 0.90;

/// Full simulation request: physics parameters, pulse shape, time grid
/// and output cadence.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub flow: FlowParams,
    pub viscosity: ViscosityParams,
    pub diffusion: DiffusionParams,
    pub archie: ArchieParams,
    /// Cardiac cycle length (s).
    pub cycle_s: f64,
    /// Target peak-to-trough pulse pressure (Pa).
    pub pulse_pressure_pa: f64,
    /// Extra multiplier on the normalized amplitude (0 disables the pulse).
    pub pulse_scale: f64,
    pub pulse_weights: [f64; 3],
    pub pulse_durations: [f64; 3],
    pub pulse_starts: [f64; 3],
    /// Pulse support spheres (center, radius).
    pub spheres: Vec<(Vec3, f64)>,
    /// Total simulated time (s).
    pub total_time_s: f64,
    /// Discarded initial interval (s).
    pub burn_in_s: f64,
    /// Number of equispaced snapshots in (burn-in, total].
    pub n_snapshots: usize,
    pub solver: SolveOptions,
    /// Probe coordinates for time-series extraction.
    pub probes: Vec<Vec3>,
    /// Accept cementation exponents outside [3/2, 5/3].
    pub allow_any_beta: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            flow: FlowParams::default(),
            viscosity: ViscosityParams::default(),
            diffusion: DiffusionParams::default(),
            archie: ArchieParams::default(),
            cycle_s: 1.0,
            pulse_pressure_pa: 50.0 * crate::hemodynamics::MMHG_PA,
            pulse_scale: 1.0,
            pulse_weights: [0.50, 0.30, 0.25],
            pulse_durations: [0.55, 0.55, 0.60],
            pulse_starts: [0.05, 0.20, 0.38],
            spheres: Vec::new(),
            total_time_s: 6.0,
            burn_in_s: 3.0,
            n_snapshots: 300,
            solver: SolveOptions::default(),
            probes: Vec::new(),
            allow_any_beta: false,
        }
    }
}

impl RunConfig {
    /// Diastolic baseline: reference pressure minus half the pulse swing.
    pub fn diastolic_pa(&self) -> f64 {
        self.flow.p_ref - self.pulse_pressure_pa / 2.0
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        self.flow.validate()?;
        self.viscosity.validate()?;
        self.diffusion.validate()?;
        self.archie.validate(self.allow_any_beta)?;
        if !(self.total_time_s > self.burn_in_s) || self.burn_in_s < 0.0 {
            return Err(CoreError::InvalidConfig(
                "require total_time > burn_in >= 0".into(),
            ));
        }
        if self.n_snapshots < 1 {
            return Err(CoreError::InvalidConfig(
                "snapshot count must be at least 1".into(),
            ));
        }
        if !(self.pulse_scale >= 0.0) {
            return Err(CoreError::InvalidConfig(
                "pulse scale must be non-negative".into(),
            ));
        }
        let dt = self.flow.dt;
        let interval = (self.total_time_s - self.burn_in_s) / self.n_snapshots as f64;
        let per = interval / dt;
        if (per - libm::round(per)).abs() > 1e-6 || libm::round(per) < 1.0 {
            return Err(CoreError::InvalidConfig(alloc::format!(
                "time step {dt} s does not divide the snapshot interval {interval} s"
            )));
        }
        Ok(())
    }

    /// Step indices (k, time) at which snapshots are recorded.
    pub fn snapshot_steps(&self) -> Result<Vec<(usize, f64)>, CoreError> {
        let dt = self.flow.dt;
        let interval = (self.total_time_s - self.burn_in_s) / self.n_snapshots as f64;
        let mut out = Vec::with_capacity(self.n_snapshots);
        for i in 0..self.n_snapshots {
            let t = self.burn_in_s + i as f64 * interval;
            let k = libm::round(t / dt) as usize;
            if (k as f64 * dt - t).abs() > 1e-9 {
                return Err(CoreError::InvalidConfig(alloc::format!(
                    "snapshot time {t} s is not on the time grid"
                )));
            }
            out.push((k, t));
        }
        Ok(out)
    }

    pub fn n_steps(&self) -> usize {
        libm::round(self.total_time_s / self.flow.dt) as usize
    }
}

/// One recorded state: arterial fields in the flow domain's numbering,
/// concentration in the tissue numbering, conductivity on all nodes.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time_s: f64,
    pub pressure: Vec<f64>,
    pub velocity: [Vec<f64>; 3],
    pub viscosity: Vec<f64>,
    pub concentration: Vec<f64>,
    pub conductivity: Vec<f64>,
}

/// Ordered snapshots of the post-burn-in window.
#[derive(Debug, Clone, Default)]
pub struct TimeLapse {
    pub snapshots: Vec<Snapshot>,
}

impl TimeLapse {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time_s).collect()
    }
}

/// Run diagnostics reported alongside the time lapse.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub steps: usize,
    pub clamped_nodes_total: usize,
    /// Worst per-step fraction of clamped concentration nodes.
    pub clamp_fraction_max: f64,
    pub kappa: f64,
    pub zeta: f64,
    pub n_vessel_nodes: usize,
    pub n_tissue_nodes: usize,
}

/// Assembled problem: mesh partitions, operators and the pulse.
pub struct Simulation<'m> {
    pub mesh: &'m TetMesh,
    pub omega: Subdomain,
    pub tissue: Subdomain,
    pub surface: BoundarySurface,
    pub lambda: Vec<f64>,
    pub flow_ops: FlowOperators,
    pub micro_ops: MicroOperators,
    pub pulse: PulseSpec,
    pub sigma_background: Vec<f64>,
    config: RunConfig,
}

impl<'m> Simulation<'m> {
    pub fn new(
        mesh: &'m TetMesh,
        table: &CompartmentTable,
        config: RunConfig,
    ) -> Result<Self, CoreError> {
        config.validate()?;
        let omega = mesh.vessel_subdomain(table);
        if omega.tets.is_empty() {
            return Err(CoreError::InvalidConfig(
                "mesh has no vessel compartment".into(),
            ));
        }
        let tissue = mesh.tissue_subdomain(table);
        if tissue.tets.is_empty() {
            return Err(CoreError::InvalidConfig(
                "mesh has no tissue compartment".into(),
            ));
        }
        let surface = boundary_of_subdomain(mesh, &omega)?;
        let lambda = compute_lambda(mesh, &surface, table)?;
        let flow_ops = FlowOperators::new(mesh, &omega, &surface, &lambda, &config.flow)?;
        let micro_ops = MicroOperators::new(
            mesh,
            &tissue,
            &omega,
            &surface,
            &lambda,
            &config.flow,
            &config.diffusion,
            config.flow.dt,
            &config.solver,
        )?;
        let mut pulse = PulseSpec::new(
            config.pulse_weights,
            config.pulse_durations,
            config.pulse_starts,
            config.cycle_s,
            config.pulse_pressure_pa,
            config.spheres.clone(),
        )?;
        pulse.amplitude_pa *= config.pulse_scale;
        let sigma_background = background_conductivity(mesh, table);
        Ok(Self {
            mesh,
            omega,
            tissue,
            surface,
            lambda,
            flow_ops,
            micro_ops,
            pulse,
            sigma_background,
            config,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Boundary pulse sampled on vessel nodes at time t.
    fn pulse_nodal(&self, t: f64) -> Vec<f64> {
        self.omega
            .nodes
            .iter()
            .map(|&g| self.pulse.pressure_at(self.mesh.node(g), t))
            .collect()
    }

    fn conductivity_atlas(&self, c_tissue: &[f64]) -> Result<Vec<f64>, CoreError> {
        crate::conductivity::build_atlas(
            self.mesh,
            &self.tissue,
            &self.omega,
            c_tissue,
            &self.sigma_background,
            &self.config.archie,
        )
    }

    /// Execute the time loop, recording snapshots after burn-in.
    /// Deterministic for a fixed config; any non-finite field aborts with
    /// the step index and field name.
    pub fn run(&self) -> Result<(TimeLapse, RunReport), CoreError> {
        let cfg = &self.config;
        let dt = cfg.flow.dt;
        let n_omega = self.omega.n_nodes();
        let n_tissue = self.tissue.n_nodes();
        let schedule = cfg.snapshot_steps()?;
        let n_steps = cfg.n_steps();

        let mut state = FlowState::initial(
            n_omega,
            &self.flow_ops.wall_local,
            cfg.diastolic_pa(),
            cfg.viscosity.mu_zero,
            |t| self.pulse_nodal(t),
            dt,
        );
        // constant diastolic start: the stiffness kernel makes it an exact
        // fixed point of the recursion under a silent pulse
        state.pressure = ScalarField::constant(n_omega, cfg.diastolic_pa(), "Pa");
        state.pressure_prev = state.pressure.clone();

        let mut concentration = ScalarField::zeros(n_tissue, "1");
        let mut lapse = TimeLapse::default();
        let mut clamped_total = 0usize;
        let mut clamp_fraction_max = 0.0f64;

        let mut schedule_iter = schedule.iter().peekable();
        // a snapshot scheduled before the first step records the rest state
        if let Some(&&(0, t)) = schedule_iter.peek() {
            schedule_iter.next();
            let sigma = self.conductivity_atlas(&concentration.values)?;
            lapse.snapshots.push(self.record(
                t,
                &state.pressure,
                &state.velocity,
                &state.viscosity,
                &concentration,
                sigma,
            ));
        }

        for k in 1..=n_steps {
            let t_k = k as f64 * dt;
            let pulse_k = self.pulse_nodal(t_k);

            let ppe_load = assemble_ppe_rhs(
                self.mesh,
                &self.omega,
                &state.velocity,
                &state.velocity_smoothed,
                &state.viscosity,
                cfg.flow.density,
            )?;
            let p_k = pressure_step(
                &self.flow_ops,
                &ppe_load,
                &state.pressure,
                &state.pressure_prev,
                &pulse_k,
                &state.pulse,
                &state.pulse_prev,
                &cfg.solver,
                k,
            )?;

            let gamma = shear_rate(self.mesh, &self.omega, &state.velocity)?;
            let gamma_smooth = self.flow_ops.filter_visc.apply(
                &self.flow_ops.mass_unit,
                &gamma.values,
                Some(&gamma.values),
                &cfg.solver,
            )?;
            let mu_k = carreau_yasuda(
                &ScalarField {
                    values: gamma_smooth,
                    unit: "1/s",
                    time_s: t_k,
                },
                &cfg.viscosity,
            );
            mu_k.check_finite(k, "viscosity")?;

            let rhs = velocity_rhs(
                self.mesh,
                &self.omega,
                &self.flow_ops,
                &p_k,
                &state.velocity,
                &state.velocity_smoothed,
                &mu_k,
            )?;
            let u_k = velocity_step(&self.flow_ops, &rhs, &state.velocity, &cfg.solver, k)?;

            let mut u_smooth_k = VectorField::zeros(n_omega, "m/s");
            u_smooth_k.time_s = t_k;
            for l in 0..3 {
                u_smooth_k.comps[l] = self.flow_ops.filter_leray.apply(
                    &self.flow_ops.mass_unit,
                    &u_k.comps[l],
                    Some(&state.velocity_smoothed.comps[l]),
                    &cfg.solver,
                )?;
            }
            u_smooth_k.check_finite(k, "smoothed velocity")?;

            let w = assemble_source(
                self.mesh,
                &self.surface,
                &self.tissue,
                &self.omega,
                &p_k.values,
                &self.lambda,
                self.micro_ops.kappa,
                cfg.diastolic_pa(),
                cfg.pulse_pressure_pa,
            )?;
            let c_step = concentration_step(&self.micro_ops, &concentration, &w, &cfg.solver, k)?;
            clamped_total += c_step.clamped;
            clamp_fraction_max =
                clamp_fraction_max.max(c_step.clamped as f64 / n_tissue.max(1) as f64);
            concentration = c_step.field;

            // rotate the recursion history
            state.pressure_prev = core::mem::replace(&mut state.pressure, p_k);
            state.pulse_prev = core::mem::replace(&mut state.pulse, pulse_k);
            state.velocity = u_k;
            state.velocity_smoothed = u_smooth_k;
            state.viscosity = mu_k;
            state.step = k + 1;

            if let Some(&&(ks, t)) = schedule_iter.peek() {
                if ks == k {
                    schedule_iter.next();
                    let sigma = self.conductivity_atlas(&concentration.values)?;
                    lapse.snapshots.push(self.record(
                        t,
                        &state.pressure,
                        &state.velocity,
                        &state.viscosity,
                        &concentration,
                        sigma,
                    ));
                }
            }
        }

        let report = RunReport {
            steps: n_steps,
            clamped_nodes_total: clamped_total,
            clamp_fraction_max,
            kappa: self.micro_ops.kappa,
            zeta: self.flow_ops.zeta,
            n_vessel_nodes: n_omega,
            n_tissue_nodes: n_tissue,
        };
        Ok((lapse, report))
    }

    fn record(
        &self,
        time_s: f64,
        p: &ScalarField,
        u: &VectorField,
        mu: &ScalarField,
        c: &ScalarField,
        sigma: Vec<f64>,
    ) -> Snapshot {
        Snapshot {
            time_s,
            pressure: p.values.clone(),
            velocity: [
                u.comps[0].clone(),
                u.comps[1].clone(),
                u.comps[2].clone(),
            ],
            viscosity: mu.values.clone(),
            concentration: c.values.clone(),
            conductivity: sigma,
        }
    }

    /// Map a tissue-local concentration field to all mesh nodes; lumen
    /// nodes (vessel interior) carry the full blood fraction 1.
    pub fn concentration_global(&self, c_tissue: &[f64]) -> Vec<f64> {
        let mut out = vec![1.0; self.mesh.n_nodes()];
        for (l, &g) in self.tissue.nodes.iter().enumerate() {
            out[g] = c_tissue[l];
        }
        out
    }

    /// Evaluate the conductivity atlas for an arbitrary concentration
    /// field (exposed for exports and tests).
    pub fn atlas_for(&self, c_tissue: &[f64]) -> Result<Vec<f64>, CoreError> {
        self.conductivity_atlas(c_tissue)
    }
}

/// Convenience wrapper: build and run in one call.
pub fn run_simulation(
    mesh: &TetMesh,
    table: &CompartmentTable,
    config: RunConfig,
) -> Result<(TimeLapse, RunReport), CoreError> {
    Simulation::new(mesh, table, config)?.run()
}

/// Per-node temporal statistics of one field.
#[derive(Debug, Clone)]
pub struct FieldStats {
    pub mean: Vec<f64>,
    /// Temporal quantile peak (nearest observed sample at or above the
    /// quantile fraction).
    pub peak: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
}

/// Mean / peak / STD summary over the recorded window.
#[derive(Debug, Clone)]
pub struct SummaryStats {
    pub pressure: FieldStats,
    pub velocity_mag: FieldStats,
    pub viscosity: FieldStats,
    pub concentration: FieldStats,
    pub conductivity: FieldStats,
}

/// Population statistics of one temporal sample series.
pub fn series_stats(series: &[f64], quantile: f64) -> (f64, f64, f64) {
    let n = series.len();
    debug_assert!(n > 0);
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    // one-based rank floor(q n) + 1: the smallest observed value with
    // strictly more than a q-fraction of samples at or below it
    let idx = ((quantile * n as f64) as usize).min(n - 1);
    (mean, sorted[idx], libm::sqrt(var))
}

fn stats_over<F: Fn(&Snapshot, usize) -> f64>(
    lapse: &TimeLapse,
    n_nodes: usize,
    value: F,
) -> FieldStats {
    let n_t = lapse.len();
    let mut mean = vec![0.0; n_nodes];
    let mut peak = vec![0.0; n_nodes];
    let mut std = vec![0.0; n_nodes];
    let mut series = vec![0.0; n_t];
    for node in 0..n_nodes {
        for (t, snap) in lapse.snapshots.iter().enumerate() {
            series[t] = value(snap, node);
        }
        let (m, p, s) = series_stats(&series, PEAK_QUANTILE);
        mean[node] = m;
        peak[node] = p;
        std[node] = s;
    }
    FieldStats { mean, peak, std }
}

/// Nodal temporal mean, quantile peak and population STD for every
/// recorded field. Requires at least two snapshots.
pub fn summarize(lapse: &TimeLapse) -> Result<SummaryStats, CoreError> {
    if lapse.len() < 2 {
        return Err(CoreError::InvalidConfig(
            "summary statistics need at least two snapshots".into(),
        ));
    }
    let first = &lapse.snapshots[0];
    let (n_omega, n_tissue, n_all) = (
        first.pressure.len(),
        first.concentration.len(),
        first.conductivity.len(),
    );
    Ok(SummaryStats {
        pressure: stats_over(lapse, n_omega, |s, i| s.pressure[i]),
        velocity_mag: stats_over(lapse, n_omega, |s, i| {
            let v = [s.velocity[0][i], s.velocity[1][i], s.velocity[2][i]];
            libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
        }),
        viscosity: stats_over(lapse, n_omega, |s, i| s.viscosity[i]),
        concentration: stats_over(lapse, n_tissue, |s, i| s.concentration[i]),
        conductivity: stats_over(lapse, n_all, |s, i| s.conductivity[i]),
    })
}

/// One probe row: nearest-node samples of every field.
#[derive(Debug, Clone)]
pub struct ProbeSample {
    pub time_s: f64,
    pub pressure_pa: f64,
    pub velocity_mps: f64,
    pub viscosity_pas: f64,
    pub concentration: f64,
    pub conductivity_spm: f64,
}

/// Nearest mesh node to a point.
pub fn nearest_node(mesh: &TetMesh, p: Vec3) -> usize {
    let mut best = (0usize, f64::INFINITY);
    for (i, &n) in mesh.nodes().iter().enumerate() {
        let d = geo::dist(n, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Extract the probe time series at a node (global id). Fields whose
/// domain excludes the node read as zero, except concentration which is
/// one inside the lumen.
pub fn probe_series(
    lapse: &TimeLapse,
    omega: &Subdomain,
    tissue: &Subdomain,
    node: usize,
) -> Vec<ProbeSample> {
    let lo = omega.local_of(node);
    let lt = tissue.local_of(node);
    lapse
        .snapshots
        .iter()
        .map(|s| {
            let (p, u, mu) = match lo {
                Some(l) => {
                    let v = [s.velocity[0][l], s.velocity[1][l], s.velocity[2][l]];
                    (
                        s.pressure[l],
                        libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]),
                        s.viscosity[l],
                    )
                }
                None => (0.0, 0.0, 0.0),
            };
            let c = match lt {
                Some(l) => s.concentration[l],
                None => 1.0,
            };
            ProbeSample {
                time_s: s.time_s,
                pressure_pa: p,
                velocity_mps: u,
                viscosity_pas: mu,
                concentration: c,
                conductivity_spm: s.conductivity[node],
            }
        })
        .collect()
}

/// Mean concentration binned by distance to the artery wall. Returns
/// (bin upper edge, mean) pairs for bins that contain nodes.
pub fn wall_distance_profile(
    mesh: &TetMesh,
    tissue: &Subdomain,
    surface: &BoundarySurface,
    c_tissue: &[f64],
    n_bins: usize,
    max_dist: f64,
) -> Vec<(f64, f64)> {
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (l, &g) in tissue.nodes.iter().enumerate() {
        let d = surface.node_distance(mesh, mesh.node(g));
        if d >= max_dist {
            continue;
        }
        let b = ((d / max_dist) * n_bins as f64) as usize;
        let b = b.min(n_bins - 1);
        sums[b] += c_tissue[l];
        counts[b] += 1;
    }
    (0..n_bins)
        .filter(|&b| counts[b] > 0)
        .map(|b| {
            (
                (b + 1) as f64 / n_bins as f64 * max_dist,
                sums[b] / counts[b] as f64,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_stats_step_series() {
        // 90 zeros then 10 ones: quantile rule picks the 91st sorted value
        let mut s = vec![0.0; 90];
        s.extend(vec![1.0; 10]);
        let (mean, peak, std) = series_stats(&s, 0.9);
        assert!((mean - 0.1).abs() < 1e-12);
        assert_eq!(peak, 1.0);
        assert!((std - 0.3).abs() < 1e-12);
    }

    #[test]
    fn series_stats_constant() {
        let s = vec![4.2; 37];
        let (mean, peak, std) = series_stats(&s, 0.9);
        assert_eq!(mean, 4.2);
        assert_eq!(peak, 4.2);
        assert_eq!(std, 0.0);
    }

    #[test]
    fn series_stats_sinusoid_mean_is_offset() {
        let n = 1000;
        let offset = 2.5;
        let s: Vec<f64> = (0..n)
            .map(|i| offset + libm::sin(2.0 * core::f64::consts::PI * 3.0 * i as f64 / n as f64))
            .collect();
        let (mean, _, _) = series_stats(&s, 0.9);
        assert!((mean - offset).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.burn_in_s = 6.0;
        assert!(matches!(
            cfg.validate(),
            Err(CoreError::InvalidConfig(_))
        ));
        let mut cfg = RunConfig::default();
        cfg.n_snapshots = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.flow.dt = 3e-3; // does not divide 0.01 s
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn snapshot_schedule_default_grid() {
        let cfg = RunConfig::default();
        let steps = cfg.snapshot_steps().unwrap();
        assert_eq!(steps.len(), 300);
        assert_eq!(steps[0], (1500, 3.0));
        let (k_last, t_last) = steps[299];
        assert_eq!(k_last, 2995);
        assert!((t_last - 5.99).abs() < 1e-12);
        for w in steps.windows(2) {
            assert_eq!(w[1].0 - w[0].0, 5);
            assert!((w[1].1 - w[0].1 - 0.01).abs() < 1e-9);
        }
    }
}
