//! Three-component boundary pulse: percussion, tidal and dicrotic waves
//! windowed over the cardiac cycle, supported on configurable inflow
//! spheres, normalized to a target pulse pressure.

use alloc::format;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::geo::{self, Vec3};

/// Four-term Blackman-Harris window on (0, 1), periodically extended so
/// w(t) = w(t + 1). Peaks at exactly 1 for t = 1/2.
pub fn blackman_harris(t: f64) -> f64 {
    const A0: f64 = 0.35875;
    const A1: f64 = 0.48829;
    const A2: f64 = 0.14128;
    const A3: f64 = 0.01168;
    let x = t - libm::floor(t);
    let w = 2.0 * core::f64::consts::PI * x;
    A0 - A1 * libm::cos(w) + A2 * libm::cos(2.0 * w) - A3 * libm::cos(3.0 * w)
}

/// Boundary pulse model. Component weights, durations and start times are
/// cycle fractions; `amplitude_pa` is fixed at construction so that the
/// waveform's max minus min over one cycle equals `pulse_pressure_pa`.
#[derive(Debug, Clone)]
pub struct PulseSpec {
    /// Percussion, tidal, dicrotic weights.
    pub weights: [f64; 3],
    /// Component durations as cycle fractions.
    pub durations: [f64; 3],
    /// Component start times as cycle fractions in [0, 1).
    pub starts: [f64; 3],
    /// Cycle length (s).
    pub cycle_s: f64,
    /// Normalizing amplitude (Pa).
    pub amplitude_pa: f64,
    /// Target peak-to-trough pressure (Pa).
    pub pulse_pressure_pa: f64,
    /// Support spheres (center, radius) in meters.
    pub spheres: Vec<(Vec3, f64)>,
}

impl PulseSpec {
    /// Build and normalize a pulse. Defaults follow the three-component
    /// wave parameters; see [`PulseSpec::default_for`].
    pub fn new(
        weights: [f64; 3],
        durations: [f64; 3],
        starts: [f64; 3],
        cycle_s: f64,
        pulse_pressure_pa: f64,
        spheres: Vec<(Vec3, f64)>,
    ) -> Result<Self, CoreError> {
        for (i, (&w, &d)) in weights.iter().zip(&durations).enumerate() {
            if !(w > 0.0) || !(d > 0.0) {
                return Err(CoreError::InvalidConfig(format!(
                    "pulse component {i} must have positive weight and duration"
                )));
            }
        }
        for &s in &starts {
            if !(0.0..1.0).contains(&s) {
                return Err(CoreError::InvalidConfig(format!(
                    "pulse start time {s} outside [0, 1)"
                )));
            }
        }
        if !(cycle_s > 0.0) || !(pulse_pressure_pa > 0.0) {
            return Err(CoreError::InvalidConfig(
                "cycle length and pulse pressure must be positive".into(),
            ));
        }
        let mut spec = Self {
            weights,
            durations,
            starts,
            cycle_s,
            amplitude_pa: 1.0,
            pulse_pressure_pa,
            spheres,
        };
        let (max, min) = spec.raw_extrema();
        let swing = max - min;
        if !(swing > 0.0) {
            return Err(CoreError::InvalidConfig(
                "pulse waveform has zero swing".into(),
            ));
        }
        spec.amplitude_pa = pulse_pressure_pa / swing;
        Ok(spec)
    }

    /// Default wave shape at the given cycle length and pulse pressure:
    /// weights 0.50/0.30/0.25, durations 0.55/0.55/0.60, starts
    /// 0.05/0.20/0.38.
    pub fn default_for(
        cycle_s: f64,
        pulse_pressure_pa: f64,
        spheres: Vec<(Vec3, f64)>,
    ) -> Result<Self, CoreError> {
        Self::new(
            [0.50, 0.30, 0.25],
            [0.55, 0.55, 0.60],
            [0.05, 0.20, 0.38],
            cycle_s,
            pulse_pressure_pa,
            spheres,
        )
    }

    /// Unit-amplitude waveform at a cycle phase in [0, 1). Each component
    /// fires once per cycle over its own duration window.
    fn raw(&self, phase: f64) -> f64 {
        let mut v = 0.0;
        for i in 0..3 {
            let u = phase - self.starts[i];
            let u = u - libm::floor(u);
            if u <= self.durations[i] {
                v += self.weights[i] * blackman_harris(u / self.durations[i]);
            }
        }
        v
    }

    /// (max, min) of the unit-amplitude waveform over one cycle, located
    /// by dense sampling plus golden-section refinement.
    fn raw_extrema(&self) -> (f64, f64) {
        const N: usize = 8192;
        let mut max = (0usize, f64::NEG_INFINITY);
        let mut min = (0usize, f64::INFINITY);
        for i in 0..N {
            let v = self.raw(i as f64 / N as f64);
            if v > max.1 {
                max = (i, v);
            }
            if v < min.1 {
                min = (i, v);
            }
        }
        let refine = |center: usize, maximize: bool| -> f64 {
            let golden = (libm::sqrt(5.0) - 1.0) / 2.0;
            let mut a = (center as f64 - 1.0) / N as f64;
            let mut b = (center as f64 + 1.0) / N as f64;
            let eval = |x: f64| {
                let v = self.raw(x - libm::floor(x));
                if maximize {
                    -v
                } else {
                    v
                }
            };
            let mut c = b - golden * (b - a);
            let mut d = a + golden * (b - a);
            let mut fc = eval(c);
            let mut fd = eval(d);
            for _ in 0..100 {
                if fc < fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - golden * (b - a);
                    fc = eval(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + golden * (b - a);
                    fd = eval(d);
                }
            }
            let v = eval((a + b) / 2.0);
            if maximize {
                -v
            } else {
                v
            }
        };
        (refine(max.0, true), refine(min.0, false))
    }

    /// Pulse value at time t for points inside the support (Pa).
    pub fn waveform(&self, t_s: f64) -> f64 {
        let phase = t_s / self.cycle_s;
        self.amplitude_pa * self.raw(phase - libm::floor(phase))
    }

    /// Boundary pulse at a point: the waveform inside any support sphere,
    /// exactly zero outside.
    pub fn pressure_at(&self, x: Vec3, t_s: f64) -> f64 {
        let inside = self
            .spheres
            .iter()
            .any(|&(c, r)| geo::dist(x, c) <= r);
        if inside {
            self.waveform(t_s)
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn window_peak_and_symmetry() {
        assert!((blackman_harris(0.5) - 1.0).abs() < 1e-15);
        assert!((blackman_harris(0.25) - blackman_harris(0.75)).abs() < 1e-15);
        // frozen closed-form value of the 4-term window at 1/4
        assert!((blackman_harris(0.25) - 0.21747).abs() < 1e-15);
        for t in [0.1, 0.37, 0.9] {
            assert!((blackman_harris(t) - blackman_harris(t + 1.0)).abs() < 1e-12);
        }
    }

    fn default_pulse(cycle: f64) -> PulseSpec {
        PulseSpec::default_for(cycle, 50.0 * 133.322, vec![([0.0; 3], 0.01)]).unwrap()
    }

    #[test]
    fn normalized_swing_matches_pulse_pressure() {
        for cycle in [1.0, 0.75] {
            let p = default_pulse(cycle);
            let n = 60_000;
            let mut max = f64::NEG_INFINITY;
            let mut min = f64::INFINITY;
            for i in 0..n {
                let v = p.waveform(cycle * i as f64 / n as f64);
                max = max.max(v);
                min = min.min(v);
            }
            let swing = max - min;
            let target = 50.0 * 133.322;
            assert!(
                ((swing - target) / target).abs() < 1e-9,
                "swing {swing} vs {target}"
            );
        }
    }

    #[test]
    fn zero_outside_spheres() {
        let p = default_pulse(1.0);
        for k in 0..50 {
            let t = 0.02 * k as f64;
            assert_eq!(p.pressure_at([0.5, 0.0, 0.0], t), 0.0);
            assert_eq!(p.pressure_at([0.0, 0.011, 0.0], t), 0.0);
        }
    }

    #[test]
    fn cycle_periodic() {
        for cycle in [1.0, 0.75] {
            let p = default_pulse(cycle);
            for k in 0..97 {
                let t = 0.031 * k as f64;
                let a = p.pressure_at([0.0; 3], t);
                let b = p.pressure_at([0.0; 3], t + cycle);
                assert!((a - b).abs() <= 1e-9 * p.pulse_pressure_pa);
            }
        }
    }

    #[test]
    fn amplitude_scales_linearly() {
        let p1 = default_pulse(1.0);
        let mut p2 = p1.clone();
        p2.amplitude_pa *= 2.0;
        for k in 0..17 {
            let t = 0.06 * k as f64;
            assert!((p2.waveform(t) - 2.0 * p1.waveform(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(PulseSpec::new(
            [0.0, 0.3, 0.25],
            [0.55, 0.55, 0.60],
            [0.05, 0.20, 0.38],
            1.0,
            6666.1,
            vec![],
        )
        .is_err());
        assert!(PulseSpec::new(
            [0.5, 0.3, 0.25],
            [0.55, 0.55, 0.60],
            [1.05, 0.20, 0.38],
            1.0,
            6666.1,
            vec![],
        )
        .is_err());
    }
}
