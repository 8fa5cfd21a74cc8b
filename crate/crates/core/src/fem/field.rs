//! Nodal coefficient fields on a subdomain.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;

/// Scalar nodal field (one coefficient per subdomain node) with its
/// physical unit and the simulation time it belongs to.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub unit: &'static str,
    pub time_s: f64,
}

impl ScalarField {
    pub fn zeros(n: usize, unit: &'static str) -> Self {
        Self {
            values: vec![0.0; n],
            unit,
            time_s: 0.0,
        }
    }

    pub fn constant(n: usize, value: f64, unit: &'static str) -> Self {
        Self {
            values: vec![value; n],
            unit,
            time_s: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self, step: usize, name: &'static str) -> Result<(), CoreError> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(CoreError::NumericalAbort { step, field: name })
        }
    }
}

/// Three-component nodal field stored as coordinate blocks.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub comps: [Vec<f64>; 3],
    pub unit: &'static str,
    pub time_s: f64,
}

impl VectorField {
    pub fn zeros(n: usize, unit: &'static str) -> Self {
        Self {
            comps: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            unit,
            time_s: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.comps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps[0].is_empty()
    }

    pub fn at(&self, node: usize) -> [f64; 3] {
        [
            self.comps[0][node],
            self.comps[1][node],
            self.comps[2][node],
        ]
    }

    /// Euclidean magnitude per node.
    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let v = self.at(i);
                libm::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            })
            .collect()
    }

    pub fn check_finite(&self, step: usize, name: &'static str) -> Result<(), CoreError> {
        for c in &self.comps {
            if !c.iter().all(|v| v.is_finite()) {
                return Err(CoreError::NumericalAbort { step, field: name });
            }
        }
        Ok(())
    }
}
