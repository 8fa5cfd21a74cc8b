//! Arterial-domain physics: boundary pulse, non-Newtonian viscosity,
//! Leray-style smoothing, the dynamic pressure update and the regularized
//! velocity update.

mod operators;
mod pulse;
mod stepping;
mod viscosity;

pub use operators::{
    compute_nu_bar, compute_zeta, FlowOperators, FlowParams, HelmholtzFilter, MMHG_PA,
};
pub use pulse::{blackman_harris, PulseSpec};
pub use stepping::{
    assemble_ppe_rhs, pressure_step, velocity_rhs, velocity_step, FlowState,
};
pub use viscosity::{carreau_yasuda, carreau_yasuda_scalar, shear_rate, ViscosityParams};
