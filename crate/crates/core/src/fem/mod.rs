//! Linear-Lagrangian finite-element kernels: basis gradients, quadrature,
//! sparse assembly and SPD solves.

mod assembly;
mod element;
mod field;
pub mod quadrature;
mod solver;
mod sparse;

pub use assembly::{
    assemble_boundary_mass, assemble_directional_stiffness, assemble_load, assemble_mass,
    assemble_stiffness, assemble_surface_load, subdomain_pattern, Coeff,
};
pub use element::{element_field_gradient, element_gradients, mesh_element_gradients};
pub use field::{ScalarField, VectorField};
pub use solver::{solve_spd, SolveOptions};
pub use sparse::SparseOperator;
