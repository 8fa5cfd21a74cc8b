//! Core kernels for a coupled cerebral-hemodynamics / tissue-conductivity
//! simulation: labeled tetrahedral meshes, P1 finite-element assembly,
//! pulsatile non-Newtonian arterial flow, microcirculatory diffusion, and
//! an Archie-law conductivity map.
//!
//! The crate is `no_std` (with `alloc`); all file formats, configuration
//! parsing and the CLI live in the companion `hemoatlas` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod conductivity;
pub mod error;
pub mod fem;
mod geo;
pub mod hemodynamics;
pub mod mesh;
pub mod microcirculation;
pub mod pipeline;

pub use error::CoreError;
