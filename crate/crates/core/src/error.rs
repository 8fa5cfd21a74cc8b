//! Error types shared by the core kernels.

use alloc::string::String;
use core::fmt;

/// Errors produced by mesh construction, assembly, solvers and the
/// simulation loop.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A tetrahedron references a node index outside the node list.
    OrphanNodeReference { tet: usize, node: usize },
    /// A tetrahedron has signed volume below the degeneracy threshold.
    DegenerateTet { tet: usize, volume: f64 },
    /// A tet carries a compartment label that is not in the table.
    UnknownCompartment { label: String },
    /// The artery surface is non-manifold (a face shared by >2 vessel tets).
    NonManifoldSurface { face: [usize; 3] },
    /// Synthetic geometry cannot be built as requested.
    InfeasibleGeometry(String),
    /// Target edge length cannot resolve the tube radius.
    ResolutionTooCoarse { radius: f64, h: f64 },
    /// Area-weighted mean microvessel density over the artery wall is zero.
    ZeroMeanDensity,
    /// A coefficient field that must be non-negative has a negative entry.
    NegativeCoefficient { node: usize, value: f64 },
    /// A coefficient is missing on a node required by a boundary integral.
    MissingSurfaceCoefficient { node: usize },
    /// Iterative solver failed to reach the residual contract.
    SolverDidNotConverge { iterations: usize, residual: f64 },
    /// The matrix handed to the SPD solver is not positive definite.
    IndefiniteMatrix,
    /// A field became non-finite during time stepping.
    NumericalAbort { step: usize, field: &'static str },
    /// A configuration invariant was violated.
    InvalidConfig(String),
    /// A field has the wrong length for the subdomain it claims to live on.
    FieldSizeMismatch { expected: usize, got: usize },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::OrphanNodeReference { tet, node } => {
                write!(f, "tet {tet} references missing node {node}")
            }
            CoreError::DegenerateTet { tet, volume } => {
                write!(f, "tet {tet} is degenerate (volume {volume:e} m^3)")
            }
            CoreError::UnknownCompartment { label } => {
                write!(f, "unknown compartment label '{label}'")
            }
            CoreError::NonManifoldSurface { face } => {
                write!(
                    f,
                    "non-manifold artery surface at face ({}, {}, {})",
                    face[0], face[1], face[2]
                )
            }
            CoreError::InfeasibleGeometry(msg) => write!(f, "infeasible geometry: {msg}"),
            CoreError::ResolutionTooCoarse { radius, h } => write!(
                f,
                "edge length {h} m too coarse for tube radius {radius} m \
                 (fewer than 4 elements across a diameter)"
            ),
            CoreError::ZeroMeanDensity => {
                write!(f, "mean microvessel density over the artery wall is zero")
            }
            CoreError::NegativeCoefficient { node, value } => {
                write!(f, "negative coefficient {value} at node {node}")
            }
            CoreError::MissingSurfaceCoefficient { node } => {
                write!(f, "coefficient missing on surface node {node}")
            }
            CoreError::SolverDidNotConverge { iterations, residual } => write!(
                f,
                "solver did not converge in {iterations} iterations \
                 (relative residual {residual:e})"
            ),
            CoreError::IndefiniteMatrix => write!(f, "matrix is not positive definite"),
            CoreError::NumericalAbort { step, field } => {
                write!(f, "non-finite value in field '{field}' at step {step}")
            }
            CoreError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            CoreError::FieldSizeMismatch { expected, got } => {
                write!(f, "field has {got} entries, subdomain expects {expected}")
            }
        }
    }
}

impl core::error::Error for CoreError {}
