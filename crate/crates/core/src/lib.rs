//! Spectral computations for Schrödinger operators `−d²/dx² + q` on compact
//! metric graphs with general self-adjoint vertex conditions.

pub mod condition;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod par;
pub mod problem;
pub mod secular;

pub use condition::{condition_from_subspace, from_family, make_condition, Family, Kind, VertexCondition};
pub use error::{Error, Result};
pub use graph::{Edge, EdgeSpec, End, MetricGraph, Potential};
pub use par::Exec;
pub use problem::{ProblemBuilder, SchrodingerProblem, VertexSpec};
pub use secular::{
    eigenfunctions, eigenfunctions_of, eigenvalues, eigenvalues_with, first_eigenvalues, fundamental_system,
    secular_value, Backend, BoundaryTrace, Eigenfunction, SpectralValue, Spectrum, SpectrumRequest,
};
pub mod analysis;
pub mod fem;
pub mod gallery;
pub mod shrinkage;
pub mod surgery;
