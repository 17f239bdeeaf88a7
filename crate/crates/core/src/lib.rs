//! Numerical toolkit for single-particle wave mechanics in two pictures:
//! ordinary wave functions `ψ(x)` evolved by the Schrödinger equation, and
//! two-argument "bipartite" kernels `Ψ(x, y)` evolved by the commutator
//! equation `iħ ∂Ψ/∂t = (H(x) − H(y)) Ψ`.
//!
//! Everything lives on a uniform one-dimensional grid with hard walls
//! (Dirichlet boundaries). The modules build on each other:
//!
//! * [`grid`] and [`field`]: grids, wave functions, kernels, coefficient
//!   matrices and the quadrature that ties them together.
//! * [`hamiltonian`]: the finite-difference Hamiltonian and its lowest
//!   eigenpairs.
//! * [`evolution`]: Cayley (Crank–Nicolson) propagators for both equations
//!   plus the exact spectral propagator for kernels.
//! * [`analysis`]: Schmidt decomposition, entanglement entropy, reduced
//!   densities, expectation values, transition statistics and collapse.
//! * [`experiments`]: the two-slit duality scan and energy-gap spectroscopy.
//!
//! Inner loops (row/column sweeps, eigenpairs, scan points) run on rayon when
//! the `parallel` feature is enabled; see [`Execution`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod hamiltonian;
pub mod par;
pub mod tol;
mod tridiag;

pub use error::{Error, Result};
pub use field::{CoefficientMatrix, KernelField, ScalarField};
pub use grid::{Grid1D, PhysicalConstants};
pub use par::Execution;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
