//! Numerical toolkit for a triply connected circular domain.
//!
//! The crate builds, from scratch and at desk scale, the chain of objects
//! needed to study contractive matrix-valued analytic functions on a unit
//! disk with two circular holes:
//!
//! 1. [`geometry`] — the domain, its boundary circles, and its Schottky
//!    double;
//! 2. [`laplace`] / [`context`] — a spectral boundary-collocation solver for
//!    the Dirichlet problem, harmonic measures, Green's function, Poisson
//!    kernels, and their periods;
//! 3. [`scalar_inner`] — scalar inner functions parametrized by one boundary
//!    point per circle, via analytic completion of Herglotz kernels;
//! 4. [`theta`] / [`abel`] — the genus-2 period matrix, Riemann theta
//!    function with characteristics, and the Abel–Jacobi map of the double;
//! 5. [`fay`] — the reproducing kernel of the boundary Hardy space in both a
//!    Gram (orthonormalization) form and a theta-quotient form, with residue
//!    data at its back-sheet poles;
//! 6. [`matrix_inner`] — a two-parameter family of 2×2 matrix inner
//!    functions with controlled zero sets;
//! 7. [`agler`] — a sampled cone-feasibility engine with primal/dual
//!    certificates, transfer-function realizations, and functional-calculus
//!    evidence extracted from dual certificates.

#![warn(missing_docs)]

pub mod abel;
pub mod agler;
pub mod context;
pub mod error;
pub mod fay;
pub mod geometry;
pub mod herglotz;
pub mod laplace;
pub mod linalg;
pub mod matrix_inner;
pub mod rootfind;
pub mod scalar_inner;
pub mod theta;

pub use context::DomainContext;
pub use geometry::DomainSpec;
