//! Strongly coupled, non-iterative partitioned solver for a linear
//! Stokes / linear-elasticity interaction problem.
//!
//! The monolithic Lagrange-multiplier system is reduced, once per time step,
//! to a symmetric positive definite equation for the stacked
//! (pressure, interface multiplier) unknown. That equation is solved
//! matrix-free with CG or PCG, after which the fluid and structure updates
//! decouple into two independent subdomain solves.
//!
//! Module map:
//! - [`mesh`]: structured triangle meshes and the interface grid
//! - [`elements`]: Lagrange bases, quadrature, affine maps
//! - [`assembly`]: sparse blocks, load vectors, Dirichlet elimination
//! - [`sparse`]: CSR storage, direct factorizations, Krylov solvers
//! - [`coupling`]: the time-step operators, Schur operator and stepping
//! - [`manufactured`]: exact solution, derived data and error norms
//! - [`conditioning`]: spectral estimates of the Schur operator
//! - [`harness`]: configuration, studies and CSV reports

pub mod assembly;
pub mod conditioning;
pub mod coupling;
pub mod elements;
pub mod error;
pub mod harness;
pub mod manufactured;
pub mod mesh;
pub mod sparse;

pub use error::{FsiError, Result};
