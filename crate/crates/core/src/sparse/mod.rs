//! Compressed-row storage, direct factorizations and Krylov solvers.

mod csr;
mod factor;
mod krylov;
mod operator;

pub use csr::{CsrMatrix, TripletBuilder};
pub use factor::{factorize, reverse_cuthill_mckee, FactorKind, Factorization};
pub use krylov::{cg, pcg, KrylovOptions, KrylovSolution};
pub use operator::{FnOperator, IdentityOperator, LinearOperator};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
