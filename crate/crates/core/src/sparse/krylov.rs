use super::operator::LinearOperator;
use super::{axpy, dot, norm2};
use crate::error::{invalid, FsiError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOptions {
    pub rel_tol: f64,
    /// `None` means ten times the dimension.
    pub max_iter: Option<usize>,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KrylovSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Recursive residual norms, starting with `||b||` for the zero initial guess.
    pub residual_history: Vec<f64>,
    /// `||b - A x|| / ||b||` recomputed at exit.
    pub relative_residual: f64,
}

/// Conjugate gradients for an SPD operator, zero initial guess.
pub fn cg(op: &dyn LinearOperator, rhs: &[f64], opts: &KrylovOptions) -> Result<KrylovSolution> {
    krylov(op, None, rhs, opts)
}

/// Preconditioned conjugate gradients; `precond` applies `M^{-1}`.
pub fn pcg(
    op: &dyn LinearOperator,
    precond: &dyn LinearOperator,
    rhs: &[f64],
    opts: &KrylovOptions,
) -> Result<KrylovSolution> {
    if precond.dim() != op.dim() {
        return Err(invalid("preconditioner dimension mismatch"));
    }
    krylov(op, Some(precond), rhs, opts)
}

fn krylov(
    op: &dyn LinearOperator,
    precond: Option<&dyn LinearOperator>,
    b: &[f64],
    opts: &KrylovOptions,
) -> Result<KrylovSolution> {
    let n = op.dim();
    if b.len() != n {
        return Err(invalid("right-hand side dimension mismatch"));
    }
    if !(opts.rel_tol > 0.0) {
        return Err(invalid("relative tolerance must be positive"));
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    let mut history = vec![bnorm];
    if bnorm == 0.0 {
        return Ok(KrylovSolution {
            x,
            iterations: 0,
            residual_history: history,
            relative_residual: 0.0,
        });
    }
    let target = opts.rel_tol * bnorm;

    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    let precondition = |r: &[f64], z: &mut [f64]| match precond {
        Some(m) => m.apply(r, z),
        None => z.copy_from_slice(r),
    };
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rnorm = bnorm;

    let mut it = 0;
    while it < max_iter {
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            break;
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        it += 1;
        rnorm = norm2(&r);
        history.push(rnorm);

        if rnorm <= target {
            // confirm against the true residual before accepting
            op.apply(&x, &mut q);
            for ((ri, bi), qi) in r.iter_mut().zip(b).zip(&q) {
                *ri = bi - qi;
            }
            rnorm = norm2(&r);
            if rnorm <= target {
                return Ok(KrylovSolution {
                    x,
                    iterations: it,
                    residual_history: history,
                    relative_residual: rnorm / bnorm,
                });
            }
            // restart from the corrected residual
            precondition(&r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    // the last CG iterate minimizes the energy-norm error over the Krylov space
    Err(FsiError::NoConvergence {
        iterations: it,
        relative_residual: rnorm / bnorm,
        best: x,
    })
}
