//! Extremal eigenvalues and condition numbers of SPD operators, plain and
//! preconditioned, by dense eigensolves or Lanczos.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::coupling::{advance, FsiSystem, SchurSolver, TimeState};
use crate::error::{invalid, FsiError, Result};
use crate::manufactured::ProblemData;
use crate::sparse::{dot, KrylovOptions, LinearOperator};

pub const DEFAULT_DENSE_CAP: usize = crate::coupling::DEFAULT_DENSE_CAP;
/// Largest mesh subdivision for which `Auto` picks the dense eigensolver.
pub const DENSE_MAX_SUBDIVISIONS: usize = 8;

/// Applies `op` to every unit vector.
pub fn densify(op: &dyn LinearOperator, cap: usize) -> Result<DMatrix<f64>> {
    let n = op.dim();
    if n > cap {
        return Err(FsiError::Size { dim: n, cap });
    }
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenMethod {
    Dense,
    Lanczos,
}

impl EigenMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EigenMethod::Dense => "dense",
            EigenMethod::Lanczos => "lanczos",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    /// relative Ritz residual for both extremal values
    pub rel_tol: f64,
    /// `None` means the operator dimension
    pub max_iter: Option<usize>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_iter: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EigenMode {
    Dense { cap: usize },
    Lanczos(LanczosOptions),
}

impl Default for EigenMode {
    fn default() -> Self {
        EigenMode::Dense {
            cap: DEFAULT_DENSE_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    pub method: EigenMethod,
    /// operator applications (dense: columns; Lanczos: steps)
    pub iterations: usize,
    pub converged: bool,
}

impl SpectrumEstimate {
    fn new(
        lambda_min: f64,
        lambda_max: f64,
        method: EigenMethod,
        iterations: usize,
        converged: bool,
    ) -> Self {
        Self {
            lambda_min,
            lambda_max,
            kappa: lambda_max / lambda_min,
            method,
            iterations,
            converged,
        }
    }
}

fn dense_extremes(m: DMatrix<f64>) -> Result<(f64, f64)> {
    let eig = SymmetricEigen::new(m);
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let max = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(min > 0.0) {
        return Err(invalid(format!(
            "operator is not positive definite (smallest eigenvalue {min:e})"
        )));
    }
    Ok((min, max))
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Extremal eigenvalues of an SPD operator.
pub fn extremal_eigs(op: &dyn LinearOperator, mode: EigenMode) -> Result<SpectrumEstimate> {
    match mode {
        EigenMode::Dense { cap } => {
            let mut m = densify(op, cap)?;
            symmetrize(&mut m);
            let (lo, hi) = dense_extremes(m)?;
            Ok(SpectrumEstimate::new(
                lo,
                hi,
                EigenMethod::Dense,
                op.dim(),
                true,
            ))
        }
        EigenMode::Lanczos(opts) => lanczos(op, None, opts),
    }
}

/// Extremal eigenvalues of the pencil `A x = mu B x` with `A`, `B` SPD.
/// Dense mode uses `A` and `B`; Lanczos uses `A` and `B^{-1}` (`b_inv`) and
/// needs `B` only for the inner product.
pub fn generalized_extremal_eigs(
    a: &dyn LinearOperator,
    b: &dyn LinearOperator,
    b_inv: &dyn LinearOperator,
    mode: EigenMode,
) -> Result<SpectrumEstimate> {
    if a.dim() != b.dim() || a.dim() != b_inv.dim() {
        return Err(invalid("operator dimensions differ"));
    }
    match mode {
        EigenMode::Dense { cap } => {
            let mut am = densify(a, cap)?;
            let mut bm = densify(b, cap)?;
            symmetrize(&mut am);
            symmetrize(&mut bm);
            let l = bm
                .cholesky()
                .ok_or_else(|| invalid("preconditioner matrix is not positive definite"))?
                .l();
            // C = L^{-1} A L^{-T}
            let x = l
                .solve_lower_triangular(&am)
                .ok_or_else(|| invalid("singular Cholesky factor"))?;
            let mut c = l
                .solve_lower_triangular(&x.transpose())
                .ok_or_else(|| invalid("singular Cholesky factor"))?;
            symmetrize(&mut c);
            let (lo, hi) = dense_extremes(c)?;
            Ok(SpectrumEstimate::new(
                lo,
                hi,
                EigenMethod::Dense,
                a.dim(),
                true,
            ))
        }
        EigenMode::Lanczos(opts) => lanczos(a, Some((b, b_inv)), opts),
    }
}

fn start_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * ((i + 1) as f64).sin()).collect()
}

/// Lanczos with full reorthogonalization, in the `B` inner product when a
/// pencil is given. Stops when both extremal Ritz pairs have relative residual
/// below `rel_tol`.
fn lanczos(
    a: &dyn LinearOperator,
    pencil: Option<(&dyn LinearOperator, &dyn LinearOperator)>,
    opts: LanczosOptions,
) -> Result<SpectrumEstimate> {
    let n = a.dim();
    if n == 0 {
        return Err(invalid("empty operator"));
    }
    let max_iter = opts.max_iter.unwrap_or(n).min(n).max(1);
    let b_apply = |x: &[f64]| -> Vec<f64> {
        match pencil {
            Some((b, _)) => b.apply_vec(x),
            None => x.to_vec(),
        }
    };
    let b_inv_apply = |x: &[f64]| -> Vec<f64> {
        match pencil {
            Some((_, bi)) => bi.apply_vec(x),
            None => x.to_vec(),
        }
    };

    let mut v = start_vector(n);
    let mut bv = b_apply(&v);
    let nrm = dot(&v, &bv).sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
    bv.iter_mut().for_each(|x| *x /= nrm);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut bbasis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last = (f64::NAN, f64::NAN);

    for k in 0..max_iter {
        let av = a.apply_vec(&v);
        let alpha = dot(&v, &av);
        let mut w = b_inv_apply(&av);
        basis.push(v.clone());
        bbasis.push(bv.clone());
        alphas.push(alpha);
        // w <- w - sum_j (v_j^T B w) v_j, applied twice for stability
        for _ in 0..2 {
            for (vj, bvj) in basis.iter().zip(&bbasis) {
                let c = dot(bvj, &w);
                w.iter_mut().zip(vj).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bw = b_apply(&w);
        let beta = dot(&w, &bw).max(0.0).sqrt();

        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (mut imin, mut imax) = (0, 0);
        for i in 0..m {
            if eig.eigenvalues[i] < eig.eigenvalues[imin] {
                imin = i;
            }
            if eig.eigenvalues[i] > eig.eigenvalues[imax] {
                imax = i;
            }
        }
        let (lo, hi) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
        let res = |i: usize| beta * eig.eigenvectors[(m - 1, i)].abs();
        last = (lo, hi);
        let exhausted = beta <= 1e-13 * hi.abs() || k + 1 == n;
        let done = res(imin) <= opts.rel_tol * lo.abs() && res(imax) <= opts.rel_tol * hi.abs();
        if done || exhausted {
            if !(lo > 0.0) {
                return Err(invalid(format!(
                    "operator is not positive definite (Ritz value {lo:e})"
                )));
            }
            return Ok(SpectrumEstimate::new(
                lo,
                hi,
                EigenMethod::Lanczos,
                k + 1,
                true,
            ));
        }
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
        bv = bw.iter().map(|x| x / beta).collect();
    }
    Ok(SpectrumEstimate::new(
        last.0,
        last.1,
        EigenMethod::Lanczos,
        max_iter,
        false,
    ))
}

/// Picks the dense solver on coarse meshes and Lanczos otherwise.
pub fn auto_mode(subdivisions: usize) -> EigenMode {
    if subdivisions <= DENSE_MAX_SUBDIVISIONS {
        EigenMode::default()
    } else {
        EigenMode::Lanczos(LanczosOptions::default())
    }
}

/// Condition numbers and iteration counts for one (mesh, dt) pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionRow {
    pub dx: f64,
    pub dt: f64,
    pub cond_cg: SpectrumEstimate,
    pub cond_pcg: SpectrumEstimate,
    pub iters_cg: usize,
    pub iters_pcg: usize,
}

/// `kappa(S)`, `kappa` of the `S_f`-preconditioned pencil, and CG / PCG
/// iteration counts for the first step from `initial`.
pub fn condition_row(
    sys: &FsiSystem,
    dx: f64,
    initial: &TimeState,
    data: &dyn ProblemData,
    opts: &KrylovOptions,
    mode: EigenMode,
) -> Result<ConditionRow> {
    let s = sys.schur_operator();
    let sf = sys.fluid_schur_operator();
    let m = sys.preconditioner()?;
    let cond_cg = extremal_eigs(&s, mode)?;
    let cond_pcg = generalized_extremal_eigs(&s, &sf, &m, mode)?;
    let (_, d_cg) = advance(sys, initial, data, SchurSolver::Cg, opts)?;
    let (_, d_pcg) = advance(sys, initial, data, SchurSolver::Pcg, opts)?;
    Ok(ConditionRow {
        dx,
        dt: sys.dt(),
        cond_cg,
        cond_pcg,
        iters_cg: d_cg.schur_iterations,
        iters_pcg: d_pcg.schur_iterations,
    })
}

/// Least-squares slope of `ln kappa` against `ln(1/h)`.
pub fn fitted_exponent(h: &[f64], kappa: &[f64]) -> Result<f64> {
    if h.len() != kappa.len() || h.len() < 2 {
        return Err(invalid("need at least two (h, kappa) pairs"));
    }
    if h.iter().chain(kappa).any(|v| !(*v > 0.0)) {
        return Err(invalid("h and kappa must be positive"));
    }
    let xs: Vec<f64> = h.iter().map(|v| -v.ln()).collect();
    let ys: Vec<f64> = kappa.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("mesh sizes must not all be equal"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{CsrMatrix, FnOperator, IdentityOperator, TripletBuilder};

    fn diag(d: &[f64]) -> CsrMatrix {
        let mut b = TripletBuilder::new(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            b.push(i, i, *v);
        }
        b.build()
    }

    #[test]
    fn identity_and_diagonal() {
        let e = extremal_eigs(&IdentityOperator(5), EigenMode::default()).unwrap();
        assert!((e.kappa - 1.0).abs() < 1e-14);
        let d = diag(&[1.0, 4.0]);
        for mode in [
            EigenMode::default(),
            EigenMode::Lanczos(LanczosOptions::default()),
        ] {
            let e = extremal_eigs(&d, mode).unwrap();
            assert!((e.kappa - 4.0).abs() < 1e-10, "{e:?}");
        }
    }

    #[test]
    fn densify_respects_cap() {
        assert!(matches!(
            densify(&IdentityOperator(10), 5),
            Err(FsiError::Size { dim: 10, cap: 5 })
        ));
        assert_eq!(
            densify(&IdentityOperator(3), 5).unwrap(),
            DMatrix::identity(3, 3)
        );
    }

    #[test]
    fn lanczos_matches_dense_on_laplacian() {
        let n = 60;
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
                b.push(i + 1, i, -1.0);
            }
        }
        let a = b.build();
        let d = extremal_eigs(&a, EigenMode::default()).unwrap();
        let l = extremal_eigs(&a, EigenMode::Lanczos(LanczosOptions::default())).unwrap();
        assert!((d.kappa - l.kappa).abs() < 1e-3 * d.kappa, "{d:?} {l:?}");
        // exact spectrum 2 - 2 cos(k pi / (n + 1))
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        assert!((d.lambda_min - (2.0 - 2.0 * h.cos())).abs() < 1e-12);
    }

    #[test]
    fn generalized_pencil() {
        let a = diag(&[2.0, 6.0, 12.0]);
        let b = diag(&[1.0, 2.0, 3.0]);
        let binv = diag(&[1.0, 0.5, 1.0 / 3.0]);
        for mode in [
            EigenMode::default(),
            EigenMode::Lanczos(LanczosOptions::default()),
        ] {
            let e = generalized_extremal_eigs(&a, &b, &binv, mode).unwrap();
            assert!(
                (e.lambda_min - 2.0).abs() < 1e-9 && (e.lambda_max - 4.0).abs() < 1e-9,
                "{e:?}"
            );
        }
    }

    #[test]
    fn indefinite_rejected() {
        let a = diag(&[-1.0, 2.0]);
        assert!(extremal_eigs(&a, EigenMode::default()).is_err());
        let op = FnOperator::new(2, |x: &[f64], y: &mut [f64]| {
            y[0] = -x[0];
            y[1] = x[1];
        });
        assert!(extremal_eigs(&op, EigenMode::Lanczos(LanczosOptions::default())).is_err());
    }

    #[test]
    fn exponent_fit() {
        let h = [0.5, 0.25, 0.125];
        let k: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(-2)).collect();
        assert!((fitted_exponent(&h, &k).unwrap() - 2.0).abs() < 1e-12);
        assert!(fitted_exponent(&[0.5], &[1.0]).is_err());
    }
}
