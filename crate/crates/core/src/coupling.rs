//! Time-step operators, the implicit Schur operator and the partitioned step.
//!
//! With `W_f = M_f + dt K_f`, `W_s = M_s + dt^2 (K_s + L)`,
//! `A_f = [P^T; G_f]` and `A_s = [0; G_s]`, one backward Euler step of the
//! coupled system reduces to
//!
//! ```text
//! S z~ = A_s W_s^{-1} w_2 - A_f W_f^{-1} w_1 - w_3,   S = A_f W_f^{-1} A_f^T + A_s W_s^{-1} A_s^T
//! ```
//!
//! for the scaled unknown `z~ = dt (p, g)`, followed by two independent
//! subdomain solves for `u` and `eta~ = eta / dt`. Dirichlet rows are
//! eliminated symmetrically from `W_f` and `W_s`, and the matching columns of
//! `A_f` and `A_s` are dropped, so constrained dofs never see the multiplier.

use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::assembly::{
    assemble_body_load, assemble_neumann_load, constrain_symmetric, BlockOperatorSet, DofMap,
};
use crate::error::{invalid, FsiError, Result};
use crate::manufactured::ProblemData;
use crate::sparse::{
    cg, factorize, pcg, CsrMatrix, FactorKind, Factorization, KrylovOptions, LinearOperator,
    TripletBuilder,
};

/// Dense cap for the `direct` Schur solver and for densified oracles.
pub const DEFAULT_DENSE_CAP: usize = 4000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SchurSolver {
    Cg,
    #[default]
    Pcg,
    /// Densify `S` once and factor it; small meshes only.
    Direct,
}

impl SchurSolver {
    pub fn as_str(self) -> &'static str {
        match self {
            SchurSolver::Cg => "cg",
            SchurSolver::Pcg => "pcg",
            SchurSolver::Direct => "direct",
        }
    }
}

impl FromStr for SchurSolver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cg" => Ok(SchurSolver::Cg),
            "pcg" => Ok(SchurSolver::Pcg),
            "direct" => Ok(SchurSolver::Direct),
            _ => Err(format!("expected one of cg, pcg, direct; got `{s}`")),
        }
    }
}

fn replay(e: &FsiError) -> FsiError {
    match e {
        FsiError::SingularMatrix { pivot, value } => FsiError::SingularMatrix {
            pivot: *pivot,
            value: *value,
        },
        FsiError::Size { dim, cap } => FsiError::Size {
            dim: *dim,
            cap: *cap,
        },
        other => invalid(other.to_string()),
    }
}

/// Operators for one (mesh, dt) pair. Immutable once built; the lazily
/// factored preconditioner and dense Schur matrix are cached on first use.
pub struct FsiSystem {
    blocks: BlockOperatorSet,
    dt: f64,
    w_f_raw: CsrMatrix,
    w_s_raw: CsrMatrix,
    w_f: CsrMatrix,
    w_s: CsrMatrix,
    w_f_fact: Factorization,
    w_s_fact: Factorization,
    a_f_raw: CsrMatrix,
    a_s_raw: CsrMatrix,
    a_f: CsrMatrix,
    a_s: CsrMatrix,
    a_f_t: CsrMatrix,
    a_s_t: CsrMatrix,
    augmented: OnceLock<std::result::Result<Factorization, FsiError>>,
    schur_dense: OnceLock<std::result::Result<Cholesky<f64, Dyn>, FsiError>>,
}

impl std::fmt::Debug for FsiSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FsiSystem")
            .field("dt", &self.dt)
            .field("dofs", self.dofs())
            .finish_non_exhaustive()
    }
}

pub fn build_fsi_system(blocks: BlockOperatorSet, dt: f64) -> Result<FsiSystem> {
    FsiSystem::build(blocks, dt)
}

impl FsiSystem {
    pub fn build(blocks: BlockOperatorSet, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        let d = blocks.dofs().clone();
        let w_f_raw = blocks.mass_f.add_scaled(dt, &blocks.stiff_f)?;
        let elastic = blocks.stiff_s.add_scaled(1.0, &blocks.divdiv)?;
        let w_s_raw = blocks.mass_s.add_scaled(dt * dt, &elastic)?;
        let w_f = constrain_symmetric(&w_f_raw, &d.fluid_dirichlet);
        let w_s = constrain_symmetric(&w_s_raw, &d.solid_dirichlet);
        let (w_f_fact, w_s_fact) = rayon::join(
            || factorize(&w_f, FactorKind::Spd),
            || factorize(&w_s, FactorKind::Spd),
        );
        let (w_f_fact, w_s_fact) = (w_f_fact?, w_s_fact?);

        let a_f_raw = blocks.pressure.transpose().vstack(&blocks.g_f)?;
        let a_s_raw = CsrMatrix::zeros(d.n_p, d.n_eta).vstack(&blocks.g_s)?;
        let a_f = a_f_raw.zero_columns(&d.fluid_dirichlet);
        let a_s = a_s_raw.zero_columns(&d.solid_dirichlet);
        let a_f_t = a_f.transpose();
        let a_s_t = a_s.transpose();
        Ok(Self {
            blocks,
            dt,
            w_f_raw,
            w_s_raw,
            w_f,
            w_s,
            w_f_fact,
            w_s_fact,
            a_f_raw,
            a_s_raw,
            a_f,
            a_s,
            a_f_t,
            a_s_t,
            augmented: OnceLock::new(),
            schur_dense: OnceLock::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn blocks(&self) -> &BlockOperatorSet {
        &self.blocks
    }

    pub fn dofs(&self) -> &DofMap {
        self.blocks.dofs()
    }

    /// Dimension of the Schur system, `N_p + N_gamma`.
    pub fn schur_dim(&self) -> usize {
        self.dofs().n_z()
    }

    /// `W_f` after Dirichlet elimination.
    pub fn w_f(&self) -> &CsrMatrix {
        &self.w_f
    }

    pub fn w_s(&self) -> &CsrMatrix {
        &self.w_s
    }

    /// `A_f` with Dirichlet columns dropped.
    pub fn a_f(&self) -> &CsrMatrix {
        &self.a_f
    }

    pub fn a_s(&self) -> &CsrMatrix {
        &self.a_s
    }

    pub fn solve_fluid(&self, rhs: &[f64]) -> Vec<f64> {
        self.w_f_fact.solve(rhs)
    }

    pub fn solve_solid(&self, rhs: &[f64]) -> Vec<f64> {
        self.w_s_fact.solve(rhs)
    }

    /// `A_f W_f^{-1} A_f^T z`.
    pub fn apply_fluid_schur(&self, z: &[f64]) -> Vec<f64> {
        self.a_f
            .mul_vec(&self.w_f_fact.solve(&self.a_f_t.mul_vec(z)))
    }

    /// `A_s W_s^{-1} A_s^T z`.
    pub fn apply_solid_schur(&self, z: &[f64]) -> Vec<f64> {
        self.a_s
            .mul_vec(&self.w_s_fact.solve(&self.a_s_t.mul_vec(z)))
    }

    /// `S z`, never forming `S`.
    pub fn apply_schur(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(
            z.len(),
            self.schur_dim(),
            "Schur operand has the wrong length"
        );
        let (mut f, s) = rayon::join(|| self.apply_fluid_schur(z), || self.apply_solid_schur(z));
        f.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
        f
    }

    /// The saddle matrix `[[W_f, A_f^T], [A_f, 0]]`.
    pub fn augmented_matrix(&self) -> CsrMatrix {
        let n_u = self.dofs().n_u;
        let dim = n_u + self.schur_dim();
        let mut b = TripletBuilder::with_capacity(dim, dim, self.w_f.nnz() + 2 * self.a_f.nnz());
        for (i, j, v) in self.w_f.triplets() {
            b.push(i, j, v);
        }
        for (i, j, v) in self.a_f.triplets() {
            b.push(n_u + i, j, v);
            b.push(j, n_u + i, v);
        }
        b.build()
    }

    fn augmented_factor(&self) -> Result<&Factorization> {
        self.augmented
            .get_or_init(|| factorize(&self.augmented_matrix(), FactorKind::SymmetricIndefinite))
            .as_ref()
            .map_err(replay)
    }

    /// Approximates `S_f^{-1} y` through one solve with the augmented matrix.
    pub fn apply_fluid_preconditioner(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n_u = self.dofs().n_u;
        let fact = self.augmented_factor()?;
        let mut rhs = vec![0.0; n_u + y.len()];
        rhs[n_u..].copy_from_slice(y);
        let sol = fact.solve(&rhs);
        Ok(sol[n_u..].iter().map(|v| -v).collect())
    }

    /// `S` as a linear operator.
    pub fn schur_operator(&self) -> SchurOperator<'_> {
        SchurOperator {
            sys: self,
            part: Part::Full,
        }
    }

    /// `S_f = A_f W_f^{-1} A_f^T` as a linear operator.
    pub fn fluid_schur_operator(&self) -> SchurOperator<'_> {
        SchurOperator {
            sys: self,
            part: Part::Fluid,
        }
    }

    /// The fluid preconditioner as a linear operator (factors on first use).
    pub fn preconditioner(&self) -> Result<FluidPreconditioner<'_>> {
        self.augmented_factor()?;
        Ok(FluidPreconditioner { sys: self })
    }

    fn dense_schur(&self) -> Result<&Cholesky<f64, Dyn>> {
        self.schur_dense
            .get_or_init(|| {
                let s = densify_schur(self, DEFAULT_DENSE_CAP)?;
                Cholesky::new(s).ok_or(FsiError::SingularMatrix {
                    pivot: 0,
                    value: 0.0,
                })
            })
            .as_ref()
            .map_err(replay)
    }

    /// Solves `S z = rhs` with the chosen method.
    pub fn solve_schur(
        &self,
        rhs: &[f64],
        solver: SchurSolver,
        opts: &KrylovOptions,
    ) -> Result<SchurSolve> {
        match solver {
            SchurSolver::Cg => {
                let sol = cg(&self.schur_operator(), rhs, opts)?;
                Ok(SchurSolve {
                    z: sol.x,
                    iterations: sol.iterations,
                    relative_residual: sol.relative_residual,
                })
            }
            SchurSolver::Pcg => {
                let m = self.preconditioner()?;
                let sol = pcg(&self.schur_operator(), &m, rhs, opts)?;
                Ok(SchurSolve {
                    z: sol.x,
                    iterations: sol.iterations,
                    relative_residual: sol.relative_residual,
                })
            }
            SchurSolver::Direct => {
                let chol = self.dense_schur()?;
                let z: Vec<f64> = chol
                    .solve(&DVector::from_column_slice(rhs))
                    .iter()
                    .copied()
                    .collect();
                let r = self.apply_schur(&z);
                let bn = crate::sparse::norm2(rhs);
                let rn = r
                    .iter()
                    .zip(rhs)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                Ok(SchurSolve {
                    z,
                    iterations: 0,
                    relative_residual: if bn > 0.0 { rn / bn } else { rn },
                })
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Part {
    Full,
    Fluid,
}

pub struct SchurOperator<'a> {
    sys: &'a FsiSystem,
    part: Part,
}

impl LinearOperator for SchurOperator<'_> {
    fn dim(&self) -> usize {
        self.sys.schur_dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let v = match self.part {
            Part::Full => self.sys.apply_schur(x),
            Part::Fluid => self.sys.apply_fluid_schur(x),
        };
        y.copy_from_slice(&v);
    }
}

pub struct FluidPreconditioner<'a> {
    sys: &'a FsiSystem,
}

impl LinearOperator for FluidPreconditioner<'_> {
    fn dim(&self) -> usize {
        self.sys.schur_dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let v = self
            .sys
            .apply_fluid_preconditioner(x)
            .expect("preconditioner factored at construction");
        y.copy_from_slice(&v);
    }
}

/// Column-by-column densification of the Schur operator.
pub fn densify_schur(sys: &FsiSystem, cap: usize) -> Result<DMatrix<f64>> {
    crate::conditioning::densify(&sys.schur_operator(), cap)
}

#[derive(Clone, Debug)]
pub struct SchurSolve {
    pub z: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Structure history entering the second-order difference.
#[derive(Clone, Debug, PartialEq)]
pub enum Previous {
    /// Initial structure velocity, used by the first step only.
    Rate(Vec<f64>),
    Displacement(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeState {
    pub step: usize,
    pub time: f64,
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
    pub previous: Previous,
    pub p: Vec<f64>,
    pub g: Vec<f64>,
}

impl TimeState {
    pub fn zero(dofs: &DofMap) -> Self {
        Self {
            step: 0,
            time: 0.0,
            u: vec![0.0; dofs.n_u],
            eta: vec![0.0; dofs.n_eta],
            previous: Previous::Rate(vec![0.0; dofs.n_eta]),
            p: vec![0.0; dofs.n_p],
            g: vec![0.0; dofs.n_gamma],
        }
    }

    /// Interpolated initial data at `t0`; `p` and `g` start at zero.
    pub fn initial(sys: &FsiSystem, data: &dyn ProblemData, t0: f64) -> Self {
        let disc = &sys.blocks().disc;
        let mut s = Self::zero(sys.dofs());
        s.time = t0;
        s.u = disc
            .velocity
            .interpolate_vector(|x, y| data.velocity(x, y, t0));
        s.eta = disc
            .displacement
            .interpolate_vector(|x, y| data.displacement(x, y, t0));
        s.previous = Previous::Rate(
            disc.displacement
                .interpolate_vector(|x, y| data.displacement_rate(x, y, t0)),
        );
        s
    }

    /// `eta^{n-1}`, reconstructed as `eta^0 - dt * rate` at startup.
    pub fn previous_displacement(&self, dt: f64) -> Vec<f64> {
        match &self.previous {
            Previous::Displacement(v) => v.clone(),
            Previous::Rate(r) => self.eta.iter().zip(r).map(|(e, v)| e - dt * v).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub schur_iterations: usize,
    pub schur_residual: f64,
    /// max-norm of `G_s eta^{n+1} / dt - G_f u^{n+1} - G_s eta^n / dt`
    pub constraint_residual: f64,
}

impl StepDiagnostics {
    pub const CSV_HEADER: &'static str =
        "step,time,schur_iterations,schur_residual,constraint_residual";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{},{:e},{:e}",
            self.step,
            self.time,
            self.schur_iterations,
            self.schur_residual,
            self.constraint_residual
        )
    }
}

/// Load vectors at `t`: `(f_f + u_N, f_s + eta_N)`, unscaled.
fn loads(sys: &FsiSystem, data: &dyn ProblemData, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let disc = &sys.blocks().disc;
    let mut ff = assemble_body_load(&disc.velocity, |x, y, t| data.fluid_force(x, y, t), t);
    if !disc.layout.fluid_neumann.is_empty() {
        let n = assemble_neumann_load(
            &disc.velocity,
            &disc.layout.fluid_neumann,
            |x, y, t, nn| data.fluid_traction(x, y, t, nn),
            t,
        )?;
        ff.iter_mut().zip(&n).for_each(|(a, b)| *a += b);
    }
    let mut fs = assemble_body_load(&disc.displacement, |x, y, t| data.solid_force(x, y, t), t);
    if !disc.layout.solid_neumann.is_empty() {
        let n = assemble_neumann_load(
            &disc.displacement,
            &disc.layout.solid_neumann,
            |x, y, t, nn| data.solid_traction(x, y, t, nn),
            t,
        )?;
        fs.iter_mut().zip(&n).for_each(|(a, b)| *a += b);
    }
    Ok((ff, fs))
}

fn check_state(sys: &FsiSystem, state: &TimeState) -> Result<()> {
    let d = sys.dofs();
    let prev = match &state.previous {
        Previous::Rate(v) | Previous::Displacement(v) => v.len(),
    };
    if state.u.len() != d.n_u || state.eta.len() != d.n_eta || prev != d.n_eta {
        return Err(invalid("time state does not match the system dimensions"));
    }
    Ok(())
}

/// `w_2` of the structure equation, including the startup branch.
fn structure_history(sys: &FsiSystem, state: &TimeState) -> Vec<f64> {
    let dt = sys.dt;
    let m = &sys.blocks().mass_s;
    let me = m.mul_vec(&state.eta);
    match &state.previous {
        Previous::Displacement(prev) => {
            let mp = m.mul_vec(prev);
            me.iter()
                .zip(&mp)
                .map(|(a, b)| (2.0 * a - b) / dt)
                .collect()
        }
        Previous::Rate(rate) => {
            let mr = m.mul_vec(rate);
            me.iter().zip(&mr).map(|(a, b)| a / dt + b).collect()
        }
    }
}

fn scatter(len: usize, dofs: &[usize], values: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; len];
    for (&d, &x) in dofs.iter().zip(values) {
        v[d] = x;
    }
    v
}

/// Interface constraint residual in the max norm (raw, unconstrained blocks).
pub fn constraint_residual(sys: &FsiSystem, u: &[f64], eta: &[f64], eta_prev: &[f64]) -> f64 {
    let b = sys.blocks();
    let diff: Vec<f64> = eta
        .iter()
        .zip(eta_prev)
        .map(|(a, c)| (a - c) / sys.dt)
        .collect();
    let gs = b.g_s.mul_vec(&diff);
    let gf = b.g_f.mul_vec(u);
    gs.iter()
        .zip(&gf)
        .map(|(a, c)| (a - c).abs())
        .fold(0.0, f64::max)
}

/// One partitioned step from `state.time` to `state.time + dt`.
pub fn advance(
    sys: &FsiSystem,
    state: &TimeState,
    data: &dyn ProblemData,
    solver: SchurSolver,
    opts: &KrylovOptions,
) -> Result<(TimeState, StepDiagnostics)> {
    check_state(sys, state)?;
    let dt = sys.dt;
    let d = sys.dofs();
    let disc = &sys.blocks().disc;
    let t1 = state.time + dt;

    let (ff, fs) = loads(sys, data, t1)?;
    let mu = sys.blocks().mass_f.mul_vec(&state.u);
    let w1: Vec<f64> = ff.iter().zip(&mu).map(|(f, m)| dt * f + m).collect();
    let hist = structure_history(sys, state);
    let w2: Vec<f64> = fs.iter().zip(&hist).map(|(f, h)| dt * f + h).collect();
    let mut w3 = vec![0.0; d.n_z()];
    let gs_eta = sys.blocks().g_s.mul_vec(&state.eta);
    for (o, v) in w3[d.n_p..].iter_mut().zip(&gs_eta) {
        *o = v / dt;
    }

    // Dirichlet lifting with the unconstrained blocks
    let ubar = disc.fluid_dirichlet_values(|x, y| data.velocity(x, y, t1));
    let ebar: Vec<f64> = disc
        .solid_dirichlet_values(|x, y| data.displacement(x, y, t1))
        .iter()
        .map(|v| v / dt)
        .collect();
    let u_ext = scatter(d.n_u, &d.fluid_dirichlet, &ubar);
    let e_ext = scatter(d.n_eta, &d.solid_dirichlet, &ebar);
    let mut w1 = sub(&w1, &sys.w_f_raw.mul_vec(&u_ext));
    let mut w2 = sub(&w2, &sys.w_s_raw.mul_vec(&e_ext));
    for (&i, &v) in d.fluid_dirichlet.iter().zip(&ubar) {
        w1[i] = v;
    }
    for (&i, &v) in d.solid_dirichlet.iter().zip(&ebar) {
        w2[i] = v;
    }
    let w3 = add(
        &sub(&w3, &sys.a_s_raw.mul_vec(&e_ext)),
        &sys.a_f_raw.mul_vec(&u_ext),
    );

    let (y_f, y_s) = rayon::join(|| sys.solve_fluid(&w1), || sys.solve_solid(&w2));
    let rhs = sub(&sub(&sys.a_s.mul_vec(&y_s), &sys.a_f.mul_vec(&y_f)), &w3);
    let sol = sys.solve_schur(&rhs, solver, opts)?;
    let z = &sol.z;

    let uf = add(&w1, &sys.a_f_t.mul_vec(z));
    let us = sub(&w2, &sys.a_s_t.mul_vec(z));
    let (u, eta_t) = rayon::join(|| sys.solve_fluid(&uf), || sys.solve_solid(&us));
    let eta: Vec<f64> = eta_t.iter().map(|v| v * dt).collect();
    let p = z[..d.n_p].iter().map(|v| v / dt).collect();
    let g = z[d.n_p..].iter().map(|v| v / dt).collect();

    let diag = StepDiagnostics {
        step: state.step + 1,
        time: t1,
        schur_iterations: sol.iterations,
        schur_residual: sol.relative_residual,
        constraint_residual: constraint_residual(sys, &u, &eta, &state.eta),
    };
    let next = TimeState {
        step: state.step + 1,
        time: t1,
        u,
        previous: Previous::Displacement(state.eta.clone()),
        eta,
        p,
        g,
    };
    Ok((next, diag))
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Number of steps `T / dt`, rejecting non-integral ratios.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final > 0.0 && dt > 0.0) {
        return Err(invalid("final time and time step must be positive"));
    }
    let n = (t_final / dt).round();
    if n < 1.0 || (n * dt - t_final).abs() > 1e-9 * t_final {
        return Err(invalid(format!(
            "T = {t_final} is not an integer multiple of dt = {dt}"
        )));
    }
    Ok(n as usize)
}

/// Advances `initial` to `t_final`, collecting per-step diagnostics.
pub fn run_transient(
    sys: &FsiSystem,
    initial: TimeState,
    t_final: f64,
    data: &dyn ProblemData,
    solver: SchurSolver,
    opts: &KrylovOptions,
) -> Result<(TimeState, Vec<StepDiagnostics>)> {
    let steps = step_count(t_final - initial.time, sys.dt)?;
    let mut state = initial;
    let mut diags = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (next, diag) = advance(sys, &state, data, solver, opts)?;
        state = next;
        diags.push(diag);
    }
    Ok((state, diags))
}

/// Assembles the undecomposed step matrix in the unknowns `(u, p, eta, g)`,
/// with Dirichlet rows replaced by identity rows.
pub fn monolithic_matrix(sys: &FsiSystem) -> Result<CsrMatrix> {
    let b = sys.blocks();
    let d = sys.dofs();
    let dt = sys.dt;
    let [ou, op, oe, og] = d.offsets();
    let n = d.total();
    let mut fixed = vec![false; n];
    for &i in &d.fluid_dirichlet {
        fixed[ou + i] = true;
    }
    for &i in &d.solid_dirichlet {
        fixed[oe + i] = true;
    }
    let mut t = TripletBuilder::new(n, n);
    let mut push = |i: usize, j: usize, v: f64| {
        if !fixed[i] {
            t.push(i, j, v);
        }
    };
    for (i, j, v) in sys.w_f_raw.triplets() {
        push(ou + i, ou + j, v);
    }
    for (i, j, v) in b.pressure.triplets() {
        push(ou + i, op + j, -dt * v);
        push(op + j, ou + i, v);
    }
    for (i, j, v) in b.g_f.triplets() {
        push(ou + j, og + i, -dt * v);
        push(og + i, ou + j, -v);
    }
    for (i, j, v) in sys.w_s_raw.triplets() {
        push(oe + i, oe + j, v / dt);
    }
    for (i, j, v) in b.g_s.triplets() {
        push(oe + j, og + i, dt * v);
        push(og + i, oe + j, v / dt);
    }
    for i in (0..n).filter(|&i| fixed[i]) {
        t.push(i, i, 1.0);
    }
    Ok(t.build())
}

/// One step by a direct solve of the full block system; a test oracle.
pub fn monolithic_solve(
    sys: &FsiSystem,
    state: &TimeState,
    data: &dyn ProblemData,
) -> Result<TimeState> {
    check_state(sys, state)?;
    let d = sys.dofs();
    let dt = sys.dt;
    let [ou, op, oe, og] = d.offsets();
    let disc = &sys.blocks().disc;
    let t1 = state.time + dt;
    let (ff, fs) = loads(sys, data, t1)?;

    let mut rhs = vec![0.0; d.total()];
    let mu = sys.blocks().mass_f.mul_vec(&state.u);
    for i in 0..d.n_u {
        rhs[ou + i] = dt * ff[i] + mu[i];
    }
    let hist = structure_history(sys, state);
    for i in 0..d.n_eta {
        rhs[oe + i] = dt * fs[i] + hist[i];
    }
    let gs_eta = sys.blocks().g_s.mul_vec(&state.eta);
    for (i, v) in gs_eta.iter().enumerate() {
        rhs[og + i] = v / dt;
    }
    let ubar = disc.fluid_dirichlet_values(|x, y| data.velocity(x, y, t1));
    for (&i, &v) in d.fluid_dirichlet.iter().zip(&ubar) {
        rhs[ou + i] = v;
    }
    let ebar = disc.solid_dirichlet_values(|x, y| data.displacement(x, y, t1));
    for (&i, &v) in d.solid_dirichlet.iter().zip(&ebar) {
        rhs[oe + i] = v;
    }

    let fact = factorize(&monolithic_matrix(sys)?, FactorKind::SymmetricIndefinite)?;
    let x = fact.solve(&rhs);
    Ok(TimeState {
        step: state.step + 1,
        time: t1,
        u: x[ou..op].to_vec(),
        p: x[op..oe].to_vec(),
        previous: Previous::Displacement(state.eta.clone()),
        eta: x[oe..og].to_vec(),
        g: x[og..].to_vec(),
    })
}
