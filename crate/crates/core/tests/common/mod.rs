//! Independent oracles shared by the integration tests: a dense
//! element-loop integrator with its own basis and quadrature, and
//! finite-difference derivatives of the closed-form fields.
#![allow(dead_code)]

use fsi_schur::assembly::{BlockOperatorSet, ScalarSpace};
use fsi_schur::manufactured::ExactSolution;
use fsi_schur::mesh::{BoundaryTag, InterfaceGrid};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gauss-Legendre nodes and weights on [0, 1] by Newton on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 + x), 0.5 * w));
    }
    out
}

/// Collapsed (Duffy) tensor Gauss rule on a physical triangle.
pub fn triangle_rule(v: [[f64; 2]; 3], n: usize) -> Vec<([f64; 2], f64)> {
    let g = gauss_legendre(n);
    let det = ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
        - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
        .abs();
    let mut out = Vec::with_capacity(n * n);
    for &(s, ws) in &g {
        for &(t, wt) in &g {
            // (s, t) in the square -> barycentric (1 - s, s (1 - t), s t)
            let (l1, l2) = (s * (1.0 - t), s * t);
            let l0 = 1.0 - l1 - l2;
            let x = l0 * v[0][0] + l1 * v[1][0] + l2 * v[2][0];
            let y = l0 * v[0][1] + l1 * v[1][1] + l2 * v[2][1];
            out.push(([x, y], ws * wt * s * det));
        }
    }
    out
}

/// Lagrange basis on arbitrary physical nodes, built from monomials.
pub struct LocalBasis {
    degree: usize,
    coeffs: DMatrix<f64>,
}

fn monomials(degree: usize, x: f64, y: f64) -> Vec<[f64; 3]> {
    // (value, d/dx, d/dy)
    let mut m = vec![[1.0, 0.0, 0.0], [x, 1.0, 0.0], [y, 0.0, 1.0]];
    if degree == 2 {
        m.extend([[x * x, 2.0 * x, 0.0], [x * y, y, x], [y * y, 0.0, 2.0 * y]]);
    }
    m
}

impl LocalBasis {
    pub fn new(degree: usize, nodes: &[[f64; 2]]) -> Self {
        let n = nodes.len();
        let v = DMatrix::from_fn(n, n, |i, j| {
            monomials(degree, nodes[i][0], nodes[i][1])[j][0]
        });
        let coeffs = v.try_inverse().expect("unisolvent nodes");
        Self { degree, coeffs }
    }

    /// Values and gradients of every basis function at (x, y).
    pub fn eval(&self, x: f64, y: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let m = monomials(self.degree, x, y);
        let n = m.len();
        let mut vals = vec![0.0; n];
        let mut grads = vec![[0.0; 2]; n];
        for a in 0..n {
            for (k, mk) in m.iter().enumerate() {
                let c = self.coeffs[(k, a)];
                vals[a] += c * mk[0];
                grads[a][0] += c * mk[1];
                grads[a][1] += c * mk[2];
            }
        }
        (vals, grads)
    }
}

fn cell_nodes(space: &ScalarSpace, c: usize) -> Vec<[f64; 2]> {
    space
        .cell_dofs(c)
        .iter()
        .map(|&d| space.coords()[d])
        .collect()
}

fn cell_vertices(space: &ScalarSpace, c: usize) -> [[f64; 2]; 3] {
    let t = space.mesh().triangles()[c];
    let p = space.mesh().nodes();
    [p[t[0]], p[t[1]], p[t[2]]]
}

const POINTS: usize = 6;

/// Dense vector-valued form `sum_q w k(vals, grads, a, c, b, d)` in component-major layout.
fn vector_form(
    space: &ScalarSpace,
    k: impl Fn(&[f64], &[[f64; 2]], usize, usize, usize, usize) -> f64,
) -> DMatrix<f64> {
    let n = space.num_dofs();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for c in 0..space.num_cells() {
        let basis = LocalBasis::new(space.degree(), &cell_nodes(space, c));
        let dofs = space.cell_dofs(c);
        for (p, w) in triangle_rule(cell_vertices(space, c), POINTS) {
            let (vals, grads) = basis.eval(p[0], p[1]);
            for ci in 0..2 {
                for (a, &i) in dofs.iter().enumerate() {
                    for di in 0..2 {
                        for (b, &j) in dofs.iter().enumerate() {
                            m[(ci * n + i, di * n + j)] += w * k(&vals, &grads, a, ci, b, di);
                        }
                    }
                }
            }
        }
    }
    m
}

pub fn mass(space: &ScalarSpace, rho: f64) -> DMatrix<f64> {
    vector_form(
        space,
        |v, _, a, c, b, d| if c == d { rho * v[a] * v[b] } else { 0.0 },
    )
}

/// `2 nu (D(phi_j), D(phi_i))` written out through the strain tensors.
pub fn strain(space: &ScalarSpace, nu: f64) -> DMatrix<f64> {
    vector_form(space, |_, g, a, c, b, d| {
        let strain_of = |grad: [f64; 2], comp: usize| {
            let mut e = [[0.0; 2]; 2];
            for r in 0..2 {
                for s in 0..2 {
                    let gu = |row: usize, col: usize| if row == comp { grad[col] } else { 0.0 };
                    e[r][s] = 0.5 * (gu(r, s) + gu(s, r));
                }
            }
            e
        };
        let (ei, ej) = (strain_of(g[a], c), strain_of(g[b], d));
        let mut s = 0.0;
        for r in 0..2 {
            for q in 0..2 {
                s += ei[r][q] * ej[r][q];
            }
        }
        2.0 * nu * s
    })
}

pub fn divdiv(space: &ScalarSpace, lambda: f64) -> DMatrix<f64> {
    vector_form(space, |_, g, a, c, b, d| lambda * g[a][c] * g[b][d])
}

/// `(q_k, div v)` with rows over the vector velocity space.
pub fn pressure(velocity: &ScalarSpace, pressure: &ScalarSpace) -> DMatrix<f64> {
    let n = velocity.num_dofs();
    let mut m = DMatrix::zeros(2 * n, pressure.num_dofs());
    for c in 0..velocity.num_cells() {
        let vb = LocalBasis::new(2, &cell_nodes(velocity, c));
        let pb = LocalBasis::new(1, &cell_nodes(pressure, c));
        for (p, w) in triangle_rule(cell_vertices(velocity, c), POINTS) {
            let (_, g) = vb.eval(p[0], p[1]);
            let (q, _) = pb.eval(p[0], p[1]);
            for comp in 0..2 {
                for (a, &i) in velocity.cell_dofs(c).iter().enumerate() {
                    for (k, &j) in pressure.cell_dofs(c).iter().enumerate() {
                        m[(comp * n + i, j)] += w * q[k] * g[a][comp];
                    }
                }
            }
        }
    }
    m
}

fn hat(breaks: &[f64], l: usize, x: f64) -> f64 {
    let left = if l > 0 { breaks[l - 1] } else { f64::NAN };
    let right = breaks.get(l + 1).copied().unwrap_or(f64::NAN);
    if l > 0 && x >= left && x <= breaks[l] {
        (x - left) / (breaks[l] - left)
    } else if x >= breaks[l] && x <= right {
        (right - x) / (right - breaks[l])
    } else {
        0.0
    }
}

/// `<phi_j, mu_l>` on the interface, rows over the vector multiplier space.
/// The trace is integrated on the sub-intervals cut by the multiplier breakpoints.
pub fn interface(space: &ScalarSpace, grid: &InterfaceGrid) -> DMatrix<f64> {
    let n = space.num_dofs();
    let breaks = grid.breakpoints();
    let nl = breaks.len();
    let mut m = DMatrix::zeros(2 * nl, 2 * n);
    let tri = space.mesh().triangles();
    let nodes = space.mesh().nodes();
    let g = gauss_legendre(POINTS);
    for e in space.mesh().edges_with_tag(BoundaryTag::Interface) {
        let c = tri
            .iter()
            .position(|t| t.contains(&e.nodes[0]) && t.contains(&e.nodes[1]))
            .expect("edge belongs to a cell");
        let basis = LocalBasis::new(space.degree(), &cell_nodes(space, c));
        let (x0, x1) = {
            let (a, b) = (nodes[e.nodes[0]][0], nodes[e.nodes[1]][0]);
            (a.min(b), a.max(b))
        };
        let y = nodes[e.nodes[0]][1];
        let mut cuts = vec![x0];
        cuts.extend(breaks.iter().copied().filter(|&b| b > x0 && b < x1));
        cuts.push(x1);
        for win in cuts.windows(2) {
            for &(s, w) in &g {
                let x = win[0] + s * (win[1] - win[0]);
                let (vals, _) = basis.eval(x, y);
                for l in 0..nl {
                    let h = hat(breaks, l, x);
                    if h == 0.0 {
                        continue;
                    }
                    for (a, &j) in space.cell_dofs(c).iter().enumerate() {
                        let v = w * (win[1] - win[0]) * h * vals[a];
                        for comp in 0..2 {
                            m[(comp * nl + l, comp * n + j)] += v;
                        }
                    }
                }
            }
        }
    }
    m
}

/// Every block recomputed densely.
pub struct DenseBlocks {
    pub mass_f: DMatrix<f64>,
    pub stiff_f: DMatrix<f64>,
    pub pressure: DMatrix<f64>,
    pub mass_s: DMatrix<f64>,
    pub stiff_s: DMatrix<f64>,
    pub divdiv: DMatrix<f64>,
    pub g_f: DMatrix<f64>,
    pub g_s: DMatrix<f64>,
}

pub fn dense_blocks(b: &BlockOperatorSet) -> DenseBlocks {
    let d = &b.disc;
    let c = &b.constants;
    DenseBlocks {
        mass_f: mass(&d.velocity, c.rho_f),
        stiff_f: strain(&d.velocity, c.nu_f),
        pressure: pressure(&d.velocity, &d.pressure),
        mass_s: mass(&d.displacement, c.rho_s),
        stiff_s: strain(&d.displacement, c.nu_s),
        divdiv: divdiv(&d.displacement, c.lambda),
        g_f: interface(&d.velocity, &d.interface),
        g_s: interface(&d.displacement, &d.interface),
    }
}

/// Largest entrywise difference, relative to `max(1, |oracle|)`.
pub fn max_entry_error(a: &DMatrix<f64>, oracle: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), oracle.shape());
    a.iter()
        .zip(oracle.iter())
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Fourth-order central derivative along `axes` (repeated for higher order).
pub fn derivative(f: &dyn Fn([f64; 3]) -> f64, p: [f64; 3], axes: &[usize]) -> f64 {
    const H: f64 = 1e-3;
    match axes.split_first() {
        None => f(p),
        Some((&k, rest)) => {
            let at = |s: f64| {
                let mut q = p;
                q[k] += s * H;
                derivative(f, q, rest)
            };
            (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * H)
        }
    }
}

/// Velocity-like vector field as a function of (x, y, t).
pub type Field<'a> = &'a dyn Fn(f64, f64, f64) -> [f64; 2];

fn component<'a>(f: Field<'a>, i: usize) -> impl Fn([f64; 3]) -> f64 + 'a {
    move |p| f(p[0], p[1], p[2])[i]
}

/// Gradient `[i][j] = d_j f_i`.
pub fn fd_grad(f: Field, p: [f64; 3]) -> [[f64; 2]; 2] {
    let mut g = [[0.0; 2]; 2];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = derivative(&component(f, i), p, &[j]);
        }
    }
    g
}

/// Row-wise divergence of the symmetric gradient.
pub fn fd_div_strain(f: Field, p: [f64; 3]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..2 {
            *o += 0.5
                * (derivative(&component(f, i), p, &[j, j])
                    + derivative(&component(f, j), p, &[i, j]));
        }
    }
    out
}

pub fn fd_grad_div(f: Field, p: [f64; 3]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (i, o) in out.iter_mut().enumerate() {
        for j in 0..2 {
            *o += derivative(&component(f, j), p, &[i, j]);
        }
    }
    out
}

pub fn fd_fluid_forcing(e: &ExactSolution, x: f64, y: f64, t: f64) -> [f64; 2] {
    let c = e.constants;
    let u = |x, y, t| e.velocity(x, y, t);
    let pr = |p: [f64; 3]| e.pressure(p[0], p[1], p[2]);
    let p = [x, y, t];
    let ds = fd_div_strain(&u, p);
    let mut out = [0.0; 2];
    for i in 0..2 {
        let ut = derivative(&component(&u, i), p, &[2]);
        out[i] = c.rho_f * ut - 2.0 * c.nu_f * ds[i] + derivative(&pr, p, &[i]);
    }
    out
}

pub fn fd_solid_forcing(e: &ExactSolution, x: f64, y: f64, t: f64) -> [f64; 2] {
    let c = e.constants;
    let eta = |x, y, t| e.displacement(x, y, t);
    let p = [x, y, t];
    let ds = fd_div_strain(&eta, p);
    let gd = fd_grad_div(&eta, p);
    let mut out = [0.0; 2];
    for i in 0..2 {
        let tt = derivative(&component(&eta, i), p, &[2, 2]);
        out[i] = c.rho_s * tt - 2.0 * c.nu_s * ds[i] - c.lambda * gd[i];
    }
    out
}

pub fn fd_fluid_traction(e: &ExactSolution, x: f64, y: f64, t: f64, n: [f64; 2]) -> [f64; 2] {
    let g = fd_grad(&|x, y, t| e.velocity(x, y, t), [x, y, t]);
    let p = e.pressure(x, y, t);
    let nu = e.constants.nu_f;
    let mut out = [0.0; 2];
    for i in 0..2 {
        for j in 0..2 {
            let s = nu * (g[i][j] + g[j][i]) - if i == j { p } else { 0.0 };
            out[i] += s * n[j];
        }
    }
    out
}

pub fn fd_solid_traction(e: &ExactSolution, x: f64, y: f64, t: f64, n: [f64; 2]) -> [f64; 2] {
    let g = fd_grad(&|x, y, t| e.displacement(x, y, t), [x, y, t]);
    let c = e.constants;
    let div = g[0][0] + g[1][1];
    let mut out = [0.0; 2];
    for i in 0..2 {
        for j in 0..2 {
            let s = c.nu_s * (g[i][j] + g[j][i]) + if i == j { c.lambda * div } else { 0.0 };
            out[i] += s * n[j];
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Largest eigenvalue estimate by power iteration.
pub fn power_norm(apply: impl Fn(&[f64]) -> Vec<f64>, n: usize, iters: usize) -> f64 {
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64).sin().abs());
    let mut lam = 0.0;
    for _ in 0..iters {
        v /= v.norm();
        let w = DVector::from_vec(apply(v.as_slice()));
        lam = w.norm();
        v = w;
    }
    lam
}

/// `max |a - b| / max(|b|_inf, floor)`.
pub fn rel_diff(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(floor);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Uniform random (x, y) in the box `[0,1] x [y0, y0 + 1]` and t in [0, 1].
pub fn random_point(rng: &mut ChaCha8Rng, y0: f64) -> (f64, f64, f64) {
    (
        rng.gen_range(0.0..1.0),
        y0 + rng.gen_range(0.0..1.0),
        rng.gen_range(0.0..1.0),
    )
}
