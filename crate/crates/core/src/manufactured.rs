//! Manufactured solution on the unit fluid box and the solid box above it,
//! its derived data, and discrete error norms.
//!
//! With `a = x + t`, `b = y + t`, `s = a + b`:
//!
//! ```text
//! u   = (sin s, -sin s)
//! p   = -2 nu_f cos s + 2 nu_s cos a sin b
//! eta = (sin a sin b, cos a cos b)
//! ```
//!
//! `u` and `eta` are divergence free, `eta_t = u` everywhere and the fluid
//! traction on `y = 1` equals minus the solid traction, so the multiplier has
//! the exact value `g = (0, -2 nu_s cos(x + t) sin(1 + t))`. The
//! [`Variant::Printed`] form replaces `eta_2` by `cos^2 a`, which breaks
//! velocity continuity; it exists only for comparison runs.
//!
//! All forcing and traction data are closed forms built from second-order
//! jets of the primary fields.

use std::str::FromStr;

use crate::assembly::{Discretization, PhysicalConstants, ScalarSpace};
use crate::elements::{quadrature_segment, quadrature_triangle, ReferenceElement};
use crate::error::{invalid, Result};
use crate::mesh::InterfaceGrid;

/// Quadrature order used for error norms, above the assembly order so that
/// norm evaluation never limits observed rates.
pub const ERROR_QUADRATURE_ORDER: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Variant {
    #[default]
    Corrected,
    Printed,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Corrected => "corrected",
            Variant::Printed => "printed",
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "corrected" => Ok(Variant::Corrected),
            "printed" => Ok(Variant::Printed),
            _ => Err(format!("expected `corrected` or `printed`, got `{s}`")),
        }
    }
}

/// Value and derivatives of a scalar field at one space-time point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
    pub tt: f64,
}

impl Jet {
    fn scaled(self, c: f64) -> Jet {
        Jet {
            v: c * self.v,
            x: c * self.x,
            y: c * self.y,
            t: c * self.t,
            xx: c * self.xx,
            xy: c * self.xy,
            yy: c * self.yy,
            tt: c * self.tt,
        }
    }

    fn plus(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            x: self.x + o.x,
            y: self.y + o.y,
            t: self.t + o.t,
            xx: self.xx + o.xx,
            xy: self.xy + o.xy,
            yy: self.yy + o.yy,
            tt: self.tt + o.tt,
        }
    }

    pub fn grad(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

type Tensor = [[f64; 2]; 2];

fn grad_of(j: &[Jet; 2]) -> Tensor {
    [[j[0].x, j[0].y], [j[1].x, j[1].y]]
}

fn sym(g: Tensor) -> Tensor {
    let off = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], off], [off, g[1][1]]]
}

/// Row-wise divergence of `D(v)`.
fn div_strain(j: &[Jet; 2]) -> [f64; 2] {
    [
        0.5 * (2.0 * j[0].xx + j[0].yy + j[1].xy),
        0.5 * (j[1].xx + 2.0 * j[1].yy + j[0].xy),
    ]
}

fn mat_vec(m: Tensor, n: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * n[0] + m[0][1] * n[1],
        m[1][0] * n[0] + m[1][1] * n[1],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactFields {
    pub u: [f64; 2],
    pub p: f64,
    pub eta: [f64; 2],
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExactSolution {
    pub constants: PhysicalConstants,
    pub variant: Variant,
}

impl ExactSolution {
    pub fn new(constants: PhysicalConstants, variant: Variant) -> Self {
        Self { constants, variant }
    }

    pub fn velocity_jets(&self, x: f64, y: f64, t: f64) -> [Jet; 2] {
        let s = x + y + 2.0 * t;
        let (ss, cs) = s.sin_cos();
        let u1 = Jet {
            v: ss,
            x: cs,
            y: cs,
            t: 2.0 * cs,
            xx: -ss,
            xy: -ss,
            yy: -ss,
            tt: -4.0 * ss,
        };
        [u1, u1.scaled(-1.0)]
    }

    pub fn pressure_jet(&self, x: f64, y: f64, t: f64) -> Jet {
        let (a, b) = (x + t, y + t);
        let (ss, cs) = (a + b).sin_cos();
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        // -cos s
        let fluid = Jet {
            v: -cs,
            x: ss,
            y: ss,
            t: 2.0 * ss,
            xx: cs,
            xy: cs,
            yy: cs,
            tt: 4.0 * cs,
        };
        // cos a sin b
        let solid = Jet {
            v: ca * sb,
            x: -sa * sb,
            y: ca * cb,
            t: (a + b).cos(),
            xx: -ca * sb,
            xy: -sa * cb,
            yy: -ca * sb,
            tt: -2.0 * (a + b).sin(),
        };
        fluid
            .scaled(2.0 * self.constants.nu_f)
            .plus(solid.scaled(2.0 * self.constants.nu_s))
    }

    pub fn displacement_jets(&self, x: f64, y: f64, t: f64) -> [Jet; 2] {
        let (a, b) = (x + t, y + t);
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        let (sab, cab) = (a + b).sin_cos();
        let e1 = Jet {
            v: sa * sb,
            x: ca * sb,
            y: sa * cb,
            t: sab,
            xx: -sa * sb,
            xy: ca * cb,
            yy: -sa * sb,
            tt: 2.0 * cab,
        };
        let e2 = match self.variant {
            Variant::Corrected => Jet {
                v: ca * cb,
                x: -sa * cb,
                y: -ca * sb,
                t: -sab,
                xx: -ca * cb,
                xy: sa * sb,
                yy: -ca * cb,
                tt: -2.0 * cab,
            },
            Variant::Printed => {
                let (s2, c2) = (2.0 * a).sin_cos();
                Jet {
                    v: ca * ca,
                    x: -s2,
                    y: 0.0,
                    t: -s2,
                    xx: -2.0 * c2,
                    xy: 0.0,
                    yy: 0.0,
                    tt: -2.0 * c2,
                }
            }
        };
        [e1, e2]
    }

    pub fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let j = self.velocity_jets(x, y, t);
        [j[0].v, j[1].v]
    }

    pub fn pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        self.pressure_jet(x, y, t).v
    }

    pub fn displacement(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let j = self.displacement_jets(x, y, t);
        [j[0].v, j[1].v]
    }

    pub fn displacement_rate(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let j = self.displacement_jets(x, y, t);
        [j[0].t, j[1].t]
    }

    pub fn fields(&self, x: f64, y: f64, t: f64) -> ExactFields {
        ExactFields {
            u: self.velocity(x, y, t),
            p: self.pressure(x, y, t),
            eta: self.displacement(x, y, t),
        }
    }

    /// `2 nu_f D(u) - p I`.
    pub fn fluid_stress(&self, x: f64, y: f64, t: f64) -> Tensor {
        let d = sym(grad_of(&self.velocity_jets(x, y, t)));
        let p = self.pressure(x, y, t);
        let nu = self.constants.nu_f;
        [
            [2.0 * nu * d[0][0] - p, 2.0 * nu * d[0][1]],
            [2.0 * nu * d[1][0], 2.0 * nu * d[1][1] - p],
        ]
    }

    /// `2 nu_s D(eta) + lambda (div eta) I`.
    pub fn solid_stress(&self, x: f64, y: f64, t: f64) -> Tensor {
        let d = sym(grad_of(&self.displacement_jets(x, y, t)));
        let div = d[0][0] + d[1][1];
        let (nu, lam) = (self.constants.nu_s, self.constants.lambda);
        [
            [2.0 * nu * d[0][0] + lam * div, 2.0 * nu * d[0][1]],
            [2.0 * nu * d[1][0], 2.0 * nu * d[1][1] + lam * div],
        ]
    }

    pub fn fluid_traction(&self, x: f64, y: f64, t: f64, n: [f64; 2]) -> [f64; 2] {
        mat_vec(self.fluid_stress(x, y, t), n)
    }

    pub fn solid_traction(&self, x: f64, y: f64, t: f64, n: [f64; 2]) -> [f64; 2] {
        mat_vec(self.solid_stress(x, y, t), n)
    }

    /// Fluid traction on the interface `y = 1` with the fluid normal `(0, 1)`.
    pub fn multiplier(&self, x: f64, t: f64) -> [f64; 2] {
        self.fluid_traction(x, 1.0, t, [0.0, 1.0])
    }

    /// `rho_f u_t - 2 nu_f div D(u) + grad p`.
    pub fn fluid_forcing(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let u = self.velocity_jets(x, y, t);
        let p = self.pressure_jet(x, y, t);
        let d = div_strain(&u);
        let c = &self.constants;
        [
            c.rho_f * u[0].t - 2.0 * c.nu_f * d[0] + p.x,
            c.rho_f * u[1].t - 2.0 * c.nu_f * d[1] + p.y,
        ]
    }

    /// `rho_s eta_tt - 2 nu_s div D(eta) - lambda grad div eta`.
    pub fn solid_forcing(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let e = self.displacement_jets(x, y, t);
        let d = div_strain(&e);
        let gdiv = [e[0].xx + e[1].xy, e[0].xy + e[1].yy];
        let c = &self.constants;
        [
            c.rho_s * e[0].tt - 2.0 * c.nu_s * d[0] - c.lambda * gdiv[0],
            c.rho_s * e[1].tt - 2.0 * c.nu_s * d[1] - c.lambda * gdiv[1],
        ]
    }
}

/// Forcing, boundary and initial data for one run.
///
/// Traction callbacks receive the outward unit normal of the side.
pub trait ProblemData: Sync {
    fn fluid_force(&self, x: f64, y: f64, t: f64) -> [f64; 2];
    fn solid_force(&self, x: f64, y: f64, t: f64) -> [f64; 2];
    fn fluid_traction(&self, x: f64, y: f64, t: f64, n: [f64; 2]) -> [f64; 2];
    fn solid_traction(&self, x: f64, y: f64, t: f64, n: [f64; 2]) -> [f64; 2];
    /// Dirichlet trace and initial value of the velocity.
    fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2];
    /// Dirichlet trace and initial value of the displacement.
    fn displacement(&self, x: f64, y: f64, t: f64) -> [f64; 2];
    /// Initial structure velocity.
    fn displacement_rate(&self, x: f64, y: f64, t: f64) -> [f64; 2];
}

impl ProblemData for ExactSolution {
    fn fluid_force(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.fluid_forcing(x, y, t)
    }
    fn solid_force(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.solid_forcing(x, y, t)
    }
    fn fluid_traction(&self, x: f64, y: f64, t: f64, n: [f64; 2]) -> [f64; 2] {
        ExactSolution::fluid_traction(self, x, y, t, n)
    }
    fn solid_traction(&self, x: f64, y: f64, t: f64, n: [f64; 2]) -> [f64; 2] {
        ExactSolution::solid_traction(self, x, y, t, n)
    }
    fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        ExactSolution::velocity(self, x, y, t)
    }
    fn displacement(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        ExactSolution::displacement(self, x, y, t)
    }
    fn displacement_rate(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        ExactSolution::displacement_rate(self, x, y, t)
    }
}

/// Homogeneous data: every callback returns zero.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroData;

impl ProblemData for ZeroData {
    fn fluid_force(&self, _: f64, _: f64, _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn solid_force(&self, _: f64, _: f64, _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn fluid_traction(&self, _: f64, _: f64, _: f64, _: [f64; 2]) -> [f64; 2] {
        [0.0; 2]
    }
    fn solid_traction(&self, _: f64, _: f64, _: f64, _: [f64; 2]) -> [f64; 2] {
        [0.0; 2]
    }
    fn velocity(&self, _: f64, _: f64, _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn displacement(&self, _: f64, _: f64, _: f64) -> [f64; 2] {
        [0.0; 2]
    }
    fn displacement_rate(&self, _: f64, _: f64, _: f64) -> [f64; 2] {
        [0.0; 2]
    }
}

/// Errors at one time level. `*_h1` is `sqrt(||e||_0^2 + ||D(e)||_0^2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub eta_l2: f64,
    pub eta_h1: f64,
    pub u_l2: f64,
    pub u_h1: f64,
    pub p_l2: f64,
    /// multiplier error in `L2(gamma)`
    pub g_l2: f64,
}

/// Discrete coefficient vectors in the numbering of a [`Discretization`].
#[derive(Clone, Copy, Debug)]
pub struct DiscreteFields<'a> {
    pub u: &'a [f64],
    pub p: &'a [f64],
    pub eta: &'a [f64],
    pub g: &'a [f64],
}

/// L2 and strain-seminorm errors of a component-major vector field.
pub fn vector_field_error(
    space: &ScalarSpace,
    coeffs: &[f64],
    exact: impl Fn(f64, f64) -> ([f64; 2], Tensor),
) -> Result<(f64, f64)> {
    let n = space.num_dofs();
    if coeffs.len() != 2 * n {
        return Err(invalid(format!(
            "expected {} coefficients, got {}",
            2 * n,
            coeffs.len()
        )));
    }
    let rule = quadrature_triangle(ERROR_QUADRATURE_ORDER)?;
    let el = space.element();
    let nloc = el.node_count();
    let (mut vals, mut rgrads) = (vec![0.0; nloc], vec![[0.0; 2]; nloc]);
    let (mut l2, mut semi) = (0.0, 0.0);
    for c in 0..space.num_cells() {
        let map = space.cell_map(c);
        let dofs = space.cell_dofs(c);
        for (p, w) in rule.iter() {
            el.values(p, &mut vals);
            el.gradients(p, &mut rgrads);
            let mut uh = [0.0; 2];
            let mut gh = [[0.0; 2]; 2];
            for k in 0..nloc {
                let g = map.push_gradient(rgrads[k]);
                for comp in 0..2 {
                    let coef = coeffs[comp * n + dofs[k]];
                    uh[comp] += coef * vals[k];
                    gh[comp][0] += coef * g[0];
                    gh[comp][1] += coef * g[1];
                }
            }
            let x = map.map(p);
            let (ue, ge) = exact(x[0], x[1]);
            let wq = w * map.abs_det();
            l2 += wq * ((uh[0] - ue[0]).powi(2) + (uh[1] - ue[1]).powi(2));
            let mut diff = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    diff[a][b] = gh[a][b] - ge[a][b];
                }
            }
            let d = sym(diff);
            semi += wq * (d[0][0].powi(2) + 2.0 * d[0][1].powi(2) + d[1][1].powi(2));
        }
    }
    Ok((l2.sqrt(), (l2 + semi).sqrt()))
}

pub fn scalar_field_l2_error(
    space: &ScalarSpace,
    coeffs: &[f64],
    exact: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    if coeffs.len() != space.num_dofs() {
        return Err(invalid(format!(
            "expected {} coefficients, got {}",
            space.num_dofs(),
            coeffs.len()
        )));
    }
    let rule = quadrature_triangle(ERROR_QUADRATURE_ORDER)?;
    let el: ReferenceElement = space.element();
    let mut vals = vec![0.0; el.node_count()];
    let mut acc = 0.0;
    for c in 0..space.num_cells() {
        let map = space.cell_map(c);
        let dofs = space.cell_dofs(c);
        for (p, w) in rule.iter() {
            el.values(p, &mut vals);
            let ph: f64 = dofs.iter().zip(&vals).map(|(&d, v)| coeffs[d] * v).sum();
            let x = map.map(p);
            acc += w * map.abs_det() * (ph - exact(x[0], x[1])).powi(2);
        }
    }
    Ok(acc.sqrt())
}

/// `L2(gamma)` error of a component-major P1 multiplier.
pub fn multiplier_l2_error(
    grid: &InterfaceGrid,
    coeffs: &[f64],
    exact: impl Fn(f64) -> [f64; 2],
) -> Result<f64> {
    let m = grid.num_nodes();
    if coeffs.len() != 2 * m {
        return Err(invalid(format!(
            "expected {} coefficients, got {}",
            2 * m,
            coeffs.len()
        )));
    }
    let rule = quadrature_segment(ERROR_QUADRATURE_ORDER)?;
    let mut acc = 0.0;
    for (s, (a, b)) in grid.segments().enumerate() {
        for (q, w) in rule.iter() {
            let x = a + q[0] * (b - a);
            let [h0, h1] = grid.hat_values(s, x);
            let e = exact(x);
            for comp in 0..2 {
                let gh = h0 * coeffs[comp * m + s] + h1 * coeffs[comp * m + s + 1];
                acc += w * (b - a) * (gh - e[comp]).powi(2);
            }
        }
    }
    Ok(acc.sqrt())
}

/// All error norms of a discrete solution against `exact` at time `t`.
pub fn compute_error_norms(
    disc: &Discretization,
    fields: DiscreteFields<'_>,
    exact: &ExactSolution,
    t: f64,
) -> Result<ErrorNorms> {
    let (u_l2, u_h1) = vector_field_error(&disc.velocity, fields.u, |x, y| {
        let j = exact.velocity_jets(x, y, t);
        ([j[0].v, j[1].v], grad_of(&j))
    })?;
    let (eta_l2, eta_h1) = vector_field_error(&disc.displacement, fields.eta, |x, y| {
        let j = exact.displacement_jets(x, y, t);
        ([j[0].v, j[1].v], grad_of(&j))
    })?;
    let p_l2 = scalar_field_l2_error(&disc.pressure, fields.p, |x, y| exact.pressure(x, y, t))?;
    let g_l2 = multiplier_l2_error(&disc.interface, fields.g, |x| exact.multiplier(x, t))?;
    Ok(ErrorNorms {
        eta_l2,
        eta_h1,
        u_l2,
        u_h1,
        p_l2,
        g_l2,
    })
}

/// Observed orders `log(e[i-1]/e[i]) / log(h[i-1]/h[i])`, one per consecutive
/// pair. `None` marks an undefined rate (zero or non-finite error).
pub fn convergence_rate(errors: &[f64], params: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() != params.len() {
        return Err(invalid("errors and parameters differ in length"));
    }
    if errors.len() < 2 {
        return Err(invalid("at least two entries are needed for a rate"));
    }
    let decreasing = params.windows(2).all(|w| w[1] < w[0]);
    let increasing = params.windows(2).all(|w| w[1] > w[0]);
    if !(decreasing || increasing) || params.iter().any(|h| !(*h > 0.0)) {
        return Err(invalid("parameters must be positive and strictly monotone"));
    }
    Ok(errors
        .windows(2)
        .zip(params.windows(2))
        .map(|(e, h)| {
            let ok = |v: f64| v.is_finite() && v > 0.0;
            (ok(e[0]) && ok(e[1])).then(|| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        })
        .collect())
}
