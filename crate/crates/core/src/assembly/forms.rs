//! Bilinear forms assembled into sparse blocks. Vector-valued blocks use the
//! component-major numbering of [`ScalarSpace`].

use super::space::{ScalarSpace, Tabulation};
use super::{SEGMENT_QUADRATURE_ORDER, VOLUME_QUADRATURE_ORDER};
use crate::elements::{p2_edge_values, quadrature_segment, quadrature_triangle};
use crate::error::{invalid, FsiError, Result};
use crate::mesh::{BoundaryTag, InterfaceGrid};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Runs `local` on every cell with physical gradients at each quadrature point.
/// `local(cell, values, grads, weight)` where weight includes `|det J|`.
fn for_each_point(space: &ScalarSpace, mut local: impl FnMut(usize, &[f64], &[[f64; 2]], f64)) {
    let rule = quadrature_triangle(VOLUME_QUADRATURE_ORDER).expect("default order is supported");
    let tab = Tabulation::new(space.element(), &rule.points);
    let n = space.element().node_count();
    let mut grads = vec![[0.0; 2]; n];
    for c in 0..space.num_cells() {
        let map = space.cell_map(c);
        for (q, w) in rule.weights.iter().enumerate() {
            for (g, r) in grads.iter_mut().zip(&tab.ref_grads[q]) {
                *g = map.push_gradient(*r);
            }
            local(c, &tab.values[q], &grads, w * map.abs_det());
        }
    }
}

/// Vector mass matrix `rho * (phi_j, phi_i)`, block-diagonal over the two components.
pub fn assemble_mass(space: &ScalarSpace, rho: f64) -> Result<CsrMatrix> {
    if !(rho > 0.0) {
        return Err(invalid(format!("density must be positive, got {rho}")));
    }
    let n = space.num_dofs();
    let nloc = space.element().node_count();
    let mut b = TripletBuilder::with_capacity(2 * n, 2 * n, space.num_cells() * 2 * nloc * nloc);
    let mut local = vec![0.0; nloc * nloc];
    let mut last = usize::MAX;
    let flush = |b: &mut TripletBuilder, cell: usize, local: &mut [f64]| {
        let dofs = space.cell_dofs(cell);
        for (a, &i) in dofs.iter().enumerate() {
            for (bb, &j) in dofs.iter().enumerate() {
                let v = local[a * nloc + bb];
                b.push(i, j, v);
                b.push(n + i, n + j, v);
            }
        }
        local.iter_mut().for_each(|v| *v = 0.0);
    };
    for_each_point(space, |c, vals, _, w| {
        if c != last && last != usize::MAX {
            flush(&mut b, last, &mut local);
        }
        last = c;
        for a in 0..nloc {
            for bb in 0..nloc {
                local[a * nloc + bb] += rho * w * vals[a] * vals[bb];
            }
        }
    });
    if last != usize::MAX {
        flush(&mut b, last, &mut local);
    }
    Ok(b.build())
}

/// Accumulates a 2x2-block local operator for vector fields and scatters it.
fn assemble_vector_form(
    space: &ScalarSpace,
    kernel: impl Fn(&[[f64; 2]], usize, usize, usize, usize) -> f64,
) -> CsrMatrix {
    let n = space.num_dofs();
    let nloc = space.element().node_count();
    let size = 2 * nloc;
    let mut b = TripletBuilder::with_capacity(2 * n, 2 * n, space.num_cells() * size * size);
    let mut local = vec![0.0; size * size];
    let mut last = usize::MAX;
    let scatter = |b: &mut TripletBuilder, cell: usize, local: &mut [f64]| {
        let dofs = space.cell_dofs(cell);
        for c in 0..2 {
            for (a, &i) in dofs.iter().enumerate() {
                for d in 0..2 {
                    for (bb, &j) in dofs.iter().enumerate() {
                        b.push(
                            c * n + i,
                            d * n + j,
                            local[(c * nloc + a) * size + d * nloc + bb],
                        );
                    }
                }
            }
        }
        local.iter_mut().for_each(|v| *v = 0.0);
    };
    for_each_point(space, |cell, _, g, w| {
        if cell != last && last != usize::MAX {
            scatter(&mut b, last, &mut local);
        }
        last = cell;
        for c in 0..2 {
            for a in 0..nloc {
                for d in 0..2 {
                    for bb in 0..nloc {
                        local[(c * nloc + a) * size + d * nloc + bb] += w * kernel(g, a, c, bb, d);
                    }
                }
            }
        }
    });
    if last != usize::MAX {
        scatter(&mut b, last, &mut local);
    }
    b.build()
}

/// Strain stiffness `2 nu (D(phi_j), D(phi_i))` with `D` the symmetric gradient.
pub fn assemble_strain_stiffness(space: &ScalarSpace, nu: f64) -> Result<CsrMatrix> {
    if !(nu > 0.0) {
        return Err(invalid(format!(
            "viscosity / shear modulus must be positive, got {nu}"
        )));
    }
    // 2 D(psi_a e_c) : D(psi_b e_d) = delta_cd grad psi_a . grad psi_b + d_d psi_a d_c psi_b
    Ok(assemble_vector_form(space, |g, a, c, b, d| {
        let diag = if c == d {
            g[a][0] * g[b][0] + g[a][1] * g[b][1]
        } else {
            0.0
        };
        nu * (diag + g[a][d] * g[b][c])
    }))
}

/// Divergence penalty `lambda (div phi_j, div phi_i)`.
pub fn assemble_divdiv(space: &ScalarSpace, lambda: f64) -> Result<CsrMatrix> {
    if !(lambda >= 0.0) {
        return Err(invalid(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    Ok(assemble_vector_form(space, |g, a, c, b, d| {
        lambda * g[a][c] * g[b][d]
    }))
}

/// Pressure coupling `P_{(i,c),k} = (q_k, d_c v_i)`, shape `N_u x N_p`.
/// Both spaces must live on the same mesh.
pub fn assemble_pressure_coupling(
    velocity: &ScalarSpace,
    pressure: &ScalarSpace,
) -> Result<CsrMatrix> {
    if velocity.degree() != 2 || pressure.degree() != 1 {
        return Err(invalid(format!(
            "unsupported velocity/pressure pair (P{}, P{})",
            velocity.degree(),
            pressure.degree()
        )));
    }
    if velocity.num_cells() != pressure.num_cells() {
        return Err(FsiError::MeshMismatch(
            "velocity and pressure meshes differ".into(),
        ));
    }
    let n = velocity.num_dofs();
    let np = pressure.num_dofs();
    let mut b = TripletBuilder::with_capacity(2 * n, np, velocity.num_cells() * 36);
    let rule = quadrature_triangle(VOLUME_QUADRATURE_ORDER)?;
    let ptab = Tabulation::new(pressure.element(), &rule.points);
    let mut local = [[0.0; 3]; 12];
    let mut last = usize::MAX;
    let scatter = |b: &mut TripletBuilder, cell: usize, local: &mut [[f64; 3]; 12]| {
        let vd = velocity.cell_dofs(cell);
        let pd = pressure.cell_dofs(cell);
        for c in 0..2 {
            for (a, &i) in vd.iter().enumerate() {
                for (k, &j) in pd.iter().enumerate() {
                    b.push(c * n + i, j, local[c * 6 + a][k]);
                }
            }
        }
        *local = [[0.0; 3]; 12];
    };
    let mut q = 0;
    for_each_point(velocity, |cell, _, g, w| {
        if cell != last {
            if last != usize::MAX {
                scatter(&mut b, last, &mut local);
            }
            last = cell;
            q = 0;
        }
        let pv = &ptab.values[q];
        for c in 0..2 {
            for a in 0..6 {
                for k in 0..3 {
                    local[c * 6 + a][k] += w * pv[k] * g[a][c];
                }
            }
        }
        q += 1;
    });
    if last != usize::MAX {
        scatter(&mut b, last, &mut local);
    }
    Ok(b.build())
}

/// Interface coupling `G_{(l,c),(j,c)} = <phi_j, mu_l>_gamma`, rows indexed by
/// the component-major P1 multiplier basis on `grid`.
pub fn assemble_interface_coupling(space: &ScalarSpace, grid: &InterfaceGrid) -> Result<CsrMatrix> {
    let n = space.num_dofs();
    let nl = grid.num_nodes();
    let mut b = TripletBuilder::new(2 * nl, 2 * n);
    let rule = quadrature_segment(SEGMENT_QUADRATURE_ORDER)?;
    let nodes = space.mesh().nodes();
    let mut found = false;
    for e in space.mesh().edges_with_tag(BoundaryTag::Interface) {
        found = true;
        let [a, bnode] = e.nodes;
        let (p, q) = (nodes[a], nodes[bnode]);
        if (p[1] - grid.y()).abs() > 1e-12 || (q[1] - grid.y()).abs() > 1e-12 {
            return Err(FsiError::MeshMismatch(
                "interface edge is off the interface line".into(),
            ));
        }
        let seg = grid.segment_containing(p[0], q[0]).ok_or_else(|| {
            FsiError::MeshMismatch(format!(
                "edge [{}, {}] straddles multiplier segments",
                p[0], q[0]
            ))
        })?;
        let dofs = space.edge_dofs(a, bnode);
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        for (s, w) in rule.iter() {
            let s = s[0];
            let x = p[0] + s * (q[0] - p[0]);
            let trace: Vec<f64> = if dofs.len() == 3 {
                p2_edge_values(s).to_vec()
            } else {
                vec![1.0 - s, s]
            };
            let hats = grid.hat_values(seg, x);
            for (l, h) in hats.iter().enumerate() {
                for (&j, t) in dofs.iter().zip(&trace) {
                    let v = w * len * h * t;
                    for c in 0..2 {
                        b.push(c * nl + seg + l, c * n + j, v);
                    }
                }
            }
        }
    }
    if !found {
        return Err(FsiError::MeshMismatch("mesh has no interface edges".into()));
    }
    Ok(b.build())
}
