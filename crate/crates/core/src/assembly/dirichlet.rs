use crate::sparse::{CsrMatrix, TripletBuilder};

/// Symmetric elimination: rows and columns of `dofs` are cleared and the
/// diagonal set to one.
pub fn constrain_symmetric(a: &CsrMatrix, dofs: &[usize]) -> CsrMatrix {
    let mut mask = vec![false; a.nrows().max(a.ncols())];
    for &d in dofs {
        mask[d] = true;
    }
    let mut b = TripletBuilder::with_capacity(a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        if !mask[i] && !mask[j] {
            b.push(i, j, v);
        }
    }
    for &d in dofs {
        b.push(d, d, 1.0);
    }
    b.build()
}

/// Right-hand side consistent with [`constrain_symmetric`]: free rows receive
/// `-A[:, dofs] * values`, constrained rows the prescribed values. `a` is the
/// unconstrained matrix.
pub fn lift_rhs(a: &CsrMatrix, rhs: &[f64], dofs: &[usize], values: &[f64]) -> Vec<f64> {
    let mut ext = vec![0.0; a.ncols()];
    for (&d, &v) in dofs.iter().zip(values) {
        ext[d] = v;
    }
    let lift = a.mul_vec(&ext);
    let mut out: Vec<f64> = rhs.iter().zip(&lift).map(|(r, l)| r - l).collect();
    for (&d, &v) in dofs.iter().zip(values) {
        out[d] = v;
    }
    out
}

/// Applies Dirichlet values to `A x = rhs` by symmetric elimination.
pub fn apply_dirichlet(
    a: &CsrMatrix,
    rhs: &[f64],
    dofs: &[usize],
    values: &[f64],
) -> (CsrMatrix, Vec<f64>) {
    (constrain_symmetric(a, dofs), lift_rhs(a, rhs, dofs, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_mass, assemble_strain_stiffness, ScalarSpace};
    use crate::mesh::{fluid_box, BoundaryTag};
    use crate::sparse::{factorize, FactorKind};

    #[test]
    fn zero_values_leave_free_rows() {
        let space = ScalarSpace::new(&fluid_box(2).unwrap(), 2).unwrap();
        let m = assemble_mass(&space, 1.0).unwrap();
        let rhs: Vec<f64> = (0..m.nrows()).map(|i| i as f64).collect();
        let dofs = space.vector_dofs(&space.boundary_dofs(&[BoundaryTag::Bottom]));
        let (c, r) = apply_dirichlet(&m, &rhs, &dofs, &vec![0.0; dofs.len()]);
        for i in 0..rhs.len() {
            if !dofs.contains(&i) {
                assert_eq!(r[i], rhs[i]);
            } else {
                assert_eq!(r[i], 0.0);
                assert_eq!(c.get(i, i), 1.0);
            }
        }
        assert!(c.symmetry_error() <= 1e-15 * m.max_abs());
    }

    #[test]
    fn patch_test_reproduces_linear_field() {
        // vector Laplace-like problem whose exact solution is a linear field
        let space = ScalarSpace::new(&fluid_box(3).unwrap(), 2).unwrap();
        let k = assemble_strain_stiffness(&space, 1.0).unwrap();
        let exact = space.interpolate_vector(|x, y| [1.0 + 2.0 * x - y, 0.5 * x + 3.0 * y]);
        let all = space.vector_dofs(&space.boundary_dofs(&BoundaryTag::ALL));
        let values: Vec<f64> = all.iter().map(|&d| exact[d]).collect();
        let (c, r) = apply_dirichlet(&k, &vec![0.0; k.nrows()], &all, &values);
        let x = factorize(&c, FactorKind::Spd).unwrap().solve(&r);
        for (a, b) in x.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12);
        }
        for (&d, v) in all.iter().zip(&values) {
            assert_eq!(x[d], *v);
        }
    }
}
