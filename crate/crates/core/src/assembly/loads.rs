use super::space::{ScalarSpace, Tabulation};
use super::{SEGMENT_QUADRATURE_ORDER, VOLUME_QUADRATURE_ORDER};
use crate::elements::{p2_edge_values, quadrature_segment, quadrature_triangle};
use crate::error::{invalid, Result};
use crate::mesh::BoundaryTag;

/// Load vector `(f(., t), phi_i)` for a vector-valued source, component-major.
pub fn assemble_body_load(
    space: &ScalarSpace,
    f: impl Fn(f64, f64, f64) -> [f64; 2],
    t: f64,
) -> Vec<f64> {
    let n = space.num_dofs();
    let mut out = vec![0.0; 2 * n];
    let rule = quadrature_triangle(VOLUME_QUADRATURE_ORDER).expect("default order is supported");
    let tab = Tabulation::new(space.element(), &rule.points);
    for c in 0..space.num_cells() {
        let map = space.cell_map(c);
        let dofs = space.cell_dofs(c);
        for (q, (p, w)) in rule.iter().enumerate() {
            let x = map.map(p);
            let val = f(x[0], x[1], t);
            let wq = w * map.abs_det();
            for (&i, phi) in dofs.iter().zip(&tab.values[q]) {
                out[i] += wq * val[0] * phi;
                out[n + i] += wq * val[1] * phi;
            }
        }
    }
    out
}

/// Boundary load `<g(., t, n), phi_i>` over the edges tagged with any of `tags`.
/// `g` receives the point, time and outward unit normal.
pub fn assemble_neumann_load(
    space: &ScalarSpace,
    tags: &[BoundaryTag],
    g: impl Fn(f64, f64, f64, [f64; 2]) -> [f64; 2],
    t: f64,
) -> Result<Vec<f64>> {
    for tag in tags {
        if !space.mesh().has_tag(*tag) {
            return Err(invalid(format!(
                "mesh has no boundary edges tagged `{tag}`"
            )));
        }
    }
    let n = space.num_dofs();
    let mut out = vec![0.0; 2 * n];
    let rule = quadrature_segment(SEGMENT_QUADRATURE_ORDER)?;
    let nodes = space.mesh().nodes();
    for e in space
        .mesh()
        .boundary_edges()
        .iter()
        .filter(|e| tags.contains(&e.tag))
    {
        let [a, b] = e.nodes;
        let (p, q) = (nodes[a], nodes[b]);
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        let normal = space.outward_normal(a, b);
        let dofs = space.edge_dofs(a, b);
        for (s, w) in rule.iter() {
            let s = s[0];
            let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
            let val = g(x[0], x[1], t, normal);
            let trace: Vec<f64> = if dofs.len() == 3 {
                p2_edge_values(s).to_vec()
            } else {
                vec![1.0 - s, s]
            };
            for (&i, phi) in dofs.iter().zip(&trace) {
                out[i] += w * len * val[0] * phi;
                out[n + i] += w * len * val[1] * phi;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::fluid_box;

    #[test]
    fn zero_and_constant_body_loads() {
        let space = ScalarSpace::new(&fluid_box(3).unwrap(), 2).unwrap();
        let z = assemble_body_load(&space, |_, _, _| [0.0, 0.0], 0.0);
        assert!(z.iter().all(|&v| v == 0.0));
        let one = assemble_body_load(&space, |_, _, _| [1.0, 0.0], 0.0);
        let n = space.num_dofs();
        assert!((one[..n].iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(one[n..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn neumann_loads() {
        let space = ScalarSpace::new(&fluid_box(4).unwrap(), 2).unwrap();
        let sides = [BoundaryTag::Left, BoundaryTag::Right];
        let z = assemble_neumann_load(&space, &sides, |_, _, _, _| [0.0, 0.0], 0.0).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
        let one = assemble_neumann_load(&space, &sides, |_, _, _, _| [1.0, 0.0], 0.0).unwrap();
        let n = space.num_dofs();
        assert!((one[..n].iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // normals
        let nx =
            assemble_neumann_load(&space, &sides, |_, _, _, nrm| [nrm[0], nrm[1]], 0.0).unwrap();
        assert!(nx[..n].iter().sum::<f64>().abs() < 1e-14);
        assert!(
            assemble_neumann_load(&space, &[BoundaryTag::Top], |_, _, _, _| [1.0, 0.0], 0.0)
                .is_err()
        );
    }
}
