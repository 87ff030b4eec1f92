use std::collections::BTreeMap;

use crate::elements::{AffineMap, ReferenceElement};
use crate::error::Result;
use crate::mesh::{BoundaryTag, TriangleMesh};

/// Scalar Lagrange space on a triangle mesh. Vector fields use two copies,
/// numbered component-major: `comp * num_dofs() + node`.
#[derive(Clone, Debug)]
pub struct ScalarSpace {
    mesh: TriangleMesh,
    element: ReferenceElement,
    coords: Vec<[f64; 2]>,
    cell_dofs: Vec<usize>,
    /// sorted vertex pair -> midpoint dof (P2 only)
    midpoints: BTreeMap<(usize, usize), usize>,
    /// sorted vertex pair -> vertex opposite to the edge in its (first) triangle
    opposite: BTreeMap<(usize, usize), usize>,
    maps: Vec<AffineMap>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl ScalarSpace {
    pub fn new(mesh: &TriangleMesh, degree: usize) -> Result<Self> {
        let element = ReferenceElement::new(degree)?;
        let nloc = element.node_count();
        let mut coords: Vec<[f64; 2]> = mesh.nodes().to_vec();
        let mut midpoints = BTreeMap::new();
        let mut opposite = BTreeMap::new();
        let mut cell_dofs = Vec::with_capacity(mesh.triangles().len() * nloc);
        let mut maps = Vec::with_capacity(mesh.triangles().len());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            maps.push(AffineMap::with_index(&mesh.triangle_coords(t), t)?);
            cell_dofs.extend_from_slice(tri);
            for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let k = key(tri[a], tri[b]);
                opposite.entry(k).or_insert(tri[c]);
                if degree == 2 {
                    let next = coords.len();
                    let m = *midpoints.entry(k).or_insert(next);
                    if m == next {
                        let (p, q) = (mesh.nodes()[tri[a]], mesh.nodes()[tri[b]]);
                        coords.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                    }
                    cell_dofs.push(m);
                }
            }
        }
        Ok(Self {
            mesh: mesh.clone(),
            element,
            coords,
            cell_dofs,
            midpoints,
            opposite,
            maps,
        })
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn element(&self) -> ReferenceElement {
        self.element
    }

    pub fn degree(&self) -> usize {
        self.element.degree()
    }

    pub fn num_dofs(&self) -> usize {
        self.coords.len()
    }

    pub fn num_cells(&self) -> usize {
        self.maps.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        let n = self.element.node_count();
        &self.cell_dofs[c * n..(c + 1) * n]
    }

    pub fn cell_map(&self, c: usize) -> &AffineMap {
        &self.maps[c]
    }

    /// Dofs on edge (a, b): `[a, b]` for P1, `[a, b, midpoint]` for P2.
    pub fn edge_dofs(&self, a: usize, b: usize) -> Vec<usize> {
        let mut d = vec![a, b];
        if let Some(&m) = self.midpoints.get(&key(a, b)) {
            d.push(m);
        }
        d
    }

    /// Unit normal of boundary edge (a, b) pointing out of the mesh.
    pub fn outward_normal(&self, a: usize, b: usize) -> [f64; 2] {
        let p = self.mesh.nodes()[a];
        let q = self.mesh.nodes()[b];
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let len = (dx * dx + dy * dy).sqrt();
        let mut n = [dy / len, -dx / len];
        if let Some(&o) = self.opposite.get(&key(a, b)) {
            let r = self.mesh.nodes()[o];
            if (r[0] - p[0]) * n[0] + (r[1] - p[1]) * n[1] > 0.0 {
                n = [-n[0], -n[1]];
            }
        }
        n
    }

    /// Sorted dofs lying on boundary edges carrying any of `tags`.
    pub fn boundary_dofs(&self, tags: &[BoundaryTag]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .mesh
            .boundary_edges()
            .iter()
            .filter(|e| tags.contains(&e.tag))
            .flat_map(|e| self.edge_dofs(e.nodes[0], e.nodes[1]))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.coords.iter().map(|p| f(p[0], p[1])).collect()
    }

    /// Nodal interpolant of a vector function, component-major.
    pub fn interpolate_vector(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        let n = self.num_dofs();
        let mut out = vec![0.0; 2 * n];
        for (i, p) in self.coords.iter().enumerate() {
            let v = f(p[0], p[1]);
            out[i] = v[0];
            out[n + i] = v[1];
        }
        out
    }

    /// Expands scalar dof indices to both vector components.
    pub fn vector_dofs(&self, scalar: &[usize]) -> Vec<usize> {
        let n = self.num_dofs();
        scalar
            .iter()
            .copied()
            .chain(scalar.iter().map(|i| n + i))
            .collect()
    }
}

/// Basis values and reference gradients tabulated at quadrature points.
pub(crate) struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub ref_grads: Vec<Vec<[f64; 2]>>,
}

impl Tabulation {
    pub fn new(el: ReferenceElement, points: &[[f64; 2]]) -> Self {
        let n = el.node_count();
        let mut values = Vec::with_capacity(points.len());
        let mut ref_grads = Vec::with_capacity(points.len());
        for &p in points {
            let mut v = vec![0.0; n];
            let mut g = vec![[0.0; 2]; n];
            el.values(p, &mut v);
            el.gradients(p, &mut g);
            values.push(v);
            ref_grads.push(g);
        }
        Self { values, ref_grads }
    }
}
