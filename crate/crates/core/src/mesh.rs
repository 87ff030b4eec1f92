//! Structured triangle meshes for the two unit boxes and the grid that
//! carries the interface multiplier.

use std::fmt;
use std::io::Write;

use crate::error::{invalid, FsiError, Result};

/// Which subdomain a mesh discretizes. Decides which side becomes the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Fluid,
    Solid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Left,
    Right,
    Bottom,
    Top,
    Interface,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 5] = [
        BoundaryTag::Left,
        BoundaryTag::Right,
        BoundaryTag::Bottom,
        BoundaryTag::Top,
        BoundaryTag::Interface,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Left => "left",
            BoundaryTag::Right => "right",
            BoundaryTag::Bottom => "bottom",
            BoundaryTag::Top => "top",
            BoundaryTag::Interface => "interface",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        BoundaryTag::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// Conforming triangulation of one rectangular subdomain.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    region: Region,
}

/// Twice the signed area of triangle (a, b, c).
pub(crate) fn signed_area2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

impl TriangleMesh {
    /// Builds a mesh from raw parts, rejecting clockwise or degenerate triangles.
    pub fn from_parts(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        region: Region,
    ) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nodes.len()) {
                return Err(invalid(format!("triangle {t} references a missing node")));
            }
            if signed_area2(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]) <= 0.0 {
                return Err(invalid(format!("triangle {t} is not counterclockwise")));
            }
        }
        for e in &boundary_edges {
            if e.nodes.iter().any(|&v| v >= nodes.len()) {
                return Err(invalid("boundary edge references a missing node"));
            }
        }
        Ok(Self {
            nodes,
            triangles,
            boundary_edges,
            region,
        })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn edges_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.boundary_edges.iter().any(|e| e.tag == tag)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_coords(t);
                0.5 * signed_area2(a, b, c)
            })
            .sum()
    }

    /// Plain-text dump, one record per line: `node i x y`, `tri i a b c`, `edge a b tag`.
    pub fn write_plain_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(w, "node {i} {:.17e} {:.17e}", p[0], p[1])?;
        }
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(w, "tri {i} {} {} {}", t[0], t[1], t[2])?;
        }
        for e in &self.boundary_edges {
            writeln!(w, "edge {} {} {}", e.nodes[0], e.nodes[1], e.tag)?;
        }
        Ok(())
    }
}

/// Uniform `n x n` grid over the box, each cell split along its
/// bottom-left to top-right diagonal.
///
/// The fluid mesh tags its top side `interface`, the solid mesh its bottom side.
pub fn build_structured_mesh(
    n: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
    region: Region,
) -> Result<TriangleMesh> {
    if n == 0 {
        return Err(invalid("mesh needs at least one subdivision per side"));
    }
    if !(x_range.1 > x_range.0) || !(y_range.1 > y_range.0) {
        return Err(invalid("degenerate coordinate range"));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let hx = (x_range.1 - x_range.0) / n as f64;
    let hy = (y_range.1 - y_range.0) / n as f64;

    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        // pin the last row/column to the range end so interface coordinates match exactly
        let y = if j == n {
            y_range.1
        } else {
            y_range.0 + j as f64 * hy
        };
        for i in 0..=n {
            let x = if i == n {
                x_range.1
            } else {
                x_range.0 + i as f64 * hx
            };
            nodes.push([x, y]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }

    let (bottom, top) = match region {
        Region::Fluid => (BoundaryTag::Bottom, BoundaryTag::Interface),
        Region::Solid => (BoundaryTag::Interface, BoundaryTag::Top),
    };
    let mut boundary_edges = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(i, 0), idx(i + 1, 0)],
            tag: bottom,
        });
    }
    for j in 0..n {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(n, j), idx(n, j + 1)],
            tag: BoundaryTag::Right,
        });
    }
    for i in 0..n {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(i + 1, n), idx(i, n)],
            tag: top,
        });
    }
    for j in 0..n {
        boundary_edges.push(BoundaryEdge {
            nodes: [idx(0, j + 1), idx(0, j)],
            tag: BoundaryTag::Left,
        });
    }

    TriangleMesh::from_parts(nodes, triangles, boundary_edges, region)
}

/// Fluid box `[0,1] x [0,1]`.
pub fn fluid_box(n: usize) -> Result<TriangleMesh> {
    build_structured_mesh(n, (0.0, 1.0), (0.0, 1.0), Region::Fluid)
}

/// Solid box `[0,1] x [1,2]`.
pub fn solid_box(n: usize) -> Result<TriangleMesh> {
    build_structured_mesh(n, (0.0, 1.0), (1.0, 2.0), Region::Solid)
}

/// One-dimensional grid on the interface line carrying the multiplier.
#[derive(Clone, Debug)]
pub struct InterfaceGrid {
    breakpoints: Vec<f64>,
    y: f64,
    coarsening: usize,
}

const MATCH_TOL: f64 = 1e-12;

fn interface_xs(mesh: &TriangleMesh) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for e in mesh.edges_with_tag(BoundaryTag::Interface) {
        for &v in &e.nodes {
            xs.push(mesh.nodes()[v][0]);
            ys.push(mesh.nodes()[v][1]);
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= MATCH_TOL);
    (xs, ys)
}

/// Interface grid using every `k`-th interface node of the (matching) meshes.
pub fn build_interface_grid(
    mesh_f: &TriangleMesh,
    mesh_s: &TriangleMesh,
    k: usize,
) -> Result<InterfaceGrid> {
    if k == 0 {
        return Err(invalid("coarsening factor must be positive"));
    }
    let (xf, yf) = interface_xs(mesh_f);
    let (xs, ys) = interface_xs(mesh_s);
    if xf.len() < 2 {
        return Err(FsiError::MeshMismatch(
            "fluid mesh has no interface edges".into(),
        ));
    }
    if xf.len() != xs.len() || xf.iter().zip(&xs).any(|(a, b)| (a - b).abs() > MATCH_TOL) {
        return Err(FsiError::MeshMismatch(format!(
            "fluid interface has {} nodes, solid interface has {} nodes at different positions",
            xf.len(),
            xs.len()
        )));
    }
    let y = yf[0];
    if yf.iter().chain(&ys).any(|v| (v - y).abs() > MATCH_TOL) {
        return Err(FsiError::MeshMismatch(
            "interface nodes are not on one horizontal line".into(),
        ));
    }
    if (xf.len() - 1) % k != 0 {
        return Err(invalid(format!(
            "coarsening factor {k} does not divide {} interface segments",
            xf.len() - 1
        )));
    }
    let breakpoints = xf.iter().step_by(k).copied().collect();
    Ok(InterfaceGrid {
        breakpoints,
        y,
        coarsening: k,
    })
}

impl InterfaceGrid {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn coarsening_factor(&self) -> usize {
        self.coarsening
    }

    pub fn num_segments(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Number of P1 multiplier nodes per component.
    pub fn num_nodes(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }

    /// Segment containing `[x0, x1]`, if any.
    pub fn segment_containing(&self, x0: f64, x1: f64) -> Option<usize> {
        let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
        self.segments()
            .position(|(a, b)| lo >= a - MATCH_TOL && hi <= b + MATCH_TOL)
    }

    /// Values of the two hat functions of segment `s` at `x`.
    pub fn hat_values(&self, s: usize, x: f64) -> [f64; 2] {
        let (a, b) = (self.breakpoints[s], self.breakpoints[s + 1]);
        let t = (x - a) / (b - a);
        [1.0 - t, t]
    }

    /// Evaluates a P1 function with nodal values `coeffs` at `x`.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> f64 {
        let s = self
            .segments()
            .position(|(_, b)| x <= b + MATCH_TOL)
            .unwrap_or(self.num_segments() - 1);
        let [h0, h1] = self.hat_values(s, x);
        h0 * coeffs[s] + h1 * coeffs[s + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn counts() {
        let m = fluid_box(1).unwrap();
        assert_eq!(m.nodes().len(), 4);
        assert_eq!(m.triangles().len(), 2);
        let m = fluid_box(2).unwrap();
        assert_eq!(m.nodes().len(), 9);
        assert_eq!(m.triangles().len(), 8);
        assert_eq!(m.boundary_edges().len(), 8);
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(fluid_box(0), Err(FsiError::InvalidArgument(_))));
        assert!(build_structured_mesh(2, (1.0, 1.0), (0.0, 1.0), Region::Fluid).is_err());
    }

    #[test]
    fn solid_interface_on_y_equal_one() {
        let m = solid_box(4).unwrap();
        let edges: Vec<_> = m.edges_with_tag(BoundaryTag::Interface).collect();
        assert_eq!(edges.len(), 4);
        for e in edges {
            for &v in &e.nodes {
                assert_eq!(m.nodes()[v][1], 1.0);
            }
        }
        assert!(!m.has_tag(BoundaryTag::Bottom));
        let f = fluid_box(4).unwrap();
        assert!(f
            .edges_with_tag(BoundaryTag::Interface)
            .all(|e| e.nodes.iter().all(|&v| f.nodes()[v][1] == 1.0)));
    }

    #[test]
    fn area_and_orientation() {
        for n in 1..=12 {
            let m = solid_box(n).unwrap();
            assert!((m.area() - 1.0).abs() <= 1e-14);
            for t in 0..m.triangles().len() {
                let [a, b, c] = m.triangle_coords(t);
                assert!(signed_area2(a, b, c) > 0.0);
            }
        }
    }

    #[test]
    fn conforming_edges() {
        let m = fluid_box(5).unwrap();
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in m.triangles() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let boundary = count.values().filter(|&&c| c == 1).count();
        assert!(count.values().all(|&c| c <= 2));
        assert_eq!(boundary, m.boundary_edges().len());
        for e in m.boundary_edges() {
            let key = (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1]));
            assert_eq!(count[&key], 1);
        }
    }

    #[test]
    fn interface_nodes_coincide() {
        for n in 1..=9 {
            let f = fluid_box(n).unwrap();
            let s = solid_box(n).unwrap();
            let top: Vec<_> = f.nodes().iter().filter(|p| p[1] == 1.0).collect();
            for p in top {
                assert!(s
                    .nodes()
                    .iter()
                    .any(|q| (p[0] - q[0]).abs() <= 1e-14 && (p[1] - q[1]).abs() <= 1e-14));
            }
        }
    }

    #[test]
    fn interface_grid_segments() {
        let f = fluid_box(4).unwrap();
        let s = solid_box(4).unwrap();
        let g = build_interface_grid(&f, &s, 1).unwrap();
        assert_eq!(g.num_segments(), 4);
        assert!(g.segments().all(|(a, b)| (b - a - 0.25).abs() < 1e-15));
        let g = build_interface_grid(&f, &s, 2).unwrap();
        assert_eq!(g.num_segments(), 2);
        assert!(g.segments().all(|(a, b)| (b - a - 0.5).abs() < 1e-15));
        let total: f64 = g.segments().map(|(a, b)| b - a).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(build_interface_grid(&f, &s, 3).is_err());
    }

    #[test]
    fn interface_mismatch() {
        let f = fluid_box(4).unwrap();
        let s = solid_box(3).unwrap();
        assert!(matches!(
            build_interface_grid(&f, &s, 1),
            Err(FsiError::MeshMismatch(_))
        ));
    }

    #[test]
    fn plain_text_export() {
        let m = fluid_box(1).unwrap();
        let mut buf = Vec::new();
        m.write_plain_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("node")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("tri")).count(), 2);
        assert!(text.contains("interface"));
    }
}
