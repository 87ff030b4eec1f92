//! Lagrange P1/P2 reference elements, quadrature rules and affine maps.
//!
//! Reference triangle has vertices (0,0), (1,0), (0,1). P2 local numbering is
//! the three vertices followed by the midpoints of edges 0-1, 1-2, 2-0.

use crate::error::{invalid, FsiError, Result};
use crate::mesh::signed_area2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReferenceElement {
    degree: usize,
}

impl ReferenceElement {
    pub fn new(degree: usize) -> Result<Self> {
        match degree {
            1 | 2 => Ok(Self { degree }),
            d => Err(invalid(format!("unsupported Lagrange degree {d}"))),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn node_count(&self) -> usize {
        if self.degree == 1 {
            3
        } else {
            6
        }
    }

    pub fn nodes(&self) -> &'static [[f64; 2]] {
        const P2: [[f64; 2]; 6] = [
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [0.5, 0.0],
            [0.5, 0.5],
            [0.0, 0.5],
        ];
        &P2[..self.node_count()]
    }

    /// Shape function values at `p`; `out` must hold `node_count()` entries.
    pub fn values(&self, p: [f64; 2], out: &mut [f64]) {
        let l = [1.0 - p[0] - p[1], p[0], p[1]];
        if self.degree == 1 {
            out[..3].copy_from_slice(&l);
            return;
        }
        for i in 0..3 {
            out[i] = l[i] * (2.0 * l[i] - 1.0);
        }
        out[3] = 4.0 * l[0] * l[1];
        out[4] = 4.0 * l[1] * l[2];
        out[5] = 4.0 * l[2] * l[0];
    }

    /// Reference gradients at `p`.
    pub fn gradients(&self, p: [f64; 2], out: &mut [[f64; 2]]) {
        const DL: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        if self.degree == 1 {
            out[..3].copy_from_slice(&DL);
            return;
        }
        let l = [1.0 - p[0] - p[1], p[0], p[1]];
        for i in 0..3 {
            let s = 4.0 * l[i] - 1.0;
            out[i] = [s * DL[i][0], s * DL[i][1]];
        }
        for (k, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
            out[3 + k] = [
                4.0 * (l[a] * DL[b][0] + l[b] * DL[a][0]),
                4.0 * (l[a] * DL[b][1] + l[b] * DL[a][1]),
            ];
        }
    }
}

/// Values and reference gradients of all shape functions of the given degree.
pub fn reference_basis(degree: usize, point: [f64; 2]) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
    let el = ReferenceElement::new(degree)?;
    let tol = 1e-12;
    if point[0] < -tol || point[1] < -tol || point[0] + point[1] > 1.0 + tol {
        return Err(invalid("point outside the reference triangle"));
    }
    let mut v = vec![0.0; el.node_count()];
    let mut g = vec![[0.0; 2]; el.node_count()];
    el.values(point, &mut v);
    el.gradients(point, &mut g);
    Ok((v, g))
}

/// Points and weights on a reference cell of dimension `D`
/// (unit segment `[0,1]` or the reference triangle).
#[derive(Clone, Debug)]
pub struct QuadratureRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

pub type TriangleRule = QuadratureRule<2>;
pub type SegmentRule = QuadratureRule<1>;

impl<const D: usize> QuadratureRule<D> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; D], f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

pub const MAX_QUADRATURE_ORDER: usize = 30;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton on P_n starting from the Chebyshev-like guess
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[n - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

/// Gauss rule on the unit segment exact for polynomials of degree `order`.
pub fn quadrature_segment(order: usize) -> Result<SegmentRule> {
    if order > MAX_QUADRATURE_ORDER {
        return Err(invalid(format!(
            "segment quadrature order {order} unsupported"
        )));
    }
    let n = (order + 2) / 2;
    let (x, w) = gauss_legendre_unit(n.max(1));
    Ok(SegmentRule {
        points: x.into_iter().map(|v| [v]).collect(),
        weights: w,
        degree: 2 * n.max(1) - 1,
    })
}

/// Triangle rule exact for polynomials of total degree `order`.
///
/// Orders 1 and 2 use the centroid and three-point rules, orders 3 to 5 the
/// seven-point degree-5 rule, higher orders a collapsed Gauss product rule.
pub fn quadrature_triangle(order: usize) -> Result<TriangleRule> {
    match order {
        0 | 1 => Ok(TriangleRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
            degree: 1,
        }),
        2 => Ok(TriangleRule {
            points: vec![
                [1.0 / 6.0, 1.0 / 6.0],
                [2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0],
            ],
            weights: vec![1.0 / 6.0; 3],
            degree: 2,
        }),
        3..=5 => {
            let r = 15f64.sqrt();
            let a = (6.0 - r) / 21.0;
            let b = (6.0 + r) / 21.0;
            let wa = (155.0 - r) / 2400.0;
            let wb = (155.0 + r) / 2400.0;
            Ok(TriangleRule {
                points: vec![
                    [1.0 / 3.0, 1.0 / 3.0],
                    [a, a],
                    [1.0 - 2.0 * a, a],
                    [a, 1.0 - 2.0 * a],
                    [b, b],
                    [1.0 - 2.0 * b, b],
                    [b, 1.0 - 2.0 * b],
                ],
                weights: vec![9.0 / 80.0, wa, wa, wa, wb, wb, wb],
                degree: 5,
            })
        }
        o if o <= MAX_QUADRATURE_ORDER => Ok(collapsed_gauss(o)),
        o => Err(invalid(format!(
            "triangle quadrature order {o} unsupported"
        ))),
    }
}

/// Duffy-collapsed tensor Gauss rule; the extra (1 - s) Jacobian factor
/// raises the degree in `s` by one.
pub(crate) fn collapsed_gauss(order: usize) -> TriangleRule {
    let n = (order + 3) / 2;
    let (x, w) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (s, ws) in x.iter().zip(&w) {
        for (t, wt) in x.iter().zip(&w) {
            points.push([*s, t * (1.0 - s)]);
            weights.push(ws * wt * (1.0 - s));
        }
    }
    TriangleRule {
        points,
        weights,
        degree: 2 * n - 2,
    }
}

/// Affine map from the reference triangle onto a physical triangle.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap {
    origin: [f64; 2],
    /// Columns are the images of the reference edge vectors.
    jacobian: [[f64; 2]; 2],
    inv_t: [[f64; 2]; 2],
    det: f64,
}

impl AffineMap {
    pub fn new(tri: &[[f64; 2]; 3]) -> Result<Self> {
        Self::with_index(tri, 0)
    }

    pub(crate) fn with_index(tri: &[[f64; 2]; 3], index: usize) -> Result<Self> {
        let [a, b, c] = *tri;
        let jacobian = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = signed_area2(a, b, c);
        let scale = jacobian
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if det.abs() <= 1e-14 * scale * scale || !det.is_finite() {
            return Err(FsiError::SingularMap(index));
        }
        // J^{-T}
        let inv_t = [
            [jacobian[1][1] / det, -jacobian[1][0] / det],
            [-jacobian[0][1] / det, jacobian[0][0] / det],
        ];
        Ok(Self {
            origin: a,
            jacobian,
            inv_t,
            det,
        })
    }

    pub fn map(&self, p: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * p[0] + j[0][1] * p[1],
            self.origin[1] + j[1][0] * p[0] + j[1][1] * p[1],
        ]
    }

    pub fn jacobian(&self) -> [[f64; 2]; 2] {
        self.jacobian
    }

    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    /// Physical gradient from a reference gradient.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let m = &self.inv_t;
        [
            m[0][0] * g[0] + m[0][1] * g[1],
            m[1][0] * g[0] + m[1][1] * g[1],
        ]
    }
}

/// Physical point, Jacobian and `|det J|` for a reference point.
pub fn map_to_physical(
    tri: &[[f64; 2]; 3],
    point: [f64; 2],
) -> Result<([f64; 2], [[f64; 2]; 2], f64)> {
    let m = AffineMap::new(tri)?;
    Ok((m.map(point), m.jacobian(), m.abs_det()))
}

/// Quadratic Lagrange basis on a segment parametrized by `s` in `[0,1]`,
/// ordered (start, end, midpoint). These are the traces of the P2 triangle
/// basis on an edge.
pub(crate) fn p2_edge_values(s: f64) -> [f64; 3] {
    [
        (1.0 - s) * (1.0 - 2.0 * s),
        s * (2.0 * s - 1.0),
        4.0 * s * (1.0 - s),
    ]
}
