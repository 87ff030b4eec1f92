//! Direct solvers: envelope Cholesky for SPD matrices; for symmetric
//! indefinite matrices an envelope LDL^T on a constraint-aware ordering,
//! verified by a residual check, with banded LU with partial pivoting as the
//! fallback (and the only path for nonsymmetric input). All run on a reverse
//! Cuthill-McKee reordering to keep the profile small.

use std::collections::VecDeque;

use super::csr::CsrMatrix;
use crate::error::{invalid, FsiError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Spd,
    SymmetricIndefinite,
}

/// Reusable decomposition of a square sparse matrix.
#[derive(Clone, Debug)]
pub struct Factorization {
    /// `perm[new] = old`
    perm: Vec<usize>,
    inner: Inner,
}

#[derive(Clone, Debug)]
enum Inner {
    Cholesky(EnvelopeCholesky),
    Ldl(EnvelopeLdl),
    Lu(BandLu),
}

pub fn factorize(a: &CsrMatrix, kind: FactorKind) -> Result<Factorization> {
    if a.nrows() != a.ncols() {
        return Err(invalid(format!(
            "cannot factorize a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let perm = reverse_cuthill_mckee(a);
    match kind {
        FactorKind::Spd => {
            let inv = inverse(&perm);
            let inner = Inner::Cholesky(EnvelopeCholesky::new(a, &inv)?);
            Ok(Factorization { perm, inner })
        }
        FactorKind::SymmetricIndefinite => {
            if a.symmetry_error() <= 1e-14 * a.max_abs() {
                let perm = delay_constraints(a, &perm);
                if let Ok(ldl) = EnvelopeLdl::new(a, &inverse(&perm)) {
                    let f = Factorization {
                        perm,
                        inner: Inner::Ldl(ldl),
                    };
                    if f.passes_residual_check(a) {
                        return Ok(f);
                    }
                }
            }
            let inner = Inner::Lu(BandLu::new(a, &inverse(&perm))?);
            Ok(Factorization { perm, inner })
        }
    }
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Moves every zero-diagonal row just behind its last neighbour in `perm`, so
/// an unpivoted symmetric elimination meets a nonzero pivot there.
fn delay_constraints(a: &CsrMatrix, perm: &[usize]) -> Vec<usize> {
    let inv = inverse(perm);
    let n = perm.len();
    let mut key: Vec<(usize, usize, usize)> = (0..n).map(|v| (inv[v], 0, v)).collect();
    for v in 0..n {
        if a.get(v, v) == 0.0 {
            let (cols, _) = a.row(v);
            if let Some(last) = cols.iter().filter(|&&w| w != v).map(|&w| inv[w]).max() {
                if last > inv[v] {
                    key[v] = (last, 1, v);
                }
            }
        }
    }
    key.sort_unstable();
    key.into_iter().map(|(_, _, v)| v).collect()
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn kind(&self) -> FactorKind {
        match self.inner {
            Inner::Cholesky(_) => FactorKind::Spd,
            Inner::Ldl(_) | Inner::Lu(_) => FactorKind::SymmetricIndefinite,
        }
    }

    /// Number of stored factor entries.
    pub fn storage(&self) -> usize {
        match &self.inner {
            Inner::Cholesky(c) => c.vals.len(),
            Inner::Ldl(c) => c.vals.len(),
            Inner::Lu(l) => l.u.len() + l.mult.len(),
        }
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        assert_eq!(b.len(), self.dim());
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        match &self.inner {
            Inner::Cholesky(c) => c.solve_in_place(&mut y),
            Inner::Ldl(c) => c.solve_in_place(&mut y),
            Inner::Lu(l) => l.solve_in_place(&mut y),
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.solve_into(b, &mut x);
        x
    }

    /// Whether the pivoted fallback was used.
    pub fn is_pivoted(&self) -> bool {
        matches!(self.inner, Inner::Lu(_))
    }

    fn passes_residual_check(&self, a: &CsrMatrix) -> bool {
        let n = self.dim();
        let x0: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i + 1) as f64).sin()).collect();
        let b = a.mul_vec(&x0);
        let x = self.solve(&b);
        let r = a.mul_vec(&x);
        let rn: f64 = r
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        rn.is_finite() && rn <= 1e-12 * bn
    }
}

/// Symmetric adjacency lists (pattern of `A + A^T`, no diagonal).
fn adjacency(a: &CsrMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut adj = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

fn bfs_levels(
    adj: &[Vec<usize>],
    start: usize,
    mark: &mut [usize],
    stamp: usize,
) -> (usize, usize) {
    // returns (depth, last node of the deepest level with minimum degree)
    let mut queue = VecDeque::from([(start, 0usize)]);
    mark[start] = stamp;
    let mut depth = 0;
    let mut best = start;
    while let Some((v, d)) = queue.pop_front() {
        if d > depth || (d == depth && adj[v].len() < adj[best].len()) {
            depth = d;
            best = v;
        }
        for &w in &adj[v] {
            if mark[w] != stamp {
                mark[w] = stamp;
                queue.push_back((w, d + 1));
            }
        }
    }
    (depth, best)
}

/// Reverse Cuthill-McKee ordering, returned as `perm[new] = old`.
/// Each connected component starts from a pseudo-peripheral node.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj = adjacency(a);
    let mut placed = vec![false; n];
    let mut mark = vec![usize::MAX; n];
    let mut stamp = 0;
    let mut order = Vec::with_capacity(n);

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (adj[v].len(), v));

    for &seed in &by_degree {
        if placed[seed] {
            continue;
        }
        // George-Liu pseudo-peripheral node search
        let mut root = seed;
        let (mut depth, mut cand) = bfs_levels(&adj, root, &mut mark, stamp);
        stamp += 1;
        for _ in 0..8 {
            let (d2, c2) = bfs_levels(&adj, cand, &mut mark, stamp);
            stamp += 1;
            if d2 <= depth {
                break;
            }
            root = cand;
            depth = d2;
            cand = c2;
        }

        let begin = order.len();
        order.push(root);
        placed[root] = true;
        let mut head = begin;
        let mut nbrs = Vec::new();
        while head < order.len() {
            let v = order[head];
            head += 1;
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&w| !placed[w]));
            nbrs.sort_by_key(|&w| (adj[w].len(), w));
            for &w in &nbrs {
                placed[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// Row-oriented envelope (skyline) Cholesky `A = L L^T`.
#[derive(Clone, Debug)]
struct EnvelopeCholesky {
    /// first stored column of row i
    first: Vec<usize>,
    /// offset of row i in `vals`; row i stores columns first[i]..=i
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl EnvelopeCholesky {
    fn new(a: &CsrMatrix, inv: &[usize]) -> Result<Self> {
        let n = a.nrows();
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
            first[r] = first[r].min(c);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);
        let mut vals = vec![0.0; total];
        // lower triangle of the permuted matrix; symmetric input assumed
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pi >= pj {
                vals[start[pi] + pj - first[pi]] += v;
            }
        }

        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            for j in fi..i {
                let fj = first[j];
                let sj = start[j];
                let k0 = fi.max(fj);
                let mut s = vals[si + j - fi];
                let ri = &vals[si + k0 - fi..si + j - fi];
                let rj = &vals[sj + k0 - fj..sj + j - fj];
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                vals[si + j - fi] = s / vals[sj + j - fj];
            }
            let diag_idx = si + i - fi;
            let orig = vals[diag_idx];
            let d = orig - vals[si..diag_idx].iter().map(|x| x * x).sum::<f64>();
            if !(d > 1e-14 * orig.abs()) || !d.is_finite() {
                return Err(FsiError::SingularMatrix { pivot: i, value: d });
            }
            vals[diag_idx] = d.sqrt();
        }
        Ok(Self { first, start, vals })
    }

    fn solve_in_place(&self, y: &mut [f64]) {
        let n = y.len();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let row = &self.vals[si..si + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / self.vals[si + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            y[i] /= self.vals[si + i - fi];
            let xi = y[i];
            let row = &self.vals[si..si + i - fi];
            for (yk, l) in y[fi..i].iter_mut().zip(row) {
                *yk -= l * xi;
            }
        }
    }
}

/// Row-oriented envelope `A = L D L^T` without pivoting; `vals` holds the
/// strict lower part of `L` and the diagonal of `D` in the skyline layout.
#[derive(Clone, Debug)]
struct EnvelopeLdl {
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl EnvelopeLdl {
    fn new(a: &CsrMatrix, inv: &[usize]) -> Result<Self> {
        let n = a.nrows();
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
            first[r] = first[r].min(c);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);
        let mut vals = vec![0.0; total];
        let mut scale = 0.0f64;
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pi >= pj {
                vals[start[pi] + pj - first[pi]] += v;
                scale = scale.max(v.abs());
            }
        }

        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            // pass 1: g_ij = a_ij - sum_k g_ik l_jk, kept unscaled in row i
            for j in fi..i {
                let fj = first[j];
                let sj = start[j];
                let k0 = fi.max(fj);
                let gi = &vals[si + k0 - fi..si + j - fi];
                let lj = &vals[sj + k0 - fj..sj + j - fj];
                let s: f64 = gi.iter().zip(lj).map(|(x, y)| x * y).sum();
                vals[si + j - fi] -= s;
            }
            // pass 2: l_ij = g_ij / d_j, d_i = a_ii - sum_j g_ij l_ij
            let mut d = vals[si + i - fi];
            for j in fi..i {
                let dj = vals[start[j] + j - first[j]];
                let g = vals[si + j - fi];
                let l = g / dj;
                d -= g * l;
                vals[si + j - fi] = l;
            }
            if !(d.abs() > 1e-14 * scale) || !d.is_finite() {
                return Err(FsiError::SingularMatrix { pivot: i, value: d });
            }
            vals[si + i - fi] = d;
        }
        Ok(Self { first, start, vals })
    }

    fn solve_in_place(&self, y: &mut [f64]) {
        let n = y.len();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let row = &self.vals[si..si + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.vals[self.start[i] + i - self.first[i]];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            let xi = y[i];
            let row = &self.vals[si..si + i - fi];
            for (yk, l) in y[fi..i].iter_mut().zip(row) {
                *yk -= l * xi;
            }
        }
    }
}

/// Banded LU with partial pivoting (row interchanges within the lower band).
#[derive(Clone, Debug)]
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// row i holds columns i-kl ..= i+kl+ku at offset `col + kl - i`
    u: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn at(&self, i: usize, c: usize) -> usize {
        i * self.width() + c + self.kl - i
    }

    fn new(a: &CsrMatrix, inv: &[usize]) -> Result<Self> {
        let n = a.nrows();
        let (mut kl, mut ku) = (0usize, 0usize);
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pi > pj {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
        let mut lu = BandLu {
            n,
            kl,
            ku,
            u: Vec::new(),
            mult: vec![0.0; n * kl],
            piv: vec![0; n],
        };
        lu.u = vec![0.0; n * lu.width()];
        let mut scale = 0.0f64;
        for (i, j, v) in a.triplets() {
            let idx = lu.at(inv[i], inv[j]);
            lu.u[idx] += v;
            scale = scale.max(v.abs());
        }
        let tiny = 1e-14 * scale;
        let reach = kl + ku;

        let mut tmp = vec![0.0; reach + 1];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut p = k;
            let mut best = lu.u[lu.at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.u[lu.at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(FsiError::SingularMatrix {
                    pivot: k,
                    value: best,
                });
            }
            lu.piv[k] = p;
            if p != k {
                let width = last_col - k + 1;
                let (ok, op) = (lu.at(k, k), lu.at(p, k));
                tmp[..width].copy_from_slice(&lu.u[ok..ok + width]);
                lu.u.copy_within(op..op + width, ok);
                lu.u[op..op + width].copy_from_slice(&tmp[..width]);
            }
            let pivot = lu.u[lu.at(k, k)];
            let krow = lu.at(k, k);
            for i in k + 1..=last_row {
                let ik = lu.at(i, k);
                let m = lu.u[ik] / pivot;
                lu.mult[k * kl + (i - k - 1)] = m;
                lu.u[ik] = 0.0;
                if m != 0.0 {
                    let width = last_col - k;
                    for c in 1..=width {
                        let ukc = lu.u[krow + c];
                        lu.u[ik + c] -= m * ukc;
                    }
                }
            }
        }
        Ok(lu)
    }

    fn solve_in_place(&self, y: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk != 0.0 {
                let last_row = (k + self.kl).min(n - 1);
                for i in k + 1..=last_row {
                    y[i] -= self.mult[k * self.kl + (i - k - 1)] * yk;
                }
            }
        }
        let reach = self.kl + self.ku;
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let base = self.at(k, k);
            let mut s = y[k];
            for c in 1..=last_col - k {
                s -= self.u[base + c] * y[k + c];
            }
            y[k] = s / self.u[base];
        }
    }
}
