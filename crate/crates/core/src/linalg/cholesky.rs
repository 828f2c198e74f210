//! Skyline (profile) Cholesky factorization.
//!
//! Sparse operators are reordered with reverse Cuthill-McKee when that
//! shrinks the profile; dense operators use the natural order with a full
//! profile. Each row `i` of the factor stores columns `first[i]..=i`.

use std::collections::VecDeque;

use super::SpdOperator;
use crate::{Error, Result};

/// Pivots at or below this fraction of the original diagonal entry are
/// treated as a loss of definiteness.
const PIVOT_TOL: f64 = 1e-13;

/// Root-free Cholesky factor `P A Pᵀ = L D Lᵀ` with unit lower-triangular `L`.
#[derive(Clone, Debug)]
pub struct Factorization {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

/// Factorizes `op`, failing iff a non-positive pivot is met.
pub fn factorize(op: &SpdOperator) -> Result<Factorization> {
    let n = op.dim();
    if let Some(csr) = op.as_csr() {
        let perm = choose_ordering(op);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            let (cols, _) = csr.row(old);
            for &c in cols {
                let j = inv[c];
                if j < first[new] {
                    first[new] = j;
                }
            }
        }
        let mut f = Factorization::with_profile(perm, first);
        for (new, &old) in f.perm.clone().iter().enumerate() {
            let (cols, vals) = csr.row(old);
            let start = f.offsets[new];
            let lo = f.first[new];
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j <= new {
                    f.values[start + j - lo] += v;
                }
            }
        }
        f.decompose()?;
        Ok(f)
    } else {
        let m = op.as_dense().expect("operator is either sparse or dense");
        let mut f = Factorization::with_profile((0..n).collect(), vec![0; n]);
        for i in 0..n {
            let start = f.offsets[i];
            for j in 0..=i {
                f.values[start + j] = m[(i, j)];
            }
        }
        f.decompose()?;
        Ok(f)
    }
}

impl Factorization {
    fn with_profile(perm: Vec<usize>, first: Vec<usize>) -> Self {
        let n = perm.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + i - first[i] + 1);
        }
        let values = vec![0.0; offsets[n]];
        Self { n, perm, first, offsets, values }
    }

    fn decompose(&mut self) -> Result<()> {
        for i in 0..self.n {
            let fi = self.first[i];
            let si = self.offsets[i];
            // Row i first holds L_ij D_j, then L_ij.
            for j in fi..i {
                let fj = self.first[j];
                let sj = self.offsets[j];
                let lo = fi.max(fj);
                let mut s = self.values[si + j - fi];
                for k in lo..j {
                    s -= self.values[si + k - fi] * self.values[sj + k - fj];
                }
                self.values[si + j - fi] = s;
            }
            let diag = self.values[si + i - fi];
            let mut d = diag;
            for j in fi..i {
                let c = self.values[si + j - fi];
                let l = c / self.values[self.offsets[j] + j - self.first[j]];
                d -= c * l;
                self.values[si + j - fi] = l;
            }
            if !d.is_finite() || d <= PIVOT_TOL * diag.abs() || d <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: self.perm[i], value: d });
            }
            self.values[si + i - fi] = d;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn profile_len(&self) -> usize {
        self.values.len()
    }

    /// Solves `A x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.solve_into(rhs, &mut out)?;
        Ok(out)
    }

    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) -> Result<()> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: rhs.len() });
        }
        if out.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: out.len() });
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&old| rhs[old]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi /= self.values[self.offsets[i] + i - self.first[i]];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let xi = y[i];
            for (k, l) in (fi..i).zip(row) {
                y[k] -= l * xi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = y[new];
        }
        Ok(())
    }
}

fn profile_size(adj: &[Vec<usize>], perm: &[usize]) -> usize {
    let mut inv = vec![0usize; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    perm.iter()
        .enumerate()
        .map(|(new, &old)| {
            let lo = adj[old].iter().map(|&c| inv[c]).filter(|&j| j < new).min().unwrap_or(new);
            new - lo + 1
        })
        .sum()
}

/// Natural order or reverse Cuthill-McKee, whichever has the smaller profile.
fn choose_ordering(op: &SpdOperator) -> Vec<usize> {
    let csr = op.as_csr().expect("ordering only applies to sparse operators");
    let n = csr.dim();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| csr.row(i).0.iter().copied().filter(|&c| c != i).collect())
        .collect();
    let natural: Vec<usize> = (0..n).collect();
    let rcm = reverse_cuthill_mckee(&adj);
    if profile_size(&adj, &rcm) < profile_size(&adj, &natural) {
        rcm
    } else {
        natural
    }
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, seen: &mut [bool]) -> Vec<usize> {
    let mut order = vec![start];
    seen[start] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !seen[u]).collect();
        next.sort_unstable_by_key(|&u| (adj[u].len(), u));
        for u in next {
            seen[u] = true;
            order.push(u);
        }
    }
    order
}

fn eccentric_vertex(adj: &[Vec<usize>], start: usize) -> usize {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([start]);
    dist[start] = 0;
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    // pick the lowest-degree vertex on the last level
    let far = dist[last];
    (0..adj.len())
        .filter(|&v| dist[v] == far)
        .min_by_key(|&v| (adj[v].len(), v))
        .unwrap_or(last)
}

fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_unstable_by_key(|&v| (adj[v].len(), v));
    for &v in &by_degree {
        if seen[v] {
            continue;
        }
        let mut start = v;
        for _ in 0..2 {
            start = eccentric_vertex(adj, start);
        }
        order.extend(bfs_levels(adj, start, &mut seen));
    }
    order.reverse();
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;
    use nalgebra::DMatrix;

    fn tridiag(n: usize) -> SpdOperator {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SpdOperator::from_csr(CsrMatrix::from_triplets(n, &t)).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let f = factorize(&SpdOperator::identity(3)).unwrap();
        assert_eq!(f.solve(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let f = factorize(&SpdOperator::diagonal(&[4.0, 9.0])).unwrap();
        assert_close(&f.solve(&[4.0, 9.0]).unwrap(), &[1.0, 1.0], 1e-15);
        let f = factorize(&SpdOperator::scalar(2.0)).unwrap();
        assert_eq!(f.solve(&[1.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn tridiagonal_matches_elimination() {
        // Frozen from hand Gaussian elimination on tridiag(-1, 2, -1), n = 3.
        let f = factorize(&tridiag(3)).unwrap();
        assert_close(&f.solve(&[1.0, 0.0, 0.0]).unwrap(), &[0.75, 0.5, 0.25], 1e-14);
        assert_close(&f.solve(&[1.0, 1.0, 1.0]).unwrap(), &[1.5, 2.0, 1.5], 1e-14);
    }

    #[test]
    fn dense_storage_takes_the_same_path() {
        let op = SpdOperator::from_dense(tridiag(3).to_dense()).unwrap();
        let f = factorize(&op).unwrap();
        assert_close(&f.solve(&[1.0, 1.0, 1.0]).unwrap(), &[1.5, 2.0, 1.5], 1e-14);
    }

    #[test]
    fn indefinite_and_singular_are_rejected() {
        let op = SpdOperator::from_row_slice(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(factorize(&op), Err(Error::NotPositiveDefinite { .. })));
        // path-graph Laplacian without boundary is singular
        let lap = SpdOperator::from_row_slice(2, &[1.0, -1.0, -1.0, 1.0]).unwrap();
        assert!(matches!(factorize(&lap), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn solve_checks_dimension() {
        let f = factorize(&SpdOperator::identity(3)).unwrap();
        assert!(matches!(f.solve(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rcm_shrinks_a_scrambled_band() {
        // a path graph with vertices relabelled by a stride permutation
        let n = 40;
        let label = |i: usize| (i * 7) % n;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((label(i), label(i), 3.0));
            if i + 1 < n {
                t.push((label(i), label(i + 1), -1.0));
                t.push((label(i + 1), label(i), -1.0));
            }
        }
        let op = SpdOperator::from_csr(CsrMatrix::from_triplets(n, &t)).unwrap();
        let f = factorize(&op).unwrap();
        assert!(f.profile_len() <= 2 * n);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b).unwrap();
        let dense = op.to_dense();
        let r = &dense * DMatrix::from_column_slice(n, 1, &x) - DMatrix::from_column_slice(n, 1, &b);
        assert!(r.norm() < 1e-12);
    }
}
