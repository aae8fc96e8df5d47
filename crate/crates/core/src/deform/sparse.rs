//! Symmetric positive-definite solves with a reverse Cuthill-McKee ordering
//! and an envelope (skyline) Cholesky factor.

use std::collections::{BTreeMap, VecDeque};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("matrix is not positive definite (pivot {pivot} at row {row})")]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

/// Accumulates the lower triangle of a symmetric matrix; duplicate entries add.
#[derive(Debug, Clone, Default)]
pub struct SymmetricBuilder {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SymmetricBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Add `v` at (i, j) and, implicitly, at (j, i).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let key = if i >= j { (i, j) } else { (j, i) };
        *self.entries.entry(key).or_insert(0.0) += v;
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    pub fn factor(&self) -> Result<EnvelopeCholesky, NotPositiveDefinite> {
        EnvelopeCholesky::factor(self)
    }
}

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
fn rcm(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let degree = |v: usize| adj[v].len();
    loop {
        let Some(start) = (0..n).filter(|v| !seen[*v]).min_by_key(|v| (degree(*v), *v)) else {
            break;
        };
        // Move towards a pseudo-peripheral node: the last node of a BFS.
        let mut root = start;
        for _ in 0..2 {
            let mut local = vec![false; n];
            let mut q = VecDeque::from([root]);
            local[root] = true;
            let mut last = root;
            while let Some(v) = q.pop_front() {
                last = v;
                for &u in &adj[v] {
                    if !local[u] && !seen[u] {
                        local[u] = true;
                        q.push_back(u);
                    }
                }
            }
            root = last;
        }
        let mut q = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|u| !seen[*u]).collect();
            next.sort_by_key(|u| (degree(*u), *u));
            for u in next {
                if !seen[u] {
                    seen[u] = true;
                    q.push_back(u);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor `P A Pᵀ = L Lᵀ` stored row by row over each row's envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    inv: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SymmetricBuilder) -> Result<Self, NotPositiveDefinite> {
        let n = a.n;
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in a.entries.keys() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        let perm = rcm(n, &adj);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j) in a.entries.keys() {
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
        let mut values = vec![0.0; total];
        for (&(i, j), &v) in &a.entries {
            let (pi, pj) = (inv[i], inv[j]);
            let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
            values[start[r] + c - first[r]] = v;
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_i = &values[start[i] + k0 - fi..start[i] + j - fi];
                let row_j = &values[start[j] + k0 - fj..start[j] + j - fj];
                let dot: f64 = row_i.iter().zip(row_j).map(|(x, y)| x * y).sum();
                let s = values[start[i] + j - fi] - dot;
                if j < i {
                    let d = values[start[j + 1] - 1];
                    values[start[i] + j - fi] = s / d;
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(NotPositiveDefinite { row: perm[i], pivot: s });
                    }
                    values[start[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self { n, perm, inv, first, start, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor, a measure of fill.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = (0..self.n).map(|i| b[self.perm[i]]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - dot) / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        for i in 0..self.n {
            b[i] = y[self.inv[i]];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Grid Laplacian plus a diagonal shift: a typical mesh-like SPD matrix.
    fn grid(nx: usize, ny: usize, shift: f64) -> SymmetricBuilder {
        let mut b = SymmetricBuilder::new(nx * ny);
        let id = |x: usize, y: usize| y * nx + x;
        for y in 0..ny {
            for x in 0..nx {
                b.add(id(x, y), id(x, y), shift);
                let mut edge = |u: usize, v: usize| {
                    b.add(u, u, 1.0);
                    b.add(v, v, 1.0);
                    b.add(u, v, -1.0);
                };
                if x + 1 < nx {
                    edge(id(x, y), id(x + 1, y));
                }
                if y + 1 < ny {
                    edge(id(x, y), id(x, y + 1));
                }
            }
        }
        b
    }

    #[test]
    fn matches_dense_cholesky() {
        let a = grid(9, 7, 0.01);
        let f = a.factor().unwrap();
        let dense = a.to_dense();
        let rhs: Vec<f64> = (0..a.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = f.solve(&rhs);
        let oracle = dense.clone().cholesky().unwrap().solve(&nalgebra::DVector::from_vec(rhs));
        for i in 0..x.len() {
            assert!((x[i] - oracle[i]).abs() < 1e-9, "{i}: {} vs {}", x[i], oracle[i]);
        }
        // Banded ordering keeps the envelope far below dense storage.
        assert!(f.envelope_size() < a.dim() * a.dim() / 4);
    }

    #[test]
    fn rejects_indefinite() {
        let mut b = SymmetricBuilder::new(2);
        b.add(0, 0, 1.0);
        b.add(1, 1, 1.0);
        b.add(0, 1, 2.0);
        assert!(b.factor().is_err());
    }

    proptest! {
        #[test]
        fn random_sparse_spd_systems(seed in any::<u64>(), n in 2usize..40) {
            let mut b = SymmetricBuilder::new(n);
            let mut s = seed | 1;
            let mut rnd = || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; (s % 1000) as f64 / 1000.0 };
            for i in 0..n {
                b.add(i, i, 0.5);
                for _ in 0..2 {
                    let j = (rnd() * n as f64) as usize % n;
                    if j != i {
                        let w = rnd();
                        b.add(i, i, w);
                        b.add(j, j, w);
                        b.add(i, j, -w);
                    }
                }
            }
            let rhs: Vec<f64> = (0..n).map(|_| rnd() - 0.5).collect();
            let x = b.factor().unwrap().solve(&rhs);
            let r = b.to_dense() * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(rhs);
            prop_assert!(r.amax() < 1e-9);
        }
    }
}
