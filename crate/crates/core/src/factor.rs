//! Envelope `LDLᵀ` factorization without pivoting, used both as the
//! shift-invert solver and for Sylvester inertia counts.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::sparse::SparseSymMatrix;
use crate::{Error, Result};

/// Reverse Cuthill–McKee order (`perm[new] = old`).
pub fn reverse_cuthill_mckee(a: &SparseSymMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let neighbours = |i: usize| a.row(i).0.iter().copied().filter(move |&j| j != i);
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];
    let mut touched: Vec<usize> = Vec::new();
    // Level structure from `root`, returning the last level and its depth.
    let mut bfs_levels = |root: usize, placed: &[bool]| -> (usize, Vec<usize>) {
        for &t in &touched {
            level[t] = usize::MAX;
        }
        touched.clear();
        let mut queue = VecDeque::from([root]);
        level[root] = 0;
        touched.push(root);
        let mut depth = 0;
        while let Some(v) = queue.pop_front() {
            depth = depth.max(level[v]);
            for w in neighbours(v) {
                if !placed[w] && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    touched.push(w);
                    queue.push_back(w);
                }
            }
        }
        let last = touched.iter().copied().filter(|&t| level[t] == depth).collect();
        (depth, last)
    };
    for seed in 0..n {
        if placed[seed] {
            continue;
        }
        // George–Liu pseudo-peripheral node search.
        let mut root = seed;
        let (mut depth, mut last) = bfs_levels(root, &placed);
        for _ in 0..8 {
            let cand = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap_or(&root);
            let (d2, l2) = bfs_levels(cand, &placed);
            if d2 > depth {
                root = cand;
                depth = d2;
                last = l2;
            } else {
                break;
            }
        }
        let start = order.len();
        order.push(root);
        placed[root] = true;
        let mut head = start;
        let mut nb: Vec<usize> = Vec::new();
        while head < order.len() {
            let v = order[head];
            head += 1;
            nb.clear();
            nb.extend(neighbours(v).filter(|&w| !placed[w]));
            nb.sort_by_key(|&w| (degree[w], w));
            for &w in &nb {
                placed[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// `Σ_i (i − first_i)` of `a` under `perm`.
pub fn profile(a: &SparseSymMatrix, perm: &[usize]) -> usize {
    let inv = invert(perm);
    (0..a.dim())
        .map(|new| {
            let old = perm[new];
            let first = a.row(old).0.iter().map(|&j| inv[j]).min().unwrap_or(new);
            new - first.min(new)
        })
        .sum()
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// The cheaper of natural and reverse Cuthill–McKee order.
pub fn envelope_ordering(a: &SparseSymMatrix) -> Vec<usize> {
    let natural: Vec<usize> = (0..a.dim()).collect();
    let rcm = reverse_cuthill_mckee(a);
    if profile(a, &rcm) < profile(a, &natural) {
        rcm
    } else {
        natural
    }
}

#[derive(Clone, Debug)]
pub struct LdlFactor {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
    negative: usize,
    min_abs_pivot: f64,
}

impl LdlFactor {
    /// Factors `a` in the given order. `shift` is only used in error reports.
    pub fn new(a: &SparseSymMatrix, perm: &[usize], shift: f64) -> Result<Self> {
        let n = a.dim();
        if perm.len() != n {
            return Err(Error::InvalidInput("ordering length differs from dimension".into()));
        }
        let inv = invert(perm);
        let mut first = vec![0; n];
        let mut start = vec![0; n + 1];
        for new in 0..n {
            let f = a.row(perm[new]).0.iter().map(|&j| inv[j]).min().unwrap_or(new);
            first[new] = f.min(new);
            start[new + 1] = start[new] + (new - first[new]) + 1;
        }
        let mut data = vec![0.0; start[n]];
        for new in 0..n {
            let (c, v) = a.row(perm[new]);
            for (&j, &x) in c.iter().zip(v) {
                let jn = inv[j];
                if jn <= new {
                    data[start[new] + jn - first[new]] = x;
                }
            }
        }
        let scale = a.norm_inf().max(f64::MIN_POSITIVE);
        let tiny = 1e-14 * scale;
        let mut negative = 0;
        let mut min_abs_pivot = f64::INFINITY;
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = data.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_j = &done[start[j]..start[j + 1]];
                let s: f64 = row_j[k0 - fj..j - fj]
                    .iter()
                    .zip(&row_i[k0 - fi..j - fi])
                    .map(|(l, w)| l * w)
                    .sum();
                row_i[j - fi] -= s;
            }
            let mut d = row_i[i - fi];
            for j in fi..i {
                let dj = done[start[j + 1] - 1];
                let w = row_i[j - fi];
                let l = w / dj;
                d -= l * w;
                row_i[j - fi] = l;
            }
            if !(Float::abs(d) > tiny) {
                return Err(Error::SingularPivot { index: i, shift });
            }
            row_i[i - fi] = d;
            min_abs_pivot = min_abs_pivot.min(Float::abs(d));
            if d < 0.0 {
                negative += 1;
            }
        }
        Ok(LdlFactor {
            perm: perm.to_vec(),
            first,
            start,
            data,
            negative,
            min_abs_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of negative entries of `D`.
    pub fn negative_pivots(&self) -> usize {
        self.negative
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.min_abs_pivot
    }

    /// Stored entries of `L` including the diagonal.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1] - 1];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.data[self.start[i + 1] - 1];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.data[self.start[i]..self.start[i + 1] - 1];
            for (l, v) in row.iter().zip(&mut y[fi..i]) {
                *v -= l * yi;
            }
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
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseSymMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSymMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn solves_tridiagonal_system() {
        let a = laplacian_1d(20);
        let perm = envelope_ordering(&a);
        let f = LdlFactor::new(&a, &perm, 0.0).unwrap();
        let x_true: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x_true);
        let x = f.solve(&b);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-12);
        }
        assert_eq!(f.negative_pivots(), 0);
    }

    #[test]
    fn inertia_of_diagonal() {
        let a = SparseSymMatrix::diagonal(&[-5.0, -1.0, 2.0]);
        let f = LdlFactor::new(&a, &[2, 0, 1], 0.0).unwrap();
        assert_eq!(f.negative_pivots(), 2);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = SparseSymMatrix::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            LdlFactor::new(&a, &[0, 1], 0.5),
            Err(Error::SingularPivot { index: 1, .. })
        ));
    }

    #[test]
    fn rcm_is_a_permutation_and_shrinks_a_shuffled_band() {
        let n = 30;
        let shuffle: Vec<usize> = (0..n).map(|i| (i * 7) % n).collect();
        let mut t = Vec::new();
        for i in 0..n {
            t.push((shuffle[i], shuffle[i], 2.0));
            if i + 1 < n {
                t.push((shuffle[i], shuffle[i + 1], -1.0));
                t.push((shuffle[i + 1], shuffle[i], -1.0));
            }
        }
        let a = SparseSymMatrix::from_triplets(n, &t).unwrap();
        let p = reverse_cuthill_mckee(&a);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        assert_eq!(profile(&a, &p), n - 1);
    }
}
