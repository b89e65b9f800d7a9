//! Symmetric sparse matrices in compressed row form (both triangles stored).

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn zeros(n: usize) -> Self {
        SparseSymMatrix {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseSymMatrix::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SparseSymMatrix {
            n: d.len(),
            row_ptr: (0..=d.len()).collect(),
            col_idx: (0..d.len()).collect(),
            values: d.to_vec(),
        }
    }

    /// Sums duplicate entries. Both `(i, j)` and `(j, i)` must be supplied;
    /// the result is checked for exact symmetry.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let m = SparseSymMatrix::from_triplets_unchecked(n, triplets)?;
        if !m.is_symmetric(0.0) {
            return Err(Error::Assembly("triplets do not describe a symmetric matrix".into()));
        }
        Ok(m)
    }

    pub(crate) fn from_triplets_unchecked(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::Assembly(alloc::format!(
                    "entry ({i}, {j}) outside dimension {n}"
                )));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        // Bucket by row preserving input order, then stable-sort each row by column.
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut perm: Vec<usize> = Vec::new();
        for i in 0..n {
            let (s, e) = (counts[i], counts[i + 1]);
            perm.clear();
            perm.extend(s..e);
            perm.sort_by_key(|&p| cols[p]);
            for &p in &perm {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == cols[p] {
                    *values.last_mut().unwrap() += vals[p];
                } else {
                    col_idx.push(cols[p]);
                    values.push(vals[p]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseSymMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Replaces each off-diagonal pair by its mean; the pattern must already
    /// be symmetric.
    pub(crate) fn symmetrize(&mut self) {
        for i in 0..self.n {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for p in s..e {
                let j = self.col_idx[p];
                if j <= i {
                    continue;
                }
                let (cs, ce) = (self.row_ptr[j], self.row_ptr[j + 1]);
                if let Ok(q) = self.col_idx[cs..ce].binary_search(&i) {
                    let mean = 0.5 * (self.values[p] + self.values[cs + q]);
                    self.values[p] = mean;
                    self.values[cs + q] = mean;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(p) => v[p],
            Err(_) => 0.0,
        }
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                out.push((i, j, x));
            }
        }
        out
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let (c, v) = self.row(i);
            let mut s = 0.0;
            for (&j, &a) in c.iter().zip(v) {
                s += a * x[j];
            }
            y[i] = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            let mut r = 0.0;
            for (&j, &a) in c.iter().zip(v) {
                r += a * y[j];
            }
            s += x[i] * r;
        }
        s
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `self + c · other`, union of both patterns.
    pub fn add_scaled(&self, other: &SparseSymMatrix, c: f64) -> Result<SparseSymMatrix> {
        if self.n != other.n {
            return Err(Error::Incompatible(alloc::format!(
                "dimensions {} and {} differ",
                self.n,
                other.n
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_idx.capacity());
        row_ptr.push(0);
        for i in 0..self.n {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                if ja == jb {
                    col_idx.push(ja);
                    values.push(va[p] + c * vb[q]);
                    p += 1;
                    q += 1;
                } else if ja < jb {
                    col_idx.push(ja);
                    values.push(va[p]);
                    p += 1;
                } else {
                    col_idx.push(jb);
                    values.push(c * vb[q]);
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseSymMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn scaled(&self, c: f64) -> SparseSymMatrix {
        let mut m = self.clone();
        for v in &mut m.values {
            *v *= c;
        }
        m
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).1.iter().map(|v| Float::abs(*v)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                worst = worst.max(Float::abs(a - self.get(j, i)));
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_abs_asymmetry() <= tol
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d[i * self.n + j] = a;
            }
        }
        d
    }

    /// Builds from a row-major dense symmetric matrix, dropping exact zeros.
    pub fn from_dense(n: usize, d: &[f64]) -> Result<Self> {
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = d[i * n + j];
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        SparseSymMatrix::from_triplets(n, &t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let t = [(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (0, 0, 3.0), (1, 1, 5.0)];
        let m = SparseSymMatrix::from_triplets(2, &t).unwrap();
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![6.0, 7.0]);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let t = [(0, 1, 1.0)];
        assert!(SparseSymMatrix::from_triplets(2, &t).is_err());
    }

    #[test]
    fn add_scaled_merges_patterns() {
        let a = SparseSymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let b = SparseSymMatrix::from_triplets(3, &[(0, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let c = a.add_scaled(&b, -2.0).unwrap();
        assert_eq!(c.get(0, 2), -2.0);
        assert_eq!(c.get(2, 2), 3.0);
        assert!(c.is_symmetric(0.0));
    }
}
