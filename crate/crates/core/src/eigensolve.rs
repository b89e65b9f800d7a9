//! Lowest eigenpairs of `A x = λ M x` by thick-restart shift-invert Lanczos
//! in the M inner product, and inertia counts.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dense;
use crate::factor::{envelope_ordering, LdlFactor};
use crate::sparse::SparseSymMatrix;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Number of eigenpairs.
    pub k: usize,
    /// Initial shift; lowered automatically until no eigenvalue lies below it.
    pub shift: Option<f64>,
    /// Relative Ritz residual tolerance of the shift-inverted problem.
    pub tol: f64,
    /// Maximum number of restarts.
    pub max_iter: usize,
    /// Krylov basis size; `None` picks `max(2k + 20, 40)`.
    pub ncv: Option<usize>,
    pub seed: u64,
    /// Also report the inertia count below this value.
    pub certify_below: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            k: 4,
            shift: None,
            tol: 1e-9,
            max_iter: 500,
            ncv: None,
            seed: 0x5eed,
            certify_below: None,
        }
    }
}

impl SolverOptions {
    pub fn with_k(k: usize) -> Self {
        SolverOptions {
            k,
            ..SolverOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Ax − λMx‖ / ((‖A‖ + |λ|‖M‖)‖x‖)` per pair.
    pub residuals: Vec<f64>,
    pub certified_count_below: Option<(f64, usize)>,
    /// Shift actually used for the factorization.
    pub shift: f64,
    /// Restarts summed over all Lanczos runs.
    pub iterations: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn below(&self, threshold: f64) -> Vec<f64> {
        self.eigenvalues.iter().copied().filter(|&l| l < threshold).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn check_pair(a: &SparseSymMatrix, m: &SparseSymMatrix) -> Result<()> {
    if a.dim() != m.dim() {
        return Err(Error::Incompatible(alloc::format!(
            "A has dimension {} but M has {}",
            a.dim(),
            m.dim()
        )));
    }
    if a.dim() == 0 {
        return Err(Error::InvalidInput("empty system".into()));
    }
    Ok(())
}

fn factor_shifted(a: &SparseSymMatrix, m: &SparseSymMatrix, shift: f64, perm: &[usize]) -> Result<LdlFactor> {
    let s = a.add_scaled(m, -shift)?;
    LdlFactor::new(&s, perm, shift)
}

fn shifted_order(a: &SparseSymMatrix, m: &SparseSymMatrix) -> Result<Vec<usize>> {
    Ok(envelope_ordering(&a.add_scaled(m, 1.0)?))
}

/// Factors `A − τM`, nudging `τ` by `±1e−8·max(|τ|, 1)` if a pivot vanishes.
fn factor_near(a: &SparseSymMatrix, m: &SparseSymMatrix, tau: f64, perm: &[usize]) -> Result<(LdlFactor, f64)> {
    let delta = 1e-8 * Float::abs(tau).max(1.0);
    let mut last = None;
    for t in [tau, tau - delta, tau + delta] {
        match factor_shifted(a, m, t, perm) {
            Ok(f) => return Ok((f, t)),
            Err(e @ Error::SingularPivot { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(Error::SingularPivot { index: 0, shift: tau }))
}

/// Number of generalized eigenvalues strictly below `threshold`.
pub fn count_below(a: &SparseSymMatrix, m: &SparseSymMatrix, threshold: f64) -> Result<usize> {
    check_pair(a, m)?;
    let perm = shifted_order(a, m)?;
    Ok(factor_near(a, m, threshold, &perm)?.0.negative_pivots())
}

/// `xᵀAx / xᵀMx`.
pub fn rayleigh(a: &SparseSymMatrix, m: &SparseSymMatrix, x: &[f64]) -> Result<f64> {
    check_pair(a, m)?;
    if x.len() != a.dim() {
        return Err(Error::Incompatible("vector length differs from dimension".into()));
    }
    let d = m.quadratic_form(x);
    if !(d > 0.0) {
        return Err(Error::InvalidInput("Rayleigh quotient of a zero vector".into()));
    }
    Ok(a.quadratic_form(x) / d)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm2(x: &[f64]) -> f64 {
    Float::sqrt(dot(x, x))
}

fn backward_error(a: &SparseSymMatrix, m: &SparseSymMatrix, lambda: f64, x: &[f64], norms: (f64, f64)) -> f64 {
    let ax = a.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(&mx).map(|(p, q)| p - lambda * q).collect();
    norm2(&r) / ((norms.0 + Float::abs(lambda) * norms.1) * norm2(x)).max(f64::MIN_POSITIVE)
}

/// Flips the sign so that the entry of largest modulus is positive.
fn normalize_sign(x: &mut [f64]) {
    let mut best = 0.0;
    for &v in x.iter() {
        if Float::abs(v) > Float::abs(best) {
            best = v;
        }
    }
    if best < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}

struct Krylov<'a> {
    m: &'a SparseSymMatrix,
    factor: &'a LdlFactor,
    rng: ChaCha8Rng,
    locked: &'a [Vec<f64>],
    locked_m: &'a [Vec<f64>],
}

struct KrylovResult {
    /// Descending Ritz values of the inverted operator.
    nus: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    /// Estimate of the next Ritz value, if one exists.
    next_nu: Option<f64>,
    restarts: usize,
}

impl Krylov<'_> {
    fn random_vector(&mut self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u = (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                2.0 * u - 1.0
            })
            .collect()
    }

    /// Removes the components along `basis` (M inner product) twice.
    fn orthogonalize(&self, w: &mut [f64], basis: &[Vec<f64>], basis_m: &[Vec<f64>], coeffs: &mut [f64]) {
        for c in coeffs.iter_mut() {
            *c = 0.0;
        }
        for _ in 0..2 {
            for (i, (v, mv)) in basis.iter().zip(basis_m).enumerate() {
                let c = dot(mv, w);
                coeffs[i] += c;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= c * vk;
                }
            }
        }
    }

    fn purge_locked(&self, w: &mut [f64]) {
        let mut scratch = vec![0.0; self.locked.len()];
        self.orthogonalize(w, self.locked, self.locked_m, &mut scratch);
    }

    /// Fresh M-normalized vector orthogonal to `basis` and the locked set.
    fn fresh(&mut self, n: usize, basis: &[Vec<f64>], basis_m: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        for _ in 0..5 {
            let mut w = self.random_vector(n);
            self.purge_locked(&mut w);
            let mut scratch = vec![0.0; basis.len()];
            self.orthogonalize(&mut w, basis, basis_m, &mut scratch);
            let mw = self.m.mul_vec(&w);
            let nrm = dot(&w, &mw);
            if nrm > 0.0 {
                let s = 1.0 / Float::sqrt(nrm);
                return Ok((w.iter().map(|x| x * s).collect(), mw.iter().map(|x| x * s).collect()));
            }
        }
        Err(Error::InvalidInput("cannot extend the Krylov basis".into()))
    }

    fn run(&mut self, k: usize, ncv: usize, tol: f64, max_restarts: usize) -> Result<KrylovResult> {
        let n = self.m.dim();
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(ncv + 1);
        let mut mv: Vec<Vec<f64>> = Vec::with_capacity(ncv + 1);
        let (v0, mv0) = self.fresh(n, &[], &[])?;
        v.push(v0);
        mv.push(mv0);
        let cols = ncv;
        let mut h = vec![0.0; (ncv + 1) * cols];
        let mut p = 0;
        let mut coeffs = vec![0.0; ncv + 1];
        let mut restarts = 0;
        loop {
            for j in p..ncv {
                let mut w = self.factor.solve(&self.m.mul_vec(&v[j]));
                self.purge_locked(&mut w);
                self.orthogonalize(&mut w, &v[..=j], &mv[..=j], &mut coeffs[..=j]);
                for i in 0..=j {
                    h[i * cols + j] = coeffs[i];
                }
                let mw = self.m.mul_vec(&w);
                let beta = Float::sqrt(dot(&w, &mw).max(0.0));
                let scale = Float::abs(h[j * cols + j]).max(f64::MIN_POSITIVE);
                let (next, next_m) = if beta > 1e-10 * scale {
                    h[(j + 1) * cols + j] = beta;
                    (
                        w.iter().map(|x| x / beta).collect(),
                        mw.iter().map(|x| x / beta).collect(),
                    )
                } else {
                    h[(j + 1) * cols + j] = 0.0;
                    self.fresh(n, &v[..=j], &mv[..=j])?
                };
                v.truncate(j + 1);
                mv.truncate(j + 1);
                v.push(next);
                mv.push(next_m);
            }
            let m = ncv;
            let mut t = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..m {
                    t[i * m + j] = 0.5 * (h[i * cols + j] + h[j * cols + i]);
                }
            }
            let (vals, y) = dense::symmetric_eigen(m, &t);
            // Descending order of ν.
            let order: Vec<usize> = (0..m).rev().collect();
            // Coupling of each Ritz vector to the next basis vector.
            let coupling: Vec<f64> = order
                .iter()
                .map(|&c| (0..m).map(|j| h[m * cols + j] * y[j * m + c]).sum())
                .collect();
            let nus: Vec<f64> = order.iter().map(|&c| vals[c]).collect();
            let top = Float::abs(nus[0]).max(f64::MIN_POSITIVE);
            let converged = (0..m)
                .take_while(|&i| Float::abs(coupling[i]) <= tol * Float::abs(nus[i]).max(1e-3 * top))
                .count();
            let combine = |c: usize, basis: &[Vec<f64>]| -> Vec<f64> {
                let mut x = vec![0.0; n];
                for (j, b) in basis.iter().take(m).enumerate() {
                    let w = y[j * m + c];
                    for (xi, bi) in x.iter_mut().zip(b) {
                        *xi += w * bi;
                    }
                }
                x
            };
            if converged >= k {
                let vectors = order[..k].iter().map(|&c| combine(c, &v)).collect();
                return Ok(KrylovResult {
                    nus: nus[..k].to_vec(),
                    vectors,
                    next_nu: nus.get(k).copied(),
                    restarts,
                });
            }
            restarts += 1;
            if restarts > max_restarts {
                return Err(Error::NotConverged {
                    converged,
                    requested: k,
                    eigenvalues: nus[..converged].to_vec(),
                });
            }
            let keep = (k + (m - k) / 2).max(converged + 1).min(m - 1);
            let new_v: Vec<Vec<f64>> = order[..keep].iter().map(|&c| combine(c, &v)).collect();
            let new_mv: Vec<Vec<f64>> = order[..keep].iter().map(|&c| combine(c, &mv)).collect();
            let last = v.pop().unwrap_or_default();
            let last_m = mv.pop().unwrap_or_default();
            for x in h.iter_mut() {
                *x = 0.0;
            }
            for i in 0..keep {
                h[i * cols + i] = nus[i];
                h[keep * cols + i] = coupling[i];
            }
            v = new_v;
            mv = new_mv;
            v.push(last);
            mv.push(last_m);
            p = keep;
        }
    }
}

fn ncv_for(k: usize, n: usize, requested: Option<usize>) -> usize {
    requested.unwrap_or((2 * k + 20).max(40)).max(k + 2).min(n)
}

/// The `k` lowest eigenpairs of `A x = λ M x` for symmetric `A` and symmetric
/// positive definite `M`.
pub fn solve_lowest(a: &SparseSymMatrix, m: &SparseSymMatrix, opts: &SolverOptions) -> Result<Spectrum> {
    check_pair(a, m)?;
    if opts.k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(alloc::format!(
            "tolerance {} must be positive",
            opts.tol
        )));
    }
    let n = a.dim();
    let k = opts.k.min(n);
    let norms = (a.norm_inf(), m.norm_inf());
    let perm = shifted_order(a, m)?;
    let mut spectrum = if n <= ncv_for(k, n, opts.ncv) + 2 {
        solve_dense(a, m, k, norms)?
    } else {
        solve_sparse(a, m, k, opts, &perm, norms)?
    };
    if let Some(t) = opts.certify_below {
        let (f, _) = factor_near(a, m, t, &perm)?;
        spectrum.certified_count_below = Some((t, f.negative_pivots()));
    }
    Ok(spectrum)
}

fn solve_dense(a: &SparseSymMatrix, m: &SparseSymMatrix, k: usize, norms: (f64, f64)) -> Result<Spectrum> {
    let n = a.dim();
    let (vals, x) = dense::generalized_eigen(n, &a.to_dense(), &m.to_dense())?;
    let mut eigenvectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for c in 0..k {
        let mut col: Vec<f64> = (0..n).map(|i| x[i * n + c]).collect();
        normalize_sign(&mut col);
        residuals.push(backward_error(a, m, vals[c], &col, norms));
        eigenvectors.push(col);
    }
    Ok(Spectrum {
        eigenvalues: vals[..k].to_vec(),
        eigenvectors,
        residuals,
        certified_count_below: None,
        shift: f64::NAN,
        iterations: 0,
    })
}

fn solve_sparse(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    k: usize,
    opts: &SolverOptions,
    perm: &[usize],
    norms: (f64, f64),
) -> Result<Spectrum> {
    let n = a.dim();
    // Lower the shift until it sits below the whole spectrum.
    let mut sigma = opts.shift.unwrap_or(-1.0);
    let factor = loop {
        match factor_shifted(a, m, sigma, perm) {
            Ok(f) if f.negative_pivots() == 0 => break f,
            Ok(_) | Err(Error::SingularPivot { .. }) => {
                sigma -= (2.0 * Float::abs(sigma)).max(1.0);
                if !sigma.is_finite() || sigma < -1e300 {
                    return Err(Error::InvalidInput("no shift below the spectrum found".into()));
                }
            }
            Err(e) => return Err(e),
        }
    };
    let mut lambdas: Vec<f64> = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    let mut vectors_m: Vec<Vec<f64>> = Vec::new();
    let mut iterations = 0;
    let mut want = k;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _round in 0..4 {
        let avail = n - lambdas.len();
        let kk = want.min(avail);
        if kk == 0 {
            break;
        }
        let ncv = ncv_for(kk, avail, opts.ncv);
        let mut kr = Krylov {
            m,
            factor: &factor,
            rng: rng.clone(),
            locked: &vectors,
            locked_m: &vectors_m,
        };
        let res = if ncv < kk + 2 {
            return Err(Error::NotConverged {
                converged: lambdas.len(),
                requested: k,
                eigenvalues: lambdas,
            });
        } else {
            kr.run(kk, ncv, opts.tol * 0.1, opts.max_iter)?
        };
        rng = kr.rng;
        iterations += res.restarts;
        let next_lambda = res.next_nu.filter(|&nu| nu > 0.0).map(|nu| sigma + 1.0 / nu);
        for (nu, x) in res.nus.iter().zip(res.vectors) {
            let mx = m.mul_vec(&x);
            lambdas.push(sigma + 1.0 / nu);
            vectors.push(x);
            vectors_m.push(mx);
        }
        // Sort found pairs ascending.
        let mut idx: Vec<usize> = (0..lambdas.len()).collect();
        idx.sort_by(|&i, &j| lambdas[i].total_cmp(&lambdas[j]));
        lambdas = idx.iter().map(|&i| lambdas[i]).collect();
        vectors = idx.iter().map(|&i| vectors[i].clone()).collect();
        vectors_m = idx.iter().map(|&i| vectors_m[i].clone()).collect();
        // Inertia check just above the k-th value found.
        let lk = lambdas[k.min(lambdas.len()) - 1];
        let gap_to = next_lambda.filter(|&l| l > lk);
        let probe = match gap_to {
            Some(l) => 0.5 * (lk + l),
            None => lk + 1e-6 * Float::abs(lk).max(1.0),
        };
        let (f, probe) = factor_near(a, m, probe, perm)?;
        let found = lambdas.iter().filter(|&&l| l < probe).count();
        let missing = f.negative_pivots().saturating_sub(found);
        if missing == 0 {
            break;
        }
        want = missing;
    }
    lambdas.truncate(k);
    vectors.truncate(k);
    let mut residuals = Vec::with_capacity(k);
    for (l, x) in lambdas.iter().zip(vectors.iter_mut()) {
        let nrm = Float::sqrt(m.quadratic_form(x));
        for xi in x.iter_mut() {
            *xi /= nrm;
        }
        normalize_sign(x);
        residuals.push(backward_error(a, m, *l, x, norms));
    }
    Ok(Spectrum {
        eigenvalues: lambdas,
        eigenvectors: vectors,
        residuals,
        certified_count_below: None,
        shift: sigma,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_problem() {
        let a = SparseSymMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let m = SparseSymMatrix::identity(3);
        let s = solve_lowest(&a, &m, &SolverOptions::with_k(2)).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 2.0).abs() < 1e-14);
        assert_eq!(count_below(&a, &m, 2.5).unwrap(), 2);
    }

    #[test]
    fn inertia_example() {
        let a = SparseSymMatrix::diagonal(&[-5.0, -1.0, 2.0]);
        let m = SparseSymMatrix::identity(3);
        assert_eq!(count_below(&a, &m, 0.0).unwrap(), 2);
    }

    #[test]
    fn large_diagonal_uses_lanczos_and_finds_double_eigenvalue() {
        let n = 300;
        let mut d: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        d[5] = 1.0;
        let a = SparseSymMatrix::diagonal(&d);
        let m = SparseSymMatrix::identity(n);
        let s = solve_lowest(&a, &m, &SolverOptions::with_k(3)).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12, "{:?}", s.eigenvalues);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-12, "{:?}", s.eigenvalues);
        assert!((s.eigenvalues[2] - 1.1).abs() < 1e-12, "{:?}", s.eigenvalues);
        assert!(s.max_residual() < 1e-12);
    }

    #[test]
    fn rayleigh_rejects_zero() {
        let a = SparseSymMatrix::identity(2);
        assert!(rayleigh(&a, &a, &[0.0, 0.0]).is_err());
        assert_eq!(rayleigh(&a, &a, &[1.0, 2.0]).unwrap(), 1.0);
    }
}
