//! Shift-invert Lanczos and inertia counting against a dense nalgebra
//! solution of the same generalized problem.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use starspec_core::{count_below, solve_lowest, SolverOptions, SparseSymMatrix};

type Triplets = Vec<(usize, usize, f64)>;

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

/// Random sparse symmetric `A` (band plus scattered entries, indefinite) and
/// a diagonally dominant SPD `M` with the same kind of pattern.
fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (Triplets, Triplets) {
    let mut a = Vec::new();
    let mut m = Vec::new();
    for i in 0..n {
        a.push((i, i, 8.0 * uniform(rng) - 4.0));
        m.push((i, i, 2.0 + uniform(rng)));
        if i + 1 < n {
            let v = uniform(rng) - 0.5;
            a.extend([(i, i + 1, v), (i + 1, i, v)]);
            let w = 0.4 * (uniform(rng) - 0.5);
            m.extend([(i, i + 1, w), (i + 1, i, w)]);
        }
    }
    for _ in 0..n {
        let (i, j) = (below(rng, n), below(rng, n));
        if i != j {
            let v = 2.0 * uniform(rng) - 1.0;
            a.extend([(i, j, v), (j, i, v)]);
        }
    }
    (a, m)
}

fn dense(n: usize, t: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for &(i, j, v) in t {
        d[(i, j)] += v;
    }
    d
}

/// Eigenvalues of `L⁻¹ A L⁻ᵀ` with `M = L Lᵀ`, ascending.
fn oracle(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let l = m.clone().cholesky().expect("M is SPD").l();
    let li = l.try_inverse().expect("invertible");
    let c = &li * a * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut v: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn fifty_random_pairs_match_the_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut lanczos_cases = 0;
    for case in 0..50 {
        let n = 5 + below(&mut rng, 196);
        let (ta, tm) = random_pair(&mut rng, n);
        let a = SparseSymMatrix::from_triplets(n, &ta).unwrap();
        let m = SparseSymMatrix::from_triplets(n, &tm).unwrap();
        let want = oracle(&dense(n, &ta), &dense(n, &tm));

        let k = 1 + below(&mut rng, 6.min(n));
        let spec = solve_lowest(&a, &m, &SolverOptions::with_k(k)).unwrap();
        if spec.shift.is_finite() {
            lanczos_cases += 1;
        }
        assert_eq!(spec.len(), k);
        for (i, (&got, &exp)) in spec.eigenvalues.iter().zip(&want).enumerate() {
            assert!(
                (got - exp).abs() <= 1e-9 * exp.abs().max(1.0),
                "case {case} (n={n}) λ_{i}: {got} vs {exp}"
            );
        }

        // Thresholds halfway between consecutive eigenvalues and outside the
        // spectrum.
        for _ in 0..4 {
            let j = below(&mut rng, n - 1);
            let t = 0.5 * (want[j] + want[j + 1]);
            if want[j + 1] - want[j] > 1e-6 {
                assert_eq!(count_below(&a, &m, t).unwrap(), j + 1, "case {case} threshold {t}");
            }
        }
        assert_eq!(count_below(&a, &m, want[0] - 1.0).unwrap(), 0);
        assert_eq!(count_below(&a, &m, want[n - 1] + 1.0).unwrap(), n);
    }
    assert!(lanczos_cases >= 30, "only {lanczos_cases} cases went through Lanczos");
}
