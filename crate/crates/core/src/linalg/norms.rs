//! Extreme singular values: power iteration for the largest, Lanczos-accelerated
//! inverse iteration for the smallest.

use super::{DenseLu, DenseMatrix, LinalgError, TridiagonalMatrix};

pub const POWER_ITERATION_CAP: usize = 10_000;
pub const POWER_ITERATION_TOL: f64 = 1e-12;

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest eigenvalue of the symmetric positive semidefinite map `apply` by
/// power iteration from the normalized all-ones vector.
fn power_iteration(
    n: usize,
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<f64, LinalgError> {
    if n == 0 {
        return Ok(0.0);
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut previous = f64::NAN;
    for _ in 0..POWER_ITERATION_CAP {
        let mut w = apply(&v);
        let rayleigh = dot(&v, &w);
        if normalize(&mut w) == 0.0 {
            return Ok(0.0);
        }
        if (rayleigh - previous).abs() <= POWER_ITERATION_TOL * rayleigh.abs() {
            return Ok(rayleigh);
        }
        previous = rayleigh;
        v = w;
    }
    Err(LinalgError::NoConvergence {
        method: "power iteration",
        iterations: POWER_ITERATION_CAP,
        partial: Vec::new(),
    })
}

/// `‖A‖₂`, the largest singular value, by power iteration on `AᵀA`.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64, LinalgError> {
    let ata = power_iteration(a.n_cols(), |v| a.matvec_transpose(&a.matvec(v)))?;
    Ok(ata.max(0.0).sqrt())
}

/// `‖A‖₂` for a tridiagonal matrix without densifying it.
pub fn spectral_norm_tridiagonal(a: &TridiagonalMatrix) -> Result<f64, LinalgError> {
    let at = a.transpose();
    let ata = power_iteration(a.order(), |v| at.matvec(&a.matvec(v)))?;
    Ok(ata.max(0.0).sqrt())
}

/// `σ_min(A)` for a nonsingular tridiagonal matrix.
///
/// Each step applies `(A Aᵀ)⁻¹ = A⁻ᵀ A⁻¹` through two Thomas solves; the
/// iterates span a Krylov space that is fully reorthogonalized, which keeps
/// the cost bounded by `n` steps even when the bottom of the spectrum is
/// tightly clustered.
pub fn min_singular_value(a: &TridiagonalMatrix) -> Result<f64, LinalgError> {
    let lu = a.factor()?;
    let lu_t = a.transpose().factor()?;
    let largest = lanczos_largest(a.order(), |v| {
        let mut w = v.to_vec();
        lu.solve_in_place(&mut w);
        lu_t.solve_in_place(&mut w);
        w
    })?;
    Ok(1.0 / largest.sqrt())
}

/// `σ_min(A)` for a dense nonsingular matrix, reusing a single LU factorization.
pub fn min_singular_value_dense(a: &DenseMatrix) -> Result<f64, LinalgError> {
    let lu: DenseLu = a.lu()?;
    let largest = lanczos_largest(a.n_rows(), |v| lu.solve_transpose_vec(&lu.solve_vec(v)))?;
    Ok(1.0 / largest.sqrt())
}

pub const LANCZOS_TOL: f64 = 1e-13;

/// Largest eigenvalue of a symmetric positive definite operator of order `n`
/// by Lanczos with full reorthogonalization.
///
/// Terminates when the Ritz residual `|β_k s_k|` drops below `LANCZOS_TOL`
/// relative to the Ritz value, or after `n` steps, when the Krylov space is
/// the whole space and the Ritz value is exact.
pub fn lanczos_largest(
    n: usize,
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<f64, LinalgError> {
    if n == 0 {
        return Ok(0.0);
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n.min(64));
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut q = vec![1.0 / (n as f64).sqrt(); n];
    let mut restart = 0usize;
    let mut ritz = 0.0;
    for k in 0..n {
        basis.push(q.clone());
        let mut w = apply(&q);
        if w.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite("Lanczos operator output".into()));
        }
        alpha.push(dot(&q, &w));
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let beta_k = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (theta, last) = ritz_pair(&alpha, &beta);
        ritz = theta;
        if k + 1 == n {
            break;
        }
        let scale = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(theta);
        if beta_k * last.abs() <= LANCZOS_TOL * theta && k >= 1 {
            break;
        }
        if beta_k <= 1e-14 * scale {
            // Invariant subspace: continue with a fresh direction.
            let mut fresh = loop {
                let mut e = vec![0.0; n];
                e[restart % n] = 1.0;
                restart += 1;
                for _ in 0..2 {
                    for b in &basis {
                        let c = dot(b, &e);
                        e.iter_mut().zip(b).for_each(|(ei, bi)| *ei -= c * bi);
                    }
                }
                if normalize(&mut e) > 1e-8 || restart > 2 * n {
                    break e;
                }
            };
            normalize(&mut fresh);
            beta.push(0.0);
            q = fresh;
        } else {
            beta.push(beta_k);
            q = w.into_iter().map(|x| x / beta_k).collect();
        }
    }
    Ok(ritz)
}

/// Largest eigenvalue of the symmetric tridiagonal matrix `(alpha, beta)`
/// by Sturm bisection, with the last component of its unit eigenvector.
fn ritz_pair(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    if k == 1 {
        return (alpha[0], 1.0);
    }
    let radius = |i: usize| {
        let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < k { beta[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..k)
        .map(|i| alpha[i] - radius(i))
        .fold(f64::INFINITY, f64::min);
    let mut hi = (0..k)
        .map(|i| alpha[i] + radius(i))
        .fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(hi.abs()).max(f64::MIN_POSITIVE);
    // count of eigenvalues strictly below x
    let below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..k {
            let b2 = if i > 0 {
                beta[i - 1] * beta[i - 1]
            } else {
                0.0
            };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * span;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = hi;
    // Inverse iteration with a shift just above theta: sigma I - T is positive
    // definite, so Thomas without pivoting is safe.
    let sigma = theta + 1e-10 * span;
    let mut y = vec![1.0; k];
    for _ in 0..3 {
        let mut pivots = vec![0.0; k];
        let mut upper = vec![0.0; k];
        for i in 0..k {
            let d = sigma - alpha[i];
            pivots[i] = if i == 0 {
                d
            } else {
                d - beta[i - 1] * beta[i - 1] / pivots[i - 1]
            };
            if i + 1 < k {
                upper[i] = -beta[i] / pivots[i];
            }
        }
        y[0] /= pivots[0];
        for i in 1..k {
            y[i] = (y[i] + beta[i - 1] * y[i - 1]) / pivots[i];
        }
        for i in (0..k - 1).rev() {
            y[i] -= upper[i] * y[i + 1];
        }
        normalize(&mut y);
    }
    (theta, y[k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues_dense;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_diagonal_norms() {
        assert!((spectral_norm(&DenseMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
        let d = DenseMatrix::from_rows(&[&[3.0, 0.0], &[0.0, -5.0]]).unwrap();
        assert!((spectral_norm(&d).unwrap() - 5.0).abs() < 1e-10);
        assert_eq!(spectral_norm(&DenseMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn min_singular_value_small_cases() {
        assert!((min_singular_value(&TridiagonalMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-14);
        let d = TridiagonalMatrix::new(vec![0.0], vec![2.0, 4.0], vec![0.0]).unwrap();
        assert!((min_singular_value(&d).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_matches_eigenvalues_of_gram_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..10 {
            let a = DenseMatrix::from_row_major(
                20,
                20,
                (0..400).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let gram = a.transpose().matmul(&a);
            let top = eigenvalues_dense(&gram)
                .unwrap()
                .iter()
                .map(|e| e.re)
                .fold(f64::NEG_INFINITY, f64::max);
            let norm = spectral_norm(&a).unwrap();
            assert!(
                (norm - top.sqrt()).abs() <= 1e-9 * norm,
                "{norm} vs {}",
                top.sqrt()
            );
        }
    }

    #[test]
    fn min_singular_value_matches_dense_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 10, 40, 120] {
            let a = TridiagonalMatrix::new(
                (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                (0..n).map(|_| rng.gen_range(2.5..4.0)).collect(),
                (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let dense = a.to_dense();
            let gram = dense.matmul(&dense.transpose());
            let bottom = eigenvalues_dense(&gram)
                .unwrap()
                .iter()
                .map(|e| e.re)
                .fold(f64::INFINITY, f64::min);
            let sigma = min_singular_value(&a).unwrap();
            assert!((sigma - bottom.sqrt()).abs() <= 1e-9 * sigma);
            let sigma_dense = min_singular_value_dense(&dense).unwrap();
            assert!((sigma_dense - sigma).abs() <= 1e-10 * sigma);
        }
    }

    #[test]
    fn lanczos_survives_invariant_start() {
        // The all-ones start vector spans the eigenvalue-1 eigenspace of
        // P + 5 (I - P), P the projector onto it, so the first step breaks down.
        let n = 6;
        let top = lanczos_largest(n, |v| {
            let mean = v.iter().sum::<f64>() / n as f64;
            v.iter().map(|x| mean + 5.0 * (x - mean)).collect()
        })
        .unwrap();
        assert!((top - 5.0).abs() < 1e-12, "{top}");
    }

    #[test]
    fn tridiagonal_and_dense_spectral_norms_agree() {
        let a = TridiagonalMatrix::new(
            vec![1.0, -2.0, 0.5],
            vec![4.0, 3.0, -1.0, 2.0],
            vec![0.3, 0.7, 1.1],
        )
        .unwrap();
        let x = spectral_norm_tridiagonal(&a).unwrap();
        let y = spectral_norm(&a.to_dense()).unwrap();
        assert!((x - y).abs() < 1e-10 * x);
    }
}
