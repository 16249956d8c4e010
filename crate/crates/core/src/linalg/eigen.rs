//! Eigenvalues of a real square matrix: balancing, Householder reduction to
//! upper Hessenberg form, then Francis double-shift QR.

use num_complex::Complex64;

use super::{DenseMatrix, LinalgError};

/// All eigenvalues of `a`, in the order they deflate.
///
/// The QR sweep budget is `10 n²` iterations in total; exhausting it yields
/// [`LinalgError::NoConvergence`] carrying the eigenvalues found so far.
pub fn eigenvalues_dense(a: &DenseMatrix) -> Result<Vec<Complex64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(
            "eigenvalues of a non-square matrix".into(),
        ));
    }
    let n = a.n_rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = Work::from_dense(a);
    h.balance();
    h.reduce_to_hessenberg();
    h.francis_qr(10 * n * n)
}

/// 1-based square work array; row and column 0 are unused so the QR sweep
/// can follow the classical EISPACK indexing.
struct Work {
    n: usize,
    data: Vec<f64>,
}

impl Work {
    fn from_dense(a: &DenseMatrix) -> Self {
        let n = a.n_rows();
        let mut data = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                data[(i + 1) * (n + 1) + j + 1] = a[(i, j)];
            }
        }
        Work { n, data }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.n + 1) + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * (self.n + 1) + j]
    }

    /// Diagonal similarity by powers of two so that row and column norms are
    /// comparable.
    fn balance(&mut self) {
        const RADIX: f64 = 2.0;
        let n = self.n;
        let sqrdx = RADIX * RADIX;
        let mut done = false;
        while !done {
            done = true;
            for i in 1..=n {
                let mut r = 0.0;
                let mut c = 0.0;
                for j in 1..=n {
                    if j != i {
                        c += self.at(j, i).abs();
                        r += self.at(i, j).abs();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        *self.at_mut(i, j) *= g;
                    }
                    for j in 1..=n {
                        *self.at_mut(j, i) *= f;
                    }
                }
            }
        }
    }

    fn reduce_to_hessenberg(&mut self) {
        let n = self.n;
        let mut v = vec![0.0; n + 1];
        for k in 1..n.saturating_sub(1) {
            // Reflector annihilating a[k+2..=n][k].
            let scale: f64 = (k + 1..=n).map(|i| self.at(i, k).abs()).sum();
            if scale == 0.0 {
                continue;
            }
            let mut norm2 = 0.0;
            for i in k + 1..=n {
                v[i] = self.at(i, k) / scale;
                norm2 += v[i] * v[i];
            }
            let alpha = -norm2.sqrt().copysign(v[k + 1]);
            let vtv = norm2 - v[k + 1] * alpha;
            v[k + 1] -= alpha;
            // H = I - v vᵀ / vtv ; A <- H A H
            for j in 1..=n {
                let dot: f64 = (k + 1..=n).map(|i| v[i] * self.at(i, j)).sum();
                let f = dot / vtv;
                for i in k + 1..=n {
                    *self.at_mut(i, j) -= f * v[i];
                }
            }
            for i in 1..=n {
                let dot: f64 = (k + 1..=n).map(|j| self.at(i, j) * v[j]).sum();
                let f = dot / vtv;
                for j in k + 1..=n {
                    *self.at_mut(i, j) -= f * v[j];
                }
            }
            for i in k + 2..=n {
                *self.at_mut(i, k) = 0.0;
            }
        }
    }

    fn francis_qr(&mut self, max_iterations: usize) -> Result<Vec<Complex64>, LinalgError> {
        let n = self.n;
        let mut found: Vec<Complex64> = Vec::with_capacity(n);
        let mut anorm = 0.0;
        for i in 1..=n {
            for j in (i.max(2) - 1)..=n {
                anorm += self.at(i, j).abs();
            }
        }
        let mut nn = n;
        let mut t = 0.0;
        let mut total = 0usize;
        while nn >= 1 {
            let mut its = 0usize;
            loop {
                // Look for a single small subdiagonal element.
                let mut l = nn;
                while l >= 2 {
                    let mut s = self.at(l - 1, l - 1).abs() + self.at(l, l).abs();
                    if s == 0.0 {
                        s = anorm;
                    }
                    if self.at(l, l - 1).abs() + s == s {
                        *self.at_mut(l, l - 1) = 0.0;
                        break;
                    }
                    l -= 1;
                }
                let l = l.max(1);
                let mut x = self.at(nn, nn);
                if l == nn {
                    found.push(Complex64::new(x + t, 0.0));
                    nn -= 1;
                    break;
                }
                let mut y = self.at(nn - 1, nn - 1);
                let mut w = self.at(nn, nn - 1) * self.at(nn - 1, nn);
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        let z = p + z.copysign(p);
                        let second = if z != 0.0 { x - w / z } else { x + z };
                        found.push(Complex64::new(x + z, 0.0));
                        found.push(Complex64::new(second, 0.0));
                    } else {
                        found.push(Complex64::new(x + p, z));
                        found.push(Complex64::new(x + p, -z));
                    }
                    nn -= 2;
                    break;
                }
                if total >= max_iterations {
                    return Err(LinalgError::NoConvergence {
                        method: "Francis QR",
                        iterations: total,
                        partial: found,
                    });
                }
                if its > 0 && its.is_multiple_of(10) {
                    // Exceptional shift.
                    t += x;
                    for i in 1..=nn {
                        *self.at_mut(i, i) -= x;
                    }
                    let s = self.at(nn, nn - 1).abs() + self.at(nn - 1, nn - 2).abs();
                    x = 0.75 * s;
                    y = x;
                    w = -0.4375 * s * s;
                }
                its += 1;
                total += 1;
                self.double_shift_sweep(l, nn, x, y, w);
            }
        }
        Ok(found)
    }

    fn double_shift_sweep(&mut self, l: usize, nn: usize, x: f64, y: f64, w: f64) {
        let (mut p, mut q, mut r): (f64, f64, f64);
        let mut m = nn - 2;
        loop {
            let z = self.at(m, m);
            let rr = x - z;
            let s = y - z;
            p = (rr * s - w) / self.at(m + 1, m) + self.at(m, m + 1);
            q = self.at(m + 1, m + 1) - z - rr - s;
            r = self.at(m + 2, m + 1);
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = self.at(m, m - 1).abs() * (q.abs() + r.abs());
            let v = p.abs() * (self.at(m - 1, m - 1).abs() + z.abs() + self.at(m + 1, m + 1).abs());
            if u + v == v {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=nn {
            *self.at_mut(i, i - 2) = 0.0;
            if i != m + 2 {
                *self.at_mut(i, i - 3) = 0.0;
            }
        }
        let mut xk = 0.0;
        for k in m..nn {
            if k != m {
                p = self.at(k, k - 1);
                q = self.at(k + 1, k - 1);
                r = if k != nn - 1 {
                    self.at(k + 2, k - 1)
                } else {
                    0.0
                };
                xk = p.abs() + q.abs() + r.abs();
                if xk != 0.0 {
                    p /= xk;
                    q /= xk;
                    r /= xk;
                }
            }
            let s = (p * p + q * q + r * r).sqrt().copysign(p);
            if s == 0.0 {
                continue;
            }
            if k == m {
                if l != m {
                    *self.at_mut(k, k - 1) = -self.at(k, k - 1);
                }
            } else {
                *self.at_mut(k, k - 1) = -s * xk;
            }
            p += s;
            let hx = p / s;
            let hy = q / s;
            let hz = r / s;
            q /= p;
            r /= p;
            for j in k..=nn {
                let mut pp = self.at(k, j) + q * self.at(k + 1, j);
                if k != nn - 1 {
                    pp += r * self.at(k + 2, j);
                    *self.at_mut(k + 2, j) -= pp * hz;
                }
                *self.at_mut(k + 1, j) -= pp * hy;
                *self.at_mut(k, j) -= pp * hx;
            }
            let mmin = nn.min(k + 3);
            for i in l..=mmin {
                let mut pp = hx * self.at(i, k) + hy * self.at(i, k + 1);
                if k != nn - 1 {
                    pp += hz * self.at(i, k + 2);
                    *self.at_mut(i, k + 2) -= pp * r;
                }
                *self.at_mut(i, k + 1) -= pp * q;
                *self.at_mut(i, k) -= pp;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_matrix() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]])
            .unwrap();
        let ev = sorted(eigenvalues_dense(&a).unwrap());
        for (e, expected) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((e - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let a = DenseMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let ev = sorted(eigenvalues_dense(&a).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_of_factorable_quadratic() {
        // λ² − 3λ + 2
        let a = DenseMatrix::from_rows(&[&[3.0, -2.0], &[1.0, 0.0]]).unwrap();
        let ev = sorted(eigenvalues_dense(&a).unwrap());
        assert!((ev[0].re - 1.0).abs() < 1e-14 && ev[0].im == 0.0);
        assert!((ev[1].re - 2.0).abs() < 1e-14 && ev[1].im == 0.0);
    }

    #[test]
    fn single_entry_and_empty() {
        let a = DenseMatrix::from_rows(&[&[-4.5]]).unwrap();
        assert_eq!(
            eigenvalues_dense(&a).unwrap(),
            vec![Complex64::new(-4.5, 0.0)]
        );
        assert!(eigenvalues_dense(&DenseMatrix::zeros(0, 0))
            .unwrap()
            .is_empty());
    }

    // Cyclic Jacobi rotations on a symmetric matrix, used as an independent check.
    fn jacobi_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
        let n = a.n_rows();
        let mut m = a.clone();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)] * m[(i, j)])
                .sum();
            if off < 1e-30 * m.max_abs().powi(2) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if m[(p, q)] == 0.0 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                }
            }
        }
        let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        d.sort_by(f64::total_cmp);
        d
    }

    #[test]
    fn symmetric_matrices_match_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [1usize, 2, 3, 5, 8, 13, 21] {
            let mut a = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let x = rng.gen_range(-1.0..1.0);
                    a[(i, j)] = x;
                    a[(j, i)] = x;
                }
            }
            let scale = a.norm_inf();
            let ev = sorted(eigenvalues_dense(&a).unwrap());
            let reference = jacobi_eigenvalues(&a);
            for (e, r) in ev.iter().zip(&reference) {
                assert!(e.im.abs() <= 1e-9 * scale, "imaginary part {}", e.im);
                assert!((e.re - r).abs() <= 1e-8 * scale, "{} vs {}", e.re, r);
            }
        }
    }

    #[test]
    fn random_nonsymmetric_eigenpairs_are_consistent() {
        // trace and determinant survive the similarity transforms
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..12 {
            let a = DenseMatrix::from_row_major(
                n,
                n,
                (0..n * n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            )
            .unwrap();
            let ev = eigenvalues_dense(&a).unwrap();
            assert_eq!(ev.len(), n);
            let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
            let sum: Complex64 = ev.iter().sum();
            assert!((sum.re - trace).abs() < 1e-10 && sum.im.abs() < 1e-10);
        }
    }
}
