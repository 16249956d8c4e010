use serde::{Deserialize, Serialize};

use super::{DenseMatrix, LinalgError};

/// Band storage of a square tridiagonal matrix.
///
/// Row `i` reads `sub[i-1], diag[i], sup[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalMatrix {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self, LinalgError> {
        let n = diag.len();
        if n == 0 {
            return Err(LinalgError::Dimension(
                "tridiagonal matrix of order 0".into(),
            ));
        }
        if sub.len() != n - 1 || sup.len() != n - 1 {
            return Err(LinalgError::Dimension(format!(
                "band lengths {}/{}/{} do not describe an order-{n} tridiagonal matrix",
                sub.len(),
                n,
                sup.len()
            )));
        }
        if sub.iter().chain(&diag).chain(&sup).any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite("tridiagonal entry".into()));
        }
        Ok(TridiagonalMatrix { sub, diag, sup })
    }

    pub fn identity(n: usize) -> Self {
        TridiagonalMatrix {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![1.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    /// Entry `(i, j)`; zero off the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.sub[j]
        } else if i + 1 == j {
            self.sup[i]
        } else {
            0.0
        }
    }

    pub fn transpose(&self) -> Self {
        TridiagonalMatrix {
            sub: self.sup.clone(),
            diag: self.diag.clone(),
            sup: self.sub.clone(),
        }
    }

    /// `alpha * self + beta * other`, entry-wise on the bands.
    pub fn combine(&self, alpha: f64, other: &TridiagonalMatrix, beta: f64) -> Self {
        assert_eq!(self.order(), other.order(), "order mismatch in combine");
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect()
        };
        TridiagonalMatrix {
            sub: mix(&self.sub, &other.sub),
            diag: mix(&self.diag, &other.diag),
            sup: mix(&self.sup, &other.sup),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |v: &[f64]| v.iter().map(|x| factor * x).collect();
        TridiagonalMatrix {
            sub: scale(&self.sub),
            diag: scale(&self.diag),
            sup: scale(&self.sup),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.order()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.order();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.sup[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.order();
        let mut dense = DenseMatrix::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = self.diag[i];
            if i + 1 < n {
                dense[(i + 1, i)] = self.sub[i];
                dense[(i, i + 1)] = self.sup[i];
            }
        }
        dense
    }

    /// Reads the three central bands of a square dense matrix.
    pub fn from_dense_band(dense: &DenseMatrix) -> Result<Self, LinalgError> {
        if !dense.is_square() {
            return Err(LinalgError::Dimension(
                "band extraction needs a square matrix".into(),
            ));
        }
        let n = dense.n_rows();
        TridiagonalMatrix::new(
            (0..n.saturating_sub(1))
                .map(|i| dense[(i + 1, i)])
                .collect(),
            (0..n).map(|i| dense[(i, i)]).collect(),
            (0..n.saturating_sub(1))
                .map(|i| dense[(i, i + 1)])
                .collect(),
        )
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.order())
            .map(|i| self.band_sum(i, &self.sub, &self.sup))
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.order())
            .map(|j| self.band_sum(j, &self.sup, &self.sub))
            .fold(0.0, f64::max)
    }

    /// `|before[k-1]| + |diag[k]| + |after[k]|`, skipping entries outside the matrix.
    fn band_sum(&self, k: usize, before: &[f64], after: &[f64]) -> f64 {
        let mut acc = self.diag[k].abs();
        if k > 0 {
            acc += before[k - 1].abs();
        }
        if k + 1 < self.order() {
            acc += after[k].abs();
        }
        acc
    }

    pub fn factor(&self) -> Result<TridiagonalLu, LinalgError> {
        TridiagonalLu::new(self)
    }
}

/// Thomas-algorithm factorization, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    sub: Vec<f64>,
    pivots: Vec<f64>,
    upper: Vec<f64>,
}

const PIVOT_FLOOR: f64 = 1e-300;

impl TridiagonalLu {
    pub fn new(a: &TridiagonalMatrix) -> Result<Self, LinalgError> {
        let n = a.order();
        let mut pivots = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let pivot = if i == 0 {
                a.diag[0]
            } else {
                a.diag[i] - a.sub[i - 1] * upper[i - 1]
            };
            if !(pivot.abs() > PIVOT_FLOOR) {
                return Err(LinalgError::ZeroPivot { row: i });
            }
            pivots.push(pivot);
            if i + 1 < n {
                upper.push(a.sup[i] / pivot);
            }
        }
        Ok(TridiagonalLu {
            sub: a.sub.clone(),
            pivots,
            upper,
        })
    }

    pub fn order(&self) -> usize {
        self.pivots.len()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.order();
        assert_eq!(x.len(), n, "right-hand side length mismatch");
        x[0] /= self.pivots[0];
        for i in 1..n {
            x[i] = (x[i] - self.sub[i - 1] * x[i - 1]) / self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.upper[i] * x[i + 1];
        }
    }
}

impl TridiagonalLu {
    /// `A⁻¹ B` for a tridiagonal `B`, formed densely one column at a time.
    pub fn solve_matrix(&self, b: &TridiagonalMatrix) -> Result<DenseMatrix, LinalgError> {
        let n = self.order();
        if b.order() != n {
            return Err(LinalgError::Dimension(format!(
                "order-{} right-hand side for order-{n} factorization",
                b.order()
            )));
        }
        let mut out = DenseMatrix::zeros(n, n);
        let mut column = vec![0.0; n];
        for j in 0..n {
            column.iter_mut().for_each(|x| *x = 0.0);
            for i in j.saturating_sub(1)..(j + 2).min(n) {
                column[i] = b.get(i, j);
            }
            self.solve_in_place(&mut column);
            for (i, x) in column.iter().enumerate() {
                out[(i, j)] = *x;
            }
        }
        Ok(out)
    }
}

/// Solves `a x = rhs` by the Thomas algorithm (no pivoting).
pub fn thomas_solve(a: &TridiagonalMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if rhs.len() != a.order() {
        return Err(LinalgError::Dimension(format!(
            "rhs of length {} for order-{} system",
            rhs.len(),
            a.order()
        )));
    }
    Ok(a.factor()?.solve(rhs))
}
