//! Norm bounds for `X⁻¹` and `Y` and the resulting bound on the condition
//! number of `I + W`, alongside the exact values.
//!
//! `‖X⁻¹‖₂² = 1/λ_min(XXᵀ)`, and Gershgorin's theorem applied to the
//! pentadiagonal `P = XXᵀ` bounds `λ_min(P)` from below by `min_l (g_l - s_l)`.

use serde::{Deserialize, Serialize};

use crate::discretization::Theta;
use crate::error::{Error, Result};
use crate::linalg::{
    min_singular_value, min_singular_value_dense, spectral_norm, spectral_norm_tridiagonal,
    DenseMatrix, TridiagonalMatrix,
};

/// The diagonal and the first two superdiagonals of `P = XXᵀ`.
struct GramBands {
    diag: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

fn gram_bands(x: &TridiagonalMatrix) -> GramBands {
    let n = x.order();
    // Row l of X is (p_l, q_l, r_l) with p_1 = r_{N-1} = 0.
    let p = |l: usize| if l > 0 { x.sub()[l - 1] } else { 0.0 };
    let q = |l: usize| x.diag()[l];
    let r = |l: usize| if l + 1 < n { x.sup()[l] } else { 0.0 };
    GramBands {
        diag: (0..n)
            .map(|l| p(l) * p(l) + q(l) * q(l) + r(l) * r(l))
            .collect(),
        first: (0..n.saturating_sub(1))
            .map(|l| q(l) * p(l + 1) + r(l) * q(l + 1))
            .collect(),
        second: (0..n.saturating_sub(2)).map(|l| r(l) * p(l + 2)).collect(),
    }
}

/// `P = XXᵀ` from the closed-form band entries.
pub fn gram_matrix(x: &TridiagonalMatrix) -> DenseMatrix {
    let bands = gram_bands(x);
    let n = x.order();
    let mut p = DenseMatrix::zeros(n, n);
    for l in 0..n {
        p[(l, l)] = bands.diag[l];
    }
    for (l, v) in bands.first.iter().enumerate() {
        p[(l, l + 1)] = *v;
        p[(l + 1, l)] = *v;
    }
    for (l, v) in bands.second.iter().enumerate() {
        p[(l, l + 2)] = *v;
        p[(l + 2, l)] = *v;
    }
    p
}

/// `min_l (g_l - s_l)` over the Gershgorin discs of `P`.
pub fn gershgorin_gap(x: &TridiagonalMatrix) -> f64 {
    let bands = gram_bands(x);
    let n = x.order();
    let off = |band: &[f64], l: usize, width: usize| {
        let mut s = 0.0;
        if l >= width {
            s += band[l - width].abs();
        }
        if l + width < n {
            s += band[l].abs();
        }
        s
    };
    (0..n)
        .map(|l| bands.diag[l] - off(&bands.first, l, 1) - off(&bands.second, l, 2))
        .fold(f64::INFINITY, f64::min)
}

/// Certified upper bound `(min_l (g_l - s_l))^{-1/2}` on `‖X⁻¹‖₂`.
pub fn gershgorin_xinv_bound(x: &TridiagonalMatrix) -> Result<f64> {
    let gap = gershgorin_gap(x);
    if gap > 0.0 {
        Ok(1.0 / gap.sqrt())
    } else {
        Err(Error::DiscGap { gap })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YNormBounds {
    pub y_inf: f64,
    pub y_one: f64,
    /// `sqrt(‖Y‖_∞ ‖Y‖₁)`
    pub y2_bound: f64,
}

pub fn y_norm_bounds(y: &TridiagonalMatrix) -> YNormBounds {
    let y_inf = y.norm_inf();
    let y_one = y.norm_one();
    YNormBounds {
        y_inf,
        y_one,
        y2_bound: (y_inf * y_one).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// `None` when the Gershgorin discs reach zero.
    pub xinv_bound: Option<f64>,
    pub xinv_exact: f64,
    pub y_inf: f64,
    pub y_one: f64,
    pub y2_bound: f64,
    pub y2_exact: f64,
}

impl NormReport {
    /// Exact norms lie under their bounds, up to a relative slack of 1e-12.
    pub fn bounds_hold(&self) -> bool {
        let slack = 1.0 + 1e-12;
        self.xinv_bound.is_none_or(|b| self.xinv_exact <= b * slack)
            && self.y2_exact <= self.y2_bound * slack
    }
}

pub fn norm_report(x: &TridiagonalMatrix, y: &TridiagonalMatrix) -> Result<NormReport> {
    let bounds = y_norm_bounds(y);
    Ok(NormReport {
        xinv_bound: gershgorin_xinv_bound(x).ok(),
        xinv_exact: 1.0 / min_singular_value(x)?,
        y_inf: bounds.y_inf,
        y_one: bounds.y_one,
        y2_bound: bounds.y2_bound,
        y2_exact: spectral_norm_tridiagonal(y)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub theta: Theta,
    pub norm: NormReport,
    /// `1 + ‖X⁻¹‖ bound · ‖Y‖ bound`, halved in the second factor for
    /// Crank-Nicolson where the matrix is `I + W/2`.
    pub kappa_bound: Option<f64>,
    /// `κ₂(I + θW)`.
    pub kappa_exact: f64,
}

impl ConditionReport {
    pub fn bounds_hold(&self) -> bool {
        self.norm.bounds_hold()
            && self
                .kappa_bound
                .is_none_or(|b| self.kappa_exact <= b * (1.0 + 1e-9))
    }
}

/// Largest order for which `W` is formed densely.
pub const DENSE_MAX_ORDER: usize = 1000;

/// `I + θW` with `W = X⁻¹Y` formed densely.
pub fn amplification_system(
    x: &TridiagonalMatrix,
    y: &TridiagonalMatrix,
    theta: Theta,
) -> Result<DenseMatrix> {
    if x.order() > DENSE_MAX_ORDER {
        return Err(Error::SizeCap {
            what: "dense I + W",
            requested: x.order(),
            cap: DENSE_MAX_ORDER,
        });
    }
    let mut w = x.factor()?.solve_matrix(y)?;
    w.scale(theta.value());
    w.shift_diagonal(1.0);
    Ok(w)
}

pub fn condition_report(
    x: &TridiagonalMatrix,
    y: &TridiagonalMatrix,
    theta: Theta,
) -> Result<ConditionReport> {
    let norm = norm_report(x, y)?;
    let system = amplification_system(x, y, theta)?;
    let kappa_exact = spectral_norm(&system)? / min_singular_value_dense(&system)?;
    let factor = theta.value();
    Ok(ConditionReport {
        theta,
        norm,
        kappa_bound: norm.xinv_bound.map(|b| 1.0 + b * norm.y2_bound * factor),
        kappa_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_x(n: usize) -> TridiagonalMatrix {
        TridiagonalMatrix::new(
            (0..n - 1).map(|i| 1.0 + 0.1 * i as f64).collect(),
            (0..n).map(|i| 8.0 + (i as f64).sin()).collect(),
            (0..n - 1).map(|i| 0.5 - 0.05 * i as f64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn gram_matches_product() {
        for n in [1, 2, 3, 7] {
            let x = sample_x(n);
            let dense = x.to_dense();
            let product = dense.matmul(&dense.transpose());
            let p = gram_matrix(&x);
            for (a, b) in p.data().iter().zip(product.data()) {
                assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()));
            }
            assert_eq!(p, p.transpose());
        }
    }

    #[test]
    fn two_by_two_gram() {
        let x = TridiagonalMatrix::new(vec![2.0], vec![5.0, 6.0], vec![3.0]).unwrap();
        let p = gram_matrix(&x);
        assert_eq!(
            p.data(),
            &[25.0 + 9.0, 5.0 * 2.0 + 3.0 * 6.0, 28.0, 4.0 + 36.0]
        );
    }

    #[test]
    fn identity_bound_is_one() {
        let x = TridiagonalMatrix::identity(5);
        assert_eq!(gershgorin_xinv_bound(&x).unwrap(), 1.0);
        let report = condition_report(
            &x,
            &TridiagonalMatrix::identity(5).scaled(0.0),
            Theta::BackwardEuler,
        )
        .unwrap();
        assert!((report.kappa_exact - 1.0).abs() < 1e-12);
        assert_eq!(report.kappa_bound, Some(1.0));
    }

    #[test]
    fn disc_gap_reported() {
        let x = TridiagonalMatrix::new(vec![1.0; 3], vec![1.0; 4], vec![1.0; 3]).unwrap();
        assert!(matches!(
            gershgorin_xinv_bound(&x),
            Err(Error::DiscGap { .. })
        ));
    }

    #[test]
    fn diagonal_y_norms() {
        let y = TridiagonalMatrix::new(vec![0.0; 2], vec![3.0, -7.0, 5.0], vec![0.0; 2]).unwrap();
        let b = y_norm_bounds(&y);
        assert_eq!((b.y_inf, b.y_one, b.y2_bound), (7.0, 7.0, 7.0));
    }

    #[test]
    fn bounds_dominate_exact_values() {
        let x = sample_x(30);
        let y = TridiagonalMatrix::new(vec![-3.0; 29], vec![7.0; 30], vec![-4.0; 29]).unwrap();
        for theta in [Theta::BackwardEuler, Theta::CrankNicolson] {
            let report = condition_report(&x, &y, theta).unwrap();
            assert!(report.bounds_hold(), "{report:?}");
        }
    }
}
