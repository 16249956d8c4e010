//! The demonstration problem `a(z) = z + 1`, `b(z) = (z + 1)²` on `[0, 1]`
//! and the row computations behind the root and conditioning tables.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charpoly::{charpoly_roots, lambda_affine_coeffs, symbolic_d1, SYMBOLIC_MAX_N};
use crate::conditioning::{condition_report, norm_report, ConditionReport, NormReport};
use crate::discretization::{build_stencil, GridSpec, ProblemSpec, Theta};
use crate::error::Result;
use crate::expr::Expr;
use crate::timestepper::assemble_matrices;

pub fn demo_problem() -> ProblemSpec {
    ProblemSpec::homogeneous(
        Expr::parse("z+1").expect("valid literal"),
        Expr::parse("(z+1)^2").expect("valid literal"),
        0.0,
        1.0,
        1.0,
    )
}

/// Time step of the root table.
pub const ROOT_TABLE_DELTA_V: f64 = 0.1;
pub const ROOT_TABLE_SIZES: std::ops::RangeInclusive<usize> = 2..=8;

/// `(N, M)` with `T = 1`, so that `δv / δz² = 25/32` throughout.
pub const CONDITIONING_LADDER: [(usize, usize); 6] = [
    (25, 800),
    (50, 3200),
    (100, 12800),
    (200, 51200),
    (400, 204800),
    (800, 819200),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootRow {
    pub n: usize,
    pub expression: String,
    /// Largest real part first.
    pub roots: Vec<Complex64>,
}

pub fn root_row(spec: &ProblemSpec, n: usize, delta_v: f64) -> Result<RootRow> {
    let grid = GridSpec::with_delta_v(spec.z_l, spec.z_r, n, delta_v, 0, Theta::BackwardEuler)?;
    let st = build_stencil(spec, &grid)?;
    let set = charpoly_roots(&lambda_affine_coeffs(&st))?;
    let expression = if n <= SYMBOLIC_MAX_N {
        symbolic_d1(n)?
    } else {
        String::new()
    };
    Ok(RootRow {
        n,
        expression,
        roots: set.roots,
    })
}

pub fn root_table() -> Result<Vec<RootRow>> {
    let spec = demo_problem();
    ROOT_TABLE_SIZES
        .map(|n| root_row(&spec, n, ROOT_TABLE_DELTA_V))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub n: usize,
    pub m: usize,
    pub report: NormReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub n: usize,
    pub m: usize,
    pub report: ConditionReport,
}

fn scheme(
    spec: &ProblemSpec,
    n: usize,
    m: usize,
    theta: Theta,
) -> Result<crate::timestepper::SchemeMatrices> {
    let grid = GridSpec::for_problem(spec, n, m, theta)?;
    assemble_matrices(&build_stencil(spec, &grid)?, theta)
}

pub fn norm_row(spec: &ProblemSpec, n: usize, m: usize) -> Result<NormRow> {
    let sm = scheme(spec, n, m, Theta::BackwardEuler)?;
    Ok(NormRow {
        n,
        m,
        report: norm_report(&sm.x, &sm.y)?,
    })
}

pub fn condition_row(spec: &ProblemSpec, n: usize, m: usize, theta: Theta) -> Result<ConditionRow> {
    let sm = scheme(spec, n, m, theta)?;
    Ok(ConditionRow {
        n,
        m,
        report: condition_report(&sm.x, &sm.y, theta)?,
    })
}

/// Evaluates `f` on every ladder entry concurrently; results keep ladder order.
pub fn over_ladder<T: Send>(
    ladder: &[(usize, usize)],
    f: impl Fn(usize, usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = ladder
            .iter()
            .map(|&(n, m)| {
                let f = &f;
                scope.spawn(move || f(n, m))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("table worker panicked"))
            .collect()
    })
}

pub fn norm_table() -> Result<Vec<NormRow>> {
    let spec = demo_problem();
    over_ladder(&CONDITIONING_LADDER, |n, m| norm_row(&spec, n, m))
}

pub fn condition_table(theta: Theta) -> Result<Vec<ConditionRow>> {
    let spec = demo_problem();
    over_ladder(&CONDITIONING_LADDER, |n, m| {
        condition_row(&spec, n, m, theta)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_keeps_constant_mesh_ratio() {
        for (n, m) in CONDITIONING_LADDER {
            let grid = GridSpec::for_problem(&demo_problem(), n, m, Theta::BackwardEuler).unwrap();
            assert!((grid.mesh_ratio() - 25.0 / 32.0).abs() < 1e-12);
        }
    }

    #[test]
    fn smallest_root_row() {
        let row = root_row(&demo_problem(), 2, 0.1).unwrap();
        assert_eq!(row.expression, "-B1");
        assert!((row.roots[0].re - 2.06).abs() < 1e-12);
    }

    #[test]
    fn ladder_order_is_kept() {
        let out = over_ladder(&[(3, 1), (1, 2), (2, 3)], |n, m| Ok(n * 10 + m)).unwrap();
        assert_eq!(out, vec![31, 12, 23]);
    }
}
