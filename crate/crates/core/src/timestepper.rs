//! Assembly and marching of the fully discrete θ-scheme
//! `(X + θY) U^{m+1} = (X - (1-θ)Y) U^m + F^m`.

use serde::{Deserialize, Serialize};

use crate::discretization::{build_stencil, GridSpec, ProblemSpec, StencilCoefficients, Theta};
use crate::error::{Error, Result};
use crate::linalg::{LinalgError, TridiagonalLu, TridiagonalMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeMatrices {
    pub x: TridiagonalMatrix,
    pub y: TridiagonalMatrix,
    pub theta: Theta,
    /// `X + θY`
    pub lhs: TridiagonalMatrix,
    /// `X - (1-θ)Y`
    pub rhs_mat: TridiagonalMatrix,
}

/// Builds X (sub `p_2..p_{N-1}`, diag `q`, super `r_1..r_{N-2}`) and Y
/// (likewise from `l`, `m`, `n`) and their θ combinations.
pub fn assemble_matrices(st: &StencilCoefficients, theta: Theta) -> Result<SchemeMatrices> {
    let count = st.order();
    let band = |below: &[f64], on: &[f64], above: &[f64]| {
        TridiagonalMatrix::new(
            below[1..].to_vec(),
            on.to_vec(),
            above[..count - 1].to_vec(),
        )
    };
    let x = band(&st.p, &st.q, &st.r)?;
    let y = band(&st.l, &st.m, &st.n)?;
    let t = theta.value();
    let lhs = x.combine(1.0, &y, t);
    let rhs_mat = x.combine(1.0, &y, -(1.0 - t));
    Ok(SchemeMatrices {
        x,
        y,
        theta,
        lhs,
        rhs_mat,
    })
}

/// `F^m`, carrying the Dirichlet data between levels `m` and `m + 1`.
pub fn boundary_vector(
    spec: &ProblemSpec,
    st: &StencilCoefficients,
    grid: &GridSpec,
    m: usize,
) -> Result<Vec<f64>> {
    let (v0, v1) = (grid.time(m), grid.time(m + 1));
    let (h1_now, h1_next) = (spec.h1.eval(v0)?, spec.h1.eval(v1)?);
    let (h2_now, h2_next) = (spec.h2.eval(v0)?, spec.h2.eval(v1)?);
    Ok(boundary_from_values(
        st,
        grid.theta,
        (h1_now, h1_next),
        (h2_now, h2_next),
    ))
}

fn boundary_from_values(
    st: &StencilCoefficients,
    theta: Theta,
    h1: (f64, f64),
    h2: (f64, f64),
) -> Vec<f64> {
    let t = theta.value();
    let last = st.order() - 1;
    let mut f = vec![0.0; st.order()];
    let (p, l) = (st.p[0], st.l[0]);
    let (r, n) = (st.r[last], st.n[last]);
    f[0] += (p - (1.0 - t) * l) * h1.0 - (p + t * l) * h1.1;
    f[last] += (r - (1.0 - t) * n) * h2.0 - (r + t * n) * h2.1;
    f
}

/// One step with a fresh factorization. Marching loops should use
/// [`Stepper`], which factors once.
pub fn advance_step(sm: &SchemeMatrices, u: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    Stepper::new(sm.clone())?.advance(u, f)
}

/// Scheme matrices with the left-hand side factored once for all steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    matrices: SchemeMatrices,
    lu: TridiagonalLu,
}

impl Stepper {
    pub fn new(matrices: SchemeMatrices) -> Result<Stepper> {
        let lu = matrices.lhs.factor()?;
        Ok(Stepper { matrices, lu })
    }

    pub fn matrices(&self) -> &SchemeMatrices {
        &self.matrices
    }

    pub fn advance(&self, u: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        let order = self.matrices.lhs.order();
        if u.len() != order || f.len() != order {
            return Err(LinalgError::Dimension(format!(
                "state of length {} and forcing of length {} for order-{order} scheme",
                u.len(),
                f.len()
            ))
            .into());
        }
        let mut next = self.matrices.rhs_mat.matvec(u);
        for (x, fi) in next.iter_mut().zip(f) {
            *x += fi;
        }
        self.lu.solve_in_place(&mut next);
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionHistory {
    pub grid: GridSpec,
    /// Interior values `U^m`, `m = 0..=M`.
    pub levels: Vec<Vec<f64>>,
    /// `(h1(v^m), h2(v^m))` for each stored level.
    pub boundary: Vec<(f64, f64)>,
}

impl SolutionHistory {
    pub fn final_level(&self) -> &[f64] {
        self.levels
            .last()
            .expect("history holds at least the initial level")
    }

    /// The full profile `(z_i, u_i)`, `i = 0..=N`, at level `m`.
    pub fn profile(&self, m: usize) -> Vec<(f64, f64)> {
        let (left, right) = self.boundary[m];
        let mut values = Vec::with_capacity(self.grid.n + 1);
        values.push(left);
        values.extend_from_slice(&self.levels[m]);
        values.push(right);
        values
            .into_iter()
            .enumerate()
            .map(|(i, u)| (self.grid.node(i), u))
            .collect()
    }
}

/// Marches from the sampled initial datum, calling `visit(m, U^m)` for every
/// level including `m = 0`, and returns the final level.
pub fn march(
    spec: &ProblemSpec,
    grid: &GridSpec,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<Vec<f64>> {
    spec.validate()?;
    let st = build_stencil(spec, grid)?;
    let stepper = Stepper::new(assemble_matrices(&st, grid.theta)?)?;
    let mut u = (1..grid.n)
        .map(|i| spec.k.eval(grid.node(i)).map_err(Error::from))
        .collect::<Result<Vec<f64>>>()?;
    visit(0, &u);
    let mut h1_now = spec.h1.eval(0.0)?;
    let mut h2_now = spec.h2.eval(0.0)?;
    for m in 0..grid.m {
        let v_next = grid.time(m + 1);
        let (h1_next, h2_next) = (spec.h1.eval(v_next)?, spec.h2.eval(v_next)?);
        let f = boundary_from_values(&st, grid.theta, (h1_now, h1_next), (h2_now, h2_next));
        u = stepper
            .advance(&u, &f)
            .map_err(|e| time_level_error(m + 1, e))?;
        if let Some(j) = u.iter().position(|x| !x.is_finite()) {
            return Err(time_level_error(
                m + 1,
                Error::NonFinite {
                    what: "solution value",
                    node: j + 1,
                },
            ));
        }
        visit(m + 1, &u);
        (h1_now, h2_now) = (h1_next, h2_next);
    }
    Ok(u)
}

fn time_level_error(level: usize, error: Error) -> Error {
    match error {
        Error::Linalg(source) => Error::TimeLevel { level, source },
        Error::NonFinite { what, node } => Error::InvalidProblem(format!(
            "{what} became non-finite at node {node}, time level {level}"
        )),
        other => other,
    }
}

/// Marches and keeps every level.
pub fn solve_ibvp(spec: &ProblemSpec, grid: &GridSpec) -> Result<SolutionHistory> {
    let mut levels = Vec::with_capacity(grid.m + 1);
    march(spec, grid, |_, u| levels.push(u.to_vec()))?;
    let boundary = (0..=grid.m)
        .map(|m| {
            let v = grid.time(m);
            Ok((spec.h1.eval(v)?, spec.h2.eval(v)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionHistory {
        grid: *grid,
        levels,
        boundary,
    })
}

/// Discrete max norm of `u - exact(z_i)` over the interior nodes.
pub fn max_error(grid: &GridSpec, u: &[f64], exact: impl Fn(f64) -> f64) -> f64 {
    u.iter()
        .enumerate()
        .map(|(j, x)| (x - exact(grid.node(j + 1))).abs())
        .fold(0.0, f64::max)
}

/// Observed orders `log2(e_k / e_{k+1})` of an error ladder with halving steps.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
