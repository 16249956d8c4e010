//! Grid sampling of the coefficients and the fourth-order compact stencil.
//!
//! The equation is `u_v + a(z) u_z - b(z) u_zz = 0` on `[z_l, z_r] x (0, T]`
//! with `u(0, z) = k(z)`, `u(v, z_l) = h1(v)` and `u(v, z_r) = h2(v)`.
//! Interior arrays are stored 0-based: entry `j` belongs to node `i = j + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Time discretization. Only the two members of the θ family whose
/// stability is certified are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub enum Theta {
    BackwardEuler,
    CrankNicolson,
}

impl Theta {
    pub fn value(self) -> f64 {
        match self {
            Theta::BackwardEuler => 1.0,
            Theta::CrankNicolson => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Theta::BackwardEuler => "backward-euler",
            Theta::CrankNicolson => "crank-nicolson",
        }
    }
}

impl TryFrom<f64> for Theta {
    type Error = Error;

    fn try_from(value: f64) -> Result<Theta> {
        if value == 1.0 {
            Ok(Theta::BackwardEuler)
        } else if value == 0.5 {
            Ok(Theta::CrankNicolson)
        } else {
            Err(Error::InvalidGrid(format!(
                "theta must be 1 (backward Euler) or 0.5 (Crank-Nicolson), got {value}"
            )))
        }
    }
}

impl From<Theta> for f64 {
    fn from(theta: Theta) -> f64 {
        theta.value()
    }
}

/// Exact derivatives of the coefficients, used instead of central
/// differences when supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDerivatives {
    pub da: Expr,
    pub dda: Expr,
    pub db: Expr,
    pub ddb: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub a: Expr,
    pub b: Expr,
    pub k: Expr,
    pub h1: Expr,
    pub h2: Expr,
    pub z_l: f64,
    pub z_r: f64,
    pub t_final: f64,
    /// Asserted lower bound on `b` at every grid node.
    pub epsilon: f64,
    pub derivatives: Option<CoefficientDerivatives>,
}

pub const DEFAULT_EPSILON: f64 = 1e-12;

impl ProblemSpec {
    /// A problem with homogeneous initial and boundary data, which is all the
    /// stability and conditioning analyses need.
    pub fn homogeneous(a: Expr, b: Expr, z_l: f64, z_r: f64, t_final: f64) -> ProblemSpec {
        ProblemSpec {
            a,
            b,
            k: Expr::constant(0.0),
            h1: Expr::constant(0.0),
            h2: Expr::constant(0.0),
            z_l,
            z_r,
            t_final,
            epsilon: DEFAULT_EPSILON,
            derivatives: None,
        }
    }

    /// Checks the domain, horizon and compatibility of initial and boundary
    /// data. Positivity of `b` is checked when sampling on a grid.
    pub fn validate(&self) -> Result<()> {
        if !(self.z_l.is_finite() && self.z_r.is_finite() && self.z_l < self.z_r) {
            return Err(Error::InvalidProblem(format!(
                "need z_l < z_r, got [{}, {}]",
                self.z_l, self.z_r
            )));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "horizon T must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        let k_left = self.k.eval(self.z_l)?;
        let k_right = self.k.eval(self.z_r)?;
        let tolerance = 1e-12 * (1.0 + k_left.abs());
        let h1 = self.h1.eval(0.0)?;
        let h2 = self.h2.eval(0.0)?;
        if (h1 - k_left).abs() > tolerance {
            return Err(Error::InvalidProblem(format!(
                "incompatible data: h1(0) = {h1} but k(z_l) = {k_left}"
            )));
        }
        if (h2 - k_right).abs() > tolerance {
            return Err(Error::InvalidProblem(format!(
                "incompatible data: h2(0) = {h2} but k(z_r) = {k_right}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub m: usize,
    pub z_l: f64,
    pub delta_z: f64,
    pub delta_v: f64,
    pub theta: Theta,
}

impl GridSpec {
    /// `n` space intervals on `[z_l, z_r]` and `m` steps of size `t_final / m`.
    pub fn new(
        z_l: f64,
        z_r: f64,
        t_final: f64,
        n: usize,
        m: usize,
        theta: Theta,
    ) -> Result<GridSpec> {
        if m == 0 {
            return Err(Error::InvalidGrid("M must be at least 1".into()));
        }
        GridSpec::with_delta_v(z_l, z_r, n, t_final / m as f64, m, theta)
    }

    /// A grid whose time step is given directly. `m` may be zero when only
    /// the matrices are needed.
    pub fn with_delta_v(
        z_l: f64,
        z_r: f64,
        n: usize,
        delta_v: f64,
        m: usize,
        theta: Theta,
    ) -> Result<GridSpec> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("N must be at least 2, got {n}")));
        }
        let delta_z = (z_r - z_l) / n as f64;
        if !(delta_z.is_finite() && delta_z > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "empty or reversed domain [{z_l}, {z_r}]"
            )));
        }
        if !(delta_v.is_finite() && delta_v > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "time step must be positive, got {delta_v}"
            )));
        }
        Ok(GridSpec {
            n,
            m,
            z_l,
            delta_z,
            delta_v,
            theta,
        })
    }

    pub fn for_problem(spec: &ProblemSpec, n: usize, m: usize, theta: Theta) -> Result<GridSpec> {
        GridSpec::new(spec.z_l, spec.z_r, spec.t_final, n, m, theta)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.z_l + i as f64 * self.delta_z
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.delta_v
    }

    /// Order of X and Y.
    pub fn interior(&self) -> usize {
        self.n - 1
    }

    /// Parabolic mesh ratio `δv / δz²`.
    pub fn mesh_ratio(&self) -> f64 {
        self.delta_v / (self.delta_z * self.delta_z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTables {
    /// `a(z_i)` and `b(z_i)` for `i = 0..=N`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Derivative surrogates at the interior nodes.
    pub dz_a: Vec<f64>,
    pub dzz_a: Vec<f64>,
    pub dz_b: Vec<f64>,
    pub dzz_b: Vec<f64>,
}

fn sample(expr: &Expr, grid: &GridSpec, what: &'static str) -> Result<Vec<f64>> {
    (0..=grid.n)
        .map(|i| {
            let value = expr.eval(grid.node(i))?;
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::NonFinite { what, node: i })
            }
        })
        .collect()
}

fn central_first(f: &[f64], h: f64) -> Vec<f64> {
    f.windows(3).map(|w| (w[2] - w[0]) / (2.0 * h)).collect()
}

fn central_second(f: &[f64], h: f64) -> Vec<f64> {
    f.windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) / (h * h))
        .collect()
}

/// Samples `a` and `b` on the closed grid, with derivatives from central
/// differences (boundary nodes included) or from the supplied expressions.
pub fn sample_coefficients(spec: &ProblemSpec, grid: &GridSpec) -> Result<CoefficientTables> {
    let a = sample(&spec.a, grid, "a(z)")?;
    let b = sample(&spec.b, grid, "b(z)")?;
    for (i, &value) in b.iter().enumerate() {
        if !(value > spec.epsilon) {
            return Err(Error::Positivity {
                node: i,
                z: grid.node(i),
                value,
                epsilon: spec.epsilon,
            });
        }
    }
    let (dz_a, dzz_a, dz_b, dzz_b) = match &spec.derivatives {
        None => (
            central_first(&a, grid.delta_z),
            central_second(&a, grid.delta_z),
            central_first(&b, grid.delta_z),
            central_second(&b, grid.delta_z),
        ),
        Some(d) => {
            let interior = |expr: &Expr, what| -> Result<Vec<f64>> {
                let mut values = sample(expr, grid, what)?;
                values.pop();
                values.remove(0);
                Ok(values)
            };
            (
                interior(&d.da, "a'(z)")?,
                interior(&d.dda, "a''(z)")?,
                interior(&d.db, "b'(z)")?,
                interior(&d.ddb, "b''(z)")?,
            )
        }
    };
    let tables = CoefficientTables {
        a,
        b,
        dz_a,
        dzz_a,
        dz_b,
        dzz_b,
    };
    if let Some(j) = [&tables.dz_a, &tables.dzz_a, &tables.dz_b, &tables.dzz_b]
        .iter()
        .find_map(|v| v.iter().position(|x| !x.is_finite()))
    {
        return Err(Error::NonFinite {
            what: "coefficient derivative",
            node: j + 1,
        });
    }
    Ok(tables)
}

/// How the off-diagonal entries of X are formed from `γ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffDiagonalForm {
    /// `p_i = (2 + δz γ_i) / (24 δv)`, `r_i = (2 - δz γ_i) / (24 δv)`.
    #[default]
    Derivation,
    /// `p_i = (2 + δz) γ_i / (24 δv)`, `r_i = (2 - δz) γ_i / (24 δv)`.
    /// Kept only to show that it does not reproduce the reference roots.
    ListingVariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilCoefficients {
    pub delta_z: f64,
    pub delta_v: f64,
    pub gamma: Vec<f64>,
    pub zeta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Entries of X: `p` below, `q` on, `r` above the diagonal.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    /// Entries of Y: `l` below, `m` on, `n` above the diagonal.
    pub l: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
}

pub fn stencil_from_samples(tables: &CoefficientTables, grid: &GridSpec) -> StencilCoefficients {
    stencil_with_form(tables, grid, OffDiagonalForm::Derivation)
}

pub fn stencil_with_form(
    tables: &CoefficientTables,
    grid: &GridSpec,
    form: OffDiagonalForm,
) -> StencilCoefficients {
    let (dz, dv) = (grid.delta_z, grid.delta_v);
    let h2 = dz * dz / 12.0;
    let count = grid.interior();
    let mut st = StencilCoefficients {
        delta_z: dz,
        delta_v: dv,
        gamma: Vec::with_capacity(count),
        zeta: Vec::with_capacity(count),
        alpha: Vec::with_capacity(count),
        p: Vec::with_capacity(count),
        q: vec![5.0 / (6.0 * dv); count],
        r: Vec::with_capacity(count),
        l: Vec::with_capacity(count),
        m: Vec::with_capacity(count),
        n: Vec::with_capacity(count),
    };
    for j in 0..count {
        let (a, b) = (tables.a[j + 1], tables.b[j + 1]);
        let (da, dda) = (tables.dz_a[j], tables.dzz_a[j]);
        let (db, ddb) = (tables.dz_b[j], tables.dzz_b[j]);
        let gamma = a / b + 2.0 * db / b;
        let zeta = a - h2 * (a / b * da + 2.0 / b * da * db - dda);
        let alpha = b + h2 * (a / b * db - 2.0 * da + ddb - 2.0 / b * db * db + a * a / b);
        let (p, r) = match form {
            OffDiagonalForm::Derivation => (
                (2.0 + dz * gamma) / (24.0 * dv),
                (2.0 - dz * gamma) / (24.0 * dv),
            ),
            OffDiagonalForm::ListingVariant => (
                (2.0 + dz) * gamma / (24.0 * dv),
                (2.0 - dz) * gamma / (24.0 * dv),
            ),
        };
        st.gamma.push(gamma);
        st.zeta.push(zeta);
        st.alpha.push(alpha);
        st.p.push(p);
        st.r.push(r);
        st.l.push(-zeta / (2.0 * dz) - alpha / (dz * dz));
        st.m.push(2.0 * alpha / (dz * dz));
        st.n.push(zeta / (2.0 * dz) - alpha / (dz * dz));
    }
    st
}

/// Samples the coefficients and builds the stencil in one call.
pub fn build_stencil(spec: &ProblemSpec, grid: &GridSpec) -> Result<StencilCoefficients> {
    Ok(stencil_from_samples(
        &sample_coefficients(spec, grid)?,
        grid,
    ))
}

impl StencilCoefficients {
    /// Number of interior nodes, the order of X and Y.
    pub fn order(&self) -> usize {
        self.q.len()
    }

    /// Interior nodes (1-based) where the X row is not strictly diagonally
    /// dominant. Entries outside the matrix (`p_1`, `r_{N-1}`) are ignored.
    pub fn dominance_violations(&self) -> Vec<usize> {
        let last = self.order() - 1;
        (0..self.order())
            .filter(|&j| {
                let p = if j > 0 { self.p[j].abs() } else { 0.0 };
                let r = if j < last { self.r[j].abs() } else { 0.0 };
                self.q[j].abs() <= p + r
            })
            .map(|j| j + 1)
            .collect()
    }

    /// A human-readable warning when X is not diagonally dominant.
    pub fn dominance_warning(&self) -> Option<String> {
        let rows = self.dominance_violations();
        if rows.is_empty() {
            None
        } else {
            Some(format!(
                "X is not diagonally dominant at interior node(s) {rows:?}; refine the space grid"
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_grid(n: usize, dv: f64) -> (ProblemSpec, GridSpec) {
        let spec = ProblemSpec::homogeneous(
            Expr::parse("z+1").unwrap(),
            Expr::parse("(z+1)^2").unwrap(),
            0.0,
            1.0,
            1.0,
        );
        let grid = GridSpec::with_delta_v(0.0, 1.0, n, dv, 0, Theta::BackwardEuler).unwrap();
        (spec, grid)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn quadratic_b_difference_is_exact() {
        let (spec, grid) = demo_grid(3, 0.1);
        let tables = sample_coefficients(&spec, &grid).unwrap();
        assert!(close(tables.dz_b[0], 8.0 / 3.0, 1e-14));
        assert!(close(tables.dzz_b[0], 2.0, 1e-12));
        assert!(close(tables.dz_a[1], 1.0, 1e-14));
        assert!(tables.dzz_a[1].abs() < 1e-12);
    }

    #[test]
    fn constant_coefficients_have_zero_differences() {
        let spec =
            ProblemSpec::homogeneous(Expr::constant(0.7), Expr::constant(1.9), 0.0, 2.0, 1.0);
        let grid = GridSpec::with_delta_v(0.0, 2.0, 7, 0.1, 0, Theta::CrankNicolson).unwrap();
        let tables = sample_coefficients(&spec, &grid).unwrap();
        for v in [&tables.dz_a, &tables.dzz_a, &tables.dz_b, &tables.dzz_b] {
            assert!(v.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn negative_diffusion_is_rejected() {
        let spec =
            ProblemSpec::homogeneous(Expr::constant(1.0), Expr::constant(-1.0), 0.0, 1.0, 1.0);
        let grid = GridSpec::with_delta_v(0.0, 1.0, 4, 0.1, 0, Theta::BackwardEuler).unwrap();
        assert!(matches!(
            sample_coefficients(&spec, &grid),
            Err(Error::Positivity { node: 0, .. })
        ));
    }

    #[test]
    fn stencil_two_intervals() {
        let (spec, grid) = demo_grid(2, 0.1);
        let st = build_stencil(&spec, &grid).unwrap();
        assert!(close(st.gamma[0], 10.0 / 3.0, 1e-14));
        assert!(close(st.alpha[0], 2.1458333333333333, 1e-12));
        assert!(close(st.m[0], 17.166666666666667, 1e-12));
        assert!(close(st.q[0], 8.333333333333334, 1e-14));
        assert!((st.m[0] / st.q[0] - 2.06).abs() < 1e-12);
    }

    #[test]
    fn stencil_three_intervals() {
        let (spec, grid) = demo_grid(3, 0.1);
        let st = build_stencil(&spec, &grid).unwrap();
        let expected = [
            (st.gamma[0], 3.75),
            (st.zeta[0], 1.2986111111),
            (st.alpha[0], 1.7314814815),
            (st.gamma[1], 3.0),
            (st.zeta[1], 1.6388888889),
            (st.alpha[1], 2.7314814815),
            (st.p[1], 1.25),
            (st.r[0], 0.3125),
            (st.n[0], -13.6354166667),
        ];
        for (got, want) in expected {
            assert!(close(got, want, 1e-9), "{got} vs {want}");
        }
    }

    #[test]
    fn row_identities() {
        let (spec, grid) = demo_grid(17, 0.01);
        let st = build_stencil(&spec, &grid).unwrap();
        for j in 0..st.order() {
            assert!(close(st.p[j] + st.r[j], 1.0 / (6.0 * 0.01), 1e-13));
            let scale = st.m[j].abs();
            assert!((st.l[j] + st.m[j] + st.n[j]).abs() <= 1e-13 * scale);
        }
        assert!(st.dominance_warning().is_none());
    }

    #[test]
    fn dominance_warning_on_coarse_grid() {
        // Strong convection on a coarse grid makes δz γ exceed 2.
        let spec =
            ProblemSpec::homogeneous(Expr::constant(60.0), Expr::constant(1.0), 0.0, 1.0, 1.0);
        let grid = GridSpec::with_delta_v(0.0, 1.0, 4, 0.1, 0, Theta::BackwardEuler).unwrap();
        let st = build_stencil(&spec, &grid).unwrap();
        assert!(!st.dominance_violations().is_empty());
        assert!(st.dominance_warning().is_some());
    }

    #[test]
    fn exact_derivative_mode_agrees_for_low_degree_coefficients() {
        let (mut spec, grid) = demo_grid(6, 0.1);
        let differenced = build_stencil(&spec, &grid).unwrap();
        spec.derivatives = Some(CoefficientDerivatives {
            da: Expr::constant(1.0),
            dda: Expr::constant(0.0),
            db: Expr::parse("2*(z+1)").unwrap(),
            ddb: Expr::constant(2.0),
        });
        let exact = build_stencil(&spec, &grid).unwrap();
        for (x, y) in differenced.alpha.iter().zip(&exact.alpha) {
            assert!(close(*x, *y, 1e-13));
        }
        for (x, y) in differenced.p.iter().zip(&exact.p) {
            assert!(close(*x, *y, 1e-13));
        }
    }

    #[test]
    fn validation() {
        let mut spec =
            ProblemSpec::homogeneous(Expr::constant(1.0), Expr::constant(1.0), 0.0, 1.0, 1.0);
        assert!(spec.validate().is_ok());
        spec.h1 = Expr::constant(1.0);
        assert!(matches!(spec.validate(), Err(Error::InvalidProblem(_))));
        spec.h1 = Expr::constant(0.0);
        spec.z_r = -1.0;
        assert!(spec.validate().is_err());
        assert!(GridSpec::new(0.0, 1.0, 1.0, 1, 10, Theta::BackwardEuler).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1.0, 4, 0, Theta::BackwardEuler).is_err());
        assert!(Theta::try_from(0.3).is_err());
    }
}
