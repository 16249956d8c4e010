//! The characteristic polynomial `D¹_N` of `W = X⁻¹Y`, built from the
//! three-term recurrence on the pencil `Y - λX`, and the stability verdict
//! read off its roots.
//!
//! With `A_j = n_j - λ r_j`, `B_j = m_j - λ q_j`, `C_j = l_j - λ p_j` the
//! recurrence is `R_{j+1} = -B_j R_j - C_j A_{j-1} R_{j-1}`, `R_0 = 1`,
//! `R_1 = x_1`, `A_0 = 1`. Writing `R_j = u_j x_1 + w_j` gives
//! `D¹_N = u_N` and `D²_N = w_N`, and `D¹_N` equals `det(Y - λX)` up to sign.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discretization::{StencilCoefficients, Theta};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_dense, DenseMatrix, LinalgError, TridiagonalMatrix};

/// `constant + slope·λ`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub constant: f64,
    pub slope: f64,
}

impl Affine {
    pub const ONE: Affine = Affine {
        constant: 1.0,
        slope: 0.0,
    };

    pub fn new(constant: f64, slope: f64) -> Affine {
        Affine { constant, slope }
    }

    pub fn eval(self, lambda: Complex64) -> Complex64 {
        self.constant + self.slope * lambda
    }

    fn abs(self) -> Affine {
        Affine::new(self.constant.abs(), self.slope.abs())
    }

    /// The same affine function written in `μ = λ / rho`.
    fn in_scaled(self, rho: f64) -> Affine {
        Affine::new(self.constant, self.slope * rho)
    }
}

/// `A_j`, `B_j`, `C_j` for `j = 1..N-1`, stored at index `j - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaAffineTriple {
    pub a: Vec<Affine>,
    pub b: Vec<Affine>,
    pub c: Vec<Affine>,
}

pub fn lambda_affine_coeffs(st: &StencilCoefficients) -> LambdaAffineTriple {
    LambdaAffineTriple::from_bands(&st.p, &st.q, &st.r, &st.l, &st.m, &st.n)
        .expect("stencil arrays share one length")
}

impl LambdaAffineTriple {
    /// Packs per-node X entries `(p, q, r)` and Y entries `(l, m, n)`.
    pub fn from_bands(
        p: &[f64],
        q: &[f64],
        r: &[f64],
        l: &[f64],
        m: &[f64],
        n: &[f64],
    ) -> Result<LambdaAffineTriple> {
        let len = q.len();
        if len == 0 || [p, r, l, m, n].iter().any(|v| v.len() != len) {
            return Err(LinalgError::Dimension(format!(
                "stencil arrays must share a nonzero length (q has {len})"
            ))
            .into());
        }
        let pack = |cst: &[f64], slope: &[f64]| {
            cst.iter()
                .zip(slope)
                .map(|(&c, &s)| Affine::new(c, -s))
                .collect()
        };
        Ok(LambdaAffineTriple {
            a: pack(n, r),
            b: pack(m, q),
            c: pack(l, p),
        })
    }

    /// Number of space intervals `N`; the pencil has order `N - 1`.
    pub fn intervals(&self) -> usize {
        self.b.len() + 1
    }

    /// A characteristic size of the roots, the geometric mean of
    /// `‖Y row‖ / ‖X row‖`. Polynomials are stored in `μ = λ / rho` so that
    /// their coefficients stay representable for large `N`.
    pub fn root_scale(&self) -> f64 {
        let log_mean = (0..self.b.len())
            .map(|j| {
                let y =
                    self.a[j].constant.abs() + self.b[j].constant.abs() + self.c[j].constant.abs();
                let x = self.a[j].slope.abs() + self.b[j].slope.abs() + self.c[j].slope.abs();
                y.ln() - x.ln()
            })
            .sum::<f64>()
            / self.b.len() as f64;
        let rho = log_mean.exp();
        if rho.is_finite() && rho > 0.0 {
            rho
        } else {
            1.0
        }
    }

    /// `A_{j}` with the convention `A_0 = 1`; `j` is 1-based.
    fn a_at(&self, j: usize) -> Affine {
        if j == 0 {
            Affine::ONE
        } else {
            self.a[j - 1]
        }
    }
}

/// A real polynomial `P(λ) = e^{log_scale} Σ coeffs[k] (λ / variable_scale)^k`.
///
/// The common factor is kept as a logarithm because it overflows `f64` for
/// moderate `N`; roots do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    /// Ascending degree.
    pub coeffs: Vec<f64>,
    pub log_scale: f64,
    pub variable_scale: f64,
}

impl Polynomial {
    /// An unscaled polynomial in λ.
    pub fn new(coeffs: Vec<f64>) -> Polynomial {
        let mut p = Polynomial {
            coeffs,
            log_scale: 0.0,
            variable_scale: 1.0,
        };
        p.trim_exact_zeros();
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    /// `Σ coeffs[k] (λ / variable_scale)^k`, i.e. `P(λ)` without the common factor.
    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        let mu = lambda / self.variable_scale;
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * mu + c)
    }

    /// Coefficients divided by the largest magnitude among them.
    pub fn normalized_coeffs(&self) -> Vec<f64> {
        let max = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if max == 0.0 {
            return self.coeffs.clone();
        }
        self.coeffs.iter().map(|c| c / max).collect()
    }

    /// The same polynomial expressed with another variable scale.
    pub fn rescaled(&self, variable_scale: f64) -> Polynomial {
        let ratio = variable_scale / self.variable_scale;
        let mut power = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * power;
                power *= ratio;
                v
            })
            .collect();
        Polynomial {
            coeffs,
            log_scale: self.log_scale,
            variable_scale,
        }
    }

    fn trim_exact_zeros(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
    }
}

fn mul_affine(p: &[f64], f: Affine) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (k, &c) in p.iter().enumerate() {
        out[k] += c * f.constant;
        out[k + 1] += c * f.slope;
    }
    out
}

fn mul_two_affine(p: &[f64], f: Affine, g: Affine) -> Vec<f64> {
    mul_affine(&mul_affine(p, f), g)
}

/// `-(f·x) - (g·h·y)` coefficient-wise, with `sign = -1`, or with all
/// terms added when accumulating magnitudes (`sign = 1`).
fn step(x: &[f64], y: &[f64], f: Affine, g: Affine, h: Affine, sign: f64) -> Vec<f64> {
    let fx = mul_affine(x, f);
    let ghy = mul_two_affine(y, g, h);
    let len = fx.len().max(ghy.len());
    (0..len)
        .map(|k| {
            let a = fx.get(k).copied().unwrap_or(0.0);
            let b = ghy.get(k).copied().unwrap_or(0.0);
            sign * (a + b)
        })
        .collect()
}

/// A leading coefficient smaller than this fraction of the magnitudes that
/// formed it is treated as cancelled.
pub const COLLAPSE_TOLERANCE: f64 = 1e-12;

/// `(D¹_N, D²_N)` by the recurrence, renormalized at every step. Leading
/// coefficients of `D¹_N` lost to cancellation are trimmed.
pub fn charpoly_d1(abc: &LambdaAffineTriple) -> (Polynomial, Polynomial) {
    let rho = abc.root_scale();
    let (mut u_prev, mut w_prev, mut g_prev) = (vec![0.0], vec![1.0], vec![0.0]);
    let (mut u_cur, mut w_cur, mut g_cur) = (vec![1.0], vec![0.0], vec![1.0]);
    let mut log_scale = 0.0;
    for j in 1..abc.intervals() {
        let b = abc.b[j - 1].in_scaled(rho);
        let c = abc.c[j - 1].in_scaled(rho);
        let a = abc.a_at(j - 1).in_scaled(rho);
        let u_next = step(&u_cur, &u_prev, b, c, a, -1.0);
        let w_next = step(&w_cur, &w_prev, b, c, a, -1.0);
        // Magnitude bound: the same recurrence with every term made positive.
        let g_next = step(&g_cur, &g_prev, b.abs(), c.abs(), a.abs(), 1.0);
        let s = u_next
            .iter()
            .chain(&w_next)
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let s = if s > 0.0 && s.is_finite() { s } else { 1.0 };
        let gs = g_next.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let gs = if gs > 0.0 && gs.is_finite() { gs } else { 1.0 };
        for v in [&mut u_cur, &mut w_cur] {
            v.iter_mut().for_each(|x| *x /= s);
        }
        g_cur.iter_mut().for_each(|x| *x /= gs);
        let scaled = |v: Vec<f64>, by: f64| v.into_iter().map(|x| x / by).collect::<Vec<_>>();
        u_prev = std::mem::replace(&mut u_cur, scaled(u_next, s));
        w_prev = std::mem::replace(&mut w_cur, scaled(w_next, s));
        g_prev = std::mem::replace(&mut g_cur, scaled(g_next, gs));
        log_scale += s.ln();
    }
    // Relative size of each coefficient against the magnitudes that formed it.
    let u_max = u_cur.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let g_max = g_cur.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    while u_cur.len() > 1 {
        let k = u_cur.len() - 1;
        let lead = u_cur[k].abs() / u_max.max(f64::MIN_POSITIVE);
        let formed = g_cur[k].abs() / g_max.max(f64::MIN_POSITIVE);
        if u_cur[k] == 0.0 || lead <= COLLAPSE_TOLERANCE * formed {
            u_cur.pop();
        } else {
            break;
        }
    }
    let mut d2 = Polynomial {
        coeffs: w_cur,
        log_scale,
        variable_scale: rho,
    };
    d2.trim_exact_zeros();
    (
        Polynomial {
            coeffs: u_cur,
            log_scale,
            variable_scale: rho,
        },
        d2,
    )
}

/// `D¹_N(λ)` and its derivative at one point through the recurrence, as
/// their ratio. Both are renormalized together, so only the ratio is exact.
fn newton_ratio(abc: &LambdaAffineTriple, lambda: Complex64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let (mut u_prev, mut du_prev) = (zero, zero);
    let (mut u_cur, mut du_cur) = (Complex64::new(1.0, 0.0), zero);
    for j in 1..abc.intervals() {
        let (b, c, a) = (abc.b[j - 1], abc.c[j - 1], abc.a_at(j - 1));
        let (bv, cv, av) = (b.eval(lambda), c.eval(lambda), a.eval(lambda));
        let ca = cv * av;
        let dca = c.slope * av + cv * a.slope;
        let u_next = -bv * u_cur - ca * u_prev;
        let du_next = -b.slope * u_cur - bv * du_cur - dca * u_prev - ca * du_prev;
        let s = [u_next, du_next, u_cur, du_cur]
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        let s = if s > 0.0 && s.is_finite() { s } else { 1.0 };
        u_prev = u_cur / s;
        du_prev = du_cur / s;
        u_cur = u_next / s;
        du_cur = du_next / s;
    }
    u_cur / du_cur
}

/// Roots of `p` as eigenvalues of its balanced companion matrix.
pub fn polynomial_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    let d = p.degree();
    if d == 0 {
        return Err(Error::InvalidProblem(
            "root finding needs a polynomial of degree at least 1".into(),
        ));
    }
    let lead = p.coeffs[d];
    let mut companion = DenseMatrix::zeros(d, d);
    for j in 0..d {
        companion[(0, j)] = -p.coeffs[d - 1 - j] / lead;
    }
    for i in 1..d {
        companion[(i, i - 1)] = 1.0;
    }
    let mu = eigenvalues_dense(&companion)?;
    Ok(mu.into_iter().map(|z| z * p.variable_scale).collect())
}

pub const ABERTH_MAX_ITERATIONS: usize = 200;
const ABERTH_STALL_LIMIT: usize = 5;

/// `D¹_N` and its roots.
///
/// Companion-matrix roots of the monomial coefficients lose accuracy quickly
/// with `N`, so they only seed a simultaneous Aberth iteration whose Newton
/// ratios come from the recurrence itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub d1: Polynomial,
    pub roots: Vec<Complex64>,
    /// `N - 1` minus the degree actually found.
    pub degree_deficiency: usize,
    pub aberth_iterations: usize,
}

pub fn charpoly_roots(abc: &LambdaAffineTriple) -> Result<RootSet> {
    let (d1, _) = charpoly_d1(abc);
    let nominal = abc.intervals() - 1;
    let degree_deficiency = nominal - d1.degree();
    if d1.degree() == 0 {
        return Ok(RootSet {
            d1,
            roots: Vec::new(),
            degree_deficiency,
            aberth_iterations: 0,
        });
    }
    let seeds = match polynomial_roots(&d1) {
        Ok(r) if r.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => r,
        _ => circle_seeds(d1.degree(), d1.variable_scale),
    };
    let (roots, aberth_iterations) = aberth(abc, seeds);
    Ok(RootSet {
        d1,
        roots: sorted_descending(roots),
        degree_deficiency,
        aberth_iterations,
    })
}

fn circle_seeds(count: usize, radius: f64) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / count as f64;
            Complex64::from_polar(radius, angle)
        })
        .collect()
}

fn aberth(abc: &LambdaAffineTriple, seeds: Vec<Complex64>) -> (Vec<Complex64>, usize) {
    let mut z = seeds.clone();
    let d = z.len();
    let (mut best_step, mut stalled) = (f64::INFINITY, 0);
    for iteration in 1..=ABERTH_MAX_ITERATIONS {
        let mut largest_step = 0.0f64;
        for i in 0..d {
            let ratio = newton_ratio(abc, z[i]);
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let correction = ratio / (1.0 - ratio * repulsion);
            if !(correction.re.is_finite() && correction.im.is_finite()) {
                continue;
            }
            z[i] -= correction;
            largest_step = largest_step.max(correction.norm() / z[i].norm().max(f64::MIN_POSITIVE));
        }
        if z.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return (seeds, iteration);
        }
        if largest_step <= 64.0 * f64::EPSILON {
            return (z, iteration);
        }
        // Once the steps are rounding noise they stop shrinking.
        if largest_step < best_step {
            best_step = largest_step;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= ABERTH_STALL_LIMIT && best_step <= 1e-10 {
                return (z, iteration);
            }
        }
    }
    (z, ABERTH_MAX_ITERATIONS)
}

fn sorted_descending(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    roots
}

/// Eigenvalues of `W = X⁻¹Y`, formed densely.
pub const ORACLE_MAX_ORDER: usize = 1000;

pub fn eigen_oracle(x: &TridiagonalMatrix, y: &TridiagonalMatrix) -> Result<Vec<Complex64>> {
    if x.order() > ORACLE_MAX_ORDER {
        return Err(Error::SizeCap {
            what: "dense eigenvalue oracle",
            requested: x.order(),
            cap: ORACLE_MAX_ORDER,
        });
    }
    let w = x.factor()?.solve_matrix(y)?;
    Ok(sorted_descending(eigenvalues_dense(&w)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    NotCertified,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "STABLE",
            Verdict::NotCertified => "NOT CERTIFIED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub n: usize,
    pub theta: Theta,
    /// Eigenvalues `λ` of `W`, largest real part first.
    pub roots: Vec<Complex64>,
    pub min_real_part: f64,
    pub amplification_moduli: Vec<f64>,
    pub spectral_radius: f64,
    pub verdict: Verdict,
    pub degree_deficiency: usize,
    /// Roots with no eigenvalue of `W` nearby, when the oracle was run.
    pub unmatched_roots: Vec<Complex64>,
}

/// Relative margin by which real parts must exceed zero.
pub const POSITIVITY_TOLERANCE: f64 = 1e-9;

/// Modulus of the eigenvalue of the amplification matrix belonging to `λ`:
/// `1/(1+λ)` for backward Euler and `(1-λ/2)/(1+λ/2)` for Crank-Nicolson.
pub fn amplification_modulus(lambda: Complex64, theta: Theta) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    match theta {
        Theta::BackwardEuler => (one / (one + lambda)).norm(),
        Theta::CrankNicolson => {
            let half = lambda / 2.0;
            ((one - half) / (one + half)).norm()
        }
    }
}

pub fn stability_verdict(roots: &[Complex64], theta: Theta) -> StabilityReport {
    let min_real_part = roots.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let max_modulus = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let amplification_moduli: Vec<f64> = roots
        .iter()
        .map(|&z| amplification_modulus(z, theta))
        .collect();
    let spectral_radius = amplification_moduli.iter().copied().fold(0.0, f64::max);
    let positive = roots.is_empty() || min_real_part > POSITIVITY_TOLERANCE * (1.0 + max_modulus);
    let verdict = if positive && spectral_radius < 1.0 {
        Verdict::Stable
    } else {
        Verdict::NotCertified
    };
    StabilityReport {
        n: roots.len() + 1,
        theta,
        roots: roots.to_vec(),
        min_real_part,
        amplification_moduli,
        spectral_radius,
        verdict,
        degree_deficiency: 0,
        unmatched_roots: Vec::new(),
    }
}

/// Relative distance under which a root and an eigenvalue are the same.
pub const MATCH_TOLERANCE: f64 = 1e-6;

/// Roots with no unused eigenvalue within `MATCH_TOLERANCE` relative.
pub fn unmatched(roots: &[Complex64], eigenvalues: &[Complex64]) -> Vec<Complex64> {
    let mut used = vec![false; eigenvalues.len()];
    let mut missing = Vec::new();
    for &root in roots {
        let best = eigenvalues
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, e)| (k, (root - e).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((k, distance)) if distance <= MATCH_TOLERANCE * root.norm().max(1.0) => {
                used[k] = true
            }
            _ => missing.push(root),
        }
    }
    missing
}

/// Full verdict for a stencil: recurrence roots, optionally cross-checked
/// against the eigenvalues of the dense `W`.
pub fn analyze_stability(
    st: &StencilCoefficients,
    theta: Theta,
    with_oracle: bool,
) -> Result<StabilityReport> {
    let abc = lambda_affine_coeffs(st);
    let set = charpoly_roots(&abc)?;
    let mut report = stability_verdict(&set.roots, theta);
    report.n = abc.intervals();
    report.degree_deficiency = set.degree_deficiency;
    if set.degree_deficiency > 0 {
        report.verdict = Verdict::NotCertified;
    }
    if with_oracle {
        let sm = crate::timestepper::assemble_matrices(st, theta)?;
        let eigenvalues = eigen_oracle(&sm.x, &sm.y)?;
        report.unmatched_roots = unmatched(&set.roots, &eigenvalues);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactorKind {
    A,
    B,
    C,
}

/// One factor `s_j` of a sequence in the expansion: `A_j`, `-B_j` or `-C_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub kind: FactorKind,
    pub index: usize,
}

/// All sign sequences of the expansion for `N` intervals, each listed from
/// `s_{N-1}` down. A sequence ending in `-C_1` belongs to `D²_N`, with the
/// implicit `A_0 = 1` omitted.
pub fn sequences(n: usize) -> Vec<Vec<Factor>> {
    fn extend(j: usize, prefix: &mut Vec<Factor>, out: &mut Vec<Vec<Factor>>) {
        if j == 0 {
            out.push(prefix.clone());
            return;
        }
        prefix.push(Factor {
            kind: FactorKind::B,
            index: j,
        });
        extend(j - 1, prefix, out);
        prefix.pop();
        prefix.push(Factor {
            kind: FactorKind::C,
            index: j,
        });
        if j >= 2 {
            prefix.push(Factor {
                kind: FactorKind::A,
                index: j - 1,
            });
            extend(j - 2, prefix, out);
            prefix.pop();
        } else {
            out.push(prefix.clone());
        }
        prefix.pop();
    }
    let mut out = Vec::new();
    if n >= 2 {
        extend(n - 1, &mut Vec::new(), &mut out);
    }
    out
}

fn in_d1(sequence: &[Factor]) -> bool {
    sequence.last()
        != Some(&Factor {
            kind: FactorKind::C,
            index: 1,
        })
}

pub const ENUMERATION_MAX_N: usize = 14;

/// `D¹_N` by summing the products over all sequences, and the total number
/// of sequences. Exponential in `N`; an oracle for [`charpoly_d1`].
pub fn enumerate_charpoly(abc: &LambdaAffineTriple) -> Result<(Polynomial, usize)> {
    let n = abc.intervals();
    if n > ENUMERATION_MAX_N {
        return Err(Error::SizeCap {
            what: "sequence enumeration",
            requested: n,
            cap: ENUMERATION_MAX_N,
        });
    }
    let rho = abc.root_scale();
    let all = sequences(n);
    let mut sum = vec![0.0; n];
    for sequence in all.iter().filter(|s| in_d1(s)) {
        let mut product = vec![1.0];
        for f in sequence {
            let (affine, sign) = match f.kind {
                FactorKind::A => (abc.a[f.index - 1], 1.0),
                FactorKind::B => (abc.b[f.index - 1], -1.0),
                FactorKind::C => (abc.c[f.index - 1], -1.0),
            };
            let scaled = affine.in_scaled(rho);
            product = mul_affine(
                &product,
                Affine::new(sign * scaled.constant, sign * scaled.slope),
            );
        }
        for (k, c) in product.iter().enumerate() {
            sum[k] += c;
        }
    }
    let mut poly = Polynomial {
        coeffs: sum,
        log_scale: 0.0,
        variable_scale: rho,
    };
    poly.trim_exact_zeros();
    Ok((poly, all.len()))
}

pub const SYMBOLIC_MAX_N: usize = 8;

/// `D¹_N` as a signed sum of `A_j B_j C_j` monomials, terms sorted.
pub fn symbolic_d1(n: usize) -> Result<String> {
    if !(2..=SYMBOLIC_MAX_N).contains(&n) {
        return Err(Error::SizeCap {
            what: "symbolic expansion",
            requested: n,
            cap: SYMBOLIC_MAX_N,
        });
    }
    let mut terms: Vec<(String, bool)> = sequences(n)
        .into_iter()
        .filter(|s| in_d1(s))
        .map(|mut s| {
            let negative = s.iter().filter(|f| f.kind != FactorKind::A).count() % 2 == 1;
            s.sort();
            let monomial: String = s
                .iter()
                .map(|f| format!("{:?}{}", f.kind, f.index))
                .collect();
            (monomial, negative)
        })
        .collect();
    terms.sort();
    let mut out = String::new();
    for (k, (monomial, negative)) in terms.iter().enumerate() {
        match (k, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(monomial);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn roots_of_small_polynomials() {
        let r = polynomial_roots(&Polynomial::new(vec![-2.0, 1.0])).unwrap();
        assert!((r[0] - c(2.0)).norm() < 1e-14);
        let mut r = polynomial_roots(&Polynomial::new(vec![2.0, -3.0, 1.0])).unwrap();
        r.sort_by(|x, y| x.re.total_cmp(&y.re));
        assert!((r[0] - c(1.0)).norm() < 1e-13);
        assert!((r[1] - c(2.0)).norm() < 1e-13);
        assert!(polynomial_roots(&Polynomial::new(vec![3.0])).is_err());
    }

    #[test]
    fn root_residuals_are_small() {
        let p = Polynomial::new(vec![-6.0, 11.0, -6.0, 1.0, 0.5]);
        let norm = p.coeffs.iter().map(|x| x * x).sum::<f64>().sqrt();
        for z in polynomial_roots(&p).unwrap() {
            let residual = p.eval(z).norm() / (norm * (1.0 + z.norm()).powi(p.degree() as i32));
            assert!(residual <= 1e-8, "{residual}");
        }
    }

    #[test]
    fn rescaling_preserves_values() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.5]);
        let q = p.rescaled(4.0);
        for z in [c(0.3), Complex64::new(-1.0, 2.0)] {
            assert!((p.eval(z) - q.eval(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn sequence_counts_are_fibonacci() {
        let mut fib = vec![0usize, 1];
        for k in 2..20 {
            fib.push(fib[k - 1] + fib[k - 2]);
        }
        for n in 2..=14 {
            assert_eq!(sequences(n).len(), fib[n + 1], "N = {n}");
        }
    }

    #[test]
    fn symbolic_small_cases() {
        assert_eq!(symbolic_d1(2).unwrap(), "-B1");
        assert_eq!(symbolic_d1(3).unwrap(), "-A1C2 + B1B2");
        assert_eq!(symbolic_d1(4).unwrap(), "A1B3C2 + A2B1C3 - B1B2B3");
        assert!(symbolic_d1(9).is_err());
    }

    fn triple(n: usize) -> LambdaAffineTriple {
        let vals = |seed: f64| -> Vec<f64> {
            (0..n - 1)
                .map(|j| seed + 0.37 * j as f64 + (j as f64 * seed).sin())
                .collect()
        };
        LambdaAffineTriple::from_bands(
            &vals(0.2),
            &vals(3.0),
            &vals(0.1),
            &vals(-1.5).iter().map(|x| x - 2.0).collect::<Vec<_>>(),
            &vals(5.0),
            &vals(-1.2).iter().map(|x| x - 2.0).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn recurrence_matches_enumeration() {
        for n in 2..=9 {
            let abc = triple(n);
            let (rec, _) = charpoly_d1(&abc);
            let (enumerated, _) = enumerate_charpoly(&abc).unwrap();
            let (x, y) = (rec.normalized_coeffs(), enumerated.normalized_coeffs());
            assert_eq!(x.len(), y.len());
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() <= 1e-12, "N = {n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn two_interval_polynomial_is_minus_b() {
        let abc = LambdaAffineTriple::from_bands(&[1.0], &[8.0], &[1.0], &[-3.0], &[6.0], &[-3.0])
            .unwrap();
        let (d1, d2) = charpoly_d1(&abc);
        let rho = abc.root_scale();
        // -B_1 = -(6 - 8λ) = 8λ - 6 in λ; in μ it is 8ρμ - 6.
        let ratio = d1.coeffs[1] / d1.coeffs[0];
        assert!((ratio - (-8.0 * rho / 6.0)).abs() < 1e-14);
        // -C_1 = -(l - λp) = 3 + λ.
        assert!((d2.coeffs[1] / d2.coeffs[0] - rho / 3.0).abs() < 1e-14);
    }

    #[test]
    fn roots_match_oracle_for_symmetric_pencil() {
        // X = tridiag(1, 4, 1), Y = tridiag(-1, 2, -1): all eigenvalues real positive.
        let n = 12;
        let ones = vec![1.0; n - 1];
        let abc = LambdaAffineTriple::from_bands(
            &ones,
            &vec![4.0; n - 1],
            &ones,
            &vec![-1.0; n - 1],
            &vec![2.0; n - 1],
            &vec![-1.0; n - 1],
        )
        .unwrap();
        let set = charpoly_roots(&abc).unwrap();
        let x =
            TridiagonalMatrix::new(vec![1.0; n - 2], vec![4.0; n - 1], vec![1.0; n - 2]).unwrap();
        let y =
            TridiagonalMatrix::new(vec![-1.0; n - 2], vec![2.0; n - 1], vec![-1.0; n - 2]).unwrap();
        let oracle = eigen_oracle(&x, &y).unwrap();
        assert_eq!(set.roots.len(), n - 1);
        assert!(unmatched(&set.roots, &oracle).is_empty());
        for k in 1..n {
            let t = (k as f64 * std::f64::consts::PI / n as f64).cos();
            let exact = (2.0 - 2.0 * t) / (4.0 + 2.0 * t);
            assert!(set.roots.iter().any(|z| (z - c(exact)).norm() < 1e-12));
        }
    }

    #[test]
    fn collapsed_degree_is_reported() {
        // X singular in its last row (q = p = r = 0 there) drops the degree.
        let abc = LambdaAffineTriple::from_bands(
            &[0.0, 1.0, 0.0],
            &[4.0, 4.0, 0.0],
            &[1.0, 1.0, 0.0],
            &[-1.0, -1.0, -1.0],
            &[3.0, 3.0, 3.0],
            &[-1.0, -1.0, -1.0],
        )
        .unwrap();
        let set = charpoly_roots(&abc).unwrap();
        assert_eq!(set.degree_deficiency, 1);
        assert_eq!(set.roots.len(), 2);
    }

    #[test]
    fn verdict_rules() {
        let report = stability_verdict(&[c(-1.0)], Theta::BackwardEuler);
        assert_eq!(report.verdict, Verdict::NotCertified);
        let report = stability_verdict(&[c(2.06)], Theta::BackwardEuler);
        assert_eq!(report.verdict, Verdict::Stable);
        assert!((report.amplification_moduli[0] - 1.0 / 3.06).abs() < 1e-15);
        let report = stability_verdict(&[Complex64::new(3.0, 40.0)], Theta::CrankNicolson);
        assert_eq!(report.verdict, Verdict::Stable);
        assert!(report.spectral_radius < 1.0);
        assert_eq!(Verdict::NotCertified.to_string(), "NOT CERTIFIED");
    }

    #[test]
    fn zero_y_gives_zero_eigenvalues() {
        let x = TridiagonalMatrix::new(vec![1.0; 3], vec![5.0; 4], vec![1.0; 3]).unwrap();
        let y = TridiagonalMatrix::new(vec![0.0; 3], vec![0.0; 4], vec![0.0; 3]).unwrap();
        assert!(eigen_oracle(&x, &y)
            .unwrap()
            .iter()
            .all(|z| z.norm() == 0.0));
    }
}
