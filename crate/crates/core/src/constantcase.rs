//! Constant coefficients: `u_v + c u_z - c u_zz = 0`.
//!
//! X and Y become Toeplitz with entries `(c1, c2, c3)` and `(y1, y2, y3)`,
//! and the eigenvalues of `W` are roots of one quadratic per
//! `φ = cos²(kπ/N)`. Positivity of its three coefficients certifies that
//! every root has positive real part.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charpoly::{charpoly_roots, stability_verdict, LambdaAffineTriple, StabilityReport};
use crate::discretization::Theta;
use crate::error::{Error, Result};

/// `u_v + a u_z - b u_zz = 0` with constant `a ≠ 0`, `b > 0` becomes
/// `u_v + c u_z - c u_zz = 0` with `c = a²/b` after rescaling space by
/// `a/b`.
pub fn transform_to_c(a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::ConstantCase(format!(
            "diffusion b must be positive, got {b}"
        )));
    }
    if a == 0.0 || !a.is_finite() {
        return Err(Error::ConstantCase(format!(
            "the transform needs a nonzero convection coefficient, got a = {a}; \
             solve the pure diffusion problem directly"
        )));
    }
    Ok(a * a / b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantProblem {
    pub c: f64,
    pub delta_z: f64,
    pub delta_v: f64,
    /// `δv / δz²`
    pub d: f64,
    pub n: usize,
}

impl ConstantProblem {
    pub fn new(c: f64, delta_z: f64, delta_v: f64, n: usize) -> Result<ConstantProblem> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::ConstantCase(format!("c must be positive, got {c}")));
        }
        if !(delta_z > 0.0 && delta_v > 0.0 && delta_z.is_finite() && delta_v.is_finite()) {
            return Err(Error::ConstantCase(format!(
                "steps must be positive, got δz = {delta_z}, δv = {delta_v}"
            )));
        }
        if n < 2 {
            return Err(Error::ConstantCase(format!(
                "N must be at least 2, got {n}"
            )));
        }
        Ok(ConstantProblem {
            c,
            delta_z,
            delta_v,
            d: delta_v / (delta_z * delta_z),
            n,
        })
    }

    /// `N` intervals on a unit interval with mesh ratio `d`.
    pub fn with_mesh_ratio(c: f64, n: usize, d: f64) -> Result<ConstantProblem> {
        let delta_z = 1.0 / n as f64;
        ConstantProblem::new(c, delta_z, d * delta_z * delta_z, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantStencil {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

pub fn constant_stencil(cp: &ConstantProblem) -> ConstantStencil {
    let (c, dz, dv, d) = (cp.c, cp.delta_z, cp.delta_v, cp.d);
    let stencil = ConstantStencil {
        c1: (2.0 + dz) / (24.0 * dv),
        c2: 5.0 / (6.0 * dv),
        c3: (2.0 - dz) / (24.0 * dv),
        y1: -c / (2.0 * dv) * ((2.0 + dz) * d + dv / 6.0),
        y2: c / dv * (2.0 * d + dv / 6.0),
        y3: -c / (2.0 * dv) * ((2.0 - dz) * d + dv / 6.0),
    };
    debug_assert!({
        let alpha = c * (1.0 + dz * dz / 12.0);
        let direct = [
            -c / (2.0 * dz) - alpha / (dz * dz),
            2.0 * alpha / (dz * dz),
            c / (2.0 * dz) - alpha / (dz * dz),
        ];
        [stencil.y1, stencil.y2, stencil.y3]
            .iter()
            .zip(direct)
            .all(|(x, y)| (x - y).abs() <= 1e-13 * y.abs())
    });
    stencil
}

impl ConstantStencil {
    /// The stencil as a per-node triple for the recurrence.
    pub fn affine_triple(&self, n: usize) -> LambdaAffineTriple {
        let k = n - 1;
        LambdaAffineTriple::from_bands(
            &vec![self.c1; k],
            &vec![self.c2; k],
            &vec![self.c3; k],
            &vec![self.y1; k],
            &vec![self.y2; k],
            &vec![self.y3; k],
        )
        .expect("n >= 2")
    }
}

/// The eigenvalue belonging to `φ = 0`, `(6c/5)(2d + δv/6) = y2/c2`.
pub fn phi_zero_eigenvalue(cp: &ConstantProblem) -> f64 {
    6.0 * cp.c / 5.0 * (2.0 * cp.d + cp.delta_v / 6.0)
}

/// Coefficients of `A λ² - B λ + C`, with `B` the negated λ coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub quadratic: f64,
    pub negated_linear: f64,
    pub constant: f64,
}

impl Quadratic {
    pub fn is_positive(&self) -> bool {
        self.quadratic > 0.0 && self.negated_linear > 0.0 && self.constant > 0.0
    }

    /// Both roots, the larger-magnitude one first, without cancellation.
    pub fn roots(&self) -> [Complex64; 2] {
        let (a, b, c) = (self.quadratic, self.negated_linear, self.constant);
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let q = 0.5 * (b + b.signum() * disc.sqrt());
            let big = q / a;
            let small = if q != 0.0 { c / q } else { big };
            [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
        } else {
            let re = b / (2.0 * a);
            let im = (-disc).sqrt() / (2.0 * a);
            [Complex64::new(re, im), Complex64::new(re, -im)]
        }
    }
}

/// `(c2² - 4c1c3φ) λ² - (2c2y2 - 4c1y3φ - 4c3y1φ) λ + (y2² - 4y1y3φ)`.
pub fn family_quadratic(s: &ConstantStencil, phi: f64) -> Quadratic {
    Quadratic {
        quadratic: s.c2 * s.c2 - 4.0 * s.c1 * s.c3 * phi,
        negated_linear: 2.0 * s.c2 * s.y2 - 4.0 * s.c1 * s.y3 * phi - 4.0 * s.c3 * s.y1 * phi,
        constant: s.y2 * s.y2 - 4.0 * s.y1 * s.y3 * phi,
    }
}

/// `φ = cos²(kπ/N)`, exactly zero at `k = N/2`.
pub fn phi(k: usize, n: usize) -> f64 {
    if 2 * k == n {
        0.0
    } else {
        (k as f64 * std::f64::consts::PI / n as f64).cos().powi(2)
    }
}

/// The two eigenvalue candidates for index `k`; a double root when `φ = 0`.
pub fn eigen_family(cp: &ConstantProblem, k: usize) -> Result<[Complex64; 2]> {
    if !(1..cp.n).contains(&k) {
        return Err(Error::ConstantCase(format!(
            "k must lie in 1..{}, got {k}",
            cp.n - 1
        )));
    }
    let phi = phi(k, cp.n);
    if phi == 0.0 {
        let lambda = Complex64::new(phi_zero_eigenvalue(cp), 0.0);
        return Ok([lambda, lambda]);
    }
    Ok(family_quadratic(&constant_stencil(cp), phi).roots())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCheck {
    /// `None` for the `φ`-free quadratic of the repeated-root case.
    pub k: Option<usize>,
    pub phi: f64,
    pub quadratic: Quadratic,
    pub roots: [Complex64; 2],
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantCertificate {
    pub problem: ConstantProblem,
    pub stencil: ConstantStencil,
    pub families: Vec<FamilyCheck>,
    pub repeated_root_case: FamilyCheck,
    /// `λ` solving `A = 0` or `C = 0`; reported, never counted as eigenvalues.
    pub excluded: Vec<f64>,
    pub backward_euler: StabilityReport,
    pub crank_nicolson: StabilityReport,
    pub certified: bool,
    pub failed_k: Option<usize>,
    /// Largest relative distance from a recurrence root to the nearest
    /// family root, when the cross-check ran.
    pub charpoly_mismatch: Option<f64>,
}

/// Order limit for the recurrence cross-check inside the certificate.
pub const CROSS_CHECK_MAX_N: usize = 200;

pub fn stability_certificate(cp: &ConstantProblem) -> Result<ConstantCertificate> {
    if !(cp.delta_z < 2.0) {
        return Err(Error::ConstantCase(format!(
            "the certificate needs δz < 2, got {}",
            cp.delta_z
        )));
    }
    let stencil = constant_stencil(cp);
    let mut families = Vec::with_capacity(cp.n - 1);
    let mut eigenvalues = Vec::with_capacity(cp.n - 1);
    for k in 1..cp.n {
        let phi = phi(k, cp.n);
        let quadratic = family_quadratic(&stencil, phi);
        let roots = eigen_family(cp, k)?;
        let positive = quadratic.is_positive() && roots.iter().all(|z| z.re > 0.0);
        // k and N - k share φ; each index contributes one eigenvalue.
        eigenvalues.push(if 2 * k <= cp.n { roots[0] } else { roots[1] });
        families.push(FamilyCheck {
            k: Some(k),
            phi,
            quadratic,
            roots,
            positive,
        });
    }
    let case_two = family_quadratic(&stencil, 1.0);
    let repeated_root_case = FamilyCheck {
        k: None,
        phi: 1.0,
        quadratic: case_two,
        roots: case_two.roots(),
        positive: case_two.is_positive(),
    };
    let failed_k = families.iter().find(|f| !f.positive).and_then(|f| f.k);
    let backward_euler = stability_verdict(&eigenvalues, Theta::BackwardEuler);
    let crank_nicolson = stability_verdict(&eigenvalues, Theta::CrankNicolson);
    let charpoly_mismatch = if cp.n <= CROSS_CHECK_MAX_N {
        let set = charpoly_roots(&stencil.affine_triple(cp.n))?;
        let candidates: Vec<Complex64> = families.iter().flat_map(|f| f.roots).collect();
        Some(
            set.roots
                .iter()
                .map(|root| {
                    candidates
                        .iter()
                        .map(|z| (root - z).norm() / root.norm())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    let certified = failed_k.is_none()
        && repeated_root_case.positive
        && backward_euler.verdict == crate::charpoly::Verdict::Stable
        && crank_nicolson.verdict == crate::charpoly::Verdict::Stable;
    Ok(ConstantCertificate {
        problem: *cp,
        stencil,
        families,
        repeated_root_case,
        excluded: vec![stencil.y3 / stencil.c3, stencil.y1 / stencil.c1],
        backward_euler,
        crank_nicolson,
        certified,
        failed_k,
        charpoly_mismatch,
    })
}
