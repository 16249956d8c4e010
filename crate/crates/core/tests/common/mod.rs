//! Published reference values for the demonstration problem
//! `a = z + 1`, `b = (z + 1)²` on `[0, 1]`.
#![allow(dead_code)]

use cstab_core::expr::Expr;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Roots of `D¹_N` at `δv = 0.1`, descending.
pub const ROOTS: [(usize, &[f64]); 7] = [
    (2, &[2.0600]),
    (3, &[7.9419, 2.1218]),
    (4, &[17.7303, 8.0194, 2.1423]),
    (5, &[31.4791, 17.5329, 8.1618, 2.1491]),
    (6, &[49.3158, 30.5320, 17.8975, 8.2353, 2.1517]),
    (7, &[71.3459, 47.0817, 31.0721, 18.1722, 8.2712, 2.1528]),
    (
        8,
        &[97.6417, 67.3382, 47.5424, 31.6907, 18.3334, 8.2896, 2.1534],
    ),
];

/// Symbolic forms of `D¹_N` as printed.
pub const EXPRESSIONS: [(usize, &str); 3] = [
    (2, "-B_1"),
    (3, "B_1B_2 - A_1C_2"),
    (4, "A_2B_1C_3+A_1B_3C_2-B_1B_2B_3"),
];

/// `(N, M, Gershgorin bound on ‖X⁻¹‖₂, exact ‖X⁻¹‖₂)`.
pub const XINV: [(usize, usize, f64, f64); 6] = [
    (25, 800, 1935.87e-6, 1870.88e-6),
    (50, 3200, 4840.86e-7, 4684.92e-7),
    (100, 12800, 1210.29e-7, 1171.71e-7),
    (200, 51200, 3025.75e-8, 2929.59e-8),
    (400, 204800, 7564.41e-9, 7324.16e-9),
    (800, 819200, 1891.10e-9, 1831.05e-9),
];

/// `(N, ‖Y‖_∞, ‖Y‖₁, sqrt bound, exact ‖Y‖₂)`.
pub const YNORM: [(usize, f64, f64, f64, f64); 6] = [
    (25, 9214.83, 9217.33, 9215.83, 8373.84),
    (50, 38414.33, 38417.33, 38415.83, 35813.62),
    (100, 156814.33, 156817.33, 156815.83, 149308.18),
    (200, 633614.33, 633617.33, 633615.83, 612829.53),
    (400, 2547214.33, 2547217.33, 2547215.83, 2491169.46),
    (800, 10214414.33, 10214417.33, 10214415.83, 10065975.94),
];

/// `(N, M, κ bound, exact κ(I + W))`.
pub const KAPPA: [(usize, usize, f64, f64); 6] = [
    (25, 800, 18.84, 15.93),
    (50, 3200, 19.60, 17.42),
    (100, 12800, 19.98, 18.30),
    (200, 51200, 20.17, 18.84),
    (400, 204800, 20.27, 19.17),
    (800, 819200, 20.32, 19.39),
];

pub fn relative(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

/// Parses `"B_1B_2 - A_1C_2"` style sums into sorted `(negative, monomial)`
/// terms with factors in canonical order, so that term order and the
/// placement of underscores do not matter.
pub fn signed_terms(expression: &str) -> Vec<(bool, String)> {
    let cleaned: String = expression
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .collect();
    let mut terms = Vec::new();
    let mut negative = false;
    let mut current = String::new();
    let flush = |negative: bool, current: &mut String, terms: &mut Vec<(bool, String)>| {
        if !current.is_empty() {
            let mut factors: Vec<(char, usize)> = Vec::new();
            let chars: Vec<char> = current.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let letter = chars[i];
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let index: usize = chars[i + 1..j].iter().collect::<String>().parse().unwrap();
                factors.push((letter, index));
                i = j;
            }
            factors.sort();
            let monomial = factors.iter().map(|(l, k)| format!("{l}{k}")).collect();
            terms.push((negative, monomial));
            current.clear();
        }
    };
    for ch in cleaned.chars() {
        match ch {
            '+' | '-' => {
                flush(negative, &mut current, &mut terms);
                negative = ch == '-';
            }
            _ => current.push(ch),
        }
    }
    flush(negative, &mut current, &mut terms);
    terms.sort();
    terms
}

/// A random smooth pair `(a, b)` with `b` bounded away from zero, and a time
/// step to go with it.
pub fn random_smooth_pair(rng: &mut ChaCha8Rng) -> (Expr, Expr, f64) {
    let a = format!(
        "{} + {}*z + {}*sin({}*z)",
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(1.0..4.0)
    );
    let b0: f64 = rng.gen_range(0.5..2.0);
    let b = format!(
        "{} + {}*z^2 + {}*cos({}*z)",
        b0,
        rng.gen_range(0.0..1.0),
        rng.gen_range(-0.4 * b0..0.4 * b0),
        rng.gen_range(1.0..4.0)
    );
    (
        Expr::parse(&a).unwrap(),
        Expr::parse(&b).unwrap(),
        rng.gen_range(0.01..0.5),
    )
}
