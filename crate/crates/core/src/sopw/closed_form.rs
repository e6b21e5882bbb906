use std::f64::consts::{PI, SQRT_2};

use super::SopwBasis1D;

const SINGULAR_EPS: f64 = 1e-8;

/// `sin(π·a·u/L)/sin(π·u/L)`, replaced by its limit `a` near `u ≡ 0`.
fn ratio(a: f64, u: f64, l: f64) -> f64 {
    let den = (PI * u / l).sin();
    if den.abs() < SINGULAR_EPS {
        a
    } else {
        (PI * a * u / l).sin() / den
    }
}

/// Pointwise value of the real function `θ^k_j(x)` from its closed form.
///
/// The argument is reduced to `u = x − j` in `[−L/2, L/2)`, which keeps the
/// ratio term's limit at `u = 0` the only removable singularity.
///
/// # Panics
/// If `k == 0`.
pub fn eval_closed_form(basis: &SopwBasis1D, k: usize, j: usize, x: f64) -> f64 {
    assert!(k >= 1, "depth index starts at 1");
    let l = basis.period();
    let half = l / 2.0;
    let u = (x - j as f64 + half).rem_euclid(l) - half;
    if k == 1 {
        return ratio(l - 1.0, u, l) / l + SQRT_2 / l * (PI * u).cos();
    }
    let bracket = ratio(half - 1.0, u, l) + SQRT_2 * (PI * u / 2.0).cos();
    let phase = PI * (k as f64 - 0.5) * u;
    if k.is_multiple_of(2) {
        let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        2.0 / l * sign * phase.sin() * bracket
    } else {
        let sign = if ((k - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        2.0 / l * sign * phase.cos() * bracket
    }
}
