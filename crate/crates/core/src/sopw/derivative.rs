use std::f64::consts::PI;

use super::SopwBasis1D;
use crate::{CoeffTensor, Error, LatticeDomain, Result, C64};

/// Expansion of a derivative of `θ^k_ℓ` over depths `k − 1`, `k`, `k + 1`:
/// `Σ_j prev[j]·θ^{k−1}_j + same[j]·θ^k_j + next[j]·θ^{k+1}_j`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DerivativeStencil {
    pub k: usize,
    pub ell: usize,
    pub prev: Vec<f64>,
    pub same: Vec<f64>,
    pub next: Vec<f64>,
}

impl DerivativeStencil {
    /// Coefficient tensor on the basis domain. Errors if a nonzero entry
    /// falls on a depth outside `1..=N`.
    pub fn to_tensor(&self, basis: &SopwBasis1D) -> Result<CoeffTensor> {
        let l = basis.shifts();
        if self.same.len() != l {
            return Err(Error::SizeMismatch {
                expected: l,
                actual: self.same.len(),
            });
        }
        let domain: LatticeDomain = basis.domain();
        let mut data = vec![C64::new(0.0, 0.0); domain.len()];
        let rows = [
            (self.k.checked_sub(1), &self.prev),
            (Some(self.k), &self.same),
            (Some(self.k + 1), &self.next),
        ];
        for (depth, row) in rows {
            let nonzero = row.iter().any(|&c| c != 0.0);
            match depth {
                Some(d) if d >= 1 && d <= basis.depth() => {
                    for (j, &c) in row.iter().enumerate() {
                        data[(d - 1) * l + j] = C64::new(c, 0.0);
                    }
                }
                _ if !nonzero => {}
                _ => {
                    return Err(Error::IndexOutOfRange(format!(
                        "stencil reaches depth {} beyond the basis cap {}",
                        depth.unwrap_or(0),
                        basis.depth()
                    )))
                }
            }
        }
        CoeffTensor::new(domain, data)
    }
}

fn parity_sign(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn offsets(basis: &SopwBasis1D, ell: usize) -> impl Iterator<Item = usize> + '_ {
    let l = basis.shifts();
    (0..l).map(move |j| (j + l - ell % l) % l)
}

/// Stencil of `∂x θ^k_ℓ`.
///
/// # Panics
/// If `k == 0`.
pub fn first_derivative_stencil(k: usize, ell: usize, basis: &SopwBasis1D) -> DerivativeStencil {
    assert!(k >= 1, "depth index starts at 1");
    let l = basis.period();
    let pre = PI / l;
    let mut prev = Vec::new();
    let mut same = Vec::new();
    let mut next = Vec::new();
    for d in offsets(basis, ell) {
        prev.push(-pre * (k - 1) as f64 * parity_sign((k - 1) * d));
        next.push(pre * k as f64 * parity_sign(k * d));
        let a = if d == 0 {
            0.0
        } else {
            let cot = 1.0 / (PI * d as f64 / l).tan();
            if d % 2 == 1 {
                parity_sign(k) * (2 * k - 1) as f64 * cot
            } else {
                cot
            }
        };
        same.push(pre * a);
    }
    DerivativeStencil {
        k,
        ell,
        prev,
        same,
        next,
    }
}

/// Stencil of `∂xx θ^k_ℓ`, which stays within depth `k`.
///
/// # Panics
/// If `k == 0`.
pub fn second_derivative_stencil(k: usize, ell: usize, basis: &SopwBasis1D) -> DerivativeStencil {
    assert!(k >= 1, "depth index starts at 1");
    let l = basis.period();
    let kf = k as f64;
    let pre = -PI * PI / (l * l);
    let same = offsets(basis, ell)
        .map(|d| {
            let b = if d == 0 {
                (kf * kf - kf + 1.0 / 3.0) * l * l + 2.0 / 3.0
            } else {
                let csc2 = 1.0 / (PI * d as f64 / l).sin().powi(2);
                if d % 2 == 1 {
                    parity_sign(k) * (4.0 * kf - 2.0) * csc2
                } else {
                    2.0 * csc2
                }
            };
            pre * b
        })
        .collect();
    let zeros = vec![0.0; basis.shifts()];
    DerivativeStencil {
        k,
        ell,
        prev: zeros.clone(),
        same,
        next: zeros,
    }
}

/// Closed forms of `Σ n·ω_j^n` and `Σ n²·ω_j^n` over the open shell
/// `(k−1)L/2 < |n| < kL/2`, with `ω_j = e^{i2πj/L}`.
///
/// # Panics
/// If `k == 0` or `j ≥ L`.
pub fn lemma_sums(k: usize, j: usize, basis: &SopwBasis1D) -> (C64, C64) {
    assert!(k >= 1, "depth index starts at 1");
    assert!(j < basis.shifts(), "shift index out of range");
    let l = basis.period();
    let kf = k as f64;
    if j == 0 {
        let s2 = (l - 2.0) * l * ((3.0 * kf * kf - 3.0 * kf + 1.0) * l - 1.0) / 12.0;
        return (C64::new(0.0, 0.0), C64::new(s2, 0.0));
    }
    let x = PI * j as f64 / l;
    let cot = 1.0 / x.tan();
    let csc2 = 1.0 / x.sin().powi(2);
    if j % 2 == 1 {
        let f = parity_sign(k) * (2.0 * kf - 1.0);
        (
            C64::new(0.0, -0.5 * l * f * cot),
            C64::new(0.5 * l * f * csc2 - f * l * l / 4.0, 0.0),
        )
    } else {
        let shells = kf * kf + (kf - 1.0) * (kf - 1.0);
        (
            C64::new(0.0, -0.5 * l * cot),
            C64::new(0.5 * l * csc2 - shells * l * l / 4.0, 0.0),
        )
    }
}
