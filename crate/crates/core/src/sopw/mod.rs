//! Shift orthogonal plane waves (SOPWs) on a periodic 1D domain `[0, L)`
//! with unit shift and even `L`.
//!
//! With `φ_n(x) = e^{i2πnx/L}/√L`, the depth-`k` generator `θ^k_0` occupies
//! the frequency shell `(k−1)L/2 ≤ |n| ≤ kL/2`:
//!
//! * interior modes carry `(sgn(n)·i)^{k−1}/√L`,
//! * the two edge modes `|n| = (k−1)L/2, kL/2` carry the same phase with
//!   weight `1/√(2L)` (depth 1 has no lower edge; `n = 0` is interior),
//!
//! and `θ^k_j(x) = θ^k_0(x − j)`, i.e. the coefficient of `φ_n` picks up
//! `ω_j^{−n} = e^{−i2πjn/L}`. Every edge frequency is shared by two adjacent
//! depths, so a basis truncated at depth `N` spans all `|n| < NL/2` but only
//! half of the cap edge `|n| = NL/2`.

mod certificate;
mod closed_form;
mod derivative;
mod grid;

pub use certificate::{verify_variational_certificate, CertificateReport};
pub use closed_form::eval_closed_form;
pub use derivative::{
    first_derivative_stencil, lemma_sums, second_derivative_stencil, DerivativeStencil,
};
pub use grid::{analyze_grid, synthesize_grid, SopwGrid};

use std::f64::consts::PI;

use crate::btransform::BTransform;
use crate::{CoeffTensor, Error, LatticeDomain, Result, C64};

/// SOPW basis truncated at depth `N`, with `L` unit shifts per period.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SopwBasis1D {
    shifts: usize,
    depth: usize,
}

impl SopwBasis1D {
    pub fn new(shifts: usize, depth: usize) -> Result<Self> {
        if shifts < 2 || !shifts.is_multiple_of(2) {
            return Err(Error::OddShiftCount(shifts));
        }
        if depth == 0 {
            return Err(Error::InvalidDomain("depth cap must be positive".into()));
        }
        Ok(Self { shifts, depth })
    }

    /// Number of shifts `L`, which is also the period in unit shifts.
    pub fn shifts(&self) -> usize {
        self.shifts
    }

    /// Depth cap `N`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn period(&self) -> f64 {
        self.shifts as f64
    }

    /// Largest Fourier index touched by the truncated basis, `NL/2`.
    pub fn max_freq(&self) -> usize {
        self.depth * self.shifts / 2
    }

    pub fn domain(&self) -> LatticeDomain {
        LatticeDomain::one_d(self.shifts, self.depth).expect("validated at construction")
    }

    /// Frequencies of the depth-`k` shell with their moduli.
    fn shell(&self, k: usize) -> Vec<(i64, f64)> {
        let half = (self.shifts / 2) as i64;
        let l = self.shifts as f64;
        let interior = 1.0 / l.sqrt();
        let edge = 1.0 / (2.0 * l).sqrt();
        let k = k as i64;
        let lo = (k - 1) * half;
        let hi = k * half;
        let mut out = Vec::new();
        for n in -hi..=hi {
            let a = n.abs();
            if a < lo {
                continue;
            }
            let w = if a == hi || (k > 1 && a == lo) {
                edge
            } else {
                interior
            };
            out.push((n, w));
        }
        out
    }

    /// Fourier coefficient of `θ^k_0` at frequency `n` of its shell.
    fn generator_coeff(k: usize, n: i64, weight: f64) -> C64 {
        // (sgn(n)·i)^{k−1}
        let power = k - 1;
        let sign = if n < 0 && power % 2 == 1 { -1.0 } else { 1.0 };
        let ipow = match power % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        ipow * (sign * weight)
    }

    /// `ω_j^{−n} = e^{−i2πjn/L}` with the phase reduced modulo `L` first.
    pub(crate) fn omega_pow(&self, j: usize, n: i64) -> C64 {
        let l = self.shifts as i64;
        let r = (j as i64 * n).rem_euclid(l);
        let angle = -2.0 * PI * r as f64 / l as f64;
        C64::new(angle.cos(), angle.sin())
    }

    /// Sparse Fourier coefficients `(n, a(n))` of `θ^k_j`, ordered by `n`.
    ///
    /// Any depth `k ≥ 1` is accepted, including depths beyond the cap (the
    /// derivative operators reach depth `N + 1`).
    pub fn fourier_coeffs(&self, k: usize, j: usize) -> Result<Vec<(i64, C64)>> {
        if k == 0 {
            return Err(Error::IndexOutOfRange("depth index starts at 1".into()));
        }
        if j >= self.shifts {
            return Err(Error::IndexOutOfRange(format!(
                "shift {j} outside 0..{}",
                self.shifts
            )));
        }
        Ok(self
            .shell(k)
            .into_iter()
            .map(|(n, w)| (n, Self::generator_coeff(k, n, w) * self.omega_pow(j, n)))
            .collect())
    }

    /// Projects a Fourier expansion onto the truncated basis.
    ///
    /// Returns the SOPW coefficients `⟨θ^k_j, f⟩` together with the norm of
    /// the part of `f` the truncated basis cannot represent (at most the
    /// depth-`N+1` half of the cap edge `|n| = NL/2`).
    pub fn fourier_to_sopw(&self, f: &FourierRep) -> Result<(CoeffTensor, f64)> {
        self.check_rep(f)?;
        let bt = BTransform::new(&self.domain());
        let t = self.fourier_to_sopw_with(f, &bt);
        let back = self.sopw_to_fourier_with(&t, &bt);
        let residual = f
            .coeffs
            .iter()
            .zip(&back.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Ok((t, residual))
    }

    /// Fourier coefficients of `Σ t(k, j)·θ^k_j`.
    pub fn sopw_to_fourier(&self, t: &CoeffTensor) -> Result<FourierRep> {
        self.check_tensor(t)?;
        Ok(self.sopw_to_fourier_with(t, &BTransform::new(&self.domain())))
    }

    pub(crate) fn check_rep(&self, f: &FourierRep) -> Result<()> {
        if f.shifts != self.shifts || f.depth != self.depth {
            return Err(Error::DomainMismatch(format!(
                "Fourier data for L={}, N={} used with basis L={}, N={}",
                f.shifts, f.depth, self.shifts, self.depth
            )));
        }
        Ok(())
    }

    pub(crate) fn check_tensor(&self, t: &CoeffTensor) -> Result<()> {
        crate::lattice::ensure_same_domain(t.domain(), &self.domain())
    }

    // t(k, j) = Σ_n conj(c_k(n))·e^{+i2πjn/L}·a(n): bin each shell by n mod L,
    // then one unnormalised inverse DFT per depth (a B-transform).
    pub(crate) fn fourier_to_sopw_with(&self, f: &FourierRep, bt: &BTransform) -> CoeffTensor {
        let l = self.shifts;
        let cap = self.max_freq() as i64;
        let mut binned = vec![C64::new(0.0, 0.0); self.depth * l];
        for k in 1..=self.depth {
            let row = &mut binned[(k - 1) * l..k * l];
            for (n, w) in self.shell(k) {
                if n.abs() > cap {
                    continue;
                }
                let c = Self::generator_coeff(k, n, w);
                row[n.rem_euclid(l as i64) as usize] += c.conj() * f.get(n);
            }
        }
        let mut t = CoeffTensor::from_parts(self.domain(), binned);
        bt.forward_in_place(t.data_mut());
        t
    }

    // a(n) = Σ_k c_k(n)·Σ_j t(k, j)·e^{−i2πjn/L}: one forward DFT per depth.
    pub(crate) fn sopw_to_fourier_with(&self, t: &CoeffTensor, bt: &BTransform) -> FourierRep {
        let l = self.shifts;
        let mut spectra = t.data().to_vec();
        bt.inverse_in_place(&mut spectra);
        let scale = l as f64;
        let mut out = FourierRep::zeros(self);
        let cap = self.max_freq() as i64;
        for k in 1..=self.depth {
            let row = &spectra[(k - 1) * l..k * l];
            for (n, w) in self.shell(k) {
                if n.abs() > cap {
                    continue;
                }
                let c = Self::generator_coeff(k, n, w);
                *out.get_mut(n) += c * row[n.rem_euclid(l as i64) as usize] * scale;
            }
        }
        out
    }
}

/// Truncated Fourier expansion `Σ_{|n| ≤ NL/2} a(n)·φ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierRep {
    shifts: usize,
    depth: usize,
    coeffs: Vec<C64>,
}

impl FourierRep {
    pub fn zeros(basis: &SopwBasis1D) -> Self {
        Self {
            shifts: basis.shifts,
            depth: basis.depth,
            coeffs: vec![C64::new(0.0, 0.0); 2 * basis.max_freq() + 1],
        }
    }

    /// `coeffs[i]` is the coefficient of `φ_{i − NL/2}`.
    pub fn new(basis: &SopwBasis1D, coeffs: Vec<C64>) -> Result<Self> {
        let expected = 2 * basis.max_freq() + 1;
        if coeffs.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: coeffs.len(),
            });
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Precondition("non-finite Fourier coefficient".into()));
        }
        Ok(Self {
            shifts: basis.shifts,
            depth: basis.depth,
            coeffs,
        })
    }

    /// Fourier data of a sparse list of `(n, a(n))`; frequencies beyond
    /// `NL/2` are rejected.
    pub fn from_sparse(basis: &SopwBasis1D, entries: &[(i64, C64)]) -> Result<Self> {
        let mut out = Self::zeros(basis);
        for &(n, a) in entries {
            if n.unsigned_abs() as usize > basis.max_freq() {
                return Err(Error::IndexOutOfRange(format!(
                    "frequency {n} beyond the basis band {}",
                    basis.max_freq()
                )));
            }
            *out.get_mut(n) += a;
        }
        Ok(out)
    }

    pub fn max_freq(&self) -> usize {
        self.depth * self.shifts / 2
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of `φ_n`; zero outside the band.
    pub fn get(&self, n: i64) -> C64 {
        let cap = self.max_freq() as i64;
        if n.abs() > cap {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + cap) as usize]
        }
    }

    fn get_mut(&mut self, n: i64) -> &mut C64 {
        let cap = self.max_freq() as i64;
        &mut self.coeffs[(n + cap) as usize]
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> {
        let cap = self.max_freq() as i64;
        -cap..=cap
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral derivative of order `order`: multiplies `a(n)` by
    /// `(i2πn/L)^order`.
    pub fn derivative(&self, order: u32) -> FourierRep {
        let l = self.shifts as f64;
        let mut out = self.clone();
        for (n, z) in self.frequencies().zip(out.coeffs.iter_mut()) {
            *z *= C64::new(0.0, 2.0 * PI * n as f64 / l).powu(order);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &FourierRep) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
