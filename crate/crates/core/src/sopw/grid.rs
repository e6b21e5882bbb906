use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{FourierRep, SopwBasis1D};
use crate::btransform::BTransform;
use crate::{CoeffTensor, Error, Result, C64};

/// Uniform periodic grid `x_m = m·L/G` paired with a SOPW basis.
///
/// Samples relate to Fourier data by `g_m = Σ_n a(n)·e^{i2πnm/G}/√L`, so
/// the analysis is `a(n) = (√L/G)·Σ_m g_m·e^{−i2πnm/G}`.
#[derive(Clone)]
pub struct SopwGrid {
    basis: SopwBasis1D,
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    bt: BTransform,
}

impl std::fmt::Debug for SopwGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SopwGrid")
            .field("basis", &self.basis)
            .field("size", &self.size)
            .finish()
    }
}

impl SopwGrid {
    /// Fails with [`Error::Aliasing`] unless `size ≥ NL + 1`.
    pub fn new(basis: &SopwBasis1D, size: usize) -> Result<Self> {
        let required = 2 * basis.max_freq() + 1;
        if size < required {
            return Err(Error::Aliasing {
                grid: size,
                max_freq: basis.max_freq(),
                required,
            });
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            basis: basis.clone(),
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
            bt: BTransform::new(&basis.domain()),
        })
    }

    /// Grid of `2NL` points.
    pub fn with_default_size(basis: &SopwBasis1D) -> Self {
        Self::new(basis, 2 * basis.depth() * basis.shifts()).expect("2NL exceeds NL + 1")
    }

    pub fn basis(&self) -> &SopwBasis1D {
        &self.basis
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Grid spacing `L/G`.
    pub fn spacing(&self) -> f64 {
        self.basis.period() / self.size as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.size).map(|m| m as f64 * h).collect()
    }

    fn bin(&self, n: i64) -> usize {
        n.rem_euclid(self.size as i64) as usize
    }

    pub fn synthesize_fourier(&self, f: &FourierRep) -> Result<Vec<C64>> {
        self.basis.check_rep(f)?;
        let mut buf = vec![C64::new(0.0, 0.0); self.size];
        for (n, a) in f.frequencies().zip(f.coeffs()) {
            buf[self.bin(n)] = *a;
        }
        self.inv.process(&mut buf);
        let s = 1.0 / self.basis.period().sqrt();
        buf.iter_mut().for_each(|z| *z *= s);
        Ok(buf)
    }

    /// Band-limited Fourier data of `samples` together with the norm of the
    /// energy found outside `|n| ≤ NL/2`.
    pub fn analyze_fourier(&self, samples: &[C64]) -> Result<(FourierRep, f64)> {
        if samples.len() != self.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                actual: samples.len(),
            });
        }
        let mut buf = samples.to_vec();
        self.fwd.process(&mut buf);
        let s = self.basis.period().sqrt() / self.size as f64;
        buf.iter_mut().for_each(|z| *z *= s);
        let mut out = FourierRep::zeros(&self.basis);
        let cap = self.basis.max_freq() as i64;
        let mut in_band = vec![false; self.size];
        for n in -cap..=cap {
            let b = self.bin(n);
            *out.get_mut(n) = buf[b];
            in_band[b] = true;
        }
        let outside: f64 = buf
            .iter()
            .zip(&in_band)
            .filter(|(_, &inside)| !inside)
            .map(|(z, _)| z.norm_sqr())
            .sum();
        Ok((out, outside.sqrt()))
    }

    /// Samples of `Σ t(k, j)·θ^k_j` on the grid.
    pub fn synthesize(&self, t: &CoeffTensor) -> Result<Vec<C64>> {
        self.basis.check_tensor(t)?;
        let f = self.basis.sopw_to_fourier_with(t, &self.bt);
        self.synthesize_fourier(&f)
    }

    /// Real parts of [`SopwGrid::synthesize`].
    pub fn synthesize_real(&self, t: &CoeffTensor) -> Result<Vec<f64>> {
        Ok(self.synthesize(t)?.into_iter().map(|z| z.re).collect())
    }

    /// SOPW coefficients of `samples` and the residual norm
    /// `√(out-of-band² + in-band projection residual²)`.
    pub fn analyze(&self, samples: &[C64]) -> Result<(CoeffTensor, f64)> {
        let (f, outside) = self.analyze_fourier(samples)?;
        let t = self.basis.fourier_to_sopw_with(&f, &self.bt);
        let back = self.basis.sopw_to_fourier_with(&t, &self.bt);
        let inside: f64 = f
            .coeffs()
            .iter()
            .zip(back.coeffs())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((t, (outside * outside + inside).sqrt()))
    }

    pub fn analyze_real(&self, samples: &[f64]) -> Result<(CoeffTensor, f64)> {
        let z: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.analyze(&z)
    }
}

/// Samples of `Σ t(k, j)·θ^k_j` at `x_m = m·L/G`, `m < G`.
pub fn synthesize_grid(t: &CoeffTensor, grid: usize, basis: &SopwBasis1D) -> Result<Vec<C64>> {
    SopwGrid::new(basis, grid)?.synthesize(t)
}

/// SOPW coefficients of grid samples, with the residual norm.
pub fn analyze_grid(samples: &[C64], basis: &SopwBasis1D) -> Result<(CoeffTensor, f64)> {
    SopwGrid::new(basis, samples.len())?.analyze(samples)
}
