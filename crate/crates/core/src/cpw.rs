//! Compressed plane waves in 1D by split Bregman iteration.
//!
//! Each mode minimises `(1/μ)∫|ψ| + ∫ψ·Ĥ0·ψ` with `Ĥ0 = −½Δ` over
//! shift-orthogonal functions that are shift-perpendicular to the earlier
//! modes. One sweep of the loop is
//!
//! ```text
//! ψ ← (Ĥ0 + λ + r)⁻¹ [λ(u − D) + r(v − B)]
//! v ← synth(P(analyse(ψ + B)))        P = project_sso or project_sso_orth
//! u ← shrink(ψ + D, 1/(λμ))
//! D ← D + ψ − u,  B ← B + ψ − v
//! ```
//!
//! and the returned mode is the last `v`, which is feasible by construction.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::projection::{ModeSpectrum, ProjectionConfig, Projector};
use crate::sopw::{SopwBasis1D, SopwGrid};
use crate::{CoeffTensor, Error, Result, C64};

/// Membership and perpendicularity tolerance for accepted modes.
pub const MODE_TOL: f64 = 1e-8;
/// Out-of-band analysis energy above which a warning is recorded.
pub const OUT_OF_BAND_WARN: f64 = 1e-6;
/// Relative threshold of the support-fraction diagnostic.
pub const SUPPORT_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpwInit {
    /// Gaussian of width `L/(4·#shifts)` centred mid-domain.
    GaussianBump,
    /// White noise from a seeded generator.
    RandomSeeded(u64),
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CpwConfig {
    /// L1 weight; `f64::INFINITY` switches the L1 term off.
    pub mu: f64,
    /// Penalty on the `u` split.
    pub lambda: f64,
    /// Penalty on the `v` split.
    pub r: f64,
    /// Relative change `‖ψ^k − ψ^{k−1}‖/‖ψ^k‖` that stops the loop.
    pub tol: f64,
    pub max_iter: usize,
    pub grid_size: usize,
    pub init: CpwInit,
    #[serde(skip)]
    pub projection: ProjectionConfig,
}

impl CpwConfig {
    /// Default penalty scale relative to `(2π/L)²`.
    pub const PENALTY_FACTOR: f64 = 1000.0;

    /// Defaults for a basis: `μ = 0.3`, `λ = r = 1000·(2π/L)²`,
    /// `tol = 1e-6`, 20000 iterations, grid of 512 points (or `2NL` if
    /// larger).
    pub fn for_basis(basis: &SopwBasis1D) -> Self {
        let penalty = Self::PENALTY_FACTOR * (2.0 * PI / basis.period()).powi(2);
        Self {
            mu: 0.3,
            lambda: penalty,
            r: penalty,
            tol: 1e-6,
            max_iter: 20_000,
            grid_size: 512.max(2 * basis.depth() * basis.shifts()),
            init: CpwInit::GaussianBump,
            projection: ProjectionConfig::default(),
        }
    }

    pub fn validate(&self, basis: &SopwBasis1D) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::Config(format!("mu must be positive, got {}", self.mu)));
        }
        for (name, v) in [("lambda", self.lambda), ("r", self.r), ("tol", self.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        let required = 2 * basis.max_freq() + 1;
        if self.grid_size < required {
            return Err(Error::Aliasing {
                grid: self.grid_size,
                max_freq: basis.max_freq(),
                required,
            });
        }
        self.projection.validate()
    }

    /// Soft-threshold level `1/(λμ)`.
    pub fn threshold(&self) -> f64 {
        1.0 / (self.lambda * self.mu)
    }
}

/// Spectral operators on a uniform periodic grid of `[0, period)`.
#[derive(Clone)]
pub struct SpectralGrid {
    period: f64,
    size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `½(2πn/period)²` per FFT bin.
    kinetic: Vec<f64>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("period", &self.period)
            .field("size", &self.size)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(period: f64, size: usize) -> Result<Self> {
        if size == 0 || !(period > 0.0) {
            return Err(Error::Config("grid needs positive size and period".into()));
        }
        let mut planner = FftPlanner::new();
        let kinetic = (0..size)
            .map(|b| {
                let n = Self::frequency(b, size) as f64;
                0.5 * (2.0 * PI * n / period).powi(2)
            })
            .collect();
        Ok(Self {
            period,
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
            kinetic,
        })
    }

    fn frequency(bin: usize, size: usize) -> i64 {
        if bin <= size / 2 {
            bin as i64
        } else {
            bin as i64 - size as i64
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn check(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                actual: field.len(),
            });
        }
        Ok(())
    }

    fn spectrum(&self, field: &[f64]) -> Vec<C64> {
        let mut buf: Vec<C64> = field.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Solves `(Ĥ0 + shift)ψ = rhs` spectrally.
    pub fn solve_shifted(&self, rhs: &[f64], shift: f64) -> Result<Vec<f64>> {
        self.check(rhs)?;
        if !(shift > 0.0) {
            return Err(Error::SingularOperator(format!(
                "Helmholtz shift must be positive, got {shift}"
            )));
        }
        let mut buf = self.spectrum(rhs);
        let scale = 1.0 / self.size as f64;
        for (z, k) in buf.iter_mut().zip(&self.kinetic) {
            *z *= scale / (k + shift);
        }
        self.inv.process(&mut buf);
        Ok(buf.into_iter().map(|z| z.re).collect())
    }

    /// Applies `Ĥ0 + shift` spectrally.
    pub fn apply_shifted(&self, psi: &[f64], shift: f64) -> Result<Vec<f64>> {
        self.check(psi)?;
        let mut buf = self.spectrum(psi);
        let scale = 1.0 / self.size as f64;
        for (z, k) in buf.iter_mut().zip(&self.kinetic) {
            *z *= scale * (k + shift);
        }
        self.inv.process(&mut buf);
        Ok(buf.into_iter().map(|z| z.re).collect())
    }

    /// `∫ψ·Ĥ0·ψ = Σ_n ½(2πn/L)²|a(n)|²` with `a(n) = (√L/G)·DFT(ψ)(n)`.
    pub fn kinetic_energy(&self, psi: &[f64]) -> Result<f64> {
        self.check(psi)?;
        let buf = self.spectrum(psi);
        let norm = self.period / (self.size as f64).powi(2);
        Ok(buf
            .iter()
            .zip(&self.kinetic)
            .map(|(z, k)| k * z.norm_sqr())
            .sum::<f64>()
            * norm)
    }

    /// Trapezoidal `∫|ψ|` on the periodic grid.
    pub fn l1(&self, psi: &[f64]) -> f64 {
        psi.iter().map(|x| x.abs()).sum::<f64>() * self.period / self.size as f64
    }

    /// `(1/μ)∫|ψ| + ∫ψ·Ĥ0·ψ`; the L1 term is dropped for `μ = ∞`.
    pub fn energy(&self, psi: &[f64], mu: f64) -> Result<f64> {
        let kin = self.kinetic_energy(psi)?;
        if mu.is_infinite() {
            Ok(kin)
        } else {
            Ok(self.l1(psi) / mu + kin)
        }
    }
}

/// Solves `(Ĥ0 + λ + r)ψ = rhs` on `[0, period)`.
pub fn helmholtz_solve(rhs: &[f64], lambda: f64, r: f64, period: f64) -> Result<Vec<f64>> {
    if !(lambda + r > 0.0) {
        return Err(Error::SingularOperator(format!(
            "lambda + r must be positive, got {}",
            lambda + r
        )));
    }
    SpectralGrid::new(period, rhs.len())?.solve_shifted(rhs, lambda + r)
}

/// Pointwise soft-thresholding `sgn(w)·max(0, |w| − threshold)`.
pub fn shrink(w: &[f64], threshold: f64) -> Result<Vec<f64>> {
    if !(threshold >= 0.0) {
        return Err(Error::Config(format!(
            "shrink threshold must be non-negative, got {threshold}"
        )));
    }
    Ok(w.iter().map(|&x| shrink_scalar(x, threshold)).collect())
}

fn shrink_scalar(x: f64, t: f64) -> f64 {
    x.signum() * (x.abs() - t).max(0.0)
}

/// `(1/μ)∫|ψ| + ∫ψ·Ĥ0·ψ` for samples on `[0, period)`.
pub fn cpw_energy(psi: &[f64], mu: f64, period: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Config(format!("mu must be positive, got {mu}")));
    }
    SpectralGrid::new(period, psi.len())?.energy(psi, mu)
}

/// Fraction of grid points where `|ψ| > 1e-3·max|ψ|`.
pub fn support_fraction(psi: &[f64]) -> f64 {
    let peak = psi.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if psi.is_empty() || peak == 0.0 {
        return 0.0;
    }
    let cut = SUPPORT_THRESHOLD * peak;
    psi.iter().filter(|x| x.abs() > cut).count() as f64 / psi.len() as f64
}

/// One accepted mode: SOPW coefficients, their B-transform and samples.
#[derive(Debug, Clone)]
pub struct CpwMode {
    pub coeffs: CoeffTensor,
    pub spectrum: ModeSpectrum,
    pub samples: Vec<f64>,
}

/// Modes solved so far, all shift-orthogonal and mutually
/// shift-perpendicular.
#[derive(Debug, Clone)]
pub struct CpwModeSet {
    basis: SopwBasis1D,
    projector: Projector,
    modes: Vec<CpwMode>,
}

impl CpwModeSet {
    pub fn new(basis: &SopwBasis1D) -> Self {
        let projector = Projector::new(&basis.domain(), ProjectionConfig::default())
            .expect("default projection config is valid");
        Self {
            basis: basis.clone(),
            projector,
            modes: Vec::new(),
        }
    }

    pub fn basis(&self) -> &SopwBasis1D {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[CpwMode] {
        &self.modes
    }

    pub fn spectra(&self) -> Vec<ModeSpectrum> {
        self.modes.iter().map(|m| m.spectrum.clone()).collect()
    }

    /// Adds a mode after checking membership and perpendicularity against
    /// every stored mode at [`MODE_TOL`].
    pub fn insert(&mut self, coeffs: CoeffTensor, samples: Vec<f64>) -> Result<()> {
        let sso = self.projector.is_shift_orthogonal(&coeffs, MODE_TOL)?;
        if !sso.is_member {
            return Err(Error::Precondition(format!(
                "mode is not shift-orthogonal (violation {:e})",
                sso.max_constraint_violation
            )));
        }
        for (m, prev) in self.modes.iter().enumerate() {
            let perp = self
                .projector
                .check_shift_perpendicular(&prev.coeffs, &coeffs, MODE_TOL)?;
            if !perp.is_perpendicular {
                return Err(Error::Precondition(format!(
                    "mode is not shift-perpendicular to mode {} (violation {:e})",
                    m + 1,
                    perp.max_gram
                )));
            }
        }
        let spectrum = ModeSpectrum::with_transform(&coeffs, self.projector.transform());
        self.modes.push(CpwMode {
            coeffs,
            spectrum,
            samples,
        });
        Ok(())
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CpwDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_change: f64,
    /// Membership violation of the returned mode.
    pub constraint_violation: f64,
    /// Max shift Gram against each earlier mode.
    pub perpendicular_violations: Vec<f64>,
    pub energy: f64,
    /// Energy of `v` after every iteration.
    pub energy_history: Vec<f64>,
    /// Relative change of `ψ` after every iteration.
    pub change_history: Vec<f64>,
    /// Membership violation of the SOPW coefficients of `ψ`.
    pub violation_history: Vec<f64>,
    pub support_fraction: f64,
    pub seconds: f64,
    /// Largest out-of-band analysis residual seen during the v-updates.
    pub max_out_of_band: f64,
    /// Largest imaginary part produced by a SOPW round trip.
    pub max_imag: f64,
    pub warnings: Vec<String>,
}

/// Solves the next mode on top of `prev`.
///
/// Non-convergence is not an error: the last iterate is returned with
/// `converged == false`.
pub fn solve_cpw_mode(prev: &CpwModeSet, cfg: &CpwConfig) -> Result<(CpwMode, CpwDiagnostics)> {
    let basis = prev.basis();
    cfg.validate(basis)?;
    let domain = basis.domain();
    if prev.len() >= domain.depth_count() {
        return Err(Error::Infeasible(format!(
            "{} earlier modes leave no room in a depth space of dimension {}",
            prev.len(),
            domain.depth_count()
        )));
    }
    let start = Instant::now();
    let grid = SopwGrid::new(basis, cfg.grid_size)?;
    let spectral = SpectralGrid::new(basis.period(), cfg.grid_size)?;
    let projector = Projector::new(&domain, cfg.projection.clone())?;
    let spectra = prev.spectra();
    let mut max_imag: f64 = 0.0;
    let mut max_out_of_band: f64 = 0.0;

    let mut project = |field: &[f64], track: bool| -> Result<(CoeffTensor, Vec<f64>)> {
        let (t, residual) = grid.analyze_real(field)?;
        if track {
            max_out_of_band = max_out_of_band.max(residual);
        }
        let p = projector.project_sso_orth(&t, &spectra)?;
        let samples = grid.synthesize(&p)?;
        max_imag = samples.iter().fold(max_imag, |m, z| m.max(z.im.abs()));
        Ok((p, samples.into_iter().map(|z| z.re).collect()))
    };

    let (mut v_coeffs, mut v) = project(&initial_field(cfg, basis), false)?;
    let g = cfg.grid_size;
    let mut psi = v.clone();
    let mut u = v.clone();
    let mut d = vec![0.0; g];
    let mut b = vec![0.0; g];
    let shift = cfg.lambda + cfg.r;
    let threshold = cfg.threshold();

    let mut energy_history = Vec::new();
    let mut change_history = Vec::new();
    let mut violation_history = Vec::new();
    let mut converged = false;
    let mut change = f64::INFINITY;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let rhs: Vec<f64> = (0..g)
            .map(|m| cfg.lambda * (u[m] - d[m]) + cfg.r * (v[m] - b[m]))
            .collect();
        let next = spectral.solve_shifted(&rhs, shift)?;
        let diff: f64 = next.iter().zip(&psi).map(|(a, b)| (a - b).powi(2)).sum();
        let size: f64 = next.iter().map(|a| a * a).sum();
        change = if size > 0.0 { (diff / size).sqrt() } else { 0.0 };
        psi = next;

        let w: Vec<f64> = psi.iter().zip(&b).map(|(p, b)| p + b).collect();
        (v_coeffs, v) = project(&w, true)?;
        for m in 0..g {
            u[m] = shrink_scalar(psi[m] + d[m], threshold);
            d[m] += psi[m] - u[m];
            b[m] += psi[m] - v[m];
        }

        energy_history.push(spectral.energy(&v, cfg.mu)?);
        change_history.push(change);
        let (t_psi, _) = grid.analyze_real(&psi)?;
        violation_history.push(
            projector
                .is_shift_orthogonal(&t_psi, f64::INFINITY)?
                .max_constraint_violation,
        );

        if change <= cfg.tol {
            converged = true;
            break;
        }
    }

    let sso = projector.is_shift_orthogonal(&v_coeffs, MODE_TOL)?;
    let perpendicular_violations = prev
        .modes()
        .iter()
        .map(|m| {
            projector
                .check_shift_perpendicular(&m.coeffs, &v_coeffs, MODE_TOL)
                .map(|r| r.max_gram)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    if max_out_of_band > OUT_OF_BAND_WARN {
        warnings.push(format!(
            "out-of-band energy up to {max_out_of_band:.3e} truncated by SOPW analysis"
        ));
    }
    if !converged {
        warnings.push(format!(
            "not converged after {iterations} iterations (relative change {change:.3e})"
        ));
    }
    let diagnostics = CpwDiagnostics {
        iterations,
        converged,
        final_change: change,
        constraint_violation: sso.max_constraint_violation,
        perpendicular_violations,
        energy: spectral.energy(&v, cfg.mu)?,
        energy_history,
        change_history,
        violation_history,
        support_fraction: support_fraction(&v),
        seconds: start.elapsed().as_secs_f64(),
        max_out_of_band,
        max_imag,
        warnings,
    };
    let spectrum = ModeSpectrum::with_transform(&v_coeffs, projector.transform());
    Ok((
        CpwMode {
            coeffs: v_coeffs,
            spectrum,
            samples: v,
        },
        diagnostics,
    ))
}

/// Solves `count` modes in sequence.
pub fn solve_cpw_modes(
    basis: &SopwBasis1D,
    cfg: &CpwConfig,
    count: usize,
) -> Result<(CpwModeSet, Vec<CpwDiagnostics>)> {
    let mut set = CpwModeSet::new(basis);
    let mut diags = Vec::with_capacity(count);
    for _ in 0..count {
        let (mode, diag) = solve_cpw_mode(&set, cfg)?;
        set.insert(mode.coeffs, mode.samples)?;
        diags.push(diag);
    }
    Ok((set, diags))
}

fn initial_field(cfg: &CpwConfig, basis: &SopwBasis1D) -> Vec<f64> {
    let g = cfg.grid_size;
    let l = basis.period();
    let h = l / g as f64;
    match cfg.init {
        CpwInit::GaussianBump => {
            let width = l / (4.0 * basis.shifts() as f64);
            let centre = l / 2.0;
            let raw: Vec<f64> = (0..g)
                .map(|m| {
                    let x = m as f64 * h - centre;
                    (-(x * x) / (2.0 * width * width)).exp()
                })
                .collect();
            let norm = (raw.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
            raw.into_iter().map(|x| x / norm).collect()
        }
        CpwInit::RandomSeeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..g).map(|_| StandardNormal.sample(&mut rng)).collect()
        }
    }
}
