//! Scaling harness for `project_sso`.
//!
//! Times the projection over doublings of `M = ΠN·ΠL` in two sections, one
//! growing `L` at fixed `N` and one growing `N` at fixed `L`, and fits
//! `t ≈ c·M·log₂(ΠL)`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::projection::{ProjectionConfig, Projector};
use crate::{CoeffTensor, Error, LatticeDomain, Parallelism, Result, C64};

/// Largest admissible doubling ratio `t(2M)/t(M)`.
pub const RATIO_BOUND: f64 = 2.6;
/// Each timed sample loops the projection until it spans at least this long.
const MIN_SAMPLE_SECONDS: f64 = 0.02;

#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub min_exp: u32,
    pub max_exp: u32,
    pub repeats: usize,
    /// Depth count of the L-scaling section.
    pub fixed_depth: usize,
    /// Shift count of the N-scaling section.
    pub fixed_shifts: usize,
    pub seed: u64,
    #[serde(skip)]
    pub parallelism: Parallelism,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            min_exp: 14,
            max_exp: 20,
            repeats: 7,
            fixed_depth: 16,
            fixed_shifts: 64,
            seed: 0,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub m: usize,
    pub shifts: usize,
    pub depths: usize,
    pub median_seconds: f64,
    pub repeats: usize,
    /// Projections per timed sample.
    pub inner_loops: usize,
    /// `(t − c·M·log₂ΠL)/t` for the fitted `c`.
    pub model_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSection {
    pub name: String,
    pub rows: Vec<BenchRow>,
    pub fitted_c: f64,
    pub rms_model_residual: f64,
    /// `t(2M)/t(M)` for consecutive rows.
    pub ratios: Vec<f64>,
    pub ratio_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub threads: usize,
    pub config: BenchConfig,
    pub sections: Vec<BenchSection>,
    pub warnings: Vec<String>,
}

impl BenchReport {
    pub fn ratio_ok(&self) -> bool {
        self.sections.iter().all(|s| s.ratio_ok)
    }

    pub fn max_ratio(&self) -> f64 {
        self.sections
            .iter()
            .flat_map(|s| s.ratios.iter().copied())
            .fold(0.0, f64::max)
    }
}

fn random_tensor(domain: &LatticeDomain, rng: &mut ChaCha8Rng) -> CoeffTensor {
    let data = (0..domain.len())
        .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    CoeffTensor::new(domain.clone(), data).expect("finite samples")
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct Case {
    projector: Projector,
    input: CoeffTensor,
    inner: usize,
    samples: Vec<f64>,
}

impl Case {
    fn new(domain: &LatticeDomain, cfg: &BenchConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let projector =
            Projector::with_parallelism(domain, ProjectionConfig::default(), cfg.parallelism)?;
        let input = random_tensor(domain, rng);

        // Warm-up, also used to size the inner loop.
        let start = Instant::now();
        std::hint::black_box(projector.project_sso(&input)?);
        let once = start.elapsed().as_secs_f64().max(1e-9);
        let inner = ((MIN_SAMPLE_SECONDS / once).ceil() as usize).max(1);
        Ok(Case {
            projector,
            input,
            inner,
            samples: Vec::with_capacity(cfg.repeats),
        })
    }

    fn sample(&mut self) -> Result<()> {
        let start = Instant::now();
        for _ in 0..self.inner {
            std::hint::black_box(self.projector.project_sso(std::hint::black_box(&self.input))?);
        }
        self.samples.push(start.elapsed().as_secs_f64() / self.inner as f64);
        Ok(())
    }

    fn into_row(self) -> BenchRow {
        let domain = self.projector.domain();
        BenchRow {
            m: domain.len(),
            shifts: domain.shift_count(),
            depths: domain.depth_count(),
            repeats: self.samples.len(),
            median_seconds: median(self.samples),
            inner_loops: self.inner,
            model_residual: f64::NAN,
        }
    }
}

fn finish_section(name: &str, mut rows: Vec<BenchRow>) -> BenchSection {
    let x: Vec<f64> = rows
        .iter()
        .map(|r| r.m as f64 * (r.shifts as f64).log2().max(1.0))
        .collect();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxt: f64 = x.iter().zip(&rows).map(|(v, r)| v * r.median_seconds).sum();
    let c = if sxx > 0.0 { sxt / sxx } else { 0.0 };
    let mut sq = 0.0;
    for (r, xi) in rows.iter_mut().zip(&x) {
        r.model_residual = (r.median_seconds - c * xi) / r.median_seconds;
        sq += r.model_residual * r.model_residual;
    }
    let ratios: Vec<f64> = rows
        .windows(2)
        .map(|w| w[1].median_seconds / w[0].median_seconds)
        .collect();
    BenchSection {
        name: name.into(),
        rms_model_residual: (sq / rows.len().max(1) as f64).sqrt(),
        ratio_ok: ratios.iter().all(|&q| q <= RATIO_BOUND),
        ratios,
        fitted_c: c,
        rows,
    }
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.min_exp > cfg.max_exp || cfg.max_exp > 30 {
        return Err(Error::Config(format!(
            "bad exponent range {}..={}",
            cfg.min_exp, cfg.max_exp
        )));
    }
    if cfg.repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let mut warnings = Vec::new();
    if cfg.repeats < 5 {
        warnings.push(format!(
            "only {} repeat(s): medians will be noisy, use at least 5",
            cfg.repeats
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let names = ["L-scaling", "N-scaling"];
    let mut cases: Vec<Vec<Case>> = Vec::new();
    for (fixed, grow_shifts) in [(cfg.fixed_depth, true), (cfg.fixed_shifts, false)] {
        let mut section = Vec::new();
        for e in cfg.min_exp..=cfg.max_exp {
            let m = 1usize << e;
            if !m.is_multiple_of(fixed) || m / fixed == 0 {
                return Err(Error::Config(format!(
                    "M = 2^{e} is not a multiple of the fixed size {fixed}"
                )));
            }
            let other = m / fixed;
            let domain = if grow_shifts {
                LatticeDomain::one_d(other, fixed)?
            } else {
                LatticeDomain::one_d(fixed, other)?
            };
            section.push(Case::new(&domain, cfg, &mut rng)?);
        }
        cases.push(section);
    }
    // Round-robin over every size so slow spells on the host are shared
    // across rows instead of landing on one.
    for _ in 0..cfg.repeats {
        for case in cases.iter_mut().flatten() {
            case.sample()?;
        }
    }
    let sections = names
        .iter()
        .zip(cases)
        .map(|(name, section)| {
            finish_section(name, section.into_iter().map(Case::into_row).collect())
        })
        .collect();
    Ok(BenchReport {
        threads: cfg.parallelism.threads(),
        config: cfg.clone(),
        sections,
        warnings,
    })
}
