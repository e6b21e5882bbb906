//! Fast projections onto the set of shift-orthogonal coefficient vectors.
//!
//! Shift orthogonality of `v` (`⟨v, S(s)v⟩ = δ_{s0}` for every shift `s`) is
//! equivalent to every frequency column `B(v)(:; j)` having unit norm, and
//! two vectors are shift-perpendicular exactly when their frequency columns
//! are pairwise orthogonal. The B-transform is (up to `√ΠL`) unitary, so the
//! nearest shift-orthogonal vector is found by normalising each column of
//! `B(b)` independently and transforming back:
//!
//! ```text
//! P(b) = B⁻¹(Θ(B(b)))
//! ```
//!
//! The deflated variant additionally removes the components along the
//! frequency columns of previously accepted modes before normalising.

use crate::btransform::BTransform;
use crate::lattice::{ensure_same_domain, shift_correlation};
use crate::{CoeffTensor, Error, LatticeDomain, Parallelism, Result, C64};

/// Residual norm below which a Gram-Schmidt candidate is rejected in the
/// degenerate branch of the deflated projection.
const GRAM_SCHMIDT_ACCEPT: f64 = 1e-8;

/// Tolerance on the orthonormality of mode columns when validation is on.
const MODE_PRECONDITION_TOL: f64 = 1e-8;

/// Real unit vector assigned to a frequency column whose norm is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackVector {
    /// Every entry `1/√ΠN`.
    #[default]
    UniformReal,
    /// Unit entry at the first depth index.
    FirstCanonical,
}

impl std::str::FromStr for FallbackVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform_real" => Ok(FallbackVector::UniformReal),
            "first" | "first_canonical" => Ok(FallbackVector::FirstCanonical),
            other => Err(Error::Config(format!(
                "unknown fallback vector `{other}` (expected uniform or first)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProjectionConfig {
    /// Column norms at or below this are treated as zero. `None` selects
    /// `1e-14·√ΠN` for the domain at hand.
    pub zero_norm_eps: Option<f64>,
    pub fallback: FallbackVector,
    /// Check that deflation modes have orthonormal frequency columns.
    pub validate_modes: bool,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            zero_norm_eps: None,
            fallback: FallbackVector::UniformReal,
            validate_modes: false,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        match self.zero_norm_eps {
            Some(eps) if !(eps >= 0.0 && eps.is_finite()) => Err(Error::Config(format!(
                "zero_norm_eps must be a finite nonnegative number, got {eps}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn eps_for(&self, domain: &LatticeDomain) -> f64 {
        self.zero_norm_eps
            .unwrap_or_else(|| 1e-14 * (domain.depth_count() as f64).sqrt())
    }

    fn fallback_column(&self, depth_count: usize) -> Vec<C64> {
        let mut col = vec![C64::new(0.0, 0.0); depth_count];
        match self.fallback {
            FallbackVector::UniformReal => {
                let v = 1.0 / (depth_count as f64).sqrt();
                col.iter_mut().for_each(|z| *z = C64::new(v, 0.0));
            }
            FallbackVector::FirstCanonical => col[0] = C64::new(1.0, 0.0),
        }
        col
    }
}

/// Membership diagnostics for the shift-orthogonal set.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SsoReport {
    /// `max_s |⟨v, S(s)v⟩ − δ_{s0}|`.
    pub max_constraint_violation: f64,
    pub is_member: bool,
    /// `‖B(v)(:; j)‖₂` for every frequency `j`.
    pub per_frequency_norms: Vec<f64>,
    /// `max_j |‖B(v)(:; j)‖₂ − 1|`.
    pub max_norm_deviation: f64,
    /// Whether the frequency-norm criterion and the shift-Gram criterion
    /// give consistent verdicts.
    pub criteria_agree: bool,
}

/// Shift-perpendicularity diagnostics for a pair of tensors.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PerpReport {
    /// `max_j |⟨B(g)(:; j), B(f)(:; j)⟩|`.
    pub max_frequency_inner: f64,
    /// `max_s |⟨g, S(s) f⟩|`.
    pub max_gram: f64,
    pub is_perpendicular: bool,
    pub criteria_agree: bool,
}

/// B-transform of an accepted mode, kept for repeated deflation.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    spectrum: CoeffTensor,
}

impl ModeSpectrum {
    pub fn new(mode: &CoeffTensor) -> Self {
        Self::with_transform(mode, &BTransform::new(mode.domain()))
    }

    pub fn with_transform(mode: &CoeffTensor, bt: &BTransform) -> Self {
        Self {
            spectrum: bt.forward(mode),
        }
    }

    pub fn spectrum(&self) -> &CoeffTensor {
        &self.spectrum
    }

    pub fn domain(&self) -> &LatticeDomain {
        self.spectrum.domain()
    }
}

/// Reusable projection engine for one domain.
/// Per-column Θ factors: `Some(1/‖column‖)`, or `None` for a zero column.
struct Theta {
    scales: Vec<Option<f64>>,
    fallback: Vec<C64>,
}

impl Theta {
    fn apply(&self, depth: usize, slice: &mut [C64]) {
        for (z, scale) in slice.iter_mut().zip(&self.scales) {
            *z = match scale {
                Some(s) => *z * s,
                None => self.fallback[depth],
            };
        }
    }
}

#[derive(Debug, Clone)]
pub struct Projector {
    bt: BTransform,
    cfg: ProjectionConfig,
}

impl Projector {
    pub fn new(domain: &LatticeDomain, cfg: ProjectionConfig) -> Result<Self> {
        Self::with_parallelism(domain, cfg, Parallelism::default())
    }

    pub fn with_parallelism(
        domain: &LatticeDomain,
        cfg: ProjectionConfig,
        exec: Parallelism,
    ) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            bt: BTransform::with_parallelism(domain, exec),
            cfg,
        })
    }

    pub fn domain(&self) -> &LatticeDomain {
        self.bt.domain()
    }

    pub fn config(&self) -> &ProjectionConfig {
        &self.cfg
    }

    pub fn transform(&self) -> &BTransform {
        &self.bt
    }

    /// Θ: normalise every frequency column of `p`, replacing (near-)zero
    /// columns by the configured real fallback vector.
    pub fn theta_normalize(&self, p: &CoeffTensor) -> Result<CoeffTensor> {
        ensure_same_domain(p.domain(), self.domain())?;
        let mut data = p.data().to_vec();
        self.theta_in_place(&mut data);
        Ok(CoeffTensor::from_parts(self.domain().clone(), data))
    }

    fn theta_in_place(&self, data: &mut [C64]) {
        let theta = self.theta_scales(data);
        self.bt
            .parallelism()
            .for_each_chunk(data, self.domain().shift_count(), || (), |depth, slice, _| {
                theta.apply(depth, slice)
            });
    }

    fn theta_scales(&self, data: &[C64]) -> Theta {
        let domain = self.domain();
        let pl = domain.shift_count();
        let nd = domain.depth_count();
        let eps = self.cfg.eps_for(domain);
        let exec = self.bt.parallelism();

        // Column norms, each summed over depth in a fixed order. Blocks of
        // columns are swept depth by depth to keep the reads contiguous.
        const BLOCK: usize = 512;
        let norms: Vec<f64> = exec
            .map_range(pl.div_ceil(BLOCK), |blk| {
                let lo = blk * BLOCK;
                let hi = (lo + BLOCK).min(pl);
                let mut acc = vec![0.0; hi - lo];
                for depth in 0..nd {
                    let row = &data[depth * pl + lo..depth * pl + hi];
                    for (a, z) in acc.iter_mut().zip(row) {
                        *a += z.norm_sqr();
                    }
                }
                acc.into_iter().map(f64::sqrt).collect::<Vec<_>>()
            })
            .concat();
        Theta {
            scales: norms
                .iter()
                .map(|&n| if n > eps { Some(1.0 / n) } else { None })
                .collect(),
            fallback: self.cfg.fallback_column(nd),
        }
    }

    /// Nearest shift-orthogonal tensor: `B⁻¹(Θ(B(b)))`.
    pub fn project_sso(&self, b: &CoeffTensor) -> Result<CoeffTensor> {
        ensure_same_domain(b.domain(), self.domain())?;
        let mut data = b.data().to_vec();
        self.bt.forward_in_place(&mut data);
        let theta = self.theta_scales(&data);
        self.bt
            .inverse_in_place_with(&mut data, |depth, slice| theta.apply(depth, slice));
        Ok(CoeffTensor::from_parts(self.domain().clone(), data))
    }

    /// Nearest shift-orthogonal tensor that is also shift-perpendicular to
    /// every tensor whose spectrum is in `modes`.
    ///
    /// Mode spectra must have orthonormal frequency columns (each mode
    /// shift-orthogonal and the modes mutually shift-perpendicular). This is
    /// only checked when [`ProjectionConfig::validate_modes`] is set.
    pub fn project_sso_orth(
        &self,
        b: &CoeffTensor,
        modes: &[ModeSpectrum],
    ) -> Result<CoeffTensor> {
        ensure_same_domain(b.domain(), self.domain())?;
        let domain = self.domain();
        let pl = domain.shift_count();
        let nd = domain.depth_count();
        if modes.len() >= nd {
            return Err(Error::Infeasible(format!(
                "{} modes leave no room in a {nd}-dimensional frequency column",
                modes.len()
            )));
        }
        for m in modes {
            ensure_same_domain(m.domain(), domain)?;
        }
        if self.cfg.validate_modes {
            validate_mode_columns(modes, pl)?;
        }
        if modes.is_empty() {
            return self.project_sso(b);
        }

        let eps = self.cfg.eps_for(domain);
        let exec = self.bt.parallelism();
        let mut data = b.data().to_vec();
        self.bt.forward_in_place(&mut data);

        let spectrum: &[C64] = &data;
        let columns: Vec<Vec<C64>> = exec.map_range(pl, |j| {
            let mode_cols: Vec<Vec<C64>> = modes.iter().map(|m| m.spectrum.column(j)).collect();
            let mut z: Vec<C64> = spectrum.iter().skip(j).step_by(pl).copied().collect();
            // Two deflation passes keep the result orthogonal to working
            // precision even when most of the column is removed.
            deflate(&mut z, &mode_cols);
            deflate(&mut z, &mode_cols);
            let norm = vec_norm(&z);
            if norm > eps {
                z.iter_mut().for_each(|x| *x /= norm);
                z
            } else {
                orthogonal_canonical(&mode_cols, nd)
            }
        });

        exec.for_each_chunk(
            &mut data,
            pl,
            || (),
            |depth, slice, _| {
                for (j, z) in slice.iter_mut().enumerate() {
                    *z = columns[j][depth];
                }
            },
        );
        self.bt.inverse_in_place(&mut data);
        Ok(CoeffTensor::from_parts(domain.clone(), data))
    }

    /// Membership test for the shift-orthogonal set. Checks both the
    /// frequency-column norms and the shift Gram (`O(ΠL·M)` work).
    pub fn is_shift_orthogonal(&self, v: &CoeffTensor, tol: f64) -> Result<SsoReport> {
        ensure_same_domain(v.domain(), self.domain())?;
        let pl = self.domain().shift_count();
        let spectrum = self.bt.forward(v);
        let per_frequency_norms: Vec<f64> = (0..pl)
            .map(|j| vec_norm(&spectrum.column(j)))
            .collect();
        let max_norm_deviation = per_frequency_norms
            .iter()
            .map(|n| (n - 1.0).abs())
            .fold(0.0, f64::max);
        let max_sq_deviation = per_frequency_norms
            .iter()
            .map(|n| (n * n - 1.0).abs())
            .fold(0.0, f64::max);

        let corr = shift_correlation(v, v)?;
        let max_constraint_violation = corr
            .iter()
            .enumerate()
            .map(|(s, c)| {
                let target = if s == 0 { 1.0 } else { 0.0 };
                (c - C64::new(target, 0.0)).norm()
            })
            .fold(0.0, f64::max);
        let is_member = max_constraint_violation <= tol;

        // The Gram entries are the inverse DFT of the squared column norms:
        // max|Gram − δ| ≤ max|n² − 1| ≤ ΠL·max|Gram − δ|.
        let slack = 1e-12;
        let criteria_agree = max_constraint_violation <= max_sq_deviation + slack
            && max_sq_deviation <= pl as f64 * max_constraint_violation + slack;

        Ok(SsoReport {
            max_constraint_violation,
            is_member,
            per_frequency_norms,
            max_norm_deviation,
            criteria_agree,
        })
    }

    pub fn check_shift_perpendicular(
        &self,
        g: &CoeffTensor,
        f: &CoeffTensor,
        tol: f64,
    ) -> Result<PerpReport> {
        ensure_same_domain(g.domain(), self.domain())?;
        ensure_same_domain(f.domain(), self.domain())?;
        let pl = self.domain().shift_count();
        let bg = self.bt.forward(g);
        let bf = self.bt.forward(f);
        let max_frequency_inner = (0..pl)
            .map(|j| inner(&bg.column(j), &bf.column(j)).norm())
            .fold(0.0, f64::max);
        let max_gram = shift_correlation(g, f)?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let is_perpendicular = max_gram <= tol;
        // Same DFT pair as in the membership test, without the δ offset.
        let slack = 1e-12;
        let criteria_agree = max_gram <= max_frequency_inner + slack
            && max_frequency_inner <= pl as f64 * max_gram + slack;
        Ok(PerpReport {
            max_frequency_inner,
            max_gram,
            is_perpendicular,
            criteria_agree,
        })
    }
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn deflate(z: &mut [C64], basis: &[Vec<C64>]) {
    for q in basis {
        let coef = inner(q, z);
        for (x, y) in z.iter_mut().zip(q) {
            *x -= coef * y;
        }
    }
}

/// First canonical vector (in index order) whose residual against `basis`
/// exceeds the acceptance threshold, normalised.
fn orthogonal_canonical(basis: &[Vec<C64>], len: usize) -> Vec<C64> {
    for k in 0..len {
        let mut e = vec![C64::new(0.0, 0.0); len];
        e[k] = C64::new(1.0, 0.0);
        deflate(&mut e, basis);
        deflate(&mut e, basis);
        let norm = vec_norm(&e);
        if norm > GRAM_SCHMIDT_ACCEPT {
            e.iter_mut().for_each(|x| *x /= norm);
            return e;
        }
    }
    unreachable!("fewer than {len} orthonormal columns always leave a canonical residual")
}

fn validate_mode_columns(modes: &[ModeSpectrum], pl: usize) -> Result<()> {
    for j in 0..pl {
        let cols: Vec<Vec<C64>> = modes.iter().map(|m| m.spectrum.column(j)).collect();
        for (a, ca) in cols.iter().enumerate() {
            for (b, cb) in cols.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                let dev = (inner(ca, cb) - C64::new(target, 0.0)).norm();
                if dev > MODE_PRECONDITION_TOL {
                    return Err(Error::Precondition(format!(
                        "mode columns at frequency {j} are not orthonormal \
                         (modes {a},{b} deviate by {dev:.3e})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Θ with a one-off projector.
pub fn theta_normalize(p: &CoeffTensor, cfg: &ProjectionConfig) -> Result<CoeffTensor> {
    Projector::new(p.domain(), cfg.clone())?.theta_normalize(p)
}

/// Projection onto the shift-orthogonal set with a one-off projector.
pub fn project_sso(b: &CoeffTensor, cfg: &ProjectionConfig) -> Result<CoeffTensor> {
    Projector::new(b.domain(), cfg.clone())?.project_sso(b)
}

/// Deflated projection with a one-off projector.
pub fn project_sso_orth(
    b: &CoeffTensor,
    modes: &[ModeSpectrum],
    cfg: &ProjectionConfig,
) -> Result<CoeffTensor> {
    Projector::new(b.domain(), cfg.clone())?.project_sso_orth(b, modes)
}

pub fn is_shift_orthogonal(v: &CoeffTensor, tol: f64) -> Result<SsoReport> {
    Projector::new(v.domain(), ProjectionConfig::default())?.is_shift_orthogonal(v, tol)
}

pub fn check_shift_perpendicular(
    g: &CoeffTensor,
    f: &CoeffTensor,
    tol: f64,
) -> Result<PerpReport> {
    Projector::new(g.domain(), ProjectionConfig::default())?.check_shift_perpendicular(g, f, tol)
}
