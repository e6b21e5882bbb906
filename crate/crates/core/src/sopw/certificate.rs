use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::SopwBasis1D;
use crate::{Error, Result};

const PRIMAL_TOL: f64 = 1e-12;
const DUAL_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-12;

/// Primal-dual certificate that the depth-1 SOPW minimises the kinetic
/// energy `J∞(θ) = Σ_n λ_n·|a(n)|²` among shift-orthogonal functions.
///
/// With `c(0) = |a(0)|²`, `c(n) = 2|a(n)|²` the problem is the linear program
/// `min λᵀc s.t. Ac = e_0, c ≥ 0` where `A = [M|M|…]` and
/// `M(j, n) = cos(2πjn/L)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CertificateReport {
    pub shifts: usize,
    pub tail_periods: usize,
    /// `max_j |(Ac − b)_j|`.
    pub primal_residual: f64,
    /// `min_n s_n` over the first `K·L + 1` entries.
    pub dual_min_slack: f64,
    /// `max |s_n|` for `n ≤ L/2`.
    pub leading_slack_max: f64,
    /// `sᵀc`.
    pub complementary_slackness: f64,
    /// Condition number of `[1|M_L|e]`.
    pub condition_number: f64,
    /// `λᵀc = J∞(θ^1)`.
    pub primal_objective: f64,
    /// `bᵀy`.
    pub dual_objective: f64,
    pub slack: Vec<f64>,
    pub primal_ok: bool,
    pub dual_ok: bool,
    pub slackness_ok: bool,
    pub leading_ok: bool,
    /// Set when the `(L/2 + 1)`-column system turned out rank deficient.
    pub failure: Option<String>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
            && self.primal_ok
            && self.dual_ok
            && self.slackness_ok
            && self.leading_ok
    }
}

fn eigenvalue(n: usize, l: f64) -> f64 {
    2.0 * (PI * n as f64 / l).powi(2)
}

/// `cos(2πjn/L)` with the product reduced modulo `L`.
fn cos_entry(j: usize, n: usize, l: usize) -> f64 {
    (2.0 * PI * ((j * n) % l) as f64 / l as f64).cos()
}

/// Builds and checks the certificate on the first `K·L + 1` entries.
pub fn verify_variational_certificate(
    basis: &SopwBasis1D,
    tail_periods: usize,
) -> Result<CertificateReport> {
    if tail_periods < 2 {
        return Err(Error::Precondition(format!(
            "certificate tail needs at least 2 periods, got {tail_periods}"
        )));
    }
    let l = basis.shifts();
    let lf = l as f64;
    let half = l / 2;
    let len = tail_periods * l + 1;

    let mut c = vec![0.0; len];
    c[0] = 1.0 / lf;
    for cn in c.iter_mut().take(half).skip(1) {
        *cn = 2.0 / lf;
    }
    c[half] = 1.0 / lf;
    let lambda: Vec<f64> = (0..len).map(|n| eigenvalue(n, lf)).collect();

    let primal_residual = (0..l)
        .map(|j| {
            let ac: f64 = (0..=half).map(|n| cos_entry(j, n, l) * c[n]).sum();
            let b = if j == 0 { 1.0 } else { 0.0 };
            (ac - b).abs()
        })
        .fold(0.0, f64::max);

    let cmat = DMatrix::from_fn(l, half + 1, |j, n| cos_entry(j, n, l));
    let svd = cmat.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = smax / smin;

    let mut report = CertificateReport {
        shifts: l,
        tail_periods,
        primal_residual,
        dual_min_slack: f64::NAN,
        leading_slack_max: f64::NAN,
        complementary_slackness: f64::NAN,
        condition_number,
        primal_objective: lambda.iter().zip(&c).map(|(a, b)| a * b).sum(),
        dual_objective: f64::NAN,
        slack: Vec::new(),
        primal_ok: primal_residual <= PRIMAL_TOL,
        dual_ok: false,
        slackness_ok: false,
        leading_ok: false,
        failure: None,
    };
    if !(smin > RANK_TOL * smax) {
        report.failure = Some(format!(
            "[1|M_L|e] is numerically rank deficient (condition number {condition_number:e})"
        ));
        return Ok(report);
    }

    // Cᵀy = λ_{0..L/2} is underdetermined; the slack does not depend on
    // which solution is taken, so use the minimum-norm one.
    let gram = cmat.transpose() * &cmat;
    let rhs = DVector::from_column_slice(&lambda[..=half]);
    let Some(z) = gram.lu().solve(&rhs) else {
        report.failure = Some("normal equations are singular".into());
        return Ok(report);
    };
    let y = &cmat * z;

    let slack: Vec<f64> = (0..len)
        .map(|n| {
            let aty: f64 = (0..l).map(|j| cos_entry(j, n, l) * y[j]).sum();
            lambda[n] - aty
        })
        .collect();
    report.dual_min_slack = slack.iter().copied().fold(f64::INFINITY, f64::min);
    report.leading_slack_max = slack[..=half].iter().map(|s| s.abs()).fold(0.0, f64::max);
    report.complementary_slackness = slack.iter().zip(&c).map(|(s, c)| s * c).sum();
    report.dual_objective = y[0];
    report.dual_ok = report.dual_min_slack >= -DUAL_TOL;
    report.slackness_ok = report.complementary_slackness.abs() <= DUAL_TOL;
    report.leading_ok = report.leading_slack_max <= DUAL_TOL;
    report.slack = slack;
    Ok(report)
}
