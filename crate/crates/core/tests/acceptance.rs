//! End-to-end acceptance checks. Runs without the libtest harness so every
//! check prints its PASS/FAIL line, one at a time, on a quiet process.

mod common;

use std::f64::consts::PI;
use std::panic::catch_unwind;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use common::*;
use shiftorth::bench::{run_bench, BenchConfig, RATIO_BOUND};
use shiftorth::btransform::{b_inverse, b_transform};
use shiftorth::cpw::{solve_cpw_mode, solve_cpw_modes, CpwConfig, CpwModeSet};
use shiftorth::lattice::gram_shift;
use shiftorth::projection::{
    is_shift_orthogonal, project_sso, project_sso_orth, ModeSpectrum, ProjectionConfig,
};
use shiftorth::sopw::{
    first_derivative_stencil, lemma_sums, second_derivative_stencil,
    verify_variational_certificate, FourierRep, SopwBasis1D, SopwGrid,
};
use shiftorth::{CoeffTensor, LatticeDomain, C64};

static FAILED: AtomicBool = AtomicBool::new(false);

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!(
        "criterion {id:>2} [{}] {name}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    if !ok {
        FAILED.store(true, Ordering::SeqCst);
    }
}

fn cfg() -> ProjectionConfig {
    ProjectionConfig::default()
}

/// Nearest unit vector to `p` by projected gradient iteration on the sphere.
fn sphere_oracle(p: &[C64]) -> Vec<C64> {
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut x: Vec<C64> = vec![C64::new(1.0, 0.0); p.len()];
    let n0 = norm(&x);
    x.iter_mut().for_each(|z| *z /= n0);
    for _ in 0..2000 {
        let y: Vec<C64> = x.iter().zip(p).map(|(a, b)| a + (b - a) * 0.5).collect();
        let n = norm(&y);
        x = y.into_iter().map(|z| z / n).collect();
    }
    x
}

fn corpus_domains() -> Vec<LatticeDomain> {
    vec![
        LatticeDomain::one_d(8, 8).unwrap(),
        LatticeDomain::one_d(16, 4).unwrap(),
        LatticeDomain::one_d(5, 3).unwrap(),
        LatticeDomain::new([4, 4], [2, 2]).unwrap(),
        LatticeDomain::new([2, 8], [1, 3]).unwrap(),
        LatticeDomain::new([3, 3], [2, 3]).unwrap(),
    ]
}

fn corpus() -> Vec<CoeffTensor> {
    let mut r = rng(100);
    corpus_domains()
        .iter()
        .flat_map(|d| (0..100).map(|_| random_tensor(d, &mut r)).collect::<Vec<_>>())
        .collect()
}

fn c01_sopw_orthonormality() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for l in [2, 4, 8] {
        for n in 1..=6 {
            let b = SopwBasis1D::new(l, n).unwrap();
            let cap = b.max_freq() as i64;
            let rows: Vec<Vec<C64>> = (1..=n)
                .flat_map(|k| (0..l).map(move |j| (k, j)))
                .map(|(k, j)| {
                    let mut v = vec![C64::new(0.0, 0.0); 2 * cap as usize + 1];
                    for (f, a) in b.fourier_coeffs(k, j).unwrap() {
                        v[(f + cap) as usize] = a;
                    }
                    v
                })
                .collect();
            for (p, a) in rows.iter().enumerate() {
                for (q, c) in rows.iter().enumerate() {
                    let ip: C64 = a.iter().zip(c).map(|(x, y)| x.conj() * y).sum();
                    let expect = if p == q { 1.0 } else { 0.0 };
                    worst = worst.max((ip - expect).norm());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "SOPW orthonormality",
        worst <= 1e-12 && secs < 1.0,
        format!("max |Gram − I| = {worst:.2e} (≤ 1e-12), {secs:.3}s (< 1s)"),
    );
}

fn c02_projection_membership_and_minimality() {
    let start = Instant::now();
    let mut worst_member: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut all_members = true;
    for b in corpus() {
        let p = project_sso(&b, &cfg()).unwrap();
        let rep = is_shift_orthogonal(&p, 1e-10).unwrap();
        all_members &= rep.is_member;
        worst_member = worst_member.max(rep.max_constraint_violation);
        let pb = direct_b(&b);
        let pp = direct_b(&p);
        for f in 0..b.domain().shift_count() {
            let col: Vec<C64> = pb.iter().map(|row| row[f]).collect();
            let got: Vec<C64> = pp.iter().map(|row| row[f]).collect();
            worst_oracle = worst_oracle.max(max_abs_diff(&got, &sphere_oracle(&col)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        "projection membership + minimality",
        all_members && worst_oracle <= 1e-10 && secs < 10.0,
        format!(
            "600 inputs, max violation {worst_member:.2e} (≤ 1e-10), max column error vs sphere oracle {worst_oracle:.2e} (≤ 1e-10), {secs:.2}s (< 10s)"
        ),
    );
}

fn c03_realness() {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let mut degenerate_columns = 0;
    let domains = corpus_domains();
    for case in 0..100 {
        let dom = &domains[case % domains.len()];
        let mut b = random_real_tensor(dom, &mut r);
        if case % 2 == 1 {
            // Zero a conjugate pair of frequency columns (or all of them)
            // so the fallback branch is taken.
            let mut spec = b_transform(&b);
            let pl = dom.shift_count();
            let f = case % pl;
            let shifts = dom.shifts();
            let j = dom.unflatten_shift(f);
            let neg: Vec<usize> = j.iter().zip(shifts).map(|(&a, &l)| (l - a) % l).collect();
            let fneg = dom.flatten_shift(&neg).unwrap();
            for i in 0..dom.depth_count() {
                spec.data_mut()[i * pl + f] = C64::new(0.0, 0.0);
                spec.data_mut()[i * pl + fneg] = C64::new(0.0, 0.0);
            }
            if case % 10 == 9 {
                spec = CoeffTensor::zeros(dom.clone());
            }
            let real: Vec<f64> = b_inverse(&spec).data().iter().map(|z| z.re).collect();
            b = CoeffTensor::from_real(dom.clone(), &real).unwrap();
            let bb = b_transform(&b);
            degenerate_columns += (0..pl)
                .filter(|&c| {
                    (0..dom.depth_count())
                        .map(|i| bb.data()[i * pl + c].norm_sqr())
                        .sum::<f64>()
                        .sqrt()
                        <= cfg().eps_for(dom)
                })
                .count();
        }
        let p = project_sso(&b, &cfg()).unwrap();
        worst = worst.max(p.max_abs_imag());
    }
    report(
        3,
        "realness",
        worst <= 1e-12 && degenerate_columns > 0,
        format!(
            "100 real inputs ({degenerate_columns} degenerate columns hit), max |Im| = {worst:.2e} (≤ 1e-12)"
        ),
    );
}

fn c04_idempotence() {
    let mut worst: f64 = 0.0;
    for b in corpus() {
        let p = project_sso(&b, &cfg()).unwrap();
        let pp = project_sso(&p, &cfg()).unwrap();
        worst = worst.max(pp.distance(&p).unwrap());
    }
    report(
        4,
        "idempotence",
        worst <= 1e-10,
        format!("max ‖P(P(b)) − P(b)‖ = {worst:.2e} (≤ 1e-10)"),
    );
}

fn c05_deflated_projection() {
    let mut r = rng(102);
    let mut worst_member: f64 = 0.0;
    let mut worst_gram: f64 = 0.0;
    let mut all_members = true;
    let mut cases = 0;
    for dom in corpus_domains() {
        let nd = dom.depth_count();
        for n in 1..nd {
            for _ in 0..5 {
                let mut modes: Vec<CoeffTensor> = Vec::new();
                let mut spectra = Vec::new();
                for _ in 0..n {
                    let m =
                        project_sso_orth(&random_tensor(&dom, &mut r), &spectra, &cfg()).unwrap();
                    spectra.push(ModeSpectrum::new(&m));
                    modes.push(m);
                }
                let out = project_sso_orth(&random_tensor(&dom, &mut r), &spectra, &cfg()).unwrap();
                let rep = is_shift_orthogonal(&out, 1e-10).unwrap();
                all_members &= rep.is_member;
                worst_member = worst_member.max(rep.max_constraint_violation);
                for m in &modes {
                    let g = gram_shift(m, &out).unwrap();
                    worst_gram = g.iter().map(|z| z.norm()).fold(worst_gram, f64::max);
                }
                cases += 1;
            }
        }
    }
    report(
        5,
        "deflated projection",
        all_members && worst_gram <= 1e-10,
        format!(
            "{cases} cases, max violation {worst_member:.2e} (≤ 1e-10), max |gram_shift| vs modes {worst_gram:.2e} (≤ 1e-10)"
        ),
    );
}

fn c06_derivative_theorems() {
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    let mut leak: f64 = 0.0;
    let mut lemma: f64 = 0.0;
    for l in [4usize, 8] {
        for k in 1..=5 {
            let b = SopwBasis1D::new(l, k + 1).unwrap();
            let grid = SopwGrid::with_default_size(&b);
            for ell in 0..l {
                let f = FourierRep::from_sparse(&b, &b.fourier_coeffs(k, ell).unwrap()).unwrap();
                let d1 = grid.synthesize_fourier(&f.derivative(1)).unwrap();
                let s1 = grid
                    .synthesize(&first_derivative_stencil(k, ell, &b).to_tensor(&b).unwrap())
                    .unwrap();
                first = first.max(max_abs_diff(&d1, &s1));
                let d2 = grid.synthesize_fourier(&f.derivative(2)).unwrap();
                let s2 = grid
                    .synthesize(&second_derivative_stencil(k, ell, &b).to_tensor(&b).unwrap())
                    .unwrap();
                second = second.max(max_abs_diff(&d2, &s2));
                let (t, _) = grid.analyze(&d2).unwrap();
                for depth in (1..=k + 1).filter(|&d| d != k) {
                    leak = t.depth_slice(depth - 1).iter().map(|z| z.norm()).fold(leak, f64::max);
                }
            }
            let half = l as i64 / 2;
            let ki = k as i64;
            for j in 0..l {
                let (mut s1, mut s2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for n in -ki * half..=ki * half {
                    if n.abs() <= (ki - 1) * half || n.abs() >= ki * half {
                        continue;
                    }
                    let w = C64::from_polar(1.0, 2.0 * PI * (j as f64) * n as f64 / l as f64);
                    s1 += w * n as f64;
                    s2 += w * (n * n) as f64;
                }
                let (c1, c2) = lemma_sums(k, j, &b);
                lemma = lemma.max((c1 - s1).norm()).max((c2 - s2).norm());
            }
        }
    }
    report(
        6,
        "derivative theorems",
        first <= 1e-9 && second <= 1e-9 && leak <= 1e-10 && lemma <= 1e-10,
        format!(
            "first-derivative error {first:.2e}, second-derivative error {second:.2e} (≤ 1e-9), cross-depth leakage {leak:.2e}, lemma sums {lemma:.2e} (≤ 1e-10)"
        ),
    );
}

fn c07_variational_certificate() {
    let mut ok = true;
    let mut parts = Vec::new();
    for l in [4, 8, 16] {
        let rep = verify_variational_certificate(&SopwBasis1D::new(l, 1).unwrap(), 10).unwrap();
        let pass = rep.failure.is_none()
            && rep.primal_residual <= 1e-10
            && rep.dual_min_slack >= -1e-10
            && rep.complementary_slackness.abs() <= 1e-10
            && rep.leading_slack_max <= 1e-10;
        ok &= pass;
        parts.push(format!(
            "L={l}: primal {:.1e}, min slack {:.1e}, sᵀc {:.1e}, leading {:.1e}, cond {:.3}",
            rep.primal_residual,
            rep.dual_min_slack,
            rep.complementary_slackness,
            rep.leading_slack_max,
            rep.condition_number
        ));
    }
    report(7, "variational certificate", ok, parts.join("; "));
}

fn c08_cpw_modes() {
    let start = Instant::now();
    let b = SopwBasis1D::new(16, 8).unwrap();
    let cfg = CpwConfig::for_basis(&b);
    assert_eq!(cfg.grid_size, 512);
    let (set, diags) = solve_cpw_modes(&b, &cfg, 4).unwrap();
    let mut worst: f64 = 0.0;
    for (i, a) in set.modes().iter().enumerate() {
        worst = worst.max(is_shift_orthogonal(&a.coeffs, 1e-7).unwrap().max_constraint_violation);
        for c in &set.modes()[..i] {
            let g = gram_shift(&c.coeffs, &a.coeffs).unwrap();
            worst = g.iter().map(|z| z.norm()).fold(worst, f64::max);
        }
    }
    let converged = diags.iter().all(|d| d.converged);
    let support: Vec<String> = diags.iter().map(|d| format!("{:.3}", d.support_fraction)).collect();
    let localized = diags.iter().all(|d| d.support_fraction < 0.5);
    let secs = start.elapsed().as_secs_f64();
    report(
        8,
        "CPW modes",
        converged && worst <= 1e-7 && localized && secs < 120.0,
        format!(
            "4 modes converged={converged}, max shift-orthogonality violation {worst:.2e} (≤ 1e-7), support fractions [{}] (< 0.5), {secs:.2}s (< 120s)",
            support.join(", ")
        ),
    );
}

fn c09_infinite_mu() {
    let b = SopwBasis1D::new(8, 8).unwrap();
    let cfg = CpwConfig {
        mu: f64::INFINITY,
        ..CpwConfig::for_basis(&b)
    };
    let (_, d) = solve_cpw_mode(&CpwModeSet::new(&b), &cfg).unwrap();
    let exact: f64 = oracle_coeffs(8, 1, 0)
        .into_iter()
        .map(|(n, a)| 2.0 * (PI * n as f64 / 8.0).powi(2) * a.norm_sqr())
        .sum();
    let rel = (d.energy - exact).abs() / exact;
    report(
        9,
        "μ = ∞ consistency",
        d.converged && rel <= 1e-4,
        format!(
            "energy {:.8} vs J∞(θ¹) = {exact:.8}, relative difference {rel:.2e} (≤ 1e-4), converged={}",
            d.energy, d.converged
        ),
    );
}

fn c10_complexity() {
    let rep = run_bench(&BenchConfig::default()).unwrap();
    let parts: Vec<String> = rep
        .sections
        .iter()
        .map(|s| {
            let r: Vec<String> = s.ratios.iter().map(|q| format!("{q:.2}")).collect();
            format!("{} ratios [{}]", s.name, r.join(", "))
        })
        .collect();
    report(
        10,
        "complexity",
        rep.ratio_ok(),
        format!(
            "M = 2^14..2^20, max t(2M)/t(M) = {:.3} (≤ {RATIO_BOUND}); {}",
            rep.max_ratio(),
            parts.join("; ")
        ),
    );
}

fn main() -> ExitCode {
    let checks: [(u32, fn()); 10] = [
        (1, c01_sopw_orthonormality),
        (2, c02_projection_membership_and_minimality),
        (3, c03_realness),
        (4, c04_idempotence),
        (5, c05_deflated_projection),
        (6, c06_derivative_theorems),
        (7, c07_variational_certificate),
        (8, c08_cpw_modes),
        (9, c09_infinite_mu),
        (10, c10_complexity),
    ];
    for (id, check) in checks {
        if catch_unwind(check).is_err() {
            println!("criterion {id:>2} [FAIL] panicked");
            FAILED.store(true, Ordering::SeqCst);
        }
    }
    if FAILED.load(Ordering::SeqCst) {
        ExitCode::FAILURE
    } else {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    }
}
