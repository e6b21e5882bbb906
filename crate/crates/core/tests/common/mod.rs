#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use shiftorth::{CoeffTensor, LatticeDomain, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_tensor(domain: &LatticeDomain, rng: &mut ChaCha8Rng) -> CoeffTensor {
    let data = (0..domain.len())
        .map(|_| C64::new(normal(rng), normal(rng)))
        .collect();
    CoeffTensor::new(domain.clone(), data).unwrap()
}

pub fn random_real_tensor(domain: &LatticeDomain, rng: &mut ChaCha8Rng) -> CoeffTensor {
    let data: Vec<f64> = (0..domain.len()).map(|_| normal(rng)).collect();
    CoeffTensor::from_real(domain.clone(), &data).unwrap()
}

/// Random domain with `d ≤ max_dim` and `M ≤ max_len`.
pub fn random_domain(rng: &mut ChaCha8Rng, max_dim: usize, max_len: usize) -> LatticeDomain {
    loop {
        let d = rng.random_range(1..=max_dim);
        let shifts: Vec<usize> = (0..d).map(|_| rng.random_range(1..=6)).collect();
        let depths: Vec<usize> = (0..d).map(|_| rng.random_range(1..=4)).collect();
        let dom = LatticeDomain::new(shifts, depths).unwrap();
        if dom.len() <= max_len {
            return dom;
        }
    }
}

/// All multi-indices `0..dims[0] × … ` in row-major order.
pub fn multi_range(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in dims {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

/// `B(v)` by direct summation over every shift, as `[depth][frequency]`.
pub fn direct_b(v: &CoeffTensor) -> Vec<Vec<C64>> {
    let dom = v.domain();
    let shifts = multi_range(dom.shifts());
    let pl = shifts.len();
    (0..dom.depth_count())
        .map(|i| {
            shifts
                .iter()
                .map(|j| {
                    let mut acc = C64::new(0.0, 0.0);
                    for (li, l) in shifts.iter().enumerate() {
                        let phase: f64 = j
                            .iter()
                            .zip(l)
                            .zip(dom.shifts())
                            .map(|((&a, &b), &n)| (a * b) as f64 / n as f64)
                            .sum();
                        acc += C64::from_polar(1.0, 2.0 * PI * phase) * v.data()[i * pl + li];
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `⟨g, S(s) f⟩` with `S(s)f(i; j) = f(i; j − s)`, by explicit loops.
pub fn shift_inner_direct(g: &CoeffTensor, f: &CoeffTensor, s: &[usize]) -> C64 {
    let dom = g.domain();
    let shifts = multi_range(dom.shifts());
    let pl = shifts.len();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..dom.depth_count() {
        for (ji, j) in shifts.iter().enumerate() {
            let src: Vec<usize> = j
                .iter()
                .zip(s)
                .zip(dom.shifts())
                .map(|((&a, &b), &n)| (a + n - b % n) % n)
                .collect();
            let si = shifts.iter().position(|q| *q == src).unwrap();
            acc += g.data()[i * pl + ji].conj() * f.data()[i * pl + si];
        }
    }
    acc
}

/// `max_s |⟨v, S(s)v⟩ − δ_{s0}|`.
pub fn membership_violation(v: &CoeffTensor) -> f64 {
    multi_range(v.domain().shifts())
        .iter()
        .map(|s| {
            let delta = if s.iter().all(|&x| x == 0) { 1.0 } else { 0.0 };
            (shift_inner_direct(v, v, s) - delta).norm()
        })
        .fold(0.0, f64::max)
}

/// `max_s |⟨g, S(s)f⟩|`.
pub fn perpendicular_violation(g: &CoeffTensor, f: &CoeffTensor) -> f64 {
    multi_range(g.domain().shifts())
        .iter()
        .map(|s| shift_inner_direct(g, f, s).norm())
        .fold(0.0, f64::max)
}

/// Fourier coefficients of `θ^k_j` written straight from the shell
/// definition, independent of the library tables.
pub fn oracle_coeffs(l: usize, k: usize, j: usize) -> Vec<(i64, C64)> {
    let lf = l as f64;
    let half = l as i64 / 2;
    let (lo, hi) = ((k as i64 - 1) * half, k as i64 * half);
    let mut out = Vec::new();
    for n in -hi..=hi {
        let a = n.abs();
        if a < lo {
            continue;
        }
        let edge = a == hi || (k > 1 && a == lo);
        let w = if edge { (2.0 * lf).sqrt().recip() } else { lf.sqrt().recip() };
        let unit = C64::new(0.0, if n < 0 { -1.0 } else { 1.0 });
        let phase = if k == 1 { C64::new(1.0, 0.0) } else { unit.powi(k as i32 - 1) };
        let omega = C64::from_polar(1.0, -2.0 * PI * j as f64 * n as f64 / lf);
        out.push((n, phase * omega * w));
    }
    out
}

/// `θ^k_j(x)` by summing its Fourier series.
pub fn theta_by_summation(l: usize, k: usize, j: usize, x: f64) -> C64 {
    let lf = l as f64;
    oracle_coeffs(l, k, j)
        .into_iter()
        .map(|(n, a)| a * C64::from_polar(1.0 / lf.sqrt(), 2.0 * PI * n as f64 * x / lf))
        .sum()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
