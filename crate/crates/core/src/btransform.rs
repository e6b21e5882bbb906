//! The B-transform: for every depth index, a d-dimensional DFT over the
//! shift axes,
//!
//! ```text
//! B(v)(i; j) = Σ_ℓ exp(+i2π Σ_k j_k ℓ_k / L_k) · v(i; ℓ)
//! ```
//!
//! and its inverse `B⁻¹(p)(i; j) = (1/ΠL) Σ_ℓ exp(−i2π Σ_k j_k ℓ_k / L_k) · p(i; ℓ)`.
//! The forward transform is an unnormalised inverse FFT per depth slice.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::{CoeffTensor, LatticeDomain, Parallelism, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    /// `exp(+i…)`, unnormalised.
    Forward,
    /// `exp(−i…)`, scaled by `1/ΠL`.
    Inverse,
}

/// FFT plans for the shift axes of one domain.
#[derive(Clone)]
pub struct BTransform {
    domain: LatticeDomain,
    // exp(+i...) along each axis
    plus: Vec<Arc<dyn Fft<f64>>>,
    // exp(-i...) along each axis
    minus: Vec<Arc<dyn Fft<f64>>>,
    exec: Parallelism,
}

impl std::fmt::Debug for BTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BTransform")
            .field("domain", &self.domain)
            .field("exec", &self.exec)
            .finish()
    }
}

struct Scratch {
    line: Vec<C64>,
    fft: Vec<C64>,
}

impl BTransform {
    pub fn new(domain: &LatticeDomain) -> Self {
        Self::with_parallelism(domain, Parallelism::default())
    }

    pub fn with_parallelism(domain: &LatticeDomain, exec: Parallelism) -> Self {
        let mut planner = FftPlanner::new();
        let plus = domain
            .shifts()
            .iter()
            .map(|&l| planner.plan_fft_inverse(l))
            .collect();
        let minus = domain
            .shifts()
            .iter()
            .map(|&l| planner.plan_fft_forward(l))
            .collect();
        Self {
            domain: domain.clone(),
            plus,
            minus,
            exec,
        }
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn parallelism(&self) -> Parallelism {
        self.exec
    }

    /// Applies `B` to a tensor on this transform's domain.
    ///
    /// # Panics
    /// If `v` lives on a different domain.
    pub fn forward(&self, v: &CoeffTensor) -> CoeffTensor {
        let mut data = v.data().to_vec();
        self.forward_in_place(&mut data);
        self.wrap(v, data)
    }

    /// Applies `B⁻¹`.
    ///
    /// # Panics
    /// If `p` lives on a different domain.
    pub fn inverse(&self, p: &CoeffTensor) -> CoeffTensor {
        let mut data = p.data().to_vec();
        self.inverse_in_place(&mut data);
        self.wrap(p, data)
    }

    fn wrap(&self, src: &CoeffTensor, data: Vec<C64>) -> CoeffTensor {
        assert_eq!(
            src.domain(),
            &self.domain,
            "tensor domain does not match the transform"
        );
        CoeffTensor::from_parts(self.domain.clone(), data)
    }

    pub(crate) fn forward_in_place(&self, data: &mut [C64]) {
        self.apply(data, Direction::Forward);
    }

    pub(crate) fn inverse_in_place(&self, data: &mut [C64]) {
        self.apply(data, Direction::Inverse);
    }

    /// `B⁻¹` with `pre(depth, slice)` run on each depth slice just before its
    /// transform, while the slice is hot in cache.
    pub(crate) fn inverse_in_place_with<F>(&self, data: &mut [C64], pre: F)
    where
        F: Fn(usize, &mut [C64]) + Sync,
    {
        self.apply_with(data, Direction::Inverse, pre);
    }

    fn apply(&self, data: &mut [C64], dir: Direction) {
        self.apply_with(data, dir, |_, _| {});
    }

    fn apply_with<F>(&self, data: &mut [C64], dir: Direction, pre: F)
    where
        F: Fn(usize, &mut [C64]) + Sync,
    {
        let pl = self.domain.shift_count();
        assert_eq!(data.len(), self.domain.len());
        let plans = match dir {
            Direction::Forward => &self.plus,
            Direction::Inverse => &self.minus,
        };
        let scale = match dir {
            Direction::Forward => None,
            Direction::Inverse => Some(1.0 / pl as f64),
        };
        let shifts = self.domain.shifts();
        let max_l = shifts.iter().copied().max().unwrap_or(1);
        let scratch_len = plans
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        self.exec.for_each_chunk(
            data,
            pl,
            || Scratch {
                line: vec![C64::new(0.0, 0.0); max_l],
                fft: vec![C64::new(0.0, 0.0); scratch_len],
            },
            |depth, slice, scratch| {
                pre(depth, slice);
                transform_slice(slice, shifts, plans, scratch);
                if let Some(s) = scale {
                    slice.iter_mut().for_each(|z| *z *= s);
                }
            },
        );
    }
}

/// Multi-dimensional FFT of one row-major slice, axis by axis.
fn transform_slice(
    slice: &mut [C64],
    shifts: &[usize],
    plans: &[Arc<dyn Fft<f64>>],
    scratch: &mut Scratch,
) {
    let total = slice.len();
    for (axis, plan) in plans.iter().enumerate() {
        let len = shifts[axis];
        if len == 1 {
            continue;
        }
        let stride: usize = shifts[axis + 1..].iter().product();
        if stride == 1 {
            plan.process_with_scratch(slice, &mut scratch.fft);
            continue;
        }
        let block = len * stride;
        let line = &mut scratch.line[..len];
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (t, z) in line.iter_mut().enumerate() {
                    *z = slice[base + t * stride];
                }
                plan.process_with_scratch(line, &mut scratch.fft);
                for (t, z) in line.iter().enumerate() {
                    slice[base + t * stride] = *z;
                }
            }
        }
    }
}

/// `B(v)` with freshly planned FFTs.
pub fn b_transform(v: &CoeffTensor) -> CoeffTensor {
    BTransform::new(v.domain()).forward(v)
}

/// `B⁻¹(p)` with freshly planned FFTs.
pub fn b_inverse(p: &CoeffTensor) -> CoeffTensor {
    BTransform::new(p.domain()).inverse(p)
}
