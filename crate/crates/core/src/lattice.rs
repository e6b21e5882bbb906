//! Index geometry of coefficient tensors.
//!
//! A tensor on a [`LatticeDomain`] holds one complex coefficient per
//! (depth multi-index, shift multi-index) pair. Depth components are 1-based
//! (`1..=N[k]`), shift components are 0-based (`0..L[k]`). The flat layout
//! puts the depth axes outermost and the shift axes innermost, each group
//! row-major, so every depth index owns one contiguous slice of `ΠL` entries.

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LatticeDomain {
    shifts: Vec<usize>,
    depths: Vec<usize>,
}

/// A (depth; shift) multi-index. Depth components are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub depth: Vec<usize>,
    pub shift: Vec<usize>,
}

impl MultiIndex {
    pub fn new(depth: impl Into<Vec<usize>>, shift: impl Into<Vec<usize>>) -> Self {
        Self {
            depth: depth.into(),
            shift: shift.into(),
        }
    }
}

impl LatticeDomain {
    /// `shifts[k]` is the number of unit shifts per period along axis `k`,
    /// `depths[k]` the depth cap along the same axis.
    pub fn new(shifts: impl Into<Vec<usize>>, depths: impl Into<Vec<usize>>) -> Result<Self> {
        let shifts = shifts.into();
        let depths = depths.into();
        if shifts.is_empty() || shifts.len() > MAX_DIM {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1..={MAX_DIM}, got {}",
                shifts.len()
            )));
        }
        if shifts.len() != depths.len() {
            return Err(Error::InvalidDomain(format!(
                "{} shift counts but {} depth caps",
                shifts.len(),
                depths.len()
            )));
        }
        if shifts.contains(&0) || depths.contains(&0) {
            return Err(Error::InvalidDomain(
                "shift counts and depth caps must be positive".into(),
            ));
        }
        let total = shifts
            .iter()
            .chain(depths.iter())
            .try_fold(1usize, |acc, &x| acc.checked_mul(x));
        match total {
            Some(m) if m <= isize::MAX as usize / std::mem::size_of::<C64>() => {}
            _ => {
                return Err(Error::InvalidDomain(
                    "total size exceeds the addressable range".into(),
                ))
            }
        }
        Ok(Self { shifts, depths })
    }

    pub fn one_d(shifts: usize, depth: usize) -> Result<Self> {
        Self::new(vec![shifts], vec![depth])
    }

    pub fn dim(&self) -> usize {
        self.shifts.len()
    }

    pub fn shifts(&self) -> &[usize] {
        &self.shifts
    }

    pub fn depths(&self) -> &[usize] {
        &self.depths
    }

    /// `ΠL`, the number of shift multi-indices (and of B-transform frequencies).
    pub fn shift_count(&self) -> usize {
        self.shifts.iter().product()
    }

    /// `ΠN`, the number of depth multi-indices.
    pub fn depth_count(&self) -> usize {
        self.depths.iter().product()
    }

    /// Total number of coefficients `M = ΠN·ΠL`.
    pub fn len(&self) -> usize {
        self.shift_count() * self.depth_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flatten(&self, idx: &MultiIndex) -> Result<usize> {
        let d = self.dim();
        if idx.depth.len() != d || idx.shift.len() != d {
            return Err(Error::IndexOutOfRange(format!(
                "multi-index has dimension ({}, {}) but the domain has dimension {d}",
                idx.depth.len(),
                idx.shift.len()
            )));
        }
        let mut depth_flat = 0;
        for (k, (&i, &n)) in idx.depth.iter().zip(&self.depths).enumerate() {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange(format!(
                    "depth component {k} is {i}, expected 1..={n}"
                )));
            }
            depth_flat = depth_flat * n + (i - 1);
        }
        let shift_flat = self.flatten_shift(&idx.shift)?;
        Ok(depth_flat * self.shift_count() + shift_flat)
    }

    pub fn unflatten(&self, flat: usize) -> Result<MultiIndex> {
        if flat >= self.len() {
            return Err(Error::IndexOutOfRange(format!(
                "flat index {flat} outside 0..{}",
                self.len()
            )));
        }
        let pl = self.shift_count();
        let mut depth_flat = flat / pl;
        let shift = self.unflatten_shift(flat % pl);
        let mut depth = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            depth[k] = depth_flat % self.depths[k] + 1;
            depth_flat /= self.depths[k];
        }
        Ok(MultiIndex { depth, shift })
    }

    /// Row-major position of a shift multi-index inside a depth slice.
    pub fn flatten_shift(&self, shift: &[usize]) -> Result<usize> {
        if shift.len() != self.dim() {
            return Err(Error::IndexOutOfRange(format!(
                "shift vector has {} components, expected {}",
                shift.len(),
                self.dim()
            )));
        }
        let mut flat = 0;
        for (k, (&j, &l)) in shift.iter().zip(&self.shifts).enumerate() {
            if j >= l {
                return Err(Error::IndexOutOfRange(format!(
                    "shift component {k} is {j}, expected 0..{l}"
                )));
            }
            flat = flat * l + j;
        }
        Ok(flat)
    }

    pub fn unflatten_shift(&self, mut flat: usize) -> Vec<usize> {
        let mut shift = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            shift[k] = flat % self.shifts[k];
            flat /= self.shifts[k];
        }
        shift
    }

    /// Flat shift position of `j - s` (per-axis, modulo `L[k]`).
    fn shift_minus(&self, j: usize, s: &[usize]) -> usize {
        let mut rem = j;
        let mut parts = [0usize; MAX_DIM];
        for k in (0..self.dim()).rev() {
            parts[k] = rem % self.shifts[k];
            rem /= self.shifts[k];
        }
        let mut flat = 0;
        for k in 0..self.dim() {
            let l = self.shifts[k];
            flat = flat * l + (parts[k] + l - s[k] % l) % l;
        }
        flat
    }

    fn check_shift(&self, s: &[usize]) -> Result<()> {
        self.flatten_shift(s).map(|_| ())
    }
}

/// Complex coefficients over a [`LatticeDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    domain: LatticeDomain,
    data: Vec<C64>,
}

impl CoeffTensor {
    pub fn new(domain: LatticeDomain, data: Vec<C64>) -> Result<Self> {
        if data.len() != domain.len() {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Precondition(format!(
                "coefficient {pos} is not finite"
            )));
        }
        Ok(Self { domain, data })
    }

    /// Builds a tensor without the finiteness scan. Callers guarantee the
    /// length matches.
    pub(crate) fn from_parts(domain: LatticeDomain, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), domain.len());
        Self { domain, data }
    }

    pub fn zeros(domain: LatticeDomain) -> Self {
        let m = domain.len();
        Self::from_parts(domain, vec![C64::new(0.0, 0.0); m])
    }

    pub fn from_real(domain: LatticeDomain, values: &[f64]) -> Result<Self> {
        Self::new(domain, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Unit coefficient at `idx` scaled by `scale`.
    pub fn delta(domain: LatticeDomain, idx: &MultiIndex, scale: f64) -> Result<Self> {
        let pos = domain.flatten(idx)?;
        let mut t = Self::zeros(domain);
        t.data[pos] = C64::new(scale, 0.0);
        Ok(t)
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, idx: &MultiIndex) -> Result<C64> {
        Ok(self.data[self.domain.flatten(idx)?])
    }

    pub fn set(&mut self, idx: &MultiIndex, value: C64) -> Result<()> {
        let pos = self.domain.flatten(idx)?;
        self.data[pos] = value;
        Ok(())
    }

    /// Contiguous slice of the `ΠL` coefficients at flat depth index `depth`.
    pub fn depth_slice(&self, depth: usize) -> &[C64] {
        let pl = self.domain.shift_count();
        &self.data[depth * pl..(depth + 1) * pl]
    }

    /// Column over all depths at flat shift/frequency position `j`.
    pub fn column(&self, j: usize) -> Vec<C64> {
        let pl = self.domain.shift_count();
        self.data.iter().skip(j).step_by(pl).copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CoeffTensor) -> Result<C64> {
        ensure_same_domain(&self.domain, &other.domain)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn distance(&self, other: &CoeffTensor) -> Result<f64> {
        ensure_same_domain(&self.domain, &other.domain)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn max_abs_diff(&self, other: &CoeffTensor) -> Result<f64> {
        ensure_same_domain(&self.domain, &other.domain)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: C64) -> CoeffTensor {
        CoeffTensor::from_parts(
            self.domain.clone(),
            self.data.iter().map(|z| z * factor).collect(),
        )
    }

    /// `alpha·self + beta·other`.
    pub fn axpby(&self, alpha: C64, other: &CoeffTensor, beta: C64) -> Result<CoeffTensor> {
        ensure_same_domain(&self.domain, &other.domain)?;
        Ok(CoeffTensor::from_parts(
            self.domain.clone(),
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        ))
    }
}

pub(crate) fn ensure_same_domain(a: &LatticeDomain, b: &LatticeDomain) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DomainMismatch(format!(
            "L={:?} N={:?} vs L={:?} N={:?}",
            a.shifts(),
            a.depths(),
            b.shifts(),
            b.depths()
        )))
    }
}

/// Cyclic translation on the shift axes: `out(i; j) = v(i; j - s)`.
pub fn shift(v: &CoeffTensor, s: &[usize]) -> Result<CoeffTensor> {
    let domain = v.domain();
    domain.check_shift(s)?;
    let pl = domain.shift_count();
    let sources: Vec<usize> = (0..pl).map(|j| domain.shift_minus(j, s)).collect();
    let mut out = Vec::with_capacity(v.data.len());
    for slice in v.data.chunks(pl) {
        out.extend(sources.iter().map(|&src| slice[src]));
    }
    Ok(CoeffTensor::from_parts(domain.clone(), out))
}

/// Shift cross-correlation `c(t) = ⟨g, S(t) f⟩` for every flat shift `t`.
pub fn shift_correlation(g: &CoeffTensor, f: &CoeffTensor) -> Result<Vec<C64>> {
    ensure_same_domain(g.domain(), f.domain())?;
    let domain = g.domain();
    let pl = domain.shift_count();
    Ok((0..pl)
        .map(|t| {
            let t_vec = domain.unflatten_shift(t);
            let sources: Vec<usize> = (0..pl).map(|j| domain.shift_minus(j, &t_vec)).collect();
            g.data
                .chunks(pl)
                .zip(f.data.chunks(pl))
                .map(|(gs, fs)| {
                    sources
                        .iter()
                        .enumerate()
                        .map(|(j, &src)| gs[j].conj() * fs[src])
                        .sum::<C64>()
                })
                .sum()
        })
        .collect())
}

/// Matrix of shifted inner products `G(s', s) = ⟨S(s') g, S(s) f⟩`.
///
/// Inner products are invariant under a common shift, so every entry is
/// read off the correlation `⟨g, S(s - s') f⟩`.
pub fn gram_shift(g: &CoeffTensor, f: &CoeffTensor) -> Result<DMatrix<C64>> {
    let corr = shift_correlation(g, f)?;
    let domain = g.domain();
    let pl = domain.shift_count();
    let mut out = DMatrix::zeros(pl, pl);
    for sp in 0..pl {
        let sp_vec = domain.unflatten_shift(sp);
        for s in 0..pl {
            out[(sp, s)] = corr[domain.shift_minus(s, &sp_vec)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn flatten_examples() {
        let d = LatticeDomain::one_d(2, 1).unwrap();
        assert_eq!(d.flatten(&MultiIndex::new([1], [0])).unwrap(), 0);
        assert_eq!(d.flatten(&MultiIndex::new([1], [1])).unwrap(), 1);
        let d = LatticeDomain::one_d(2, 2).unwrap();
        assert_eq!(d.flatten(&MultiIndex::new([2], [0])).unwrap(), 2);
    }

    #[test]
    fn flatten_round_trip_2d() {
        let d = LatticeDomain::new([2, 2], [2, 2]).unwrap();
        for flat in 0..16 {
            let idx = d.unflatten(flat).unwrap();
            assert_eq!(d.flatten(&idx).unwrap(), flat);
        }
    }

    #[test]
    fn flatten_rejects_out_of_range() {
        let d = LatticeDomain::one_d(3, 2).unwrap();
        assert!(matches!(
            d.flatten(&MultiIndex::new([0], [0])),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(d.flatten(&MultiIndex::new([3], [0])).is_err());
        assert!(d.flatten(&MultiIndex::new([1], [3])).is_err());
        assert!(d.unflatten(6).is_err());
    }

    #[test]
    fn domain_validation() {
        assert!(LatticeDomain::new(Vec::<usize>::new(), Vec::<usize>::new()).is_err());
        assert!(LatticeDomain::new([1, 1, 1, 1], [1, 1, 1, 1]).is_err());
        assert!(LatticeDomain::new([2], [0]).is_err());
        assert!(LatticeDomain::new([2, 2], [1]).is_err());
        assert!(LatticeDomain::new([usize::MAX, 4], [1, 1]).is_err());
    }

    #[test]
    fn tensor_rejects_non_finite() {
        let d = LatticeDomain::one_d(2, 1).unwrap();
        assert!(CoeffTensor::new(d.clone(), vec![c(1.0)]).is_err());
        assert!(CoeffTensor::new(d, vec![c(1.0), c(f64::NAN)]).is_err());
    }

    #[test]
    fn shift_rotates() {
        let d = LatticeDomain::one_d(3, 1).unwrap();
        let v = CoeffTensor::from_real(d, &[1.0, 2.0, 3.0]).unwrap();
        let s = shift(&v, &[1]).unwrap();
        assert_eq!(s.data(), &[c(3.0), c(1.0), c(2.0)]);
        assert_eq!(shift(&v, &[0]).unwrap(), v);
        assert_eq!(shift(&s, &[2]).unwrap(), v);
        assert!(shift(&v, &[3]).is_err());
    }

    #[test]
    fn gram_of_delta_is_identity() {
        let d = LatticeDomain::one_d(2, 1).unwrap();
        let f = CoeffTensor::delta(d.clone(), &MultiIndex::new([1], [0]), 1.0).unwrap();
        let g = gram_shift(&f, &f).unwrap();
        assert_eq!(g, DMatrix::identity(2, 2));
        let zero = CoeffTensor::zeros(d);
        assert_eq!(gram_shift(&zero, &f).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn gram_rejects_mismatch() {
        let a = CoeffTensor::zeros(LatticeDomain::one_d(2, 1).unwrap());
        let b = CoeffTensor::zeros(LatticeDomain::one_d(2, 2).unwrap());
        assert!(matches!(gram_shift(&a, &b), Err(Error::DomainMismatch(_))));
    }
}
