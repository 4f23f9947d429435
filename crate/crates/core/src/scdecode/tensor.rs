use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joint distribution over 1 to 3 adjacent bit-lines.
///
/// Bit `k` of an index is the value of the `k`-th line from the left, so for
/// arity 3 index `0b110` means `(x1, x2, x3) = (0, 1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbTensor {
    arity: u8,
    values: [f64; 8],
}

impl ProbTensor {
    pub const MAX_ARITY: usize = 3;

    pub fn new(arity: usize, values: &[f64]) -> Result<Self> {
        if !(1..=Self::MAX_ARITY).contains(&arity) {
            return Err(Error::InvalidArgument(format!("tensor arity {arity} outside 1..=3")));
        }
        if values.len() != 1 << arity {
            return Err(Error::Dimension(format!(
                "arity {arity} needs {} values, got {}",
                1 << arity,
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("tensor entries must be finite and non-negative".into()));
        }
        let mut t = Self::zeros(arity);
        t.values[..values.len()].copy_from_slice(values);
        Ok(t)
    }

    /// Single-bit distribution `(p0, p1)`.
    pub fn bit(p0: f64, p1: f64) -> Self {
        let mut t = Self::zeros(1);
        t.values[0] = p0;
        t.values[1] = p1;
        t
    }

    pub fn zeros(arity: usize) -> Self {
        debug_assert!((1..=Self::MAX_ARITY).contains(&arity));
        ProbTensor {
            arity: arity as u8,
            values: [0.0; 8],
        }
    }

    /// The normalized uniform distribution ("e").
    pub fn uniform(arity: usize) -> Self {
        let mut t = Self::zeros(arity);
        let v = 1.0 / (1usize << arity) as f64;
        t.values[..1 << arity].fill(v);
        t
    }

    /// Point mass on one configuration.
    pub fn point(arity: usize, index: usize) -> Self {
        let mut t = Self::zeros(arity);
        t.values[index] = 1.0;
        t
    }

    pub(crate) fn from_raw(arity: u8, values: [f64; 8]) -> Self {
        ProbTensor { arity, values }
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn values(&self) -> &[f64] {
        &self.values[..1 << self.arity]
    }

    #[inline]
    pub(crate) fn raw(&self) -> &[f64; 8] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values()[index]
    }

    pub fn sum(&self) -> f64 {
        self.values().iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.sum() - 1.0).abs() <= 1e-12
    }

    /// Rescales to unit sum. Returns `false`, leaving the tensor untouched, when
    /// every entry is zero.
    #[inline]
    pub fn normalize(&mut self) -> bool {
        let s: f64 = self.values.iter().sum();
        if s > 0.0 && s.is_finite() {
            let inv = 1.0 / s;
            for v in &mut self.values {
                *v *= inv;
            }
            true
        } else {
            false
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// Marginal distribution of line `k` (0-based from the left).
    pub fn marginal(&self, k: usize) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (i, v) in self.values().iter().enumerate() {
            m[(i >> k) & 1] += v;
        }
        m
    }

    /// Unnormalized distribution of the leftmost line given the others, whose
    /// values are packed into `rest` (bit 0 of `rest` is line 2).
    #[inline]
    pub fn leftmost_given(&self, rest: usize) -> [f64; 2] {
        [self.values[rest << 1], self.values[(rest << 1) | 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(ProbTensor::new(0, &[1.0]).is_err());
        assert!(ProbTensor::new(2, &[1.0; 3]).is_err());
        assert!(ProbTensor::new(1, &[-0.1, 1.1]).is_err());
        assert!(ProbTensor::new(3, &[0.125; 8]).unwrap().is_normalized());
    }

    #[test]
    fn marginals_and_conditionals() {
        // index bit 0 is the leftmost line
        let t = ProbTensor::new(2, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let m0 = t.marginal(0);
        assert!((m0[0] - 0.4).abs() < 1e-15 && (m0[1] - 0.6).abs() < 1e-15);
        let m1 = t.marginal(1);
        assert!((m1[0] - 0.3).abs() < 1e-15 && (m1[1] - 0.7).abs() < 1e-15);
        assert_eq!(t.leftmost_given(1), [0.3, 0.4]);
    }

    #[test]
    fn normalize_zero_is_reported() {
        let mut z = ProbTensor::zeros(2);
        assert!(!z.normalize());
        let mut u = ProbTensor::new(1, &[2.0, 6.0]).unwrap();
        assert!(u.normalize());
        assert_eq!(u.values(), &[0.25, 0.75]);
    }
}
