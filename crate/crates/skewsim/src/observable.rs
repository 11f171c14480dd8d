//! Observables entering the translation part of a skew product.
//!
//! All observables are affine in the shape coordinate, `a + b x` evaluated
//! componentwise; that family covers the constant and `1 + x` choices used
//! throughout while keeping evaluation branch-free in the hot loop.

use crate::error::{Error, Result};

/// A vector-valued affine observable `x -> a + b x` (componentwise).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineObservable {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl AffineObservable {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidConfig("observable must have dimension >= 1".into()));
        }
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
        }
        if a.iter().chain(b.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("observable coefficients must be finite".into()));
        }
        Ok(AffineObservable { a, b })
    }

    pub fn constant(a: Vec<f64>) -> Result<Self> {
        let b = vec![0.0; a.len()];
        Self::new(a, b)
    }

    /// The default observable `1 + x` in every component.
    pub fn one_plus_x(dim: usize) -> Self {
        AffineObservable { a: vec![1.0; dim], b: vec![1.0; dim] }
    }

    pub fn zero(dim: usize) -> Self {
        AffineObservable { a: vec![0.0; dim], b: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn coefficients(&self) -> (&[f64], &[f64]) {
        (&self.a, &self.b)
    }

    #[inline]
    pub fn component(&self, i: usize, x: f64) -> f64 {
        self.a[i] + self.b[i] * x
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        (0..self.dim()).map(|i| self.component(i, x)).collect()
    }

    /// Evaluate into a caller-provided buffer (hot-loop form, no allocation).
    #[inline]
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        for i in 0..out.len() {
            out[i] = self.a[i] + self.b[i] * x;
        }
    }
}

/// Scalar rotation rate for the planar group, radians per step: `h(x) = a + b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarRate {
    pub a: f64,
    pub b: f64,
}

impl PlanarRate {
    pub fn constant(c0: f64) -> Self {
        PlanarRate { a: c0, b: 0.0 }
    }

    pub fn zero() -> Self {
        PlanarRate { a: 0.0, b: 0.0 }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.a + self.b * x
    }
}

/// Angular-velocity generator for the spatial group, radians per step:
/// `omega(x) = a + b x` componentwise in so(3) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRate {
    pub a: [f64; 3],
    pub b: [f64; 3],
}

impl AxisRate {
    pub fn constant(omega: [f64; 3]) -> Self {
        AxisRate { a: omega, b: [0.0; 3] }
    }

    /// Rate of 1 rad/step about the diagonal axis (1,1,1)/sqrt(3).
    pub fn default_diagonal() -> Self {
        let s = 1.0 / 3f64.sqrt();
        AxisRate::constant([s, s, s])
    }

    pub fn is_constant(&self) -> bool {
        self.b == [0.0; 3]
    }

    #[inline]
    pub fn eval(&self, x: f64) -> [f64; 3] {
        [
            self.a[0] + self.b[0] * x,
            self.a[1] + self.b[1] * x,
            self.a[2] + self.b[2] * x,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_plus_x_values() {
        let phi = AffineObservable::one_plus_x(1);
        assert_eq!(phi.eval(0.0), vec![1.0]);
        assert_eq!(phi.eval(0.5), vec![1.5]);
        assert_eq!(phi.eval(1.0), vec![2.0]);
    }

    #[test]
    fn constant_rate() {
        let h = PlanarRate::constant(1.0);
        assert_eq!(h.eval(0.0), 1.0);
        assert_eq!(h.eval(0.73), 1.0);
        let h0 = PlanarRate::zero();
        assert_eq!(h0.eval(0.9), 0.0);
    }

    #[test]
    fn eval_into_matches_eval() {
        let v = AffineObservable::new(vec![1.0, -2.0, 0.5], vec![0.0, 3.0, -1.0]).unwrap();
        let mut buf = [0.0; 3];
        v.eval_into(0.25, &mut buf);
        assert_eq!(buf.to_vec(), v.eval(0.25));
    }

    #[test]
    fn dimension_checks() {
        let err = AffineObservable::new(vec![1.0, 2.0], vec![0.0]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, got: 1 });
        assert!(AffineObservable::new(vec![], vec![]).is_err());
        assert!(AffineObservable::new(vec![f64::INFINITY], vec![0.0]).is_err());
    }

    #[test]
    fn default_diagonal_axis_is_unit_rate() {
        let w = AxisRate::default_diagonal();
        assert!(w.is_constant());
        let v = w.eval(0.4);
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        assert!((norm - 1.0).abs() < 1e-15);
    }
}
