//! One discrete step of each skew product.
//!
//! Every stepper advances the state in the same fixed order:
//!
//! 1. add the translation increment, evaluated at the *current* shape point
//!    and the *current* rotation state;
//! 2. advance the rotation state using the current shape point;
//! 3. advance the shape point with the interval map.
//!
//! so after `n` steps `p(n) = sum_{j<n} A_j v(x_j)` with `A_j` the rotation
//! accumulated over the first `j` steps (`A_0` = identity unless the caller
//! seeds a different initial frame). With the rotation held at the identity
//! the planar stepper reproduces the plain translation stepper bitwise —
//! `cos 0 = 1` and `sin 0 = 0` are exact, and multiplying by them is exact —
//! which pins the reduction between the two groups down to the last bit.

use std::f64::consts::TAU;

use crate::error::Result;
use crate::map::PmMap;
use crate::observable::{AffineObservable, AxisRate, PlanarRate};
use crate::rotation::{mat_mul, mat_vec, orthogonality_error, renormalize_rotation, so3_exp, Mat3, IDENTITY};

/// Rotation part of the state: nothing, a planar angle, or a full matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum RotationState {
    None,
    /// Angle stored reduced to `[0, 2pi)`.
    Planar(f64),
    Spatial(Mat3),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkewProductState {
    pub x: f64,
    pub rot: RotationState,
    pub p: Vec<f64>,
}

impl SkewProductState {
    /// Re-orthonormalize a spatial rotation state in place. No-op for the
    /// other groups. Long products should call this every ~1e3 steps; the
    /// ensemble runner does.
    pub fn renormalize_rotation(&mut self) -> Result<()> {
        if let RotationState::Spatial(r) = &mut self.rot {
            *r = renormalize_rotation(r)?;
        }
        Ok(())
    }

    pub fn rotation_defect(&self) -> f64 {
        match &self.rot {
            RotationState::Spatial(r) => orthogonality_error(r),
            _ => 0.0,
        }
    }
}

/// Reduce an angle to `[0, 2pi)` by subtracting/adding whole turns.
/// The subtractions are exact in floating point for the magnitudes reached
/// by one update, so reducing does not perturb the accumulated angle.
#[inline]
pub fn reduce_angle(mut theta: f64) -> f64 {
    while theta >= TAU {
        theta -= TAU;
    }
    while theta < 0.0 {
        theta += TAU;
    }
    theta
}

/// A compiled stepper: the map plus the observables of one skew product,
/// with whatever can be precomputed (the rotation increment, when constant)
/// already in place.
#[derive(Debug, Clone)]
pub enum Stepper {
    Anisotropic {
        map: PmMap,
        phi: AffineObservable,
    },
    EuclideanPlane {
        map: PmMap,
        v: AffineObservable,
        h: PlanarRate,
    },
    EuclideanSpace {
        map: PmMap,
        v: AffineObservable,
        omega: AxisRate,
        /// `exp(omega)` precomputed when the generator is x-independent.
        constant_rotation: Option<Mat3>,
    },
}

impl Stepper {
    pub fn anisotropic(map: PmMap, phi: AffineObservable) -> Self {
        Stepper::Anisotropic { map, phi }
    }

    pub fn euclidean_plane(map: PmMap, v: AffineObservable, h: PlanarRate) -> Result<Self> {
        if v.dim() != 2 {
            return Err(crate::error::Error::DimensionMismatch { expected: 2, got: v.dim() });
        }
        Ok(Stepper::EuclideanPlane { map, v, h })
    }

    pub fn euclidean_space(map: PmMap, v: AffineObservable, omega: AxisRate) -> Result<Self> {
        if v.dim() != 3 {
            return Err(crate::error::Error::DimensionMismatch { expected: 3, got: v.dim() });
        }
        let constant_rotation = omega.is_constant().then(|| so3_exp(omega.a));
        Ok(Stepper::EuclideanSpace { map, v, omega, constant_rotation })
    }

    pub fn dim(&self) -> usize {
        match self {
            Stepper::Anisotropic { phi, .. } => phi.dim(),
            Stepper::EuclideanPlane { .. } => 2,
            Stepper::EuclideanSpace { .. } => 3,
        }
    }

    /// Fresh state at shape point `x0`: zero translation, identity rotation.
    pub fn initial_state(&self, x0: f64) -> SkewProductState {
        let rot = match self {
            Stepper::Anisotropic { .. } => RotationState::None,
            Stepper::EuclideanPlane { .. } => RotationState::Planar(0.0),
            Stepper::EuclideanSpace { .. } => RotationState::Spatial(IDENTITY),
        };
        SkewProductState { x: x0, rot, p: vec![0.0; self.dim()] }
    }

    #[inline]
    pub fn step(&self, s: &mut SkewProductState) {
        match self {
            Stepper::Anisotropic { map, phi } => {
                let x = s.x;
                let (a, b) = phi.coefficients();
                for i in 0..s.p.len() {
                    s.p[i] += a[i] + b[i] * x;
                }
                s.x = map.apply(x);
            }
            Stepper::EuclideanPlane { map, v, h } => {
                let x = s.x;
                let theta = match &mut s.rot {
                    RotationState::Planar(t) => t,
                    _ => unreachable!("planar stepper requires planar rotation state"),
                };
                let (a, b) = v.coefficients();
                let v0 = a[0] + b[0] * x;
                let v1 = a[1] + b[1] * x;
                let (sin_t, cos_t) = theta.sin_cos();
                s.p[0] += cos_t * v0 - sin_t * v1;
                s.p[1] += sin_t * v0 + cos_t * v1;
                *theta = reduce_angle(*theta + h.eval(x));
                s.x = map.apply(x);
            }
            Stepper::EuclideanSpace { map, v, omega, constant_rotation } => {
                let x = s.x;
                let r = match &mut s.rot {
                    RotationState::Spatial(r) => r,
                    _ => unreachable!("spatial stepper requires spatial rotation state"),
                };
                let (a, b) = v.coefficients();
                let inc = [a[0] + b[0] * x, a[1] + b[1] * x, a[2] + b[2] * x];
                let rotated = mat_vec(r, &inc);
                s.p[0] += rotated[0];
                s.p[1] += rotated[1];
                s.p[2] += rotated[2];
                let g = match constant_rotation {
                    Some(g) => *g,
                    None => so3_exp(omega.eval(x)),
                };
                *r = mat_mul(r, &g);
                s.x = map.apply(x);
            }
        }
    }
}
