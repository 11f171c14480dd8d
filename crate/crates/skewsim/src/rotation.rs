//! Minimal SO(3) toolbox: Rodrigues exponential, orthogonality diagnostics,
//! and re-orthonormalization for long products of rotation increments.
//!
//! Matrices are plain row-major `[[f64; 3]; 3]` arrays; the handful of
//! operations needed here does not justify a linear-algebra dependency.

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Below this angle the exponential is indistinguishable from the identity
/// at f64 precision even over the longest runs we take.
pub const SO3_EXP_ZERO_ANGLE: f64 = 1e-30;

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

#[inline]
pub fn mat_vec(r: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    [
        r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
        r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
        r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
    ]
}

pub fn transpose(r: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = r[j][i];
        }
    }
    out
}

pub fn determinant(r: &Mat3) -> f64 {
    r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
        - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
}

/// Max-norm of `R^T R - I`; zero iff `R` has exactly orthonormal columns.
pub fn orthogonality_error(r: &Mat3) -> f64 {
    let g = mat_mul(&transpose(r), r);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[i][j] - target).abs());
        }
    }
    worst
}

/// Rotation by the vector `omega` (axis `omega/|omega|`, angle `|omega|`),
/// via the Rodrigues formula. Angles below [`SO3_EXP_ZERO_ANGLE`] return the
/// identity exactly.
pub fn so3_exp(omega: [f64; 3]) -> Mat3 {
    let theta = (omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2]).sqrt();
    if theta < SO3_EXP_ZERO_ANGLE {
        return IDENTITY;
    }
    let (kx, ky, kz) = (omega[0] / theta, omega[1] / theta, omega[2] / theta);
    let (s, c) = theta.sin_cos();
    let v = 1.0 - c;
    [
        [c + kx * kx * v, kx * ky * v - kz * s, kx * kz * v + ky * s],
        [ky * kx * v + kz * s, c + ky * ky * v, ky * kz * v - kx * s],
        [kz * kx * v - ky * s, kz * ky * v + kx * s, c + kz * kz * v],
    ]
}

/// Project a near-rotation back onto SO(3).
///
/// Uses the Newton–Schulz iteration `X <- X (3I - X^T X) / 2`, which
/// converges quadratically to the orthogonal polar factor (the nearest
/// orthogonal matrix) for inputs within ~0.3 of orthogonality in max-norm.
/// The returned matrix satisfies `orthogonality_error(R') <= 1e-14` and
/// `det R' > 0`; inputs with a near-zero column or negative determinant are
/// rejected rather than silently reflected.
pub fn renormalize_rotation(r: &Mat3) -> Result<Mat3> {
    for j in 0..3 {
        let col_norm2 = r[0][j] * r[0][j] + r[1][j] * r[1][j] + r[2][j] * r[2][j];
        if !(col_norm2 > 0.25) {
            return Err(Error::DegenerateRotation {
                reason: format!("column {j} has norm {:.3e}", col_norm2.sqrt()),
            });
        }
    }
    if determinant(r) <= 0.0 {
        return Err(Error::DegenerateRotation {
            reason: format!("determinant {:.3e} is not positive", determinant(r)),
        });
    }
    let mut x = *r;
    for _ in 0..12 {
        if orthogonality_error(&x) <= 1e-15 {
            break;
        }
        let g = mat_mul(&transpose(&x), &x);
        // x * (3I - g) / 2
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 3.0 } else { 0.0 };
                h[i][j] = 0.5 * (target - g[i][j]);
            }
        }
        x = mat_mul(&x, &h);
    }
    if orthogonality_error(&x) > 1e-14 {
        return Err(Error::DegenerateRotation {
            reason: format!("renormalization stalled at error {:.3e}", orthogonality_error(&x)),
        });
    }
    Ok(x)
}
