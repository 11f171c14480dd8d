//! Closed-form displacements for the regularly driven (non-chaotic)
//! baselines: each planar block rotates at a constant rate `w`, so the
//! accumulated displacement is the exact integral
//!
//! ```text
//! z(t) = v * (e^{iwt} - 1) / (iw),
//! ```
//!
//! a circle of radius `|v| / |w|` through the origin. Even-dimensional
//! systems are direct sums of such blocks and stay bounded by
//! `2 sum |v_m| / |w_m|` forever; odd-dimensional systems add a fixed axis
//! along which the displacement grows exactly linearly (a corkscrew).

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_blocks(omegas: &[f64], v: &[Complex64]) -> Result<()> {
    if omegas.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: omegas.len(), got: v.len() });
    }
    for (index, w) in omegas.iter().enumerate() {
        if *w == 0.0 || !w.is_finite() {
            return Err(Error::ZeroRotationRate { index });
        }
    }
    Ok(())
}

/// Displacement of every planar block after time `t`.
pub fn regular_translation_even(omegas: &[f64], v: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    check_blocks(omegas, v)?;
    Ok(omegas
        .iter()
        .zip(v)
        .map(|(&w, &vm)| vm * (Complex64::cis(w * t) - 1.0) / (Complex64::i() * w))
        .collect())
}

/// Axis displacement (exactly `v_axis * t`) plus the planar blocks.
pub fn regular_translation_odd(
    v_axis: f64,
    omegas: &[f64],
    v: &[Complex64],
    t: f64,
) -> Result<(f64, Vec<Complex64>)> {
    let blocks = regular_translation_even(omegas, v, t)?;
    Ok((v_axis * t, blocks))
}

/// Worst-case displacement norm of the even system, `2 sum |v_m| / |w_m|`.
pub fn even_loop_bound(omegas: &[f64], v: &[Complex64]) -> Result<f64> {
    check_blocks(omegas, v)?;
    Ok(omegas.iter().zip(v).map(|(&w, vm)| 2.0 * vm.norm() / w.abs()).sum())
}
