//! Diffusion classification from a fitted growth exponent.
//!
//! Labels: `bounded`, `diffusive`, `superdiffusive`, `ballistic`, and
//! `inconclusive`, with a `drift+` prefix on the two diffusion labels when
//! the run carries a statistically significant linear drift. Bands:
//!
//! * exponent in [0.42, 0.58]  -> diffusive
//! * exponent in [0.60, 0.95]  -> superdiffusive
//! * exponent  >  0.97         -> ballistic
//! * exponent  <  0.10         -> bounded
//!
//! and a fit whose standard error reaches 0.05 is `inconclusive` regardless
//! of the point estimate, as are the gaps between the bands. Bounded paths
//! are additionally caught by a direct growth test on the statistic curve
//! (the maximum over the later half of the fit grid must exceed the earlier
//! maximum by at least 10%), because an oscillating bounded statistic can
//! produce a noisy near-zero slope whose stderr alone would read as
//! inconclusive.

use skewsim::stats::ScalingFit;

pub const DIFFUSIVE_BAND: (f64, f64) = (0.42, 0.58);
pub const SUPERDIFFUSIVE_BAND: (f64, f64) = (0.60, 0.95);
pub const BALLISTIC_MIN: f64 = 0.97;
pub const BOUNDED_MAX: f64 = 0.10;
pub const MAX_STDERR: f64 = 0.05;
/// Growth factor between the two halves of the fit grid under which a
/// sub-diffusive-looking statistic is declared bounded outright.
pub const BOUNDED_GROWTH_FACTOR: f64 = 1.1;

/// `series` is the fitted statistic sampled on the fit grid (steps
/// ascending); `drift_significant` reports whether a nonzero drift was
/// detected (and removed) before the fit.
pub fn classify(fit: &ScalingFit, series: &[(u64, f64)], drift_significant: bool) -> String {
    if is_bounded_series(series) && fit.exponent < DIFFUSIVE_BAND.0 {
        return "bounded".into();
    }
    if !(fit.exponent_stderr < MAX_STDERR) {
        return "inconclusive".into();
    }
    let e = fit.exponent;
    let base = if e > BALLISTIC_MIN {
        "ballistic"
    } else if e >= DIFFUSIVE_BAND.0 && e <= DIFFUSIVE_BAND.1 {
        "diffusive"
    } else if e >= SUPERDIFFUSIVE_BAND.0 && e <= SUPERDIFFUSIVE_BAND.1 {
        "superdiffusive"
    } else if e < BOUNDED_MAX {
        "bounded"
    } else {
        "inconclusive"
    };
    if drift_significant && (base == "diffusive" || base == "superdiffusive") {
        return format!("drift+{base}");
    }
    base.into()
}

fn is_bounded_series(series: &[(u64, f64)]) -> bool {
    if series.len() < 4 {
        return false;
    }
    let mid = series.len() / 2;
    let max_of = |part: &[(u64, f64)]| part.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    let early = max_of(&series[..mid]);
    let late = max_of(&series[mid..]);
    early.is_finite() && late.is_finite() && late <= BOUNDED_GROWTH_FACTOR * early
}
