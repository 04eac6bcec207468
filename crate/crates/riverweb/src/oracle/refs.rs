//! Closed-form reference laws for the limit functionals.
//!
//! These are the analytically known pieces against which both the lattice
//! experiments and the walk-based Monte Carlo tables are checked: the
//! Rayleigh law of the meander endpoint, the theta-series distribution of
//! the excursion maximum, the Airy-type right-tail asymptotic of the
//! excursion area, and the `1/√(πt)` density-at-the-diagonal profile that
//! governs lattice site-survival counts.

use super::OracleError;

/// `E` of the meander value at time 1 — the Rayleigh mean `√(π/2)`.
pub const MEANDER_ENDPOINT_MEAN: f64 = 1.2533141373155003;

/// `E` of the excursion maximum; coincidentally also `√(π/2)`.
pub const EXCURSION_MAX_MEAN: f64 = 1.2533141373155003;

/// `E` of the excursion area, `√(π/8)`.
pub const EXCURSION_AREA_MEAN: f64 = 0.6266570686577501;

/// `1/√π`.
pub const INV_SQRT_PI: f64 = 0.5641895835477563;

/// Rayleigh survival function `P(R > x) = exp(−x²/2)` (unit scale); the law
/// of the meander at time 1.
pub fn ref_rayleigh_sf(x: f64) -> f64 {
    (-x * x / 2.0).exp()
}

/// Distribution function of the excursion maximum,
/// `P(M ≤ x) = 1 + 2 Σ_{k≥1} (1 − (2kx)²)·e^{−(2kx)²/2}`,
/// truncated once the summand drops below `1e−16` (tail < `1e−12` for all
/// `x` of interest). Errors on `x ≤ 0`, where the series does not apply.
pub fn ref_excursion_max_cdf(x: f64) -> Result<f64, OracleError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(OracleError::DomainError(x));
    }
    let mut sum = 0.0f64;
    for k in 1..10_000u64 {
        let u2 = (2.0 * k as f64 * x).powi(2);
        let term = (1.0 - u2) * (-u2 / 2.0).exp();
        sum += term;
        if u2 > 2.0 && term.abs() < 1e-16 {
            break;
        }
    }
    Ok((1.0 + 2.0 * sum).clamp(0.0, 1.0))
}

/// Density of the excursion maximum, the term-by-term derivative of
/// [`ref_excursion_max_cdf`]:
/// `f(x) = 8 Σ_{k≥1} k²x·(4k²x² − 3)·e^{−2k²x²}`.
pub fn ref_excursion_max_pdf(x: f64) -> Result<f64, OracleError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(OracleError::DomainError(x));
    }
    let mut sum = 0.0f64;
    for k in 1..10_000u64 {
        let k2 = (k * k) as f64;
        let e = (-2.0 * k2 * x * x).exp();
        let term = k2 * x * (4.0 * k2 * x * x - 3.0) * e;
        sum += term;
        if 2.0 * k2 * x * x > 2.0 && term.abs() < 1e-16 {
            break;
        }
    }
    Ok(8.0 * sum)
}

/// Leading right-tail asymptotic of the excursion area (Airy) law:
/// `P(I > x) ~ (6√6/√π)·x·e^{−6x²}` as `x → ∞`. Useful from `x ≈ 1` on,
/// where the relative error is already below a few tens of percent.
pub fn ref_excursion_area_tail_asym(x: f64) -> Result<f64, OracleError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(OracleError::DomainError(x));
    }
    let c = 6.0 * 6.0f64.sqrt() / std::f64::consts::PI.sqrt();
    Ok(c * x * (-6.0 * x * x).exp())
}

/// Expected number of distinct walk positions still coalesced per unit
/// horizontal length after time `t`, `1/√(πt)` — the continuum profile
/// behind the lattice coalescence counts.
pub fn ref_xi_mean(t: f64) -> Result<f64, OracleError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(OracleError::DomainError(t));
    }
    Ok(1.0 / (std::f64::consts::PI * t).sqrt())
}
