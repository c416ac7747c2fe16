//! Analytic predictions for the norm deviations: the leading stationary
//! order as a pulse-energy integral, its closed erf form and asymptote for
//! Gaussian pulses, and order-of-magnitude estimates for the oscillatory
//! orders.
//!
//! The oscillatory estimates carry a representative coupling magnitude
//! `w_bar`; they are order-of-magnitude statements, not pointwise
//! predictions, and are labelled as such in all outputs.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::pulse::LaserPulse;

/// Leading stationary deviation in the slow-envelope form:
/// `-(μ² dt / 2) ∫₀ᵗ A(t')² dt'`.
pub fn stationary_prediction(pulse: &LaserPulse, mu: f64, dt: f64, t: f64, dt_quad: f64) -> f64 {
    -(mu * mu * dt / 2.0) * pulse.envelope_energy(t, dt_quad)
}

/// Leading stationary deviation without the cos² averaging:
/// `-μ² dt ∫₀ᵗ E(t')² dt'`.
pub fn stationary_prediction_unaveraged(
    pulse: &LaserPulse,
    mu: f64,
    dt: f64,
    t: f64,
    dt_quad: f64,
) -> f64 {
    -(mu * mu * dt) * pulse.field_energy(t, dt_quad)
}

/// Closed erf form of the leading stationary deviation for a chirped
/// Gaussian pulse; the exact time integral of the squared envelope.
///
/// The onset-rate factor is `sqrt(2 β)` expressed through the unchirped
/// FWHM, `sqrt(32 ln2 τ'² / (4 τ'⁴ + (16 ln2 b₂)²))`. It reduces to
/// `sqrt(2 β')` at `b₂ = 0` and is asymptotically `sqrt(32 ln2) τ' /
/// (16 ln2 b₂)` for strong chirps.
pub fn stationary_prediction_chirped(
    mu: f64,
    dt: f64,
    field_amplitude: f64,
    fwhm: f64,
    spectral_chirp: f64,
    center_time: f64,
    t: f64,
) -> f64 {
    let prefactor =
        -mu * mu * dt * field_amplitude * field_amplitude * fwhm * (PI / (128.0 * LN_2)).sqrt();
    let tau2 = fwhm * fwhm;
    let chirp_term = 16.0 * LN_2 * spectral_chirp;
    let rate = (32.0 * LN_2 * tau2 / (4.0 * tau2 * tau2 + chirp_term * chirp_term)).sqrt();
    prefactor * (1.0 + libm::erf(rate * (t - center_time)))
}

/// Limit of the leading stationary deviation for `t → ∞`:
/// `-μ² dt E₀'² τ' sqrt(π / (32 ln2))`, independent of the spectral chirp.
pub fn stationary_asymptote(mu: f64, dt: f64, field_amplitude: f64, fwhm: f64) -> f64 {
    -mu * mu * dt * field_amplitude * field_amplitude * fwhm * (PI / (32.0 * LN_2)).sqrt()
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|v| v as f64).product()
}

/// Signed leading estimate of an oscillatory order:
/// `(-1)^(k-m) / m · t^(2m) / (k! (2m-1-k)!) · w_bar^(2m)`.
pub fn oscillatory_prediction(t: f64, m: u32, k: u32, w_bar: f64) -> Result<f64> {
    if !(k < 2 * m && 2 * m <= 2 * k) {
        return Err(Error::Domain(format!(
            "(m, k) = ({m}, {k}) outside the oscillatory window k < 2m <= 2k"
        )));
    }
    let sign = if (k - m) % 2 == 0 { 1.0 } else { -1.0 };
    let magnitude = t.powi(2 * m as i32) / (m as f64 * factorial(k) * factorial(2 * m - 1 - k))
        * w_bar.powi(2 * m as i32);
    Ok(sign * magnitude)
}

/// Representative coupling magnitude: root mean square of `μ E(t)` over a
/// window, by default the FWHM around the pulse center. Returns zero (and
/// signals it) for a vanishing field.
pub fn estimate_w_bar(pulse: &LaserPulse, mu: f64, window: Option<(f64, f64)>) -> (f64, bool) {
    let (lo, hi) = window.unwrap_or((
        pulse.center_time - 0.5 * pulse.fwhm,
        pulse.center_time + 0.5 * pulse.fwhm,
    ));
    let n = 4096;
    let h = (hi - lo) / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let t = lo + h * i as f64;
        let e = mu * pulse.field_at(t);
        let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += weight * e * e;
    }
    let mean_sq = sum * h / (hi - lo);
    let w_bar = mean_sq.sqrt();
    (w_bar, w_bar == 0.0)
}

/// Bundle of predictions for one pulse/coupling/time-step combination.
#[derive(Clone, Debug)]
pub struct PredictionSet {
    pub pulse: LaserPulse,
    pub mu: f64,
    pub dt: f64,
    pub k: usize,
    /// Representative coupling for the oscillatory estimates.
    pub w_bar: f64,
    pub stationary_asymptote: f64,
}

impl PredictionSet {
    pub fn new(pulse: LaserPulse, mu: f64, dt: f64, k: usize) -> Self {
        let (w_bar, _) = estimate_w_bar(&pulse, mu, None);
        let stationary_asymptote = stationary_asymptote(mu, dt, pulse.field_amplitude, pulse.fwhm);
        Self {
            pulse,
            mu,
            dt,
            k,
            w_bar,
            stationary_asymptote,
        }
    }

    /// Leading stationary deviation at time `t` (erf form).
    pub fn stationary_at(&self, t: f64) -> f64 {
        stationary_prediction_chirped(
            self.mu,
            self.dt,
            self.pulse.field_amplitude,
            self.pulse.fwhm,
            self.pulse.spectral_chirp,
            self.pulse.center_time,
            t,
        )
    }

    /// Signed oscillatory estimates for every m in the oscillatory window,
    /// relative to the pulse center.
    pub fn oscillatory_at(&self, t: f64) -> Vec<(u32, f64)> {
        let k = self.k as u32;
        let m_lo = k / 2 + 1;
        (m_lo..=k)
            .filter_map(|m| {
                oscillatory_prediction((t - self.pulse.center_time).max(0.0), m, k, self.w_bar)
                    .ok()
                    .map(|v| (m, v))
            })
            .collect()
    }
}
