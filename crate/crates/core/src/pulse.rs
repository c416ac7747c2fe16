//! Gaussian laser pulses, unchirped or carrying a linear spectral chirp.
//!
//! A spectral chirp `b2` stretches the pulse in time at constant total
//! energy: the peak field drops, the envelope decay rate shrinks and the
//! instantaneous frequency acquires a linear sweep `a2`.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseVariant {
    Unchirped,
    Chirped,
}

/// Gaussian pulse `E(t) = E_mod · exp(-β (t-t_d)²) · cos[ω₀(t-t_d) + a2/2 (t-t_d)²]`.
///
/// The unshaped parameters (`field_amplitude`, `envelope_rate`) describe the
/// pulse before the chirp is applied; the `*_mod`/`chirped_*` values are the
/// derived parameters actually entering the field formula. For `b2 = 0` they
/// coincide. The constant complex phase the chirp transform attaches to the
/// amplitude is dropped; only the modulus enters here.
#[derive(Clone, Copy, Debug)]
pub struct LaserPulse {
    pub variant: PulseVariant,
    /// Unchirped peak field strength E₀' (a.u.).
    pub field_amplitude: f64,
    /// Unchirped Gaussian envelope rate β' (a.u., inverse time squared).
    pub envelope_rate: f64,
    /// Time of maximal envelope t_d (a.u.).
    pub center_time: f64,
    /// Carrier angular frequency ω₀ (a.u.).
    pub carrier_frequency: f64,
    /// Spectral chirp parameter b₂ (a.u., zero for the unchirped variant).
    pub spectral_chirp: f64,
    /// Peak field strength after chirping, |E₀|.
    pub amplitude_mod: f64,
    /// Envelope rate after chirping, β.
    pub chirped_envelope_rate: f64,
    /// Temporal chirp rate a₂ of the instantaneous frequency.
    pub chirp_rate: f64,
    /// Full width at half maximum of the unchirped envelope, τ'.
    pub fwhm: f64,
}

impl LaserPulse {
    /// Unchirped pulse; equivalent to `chirped` with `b2 = 0`.
    pub fn unchirped(
        field_amplitude: f64,
        envelope_rate: f64,
        center_time: f64,
        carrier_frequency: f64,
    ) -> Result<Self> {
        let mut p = Self::chirped(
            field_amplitude,
            envelope_rate,
            center_time,
            carrier_frequency,
            0.0,
        )?;
        p.variant = PulseVariant::Unchirped;
        Ok(p)
    }

    /// Chirped pulse built from the unchirped parameters and the spectral
    /// chirp `b2`.
    pub fn chirped(
        field_amplitude: f64,
        envelope_rate: f64,
        center_time: f64,
        carrier_frequency: f64,
        spectral_chirp: f64,
    ) -> Result<Self> {
        if !(envelope_rate > 0.0) {
            return Err(Error::Config(format!(
                "envelope rate {envelope_rate} must be > 0"
            )));
        }
        let b2 = spectral_chirp;
        let bp = envelope_rate;
        let amplitude_mod = (1.0 + 4.0 * bp * bp * b2 * b2).powf(-0.25) * field_amplitude.abs();
        let chirped_envelope_rate = 1.0 / (1.0 / bp + 4.0 * bp * b2 * b2);
        let chirp_rate = if b2 == 0.0 {
            0.0
        } else {
            b2 / (1.0 / (4.0 * bp * bp) + b2 * b2)
        };
        let fwhm = (4.0 * std::f64::consts::LN_2 / bp).sqrt();
        Ok(Self {
            variant: if b2 == 0.0 {
                PulseVariant::Unchirped
            } else {
                PulseVariant::Chirped
            },
            field_amplitude,
            envelope_rate,
            center_time,
            carrier_frequency,
            spectral_chirp: b2,
            amplitude_mod,
            chirped_envelope_rate,
            chirp_rate,
            fwhm,
        })
    }

    /// Convenience constructor taking the envelope FWHM τ' instead of β'.
    pub fn from_fwhm(
        field_amplitude: f64,
        fwhm: f64,
        center_time: f64,
        carrier_frequency: f64,
        spectral_chirp: f64,
    ) -> Result<Self> {
        if !(fwhm > 0.0) {
            return Err(Error::Config(format!("fwhm {fwhm} must be > 0")));
        }
        let envelope_rate = 4.0 * std::f64::consts::LN_2 / (fwhm * fwhm);
        Self::chirped(
            field_amplitude,
            envelope_rate,
            center_time,
            carrier_frequency,
            spectral_chirp,
        )
    }

    /// Electric field at time `t`.
    pub fn field_at(&self, t: f64) -> f64 {
        let (a, phi) = self.phase_and_envelope(t);
        a * phi.cos()
    }

    /// Decomposition `E(t) = A(t) · cos(Φ(t))` with `A ≥ 0`.
    pub fn phase_and_envelope(&self, t: f64) -> (f64, f64) {
        let dt = t - self.center_time;
        let a = self.amplitude_mod * (-self.chirped_envelope_rate * dt * dt).exp();
        let phi = self.carrier_frequency * dt + 0.5 * self.chirp_rate * dt * dt;
        (a, phi)
    }

    /// Squared envelope `A(t)²`.
    pub fn envelope_sq(&self, t: f64) -> f64 {
        let dt = t - self.center_time;
        let a = self.amplitude_mod * (-self.chirped_envelope_rate * dt * dt).exp();
        a * a
    }

    /// `∫₀ᵗ A(t')² dt'` by composite trapezoid with step `dt_quad`.
    ///
    /// Monotone non-decreasing in `t`; for `t` past the pulse this converges
    /// to `E_mod² · sqrt(π / (2β))`, independent of the spectral chirp.
    pub fn envelope_energy(&self, t: f64, dt_quad: f64) -> f64 {
        assert!(t >= 0.0, "envelope energy defined for t >= 0");
        assert!(dt_quad > 0.0);
        if t == 0.0 {
            return 0.0;
        }
        let n = (t / dt_quad).ceil() as usize;
        let h = t / n as f64;
        let mut sum = 0.5 * (self.envelope_sq(0.0) + self.envelope_sq(t));
        for i in 1..n {
            sum += self.envelope_sq(h * i as f64);
        }
        sum * h
    }

    /// `∫₀ᵗ E(t')² dt'` by composite trapezoid with step `dt_quad`.
    pub fn field_energy(&self, t: f64, dt_quad: f64) -> f64 {
        assert!(t >= 0.0 && dt_quad > 0.0);
        if t == 0.0 {
            return 0.0;
        }
        let n = (t / dt_quad).ceil() as usize;
        let h = t / n as f64;
        let sq = |x: f64| {
            let e = self.field_at(x);
            e * e
        };
        let mut sum = 0.5 * (sq(0.0) + sq(t));
        for i in 1..n {
            sum += sq(h * i as f64);
        }
        sum * h
    }

    /// Closed-form value of `∫_{-∞}^{∞} A² dt`.
    pub fn total_envelope_energy(&self) -> f64 {
        self.amplitude_mod
            * self.amplitude_mod
            * (std::f64::consts::PI / (2.0 * self.chirped_envelope_rate)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E0: f64 = 1.19e-2;

    #[test]
    fn field_at_center_is_peak() {
        let p = LaserPulse::unchirped(E0, 1e-3, 500.0, 0.2).unwrap();
        assert_eq!(p.field_at(500.0), E0);
        let (a, phi) = p.phase_and_envelope(500.0);
        assert_eq!(a, E0);
        assert_eq!(phi, 0.0);
    }

    #[test]
    fn zero_chirp_matches_unchirped() {
        let u = LaserPulse::unchirped(E0, 1e-3, 500.0, 0.2).unwrap();
        let c = LaserPulse::chirped(E0, 1e-3, 500.0, 0.2, 0.0).unwrap();
        for i in 0..200 {
            let t = 5.0 * i as f64;
            assert!((u.field_at(t) - c.field_at(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn chirp_transform_values() {
        // β' = 1, b2 = 1  =>  |E0| scaling 5^(-1/4)
        let p = LaserPulse::chirped(2.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((p.amplitude_mod - 2.0 * 5f64.powf(-0.25)).abs() < 1e-15);
        assert!((p.chirped_envelope_rate - 1.0 / 5.0).abs() < 1e-15);
        assert!((p.chirp_rate - 1.0 / (0.25 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn chirp_transform_continuity_at_zero() {
        let base = LaserPulse::unchirped(E0, 2.5e-3, 100.0, 0.3).unwrap();
        let tiny = LaserPulse::chirped(E0, 2.5e-3, 100.0, 0.3, 1e-12).unwrap();
        assert!((tiny.amplitude_mod - base.field_amplitude.abs()).abs() < 1e-12);
        assert!((tiny.chirped_envelope_rate - base.envelope_rate).abs() < 1e-12);
        assert!(tiny.chirp_rate.abs() < 1e-11);
    }

    #[test]
    fn envelope_decomposition_reconstructs_field() {
        let p = LaserPulse::chirped(E0, 1.6e-5, 2000.0, 0.47, 5e4).unwrap();
        for i in 0..400 {
            let t = 10.0 * i as f64;
            let (a, phi) = p.phase_and_envelope(t);
            assert!(a >= 0.0);
            assert!((a * phi.cos() - p.field_at(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn envelope_fwhm_consistency() {
        let p = LaserPulse::unchirped(E0, 1.6e-5, 2000.0, 0.47).unwrap();
        // at t_d ± τ'/2 the envelope is exactly half the peak
        let (a, _) = p.phase_and_envelope(p.center_time + 0.5 * p.fwhm);
        assert!((a - 0.5 * p.amplitude_mod).abs() < 1e-12 * p.amplitude_mod);
        let (a, _) = p.phase_and_envelope(p.center_time - 0.5 * p.fwhm);
        assert!((a - 0.5 * p.amplitude_mod).abs() < 1e-12 * p.amplitude_mod);
    }

    #[test]
    fn envelope_energy_limits() {
        let tau = 413.0;
        let p = LaserPulse::from_fwhm(E0, tau, 5.0 * tau, 0.47, 0.0).unwrap();
        assert_eq!(p.envelope_energy(0.0, 1.0), 0.0);
        let far = p.center_time + 10.0 * p.fwhm;
        let total = p.envelope_energy(far, 1.0);
        let exact = p.total_envelope_energy();
        assert!(
            ((total - exact) / exact).abs() < 1e-8,
            "trapezoid {total} vs exact {exact}"
        );
    }

    #[test]
    fn envelope_energy_monotone() {
        let p = LaserPulse::from_fwhm(E0, 413.0, 2000.0, 0.47, 5e4).unwrap();
        let mut prev = 0.0;
        for i in 1..50 {
            let v = p.envelope_energy(100.0 * i as f64, 2.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn total_energy_independent_of_chirp() {
        let tau = 413.0;
        for b2 in [0.0, 1e4, 5e4] {
            let p = LaserPulse::from_fwhm(E0, tau, 6.0 * tau * 4.0, 0.47, b2).unwrap();
            let far = p.center_time + 40.0 * tau;
            let total = p.envelope_energy(far, 1.0);
            let unchirped = LaserPulse::from_fwhm(E0, tau, p.center_time, 0.47, 0.0).unwrap();
            let reference = unchirped.envelope_energy(far, 1.0);
            assert!(
                ((total - reference) / reference).abs() < 1e-8,
                "b2 = {b2}: {total} vs {reference}"
            );
        }
    }

    #[test]
    fn slow_envelope_halving() {
        // ∫E² ≈ (1/2)∫A² once the carrier oscillates fast on the envelope scale
        let tau = 413.0;
        let p = LaserPulse::from_fwhm(E0, tau, 5.0 * tau, 0.5, 0.0).unwrap();
        assert!(p.carrier_frequency * p.fwhm >= 50.0);
        let far = p.center_time + 8.0 * tau;
        let field = p.field_energy(far, 0.05);
        let env = p.envelope_energy(far, 0.05);
        assert!(
            (field - 0.5 * env).abs() / (0.5 * env) < 0.02,
            "field {field} vs half envelope {}",
            0.5 * env
        );
    }
}
