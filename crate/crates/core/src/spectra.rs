//! Gaussian single-photon wave packets in frequency and time.
//!
//! A photon emitted at time offset `t_s` carries the frequency amplitude
//!
//! ```text
//! ξ(ω) = (1/(πΔω²))^{1/4} · exp(−(ω−ω0)²/(2Δω²)) · exp(iω t_s)
//! ```
//!
//! whose Fourier transform (convention χ(t) = (2π)^{-1/2} ∫ ξ(ω) e^{−iωt} dω)
//! has the closed form evaluated by [`SpectralProfile::temporal_amplitude`].
//! Both amplitudes are L²-normalized, which is what calibrates every
//! integrated detection probability in this crate to lie in [0, 1].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest allowed ratio ω0/Δω unless the caller overrides it.
///
/// The interferometer is treated as frequency independent, which only holds
/// for spectra narrow relative to the carrier.
pub const DEFAULT_NARROWBAND_RATIO: f64 = 10.0;

/// A Gaussian photon spectrum: carrier ω0, bandwidth Δω, emission offset t_s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralProfile {
    center_frequency: f64,
    bandwidth: f64,
    emission_offset: f64,
}

impl SpectralProfile {
    /// Validate and build a profile; requires ω0/Δω ≥ [`DEFAULT_NARROWBAND_RATIO`].
    pub fn new(center_frequency: f64, bandwidth: f64, emission_offset: f64) -> Result<Self> {
        Self::with_min_ratio(
            center_frequency,
            bandwidth,
            emission_offset,
            DEFAULT_NARROWBAND_RATIO,
        )
    }

    /// As [`SpectralProfile::new`] with an explicit narrowband threshold.
    pub fn with_min_ratio(
        center_frequency: f64,
        bandwidth: f64,
        emission_offset: f64,
        min_ratio: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("center_frequency", center_frequency),
            ("bandwidth", bandwidth),
            ("emission_offset", emission_offset),
            ("min_ratio", min_ratio),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("spectral profile {name}")));
            }
        }
        if bandwidth <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        if center_frequency <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "center frequency must be positive, got {center_frequency}"
            )));
        }
        if min_ratio <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "narrowband ratio must be positive, got {min_ratio}"
            )));
        }
        if center_frequency / bandwidth < min_ratio {
            return Err(Error::InvalidParameter(format!(
                "narrowband guard: center_frequency/bandwidth = {:.3} is below {min_ratio}",
                center_frequency / bandwidth
            )));
        }
        Ok(Self {
            center_frequency,
            bandwidth,
            emission_offset,
        })
    }

    pub fn center_frequency(&self) -> f64 {
        self.center_frequency
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn emission_offset(&self) -> f64 {
        self.emission_offset
    }

    /// ξ(ω): L²-normalized Gaussian at the carrier, delayed by the phase ramp.
    pub fn spectral_amplitude(&self, omega: f64) -> Complex64 {
        let dw2 = self.bandwidth * self.bandwidth;
        let norm = (1.0 / (std::f64::consts::PI * dw2)).powf(0.25);
        let detuning = omega - self.center_frequency;
        let envelope = (-detuning * detuning / (2.0 * dw2)).exp();
        norm * envelope * Complex64::from_polar(1.0, omega * self.emission_offset)
    }

    /// χ(t): the closed-form Fourier transform of [`Self::spectral_amplitude`].
    pub fn temporal_amplitude(&self, t: f64) -> Complex64 {
        let dw2 = self.bandwidth * self.bandwidth;
        let norm = (dw2 / std::f64::consts::PI).powf(0.25);
        let dt = t - self.emission_offset;
        let envelope = (-0.5 * dw2 * dt * dt).exp();
        norm * envelope * Complex64::from_polar(1.0, -self.center_frequency * dt)
    }

    /// 1/Δω, the temporal width of the wave packet.
    pub fn coherence_time(&self) -> f64 {
        1.0 / self.bandwidth
    }
}
