//! Joint detection statistics of single photons in linear interferometers.
//!
//! N polarized photons with Gaussian spectra enter an M-port linear network;
//! N detectors at distinct output ports record arrival times and, optionally,
//! polarization-qubit outcomes. Every rate and probability reduces to the
//! squared modulus of a matrix permanent: the interferometer port submatrix,
//! multiplied entrywise by the photons' temporal amplitudes at the detection
//! times and by the analyzer projection factors.
//!
//! Module map:
//!
//! * [`spectra`] — Gaussian wave packets ξ(ω) and χ(t).
//! * [`interferometer`] — unitary networks (seeded Haar, beam splitter,
//!   explicit) and port submatrices.
//! * [`permanent`] — naive, Ryser, and Glynn permanent kernels.
//! * [`correlation`] — effective matrices, instantaneous rates, and
//!   time-window-integrated probabilities (tensor Gauss–Legendre or
//!   Monte Carlo).
//! * [`sampler`] — exhaustive outcome enumeration over ports × time bins ×
//!   qubit strings, seeded inverse-CDF sampling, and the
//!   distinguishable-photon limit.
//!
//! Everything is deterministic: random objects take explicit seeds, and
//! parallel evaluation reduces partial sums in a fixed order, so results are
//! bit-identical across thread counts.

pub mod correlation;
pub mod error;
pub mod interferometer;
pub mod permanent;
pub mod quadrature;
pub mod sampler;
pub mod spectra;

pub use correlation::{
    correlation_rate, effective_matrix, full_domain_bounds, input_state_amplitude,
    integrated_probability, integrated_probability_with_error, polarization_factor,
    qubit_outcome_probability, qubit_strings, trace_over_polarization, PolarizationMeasurement,
    PolarizedSource, QuadratureSpec, TimeWindows,
};
pub use error::{Error, Result};
pub use interferometer::{Interferometer, PortSelection};
pub use permanent::{Kernel, SquareMatrix};
pub use sampler::{
    distinguishable_probability, enumerate_outcomes, normalize_and_sample, OutcomeRecord, TimeGrid,
};
pub use spectra::SpectralProfile;
