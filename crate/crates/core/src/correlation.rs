//! Effective detection matrices and the rates/probabilities built from them.
//!
//! For N photons entering a linear network and N detectors at distinct output
//! ports, the joint detection rate at times (t_1..t_N) is |per(M)|² of the
//! effective matrix
//!
//! ```text
//! M[d, s] = cos(φ_d − θ_s) · U[d, s] · χ_s(t_d)
//! ```
//!
//! where U is the port submatrix, χ_s the temporal amplitude of source s, θ_s
//! its polarization angle, and φ_d the analyzer angle at detector d. A qubit
//! measurement outcome j_d ∈ {0, 1} is the analyzer φ_d = (π/2)·j_d.
//! Probabilities integrate the rate over per-detector time windows; with
//! unit-norm temporal amplitudes the prefactor is exactly 1, which makes the
//! N = 1 full-domain probability equal |U[d, s]|² and keeps every
//! collision-free total within [0, 1].

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::permanent::{Kernel, SquareMatrix};
use crate::quadrature::{self, Grid1d};
use crate::spectra::SpectralProfile;

/// 2^N guard for [`trace_over_polarization`].
pub const TRACE_MAX_ORDER: usize = 12;
/// Gauss–Legendre order bounds per dimension.
pub const MIN_NODES_PER_DIM: usize = 2;
pub const MAX_NODES_PER_DIM: usize = 64;
/// Minimum Monte Carlo sample count.
pub const MIN_MC_SAMPLES: usize = 1000;
/// Default Gauss–Legendre order.
pub const DEFAULT_NODES_PER_DIM: usize = 24;

// Panel length in units of the fastest timescale of the integrand; a
// 24-point rule on a panel this size resolves a Gaussian envelope or a beat
// note to near machine precision.
const PANEL_TIMESCALES: f64 = 4.0;
// Window margin in coherence times for full-domain integration; the envelope
// mass outside is < 1e-14.
const FULL_DOMAIN_MARGIN: f64 = 8.0;

/// A photon source: spectral profile plus linear polarization angle.
///
/// θ is canonicalized to [0, π); the flip θ → θ + π only changes the qubit
/// state by a global sign, which no rate can see.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizedSource {
    profile: SpectralProfile,
    theta: f64,
}

impl PolarizedSource {
    pub fn new(profile: SpectralProfile, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite("polarization angle".into()));
        }
        let mut theta = theta.rem_euclid(std::f64::consts::PI);
        // rem_euclid can round up to π for tiny negative inputs.
        if theta >= std::f64::consts::PI {
            theta = 0.0;
        }
        Ok(Self { profile, theta })
    }

    pub fn profile(&self) -> &SpectralProfile {
        &self.profile
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// What the polarization optics in front of the detectors do.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarizationMeasurement {
    /// Linear analyzers at the given angles, one per detector.
    Analyzers(Vec<f64>),
    /// Projection onto the qubit basis state |j_1 … j_N⟩.
    QubitOutcome(Vec<u8>),
    /// No polarization selection: sum over all 2^N qubit outcomes.
    Trace,
}

impl PolarizationMeasurement {
    // The analyzer angle per detector; Trace has none and must be expanded
    // into qubit outcomes by the caller.
    fn analyzer_angles(&self, detectors: usize) -> Result<Vec<f64>> {
        match self {
            PolarizationMeasurement::Analyzers(angles) => {
                if angles.len() != detectors {
                    return Err(Error::LengthMismatch(format!(
                        "{} analyzer angles for {detectors} detectors",
                        angles.len()
                    )));
                }
                if angles.iter().any(|a| !a.is_finite()) {
                    return Err(Error::NonFinite("analyzer angle".into()));
                }
                Ok(angles.clone())
            }
            PolarizationMeasurement::QubitOutcome(bits) => {
                if bits.len() != detectors {
                    return Err(Error::LengthMismatch(format!(
                        "{} qubit bits for {detectors} detectors",
                        bits.len()
                    )));
                }
                if bits.iter().any(|b| *b > 1) {
                    return Err(Error::InvalidParameter(
                        "qubit outcome bits must be 0 or 1".into(),
                    ));
                }
                Ok(bits
                    .iter()
                    .map(|b| f64::from(*b) * std::f64::consts::FRAC_PI_2)
                    .collect())
            }
            PolarizationMeasurement::Trace => Err(Error::InvalidParameter(
                "trace measurement must be expanded over qubit outcomes by the caller".into(),
            )),
        }
    }
}

/// Per-detector integration intervals [center − width/2, center + width/2].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeWindows {
    centers: Vec<f64>,
    widths: Vec<f64>,
}

impl TimeWindows {
    pub fn new(centers: Vec<f64>, widths: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || centers.len() != widths.len() {
            return Err(Error::LengthMismatch(format!(
                "{} window centers vs {} widths",
                centers.len(),
                widths.len()
            )));
        }
        if centers.iter().chain(&widths).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("time window".into()));
        }
        if widths.iter().any(|w| *w <= 0.0) {
            return Err(Error::InvalidParameter(
                "time window widths must be positive".into(),
            ));
        }
        Ok(Self { centers, widths })
    }

    /// One identical window per detector, wide enough that every source
    /// envelope has decayed below 1e-14 at the edges.
    pub fn full_domain(sources: &[PolarizedSource], detectors: usize) -> Result<Self> {
        let (lo, hi) = full_domain_bounds(sources)?;
        TimeWindows::new(
            vec![0.5 * (lo + hi); detectors],
            vec![hi - lo; detectors],
        )
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn bounds(&self, detector: usize) -> (f64, f64) {
        let half = 0.5 * self.widths[detector];
        (self.centers[detector] - half, self.centers[detector] + half)
    }
}

/// The time span outside which every source amplitude is negligible.
pub fn full_domain_bounds(sources: &[PolarizedSource]) -> Result<(f64, f64)> {
    if sources.is_empty() {
        return Err(Error::InvalidParameter("no sources".into()));
    }
    let lo = sources
        .iter()
        .map(|s| s.profile().emission_offset() - FULL_DOMAIN_MARGIN * s.profile().coherence_time())
        .fold(f64::INFINITY, f64::min);
    let hi = sources
        .iter()
        .map(|s| s.profile().emission_offset() + FULL_DOMAIN_MARGIN * s.profile().coherence_time())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// How to evaluate the N-dimensional time integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureSpec {
    /// Tensor grid, `nodes_per_dim` Gauss–Legendre points per panel per
    /// dimension. Windows are cut into panels a few envelope timescales long,
    /// so accuracy is near machine precision for any window width.
    GaussLegendre { nodes_per_dim: usize },
    /// Uniform Monte Carlo over the window box, deterministic in `seed`.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::GaussLegendre {
            nodes_per_dim: DEFAULT_NODES_PER_DIM,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            QuadratureSpec::GaussLegendre { nodes_per_dim } => {
                if !(MIN_NODES_PER_DIM..=MAX_NODES_PER_DIM).contains(nodes_per_dim) {
                    return Err(Error::InvalidQuadrature(format!(
                        "nodes_per_dim must lie in [{MIN_NODES_PER_DIM}, {MAX_NODES_PER_DIM}], \
                         got {nodes_per_dim}"
                    )));
                }
            }
            QuadratureSpec::MonteCarlo { samples, .. } => {
                if *samples < MIN_MC_SAMPLES {
                    return Err(Error::InvalidQuadrature(format!(
                        "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// cos(φ − θ): the amplitude a θ-polarized photon leaves through an analyzer
/// at angle φ.
pub fn polarization_factor(phi: f64, theta: f64) -> f64 {
    (phi - theta).cos()
}

/// Amplitude of the N-qubit basis state |i_1 … i_N⟩ in the product input
/// state: Π_s cos(θ_s − (π/2)·i_s).
pub fn input_state_amplitude(thetas: &[f64], bits: &[u8]) -> Result<f64> {
    if thetas.len() != bits.len() {
        return Err(Error::LengthMismatch(format!(
            "{} polarization angles vs {} bits",
            thetas.len(),
            bits.len()
        )));
    }
    if bits.iter().any(|b| *b > 1) {
        return Err(Error::InvalidParameter(
            "input basis bits must be 0 or 1".into(),
        ));
    }
    Ok(thetas
        .iter()
        .zip(bits)
        .map(|(theta, bit)| (theta - f64::from(*bit) * std::f64::consts::FRAC_PI_2).cos())
        .product())
}

// The time-independent part of the effective matrix: polarization factor
// times interferometer amplitude. Kept as one shared helper so the
// instantaneous-rate path and the cached quadrature path multiply in exactly
// the same order and agree bit for bit.
pub(crate) fn polarized_amplitude(
    u_sub: &SquareMatrix,
    sources: &[PolarizedSource],
    meas: &PolarizationMeasurement,
) -> Result<Array2<Complex64>> {
    let n = u_sub.order();
    if sources.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} sources for an order-{n} submatrix",
            sources.len()
        )));
    }
    let angles = meas.analyzer_angles(n)?;
    Ok(Array2::from_shape_fn((n, n), |(d, s)| {
        polarization_factor(angles[d], sources[s].theta()) * u_sub.get(d, s)
    }))
}

/// The effective matrix M[d, s] = cos(φ_d − θ_s) · U[d, s] · χ_s(t_d) at the
/// given detection times. `QubitOutcome(j)` yields a matrix bit-identical to
/// `Analyzers` with φ_d = (π/2)·j_d.
pub fn effective_matrix(
    u_sub: &SquareMatrix,
    sources: &[PolarizedSource],
    times: &[f64],
    meas: &PolarizationMeasurement,
) -> Result<SquareMatrix> {
    let n = u_sub.order();
    if times.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} detection times for {n} detectors",
            times.len()
        )));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("detection time".into()));
    }
    let amplitude = polarized_amplitude(u_sub, sources, meas)?;
    SquareMatrix::from_fn(n, |(d, s)| {
        amplitude[(d, s)] * sources[s].profile().temporal_amplitude(times[d])
    })
}

/// |per(m)|², the instantaneous N-fold detection rate.
pub fn correlation_rate(m: &SquareMatrix, kernel: Kernel) -> Result<f64> {
    kernel.check_order(m.order())?;
    Ok(kernel.compute_view(&m.entries()).norm_sqr())
}

/// The N-fold detection probability: the rate integrated over the
/// per-detector time windows.
pub fn integrated_probability(
    u_sub: &SquareMatrix,
    sources: &[PolarizedSource],
    meas: &PolarizationMeasurement,
    windows: &TimeWindows,
    quad: &QuadratureSpec,
    kernel: Kernel,
) -> Result<f64> {
    integrated_probability_with_error(u_sub, sources, meas, windows, quad, kernel)
        .map(|(value, _)| value)
}

/// As [`integrated_probability`], also returning the Monte Carlo standard
/// error when that method is selected (`None` for the tensor grid).
pub fn integrated_probability_with_error(
    u_sub: &SquareMatrix,
    sources: &[PolarizedSource],
    meas: &PolarizationMeasurement,
    windows: &TimeWindows,
    quad: &QuadratureSpec,
    kernel: Kernel,
) -> Result<(f64, Option<f64>)> {
    quad.validate()?;
    let n = u_sub.order();
    kernel.check_order(n)?;
    if windows.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} time windows for {n} detectors",
            windows.len()
        )));
    }
    let amplitude = polarized_amplitude(u_sub, sources, meas)?;

    match quad {
        QuadratureSpec::GaussLegendre { nodes_per_dim } => {
            let grids: Vec<Grid1d> = (0..n)
                .map(|d| {
                    let (lo, hi) = windows.bounds(d);
                    Grid1d::panelized(*nodes_per_dim, lo, hi, panel_count(hi - lo, sources))
                })
                .collect();
            // χ_s evaluated once per (dimension, node); the permanent loop
            // below only multiplies cached values.
            let chi_cache: Vec<Vec<Complex64>> = grids
                .iter()
                .map(|grid| {
                    grid.nodes
                        .iter()
                        .flat_map(|t| {
                            sources.iter().map(|src| src.profile().temporal_amplitude(*t))
                        })
                        .collect()
                })
                .collect();
            let value = quadrature::integrate_tensor(&grids, |idx, _| {
                let mut entries = Vec::with_capacity(n * n);
                for d in 0..n {
                    let chi_row = &chi_cache[d][idx[d] * n..(idx[d] + 1) * n];
                    for s in 0..n {
                        entries.push(amplitude[(d, s)] * chi_row[s]);
                    }
                }
                let view = ArrayView2::from_shape((n, n), &entries).unwrap();
                kernel.compute_view(&view).norm_sqr()
            })?;
            Ok((value, None))
        }
        QuadratureSpec::MonteCarlo { samples, seed } => {
            let (lo, hi): (Vec<f64>, Vec<f64>) = (0..n).map(|d| windows.bounds(d)).unzip();
            let (value, std_error) = quadrature::integrate_mc(&lo, &hi, *samples, *seed, |t| {
                let mut entries = Vec::with_capacity(n * n);
                for d in 0..n {
                    for s in 0..n {
                        entries
                            .push(amplitude[(d, s)] * sources[s].profile().temporal_amplitude(t[d]));
                    }
                }
                let view = ArrayView2::from_shape((n, n), &entries).unwrap();
                kernel.compute_view(&view).norm_sqr()
            })?;
            Ok((value, Some(std_error)))
        }
    }
}

// Panels per window: the integrand varies on the scale of the narrowest
// envelope (largest Δω) and, for unequal carriers, of the fastest beat note.
fn panel_count(width: f64, sources: &[PolarizedSource]) -> usize {
    let envelope = sources
        .iter()
        .map(|s| s.profile().bandwidth())
        .fold(0.0f64, f64::max);
    let mut beat = 0.0f64;
    for (i, a) in sources.iter().enumerate() {
        for b in &sources[i + 1..] {
            beat = beat
                .max((a.profile().center_frequency() - b.profile().center_frequency()).abs());
        }
    }
    let scale = envelope.max(beat);
    ((width * scale / PANEL_TIMESCALES).ceil().max(1.0)) as usize
}

/// Probability of the qubit measurement outcome |j_1 … j_N⟩ integrated over
/// the windows.
pub fn qubit_outcome_probability(
    u_sub: &SquareMatrix,
    sources: &[PolarizedSource],
    bits: &[u8],
    windows: &TimeWindows,
    quad: &QuadratureSpec,
    kernel: Kernel,
) -> Result<f64> {
    integrated_probability(
        u_sub,
        sources,
        &PolarizationMeasurement::QubitOutcome(bits.to_vec()),
        windows,
        quad,
        kernel,
    )
}

// Bit d of the string with index j, detector 0 leading.
pub(crate) fn bit_string(j: u64, n: usize) -> Vec<u8> {
    (0..n).map(|d| ((j >> (n - 1 - d)) & 1) as u8).collect()
}

/// All 2^n bit strings in lexicographic order (detector 0 is the leading
/// bit). This is the summation order used by [`trace_over_polarization`].
pub fn qubit_strings(n: usize) -> impl Iterator<Item = Vec<u8>> {
    debug_assert!(n < 64);
    (0..(1u64 << n)).map(move |j| bit_string(j, n))
}

/// Polarization-insensitive detection probability: the sum of the 2^N qubit
/// outcome probabilities, in [`qubit_strings`] order.
pub fn trace_over_polarization(
    u_sub: &SquareMatrix,
    sources: &[PolarizedSource],
    windows: &TimeWindows,
    quad: &QuadratureSpec,
    kernel: Kernel,
) -> Result<f64> {
    let n = u_sub.order();
    if n > TRACE_MAX_ORDER {
        return Err(Error::SizeLimit {
            kernel: "trace_over_polarization",
            order: n,
            max: TRACE_MAX_ORDER,
        });
    }
    let mut total = 0.0;
    for bits in qubit_strings(n) {
        total += qubit_outcome_probability(u_sub, sources, &bits, windows, quad, kernel)?;
    }
    Ok(total)
}
