//! Enumeration and seeded sampling of joint detection outcomes.
//!
//! An outcome is a collision-free choice of N output ports, one time bin per
//! detector, and (optionally) one qubit string. Detection times are
//! discretized into a uniform per-detector grid so the outcome space is
//! finite and each weight is an exactly defined window integral; the weights
//! then feed an inverse-CDF sampler that is deterministic in its seed.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::correlation::{
    self, PolarizationMeasurement, PolarizedSource, QuadratureSpec, TimeWindows, TRACE_MAX_ORDER,
};
use crate::error::{Error, Result};
use crate::interferometer::{Interferometer, PortSelection};
use crate::permanent::{Kernel, SquareMatrix};
use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hard cap on the enumerated outcome count.
pub const MAX_ENUMERATION_RECORDS: u64 = 10_000_000;

/// A uniform grid of detection-time bins shared by all detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    domain_start: f64,
    domain_end: f64,
    bins_per_detector: usize,
}

impl TimeGrid {
    pub fn new(domain_start: f64, domain_end: f64, bins_per_detector: usize) -> Result<Self> {
        if !domain_start.is_finite() || !domain_end.is_finite() {
            return Err(Error::NonFinite("time grid bound".into()));
        }
        if domain_end <= domain_start {
            return Err(Error::InvalidParameter(format!(
                "time grid domain [{domain_start}, {domain_end}] is empty"
            )));
        }
        if bins_per_detector == 0 {
            return Err(Error::InvalidParameter(
                "time grid needs at least one bin".into(),
            ));
        }
        Ok(Self {
            domain_start,
            domain_end,
            bins_per_detector,
        })
    }

    /// A grid whose domain spans every source envelope (see
    /// [`correlation::full_domain_bounds`]).
    pub fn covering(sources: &[PolarizedSource], bins_per_detector: usize) -> Result<Self> {
        let (lo, hi) = correlation::full_domain_bounds(sources)?;
        Self::new(lo, hi, bins_per_detector)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.domain_start, self.domain_end)
    }

    pub fn bins_per_detector(&self) -> usize {
        self.bins_per_detector
    }

    pub fn bin_width(&self) -> f64 {
        (self.domain_end - self.domain_start) / self.bins_per_detector as f64
    }

    pub fn bin_center(&self, bin: usize) -> f64 {
        self.domain_start + (bin as f64 + 0.5) * self.bin_width()
    }

    fn windows(&self, bin_indices: &[usize]) -> Result<TimeWindows> {
        TimeWindows::new(
            bin_indices.iter().map(|b| self.bin_center(*b)).collect(),
            vec![self.bin_width(); bin_indices.len()],
        )
    }
}

/// One joint outcome and its probability weight.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    /// Ascending 1-based output ports carrying the detectors.
    pub output_ports: Vec<usize>,
    /// Grid bin per detector, aligned with `output_ports`.
    pub time_bin_index: Vec<usize>,
    /// Qubit string, present only when enumerating polarization outcomes.
    pub qubit_bits: Option<Vec<u8>>,
    pub weight: f64,
}

/// Enumerate every outcome and compute its weight.
///
/// Port sets run over ascending combinations of N output ports, time bins
/// over the grid (detector 0 slowest), and, with `qubit_mode`, qubit strings
/// in lexicographic order. Without `qubit_mode` the weight is the
/// polarization-insensitive trace. Record order is fixed; weight evaluation
/// is parallel but attached back in order.
pub fn enumerate_outcomes(
    interf: &Interferometer,
    input_ports: &[usize],
    sources: &[PolarizedSource],
    grid: &TimeGrid,
    qubit_mode: bool,
    quad: &QuadratureSpec,
    kernel: Kernel,
) -> Result<Vec<OutcomeRecord>> {
    let m = interf.dimension();
    let n = input_ports.len();
    if n == 0 || n > m {
        return Err(Error::InvalidSelection(format!(
            "{n} input ports into an {m}-port network"
        )));
    }
    if sources.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} sources for {n} input ports",
            sources.len()
        )));
    }
    quad.validate()?;
    kernel.check_order(n)?;
    if !qubit_mode && n > TRACE_MAX_ORDER {
        return Err(Error::SizeLimit {
            kernel: "trace_over_polarization",
            order: n,
            max: TRACE_MAX_ORDER,
        });
    }

    let bins = grid.bins_per_detector();
    let strings: u64 = if qubit_mode { 1 << n } else { 1 };
    let bin_tuples = (bins as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    let total = binomial(m as u64, n as u64)
        .saturating_mul(bin_tuples)
        .saturating_mul(strings as u128);
    if total > MAX_ENUMERATION_RECORDS as u128 {
        return Err(Error::OutcomeOverflow {
            records: total,
            max: MAX_ENUMERATION_RECORDS,
        });
    }
    if m < n * n {
        log::warn!(
            "output space is not dilute (M = {m} < N² = {}); \
             collision-free outcomes may miss substantial probability",
            n * n
        );
    }

    // Lay the outcome skeleton out first so weights can be computed in
    // parallel without perturbing the record order.
    let mut skeleton: Vec<(Vec<usize>, Vec<usize>, Option<Vec<u8>>)> =
        Vec::with_capacity(total as usize);
    for ports in (1..=m).combinations(n) {
        for flat in 0..bin_tuples as usize {
            let mut bin_idx = vec![0usize; n];
            let mut rem = flat;
            for d in (0..n).rev() {
                bin_idx[d] = rem % bins;
                rem /= bins;
            }
            for j in 0..strings {
                let bits = qubit_mode.then(|| correlation::bit_string(j, n));
                skeleton.push((ports.clone(), bin_idx.clone(), bits));
            }
        }
    }

    skeleton
        .into_par_iter()
        .map(|(ports, bin_idx, bits)| {
            let sel = PortSelection::new(input_ports.to_vec(), ports.clone())?;
            let u_sub = interf.submatrix(&sel)?;
            let windows = grid.windows(&bin_idx)?;
            let weight = match &bits {
                Some(b) => {
                    correlation::qubit_outcome_probability(&u_sub, sources, b, &windows, quad, kernel)?
                }
                None => {
                    correlation::trace_over_polarization(&u_sub, sources, &windows, quad, kernel)?
                }
            };
            Ok(OutcomeRecord {
                output_ports: ports,
                time_bin_index: bin_idx,
                qubit_bits: bits,
                weight,
            })
        })
        .collect()
}

fn binomial(m: u64, n: u64) -> u128 {
    let mut acc: u128 = 1;
    for k in 0..n {
        acc = match acc.checked_mul((m - k) as u128) {
            Some(v) => v / (k as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Draw `count` record indices with probability proportional to weight.
///
/// Inverse-CDF over the record order as given; deterministic in
/// `(records, seed, count)`.
pub fn normalize_and_sample(
    records: &[OutcomeRecord],
    seed: u64,
    count: usize,
) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::InvalidParameter("zero draws requested".into()));
    }
    let mut cdf = Vec::with_capacity(records.len());
    let mut acc = 0.0f64;
    for record in records {
        if !record.weight.is_finite() || record.weight < 0.0 {
            return Err(Error::NonFinite(format!(
                "outcome weight {}",
                record.weight
            )));
        }
        acc += record.weight;
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::AllZeroWeights);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|c| *c <= u).min(records.len() - 1);
        draws.push(idx);
    }
    Ok(draws)
}

/// The classical limit: photons far outside each other's coherence time act
/// as distinguishable particles, and the joint probability collapses to the
/// permanent of the entrywise probabilities,
/// per([cos²(φ_d − θ_s) · |U[d, s]|²]).
pub fn distinguishable_probability(
    u_sub: &SquareMatrix,
    sources: &[PolarizedSource],
    meas: &PolarizationMeasurement,
    kernel: Kernel,
) -> Result<f64> {
    let n = u_sub.order();
    kernel.check_order(n)?;
    let amplitude = correlation::polarized_amplitude(u_sub, sources, meas)?;
    let probabilities = SquareMatrix::from_fn(n, |(d, s)| {
        Complex64::new(amplitude[(d, s)].norm_sqr(), 0.0)
    })?;
    Ok(kernel.compute_view(&probabilities.entries()).re)
}
