//! Shared fixtures for the criterion benchmarks.

use bosonq_core::{Interferometer, PolarizedSource, PortSelection, SpectralProfile, SquareMatrix};

/// Dense complex matrix of the given order: a full Haar-random unitary,
/// which is exactly the input shape the permanent kernels see in practice.
pub fn haar_submatrix(order: usize, seed: u64) -> SquareMatrix {
    let interf = Interferometer::haar_random(order, seed).expect("valid order");
    let all: Vec<usize> = (1..=order).collect();
    let sel = PortSelection::new(all.clone(), all).expect("valid selection");
    interf.submatrix(&sel).expect("in bounds")
}

/// Two matched Gaussian photons, polarization-aligned, zero delay.
pub fn matched_pair() -> Vec<PolarizedSource> {
    (0..2)
        .map(|_| {
            let profile = SpectralProfile::new(100.0, 1.0, 0.0).expect("valid profile");
            PolarizedSource::new(profile, 0.0).expect("valid angle")
        })
        .collect()
}
