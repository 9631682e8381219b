//! M-port linear networks: construction, validation, and port slicing.
//!
//! The matrix is stored so that `matrix[(d, s)]` is the amplitude from input
//! port `s` to output port `d` (out = U · in, both 0-based internally). Ports
//! in the public API are 1-based. The orientation matters downstream: the
//! effective detection matrices multiply this submatrix entrywise by factors
//! that are *not* symmetric in (detector, source), so the layout is fixed
//! here once and documented rather than left to convention.

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::permanent::SquareMatrix;

/// Entrywise tolerance on |U·U† − I| accepted by [`Interferometer::from_matrix`].
pub const UNITARITY_TOL: f64 = 1e-12;

/// An M×M unitary, remembering the seed when it was drawn at random.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferometer {
    matrix: Array2<Complex64>,
    seed: Option<u64>,
}

impl Interferometer {
    /// Haar-distributed random unitary, deterministic in `(m, seed)`.
    ///
    /// Columns of a standard complex Gaussian matrix are orthonormalized by
    /// modified Gram–Schmidt with one reorthogonalization pass. The implied
    /// triangular factor has real positive diagonal (column norms), so the
    /// phase fixing that makes QR sampling Haar is built in.
    pub fn haar_random(m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gaussian = Array2::<Complex64>::zeros((m, m));
        for c in 0..m {
            for r in 0..m {
                let re: f64 = rand::Rng::sample(&mut rng, StandardNormal);
                let im: f64 = rand::Rng::sample(&mut rng, StandardNormal);
                gaussian[(r, c)] = Complex64::new(re, im) / std::f64::consts::SQRT_2;
            }
        }

        let mut q: Vec<Array1<Complex64>> = Vec::with_capacity(m);
        for k in 0..m {
            let mut v = gaussian.column(k).to_owned();
            for _ in 0..2 {
                for basis in q.iter() {
                    let proj: Complex64 =
                        basis.iter().zip(v.iter()).map(|(b, x)| b.conj() * x).sum();
                    v.zip_mut_with(basis, |x, b| *x -= proj * b);
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-300 {
                return Err(Error::NonFinite("Gram-Schmidt breakdown".into()));
            }
            v.mapv_inplace(|z| z / norm);
            q.push(v);
        }

        let mut matrix = Array2::<Complex64>::zeros((m, m));
        for (k, col) in q.iter().enumerate() {
            matrix.column_mut(k).assign(col);
        }
        Ok(Self {
            matrix,
            seed: Some(seed),
        })
    }

    /// The 2×2 splitter [[√τ, √(1−τ)], [√(1−τ), −√τ]].
    pub fn beam_splitter(transmissivity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) || !transmissivity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "transmissivity must lie in [0, 1], got {transmissivity}"
            )));
        }
        let t = transmissivity.sqrt();
        let r = (1.0 - transmissivity).sqrt();
        let c = |x: f64| Complex64::new(x, 0.0);
        let matrix = ndarray::array![[c(t), c(r)], [c(r), c(-t)]];
        Ok(Self { matrix, seed: None })
    }

    /// The M×M identity network (each port maps to itself).
    pub fn identity(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension);
        }
        Ok(Self {
            matrix: Array2::eye(m),
            seed: None,
        })
    }

    /// Wrap an explicit matrix, rejecting non-square or non-unitary input.
    pub fn from_matrix(matrix: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows == 0 {
            return Err(Error::InvalidDimension);
        }
        if rows != cols {
            return Err(Error::InvalidParameter(format!(
                "interferometer matrix must be square, got {rows}x{cols}"
            )));
        }
        let candidate = Self { matrix, seed: None };
        let residual = candidate.unitarity_residual();
        if !(residual <= UNITARITY_TOL) {
            return Err(Error::NotUnitary {
                residual,
                tol: UNITARITY_TOL,
            });
        }
        Ok(candidate)
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> ArrayView2<'_, Complex64> {
        self.matrix.view()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Amplitude from `input_port` to `output_port` (both 1-based).
    pub fn amplitude(&self, input_port: usize, output_port: usize) -> Result<Complex64> {
        let m = self.dimension();
        for port in [input_port, output_port] {
            if port == 0 || port > m {
                return Err(Error::InvalidSelection(format!(
                    "port {port} out of range 1..={m}"
                )));
            }
        }
        Ok(self.matrix[(output_port - 1, input_port - 1)])
    }

    /// Max-entry |U·U† − I|.
    pub fn unitarity_residual(&self) -> f64 {
        let u = &self.matrix;
        let u_dag = u.t().mapv(|z| z.conj());
        let product = u.dot(&u_dag);
        let m = self.dimension();
        let mut residual = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let expected = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                residual = residual.max((product[(i, j)] - expected).norm());
            }
        }
        residual
    }

    pub fn verify_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// The N×N slice with entry (row d, col s) = amplitude from
    /// `sel.input_ports[s]` to `sel.output_ports[d]`.
    pub fn submatrix(&self, sel: &PortSelection) -> Result<SquareMatrix> {
        let m = self.dimension();
        sel.check_bounds(m)?;
        let n = sel.detectors();
        SquareMatrix::from_fn(n, |(d, s)| {
            self.matrix[(sel.output_ports[d] - 1, sel.input_ports[s] - 1)]
        })
    }
}

/// Which N input ports carry photons and which N output ports carry
/// detectors. Ports are 1-based and duplicate-free; the formalism covers one
/// photon per port only (no bunched outcomes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortSelection {
    input_ports: Vec<usize>,
    output_ports: Vec<usize>,
}

impl PortSelection {
    pub fn new(input_ports: Vec<usize>, output_ports: Vec<usize>) -> Result<Self> {
        if input_ports.is_empty() {
            return Err(Error::InvalidSelection("no input ports".into()));
        }
        if input_ports.len() != output_ports.len() {
            return Err(Error::InvalidSelection(format!(
                "{} input ports vs {} output ports",
                input_ports.len(),
                output_ports.len()
            )));
        }
        for (label, ports) in [("input", &input_ports), ("output", &output_ports)] {
            if ports.contains(&0) {
                return Err(Error::InvalidSelection(format!(
                    "{label} ports are 1-based; 0 is not a port"
                )));
            }
            let mut seen = ports.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != ports.len() {
                return Err(Error::InvalidSelection(format!(
                    "duplicate {label} port in {ports:?}"
                )));
            }
        }
        Ok(Self {
            input_ports,
            output_ports,
        })
    }

    pub fn detectors(&self) -> usize {
        self.input_ports.len()
    }

    pub fn input_ports(&self) -> &[usize] {
        &self.input_ports
    }

    pub fn output_ports(&self) -> &[usize] {
        &self.output_ports
    }

    fn check_bounds(&self, m: usize) -> Result<()> {
        if self.detectors() > m {
            return Err(Error::InvalidSelection(format!(
                "{} detectors exceed {m} ports",
                self.detectors()
            )));
        }
        for port in self.input_ports.iter().chain(&self.output_ports) {
            if *port > m {
                return Err(Error::InvalidSelection(format!(
                    "port {port} out of range 1..={m}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn beam_splitter_limits() {
        let full = Interferometer::beam_splitter(1.0).unwrap();
        assert_eq!(full.matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(full.matrix()[(0, 1)], c(0.0, 0.0));
        assert_eq!(full.matrix()[(1, 1)], c(-1.0, 0.0));

        let balanced = Interferometer::beam_splitter(0.5).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((balanced.matrix()[(0, 0)].re - s).abs() < 1e-15);
        assert!((balanced.matrix()[(1, 1)].re + s).abs() < 1e-15);
        assert!(balanced.unitarity_residual() < 1e-15);

        assert!(Interferometer::beam_splitter(-0.1).is_err());
        assert!(Interferometer::beam_splitter(1.1).is_err());
        assert!(Interferometer::beam_splitter(f64::NAN).is_err());
    }

    #[test]
    fn haar_one_port_is_a_phase() {
        let interf = Interferometer::haar_random(1, 3).unwrap();
        assert!((interf.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_is_unitary_across_sizes_and_seeds() {
        for m in [2usize, 4, 8, 16] {
            for seed in 0..50u64 {
                let interf = Interferometer::haar_random(m, seed).unwrap();
                let residual = interf.unitarity_residual();
                assert!(residual < 1e-12, "m={m} seed={seed}: {residual}");
            }
        }
    }

    #[test]
    fn haar_is_deterministic() {
        let a = Interferometer::haar_random(8, 42).unwrap();
        let b = Interferometer::haar_random(8, 42).unwrap();
        assert_eq!(a, b);
        let other = Interferometer::haar_random(8, 43).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn haar_rejects_zero_dimension() {
        assert!(matches!(
            Interferometer::haar_random(0, 1),
            Err(Error::InvalidDimension)
        ));
    }

    #[test]
    fn submatrix_of_identity() {
        let interf = Interferometer::identity(4).unwrap();
        let same = PortSelection::new(vec![1, 2], vec![1, 2]).unwrap();
        let sub = interf.submatrix(&same).unwrap();
        assert_eq!(sub.get(0, 0), c(1.0, 0.0));
        assert_eq!(sub.get(1, 1), c(1.0, 0.0));
        assert_eq!(sub.get(0, 1), c(0.0, 0.0));

        let disjoint = PortSelection::new(vec![1, 2], vec![3, 4]).unwrap();
        let sub = interf.submatrix(&disjoint).unwrap();
        for d in 0..2 {
            for s in 0..2 {
                assert_eq!(sub.get(d, s), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn submatrix_is_direct_entry_lookup() {
        let interf = Interferometer::haar_random(8, 42).unwrap();
        let sel = PortSelection::new(vec![1, 2, 3], vec![4, 6, 7]).unwrap();
        let sub = interf.submatrix(&sel).unwrap();
        for (d, out) in [4usize, 6, 7].iter().enumerate() {
            for (s, inp) in [1usize, 2, 3].iter().enumerate() {
                assert_eq!(sub.get(d, s), interf.matrix()[(out - 1, inp - 1)]);
                assert_eq!(sub.get(d, s), interf.amplitude(*inp, *out).unwrap());
            }
        }
    }

    #[test]
    fn verify_unitary_distinguishes_identity_from_zero() {
        let eye = Interferometer::identity(3).unwrap();
        assert!(eye.verify_unitary(1e-12));
        let zero = Interferometer {
            matrix: Array2::zeros((3, 3)),
            seed: None,
        };
        assert!(!zero.verify_unitary(1e-12));
    }

    #[test]
    fn from_matrix_validates() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let good = ndarray::array![[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]];
        assert!(Interferometer::from_matrix(good).is_ok());

        let lossy = ndarray::array![[c(0.9, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(matches!(
            Interferometer::from_matrix(lossy),
            Err(Error::NotUnitary { .. })
        ));

        let rect = Array2::<Complex64>::zeros((2, 3));
        assert!(Interferometer::from_matrix(rect).is_err());
    }

    #[test]
    fn port_selection_validation() {
        assert!(PortSelection::new(vec![], vec![]).is_err());
        assert!(PortSelection::new(vec![1], vec![1, 2]).is_err());
        assert!(PortSelection::new(vec![1, 1], vec![2, 3]).is_err());
        assert!(PortSelection::new(vec![1, 2], vec![3, 3]).is_err());
        assert!(PortSelection::new(vec![0, 1], vec![2, 3]).is_err());

        let interf = Interferometer::identity(3).unwrap();
        let oob = PortSelection::new(vec![1, 4], vec![2, 3]).unwrap();
        assert!(matches!(
            interf.submatrix(&oob),
            Err(Error::InvalidSelection(_))
        ));
        let too_many = PortSelection::new(vec![1, 2, 3, 4], vec![1, 2, 3, 4]).unwrap();
        assert!(interf.submatrix(&too_many).is_err());
    }

    // Largest singular value via power iteration on B†B.
    fn spectral_norm(b: &SquareMatrix) -> f64 {
        let n = b.order();
        let a = b.entries();
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| c(1.0 + i as f64 * 0.3, 0.2 - i as f64 * 0.1))
            .collect();
        let mut lambda = 0.0f64;
        for _ in 0..300 {
            // w = B v, then z = B† w
            let w: Vec<Complex64> = (0..n)
                .map(|i| (0..n).map(|j| a[(i, j)] * v[j]).sum())
                .collect();
            let z: Vec<Complex64> = (0..n)
                .map(|j| (0..n).map(|i| a[(i, j)].conj() * w[i]).sum())
                .collect();
            let norm = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            lambda = norm;
            v = z.into_iter().map(|x| x / norm).collect();
        }
        lambda.sqrt()
    }

    #[test]
    fn unitary_submatrix_is_a_contraction() {
        for seed in [1u64, 5, 9] {
            let interf = Interferometer::haar_random(8, seed).unwrap();
            let sel = PortSelection::new(vec![1, 3, 5], vec![2, 4, 8]).unwrap();
            let sub = interf.submatrix(&sel).unwrap();
            assert!(spectral_norm(&sub) <= 1.0 + 1e-12);
        }
    }
}
