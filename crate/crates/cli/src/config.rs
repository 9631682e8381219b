//! The JSON run configuration and its validation into core types.
//!
//! One config file describes an experiment end to end; the command line only
//! selects the mode and may override the sampling seed and output path.
//! Ports and source indices are 1-based here, matching the core API.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use bosonq_core::correlation::{
    full_domain_bounds, PolarizationMeasurement, PolarizedSource, QuadratureSpec, TimeWindows,
};
use bosonq_core::interferometer::{Interferometer, PortSelection};
use bosonq_core::permanent::{Kernel, SquareMatrix};
use bosonq_core::sampler::TimeGrid;
use bosonq_core::spectra::{SpectralProfile, DEFAULT_NARROWBAND_RATIO};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Rate,
    Probability,
    Sample,
    SweepDelay,
    Permanent,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Rate => "rate",
            Mode::Probability => "probability",
            Mode::Sample => "sample",
            Mode::SweepDelay => "sweep-delay",
            Mode::Permanent => "permanent",
        }
    }
}

/// `{"haar": {"m": 8, "seed": 42}}`, `{"beam_splitter": {"tau": 0.5}}`, or
/// `{"matrix": [[[re, im], ...], ...]}` (row-major, unitary).
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferometerSpec {
    Haar {
        #[serde(alias = "M")]
        m: usize,
        #[serde(default)]
        seed: u64,
    },
    BeamSplitter {
        tau: f64,
    },
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub omega0: f64,
    pub delta_omega: f64,
    #[serde(default)]
    pub t_offset: f64,
    #[serde(default)]
    pub theta: f64,
}

/// `{"analyzers": [...]}`, `{"qubit": [0, 1]}`, or `"trace"`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementSpec {
    Analyzers(Vec<f64>),
    Qubit(Vec<u8>),
    Trace,
}

/// `"full"` or `{"centers": [...], "widths": [...]}`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum WindowsSpec {
    Named(WindowsKeyword),
    Explicit { centers: Vec<f64>, widths: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowsKeyword {
    Full,
}

/// `{"gauss_legendre": {"nodes_per_dim": 24}}` or
/// `{"monte_carlo": {"samples": 100000, "seed": 7}}`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureConfig {
    GaussLegendre {
        nodes_per_dim: usize,
    },
    MonteCarlo {
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
}

/// Detection-time grid for sample mode. Omitting the bounds spans every
/// source envelope.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub end: Option<f64>,
    pub bins_per_detector: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub tau_min: f64,
    pub tau_max: f64,
    pub steps: usize,
    /// 1-based index of the source whose emission offset is shifted by τ;
    /// defaults to the last source.
    #[serde(default)]
    pub source_index: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interferometer: Option<InterferometerSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_ports: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_ports: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<WindowsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_mode: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narrowband_min_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Reject configs whose `mode` field contradicts the subcommand.
    pub fn ensure_mode(&self, expected: Mode) -> Result<(), CliError> {
        if let Some(mode) = self.mode {
            if mode != expected {
                return Err(CliError::config(format!(
                    "config requests mode {:?} but the {:?} subcommand was invoked",
                    mode.name(),
                    expected.name()
                )));
            }
        }
        Ok(())
    }

    pub fn interferometer(&self) -> Result<Interferometer, CliError> {
        let spec = self
            .interferometer
            .as_ref()
            .ok_or_else(|| CliError::config("missing field: interferometer"))?;
        match spec {
            InterferometerSpec::Haar { m, seed } => {
                Interferometer::haar_random(*m, *seed).map_err(CliError::config)
            }
            InterferometerSpec::BeamSplitter { tau } => {
                Interferometer::beam_splitter(*tau).map_err(CliError::config)
            }
            InterferometerSpec::Matrix(rows) => {
                let matrix = parse_matrix(rows)?;
                Interferometer::from_matrix(matrix).map_err(|e| {
                    CliError::config(format!("interferometer.matrix: {e}"))
                })
            }
        }
    }

    pub fn sources(&self) -> Result<Vec<PolarizedSource>, CliError> {
        if self.sources.is_empty() {
            return Err(CliError::config("missing field: sources"));
        }
        let ratio = self.narrowband_min_ratio.unwrap_or(DEFAULT_NARROWBAND_RATIO);
        self.sources
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let profile =
                    SpectralProfile::with_min_ratio(s.omega0, s.delta_omega, s.t_offset, ratio)
                        .map_err(|e| CliError::config(format!("sources[{i}]: {e}")))?;
                PolarizedSource::new(profile, s.theta)
                    .map_err(|e| CliError::config(format!("sources[{i}]: {e}")))
            })
            .collect()
    }

    /// Input ports, one per source; defaults to ports 1..=n.
    pub fn input_ports(&self, n: usize) -> Result<Vec<usize>, CliError> {
        let ports = self
            .input_ports
            .clone()
            .unwrap_or_else(|| (1..=n).collect());
        if ports.len() != n {
            return Err(CliError::config(format!(
                "input_ports: {} entries for {n} sources",
                ports.len()
            )));
        }
        Ok(ports)
    }

    /// Port selection against the given interferometer, with the submatrix
    /// bounds checked here so any violation surfaces as a config error.
    pub fn selection(&self, interf: &Interferometer, n: usize) -> Result<PortSelection, CliError> {
        let inputs = self.input_ports(n)?;
        let outputs = self
            .output_ports
            .clone()
            .ok_or_else(|| CliError::config("missing field: output_ports"))?;
        let sel = PortSelection::new(inputs, outputs).map_err(CliError::config)?;
        interf.submatrix(&sel).map_err(CliError::config)?;
        Ok(sel)
    }

    pub fn measurement(&self) -> PolarizationMeasurement {
        match &self.measurement {
            Some(MeasurementSpec::Analyzers(angles)) => {
                PolarizationMeasurement::Analyzers(angles.clone())
            }
            Some(MeasurementSpec::Qubit(bits)) => {
                PolarizationMeasurement::QubitOutcome(bits.clone())
            }
            Some(MeasurementSpec::Trace) | None => PolarizationMeasurement::Trace,
        }
    }

    pub fn windows(
        &self,
        sources: &[PolarizedSource],
        detectors: usize,
    ) -> Result<TimeWindows, CliError> {
        match &self.windows {
            None | Some(WindowsSpec::Named(WindowsKeyword::Full)) => {
                TimeWindows::full_domain(sources, detectors).map_err(CliError::config)
            }
            Some(WindowsSpec::Explicit { centers, widths }) => {
                let w = TimeWindows::new(centers.clone(), widths.clone())
                    .map_err(|e| CliError::config(format!("windows: {e}")))?;
                if w.len() != detectors {
                    return Err(CliError::config(format!(
                        "windows: {} entries for {detectors} detectors",
                        w.len()
                    )));
                }
                Ok(w)
            }
        }
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let quad = match &self.quadrature {
            None => QuadratureSpec::default(),
            Some(QuadratureConfig::GaussLegendre { nodes_per_dim }) => {
                QuadratureSpec::GaussLegendre {
                    nodes_per_dim: *nodes_per_dim,
                }
            }
            Some(QuadratureConfig::MonteCarlo { samples, seed }) => QuadratureSpec::MonteCarlo {
                samples: *samples,
                seed: *seed,
            },
        };
        quad.validate()
            .map_err(|e| CliError::config(format!("quadrature: {e}")))?;
        Ok(quad)
    }

    pub fn kernel(&self) -> Result<Kernel, CliError> {
        match &self.kernel {
            None => Ok(Kernel::default()),
            Some(name) => name
                .parse()
                .map_err(|e| CliError::config(format!("kernel: {e}"))),
        }
    }

    pub fn times(&self, detectors: usize) -> Result<Vec<f64>, CliError> {
        let times = self
            .times
            .clone()
            .ok_or_else(|| CliError::config("missing field: times"))?;
        if times.len() != detectors {
            return Err(CliError::config(format!(
                "times: {} entries for {detectors} detectors",
                times.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(CliError::config("times: entries must be finite"));
        }
        Ok(times)
    }

    /// Sample-mode grid; the default spans all source envelopes with bins a
    /// quarter of the longest coherence time wide.
    pub fn grid(&self, sources: &[PolarizedSource]) -> Result<TimeGrid, CliError> {
        match &self.grid {
            None => default_grid(sources),
            Some(GridSpec {
                start,
                end,
                bins_per_detector,
            }) => {
                let (lo, hi) = match (start, end) {
                    (Some(lo), Some(hi)) => (*lo, *hi),
                    (None, None) => full_domain_bounds(sources).map_err(CliError::config)?,
                    _ => {
                        return Err(CliError::config(
                            "grid: start and end must be given together",
                        ))
                    }
                };
                TimeGrid::new(lo, hi, *bins_per_detector)
                    .map_err(|e| CliError::config(format!("grid: {e}")))
            }
        }
    }

    pub fn sample_count(&self) -> Result<usize, CliError> {
        match self.count {
            Some(0) | None => Err(CliError::config(
                "sample mode needs a positive draw count (field: count)",
            )),
            Some(c) => Ok(c),
        }
    }

    pub fn sweep(&self, n_sources: usize) -> Result<(SweepSpec, usize), CliError> {
        let sweep = self
            .sweep
            .clone()
            .ok_or_else(|| CliError::config("missing field: sweep"))?;
        if sweep.steps == 0 {
            return Err(CliError::config("sweep: steps must be at least 1"));
        }
        if !(sweep.tau_min.is_finite() && sweep.tau_max.is_finite())
            || sweep.tau_max < sweep.tau_min
        {
            return Err(CliError::config("sweep: need finite tau_max >= tau_min"));
        }
        let index = sweep.source_index.unwrap_or(n_sources);
        if index == 0 || index > n_sources {
            return Err(CliError::config(format!(
                "sweep: source_index {index} out of range 1..={n_sources}"
            )));
        }
        Ok((sweep, index - 1))
    }

    pub fn matrix_input(&self) -> Result<SquareMatrix, CliError> {
        let rows = self
            .matrix
            .as_ref()
            .ok_or_else(|| CliError::config("missing field: matrix"))?;
        let matrix = parse_matrix(rows)?;
        SquareMatrix::new(matrix).map_err(|e| CliError::config(format!("matrix: {e}")))
    }
}

fn parse_matrix(rows: &[Vec<[f64; 2]>]) -> Result<Array2<Complex64>, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::config("matrix: no rows"));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::config("matrix: ragged rows"));
    }
    let mut matrix = Array2::<Complex64>::zeros((n, cols));
    for (i, row) in rows.iter().enumerate() {
        for (j, [re, im]) in row.iter().enumerate() {
            matrix[(i, j)] = Complex64::new(*re, *im);
        }
    }
    Ok(matrix)
}

fn default_grid(sources: &[PolarizedSource]) -> Result<TimeGrid, CliError> {
    let (lo, hi) = full_domain_bounds(sources).map_err(CliError::config)?;
    let longest_coherence = sources
        .iter()
        .map(|s| s.profile().coherence_time())
        .fold(0.0f64, f64::max);
    let bins = ((hi - lo) / (longest_coherence / 4.0)).ceil().max(1.0) as usize;
    TimeGrid::new(lo, hi, bins).map_err(CliError::config)
}
