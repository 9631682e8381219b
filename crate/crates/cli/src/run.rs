//! Mode runners: one function per subcommand, all returning the `result`
//! block of the report. The CLI layer stays sequential; parallel work
//! happens inside the core crate.

use std::path::PathBuf;

use serde_json::{json, Value};

use bosonq_core::correlation::{MAX_NODES_PER_DIM, TRACE_MAX_ORDER};
use bosonq_core::sampler::{OutcomeRecord, TimeGrid};
use bosonq_core::spectra::{SpectralProfile, DEFAULT_NARROWBAND_RATIO};
use bosonq_core::{
    correlation_rate, effective_matrix, enumerate_outcomes,
    integrated_probability_with_error, normalize_and_sample, qubit_strings,
    trace_over_polarization, Kernel, PolarizationMeasurement, PolarizedSource,
    QuadratureSpec, SquareMatrix, TimeWindows,
};

use crate::config::{Mode, RunConfig};
use crate::error::CliError;
use crate::report::{assemble, complex_entry, fmt17, Emitter};

/// Command-line inputs after clap parsing, decoupled from the clap structs.
pub struct Invocation {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

pub fn dispatch(mode: Mode, inv: &Invocation) -> Result<(), CliError> {
    let mut config = RunConfig::load(&inv.config)?;
    config.ensure_mode(mode)?;
    if let Some(seed) = inv.seed {
        config.seed = Some(seed);
    }
    if let Some(out) = &inv.out {
        config.output = Some(out.clone());
    }
    let emitter = Emitter::new(config.output.as_deref());
    let result = match mode {
        Mode::Rate => run_rate(&config)?,
        Mode::Probability => run_probability(&config)?,
        Mode::Sample => run_sample(&config, &emitter)?,
        Mode::SweepDelay => run_sweep_delay(&config, &emitter)?,
        Mode::Permanent => run_permanent(&config)?,
    };
    let report = assemble(mode, config.seed, &config, result);
    emitter.finish(&report, inv.quiet)
}

/// Instantaneous N-fold rate at explicit detection times, with the
/// effective matrix entries (or the per-outcome breakdown under a trace).
fn run_rate(config: &RunConfig) -> Result<Value, CliError> {
    let interf = config.interferometer()?;
    let sources = config.sources()?;
    let n = sources.len();
    let sel = config.selection(&interf, n)?;
    let u_sub = interf.submatrix(&sel).map_err(CliError::from_run)?;
    let times = config.times(n)?;
    let meas = config.measurement();
    let kernel = config.kernel()?;

    match &meas {
        PolarizationMeasurement::Trace => {
            if n > TRACE_MAX_ORDER {
                return Err(CliError::Guard(format!(
                    "polarization trace over {n} detectors exceeds the \
                     {TRACE_MAX_ORDER}-detector cap"
                )));
            }
            let mut terms = Vec::with_capacity(1 << n);
            let mut total = 0.0;
            for bits in qubit_strings(n) {
                let meas = PolarizationMeasurement::QubitOutcome(bits.clone());
                let m = effective_matrix(&u_sub, &sources, &times, &meas)
                    .map_err(CliError::from_run)?;
                let rate = correlation_rate(&m, kernel).map_err(CliError::from_run)?;
                total += rate;
                terms.push(json!({
                    "qubit_bits": bits,
                    "rate": rate,
                    "rate_text": fmt17(rate),
                }));
            }
            Ok(json!({
                "rate": total,
                "rate_text": fmt17(total),
                "times": times,
                "kernel": kernel.name(),
                "terms": terms,
            }))
        }
        _ => {
            let m = effective_matrix(&u_sub, &sources, &times, &meas)
                .map_err(CliError::from_run)?;
            let rate = correlation_rate(&m, kernel).map_err(CliError::from_run)?;
            let entries: Vec<Vec<Value>> = (0..n)
                .map(|d| (0..n).map(|s| complex_entry(m.get(d, s))).collect())
                .collect();
            Ok(json!({
                "rate": rate,
                "rate_text": fmt17(rate),
                "times": times,
                "kernel": kernel.name(),
                "effective_matrix": entries,
            }))
        }
    }
}

fn probability_for(
    u_sub: &SquareMatrix,
    sources: &[PolarizedSource],
    meas: &PolarizationMeasurement,
    windows: &TimeWindows,
    quad: &QuadratureSpec,
    kernel: Kernel,
) -> Result<(f64, Option<f64>), CliError> {
    match meas {
        PolarizationMeasurement::Trace => {
            trace_over_polarization(u_sub, sources, windows, quad, kernel)
                .map(|p| (p, None))
                .map_err(CliError::from_run)
        }
        _ => integrated_probability_with_error(u_sub, sources, meas, windows, quad, kernel)
            .map_err(CliError::from_run),
    }
}

/// Integrated N-fold probability with a quadrature-convergence estimate:
/// the value is recomputed at doubled node count (capped at the per-axis
/// maximum) and the difference reported.
fn run_probability(config: &RunConfig) -> Result<Value, CliError> {
    let interf = config.interferometer()?;
    let sources = config.sources()?;
    let n = sources.len();
    let sel = config.selection(&interf, n)?;
    let u_sub = interf.submatrix(&sel).map_err(CliError::from_run)?;
    let meas = config.measurement();
    let windows = config.windows(&sources, n)?;
    let quad = config.quadrature()?;
    let kernel = config.kernel()?;

    let (probability, std_error) =
        probability_for(&u_sub, &sources, &meas, &windows, &quad, kernel)?;

    let convergence = match quad {
        QuadratureSpec::GaussLegendre { nodes_per_dim } => {
            let refined_nodes = (2 * nodes_per_dim).min(MAX_NODES_PER_DIM);
            if refined_nodes > nodes_per_dim {
                let refined_quad = QuadratureSpec::GaussLegendre {
                    nodes_per_dim: refined_nodes,
                };
                let (refined, _) =
                    probability_for(&u_sub, &sources, &meas, &windows, &refined_quad, kernel)?;
                json!({
                    "nodes_per_dim": nodes_per_dim,
                    "refined_nodes_per_dim": refined_nodes,
                    "refined_value": refined,
                    "refined_value_text": fmt17(refined),
                    "abs_difference": (refined - probability).abs(),
                })
            } else {
                json!({
                    "nodes_per_dim": nodes_per_dim,
                    "refined_nodes_per_dim": Value::Null,
                    "note": "nodes_per_dim already at the per-axis maximum",
                })
            }
        }
        QuadratureSpec::MonteCarlo { samples, .. } => json!({
            "samples": samples,
            "std_error": std_error,
        }),
    };

    Ok(json!({
        "probability": probability,
        "probability_text": fmt17(probability),
        "std_error": std_error,
        "windows": { "centers": windows.centers(), "widths": windows.widths() },
        "kernel": kernel.name(),
        "convergence": convergence,
    }))
}

fn record_value(index: usize, record: &OutcomeRecord, grid: &TimeGrid) -> Value {
    let times: Vec<f64> = record
        .time_bin_index
        .iter()
        .map(|&b| grid.bin_center(b))
        .collect();
    json!({
        "index": index,
        "output_ports": record.output_ports,
        "time_bins": record.time_bin_index,
        "times": times,
        "qubit_bits": record.qubit_bits,
        "weight": record.weight,
        "weight_text": fmt17(record.weight),
    })
}

// Embedding every outcome in the stdout report stops being useful for
// large tables; past this the full table only goes to the JSONL file.
const EMBED_OUTCOMES_MAX: usize = 1000;

/// Enumerate all joint outcomes on the detection-time grid and draw from
/// the normalized weights.
fn run_sample(config: &RunConfig, emitter: &Emitter) -> Result<Value, CliError> {
    let interf = config.interferometer()?;
    let sources = config.sources()?;
    let n = sources.len();
    let input_ports = config.input_ports(n)?;
    let grid = config.grid(&sources)?;
    let qubit_mode = config.qubit_mode.unwrap_or(false);
    let quad = config.quadrature()?;
    let kernel = config.kernel()?;
    let count = config.sample_count()?;
    let seed = config.seed.unwrap_or(0);

    let records = enumerate_outcomes(
        &interf,
        &input_ports,
        &sources,
        &grid,
        qubit_mode,
        &quad,
        kernel,
    )
    .map_err(CliError::from_run)?;
    let draws = normalize_and_sample(&records, seed, count).map_err(CliError::from_run)?;
    let total_weight: f64 = records.iter().map(|r| r.weight).sum();

    let outcomes_path = emitter.write_stream(".outcomes.jsonl", |w| {
        for (i, record) in records.iter().enumerate() {
            writeln!(w, "{}", record_value(i, record, &grid))?;
        }
        Ok(())
    })?;
    let draws_path = emitter.write_stream(".draws.csv", |w| {
        writeln!(w, "draw,record_index")?;
        for (i, record_index) in draws.iter().enumerate() {
            writeln!(w, "{i},{record_index}")?;
        }
        Ok(())
    })?;

    let (start, end) = grid.domain();
    let embedded: Option<Vec<Value>> = (records.len() <= EMBED_OUTCOMES_MAX).then(|| {
        records
            .iter()
            .enumerate()
            .map(|(i, r)| record_value(i, r, &grid))
            .collect()
    });

    Ok(json!({
        "photons": n,
        "ports": interf.dimension(),
        "qubit_mode": qubit_mode,
        "grid": {
            "start": start,
            "end": end,
            "bins_per_detector": grid.bins_per_detector(),
            "bin_width": grid.bin_width(),
        },
        "record_count": records.len(),
        "total_weight": total_weight,
        "total_weight_text": fmt17(total_weight),
        "effective_seed": seed,
        "count": count,
        "draws": draws,
        "outcomes": embedded,
        "files": {
            "outcomes": outcomes_path,
            "draws": draws_path,
        },
    }))
}

/// Coincidence probability as one source's emission offset sweeps through
/// a delay range. Full-domain windows are recomputed at every delay;
/// explicit windows stay fixed.
fn run_sweep_delay(config: &RunConfig, emitter: &Emitter) -> Result<Value, CliError> {
    let interf = config.interferometer()?;
    let base_sources = config.sources()?;
    let n = base_sources.len();
    let sel = config.selection(&interf, n)?;
    let u_sub = interf.submatrix(&sel).map_err(CliError::from_run)?;
    let meas = config.measurement();
    let quad = config.quadrature()?;
    let kernel = config.kernel()?;
    let (sweep, swept) = config.sweep(n)?;
    let ratio = config.narrowband_min_ratio.unwrap_or(DEFAULT_NARROWBAND_RATIO);

    let step = if sweep.steps > 1 {
        (sweep.tau_max - sweep.tau_min) / (sweep.steps - 1) as f64
    } else {
        0.0
    };
    let mut points = Vec::with_capacity(sweep.steps);
    for i in 0..sweep.steps {
        let tau = sweep.tau_min + step * i as f64;
        let mut sources = base_sources.clone();
        let base = &base_sources[swept];
        let profile = SpectralProfile::with_min_ratio(
            base.profile().center_frequency(),
            base.profile().bandwidth(),
            base.profile().emission_offset() + tau,
            ratio,
        )
        .map_err(CliError::from_run)?;
        sources[swept] =
            PolarizedSource::new(profile, base.theta()).map_err(CliError::from_run)?;
        let windows = config.windows(&sources, n)?;
        let (probability, _) =
            probability_for(&u_sub, &sources, &meas, &windows, &quad, kernel)?;
        points.push((tau, probability));
    }

    let sweep_path = emitter.write_stream(".sweep.csv", |w| {
        writeln!(w, "tau,coincidence_probability")?;
        for (tau, p) in &points {
            writeln!(w, "{},{}", fmt17(*tau), fmt17(*p))?;
        }
        Ok(())
    })?;

    let point_values: Vec<Value> = points
        .iter()
        .map(|(tau, p)| {
            json!({
                "tau": tau,
                "probability": p,
                "probability_text": fmt17(*p),
            })
        })
        .collect();

    Ok(json!({
        "swept_source": swept + 1,
        "tau_min": sweep.tau_min,
        "tau_max": sweep.tau_max,
        "steps": sweep.steps,
        "kernel": kernel.name(),
        "points": point_values,
        "files": { "sweep": sweep_path },
    }))
}

/// Permanent of an explicit complex matrix, for checking kernels against
/// external references.
fn run_permanent(config: &RunConfig) -> Result<Value, CliError> {
    let matrix = config.matrix_input()?;
    let kernel = config.kernel()?;
    let value = kernel.compute(&matrix).map_err(CliError::from_run)?;
    Ok(json!({
        "order": matrix.order(),
        "kernel": kernel.name(),
        "permanent": complex_entry(value),
        "permanent_re_text": fmt17(value.re),
        "permanent_im_text": fmt17(value.im),
        "modulus_squared": value.norm_sqr(),
        "modulus_squared_text": fmt17(value.norm_sqr()),
    }))
}
