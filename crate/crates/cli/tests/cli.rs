//! End-to-end tests running the `bosonq` binary against JSON configs.
//!
//! Independent references used here: the analytic two-photon coincidence
//! curve p(τ) = ½(1 − e^{−Δω²τ²/2}) for a balanced splitter with matched
//! Gaussian photons, hand-computable permanents, and a χ² goodness-of-fit
//! check of seeded draws against the enumerated weights.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bosonq"))
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

/// Run expecting success; parse the stdout report.
fn run_report(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "expected exit 0, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout should be one JSON report")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

fn hom_sources(offset: f64) -> Value {
    json!([
        { "omega0": 100.0, "delta_omega": 1.0, "t_offset": 0.0, "theta": 0.0 },
        { "omega0": 100.0, "delta_omega": 1.0, "t_offset": offset, "theta": 0.0 }
    ])
}

fn analytic_coincidence(tau: f64) -> f64 {
    0.5 * (1.0 - (-0.5 * tau * tau).exp())
}

#[test]
fn malformed_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["rate", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("config error"), "stderr: {stderr}");
    // The diagnostic should locate the problem.
    assert!(stderr.contains("line 1"), "stderr: {stderr}");
}

#[test]
fn missing_required_field_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "partial.json",
        &json!({ "sources": hom_sources(0.0) }),
    );
    let out = run(&["rate", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("interferometer"));
}

#[test]
fn unknown_field_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "typo.json", &json!({ "soruces": [] }));
    let out = run(&["rate", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn mode_mismatch_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "rate.json",
        &json!({
            "mode": "rate",
            "interferometer": { "beam_splitter": { "tau": 0.5 } },
            "sources": hom_sources(0.0),
            "output_ports": [1, 2],
            "times": [0.0, 0.0]
        }),
    );
    let out = run(&["probability", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn out_of_range_port_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "ports.json",
        &json!({
            "interferometer": { "beam_splitter": { "tau": 0.5 } },
            "sources": hom_sources(0.0),
            "output_ports": [1, 3],
            "times": [0.0, 0.0]
        }),
    );
    let out = run(&["rate", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn permanent_of_ones_is_two_for_every_kernel() {
    let dir = TempDir::new().unwrap();
    for kernel in ["naive", "ryser", "glynn"] {
        let config = write_config(
            dir.path(),
            &format!("perm_{kernel}.json"),
            &json!({
                "matrix": [ [[1.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [1.0, 0.0]] ],
                "kernel": kernel
            }),
        );
        let report = run_report(&["permanent", "--config", config.to_str().unwrap()]);
        let result = &report["result"];
        assert_eq!(result["permanent"]["re"], 2.0, "{kernel}");
        assert_eq!(result["permanent"]["im"], 0.0, "{kernel}");
        assert_eq!(result["kernel"], kernel);
        assert_eq!(result["order"], 2);
    }
}

#[test]
fn oversized_permanent_exits_3() {
    let n = 31;
    let row: Vec<[f64; 2]> = vec![[1.0, 0.0]; n];
    let rows: Vec<_> = (0..n).map(|_| row.clone()).collect();
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), "big.json", &json!({ "matrix": rows }));
    let out = run(&["permanent", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("guard violation"));
}

#[test]
fn rate_hom_fixture_is_zero() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "hom.json",
        &json!({
            "interferometer": { "beam_splitter": { "tau": 0.5 } },
            "sources": hom_sources(0.0),
            "output_ports": [1, 2],
            "times": [0.0, 0.0],
            "measurement": { "analyzers": [0.0, 0.0] }
        }),
    );
    let report = run_report(&["rate", "--config", config.to_str().unwrap()]);
    let rate = report["result"]["rate"].as_f64().unwrap();
    assert!(rate.abs() < 1e-12, "rate {rate}");
    // The report must carry the effective matrix entries.
    assert_eq!(report["result"]["effective_matrix"].as_array().unwrap().len(), 2);
}

#[test]
fn rate_single_photon_matches_envelope() {
    // One photon through a 1-port identity: rate = cos²(φ−θ)·|χ(0)|²·|U|²
    // with |χ(0)|² = Δω/√π.
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "single.json",
        &json!({
            "interferometer": { "matrix": [ [[1.0, 0.0]] ] },
            "sources": [ { "omega0": 100.0, "delta_omega": 1.0 } ],
            "output_ports": [1],
            "times": [0.0],
            "measurement": { "analyzers": [0.0] }
        }),
    );
    let report = run_report(&["rate", "--config", config.to_str().unwrap()]);
    let rate = report["result"]["rate"].as_f64().unwrap();
    let expected = 1.0 / std::f64::consts::PI.sqrt();
    assert!((rate - expected).abs() < 1e-15, "rate {rate} vs {expected}");
}

#[test]
fn rate_crossed_analyzer_vanishes() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "crossed.json",
        &json!({
            "interferometer": { "matrix": [ [[1.0, 0.0]] ] },
            "sources": [ { "omega0": 100.0, "delta_omega": 1.0 } ],
            "output_ports": [1],
            "times": [0.0],
            "measurement": { "analyzers": [std::f64::consts::FRAC_PI_2] }
        }),
    );
    let report = run_report(&["rate", "--config", config.to_str().unwrap()]);
    let rate = report["result"]["rate"].as_f64().unwrap();
    assert!(rate.abs() < 1e-12, "rate {rate}");
}

#[test]
fn probability_matches_analytic_overlap_and_reports_convergence() {
    let dir = TempDir::new().unwrap();
    let offset = 1.25;
    let config = write_config(
        dir.path(),
        "prob.json",
        &json!({
            "interferometer": { "beam_splitter": { "tau": 0.5 } },
            "sources": hom_sources(offset),
            "output_ports": [1, 2],
            "measurement": { "analyzers": [0.0, 0.0] },
            "quadrature": { "gauss_legendre": { "nodes_per_dim": 20 } }
        }),
    );
    let report = run_report(&["probability", "--config", config.to_str().unwrap()]);
    let result = &report["result"];
    let p = result["probability"].as_f64().unwrap();
    assert!((p - analytic_coincidence(offset)).abs() < 1e-10, "p {p}");

    let conv = &result["convergence"];
    assert_eq!(conv["nodes_per_dim"], 20);
    assert_eq!(conv["refined_nodes_per_dim"], 40);
    let diff = conv["abs_difference"].as_f64().unwrap();
    assert!(diff < 1e-10, "refinement moved the value by {diff}");
    // 17-significant-digit text must round-trip the native float exactly.
    let text: f64 = result["probability_text"].as_str().unwrap().parse().unwrap();
    assert_eq!(text.to_bits(), p.to_bits());
}

#[test]
fn probability_monte_carlo_reports_std_error() {
    let dir = TempDir::new().unwrap();
    let offset = 1.25;
    let config = write_config(
        dir.path(),
        "prob_mc.json",
        &json!({
            "interferometer": { "beam_splitter": { "tau": 0.5 } },
            "sources": hom_sources(offset),
            "output_ports": [1, 2],
            "measurement": { "analyzers": [0.0, 0.0] },
            "quadrature": { "monte_carlo": { "samples": 200000, "seed": 5 } }
        }),
    );
    let report = run_report(&["probability", "--config", config.to_str().unwrap()]);
    let result = &report["result"];
    let p = result["probability"].as_f64().unwrap();
    let sigma = result["std_error"].as_f64().unwrap();
    assert!(sigma > 0.0);
    let expected = analytic_coincidence(offset);
    assert!(
        (p - expected).abs() < 5.0 * sigma + 1e-9,
        "MC {p} vs {expected} with sigma {sigma}"
    );
}

#[test]
fn sample_single_photon_identity_lands_on_port_1() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "single_sample.json",
        &json!({
            "interferometer": { "matrix": [
                [[1.0, 0.0], [0.0, 0.0]],
                [[0.0, 0.0], [1.0, 0.0]]
            ] },
            "sources": [ { "omega0": 100.0, "delta_omega": 1.0 } ],
            "input_ports": [1],
            "grid": { "bins_per_detector": 8 },
            "count": 100,
            "seed": 3
        }),
    );
    let report = run_report(&["sample", "--config", config.to_str().unwrap()]);
    let result = &report["result"];
    let outcomes = result["outcomes"].as_array().unwrap();
    for draw in result["draws"].as_array().unwrap() {
        let record = &outcomes[draw.as_u64().unwrap() as usize];
        assert_eq!(record["output_ports"], json!([1]));
    }
}

#[test]
fn sample_rerun_with_same_seed_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "sample.json",
        &json!({
            "interferometer": { "haar": { "m": 4, "seed": 9 } },
            "sources": [
                { "omega0": 100.0, "delta_omega": 1.0, "theta": 0.3 },
                { "omega0": 100.0, "delta_omega": 1.0, "theta": 1.1 }
            ],
            "qubit_mode": true,
            "grid": { "bins_per_detector": 2 },
            "quadrature": { "gauss_legendre": { "nodes_per_dim": 8 } },
            "count": 40,
            "seed": 17
        }),
    );
    let base = dir.path().join("run");
    let args = [
        "sample",
        "--config",
        config.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
        "--quiet",
    ];
    let suffixes = ["run.json", "run.outcomes.jsonl", "run.draws.csv"];

    assert_eq!(exit_code(&run(&args)), 0);
    let first: Vec<Vec<u8>> = suffixes
        .iter()
        .map(|s| std::fs::read(dir.path().join(s)).unwrap())
        .collect();
    for s in &suffixes {
        std::fs::remove_file(dir.path().join(s)).unwrap();
    }
    assert_eq!(exit_code(&run(&args)), 0);
    for (s, before) in suffixes.iter().zip(&first) {
        let after = std::fs::read(dir.path().join(s)).unwrap();
        assert_eq!(&after, before, "{s} changed between identical runs");
    }
}

#[test]
fn sample_seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "seeded.json",
        &json!({
            "interferometer": { "beam_splitter": { "tau": 0.5 } },
            "sources": hom_sources(0.5),
            "grid": { "bins_per_detector": 4 },
            "quadrature": { "gauss_legendre": { "nodes_per_dim": 8 } },
            "count": 64,
            "seed": 1
        }),
    );
    let path = config.to_str().unwrap();
    let baseline = run_report(&["sample", "--config", path]);
    let overridden = run_report(&["sample", "--config", path, "--seed", "2"]);
    let repeat = run_report(&["sample", "--config", path, "--seed", "2"]);
    assert_eq!(baseline["result"]["effective_seed"], 1);
    assert_eq!(overridden["result"]["effective_seed"], 2);
    assert_ne!(
        baseline["result"]["draws"], overridden["result"]["draws"],
        "different seeds should give different draw sequences"
    );
    assert_eq!(overridden["result"]["draws"], repeat["result"]["draws"]);
}

#[test]
fn sample_enumeration_guard_exits_3() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "huge.json",
        &json!({
            "interferometer": { "haar": { "m": 4, "seed": 1 } },
            "sources": [
                { "omega0": 100.0, "delta_omega": 1.0 },
                { "omega0": 100.0, "delta_omega": 1.0 }
            ],
            "grid": { "bins_per_detector": 2000 },
            "count": 1
        }),
    );
    let out = run(&["sample", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("guard violation"));
}

#[test]
fn sample_with_empty_windows_exits_4() {
    // A grid placed centuries after the pulses: every weight underflows to
    // zero and sampling has nothing to normalize.
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "empty.json",
        &json!({
            "interferometer": { "haar": { "m": 2, "seed": 1 } },
            "sources": [ { "omega0": 100.0, "delta_omega": 1.0 } ],
            "grid": { "start": 500.0, "end": 510.0, "bins_per_detector": 2 },
            "count": 5
        }),
    );
    let out = run(&["sample", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));
}

#[test]
fn sample_qubit_draws_fit_weights() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "qubit.json",
        &json!({
            "interferometer": { "haar": { "m": 8, "seed": 42 } },
            "sources": [
                { "omega0": 100.0, "delta_omega": 1.0, "theta": 0.0 },
                { "omega0": 100.0, "delta_omega": 1.0, "theta": 1.5707963267948966 }
            ],
            "qubit_mode": true,
            "grid": { "bins_per_detector": 2 },
            "quadrature": { "gauss_legendre": { "nodes_per_dim": 8 } },
            "count": 3000,
            "seed": 2024
        }),
    );
    let base = dir.path().join("fit");
    let out = run(&[
        "sample",
        "--config",
        config.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(exit_code(&out), 0);

    let jsonl = std::fs::read_to_string(dir.path().join("fit.outcomes.jsonl")).unwrap();
    let weights: Vec<f64> = jsonl
        .lines()
        .map(|line| {
            let v: Value = serde_json::from_str(line).unwrap();
            v["weight"].as_f64().unwrap()
        })
        .collect();

    let csv = std::fs::read_to_string(dir.path().join("fit.draws.csv")).unwrap();
    let mut counts = vec![0u64; weights.len()];
    let mut draws = 0u64;
    for line in csv.lines().skip(1) {
        let record: usize = line.split(',').nth(1).unwrap().parse().unwrap();
        counts[record] += 1;
        draws += 1;
    }
    assert_eq!(draws, 3000);

    let p = chi_squared_p_value(&weights, &counts, draws);
    assert!(p > 0.001, "draws disagree with weights: p = {p}");
}

#[test]
fn sweep_delay_traces_the_coincidence_dip() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "sweep.json",
        &json!({
            "interferometer": { "beam_splitter": { "tau": 0.5 } },
            "sources": hom_sources(0.0),
            "output_ports": [1, 2],
            "measurement": { "analyzers": [0.0, 0.0] },
            "quadrature": { "gauss_legendre": { "nodes_per_dim": 20 } },
            "sweep": { "tau_min": -6.0, "tau_max": 6.0, "steps": 13 }
        }),
    );
    let base = dir.path().join("dip");
    let out = run(&[
        "sweep-delay",
        "--config",
        config.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(exit_code(&out), 0);

    let csv = std::fs::read_to_string(dir.path().join("dip.sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tau,coincidence_probability"));
    let mut rows = 0;
    for line in lines {
        let mut cols = line.split(',');
        let tau: f64 = cols.next().unwrap().parse().unwrap();
        let p: f64 = cols.next().unwrap().parse().unwrap();
        let expected = analytic_coincidence(tau);
        assert!(
            (p - expected).abs() < 1e-4,
            "tau {tau}: {p} vs analytic {expected}"
        );
        if tau == 0.0 {
            assert!(p.abs() < 1e-6, "dip floor {p}");
        }
        if tau.abs() >= 6.0 {
            assert!((p - 0.5).abs() < 1e-3, "distinguishable plateau {p}");
        }
        rows += 1;
    }
    assert_eq!(rows, 13);
}

#[test]
fn quiet_suppresses_stdout_and_report_header_is_self_describing() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        "hdr.json",
        &json!({
            "interferometer": { "beam_splitter": { "tau": 0.5 } },
            "sources": hom_sources(0.0),
            "output_ports": [1, 2],
            "times": [0.0, 0.0]
        }),
    );
    let base = dir.path().join("hdr");
    let out = run(&[
        "rate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty(), "quiet run still printed");

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("hdr.json")).unwrap())
            .unwrap();
    assert_eq!(report["tool"], "bosonq");
    assert_eq!(report["mode"], "rate");
    assert_eq!(report["schema_version"], 1);
    assert!(report["version"].as_str().unwrap().contains('.'));
    // The config echo must be complete enough to reproduce the run.
    assert_eq!(report["config"]["sources"].as_array().unwrap().len(), 2);
    assert_eq!(report["config"]["times"], json!([0.0, 0.0]));
}

/// χ² p-value of observed counts against expected proportional to weights.
/// Cells with expected count below 5 are pooled into a tail cell.
fn chi_squared_p_value(weights: &[f64], counts: &[u64], draws: u64) -> f64 {
    let total: f64 = weights.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut tail_expected = 0.0;
    let mut tail_observed = 0.0;
    for (w, &c) in weights.iter().zip(counts) {
        let expected = draws as f64 * w / total;
        if expected < 5.0 {
            tail_expected += expected;
            tail_observed += c as f64;
        } else {
            cells.push((expected, c as f64));
        }
    }
    if tail_expected >= 5.0 {
        cells.push((tail_expected, tail_observed));
    } else if let Some(last) = cells.last_mut() {
        last.0 += tail_expected;
        last.1 += tail_observed;
    }
    assert!(
        cells.len() >= 2,
        "need at least two cells for a χ² test, got {}",
        cells.len()
    );
    let statistic: f64 = cells
        .iter()
        .map(|(e, o)| (o - e) * (o - e) / e)
        .sum();
    let dof = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(statistic)
}
