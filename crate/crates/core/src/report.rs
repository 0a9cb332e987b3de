//! CSV, metadata and plot-script output of a run.
//!
//! Every algorithm `label` of a run produces `label.csv` with the header
//! `instant,emse_db,msd_db` and a `label.meta` sidecar of `key=value`
//! lines. Compare mode adds `compare.csv`, one EMSE column per algorithm.
//! With plotting enabled a gnuplot script is written next to each table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use crate::algorithm::AlgoConfig;
use crate::config::{RunConfig, TopologyChoice};
use crate::error::{Error, Result};
use crate::sim::{run_experiment, Experiment, MetricSeries};

/// Instants averaged for the steady-state figure in the metadata.
pub const STEADY_STATE_TAIL: usize = 100;

/// Learning curve as CSV text; instants are numbered from 1.
pub fn format_csv(series: &MetricSeries) -> String {
    let mut out = String::from("instant,emse_db,msd_db\n");
    for (i, (e, m)) in series.emse_db.iter().zip(&series.msd_db).enumerate() {
        let _ = writeln!(out, "{},{e:.6},{m:.6}", i + 1);
    }
    out
}

/// EMSE columns of several runs side by side.
pub fn format_compare_csv(runs: &[(String, MetricSeries)]) -> Result<String> {
    let t = runs.first().map_or(0, |(_, s)| s.emse_db.len());
    if let Some((label, _)) = runs.iter().find(|(_, s)| s.emse_db.len() != t) {
        return Err(Error::invalid(
            "compare",
            format!("{label} has a different number of instants"),
        ));
    }
    let mut out = String::from("instant");
    for (label, _) in runs {
        let _ = write!(out, ",{label}_emse_db");
    }
    out.push('\n');
    for i in 0..t {
        let _ = write!(out, "{}", i + 1);
        for (_, s) in runs {
            let _ = write!(out, ",{:.6}", s.emse_db[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

fn algorithm_meta(config: &AlgoConfig) -> String {
    let mut out = String::new();
    match config {
        AlgoConfig::Ccg(p) | AlgoConfig::Mcg(p) => {
            let _ = writeln!(out, "lambda_f={}", p.lambda_f());
            let _ = writeln!(out, "eta={}", p.eta());
            if matches!(config, AlgoConfig::Ccg(_)) {
                let _ = writeln!(out, "inner_iterations={}", p.inner_iterations());
            }
            let _ = writeln!(out, "delta={}", p.delta());
            let _ = writeln!(out, "step_rule={}", p.step_rule().as_str());
        }
        AlgoConfig::Lms { mu } => {
            let _ = writeln!(out, "mu={mu}");
        }
        AlgoConfig::Rls { lambda, delta } => {
            let _ = writeln!(out, "lambda={lambda}");
            let _ = writeln!(out, "delta={delta}");
        }
        AlgoConfig::Ap { mu, order } => {
            let _ = writeln!(out, "mu={mu}");
            let _ = writeln!(out, "projection_order={order}");
        }
    }
    out
}

/// Metadata sidecar of one run.
pub fn format_meta(
    label: &str,
    exp: &Experiment,
    topology: &TopologyChoice,
    series: &MetricSeries,
) -> String {
    let sc = &exp.scenario;
    let mut out = String::new();
    let mut put = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{k}={v}");
    };
    put("label", &label);
    put("strategy", &exp.strategy);
    put("algorithm", &exp.algorithm.kind());
    put("nodes", &sc.nodes);
    put("taps", &sc.taps);
    put("instants", &sc.instants);
    put("input_variance", &sc.input_variance);
    put("noise_variance", &sc.noise_variance);
    put("seed", &sc.seed);
    put("repetitions", &series.repetitions);
    put("forgetting", &exp.forgetting.as_str());
    match topology {
        TopologyChoice::Fixed { edge_prob } => {
            put("topology", &"fixed");
            put("edge_prob", edge_prob);
        }
        TopologyChoice::Redraw { edge_prob } => {
            put("topology", &"redraw");
            put("edge_prob", edge_prob);
        }
        TopologyChoice::File { path, .. } => {
            put("topology", &"file");
            put("topology_file", &path.display());
        }
    }
    let na = |v: Option<u64>| v.map_or_else(|| "n/a".to_string(), |v| v.to_string());
    put("closed_form_adds_per_instant", &na(series.adds));
    put("closed_form_mults_per_instant", &na(series.mults));
    put("measured_adds", &series.measured.adds);
    put("measured_mults", &series.measured.mults);
    put("measured_node_updates", &series.node_updates);
    put(
        "steady_state_emse_db",
        &format!("{:.6}", series.steady_state_db(STEADY_STATE_TAIL)),
    );
    out.push_str(&algorithm_meta(&exp.algorithm));
    out
}

/// Gnuplot script drawing EMSE columns `2..` of `csv` against the instant.
pub fn format_gnuplot(csv: &str, columns: &[String], title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set title '{title}'");
    let _ = writeln!(out, "set xlabel 'time instant'");
    let _ = writeln!(out, "set ylabel 'EMSE (dB)'");
    let _ = writeln!(out, "set key top right");
    let _ = writeln!(out, "set grid");
    let plots: Vec<String> = columns
        .iter()
        .enumerate()
        .map(|(i, name)| format!("'{csv}' using 1:{} with lines title '{name}'", i + 2))
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    out
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Outcome of [`run_and_emit`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub runs: Vec<(String, MetricSeries)>,
    pub files: Vec<PathBuf>,
}

/// Runs every configured experiment and writes the output files into
/// `cfg.output`, which is created if missing.
pub fn run_and_emit(cfg: &RunConfig) -> Result<RunReport> {
    let dir: &Path = &cfg.output;
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    let mut runs = Vec::new();
    files.push(write(dir.join("run.conf"), &cfg.to_text())?);
    for (label, exp) in cfg.experiments() {
        info!("running {label}: {} repetitions", exp.repetitions);
        let series = run_experiment(&exp)?;
        let csv_name = format!("{label}.csv");
        files.push(write(dir.join(&csv_name), &format_csv(&series))?);
        files.push(write(
            dir.join(format!("{label}.meta")),
            &format_meta(&label, &exp, &cfg.topology, &series),
        )?);
        if cfg.plot {
            files.push(write(
                dir.join(format!("{label}.gp")),
                &format_gnuplot(&csv_name, std::slice::from_ref(&label), &label),
            )?);
        }
        runs.push((label, series));
    }
    if cfg.compare {
        files.push(write(dir.join("compare.csv"), &format_compare_csv(&runs)?)?);
        if cfg.plot {
            let labels: Vec<String> = runs.iter().map(|(l, _)| l.clone()).collect();
            files.push(write(
                dir.join("compare.gp"),
                &format_gnuplot("compare.csv", &labels, "EMSE learning curves"),
            )?);
        }
    }
    Ok(RunReport { runs, files })
}
