//! Command-line front end for the distributed CG simulations.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use distcg::config::{parse_pairs, RunConfig};
use distcg::report::{run_and_emit, STEADY_STATE_TAIL};
use distcg::Error;

const USAGE_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

/// Monte-Carlo EMSE learning curves for incremental and diffusion
/// adaptive networks.
///
/// Values from `--config` are read first; any flag given on the command
/// line overrides them. Unset parameters take the benchmark defaults of the
/// selected strategy and algorithm.
#[derive(Debug, Parser)]
#[command(name = "distcg", version)]
struct Cli {
    /// Flat `key = value` configuration file using the flag names as keys.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Cooperation strategy: incremental or diffusion.
    #[arg(long)]
    strategy: Option<String>,
    /// Adaptive algorithm: ccg, mcg, lms, rls or ap.
    #[arg(long)]
    algorithm: Option<String>,
    /// Comma-separated labels such as idlms,idmcg run on identical data.
    #[arg(long, value_name = "LABELS")]
    compare: Option<String>,

    /// Number of nodes N.
    #[arg(long)]
    nodes: Option<String>,
    /// Filter length M.
    #[arg(long)]
    taps: Option<String>,
    /// Time instants per repetition.
    #[arg(long)]
    instants: Option<String>,
    /// Monte-Carlo repetitions.
    #[arg(long)]
    repetitions: Option<String>,
    /// Input signal variance.
    #[arg(long)]
    input_variance: Option<String>,
    /// Measurement noise variance.
    #[arg(long)]
    noise_variance: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<String>,

    /// Forgetting factor lambda_f of the CG statistics.
    #[arg(long)]
    lambda_f: Option<String>,
    /// CG step scaling eta, within [lambda_f - 0.5, lambda_f].
    #[arg(long)]
    eta: Option<String>,
    /// Inner iterations J of CCG.
    #[arg(long)]
    inner_iterations: Option<String>,
    /// Regularization delta of the initial correlation.
    #[arg(long)]
    delta: Option<String>,
    /// CG step rule: eta or classic.
    #[arg(long)]
    step_rule: Option<String>,
    /// Step size of LMS and AP.
    #[arg(long)]
    mu: Option<String>,
    /// Forgetting factor of RLS.
    #[arg(long)]
    lambda: Option<String>,
    /// Projection order K of AP.
    #[arg(long)]
    projection_order: Option<String>,
    /// Where incremental chains forget: per-cycle or per-visit.
    #[arg(long)]
    forgetting: Option<String>,

    /// Diffusion topology: fixed, redraw or file.
    #[arg(long)]
    topology: Option<String>,
    /// Link probability of random topologies.
    #[arg(long)]
    edge_prob: Option<String>,
    /// Edge list: node count on the first line, then `k l` pairs (1-based).
    #[arg(long, value_name = "FILE")]
    topology_file: Option<String>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    output: Option<String>,
    /// Also write gnuplot scripts.
    #[arg(long)]
    plot: bool,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("strategy", self.strategy.clone()),
            ("algorithm", self.algorithm.clone()),
            ("compare", self.compare.clone()),
            ("nodes", self.nodes.clone()),
            ("taps", self.taps.clone()),
            ("instants", self.instants.clone()),
            ("repetitions", self.repetitions.clone()),
            ("input-variance", self.input_variance.clone()),
            ("noise-variance", self.noise_variance.clone()),
            ("seed", self.seed.clone()),
            ("lambda-f", self.lambda_f.clone()),
            ("eta", self.eta.clone()),
            ("inner-iterations", self.inner_iterations.clone()),
            ("delta", self.delta.clone()),
            ("step-rule", self.step_rule.clone()),
            ("mu", self.mu.clone()),
            ("lambda", self.lambda.clone()),
            ("projection-order", self.projection_order.clone()),
            ("forgetting", self.forgetting.clone()),
            ("topology", self.topology.clone()),
            ("edge-prob", self.edge_prob.clone()),
            ("topology-file", self.topology_file.clone()),
            ("output", self.output.clone()),
            ("plot", self.plot.then(|| "true".to_string())),
        ]
    }

    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut pairs: BTreeMap<String, String> = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                parse_pairs(&text)?
            }
            None => BTreeMap::new(),
        };
        // A mode chosen on the command line replaces the one in the file.
        if self.compare.is_some() {
            pairs.remove("strategy");
            pairs.remove("algorithm");
        } else if self.strategy.is_some() || self.algorithm.is_some() {
            pairs.retain(|k, _| k != "compare" && !k.contains('.'));
        }
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                pairs.insert(key.to_string(), v);
            }
        }
        Ok(RunConfig::from_pairs(&pairs)?)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match cli.resolve() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("distcg: {e:#}");
            return ExitCode::from(USAGE_ERROR);
        }
    };
    if cli.print_config {
        let _ = write!(std::io::stdout(), "{}", cfg.to_text());
        return ExitCode::SUCCESS;
    }
    match run_and_emit(&cfg) {
        Ok(report) => {
            // Output goes to files; a closed stdout is not an error.
            let mut out = std::io::stdout().lock();
            for (label, series) in &report.runs {
                let tail = STEADY_STATE_TAIL.min(series.emse_db.len());
                let _ = writeln!(
                    out,
                    "{label}: steady-state EMSE {:.2} dB (last {tail} instants)",
                    series.steady_state_db(tail)
                );
            }
            for file in &report.files {
                let _ = writeln!(out, "wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("distcg: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            match e {
                Error::Config { .. } | Error::InvalidParameter { .. } => {
                    ExitCode::from(USAGE_ERROR)
                }
                _ => ExitCode::from(RUNTIME_ERROR),
            }
        }
    }
}
