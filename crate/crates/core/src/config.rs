//! Run configuration in a flat `key = value` format.
//!
//! The same kebab-case keys are used by the configuration file and the
//! command-line flags. Algorithm parameters default to the benchmark values
//! of the selected strategy; in compare mode a key may be scoped to one
//! algorithm as `label.key` (for example `idmcg.eta = 0.1`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::adaptive::{CgParams, StepRule};
use crate::algorithm::{AlgoConfig, AlgorithmKind, Forgetting, Strategy};
use crate::diffusion::{edge_prob_for_degree, TopologyGraph};
use crate::error::{Error, Result};
use crate::sim::{Experiment, Scenario, TopologySpec, DEFAULT_MEAN_DEGREE};

/// Keys that apply to the whole run.
pub const GLOBAL_KEYS: &[&str] = &[
    "strategy",
    "algorithm",
    "compare",
    "nodes",
    "taps",
    "instants",
    "repetitions",
    "input-variance",
    "noise-variance",
    "seed",
    "forgetting",
    "topology",
    "edge-prob",
    "topology-file",
    "output",
    "plot",
];

/// Keys that configure one algorithm.
pub const ALGORITHM_KEYS: &[&str] = &[
    "lambda-f",
    "eta",
    "inner-iterations",
    "delta",
    "step-rule",
    "mu",
    "lambda",
    "projection-order",
];

fn accepts(kind: AlgorithmKind, key: &str) -> bool {
    matches!(
        (kind, key),
        (
            AlgorithmKind::Ccg,
            "lambda-f" | "eta" | "inner-iterations" | "delta" | "step-rule"
        ) | (
            AlgorithmKind::Mcg,
            "lambda-f" | "eta" | "delta" | "step-rule"
        ) | (AlgorithmKind::Lms, "mu")
            | (AlgorithmKind::Rls, "lambda" | "delta")
            | (AlgorithmKind::Ap, "mu" | "projection-order")
    )
}

/// Topology selection for diffusion runs.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologyChoice {
    Fixed { edge_prob: f64 },
    Redraw { edge_prob: f64 },
    File { path: PathBuf, graph: TopologyGraph },
}

impl TopologyChoice {
    pub fn spec(&self) -> TopologySpec {
        match self {
            TopologyChoice::Fixed { edge_prob } => TopologySpec::Fixed {
                edge_prob: *edge_prob,
            },
            TopologyChoice::Redraw { edge_prob } => TopologySpec::Redraw {
                edge_prob: *edge_prob,
            },
            TopologyChoice::File { graph, .. } => TopologySpec::Given(graph.clone()),
        }
    }
}

/// One algorithm of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunEntry {
    pub strategy: Strategy,
    pub algorithm: AlgoConfig,
}

impl RunEntry {
    pub fn label(&self) -> String {
        self.algorithm.kind().label(self.strategy)
    }
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// The algorithms to run; more than one only in compare mode.
    pub entries: Vec<RunEntry>,
    pub compare: bool,
    pub scenario: Scenario,
    pub repetitions: usize,
    pub forgetting: Forgetting,
    pub topology: TopologyChoice,
    pub output: PathBuf,
    pub plot: bool,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got `{line}`"),
            )
        })?;
        let key = key.trim().to_string();
        if pairs
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::config(key, "given more than once"));
        }
    }
    Ok(pairs)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

/// Renames parameter errors to the configuration key that caused them.
fn keyed(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::config(name.replace('_', "-"), reason),
        other => other,
    }
}

fn build_algorithm(
    strategy: Strategy,
    kind: AlgorithmKind,
    params: &BTreeMap<&str, &str>,
) -> Result<AlgoConfig> {
    let get = |key: &str| params.get(key).copied();
    let f = |key: &str, default: f64| -> Result<f64> {
        get(key).map_or(Ok(default), |v| parse_num(key, v))
    };
    let config = match AlgoConfig::benchmark_default(strategy, kind) {
        AlgoConfig::Ccg(d) | AlgoConfig::Mcg(d) => {
            let j = get("inner-iterations").map_or(Ok(d.inner_iterations()), |v| {
                parse_num("inner-iterations", v)
            })?;
            let rule = get("step-rule").map_or(Ok(d.step_rule()), str::parse::<StepRule>)?;
            let p = CgParams::new(f("lambda-f", d.lambda_f())?, f("eta", d.eta())?, j)
                .and_then(|p| p.with_delta(f("delta", d.delta())?))
                .map_err(keyed)?
                .with_step_rule(rule);
            if kind == AlgorithmKind::Ccg {
                AlgoConfig::Ccg(p)
            } else {
                AlgoConfig::Mcg(p)
            }
        }
        AlgoConfig::Lms { mu } => AlgoConfig::Lms { mu: f("mu", mu)? },
        AlgoConfig::Rls { lambda, delta } => AlgoConfig::Rls {
            lambda: f("lambda", lambda)?,
            delta: f("delta", delta)?,
        },
        AlgoConfig::Ap { mu, order } => AlgoConfig::Ap {
            mu: f("mu", mu)?,
            order: get("projection-order")
                .map_or(Ok(order), |v| parse_num("projection-order", v))?,
        },
    };
    config.validate().map_err(keyed)?;
    Ok(config)
}

fn algorithm_pairs(config: &AlgoConfig) -> Vec<(&'static str, String)> {
    match config {
        AlgoConfig::Ccg(p) | AlgoConfig::Mcg(p) => {
            let mut v = vec![
                ("lambda-f", p.lambda_f().to_string()),
                ("eta", p.eta().to_string()),
            ];
            if matches!(config, AlgoConfig::Ccg(_)) {
                v.push(("inner-iterations", p.inner_iterations().to_string()));
            }
            v.push(("delta", p.delta().to_string()));
            v.push(("step-rule", p.step_rule().as_str().to_string()));
            v
        }
        AlgoConfig::Lms { mu } => vec![("mu", mu.to_string())],
        AlgoConfig::Rls { lambda, delta } => {
            vec![("lambda", lambda.to_string()), ("delta", delta.to_string())]
        }
        AlgoConfig::Ap { mu, order } => vec![
            ("mu", mu.to_string()),
            ("projection-order", order.to_string()),
        ],
    }
}

impl RunConfig {
    /// Builds a configuration from key/value pairs, filling defaults and
    /// rejecting unknown, inapplicable or conflicting keys.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut global: BTreeMap<&str, &str> = BTreeMap::new();
        let mut shared: BTreeMap<&str, &str> = BTreeMap::new();
        let mut scoped: BTreeMap<String, BTreeMap<&str, &str>> = BTreeMap::new();
        for (key, value) in pairs {
            let (scope, name) = match key.split_once('.') {
                Some((scope, name)) => (Some(scope), name),
                None => (None, key.as_str()),
            };
            let value = value.as_str();
            match (scope, name) {
                (None, n) if GLOBAL_KEYS.contains(&n) => {
                    global.insert(n, value);
                }
                (None, n) if ALGORITHM_KEYS.contains(&n) => {
                    shared.insert(n, value);
                }
                (Some(scope), n) if ALGORITHM_KEYS.contains(&n) => {
                    scoped
                        .entry(scope.to_string())
                        .or_default()
                        .insert(n, value);
                }
                _ => return Err(Error::config(key.clone(), "unknown key")),
            }
        }

        let targets: Vec<(Strategy, AlgorithmKind)> = match global.get("compare") {
            Some(list) => {
                for conflicting in ["strategy", "algorithm"] {
                    if global.contains_key(conflicting) {
                        return Err(Error::config(
                            conflicting,
                            "cannot be combined with `compare`; use labels such as idmcg",
                        ));
                    }
                }
                let labels: Vec<&str> = list
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect();
                if labels.is_empty() {
                    return Err(Error::config("compare", "needs at least one label"));
                }
                let mut targets = Vec::new();
                for label in labels {
                    let t = AlgorithmKind::parse_label(label)?;
                    if targets.contains(&t) {
                        return Err(Error::config("compare", format!("`{label}` listed twice")));
                    }
                    targets.push(t);
                }
                targets
            }
            None => {
                if !scoped.is_empty() {
                    let scope = scoped.keys().next().expect("non-empty");
                    return Err(Error::config(
                        scope.clone(),
                        "scoped keys are only valid together with `compare`",
                    ));
                }
                let strategy = global
                    .get("strategy")
                    .ok_or_else(|| Error::config("strategy", "required"))?
                    .parse()?;
                let kind = global
                    .get("algorithm")
                    .ok_or_else(|| Error::config("algorithm", "required"))?
                    .parse()?;
                vec![(strategy, kind)]
            }
        };

        for key in shared.keys() {
            if !targets.iter().any(|&(_, k)| accepts(k, key)) {
                return Err(Error::config(
                    *key,
                    "does not apply to the selected algorithm".to_string(),
                ));
            }
        }
        for (scope, keys) in &scoped {
            let (s, k) = AlgorithmKind::parse_label(scope)?;
            if !targets.contains(&(s, k)) {
                return Err(Error::config(scope.clone(), "label is not in `compare`"));
            }
            if let Some(bad) = keys.keys().find(|key| !accepts(k, key)) {
                return Err(Error::config(
                    format!("{scope}.{bad}"),
                    format!("does not apply to {scope}"),
                ));
            }
        }

        let mut entries = Vec::with_capacity(targets.len());
        for &(strategy, kind) in &targets {
            let label = kind.label(strategy);
            let mut params: BTreeMap<&str, &str> = shared
                .iter()
                .filter(|(key, _)| accepts(kind, key))
                .map(|(k, v)| (*k, *v))
                .collect();
            if let Some(own) = scoped.get(&label) {
                params.extend(own.iter().map(|(k, v)| (*k, *v)));
            }
            entries.push(RunEntry {
                strategy,
                algorithm: build_algorithm(strategy, kind, &params)?,
            });
        }

        let defaults = Scenario::default();
        let num = |key: &str| global.get(key).copied();
        let scenario = Scenario {
            taps: num("taps").map_or(Ok(defaults.taps), |v| parse_num("taps", v))?,
            nodes: num("nodes").map_or(Ok(defaults.nodes), |v| parse_num("nodes", v))?,
            instants: num("instants")
                .map_or(Ok(defaults.instants), |v| parse_num("instants", v))?,
            input_variance: num("input-variance").map_or(Ok(defaults.input_variance), |v| {
                parse_num("input-variance", v)
            })?,
            noise_variance: num("noise-variance").map_or(Ok(defaults.noise_variance), |v| {
                parse_num("noise-variance", v)
            })?,
            seed: num("seed").map_or(Ok(defaults.seed), |v| parse_num("seed", v))?,
        };
        scenario.validate().map_err(keyed)?;
        if scenario.instants == 0 {
            return Err(Error::config("instants", "must be at least 1"));
        }

        let repetitions: usize =
            num("repetitions").map_or(Ok(1000), |v| parse_num("repetitions", v))?;
        if repetitions == 0 {
            return Err(Error::config("repetitions", "must be at least 1"));
        }
        let forgetting = num("forgetting").map_or(Ok(Forgetting::default()), str::parse)?;

        let edge_prob: f64 = num("edge-prob").map_or(
            Ok(edge_prob_for_degree(scenario.nodes, DEFAULT_MEAN_DEGREE)),
            |v| parse_num("edge-prob", v),
        )?;
        if !(edge_prob > 0.0 && edge_prob <= 1.0) {
            return Err(Error::config(
                "edge-prob",
                format!("must lie in (0, 1], got {edge_prob}"),
            ));
        }
        let topology = match (num("topology"), num("topology-file")) {
            (Some("file") | None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::config("topology-file", format!("{path}: {e}")))?;
                let graph = TopologyGraph::from_edge_list(&text)
                    .map_err(|e| Error::config("topology-file", e.to_string()))?;
                if graph.nodes() != scenario.nodes {
                    return Err(Error::config(
                        "topology-file",
                        format!(
                            "graph has {} nodes but the run uses {}",
                            graph.nodes(),
                            scenario.nodes
                        ),
                    ));
                }
                TopologyChoice::File {
                    path: PathBuf::from(path),
                    graph,
                }
            }
            (Some("file"), None) => {
                return Err(Error::config(
                    "topology-file",
                    "required for topology = file",
                ))
            }
            (Some("fixed") | None, None) => TopologyChoice::Fixed { edge_prob },
            (Some("redraw"), None) => TopologyChoice::Redraw { edge_prob },
            (Some(mode @ ("fixed" | "redraw")), Some(_)) => {
                return Err(Error::config(
                    "topology-file",
                    format!("conflicts with topology = {mode}"),
                ))
            }
            (Some(other), _) => {
                return Err(Error::config(
                    "topology",
                    format!("unknown mode `{other}` (expected fixed, redraw or file)"),
                ))
            }
        };

        let plot = match num("plot") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => {
                return Err(Error::config(
                    "plot",
                    format!("expected true or false, got `{other}`"),
                ))
            }
        };

        Ok(Self {
            entries,
            compare: global.contains_key("compare"),
            scenario,
            repetitions,
            forgetting,
            topology,
            output: PathBuf::from(num("output").unwrap_or("results")),
            plot,
        })
    }

    /// Parses configuration text.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    /// Canonical `key = value` text; [`RunConfig::parse`] restores an equal
    /// configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if self.compare {
            let labels: Vec<String> = self.entries.iter().map(RunEntry::label).collect();
            put("compare", &labels.join(","));
        } else {
            let e = &self.entries[0];
            put("strategy", &e.strategy);
            put("algorithm", &e.algorithm.kind());
        }
        for e in &self.entries {
            for (k, v) in algorithm_pairs(&e.algorithm) {
                if self.compare {
                    put(&format!("{}.{k}", e.label()), &v);
                } else {
                    put(k, &v);
                }
            }
        }
        let sc = &self.scenario;
        put("nodes", &sc.nodes);
        put("taps", &sc.taps);
        put("instants", &sc.instants);
        put("input-variance", &sc.input_variance);
        put("noise-variance", &sc.noise_variance);
        put("seed", &sc.seed);
        put("repetitions", &self.repetitions);
        put("forgetting", &self.forgetting.as_str());
        match &self.topology {
            TopologyChoice::Fixed { edge_prob } => {
                put("topology", &"fixed");
                put("edge-prob", edge_prob);
            }
            TopologyChoice::Redraw { edge_prob } => {
                put("topology", &"redraw");
                put("edge-prob", edge_prob);
            }
            TopologyChoice::File { path, .. } => {
                put("topology", &"file");
                put("topology-file", &path.display());
            }
        }
        put("output", &self.output.display());
        put("plot", &self.plot);
        out
    }

    /// One experiment per entry, all sharing the scenario and seed.
    pub fn experiments(&self) -> Vec<(String, Experiment)> {
        self.entries
            .iter()
            .map(|e| {
                (
                    e.label(),
                    Experiment {
                        scenario: self.scenario,
                        strategy: e.strategy,
                        algorithm: e.algorithm,
                        repetitions: self.repetitions,
                        forgetting: self.forgetting,
                        topology: self.topology.spec(),
                    },
                )
            })
            .collect()
    }
}
