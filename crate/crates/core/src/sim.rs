//! Scenario generation, Monte-Carlo runs and learning-curve metrics.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::adaptive::RegressionSample;
use crate::algorithm::{AlgoConfig, Forgetting, Strategy};
use crate::complexity::{complexity_count, OpCount};
use crate::diffusion::{
    edge_prob_for_degree, metropolis_combiner, random_topology, DiffusionNetwork, TopologyGraph,
};
use crate::error::{check_len, Error, Result};
use crate::incremental::{IncrementalNetwork, RingSchedule};
use crate::linalg::ComplexVector;

/// Reporting floor for dB values.
pub const DB_FLOOR: f64 = -120.0;

/// Expected number of links per node of the default random topology.
pub const DEFAULT_MEAN_DEGREE: f64 = 4.0;

const TOPOLOGY_STREAM: u64 = u64::MAX;

/// SplitMix64 finalizer applied to `master + stream`, used to derive
/// independent seeds for repetitions and topologies.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `10 log10(v)` floored at [`DB_FLOOR`].
pub fn to_db(v: f64) -> f64 {
    if v > 0.0 {
        (10.0 * v.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// System-identification scenario shared by every node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub taps: usize,
    pub nodes: usize,
    pub instants: usize,
    pub input_variance: f64,
    pub noise_variance: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            taps: 10,
            nodes: 20,
            instants: 1000,
            input_variance: 1.0,
            noise_variance: 0.001,
            seed: 1,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.taps == 0 {
            return Err(Error::invalid("taps", "must be at least 1"));
        }
        if self.nodes == 0 {
            return Err(Error::invalid("nodes", "must be at least 1"));
        }
        if !(self.input_variance > 0.0 && self.input_variance.is_finite()) {
            return Err(Error::invalid(
                "input_variance",
                format!("must be > 0, got {}", self.input_variance),
            ));
        }
        // Zero noise is allowed for noise-free consistency runs.
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::invalid(
                "noise_variance",
                format!("must be >= 0, got {}", self.noise_variance),
            ));
        }
        Ok(())
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Seeded sample source: draws `omega_true` once, then one sample per node
/// per instant.
#[derive(Debug, Clone)]
pub struct DataStream {
    rng: ChaCha8Rng,
    omega_true: ComplexVector,
    scenario: Scenario,
}

impl DataStream {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let raw: Vec<Complex64> = (0..scenario.taps)
            .map(|_| complex_gaussian(&mut rng, 1.0))
            .collect();
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let omega_true = ComplexVector::new(raw.into_iter().map(|c| c / norm).collect())?;
        Ok(Self {
            rng,
            omega_true,
            scenario: *scenario,
        })
    }

    pub fn omega_true(&self) -> &ComplexVector {
        &self.omega_true
    }

    /// Samples of the next instant, indexed by node.
    pub fn next_instant(&mut self) -> Vec<RegressionSample> {
        let sc = self.scenario;
        (0..sc.nodes)
            .map(|_| {
                let x: Vec<Complex64> = (0..sc.taps)
                    .map(|_| complex_gaussian(&mut self.rng, sc.input_variance))
                    .collect();
                let x = ComplexVector::new(x).expect("taps > 0");
                let noise = if sc.noise_variance > 0.0 {
                    complex_gaussian(&mut self.rng, sc.noise_variance)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let d = self.omega_true.inner(&x).expect("matching taps") + noise;
                RegressionSample::new(x, d)
            })
            .collect()
    }
}

/// Fully materialized scenario: `samples[i][k]` is node `k`'s sample at
/// instant `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioData {
    pub omega_true: ComplexVector,
    pub samples: Vec<Vec<RegressionSample>>,
}

pub fn generate_scenario(scenario: &Scenario) -> Result<ScenarioData> {
    let mut stream = DataStream::new(scenario)?;
    let samples = (0..scenario.instants)
        .map(|_| stream.next_instant())
        .collect();
    Ok(ScenarioData {
        omega_true: stream.omega_true.clone(),
        samples,
    })
}

/// `sigma_x^2 |omega_true - omega_est|^2`.
pub fn emse_at(
    omega_est: &ComplexVector,
    omega_true: &ComplexVector,
    input_variance: f64,
) -> Result<f64> {
    Ok(input_variance * omega_true.distance_sqr(omega_est)?)
}

/// How the diffusion topology is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologySpec {
    /// Erdos-Renyi graph drawn once from the master seed.
    Fixed {
        edge_prob: f64,
    },
    /// A fresh graph for every repetition.
    Redraw {
        edge_prob: f64,
    },
    Given(TopologyGraph),
}

/// Everything needed for one Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub scenario: Scenario,
    pub strategy: Strategy,
    pub algorithm: AlgoConfig,
    pub repetitions: usize,
    pub forgetting: Forgetting,
    pub topology: TopologySpec,
}

impl Experiment {
    /// Benchmark parameters of `algorithm` on the default scenario.
    pub fn benchmark(strategy: Strategy, algorithm: crate::algorithm::AlgorithmKind) -> Self {
        Self {
            scenario: Scenario::default(),
            strategy,
            algorithm: AlgoConfig::benchmark_default(strategy, algorithm),
            repetitions: 1000,
            forgetting: Forgetting::default(),
            topology: TopologySpec::Fixed {
                edge_prob: edge_prob_for_degree(Scenario::default().nodes, DEFAULT_MEAN_DEGREE),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.algorithm.validate()?;
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions", "must be at least 1"));
        }
        if let TopologySpec::Given(g) = &self.topology {
            check_len(self.scenario.nodes, g.nodes())?;
        }
        Ok(())
    }

    /// Topology used by `repetition`, or `None` for the incremental strategy.
    pub fn topology_for(&self, repetition: usize) -> Result<Option<TopologyGraph>> {
        if self.strategy == Strategy::Incremental {
            return Ok(None);
        }
        let n = self.scenario.nodes;
        let master = self.scenario.seed;
        let graph = match &self.topology {
            TopologySpec::Fixed { edge_prob } => {
                random_topology(n, *edge_prob, derive_seed(master, TOPOLOGY_STREAM))?
            }
            TopologySpec::Redraw { edge_prob } => random_topology(
                n,
                *edge_prob,
                derive_seed(derive_seed(master, repetition as u64), TOPOLOGY_STREAM),
            )?,
            TopologySpec::Given(g) => g.clone(),
        };
        Ok(Some(graph))
    }

    /// Data scenario of `repetition`: same for every algorithm.
    pub fn scenario_for(&self, repetition: usize) -> Scenario {
        Scenario {
            seed: derive_seed(self.scenario.seed, repetition as u64),
            ..self.scenario
        }
    }
}

/// Averaged learning curves and cost figures of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    /// A-priori EMSE per instant, averaged over repetitions, in dB.
    pub emse_db: Vec<f64>,
    /// A-priori MSD per instant, averaged over repetitions, in dB.
    pub msd_db: Vec<f64>,
    /// Closed-form network-wide additions per instant, if tabulated.
    pub adds: Option<u64>,
    /// Closed-form network-wide multiplications per instant, if tabulated.
    pub mults: Option<u64>,
    /// Operations counted inside the kernels over the first repetition.
    pub measured: OpCount,
    /// Node updates performed in the first repetition.
    pub node_updates: u64,
    pub repetitions: usize,
}

impl MetricSeries {
    /// Mean of the last `tail` dB values.
    pub fn steady_state_db(&self, tail: usize) -> f64 {
        let tail = tail.clamp(1, self.emse_db.len().max(1));
        let slice = &self.emse_db[self.emse_db.len().saturating_sub(tail)..];
        slice.iter().sum::<f64>() / slice.len() as f64
    }
}

struct Curves {
    emse: Vec<f64>,
    msd: Vec<f64>,
    ops: OpCount,
}

enum Network {
    Ring(IncrementalNetwork),
    Diffusion(DiffusionNetwork),
}

impl Network {
    fn build(exp: &Experiment, topology: Option<TopologyGraph>) -> Result<Self> {
        let taps = exp.scenario.taps;
        Ok(match topology {
            None => Network::Ring(IncrementalNetwork::new(
                taps,
                RingSchedule::sequential(exp.scenario.nodes),
                &exp.algorithm,
                exp.forgetting,
            )?),
            Some(g) => Network::Diffusion(DiffusionNetwork::new(
                taps,
                metropolis_combiner(&g),
                &exp.algorithm,
            )?),
        })
    }

    /// `omega_{i-1}` for a ring, the node average of `psi` for diffusion.
    fn estimate(&self) -> ComplexVector {
        match self {
            Network::Ring(net) => net.estimate().clone(),
            Network::Diffusion(net) => {
                let psi = net.estimates();
                let mut mean = ComplexVector::zeros(psi[0].len());
                let w = Complex64::new(1.0 / psi.len() as f64, 0.0);
                for p in psi {
                    mean.axpy(w, p).expect("equal lengths");
                }
                mean
            }
        }
    }

    fn step(&mut self, samples: &[RegressionSample]) -> Result<()> {
        match self {
            Network::Ring(net) => net.step(samples),
            Network::Diffusion(net) => net.step(samples),
        }
    }

    fn ops(&self) -> OpCount {
        match self {
            Network::Ring(net) => net.ops(),
            Network::Diffusion(net) => net.ops(),
        }
    }
}

fn run_repetition(exp: &Experiment, repetition: usize) -> Result<Curves> {
    let mut stream = DataStream::new(&exp.scenario_for(repetition))?;
    let mut net = Network::build(exp, exp.topology_for(repetition)?)?;
    let t = exp.scenario.instants;
    let mut emse = Vec::with_capacity(t);
    let mut msd = Vec::with_capacity(t);
    for _ in 0..t {
        let samples = stream.next_instant();
        let dev = stream.omega_true().distance_sqr(&net.estimate())?;
        emse.push(exp.scenario.input_variance * dev);
        msd.push(dev);
        net.step(&samples)?;
    }
    Ok(Curves {
        emse,
        msd,
        ops: net.ops(),
    })
}

/// Closed-form network-wide cost per instant, summed over nodes.
pub fn network_complexity(exp: &Experiment, topology: Option<&TopologyGraph>) -> Option<OpCount> {
    let m = exp.scenario.taps as u64;
    let kind = exp.algorithm.kind();
    let j = match exp.algorithm {
        AlgoConfig::Ccg(p) => Some(p.inner_iterations() as u64),
        _ => None,
    };
    let mut total = OpCount::default();
    for k in 0..exp.scenario.nodes {
        let linked = topology.map(|g| g.closed_degree(k) as u64);
        total += complexity_count(exp.strategy, kind, m, j, linked).ok()?;
    }
    Some(total)
}

/// Runs every repetition in parallel and averages the curves.
///
/// Repetition `r` draws its data from `derive_seed(seed, r)`, so the result
/// does not depend on scheduling and two algorithms run with the same
/// scenario see identical streams.
pub fn run_experiment(exp: &Experiment) -> Result<MetricSeries> {
    exp.validate()?;
    let results: Vec<Result<Curves>> = (0..exp.repetitions)
        .into_par_iter()
        .map(|r| run_repetition(exp, r))
        .collect();

    let t = exp.scenario.instants;
    let mut emse = vec![0.0; t];
    let mut msd = vec![0.0; t];
    let mut measured = OpCount::default();
    for (r, result) in results.into_iter().enumerate() {
        let curves = result.map_err(|e| Error::Repetition {
            repetition: r,
            source: Box::new(e),
        })?;
        if r == 0 {
            measured = curves.ops;
        }
        for i in 0..t {
            emse[i] += curves.emse[i];
            msd[i] += curves.msd[i];
        }
    }
    let reps = exp.repetitions as f64;
    let cost = network_complexity(exp, exp.topology_for(0)?.as_ref());
    Ok(MetricSeries {
        emse_db: emse.iter().map(|v| to_db(v / reps)).collect(),
        msd_db: msd.iter().map(|v| to_db(v / reps)).collect(),
        adds: cost.map(|c| c.adds),
        mults: cost.map(|c| c.mults),
        measured,
        node_updates: (exp.scenario.nodes * t) as u64,
        repetitions: exp.repetitions,
    })
}
