//! Diffusion (combine-then-adapt) cooperation.
//!
//! At every instant each node first combines the previous estimates of its
//! closed neighborhood with a row-stochastic combiner, then adapts the
//! combination with its own sample. The step is synchronous: every
//! combination reads estimates from instant `i - 1` only.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adaptive::{
    ccg_inner_solve_counted, mcg_node_update, CgParams, CgState, RegressionSample, SecondOrderState,
};
use crate::algorithm::AlgoConfig;
use crate::baseline::{lms_update, ApHistory, RlsState};
use crate::complexity::OpCount;
use crate::error::{check_len, Error, Result};
use crate::linalg::ComplexVector;

/// Resampling budget of [`random_topology`].
pub const MAX_TOPOLOGY_ATTEMPTS: usize = 1000;

/// Undirected, connected graph over `N` nodes. Self-loops are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyGraph {
    n: usize,
    adjacency: Vec<bool>,
}

impl TopologyGraph {
    /// Builds a graph from 0-based edges and checks that it is connected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let g = Self::unchecked(n, edges)?;
        if !g.is_connected() {
            return Err(Error::Topology(format!(
                "graph on {n} nodes is not connected"
            )));
        }
        Ok(g)
    }

    fn unchecked(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Topology("graph must have at least one node".into()));
        }
        let mut adjacency = vec![false; n * n];
        for &(k, l) in edges {
            if k >= n || l >= n {
                return Err(Error::Topology(format!(
                    "edge ({k}, {l}) references a node outside 0..{n}"
                )));
            }
            if k != l {
                adjacency[k * n + l] = true;
                adjacency[l * n + k] = true;
            }
        }
        Ok(Self { n, adjacency })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|k| ((k + 1)..n).map(move |l| (k, l)))
            .collect();
        Self::unchecked(n, &edges).expect("complete graph is valid")
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn linked(&self, k: usize, l: usize) -> bool {
        k != l && self.adjacency[k * self.n + l]
    }

    /// Closed neighborhood of `k`, including `k`, in increasing order.
    pub fn neighborhood(&self, k: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&l| l == k || self.linked(k, l))
            .collect()
    }

    /// `|N_k|` counting `k` itself.
    pub fn closed_degree(&self, k: usize) -> usize {
        1 + (0..self.n).filter(|&l| self.linked(k, l)).count()
    }

    /// Edges `(k, l)` with `k < l`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|k| ((k + 1)..self.n).map(move |l| (k, l)))
            .filter(|&(k, l)| self.linked(k, l))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(k) = queue.pop_front() {
            for (l, s) in seen.iter_mut().enumerate() {
                if !*s && self.linked(k, l) {
                    *s = true;
                    reached += 1;
                    queue.push_back(l);
                }
            }
        }
        reached == self.n
    }

    /// Edge-list text: the node count on the first line, then one 1-based
    /// `k l` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (k, l) in self.edges() {
            let _ = writeln!(out, "{} {}", k + 1, l + 1);
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Topology("empty edge list".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::Topology(format!("bad node count `{header}`")))?;
        let mut edges = Vec::new();
        for (lineno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(v) if v >= 1 && v <= n => Ok(v - 1),
                    _ => Err(Error::Topology(format!(
                        "line {}: `{s}` is not a node index in 1..={n}",
                        lineno + 1
                    ))),
                }
            };
            match fields.as_slice() {
                [k, l] => edges.push((parse(k)?, parse(l)?)),
                _ => {
                    return Err(Error::Topology(format!(
                        "line {}: expected `k l`, got `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_edges(n, &edges)
    }
}

/// Erdos-Renyi draw conditioned on connectivity.
pub fn random_topology(n: usize, edge_prob: f64, seed: u64) -> Result<TopologyGraph> {
    if n == 0 {
        return Err(Error::Topology("graph must have at least one node".into()));
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(Error::invalid(
            "edge_prob",
            format!("must lie in (0, 1], got {edge_prob}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_TOPOLOGY_ATTEMPTS {
        let mut edges = Vec::new();
        for k in 0..n {
            for l in (k + 1)..n {
                if rng.random_bool(edge_prob) {
                    edges.push((k, l));
                }
            }
        }
        let g = TopologyGraph::unchecked(n, &edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Topology(format!(
        "no connected graph with N = {n}, p = {edge_prob} after {MAX_TOPOLOGY_ATTEMPTS} attempts"
    )))
}

/// Edge probability giving an expected open degree of `mean_degree`.
pub fn edge_prob_for_degree(n: usize, mean_degree: f64) -> f64 {
    if n < 2 {
        1.0
    } else {
        (mean_degree / (n - 1) as f64).clamp(f64::MIN_POSITIVE, 1.0)
    }
}

/// Row-stochastic combination weights `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    n: usize,
    weights: Vec<f64>,
}

impl Combiner {
    /// No cooperation, `C = I`.
    pub fn identity(n: usize) -> Self {
        let mut weights = vec![0.0; n * n];
        for k in 0..n {
            weights[k * n + k] = 1.0;
        }
        Self { n, weights }
    }

    /// Arbitrary weights; rows must sum to one and entries lie in `[0, 1]`.
    pub fn from_rows(n: usize, weights: Vec<f64>) -> Result<Self> {
        check_len(n * n, weights.len())?;
        for k in 0..n {
            let row = &weights[k * n..(k + 1) * n];
            if row.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
                return Err(Error::Topology(format!(
                    "row {k} has weights outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Topology(format!("row {k} sums to {sum}, not 1")));
            }
        }
        Ok(Self { n, weights })
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn weight(&self, k: usize, l: usize) -> f64 {
        self.weights[k * self.n + l]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.weights[k * self.n..(k + 1) * self.n]
    }

    /// `(l, c_kl)` for every nonzero weight of row `k`.
    pub fn support(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row(k)
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, w)| w != 0.0)
    }
}

/// Metropolis rule: `c_kl = 1 / max(n_k, n_l)` for linked `k != l`, zero
/// for unlinked pairs, and `c_kk = 1 - sum_{l != k} c_kl`. Degrees count the
/// closed neighborhood.
pub fn metropolis_combiner(g: &TopologyGraph) -> Combiner {
    let n = g.nodes();
    let degree: Vec<usize> = (0..n).map(|k| g.closed_degree(k)).collect();
    let mut weights = vec![0.0; n * n];
    for k in 0..n {
        let mut off = 0.0;
        for l in 0..n {
            if g.linked(k, l) {
                let w = 1.0 / degree[k].max(degree[l]) as f64;
                weights[k * n + l] = w;
                off += w;
            }
        }
        weights[k * n + k] = 1.0 - off;
    }
    Combiner { n, weights }
}

/// `phi = sum_l c_l psi_l`.
pub fn combine_estimates(weights: &[f64], estimates: &[&ComplexVector]) -> Result<ComplexVector> {
    combine_counted(weights, estimates, &mut OpCount::default())
}

fn combine_counted(
    weights: &[f64],
    estimates: &[&ComplexVector],
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    check_len(weights.len(), estimates.len())?;
    let first = estimates
        .first()
        .ok_or_else(|| Error::Topology("nothing to combine".into()))?;
    let m = first.len();
    let mut out = ComplexVector::zeros(m);
    for (&w, psi) in weights.iter().zip(estimates) {
        out.axpy(Complex64::new(w, 0.0), psi)?;
    }
    ops.tally(((weights.len() - 1) * m) as u64, (weights.len() * m) as u64);
    Ok(out)
}

fn combine_row(
    combiner: &Combiner,
    k: usize,
    psi: &[ComplexVector],
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    let (weights, estimates): (Vec<f64>, Vec<&ComplexVector>) =
        combiner.support(k).map(|(l, w)| (w, &psi[l])).unzip();
    combine_counted(&weights, &estimates, ops)
}

/// Per-node adaptive state.
#[derive(Debug, Clone)]
pub enum NodeFilter {
    Ccg {
        params: CgParams,
        stats: SecondOrderState,
    },
    Mcg {
        params: CgParams,
        stats: SecondOrderState,
        carry: Option<CgState>,
    },
    Lms {
        mu: f64,
    },
    Rls {
        lambda: f64,
        inverse: RlsState,
    },
    Ap {
        mu: f64,
        history: ApHistory,
    },
}

impl NodeFilter {
    pub fn new(taps: usize, config: &AlgoConfig) -> Result<Self> {
        config.validate()?;
        Ok(match *config {
            AlgoConfig::Ccg(params) => NodeFilter::Ccg {
                params,
                stats: params.seed_statistics(taps)?,
            },
            AlgoConfig::Mcg(params) => NodeFilter::Mcg {
                params,
                stats: params.seed_statistics(taps)?,
                carry: None,
            },
            AlgoConfig::Lms { mu } => NodeFilter::Lms { mu },
            AlgoConfig::Rls { lambda, delta } => NodeFilter::Rls {
                lambda,
                inverse: RlsState::new(taps, delta),
            },
            AlgoConfig::Ap { mu, order } => NodeFilter::Ap {
                mu,
                history: ApHistory::new(order),
            },
        })
    }

    /// Adapts the combined estimate `phi` with the node's own sample.
    pub fn adapt(
        &mut self,
        phi: &ComplexVector,
        sample: &RegressionSample,
        ops: &mut OpCount,
    ) -> Result<ComplexVector> {
        match self {
            NodeFilter::Ccg { params, stats } => {
                stats.absorb(sample, params.lambda_f(), ops)?;
                ccg_inner_solve_counted(stats, phi, params, ops)
            }
            NodeFilter::Mcg {
                params,
                stats,
                carry,
            } => {
                stats.absorb(sample, params.lambda_f(), ops)?;
                let state = match carry {
                    Some(state) => state,
                    None => carry.insert(CgState::start(phi.clone(), stats)?),
                };
                mcg_node_update(
                    stats,
                    state,
                    phi,
                    sample,
                    params,
                    params.lambda_f(),
                    false,
                    ops,
                )
            }
            NodeFilter::Lms { mu } => lms_update(phi, sample, *mu, ops),
            NodeFilter::Rls { lambda, inverse } => inverse.update(phi, sample, *lambda, ops),
            NodeFilter::Ap { mu, history } => history.update(phi, sample, *mu, ops),
        }
    }
}

/// Synchronous combine-then-adapt instant over all nodes, visited in `order`.
fn diffusion_step(
    samples: &[RegressionSample],
    nodes: &mut [NodeFilter],
    psi_prev: &[ComplexVector],
    combiner: &Combiner,
    order: &[usize],
    ops: &mut OpCount,
) -> Result<Vec<ComplexVector>> {
    let n = combiner.nodes();
    check_len(n, samples.len())?;
    check_len(n, nodes.len())?;
    check_len(n, psi_prev.len())?;
    check_len(n, order.len())?;
    let mut next: Vec<Option<ComplexVector>> = vec![None; n];
    for &k in order {
        if k >= n || next[k].is_some() {
            return Err(Error::invalid("order", "node order must be a permutation"));
        }
        let phi = combine_row(combiner, k, psi_prev, ops)?;
        next[k] = Some(nodes[k].adapt(&phi, &samples[k], ops)?);
    }
    Ok(next
        .into_iter()
        .map(|v| v.expect("every node visited"))
        .collect())
}

/// One DDCCG instant. `stats[k]` is node `k`'s own statistics over time.
pub fn ddccg_time_step(
    samples: &[RegressionSample],
    stats: &mut [SecondOrderState],
    psi_prev: &[ComplexVector],
    combiner: &Combiner,
    params: &CgParams,
    ops: &mut OpCount,
) -> Result<Vec<ComplexVector>> {
    let n = combiner.nodes();
    check_len(n, samples.len())?;
    check_len(n, stats.len())?;
    check_len(n, psi_prev.len())?;
    let mut next = Vec::with_capacity(n);
    for k in 0..n {
        let phi = combine_row(combiner, k, psi_prev, ops)?;
        stats[k].absorb(&samples[k], params.lambda_f(), ops)?;
        next.push(ccg_inner_solve_counted(&stats[k], &phi, params, ops)?);
    }
    Ok(next)
}

/// One DDMCG instant. `carries[k]` is `None` until node `k`'s first update.
pub fn ddmcg_time_step(
    samples: &[RegressionSample],
    stats: &mut [SecondOrderState],
    psi_prev: &[ComplexVector],
    carries: &mut [Option<CgState>],
    combiner: &Combiner,
    params: &CgParams,
    ops: &mut OpCount,
) -> Result<Vec<ComplexVector>> {
    let n = combiner.nodes();
    check_len(n, samples.len())?;
    check_len(n, stats.len())?;
    check_len(n, psi_prev.len())?;
    check_len(n, carries.len())?;
    let mut next = Vec::with_capacity(n);
    for k in 0..n {
        let phi = combine_row(combiner, k, psi_prev, ops)?;
        stats[k].absorb(&samples[k], params.lambda_f(), ops)?;
        let state = match &mut carries[k] {
            Some(state) => state,
            slot => slot.insert(CgState::start(phi.clone(), &stats[k])?),
        };
        next.push(mcg_node_update(
            &stats[k],
            state,
            &phi,
            &samples[k],
            params,
            params.lambda_f(),
            false,
            ops,
        )?);
    }
    Ok(next)
}

/// A network of `N` nodes running one diffusion algorithm.
#[derive(Debug, Clone)]
pub struct DiffusionNetwork {
    combiner: Combiner,
    nodes: Vec<NodeFilter>,
    psi: Vec<ComplexVector>,
    order: Vec<usize>,
    ops: OpCount,
}

impl DiffusionNetwork {
    pub fn new(taps: usize, combiner: Combiner, config: &AlgoConfig) -> Result<Self> {
        if taps == 0 {
            return Err(Error::invalid("taps", "filter length must be at least 1"));
        }
        let n = combiner.nodes();
        let filter = NodeFilter::new(taps, config)?;
        Ok(Self {
            nodes: vec![filter; n],
            psi: vec![ComplexVector::zeros(taps); n],
            order: (0..n).collect(),
            combiner,
            ops: OpCount::default(),
        })
    }

    pub fn nodes(&self) -> usize {
        self.combiner.nodes()
    }

    pub fn combiner(&self) -> &Combiner {
        &self.combiner
    }

    /// Current per-node estimates `psi_k`.
    pub fn estimates(&self) -> &[ComplexVector] {
        &self.psi
    }

    pub fn ops(&self) -> OpCount {
        self.ops
    }

    pub fn step(&mut self, samples: &[RegressionSample]) -> Result<()> {
        let order = std::mem::take(&mut self.order);
        let result = self.step_in_order(samples, &order);
        self.order = order;
        result
    }

    /// Processes nodes in the given order; the outcome does not depend on it.
    pub fn step_in_order(&mut self, samples: &[RegressionSample], order: &[usize]) -> Result<()> {
        self.psi = diffusion_step(
            samples,
            &mut self.nodes,
            &self.psi,
            &self.combiner,
            order,
            &mut self.ops,
        )?;
        Ok(())
    }
}
