//! Algorithm selection shared by the incremental and diffusion protocols.

use std::fmt;
use std::str::FromStr;

use crate::adaptive::CgParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Incremental,
    Diffusion,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Incremental => "incremental",
            Strategy::Diffusion => "diffusion",
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Strategy::Incremental => "id",
            Strategy::Diffusion => "dd",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "incremental" => Ok(Strategy::Incremental),
            "diffusion" => Ok(Strategy::Diffusion),
            other => Err(Error::config(
                "strategy",
                format!("unknown strategy `{other}` (expected incremental or diffusion)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    Ccg,
    Mcg,
    Lms,
    Rls,
    Ap,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::Ccg,
        AlgorithmKind::Mcg,
        AlgorithmKind::Lms,
        AlgorithmKind::Rls,
        AlgorithmKind::Ap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::Ccg => "ccg",
            AlgorithmKind::Mcg => "mcg",
            AlgorithmKind::Lms => "lms",
            AlgorithmKind::Rls => "rls",
            AlgorithmKind::Ap => "ap",
        }
    }

    /// Short name such as `idmcg` or `ddlms`.
    pub fn label(self, strategy: Strategy) -> String {
        format!("{}{}", strategy.prefix(), self.as_str())
    }

    /// Parses a short name such as `idmcg` into its strategy and algorithm.
    pub fn parse_label(label: &str) -> Result<(Strategy, AlgorithmKind)> {
        let bad = || Error::config("compare", format!("unknown algorithm label `{label}`"));
        let (strategy, rest) = if let Some(rest) = label.strip_prefix("id") {
            (Strategy::Incremental, rest)
        } else if let Some(rest) = label.strip_prefix("dd") {
            (Strategy::Diffusion, rest)
        } else {
            return Err(bad());
        };
        let algorithm = rest.parse().map_err(|_| bad())?;
        Ok((strategy, algorithm))
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                Error::config(
                    "algorithm",
                    format!("unknown algorithm `{s}` (expected ccg, mcg, lms, rls or ap)"),
                )
            })
    }
}

/// Parameters of one algorithm; each variant carries exactly what it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgoConfig {
    Ccg(CgParams),
    Mcg(CgParams),
    Lms {
        mu: f64,
    },
    /// Exponentially weighted RLS, inverse correlation seeded with `delta^-1 I`.
    Rls {
        lambda: f64,
        delta: f64,
    },
    /// Affine projection of order `order` with ridge `AP_RIDGE`.
    Ap {
        mu: f64,
        order: usize,
    },
}

impl AlgoConfig {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            AlgoConfig::Ccg(_) => AlgorithmKind::Ccg,
            AlgoConfig::Mcg(_) => AlgorithmKind::Mcg,
            AlgoConfig::Lms { .. } => AlgorithmKind::Lms,
            AlgoConfig::Rls { .. } => AlgorithmKind::Rls,
            AlgoConfig::Ap { .. } => AlgorithmKind::Ap,
        }
    }

    /// Benchmark parameters of the network simulations.
    pub fn benchmark_default(strategy: Strategy, kind: AlgorithmKind) -> AlgoConfig {
        let cg = |lambda_f, eta, j| {
            CgParams::new(lambda_f, eta, j)
                .expect("benchmark parameters lie in the admissible band")
        };
        match (strategy, kind) {
            (Strategy::Incremental, AlgorithmKind::Ccg) => AlgoConfig::Ccg(cg(0.25, 0.15, 5)),
            (Strategy::Incremental, AlgorithmKind::Mcg) => AlgoConfig::Mcg(cg(0.25, 0.15, 1)),
            (Strategy::Incremental, AlgorithmKind::Lms) => AlgoConfig::Lms { mu: 0.005 },
            (Strategy::Incremental, AlgorithmKind::Rls) => AlgoConfig::Rls {
                lambda: 0.2,
                delta: crate::adaptive::DEFAULT_DELTA,
            },
            (Strategy::Incremental, AlgorithmKind::Ap) => AlgoConfig::Ap { mu: 0.06, order: 2 },
            (Strategy::Diffusion, AlgorithmKind::Ccg) => AlgoConfig::Ccg(cg(0.25, 0.25, 5)),
            (Strategy::Diffusion, AlgorithmKind::Mcg) => AlgoConfig::Mcg(cg(0.46, 0.45, 1)),
            (Strategy::Diffusion, AlgorithmKind::Lms) => AlgoConfig::Lms { mu: 0.0075 },
            (Strategy::Diffusion, AlgorithmKind::Rls) => AlgoConfig::Rls {
                lambda: 0.998,
                delta: crate::adaptive::DEFAULT_DELTA,
            },
            (Strategy::Diffusion, AlgorithmKind::Ap) => AlgoConfig::Ap {
                mu: 0.075,
                order: 2,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AlgoConfig::Ccg(p) | AlgoConfig::Mcg(p) => p.validate(),
            AlgoConfig::Lms { mu } => {
                if mu.is_finite() && mu >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        "mu",
                        format!("step size must be >= 0, got {mu}"),
                    ))
                }
            }
            AlgoConfig::Rls { lambda, delta } => {
                if !(lambda > 0.0 && lambda <= 1.0) {
                    return Err(Error::invalid(
                        "lambda",
                        format!("forgetting factor must lie in (0, 1], got {lambda}"),
                    ));
                }
                if !(delta > 0.0 && delta.is_finite()) {
                    return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
                }
                Ok(())
            }
            AlgoConfig::Ap { mu, order } => {
                if !(mu.is_finite() && mu >= 0.0) {
                    return Err(Error::invalid(
                        "mu",
                        format!("step size must be >= 0, got {mu}"),
                    ));
                }
                if order == 0 {
                    return Err(Error::invalid("projection_order", "must be at least 1"));
                }
                Ok(())
            }
        }
    }
}

/// Where the forgetting factor of a ring-wide statistics chain is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Forgetting {
    /// Once per node visit, `R_k = lambda R_{k-1} + x_k x_k^H` around the ring.
    PerVisit,
    /// Once per ring cycle, at the first node of every time instant.
    #[default]
    PerCycle,
}

impl Forgetting {
    pub fn as_str(self) -> &'static str {
        match self {
            Forgetting::PerVisit => "per-visit",
            Forgetting::PerCycle => "per-cycle",
        }
    }

    /// Factor to apply at visit `position` (0-based) within a cycle.
    pub(crate) fn factor(self, lambda: f64, position: usize) -> f64 {
        match self {
            Forgetting::PerVisit => lambda,
            Forgetting::PerCycle if position == 0 => lambda,
            Forgetting::PerCycle => 1.0,
        }
    }
}

impl FromStr for Forgetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-visit" => Ok(Forgetting::PerVisit),
            "per-cycle" => Ok(Forgetting::PerCycle),
            other => Err(Error::config(
                "forgetting",
                format!("unknown schedule `{other}` (expected per-visit or per-cycle)"),
            )),
        }
    }
}
