//! Incremental (ring) cooperation.
//!
//! Each time instant the network estimate travels once around a Hamiltonian
//! cycle. Node `k` adapts the estimate it receives from its predecessor with
//! its own sample and hands the result to its successor; the estimate leaving
//! the last node is the new network estimate.
//!
//! The CG variants and RLS keep one statistics chain that travels with the
//! estimate. Where along the ring the forgetting factor is applied is set by
//! [`Forgetting`].

use crate::adaptive::{
    ccg_inner_solve_counted, mcg_node_update, CgParams, CgState, RegressionSample, SecondOrderState,
};
use crate::algorithm::{AlgoConfig, Forgetting};
use crate::baseline::{lms_update, ApHistory, RlsState};
use crate::complexity::OpCount;
use crate::error::{check_len, Error, Result};
use crate::linalg::ComplexVector;

/// Visiting order of the ring, a permutation of `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSchedule {
    order: Vec<usize>,
}

impl RingSchedule {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n == 0 {
            return Err(Error::invalid(
                "order",
                "ring must contain at least one node",
            ));
        }
        let mut seen = vec![false; n];
        for &k in &order {
            if k >= n || seen[k] {
                return Err(Error::invalid(
                    "order",
                    format!("{order:?} is not a permutation of 0..{n}"),
                ));
            }
            seen[k] = true;
        }
        Ok(Self { order })
    }

    /// `0, 1, ..., n-1`.
    pub fn sequential(n: usize) -> Self {
        assert!(n > 0, "ring must contain at least one node");
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Walks the ring once. `visit(position, node, estimate_in)` returns the
/// estimate handed to the next node; `trace` sees each outgoing estimate.
fn ring_pass<V, T>(
    samples: &[RegressionSample],
    omega_prev: &ComplexVector,
    schedule: &RingSchedule,
    mut visit: V,
    mut trace: T,
) -> Result<ComplexVector>
where
    V: FnMut(usize, usize, &ComplexVector, &RegressionSample) -> Result<ComplexVector>,
    T: FnMut(usize, &ComplexVector),
{
    check_len(schedule.len(), samples.len())?;
    let mut psi = omega_prev.clone();
    for (position, &node) in schedule.order().iter().enumerate() {
        psi = visit(position, node, &psi, &samples[node])?;
        trace(node, &psi);
    }
    Ok(psi)
}

/// One IDCCG instant: each node absorbs its sample into the travelling
/// statistics and runs `J` CG iterations from the estimate it received.
pub fn idccg_time_step(
    samples: &[RegressionSample],
    omega_prev: &ComplexVector,
    stats: &mut SecondOrderState,
    schedule: &RingSchedule,
    params: &CgParams,
    forgetting: Forgetting,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    ring_pass(
        samples,
        omega_prev,
        schedule,
        |pos, _, psi, s| {
            stats.absorb(s, forgetting.factor(params.lambda_f(), pos), ops)?;
            ccg_inner_solve_counted(stats, psi, params, ops)
        },
        |_, _| {},
    )
}

/// One IDMCG instant: a single modified-CG step per node, with the gradient
/// and direction carried from node to node and across instants.
///
/// `carry` is `None` before the first visit; it is then started from the
/// statistics after the first sample (`g = b - R psi`, `p = g`).
#[allow(clippy::too_many_arguments)]
pub fn idmcg_time_step(
    samples: &[RegressionSample],
    omega_prev: &ComplexVector,
    stats: &mut SecondOrderState,
    carry: &mut Option<CgState>,
    schedule: &RingSchedule,
    params: &CgParams,
    forgetting: Forgetting,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    ring_pass(
        samples,
        omega_prev,
        schedule,
        |pos, _, psi, s| mcg_visit(stats, carry, psi, s, params, forgetting, pos, ops),
        |_, _| {},
    )
}

#[allow(clippy::too_many_arguments)]
fn mcg_visit(
    stats: &mut SecondOrderState,
    carry: &mut Option<CgState>,
    psi: &ComplexVector,
    sample: &RegressionSample,
    params: &CgParams,
    forgetting: Forgetting,
    position: usize,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    let factor = forgetting.factor(params.lambda_f(), position);
    stats.absorb(sample, factor, ops)?;
    let state = match carry {
        Some(state) => state,
        None => carry.insert(CgState::start(psi.clone(), stats)?),
    };
    mcg_node_update(stats, state, psi, sample, params, factor, true, ops)
}

/// One incremental LMS instant.
pub fn idlms_time_step(
    samples: &[RegressionSample],
    omega_prev: &ComplexVector,
    schedule: &RingSchedule,
    mu: f64,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    ring_pass(
        samples,
        omega_prev,
        schedule,
        |_, _, psi, s| lms_update(psi, s, mu, ops),
        |_, _| {},
    )
}

/// One incremental RLS instant with the inverse correlation travelling
/// around the ring.
pub fn idrls_time_step(
    samples: &[RegressionSample],
    omega_prev: &ComplexVector,
    inverse: &mut RlsState,
    schedule: &RingSchedule,
    lambda: f64,
    forgetting: Forgetting,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    ring_pass(
        samples,
        omega_prev,
        schedule,
        |pos, _, psi, s| inverse.update(psi, s, forgetting.factor(lambda, pos), ops),
        |_, _| {},
    )
}

/// One incremental affine-projection instant; `histories[k]` holds node
/// `k`'s own last `K` samples.
pub fn idap_time_step(
    samples: &[RegressionSample],
    omega_prev: &ComplexVector,
    histories: &mut [ApHistory],
    schedule: &RingSchedule,
    mu: f64,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    check_len(schedule.len(), histories.len())?;
    ring_pass(
        samples,
        omega_prev,
        schedule,
        |_, node, psi, s| histories[node].update(psi, s, mu, ops),
        |_, _| {},
    )
}

#[derive(Debug, Clone)]
enum RingState {
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
        histories: Vec<ApHistory>,
    },
}

/// A ring of `N` nodes running one incremental algorithm.
#[derive(Debug, Clone)]
pub struct IncrementalNetwork {
    schedule: RingSchedule,
    forgetting: Forgetting,
    omega: ComplexVector,
    state: RingState,
    ops: OpCount,
}

impl IncrementalNetwork {
    pub fn new(
        taps: usize,
        schedule: RingSchedule,
        config: &AlgoConfig,
        forgetting: Forgetting,
    ) -> Result<Self> {
        if taps == 0 {
            return Err(Error::invalid("taps", "filter length must be at least 1"));
        }
        config.validate()?;
        let state = match *config {
            AlgoConfig::Ccg(params) => RingState::Ccg {
                params,
                stats: params.seed_statistics(taps)?,
            },
            AlgoConfig::Mcg(params) => RingState::Mcg {
                params,
                stats: params.seed_statistics(taps)?,
                carry: None,
            },
            AlgoConfig::Lms { mu } => RingState::Lms { mu },
            AlgoConfig::Rls { lambda, delta } => RingState::Rls {
                lambda,
                inverse: RlsState::new(taps, delta),
            },
            AlgoConfig::Ap { mu, order } => RingState::Ap {
                mu,
                histories: vec![ApHistory::new(order); schedule.len()],
            },
        };
        Ok(Self {
            schedule,
            forgetting,
            omega: ComplexVector::zeros(taps),
            state,
            ops: OpCount::default(),
        })
    }

    pub fn nodes(&self) -> usize {
        self.schedule.len()
    }

    /// Current network estimate `omega_i`.
    pub fn estimate(&self) -> &ComplexVector {
        &self.omega
    }

    /// Arithmetic performed so far.
    pub fn ops(&self) -> OpCount {
        self.ops
    }

    /// Advances one time instant; `samples[k]` belongs to node `k`.
    pub fn step(&mut self, samples: &[RegressionSample]) -> Result<()> {
        self.step_traced(samples, |_, _| {})
    }

    /// As [`step`](Self::step), reporting every node's outgoing estimate.
    pub fn step_traced<T>(&mut self, samples: &[RegressionSample], trace: T) -> Result<()>
    where
        T: FnMut(usize, &ComplexVector),
    {
        let ops = &mut self.ops;
        let forgetting = self.forgetting;
        let omega = &self.omega;
        let schedule = &self.schedule;
        let next = match &mut self.state {
            RingState::Ccg { params, stats } => ring_pass(
                samples,
                omega,
                schedule,
                |pos, _, psi, s| {
                    stats.absorb(s, forgetting.factor(params.lambda_f(), pos), ops)?;
                    ccg_inner_solve_counted(stats, psi, params, ops)
                },
                trace,
            )?,
            RingState::Mcg {
                params,
                stats,
                carry,
            } => ring_pass(
                samples,
                omega,
                schedule,
                |pos, _, psi, s| mcg_visit(stats, carry, psi, s, params, forgetting, pos, ops),
                trace,
            )?,
            RingState::Lms { mu } => ring_pass(
                samples,
                omega,
                schedule,
                |_, _, psi, s| lms_update(psi, s, *mu, ops),
                trace,
            )?,
            RingState::Rls { lambda, inverse } => ring_pass(
                samples,
                omega,
                schedule,
                |pos, _, psi, s| inverse.update(psi, s, forgetting.factor(*lambda, pos), ops),
                trace,
            )?,
            RingState::Ap { mu, histories } => ring_pass(
                samples,
                omega,
                schedule,
                |_, node, psi, s| histories[node].update(psi, s, *mu, ops),
                trace,
            )?,
        };
        self.omega = next;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn schedule_must_be_permutation() {
        assert!(RingSchedule::new(vec![2, 0, 1]).is_ok());
        assert!(RingSchedule::new(vec![0, 0, 1]).is_err());
        assert!(RingSchedule::new(vec![0, 3]).is_err());
        assert!(RingSchedule::new(vec![]).is_err());
    }

    #[test]
    fn node_count_mismatch_rejected() {
        let schedule = RingSchedule::sequential(3);
        let sample = RegressionSample::new(ComplexVector::zeros(2), Complex64::new(0.0, 0.0));
        let err = idlms_time_step(
            &[sample.clone(), sample],
            &ComplexVector::zeros(2),
            &schedule,
            0.1,
            &mut OpCount::default(),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn null_data_is_a_fixed_point_of_ccg() {
        let params = CgParams::new(0.25, 0.15, 5).unwrap();
        let mut stats = params.seed_statistics(3).unwrap();
        let zero = RegressionSample::new(ComplexVector::zeros(3), Complex64::new(0.0, 0.0));
        let samples = vec![zero; 4];
        let omega = ComplexVector::zeros(3);
        let next = idccg_time_step(
            &samples,
            &omega,
            &mut stats,
            &RingSchedule::sequential(4),
            &params,
            Forgetting::PerVisit,
            &mut OpCount::default(),
        )
        .unwrap();
        assert_eq!(next, omega);
    }
}
