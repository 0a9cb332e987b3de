//! Arithmetic cost accounting.
//!
//! [`OpCount`] is the runtime tally incremented by the kernels as they execute.
//! The convention is one complex (or real) multiplication or division counts as
//! one multiplication, one addition or subtraction as one addition.
//!
//! [`complexity_count`] evaluates the closed-form per-node, per-instant costs of
//! the tabulated algorithms.

use std::ops::AddAssign;

use crate::algorithm::{AlgorithmKind, Strategy};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub adds: u64,
    pub mults: u64,
}

impl OpCount {
    pub fn new(adds: u64, mults: u64) -> Self {
        Self { adds, mults }
    }

    #[inline]
    pub(crate) fn tally(&mut self, adds: u64, mults: u64) {
        self.adds += adds;
        self.mults += mults;
    }

    /// `a^H b` over length `m`.
    #[inline]
    pub(crate) fn inner(&mut self, m: usize) {
        let m = m as u64;
        self.tally(m - 1, m);
    }

    /// Dense `A v` with an `m x m` matrix.
    #[inline]
    pub(crate) fn matvec(&mut self, m: usize) {
        let m = m as u64;
        self.tally(m * (m - 1), m * m);
    }

    /// `y + a x` over length `m`.
    #[inline]
    pub(crate) fn axpy(&mut self, m: usize) {
        let m = m as u64;
        self.tally(m, m);
    }

    /// Element-wise scaling of `n` entries.
    #[inline]
    pub(crate) fn scale(&mut self, n: usize) {
        self.tally(0, n as u64);
    }

    /// Element-wise sum or difference of `n` entries.
    #[inline]
    pub(crate) fn add(&mut self, n: usize) {
        self.tally(n as u64, 0);
    }

    /// `A <- c A + x x^H`.
    #[inline]
    pub(crate) fn decayed_outer(&mut self, m: usize) {
        let m = m as u64;
        self.tally(m * m, 2 * m * m);
    }

    /// `b <- c b + s x`.
    #[inline]
    pub(crate) fn decayed_axpy(&mut self, m: usize) {
        let m = m as u64;
        self.tally(m, 2 * m);
    }
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, rhs: Self) {
        self.adds += rhs.adds;
        self.mults += rhs.mults;
    }
}

/// Closed-form per-node cost of one time instant.
///
/// `inner_iterations` is required for CCG and `linked` (the number of
/// combined estimates) for every diffusion variant. The affine projection
/// baseline has no tabulated cost.
pub fn complexity_count(
    strategy: Strategy,
    algorithm: AlgorithmKind,
    m: u64,
    inner_iterations: Option<u64>,
    linked: Option<u64>,
) -> Result<OpCount> {
    if m == 0 {
        return Err(Error::invalid("m", "filter length must be positive"));
    }
    let base = match algorithm {
        AlgorithmKind::Ccg => {
            let j = inner_iterations
                .ok_or_else(|| Error::invalid("inner_iterations", "required for the CCG cost"))?;
            OpCount::new(
                m * m + 2 * m - 2 + j * (2 * m * m + 7 * m - 2),
                m * m + 3 * m + j * (3 * m * m + 6 * m - 2),
            )
        }
        AlgorithmKind::Mcg => OpCount::new(3 * m * m + 11 * m - 5, 4 * m * m + 11 * m - 2),
        AlgorithmKind::Lms => OpCount::new(4 * m - 1, 3 * m + 1),
        AlgorithmKind::Rls => OpCount::new(m * m + 4 * m - 1, m * m + 5 * m),
        AlgorithmKind::Ap => {
            return Err(Error::NotTabulated(format!(
                "{} has no closed-form cost",
                algorithm.label(strategy)
            )))
        }
    };
    match strategy {
        Strategy::Incremental => Ok(base),
        Strategy::Diffusion => {
            let l =
                linked.ok_or_else(|| Error::invalid("linked", "required for diffusion costs"))?;
            Ok(OpCount::new(base.adds + l * m, base.mults + l * m))
        }
    }
}
