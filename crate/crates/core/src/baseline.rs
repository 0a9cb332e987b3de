//! Single-node LMS, RLS and affine projection updates used as baselines.
//!
//! Each update takes the estimate it starts from (the ring hand-off or the
//! diffusion combination) and returns the adapted estimate.

use std::collections::VecDeque;

use log::warn;
use num_complex::Complex64;

use crate::adaptive::RegressionSample;
use crate::complexity::OpCount;
use crate::error::{check_len, Error, Result};
use crate::linalg::{hdot, ComplexVector, HermitianMatrix};

/// Ridge added to the `K x K` Gram matrix of the affine projection update.
pub const AP_RIDGE: f64 = 1e-6;

/// `w + mu x conj(d - w^H x)`.
pub fn lms_update(
    w: &ComplexVector,
    sample: &RegressionSample,
    mu: f64,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    check_len(w.len(), sample.x.len())?;
    let m = w.len();
    let e = sample.conj_error(w, ops);
    let mut next = w.clone();
    next.axpy(e * mu, &sample.x)?;
    ops.tally(0, 1);
    ops.axpy(m);
    Ok(next)
}

/// Inverse correlation matrix of an exponentially weighted RLS filter.
#[derive(Debug, Clone, PartialEq)]
pub struct RlsState {
    p: HermitianMatrix,
    delta: f64,
    resets: usize,
}

impl RlsState {
    /// `P = delta^-1 I`.
    pub fn new(dim: usize, delta: f64) -> Self {
        Self {
            p: HermitianMatrix::scaled_identity(dim, 1.0 / delta),
            delta,
            resets: 0,
        }
    }

    pub fn inverse_correlation(&self) -> &HermitianMatrix {
        &self.p
    }

    /// Number of times the inverse correlation lost definiteness and was reseeded.
    pub fn resets(&self) -> usize {
        self.resets
    }

    fn reseed(&mut self) {
        self.p = HermitianMatrix::scaled_identity(self.p.dim(), 1.0 / self.delta);
        self.resets += 1;
        warn!(
            "RLS inverse correlation became indefinite; reseeded with {}^-1 I",
            self.delta
        );
    }

    /// Decays the data window by `factor` (`P <- P / factor`), then absorbs
    /// `sample` and moves `w` by the RLS gain.
    pub fn update(
        &mut self,
        w: &ComplexVector,
        sample: &RegressionSample,
        factor: f64,
        ops: &mut OpCount,
    ) -> Result<ComplexVector> {
        check_len(self.p.dim(), w.len())?;
        check_len(w.len(), sample.x.len())?;
        let m = w.len();
        if factor != 1.0 {
            self.p.scale(1.0 / factor);
            ops.scale(m * m);
        }
        let gain = |p: &HermitianMatrix| -> Result<Option<(ComplexVector, f64)>> {
            let px = p.matvec(&sample.x)?;
            let denom = 1.0 + hdot(sample.x.as_slice(), px.as_slice()).re;
            let usable = denom.is_finite() && denom >= 1.0 && p.is_finite();
            Ok(usable.then_some((px, denom)))
        };
        let (px, denom) = match gain(&self.p)? {
            Some(v) => v,
            None => {
                self.reseed();
                gain(&self.p)?.ok_or_else(|| {
                    Error::SolverFailure("RLS gain is not finite for this sample".into())
                })?
            }
        };
        ops.matvec(m);
        ops.inner(m);
        ops.add(1);

        let e = sample.conj_error(w, ops);
        let mut next = w.clone();
        next.axpy(e / denom, &px)?;
        ops.tally(0, 1);
        ops.axpy(m);

        self.p.add_scaled_outer(-1.0 / denom, &px)?;
        ops.tally(m as u64 * m as u64, m as u64 * m as u64 + 1);
        Ok(next)
    }
}

/// The last `K` samples seen by one node.
#[derive(Debug, Clone, PartialEq)]
pub struct ApHistory {
    order: usize,
    samples: VecDeque<RegressionSample>,
    skipped: usize,
}

impl ApHistory {
    pub fn new(order: usize) -> Self {
        assert!(order > 0, "projection order must be at least 1");
        Self {
            order,
            samples: VecDeque::with_capacity(order),
            skipped: 0,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Updates skipped because the Gram system could not be solved.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Pushes `sample` and returns `w + mu X (X^H X + eps I)^-1 e` over the
    /// stored regressors `X`, with `e_j = conj(d_j) - x_j^H w`.
    pub fn update(
        &mut self,
        w: &ComplexVector,
        sample: &RegressionSample,
        mu: f64,
        ops: &mut OpCount,
    ) -> Result<ComplexVector> {
        check_len(w.len(), sample.x.len())?;
        if self.samples.len() == self.order {
            self.samples.pop_back();
        }
        self.samples.push_front(sample.clone());

        let m = w.len();
        let k = self.samples.len();
        let errors: Vec<Complex64> = self.samples.iter().map(|s| s.conj_error(w, ops)).collect();
        let mut gram = vec![Complex64::new(0.0, 0.0); k * k];
        for (i, si) in self.samples.iter().enumerate() {
            for (j, sj) in self.samples.iter().enumerate() {
                gram[i * k + j] = hdot(si.x.as_slice(), sj.x.as_slice());
            }
            gram[i * k + i] += AP_RIDGE;
        }
        ops.tally((k * k * (m - 1) + k) as u64, (k * k * m) as u64);

        let coeffs = match HermitianMatrix::from_row_major(k, gram)
            .and_then(|g| g.cholesky())
            .and_then(|c| c.solve(&ComplexVector::new(errors)?))
        {
            Ok(c) => c,
            Err(_) => {
                self.skipped += 1;
                warn!("affine projection Gram system singular; update skipped");
                return Ok(w.clone());
            }
        };
        // Cholesky solve of a K x K system.
        ops.tally((k * k * k) as u64, (k * k * k + k * k) as u64);

        let mut next = w.clone();
        for (s, c) in self.samples.iter().zip(coeffs.iter()) {
            next.axpy(c * mu, &s.x)?;
            ops.tally(0, 1);
            ops.axpy(m);
        }
        Ok(next)
    }
}
