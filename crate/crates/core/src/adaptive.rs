//! Second-order statistics and the conjugate-gradient step primitives shared
//! by the incremental and diffusion CG algorithms.
//!
//! The statistics follow the exponentially decaying data window
//!
//! ```text
//! R' = lambda_f R + x x^H
//! b' = lambda_f b + conj(d) x
//! ```
//!
//! seeded with `R = delta I`, `b = 0` so that `R` is positive definite from the
//! first sample on.

use num_complex::Complex64;

use crate::complexity::OpCount;
use crate::error::{check_len, Error, Result};
use crate::linalg::{hdot, ComplexVector, HermitianMatrix};

/// Seed of the correlation estimate, `R(0) = DEFAULT_DELTA * I`.
pub const DEFAULT_DELTA: f64 = 1e-2;

/// `|p^H R p|` below this is treated as a vanished search direction.
pub const DEGENERATE_DIRECTION: f64 = 1e-30;

/// `||g||^2` below this is treated as a vanished gradient.
pub const VANISHED_GRADIENT: f64 = 1e-30;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// One node-time datum `(x, d)` with `d = w^H x + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSample {
    pub x: ComplexVector,
    pub d: Complex64,
}

impl RegressionSample {
    pub fn new(x: ComplexVector, d: Complex64) -> Self {
        Self { x, d }
    }

    /// `conj(d) - x^H w`, the conjugated a-priori error of estimate `w`.
    pub(crate) fn conj_error(&self, w: &ComplexVector, ops: &mut OpCount) -> Complex64 {
        ops.inner(w.len());
        ops.add(1);
        self.d.conj() - hdot(self.x.as_slice(), w.as_slice())
    }
}

/// Running correlation pair `(R, b)` with its forgetting factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderState {
    r: HermitianMatrix,
    b: ComplexVector,
    lambda_f: f64,
}

impl SecondOrderState {
    /// `R = delta I`, `b = 0`.
    pub fn new(dim: usize, lambda_f: f64, delta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "filter length must be at least 1"));
        }
        check_forgetting(lambda_f)?;
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::invalid(
                "delta",
                format!("must be >= 0, got {delta}"),
            ));
        }
        Ok(Self {
            r: HermitianMatrix::scaled_identity(dim, delta),
            b: ComplexVector::zeros(dim),
            lambda_f,
        })
    }

    pub fn from_parts(r: HermitianMatrix, b: ComplexVector, lambda_f: f64) -> Result<Self> {
        check_len(r.dim(), b.len())?;
        check_forgetting(lambda_f)?;
        Ok(Self { r, b, lambda_f })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn r(&self) -> &HermitianMatrix {
        &self.r
    }

    pub fn b(&self) -> &ComplexVector {
        &self.b
    }

    pub fn lambda_f(&self) -> f64 {
        self.lambda_f
    }

    /// Absorbs one sample with the state's own forgetting factor.
    pub fn update(&mut self, sample: &RegressionSample) -> Result<()> {
        self.absorb(sample, self.lambda_f, &mut OpCount::default())
    }

    /// Absorbs one sample after decaying the old statistics by `factor`.
    pub(crate) fn absorb(
        &mut self,
        sample: &RegressionSample,
        factor: f64,
        ops: &mut OpCount,
    ) -> Result<()> {
        check_len(self.dim(), sample.x.len())?;
        let m = self.dim();
        self.r.decay_and_add_outer(factor, &sample.x)?;
        let dc = sample.d.conj();
        for (b, x) in self.b.as_mut_slice().iter_mut().zip(sample.x.iter()) {
            *b = *b * factor + dc * x;
        }
        ops.decayed_outer(m);
        ops.decayed_axpy(m);
        Ok(())
    }
}

fn check_forgetting(lambda_f: f64) -> Result<()> {
    if lambda_f > 0.0 && lambda_f <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "lambda_f",
            format!("forgetting factor must lie in (0, 1], got {lambda_f}"),
        ))
    }
}

/// `R' = lambda_f R + x x^H`, `b' = lambda_f b + conj(d) x`.
pub fn update_statistics(
    state: &SecondOrderState,
    sample: &RegressionSample,
) -> Result<SecondOrderState> {
    let mut next = state.clone();
    next.update(sample)?;
    Ok(next)
}

/// How the CG step length is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// `alpha = eta (p^H g_prev) / (p^H R p)`.
    #[default]
    EtaScaled,
    /// `alpha = (g_prev^H g_prev) / (p^H R p)`, the textbook exact line search.
    Classic,
}

impl StepRule {
    pub fn as_str(self) -> &'static str {
        match self {
            StepRule::EtaScaled => "eta",
            StepRule::Classic => "classic",
        }
    }
}

impl std::str::FromStr for StepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta" => Ok(StepRule::EtaScaled),
            "classic" => Ok(StepRule::Classic),
            other => Err(Error::config(
                "step-rule",
                format!("unknown step rule `{other}` (expected eta or classic)"),
            )),
        }
    }
}

/// CG tuning. `eta` must satisfy `lambda_f - 0.5 <= eta <= lambda_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgParams {
    lambda_f: f64,
    eta: f64,
    inner_iterations: usize,
    delta: f64,
    step_rule: StepRule,
}

impl CgParams {
    pub fn new(lambda_f: f64, eta: f64, inner_iterations: usize) -> Result<Self> {
        let p = Self {
            lambda_f,
            eta,
            inner_iterations,
            delta: DEFAULT_DELTA,
            step_rule: StepRule::EtaScaled,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_step_rule(mut self, rule: StepRule) -> Self {
        self.step_rule = rule;
        self
    }

    /// The admissible interval `[lambda_f - 0.5, lambda_f]` for `eta`.
    pub fn eta_band(lambda_f: f64) -> (f64, f64) {
        (lambda_f - 0.5, lambda_f)
    }

    pub fn validate(&self) -> Result<()> {
        check_forgetting(self.lambda_f)?;
        let (lo, hi) = Self::eta_band(self.lambda_f);
        let slack = 1e-12;
        if !(self.eta >= lo - slack && self.eta <= hi + slack) {
            return Err(Error::invalid(
                "eta",
                format!(
                    "eta = {} lies outside the admissible band [{lo}, {hi}] for lambda_f = {}",
                    self.eta, self.lambda_f
                ),
            ));
        }
        if self.eta <= 0.0 {
            return Err(Error::invalid(
                "eta",
                format!("eta must be positive, got {}", self.eta),
            ));
        }
        if self.inner_iterations == 0 {
            return Err(Error::invalid("inner_iterations", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid(
                "delta",
                format!("must be > 0, got {}", self.delta),
            ));
        }
        Ok(())
    }

    pub fn lambda_f(&self) -> f64 {
        self.lambda_f
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn inner_iterations(&self) -> usize {
        self.inner_iterations
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn step_rule(&self) -> StepRule {
        self.step_rule
    }

    /// Fresh statistics seeded with `delta I`.
    pub fn seed_statistics(&self, dim: usize) -> Result<SecondOrderState> {
        SecondOrderState::new(dim, self.lambda_f, self.delta)
    }
}

/// Working set of the CG recursions: estimate, negative gradient, direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CgState {
    pub psi: ComplexVector,
    pub g: ComplexVector,
    pub p: ComplexVector,
}

impl CgState {
    /// `g = b - R psi`, `p = g`.
    pub fn start(psi: ComplexVector, stats: &SecondOrderState) -> Result<Self> {
        let g = residual_gradient(stats.r(), stats.b(), &psi)?;
        Ok(Self {
            p: g.clone(),
            g,
            psi,
        })
    }
}

/// `g = b - R omega`.
pub fn residual_gradient(
    r: &HermitianMatrix,
    b: &ComplexVector,
    omega: &ComplexVector,
) -> Result<ComplexVector> {
    residual_gradient_counted(r, b, omega, &mut OpCount::default())
}

pub(crate) fn residual_gradient_counted(
    r: &HermitianMatrix,
    b: &ComplexVector,
    omega: &ComplexVector,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    check_len(r.dim(), b.len())?;
    let r_omega = r.matvec(omega)?;
    ops.matvec(r.dim());
    ops.add(r.dim());
    b.sub(&r_omega)
}

/// `eta (p^H g_prev) / (p^H R p)`.
pub fn step_size_alpha(
    p: &ComplexVector,
    g_prev: &ComplexVector,
    r: &HermitianMatrix,
    eta: f64,
) -> Result<Complex64> {
    step_with_direction_image(
        p,
        g_prev,
        r,
        eta,
        StepRule::EtaScaled,
        &mut OpCount::default(),
    )
    .map(|(alpha, _)| alpha)
}

/// Textbook step `(g_prev^H g_prev) / (p^H R p)`.
pub fn step_size_classic(
    p: &ComplexVector,
    g_prev: &ComplexVector,
    r: &HermitianMatrix,
) -> Result<Complex64> {
    step_with_direction_image(
        p,
        g_prev,
        r,
        1.0,
        StepRule::Classic,
        &mut OpCount::default(),
    )
    .map(|(alpha, _)| alpha)
}

/// Step length together with `R p`, which the gradient recursions reuse.
pub(crate) fn step_with_direction_image(
    p: &ComplexVector,
    g_prev: &ComplexVector,
    r: &HermitianMatrix,
    eta: f64,
    rule: StepRule,
    ops: &mut OpCount,
) -> Result<(Complex64, ComplexVector)> {
    check_len(p.len(), g_prev.len())?;
    let m = p.len();
    let rp = r.matvec(p)?;
    let denom = hdot(p.as_slice(), rp.as_slice());
    ops.matvec(m);
    ops.inner(m);
    if denom.norm().is_nan() || denom.norm() < DEGENERATE_DIRECTION {
        return Err(Error::DegenerateDirection(denom.norm()));
    }
    let numer = match rule {
        StepRule::EtaScaled => hdot(p.as_slice(), g_prev.as_slice()) * eta,
        StepRule::Classic => Complex64::new(g_prev.norm_sqr(), 0.0),
    };
    ops.inner(m);
    ops.tally(0, 2);
    Ok((numer / denom, rp))
}

/// Fletcher-Reeves `(g_new^H g_new) / (g_prev^H g_prev)`.
pub fn beta_fletcher_reeves(g_new: &ComplexVector, g_prev: &ComplexVector) -> Result<f64> {
    beta_fletcher_reeves_counted(g_new, g_prev, &mut OpCount::default())
}

pub(crate) fn beta_fletcher_reeves_counted(
    g_new: &ComplexVector,
    g_prev: &ComplexVector,
    ops: &mut OpCount,
) -> Result<f64> {
    check_len(g_prev.len(), g_new.len())?;
    let prev = g_prev.norm_sqr();
    ops.inner(g_prev.len());
    if prev.is_nan() || prev < VANISHED_GRADIENT {
        return Err(Error::GradientVanished(prev));
    }
    ops.inner(g_new.len());
    ops.tally(0, 1);
    Ok(g_new.norm_sqr() / prev)
}

/// Polak-Ribiere `((g_new - g_prev)^H g_new) / (g_prev^H g_prev)`.
pub fn beta_polak_ribiere(g_new: &ComplexVector, g_prev: &ComplexVector) -> Result<Complex64> {
    beta_polak_ribiere_counted(g_new, g_prev, &mut OpCount::default())
}

pub(crate) fn beta_polak_ribiere_counted(
    g_new: &ComplexVector,
    g_prev: &ComplexVector,
    ops: &mut OpCount,
) -> Result<Complex64> {
    check_len(g_prev.len(), g_new.len())?;
    let m = g_new.len();
    let prev = g_prev.norm_sqr();
    ops.inner(m);
    if prev.is_nan() || prev < VANISHED_GRADIENT {
        return Err(Error::GradientVanished(prev));
    }
    let numer: Complex64 = g_new
        .iter()
        .zip(g_prev.iter())
        .map(|(n, p)| (n - p).conj() * n)
        .sum();
    ops.add(m);
    ops.inner(m);
    ops.tally(0, 1);
    Ok(numer / prev)
}

/// `g + beta p`, plus `reuse` when supplied.
pub fn direction_update(
    g: &ComplexVector,
    beta: Complex64,
    p: &ComplexVector,
    reuse: Option<&ComplexVector>,
) -> Result<ComplexVector> {
    direction_update_counted(g, beta, p, reuse, &mut OpCount::default())
}

pub(crate) fn direction_update_counted(
    g: &ComplexVector,
    beta: Complex64,
    p: &ComplexVector,
    reuse: Option<&ComplexVector>,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    let mut next = g.clone();
    next.axpy(beta, p)?;
    ops.axpy(g.len());
    if let Some(term) = reuse {
        next.axpy(Complex64::new(1.0, 0.0), term)?;
        ops.add(g.len());
    }
    Ok(next)
}

/// The data-reuse term `x (conj(d) - x^H psi_prev)`.
pub fn data_reuse_term(
    sample: &RegressionSample,
    psi_prev: &ComplexVector,
) -> Result<ComplexVector> {
    check_len(psi_prev.len(), sample.x.len())?;
    let e = sample.conj_error(psi_prev, &mut OpCount::default());
    Ok(sample.x.scaled(e))
}

/// Recursive negative gradient
/// `lambda_f g_prev - alpha R p + x (conj(d) - x^H psi_ref)`.
pub fn mcg_gradient_update(
    g_prev: &ComplexVector,
    alpha: Complex64,
    r: &HermitianMatrix,
    p: &ComplexVector,
    sample: &RegressionSample,
    psi_ref: &ComplexVector,
    lambda_f: f64,
) -> Result<ComplexVector> {
    let rp = r.matvec(p)?;
    let reuse = data_reuse_term(sample, psi_ref)?;
    recursive_gradient(
        g_prev,
        alpha,
        &rp,
        &reuse,
        lambda_f,
        &mut OpCount::default(),
    )
}

pub(crate) fn recursive_gradient(
    g_prev: &ComplexVector,
    alpha: Complex64,
    rp: &ComplexVector,
    reuse: &ComplexVector,
    factor: f64,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    check_len(g_prev.len(), rp.len())?;
    check_len(g_prev.len(), reuse.len())?;
    let m = g_prev.len();
    let out = g_prev
        .iter()
        .zip(rp.iter())
        .zip(reuse.iter())
        .map(|((g, rp), t)| g * factor - alpha * rp + t)
        .collect();
    ops.tally(2 * m as u64, 2 * m as u64);
    ComplexVector::new(out)
}

/// Direct solution of `R w = b` by Cholesky factorization.
pub fn solve_normal_equations(r: &HermitianMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    check_len(r.dim(), b.len())?;
    r.cholesky()?.solve(b)
}

/// `J` conjugate-gradient iterations on `R psi = b` starting at `psi0`.
///
/// Returns early with the current iterate when the direction degenerates or
/// the gradient vanishes.
pub fn ccg_inner_solve(
    stats: &SecondOrderState,
    psi0: &ComplexVector,
    params: &CgParams,
) -> Result<ComplexVector> {
    ccg_inner_solve_counted(stats, psi0, params, &mut OpCount::default())
}

pub(crate) fn ccg_inner_solve_counted(
    stats: &SecondOrderState,
    psi0: &ComplexVector,
    params: &CgParams,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    check_len(stats.dim(), psi0.len())?;
    let m = stats.dim();
    let r = stats.r();
    let mut psi = psi0.clone();
    let mut g = residual_gradient_counted(r, stats.b(), &psi, ops)?;
    let mut p = g.clone();
    for _ in 0..params.inner_iterations() {
        let (alpha, rp) =
            match step_with_direction_image(&p, &g, r, params.eta(), params.step_rule(), ops) {
                Ok(v) => v,
                Err(Error::DegenerateDirection(_)) => break,
                Err(e) => return Err(e),
            };
        psi.axpy(alpha, &p)?;
        ops.axpy(m);
        let mut g_new = g.clone();
        g_new.axpy(-alpha, &rp)?;
        ops.axpy(m);
        let beta = match beta_fletcher_reeves_counted(&g_new, &g, ops) {
            Ok(b) => b,
            Err(Error::GradientVanished(_)) => break,
            Err(e) => return Err(e),
        };
        p = direction_update_counted(&g_new, Complex64::new(beta, 0.0), &p, None, ops)?;
        g = g_new;
    }
    Ok(psi)
}

/// One modified-CG update at a node whose statistics already hold the new
/// sample.
///
/// `start` is the estimate the step departs from and the reference of the
/// a-priori error, `factor` the forgetting applied to the carried gradient.
/// With `reuse_in_direction` the data-reuse term is also added to the next
/// direction.
#[allow(clippy::too_many_arguments)]
pub(crate) fn mcg_node_update(
    stats: &SecondOrderState,
    carry: &mut CgState,
    start: &ComplexVector,
    sample: &RegressionSample,
    params: &CgParams,
    factor: f64,
    reuse_in_direction: bool,
    ops: &mut OpCount,
) -> Result<ComplexVector> {
    let m = stats.dim();
    check_len(m, start.len())?;
    check_len(m, sample.x.len())?;
    let (alpha, rp) = match step_with_direction_image(
        &carry.p,
        &carry.g,
        stats.r(),
        params.eta(),
        params.step_rule(),
        ops,
    ) {
        Ok(v) => v,
        Err(Error::DegenerateDirection(_)) => (ZERO, ComplexVector::zeros(m)),
        Err(e) => return Err(e),
    };
    let mut psi = start.clone();
    psi.axpy(alpha, &carry.p)?;
    ops.axpy(m);

    let e = sample.conj_error(start, ops);
    let reuse = sample.x.scaled(e);
    ops.scale(m);

    let g_new = recursive_gradient(&carry.g, alpha, &rp, &reuse, factor, ops)?;
    let beta = match beta_polak_ribiere_counted(&g_new, &carry.g, ops) {
        Ok(b) => b,
        Err(Error::GradientVanished(_)) => ZERO,
        Err(e) => return Err(e),
    };
    let term = reuse_in_direction.then_some(&reuse);
    carry.p = direction_update_counted(&g_new, beta, &carry.p, term, ops)?;
    carry.g = g_new;
    carry.psi = psi.clone();
    Ok(psi)
}
