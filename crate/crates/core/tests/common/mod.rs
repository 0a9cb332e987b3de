//! Reference implementations used as test oracles. The numeric oracles work
//! on plain `Complex64` slices; `SingleFilter` composes only the public
//! per-step operations.

#![allow(dead_code)]

use distcg::{ComplexVector, HermitianMatrix, RegressionSample};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_entries(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn random_vector(rng: &mut ChaCha8Rng, m: usize) -> ComplexVector {
    ComplexVector::new(random_entries(rng, m)).unwrap()
}

pub fn random_sample(rng: &mut ChaCha8Rng, m: usize) -> RegressionSample {
    let x = random_vector(rng, m);
    let d = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    RegressionSample::new(x, d)
}

/// `A A^H + shift I` for a random square `A`, row-major.
pub fn random_pd(rng: &mut ChaCha8Rng, m: usize, shift: f64) -> Vec<Complex64> {
    let a = random_entries(rng, m * m);
    let mut out = vec![c(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = c(0.0, 0.0);
            for k in 0..m {
                s += a[i * m + k] * a[j * m + k].conj();
            }
            out[i * m + j] = s;
        }
        out[i * m + i] += shift;
    }
    // Exact Hermitian symmetry for the library's constructor check.
    for i in 0..m {
        out[i * m + i].im = 0.0;
        for j in 0..i {
            out[i * m + j] = out[j * m + i].conj();
        }
    }
    out
}

pub fn hermitian(m: usize, data: Vec<Complex64>) -> HermitianMatrix {
    HermitianMatrix::from_row_major(m, data).unwrap()
}

/// `sum_j x_j x_j^H` computed entry by entry.
pub fn brute_outer_sum(xs: &[&[Complex64]], m: usize) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); m * m];
    for x in xs {
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] += x[i] * x[j].conj();
            }
        }
    }
    out
}

pub fn naive_matvec(a: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let m = v.len();
    (0..m)
        .map(|i| (0..m).map(|j| a[i * m + j] * v[j]).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let m = b.len();
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i * m + col].norm().total_cmp(&a[j * m + col].norm()))
            .unwrap();
        if pivot != col {
            for k in 0..m {
                a.swap(col * m + k, pivot * m + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * m + col];
        for row in (col + 1)..m {
            let f = a[row * m + col] / diag;
            for k in col..m {
                let v = a[col * m + k];
                a[row * m + k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![c(0.0, 0.0); m];
    for row in (0..m).rev() {
        let mut s = b[row];
        for k in (row + 1)..m {
            s -= a[row * m + k] * x[k];
        }
        x[row] = s / a[row * m + row];
    }
    x
}

pub fn rel_error(got: &[Complex64], want: &[Complex64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(g, w)| (g - w).norm_sqr()).sum();
    let den: f64 = want.iter().map(|w| w.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `sum_l w_l psi_l`, one scalar at a time.
pub fn naive_combine(weights: &[f64], estimates: &[Vec<Complex64>]) -> Vec<Complex64> {
    let m = estimates[0].len();
    (0..m)
        .map(|i| {
            let mut s = c(0.0, 0.0);
            for (w, e) in weights.iter().zip(estimates) {
                s += e[i] * *w;
            }
            s
        })
        .collect()
}

/// Normalized LMS with regularization `eps`:
/// `w + mu x conj(d - w^H x) / (x^H x + eps)`.
pub fn nlms(w: &[Complex64], x: &[Complex64], d: Complex64, mu: f64, eps: f64) -> Vec<Complex64> {
    let y: Complex64 = w.iter().zip(x).map(|(w, x)| w.conj() * x).sum();
    let e = (d - y).conj();
    let energy: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>() + eps;
    w.iter()
        .zip(x)
        .map(|(w, x)| w + x * e * (mu / energy))
        .collect()
}

/// Stand-alone filter built only from the public per-step operations; the
/// reference for degenerate networks.
pub struct SingleFilter {
    config: distcg::AlgoConfig,
    reuse_in_direction: bool,
    psi: ComplexVector,
    stats: Option<distcg::SecondOrderState>,
    carry: Option<(ComplexVector, ComplexVector)>,
    rls: Option<distcg::baseline::RlsState>,
    ap: Option<distcg::baseline::ApHistory>,
}

impl SingleFilter {
    /// `reuse_in_direction` selects the incremental MCG direction update.
    pub fn new(m: usize, config: distcg::AlgoConfig, reuse_in_direction: bool) -> Self {
        use distcg::AlgoConfig::*;
        let stats = match config {
            Ccg(p) | Mcg(p) => Some(p.seed_statistics(m).unwrap()),
            _ => None,
        };
        let rls = match config {
            Rls { delta, .. } => Some(distcg::baseline::RlsState::new(m, delta)),
            _ => None,
        };
        let ap = match config {
            Ap { order, .. } => Some(distcg::baseline::ApHistory::new(order)),
            _ => None,
        };
        Self {
            config,
            reuse_in_direction,
            psi: ComplexVector::zeros(m),
            stats,
            carry: None,
            rls,
            ap,
        }
    }

    pub fn estimate(&self) -> &ComplexVector {
        &self.psi
    }

    pub fn step(&mut self, s: &RegressionSample) {
        use distcg::adaptive::*;
        use distcg::AlgoConfig::*;
        use distcg::Error;
        let mut ops = distcg::OpCount::default();
        let next = match self.config {
            Ccg(p) => {
                let stats = self.stats.as_mut().unwrap();
                stats.update(s).unwrap();
                ccg_inner_solve(stats, &self.psi, &p).unwrap()
            }
            Mcg(p) => {
                let stats = self.stats.as_mut().unwrap();
                stats.update(s).unwrap();
                let (g, dir) = self.carry.take().unwrap_or_else(|| {
                    let g = residual_gradient(stats.r(), stats.b(), &self.psi).unwrap();
                    (g.clone(), g)
                });
                let alpha = match step_size_alpha(&dir, &g, stats.r(), p.eta()) {
                    Ok(a) => a,
                    Err(Error::DegenerateDirection(_)) => c(0.0, 0.0),
                    Err(e) => panic!("{e}"),
                };
                let mut psi = self.psi.clone();
                psi.axpy(alpha, &dir).unwrap();
                let g_new =
                    mcg_gradient_update(&g, alpha, stats.r(), &dir, s, &self.psi, p.lambda_f())
                        .unwrap();
                let beta = match beta_polak_ribiere(&g_new, &g) {
                    Ok(b) => b,
                    Err(Error::GradientVanished(_)) => c(0.0, 0.0),
                    Err(e) => panic!("{e}"),
                };
                let reuse = data_reuse_term(s, &self.psi).unwrap();
                let term = self.reuse_in_direction.then_some(&reuse);
                let dir = direction_update(&g_new, beta, &dir, term).unwrap();
                self.carry = Some((g_new, dir));
                psi
            }
            Lms { mu } => distcg::baseline::lms_update(&self.psi, s, mu, &mut ops).unwrap(),
            Rls { lambda, .. } => self
                .rls
                .as_mut()
                .unwrap()
                .update(&self.psi, s, lambda, &mut ops)
                .unwrap(),
            Ap { mu, .. } => self
                .ap
                .as_mut()
                .unwrap()
                .update(&self.psi, s, mu, &mut ops)
                .unwrap(),
        };
        self.psi = next;
    }
}

/// Zero-noise samples `d = omega^H x` for `n` nodes over `t` instants.
pub fn noise_free_instants(
    seed: u64,
    m: usize,
    n: usize,
    t: usize,
) -> (ComplexVector, Vec<Vec<RegressionSample>>) {
    let data = distcg::generate_scenario(&distcg::Scenario {
        taps: m,
        nodes: n,
        instants: t,
        input_variance: 1.0,
        noise_variance: 0.0,
        seed,
    })
    .unwrap();
    (data.omega_true, data.samples)
}

/// Noisy samples from the default benchmark variances.
pub fn noisy_instants(seed: u64, m: usize, n: usize, t: usize) -> Vec<Vec<RegressionSample>> {
    distcg::generate_scenario(&distcg::Scenario {
        taps: m,
        nodes: n,
        instants: t,
        seed,
        ..distcg::Scenario::default()
    })
    .unwrap()
    .samples
}

pub fn all_configs(strategy: distcg::Strategy) -> Vec<distcg::AlgoConfig> {
    distcg::AlgorithmKind::ALL
        .into_iter()
        .map(|k| distcg::AlgoConfig::benchmark_default(strategy, k))
        .collect()
}
