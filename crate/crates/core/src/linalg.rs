//! Dense complex vectors and Hermitian matrices.
//!
//! Inner products follow `a^H b = sum_m conj(a_m) * b_m` throughout. Sizes are
//! small (tens of taps), so everything is stored densely in row-major order.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};

/// Relative tolerance used when validating Hermitian input.
const HERMITIAN_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn hdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// A complex column vector of fixed length `M >= 1`.
#[derive(Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid(
                "entries",
                "vector length must be at least 1",
            ));
        }
        Ok(Self(entries))
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "vector length must be at least 1");
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    /// Builds a vector with zero imaginary parts.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// `self^H other`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        check_len(self.len(), other.len())?;
        Ok(hdot(&self.0, &other.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `||self - other||^2`.
    pub fn distance_sqr(&self, other: &Self) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum())
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: Complex64, x: &Self) -> Result<()> {
        check_len(self.len(), x.len())?;
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += alpha * v;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self(self.0.iter().map(|v| alpha * v).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// A square complex matrix kept Hermitian by every mutating operation.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(scale, 0.0);
        }
        m
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    /// Builds a matrix from row-major entries, rejecting non-Hermitian input.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "matrix dimension must be at least 1"));
        }
        check_len(dim * dim, data.len())?;
        let scale = data.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..dim {
            for j in i..dim {
                let gap = (data[i * dim + j] - data[j * dim + i].conj()).norm();
                if gap > HERMITIAN_TOL * scale {
                    return Err(Error::invalid(
                        "data",
                        format!("entry ({i},{j}) is not the conjugate of ({j},{i})"),
                    ));
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid(
                "diag",
                "matrix dimension must be at least 1",
            ));
        }
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_row_major(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matvec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_len(self.dim, v.len())?;
        let out = (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.as_slice())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(ComplexVector(out))
    }

    /// `v^H A v`; real up to rounding for Hermitian `A`.
    pub fn quad_form(&self, v: &ComplexVector) -> Result<Complex64> {
        let av = self.matvec(v)?;
        Ok(hdot(v.as_slice(), av.as_slice()))
    }

    /// `A <- factor * A + x x^H`.
    pub fn decay_and_add_outer(&mut self, factor: f64, x: &ComplexVector) -> Result<()> {
        check_len(self.dim, x.len())?;
        let xs = x.as_slice();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let idx = i * self.dim + j;
                self.data[idx] = self.data[idx] * factor + xs[i] * xs[j].conj();
            }
        }
        Ok(())
    }

    /// `A <- A + coef * u u^H` for real `coef`.
    pub fn add_scaled_outer(&mut self, coef: f64, u: &ComplexVector) -> Result<()> {
        check_len(self.dim, u.len())?;
        let us = u.as_slice();
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i * self.dim + j] += us[i] * us[j].conj() * coef;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.scale(factor);
        m
    }

    /// Largest `|A(i,j) - conj(A(j,i))|` over all index pairs.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Cholesky factorization `A = L L^H`; fails unless `A` is positive definite.
    pub fn cholesky(&self) -> Result<Cholesky> {
        let n = self.dim;
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut diag = self.get(j, j).re;
            for k in 0..j {
                diag -= l[j * n + k].norm_sqr();
            }
            if diag.is_nan() || diag <= 0.0 || diag.is_infinite() {
                return Err(Error::SolverFailure(format!(
                    "matrix is not positive definite (pivot {j} = {diag:e})"
                )));
            }
            let ljj = diag.sqrt();
            l[j * n + j] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { dim: n, lower: l })
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[Complex64]> = (0..self.dim).map(|i| self.row(i)).collect();
        f.debug_struct("HermitianMatrix")
            .field("dim", &self.dim)
            .field("rows", &rows)
            .finish()
    }
}

/// Lower-triangular Cholesky factor.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<Complex64>,
}

impl Cholesky {
    pub fn solve(&self, b: &ComplexVector) -> Result<ComplexVector> {
        let n = self.dim;
        check_len(n, b.len())?;
        let l = &self.lower;
        // L y = b
        let mut y = b.as_slice().to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        // L^H x = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i].conj() * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        ComplexVector::new(y)
    }
}
