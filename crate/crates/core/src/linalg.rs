//! Dense complex linear algebra for the small square matrices used throughout
//! the crate: channel matrices, filtering matrices and their Gram matrices.
//!
//! Two independent routes to singular values are provided. [`svd`] is a
//! one-sided (Hestenes) Jacobi decomposition that returns both unitary
//! factors; [`singular_values`] delegates to nalgebra's bidiagonal QR and is
//! the fast path used inside Monte Carlo loops. [`hermitian_eigenvalues`] is
//! a third, eigenvalue-based route used to check Gram-matrix identities.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `sigma_min <= SINGULARITY_THRESHOLD * sigma_max` marks a matrix singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

const JACOBI_TOLERANCE: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Dense complex matrix stored in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, validating shape and finiteness.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(format!("{rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Real-valued convenience constructor, mostly for tests and fixtures.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidShape("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&v| Complex64::new(v, 0.0)))
            .collect();
        Self::from_row_major(r, c, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    /// Square matrix with the given real diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    /// `self + shift * I`.
    pub fn add_scaled_identity(&self, shift: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] += shift;
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    fn zip_with(&self, rhs: &ComplexMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: rhs.rows * rhs.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    /// `||self - I||_F`, the residual used by unitarity and inverse checks.
    pub fn distance_from_identity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (self[(i, j)] - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    fn ensure_square_finite(&self) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(self.rows)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks_exact(self.cols) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Nonnegative values sorted in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Validates an already-descending sequence.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidShape("empty spectrum".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "spectrum values must be finite and nonnegative".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("spectrum must be descending".into()));
        }
        Ok(Self(values))
    }

    /// Sorts into descending order before validating.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest value.
    pub fn first(&self) -> f64 {
        self.0[0]
    }

    /// Smallest value.
    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn squared(&self) -> Spectrum {
        Spectrum(self.0.iter().map(|v| v * v).collect())
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// `first / last`, rejecting numerically singular spectra.
    pub fn condition_number(&self) -> Result<f64> {
        let (max, min) = (self.first(), self.last());
        if min <= SINGULARITY_THRESHOLD * max {
            return Err(Error::Singular {
                sigma_min: min,
                sigma_max: max,
            });
        }
        Ok(max / min)
    }
}

/// `A = U * diag(spectrum) * V^H`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub left_basis: ComplexMatrix,
    pub spectrum: Spectrum,
    pub right_basis: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.spectrum.len();
        let mut us = self.left_basis.clone();
        for i in 0..us.rows() {
            for j in 0..n {
                us[(i, j)] *= self.spectrum.values()[j];
            }
        }
        us.matmul(&self.right_basis.hermitian())
            .expect("factor shapes agree by construction")
    }
}

/// Column-major scratch storage for the Jacobi sweeps.
struct Columns {
    n: usize,
    data: Vec<Complex64>,
}

impl Columns {
    fn from_matrix(a: &ComplexMatrix) -> Self {
        let n = a.rows();
        let mut data = Vec::with_capacity(n * a.cols());
        for j in 0..a.cols() {
            data.extend((0..n).map(|i| a[(i, j)]));
        }
        Self { n, data }
    }

    fn identity(n: usize) -> Self {
        Self::from_matrix(&ComplexMatrix::identity(n))
    }

    fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    fn pair_mut(&mut self, p: usize, q: usize) -> (&mut [Complex64], &mut [Complex64]) {
        debug_assert!(p < q);
        let (head, tail) = self.data.split_at_mut(q * self.n);
        (&mut head[p * self.n..(p + 1) * self.n], &mut tail[..self.n])
    }

    /// `col_p <- c col_p - s conj(e) col_q`, `col_q <- s col_p + c conj(e) col_q`.
    fn rotate(&mut self, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
        let e = phase.conj();
        let (cp, cq) = self.pair_mut(p, q);
        for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
            let xp = *x;
            let yq = *y * e;
            *x = xp * c - yq * s;
            *y = xp * s + yq * c;
        }
    }

    fn into_matrix(self, order: &[usize]) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, order.len(), |i, j| self.data[order[j] * n + i])
    }
}

/// Rotation `(c, s, phase)` that zeroes the off-diagonal of the Hermitian
/// 2x2 block `[[alpha, gamma], [conj(gamma), beta]]`.
fn jacobi_rotation(alpha: f64, beta: f64, gamma: Complex64) -> (f64, f64, Complex64) {
    let g = gamma.norm();
    let phase = gamma / g;
    let zeta = (beta - alpha) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t, phase)
}

fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Singular value decomposition of a square matrix by one-sided Jacobi.
pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    let n = a.ensure_square_finite()?;
    let mut work = Columns::from_matrix(a);
    let mut right = Columns::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm_sqr(work.col(p));
                let beta = norm_sqr(work.col(q));
                let gamma = dot_conj(work.col(p), work.col(q));
                if gamma.norm() <= JACOBI_TOLERANCE * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let (c, s, phase) = jacobi_rotation(alpha, beta, gamma);
                work.rotate(p, q, c, s, phase);
                right.rotate(p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| norm_sqr(work.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    // Normalise left vectors in descending order, re-orthogonalising so tiny
    // or zero singular values still yield a unitary factor.
    let mut left: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let candidate = if sigma[k] > 0.0 {
            work.col(j).iter().map(|z| z / sigma[k]).collect()
        } else {
            vec![Complex64::new(0.0, 0.0); n]
        };
        let v = orthonormal_completion(&left, candidate, n);
        left.push(v);
    }

    let left_basis = ComplexMatrix::from_fn(n, n, |i, j| left[j][i]);
    Ok(SvdResult {
        left_basis,
        spectrum: Spectrum::new(sigma)?,
        right_basis: right.into_matrix(&order),
    })
}

/// Projects `v` off `basis` (twice) and normalises; falls back to unit
/// vectors when `v` lies in the span.
fn orthonormal_completion(basis: &[Vec<Complex64>], v: Vec<Complex64>, n: usize) -> Vec<Complex64> {
    let project = |mut v: Vec<Complex64>| {
        for _ in 0..2 {
            for b in basis {
                let coeff = dot_conj(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= coeff * y;
                }
            }
        }
        v
    };
    let v = project(v);
    let norm = norm_sqr(&v).sqrt();
    if norm > 0.5 {
        return v.into_iter().map(|z| z / norm).collect();
    }
    for k in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[k] = Complex64::new(1.0, 0.0);
        let e = project(e);
        let norm = norm_sqr(&e).sqrt();
        if norm > 0.5 {
            return e.into_iter().map(|z| z / norm).collect();
        }
    }
    unreachable!("an orthonormal completion always exists while basis.len() < n")
}

/// Singular values only, via nalgebra's bidiagonal QR. Descending.
pub fn singular_values(a: &ComplexMatrix) -> Result<Spectrum> {
    a.ensure_square_finite()?;
    let values = a.to_nalgebra().singular_values();
    Spectrum::from_unsorted(values.iter().map(|v| v.max(0.0)).collect())
}

/// `A^H A`.
pub fn gram(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.cols();
    let mut g = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..a.rows() {
                acc += a[(k, i)].conj() * a[(k, j)];
            }
            g[(i, j)] = acc;
            g[(j, i)] = acc.conj();
        }
        g[(i, i)].im = 0.0;
    }
    g
}

/// Inverse by Gauss-Jordan elimination with partial pivoting, after a
/// singular-value check against [`SINGULARITY_THRESHOLD`].
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.ensure_square_finite()?;
    singular_values(a)?.condition_number()?;

    let mut lhs = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lhs[(i, col)].norm().total_cmp(&lhs[(j, col)].norm()))
            .expect("non-empty range");
        if pivot != col {
            for j in 0..n {
                lhs.data.swap(pivot * n + j, col * n + j);
                inv.data.swap(pivot * n + j, col * n + j);
            }
        }
        let scale = lhs[(col, col)].inv();
        for j in 0..n {
            lhs[(col, j)] *= scale;
            inv[(col, j)] *= scale;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = lhs[(i, col)];
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let l = lhs[(col, j)];
                let r = inv[(col, j)];
                lhs[(i, j)] -= factor * l;
                inv[(i, j)] -= factor * r;
            }
        }
    }
    Ok(inv)
}

/// `sigma_max / sigma_min`.
pub fn condition_number(a: &ComplexMatrix) -> Result<f64> {
    singular_values(a)?.condition_number()
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, descending.
///
/// Independent of both singular-value routes.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = a.ensure_square_finite()?;
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in i..n {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > 1e-10 * scale {
                return Err(Error::InvalidArgument("matrix is not Hermitian".into()));
            }
        }
    }

    let mut m = a.clone();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= f64::EPSILON * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let gamma = m[(p, q)];
                if gamma.norm() == 0.0 {
                    continue;
                }
                let (c, s, phase) = jacobi_rotation(m[(p, p)].re, m[(q, q)].re, gamma);
                let e = phase.conj();
                // A <- A J
                for i in 0..n {
                    let xp = m[(i, p)];
                    let yq = m[(i, q)] * e;
                    m[(i, p)] = xp * c - yq * s;
                    m[(i, q)] = xp * s + yq * c;
                }
                // A <- J^H A
                let ec = e.conj();
                for j in 0..n {
                    let xp = m[(p, j)];
                    let yq = m[(q, j)] * ec;
                    m[(p, j)] = xp * c - yq * s;
                    m[(q, j)] = xp * s + yq * c;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)].im = 0.0;
                m[(q, q)].im = 0.0;
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        })
    }

    fn assert_svd_invariants(a: &ComplexMatrix) {
        let n = a.rows() as f64;
        let s = svd(a).unwrap();
        assert!(gram(&s.left_basis).distance_from_identity() <= 1e-10 * n);
        assert!(gram(&s.right_basis).distance_from_identity() <= 1e-10 * n);
        let residual = s.reconstruct().sub(a).unwrap().frobenius_norm();
        assert!(residual <= 1e-10 * a.frobenius_norm(), "residual {residual}");
    }

    #[test]
    fn svd_identity_and_diagonal() {
        assert_eq!(svd(&ComplexMatrix::identity(2)).unwrap().spectrum.values(), &[1.0, 1.0]);
        let s = svd(&ComplexMatrix::from_diagonal(&[1.0, 2.0])).unwrap();
        assert_eq!(s.spectrum.values(), &[2.0, 1.0]);
        assert_svd_invariants(&ComplexMatrix::from_diagonal(&[1.0, 2.0]));
    }

    #[test]
    fn svd_random_reconstruction() {
        let a = random_matrix(3, 11);
        let s = svd(&a).unwrap();
        let residual = s.reconstruct().sub(&a).unwrap().frobenius_norm();
        assert!(residual <= 1e-10, "{residual}");
        for n in [2, 4, 8, 16] {
            assert_svd_invariants(&random_matrix(n, n as u64));
        }
    }

    #[test]
    fn svd_handles_rank_deficient_input() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        let s = svd(&a).unwrap();
        assert!(s.spectrum.last() < 1e-14);
        assert_svd_invariants(&a);
        let zero = ComplexMatrix::zeros(3, 3);
        let s = svd(&zero).unwrap();
        assert_eq!(s.spectrum.first(), 0.0);
        assert!(gram(&s.left_basis).distance_from_identity() < 1e-12);
    }

    #[test]
    fn svd_rejects_non_square() {
        let a = ComplexMatrix::zeros(2, 3);
        assert_eq!(svd(&a).unwrap_err(), Error::NotSquare { rows: 2, cols: 3 });
    }

    #[test]
    fn non_finite_entries_rejected() {
        let data = vec![Complex64::new(f64::NAN, 0.0); 4];
        assert_eq!(ComplexMatrix::from_row_major(2, 2, data).unwrap_err(), Error::NonFinite);
        let mut a = ComplexMatrix::identity(2);
        a[(0, 1)] = Complex64::new(f64::INFINITY, 0.0);
        assert_eq!(svd(&a).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn two_singular_value_routes_agree() {
        for seed in 0..20 {
            let a = random_matrix(2 + (seed as usize % 7), seed);
            let jacobi = svd(&a).unwrap().spectrum;
            let qr = singular_values(&a).unwrap();
            for (x, y) in jacobi.values().iter().zip(qr.values()) {
                assert!((x - y).abs() <= 1e-12 * jacobi.first());
            }
        }
    }

    #[test]
    fn gram_examples() {
        let g = gram(&ComplexMatrix::from_diagonal(&[2.0, 1.0]));
        assert_eq!(g, ComplexMatrix::from_diagonal(&[4.0, 1.0]));
        let u = svd(&random_matrix(4, 3)).unwrap().left_basis;
        assert!(gram(&u).distance_from_identity() <= 1e-12);
    }

    #[test]
    fn gram_eigenvalues_are_squared_singular_values() {
        let h = random_matrix(5, 99);
        let eig = hermitian_eigenvalues(&gram(&h)).unwrap();
        let sv = svd(&h).unwrap().spectrum;
        for (e, s) in eig.iter().zip(sv.values()) {
            assert!((e - s * s).abs() <= 1e-9 * s * s, "{e} vs {}", s * s);
        }
    }

    #[test]
    fn hermitian_eigenvalues_rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            inverse(&ComplexMatrix::identity(3)).unwrap(),
            ComplexMatrix::identity(3)
        );
        let inv = inverse(&ComplexMatrix::from_diagonal(&[2.0, 4.0])).unwrap();
        assert_eq!(inv, ComplexMatrix::from_diagonal(&[0.5, 0.25]));
        let a = random_matrix(4, 5);
        let residual = a.matmul(&inverse(&a).unwrap()).unwrap().distance_from_identity();
        assert!(residual <= 1e-9 * 4.0);
    }

    #[test]
    fn inverse_reports_singularity() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        match inverse(&a) {
            Err(Error::Singular { sigma_min, sigma_max }) => {
                assert!(sigma_min <= 1e-12 * sigma_max);
                assert!((sigma_max - 5.0).abs() < 1e-12);
            }
            other => panic!("expected singular error, got {other:?}"),
        }
        assert!(matches!(
            condition_number(&ComplexMatrix::zeros(2, 2)),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn condition_number_examples() {
        let u = svd(&random_matrix(4, 8)).unwrap().left_basis;
        assert!((condition_number(&u).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(
            condition_number(&ComplexMatrix::from_diagonal(&[2.0, 1.0])).unwrap(),
            2.0
        );
        let h = random_matrix(4, 21);
        let direct = condition_number(&h).unwrap();
        let inverted = condition_number(&inverse(&h).unwrap()).unwrap();
        assert!((direct - inverted).abs() <= 1e-8 * direct);
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![1.0, 2.0]).is_err());
        assert!(Spectrum::new(vec![1.0, -0.5]).is_err());
        assert!(Spectrum::new(vec![]).is_err());
        let s = Spectrum::from_unsorted(vec![0.5, 3.0, 1.0]).unwrap();
        assert_eq!(s.values(), &[3.0, 1.0, 0.5]);
        assert_eq!(s.condition_number().unwrap(), 6.0);
    }
}
