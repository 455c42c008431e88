//! Minimal dense linear algebra for small (typically 2x2) systems.
//!
//! The crate needs exact-shape operations on tiny matrices: Jacobians,
//! spectral radii, and Newton solves in dimension N where N is the state
//! dimension of the map (2 for the planar tooling). A general-purpose
//! linear-algebra dependency would be overkill, so the few routines used
//! are written out here.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {pivot:e} at column {col})")]
    Singular { col: usize, pivot: f64 },
    #[error("operation requires a {expected}x{expected} matrix, got {got}x{got}")]
    WrongSize { expected: usize, got: usize },
    #[error("power iteration failed to converge within {0} iterations")]
    NoConvergence(usize),
}

/// Dense square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Mat::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Determinant of a 2x2 matrix.
    pub fn det2(&self) -> Result<f64, LinalgError> {
        if self.n != 2 {
            return Err(LinalgError::WrongSize {
                expected: 2,
                got: self.n,
            });
        }
        Ok(self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0))
    }

    /// Operator infinity norm: maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Entrywise absolute value.
    pub fn abs(&self) -> Mat {
        Mat {
            n: self.n,
            data: self.data.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Eigenvalues of a 2x2 matrix from the characteristic polynomial
    /// `t^2 - tr t + det`; complex pairs come out conjugate.
    pub fn eigenvalues2(&self) -> Result<[Complex64; 2], LinalgError> {
        let tr = self.trace();
        let det = self.det2()?;
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            // Compute the larger-magnitude root without cancellation, then
            // recover the other from the product of the roots.
            let root = disc.sqrt();
            let q = 0.5 * (tr + if tr >= 0.0 { root } else { -root });
            // q = 0 forces tr = 0 and disc = 0, hence both roots vanish.
            let (a, b) = if q == 0.0 { (0.0, 0.0) } else { (q, det / q) };
            let (a, b) = if a.abs() >= b.abs() { (a, b) } else { (b, a) };
            Ok([Complex64::new(a, 0.0), Complex64::new(b, 0.0)])
        } else {
            let im = (-disc).sqrt() / 2.0;
            let re = tr / 2.0;
            Ok([Complex64::new(re, im), Complex64::new(re, -im)])
        }
    }

    /// Spectral radius of a 2x2 matrix.
    pub fn spectral_radius2(&self) -> Result<f64, LinalgError> {
        let eig = self.eigenvalues2()?;
        Ok(eig[0].norm().max(eig[1].norm()))
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for col in 0..n {
            // Pivot selection.
            let mut best = col;
            for row in col + 1..n {
                if a[row * n + col].abs() > a[best * n + col].abs() {
                    best = row;
                }
            }
            let pivot = a[best * n + col];
            if pivot.abs() < 1e-300 {
                return Err(LinalgError::Singular { col, pivot });
            }
            if best != col {
                for j in 0..n {
                    a.swap(col * n + j, best * n + j);
                }
                x.swap(col, best);
            }
            for row in col + 1..n {
                let factor = a[row * n + col] / a[col * n + col];
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
                x[row] -= factor * x[col];
            }
        }
        // Back substitution.
        for col in (0..n).rev() {
            let mut s = x[col];
            for j in col + 1..n {
                s -= a[col * n + j] * x[j];
            }
            x[col] = s / a[col * n + col];
        }
        Ok(x)
    }

    /// Unit eigenvector for a real eigenvalue of a 2x2 matrix, oriented so
    /// the second component is positive when it is meaningfully nonzero,
    /// otherwise the first.
    pub fn eigenvector2(&self, lambda: f64) -> Result<[f64; 2], LinalgError> {
        if self.n != 2 {
            return Err(LinalgError::WrongSize {
                expected: 2,
                got: self.n,
            });
        }
        // Rows of A - lambda I; the eigenvector is orthogonal to both, so
        // take the one with the larger norm for stability.
        let r0 = [self.get(0, 0) - lambda, self.get(0, 1)];
        let r1 = [self.get(1, 0), self.get(1, 1) - lambda];
        let n0 = r0[0].hypot(r0[1]);
        let n1 = r1[0].hypot(r1[1]);
        let row = if n0 >= n1 { r0 } else { r1 };
        let mut v = if row[0].hypot(row[1]) < 1e-14 {
            // A - lambda I vanishes: every direction is an eigenvector.
            [1.0, 0.0]
        } else {
            [row[1], -row[0]]
        };
        let norm = v[0].hypot(v[1]);
        v[0] /= norm;
        v[1] /= norm;
        let flip = if v[1].abs() > 1e-14 {
            v[1] < 0.0
        } else {
            v[0] < 0.0
        };
        if flip {
            v[0] = -v[0];
            v[1] = -v[1];
        }
        Ok(v)
    }

    /// Spectral radius of an entrywise-nonnegative matrix by power
    /// iteration on a strictly positive start vector. Intended for growth
    /// matrices in dimension above 2, where no closed form is used.
    pub fn spectral_radius_nonneg(
        &self,
        tol: f64,
        max_iter: usize,
    ) -> Result<f64, LinalgError> {
        let n = self.n;
        let mut v = vec![1.0; n];
        let mut prev = 0.0;
        for _ in 0..max_iter {
            let w = self.mul_vec(&v);
            let norm = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if norm == 0.0 {
                return Ok(0.0); // nilpotent in one step
            }
            let estimate = norm;
            v = w.iter().map(|x| x / norm).collect();
            if (estimate - prev).abs() <= tol * estimate.max(1.0) {
                return Ok(estimate);
            }
            prev = estimate;
        }
        Err(LinalgError::NoConvergence(max_iter))
    }
}
