//! Small dense complex matrices.
//!
//! The device only ever needs 3×3 products, but the permanent and fidelity
//! routines accept any square size, so the storage is a flat row-major
//! vector rather than a fixed array.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance under which a matrix is considered unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::domain("matrix must have at least one row"));
        }
        let c = rows[0].len();
        if c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::domain("ragged or empty matrix rows"));
        }
        Ok(ComplexMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Build from `(re, im)` pairs, row-major. Convenient for printed tables.
    pub fn from_parts<const N: usize>(parts: [[(f64, f64); N]; N]) -> Self {
        let mut m = Self::zeros(N, N);
        for (i, row) in parts.iter().enumerate() {
            for (j, &(re, im)) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    /// Entrywise squared modulus.
    pub fn abs_sq(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Rows and columns picked (with repetition allowed) from `self`.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, &r) in rows.iter().enumerate() {
            for (b, &c) in cols.iter().enumerate() {
                m[(a, b)] = self[(r, c)];
            }
        }
        m
    }

    /// `max |(U·U† − I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let p = self * &self.adjoint();
        let id = Self::identity(self.rows);
        p.data
            .iter()
            .zip(&id.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARITY_TOL
    }

    /// Largest entrywise distance `max |a_ij − b_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Multiply by the global phase that makes the largest-modulus entry
    /// real and positive. Printed matrices are only defined up to such a
    /// phase, so entrywise comparisons go through this first.
    pub fn phase_aligned(&self) -> Self {
        let pivot = self
            .data
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(Complex64::new(1.0, 0.0));
        if pivot.norm() == 0.0 {
            return self.clone();
        }
        self.scale(Complex64::from_polar(1.0, -pivot.arg()))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_unitary() {
        assert!(ComplexMatrix::identity(4).is_unitary());
        assert_eq!(ComplexMatrix::identity(3).trace(), c(3.0, 0.0));
    }

    #[test]
    fn product_and_adjoint() {
        let a = ComplexMatrix::from_parts([[(1.0, 1.0), (0.0, 2.0)], [(3.0, 0.0), (0.0, -1.0)]]);
        let b = ComplexMatrix::from_parts([[(0.0, 1.0), (1.0, 0.0)], [(2.0, 0.0), (1.0, 1.0)]]);
        let p = &a * &b;
        // (1+i)(i) + (2i)(2) = -1 + i + 4i
        assert_eq!(p[(0, 0)], c(-1.0, 5.0));
        let adj = a.adjoint();
        assert_eq!(adj[(0, 1)], c(3.0, 0.0));
        assert_eq!(adj[(1, 0)], c(0.0, -2.0));
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]];
        assert!(ComplexMatrix::from_rows(&rows).is_err());
    }

    #[test]
    fn non_unitary_detected() {
        let m = ComplexMatrix::from_parts([[(1.0, 0.0), (1.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]]);
        assert!(!m.is_unitary());
        assert!(m.unitarity_defect() > 0.5);
    }

    #[test]
    fn phase_alignment_makes_pivot_real() {
        let m = ComplexMatrix::identity(2).scale(Complex64::from_polar(1.0, 0.7));
        let a = m.phase_aligned();
        assert!((a[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }
}
