//! Symmetric matrix newtype over `nalgebra::DMatrix` with Cholesky helpers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::Result;

/// A dense symmetric matrix of order `n`.
///
/// Construction enforces symmetry exactly: off-diagonal pairs are stored as
/// the same value. Positive definiteness is not checked at construction;
/// operations that need it ([`SymMatrix::cholesky`], [`SymMatrix::chol_logdet`])
/// fail with [`Error::NotPositiveDefinite`] when a non-positive pivot shows up.
///
/// Serializes as `{ "order": n, "data": [row-major entries] }`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct SymMatrixRepr {
    order: usize,
    data: Vec<f64>,
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SymMatrixRepr {
            order: self.n,
            data: self.to_row_major(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SymMatrixRepr::deserialize(deserializer)?;
        SymMatrix::from_row_major(repr.order, &repr.data).map_err(D::Error::custom)
    }
}

impl SymMatrix {
    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        SymMatrix {
            n,
            data: DMatrix::identity(n, n),
        }
    }

    /// Scaled identity `c * I`.
    pub fn scaled_identity(n: usize, c: f64) -> Self {
        SymMatrix {
            n,
            data: DMatrix::identity(n, n) * c,
        }
    }

    /// Zero matrix of order `n`.
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: DMatrix::zeros(n, n),
        }
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix {
            n: diag.len(),
            data: DMatrix::from_diagonal(&DVector::from_row_slice(diag)),
        }
    }

    /// Builds from a generator; the value stored at `(i, j)` and `(j, i)` is
    /// `f(min(i,j), max(i,j))`, so the result is symmetric by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        SymMatrix { n, data }
    }

    /// Wraps a square matrix, symmetrizing as `(M + M^T) / 2`.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "symmetrize needs a square matrix");
        let data = (&m + m.transpose()) * 0.5;
        SymMatrix { n, data }
    }

    /// Wraps a row-major flat buffer of length `n*n`; fails if not symmetric.
    pub fn from_row_major(n: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected {} entries for order {}, got {}",
                n * n,
                n,
                flat.len()
            )));
        }
        let data = DMatrix::from_row_slice(n, n, flat);
        for i in 0..n {
            for j in (i + 1)..n {
                if data[(i, j)] != data[(j, i)] {
                    return Err(Error::Parse(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SymMatrix { n, data })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Sets the `(i, j)` and `(j, i)` entries.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[(i, j)] = v;
        self.data[(j, i)] = v;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Row-major flat copy, e.g. for serialization.
    pub fn to_row_major(&self) -> Vec<f64> {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| self.data[(i, j)]))
            .collect()
    }

    /// Principal submatrix on the index set `idx` (order preserved).
    ///
    /// Indices must be valid and pairwise distinct. Principal submatrices of
    /// SPD matrices are themselves SPD.
    pub fn submatrix(&self, idx: &[usize]) -> Result<SymMatrix> {
        if idx.is_empty() {
            return Err(Error::Dimension("empty index set".into()));
        }
        for (pos, &i) in idx.iter().enumerate() {
            if i >= self.n {
                return Err(Error::Dimension(format!(
                    "index {i} out of range for order {}",
                    self.n
                )));
            }
            if idx[..pos].contains(&i) {
                return Err(Error::Dimension(format!("duplicate index {i}")));
            }
        }
        let l = idx.len();
        let mut data = DMatrix::zeros(l, l);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                data[(a, b)] = self.data[(i, j)];
            }
        }
        Ok(SymMatrix { n: l, data })
    }

    /// Sum of two symmetric matrices.
    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: &self.data + &other.data,
        }
    }

    /// Adds `c * v v^T` in place.
    pub fn add_scaled_outer(&mut self, c: f64, v: &DVector<f64>) {
        assert_eq!(v.len(), self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                self.data[(i, j)] += c * v[i] * v[j];
            }
        }
    }

    /// Cholesky factorization; fails on a non-positive pivot.
    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        self.data
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite(format!("order {}", self.n)))
    }

    /// `ln det(M) = 2 * sum_i ln L_ii` from the Cholesky factor.
    pub fn chol_logdet(&self) -> Result<f64> {
        let chol = self.cholesky()?;
        Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
    }

    /// Matrix inverse through the Cholesky factorization.
    pub fn chol_inverse(&self) -> Result<SymMatrix> {
        let chol = self.cholesky()?;
        let inv = chol.inverse();
        Ok(SymMatrix::symmetrize(inv))
    }

    /// Quadratic form `v^T M^{-1} v` via two triangular solves.
    pub fn inv_quadform(&self, v: &DVector<f64>) -> Result<f64> {
        let chol = self.cholesky()?;
        let y = chol.solve(v);
        Ok(v.dot(&y))
    }

    /// `tr(self * other)` for symmetric `other`.
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        let mut t = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                t += self.data[(i, j)] * other.data[(j, i)];
            }
        }
        t
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                d = d.max((self.data[(i, j)] - other.data[(i, j)]).abs());
            }
        }
        d
    }
}
