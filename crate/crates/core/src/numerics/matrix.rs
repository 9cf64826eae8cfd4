use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix of finite `f64` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawMatrix> for DenseMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        DenseMatrix::from_row_major(raw.rows, raw.cols, raw.entries)
    }
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(DenseMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from a slice of equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row length",
                    expected: cols,
                    got: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), cols, entries)
    }

    /// Single-column matrix, handy for 1D inputs.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::from_row_major(values.len(), 1, values.to_vec())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut entries = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            entries[i * n + i] = *v;
        }
        Self::from_row_major(n, n, entries)
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

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul",
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                context: "matvec",
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(self
            .row_iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> DenseMatrix {
        let mut entries = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            entries.extend_from_slice(self.row(i));
        }
        DenseMatrix {
            rows: idx.len(),
            cols: self.cols,
            entries,
        }
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_cols(&self, idx: &[usize]) -> DenseMatrix {
        let mut entries = Vec::with_capacity(idx.len() * self.rows);
        for r in self.row_iter() {
            entries.extend(idx.iter().map(|&j| r[j]));
        }
        DenseMatrix {
            rows: self.rows,
            cols: idx.len(),
            entries,
        }
    }

    /// Appends `column` as a new last column.
    pub fn with_column(&self, column: &[f64]) -> Result<DenseMatrix> {
        if column.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "appended column",
                expected: self.rows,
                got: column.len(),
            });
        }
        let mut entries = Vec::with_capacity(self.rows * (self.cols + 1));
        for (r, c) in self.row_iter().zip(column) {
            entries.extend_from_slice(r);
            entries.push(*c);
        }
        Self::from_row_major(self.rows, self.cols + 1, entries)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows > 0 && other.rows > 0 && self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "vstack",
                expected: self.cols,
                got: other.cols,
            });
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(DenseMatrix {
            rows: self.rows + other.rows,
            cols,
            entries,
        })
    }

    pub fn column_values(&self, j: usize) -> Vec<f64> {
        self.row_iter().map(|r| r[j]).collect()
    }

    pub fn frobenius_distance(&self, other: &DenseMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}
