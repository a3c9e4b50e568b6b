use std::fmt;
use std::ops::{Index, IndexMut};

use super::element::{Epsilon, Finite, MaxPlus};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major max-plus matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<MaxPlus<T>>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> MaxPlus<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from nested rows. Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<MaxPlus<T>>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// The null matrix ℰ.
    pub fn null(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Epsilon; rows * cols],
        }
    }

    /// The identity I: zeros on the diagonal, ε elsewhere.
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { MaxPlus::e() } else { Epsilon })
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { Finite(values[i]) } else { Epsilon })
    }

    /// ε–0 adjacency matrix of a graph on `n` nodes from 0-based arcs.
    pub fn adjacency(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::null(n, n);
        for (i, j) in arcs {
            g[(i, j)] = MaxPlus::e();
        }
        g
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

    pub fn entries(&self) -> &[MaxPlus<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[MaxPlus<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_null(&self) -> bool {
        self.data.iter().all(MaxPlus::is_epsilon)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise ⊕.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape("add", rhs)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&x, &y)| x.oplus(y))
                .collect(),
        })
    }

    /// Max-plus product: v_ij = ⊕_k x_ik ⊗ y_kj.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(self.shape_error("mul", rhs));
        }
        let mut out = Self::null(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let x = self[(i, k)];
                if x.is_epsilon() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let cell = &mut out.data[i * rhs.cols + j];
                    *cell = cell.oplus(x.otimes(rhs[(k, j)]));
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product X ⊗ v.
    pub fn mul_vec(&self, v: &[MaxPlus<T>]) -> Result<Vec<MaxPlus<T>>> {
        if self.cols != v.len() {
            return Err(Error::Shape {
                op: "mul_vec",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len(),
                right_cols: 1,
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &x)| a.otimes(x))
                    .sum()
            })
            .collect())
    }

    /// c ⊗ X.
    pub fn scale(&self, c: MaxPlus<T>) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| c.otimes(x)).collect(),
        }
    }

    /// X^q by repeated multiplication, with X^0 = I.
    pub fn power(&self, q: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut acc = Self::identity(self.rows);
        for _ in 0..q {
            acc = self.mul(&acc)?;
        }
        Ok(acc)
    }

    /// ‖X‖ = ⊕ of all entries; ε only for the null matrix.
    pub fn norm(&self) -> MaxPlus<T> {
        self.data.iter().copied().sum()
    }

    /// ε–0 matrix with the same support as `self`.
    pub fn pattern(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|x| if x.is_epsilon() { Epsilon } else { MaxPlus::e() })
                .collect(),
        }
    }

    /// Arcs (i, j) of the associated graph, 0-based.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_epsilon())
            .map(move |(idx, _)| (idx / cols, idx % cols))
    }

    /// Entrywise X ≤ Y. Shapes must agree.
    pub fn le(&self, rhs: &Self) -> bool {
        self.rows == rhs.rows
            && self.cols == rhs.cols
            && self.data.iter().zip(&rhs.data).all(|(x, y)| x.le(y))
    }

    fn check_same_shape(&self, op: &'static str, rhs: &Self) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            Err(self.shape_error(op, rhs))
        } else {
            Ok(())
        }
    }

    fn shape_error(&self, op: &'static str, rhs: &Self) -> Error {
        Error::Shape {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: rhs.rows,
            right_cols: rhs.cols,
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = MaxPlus<T>;
    fn index(&self, (i, j): (usize, usize)) -> &MaxPlus<T> {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut MaxPlus<T> {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(ToString::to_string).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1);
        for i in 0..self.rows {
            let line: Vec<String> = (0..self.cols)
                .map(|j| format!("{:>width$}", cells[i * self.cols + j]))
                .collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}
