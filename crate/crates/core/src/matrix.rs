use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Square<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy> Square<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Self {
            n,
            data: vec![value; n * n],
        }
    }

    /// Panics if `rows` is not square.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "row length must equal row count");
            data.extend_from_slice(row);
        }
        Self { n, data }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Square<U> {
        Square {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn select(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }
}

impl<T> Index<(usize, usize)> for Square<T> {
    type Output = T;

    #[inline(always)]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Square<T> {
    #[inline(always)]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Solves `a x = b` by Gaussian elimination without row exchanges.
///
/// Fails with [`crate::Error::SingularMatrix`] when a pivot's magnitude drops below `eps`.
pub fn gauss_solve(mut a: Square<f64>, mut b: Vec<f64>, eps: f64) -> crate::Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(crate::Error::Dimension(format!(
            "right-hand side has {} entries, expected {n}",
            b.len()
        )));
    }
    for i in 0..n {
        let piv = a[(i, i)];
        if !(piv.abs() >= eps) {
            return Err(crate::Error::SingularMatrix { pivot: i, value: piv });
        }
        for j in i + 1..n {
            let f = a[(j, i)] / piv;
            for p in i..n {
                a[(j, p)] -= f * a[(i, p)];
            }
            b[j] -= f * b[i];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for p in i + 1..n {
            acc -= a[(i, p)] * x[p];
        }
        x[i] = acc / a[(i, i)];
    }
    Ok(x)
}
