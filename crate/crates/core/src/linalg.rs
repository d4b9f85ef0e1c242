//! Dense LU factorization with partial pivoting for the small systems that
//! arise from stationary distributions and performance potentials.

use crate::error::{MdpError, Result};
use crate::scalar::Scalar;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
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

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

/// Packed LU factors `P A = L U` (unit lower triangle stored below the diagonal).
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> LuFactors<T> {
    pub fn factor(mut a: DenseMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let scale = a
            .data
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
            .max(T::one());
        let tiny = T::epsilon() * T::lit(n.max(1) as f64) * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (pivot_row, pivot_abs) =
                (k..n)
                    .map(|r| (r, a.get(r, k).abs()))
                    .fold(
                        (k, -T::one()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_abs.is_nan() || pivot_abs <= tiny {
                return Err(MdpError::SingularSystem(format!(
                    "pivot {pivot_abs} in column {k} below {tiny}"
                )));
            }
            if pivot_row != k {
                perm.swap(k, pivot_row);
                for j in 0..n {
                    let t = a.get(k, j);
                    a.set(k, j, a.get(pivot_row, j));
                    a.set(pivot_row, j, t);
                }
            }
            let pivot = a.get(k, k);
            for r in (k + 1)..n {
                let factor = a.get(r, k) / pivot;
                a.set(r, k, factor);
                if factor != T::zero() {
                    for j in (k + 1)..n {
                        let v = a.get(r, j) - factor * a.get(k, j);
                        a.set(r, j, v);
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.dim();
        assert_eq!(b.len(), n, "right-hand side length mismatch");
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = (0..i).fold(x[i], |s, j| s - self.lu.get(i, j) * x[j]);
            x[i] = s;
        }
        for i in (0..n).rev() {
            let s = ((i + 1)..n).fold(x[i], |s, j| s - self.lu.get(i, j) * x[j]);
            x[i] = s / self.lu.get(i, i);
        }
        x
    }
}

pub fn solve<T: Scalar>(a: DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    Ok(LuFactors::factor(a)?.solve(b))
}
