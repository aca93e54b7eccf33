//! Dense LU factorization with partial pivoting for the small systems the
//! occupancy and Bellman solvers produce.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self { n, data })
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.data[j * self.n + i] = self.data[i * self.n + j];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// Returns `I - scale * self`.
    pub fn identity_minus_scaled(&self, scale: T) -> Self {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = -scale * *v;
        }
        for i in 0..self.n {
            out.data[i * self.n + i] = out.data[i * self.n + i] + T::one();
        }
        out
    }
}

/// LU factors `P A = L U` packed into one matrix.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    lu: SquareMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> LuFactors<T> {
    pub fn factor(a: &SquareMatrix<T>) -> Result<Self> {
        let n = a.n;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = T::epsilon() * scale.max(T::one()) * T::from_count(n.max(1));
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu.get(i, k).abs()))
                .fold((k, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > tiny) {
                return Err(Error::SolverFailure(format!("singular pivot in column {k}")));
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu.get(k, k);
            for i in (k + 1)..n {
                let f = lu.get(i, k) / d;
                lu.set(i, k, f);
                if f != T::zero() {
                    for j in (k + 1)..n {
                        let v = lu.get(i, j) - f * lu.get(k, j);
                        lu.set(i, j, v);
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    #[allow(clippy::needless_range_loop)] // triangular solves read clearest with explicit indices
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.lu.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!("rhs has length {}, expected {n}", b.len())));
        }
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc = acc - self.lu.get(i, j) * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in (i + 1)..n {
                acc = acc - self.lu.get(i, j) * y[j];
            }
            y[i] = acc / self.lu.get(i, i);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverFailure("non-finite solution".into()));
        }
        Ok(y)
    }
}

/// Solves `A x = b` and returns `x` together with the max-norm residual.
pub fn solve_checked<T: Scalar>(a: &SquareMatrix<T>, b: &[T]) -> Result<(Vec<T>, T)> {
    let x = LuFactors::factor(a)?.solve(b)?;
    let ax = a.mul_vec(&x);
    let residual = ax.iter().zip(b).fold(T::zero(), |m, (&l, &r)| m.max((l - r).abs()));
    Ok((x, residual))
}
