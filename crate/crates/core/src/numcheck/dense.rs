use crate::scalar::Scalar;
use crate::symexpr::{eval_numeric, Assignment, Expr, ExprError};

/// Small row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        DenseMatrix { rows: rows.len(), cols, data: rows.iter().flatten().copied().collect() }
    }

    pub fn evaluate(rows: &[Vec<Expr>], asg: &Assignment<T>) -> Result<Self, ExprError> {
        let mut vals = Vec::with_capacity(rows.len());
        for r in rows {
            vals.push(r.iter().map(|e| eval_numeric(e, asg)).collect::<Result<Vec<_>, _>>()?);
        }
        Ok(Self::from_rows(&vals))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let sv = singular_values(self);
        let smax = sv.iter().copied().fold(T::zero(), T::max);
        if smax == T::zero() {
            return 0;
        }
        let cut = T::rank_threshold() * smax;
        sv.iter().filter(|&&s| s > cut).count()
    }

    /// Positive definiteness via Cholesky.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return false;
            }
            l[(j, j)] = d.sqrt();
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / l[(j, j)];
            }
        }
        true
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Singular values by one-sided Jacobi rotations.
pub fn singular_values<T: Scalar>(m: &DenseMatrix<T>) -> Vec<T> {
    // Work on the orientation with at least as many rows as columns.
    let a = if m.rows >= m.cols { m.clone() } else { m.transpose() };
    let (rows, cols) = (a.rows, a.cols);
    let mut u = a;
    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..rows {
                    alpha = alpha + u[(i, p)] * u[(i, p)];
                    beta = beta + u[(i, q)] * u[(i, q)];
                    gamma = gamma + u[(i, p)] * u[(i, q)];
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let two = T::one() + T::one();
                let zeta = (beta - alpha) / (two * gamma);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = (0..cols)
        .map(|j| (0..rows).fold(T::zero(), |acc, i| acc + u[(i, j)] * u[(i, j)]).sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// `None` when `a` is numerically singular.
pub fn solve_dense<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Option<DenseMatrix<T>> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    assert_eq!(b.rows, n);
    let mut m = a.clone();
    let mut x = b.clone();
    let scale = m.max_abs();
    if scale == T::zero() {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[(i, col)].abs().partial_cmp(&m[(j, col)].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[(piv, col)].abs() <= T::epsilon() * T::from_f64_lossy(64.0) * scale {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.data.swap(piv * n + j, col * n + j);
            }
            for j in 0..x.cols {
                x.data.swap(piv * x.cols + j, col * x.cols + j);
            }
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[(i, col)] / m[(col, col)];
            if f == T::zero() {
                continue;
            }
            for j in col..n {
                m[(i, j)] = m[(i, j)] - f * m[(col, j)];
            }
            for j in 0..x.cols {
                x[(i, j)] = x[(i, j)] - f * x[(col, j)];
            }
        }
    }
    for i in 0..n {
        let d = m[(i, i)];
        for j in 0..x.cols {
            x[(i, j)] = x[(i, j)] / d;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_of_diagonal_and_rank_one() {
        let m = DenseMatrix::<f64>::from_rows(&[vec![3.0, 0.0], vec![0.0, -4.0]]);
        let sv = singular_values(&m);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
        let r1 = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
        assert_eq!(r1.rank(), 1);
        assert_eq!(DenseMatrix::<f64>::zeros(2, 2).rank(), 0);
    }

    #[test]
    fn dense_solve_and_cholesky() {
        let a = DenseMatrix::<f64>::from_rows(&[vec![0.0, 2.0], vec![1.0, 1.0]]);
        let b = DenseMatrix::from_rows(&[vec![4.0], vec![3.0]]);
        let x = solve_dense(&a, &b).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-15 && (x[(1, 0)] - 2.0).abs() < 1e-15);
        assert!(solve_dense(&DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]), &b).is_none());
        assert!(DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).is_positive_definite());
        assert!(!DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_positive_definite());
    }
}
