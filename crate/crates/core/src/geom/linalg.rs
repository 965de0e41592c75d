//! Symbolic linear algebra over expression matrices.
//!
//! Everything is fraction-free up to the final division by a determinant.
//! Pivots are accepted when the determinant is a nonzero constant, or else
//! when the numeric zero test reports it nonzero.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numcheck::NumericContext;
use crate::scalar::Scalar;
use crate::symexpr::{is_zero, Expr, ZeroVerdict};

pub type Matrix = Vec<Vec<Expr>>;

fn det_rec(m: &[Vec<Expr>], row: usize, cols: u64, memo: &mut HashMap<(usize, u64), Expr>) -> Expr {
    if row == m.len() {
        return Expr::one();
    }
    if let Some(e) = memo.get(&(row, cols)) {
        return e.clone();
    }
    let mut terms = Vec::new();
    let mut sign_pos = true;
    for (c, entry) in m[row].iter().enumerate() {
        if cols & (1 << c) == 0 {
            continue;
        }
        if !entry.is_zero() {
            let minor = det_rec(m, row + 1, cols & !(1 << c), memo);
            let t = entry * &minor;
            terms.push(if sign_pos { t } else { -t });
        }
        sign_pos = !sign_pos;
    }
    let out: Expr = terms.into_iter().sum();
    memo.insert((row, cols), out.clone());
    out
}

/// Determinant by Laplace expansion with minor memoization.
pub fn determinant(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    assert!(n <= 63 && m.iter().all(|r| r.len() == n), "determinant needs a square matrix");
    det_rec(m, 0, (1u64 << n) - 1, &mut HashMap::new())
}

fn minor(m: &[Vec<Expr>], skip_row: usize, skip_col: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != skip_col).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// Classical adjugate, `adj(m) m = det(m) I`.
pub fn adjugate(m: &[Vec<Expr>]) -> Matrix {
    let n = m.len();
    if n == 1 {
        return vec![vec![Expr::one()]];
    }
    let mut out = vec![vec![Expr::zero(); n]; n];
    for (i, row) in m.iter().enumerate() {
        for j in 0..row.len() {
            let c = determinant(&minor(m, i, j));
            out[j][i] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    out
}

pub fn matmul(a: &[Vec<Expr>], b: &[Vec<Expr>]) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|r| {
            assert_eq!(r.len(), inner);
            (0..cols).map(|j| (0..inner).map(|k| &r[k] * &b[k][j]).sum()).collect()
        })
        .collect()
}

pub fn transpose(m: &[Vec<Expr>]) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Whether `e` can serve as a pivot.
pub fn pivot_ok<T: Scalar>(e: &Expr, ctx: &NumericContext<T>) -> Result<bool> {
    if e.is_zero() {
        return Ok(false);
    }
    if e.as_rational().is_some() {
        return Ok(true);
    }
    Ok(is_zero(e, ctx.trials, ctx.tolerance, ctx)?.verdict == ZeroVerdict::Nonzero)
}

/// `m^-1 = adj(m) / det(m)`.
pub fn inverse<T: Scalar>(m: &[Vec<Expr>], ctx: &NumericContext<T>) -> Result<Matrix> {
    let det = determinant(m);
    if !pivot_ok(&det, ctx)? {
        return Err(Error::RankDeficient(format!("determinant {det} vanishes")));
    }
    let adj = adjugate(m);
    adj.iter()
        .map(|r| r.iter().map(|e| e.checked_div(&det).map_err(Error::from)).collect())
        .collect()
}

/// Solves `a x = b` for square invertible `a`.
pub fn solve<T: Scalar>(a: &[Vec<Expr>], b: &[Vec<Expr>], ctx: &NumericContext<T>) -> Result<Matrix> {
    Ok(matmul(&inverse(a, ctx)?, b))
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            cur.push(c);
            go(c + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

fn select_columns(m: &[Vec<Expr>], cols: &[usize]) -> Matrix {
    m.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect()
}

/// Chooses `r` pivot columns of an `r x n` matrix of full row rank.
/// Constant minors are preferred; otherwise the first numerically nonzero
/// minor in lexicographic column order.
pub fn pivot_columns<T: Scalar>(m: &[Vec<Expr>], ctx: &NumericContext<T>) -> Result<(Vec<usize>, Expr)> {
    let r = m.len();
    let n = m.first().map_or(0, Vec::len);
    let combos = combinations(n, r);
    let dets: Vec<Expr> = combos.iter().map(|c| determinant(&select_columns(m, c))).collect();
    for (c, d) in combos.iter().zip(&dets) {
        if !d.is_zero() && d.as_rational().is_some() {
            return Ok((c.clone(), d.clone()));
        }
    }
    for (c, d) in combos.iter().zip(&dets) {
        if pivot_ok(d, ctx)? {
            return Ok((c.clone(), d.clone()));
        }
    }
    if dets.iter().all(Expr::is_zero) {
        Err(Error::RankDeficient("every maximal minor vanishes identically".into()))
    } else {
        Err(Error::PivotUndecidable("no maximal minor tests nonzero".into()))
    }
}

/// Basis of the right nullspace of an `r x n` matrix of full row rank,
/// one vector per non-pivot column: the free entry is the pivot minor and
/// the pivot entries are `-adj(M_P) m_k`.
pub fn nullspace<T: Scalar>(m: &[Vec<Expr>], ctx: &NumericContext<T>) -> Result<Vec<Vec<Expr>>> {
    let n = m.first().map_or(0, Vec::len);
    if m.is_empty() {
        return Ok((0..n).map(|k| (0..n).map(|i| if i == k { Expr::one() } else { Expr::zero() }).collect()).collect());
    }
    let (pivots, det) = pivot_columns(m, ctx)?;
    let adj = adjugate(&select_columns(m, &pivots));
    let mut out = Vec::new();
    for k in (0..n).filter(|k| !pivots.contains(k)) {
        let mut v = vec![Expr::zero(); n];
        v[k] = det.clone();
        for (a, &p) in pivots.iter().enumerate() {
            v[p] = -(0..m.len()).map(|b| &adj[a][b] * &m[b][k]).sum::<Expr>();
        }
        out.push(v);
    }
    Ok(out)
}
