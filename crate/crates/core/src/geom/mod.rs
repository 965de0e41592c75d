//! Chart-based tensor calculus.
//!
//! Index conventions:
//! - `VectorField` components `X^i` mean `X = X^i d/dx^i`.
//! - `OneForm` components `a_i` mean `a = a_i dx^i`.
//! - `TwoForm` stores `w_ij` for `i < j`, meaning `w = sum_{i<j} w_ij dx^i ^ dx^j`,
//!   and `w(X, Y) = w_ij X^i Y^j` summed over all `i, j`.
//! - `Tensor11` stores `S^i_j`, so `S(X)^i = S^i_j X^j` and
//!   `S*(a)_j = a_i S^i_j`.

pub mod fault;
pub mod linalg;
mod map;
mod ops;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symexpr::{parse, Expr};

pub use map::CoordinateMap;
pub use ops::*;

#[derive(Debug, PartialEq, Eq, Hash)]
struct ChartInner {
    name: String,
    coords: Vec<String>,
}

/// An ordered list of named coordinates on an open region of R^n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart(Arc<ChartInner>);

impl Chart {
    pub fn new<S: AsRef<str>>(name: &str, coords: &[S]) -> Result<Chart> {
        if coords.is_empty() {
            return Err(Error::InvalidChart(format!("{name}: no coordinates")));
        }
        let coords: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(Error::InvalidChart(format!("{name}: duplicate coordinate {c}")));
            }
            if parse(c).ok().and_then(|e| e.as_symbol().map(str::to_string)).as_deref() != Some(c.as_str()) {
                return Err(Error::InvalidChart(format!("{name}: {c:?} is not an identifier")));
            }
        }
        Ok(Chart(Arc::new(ChartInner { name: name.to_string(), coords })))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn coords(&self) -> &[String] {
        &self.0.coords
    }

    pub fn dim(&self) -> usize {
        self.0.coords.len()
    }

    pub fn coord(&self, i: usize) -> Expr {
        Expr::symbol(&self.0.coords[i])
    }

    pub fn coord_exprs(&self) -> Vec<Expr> {
        (0..self.dim()).map(|i| self.coord(i)).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.coords.iter().position(|c| c == name)
    }

    pub(crate) fn ensure_same(&self, other: &Chart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ChartMismatch(self.name().to_string(), other.name().to_string()))
        }
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.dim(), got })
        }
    }
}

fn parse_all(texts: &[&str]) -> Result<Vec<Expr>> {
    texts.iter().map(|t| parse(t).map_err(Error::from)).collect()
}

/// `X = X^i d/dx^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &Chart, comps: Vec<Expr>) -> Result<Self> {
        chart.check_len(comps.len())?;
        Ok(VectorField { chart: chart.clone(), comps })
    }

    pub fn parse(chart: &Chart, comps: &[&str]) -> Result<Self> {
        Self::new(chart, parse_all(comps)?)
    }

    pub fn zero(chart: &Chart) -> Self {
        VectorField { chart: chart.clone(), comps: vec![Expr::zero(); chart.dim()] }
    }

    /// `d/dx^i`.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut v = Self::zero(chart);
        v.comps[i] = Expr::one();
        v
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.chart.ensure_same(&other.chart)?;
        Ok(VectorField { chart: self.chart.clone(), comps: zip_with(&self.comps, &other.comps, |a, b| a + b) })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.chart.ensure_same(&other.chart)?;
        Ok(VectorField { chart: self.chart.clone(), comps: zip_with(&self.comps, &other.comps, |a, b| a - b) })
    }

    pub fn scale(&self, g: &Expr) -> VectorField {
        VectorField { chart: self.chart.clone(), comps: self.comps.iter().map(|c| c * g).collect() }
    }
}

/// `a = a_i dx^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OneForm {
    chart: Chart,
    comps: Vec<Expr>,
}

impl OneForm {
    pub fn new(chart: &Chart, comps: Vec<Expr>) -> Result<Self> {
        chart.check_len(comps.len())?;
        Ok(OneForm { chart: chart.clone(), comps })
    }

    pub fn parse(chart: &Chart, comps: &[&str]) -> Result<Self> {
        Self::new(chart, parse_all(comps)?)
    }

    pub fn zero(chart: &Chart) -> Self {
        OneForm { chart: chart.clone(), comps: vec![Expr::zero(); chart.dim()] }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// `a(X) = a_i X^i`.
    pub fn contract(&self, x: &VectorField) -> Result<Expr> {
        self.chart.ensure_same(&x.chart)?;
        Ok(self.comps.iter().zip(&x.comps).map(|(a, b)| a * b).sum())
    }

    pub fn add(&self, other: &OneForm) -> Result<OneForm> {
        self.chart.ensure_same(&other.chart)?;
        Ok(OneForm { chart: self.chart.clone(), comps: zip_with(&self.comps, &other.comps, |a, b| a + b) })
    }

    pub fn sub(&self, other: &OneForm) -> Result<OneForm> {
        self.chart.ensure_same(&other.chart)?;
        Ok(OneForm { chart: self.chart.clone(), comps: zip_with(&self.comps, &other.comps, |a, b| a - b) })
    }

    pub fn scale(&self, g: &Expr) -> OneForm {
        OneForm { chart: self.chart.clone(), comps: self.comps.iter().map(|c| c * g).collect() }
    }
}

fn zip_with(a: &[Expr], b: &[Expr], f: impl Fn(&Expr, &Expr) -> Expr) -> Vec<Expr> {
    a.iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Antisymmetric two-index object stored by its `i < j` entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Antisymmetric {
    chart: Chart,
    upper: Vec<Expr>,
}

impl Antisymmetric {
    pub fn zero(chart: &Chart) -> Self {
        let n = chart.dim();
        Antisymmetric { chart: chart.clone(), upper: vec![Expr::zero(); n * (n - 1) / 2] }
    }

    /// Builds from a full matrix, keeping the `i < j` entries. The caller
    /// asserts antisymmetry.
    pub fn from_full(chart: &Chart, m: &[Vec<Expr>]) -> Result<Self> {
        chart.check_len(m.len())?;
        let mut out = Self::zero(chart);
        let n = chart.dim();
        for (i, row) in m.iter().enumerate() {
            chart.check_len(row.len())?;
            for j in i + 1..n {
                out.upper[pair_index(n, i, j)] = row[j].clone();
            }
        }
        Ok(out)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn get(&self, i: usize, j: usize) -> Expr {
        let n = self.chart.dim();
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Expr::zero(),
            std::cmp::Ordering::Less => self.upper[pair_index(n, i, j)].clone(),
            std::cmp::Ordering::Greater => -&self.upper[pair_index(n, j, i)],
        }
    }

    /// Sets `(i, j)` and, implicitly, `(j, i)` to the negation.
    pub fn set(&mut self, i: usize, j: usize, value: Expr) {
        let n = self.chart.dim();
        assert_ne!(i, j, "diagonal of an antisymmetric object is zero");
        if i < j {
            self.upper[pair_index(n, i, j)] = value;
        } else {
            self.upper[pair_index(n, j, i)] = -value;
        }
    }

    pub fn full(&self) -> Vec<Vec<Expr>> {
        let n = self.chart.dim();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn upper(&self) -> &[Expr] {
        &self.upper
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(Expr::is_zero)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.chart.ensure_same(&other.chart)?;
        Ok(Antisymmetric { chart: self.chart.clone(), upper: zip_with(&self.upper, &other.upper, |a, b| a - b) })
    }

    pub fn scale(&self, g: &Expr) -> Self {
        Antisymmetric { chart: self.chart.clone(), upper: self.upper.iter().map(|c| c * g).collect() }
    }
}

/// `w = sum_{i<j} w_ij dx^i ^ dx^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwoForm(pub Antisymmetric);

/// `L = sum_{i<j} L^ij d/dx^i ^ d/dx^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bivector(pub Antisymmetric);

impl TwoForm {
    pub fn zero(chart: &Chart) -> Self {
        TwoForm(Antisymmetric::zero(chart))
    }

    /// Sum of `coeff * dx^i ^ dx^j` terms.
    pub fn from_terms(chart: &Chart, terms: &[(usize, usize, Expr)]) -> Self {
        let mut a = Antisymmetric::zero(chart);
        for (i, j, c) in terms {
            let prev = a.get(*i, *j);
            a.set(*i, *j, &prev + c);
        }
        TwoForm(a)
    }

    pub fn chart(&self) -> &Chart {
        self.0.chart()
    }

    pub fn get(&self, i: usize, j: usize) -> Expr {
        self.0.get(i, j)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `w(X, Y)`.
    pub fn eval(&self, x: &VectorField, y: &VectorField) -> Result<Expr> {
        self.chart().ensure_same(x.chart())?;
        self.chart().ensure_same(y.chart())?;
        let n = self.chart().dim();
        let mut acc = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc.push(&(&self.get(i, j) * x.comp(i)) * y.comp(j));
                }
            }
        }
        Ok(acc.into_iter().sum())
    }

    pub fn sub(&self, other: &TwoForm) -> Result<TwoForm> {
        Ok(TwoForm(self.0.sub(&other.0)?))
    }
}

impl Bivector {
    pub fn zero(chart: &Chart) -> Self {
        Bivector(Antisymmetric::zero(chart))
    }

    pub fn chart(&self) -> &Chart {
        self.0.chart()
    }

    pub fn get(&self, i: usize, j: usize) -> Expr {
        self.0.get(i, j)
    }

    /// `L(a, b) = L^ij a_i b_j`.
    pub fn eval(&self, a: &OneForm, b: &OneForm) -> Result<Expr> {
        self.chart().ensure_same(a.chart())?;
        self.chart().ensure_same(b.chart())?;
        let n = self.chart().dim();
        let mut acc = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc.push(&(&self.get(i, j) * a.comp(i)) * b.comp(j));
                }
            }
        }
        Ok(acc.into_iter().sum())
    }
}

/// `S = S^i_j d/dx^i (x) dx^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tensor11 {
    chart: Chart,
    comps: Vec<Vec<Expr>>,
}

impl Tensor11 {
    /// `rows[i][j] = S^i_j`.
    pub fn new(chart: &Chart, rows: Vec<Vec<Expr>>) -> Result<Self> {
        chart.check_len(rows.len())?;
        for r in &rows {
            chart.check_len(r.len())?;
        }
        Ok(Tensor11 { chart: chart.clone(), comps: rows })
    }

    pub fn parse(chart: &Chart, rows: &[&[&str]]) -> Result<Self> {
        let rows = rows.iter().map(|r| parse_all(r)).collect::<Result<Vec<_>>>()?;
        Self::new(chart, rows)
    }

    pub fn zero(chart: &Chart) -> Self {
        let n = chart.dim();
        Tensor11 { chart: chart.clone(), comps: vec![vec![Expr::zero(); n]; n] }
    }

    pub fn identity(chart: &Chart) -> Self {
        let mut t = Self::zero(chart);
        for i in 0..chart.dim() {
            t.comps[i][i] = Expr::one();
        }
        t
    }

    /// `dx^j (x) d/dx^i`, i.e. the single component `S^i_j = 1`.
    pub fn elementary(chart: &Chart, upper: usize, lower: usize) -> Self {
        let mut t = Self::zero(chart);
        t.comps[upper][lower] = Expr::one();
        t
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.comps[i][j]
    }

    pub fn rows(&self) -> &[Vec<Expr>] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().flatten().all(Expr::is_zero)
    }

    pub fn add(&self, other: &Tensor11) -> Result<Tensor11> {
        self.chart.ensure_same(&other.chart)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| zip_with(a, b, |x, y| x + y)).collect();
        Ok(Tensor11 { chart: self.chart.clone(), comps })
    }

    pub fn sub(&self, other: &Tensor11) -> Result<Tensor11> {
        self.chart.ensure_same(&other.chart)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| zip_with(a, b, |x, y| x - y)).collect();
        Ok(Tensor11 { chart: self.chart.clone(), comps })
    }

    pub fn scale(&self, g: &Expr) -> Tensor11 {
        let comps = self.comps.iter().map(|r| r.iter().map(|c| c * g).collect()).collect();
        Tensor11 { chart: self.chart.clone(), comps }
    }

    /// `(self o other)^i_j = self^i_k other^k_j`.
    pub fn compose(&self, other: &Tensor11) -> Result<Tensor11> {
        self.chart.ensure_same(&other.chart)?;
        let n = self.chart.dim();
        let comps = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &self.comps[i][k] * &other.comps[k][j]).sum()).collect())
            .collect();
        Ok(Tensor11 { chart: self.chart.clone(), comps })
    }

    pub fn entries(&self) -> impl Iterator<Item = &Expr> {
        self.comps.iter().flatten()
    }
}

/// Vector-valued two-form `N^i_jk`, antisymmetric in `jk`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Torsion {
    chart: Chart,
    comps: Vec<Antisymmetric>,
}

impl Torsion {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Expr {
        self.comps[i].get(j, k)
    }

    /// Every stored `N^i_jk`, `j < k`, with its indices.
    pub fn entries(&self) -> Vec<((usize, usize, usize), Expr)> {
        let n = self.chart.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in j + 1..n {
                    out.push(((i, j, k), self.get(i, j, k)));
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Antisymmetric::is_zero)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.comps.iter().enumerate().map(|(i, c)| (c, format!("d/d{}", self.chart.coords()[i]))))
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.comps.iter().enumerate().map(|(i, c)| (c, format!("d{}", self.chart.coords()[i]))))
    }
}

impl fmt::Display for Tensor11 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.chart.coords();
        let mut items = Vec::new();
        for (i, row) in self.comps.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                items.push((c, format!("d{} (x) d/d{}", names[j], names[i])));
            }
        }
        write_terms(f, items.into_iter())
    }
}

fn write_terms<'a>(f: &mut fmt::Formatter<'_>, items: impl Iterator<Item = (&'a Expr, String)>) -> fmt::Result {
    let mut any = false;
    for (c, basis) in items {
        if c.is_zero() {
            continue;
        }
        if any {
            f.write_str(" + ")?;
        }
        any = true;
        if *c == Expr::one() {
            f.write_str(&basis)?;
        } else {
            write!(f, "({}) {}", c, basis)?;
        }
    }
    if !any {
        f.write_str("0")?;
    }
    Ok(())
}
