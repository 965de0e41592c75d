use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numcheck::{assess, Assessment, NumericContext};
use crate::scalar::Scalar;
use crate::symexpr::Expr;

use super::Chart;

/// A coordinate map `source -> target` given by the target coordinates as
/// expressions in the source coordinates, with an optional inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMap {
    pub name: String,
    source: Chart,
    target: Chart,
    forward: Vec<Expr>,
    inverse: Option<Vec<Expr>>,
}

impl CoordinateMap {
    pub fn new(name: &str, source: &Chart, target: &Chart, forward: Vec<Expr>, inverse: Option<Vec<Expr>>) -> Result<Self> {
        if forward.len() != target.dim() {
            return Err(Error::Dimension { expected: target.dim(), got: forward.len() });
        }
        if let Some(inv) = &inverse {
            if inv.len() != source.dim() {
                return Err(Error::Dimension { expected: source.dim(), got: inv.len() });
            }
        }
        Ok(CoordinateMap { name: name.to_string(), source: source.clone(), target: target.clone(), forward, inverse })
    }

    pub fn identity(chart: &Chart) -> Self {
        let coords = chart.coord_exprs();
        CoordinateMap {
            name: "id".into(),
            source: chart.clone(),
            target: chart.clone(),
            forward: coords.clone(),
            inverse: Some(coords),
        }
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn forward(&self) -> &[Expr] {
        &self.forward
    }

    pub fn inverse(&self) -> Option<&[Expr]> {
        self.inverse.as_deref()
    }

    pub fn require_inverse(&self) -> Result<&[Expr]> {
        self.inverse().ok_or_else(|| Error::MissingInverse(self.name.clone()))
    }

    /// The inverse as a map `target -> source`.
    pub fn inverted(&self) -> Result<CoordinateMap> {
        let inv = self.require_inverse()?.to_vec();
        Ok(CoordinateMap {
            name: format!("{}^-1", self.name),
            source: self.target.clone(),
            target: self.source.clone(),
            forward: inv,
            inverse: Some(self.forward.clone()),
        })
    }

    /// Bindings `source coordinate -> expression in target coordinates`.
    pub(crate) fn inverse_bindings(&self) -> Result<BTreeMap<String, Expr>> {
        let inv = self.require_inverse()?;
        Ok(self.source.coords().iter().cloned().zip(inv.iter().cloned()).collect())
    }

    /// Bindings `target coordinate -> expression in source coordinates`.
    pub(crate) fn forward_bindings(&self) -> BTreeMap<String, Expr> {
        self.target.coords().iter().cloned().zip(self.forward.iter().cloned()).collect()
    }

    /// Composes an expression in source coordinates with the inverse.
    pub fn in_target(&self, e: &Expr) -> Result<Expr> {
        Ok(e.substitute(&self.inverse_bindings()?)?)
    }

    /// Composes an expression in target coordinates with the map.
    pub fn in_source(&self, e: &Expr) -> Result<Expr> {
        Ok(e.substitute(&self.forward_bindings())?)
    }

    /// `self` after `first`: `first.source -> self.target`.
    pub fn compose_after(&self, first: &CoordinateMap) -> Result<CoordinateMap> {
        first.target.ensure_same(&self.source)?;
        let forward = self.forward.iter().map(|e| first.in_source(e)).collect::<Result<Vec<_>>>()?;
        let inverse = match (first.inverse(), self.inverse()) {
            (Some(_), Some(inv2)) => {
                let b = self.target.coords().iter().cloned().zip(inv2.iter().cloned()).collect::<BTreeMap<_, _>>();
                let inv1 = first.require_inverse()?;
                Some(inv1.iter().map(|e| e.substitute(&b)).collect::<Result<Vec<_>, _>>()?)
            }
            _ => None,
        };
        CoordinateMap::new(&format!("{}.{}", self.name, first.name), &first.source, &self.target, forward, inverse)
    }

    /// Residuals of both round trips `inverse o forward` and `forward o inverse`.
    pub fn round_trip_residuals(&self) -> Result<Vec<Expr>> {
        let inv = self.require_inverse()?;
        let fb = self.forward_bindings();
        let ib = self.inverse_bindings()?;
        let mut out = Vec::new();
        for (i, e) in inv.iter().enumerate() {
            out.push(&e.substitute(&fb)? - &self.source.coord(i));
        }
        for (a, e) in self.forward.iter().enumerate() {
            out.push(&e.substitute(&ib)? - &self.target.coord(a));
        }
        Ok(out)
    }

    pub fn check_inverse<T: Scalar>(&self, ctx: &NumericContext<T>) -> Result<Assessment<T>> {
        Ok(assess(&self.round_trip_residuals()?, ctx)?)
    }
}
