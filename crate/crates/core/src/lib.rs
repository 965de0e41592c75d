//! Symbolic and numeric verification of tangent and cotangent bundle
//! structures on coordinate charts.
//!
//! The symbolic layer ([`symexpr`], [`geom`], [`bundle`], [`cotangent`],
//! [`legendre`]) is exact over the rationals. The numeric oracle
//! ([`numcheck`]) is generic over [`Scalar`], implemented for `f32` and `f64`.

pub mod bundle;
pub mod cotangent;
pub mod error;
pub mod geom;
pub mod legendre;
pub mod numcheck;
pub mod report;
pub mod scalar;
pub mod symexpr;

pub use error::{Error, Result};
pub use geom::{Bivector, Chart, CoordinateMap, OneForm, Tensor11, Torsion, TwoForm, VectorField};
pub use bundle::{BasicSubalgebra, PartialLinearStructure, TangentStructure};
pub use cotangent::CotangentStructure;
pub use legendre::{LegendreMap, Metric};
pub use numcheck::{Assessment, NumericContext, ResidualSummary, SampleDomain, Verdict};
pub use report::{CheckEntry, StructureReport};
pub use scalar::Scalar;
pub use symexpr::{parse, Expr};

/// Default floating-point type of the numeric oracle.
pub type Real = f64;
pub type NumericContext64 = NumericContext<f64>;
pub type NumericContext32 = NumericContext<f32>;
pub type ResidualSummary64 = ResidualSummary<f64>;
pub type Assessment64 = Assessment<f64>;
