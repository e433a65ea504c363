//! Numerical verification of metallic and complex metallic submanifold identities.
//!
//! A submanifold `M` of a Riemannian manifold carrying a parallel metallic
//! structure (`J^2 = pJ + q`) or complex metallic structure (`J^2 + aJ + b = 0`)
//! inherits four operator blocks `P, Q, R, S` from `J`. This crate evaluates
//! the algebraic, differential and curvature identities those blocks satisfy
//! at a single point, in an arbitrary (not necessarily orthonormal) frame.
//!
//! The library is generic over the scalar type through [`Real`]; the `*64`
//! aliases at the crate root fix the scalar to `f64`.

// Comparisons are written as `!(x < bound)` throughout so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compat;
mod error;
pub mod examples;
pub mod family;
pub mod model_spaces;
pub mod report;
pub mod structures;
pub mod submanifold;
pub mod tensor;

pub use error::{Error, Result};
pub use report::ResidualReport;

use std::fmt::{Debug, Display};

/// Scalar type accepted by every routine in the crate.
pub trait Real:
    nalgebra::RealField
    + Copy
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x).expect("finite literal")
    }

    /// Quiet NaN, used to mark residuals that could not be evaluated.
    fn nan() -> Self {
        Self::lit(f64::NAN)
    }

    fn is_nan(self) -> bool {
        self.partial_cmp(&self).is_none()
    }

    /// Converts the scalar to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Default relative tolerance used by verdicts.
pub const DEFAULT_TOL: f64 = 1e-9;

pub type Metric64 = tensor::Metric<f64>;
pub type OperatorBlock64 = tensor::OperatorBlock<f64>;
pub type BilinearForm64 = tensor::BilinearForm<f64>;
pub type CurvatureTensor64 = tensor::CurvatureTensor<f64>;
pub type MetallicParams64 = structures::MetallicParams<f64>;
pub type ComplexMetallicParams64 = structures::ComplexMetallicParams<f64>;
pub type StructureOperator64 = structures::StructureOperator<f64>;
pub type InducedOperators64 = submanifold::InducedOperators<f64>;
pub type DerivativeData64 = submanifold::DerivativeData<f64>;
pub type HypersurfaceData64 = submanifold::HypersurfaceData<f64>;
pub type ProductSpaceParams64 = model_spaces::ProductSpaceParams<f64>;
pub type ComplexSpaceFormParams64 = model_spaces::ComplexSpaceFormParams<f64>;
pub type EktParams64 = model_spaces::EktParams<f64>;
pub type PointRecord64 = compat::PointRecord<f64>;
pub type ResidualReport64 = report::ResidualReport<f64>;
