//! Reconstruction of distributions supported on `[0, 1]` from their integer
//! moment sequences, by inverting the map from mixture weights over binomial
//! kernels to moments. The inverse is a single exact integer matrix per
//! order, so the only error sources are the precision of the input moments
//! and the working digit budget.
//!
//! The crate also ships the moment sequences this machinery is typically
//! pointed at: beta laws, point masses, and the conditional success
//! probability of a Poisson cellular network under an SIR threshold, whose
//! moments are reciprocals of a Gauss hypergeometric value.

pub mod analysis;
pub mod dec;
mod error;
pub mod hyp2f1;
pub mod moments;
mod posfloat;
pub mod precision;
pub mod transform;

pub use analysis::{
    ConvergenceReport, ErrorProfile, PercentileCurve, PercentilePoint, ThetaGridDb, ThetaMoments,
};
pub use bigdecimal::BigDecimal;
pub use error::{Error, Result};
pub use hyp2f1::Hyp2f1Request;
pub use moments::{BetaParams, SirParams};
pub use precision::{BudgetBasis, CmReport, CmViolation, DecayClass, PrecisionBudget};
pub use transform::{
    CdfApproximation, CdfMode, MixtureWeights, MomentVector, PdfApproximation, TransformMatrix,
};
