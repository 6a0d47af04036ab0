//! Pricing engine for digital asset-or-nothing calls/puts on three dependent
//! assets whose log-returns follow time-changed Brownian motions (gamma or
//! inverse-Gaussian clocks, i.e. variance-gamma / normal-inverse-Gaussian
//! marginals) minus independent compound Poisson downward jumps.
//!
//! The engine produces certified lower/upper price bounds from truncated
//! triple Poisson sums over conditional prices `DC(n1,n2,n3)` evaluated in
//! closed form, and verifies them against an internal Monte Carlo oracle.

pub mod bounds;
pub mod jumplaw;
pub mod mc_oracle;
pub mod model;
pub mod nig_pricing;
pub mod specfun;
pub mod vg_pricing;

pub mod cli;

mod dd;
mod quad;
pub mod rng;
mod util;

pub use bounds::{auto_orders, bracket_price, BoundMode, PriceBounds};
pub use jumplaw::{JumpLaw, SumLaw};
pub use mc_oracle::{estimate_price, McEstimate};
pub use model::{
    expected_s3s2, price_put_from_call, validate_model, AssetParams, CorrelationBlock, Linkage,
    ModelSpec, SubordinatorFamily, SubordinatorStructure, TheoremId, ValidationReport,
};

/// Errors surfaced by the pricing pipeline.
#[derive(Debug, thiserror::Error)]
pub enum PricerError {
    #[error("special function evaluation failed: {0}")]
    SpecFun(#[from] specfun::SpecFunError),
    #[error("jump law evaluation failed: {0}")]
    JumpLaw(#[from] jumplaw::JumpLawError),
    #[error("model validation failed for {theorem:?}: {failed}")]
    Validation { theorem: model::TheoremId, failed: String },
    #[error("{0}")]
    UnsupportedDependence(String),
    #[error("truncation order budget exceeded (needed N > {max_order})")]
    OrderBudget { max_order: u32 },
    #[error("{0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, PricerError>;
