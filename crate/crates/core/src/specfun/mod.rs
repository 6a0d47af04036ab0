//! Special functions required by the pricing theorems: the normal CDF, the
//! gamma/beta functions, the MacDonald function K_nu (modified Bessel of the
//! second kind), the Gauss hypergeometric function and the degenerate Appell
//! (Humbert) double series.
//!
//! Accuracy contracts (relative unless stated):
//! - `normal_cdf`: 1e-15 absolute
//! - `ln_gamma`: 1e-13 on exp(ln_gamma) for u in (0, 500]
//! - `bessel_k`: 1e-10 for order in [0, 200], x in (0, 700]
//! - `gauss_2f1` / `appell_degenerate`: honest `tail_bound` in the result,
//!   targeting 1e-12 / 1e-11 of the value
//!
//! All functions are pure and re-entrant.

mod bessel;
mod erf;
mod gamma;
mod humbert;
mod hyp2f1;

pub use bessel::{bessel_k, bessel_k_ln};
pub use erf::normal_cdf;
pub use gamma::{beta, ln_beta, ln_gamma};
pub use humbert::{appell_degenerate, phi1_ln};
pub use hyp2f1::{gauss_2f1, gauss_2f1_pfaff_pos_ln};

/// Outcome of a series evaluation: the value, how many terms were consumed
/// and an honest absolute bound on the truncated tail (plus accumulated
/// rounding, for the cancellation-prone regimes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SpecFunError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series did not converge within {terms} terms (tail bound {tail_bound:.3e})")]
    NoConvergence { terms: usize, tail_bound: f64 },
    #[error("result overflows f64: {0}")]
    Overflow(String),
}

pub type SfResult<T> = std::result::Result<T, SpecFunError>;
