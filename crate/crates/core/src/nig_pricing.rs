//! Closed-form conditional prices for the normal-inverse-Gaussian model.
//!
//! The J integral behind Theorems 5-8,
//!   Jhat(h, p) = int_0^inf x^{-3/2} e^{-1/x} N(h sqrt(x) + p/sqrt(x)) dx,
//! is the VG master integral at (alpha, c) = (-1/2, 1) with h and p swapped
//! (substitute x -> 1/x), so the kernels reuse `closed_form_i_norm`. The
//! slope-zero branch has the elementary arctan form; the general branch is
//! the Bessel(0,1)/Humbert combination. Both are normalized so that
//! DC = exp((mu2+mu3-r+phi1^2)T) * jump Laplace factors * IG MGF factors
//!      * E[ kernel(sum xi_1) / (2 sqrt(pi)) ],
//! with kernel = 2 Jhat in (0, 2 sqrt(pi)).

use crate::jumplaw::SumLaw;
use crate::model::{self, ModelSpec, SubordinatorFamily, TheoremId};
use crate::vg_pricing::closed_form_i_norm;
use crate::{PricerError, Result};

/// Kernel parameters for the NIG theorems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigKernelParams {
    pub phi1: f64,
    pub slope: f64,
    pub sigma1: f64,
    pub horizon: f64,
    /// mu_1 T - ln K
    pub log_moneyness: f64,
}

impl NigKernelParams {
    pub fn from_spec(spec: &ModelSpec, theorem: TheoremId) -> Result<Self> {
        if theorem.family() != SubordinatorFamily::Nig {
            return Err(PricerError::Numerical(format!("{theorem} is not an NIG theorem")));
        }
        Ok(NigKernelParams {
            phi1: spec.subordinators.shape_indicator,
            slope: model::theorem_slope(spec, theorem),
            sigma1: spec.assets[0].sigma,
            horizon: spec.maturity,
            log_moneyness: model::log_moneyness(spec),
        })
    }

    /// |slope| below 1e-13 (1+|beta_1|) is the Lambda branch; below 1e-8 the
    /// Xi branch is ill-conditioned (|varsigma| -> 0 against e^{|varsigma|}
    /// Bessel terms) and is rerouted through Lambda, which it approaches
    /// continuously.
    pub fn effective_slope(&self, beta1: f64) -> (f64, bool) {
        if self.slope.abs() <= 1e-13 * (1.0 + beta1.abs()) {
            (0.0, false)
        } else if self.slope.abs() < 1e-8 {
            (0.0, true)
        } else {
            (self.slope, false)
        }
    }

    fn h_swapped(&self) -> f64 {
        self.slope * self.phi1 * self.horizon / (self.sigma1 * std::f64::consts::SQRT_2)
    }

    fn p_swapped(&self, x: f64) -> f64 {
        (self.log_moneyness - x) * std::f64::consts::SQRT_2 / (self.sigma1 * self.phi1 * self.horizon)
    }

    /// kernel(x) = 2 Jhat = 2 sqrt(pi) * I_norm(-1/2, 1, p(x), h), the
    /// quantity whose expectation over the jump sum builds DC.
    pub(crate) fn kernel_norm(&self, x: f64, slope_override: Option<f64>) -> Result<f64> {
        let h = match slope_override {
            Some(s) => s * self.phi1 * self.horizon / (self.sigma1 * std::f64::consts::SQRT_2),
            None => self.h_swapped(),
        };
        // swapped argument order: the x-integrand roles of h and p trade places
        closed_form_i_norm(-0.5, 1.0, self.p_swapped(x), h)
    }
}

/// IG moment-generating identity per unit time: E e^{A kappa_1} for the
/// unit-mean-rate inverse-Gaussian clock with shape phi, i.e.
/// exp(phi (phi - sqrt(phi^2 - 2A))); equals e^{phi^2} on the boundary
/// phi^2 = 2A. The exponent is linear in t, so time-T values are powers.
pub fn ig_mgf(phi: f64, a_arg: f64) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(PricerError::Numerical(format!("ig_mgf needs phi > 0, got {phi}")));
    }
    let disc = phi * phi - 2.0 * a_arg;
    if disc < -1e-12 * phi * phi.max(1.0) {
        return Err(PricerError::Numerical(format!(
            "IG MGF infinite: phi^2 = {} < 2A = {}",
            phi * phi,
            2.0 * a_arg
        )));
    }
    Ok((phi * (phi - disc.max(0.0).sqrt())).exp())
}

/// Lambda(x) = sqrt(pi) + (2/sqrt(pi)) sign(mu1 T - ln K - x)
///             arctan(|mu1 T - ln K - x| / (sigma1 phi1 T)),
/// the slope = 0 kernel, valid at every x. Errors if the active slope is
/// not zero.
pub fn lambda_kernel_nig(params: &NigKernelParams, x: f64) -> Result<f64> {
    if params.slope != 0.0 {
        return Err(PricerError::Numerical(format!(
            "lambda branch needs slope = 0, got {}",
            params.slope
        )));
    }
    Ok(lambda_arctan(params, x))
}

fn lambda_arctan(params: &NigKernelParams, x: f64) -> f64 {
    let w = params.log_moneyness - x;
    let sp = std::f64::consts::PI.sqrt();
    sp + 2.0 / sp * w.signum() * (w.abs() / (params.sigma1 * params.phi1 * params.horizon)).atan()
}

/// Xi(x): the slope != 0 kernel (Bessel/Humbert combination), equal to
/// 2 Jhat(h, p(x)). Errors on a zero slope (use the Lambda branch).
pub fn xi_kernel_nig(params: &NigKernelParams, x: f64) -> Result<f64> {
    if params.slope == 0.0 {
        return Err(PricerError::Numerical("xi branch needs slope != 0".into()));
    }
    Ok(2.0 * std::f64::consts::PI.sqrt() * params.kernel_norm(x, None)?)
}

/// ln DC(n1,n2,n3) for an NIG theorem.
pub(crate) fn dc_conditional_ln_nig(
    theorem: TheoremId,
    spec: &ModelSpec,
    n1: u32,
    n2: u32,
    n3: u32,
) -> Result<f64> {
    let kernel_e = kernel_expectation_nig(spec, theorem, n1)?;
    let ln_rest = dc_multiplier_ln_nig(spec, theorem, n2, n3)?;
    if kernel_e <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_rest + kernel_e.ln())
}

// everything except the n1 kernel expectation
pub(crate) fn dc_multiplier_ln_nig(spec: &ModelSpec, theorem: TheoremId, n2: u32, n3: u32) -> Result<f64> {
    let t = spec.maturity;
    let a = &spec.assets;
    let phi1 = spec.subordinators.shape_indicator;
    let mut ln = (a[1].mu + a[2].mu - spec.rates.foreign + phi1 * phi1) * t;
    ln += n2 as f64 * spec.jumps[1].law.laplace_single().ln();
    ln += n3 as f64 * spec.jumps[2].law.laplace_single().ln();
    for (shape, arg) in model::theorem_mgf_factors(spec, theorem) {
        ln += t * ig_mgf(shape, arg)?.ln();
    }
    Ok(ln)
}

/// E[ kernel(sum of n1 jumps) / (2 sqrt(pi)) ] over the full jump-sum law
/// (no atom split here: the Lambda/Xi branch is decided by the slope, not by
/// an atom of the sum).
pub fn kernel_expectation_nig(spec: &ModelSpec, theorem: TheoremId, n1: u32) -> Result<f64> {
    let params = NigKernelParams::from_spec(spec, theorem)?;
    let (eff_slope, _rerouted) = params.effective_slope(spec.assets[0].beta);
    let sum = SumLaw::new(spec.jumps[0].law.clone(), n1);
    let v = sum.expect_functional(
        |x| params.kernel_norm(x, Some(eff_slope)).unwrap_or(f64::NAN),
        -1.0, // excludes nothing on the nonnegative support
    )?;
    if !v.is_finite() {
        return Err(PricerError::Numerical("NIG kernel expectation did not evaluate".into()));
    }
    Ok(v)
}

/// Conditional price DC(n1,n2,n3) for an NIG theorem; the spec must pass
/// validation for that theorem.
pub fn dc_conditional_nig(theorem: TheoremId, spec: &ModelSpec, n1: u32, n2: u32, n3: u32) -> Result<f64> {
    let rep = model::validate_model(spec, theorem);
    if !rep.passed() {
        return Err(PricerError::Validation {
            theorem,
            failed: rep.first_failure().map(|c| format!("{}: {}", c.name, c.detail)).unwrap_or_default(),
        });
    }
    Ok(dc_conditional_ln_nig(theorem, spec, n1, n2, n3)?.exp())
}

/// Quadrature oracle for the J-integral duality: 2 * tanh-sinh of the
/// defining integrand (normalized by 2 sqrt(pi) it matches `kernel_norm`).
pub fn j_kernel_quadrature(params: &NigKernelParams, x: f64) -> f64 {
    let h = params.slope * params.phi1 * params.horizon / (params.sigma1 * std::f64::consts::SQRT_2);
    let p = (params.log_moneyness - x) * std::f64::consts::SQRT_2
        / (params.sigma1 * params.phi1 * params.horizon);
    let r = crate::quad::exp_sinh(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let ln_w = -1.5 * u.ln() - 1.0 / u;
            if ln_w < -745.0 {
                return 0.0;
            }
            ln_w.exp() * crate::specfun::normal_cdf(h * u.sqrt() + p / u.sqrt())
        },
        1e-11,
        1e-16,
        11,
    );
    2.0 * r.value
}
