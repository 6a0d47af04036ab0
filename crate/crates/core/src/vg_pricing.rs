//! Closed-form conditional prices DC(n1,n2,n3) for the variance-gamma model
//! and the master integral
//!
//!   I(alpha, c, h, p) = int_0^inf x^alpha e^{-c x} N(h sqrt(x) + p/sqrt(x)) dx
//!
//! whose closed forms (a beta/Gauss combination at p = 0, a Bessel/Humbert
//! combination otherwise) are what the Lambda and Xi kernels assemble. The
//! normal-inverse-Gaussian kernels reuse the same evaluator at
//! (alpha, c) = (-1/2, 1) with the roles of h and p swapped.
//!
//! Numerical strategy: the p < 0 branch of the Bessel/Humbert form is a sum
//! of positive terms once the Bessel difference is taken through expm1 of
//! log-Bessel differences, so everything is assembled in log space; p > 0 is
//! reduced to p < 0 through N(u) = 1 - N(-u), which costs at most the
//! relative size of the reflected remainder. Same reflection at p = 0 for
//! h < 0.

use crate::jumplaw::SumLaw;
use crate::model::{self, ModelSpec, SubordinatorFamily, TheoremId};
use crate::specfun::{self, bessel_k_ln, gauss_2f1_pfaff_pos_ln, ln_beta, ln_gamma, phi1_ln};
use crate::{PricerError, Result};

/// Parameters of the VG kernel integral for one theorem configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VgKernelParams {
    /// alpha = a1 T - 1
    pub alpha: f64,
    /// indicator clock shape a1
    pub shape_a1: f64,
    /// theorem-specific drift gap b (must satisfy b < a1)
    pub drift_gap: f64,
    /// slope / sigma_1
    pub h: f64,
    /// (mu_1 T - ln K) / sigma_1 before the jump shift
    pub p_base: f64,
}

impl VgKernelParams {
    pub fn from_spec(spec: &ModelSpec, theorem: TheoremId) -> Result<Self> {
        if theorem.family() != SubordinatorFamily::Vg {
            return Err(PricerError::Numerical(format!("{theorem} is not a VG theorem")));
        }
        let t = spec.maturity;
        let a1 = spec.subordinators.shape_indicator;
        let b = model::theorem_b(spec, theorem);
        let sigma1 = spec.assets[0].sigma;
        Ok(VgKernelParams {
            alpha: a1 * t - 1.0,
            shape_a1: a1,
            drift_gap: b,
            h: model::theorem_slope(spec, theorem) / sigma1,
            p_base: model::log_moneyness(spec) / sigma1,
        })
    }
}

/// Normalized master integral: I(alpha,c,h,p) * c^{alpha+1} / Gamma(alpha+1),
/// which lies in [0, 1] (the CDF factor is at most 1). Everything downstream
/// assembles prices from this bounded quantity in log space.
pub(crate) fn closed_form_i_norm(alpha: f64, c: f64, h: f64, p: f64) -> Result<f64> {
    if !(alpha > -1.0) {
        return Err(PricerError::Numerical(format!("integral needs alpha > -1, got {alpha}")));
    }
    if !(c > 0.0) {
        return Err(PricerError::Numerical(format!("integral needs a1 - b > 0, got {c}")));
    }
    let v = if p == 0.0 {
        if h >= 0.0 {
            i_norm_p0(alpha, c, h)?
        } else {
            1.0 - i_norm_p0(alpha, c, -h)?
        }
    } else if p < 0.0 {
        i_norm_core(alpha, c, h, p)?
    } else {
        1.0 - i_norm_core(alpha, c, -h, -p)?
    };
    // roundoff can push a hair outside [0,1]
    Ok(v.clamp(0.0, 1.0))
}

// (it11) at h >= 0: both bracket terms nonnegative
fn i_norm_p0(alpha: f64, c: f64, h: f64) -> Result<f64> {
    let term1_ln = ln_beta(0.5, alpha + 1.0)? - 0.5 * std::f64::consts::LN_2;
    let ln_pre = ln_gamma(alpha + 1.5)? - ln_gamma(alpha + 1.0)? - 0.5 * (2.0 * std::f64::consts::PI).ln();
    if h == 0.0 {
        return Ok((ln_pre + term1_ln).exp());
    }
    let z = -h * h / (2.0 * c);
    let g_ln = gauss_2f1_pfaff_pos_ln(alpha + 1.5, 0.5, 1.5, z)?;
    let term2_ln = (h / c.sqrt()).ln() + g_ln;
    let bracket_ln = log_add_exp(term1_ln, term2_ln);
    Ok((ln_pre + bracket_ln).exp())
}

// (it12) at p < 0 (s < 0): positive-term assembly
fn i_norm_core(alpha: f64, c: f64, h: f64, p: f64) -> Result<f64> {
    debug_assert!(p < 0.0);
    let root = (h * h + 2.0 * c).sqrt();
    let s = p * root; // < 0
    let q = h / root; // in (-1, 1)
    let abs_s = -s;
    let u4 = 0.5 * (1.0 + q);
    let u5 = abs_s * (1.0 + q); // = -s(1+q) >= 0

    let m_hi = bessel_k_ln(alpha + 1.5, abs_s)?;
    let m_lo = bessel_k_ln(alpha + 0.5, abs_s)?;
    // K is increasing in |order| and alpha+3/2 > |alpha+1/2|, so m_hi >= m_lo
    let dm = (m_hi - m_lo).max(0.0);

    let a0_ln = phi1_ln(alpha + 1.0, -alpha, u4, u5)?;
    let a1_ln = phi1_ln(alpha + 2.0, -alpha, u4, u5)?;

    // |s| M_hi + s M_lo = |s| M_lo (e^{dm} - 1)  (s < 0)
    let term1_ln = -(alpha + 1.0).ln() + abs_s.ln() + m_lo + dm.exp_m1().ln() + a0_ln;
    let term2_ln = ((1.0 + q) * abs_s).ln() - (alpha + 2.0).ln() + m_lo + a1_ln;
    let bracket_ln = log_add_exp(term1_ln, term2_ln);

    let ln_i_norm = (alpha + 0.5) * abs_s.ln() + s
        + (alpha + 1.0) * (1.0 + q).ln()
        - 0.5 * (2.0 * std::f64::consts::PI).ln()
        - ln_gamma(alpha + 1.0)?
        + bracket_ln;
    Ok(ln_i_norm.exp())
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Unnormalized master integral I(alpha, c, h, p).
pub fn integral_i(alpha: f64, a1_minus_b: f64, h: f64, p: f64) -> Result<f64> {
    let norm = closed_form_i_norm(alpha, a1_minus_b, h, p)?;
    let ln = ln_gamma(alpha + 1.0)? - (alpha + 1.0) * a1_minus_b.ln();
    Ok(norm * ln.exp())
}

/// The p = 0 kernel Lambda = sqrt(2 pi) (a1-b)^{a1 T} I(alpha, a1-b, h, 0).
pub fn lambda_kernel(theorem: TheoremId, spec: &ModelSpec) -> Result<f64> {
    let rep = model::validate_model(spec, theorem);
    if !rep.passed() {
        return Err(PricerError::Validation {
            theorem,
            failed: rep.first_failure().map(|c| format!("{}: {}", c.name, c.detail)).unwrap_or_default(),
        });
    }
    let k = VgKernelParams::from_spec(spec, theorem)?;
    let c = k.shape_a1 - k.drift_gap;
    let norm = closed_form_i_norm(k.alpha, c, k.h, 0.0)?;
    let ln = 0.5 * (2.0 * std::f64::consts::PI).ln() + ln_gamma(k.alpha + 1.0)?;
    Ok(norm * ln.exp())
}

/// The p != 0 kernel Xi(x) = sqrt(2 pi) (a1-b)^{a1 T} I(alpha, a1-b, h, p(x))
/// with p(x) = (mu_1 T - ln K - x) / sigma_1. Errors on the p = 0 atom (the
/// caller must use Lambda there).
pub fn xi_kernel(theorem: TheoremId, spec: &ModelSpec, x: f64) -> Result<f64> {
    let rep = model::validate_model(spec, theorem);
    if !rep.passed() {
        return Err(PricerError::Validation {
            theorem,
            failed: rep.first_failure().map(|c| format!("{}: {}", c.name, c.detail)).unwrap_or_default(),
        });
    }
    let k = VgKernelParams::from_spec(spec, theorem)?;
    let cm = model::log_moneyness(spec);
    if is_atom(x, cm, spec) {
        return Err(PricerError::Numerical(format!(
            "x = {x} hits the p = 0 atom; use lambda_kernel on this branch"
        )));
    }
    let c = k.shape_a1 - k.drift_gap;
    let p = k.p_base - x / spec.assets[0].sigma;
    let norm = closed_form_i_norm(k.alpha, c, k.h, p)?;
    let ln = 0.5 * (2.0 * std::f64::consts::PI).ln() + ln_gamma(k.alpha + 1.0)?;
    Ok(norm * ln.exp())
}

/// Atom test: |mu_1 T - ln K - x| below 1e-13 of the drift/strike scale
/// (double-precision equality on a derived real is meaningless otherwise).
pub(crate) fn is_atom(x: f64, cm: f64, spec: &ModelSpec) -> bool {
    let scale = 1.0f64.max(spec.assets[0].mu.abs() * spec.maturity).max(spec.strike.ln().abs());
    (cm - x).abs() <= 1e-13 * scale
}

/// ln of the conditional price DC(n1,n2,n3) given the jump counts, assembled
/// from the normalized kernel expectation:
///   DC = exp((mu2+mu3-r)T) (a1/(a1-b))^{a1 T} L2^{n2} L3^{n3}
///        * prod clock MGFs * E[ I_norm(p(sum xi_1)) ].
pub(crate) fn dc_conditional_ln(
    theorem: TheoremId,
    spec: &ModelSpec,
    n1: u32,
    n2: u32,
    n3: u32,
) -> Result<f64> {
    let kernel_e = kernel_expectation(spec, theorem, n1)?;
    let ln_rest = dc_multiplier_ln(spec, theorem, n2, n3)?;
    if kernel_e <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_rest + kernel_e.ln())
}

// everything in DC except the n1 kernel expectation
pub(crate) fn dc_multiplier_ln(spec: &ModelSpec, theorem: TheoremId, n2: u32, n3: u32) -> Result<f64> {
    let t = spec.maturity;
    let a = &spec.assets;
    let a1 = spec.subordinators.shape_indicator;
    let b = model::theorem_b(spec, theorem);
    let mut ln = (a[1].mu + a[2].mu - spec.rates.foreign) * t + a1 * t * (a1.ln() - (a1 - b).ln());
    ln += n2 as f64 * spec.jumps[1].law.laplace_single().ln();
    ln += n3 as f64 * spec.jumps[2].law.laplace_single().ln();
    for (shape, arg) in model::theorem_mgf_factors(spec, theorem) {
        if !(arg < shape) {
            return Err(PricerError::Numerical(format!(
                "gamma MGF argument {arg} not below shape {shape}"
            )));
        }
        ln += shape * t * (shape.ln() - (shape - arg).ln());
    }
    Ok(ln)
}

/// E[I_norm(p(sum of n1 jumps))]: the Lambda term times the atom mass plus
/// the Xi expectation off the atom.
pub fn kernel_expectation(spec: &ModelSpec, theorem: TheoremId, n1: u32) -> Result<f64> {
    let k = VgKernelParams::from_spec(spec, theorem)?;
    let c = k.shape_a1 - k.drift_gap;
    let cm = model::log_moneyness(spec);
    let sigma1 = spec.assets[0].sigma;
    let sum = SumLaw::new(spec.jumps[0].law.clone(), n1);

    let atom_p = sum.atom_probability(cm)?;
    let mut total = 0.0;
    if atom_p > 0.0 {
        total += atom_p * closed_form_i_norm(k.alpha, c, k.h, 0.0)?;
    }
    // the kernel is continuous through the atom, so quadrature nodes that
    // land near it are harmless; exact hits are excluded by the indicator
    let xi_part = sum.expect_functional(
        |x| {
            let p = (cm - x) / sigma1;
            closed_form_i_norm(k.alpha, c, k.h, p).unwrap_or(f64::NAN)
        },
        cm,
    )?;
    if !xi_part.is_finite() {
        return Err(PricerError::Numerical("kernel expectation did not evaluate".into()));
    }
    Ok(total + xi_part)
}

/// Conditional price DC(n1,n2,n3) for a VG theorem; the spec must pass
/// validation for that theorem.
pub fn dc_conditional(theorem: TheoremId, spec: &ModelSpec, n1: u32, n2: u32, n3: u32) -> Result<f64> {
    let rep = model::validate_model(spec, theorem);
    if !rep.passed() {
        return Err(PricerError::Validation {
            theorem,
            failed: rep.first_failure().map(|c| format!("{}: {}", c.name, c.detail)).unwrap_or_default(),
        });
    }
    Ok(dc_conditional_ln(theorem, spec, n1, n2, n3)?.exp())
}

/// Quadrature oracle for the master integral (test/diagnostic side of the
/// closed-form/quadrature duality): direct tanh-sinh of the defining
/// integrand, normalized like `closed_form_i_norm`.
pub fn integral_i_norm_quadrature(alpha: f64, c: f64, h: f64, p: f64) -> f64 {
    let ln_norm = ln_gamma(alpha + 1.0).unwrap() - (alpha + 1.0) * c.ln();
    let r = crate::quad::exp_sinh(
        |x| {
            let ln_w = alpha * x.ln() - c * x - ln_norm;
            if ln_w < -745.0 {
                return 0.0;
            }
            ln_w.exp() * specfun::normal_cdf(h * x.sqrt() + p / x.sqrt())
        },
        1e-11,
        1e-16,
        11,
    );
    r.value
}
