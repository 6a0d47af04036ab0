//! MacDonald function K_nu(x) for real order.
//!
//! Temme's series for x <= 2 and the Steed/Thompson-Barnett continued
//! fraction (CF2) for x > 2, both producing K_mu and K_{mu+1} with
//! |mu| <= 1/2, followed by the (stable, upward) order recurrence
//! K_{mu+i+1} = K_{mu+i-1} + 2(mu+i)/x K_{mu+i}. Everything is carried with
//! an explicit log-scale so ln K is available even where K itself would
//! over- or underflow.

use super::gamma::temme_gammas;
use super::{SfResult, SpecFunError};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
const RESCALE: f64 = 1e250;

/// ln K_nu(x) for x > 0, any finite real order (K_{-nu} = K_nu).
pub fn bessel_k_ln(order: f64, x: f64) -> SfResult<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain(format!("bessel_k requires x > 0, got {x}")));
    }
    if !order.is_finite() {
        return Err(SpecFunError::Domain("bessel_k requires finite order".into()));
    }
    let nu = order.abs();
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;

    // seed pair (K_mu, K_{mu+1}) as value * exp(ln_scale)
    let (mut k0, mut k1, mut ln_scale) = if x <= 2.0 {
        let (a, b) = temme_series(mu, x)?;
        (a, b, 0.0)
    } else {
        let (a, b) = cf2_scaled(mu, x)?; // scaled by e^{x}
        (a, b, -x)
    };

    let two_over_x = 2.0 / x;
    for i in 1..=nl {
        let knext = (mu + i as f64) * two_over_x * k1 + k0;
        k0 = k1;
        k1 = knext;
        if k1 > RESCALE {
            k0 /= RESCALE;
            k1 /= RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    let k = k0; // after nl recurrence steps k0 = K_{mu+nl} = K_nu
    debug_assert!(k > 0.0);
    Ok(k.ln() + ln_scale)
}

/// K_nu(x); errors on x <= 0 and signals overflow instead of returning Inf.
pub fn bessel_k(order: f64, x: f64) -> SfResult<f64> {
    let ln = bessel_k_ln(order, x)?;
    if ln > 709.0 {
        return Err(SpecFunError::Overflow(format!(
            "K_{order}({x}) ~ exp({ln:.1}) exceeds f64 range"
        )));
    }
    Ok(ln.exp())
}

// Temme's series for K_mu, K_{mu+1}, |mu| <= 1/2, 0 < x <= 2.
fn temme_series(mu: f64, x: f64) -> SfResult<(f64, f64)> {
    let x2 = 0.5 * x;
    let mu2 = mu * mu;
    let pimu = std::f64::consts::PI * mu;
    let fact = if pimu.abs() < 1e-150 { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < 1e-150 { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let e = e.exp();
    let mut p = 0.5 * e / gampl;
    let mut q = 0.5 / (e * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    for i in 1..=MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            return Ok((sum, sum1 * 2.0 / x));
        }
    }
    Err(SpecFunError::NoConvergence { terms: MAX_ITER, tail_bound: f64::NAN })
}

// CF2 evaluation of (e^x K_mu(x), e^x K_{mu+1}(x)) for x > 2, |mu| <= 1/2.
fn cf2_scaled(mu: f64, x: f64) -> SfResult<(f64, f64)> {
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            let h = a1 * h;
            let kmu = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
            let k1 = kmu * (mu + x + 0.5 - h) / x;
            return Ok((kmu, k1));
        }
    }
    Err(SpecFunError::NoConvergence { terms: MAX_ITER, tail_bound: f64::NAN })
}
