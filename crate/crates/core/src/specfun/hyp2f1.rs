//! Gauss hypergeometric series G(u1, u2, u3; u4) for u4 < 1.
//!
//! Plain series on [0, 1); for u4 < 0 a Pfaff transformation maps the
//! argument into (0, 1) first. The theorems only ever call this with
//! u4 <= 0 (arguments like -slope^2 / (2 (a1-b) sigma1^2)).

use super::{SeriesResult, SfResult, SpecFunError};
use crate::dd::Dd;

const MAX_TERMS: usize = 20_000;
const TARGET_REL: f64 = 1e-13;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 1e-12 && (x - x.round()).abs() < 1e-12
}

/// Direct series at 0 <= z < 1. Returns (sum, terms, tail, sum of |terms|).
fn series_raw(a: f64, b: f64, c: f64, z: f64) -> SfResult<(f64, usize, f64, f64)> {
    let mut sum = Dd::ONE;
    let mut abs_sum = Dd::ONE;
    let mut term = Dd::ONE;
    let mut small_streak = 0usize;
    for n in 0..MAX_TERMS {
        let fnn = n as f64;
        let num = (a + fnn) * (b + fnn);
        if num == 0.0 {
            // terminating polynomial case
            return Ok((sum.value(), n + 1, 0.0, abs_sum.value()));
        }
        term = term.mul_f64(num * z / ((c + fnn) * (fnn + 1.0)));
        sum = sum.add(term);
        abs_sum = abs_sum.add(term.abs());
        let t = term.value().abs();
        if t <= TARGET_REL * sum.value().abs().max(f64::MIN_POSITIVE) {
            small_streak += 1;
            if small_streak >= 2 {
                // geometric tail bound from the limiting ratio z
                let tail = t * z.abs() / (1.0 - z.abs()).max(1e-6);
                return Ok((sum.value(), n + 2, tail, abs_sum.value()));
            }
        } else {
            small_streak = 0;
        }
    }
    Err(SpecFunError::NoConvergence { terms: MAX_TERMS, tail_bound: term.value().abs() / (1.0 - z.abs()).max(1e-6) })
}

/// G(u1, u2, u3; u4), u4 < 1, u3 not a nonpositive integer.
pub fn gauss_2f1(u1: f64, u2: f64, u3: f64, u4: f64) -> SfResult<SeriesResult> {
    if is_nonpositive_integer(u3) {
        return Err(SpecFunError::Domain(format!("third parameter {u3} is a nonpositive integer")));
    }
    if !(u4 < 1.0) {
        return Err(SpecFunError::Domain(format!("argument must satisfy u4 < 1, got {u4}")));
    }
    if u4 == 0.0 {
        return Ok(SeriesResult { value: 1.0, terms_used: 1, tail_bound: 0.0 });
    }
    if u4 > 0.0 {
        let (value, terms_used, tail, abs_sum) = series_raw(u1, u2, u3, u4)?;
        let tail_bound = tail + abs_sum * 1e-16;
        return Ok(SeriesResult { value, terms_used, tail_bound });
    }

    // u4 < 0: Pfaff. Two forms are available; prefer the one whose new
    // numerator parameters are nonnegative (sign-definite series).
    let w = u4 / (u4 - 1.0);
    let form_a_ok = u1 >= 0.0 && (u3 - u2) >= 0.0;
    let form_b_ok = u2 >= 0.0 && (u3 - u1) >= 0.0;
    let use_a = if form_a_ok == form_b_ok {
        // fall back to the smaller transformed-parameter magnitude
        (u3 - u2).abs().max(u1.abs()) <= (u3 - u1).abs().max(u2.abs())
    } else {
        form_a_ok
    };
    let (pre_exp, a, b) = if use_a { (-u1, u1, u3 - u2) } else { (-u2, u3 - u1, u2) };
    let pre = (1.0 - u4).powf(pre_exp);
    if pre == 0.0 || !pre.is_finite() {
        return Err(SpecFunError::Overflow(format!(
            "Pfaff prefactor (1-u4)^{pre_exp} not representable at u4={u4}"
        )));
    }
    let (s, terms_used, tail, abs_sum) = series_raw(a, b, u3, w)?;
    Ok(SeriesResult {
        value: pre * s,
        terms_used,
        tail_bound: pre * (tail + abs_sum * 1e-16),
    })
}

/// ln of G(a, 1/2, 3/2; z) style calls on z <= 0 where the Pfaff-transformed
/// series is all-positive: returns ln G with running rescaling, so large `a`
/// (long maturities times large clock shapes) cannot overflow mid-series.
///
/// Requires a > 0 and z <= 0; uses G = (1-z)^{-a} F(a, u3-u2, u3; w).
pub fn gauss_2f1_pfaff_pos_ln(a: f64, b2: f64, c: f64, z: f64) -> SfResult<f64> {
    debug_assert!(z <= 0.0 && a > 0.0 && c - b2 > 0.0);
    if z == 0.0 {
        return Ok(0.0);
    }
    // all-positive series: the cap is generous since deep-negative z maps
    // to w close to 1 (w = 0.999 still needs ~3e4 cheap terms)
    const POS_MAX_TERMS: usize = 2_000_000;
    let w = z / (z - 1.0);
    let bb = c - b2;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut ln_scale = 0.0f64;
    for n in 0..POS_MAX_TERMS {
        let fnn = n as f64;
        term *= (a + fnn) * (bb + fnn) * w / ((c + fnn) * (fnn + 1.0));
        sum += term;
        if term > 1e280 {
            term /= 1e280;
            sum /= 1e280;
            ln_scale += 1e280f64.ln();
        }
        if term.abs() <= 1e-16 * sum {
            return Ok(sum.ln() + ln_scale - a * (1.0 - z).ln());
        }
    }
    Err(SpecFunError::NoConvergence { terms: POS_MAX_TERMS, tail_bound: term })
}
