//! Degenerate Appell function (Humbert series)
//!
//! A(u1,u2,u3; u4,u5) = sum_{m,n} (u1)_{m+n} (u2)_m / (m! n! (u3)_{m+n}) u4^m u5^n,
//! |u4| < 1, entire in u5.
//!
//! The public evaluator follows the series definition: diagonal (m+n = k)
//! ordering with double-double accumulation, and for strongly negative u5 the
//! inner n-series is Kummer-transformed (1F1(a;c;y) = e^y 1F1(c-a;c;-y)) so
//! that its terms are sign-definite - summing the raw alternating series
//! loses e^{|u5|} in any fixed precision.
//!
//! The pricing kernels always need the special shape u3 = u1 + 1, for which
//! `phi1_ln` evaluates ln A through the inner confluent functions
//! f(s) = 1F1(s; s+1; y) on the unit grid s = a+m (stable downward
//! recurrence f(s) = e^y - y f(s+1)/(s+1)), with the positive-integrand
//! integral representation a int_0^1 t^{a-1} (1-xt)^{-u2} e^{yt} dt as a
//! fallback when the alternating m-series cancels beyond budget.

use super::gamma::ln_gamma_unchecked;
use super::{SeriesResult, SfResult, SpecFunError};
use crate::dd::Dd;
use crate::quad;

const MAX_INDEX: usize = 20_000;
const TARGET_REL: f64 = 1e-13;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 1e-12 && (x - x.round()).abs() < 1e-12
}

/// Public series evaluator per the definition above.
pub fn appell_degenerate(u1: f64, u2: f64, u3: f64, u4: f64, u5: f64) -> SfResult<SeriesResult> {
    if !(u4.abs() < 1.0) {
        return Err(SpecFunError::Domain(format!("|u4| must be < 1, got {u4}")));
    }
    if is_nonpositive_integer(u3) {
        return Err(SpecFunError::Domain(format!("u3 = {u3} is a nonpositive integer")));
    }
    if u4 == 0.0 && u5 == 0.0 {
        return Ok(SeriesResult { value: 1.0, terms_used: 1, tail_bound: 0.0 });
    }
    if u5 < -30.0 {
        appell_kummer(u1, u2, u3, u4, u5)
    } else {
        appell_diagonal(u1, u2, u3, u4, u5)
    }
}

// Diagonal summation: D_k = (u1)_k/(u3)_k * sum_{m<=k} (u2)_m u4^m/m! * u5^{k-m}/(k-m)!
// All coefficients, products and partial sums are carried in double-double:
// cancellation across diagonals runs up to e^{2|u5|}, and f64-rounded terms
// alone would cap the result near 1e-6 relative at u5 ~ -25.
fn appell_diagonal(u1: f64, u2: f64, u3: f64, u4: f64, u5: f64) -> SfResult<SeriesResult> {
    let mut cm: Vec<Dd> = vec![Dd::ONE]; // (u2)_m u4^m / m!
    let mut wn: Vec<Dd> = vec![Dd::ONE]; // u5^n / n!
    let mut ratio_k = Dd::ONE; // (u1)_k / (u3)_k
    let mut sum = Dd::ZERO;
    let mut abs_sum = Dd::ZERO;
    let mut terms = 0usize;
    let mut small_streak = 0usize;
    let mut last_diag = 0.0f64;

    for k in 0..MAX_INDEX {
        let fk = k as f64;
        if k > 0 {
            // build each factor exactly in double-double before multiplying:
            // one f64 rounding per recurrence step, amplified by the e^{2|u5|}
            // diagonal cancellation, already costs ~1e-7 relative at u5 = -20
            ratio_k = ratio_k.mul(Dd::from_sum(u1, fk - 1.0)).div(Dd::from_sum(u3, fk - 1.0));
            let m = cm.len() as f64;
            cm.push(cm[cm.len() - 1].mul(Dd::from_sum(u2, m - 1.0)).mul_f64(u4).div_f64(m));
            let n = wn.len() as f64;
            wn.push(wn[wn.len() - 1].mul_f64(u5).div_f64(n));
        }
        let mut diag = Dd::ZERO;
        let mut diag_abs = Dd::ZERO;
        for m in 0..=k {
            let t = cm[m].mul(wn[k - m]);
            diag = diag.add(t);
            diag_abs = diag_abs.add(t.abs());
            terms += 1;
        }
        let d = ratio_k.mul(diag).value();
        sum = sum.add(ratio_k.mul(diag));
        abs_sum = abs_sum.add(ratio_k.abs().mul(diag_abs));
        if !sum.value().is_finite() {
            return Err(SpecFunError::Overflow("Appell series overflows f64".into()));
        }
        let v = sum.value().abs().max(f64::MIN_POSITIVE);
        if k > 2 && d.abs() <= TARGET_REL * v {
            small_streak += 1;
            if small_streak >= 3 {
                let ratio = if last_diag != 0.0 { (d / last_diag).abs().min(0.99) } else { 0.5 };
                let tail = d.abs() * ratio / (1.0 - ratio);
                let value = sum.value();
                let mut tail_bound = tail + abs_sum.value() * 1e-30;
                if u4.abs() > 1.0 - 1e-6 {
                    // degraded-accuracy zone near the |u4| -> 1 boundary
                    tail_bound = tail_bound.max(1e-9 * value.abs());
                }
                return Ok(SeriesResult { value, terms_used: terms, tail_bound });
            }
        } else {
            small_streak = 0;
        }
        last_diag = if d != 0.0 { d } else { last_diag };
    }
    Err(SpecFunError::NoConvergence { terms, tail_bound: last_diag.abs() })
}

// u5 << 0: A = e^{u5} sum_m (u1)_m (u2)_m / ((u3)_m m!) u4^m 1F1(u3-u1; u3+m; -u5)
fn appell_kummer(u1: f64, u2: f64, u3: f64, u4: f64, u5: f64) -> SfResult<SeriesResult> {
    let z = -u5;
    let beta = u3 - u1;
    let mut coef = Dd::ONE; // (u1)_m (u2)_m / ((u3)_m m!) u4^m
    let mut sum = Dd::ZERO;
    let mut abs_sum = Dd::ZERO;
    let mut terms = 0usize;
    let mut small_streak = 0usize;
    let mut last = f64::INFINITY;
    for m in 0..MAX_INDEX {
        let fm = m as f64;
        if m > 0 {
            coef = coef.mul_f64((u1 + fm - 1.0) * (u2 + fm - 1.0) * u4 / ((u3 + fm - 1.0) * fm));
        }
        let (f_ln, f_sign, used) = f11_ln(beta, u3 + fm, z)?;
        terms += used;
        let t = coef.value() * f_sign * (f_ln + u5).exp();
        sum = sum.add_f64(t);
        abs_sum = abs_sum.add_f64(t.abs());
        if m > 2 && t.abs() <= TARGET_REL * sum.value().abs().max(f64::MIN_POSITIVE) {
            small_streak += 1;
            if small_streak >= 3 {
                let ratio = (t / last).abs().min(0.99);
                let mut tail_bound = t.abs() * ratio / (1.0 - ratio) + abs_sum.value() * 1e-30;
                if u4.abs() > 1.0 - 1e-6 {
                    tail_bound = tail_bound.max(1e-9 * sum.value().abs());
                }
                return Ok(SeriesResult { value: sum.value(), terms_used: terms, tail_bound });
            }
        } else {
            small_streak = 0;
        }
        last = if t != 0.0 { t } else { last };
    }
    Err(SpecFunError::NoConvergence { terms, tail_bound: last.abs() })
}

// 1F1(beta; c; z) for z >= 0 as (ln |value|, sign, terms); rescales so large z
// cannot overflow mid-sum.
fn f11_ln(beta: f64, c: f64, z: f64) -> SfResult<(f64, f64, usize)> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut ln_scale = 0.0f64;
    for k in 0..MAX_INDEX {
        let fk = k as f64;
        let num = beta + fk;
        if num == 0.0 {
            // terminating polynomial
            return Ok((sum.abs().ln() + ln_scale, sum.signum(), k + 1));
        }
        term *= num * z / ((c + fk) * (fk + 1.0));
        sum += term;
        if sum.abs() > 1e280 || term.abs() > 1e280 {
            sum /= 1e280;
            term /= 1e280;
            ln_scale += 1e280f64.ln();
        }
        if term.abs() <= 1e-17 * sum.abs() && fk > z - c {
            return Ok((sum.abs().ln() + ln_scale, sum.signum(), k + 2));
        }
    }
    if term.abs() <= 1e-12 * sum.abs() {
        return Ok((sum.abs().ln() + ln_scale, sum.signum(), MAX_INDEX));
    }
    Err(SpecFunError::NoConvergence { terms: MAX_INDEX, tail_bound: term.abs() })
}

/// ln A(a, b, a+1; x, y) for a > 0, 0 <= x < 1, any y. The value is positive
/// (it equals a * int_0^1 t^{a-1} (1-xt)^{-b} e^{yt} dt).
///
/// Series route with the inner confluent grid f(s)=1F1(s;s+1;y); when the
/// alternating m-series (b < 0 with large |b|) cancels past the double-double
/// budget, falls back to the log-scaled integral representation.
pub fn phi1_ln(a: f64, b: f64, x: f64, y: f64) -> SfResult<f64> {
    debug_assert!(a > 0.0, "phi1_ln requires a > 0");
    debug_assert!((0.0..1.0).contains(&x), "phi1_ln requires 0 <= x < 1");
    if x == 0.0 {
        // single confluent function
        let (ln_f, sign, _) = inner_f11_single(a, y)?;
        debug_assert!(sign > 0.0);
        return Ok(ln_f);
    }
    match phi1_series_ln(a, b, x, y) {
        Ok(v) => Ok(v),
        Err(_) => phi1_quad_ln(a, b, x, y),
    }
}

// ln 1F1(s; s+1; y) for s > 0 (positive value), via incomplete-gamma-style
// direct sums; only used for the x == 0 shortcut and the recurrence seed.
fn inner_f11_single(s: f64, y: f64) -> SfResult<(f64, f64, usize)> {
    if y == 0.0 {
        return Ok((0.0, 1.0, 1));
    }
    if y > 0.0 {
        // e^{-y} 1F1 = H in (0,1]; evaluate via Poisson-weighted mean of s/(s+n)
        let h = h_seed(s, y);
        Ok((y + h.ln(), 1.0, 1))
    } else {
        let z = -y;
        // 1F1(s;s+1;-z) = s z^{-s} gamma_lower(s, z)
        let lnp = ln_reg_lower_gamma(s, z)?;
        Ok((s.ln() - s * z.ln() + ln_gamma_unchecked(s) + lnp, 1.0, 1))
    }
}

// H(s) = e^{-y} 1F1(s; s+1; y) = E[ s/(s+N) ], N ~ Poisson(y); y > 0.
fn h_seed(s: f64, y: f64) -> f64 {
    PoissonWindow::new(y).h(s)
}

// Poisson(y) weights on the +-12 sigma window; they do not depend on s, so
// one window serves a whole inner-function grid.
struct PoissonWindow {
    lo: i64,
    weights: Vec<f64>,
}

impl PoissonWindow {
    fn new(y: f64) -> Self {
        let sd = y.sqrt();
        let lo = ((y - 12.0 * sd - 10.0).floor() as i64).max(0);
        let hi = (y + 12.0 * sd + 10.0).ceil() as i64;
        let ln_y = y.ln();
        let weights = (lo..=hi)
            .map(|n| {
                let fnn = n as f64;
                (fnn * ln_y - y - ln_gamma_unchecked(fnn + 1.0)).exp()
            })
            .collect();
        PoissonWindow { lo, weights }
    }

    fn h(&self, s: f64) -> f64 {
        let mut acc = 0.0f64;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * (s / (s + (self.lo + i as i64) as f64));
        }
        acc.clamp(f64::MIN_POSITIVE, 1.0)
    }
}

// Series route for ln Phi1(a,b;a+1;x,y).
fn phi1_series_ln(a: f64, b: f64, x: f64, y: f64) -> SfResult<f64> {
    // m-terms needed: x^m tail below 1e-17 plus the (b)_m / m! peak location
    let est = (40.0 / (-(x.ln())).max(1e-3)).ceil() as usize;
    let peak = (2.0 * b.abs() * x / (1.0 - x)).ceil() as usize;
    let m_cap = (est + peak + 64).min(MAX_INDEX);
    if m_cap > 400 {
        // the integral representation is cheaper than a long series
        return Err(SpecFunError::NoConvergence { terms: m_cap, tail_bound: f64::NAN });
    }

    // inner confluent values f(a+m) evaluated lazily (the adaptive m-loop
    // usually stops far before m_cap)
    let window = if y > 0.0 { Some(PoissonWindow::new(y)) } else { None };
    let mut ln_f_cache: Vec<f64> = Vec::with_capacity(64);
    let mut ln_f = |m: usize, cache: &mut Vec<f64>| -> SfResult<f64> {
        while cache.len() <= m {
            let s = a + cache.len() as f64;
            let v = match &window {
                Some(w) => y + w.h(s).ln(),
                None => inner_single_ln(s, y)?,
            };
            cache.push(v);
        }
        Ok(cache[m])
    };

    let mut coef = Dd::ONE; // (b)_m x^m / m! * a/(a+m) is split: poch part here
    let mut sum = Dd::ZERO;
    let mut abs_sum = Dd::ZERO;
    let ref_ln = ln_f(0, &mut ln_f_cache)?;
    let mut small_streak = 0usize;
    let mut converged = false;
    for m in 0..m_cap {
        let fm = m as f64;
        if m > 0 {
            coef = coef.mul_f64((b + fm - 1.0) * x / fm);
        }
        let t = coef.value() * (a / (a + fm)) * (ln_f(m, &mut ln_f_cache)? - ref_ln).exp();
        if !t.is_finite() {
            return Err(SpecFunError::Overflow("phi1 series term overflow".into()));
        }
        sum = sum.add_f64(t);
        abs_sum = abs_sum.add_f64(t.abs());
        if m > 4 && t.abs() <= 1e-17 * sum.value().abs().max(f64::MIN_POSITIVE) {
            small_streak += 1;
            if small_streak >= 3 {
                converged = true;
                break;
            }
        } else {
            small_streak = 0;
        }
    }
    let v = sum.value();
    let cancel = abs_sum.value() / v.abs().max(f64::MIN_POSITIVE);
    if !(v > 0.0) || cancel > 1e12 || !converged {
        // signal the caller to use the integral representation
        return Err(SpecFunError::NoConvergence { terms: m_cap, tail_bound: cancel });
    }
    Ok(ref_ln + v.ln())
}

// ln f(s), f(s) = 1F1(s; s+1; y), y <= 0, single point.
fn inner_single_ln(s: f64, y: f64) -> SfResult<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let z = -y;
    let lnp = ln_reg_lower_gamma(s, z)?;
    Ok(s.ln() - s * z.ln() + ln_gamma_unchecked(s) + lnp)
}


// Integral representation, log-scaled: ln [ a int_0^1 t^{a-1}(1-xt)^{-b} e^{yt} dt ].
fn phi1_quad_ln(a: f64, b: f64, x: f64, y: f64) -> SfResult<f64> {
    let g = |t: f64, dist_t0: f64, dist_t1: f64| -> f64 {
        // ln integrand with endpoint-accurate distances
        let ln_t = if t < 0.5 { dist_t0.ln() } else { t.ln() };
        let one_minus_xt = if t > 0.5 { 1.0 - x + x * dist_t1 } else { 1.0 - x * t };
        (a - 1.0) * ln_t - b * one_minus_xt.ln() + y * t
    };
    // coarse scan for the peak of the log-integrand
    let mut gmax = f64::NEG_INFINITY;
    for i in 0..=256 {
        let t = (i as f64 + 0.5) / 257.0;
        gmax = gmax.max(g(t, t, 1.0 - t));
    }
    let r = quad::tanh_sinh(
        |t, d| {
            let (d0, d1) = if t < 0.5 { (d, 1.0 - t) } else { (t, d) };
            (g(t, d0, d1) - gmax).exp()
        },
        0.0,
        1.0,
        1e-13,
        1e-280,
        12,
    );
    if !r.converged || !(r.value > 0.0) {
        return Err(SpecFunError::NoConvergence { terms: r.evals, tail_bound: r.abs_err });
    }
    Ok(a.ln() + gmax + r.value.ln())
}

// ln P(s, z), P the regularized lower incomplete gamma, s > 0, z > 0.
fn ln_reg_lower_gamma(s: f64, z: f64) -> SfResult<f64> {
    if z <= 0.0 {
        return Err(SpecFunError::Domain("incomplete gamma needs z > 0".into()));
    }
    let ln_front = s * z.ln() - z - ln_gamma_unchecked(s);
    if z < s + 1.0 {
        // series for P
        let mut ap = s;
        let mut del = 1.0 / s;
        let mut sum = del;
        for _ in 0..MAX_INDEX {
            ap += 1.0;
            del *= z / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-16 {
                return Ok(ln_front + sum.ln());
            }
        }
        Err(SpecFunError::NoConvergence { terms: MAX_INDEX, tail_bound: del })
    } else {
        // continued fraction for Q, then P = 1 - Q
        let fpmin = 1e-300;
        let mut b = z + 1.0 - s;
        let mut c = 1.0 / fpmin;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_INDEX {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < fpmin {
                d = fpmin;
            }
            c = b + an / c;
            if c.abs() < fpmin {
                c = fpmin;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                let q = (ln_front).exp() * h;
                return Ok((-q).ln_1p());
            }
        }
        Err(SpecFunError::NoConvergence { terms: MAX_INDEX, tail_bound: h })
    }
}
