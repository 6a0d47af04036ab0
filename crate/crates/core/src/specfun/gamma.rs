//! Gamma and beta functions.

use super::{SfResult, SpecFunError};

// Lanczos coefficients, g = 607/128, 15 terms (Pugh's optimal set).
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_87e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_65e-4,
    0.158_088_703_224_912_49e-3,
    -0.210_264_441_724_104_88e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_89e-3,
    0.844_182_239_838_527_43e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_23e-5,
];

/// ln Gamma(u) for u > 0.
pub fn ln_gamma(u: f64) -> SfResult<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(SpecFunError::Domain(format!("ln_gamma requires u > 0, got {u}")));
    }
    Ok(ln_gamma_unchecked(u))
}

pub(crate) fn ln_gamma_unchecked(u: f64) -> f64 {
    if u < 0.5 {
        // reflection keeps small-argument accuracy
        let s = (std::f64::consts::PI * u).sin();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma_unchecked(1.0 - u);
    }
    let x = u - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let mut sum = LANCZOS[0];
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + sum.ln() + (x + 0.5) * t.ln() - t
}

/// ln B(u1, u2) for u1, u2 > 0.
pub fn ln_beta(u1: f64, u2: f64) -> SfResult<f64> {
    if !(u1 > 0.0 && u2 > 0.0) {
        return Err(SpecFunError::Domain(format!("beta requires positive arguments, got ({u1}, {u2})")));
    }
    Ok(ln_gamma_unchecked(u1) + ln_gamma_unchecked(u2) - ln_gamma_unchecked(u1 + u2))
}

/// B(u1, u2) = Gamma(u1) Gamma(u2) / Gamma(u1 + u2).
pub fn beta(u1: f64, u2: f64) -> SfResult<f64> {
    Ok(ln_beta(u1, u2)?.exp())
}

// 1/Gamma(1+x) = sum d_k x^k for |x| <= 0.5 (Abramowitz & Stegun 6.1.34,
// shifted by one index since 1/Gamma(x) = sum a_k x^k and d_k = a_{k+1}).
const RECIP_GAMMA1P: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// The Temme coefficients for Bessel K:
/// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)   (finite at mu = 0),
/// gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2,
/// gampl = 1/Gamma(1+mu), gammi = 1/Gamma(1-mu). Requires |mu| <= 0.5.
pub(crate) fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    debug_assert!(mu.abs() <= 0.5 + 1e-12);
    let m2 = mu * mu;
    // odd / even coefficient sums
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    let mut p = 1.0; // mu^{2j}
    for j in 0..13 {
        gam2 += RECIP_GAMMA1P[2 * j] * p;
        gam1 -= RECIP_GAMMA1P[2 * j + 1] * p;
        p *= m2;
    }
    let gampl = gam2 - mu * gam1;
    let gammi = gam2 + mu * gam1;
    (gam1, gam2, gampl, gammi)
}
