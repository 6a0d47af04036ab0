//! Small numeric helpers shared across the crate.

/// Signed value carried as `sign * exp(ln_abs)`.
///
/// Keeps products and sums of exponentially large/small factors exact in the
/// exponent; only the final assembly is exponentiated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogVal {
    pub ln_abs: f64,
    pub sign: f64, // -1.0, 0.0, +1.0
}

impl LogVal {
    pub const ZERO: LogVal = LogVal { ln_abs: f64::NEG_INFINITY, sign: 0.0 };

    pub fn new(ln_abs: f64, sign: f64) -> Self {
        if sign == 0.0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogVal { ln_abs, sign: sign.signum() }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogVal { ln_abs: x.abs().ln(), sign: x.signum() }
        }
    }

    pub fn from_ln(ln_abs: f64) -> Self {
        LogVal { ln_abs, sign: 1.0 }
    }

    pub fn value(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }

    pub fn mul(self, other: LogVal) -> LogVal {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogVal { ln_abs: self.ln_abs + other.ln_abs, sign: self.sign * other.sign }
    }

    pub fn add(self, other: LogVal) -> LogVal {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.ln_abs >= other.ln_abs { (self, other) } else { (other, self) };
        let d = (small.ln_abs - big.ln_abs).exp(); // in (0, 1]
        let m = if big.sign == small.sign { 1.0 + d } else { 1.0 - d };
        if m == 0.0 {
            return Self::ZERO;
        }
        LogVal::new(big.ln_abs + m.abs().ln(), big.sign * m.signum())
    }
}

/// Pairwise (cascade) summation: deterministic and accurate independent of
/// how the inputs were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Worker-thread cap: LEVY_PRICER_THREADS, else available parallelism.
pub fn thread_count() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("LEVY_PRICER_THREADS") {
        Ok(s) => s.parse::<usize>().ok().filter(|&n| n > 0).map(|n| n.min(avail.max(1))).unwrap_or(avail),
        Err(_) => avail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logval_roundtrip_and_arith() {
        let a = LogVal::from_f64(3.5);
        let b = LogVal::from_f64(-1.25);
        assert!((a.mul(b).value() + 4.375).abs() < 1e-15);
        assert!((a.add(b).value() - 2.25).abs() < 1e-15);
        assert!(LogVal::from_f64(0.0).is_zero());
        // huge exponents survive
        let big = LogVal::new(800.0, 1.0);
        let small = LogVal::new(-900.0, 1.0);
        let prod = big.mul(small);
        assert!((prod.ln_abs - (-100.0)).abs() < 1e-12);
    }

    #[test]
    fn logval_add_cancels() {
        let a = LogVal::from_f64(1.0);
        let b = LogVal::from_f64(-1.0);
        assert!(a.add(b).is_zero());
    }

    #[test]
    fn pairwise_matches_naive_on_small() {
        let xs: Vec<f64> = (0..17).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }
}
