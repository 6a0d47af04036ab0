//! Counter-based random streams, split per (sample index, component), so a
//! parallel run draws exactly the same variates regardless of thread count.
//!
//! Each stream key (seed, sample, component) is mixed into an independent
//! splitmix64 sequence; splitmix64 output is also used to seed the per-stream
//! state, which avoids correlations between neighbouring counters.

#[inline]
fn splitmix64(z: &mut u64) -> u64 {
    *z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut x = *z;
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// One independent stream of uniforms/normals.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
    spare_normal: Option<f64>,
}

impl Stream {
    /// Stream keyed by (seed, sample index, component id).
    pub fn new(seed: u64, sample: u64, component: u64) -> Self {
        // fold the key through two mixing rounds
        let mut z = seed ^ 0xa076_1d64_78bd_642f;
        let a = splitmix64(&mut z);
        let mut z2 = a ^ sample.wrapping_mul(0xe703_7ed1_a0b4_28db);
        let b = splitmix64(&mut z2);
        let mut z3 = b ^ component.wrapping_mul(0x8ebc_6af0_9c88_c6e3);
        let state = splitmix64(&mut z3);
        Stream { state, spare_normal: None }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform in (0, 1): 53-bit mantissa, never exactly 0.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        let u = (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
        if u == 0.0 {
            f64::MIN_POSITIVE
        } else {
            u
        }
    }

    /// Standard normal via Box-Muller (pairs cached per stream).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let mag = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare_normal = Some(mag * s);
        mag * c
    }

    /// Exponential with mean 1.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }
}
