//! Truncated-triple-Poisson price bracketing: the lower bound is the
//! weighted lattice sum of DC(n1,n2,n3); the upper bound adds a remainder
//! term. Two remainder readings are shipped:
//!
//! - `PaperLiteral`: DC(N1,N2,N3) * prod_j (1 - CDF_j(N_j)) - the displayed
//!   inequality, whose remainder only covers the all-exceed orthant;
//! - `Conservative` (default): DC(0,0,0) * (1 - prod_j CDF_j(N_j)), which
//!   dominates the full complement of the lattice box because DC is
//!   componentwise nonincreasing, so DC(n) <= DC(0,0,0).
//!
//! DC factorizes over (n2, n3) through the jump Laplace transforms, so a
//! bracket needs only the N1+1 kernel expectations in n1; those are cached
//! and evaluated on worker threads.

use serde::{Deserialize, Serialize};

use crate::model::{self, ModelSpec, SubordinatorFamily, TheoremId};
use crate::specfun::ln_gamma;
use crate::util::{thread_count, Kahan};
use crate::{nig_pricing, vg_pricing, PricerError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    PaperLiteral,
    Conservative,
}

impl std::str::FromStr for BoundMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "paper-literal" | "paperliteral" | "paper" => Ok(BoundMode::PaperLiteral),
            "conservative" => Ok(BoundMode::Conservative),
            other => Err(format!("unknown bound mode '{other}'")),
        }
    }
}

/// Certified price bracket with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceBounds {
    pub lower: f64,
    pub upper: f64,
    pub orders: (u32, u32, u32),
    /// Poisson tail probabilities 1 - CDF_j(N_j) per asset
    pub tail_mass: [f64; 3],
    pub mode: BoundMode,
}

/// ln pmf of Poisson(rate) at n; rate = 0 degenerates to the point mass at 0.
fn ln_poisson_pmf(n: u32, rate: f64) -> f64 {
    if rate == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    n as f64 * rate.ln() - rate - ln_gamma(n as f64 + 1.0).expect("n+1 > 0")
}

fn poisson_cdf(n: u32, rate: f64) -> f64 {
    let mut acc = Kahan::default();
    for k in 0..=n {
        acc.add(ln_poisson_pmf(k, rate).exp());
    }
    acc.total().min(1.0)
}

/// Cached per-theorem evaluator: DC(n1,n2,n3) =
/// exp(multiplier_ln(n2,n3)) * kernel_e(n1).
pub(crate) struct DcLattice<'a> {
    spec: &'a ModelSpec,
    theorem: TheoremId,
    kernel_e: Vec<f64>,
    ln_l2: f64,
    ln_l3: f64,
    ln_base: f64,
}

impl<'a> DcLattice<'a> {
    pub(crate) fn new(spec: &'a ModelSpec, theorem: TheoremId) -> Result<Self> {
        let rep = model::validate_model(spec, theorem);
        if !rep.passed() {
            return Err(PricerError::Validation {
                theorem,
                failed: rep.first_failure().map(|c| format!("{}: {}", c.name, c.detail)).unwrap_or_default(),
            });
        }
        let ln_base = match theorem.family() {
            SubordinatorFamily::Vg => vg_pricing::dc_multiplier_ln(spec, theorem, 0, 0)?,
            SubordinatorFamily::Nig => nig_pricing::dc_multiplier_ln_nig(spec, theorem, 0, 0)?,
        };
        Ok(DcLattice {
            spec,
            theorem,
            kernel_e: Vec::new(),
            ln_l2: spec.jumps[1].law.laplace_single().ln(),
            ln_l3: spec.jumps[2].law.laplace_single().ln(),
            ln_base,
        })
    }

    /// Extend the kernel-expectation cache to cover n1 <= n1_max, fanning the
    /// fresh evaluations out to worker threads.
    pub(crate) fn ensure(&mut self, n1_max: u32) -> Result<()> {
        let have = self.kernel_e.len();
        let need = n1_max as usize + 1;
        if have >= need {
            return Ok(());
        }
        let fresh: Vec<u32> = (have as u32..need as u32).collect();
        let workers = thread_count().min(fresh.len()).max(1);
        let spec = self.spec;
        let theorem = self.theorem;
        let eval = |n1: u32| -> Result<f64> {
            match theorem.family() {
                SubordinatorFamily::Vg => vg_pricing::kernel_expectation(spec, theorem, n1),
                SubordinatorFamily::Nig => nig_pricing::kernel_expectation_nig(spec, theorem, n1),
            }
        };
        let results: Vec<Result<f64>> = if workers <= 1 || fresh.len() <= 1 {
            fresh.iter().map(|&n| eval(n)).collect()
        } else {
            let mut out: Vec<Option<Result<f64>>> = (0..fresh.len()).map(|_| None).collect();
            let chunk = fresh.len().div_ceil(workers);
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for (ci, slots) in fresh.chunks(chunk).enumerate() {
                    let slots = slots.to_vec();
                    handles.push((ci, scope.spawn(move || slots.iter().map(|&n| eval(n)).collect::<Vec<_>>())));
                }
                for (ci, h) in handles {
                    for (k, r) in h.join().expect("kernel worker panicked").into_iter().enumerate() {
                        out[ci * chunk + k] = Some(r);
                    }
                }
            });
            out.into_iter().map(|o| o.expect("missing kernel result")).collect()
        };
        for r in results {
            self.kernel_e.push(r?);
        }
        Ok(())
    }

    pub(crate) fn dc(&self, n1: u32, n2: u32, n3: u32) -> f64 {
        let k = self.kernel_e[n1 as usize];
        if k <= 0.0 {
            return 0.0;
        }
        (self.ln_base + n2 as f64 * self.ln_l2 + n3 as f64 * self.ln_l3 + k.ln()).exp()
    }
}

/// Assemble the bracket at fixed truncation orders.
pub fn bracket_price(
    spec: &ModelSpec,
    theorem: TheoremId,
    orders: (u32, u32, u32),
    mode: BoundMode,
) -> Result<PriceBounds> {
    let mut lattice = DcLattice::new(spec, theorem)?;
    bracket_with_lattice(&mut lattice, spec, orders, mode)
}

fn bracket_with_lattice(
    lattice: &mut DcLattice,
    spec: &ModelSpec,
    orders: (u32, u32, u32),
    mode: BoundMode,
) -> Result<PriceBounds> {
    let (n1, n2, n3) = orders;
    lattice.ensure(n1)?;
    let t = spec.maturity;
    let rates = [
        spec.jumps[0].intensity * t,
        spec.jumps[1].intensity * t,
        spec.jumps[2].intensity * t,
    ];

    // the triple sum factorizes: sum w1 kE * sum w2 l2^n2 * sum w3 l3^n3
    let mut s1 = Kahan::default();
    for k in 0..=n1 {
        s1.add(ln_poisson_pmf(k, rates[0]).exp() * lattice.kernel_e[k as usize]);
    }
    let mut s2 = Kahan::default();
    for k in 0..=n2 {
        s2.add((ln_poisson_pmf(k, rates[1]) + k as f64 * lattice.ln_l2).exp());
    }
    let mut s3 = Kahan::default();
    for k in 0..=n3 {
        s3.add((ln_poisson_pmf(k, rates[2]) + k as f64 * lattice.ln_l3).exp());
    }
    let lower = lattice.ln_base.exp() * s1.total() * s2.total() * s3.total();

    let tail = [
        (1.0 - poisson_cdf(n1, rates[0])).max(0.0),
        (1.0 - poisson_cdf(n2, rates[1])).max(0.0),
        (1.0 - poisson_cdf(n3, rates[2])).max(0.0),
    ];
    let remainder = match mode {
        BoundMode::PaperLiteral => lattice.dc(n1, n2, n3) * tail[0] * tail[1] * tail[2],
        BoundMode::Conservative => {
            let cdf_prod = (1.0 - tail[0]) * (1.0 - tail[1]) * (1.0 - tail[2]);
            lattice.dc(0, 0, 0) * (1.0 - cdf_prod)
        }
    };
    Ok(PriceBounds { lower, upper: lower + remainder, orders, tail_mass: tail, mode })
}

const MAX_AUTO_ORDER: u32 = 200;

/// Smallest balanced orders (N,N,N) whose Conservative bracket gap is at
/// most `abs_tol`; grows N geometrically, then refines, reusing every DC
/// evaluation across steps.
pub fn auto_orders(spec: &ModelSpec, theorem: TheoremId, abs_tol: f64) -> Result<PriceBounds> {
    if !(abs_tol > 0.0) {
        return Err(PricerError::Numerical(format!("abs_tol must be > 0, got {abs_tol}")));
    }
    let mut lattice = DcLattice::new(spec, theorem)?;
    let gap = |lat: &mut DcLattice, n: u32| -> Result<(f64, PriceBounds)> {
        let b = bracket_with_lattice(lat, spec, (n, n, n), BoundMode::Conservative)?;
        Ok((b.upper - b.lower, b))
    };

    if spec.jumps.iter().all(|j| j.intensity == 0.0) {
        let (_, b) = gap(&mut lattice, 0)?;
        return Ok(b);
    }

    // geometric growth
    let mut n = 0u32;
    let (mut g, mut best) = gap(&mut lattice, n)?;
    while g > abs_tol {
        n = if n == 0 { 1 } else { n * 2 };
        if n > MAX_AUTO_ORDER {
            return Err(PricerError::OrderBudget { max_order: MAX_AUTO_ORDER });
        }
        let r = gap(&mut lattice, n)?;
        g = r.0;
        best = r.1;
    }
    // refine to the smallest passing N in (n/2, n]
    let mut lo = n / 2;
    let mut hi = n;
    while hi > lo + 1 && hi > 0 {
        let mid = (lo + hi) / 2;
        let (gm, bm) = gap(&mut lattice, mid)?;
        if gm <= abs_tol {
            hi = mid;
            best = bm;
        } else {
            lo = mid;
        }
    }
    // recompute at the returned orders (post-hoc verification)
    let final_b = bracket_with_lattice(&mut lattice, spec, best.orders, BoundMode::Conservative)?;
    debug_assert!(final_b.upper - final_b.lower <= abs_tol * (1.0 + 1e-12));
    Ok(final_b)
}
