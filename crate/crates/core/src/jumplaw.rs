//! Compound Poisson jump-law algebra: per-jump distributions, n-fold sum
//! functionals E(e^{-sum xi}), atom probabilities P(sum xi = c) and
//! expectations E(f(sum xi)) with an excluded atom - the three ingredients
//! every conditional price DC(n1,n2,n3) needs.

use serde::{Deserialize, Serialize};

use crate::quad;
use crate::specfun::ln_gamma;

const ATOM_TOL: f64 = 1e-12;
const MAX_DISCRETE_SUPPORT: usize = 1_000_000;

/// Distribution of a single jump xi >= 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JumpLaw {
    /// xi identically equal to a constant (Poisson-process jumps scaled by varpi).
    Constant { value: f64 },
    /// xi ~ Exponential with the given mean.
    Exponential { mean: f64 },
    /// finitely many atoms (value, probability).
    Discrete { atoms: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum JumpLawError {
    #[error("invalid jump law: {0}")]
    Invalid(String),
    #[error("discrete convolution support exceeds {MAX_DISCRETE_SUPPORT} atoms")]
    CombinatorialBlowup,
    #[error("quadrature failed to reach tolerance ({0})")]
    QuadratureFailure(String),
}

pub type JlResult<T> = std::result::Result<T, JumpLawError>;

impl JumpLaw {
    pub fn validate(&self) -> JlResult<()> {
        match self {
            JumpLaw::Constant { value } => {
                if !value.is_finite() || *value < 0.0 {
                    return Err(JumpLawError::Invalid(format!("constant jump must be >= 0, got {value}")));
                }
            }
            JumpLaw::Exponential { mean } => {
                if !(*mean > 0.0) || !mean.is_finite() {
                    return Err(JumpLawError::Invalid(format!("exponential mean must be > 0, got {mean}")));
                }
            }
            JumpLaw::Discrete { atoms } => {
                if atoms.is_empty() {
                    return Err(JumpLawError::Invalid("discrete law needs at least one atom".into()));
                }
                let mut total = 0.0;
                for &(v, p) in atoms {
                    if !v.is_finite() || v < 0.0 {
                        return Err(JumpLawError::Invalid(format!("atom value must be >= 0, got {v}")));
                    }
                    if !(p > 0.0) {
                        return Err(JumpLawError::Invalid(format!("atom probability must be > 0, got {p}")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(JumpLawError::Invalid(format!("atom probabilities sum to {total}, not 1")));
                }
            }
        }
        Ok(())
    }

    /// E e^{-xi} for a single jump; in (0, 1].
    pub fn laplace_single(&self) -> f64 {
        match self {
            JumpLaw::Constant { value } => (-value).exp(),
            JumpLaw::Exponential { mean } => 1.0 / (1.0 + mean),
            JumpLaw::Discrete { atoms } => atoms.iter().map(|&(v, p)| p * (-v).exp()).sum(),
        }
    }
}

/// Sum of `count` i.i.d. jumps (count 0 is the point mass at 0).
#[derive(Debug, Clone, PartialEq)]
pub struct SumLaw {
    pub base: JumpLaw,
    pub count: u32,
}

impl SumLaw {
    pub fn new(base: JumpLaw, count: u32) -> Self {
        SumLaw { base, count }
    }

    /// E e^{-sum} = (E e^{-xi})^count.
    pub fn laplace_at_one(&self) -> f64 {
        self.base.laplace_single().powi(self.count as i32)
    }

    /// Atoms of the n-fold convolution for purely atomic laws; `None` for a
    /// continuous positive-count sum.
    fn convolution_atoms(&self) -> JlResult<Option<Vec<(f64, f64)>>> {
        if self.count == 0 {
            return Ok(Some(vec![(0.0, 1.0)]));
        }
        match &self.base {
            JumpLaw::Constant { value } => Ok(Some(vec![(value * self.count as f64, 1.0)])),
            JumpLaw::Exponential { .. } => Ok(None),
            JumpLaw::Discrete { atoms } => {
                let mut acc: Vec<(f64, f64)> = vec![(0.0, 1.0)];
                for _ in 0..self.count {
                    let mut next: Vec<(f64, f64)> = Vec::with_capacity(acc.len() * atoms.len());
                    for &(v0, p0) in &acc {
                        for &(v1, p1) in atoms {
                            next.push((v0 + v1, p0 * p1));
                        }
                    }
                    next.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(next.len());
                    for (v, p) in next {
                        match merged.last_mut() {
                            Some(last) if (v - last.0).abs() <= ATOM_TOL => last.1 += p,
                            _ => merged.push((v, p)),
                        }
                    }
                    if merged.len() > MAX_DISCRETE_SUPPORT {
                        return Err(JumpLawError::CombinatorialBlowup);
                    }
                    acc = merged;
                }
                Ok(Some(acc))
            }
        }
    }

    /// Exact point mass P(sum = c) of the n-fold convolution.
    pub fn atom_probability(&self, c: f64) -> JlResult<f64> {
        match self.convolution_atoms()? {
            Some(atoms) => Ok(atoms
                .iter()
                .filter(|&&(v, _)| (v - c).abs() <= ATOM_TOL)
                .map(|&(_, p)| p)
                .sum()),
            None => Ok(0.0), // continuous law, count >= 1
        }
    }

    /// E( f(sum) 1{sum != atom_excluded} ), the excluded point matched within
    /// 1e-12. For the Exponential base with count >= 1 the sum has the
    /// Gamma(count, mean) density and the indicator is almost surely 1.
    pub fn expect_functional<F: Fn(f64) -> f64>(&self, f: F, atom_excluded: f64) -> JlResult<f64> {
        match self.convolution_atoms()? {
            Some(atoms) => Ok(atoms
                .iter()
                .filter(|&&(v, _)| (v - atom_excluded).abs() > ATOM_TOL)
                .map(|&(v, p)| p * f(v))
                .sum()),
            None => {
                let n = self.count as f64;
                let theta = match &self.base {
                    JumpLaw::Exponential { mean } => *mean,
                    _ => unreachable!("only the exponential base is continuous"),
                };
                // Gamma(n, theta) density against f on (0, mean + 40 sd)
                let mean = n * theta;
                let sd = n.sqrt() * theta;
                let upper = mean + 40.0 * sd;
                let ln_norm = ln_gamma(n).expect("count >= 1") + n * theta.ln();
                let r = quad::tanh_sinh(
                    |x, d| {
                        let xx = if x < upper * 0.5 { d } else { x };
                        let ln_dens = (n - 1.0) * xx.ln() - xx / theta - ln_norm;
                        f(xx) * ln_dens.exp()
                    },
                    0.0,
                    upper,
                    1e-9,
                    1e-300,
                    12,
                );
                // the level-difference estimator can plateau on evaluation
                // noise of the integrand itself; a tight plateau is accepted
                let tol = 1e-9 * r.value.abs() + 1e-300;
                if !r.converged && r.abs_err > 10.0 * tol {
                    return Err(JumpLawError::QuadratureFailure(format!(
                        "gamma-density quadrature: err {:.3e} after {} evals",
                        r.abs_err, r.evals
                    )));
                }
                Ok(r.value)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_trivial_and_derived() {
        // empty sum
        let s = SumLaw::new(JumpLaw::Exponential { mean: 0.8 }, 0);
        assert_eq!(s.laplace_at_one(), 1.0);
        // constant law: e^{-varpi n}
        let s = SumLaw::new(JumpLaw::Constant { value: 0.4 }, 3);
        assert!((s.laplace_at_one() - (-1.2f64).exp()).abs() < 1e-15);
        // exponential: quadrature oracle for E e^{-xi}, then nth power
        let theta = 0.7;
        let single = quad::exp_sinh(|x| (-x).exp() * (-x / theta).exp() / theta, 1e-12, 0.0, 10).value;
        let s = SumLaw::new(JumpLaw::Exponential { mean: theta }, 4);
        assert!((s.laplace_at_one() - single.powi(4)).abs() < 1e-10);
        assert!((single - 1.0 / (1.0 + theta)).abs() < 1e-12);
    }

    #[test]
    fn atom_probability_cases() {
        let any = JumpLaw::Discrete { atoms: vec![(1.0, 0.5), (2.0, 0.5)] };
        assert_eq!(SumLaw::new(any.clone(), 0).atom_probability(0.0).unwrap(), 1.0);
        assert_eq!(SumLaw::new(JumpLaw::Exponential { mean: 1.0 }, 2).atom_probability(1.3).unwrap(), 0.0);
        // two draws from {1, 2}: P(sum = 3) = 0.5
        let p = SumLaw::new(any, 2).atom_probability(3.0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn discrete_convolution_sums_to_one() {
        let law = JumpLaw::Discrete { atoms: vec![(0.5, 0.25), (1.0, 0.35), (2.5, 0.4)] };
        for n in 0..=6u32 {
            let atoms = SumLaw::new(law.clone(), n).convolution_atoms().unwrap().unwrap();
            let total: f64 = atoms.iter().map(|&(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-10, "n={n}: {total}");
        }
    }

    #[test]
    fn expect_functional_cases() {
        // point mass at zero
        let s = SumLaw::new(JumpLaw::Constant { value: 2.0 }, 0);
        assert_eq!(s.expect_functional(|x| x + 7.0, 5.0).unwrap(), 7.0);
        // indicator kills the single atom
        let s = SumLaw::new(JumpLaw::Constant { value: 1.5 }, 2);
        assert_eq!(s.expect_functional(|_| 1.0, 3.0).unwrap(), 0.0);
        // Gamma(3,1) mean through the quadrature path
        let s = SumLaw::new(JumpLaw::Exponential { mean: 1.0 }, 3);
        let m = s.expect_functional(|x| x, -1.0).unwrap();
        assert!((m - 3.0).abs() < 1e-8, "{m}");
    }

    #[test]
    fn laplace_consistency_across_kinds() {
        // laplace_at_one == expect_functional(e^{-x}) with nothing excluded
        let laws = [
            JumpLaw::Constant { value: 0.9 },
            JumpLaw::Exponential { mean: 0.6 },
            JumpLaw::Discrete { atoms: vec![(0.3, 0.2), (1.7, 0.8)] },
        ];
        for law in laws {
            for n in [0u32, 1, 3] {
                let s = SumLaw::new(law.clone(), n);
                let a = s.laplace_at_one();
                let b = s.expect_functional(|x| (-x).exp(), -1.0).unwrap();
                assert!((a - b).abs() < 1e-9 * a.max(1e-300), "{law:?} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn laplace_monotone_in_count() {
        let law = JumpLaw::Discrete { atoms: vec![(0.0, 0.3), (1.0, 0.7)] };
        let mut prev = 1.0 + 1e-9;
        for n in 0..8u32 {
            let v = SumLaw::new(law.clone(), n).laplace_at_one();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn validation_rejects_bad_laws() {
        assert!(JumpLaw::Constant { value: -0.1 }.validate().is_err());
        assert!(JumpLaw::Exponential { mean: 0.0 }.validate().is_err());
        assert!(JumpLaw::Discrete { atoms: vec![(1.0, 0.5)] }.validate().is_err());
        assert!(JumpLaw::Discrete { atoms: vec![(1.0, 0.5), (-2.0, 0.5)] }.validate().is_err());
    }

    #[test]
    fn jump_law_json_schema() {
        let c: JumpLaw = serde_json::from_str(r#"{"kind":"constant","value":0.25}"#).unwrap();
        assert_eq!(c, JumpLaw::Constant { value: 0.25 });
        let e: JumpLaw = serde_json::from_str(r#"{"kind":"exponential","mean":0.4}"#).unwrap();
        assert_eq!(e, JumpLaw::Exponential { mean: 0.4 });
        let d: JumpLaw = serde_json::from_str(r#"{"kind":"discrete","atoms":[[0.5,0.6],[1.5,0.4]]}"#).unwrap();
        assert_eq!(d, JumpLaw::Discrete { atoms: vec![(0.5, 0.6), (1.5, 0.4)] });
    }
}
