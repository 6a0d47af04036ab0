//! Market model: three risky assets with log-returns
//! H^j_t = mu_j t + beta_j theta^j_t + sigma_j B^j_{theta^j_t} - Z^j_t,
//! correlated Brownian motions, shared-component subordinator structure
//! (gamma or inverse-Gaussian clocks with unit mean rate) and independent
//! compound Poisson downward jumps. Parameter admissibility, the per-theorem
//! hypotheses, and the payoff/parity algebra live here.

use serde::{Deserialize, Serialize};

use crate::jumplaw::JumpLaw;
use crate::{PricerError, Result};

/// Drift/skew/volatility of one asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssetParams {
    pub mu: f64,
    pub beta: f64,
    pub sigma: f64,
}

/// Brownian correlation coefficients rho_{12}, rho_{13}, rho_{23}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationBlock {
    pub rho12: f64,
    pub rho13: f64,
    pub rho23: f64,
}

impl CorrelationBlock {
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [
            [1.0, self.rho12, self.rho13],
            [self.rho12, 1.0, self.rho23],
            [self.rho13, self.rho23, 1.0],
        ]
    }

    /// Cholesky factor allowing positive semidefinite input (pivot tol 1e-12);
    /// `None` if the matrix is indefinite.
    pub fn cholesky_psd(&self) -> Option<[[f64; 3]; 3]> {
        let a = self.matrix();
        let mut l = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s < -1e-12 {
                        return None;
                    }
                    l[i][j] = s.max(0.0).sqrt();
                } else if l[j][j] > 1e-12 {
                    l[i][j] = s / l[j][j];
                } else {
                    if s.abs() > 1e-9 {
                        return None;
                    }
                    l[i][j] = 0.0;
                }
            }
        }
        Some(l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubordinatorFamily {
    Vg,
    Nig,
}

/// How the three clocks share components, per the theorem hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linkage {
    /// general shared decomposition, independent Brownian motions (Thm 1/5)
    Independent,
    /// clock2 = clock3 = kappa2 * shared + kappa21 * indicator (Thm 2/6)
    SharedEqual23,
    /// all three clocks equal the indicator clock (Thm 3/7)
    AllEqual,
    /// clock3 = indicator clock; clock2 = kappa21 * indicator + idios (Thm 4/8)
    Indicator3Linked,
    /// mirror image: clock2 = indicator clock (Remark after Thm 4; VG only)
    Indicator2Linked,
}

/// Shared-component decomposition theta^j = kappa_j shared + kappa_j1
/// indicator + tilde kappa_j idiosyncratic (j = 2, 3), with the clock shape
/// parameters (a or phi scale depending on the family). Arrays index assets
/// 2 and 3 as [0] and [1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubordinatorStructure {
    pub family: SubordinatorFamily,
    pub linkage: Linkage,
    pub kappa: [f64; 2],
    pub kappa1: [f64; 2],
    pub kappa_tilde: [f64; 2],
    pub shape_shared: f64,
    pub shape_indicator: f64,
    pub shape_idios: [f64; 2],
}

/// Per-asset jump component: Poisson intensity and jump-size law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpSpec {
    pub intensity: f64,
    pub law: JumpLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub foreign: f64,
    pub domestic: f64,
}

/// Full three-asset model specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub assets: [AssetParams; 3],
    pub correlations: CorrelationBlock,
    pub subordinators: SubordinatorStructure,
    pub jumps: [JumpSpec; 3],
    pub rates: Rates,
    pub maturity: f64,
    pub strike: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    Vg1,
    Vg2,
    Vg3,
    Vg4,
    Vg4Sym,
    Nig5,
    Nig6,
    Nig7,
    Nig8,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        TheoremId::Vg1,
        TheoremId::Vg2,
        TheoremId::Vg3,
        TheoremId::Vg4,
        TheoremId::Vg4Sym,
        TheoremId::Nig5,
        TheoremId::Nig6,
        TheoremId::Nig7,
        TheoremId::Nig8,
    ];

    pub fn family(self) -> SubordinatorFamily {
        match self {
            TheoremId::Vg1 | TheoremId::Vg2 | TheoremId::Vg3 | TheoremId::Vg4 | TheoremId::Vg4Sym => {
                SubordinatorFamily::Vg
            }
            _ => SubordinatorFamily::Nig,
        }
    }

    pub fn linkage(self) -> Linkage {
        match self {
            TheoremId::Vg1 | TheoremId::Nig5 => Linkage::Independent,
            TheoremId::Vg2 | TheoremId::Nig6 => Linkage::SharedEqual23,
            TheoremId::Vg3 | TheoremId::Nig7 => Linkage::AllEqual,
            TheoremId::Vg4 | TheoremId::Nig8 => Linkage::Indicator3Linked,
            TheoremId::Vg4Sym => Linkage::Indicator2Linked,
        }
    }
}

impl std::fmt::Display for TheoremId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TheoremId::Vg1 => "vg1",
            TheoremId::Vg2 => "vg2",
            TheoremId::Vg3 => "vg3",
            TheoremId::Vg4 => "vg4",
            TheoremId::Vg4Sym => "vg4-sym",
            TheoremId::Nig5 => "nig5",
            TheoremId::Nig6 => "nig6",
            TheoremId::Nig7 => "nig7",
            TheoremId::Nig8 => "nig8",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for TheoremId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "vg1" => Ok(TheoremId::Vg1),
            "vg2" => Ok(TheoremId::Vg2),
            "vg3" => Ok(TheoremId::Vg3),
            "vg4" => Ok(TheoremId::Vg4),
            "vg4-sym" | "vg4sym" => Ok(TheoremId::Vg4Sym),
            "nig5" => Ok(TheoremId::Nig5),
            "nig6" => Ok(TheoremId::Nig6),
            "nig7" => Ok(TheoremId::Nig7),
            "nig8" => Ok(TheoremId::Nig8),
            other => Err(format!("unknown theorem id '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of validate_model: every checked condition with pass/fail, plus
/// non-fatal warnings (e.g. the discounted-drift martingale check).
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub theorem: TheoremId,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckResult { name: name.to_string(), passed, detail });
    }
}

pub(crate) fn c_j(asset: &AssetParams) -> f64 {
    asset.beta + 0.5 * asset.sigma * asset.sigma
}

/// Drift threshold appearing in the clock-MGF exponent absorbed by the
/// indicator clock integral: b of Theorems 1-4 (shared by the NIG theorems,
/// whose constraint is phi1^2 = 2b).
pub(crate) fn theorem_b(spec: &ModelSpec, theorem: TheoremId) -> f64 {
    let a = &spec.assets;
    let sub = &spec.subordinators;
    let rho23 = spec.correlations.rho23;
    let b23 = c_j(&a[1]) + c_j(&a[2]) + rho23 * a[1].sigma * a[2].sigma;
    match theorem.linkage() {
        Linkage::Independent => sub.kappa1[0] * c_j(&a[1]) + sub.kappa1[1] * c_j(&a[2]),
        Linkage::SharedEqual23 => sub.kappa1[0] * b23,
        Linkage::AllEqual => b23,
        Linkage::Indicator3Linked => c_j(&a[2]) + sub.kappa1[0] * c_j(&a[1]),
        Linkage::Indicator2Linked => c_j(&a[1]) + sub.kappa1[1] * c_j(&a[2]),
    }
}

/// The beta-type slope of the conditional normal CDF argument for each
/// dependence structure.
pub(crate) fn theorem_slope(spec: &ModelSpec, theorem: TheoremId) -> f64 {
    let a = &spec.assets;
    let r = &spec.correlations;
    let s1 = a[0].sigma;
    match theorem.linkage() {
        Linkage::Independent | Linkage::SharedEqual23 => a[0].beta,
        Linkage::AllEqual => a[0].beta + r.rho12 * s1 * a[1].sigma + r.rho13 * s1 * a[2].sigma,
        Linkage::Indicator3Linked => a[0].beta + s1 * a[2].sigma,
        Linkage::Indicator2Linked => a[0].beta + s1 * a[1].sigma,
    }
}

/// Extra clock MGF factors of DC(n1,n2,n3): (shape, exponent-argument) pairs
/// for the shared and idiosyncratic components (the indicator clock is
/// absorbed by the kernel integral).
pub(crate) fn theorem_mgf_factors(spec: &ModelSpec, theorem: TheoremId) -> Vec<(f64, f64)> {
    let a = &spec.assets;
    let sub = &spec.subordinators;
    let rho23 = spec.correlations.rho23;
    let b23 = c_j(&a[1]) + c_j(&a[2]) + rho23 * a[1].sigma * a[2].sigma;
    let mut out = Vec::new();
    match theorem.linkage() {
        Linkage::Independent => {
            let shared_arg = sub.kappa[0] * c_j(&a[1]) + sub.kappa[1] * c_j(&a[2]);
            if sub.kappa[0] > 0.0 || sub.kappa[1] > 0.0 {
                out.push((sub.shape_shared, shared_arg));
            }
            for j in 0..2 {
                if sub.kappa_tilde[j] > 0.0 {
                    out.push((sub.shape_idios[j], sub.kappa_tilde[j] * c_j(&a[j + 1])));
                }
            }
        }
        Linkage::SharedEqual23 => {
            if sub.kappa[0] > 0.0 {
                out.push((sub.shape_shared, sub.kappa[0] * b23));
            }
        }
        Linkage::AllEqual => {}
        Linkage::Indicator3Linked => {
            if sub.kappa_tilde[0] > 0.0 {
                out.push((sub.shape_idios[0], sub.kappa_tilde[0] * c_j(&a[1])));
            }
        }
        Linkage::Indicator2Linked => {
            if sub.kappa_tilde[1] > 0.0 {
                out.push((sub.shape_idios[1], sub.kappa_tilde[1] * c_j(&a[2])));
            }
        }
    }
    out
}

/// Log-threshold of the digital indicator: the payoff triggers on
/// S^1_T >= K, i.e. H^1_T >= ln K; the kernels shift by mu_1 T.
pub(crate) fn log_moneyness(spec: &ModelSpec) -> f64 {
    spec.assets[0].mu * spec.maturity - spec.strike.ln()
}

const REL_TOL: f64 = 1e-12;

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Check every admissibility condition the selected theorem requires:
/// (i) subordinator consistency identities, (ii) MGF finiteness,
/// (iii) the theorem's equality constraints, (iv) correlation hypotheses.
/// Always returns a report; pricing refuses failed reports.
pub fn validate_model(spec: &ModelSpec, theorem: TheoremId) -> ValidationReport {
    let mut rep = ValidationReport { theorem, checks: Vec::new(), warnings: Vec::new() };
    let a = &spec.assets;
    let sub = &spec.subordinators;

    // basic parameter sanity
    let mut basics = Vec::new();
    for (j, ap) in a.iter().enumerate() {
        if !(ap.mu.is_finite() && ap.beta.is_finite() && ap.sigma.is_finite() && ap.sigma >= 0.0) {
            basics.push(format!("asset {} parameters invalid", j + 1));
        }
    }
    if !(a[0].sigma > 0.0) {
        basics.push("sigma_1 must be > 0 for the closed forms".into());
    }
    if !(spec.maturity > 0.0) {
        basics.push(format!("maturity must be > 0, got {}", spec.maturity));
    }
    if !(spec.strike > 0.0) {
        basics.push(format!("strike must be > 0, got {}", spec.strike));
    }
    if !(spec.rates.foreign >= 0.0 && spec.rates.domestic >= 0.0) {
        basics.push("rates must be >= 0".into());
    }
    rep.push("parameters", basics.is_empty(), basics.join("; "));

    // jump laws
    let mut jump_issues = Vec::new();
    for (j, js) in spec.jumps.iter().enumerate() {
        if !(js.intensity >= 0.0) || !js.intensity.is_finite() {
            jump_issues.push(format!("lambda_{} must be >= 0", j + 1));
        }
        if let Err(e) = js.law.validate() {
            jump_issues.push(format!("asset {} law: {e}", j + 1));
        }
    }
    rep.push("jump_laws", jump_issues.is_empty(), jump_issues.join("; "));

    // correlations in range and PSD
    let r = &spec.correlations;
    let in_range = [r.rho12, r.rho13, r.rho23].iter().all(|x| x.abs() <= 1.0 && x.is_finite());
    let psd = r.cholesky_psd().is_some();
    rep.push(
        "correlation_psd",
        in_range && psd,
        if in_range && psd { String::new() } else { "correlation matrix not positive semidefinite".into() },
    );

    // family matches the theorem
    let fam_ok = sub.family == theorem.family();
    rep.push(
        "family",
        fam_ok,
        if fam_ok { String::new() } else { format!("{:?} spec priced by a {:?} theorem", sub.family, theorem.family()) },
    );

    check_structure(&mut rep, spec, theorem);
    check_finiteness(&mut rep, spec, theorem);
    check_theorem_constraints(&mut rep, spec, theorem);

    // non-fatal martingale drift warning, per the pricing-measure convention:
    // theorems hold for any admissible parameters
    if rep.passed() {
        if let Ok(e) = expected_s3s2(spec) {
            let drift = (-spec.rates.foreign * spec.maturity).exp() * e;
            if (drift - 1.0).abs() > 1e-9 {
                rep.warnings.push(format!(
                    "discounted E(S3 S2) = {drift:.6e} deviates from 1; pricing under the given measure as-is"
                ));
            }
        }
    }
    rep
}

fn check_structure(rep: &mut ValidationReport, spec: &ModelSpec, theorem: TheoremId) {
    let sub = &spec.subordinators;
    let mut issues = Vec::new();

    for j in 0..2 {
        let (k, k1, kt) = (sub.kappa[j], sub.kappa1[j], sub.kappa_tilde[j]);
        if !(k >= 0.0 && k1 >= 0.0 && kt >= 0.0) {
            issues.push(format!("asset {} weights must be >= 0", j + 2));
            continue;
        }
        if (k + k1 + kt - 1.0).abs() > REL_TOL {
            issues.push(format!("asset {} weights sum to {}", j + 2, k + k1 + kt));
        }
    }
    if !(sub.shape_indicator > 0.0) {
        issues.push("indicator clock shape must be > 0".into());
    }

    // linkage patterns
    let pat_ok: bool = match theorem.linkage() {
        Linkage::Independent => true,
        Linkage::SharedEqual23 => {
            sub.kappa_tilde == [0.0, 0.0] && sub.kappa[0] == sub.kappa[1] && sub.kappa1[0] == sub.kappa1[1]
        }
        Linkage::AllEqual => sub.kappa == [0.0, 0.0] && sub.kappa_tilde == [0.0, 0.0] && sub.kappa1 == [1.0, 1.0],
        Linkage::Indicator3Linked => sub.kappa == [0.0, 0.0] && sub.kappa1[1] == 1.0 && sub.kappa_tilde[1] == 0.0,
        Linkage::Indicator2Linked => sub.kappa == [0.0, 0.0] && sub.kappa1[0] == 1.0 && sub.kappa_tilde[0] == 0.0,
    };
    if !pat_ok {
        issues.push(format!("weights do not match the {:?} linkage pattern", theorem.linkage()));
    }

    // shape-consistency identities of the shared decomposition
    for j in 0..2 {
        let (k, k1, kt) = (sub.kappa[j], sub.kappa1[j], sub.kappa_tilde[j]);
        match sub.family {
            SubordinatorFamily::Vg => {
                // a_j = a 1{k>0} + a1 1{k1>0} + a~ 1{kt>0}; active ratios equal a_j
                let aj = sub.shape_shared * ind(k) + sub.shape_indicator * ind(k1) + sub.shape_idios[j] * ind(kt);
                let mut check = |active: f64, ratio: f64, what: &str| {
                    if active > 0.0 && !rel_eq(aj, ratio) {
                        issues.push(format!("asset {}: {} ratio {} != a_{} = {}", j + 2, what, ratio, j + 2, aj));
                    }
                };
                if k > 0.0 {
                    check(k, sub.shape_shared / k, "shared");
                }
                if k1 > 0.0 {
                    check(k1, sub.shape_indicator / k1, "indicator");
                }
                if kt > 0.0 {
                    check(kt, sub.shape_idios[j] / kt, "idiosyncratic");
                }
            }
            SubordinatorFamily::Nig => {
                let pj = sub.shape_shared * k.sqrt() * ind(k)
                    + sub.shape_indicator * k1.sqrt() * ind(k1)
                    + sub.shape_idios[j] * kt.sqrt() * ind(kt);
                let mut check = |active: f64, ratio: f64, what: &str| {
                    if active > 0.0 && !rel_eq(pj, ratio) {
                        issues.push(format!("asset {}: {} ratio {} != phi_{} = {}", j + 2, what, ratio, j + 2, pj));
                    }
                };
                if k > 0.0 {
                    check(k, sub.shape_shared / k.sqrt(), "shared");
                }
                if k1 > 0.0 {
                    check(k1, sub.shape_indicator / k1.sqrt(), "indicator");
                }
                if kt > 0.0 {
                    check(kt, sub.shape_idios[j] / kt.sqrt(), "idiosyncratic");
                }
            }
        }
        // shapes of active components positive
        if k > 0.0 && !(sub.shape_shared > 0.0) {
            issues.push("shared shape must be > 0 where used".into());
        }
        if kt > 0.0 && !(sub.shape_idios[j] > 0.0) {
            issues.push(format!("idiosyncratic shape {} must be > 0 where used", j + 2));
        }
    }

    rep.push("subordinator_consistency", issues.is_empty(), issues.join("; "));
}

fn ind(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

fn check_finiteness(rep: &mut ValidationReport, spec: &ModelSpec, theorem: TheoremId) {
    let sub = &spec.subordinators;
    let mut issues = Vec::new();
    let b = theorem_b(spec, theorem);
    let a1 = sub.shape_indicator;

    match sub.family {
        SubordinatorFamily::Vg => {
            // hard precondition with margin: the closed forms contain (a1-b)^{-a1 T}
            if !(a1 - b >= 1e-9 * a1.abs().max(1.0)) {
                issues.push(format!("VG finiteness b < a1 violated: b = {b}, a1 = {a1}"));
            }
            for (shape, arg) in theorem_mgf_factors(spec, theorem) {
                if !(arg < shape) {
                    issues.push(format!("gamma MGF argument {arg} not below shape {shape}"));
                }
            }
        }
        SubordinatorFamily::Nig => {
            // phi^2 >= 2A for every IG MGF factor used
            for (shape, arg) in theorem_mgf_factors(spec, theorem) {
                if shape * shape < 2.0 * arg - 1e-12 {
                    issues.push(format!("IG MGF needs phi^2 >= 2A: phi = {shape}, A = {arg}"));
                }
            }
            if b < 0.0 {
                issues.push(format!("NIG theorems need b >= 0 (phi1^2 = 2b), got b = {b}"));
            }
        }
    }
    rep.push("finiteness", issues.is_empty(), issues.join("; "));
}

fn check_theorem_constraints(rep: &mut ValidationReport, spec: &ModelSpec, theorem: TheoremId) {
    let r = &spec.correlations;
    let mut issues = Vec::new();

    // correlation hypotheses per dependence structure; the indicator-linked
    // structures need the linked Brownian identified (rho = 1) for the
    // slope beta_1 + sigma_1 sigma_j to be the conditional drift
    let zero = |x: f64| x.abs() <= REL_TOL;
    match theorem.linkage() {
        Linkage::Independent => {
            if !(zero(r.rho12) && zero(r.rho13) && zero(r.rho23)) {
                issues.push("requires rho12 = rho13 = rho23 = 0".into());
            }
        }
        Linkage::SharedEqual23 => {
            if !(zero(r.rho12) && zero(r.rho13)) {
                issues.push("requires rho12 = rho13 = 0".into());
            }
        }
        Linkage::AllEqual => {}
        Linkage::Indicator3Linked => {
            if !(zero(r.rho23) && zero(r.rho12)) {
                issues.push("requires rho23 = rho12 = 0".into());
            }
            if !rel_eq(r.rho13, 1.0) {
                issues.push("requires rho13 = 1 (B^3 = B^1)".into());
            }
        }
        Linkage::Indicator2Linked => {
            if !(zero(r.rho23) && zero(r.rho13)) {
                issues.push("requires rho23 = rho13 = 0".into());
            }
            if !rel_eq(r.rho12, 1.0) {
                issues.push("requires rho12 = 1 (B^2 = B^1)".into());
            }
        }
    }

    // NIG equality constraint phi1^2 = 2b, checked to 1e-12 relative;
    // near-misses are rejected, never silently renormalized
    if spec.subordinators.family == SubordinatorFamily::Nig {
        let phi1 = spec.subordinators.shape_indicator;
        let b = theorem_b(spec, theorem);
        if !rel_eq(phi1 * phi1, 2.0 * b) {
            issues.push(format!("constraint phi1^2 = 2b violated: phi1^2 = {}, 2b = {}", phi1 * phi1, 2.0 * b));
        }
    }

    rep.push("theorem_constraints", issues.is_empty(), issues.join("; "));
}

/// E(S^3_T S^2_T): the moment the put-call relation needs. Closed form via
/// the clock MGFs; requires rho23 = 0 or an equal-clock linkage (otherwise
/// the cross term sqrt(theta^2 theta^3) has no closed form).
pub fn expected_s3s2(spec: &ModelSpec) -> Result<f64> {
    let a = &spec.assets;
    let sub = &spec.subordinators;
    let t = spec.maturity;
    let rho23 = spec.correlations.rho23;

    let clocks_equal = sub.kappa[0] == sub.kappa[1]
        && sub.kappa1[0] == sub.kappa1[1]
        && sub.kappa_tilde == [0.0, 0.0];
    if rho23.abs() > 1e-12 && !clocks_equal {
        return Err(PricerError::UnsupportedDependence(
            "E(S3 S2) has no closed form with rho23 != 0 and distinct subordinators".into(),
        ));
    }
    // exponent loadings on (shared, indicator, idios2, idios3)
    let cross = if rho23.abs() > 1e-12 { rho23 * a[1].sigma * a[2].sigma } else { 0.0 };
    let c2 = c_j(&a[1]);
    let c3 = c_j(&a[2]);
    // with equal clocks the cross term is linear in the common clock
    let u_shared = sub.kappa[0] * c2 + sub.kappa[1] * c3 + sub.kappa[0] * cross;
    let u_ind = sub.kappa1[0] * c2 + sub.kappa1[1] * c3 + sub.kappa1[0] * cross;
    let u_id2 = sub.kappa_tilde[0] * c2;
    let u_id3 = sub.kappa_tilde[1] * c3;

    let mut ln = (a[1].mu + a[2].mu) * t;
    // jump Laplace transforms at 1: E e^{-Z_T} = exp(-lambda T (1 - E e^{-xi}))
    for j in 1..3 {
        let lam = spec.jumps[j].intensity;
        ln += -lam * t * (1.0 - spec.jumps[j].law.laplace_single());
    }
    let factors = [
        (sub.shape_shared, u_shared, sub.kappa[0].max(sub.kappa[1]) > 0.0),
        (sub.shape_indicator, u_ind, sub.kappa1[0].max(sub.kappa1[1]) > 0.0),
        (sub.shape_idios[0], u_id2, sub.kappa_tilde[0] > 0.0),
        (sub.shape_idios[1], u_id3, sub.kappa_tilde[1] > 0.0),
    ];
    for (shape, u, active) in factors {
        if !active || u == 0.0 {
            continue;
        }
        match sub.family {
            SubordinatorFamily::Vg => {
                if !(u < shape) {
                    return Err(PricerError::Numerical(format!(
                        "gamma MGF argument {u} not below shape {shape} in E(S3 S2)"
                    )));
                }
                ln += shape * t * (shape.ln() - (shape - u).ln());
            }
            SubordinatorFamily::Nig => {
                let disc = shape * shape - 2.0 * u;
                if disc < -1e-12 {
                    return Err(PricerError::Numerical(format!(
                        "IG MGF needs phi^2 >= 2A in E(S3 S2): phi = {shape}, A = {u}"
                    )));
                }
                ln += shape * t * (shape - disc.max(0.0).sqrt());
            }
        }
    }
    Ok(ln.exp())
}

/// Remark-1 parity: DP = e^{-rT} E(S3 S2) - DC, evaluated from the
/// components (`discount` = e^{-rT}).
pub fn price_put_from_call(call_price: f64, e_s3s2: f64, discount: f64) -> f64 {
    discount * e_s3s2 - call_price
}
