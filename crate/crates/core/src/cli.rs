//! Command-line front end: read a model document, run validation /
//! closed-form bracketing / Monte Carlo, emit machine-readable JSON.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 validation failure,
//! 3 numerical failure, 4 bracket violation in `compare`.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bounds::{self, BoundMode, PriceBounds};
use crate::mc_oracle;
use crate::model::{self, Linkage, ModelSpec, SubordinatorFamily, TheoremId};
use crate::PricerError;

#[derive(Debug, Parser)]
#[command(name = "levy-pricer", about = "Digital asset-or-nothing pricing under VG/NIG time-changed Levy models")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model document against the selected theorem's hypotheses.
    Validate {
        spec_path: PathBuf,
        #[arg(long, default_value = "auto")]
        theorem: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form price bracket (and optionally the put via parity).
    Price {
        spec_path: PathBuf,
        #[arg(long, default_value = "auto")]
        theorem: String,
        /// absolute tolerance for automatic truncation orders
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// fixed truncation orders N1,N2,N3 (overrides --tol)
        #[arg(long, value_parser = parse_orders)]
        orders: Option<(u32, u32, u32)>,
        #[arg(long, default_value = "conservative")]
        mode: String,
        /// also report the digital put price via put-call parity
        #[arg(long)]
        put: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the price (oracle path).
    Mc {
        spec_path: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// condition on fixed jump counts n1,n2,n3 (estimates DC(n1,n2,n3))
        #[arg(long, value_parser = parse_orders)]
        condition: Option<(u32, u32, u32)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bracket and Monte Carlo side by side with a containment verdict.
    Compare {
        spec_path: PathBuf,
        #[arg(long, default_value = "auto")]
        theorem: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_parser = parse_orders)]
        orders: Option<(u32, u32, u32)>,
        #[arg(long, default_value = "conservative")]
        mode: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_orders(s: &str) -> Result<(u32, u32, u32), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected N1,N2,N3".into());
    }
    let mut v = [0u32; 3];
    for (i, p) in parts.iter().enumerate() {
        v[i] = p.trim().parse().map_err(|e| format!("bad order '{p}': {e}"))?;
    }
    Ok((v[0], v[1], v[2]))
}

/// FNV-1a 64-bit digest of the spec document bytes.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Pick the theorem matching the spec's family + linkage (+ correlation
/// pattern sanity); errors instead of guessing when no closed form applies.
pub fn auto_theorem(spec: &ModelSpec) -> Result<TheoremId, String> {
    let fam = spec.subordinators.family;
    let link = spec.subordinators.linkage;
    let id = match (fam, link) {
        (SubordinatorFamily::Vg, Linkage::Independent) => TheoremId::Vg1,
        (SubordinatorFamily::Vg, Linkage::SharedEqual23) => TheoremId::Vg2,
        (SubordinatorFamily::Vg, Linkage::AllEqual) => TheoremId::Vg3,
        (SubordinatorFamily::Vg, Linkage::Indicator3Linked) => TheoremId::Vg4,
        (SubordinatorFamily::Vg, Linkage::Indicator2Linked) => TheoremId::Vg4Sym,
        (SubordinatorFamily::Nig, Linkage::Independent) => TheoremId::Nig5,
        (SubordinatorFamily::Nig, Linkage::SharedEqual23) => TheoremId::Nig6,
        (SubordinatorFamily::Nig, Linkage::AllEqual) => TheoremId::Nig7,
        (SubordinatorFamily::Nig, Linkage::Indicator3Linked) => TheoremId::Nig8,
        (SubordinatorFamily::Nig, Linkage::Indicator2Linked) => {
            return Err("no closed form: the indicator-2-linked structure has no NIG theorem".into())
        }
    };
    Ok(id)
}

#[derive(Debug, Serialize)]
pub struct OutputDoc {
    pub command: String,
    pub spec_digest: String,
    pub result: serde_json::Value,
    pub diagnostics: Vec<String>,
    pub schema_version: u32,
}

/// Run one command; returns (exit code, output document).
pub fn run(config: RunConfig) -> (i32, OutputDoc) {
    match config.command {
        Command::Validate { spec_path, theorem, out } => {
            wrap("validate", &spec_path, out, |spec, diags| {
                let thm = resolve_theorem(&theorem, spec)?;
                let rep = model::validate_model(spec, thm);
                diags.extend(rep.warnings.iter().cloned());
                let code = if rep.passed() { 0 } else { 2 };
                Ok((code, serde_json::to_value(&rep).unwrap()))
            })
        }
        Command::Price { spec_path, theorem, tol, orders, mode, put, out } => {
            wrap("price", &spec_path, out, |spec, diags| {
                let thm = resolve_theorem(&theorem, spec)?;
                let rep = model::validate_model(spec, thm);
                diags.extend(rep.warnings.iter().cloned());
                if !rep.passed() {
                    let f = rep.first_failure().unwrap();
                    return Err((2, format!("validation failed [{}]: {}", f.name, f.detail)));
                }
                let mode: BoundMode = mode.parse().map_err(|e: String| (1, e))?;
                let bounds = price_with(spec, thm, tol, orders, mode).map_err(num_err)?;
                let mut result = serde_json::to_value(&bounds).unwrap();
                result["theorem"] = json!(thm.to_string());
                if put {
                    let e = model::expected_s3s2(spec).map_err(num_err)?;
                    let discount = (-spec.rates.foreign * spec.maturity).exp();
                    result["put_lower"] = json!(model::price_put_from_call(bounds.upper, e, discount));
                    result["put_upper"] = json!(model::price_put_from_call(bounds.lower, e, discount));
                    result["expected_s3s2"] = json!(e);
                }
                Ok((0, result))
            })
        }
        Command::Mc { spec_path, samples, seed, condition, out } => {
            wrap("mc", &spec_path, out, |spec, diags| {
                if auto_theorem(spec).is_err() {
                    diags.push("no closed form for this dependence structure; mc-only".into());
                }
                let est = mc_oracle::estimate_price(spec, samples, seed, condition).map_err(num_err)?;
                Ok((0, serde_json::to_value(est).unwrap()))
            })
        }
        Command::Compare { spec_path, theorem, tol, orders, mode, samples, seed, out } => {
            wrap("compare", &spec_path, out, |spec, diags| {
                let thm = resolve_theorem(&theorem, spec)?;
                let rep = model::validate_model(spec, thm);
                diags.extend(rep.warnings.iter().cloned());
                if !rep.passed() {
                    let f = rep.first_failure().unwrap();
                    return Err((2, format!("validation failed [{}]: {}", f.name, f.detail)));
                }
                let mode: BoundMode = mode.parse().map_err(|e: String| (1, e))?;
                let bounds = price_with(spec, thm, tol, orders, mode).map_err(num_err)?;
                let est = mc_oracle::estimate_price(spec, samples, seed, None).map_err(num_err)?;
                let (lo, hi) = est.ci99_7;
                let contained = hi >= bounds.lower && lo <= bounds.upper;
                let result = json!({
                    "theorem": thm.to_string(),
                    "bracket": bounds,
                    "mc": est,
                    "verdict": if contained { "MC CI intersects bracket: PASS" } else { "MC CI outside bracket: FAIL" },
                });
                Ok((if contained { 0 } else { 4 }, result))
            })
        }
    }
}

fn price_with(
    spec: &ModelSpec,
    thm: TheoremId,
    tol: f64,
    orders: Option<(u32, u32, u32)>,
    mode: BoundMode,
) -> crate::Result<PriceBounds> {
    match orders {
        Some(o) => bounds::bracket_price(spec, thm, o, mode),
        None => {
            let b = bounds::auto_orders(spec, thm, tol)?;
            if mode == BoundMode::PaperLiteral {
                bounds::bracket_price(spec, thm, b.orders, mode)
            } else {
                Ok(b)
            }
        }
    }
}

type StepResult = std::result::Result<(i32, serde_json::Value), (i32, String)>;

fn num_err(e: PricerError) -> (i32, String) {
    match e {
        PricerError::Validation { theorem, failed } => (2, format!("validation failed for {theorem}: {failed}")),
        other => (3, format!("numerical failure: {other}")),
    }
}

fn resolve_theorem(sel: &str, spec: &ModelSpec) -> std::result::Result<TheoremId, (i32, String)> {
    if sel.eq_ignore_ascii_case("auto") {
        auto_theorem(spec).map_err(|e| (2, e))
    } else {
        sel.parse::<TheoremId>().map_err(|e| (1, e))
    }
}

fn wrap<F>(command: &str, spec_path: &PathBuf, out: Option<PathBuf>, f: F) -> (i32, OutputDoc)
where
    F: FnOnce(&ModelSpec, &mut Vec<String>) -> StepResult,
{
    let mut diagnostics = Vec::new();
    let (code, digest, result) = match std::fs::read(spec_path) {
        Err(e) => (1, String::from("-"), json!({"error": format!("cannot read {}: {e}", spec_path.display())})),
        Ok(bytes) => {
            let digest = format!("{:016x}", fnv1a(&bytes));
            match serde_json::from_slice::<ModelSpec>(&bytes) {
                Err(e) => (
                    1,
                    digest,
                    json!({"error": format!("parse error at line {} column {}: {e}", e.line(), e.column())}),
                ),
                Ok(spec) => match f(&spec, &mut diagnostics) {
                    Ok((code, result)) => (code, digest, result),
                    Err((code, msg)) => {
                        diagnostics.push(msg.clone());
                        (code, digest, json!({ "error": msg }))
                    }
                },
            }
        }
    };
    let doc = OutputDoc {
        command: command.to_string(),
        spec_digest: digest,
        result,
        diagnostics,
        schema_version: 1,
    };
    if let Some(path) = out {
        let body = serde_json::to_string_pretty(&doc).expect("serializable output");
        if let Err(e) = std::fs::write(&path, body) {
            eprintln!("cannot write {}: {e}", path.display());
            return (1, doc);
        }
    }
    (code, doc)
}
