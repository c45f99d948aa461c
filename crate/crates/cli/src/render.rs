//! Output documents. JSON keys are sorted and carry no timings, so equal
//! inputs give byte-identical output.

use serde_json::{json, Map, Value};

use fexpand_core::ansatz::Balance;
use fexpand_core::pdeparse::latex_expr;
use fexpand_core::pipeline::{Derivation, Problem};
use fexpand_core::symcore::{Expr, Poly, Sym};
use fexpand_core::verify::{CorpusSummary, ResidualReport, Verdict};

use crate::Format;

pub const SCHEMA_VERSION: u64 = 1;

fn doc(command: &str, body: Value) -> String {
    let mut v = body;
    v["schema_version"] = json!(SCHEMA_VERSION);
    v["command"] = json!(command);
    serde_json::to_string_pretty(&v).expect("JSON values serialize")
}

fn names(syms: &[Sym]) -> Vec<String> {
    syms.iter().map(|s| s.name()).collect()
}

fn polys(ps: &[Poly]) -> Vec<String> {
    ps.iter().map(|p| p.to_string()).collect()
}

fn verdict_str(v: Option<Verdict>) -> &'static str {
    match v {
        Some(Verdict::Zero) => "zero",
        Some(Verdict::Nonzero) => "nonzero",
        None => "unverified",
    }
}

fn lhs_name(p: &Problem) -> String {
    let vars: Vec<String> = names(&p.pde.independents);
    format!("{}({})", p.pde.dependent.name(), vars.join(","))
}

pub fn reduce(equation: &str, p: &Problem, format: Format) -> String {
    match format {
        Format::Json => doc(
            "reduce",
            json!({
                "equation": equation,
                "wave_params": names(&p.wave.params),
                "independents": names(&p.pde.independents),
                "ode": format!("{} = 0", p.ode.render_text()),
                "ode_canonical": p.ode.to_string(),
                "order": p.ode.order(),
            }),
        ),
        Format::Text => format!("{} = 0", p.ode.render_text()),
        Format::Latex => format!("{}=0", p.ode.render_latex()),
    }
}

fn shape_json(blocks: &[Vec<u32>]) -> Value {
    json!(blocks)
}

pub fn balance(equation: &str, p: &Problem, b: &Balance, format: Format) -> String {
    match format {
        Format::Json => doc(
            "balance",
            json!({
                "equation": equation,
                "aux": p.aux.describe(),
                "arity": p.arity,
                "orders": b.base,
                "blocks": shape_json(&b.shape.blocks),
                "degenerate": b.degenerate,
            }),
        ),
        Format::Text | Format::Latex => {
            let orders: Vec<String> = b.base.iter().map(u32::to_string).collect();
            let mut out = format!("aux {} arity {}: orders {}", p.aux.describe(), p.arity, orders.join(","));
            if b.degenerate {
                out.push_str(" (degenerate: balance also holds one order higher)");
            }
            out
        }
    }
}

fn solution_line(lhs: &str, e: &Expr, format: Format) -> String {
    match format {
        Format::Latex => format!("{lhs} = {}", latex_expr(e)),
        _ => format!("{lhs} = {e}"),
    }
}

pub fn solve(equation: &str, d: &Derivation, format: Format) -> String {
    let p = &d.problem;
    match format {
        Format::Json => {
            let families: Vec<Value> = d
                .families
                .iter()
                .map(|a| {
                    let assignment: Map<String, Value> =
                        a.family.assignment.iter().map(|(s, v)| (s.name(), json!(v.to_string()))).collect();
                    let mut v = json!({
                        "assignment": assignment,
                        "free": names(&a.family.free),
                        "side_conditions": polys(&a.family.side_conditions),
                        "provenance": a.family.provenance,
                        "solution": a.solution.to_string(),
                        "verdict": verdict_str(a.verdict),
                    });
                    if let Some(e) = &a.verify_error {
                        v["verify_error"] = json!(e);
                    }
                    v
                })
                .collect();
            let pairs: Vec<Value> = d
                .pairs
                .iter()
                .map(|a| {
                    let assignment: Map<String, Value> =
                        a.pair.assignment.iter().map(|(s, v)| (s.name(), json!(v.to_string()))).collect();
                    json!({
                        "plus": a.pair.plus,
                        "minus": a.pair.minus,
                        "assignment": assignment,
                        "solution": a.solution.to_string(),
                        "verdict": verdict_str(a.verdict),
                    })
                })
                .collect();
            let forms: Map<String, Value> = d
                .reparam
                .effective
                .iter()
                .zip(&d.reparam.forms)
                .map(|(w, f)| (w.name(), json!(f.to_string())))
                .collect();
            let unresolved: Vec<Value> = d
                .outcome
                .unresolved
                .iter()
                .map(|u| json!({"equations": polys(&u.equations), "reason": u.reason, "provenance": u.provenance}))
                .collect();
            doc(
                "solve",
                json!({
                    "equation": equation,
                    "aux": p.aux.describe(),
                    "arity": p.arity,
                    "ode": format!("{} = 0", p.ode.render_text()),
                    "blocks": shape_json(&d.shape.blocks),
                    "balanced": d.balance.is_some(),
                    "degenerate_balance": d.balance.as_ref().map(|b| b.degenerate).unwrap_or(false),
                    "body": d.reparam.body.to_string(),
                    "coefficient_forms": forms,
                    "system": {
                        "equations": polys(&d.system.equations),
                        "unknowns": names(&d.system.unknowns),
                        "side_conditions": polys(&d.system.side_conditions),
                    },
                    "complete": d.complete(),
                    "budget_exhausted": d.budget_exhausted(),
                    "branches": d.outcome.branches,
                    "static_dropped": d.static_dropped,
                    "families": families,
                    "eps_pairs": pairs,
                    "unresolved": unresolved,
                }),
            )
        }
        Format::Text | Format::Latex => {
            let lhs = lhs_name(p);
            let mut out = Vec::new();
            out.push(format!("ODE: {} = 0", p.ode.render_text()));
            out.push(format!("blocks {:?}, {} equations in {} unknowns", d.shape.blocks, d.system.equations.len(), d.system.unknowns.len()));
            for (i, a) in d.families.iter().enumerate() {
                out.push(format!("[{}] {}  ({})", i + 1, solution_line(&lhs, &a.solution, format), verdict_str(a.verdict)));
                out.push(format!("    {}", a.family.key()));
                if !a.family.side_conditions.is_empty() {
                    out.push(format!("    nonzero: {}", polys(&a.family.side_conditions).join(", ")));
                }
            }
            for a in &d.pairs {
                out.push(format!(
                    "[{}|{}] {}  eps^2 = 1 ({})",
                    a.pair.plus + 1,
                    a.pair.minus + 1,
                    solution_line(&lhs, &a.solution, format),
                    verdict_str(a.verdict)
                ));
            }
            if !d.complete() {
                out.push(format!(
                    "incomplete: {} unresolved branches{}",
                    d.outcome.unresolved.len(),
                    if d.budget_exhausted() { ", budget exhausted" } else { "" }
                ));
            }
            out.join("\n")
        }
    }
}

pub fn verdict(equation: &str, solution: &str, r: &ResidualReport, format: Format) -> String {
    let residual = r.residual_poly();
    match format {
        Format::Json => doc(
            "verify",
            json!({
                "equation": equation,
                "solution": solution,
                "verdict": verdict_str(Some(r.verdict)),
                "residual": residual.to_string(),
                "generators": r.generators.iter().map(|g| format!("{} = {}({})", g.sym.name(), g.func.name(), g.phase)).collect::<Vec<_>>(),
                "spot_check": {
                    "samples": r.spot_check.samples.len(),
                    "rejected": r.spot_check.rejected,
                    "max": r.spot_check.max(),
                },
            }),
        ),
        Format::Text | Format::Latex => {
            let mut out = verdict_str(Some(r.verdict)).to_string();
            if r.verdict == Verdict::Nonzero {
                out.push_str(&format!(": residual {residual}"));
            }
            out
        }
    }
}

pub fn corpus(s: &CorpusSummary, format: Format) -> String {
    let total = s.outcomes.len();
    match format {
        Format::Json => doc(
            "corpus",
            json!({
                "total": total,
                "zero": s.zero_count(),
                "documented": s.documented().iter().map(|o| o.name.clone()).collect::<Vec<_>>(),
                "failures": s.failures().iter().map(|o| o.name.clone()).collect::<Vec<_>>(),
                "stale": s.stale().iter().map(|o| o.name.clone()).collect::<Vec<_>>(),
                "outcomes": s.outcomes,
            }),
        ),
        Format::Text | Format::Latex => {
            let mut out = Vec::new();
            for o in &s.outcomes {
                let status = match (&o.error, o.verdict) {
                    (Some(e), _) => format!("error: {e}"),
                    (None, v) => verdict_str(v).to_string(),
                };
                let tag = if o.is_failure() { "FAIL" } else { "ok" };
                out.push(format!("{tag:4} {:28} {status}", o.name));
            }
            out.push(format!(
                "{} of {} zero, {} documented discrepancies, {} failures",
                s.zero_count(),
                total,
                s.documented().len(),
                s.failures().len()
            ));
            out.join("\n")
        }
    }
}
