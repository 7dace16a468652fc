//! Subcommand bodies and their json/csv/text renderings.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use splitkit::config::{Config, OutputFormat};
use splitkit::numerics::{estimate_order as estimate, random_autonomous_problem, random_polynomial_problem, stiff_demo as run_stiff, ENSEMBLE_DIMENSION};
use splitkit::order::{order_of, Model, OrderReport};
use splitkit::schemes::{
    commutator_free_identity_suite, serialize_scheme, to_commutator_free, Factor, Method, Pattern, Scheme, SlotRole, CATALOG,
};
use splitkit::search::{
    feasibility_experiment, positive_recovery, search as run_search, SearchProblem, EXPERIMENTS, SCHEMA_VERSION,
};

use crate::{Failure, Output};

fn ok(body: String) -> Result<Output, Failure> {
    Ok(Output {
        body,
        mismatches: Vec::new(),
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn with_version(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    v
}

fn factor_json(f: &Factor) -> Value {
    match f {
        Factor::A { a } => json!({"kind": "A", "a": a.to_string()}),
        Factor::B { b, c, placement } => {
            json!({"kind": "B", "b": b.to_string(), "c": c.to_string(), "placement": placement.as_str()})
        }
    }
}

fn factor_text(f: &Factor) -> String {
    match f {
        Factor::A { a } => format!("A({a})"),
        Factor::B { b, c, placement } if !c.is_zero() => format!("B({b},{c};{})", placement.as_str()),
        Factor::B { b, .. } => format!("B({b})"),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn list_schemes(config: &Config, fmt: OutputFormat) -> Result<Output, Failure> {
    let mut rows = Vec::new();
    for name in CATALOG {
        let s = splitkit::schemes::catalog_get(name).expect("catalog entry");
        let r = order_of(&s.clone().into(), Model::Autonomous, config.caps.autonomous.min(6)).map_err(Failure::usage)?;
        rows.push((s, r));
    }
    let body = match fmt {
        OutputFormat::Json => to_json(&with_version(json!({
            "schemes": rows.iter().map(|(s, r)| json!({
                "name": s.name(),
                "claimed_order": s.claimed_order(),
                "verified_order": r.achieved_order,
                "verified_lower_bound": r.lower_bound,
                "factors": s.factors().iter().map(factor_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }))),
        OutputFormat::Csv => {
            let mut out = String::from("name,claimed_order,verified_order,factors\n");
            for (s, r) in &rows {
                let factors: Vec<String> = s.factors().iter().map(factor_text).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    s.name(),
                    s.claimed_order().map_or(String::new(), |p| p.to_string()),
                    r.order_label(),
                    csv_field(&factors.join(" "))
                );
            }
            out
        }
        OutputFormat::Text => {
            let mut out = format!("{:<12} {:>7} {:>8}  factors\n", "name", "claimed", "verified");
            for (s, r) in &rows {
                let factors: Vec<String> = s.factors().iter().map(factor_text).collect();
                let _ = writeln!(
                    out,
                    "{:<12} {:>7} {:>8}  {}",
                    s.name(),
                    s.claimed_order().map_or("-".into(), |p| p.to_string()),
                    r.order_label(),
                    factors.join(" ")
                );
            }
            out
        }
    };
    ok(body)
}

fn model_note(model: Model) -> Option<&'static str> {
    (model == Model::NonautonomousK2).then_some(
        "nonautonomous-k2 is u' = (H0 + tH1 + t^2 H2)u; a commutator term c[B,[B,A]] acts as exp(2c H2)",
    )
}

fn report_json(scheme: &Scheme, report: &OrderReport) -> Value {
    json!({
        "scheme": scheme.name(),
        "model": report.model,
        "max_check": report.max_check,
        "achieved_order": report.achieved_order,
        "lower_bound": report.lower_bound,
        "order": report.order_label(),
        "defect_degree": report.achieved_order + 1,
        "defect": report.defect,
        "claimed_order": scheme.claimed_order(),
        "note": model_note(report.model),
    })
}

pub fn check_order(scheme: &Scheme, model: Model, max: u32, config: &Config, fmt: OutputFormat) -> Result<Output, Failure> {
    let cap = match model {
        Model::Autonomous => config.caps.autonomous,
        _ => config.caps.nonautonomous,
    };
    if max > cap {
        return Err(Failure::usage(format!("--max {max} exceeds the {model} cap of {cap}")));
    }
    let report = order_of(&scheme.clone().into(), model, max).map_err(Failure::usage)?;
    let mut mismatches = Vec::new();
    if let (Model::Autonomous, Some(claimed)) = (model, scheme.claimed_order()) {
        if report.achieved_order < claimed && !(report.lower_bound && max < claimed) {
            mismatches.push(format!(
                "{}: claimed order {claimed}, verified {}",
                scheme.name(),
                report.order_label()
            ));
        }
    }
    let body = match fmt {
        OutputFormat::Json => to_json(&with_version(report_json(scheme, &report))),
        OutputFormat::Csv => {
            let mut out = String::from("word,coefficient\n");
            for d in &report.defect {
                let _ = writeln!(out, "{},{}", d.word, d.coefficient);
            }
            out
        }
        OutputFormat::Text => {
            let mut out = format!(
                "{}: order {} ({model}, checked through degree {max})\n",
                scheme.name(),
                report.order_label()
            );
            if report.lower_bound {
                out.push_str("no defect up to the checked degree\n");
            } else {
                let _ = writeln!(out, "degree-{} defect ({} words):", report.achieved_order + 1, report.defect.len());
                for d in &report.defect {
                    let _ = writeln!(out, "  {:<14} {}", d.word, d.coefficient);
                }
            }
            if let Some(n) = model_note(model) {
                let _ = writeln!(out, "note: {n}");
            }
            out
        }
    };
    Ok(Output { body, mismatches })
}

pub fn estimate_order(
    scheme: &Scheme,
    model: Model,
    commutator_free: bool,
    taus: &[f64],
    config: &Config,
    fmt: OutputFormat,
) -> Result<Output, Failure> {
    let method: Method = if commutator_free {
        if model != Model::NonautonomousK1 {
            return Err(Failure::usage("--commutator-free needs --model nonautonomous-k1"));
        }
        to_commutator_free(scheme).map_err(Failure::usage)?.into()
    } else {
        scheme.clone().into()
    };
    let prob = match model.t_power() {
        None => random_autonomous_problem(config.seed, ENSEMBLE_DIMENSION),
        Some(k) => random_polynomial_problem(config.seed, ENSEMBLE_DIMENSION, k as usize),
    };
    let est = estimate(&method, &prob, taus).map_err(Failure::usage)?;
    let symbolic = order_of(&method, model, 6).map_err(Failure::usage)?;
    let body = match fmt {
        OutputFormat::Json => to_json(&with_version(json!({
            "scheme": scheme.name(),
            "model": model,
            "commutator_free": commutator_free,
            "seed": config.seed,
            "slope": est.slope,
            "fit_range": est.fit_range,
            "errors": est.errors.iter().map(|(t, e)| json!({"tau": t, "error": e})).collect::<Vec<_>>(),
            "symbolic_order": symbolic.order_label(),
        }))),
        OutputFormat::Csv => {
            let mut out = String::from("tau,error\n");
            for (t, e) in &est.errors {
                let _ = writeln!(out, "{t:e},{e:e}");
            }
            out
        }
        OutputFormat::Text => {
            let mut out = format!(
                "{}: slope {:.3} ({model}, seed {}, symbolic order {})\n{:>12} {:>12}\n",
                scheme.name(),
                est.slope,
                config.seed,
                symbolic.order_label(),
                "tau",
                "error"
            );
            for (i, (t, e)) in est.errors.iter().enumerate() {
                let mark = if est.fit_range.contains(&i) { "" } else { "  (not fitted)" };
                let _ = writeln!(out, "{t:>12.6e} {e:>12.4e}{mark}");
            }
            out
        }
    };
    ok(body)
}

pub fn search(
    pattern: Pattern,
    order: u32,
    model: Model,
    nonneg: &[String],
    starts: usize,
    config: &Config,
    fmt: OutputFormat,
) -> Result<Output, Failure> {
    let cf = matches!(pattern, Pattern::CommutatorFree { .. });
    let mut roles = Vec::new();
    for n in nonneg {
        match (n.as_str(), cf) {
            ("a", false) => roles.push(SlotRole::FlowA),
            ("a", true) => roles.push(SlotRole::StageA),
            ("b", false) => roles.push(SlotRole::FlowB),
            _ => return Err(Failure::usage(format!("--nonneg {n:?}: use a, or b for splitting patterns"))),
        }
    }
    let described = pattern.describe();
    let sp = SearchProblem::new(pattern, order, model)
        .nonnegative(&roles)
        .starts(starts)
        .seed(config.seed)
        .settings(config.search.clone());
    let r = run_search(&sp).map_err(Failure::usage)?;
    let scheme_text = r.symbolic_confirmation.as_ref().and_then(|c| match &c.method {
        Method::Splitting(s) => Scheme::new("found", s.factors().to_vec(), None).ok().map(|s| serialize_scheme(&s)),
        Method::CommutatorFree(_) => None,
    });
    let body = match fmt {
        OutputFormat::Json => {
            let mut v = serde_json::to_value(&r).expect("serializable");
            if let Value::Object(m) = &mut v {
                m.insert("pattern".into(), json!(described));
                m.insert("target_order".into(), json!(order));
                m.insert("model".into(), json!(model));
                m.insert("seed".into(), json!(config.seed));
                m.insert("constraints".into(), json!(sp.constraints));
                m.insert("found_scheme".into(), json!(scheme_text));
            }
            to_json(&with_version(v))
        }
        OutputFormat::Csv => {
            let mut out = String::from("start,residual\n");
            for s in &r.per_start {
                let _ = writeln!(out, "{},{:e}", s.start, s.residual);
            }
            out
        }
        OutputFormat::Text => {
            let mut out = format!(
                "{described}, order {order}, {model}, {starts} starts, seed {}\nverdict: {} (best residual {:e} at start {})\n",
                config.seed,
                r.verdict.as_str(),
                r.best_residual,
                r.best_start
            );
            for (slot, x) in r.slots.iter().zip(&r.best_coeffs) {
                let _ = writeln!(out, "  {:<4} {x:.15}", slot.label);
            }
            if let Some(c) = &r.symbolic_confirmation {
                let _ = writeln!(
                    out,
                    "confirmed exactly at order {}: {}",
                    c.order.order_label(),
                    c.coefficients.join(", ")
                );
            }
            out
        }
    };
    ok(body)
}

pub fn stiff_demo(scheme: &Scheme, n: usize, fmt: OutputFormat) -> Result<Output, Failure> {
    let r = run_stiff(scheme, n).map_err(Failure::usage)?;
    let body = match fmt {
        OutputFormat::Json => to_json(&with_version(serde_json::to_value(&r).expect("serializable"))),
        OutputFormat::Csv => format!(
            "scheme,grid_size,tau,steps,steps_completed,initial_norm,max_norm,blowup\n{},{},{},{},{},{:e},{},{}\n",
            r.scheme,
            r.grid_size,
            r.tau,
            r.steps,
            r.steps_completed,
            r.initial_norm,
            r.max_norm.map_or("inf".into(), |m| format!("{m:e}")),
            r.blowup
        ),
        OutputFormat::Text => format!(
            "{}: n = {}, tau = {}, {} of {} steps, initial norm {:.4e}, max norm {}, blowup: {}\n",
            r.scheme,
            r.grid_size,
            r.tau,
            r.steps_completed,
            r.steps,
            r.initial_norm,
            r.max_norm.map_or("non-finite".into(), |m| format!("{m:.4e}")),
            if r.blowup { "yes" } else { "no" }
        ),
    };
    ok(body)
}

pub fn verify_theorems(only: &[String], config: &Config, fmt: OutputFormat) -> Result<Output, Failure> {
    for name in only {
        if !EXPERIMENTS.contains(&name.as_str()) {
            return Err(Failure::usage(format!(
                "unknown experiment {name:?}; known: {}",
                EXPERIMENTS.join(", ")
            )));
        }
    }
    let selected: Vec<&str> = EXPERIMENTS
        .iter()
        .copied()
        .filter(|e| only.is_empty() || only.iter().any(|o| o == e))
        .collect();
    let mut mismatches = Vec::new();
    let mut reports = Vec::new();
    for name in &selected {
        let r = feasibility_experiment(name, config).map_err(Failure::usage)?;
        mismatches.extend(r.mismatches());
        reports.push(r);
    }
    let identity = commutator_free_identity_suite(config.experiments.identity_schemes, 4, 8, config.seed)
        .map_err(Failure::usage)?;
    if !identity.passed() {
        mismatches.push(format!(
            "commutator-free identity: schemes {:?} differ",
            identity.mismatches
        ));
    }
    let recovery = positive_recovery(config).map_err(Failure::usage)?;
    if !recovery.passed {
        mismatches.push(format!(
            "positive recovery: verdict {} (best residual {:e})",
            recovery.case.verdict.as_str(),
            recovery.case.best_residual
        ));
    }
    let passed = mismatches.is_empty();
    let body = match fmt {
        OutputFormat::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "seed": config.seed,
            "experiments": reports,
            "identity_suite": identity,
            "positive_recovery": recovery,
            "mismatches": mismatches,
            "passed": passed,
        })),
        OutputFormat::Csv => {
            let mut out = String::from("experiment,case,expected,verdict,best_residual,matches\n");
            for r in &reports {
                for c in &r.cases {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{:e},{}",
                        r.name,
                        csv_field(&c.label),
                        c.expected.map_or("", |v| v.as_str()),
                        c.verdict.as_str(),
                        c.best_residual,
                        c.matches
                    );
                }
            }
            let c = &recovery.case;
            let _ = writeln!(
                out,
                "recovery,{},{},{},{:e},{}",
                csv_field(&c.label),
                c.expected.map_or("", |v| v.as_str()),
                c.verdict.as_str(),
                c.best_residual,
                recovery.passed
            );
            out
        }
        OutputFormat::Text => {
            let mut out = String::new();
            for r in &reports {
                let _ = writeln!(out, "{} [{}]", r.name, if r.passed { "pass" } else { "FAIL" });
                for c in &r.cases {
                    let _ = writeln!(
                        out,
                        "  {:<60} {:<32} best {:.3e}{}",
                        c.label,
                        c.verdict.as_str(),
                        c.best_residual,
                        match (c.expected, c.matches) {
                            (None, _) => "",
                            (Some(_), true) => "",
                            (Some(_), false) => "  << unexpected",
                        }
                    );
                }
                for ch in &r.checks {
                    let _ = writeln!(out, "  check {:<54} {}  {}", ch.name, if ch.passed { "pass" } else { "FAIL" }, ch.detail);
                }
                if let Some(a) = &r.sign_annex {
                    let _ = writeln!(out, "  sign patterns (a | b, application order):");
                    for p in &a.patterns {
                        let _ = writeln!(out, "    {:<44} {} | {}  x{}", p.case, p.a, p.b, p.count);
                    }
                }
                let _ = writeln!(out, "  caveat: {}", r.caveat);
            }
            let _ = writeln!(
                out,
                "commutator-free identity: {} schemes through degree {} [{}]",
                identity.schemes,
                identity.max_degree,
                if identity.passed() { "pass" } else { "FAIL" }
            );
            let _ = writeln!(
                out,
                "positive recovery on chin's shape: {} [{}]",
                recovery.case.verdict.as_str(),
                if recovery.passed { "pass" } else { "FAIL" }
            );
            let _ = writeln!(out, "{}", if passed { "all verdicts as expected" } else { "verdict mismatch" });
            out
        }
    };
    Ok(Output { body, mismatches })
}
