//! One function per subcommand. Each returns the JSON results, a text
//! rendering and whether every requested check passed.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use giry::algebra::{
    algebra_report, build_algebra, coseparating_maps, counterexample_c, AlgebraReport,
    CounterexampleReport,
};
use giry::check::{CheckConfig, CheckResult, Witness};
use giry::convex::builtin::unit_interval;
use giry::convex::{chain, product_space, ChainRule, Point};
use giry::error::Result;
use giry::fields::{
    agreement_check, dyadic_field, ev_component, ev_field, field_join, generate_field, SetField,
    Subset,
};
use giry::measures::{expectation_functional, FinMeasure};
use giry::metric::{brute_force_wasserstein, equiv_check, metric_axioms, wasserstein, Method};
use giry::rational::{int, rat};
use giry::registry::SpaceEntry;
use serde_json::{json, Value};

pub struct Outcome {
    pub passed: bool,
    pub results: Value,
    pub text: String,
}

fn witness_text(w: &Witness) -> String {
    w.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_line(out: &mut String, name: &str, r: &CheckResult) {
    let verdict = serde_json::to_value(r.verdict).expect("verdicts serialize");
    let _ = write!(out, "  {name:<20} {}", verdict.as_str().unwrap_or_default());
    if let Some(w) = &r.witness {
        let _ = write!(out, "  [{}]", witness_text(w));
    }
    out.push('\n');
}

fn report_lines(out: &mut String, r: &AlgebraReport) {
    for (name, check) in [
        ("unit_law", &r.unit_law),
        ("mult_law", &r.mult_law),
        ("coseparator_law", &r.coseparator_law),
        ("support_condition", &r.support_condition),
        ("compat", &r.compat),
        ("induced_structure", &r.induced_structure),
        ("lipschitz", &r.lipschitz),
    ] {
        check_line(out, name, check);
    }
}

pub fn check_laws(entry: &SpaceEntry, cfg: &CheckConfig) -> Outcome {
    let id = &entry.space.id;
    let metric = entry.metric.metric.to_string();
    let mut text = String::new();
    match build_algebra(&entry.metric, cfg) {
        Ok(h) => {
            let report = algebra_report(&h, &entry.metric, cfg);
            let laws_pass = report.passed();
            let verdict = if laws_pass { "pass" } else { "fail" };
            let passed = laws_pass && !entry.expect_reject;
            let _ = writeln!(text, "space {id} (metric {metric}): {verdict}");
            if entry.expect_reject {
                let _ = writeln!(text, "  expected a rejection, but an algebra was built");
            }
            report_lines(&mut text, &report);
            Outcome {
                passed,
                results: json!({
                    "space": id,
                    "metric": metric,
                    "expect_reject": entry.expect_reject,
                    "verdict": verdict,
                    "passed": passed,
                    "report": report,
                }),
                text,
            }
        }
        Err(rejection) => {
            let passed = entry.expect_reject;
            let expectation = if passed { "expected" } else { "unexpected" };
            let _ = writeln!(
                text,
                "space {id} (metric {metric}): rejected ({expectation})"
            );
            for f in &rejection.failures {
                let condition = serde_json::to_value(f.condition).expect("conditions serialize");
                let _ = writeln!(
                    text,
                    "  {} in {}  [{}]",
                    condition.as_str().unwrap_or_default(),
                    f.component,
                    witness_text(&f.witness)
                );
            }
            Outcome {
                passed,
                results: json!({
                    "space": id,
                    "metric": metric,
                    "expect_reject": entry.expect_reject,
                    "verdict": "rejected",
                    "passed": passed,
                    "rejection": rejection,
                }),
                text,
            }
        }
    }
}

pub fn check_compat(entry: &SpaceEntry, cfg: &CheckConfig) -> Outcome {
    let id = &entry.space.id;
    let metric = entry.metric.metric.to_string();
    let equiv = equiv_check(&entry.metric, cfg);
    let axioms = metric_axioms(&entry.metric, cfg);
    let holds = equiv.two_point.holds;
    let sound = equiv.agree() && axioms.passed();
    let verdict = match (sound, holds, equiv.two_point.exhaustive) {
        (false, _, _) => "fail",
        (true, false, _) => "rejected",
        (true, true, true) => "pass",
        (true, true, false) => "sampled-pass",
    };
    let passed = sound && (holds || entry.expect_reject);
    let mut text = format!("space {id} (metric {metric}): {verdict}\n");
    check_line(&mut text, "two_point", &equiv.two_point.to_check());
    check_line(&mut text, "four_point", &equiv.four_point.to_check());
    check_line(&mut text, "metric_axioms", &axioms);
    if !equiv.agree() {
        text.push_str("  two-point and four-point verdicts disagree\n");
    }
    Outcome {
        passed,
        results: json!({
            "space": id,
            "metric": metric,
            "expect_reject": entry.expect_reject,
            "verdict": verdict,
            "passed": passed,
            "two_point": equiv.two_point,
            "four_point": equiv.four_point,
            "agree": equiv.agree(),
            "metric_axioms": axioms,
        }),
        text,
    }
}

pub fn transport(
    entry: &SpaceEntry,
    p: &FinMeasure,
    q: &FinMeasure,
    method: Method,
) -> Result<Outcome> {
    let space = &entry.space;
    let result = match method {
        Method::Lp => wasserstein(p, q, &entry.metric)?,
        Method::Brute => brute_force_wasserstein(p, q, &entry.metric)?,
    };
    let pair_space = product_space(space, space);
    let marginals = result.plan.marginals_match();
    let plan_cost = result.plan.cost(&entry.metric);
    let passed = marginals && plan_cost == result.cost;
    let plan = result.plan.joint.to_text(&pair_space);
    let method_name = serde_json::to_value(result.method).expect("methods serialize");
    let text = format!(
        "W({}, {}) = {}\n  method: {}\n  plan: {plan}\n  marginals match: {marginals}\n",
        p.to_text(space),
        q.to_text(space),
        result.cost,
        method_name.as_str().unwrap_or_default(),
    );
    Ok(Outcome {
        passed,
        results: json!({
            "space": space.id,
            "metric": entry.metric.metric.to_string(),
            "P": p.to_text(space),
            "Q": q.to_text(space),
            "cost": result.cost.to_string(),
            "method": method_name,
            "plan": plan,
            "marginals_match": marginals,
            "plan_cost": plan_cost.to_string(),
        }),
        text,
    })
}

/// `E_P(m)` for the coseparating maps, compared with `m(h(P))` when an algebra exists.
pub fn expect(entry: &SpaceEntry, p: &FinMeasure, cfg: &CheckConfig) -> Result<Outcome> {
    let space = &entry.space;
    let algebra = build_algebra(&entry.metric, cfg);
    let barycenter = match &algebra {
        Ok(h) => Some(h.apply(p)?),
        Err(_) => None,
    };
    let mut text = format!("P = {}\n", p.to_text(space));
    let mut rows = Vec::new();
    let mut agree = true;
    if let Some(b) = &barycenter {
        let _ = writeln!(text, "h(P) = {}", space.fmt_point(b));
    }
    for m in coseparating_maps(space) {
        let expectation = expectation_functional(p, &m)?;
        let mut row = json!({ "map": m.name, "E_P(m)": expectation.to_string() });
        let _ = write!(text, "  E_P({}) = {expectation}", m.name);
        if let Some(b) = &barycenter {
            let at = m.eval_ext(b)?;
            agree &= at == expectation;
            row["m(h(P))"] = json!(at.to_string());
            row["agrees"] = json!(at == expectation);
            let _ = write!(text, "   m(h(P)) = {at}");
        }
        text.push('\n');
        rows.push(row);
    }
    let mut results = json!({
        "space": space.id,
        "P": p.to_text(space),
        "maps": rows,
    });
    let passed = match algebra {
        Ok(_) => {
            results["h(P)"] = json!(space.fmt_point(barycenter.as_ref().expect("algebra applied")));
            agree
        }
        Err(rejection) => {
            let _ = writeln!(text, "no algebra: {rejection}");
            results["rejection"] = json!(rejection);
            entry.expect_reject
        }
    };
    results["passed"] = json!(passed);
    Ok(Outcome {
        passed,
        results,
        text,
    })
}

pub fn counterexample(cfg: &CheckConfig) -> Result<Outcome> {
    let report: CounterexampleReport = counterexample_c(cfg)?;
    let passed = report.ideals.len() == 3
        && report.coseparating
        && report.compat_witness.is_some()
        && report.support_witness.is_some()
        && report.poset_witness.is_some()
        && report.rejection.is_some();
    let mut text = String::from("space C = {0, u, 1}\n");
    let _ = writeln!(text, "  ideals: {}", report.ideals.join(" "));
    let _ = writeln!(
        text,
        "  ideal characteristic maps coseparate C: {}",
        report.coseparating
    );
    let findings = [
        ("compat violation", &report.compat_witness),
        ("support condition fails", &report.support_witness),
        ("poset not total", &report.poset_witness),
    ];
    for (name, w) in findings {
        match w {
            Some(w) => {
                let _ = writeln!(text, "  {name}: {}", witness_text(w));
            }
            None => {
                let _ = writeln!(text, "  {name}: no witness found");
            }
        }
    }
    match &report.rejection {
        Some(r) => {
            let _ = writeln!(text, "  {r}");
        }
        None => text.push_str("  an algebra was built\n"),
    }
    Ok(Outcome {
        passed,
        results: json!({ "passed": passed, "report": report }),
        text,
    })
}

fn set(xs: &[usize]) -> Subset {
    xs.iter().copied().collect()
}

fn atoms_text(f: &SetField) -> Vec<String> {
    f.atoms().iter().map(|a| f.describe(a)).collect()
}

/// Grid cells of a dyadic field as `[first,last]`.
fn cells_text(f: &SetField) -> Vec<String> {
    f.atoms()
        .iter()
        .map(|a| {
            let first = &f.universe[*a.first().expect("atoms are nonempty")];
            let last = &f.universe[*a.last().expect("atoms are nonempty")];
            format!("[{first},{last}]")
        })
        .collect()
}

pub fn fields_demo(depth: usize) -> Result<Outcome> {
    let universe: Vec<String> = ["1", "2", "3"].iter().map(|s| s.to_string()).collect();
    let a = generate_field(universe.clone(), vec![set(&[0, 1])])?;
    let b = generate_field(universe.clone(), vec![set(&[1, 2])])?;
    let joined = field_join(&a, &b)?;
    let direct = generate_field(universe, vec![set(&[0, 1]), set(&[1, 2])])?;
    let join_matches = joined.members()? == direct.members()?;
    let mut counts_ok = direct.members()?.len() == 1 << direct.atoms().len();

    let mut text = String::from("generated field on {1,2,3}\n");
    let _ = writeln!(text, "  a = <{{1,2}}> atoms {}", atoms_text(&a).join(" "));
    let _ = writeln!(text, "  b = <{{2,3}}> atoms {}", atoms_text(&b).join(" "));
    let _ = writeln!(
        text,
        "  a v b atoms {} ({} members)",
        atoms_text(&joined).join(" "),
        joined.members()?.len()
    );

    let mut dyadic = Vec::new();
    text.push_str("dyadic fields on the grid of (0,1]\n");
    for n in 0..=depth {
        let f = dyadic_field(n)?;
        counts_ok &= f.atoms().len() == 1 << n;
        let cells = if n <= 3 { cells_text(&f) } else { Vec::new() };
        let _ = writeln!(
            text,
            "  F_{n}: {} atoms {}",
            f.atoms().len(),
            cells.join(" ")
        );
        dyadic.push(json!({ "depth": n, "atoms": f.atoms().len(), "cells": cells }));
    }

    // four measures on [0,1] that put 1/8, 3/8, 5/8, 7/8 on the point 0
    let i = unit_interval();
    let zero = Point::scalar(int(0));
    let one = Point::scalar(int(1));
    let measures: Vec<FinMeasure> = [1, 3, 5, 7]
        .iter()
        .map(|&k| {
            FinMeasure::new(
                &i,
                [(zero.clone(), rat(k, 8)), (one.clone(), rat(8 - k, 8))],
            )
        })
        .collect::<Result<_>>()?;
    let us = vec![BTreeSet::from([zero]), BTreeSet::from([one])];
    let diagonal = ev_field(&measures, &us, 2)?;
    let by_join = field_join(
        &ev_component(&measures, &us[0], 2)?,
        &ev_component(&measures, &us[1], 1)?,
    )?;
    let diagonal_matches = diagonal.members()? == by_join.members()?;
    text.push_str("evaluation fields on P0..P3 with P_j({0}) = 1/8, 3/8, 5/8, 7/8\n");
    let _ = writeln!(text, "  G_2 atoms {}", atoms_text(&diagonal).join(" "));
    let _ = writeln!(
        text,
        "  G_(0,2) v G_(1,1) atoms {}",
        atoms_text(&by_join).join(" ")
    );

    // agreement on generators without agreement on the field
    let k4 = chain("K4", 4, ChainRule::Min);
    let labels: Vec<String> = (0..4).map(|x| x.to_string()).collect();
    let field = generate_field(labels, vec![set(&[0, 1]), set(&[1, 2])])?;
    let p = FinMeasure::new(
        &k4,
        [(Point::Label(0), rat(1, 2)), (Point::Label(2), rat(1, 2))],
    )?;
    let q = FinMeasure::new(
        &k4,
        [(Point::Label(1), rat(1, 2)), (Point::Label(3), rat(1, 2))],
    )?;
    let agreement = agreement_check(&p, &q, &field, &k4)?;
    let _ = writeln!(
        text,
        "agreement of {} and {} on <{{0,1}},{{1,2}}>: generators {}, field {}{}",
        p.to_text(&k4),
        q.to_text(&k4),
        agreement.generators_agree,
        agreement.field_agrees,
        agreement
            .distinguishing
            .as_ref()
            .map(|d| format!(", distinguished by {d}"))
            .unwrap_or_default()
    );

    let passed = join_matches && counts_ok && diagonal_matches;
    Ok(Outcome {
        passed,
        results: json!({
            "passed": passed,
            "generated": {
                "a": atoms_text(&a),
                "b": atoms_text(&b),
                "join": atoms_text(&joined),
                "join_members": joined.members()?.len(),
                "join_matches_direct": join_matches,
            },
            "dyadic": dyadic,
            "evaluation": {
                "G_2": atoms_text(&diagonal),
                "G_(0,2) v G_(1,1)": atoms_text(&by_join),
                "diagonal_matches_join": diagonal_matches,
            },
            "agreement": {
                "P": p.to_text(&k4),
                "Q": q.to_text(&k4),
                "generators": [ "{0,1}", "{1,2}" ],
                "report": agreement,
            },
        }),
        text,
    })
}
