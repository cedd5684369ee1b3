//! The ten acceptance criteria, one PASS/FAIL line each, from a single run of the full
//! verification battery at m=1, L=8, n=128, seed 0.

use std::process::ExitCode;

use psqm::verify::{run_scenario, Check, Comparison, VerifyConfig, VerifyReport};

struct Criterion {
    title: &'static str,
    groups: &'static [&'static str],
    ladder: Option<&'static str>,
    note: Option<&'static str>,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { title: "coherent states: unit norm, Fourier rotates the label", groups: &["coherent"], ladder: None, note: None },
    Criterion { title: "functions of Q and P, projectors, Q^2 - I/2", groups: &["exercise6"], ladder: None, note: None },
    Criterion { title: "positivity and order preservation", groups: &["positivity"], ladder: None, note: None },
    Criterion { title: "direct and kernel-route <A> agree", groups: &["routes"], ladder: None, note: None },
    Criterion { title: "inverse round trip on the Hermite span", groups: &["round-trip"], ladder: None, note: None },
    Criterion {
        title: "pairing S_phipsiN against <phi, A psi>",
        groups: &["pairing"],
        ladder: Some("pairing-worst-relative-error"),
        note: None,
    },
    Criterion { title: "coherent pairing is evaluation; h1 finite differences", groups: &["evaluation"], ladder: None, note: None },
    Criterion { title: "Husimi, Weyl and Wigner bridges", groups: &["bridges"], ladder: None, note: None },
    Criterion { title: "algebra isomorphism, associativity, bracket", groups: &["algebra", "star"], ladder: None, note: None },
    Criterion {
        title: "kernel-route star product against the operator route",
        groups: &["kernel-route"],
        ladder: None,
        note: Some("convolution_reading"),
    },
];

/// The first failure, else the deviation check closest to its tolerance.
fn worst<'a>(checks: &[&'a Check]) -> Option<&'a Check> {
    let used = |c: &Check| (c.value - c.target).abs() / c.tolerance.max(1e-300);
    checks.iter().copied().find(|c| !c.pass).or_else(|| {
        checks
            .iter()
            .copied()
            .filter(|c| c.comparison == Comparison::Within)
            .max_by(|a, b| used(a).total_cmp(&used(b)))
    })
}

fn judge(report: &VerifyReport, c: &Criterion) -> (bool, String) {
    let gating: Vec<&Check> = c.groups.iter().flat_map(|g| report.group(g)).filter(|k| k.gating).collect();
    let mut ok = !gating.is_empty() && gating.iter().all(|k| k.pass);
    let mut detail = match worst(&gating) {
        Some(k) => format!("{} checks; closest to tolerance {} = {:.3e} (tol {:.0e})", gating.len(), k.name, k.value, k.tolerance),
        None if gating.is_empty() => "no checks ran".into(),
        None => format!("{} checks", gating.len()),
    };
    let failed: Vec<&str> = gating.iter().filter(|k| !k.pass).map(|k| k.name.as_str()).collect();
    if !failed.is_empty() {
        detail = format!("failed: {}; {detail}", failed.join(", "));
    }
    if let Some(name) = c.ladder {
        match report.ladders.iter().find(|l| l.name == name) {
            Some(l) => {
                ok &= l.non_increasing;
                let errs: Vec<String> = l.errors.iter().map(|e| format!("{e:.2e}")).collect();
                detail += &format!("; N={:?} errors [{}]", l.n, errs.join(", "));
            }
            None => ok = false,
        }
    }
    if let Some(key) = c.note {
        match report.notes.get(key) {
            Some(v) => detail += &format!("; {key}: {v}"),
            None => ok = false,
        }
    }
    (ok, detail)
}

fn main() -> ExitCode {
    let report = match run_scenario("all", &VerifyConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL verification battery did not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut failures = 0;
    for (k, c) in CRITERIA.iter().enumerate() {
        let (ok, detail) = judge(&report, c);
        println!("{} criterion {:>2}: {} [{detail}]", if ok { "PASS" } else { "FAIL" }, k + 1, c.title);
        failures += usize::from(!ok);
    }
    for c in report.checks.iter().filter(|c| !c.gating) {
        println!("     advisory {}: {:.3e} (tol {:.0e}) {}", c.name, c.value, c.tolerance, if c.pass { "within" } else { "outside" });
    }
    println!("{} of {} criteria pass", CRITERIA.len() - failures, CRITERIA.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
