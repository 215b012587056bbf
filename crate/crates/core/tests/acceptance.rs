//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Every criterion is exact: pairing values are compared as residues mod p^n
//! and a single failing case fails the criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use reclab::suites::{hand_m, run_suite, SuiteConfig, SuiteReport};

const SEED: u64 = 0x5eed_2024;
/// Allowed failing cases per criterion.
const TOLERANCE: usize = 0;

const FORMULA_SAMPLES: usize = 1000;
const FORMULA_BUDGET: Duration = Duration::from_secs(60);
const ORACLE_BUDGET: Duration = Duration::from_secs(300);
const AXIOM_SAMPLES: usize = 500;
const FGL_SAMPLES: usize = 50;
const NORM_SERIES_SAMPLES: usize = 100;
const DERIVATION_SAMPLES: usize = 500;
const DIGIT_SAMPLES: usize = 200;
const AH_HIGHER_SAMPLES: usize = 100;
const PLAN_LEVELS: usize = 3;

struct Outcome {
    passed: bool,
    detail: String,
}

fn run(suite: &str, p: u64, samples: usize) -> SuiteReport {
    run_suite(suite, &SuiteConfig::new(p, samples, SEED)).unwrap_or_else(|e| panic!("suite {suite} at p = {p}: {e}"))
}

/// Zero-tolerance verdict over reports, with per-check minimum case counts.
fn verdict(reports: &[SuiteReport], min_cases: impl Fn(&str) -> usize) -> Outcome {
    let mut passed = !reports.is_empty();
    let mut lines = Vec::new();
    for r in reports {
        for c in &r.checks {
            let enough = c.cases >= min_cases(&c.name);
            let ok = c.failures <= TOLERANCE && enough;
            passed &= ok;
            if !ok {
                lines.push(format!(
                    "    p = {}: {} ({} cases, {} failures){}",
                    r.p,
                    c.name,
                    c.cases,
                    c.failures,
                    c.examples.first().map(|e| format!(", e.g. {e}")).unwrap_or_default()
                ));
            }
        }
        for na in &r.not_applicable {
            lines.push(format!("    n/a: {na}"));
        }
    }
    let cases: usize = reports.iter().map(SuiteReport::cases).sum();
    let failures: usize = reports.iter().map(SuiteReport::failures).sum();
    let mut detail = format!("{cases} cases, {failures} failures");
    if !lines.is_empty() {
        detail = format!("{detail}\n{}", lines.join("\n"));
    }
    Outcome { passed, detail }
}

fn within(outcome: Outcome, elapsed: Duration, budget: Duration) -> Outcome {
    let fast = elapsed <= budget;
    let detail = format!("{}, {:.1}s of {}s budget", outcome.detail, elapsed.as_secs_f64(), budget.as_secs());
    Outcome { passed: outcome.passed && fast, detail }
}

fn formula() -> Outcome {
    let t = Instant::now();
    let reports: Vec<_> = [3, 5].iter().map(|&p| run("formula", p, FORMULA_SAMPLES)).collect();
    within(verdict(&reports, |_| FORMULA_SAMPLES), t.elapsed(), FORMULA_BUDGET)
}

fn oracle() -> Outcome {
    let t = Instant::now();
    let report = run("oracle", 3, 100);
    let classes = report.checks.iter().any(|c| c.name.contains("all classes") && c.cases == 81);
    let mut out = within(verdict(&[report], |_| 1), t.elapsed(), ORACLE_BUDGET);
    out.passed &= classes;
    out
}

fn axioms() -> Outcome {
    let report = run("axioms", 3, AXIOM_SAMPLES);
    verdict(&[report], |_| AXIOM_SAMPLES)
}

fn fgl() -> Outcome {
    let report = run("fgl", 3, FGL_SAMPLES);
    let laws = ["F_m", "lubin-tate #1", "lubin-tate #2"];
    let covered = laws.iter().all(|l| report.checks.iter().filter(|c| c.name.starts_with(l)).count() == 3);
    let mut out = verdict(&[report], |_| 1);
    out.passed &= covered;
    out
}

fn norm_series() -> Outcome {
    let report = run("norm-series", 3, NORM_SERIES_SAMPLES);
    verdict(&[report], |name| if name.starts_with("({r_g(x)") { NORM_SERIES_SAMPLES } else { 20 })
}

fn derivations() -> Outcome {
    let report = run("derivations", 3, DERIVATION_SAMPLES);
    verdict(&[report], |name| {
        if name.contains("independent") {
            100
        } else if name.contains("P'(pi)") {
            1
        } else {
            DERIVATION_SAMPLES
        }
    })
}

fn digits() -> Outcome {
    verdict(&[run("digits", 3, DIGIT_SAMPLES)], |_| DIGIT_SAMPLES)
}

fn ah_higher() -> Outcome {
    let report = run("ah-higher", 3, AH_HIGHER_SAMPLES);
    let check = report.checks.iter().find(|c| c.name.starts_with("root-of-unity")).cloned();
    let mut out = verdict(&[report], |_| AH_HIGHER_SAMPLES);
    if let Some(c) = check {
        out.detail = format!("{} ({})", out.detail, c.notes.join(", "));
    }
    out
}

fn plans() -> Outcome {
    let reports: Vec<_> = [3, 5].iter().map(|&p| run("plan", p, PLAN_LEVELS)).collect();
    let mut out = verdict(&reports, |_| PLAN_LEVELS);
    let ms: Vec<String> = reports
        .iter()
        .flat_map(|r| r.plans.iter().map(move |pl| format!("p={} n={} m={}", r.p, pl.n, pl.m)))
        .collect();
    // the hand value for Q_3(zeta_3) is m = 3
    out.passed &= hand_m(1, 3, 1, 2) == 3;
    out.detail = format!("{}; {}", out.detail, ms.join(", "));
    out
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 formula agreement, p in {3,5}, n in {1,2}", formula),
        ("2 norm-subgroup oracle, p = 3, n = 1", oracle),
        ("3 pairing axioms on every engine", axioms),
        ("4 formal group law suite, p = 3", fgl),
        ("5 norm series", norm_series),
        ("6 derivations", derivations),
        ("7 digit expansion round trip", digits),
        ("8 higher Artin-Hasse consistency", ah_higher),
        ("9 pairing plans, n <= 3, p in {3,5}", plans),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut all = true;
    for (name, f) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(o.as_str())) {
            continue;
        }
        let t = Instant::now();
        let out = f();
        all &= out.passed;
        let status = if out.passed { "PASS" } else { "FAIL" };
        println!("criterion {name}: {status} [{:.1}s] {}", t.elapsed().as_secs_f64(), out.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
