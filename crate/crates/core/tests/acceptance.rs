//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p framelab --test acceptance`.

use std::time::Instant;

use framelab::reproduce::{self, ReproReport};
use framelab::sweep::{self, SuiteConfig, SuiteReport};
use framelab::Tolerance;

struct Line {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn suite_detail(reports: &[&SuiteReport]) -> String {
    reports
        .iter()
        .map(|r| {
            let mut s = format!(
                "{}: {} trials, {} violations, {} skipped, worst margin {:.3e}",
                r.name, r.trials, r.violations, r.skipped, r.worst_margin
            );
            for f in &r.failures {
                s.push_str(&format!("\n      {f}"));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("\n    ")
}

fn suites_pass(reports: &[&SuiteReport]) -> bool {
    reports.iter().all(|r| r.passed())
}

fn repro_detail(r: &ReproReport) -> String {
    r.assertions
        .iter()
        .filter(|a| !a.pass)
        .map(|a| format!("{} (error {:e} > {:e})", a.name, a.error, a.tolerance))
        .collect::<Vec<_>>()
        .join("; ")
}

fn run(id: usize, title: &'static str, f: impl FnOnce() -> (bool, String)) -> Line {
    let start = Instant::now();
    let (pass, detail) = f();
    Line { id, title, pass, detail, seconds: start.elapsed().as_secs_f64() }
}

fn main() {
    let tol = Tolerance::default();
    let cfg = SuiteConfig { seed: 42, tol };
    let mut lines = Vec::new();

    lines.push(run(1, "Mercedes-Benz reproduction", || {
        let r = reproduce::mercedes(&tol).expect("mercedes example runs");
        (r.passed, format!("{} assertions {}", r.assertions.len(), repro_detail(&r)))
    }));
    lines.push(run(2, "Gavruta asymmetry", || {
        let r = reproduce::gavruta_counterexample(&tol).expect("counterexample runs");
        (r.passed, format!("{} assertions {}", r.assertions.len(), repro_detail(&r)))
    }));
    lines.push(run(3, "duality identities", || {
        let r = sweep::duality_identities(&cfg, 500);
        (r.passed(), suite_detail(&[&r]))
    }));
    lines.push(run(4, "perturbation bound suite", || {
        let r = sweep::perturbation_bounds(&cfg, 200);
        (r.passed(), suite_detail(&[&r]))
    }));
    lines.push(run(5, "best approximation", || {
        let r = sweep::best_approximation(&cfg, 100, 20);
        let (witnesses, excess) = sweep::canonical_not_best(&cfg, 50);
        let pass = r.passed() && excess.passed() && witnesses > 0;
        (pass, format!("{}\n    canonical dual strictly farther in {witnesses} instances", suite_detail(&[&r, &excess])))
    }));
    lines.push(run(6, "dual bijection", || {
        let r = sweep::dual_bijection(&cfg, 100);
        (r.passed(), suite_detail(&[&r]))
    }));
    lines.push(run(7, "difference decomposition", || {
        let r = sweep::difference_decomposition(&cfg, 200);
        (r.passed(), suite_detail(&[&r]))
    }));
    lines.push(run(8, "fusion suite", || {
        let fixtures = reproduce::decomposition(&tol).expect("decomposition fixtures run");
        let canonical = sweep::canonical_ffdual(&cfg, 200);
        let d = sweep::desiderata(&cfg, 100);
        let pq = sweep::pq_bound(&cfg, 500);
        let rl = sweep::r_lambda(&cfg, 300);
        let tr = sweep::transformed_bounds(&cfg, 200);
        let st = sweep::fusion_stability(&cfg, 200);
        let reports = [&canonical, &d.d1, &d.d2a, &d.d2b, &d.d3, &d.d4, &pq, &rl, &tr, &st];
        let pass = fixtures.passed && suites_pass(&reports);
        (pass, format!("decomposition fixtures {}\n    {}", if fixtures.passed { "ok" } else { "FAILED" }, suite_detail(&reports)))
    }));
    lines.push(run(9, "bound sharpness", || {
        let r = sweep::bound_sharpness(&cfg, 100);
        (r.passed(), suite_detail(&[&r]))
    }));

    let mut failed = 0;
    for l in &lines {
        let status = if l.pass { "PASS" } else { "FAIL" };
        println!("{status} [{}] {} ({:.2}s)\n    {}", l.id, l.title, l.seconds, l.detail);
        failed += usize::from(!l.pass);
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
