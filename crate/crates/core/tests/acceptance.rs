//! Acceptance suite: one PASS/FAIL line per criterion, then every check.
//!
//! Runs without the libtest harness so the summary is always printed.

use std::time::{Duration, Instant};

use relaylink::analytics::LinkModel;
use relaylink::validation::{self, Report, Section, ValidationConfig};

struct Line {
    criterion: u8,
    passed: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn checks_summary(s: &Section) -> (bool, String) {
    let failed: Vec<&str> = s.checks.iter().filter(|c| !c.passed()).map(|c| c.id.as_str()).collect();
    let text = if failed.is_empty() {
        format!("{} checks", s.checks.len())
    } else {
        format!("{} of {} checks failed: {}", failed.len(), s.checks.len(), failed.join(", "))
    };
    (failed.is_empty() && !s.checks.is_empty(), text)
}

fn runtime_limit(name: &str, took: Duration, limit_s: f64) -> (bool, String) {
    let ok = took.as_secs_f64() < limit_s;
    (ok, format!("{name} {:.2} s (limit {limit_s} s)", took.as_secs_f64()))
}

fn main() {
    let cfg = ValidationConfig::default();
    let mut sections = Vec::new();
    let mut lines = Vec::new();

    for n in 1..=10u8 {
        let (section, took) = timed(|| validation::criterion(n, &cfg));
        let (mut passed, mut detail) = checks_summary(&section);
        let limit = match n {
            1 => Some(5.0),
            // Stricter than the per-configuration budget: all KS
            // configurations together.
            2 => Some(60.0),
            3 => Some(30.0),
            _ => None,
        };
        if let Some(limit) = limit {
            let (ok, text) = runtime_limit("runtime", took, limit);
            passed &= ok;
            detail = format!("{detail}; {text}");
        }
        if n == 8 {
            let (cap, took) = timed(|| LinkModel::new(validation::params(1.0, 15.0))?.ergodic_capacity());
            let (ok, text) = runtime_limit("one bivariate capacity point", took, 60.0);
            passed &= ok && cap.is_ok();
            detail = format!("{detail}; {text}");
        }
        lines.push(Line { criterion: n, passed, detail });
        sections.push((n, section));
    }
    let report = Report { config: cfg, sections };

    // Criterion 9 also requires the rendered report and CSV to repeat byte
    // for byte; the second run uses a different worker count.
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().expect("thread pool");
    let again = pool.install(|| validation::run(&cfg));
    let csv = |r: &Report| r.capacity_vs_xi().map(|c| c.to_csv()).unwrap_or_default();
    let same_text = report.to_text() == again.to_text();
    let same_csv = !csv(&report).is_empty() && csv(&report) == csv(&again);
    let nine = &mut lines[8];
    nine.passed &= same_text && same_csv;
    nine.detail = format!(
        "{}; report repeat {}; csv repeat {}",
        nine.detail,
        if same_text { "identical" } else { "DIFFERS" },
        if same_csv { "identical" } else { "DIFFERS" }
    );

    println!();
    for l in &lines {
        println!(
            "criterion {:>2} | {} | {}",
            l.criterion,
            if l.passed { "PASS" } else { "FAIL" },
            l.detail
        );
    }
    println!();
    print!("{}", report.to_text());
    if let Some(c) = report.capacity_vs_xi() {
        print!("{}", c.to_csv());
    }

    if lines.iter().any(|l| !l.passed) {
        std::process::exit(1);
    }
}
