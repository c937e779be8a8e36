//! Acceptance gate: one PASS/FAIL line per criterion, run sequentially so the
//! wall-clock budgets are meaningful. Runs without the libtest harness so the
//! lines are always printed; the process fails if any criterion does.

use std::time::{Duration, Instant};

use bailey_core::harness::{
    case, default_candidates, enumerate_paths, exponent_probe, registry, run_cases, run_paths, RunConfig, TREE_TAGS,
};
use bailey_core::report::{IdentityReport, Status};

const SEED: u64 = 2024;

fn cfg(points: usize, order: Option<i64>, max_n: Option<usize>) -> RunConfig {
    RunConfig { seed: SEED, order, max_n, points, perturbed: false, timing: false }
}

/// Run keys with one configuration; returns (all passed, summary).
fn run(keys: &[&str], cfg: &RunConfig) -> (bool, Vec<IdentityReport>) {
    let cases: Vec<_> = keys.iter().map(|k| case(k).unwrap()).collect();
    let reports = run_cases(&cases, cfg);
    (reports.iter().all(IdentityReport::passed), reports)
}

fn describe(reports: &[IdentityReport]) -> String {
    let bad: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| format!("{}@{}", r.identity, r.point)).collect();
    if bad.is_empty() {
        format!("{} reports pass", reports.len())
    } else {
        format!("{}/{} reports fail: {}", bad.len(), reports.len(), bad.join(", "))
    }
}

struct Gate {
    results: Vec<(usize, bool)>,
}

impl Gate {
    fn criterion(&mut self, index: usize, title: &str, budget: Duration, body: impl FnOnce() -> (bool, String)) {
        let start = Instant::now();
        let (ok, detail) = body();
        let elapsed = start.elapsed();
        let ok = ok && elapsed <= budget;
        println!(
            "criterion {index} {}: {title} -- {detail}; {:.1}s of {}s",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        self.results.push((index, ok));
    }
}

fn main() {
    let mut gate = Gate { results: Vec::new() };
    let secs = Duration::from_secs;

    gate.criterion(1, "kernel inversion", secs(5), || {
        let (a, mut ra) = run(&["wp-inverse"], &cfg(3, None, Some(6)));
        let (b, rb) = run(&["wp-inverse-elliptic"], &cfg(3, Some(12), Some(5)));
        ra.extend(rb);
        (a && b, describe(&ra))
    });

    gate.criterion(2, "closed-form sums", secs(10), || {
        let (a, mut ra) = run(&["rogers-delta", "lemma1-minus", "lemma1-square", "lemma2"], &cfg(3, None, Some(5)));
        let (b, rb) = run(&["elliptic-jackson", "new-bibasic-sum"], &cfg(3, None, Some(4)));
        ra.extend(rb);
        (a && b, describe(&ra))
    });

    gate.criterion(3, "structure lemmas", secs(5), || {
        let (ok, r) = run(&["theta-quotient", "theta-square", "fact-ratio-squares", "sm-shifts", "v-to-w"], &cfg(5, Some(12), None));
        (ok, describe(&r))
    });

    gate.criterion(4, "tree soundness", secs(60), || {
        let singles: Vec<Vec<&str>> = TREE_TAGS.iter().map(|t| vec![*t]).collect();
        let depth2: Vec<Vec<&str>> = enumerate_paths(2).into_iter().filter(|p| p.len() == 2).step_by(7).collect();
        let depth3: Vec<Vec<&str>> = enumerate_paths(3).into_iter().filter(|p| p.len() == 3).step_by(97).collect();
        let count = |paths: &[Vec<&str>]| run_paths(paths, SEED, 4, 16, false).iter().filter(|r| r.passed()).count();
        let (s, d2, d3) = (count(&singles), count(&depth2), count(&depth3));
        let ok = s == singles.len() && d2 >= 10 && d3 >= 4;
        (ok, format!("single steps {s}/{}, depth 2 {d2}/{}, depth 3 {d3}/{}", singles.len(), depth2.len(), depth3.len()))
    });

    gate.criterion(5, "named transformations", secs(120), || {
        let keys = ["thm-1413b", "thm-1413c", "w12-nearly-poised", "w12-bailey-109", "v14-lambda", "v12-transformation", "exotic-pair"];
        let (ok, r) = run(&keys, &cfg(2, None, None));
        (ok, describe(&r))
    });

    gate.criterion(6, "limit coherence", secs(30), || {
        let (ok, r) = run(&["thm-1413b-limit", "thm-1413c-limit", "nr-limit", "v-to-w"], &cfg(3, None, None));
        (ok, describe(&r))
    });

    gate.criterion(7, "bibasic layer", secs(60), || {
        let (a, mut r) = run(&["bibasic-def-i2", "bibasic-def-i3", "bibasic-closed-form", "lift2"], &cfg(3, None, Some(4)));
        let (b, rb) = run(&["lift3-probe"], &cfg(3, None, Some(3)));
        r.extend(rb);
        let probe = exponent_probe(&default_candidates(), SEED, 3, 12);
        let law = probe.unique.clone().unwrap_or_else(|| format!("none ({} survivors)", probe.survivors.len()));
        (a && b && probe.passed(), format!("{}; probe law {law}", describe(&r)))
    });

    gate.criterion(8, "negative controls", secs(600), || {
        let cases = registry().to_vec();
        let reports = run_cases(&cases, &RunConfig { points: 1, perturbed: true, ..cfg(1, None, None) });
        let vacuous: Vec<&str> = reports.iter().filter(|r| r.status != Status::Fail).map(|r| r.identity.as_str()).collect();
        (vacuous.is_empty(), format!("{}/{} perturbed identities fail; not failing: {:?}", reports.len() - vacuous.len(), reports.len(), vacuous))
    });

    let failed: Vec<usize> = gate.results.iter().filter(|(_, ok)| !ok).map(|(i, _)| *i).collect();
    if !failed.is_empty() {
        eprintln!("acceptance criteria failed: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria pass", gate.results.len());
}
