//! Identity registry, seeded parameter points, multi-point runs, Bailey-tree
//! exploration and the cubic-lift exponent probe.

mod point;
pub mod probe;
pub mod registry;
pub mod tree;

use std::time::Instant;

use rayon::prelude::*;

use crate::arith::{NomeSeries, MIN_SIGNIFICANT_ORDERS};
use crate::error::{Error, Result};
use crate::report::{sort_reports, FailureData, IdentityReport, Status};

pub use point::{
    define, define_q, define_root, derive_seed, digest_of, free, free_w, random_rat, sample_point, square, Expr, ParamPoint, Plan, Ref, Step,
    MAX_ATTEMPTS,
};
pub use probe::{check_generic, default_candidates, exponent_probe, Candidate, CandidateOutcome, ProbeReport};
pub use registry::{case, registry, KERNEL_KEYS};
pub use tree::{enumerate_paths, path_mode, plan_tree, run_paths, run_tree, run_tree_seeded, PathMode, TreePlan, TREE_TAGS};

/// One side-by-side comparison inside an identity run.
#[derive(Clone, Debug)]
pub struct Check {
    pub label: String,
    pub lhs: NomeSeries,
    pub rhs: NomeSeries,
}

impl Check {
    pub fn new(label: impl Into<String>, lhs: NomeSeries, rhs: NomeSeries) -> Self {
        Check { label: label.into(), lhs, rhs }
    }
}

/// Evaluates both sides of every check at a point: `(point, max_n, order, perturbed)`.
pub type Builder = fn(&ParamPoint, usize, i64, bool) -> Result<Vec<Check>>;

/// A registry entry. `perturbed = true` selects the negative control: a
/// deliberately wrong variant that must fail at the same order.
#[derive(Clone, Copy)]
pub struct IdentityCase {
    pub key: &'static str,
    pub summary: &'static str,
    pub plan: fn() -> Plan,
    pub build: Builder,
    pub order: i64,
    pub max_n: usize,
}

/// How a run is sized and seeded. `None` falls back to the case default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub order: Option<i64>,
    pub max_n: Option<usize>,
    pub points: usize,
    pub perturbed: bool,
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 0, order: None, max_n: None, points: 3, perturbed: false, timing: true }
    }
}

/// Outcome of evaluating one case at one point (before report assembly).
enum Outcome {
    Ok { checks: usize, failure: Option<FailureData> },
    Degenerate,
}

/// How many times a run may raise its working order when a comparison
/// comes back shorter than requested.
const ORDER_RETRIES: i64 = 2;

fn evaluate(case: &IdentityCase, point: &ParamPoint, order: i64, max_n: usize, perturbed: bool) -> Outcome {
    let mut working = order;
    for _ in 0..=ORDER_RETRIES {
        let checks = match (case.build)(point, max_n, working, perturbed) {
            Ok(c) => c,
            Err(e) if e.is_degenerate() => return Outcome::Degenerate,
            Err(e) => {
                return Outcome::Ok {
                    checks: 0,
                    failure: Some(FailureData { check: "evaluation".into(), order, residual: e.to_string() }),
                }
            }
        };
        let reached = checks.iter().map(|c| c.lhs.order().min(c.rhs.order())).min().unwrap_or(order);
        if reached < order {
            working += order - reached;
            continue;
        }
        return Outcome::Ok { checks: checks.len(), failure: first_failure(&checks, order) };
    }
    Outcome::Ok {
        checks: 0,
        failure: Some(FailureData {
            check: "evaluation".into(),
            order,
            residual: format!("could not reach order {order} after raising the working order {ORDER_RETRIES} times"),
        }),
    }
}

fn first_failure(checks: &[Check], order: i64) -> Option<FailureData> {
    for c in checks {
        let lhs = c.lhs.truncate(order);
        let rhs = c.rhs.truncate(order);
        let cmp = lhs.compare(&rhs);
        if !cmp.equal {
            return Some(FailureData { check: c.label.clone(), order: cmp.order, residual: (&lhs - &rhs).to_string() });
        }
        if cmp.significant < MIN_SIGNIFICANT_ORDERS {
            let e = Error::InsufficientTruncation { significant: cmp.significant, required: MIN_SIGNIFICANT_ORDERS };
            return Some(FailureData { check: c.label.clone(), order: cmp.order, residual: e.to_string() });
        }
    }
    None
}

/// Run `case` at an explicit point.
pub fn run_identity(case: &IdentityCase, point: &ParamPoint, order: i64, max_n: usize, perturbed: bool) -> IdentityReport {
    let start = Instant::now();
    let outcome = evaluate(case, point, order, max_n, perturbed);
    let ms = start.elapsed().as_millis() as u64;
    let (status, first_failure, checks) = match outcome {
        Outcome::Degenerate => (Status::Degenerate, None, 0),
        Outcome::Ok { checks, failure: None } => (Status::Pass, None, checks),
        Outcome::Ok { checks, failure } => (Status::Fail, failure, checks),
    };
    IdentityReport {
        identity: case.key.to_string(),
        point: point.digest(),
        order,
        max_n,
        status,
        first_failure,
        resampled: 0,
        checks,
        ms,
    }
}

/// Run `case` at point number `index` of the seeded stream, resampling
/// degenerate points up to `MAX_ATTEMPTS` times.
pub fn run_point(case: &IdentityCase, cfg: &RunConfig, index: usize) -> IdentityReport {
    let order = cfg.order.unwrap_or(case.order);
    let max_n = cfg.max_n.unwrap_or(case.max_n);
    let plan = (case.plan)();
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let seed = derive_seed(cfg.seed, case.key, (index * MAX_ATTEMPTS + attempt) as u64);
        let Ok(point) = sample_point(seed, &plan) else { continue };
        let mut report = run_identity(case, &point, order, max_n, cfg.perturbed);
        report.resampled = attempt;
        if !cfg.timing {
            report.ms = 0;
        }
        if report.status != Status::Degenerate {
            return report;
        }
        last = Some(report);
    }
    let mut report = last.unwrap_or_else(|| IdentityReport {
        identity: case.key.to_string(),
        point: "none".into(),
        order,
        max_n,
        status: Status::Degenerate,
        first_failure: None,
        resampled: 0,
        checks: 0,
        ms: 0,
    });
    report.resampled = MAX_ATTEMPTS;
    report.first_failure =
        Some(FailureData { check: "sampling".into(), order, residual: Error::SamplingExhausted { attempts: MAX_ATTEMPTS }.to_string() });
    report
}

/// Run every case at `cfg.points` independent points, in parallel; the
/// result is sorted by identity key, then point digest.
pub fn run_cases(cases: &[IdentityCase], cfg: &RunConfig) -> Vec<IdentityReport> {
    let jobs: Vec<(usize, usize)> = (0..cases.len()).flat_map(|c| (0..cfg.points).map(move |i| (c, i))).collect();
    let mut reports: Vec<IdentityReport> = jobs.par_iter().map(|&(c, i)| run_point(&cases[c], cfg, i)).collect();
    sort_reports(&mut reports);
    reports
}

/// Look up registry keys, failing on the first unknown one.
pub fn resolve(keys: &[String]) -> Result<Vec<IdentityCase>> {
    keys.iter().map(|k| case(k)).collect()
}

/// The `p -> 0` limit check: an alias for the registry entries whose checks
/// compare constant terms of elliptic sides with basic-mode evaluations.
pub fn run_limit_check(key: &str, point: &ParamPoint, order: i64, max_n: usize) -> Result<IdentityReport> {
    const LIMIT_KEYS: [&str; 4] = ["thm-1413b-limit", "thm-1413c-limit", "nr-limit", "v-to-w"];
    if !LIMIT_KEYS.contains(&key) {
        return Err(Error::UnknownIdentity(format!("{key} is not a limit check")));
    }
    Ok(run_identity(&case(key)?, point, order, max_n, false))
}
