//! Bailey-tree exploration: plan a base-compatible path from the unit pair,
//! build every node and verify each one.

use std::fmt::Write as _;
use std::time::Instant;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{Monomial, Rat, RatExt};
use crate::bailey::{apply_transform, required_input, unit_pair, verify_pair, PairBase, TransformTag};
use crate::error::{Error, Result};
use crate::qobjects::FactorialSpec;
use crate::report::{FailureData, IdentityReport, Status};

use super::{derive_seed, digest_of, random_rat, MAX_ATTEMPTS};

/// Every tag the tree branches over.
pub const TREE_TAGS: [&str; 11] = ["T1", "T2", "T2b", "T3", "T4", "T5", "T1e", "T3e", "T5e", "New1", "New2"];

const BASIC_ONLY: [&str; 6] = ["T1", "T2", "T2b", "T3", "T4", "T5"];
const ELLIPTIC_ONLY: [&str; 3] = ["T1e", "T3e", "T5e"];
/// Tags whose theorem needs declared square roots.
const ROOTED: [&str; 5] = ["T2b", "T3", "T4", "T3e", "New2"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathMode {
    Basic,
    Elliptic,
}

/// A concrete path: the unit pair's base and each step with the base it outputs.
#[derive(Clone, Debug)]
pub struct TreePlan {
    pub unit: PairBase,
    pub steps: Vec<(TransformTag, PairBase)>,
}

impl TreePlan {
    pub fn path(&self) -> String {
        std::iter::once("unit").chain(self.steps.iter().map(|(t, _)| t.name())).collect::<Vec<_>>().join(">")
    }

    /// Canonical text of every base and tag parameter.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let base = |b: &PairBase| format!("a={},k={},q={},nome=w^{}", b.a, b.k, b.spec.base().render(), b.spec.nome_exponent());
        write!(out, "unit[{}]", base(&self.unit)).expect("string write");
        for (tag, b) in &self.steps {
            write!(out, ">{tag:?}[{}]", base(b)).expect("string write");
        }
        out
    }

    pub fn digest(&self) -> String {
        digest_of(&self.render())
    }
}

/// Which mode a path lives in; mixing basic-only and elliptic-only tags is an error.
pub fn path_mode(names: &[&str]) -> Result<PathMode> {
    for name in names {
        if !TREE_TAGS.contains(name) {
            return Err(Error::ConstraintViolation(format!("unknown transform tag {name}")));
        }
    }
    let basic = names.iter().any(|n| BASIC_ONLY.contains(n));
    let elliptic = names.iter().any(|n| ELLIPTIC_ONLY.contains(n));
    match (basic, elliptic) {
        (true, true) => Err(Error::ConstraintViolation(format!("path {} mixes basic-only and elliptic-only tags", names.join(",")))),
        (true, false) => Ok(PathMode::Basic),
        _ => Ok(PathMode::Elliptic),
    }
}

fn sqrt(x: &Monomial, what: &str) -> Result<Monomial> {
    let root = if x.is_p_free() { x.coeff().exact_sqrt() } else { None };
    root.map(Monomial::constant).ok_or_else(|| Error::ConstraintViolation(format!("{what} = {x} has no rational square root")))
}

/// A positive rational raised to `power`, so that every root a path needs exists.
fn powered(rng: &mut ChaCha8Rng, power: i64) -> Monomial {
    Monomial::constant(random_rat(rng).abs().powi(power))
}

/// Plan `names` (application order, unit pair first) at a seeded point.
/// Free symbols are drawn as `2^D`-th powers of positive rationals, `D` the
/// number of rooted steps, so every root is rational; the final nome is
/// large enough for each nome-halving step.
pub fn plan_tree(names: &[&str], seed: u64) -> Result<TreePlan> {
    let mode = path_mode(names)?;
    let rooted = names.iter().filter(|n| ROOTED.contains(n)).count() as u32;
    let power = 1i64 << rooted;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = powered(&mut rng, power).coeff().clone();
    let nome = match mode {
        PathMode::Basic => 0,
        // T3e halves the nome on the way back; New2 keeps it but needs a square nome.
        PathMode::Elliptic => (if names.contains(&"New2") { 4u32 } else { 2 }) << names.iter().filter(|n| **n == "T3e").count(),
    };
    let mut out = PairBase::new(powered(&mut rng, power), powered(&mut rng, power), FactorialSpec::new(q, nome)?);
    let mut steps = Vec::new();
    for name in names.iter().rev() {
        let q_root = || -> Result<Rat> { Ok(sqrt(&Monomial::constant(out.spec.base().clone()), "q")?.coeff().clone()) };
        let tag = match *name {
            "T1" => TransformTag::T1 { b: powered(&mut rng, power), c: powered(&mut rng, power) },
            "T1e" => TransformTag::T1e { b: powered(&mut rng, power), c: powered(&mut rng, power) },
            "T2" => TransformTag::T2,
            "T2b" => {
                let k_root = sqrt(&out.k, "k")?;
                let sigma = if rng.gen_bool(0.5) { 1 } else { -1 };
                TransformTag::T2b { sigma, m_root: &out.a / &k_root, k_root }
            }
            "T3" => TransformTag::T3 { a_root: sqrt(&out.a, "a")?, q_root: q_root()? },
            "T4" => TransformTag::T4 { a_root: sqrt(&out.a, "a")?, q_root: q_root()? },
            "T3e" => TransformTag::T3e { a_root: sqrt(&out.a, "a")?, q_root: q_root()? },
            "T5" => TransformTag::T5,
            "T5e" => TransformTag::T5e,
            "New1" => TransformTag::New1,
            "New2" => TransformTag::New2 { k_root: sqrt(&out.k, "k")?, q_root: q_root()? },
            other => return Err(Error::ConstraintViolation(format!("unknown transform tag {other}"))),
        };
        let (input, _) = required_input(&tag, &out)?;
        steps.push((tag, out));
        out = input;
    }
    steps.reverse();
    Ok(TreePlan { unit: out, steps })
}

/// Working order for a plan: at least `order`, and at least four powers of
/// the final nome.
fn working_order(plan: &TreePlan, order: i64) -> i64 {
    let nome = plan.steps.last().map_or(plan.unit.spec.nome_exponent(), |(_, b)| b.spec.nome_exponent()) as i64;
    order.max(4 * nome)
}

/// Build the unit pair and every node of `plan`, verifying each node.
pub fn run_tree(plan: &TreePlan, n_max: usize, order: i64) -> IdentityReport {
    let start = Instant::now();
    let order = working_order(plan, order);
    let (status, first_failure, checks) = match walk(plan, n_max, order) {
        Ok((checks, None)) => (Status::Pass, None, checks),
        Ok((checks, failure)) => (Status::Fail, failure, checks),
        Err(e) if e.is_degenerate() => (Status::Degenerate, None, 0),
        Err(e) => (Status::Fail, Some(FailureData { check: plan.path(), order, residual: e.to_string() }), 0),
    };
    IdentityReport {
        identity: format!("tree:{}", plan.path()),
        point: plan.digest(),
        order,
        max_n: n_max,
        status,
        first_failure,
        resampled: 0,
        checks,
        ms: start.elapsed().as_millis() as u64,
    }
}

fn walk(plan: &TreePlan, n_max: usize, order: i64) -> Result<(usize, Option<FailureData>)> {
    let mut pair = unit_pair(&plan.unit.a, &plan.unit.k, &plan.unit.spec);
    let mut checks = 0;
    for step in std::iter::once(None).chain(plan.steps.iter().map(Some)) {
        if let Some((tag, base)) = step {
            pair = apply_transform(tag, base, &pair)?;
        }
        let result = verify_pair(&pair, n_max, order)?;
        checks += result.comparisons.len();
        if let Some(n) = result.first_failure {
            let reached = result.comparisons.last().map_or(order, |c| c.order);
            let failure = FailureData {
                check: format!("{}[n={n}]", pair.path()),
                order: reached,
                residual: "beta_n differs from (M alpha)_n".into(),
            };
            return Ok((checks, Some(failure)));
        }
    }
    Ok((checks, None))
}

/// Plan and run a path, resampling degenerate points. Incompatible paths are
/// configuration errors.
pub fn run_tree_seeded(names: &[&str], seed: u64, n_max: usize, order: i64, timing: bool) -> Result<IdentityReport> {
    let label = names.join(",");
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let plan = plan_tree(names, derive_seed(seed, &label, attempt as u64))?;
        let mut report = run_tree(&plan, n_max, order);
        report.resampled = attempt;
        if !timing {
            report.ms = 0;
        }
        if report.status != Status::Degenerate {
            return Ok(report);
        }
        last = Some(report);
    }
    let mut report = last.expect("at least one attempt");
    report.resampled = MAX_ATTEMPTS;
    Ok(report)
}

/// Run many paths in parallel; results follow the input order. Incompatible
/// paths come back as fail reports carrying the configuration error.
pub fn run_paths(paths: &[Vec<&str>], seed: u64, n_max: usize, order: i64, timing: bool) -> Vec<IdentityReport> {
    paths
        .par_iter()
        .map(|p| {
            run_tree_seeded(p, seed, n_max, order, timing).unwrap_or_else(|e| IdentityReport {
                identity: format!("tree:unit>{}", p.join(">")),
                point: "none".into(),
                order,
                max_n: n_max,
                status: Status::Fail,
                first_failure: Some(FailureData { check: "plan".into(), order, residual: e.to_string() }),
                resampled: 0,
                checks: 0,
                ms: 0,
            })
        })
        .collect()
}

/// All tag sequences of length `1..=depth` that stay in one mode; paths made
/// only of `New1`/`New2` are listed once (elliptic).
pub fn enumerate_paths(depth: usize) -> Vec<Vec<&'static str>> {
    let mut out: Vec<Vec<&'static str>> = Vec::new();
    let mut frontier: Vec<Vec<&'static str>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for path in &frontier {
            for tag in TREE_TAGS {
                let mut p = path.clone();
                p.push(tag);
                if path_mode(&p).is_ok() {
                    next.push(p);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
