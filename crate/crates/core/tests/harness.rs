use bailey_core::arith::{rat, Monomial};
use bailey_core::harness::{
    case, default_candidates, exponent_probe, registry, run_cases, run_identity, run_limit_check, sample_point, Candidate, RunConfig,
};
use bailey_core::report::{to_json_lines, Status};
use proptest::prelude::*;

fn quiet(seed: u64) -> RunConfig {
    RunConfig { seed, timing: false, ..RunConfig::default() }
}

#[test]
fn reports_are_deterministic() {
    let cases = vec![case("lemma2").unwrap(), case("theta-square").unwrap(), case("unit-pair").unwrap()];
    let first = to_json_lines(&run_cases(&cases, &quiet(42)));
    assert_eq!(first, to_json_lines(&run_cases(&cases, &quiet(42))));
    assert_ne!(first, to_json_lines(&run_cases(&cases, &quiet(43))));
    let keys: Vec<String> = first.lines().map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["identity"].to_string()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn registry_keys_are_unique_kebab_case() {
    let mut keys: Vec<&str> = registry().iter().map(|c| c.key).collect();
    assert!(keys.iter().all(|k| k.chars().all(|ch| ch.is_ascii_lowercase() || ch.is_ascii_digit() || ch == '-')));
    let n = keys.len();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), n);
    assert!(case("no-such-identity").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampled_points_satisfy_their_constraints(seed in any::<u64>()) {
        let Ok(pt) = sample_point(seed, &(case("elliptic-jackson").unwrap().plan)()) else { return Ok(()) };
        prop_assert_eq!(pt.get("d").unwrap().exp(), 1);
        prop_assert_eq!(pt.get("a").unwrap().exp(), 0);
        prop_assert!(![rat(0, 1), rat(1, 1), rat(-1, 1)].contains(pt.q()));

        let Ok(pt) = sample_point(seed, &(case("thm-1413b").unwrap().plan)()) else { return Ok(()) };
        let [a, b, c, k, m] = ["a", "b", "c", "k", "m"].map(|s| pt.get(s).unwrap().clone());
        let q = Monomial::constant(pt.q().clone());
        prop_assert_eq!(&m * &(&(&a * &a) * &(&q * &q)), &(&b * &c) * &k);
        prop_assert_eq!(pt.get("d").unwrap().clone(), -(&m / &a));
        for s in ["b", "c", "k"] {
            prop_assert!(pt.root(s).unwrap().is_root_of(pt.get(s).unwrap()));
        }
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>()) {
        let plan = (case("thm-1413c").unwrap().plan)();
        let (x, y) = (sample_point(seed, &plan), sample_point(seed, &plan));
        prop_assert_eq!(x.map(|p| p.render()).ok(), y.map(|p| p.render()).ok());
    }
}

#[test]
fn trivial_size_passes() {
    let c = case("elliptic-jackson").unwrap();
    let pt = sample_point(5, &(c.plan)()).unwrap();
    assert_eq!(run_identity(&c, &pt, 8, 0, false).status, Status::Pass);
}

#[test]
fn perturbed_identity_fails_with_diagnostics() {
    let c = case("thm-1413c").unwrap();
    let cfg = RunConfig { perturbed: true, points: 1, ..quiet(0) };
    let report = &run_cases(&[c], &cfg)[0];
    assert_eq!(report.status, Status::Fail);
    let failure = report.first_failure.as_ref().unwrap();
    assert!(!failure.check.is_empty() && !failure.residual.is_empty());
}

#[test]
fn limit_checks_are_restricted_to_limit_identities() {
    let c = case("v-to-w").unwrap();
    let pt = sample_point(1, &(c.plan)()).unwrap();
    assert!(run_limit_check("v-to-w", &pt, 8, 3).unwrap().passed());
    assert!(run_limit_check("lemma2", &pt, 8, 3).is_err());
}

#[test]
fn probe_flags_the_unbound_reading_and_prunes_early() {
    let report = exponent_probe(&default_candidates(), 0, 3, 12);
    assert_eq!(report.points.len(), 2);
    let literal = report.outcomes.iter().find(|o| o.candidate == "a^r").unwrap();
    assert_eq!(literal.status, "ill-formed");
    for o in report.outcomes.iter().filter(|o| o.status == "pruned") {
        let (_, n) = o.failed_at.unwrap();
        assert!((1..=3).contains(&n));
    }
    assert_eq!(report.unique.as_deref(), Some("a^n"));
    let survivor = report.outcomes.iter().find(|o| o.status == "survivor").unwrap();
    assert_eq!(survivor.orders.len(), 2);
    assert!(matches!(default_candidates()[0], Candidate::IllFormed(_)));
}
