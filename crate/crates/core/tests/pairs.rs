mod common;

use bailey_core::arith::{rat, Monomial, NomeSeries, Rat};
use bailey_core::bailey::{
    apply_transform, backward, forward, kernel_m, kernel_mtilde, required_input, unit_pair, verify_pair, PairBase, Sequence,
    TransformTag, WPPair,
};
use bailey_core::harness::run_tree_seeded;
use bailey_core::qobjects::FactorialSpec;
use bailey_core::report::Status;
use common::c;
use proptest::prelude::*;

const ORDER: i64 = 10;

fn specs(q: &Rat) -> [FactorialSpec; 2] {
    [FactorialSpec::basic(q.clone()).unwrap(), FactorialSpec::elliptic(q.clone()).unwrap()]
}

fn generic() -> impl Strategy<Value = Monomial> {
    (-9i64..=9, 1i64..=9).prop_filter("generic", |(n, d)| *n != 0 && n.abs() != *d).prop_map(|(n, d)| c(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn kernels_are_mutually_inverse(a in generic(), k in generic()) {
        for spec in specs(&rat(2, 5)) {
            for n in 0..=4 {
                for r in 0..=n {
                    let mut left = NomeSeries::zero(ORDER);
                    let mut right = NomeSeries::zero(ORDER);
                    for s in r..=n {
                        let (m_ns, mt_sr) = (kernel_m(n, s, &a, &k, &spec, ORDER), kernel_mtilde(s, r, &a, &k, &spec, ORDER));
                        let (mt_ns, m_sr) = (kernel_mtilde(n, s, &a, &k, &spec, ORDER), kernel_m(s, r, &a, &k, &spec, ORDER));
                        let (Ok(m_ns), Ok(mt_sr), Ok(mt_ns), Ok(m_sr)) = (m_ns, mt_sr, mt_ns, m_sr) else { return Ok(()) };
                        left = &left + &(&m_ns * &mt_sr);
                        right = &right + &(&mt_ns * &m_sr);
                    }
                    let delta = if n == r { NomeSeries::one(ORDER) } else { NomeSeries::zero(ORDER) };
                    prop_assert!(left.eq_mod(&delta), "M M~ at n={} r={}", n, r);
                    prop_assert!(right.eq_mod(&delta), "M~ M at n={} r={}", n, r);
                }
            }
        }
    }
}

#[test]
fn kernel_matches_raw_products() {
    let (a, k, q) = (c(5, 7), Monomial::new(rat(-3, 11), 1), rat(2, 3));
    for n in 0..=3 {
        for r in 0..=n {
            let got = kernel_m(n, r, &a, &k, &FactorialSpec::elliptic(q.clone()).unwrap(), ORDER).unwrap();
            assert!(got.eq_mod(&common::kernel_m(n as i64, r as i64, &a, &k, &q, 2, ORDER)), "n={n} r={r}");
        }
    }
}

#[test]
fn backward_inverts_forward() {
    let base = PairBase::new(c(5, 7), c(-3, 11), FactorialSpec::elliptic(rat(2, 3)).unwrap());
    let alpha = Sequence::from_values((0..=4).map(|n| NomeSeries::from_terms([(0, rat(n + 1, 3)), (1, rat(-2, n + 2))], ORDER)).collect());
    let beta = Sequence::from_values(forward(&base, &alpha, 4, ORDER).unwrap());
    for (n, x) in backward(&base, &beta, 4, ORDER).unwrap().into_iter().enumerate() {
        assert!(x.eq_mod(&alpha.get(n, ORDER).unwrap()), "n={n}");
    }
}

#[test]
fn unit_pair_alpha_matches_oracle_inversion() {
    let (a, k, q) = (c(5, 7), c(-3, 11), rat(2, 3));
    let pair = unit_pair(&a, &k, &FactorialSpec::elliptic(q.clone()).unwrap());
    let alpha: Vec<NomeSeries> = (0..=3).map(|n| pair.alpha.get(n, ORDER).unwrap()).collect();
    for n in 0..=3 {
        let want = if n == 0 { NomeSeries::one(ORDER) } else { NomeSeries::zero(ORDER) };
        assert!(common::forward(&alpha, n, &a, &k, &q, 2, ORDER).eq_mod(&want), "n={n}");
    }
}

#[test]
fn corrupted_beta_is_caught_at_its_index() {
    let pair = unit_pair(&c(5, 7), &c(-3, 11), &FactorialSpec::elliptic(rat(2, 3)).unwrap());
    let beta = pair.beta.map(|n, x| if n == 2 { &x + &NomeSeries::from_terms([(3, rat(1, 1))], x.order()) } else { x });
    let broken = WPPair::new(pair.base.clone(), pair.alpha.clone(), beta);
    let check = verify_pair(&broken, 4, ORDER).unwrap();
    assert_eq!(check.first_failure, Some(2));
    assert!(verify_pair(&pair, 4, ORDER).unwrap().passed());
}

#[test]
fn depth_three_paths_pass() {
    for path in [["T1e", "T3e", "New2"], ["T2", "T1", "T4"], ["T5e", "T1e", "New1"]] {
        let report = run_tree_seeded(&path, 7, 3, 12, false).unwrap();
        assert_eq!(report.status, Status::Pass, "{}", report.to_text());
    }
}

#[test]
fn incompatible_paths_are_configuration_errors() {
    assert!(run_tree_seeded(&["T1", "T1e"], 0, 2, 8, false).is_err());
    assert!(run_tree_seeded(&["T9"], 0, 2, 8, false).is_err());
}

/// Single step from the unit pair at the input base the tag demands.
fn step(tag: &TransformTag, out: &PairBase) -> WPPair {
    let (input, _) = required_input(tag, out).unwrap();
    apply_transform(tag, out, &unit_pair(&input.a, &input.k, &input.spec)).unwrap()
}

#[test]
fn elliptic_transforms_reduce_to_basic_ones() {
    let (a, k, q) = (c(5, 7), c(-3, 11), rat(2, 3));
    let q2 = rat(4, 9);
    let (b, cc) = (c(3, 2), c(-2, 5));
    let cases = [
        (
            TransformTag::T1e { b: b.clone(), c: cc.clone() },
            TransformTag::T1 { b: b.clone(), c: cc.clone() },
            FactorialSpec::elliptic(q.clone()).unwrap(),
            FactorialSpec::basic(q.clone()).unwrap(),
            a.clone(),
        ),
        (TransformTag::T5e, TransformTag::T5, FactorialSpec::elliptic(q.clone()).unwrap(), FactorialSpec::basic(q.clone()).unwrap(), a.clone()),
        (
            TransformTag::T3e { a_root: c(5, 3), q_root: q.clone() },
            TransformTag::T3 { a_root: c(5, 3), q_root: q.clone() },
            FactorialSpec::new(q2.clone(), 4).unwrap(),
            FactorialSpec::basic(q2).unwrap(),
            c(25, 9),
        ),
    ];
    for (etag, btag, espec, bspec, a) in cases {
        let e = step(&etag, &PairBase::new(a.clone(), k.clone(), espec));
        let b = step(&btag, &PairBase::new(a, k.clone(), bspec));
        for n in 0..=3 {
            for (x, y) in [(&e.alpha, &b.alpha), (&e.beta, &b.beta)] {
                let (x, y) = (x.get(n, ORDER).unwrap(), y.get(n, ORDER).unwrap());
                assert_eq!(x.constant_term().unwrap(), y.constant_term().unwrap(), "{} n={n}", etag.name());
            }
        }
    }
}
