mod common;

use bailey_core::arith::{rat, Monomial};
use bailey_core::bailey::{
    bibasic_closed_form, bibasic_forward, lift_bibasic, verify_pair, ExponentLaw, LiftStep,
};
use bailey_core::qobjects::FactorialSpec;
use common::c;

const ORDER: i64 = 10;

fn spec() -> FactorialSpec {
    FactorialSpec::elliptic(rat(3, 7)).unwrap()
}

#[test]
fn closed_form_satisfies_bibasic_relation() {
    for i in 1..=3 {
        let pair = bibasic_closed_form(i, &c(5, 3), &c(2, 9), &c(-2, 7), &spec()).unwrap();
        for n in 0..=3 {
            let b = pair.b_seq.get(n, ORDER).unwrap();
            assert!(b.eq_mod(&bibasic_forward(&pair, n, ORDER).unwrap()), "i={i} n={n}");
        }
    }
}

#[test]
fn closed_form_starts_at_one() {
    let pair = bibasic_closed_form(2, &c(5, 3), &c(2, 9), &c(-2, 7), &spec()).unwrap();
    assert!(pair.a_seq.get(0, ORDER).unwrap().eq_mod(&bailey_core::arith::NomeSeries::one(ORDER)));
    assert!(pair.b_seq.get(0, ORDER).unwrap().eq_mod(&bailey_core::arith::NomeSeries::one(ORDER)));
}

#[test]
fn quadratic_lift_gives_a_pair() {
    let bib = bibasic_closed_form(2, &c(5, 3), &c(-4, 5), &c(-2, 7), &spec()).unwrap();
    let pair = lift_bibasic(&LiftStep::Lift2 { k: c(2, 9) }, &bib).unwrap();
    assert!(verify_pair(&pair, 3, ORDER).unwrap().passed());
}

#[test]
fn cubic_lift_needs_the_right_law() {
    let bib = bibasic_closed_form(3, &c(5, 3), &c(-4, 5), &c(-2, 7), &spec()).unwrap();
    let good = lift_bibasic(&LiftStep::Lift3 { law: ExponentLaw { sign: 1, a_exp: 1, m_exp: 0 } }, &bib).unwrap();
    assert!(verify_pair(&good, 3, ORDER).unwrap().passed());
    let bad = lift_bibasic(&LiftStep::Lift3 { law: ExponentLaw { sign: 1, a_exp: 2, m_exp: 0 } }, &bib).unwrap();
    assert_eq!(verify_pair(&bad, 3, ORDER).unwrap().first_failure, Some(1));
    let _ = Monomial::one();
}
