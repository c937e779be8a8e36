mod common;

use bailey_core::arith::{rat, Monomial, NomeSeries, Rat};
use bailey_core::hypergeometric::{eval_phi, eval_v, eval_w, SeriesSpec};
use bailey_core::qobjects::FactorialSpec;
use common::c;

const ORDER: i64 = 8;

/// Very-well-poised sum from raw products: nome 0 gives W, nome 2 gives V.
fn vwp_oracle(a: &Monomial, params: &[Monomial], z: &Monomial, q: &Rat, nome: u32, terms: usize) -> NomeSeries {
    let qm = Monomial::constant(q.clone());
    let aq = a * &qm;
    let mut acc = NomeSeries::zero(ORDER);
    for j in 0..=terms as i64 {
        let mut num = vec![(a.clone(), q.clone(), nome, j)];
        let mut den = vec![(qm.clone(), q.clone(), nome, j)];
        for x in params {
            num.push((x.clone(), q.clone(), nome, j));
            den.push((&aq / x, q.clone(), nome, j));
        }
        let facts = common::ratio(&num, &den, &z.powi(j), ORDER);
        let shift = common::theta(&(a * &qm.powi(2 * j)), nome, ORDER).checked_div(&common::theta(a, nome, ORDER)).unwrap();
        acc = &acc + &(&facts * &shift).truncate(ORDER);
    }
    acc
}

fn basic(q: &Rat) -> FactorialSpec {
    FactorialSpec::basic(q.clone()).unwrap()
}

#[test]
fn w_series_matches_raw_sum() {
    let q = rat(3, 5);
    let (a, b, c2) = (c(7, 2), c(-2, 3), c(5, 4));
    for n in 0..=4 {
        let qn = Monomial::constant(q.clone()).powi(-n);
        let params = vec![b.clone(), c2.clone(), qn];
        let z = c(2, 9);
        let got = eval_w(&SeriesSpec::w(a.clone(), params.clone(), z.clone(), basic(&q)).unwrap(), ORDER).unwrap();
        assert!(got.eq_mod(&vwp_oracle(&a, &params, &z, &q, 0, n as usize)), "n={n}");
    }
}

#[test]
fn rogers_six_phi_five_sum() {
    let q = rat(2, 7);
    let qm = Monomial::constant(q.clone());
    let (a, b, c2) = (c(3, 4), c(-5, 2), c(2, 9));
    for n in 0..=4i64 {
        let z = &(&a * &qm.powi(n + 1)) / &(&b * &c2);
        let params = vec![b.clone(), c2.clone(), qm.powi(-n)];
        let aq = &a * &qm;
        let closed = common::ratio(
            &[(aq.clone(), q.clone(), 0, n), (&aq / &(&b * &c2), q.clone(), 0, n)],
            &[(&aq / &b, q.clone(), 0, n), (&aq / &c2, q.clone(), 0, n)],
            &Monomial::one(),
            ORDER,
        );
        assert!(vwp_oracle(&a, &params, &z, &q, 0, n as usize).eq_mod(&closed), "oracle n={n}");
        let got = eval_w(&SeriesSpec::w(a.clone(), params, z, basic(&q)).unwrap(), ORDER).unwrap();
        assert!(got.eq_mod(&closed), "library n={n}");
    }
}

#[test]
fn elliptic_jackson_sum() {
    let q = rat(3, 7);
    let qm = Monomial::constant(q.clone());
    let spec = FactorialSpec::elliptic(q.clone()).unwrap();
    let (a, b, c2, d) = (c(5, 3), c(-2, 5), c(7, 4), Monomial::new(rat(3, 2), 1));
    for n in 0..=3i64 {
        let e = &(&(&a * &a) * &qm.powi(n + 1)) / &(&(&b * &c2) * &d);
        let params = vec![b.clone(), c2.clone(), d.clone(), e.clone(), qm.powi(-n)];
        let aq = &a * &qm;
        let fact = |x: Monomial| (x, q.clone(), 2u32, n);
        let closed = common::ratio(
            &[fact(aq.clone()), fact(&aq / &(&b * &c2)), fact(&aq / &(&b * &d)), fact(&aq / &(&c2 * &d))],
            &[fact(&aq / &b), fact(&aq / &c2), fact(&aq / &d), fact(&aq / &(&(&b * &c2) * &d))],
            &Monomial::one(),
            ORDER,
        );
        let oracle = vwp_oracle(&a, &params, &qm, &q, 2, n as usize);
        assert!(oracle.eq_mod(&closed), "oracle n={n}");
        let got = eval_v(&SeriesSpec::v(a.clone(), params, spec.clone()).unwrap(), ORDER).unwrap();
        assert!(got.eq_mod(&closed), "library n={n}");
    }
}

#[test]
fn v_series_degenerates_to_w_at_zero_nome() {
    let q = rat(2, 5);
    let qm = Monomial::constant(q.clone());
    let spec = FactorialSpec::elliptic(q.clone()).unwrap();
    let a = c(9, 4);
    for n in 0..=4 {
        let params = vec![c(-3, 2), c(5, 7), c(2, 3), c(-7, 3), qm.powi(-n)];
        let v = eval_v(&SeriesSpec::v(a.clone(), params.clone(), spec.clone()).unwrap(), ORDER).unwrap();
        let w = eval_w(&SeriesSpec::w(a.clone(), params, qm.clone(), basic(&q)).unwrap(), ORDER).unwrap();
        assert_eq!(v.constant_term().unwrap(), w.constant_term().unwrap(), "n={n}");
    }
}

#[test]
fn q_binomial_sum() {
    // 1 phi 0(q^-n; ; q, z) = (z q^-n; q)_n
    let q = rat(3, 4);
    let qm = Monomial::constant(q.clone());
    let z = c(5, 3);
    for n in 0..=5i64 {
        let lhs = eval_phi(&SeriesSpec::phi(vec![qm.powi(-n)], vec![], z.clone(), basic(&q)).unwrap(), ORDER).unwrap();
        let rhs = common::fact(&(&z * &qm.powi(-n)), n, &q, 0, ORDER).truncate(ORDER);
        assert!(lhs.eq_mod(&rhs), "n={n}");
    }
}

#[test]
fn nonterminating_series_are_rejected() {
    let q = rat(3, 4);
    assert!(SeriesSpec::w(c(2, 3), vec![c(5, 7), c(1, 3)], c(1, 2), basic(&q)).is_err());
    let spec = FactorialSpec::elliptic(q).unwrap();
    assert!(SeriesSpec::w(c(2, 3), vec![c(3, 4).powi(-2)], c(1, 2), spec).is_err());
}
