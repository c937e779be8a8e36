//! Brute-force oracles shared by the integration tests. They rebuild theta
//! functions and factorials from raw truncated products and never call the
//! library's theta, factorial or kernel code.
#![allow(dead_code)]

use bailey_core::arith::{rat, Monomial, NomeSeries, Rat, RatExt};

pub const SLACK: i64 = 60;

pub fn c(n: i64, d: i64) -> Monomial {
    Monomial::constant(rat(n, d))
}

/// `theta(z; w^nome)` by multiplying many linear factors at a high working order.
pub fn theta(z: &Monomial, q_nome: u32, order: i64) -> NomeSeries {
    let big = order + SLACK;
    let one = rat(1, 1);
    let factor = |x: &Rat, e: i64| NomeSeries::from_terms([(0, one.clone()), (e, -x.clone())], big);
    if q_nome == 0 {
        return factor(z.coeff(), z.exp()).truncate(order);
    }
    let m = q_nome as i64;
    let mut acc = NomeSeries::one(big);
    let count = (big + z.exp().abs()) / m + 2;
    for j in 0..count {
        acc = &acc * &factor(z.coeff(), z.exp() + m * j);
        acc = &acc * &factor(&z.coeff().recip(), m * (j + 1) - z.exp());
    }
    acc
}

/// `(a; q, w^nome)_n` for `n >= 0`, left at the oracle's high working order.
pub fn fact(a: &Monomial, n: i64, q: &Rat, nome: u32, order: i64) -> NomeSeries {
    assert!(n >= 0);
    let mut acc = NomeSeries::one(order + SLACK);
    for j in 0..n {
        acc = &acc * &theta(&(a * Monomial::constant(q.powi(j))), nome, order);
    }
    acc
}

/// Quotient of products of (argument, q, nome, length) factorials times a monomial.
pub fn ratio(num: &[(Monomial, Rat, u32, i64)], den: &[(Monomial, Rat, u32, i64)], times: &Monomial, order: i64) -> NomeSeries {
    let mut top = NomeSeries::one(order + SLACK);
    for (a, q, nome, n) in num {
        top = &top * &fact(a, *n, q, *nome, order);
    }
    let mut bottom = NomeSeries::one(order + SLACK);
    for (a, q, nome, n) in den {
        bottom = &bottom * &fact(a, *n, q, *nome, order);
    }
    top.checked_div(&bottom).expect("oracle denominator vanished").mul_monomial(times).truncate(order)
}

/// `M_{n,r}(a, k; q, w^nome)` from raw products.
pub fn kernel_m(n: i64, r: i64, a: &Monomial, k: &Monomial, q: &Rat, nome: u32, order: i64) -> NomeSeries {
    let qm = Monomial::constant(q.clone());
    ratio(
        &[(k / a, q.clone(), nome, n - r), (k.clone(), q.clone(), nome, n + r)],
        &[(qm.clone(), q.clone(), nome, n - r), (a * &qm, q.clone(), nome, n + r)],
        &Monomial::one(),
        order,
    )
}

/// `beta_n = sum_r M_{n,r} alpha_r` with the oracle kernel.
pub fn forward(alpha: &[NomeSeries], n: usize, a: &Monomial, k: &Monomial, q: &Rat, nome: u32, order: i64) -> NomeSeries {
    let mut acc = NomeSeries::zero(order);
    for r in 0..=n {
        let m = kernel_m(n as i64, r as i64, a, k, q, nome, order);
        acc = &acc + &(&m * &alpha[r]).truncate(order);
    }
    acc
}
