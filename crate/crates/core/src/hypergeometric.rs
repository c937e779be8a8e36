//! Terminating basic and elliptic hypergeometric series, structural
//! predicates, and the closed-form summations used as oracles.

use num_traits::One;

use crate::arith::{Monomial, NomeSeries, Rat};
use crate::error::{Error, Result};
use crate::qobjects::{theta_factored, theta_valuation, FactorialSpec, Factored, QProduct};

/// Largest `N` tried when looking for a `q^-N` termination witness.
const MAX_WITNESS: i64 = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// Plain `r+1 phi r` with an explicit argument.
    Phi,
    /// `r+1 W r(a1; ...; q, z)`. The pair `a1^(1/2) q, -a1^(1/2) q` is folded
    /// into the weight `(1 - a1 q^2k)/(1 - a1)`, so the root is optional and
    /// only validated when given.
    VeryWellPoisedW { a1: Monomial, root: Option<Monomial> },
    /// `r+1 V r(a1; ...; q, p)` with weight `theta(a1 q^2k)/theta(a1)` and argument `q`.
    EllipticV { a1: Monomial },
}

/// A terminating series `sum_k weight_k (num; q, p)_k / (q, den; q, p)_k z^k`.
/// For the very-well-poised kinds `num` starts with `a1` and `den` holds
/// `a1 q / a_i` for each trailing parameter.
#[derive(Clone, Debug)]
pub struct SeriesSpec {
    numerator: Vec<Monomial>,
    denominator: Vec<Monomial>,
    argument: Monomial,
    spec: FactorialSpec,
    kind: SeriesKind,
    terms: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub well_poised: bool,
    pub very_well_poised: bool,
    pub balanced: bool,
}

/// Smallest `N >= 0` with `x = q^-N`, if any.
fn witness_of(x: &Monomial, q: &Rat) -> Option<usize> {
    if !x.is_p_free() {
        return None;
    }
    let inv = q.recip();
    let mut pow = Rat::one();
    for n in 0..=MAX_WITNESS {
        if &pow == x.coeff() {
            return Some(n as usize);
        }
        pow *= &inv;
    }
    None
}

fn find_witness(params: &[Monomial], q: &Rat) -> Result<usize> {
    params
        .iter()
        .filter_map(|x| witness_of(x, q))
        .min()
        .ok_or_else(|| Error::ConstraintViolation("series has no q^-n termination witness".into()))
}

impl SeriesSpec {
    /// `r+1 phi r[num; den; q, z]`.
    pub fn phi(numerator: Vec<Monomial>, denominator: Vec<Monomial>, argument: Monomial, spec: FactorialSpec) -> Result<Self> {
        let terms = find_witness(&numerator, spec.base())?;
        Ok(SeriesSpec { numerator, denominator, argument, spec, kind: SeriesKind::Phi, terms })
    }

    /// `r+1 W r(a1; params; q, z)` in basic mode.
    pub fn w(a1: Monomial, params: Vec<Monomial>, argument: Monomial, spec: FactorialSpec) -> Result<Self> {
        if !spec.is_basic() {
            return Err(Error::ConstraintViolation("W series need the basic (p = 0) mode".into()));
        }
        Self::very_well_poised(a1.clone(), params, argument, spec, SeriesKind::VeryWellPoisedW { a1, root: None })
    }

    /// `r+1 V r(a1; params; q, p)`.
    pub fn v(a1: Monomial, params: Vec<Monomial>, spec: FactorialSpec) -> Result<Self> {
        let q = Monomial::constant(spec.base().clone());
        Self::very_well_poised(a1.clone(), params, q, spec, SeriesKind::EllipticV { a1 })
    }

    fn very_well_poised(a1: Monomial, params: Vec<Monomial>, argument: Monomial, spec: FactorialSpec, kind: SeriesKind) -> Result<Self> {
        let terms = find_witness(&params, spec.base())?;
        let a1q = &a1 * spec.q_pow(1);
        let denominator = params.iter().map(|x| &a1q / x).collect();
        let mut numerator = Vec::with_capacity(params.len() + 1);
        numerator.push(a1);
        numerator.extend(params);
        Ok(SeriesSpec { numerator, denominator, argument, spec, kind, terms })
    }

    /// Declare `a1^(1/2)` for a W series; it must square to `a1`.
    pub fn with_root(mut self, root: Monomial) -> Result<Self> {
        match &mut self.kind {
            SeriesKind::VeryWellPoisedW { a1, root: slot } => {
                if &(&root * &root) != a1 {
                    return Err(Error::ConstraintViolation(format!("declared root {root} does not square to {a1}")));
                }
                *slot = Some(root);
                Ok(self)
            }
            _ => Err(Error::ConstraintViolation("roots are only declared for W series".into())),
        }
    }

    /// Override the number of summed terms (last index `n`); terms past the
    /// natural witness vanish anyway.
    pub fn with_terms(mut self, n: usize) -> Self {
        self.terms = n;
        self
    }

    pub fn terminating_index(&self) -> usize {
        self.terms
    }

    pub fn kind(&self) -> &SeriesKind {
        &self.kind
    }

    pub fn spec(&self) -> &FactorialSpec {
        &self.spec
    }

    /// Trailing parameters `a_6, ...` (or all numerator parameters for phi).
    fn trailing(&self) -> &[Monomial] {
        match self.kind {
            SeriesKind::Phi => &self.numerator,
            _ => &self.numerator[1..],
        }
    }

    fn a1(&self) -> Option<&Monomial> {
        match &self.kind {
            SeriesKind::Phi => None,
            SeriesKind::VeryWellPoisedW { a1, .. } | SeriesKind::EllipticV { a1 } => Some(a1),
        }
    }

    /// Structural predicates on the parameter multiset.
    pub fn classify(&self) -> Classification {
        let q = self.spec.q_pow(1);
        let (well_poised, very_well_poised) = match &self.kind {
            SeriesKind::Phi => phi_poisedness(&self.numerator, &self.denominator, &q),
            _ => (true, true),
        };
        let balanced = match self.a1() {
            Some(a1) => {
                let params = self.trailing();
                params.len() % 2 == 1 && {
                    let prod = params.iter().fold(q.clone(), |acc, x| &acc * x);
                    prod == (a1 * &q).powi((params.len() as i64 - 1) / 2)
                }
            }
            None => false,
        };
        Classification { well_poised, very_well_poised, balanced }
    }

    /// Sum the series exactly modulo `w^order`.
    fn evaluate(&self, order: i64) -> Result<NomeSeries> {
        let n = self.terms;
        let q = self.spec.q_pow(1);
        let mut num_rows = Vec::with_capacity(n);
        let mut den_rows = Vec::with_capacity(n);
        for j in 0..n {
            let qj = self.spec.q_pow(j as i64);
            num_rows.push(self.numerator.iter().map(|x| x * &qj).collect::<Vec<_>>());
            let mut den = vec![&q * &qj];
            den.extend(self.denominator.iter().map(|x| x * &qj));
            den_rows.push(den);
        }
        let weight_spec = &self.spec;
        let weight = |k: usize| -> Option<(Monomial, Monomial)> {
            self.a1().map(|a1| (a1 * self.spec.q_pow(2 * k as i64), a1.clone()))
        };
        // Valuation of every term; a vanishing numerator ends the series.
        let mut vals = Vec::with_capacity(n + 1);
        let mut running = 0;
        let mut last = n;
        for k in 0..=n {
            let mut v = running + self.argument.exp() * k as i64;
            if let Some((top, bottom)) = weight(k) {
                let wb = theta_valuation(&bottom, weight_spec).ok_or(Error::DivisionByZeroSeries { order })?;
                match theta_valuation(&top, weight_spec) {
                    Some(wt) => v += wt - wb,
                    None => v = i64::MAX,
                }
            }
            vals.push(v);
            if k == n {
                break;
            }
            let mut zero = false;
            for x in &num_rows[k] {
                match theta_valuation(x, &self.spec) {
                    Some(t) => running += t,
                    None => zero = true,
                }
            }
            for y in &den_rows[k] {
                if !zero {
                    running -= theta_valuation(y, &self.spec).ok_or(Error::DivisionByZeroSeries { order })?;
                }
            }
            if zero {
                last = k;
                break;
            }
        }
        let lowest = vals.iter().copied().filter(|&v| v != i64::MAX).min().unwrap_or(order);
        let rel = order - lowest.min(order);
        if rel <= 0 {
            return Ok(NomeSeries::zero(order));
        }
        let mut acc = NomeSeries::zero(order);
        let mut running = Factored::one(rel);
        for k in 0..=last {
            if vals[k] != i64::MAX && vals[k] < order {
                let mut term = running.clone();
                if let Some((top, bottom)) = weight(k) {
                    term.mul(&theta_factored(&top, weight_spec, rel).expect("checked nonzero"));
                    term.div(&theta_factored(&bottom, weight_spec, rel).expect("checked nonzero"))?;
                }
                acc = &acc + &term.to_series(order);
            }
            if k == last {
                break;
            }
            for x in &num_rows[k] {
                running.mul(&theta_factored(x, &self.spec, rel).expect("checked nonzero"));
            }
            for y in &den_rows[k] {
                running.div(&theta_factored(y, &self.spec, rel).expect("checked nonzero"))?;
            }
            running.scale(&self.argument);
        }
        Ok(acc)
    }
}

/// Well-poised: `q a1 = a_(i+1) b_i` for some matching of the parameters.
/// Very-well-poised additionally contains `a1^(1/2) q, -a1^(1/2) q` over
/// `a1^(1/2), -a1^(1/2)`.
fn phi_poisedness(num: &[Monomial], den: &[Monomial], q: &Monomial) -> (bool, bool) {
    if num.len() != den.len() + 1 {
        return (false, false);
    }
    let a1q = &num[0] * q;
    let mut pool: Vec<Monomial> = den.to_vec();
    for x in &num[1..] {
        let partner = &a1q / x;
        match pool.iter().position(|y| y == &partner) {
            Some(i) => {
                pool.swap_remove(i);
            }
            None => return (false, false),
        }
    }
    let target = &num[0] * &(q * q);
    let vwp = num[1..].iter().any(|x| {
        (x * x) == target && num[1..].contains(&-x) && den.contains(&(x / q)) && den.contains(&(-x / q))
    });
    (true, vwp)
}

pub fn eval_phi(spec: &SeriesSpec, order: i64) -> Result<NomeSeries> {
    if spec.kind != SeriesKind::Phi {
        return Err(Error::ConstraintViolation("eval_phi needs a phi series".into()));
    }
    spec.evaluate(order)
}

pub fn eval_w(spec: &SeriesSpec, order: i64) -> Result<NomeSeries> {
    if !matches!(spec.kind, SeriesKind::VeryWellPoisedW { .. }) {
        return Err(Error::ConstraintViolation("eval_w needs a W series".into()));
    }
    spec.evaluate(order)
}

pub fn eval_v(spec: &SeriesSpec, order: i64) -> Result<NomeSeries> {
    if !matches!(spec.kind, SeriesKind::EllipticV { .. }) {
        return Err(Error::ConstraintViolation("eval_v needs a V series".into()));
    }
    spec.evaluate(order)
}

pub fn classify(spec: &SeriesSpec) -> Classification {
    spec.classify()
}

fn basic(q: &Rat) -> Result<FactorialSpec> {
    FactorialSpec::basic(q.clone())
}

/// `4 phi 3[aq, a^2, b, q^-n; a, c, a^2 b q^(2-n)/c; q, q]` in closed form,
/// valid when `c = -abq` or `c = a^2 q/b`.
pub fn sum_lemma1(a: &Monomial, b: &Monomial, c: &Monomial, n: usize, q: &Rat) -> Result<Rat> {
    let spec = basic(q)?;
    let qm = Monomial::constant(q.clone());
    let a2 = a * a;
    if c != &-(a * b * &qm) && c != &(&a2 * &qm / b) {
        return Err(Error::ConstraintViolation(format!("c = {c} is neither -abq nor a^2 q/b")));
    }
    let n = n as i64;
    let a2q = &a2 * &qm;
    QProduct::new()
        .theta(&-(a * spec.q_pow(n) / b), &spec)
        .over_theta(&-(a / b), &spec)
        .facts(&[c / &a2q, c / (b * &qm)], n, &spec)
        .over_facts(&[c.clone(), c / (&a2q * b)], n, &spec)
        .eval(1)?
        .constant_term()
}

/// The left side of the `4 phi 3` summation.
pub fn lemma1_lhs(a: &Monomial, b: &Monomial, c: &Monomial, n: usize, q: &Rat) -> Result<SeriesSpec> {
    let spec = basic(q)?;
    let qm = spec.q_pow(1);
    let a2 = a * a;
    SeriesSpec::phi(
        vec![a * &qm, a2.clone(), b.clone(), spec.q_pow(-(n as i64))],
        vec![a.clone(), c.clone(), &a2 * b * spec.q_pow(2 - n as i64) / c],
        qm,
        spec,
    )
    .map(|s| s.with_terms(n))
}

/// `8 W 7(a; b, a q^n/b^(1/2), -a q^n/b^(1/2), q^-n, -q^-n; q, q^2)` in closed form.
pub fn sum_lemma2(a: &Monomial, b: &Monomial, b_root: Option<&Monomial>, n: usize, q: &Rat) -> Result<Rat> {
    check_root(b, b_root, "b")?;
    let spec = basic(q)?;
    let s2 = spec.squared()?;
    let n = n as i64;
    let qm = spec.q_pow(1);
    let a2q2 = &(a * a) * &(&qm * &qm);
    QProduct::new()
        .fact(&-(a / b), 2 * n, &spec)
        .over_fact(&-(a * &qm), 2 * n, &spec)
        .facts(&[a2q2.clone(), b.clone()], n, &s2)
        .over_facts(&[b.recip(), &a2q2 / &(b * b)], n, &s2)
        .times(&(&qm / b).powi(n))
        .eval(1)?
        .constant_term()
}

/// The left side of the `8 W 7` summation, built from the declared root.
pub fn lemma2_lhs(a: &Monomial, b: &Monomial, b_root: Option<&Monomial>, n: usize, q: &Rat) -> Result<SeriesSpec> {
    let root = check_root(b, b_root, "b")?;
    let spec = basic(q)?;
    let n = n as i64;
    let t = a * spec.q_pow(n) / root;
    let qn = spec.q_pow(-n);
    let arg = spec.q_pow(2);
    SeriesSpec::w(a.clone(), vec![b.clone(), t.clone(), -t, qn.clone(), -qn], arg, spec)
}

fn check_root<'a>(target: &Monomial, root: Option<&'a Monomial>, name: &str) -> Result<&'a Monomial> {
    let root = root.ok_or_else(|| Error::MissingRoot(format!("{name}^(1/2)")))?;
    if &(root * root) != target {
        return Err(Error::ConstraintViolation(format!("declared {name}^(1/2) = {root} does not square to {target}")));
    }
    Ok(root)
}

/// Elliptic Jackson sum: `10 V 9(a; b, c, d, e, q^-n; q, p)` in closed form,
/// valid when `bcde = a^2 q^(n+1)`.
pub fn sum_elliptic_jackson(
    a: &Monomial,
    b: &Monomial,
    c: &Monomial,
    d: &Monomial,
    e: &Monomial,
    n: usize,
    spec: &FactorialSpec,
    order: i64,
) -> Result<NomeSeries> {
    let n = n as i64;
    let aq = a * spec.q_pow(1);
    if (&(b * c) * &(d * e)) != (&(a * a) * &spec.q_pow(n + 1)) {
        return Err(Error::ConstraintViolation("balance bcde = a^2 q^(n+1) fails".into()));
    }
    QProduct::new()
        .facts(&[aq.clone(), &aq / &(b * c), &aq / &(b * d), &aq / &(c * d)], n, spec)
        .over_facts(&[&aq / b, &aq / c, &aq / d, &aq / &(&(b * c) * d)], n, spec)
        .eval(order)
}

/// Closed form of the quadratic elliptic summation mixing nomes `p` and `p^2`.
pub fn sum_new_bibasic(a: &Monomial, b: &Monomial, n: usize, spec: &FactorialSpec, order: i64) -> Result<NomeSeries> {
    let n = n as i64;
    let s2 = spec.squared()?;
    let q = spec.q_pow(1);
    let bq = b * &q;
    let x = -(a / &bq);
    QProduct::new()
        .theta(&(&x * spec.q_pow(2 * n)), spec)
        .over_theta(&x, spec)
        .facts(&[a * &q, x.clone()], n, spec)
        .over_facts(&[-q.clone(), bq.recip()], n, spec)
        .fact(&(&bq * &q).recip(), n, &s2)
        .over_fact(&(&(a * a) * &(&q * &q) / b), n, &s2)
        .times(&q.powi(n))
        .eval(order)
}

/// Direct left side of the quadratic summation: each term mixes
/// `(.; q^2, p^2)` and `(.; q, p)` factorials.
pub fn new_bibasic_lhs(a: &Monomial, b: &Monomial, n: usize, spec: &FactorialSpec, order: i64) -> Result<NomeSeries> {
    let n = n as i64;
    let s2 = spec.squared()?;
    let q = spec.q_pow(1);
    let q2 = &q * &q;
    let a2 = a * a;
    let mut acc = NomeSeries::zero(order);
    for k in 0..=n {
        let term = QProduct::new()
            .theta(&(&a2 * spec.q_pow(4 * k)), &s2)
            .over_theta(&a2, &s2)
            .facts(&[a2.clone(), b.clone()], k, &s2)
            .over_facts(&[q2.clone(), &(&a2 * &q2) / b], k, &s2)
            .facts(&[a * spec.q_pow(n - 1) / b, spec.q_pow(-n)], k, spec)
            .over_facts(&[b * spec.q_pow(2 - n), a * spec.q_pow(n + 1)], k, spec)
            .times(&q2.powi(k))
            .eval(order)?;
        acc = &acc + &term;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, RatExt};

    fn m(n: i64, d: i64) -> Monomial {
        Monomial::constant(rat(n, d))
    }

    #[test]
    fn zero_length_series_are_one() {
        let spec = FactorialSpec::basic(rat(2, 7)).unwrap();
        let phi = SeriesSpec::phi(vec![m(1, 1), m(3, 5)], vec![m(4, 9)], m(5, 2), spec.clone()).unwrap();
        assert_eq!(phi.terminating_index(), 0);
        assert_eq!(eval_phi(&phi, 8).unwrap(), NomeSeries::one(8));
        let v = SeriesSpec::v(m(3, 4), vec![m(1, 1), m(5, 3)], FactorialSpec::elliptic(rat(2, 7)).unwrap()).unwrap();
        assert_eq!(eval_v(&v, 8).unwrap(), NomeSeries::one(8));
    }

    #[test]
    fn one_phi_zero_two_terms() {
        let q = rat(3, 5);
        let z = rat(-7, 4);
        let spec = FactorialSpec::basic(q.clone()).unwrap();
        let s = SeriesSpec::phi(vec![Monomial::constant(q.recip())], vec![], Monomial::constant(z.clone()), spec).unwrap();
        let expect = Rat::one() + (Rat::one() - q.recip()) / (Rat::one() - &q) * z;
        assert_eq!(eval_phi(&s, 4).unwrap(), NomeSeries::constant(expect, 4));
    }

    #[test]
    fn witness_picks_smallest() {
        let q = rat(2, 3);
        let spec = FactorialSpec::basic(q.clone()).unwrap();
        let s = SeriesSpec::phi(vec![Monomial::constant(q.powi(-4)), Monomial::constant(q.powi(-2))], vec![m(5, 1)], m(1, 1), spec).unwrap();
        assert_eq!(s.terminating_index(), 2);
        let none = SeriesSpec::phi(vec![m(5, 1)], vec![], m(1, 1), FactorialSpec::basic(q).unwrap());
        assert!(matches!(none, Err(Error::ConstraintViolation(_))));
    }

    #[test]
    fn lemma1_requires_constraint() {
        let q = rat(2, 5);
        assert!(sum_lemma1(&m(3, 1), &m(5, 7), &m(1, 2), 2, &q).is_err());
        assert_eq!(sum_lemma1(&m(3, 1), &m(5, 7), &(-(&m(3, 1) * &m(5, 7)) * m(2, 5)), 0, &q).unwrap(), Rat::one());
    }

    #[test]
    fn lemma2_root_handling() {
        let q = rat(2, 5);
        assert!(matches!(sum_lemma2(&m(3, 7), &m(4, 1), None, 1, &q), Err(Error::MissingRoot(_))));
        assert!(sum_lemma2(&m(3, 7), &m(4, 1), Some(&m(3, 1)), 1, &q).is_err());
        assert_eq!(sum_lemma2(&m(3, 7), &m(4, 1), Some(&m(2, 1)), 0, &q).unwrap(), Rat::one());
    }

    #[test]
    fn w_series_root_must_square() {
        let spec = FactorialSpec::basic(rat(2, 5)).unwrap();
        let s = SeriesSpec::w(m(9, 4), vec![m(1, 1)], m(1, 1), spec).unwrap();
        assert!(s.clone().with_root(m(3, 2)).is_ok());
        assert!(s.clone().with_root(m(-3, 2)).is_ok());
        assert!(s.with_root(m(2, 1)).is_err());
    }
}
