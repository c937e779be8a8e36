//! Theta functions and basic/elliptic q-shifted factorials.
//!
//! Every theta value is assembled as `scalar * w^shift * unit`, where `unit`
//! has constant term 1. Products and quotients of thetas are then computed on
//! the unit parts at a fixed relative precision, so negative valuations
//! (parameters such as `d/p`) never eat into the requested truncation order.

use num_traits::{One, Zero};

use crate::arith::{Monomial, NomeSeries, Rat, RatExt};
use crate::error::{Error, Result};

/// Base `q` and nome `w^nome_exponent` of a factorial. Exponent 0 is the
/// basic (p = 0) mode, where `theta(z) = 1 - z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactorialSpec {
    base: Rat,
    nome: u32,
}

impl FactorialSpec {
    pub fn new(base: Rat, nome_exponent: u32) -> Result<Self> {
        if base.is_zero() || base.is_one() || (-&base).is_one() {
            return Err(Error::ConstraintViolation(format!(
                "factorial base {} must avoid 0 and +-1",
                base.render()
            )));
        }
        if !nome_exponent.is_multiple_of(2) {
            return Err(Error::ConstraintViolation(format!(
                "nome exponent {nome_exponent} must be even"
            )));
        }
        Ok(FactorialSpec { base, nome: nome_exponent })
    }

    pub fn basic(q: Rat) -> Result<Self> {
        Self::new(q, 0)
    }

    /// Nome `p = w^2`.
    pub fn elliptic(q: Rat) -> Result<Self> {
        Self::new(q, 2)
    }

    pub fn base(&self) -> &Rat {
        &self.base
    }

    pub fn nome_exponent(&self) -> u32 {
        self.nome
    }

    pub fn is_basic(&self) -> bool {
        self.nome == 0
    }

    /// Same nome, base `q^i`.
    pub fn with_base_power(&self, i: i64) -> Result<Self> {
        Self::new(self.base.powi(i), self.nome)
    }

    /// Base `q^2` and nome `p^2`.
    pub fn squared(&self) -> Result<Self> {
        Self::new(self.base.powi(2), self.nome * 2)
    }

    pub fn with_nome(&self, nome_exponent: u32) -> Result<Self> {
        Self::new(self.base.clone(), nome_exponent)
    }

    /// Base `q^i` as a monomial.
    pub fn q_pow(&self, i: i64) -> Monomial {
        Monomial::constant(self.base.powi(i))
    }

    /// The nome `p` itself as a monomial (`w^0 = 1` in basic mode).
    pub fn nome(&self) -> Monomial {
        Monomial::w(self.nome as i64)
    }

    /// `p^(1/2)`, which is an integer power of `w` because the nome exponent is even.
    pub fn half_nome(&self) -> Monomial {
        Monomial::w(self.nome as i64 / 2)
    }

    /// The spec with every nome power halved (`p -> p^(1/2)`).
    pub fn sqrt_nome(&self) -> Result<Self> {
        Self::new(self.base.clone(), self.nome / 2)
    }
}

/// A value `coeff * w^shift * unit`, where `unit` has constant term 1 and is
/// known to a fixed relative precision.
#[derive(Clone, Debug)]
pub(crate) struct Factored {
    pub coeff: Rat,
    pub shift: i64,
    pub unit: NomeSeries,
}

impl Factored {
    pub fn one(rel: i64) -> Self {
        Factored { coeff: Rat::one(), shift: 0, unit: NomeSeries::one(rel) }
    }

    pub fn mul(&mut self, other: &Factored) {
        self.coeff *= &other.coeff;
        self.shift += other.shift;
        self.unit = &self.unit * &other.unit;
    }

    pub fn div(&mut self, other: &Factored) -> Result<()> {
        self.coeff /= &other.coeff;
        self.shift -= other.shift;
        self.unit = self.unit.checked_div(&other.unit)?;
        Ok(())
    }

    pub fn scale(&mut self, m: &Monomial) {
        self.coeff *= m.coeff();
        self.shift += m.exp();
    }

    /// Exact modulo `w^order` provided `shift + rel >= order`.
    pub fn to_series(&self, order: i64) -> NomeSeries {
        self.unit.mul_monomial(&Monomial::new(self.coeff.clone(), self.shift)).truncate(order)
    }
}

/// Linear factors `(1 - x w^f)` of the theta product, listed until `f`
/// reaches `limit` in both halves.
fn theta_factors(z: &Monomial, spec: &FactorialSpec, limit: i64) -> Vec<(Rat, i64)> {
    let c = z.coeff();
    let e = z.exp();
    if spec.is_basic() {
        return vec![(c.clone(), e)];
    }
    let m = spec.nome as i64;
    let inv = c.recip();
    let mut out = Vec::new();
    let mut j = 0;
    while e + m * j < limit {
        out.push((c.clone(), e + m * j));
        j += 1;
    }
    let mut j = 0;
    while m * (j + 1) - e < limit {
        out.push((inv.clone(), m * (j + 1) - e));
        j += 1;
    }
    out
}

/// Valuation of `theta(z)`, or `None` when it vanishes identically
/// (for instance `z = 1` or `z = p^k`).
pub fn theta_valuation(z: &Monomial, spec: &FactorialSpec) -> Option<i64> {
    assert!(!z.is_zero(), "theta of zero");
    let mut v = 0;
    for (x, f) in theta_factors(z, spec, 1) {
        if f < 0 {
            v += f;
        } else if f == 0 && x.is_one() {
            return None;
        }
    }
    Some(v)
}

/// `theta(z)` in factored form with its unit known modulo `w^rel`.
pub(crate) fn theta_factored(z: &Monomial, spec: &FactorialSpec, rel: i64) -> Option<Factored> {
    let mut scalar = Rat::one();
    let mut shift = 0;
    let mut units: Vec<(Rat, i64)> = Vec::new();
    // Negative exponents come first in both halves, so every factor that
    // shifts the valuation is seen before `rel` cuts the list off.
    let reach = rel.max(1) + theta_factors(z, spec, 1).iter().map(|&(_, f)| -f.min(0)).sum::<i64>();
    for (x, f) in theta_factors(z, spec, reach) {
        match f.cmp(&0) {
            std::cmp::Ordering::Less => {
                // 1 - x w^f = -x w^f (1 - w^-f / x)
                scalar *= -&x;
                shift += f;
                units.push((x.recip(), -f));
            }
            std::cmp::Ordering::Equal => {
                let s = Rat::one() - &x;
                if s.is_zero() {
                    return None;
                }
                scalar *= s;
            }
            std::cmp::Ordering::Greater => units.push((x, f)),
        }
    }
    if rel <= 0 {
        return Some(Factored { coeff: scalar, shift, unit: NomeSeries::zero(rel) });
    }
    let len = rel as usize;
    let mut dense = vec![Rat::zero(); len];
    dense[0] = Rat::one();
    for (y, g) in units {
        let g = g as usize;
        if g >= len {
            continue;
        }
        for i in (g..len).rev() {
            if !dense[i - g].is_zero() {
                let t = &y * &dense[i - g];
                dense[i] -= t;
            }
        }
    }
    let unit = NomeSeries::from_terms(dense.into_iter().enumerate().map(|(i, c)| (i as i64, c)), rel);
    Some(Factored { coeff: scalar, shift, unit })
}

/// `theta(z; p) = prod_{j>=0} (1 - z p^j)(1 - p^(j+1)/z)`, exact modulo `w^order`.
/// In basic mode this is `1 - z`.
pub fn theta(z: &Monomial, spec: &FactorialSpec, order: i64) -> Result<NomeSeries> {
    if z.is_zero() {
        return Err(Error::ConstraintViolation("theta of zero argument".into()));
    }
    QProduct::new().theta(z, spec).eval(order)
}

/// `(a; q, p)_n` for `n >= 0`.
pub fn qfact(a: &Monomial, n: usize, spec: &FactorialSpec, order: i64) -> Result<NomeSeries> {
    QProduct::new().fact(a, n as i64, spec).eval(order)
}

/// `(a; q, p)_n` for any integer `n`, with `(a)_{-n} = 1 / (a q^-n)_n`.
pub fn qfact_signed(a: &Monomial, n: i64, spec: &FactorialSpec, order: i64) -> Result<NomeSeries> {
    QProduct::new().fact(a, n, spec).eval(order)
}

/// `(a_1, ..., a_k; q, p)_n`.
pub fn qfact_multi(args: &[Monomial], n: usize, spec: &FactorialSpec, order: i64) -> Result<NomeSeries> {
    QProduct::new().facts(args, n as i64, spec).eval(order)
}

/// `theta(a q^(2k)) / theta(a)`.
pub fn theta_shift_quotient(a: &Monomial, k: usize, spec: &FactorialSpec, order: i64) -> Result<NomeSeries> {
    let shifted = a * spec.q_pow(2 * k as i64);
    QProduct::new().theta(&shifted, spec).over_theta(a, spec).eval(order)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftDirection {
    Add,
    Subtract,
}

/// `(a)_{n+k}` as `(a)_n (a q^n)_k`, or `(a)_{n-k}` as
/// `(a)_n (-q^(1-n)/a)^k q^(k(k-1)/2) / (q^(1-n)/a)_k`.
pub fn qfact_shift(
    a: &Monomial,
    n: i64,
    k: i64,
    spec: &FactorialSpec,
    direction: ShiftDirection,
    order: i64,
) -> Result<NomeSeries> {
    if n < 0 || k < 0 {
        return Err(Error::IndexRange(format!("shift needs n, k >= 0 (got n={n}, k={k})")));
    }
    match direction {
        ShiftDirection::Add => {
            let tail = a * spec.q_pow(n);
            QProduct::new().fact(a, n, spec).fact(&tail, k, spec).eval(order)
        }
        ShiftDirection::Subtract => {
            if k > n {
                return Err(Error::IndexRange(format!("(a)_(n-k) with k={k} > n={n}")));
            }
            let reflected = spec.q_pow(1 - n) / a;
            let sign = (-&reflected).powi(k) * spec.q_pow(k * (k - 1) / 2);
            QProduct::new().fact(a, n, spec).over_fact(&reflected, k, spec).times(&sign).eval(order)
        }
    }
}

/// A quotient of theta products times a monomial, evaluated in one pass.
#[derive(Clone, Debug, Default)]
pub struct QProduct {
    num: Vec<(Monomial, FactorialSpec)>,
    den: Vec<(Monomial, FactorialSpec)>,
    scalar: Option<Monomial>,
}

impl QProduct {
    pub fn new() -> Self {
        Self::default()
    }

    fn push_fact(&mut self, a: &Monomial, n: i64, spec: &FactorialSpec, invert: bool) {
        let (list, other) = if invert { (&mut self.den, &mut self.num) } else { (&mut self.num, &mut self.den) };
        if n >= 0 {
            for j in 0..n {
                list.push((a * spec.q_pow(j), spec.clone()));
            }
        } else {
            for j in 0..-n {
                other.push((a * spec.q_pow(n + j), spec.clone()));
            }
        }
    }

    /// Multiply by `(a; q, p)_n`; negative `n` allowed.
    pub fn fact(mut self, a: &Monomial, n: i64, spec: &FactorialSpec) -> Self {
        self.push_fact(a, n, spec, false);
        self
    }

    pub fn over_fact(mut self, a: &Monomial, n: i64, spec: &FactorialSpec) -> Self {
        self.push_fact(a, n, spec, true);
        self
    }

    pub fn facts(mut self, args: &[Monomial], n: i64, spec: &FactorialSpec) -> Self {
        for a in args {
            self.push_fact(a, n, spec, false);
        }
        self
    }

    pub fn over_facts(mut self, args: &[Monomial], n: i64, spec: &FactorialSpec) -> Self {
        for a in args {
            self.push_fact(a, n, spec, true);
        }
        self
    }

    pub fn theta(mut self, z: &Monomial, spec: &FactorialSpec) -> Self {
        self.num.push((z.clone(), spec.clone()));
        self
    }

    pub fn over_theta(mut self, z: &Monomial, spec: &FactorialSpec) -> Self {
        self.den.push((z.clone(), spec.clone()));
        self
    }

    pub fn times(mut self, m: &Monomial) -> Self {
        self.scalar = Some(match self.scalar {
            Some(s) => &s * m,
            None => m.clone(),
        });
        self
    }

    /// Exact modulo `w^order`.
    pub fn eval(&self, order: i64) -> Result<NomeSeries> {
        let scalar = self.scalar.clone().unwrap_or_else(Monomial::one);
        let mut den_val = 0;
        for (z, spec) in &self.den {
            if z.is_zero() {
                return Err(Error::DivisionByZeroSeries { order });
            }
            match theta_valuation(z, spec) {
                Some(v) => den_val += v,
                None => return Err(Error::DivisionByZeroSeries { order }),
            }
        }
        let mut num_val = 0;
        for (z, spec) in &self.num {
            if z.is_zero() {
                return Err(Error::ConstraintViolation("theta of zero argument".into()));
            }
            match theta_valuation(z, spec) {
                Some(v) => num_val += v,
                None => return Ok(NomeSeries::zero(order)),
            }
        }
        if scalar.is_zero() {
            return Ok(NomeSeries::zero(order));
        }
        let val = num_val - den_val + scalar.exp();
        let rel = order - val;
        if rel <= 0 {
            return Ok(NomeSeries::zero(order));
        }
        let mut acc = Factored::one(rel);
        acc.scale(&scalar);
        for (z, spec) in &self.num {
            acc.mul(&theta_factored(z, spec, rel).expect("valuation already checked"));
        }
        if !self.den.is_empty() {
            let mut den = Factored::one(rel);
            for (z, spec) in &self.den {
                den.mul(&theta_factored(z, spec, rel).expect("valuation already checked"));
            }
            acc.div(&den)?;
        }
        Ok(acc.to_series(order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn mono(n: i64, d: i64) -> Monomial {
        Monomial::constant(rat(n, d))
    }

    fn ell(q: Rat) -> FactorialSpec {
        FactorialSpec::elliptic(q).unwrap()
    }

    /// Brute-force truncated product with extra factors, independent of `theta_factored`.
    fn theta_oracle(z: &Monomial, nome: i64, order: i64) -> NomeSeries {
        let big = order + 40;
        let mut acc = NomeSeries::one(big);
        for j in 0..12 {
            let f1 = NomeSeries::from_terms([(0, rat(1, 1)), (z.exp() + nome * j, -z.coeff().clone())], big);
            let f2 = NomeSeries::from_terms([(0, rat(1, 1)), (nome * (j + 1) - z.exp(), -z.coeff().recip())], big);
            acc = &(&acc * &f1) * &f2;
        }
        acc.truncate(order)
    }

    #[test]
    fn theta_basic_mode() {
        let spec = FactorialSpec::basic(rat(3, 1)).unwrap();
        assert_eq!(theta(&mono(2, 1), &spec, 8).unwrap(), NomeSeries::constant(rat(-1, 1), 8));
    }

    #[test]
    fn theta_two_low_order() {
        let got = theta(&mono(2, 1), &ell(rat(3, 1)), 4).unwrap();
        let expect = NomeSeries::from_terms([(0, rat(-1, 1)), (2, rat(5, 2))], 4);
        assert_eq!(got, expect);
    }

    #[test]
    fn theta_zeros() {
        let spec = ell(rat(3, 1));
        assert!(theta(&mono(1, 1), &spec, 12).unwrap().is_zero());
        assert!(theta(&Monomial::w(2), &spec, 12).unwrap().is_zero());
        assert!(theta(&Monomial::w(-4), &spec, 12).unwrap().is_zero());
    }

    #[test]
    fn theta_matches_product_oracle() {
        for (z, nome) in [
            (Monomial::new(rat(2, 3), 0), 2),
            (Monomial::new(rat(-5, 2), -1), 2),
            (Monomial::new(rat(7, 3), -2), 4),
            (Monomial::new(rat(3, 4), 3), 2),
            (Monomial::new(rat(-1, 5), -5), 4),
        ] {
            let spec = FactorialSpec::new(rat(3, 7), nome as u32).unwrap();
            let got = theta(&z, &spec, 14).unwrap();
            let expect = theta_oracle(&z, nome, 14);
            assert!(got.eq_mod(&expect), "z={z} nome={nome}: {got} vs {expect}");
            assert_eq!(got.order(), 14);
        }
    }

    #[test]
    fn factorials() {
        let spec = FactorialSpec::basic(rat(3, 1)).unwrap();
        assert_eq!(qfact(&mono(7, 2), 0, &spec, 8).unwrap(), NomeSeries::one(8));
        assert_eq!(qfact(&mono(2, 1), 2, &spec, 8).unwrap(), NomeSeries::constant(rat(5, 1), 8));
        let multi = qfact_multi(&[mono(2, 1), mono(3, 1)], 1, &FactorialSpec::basic(rat(5, 1)).unwrap(), 8);
        assert_eq!(multi.unwrap(), NomeSeries::constant(rat(2, 1), 8));
        assert_eq!(qfact_multi(&[], 3, &spec, 8).unwrap(), NomeSeries::one(8));
    }

    #[test]
    fn negative_length_factorial() {
        let spec = ell(rat(2, 5));
        let a = mono(3, 7);
        let neg = qfact_signed(&a, -2, &spec, 12).unwrap();
        let shifted = qfact(&(&a * spec.q_pow(-2)), 2, &spec, 12).unwrap();
        assert!((&neg * &shifted).eq_mod(&NomeSeries::one(12)));
    }

    #[test]
    fn elliptic_factorial_at_zero_nome_is_basic() {
        let q = rat(-3, 5);
        let a = mono(7, 4);
        for n in 0..5 {
            let e = qfact(&a, n, &ell(q.clone()), 10).unwrap().constant_term().unwrap();
            let b = qfact(&a, n, &FactorialSpec::basic(q.clone()).unwrap(), 10).unwrap().constant_term().unwrap();
            assert_eq!(e, b);
        }
    }

    #[test]
    fn shift_quotient_edge_cases() {
        let spec = ell(rat(2, 3));
        assert_eq!(theta_shift_quotient(&mono(5, 7), 0, &spec, 10).unwrap(), NomeSeries::one(10));
        assert!(matches!(
            theta_shift_quotient(&mono(1, 1), 2, &spec, 10),
            Err(Error::DivisionByZeroSeries { .. })
        ));
        let basic = FactorialSpec::basic(rat(2, 3)).unwrap();
        let got = theta_shift_quotient(&mono(5, 7), 2, &basic, 10).unwrap();
        let expect = (rat(1, 1) - rat(5, 7) * rat(2, 3).powi(4)) / (rat(1, 1) - rat(5, 7));
        assert_eq!(got, NomeSeries::constant(expect, 10));
    }

    #[test]
    fn shifts_agree_with_direct_products() {
        let spec = ell(rat(5, 3));
        let a = mono(-2, 7);
        let (n, k) = (4, 2);
        let add = qfact_shift(&a, n, k, &spec, ShiftDirection::Add, 12).unwrap();
        assert!(add.eq_mod(&qfact(&a, 6, &spec, 12).unwrap()));
        let sub = qfact_shift(&a, n, k, &spec, ShiftDirection::Subtract, 12).unwrap();
        assert!(sub.eq_mod(&qfact(&a, 2, &spec, 12).unwrap()));
        assert!(qfact_shift(&a, n, 0, &spec, ShiftDirection::Add, 12).unwrap().eq_mod(&qfact(&a, 4, &spec, 12).unwrap()));
        assert!(qfact_shift(&a, 0, k, &spec, ShiftDirection::Add, 12).unwrap().eq_mod(&qfact(&a, 2, &spec, 12).unwrap()));
        assert!(matches!(qfact_shift(&a, 1, 3, &spec, ShiftDirection::Subtract, 12), Err(Error::IndexRange(_))));
        assert!(matches!(qfact_shift(&a, -1, 0, &spec, ShiftDirection::Add, 12), Err(Error::IndexRange(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(FactorialSpec::basic(rat(1, 1)).is_err());
        assert!(FactorialSpec::basic(rat(-1, 1)).is_err());
        assert!(FactorialSpec::basic(rat(0, 1)).is_err());
        assert!(FactorialSpec::new(rat(2, 1), 3).is_err());
        let s = ell(rat(2, 3)).squared().unwrap();
        assert_eq!((s.base().clone(), s.nome_exponent()), (rat(4, 9), 4));
    }
}
