use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::monomial::Monomial;
use super::rat::{Rat, RatExt};
use crate::error::{Error, Result};

/// Fewer significant orders than this and a comparison says nothing useful.
pub const MIN_SIGNIFICANT_ORDERS: i64 = 4;

/// A Laurent series in the half-nome `w`, known modulo `w^order`.
///
/// `coeffs[i]` is the coefficient of `w^(val + i)`. Nonzero series have a
/// nonzero leading coefficient and `val < order`; the zero series has no
/// coefficients and `val == order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NomeSeries {
    val: i64,
    coeffs: Vec<Rat>,
    order: i64,
}

/// Outcome of comparing two truncated series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub equal: bool,
    /// Both sides agree (or not) modulo `w^order`.
    pub order: i64,
    /// `order` minus the lowest valuation involved (never above `order` when
    /// both sides have nonnegative valuation).
    pub significant: i64,
}

impl NomeSeries {
    pub fn zero(order: i64) -> Self {
        NomeSeries { val: order, coeffs: Vec::new(), order }
    }

    pub fn one(order: i64) -> Self {
        Self::constant(Rat::one(), order)
    }

    pub fn constant(c: Rat, order: i64) -> Self {
        Self::from_terms([(0, c)], order)
    }

    pub fn from_monomial(m: &Monomial, order: i64) -> Self {
        Self::from_terms([(m.exp(), m.coeff().clone())], order)
    }

    /// Sum of `c * w^e` terms; repeated exponents accumulate.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, Rat)>, order: i64) -> Self {
        let mut acc: BTreeMap<i64, Rat> = BTreeMap::new();
        for (e, c) in terms {
            if e < order {
                *acc.entry(e).or_insert_with(Rat::zero) += c;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        let Some((&lo, _)) = acc.iter().next() else {
            return Self::zero(order);
        };
        let hi = *acc.keys().next_back().unwrap();
        let mut coeffs = vec![Rat::zero(); (hi - lo + 1) as usize];
        for (e, c) in acc {
            coeffs[(e - lo) as usize] = c;
        }
        NomeSeries { val: lo, coeffs, order }
    }

    fn from_dense(val: i64, coeffs: Vec<Rat>, order: i64) -> Self {
        NomeSeries { val, coeffs, order }.normalized()
    }

    fn normalized(mut self) -> Self {
        let keep = (self.order - self.val).max(0) as usize;
        self.coeffs.truncate(keep);
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            return Self::zero(self.order);
        }
        self.coeffs.drain(..lead);
        self.val += lead as i64;
        self
    }

    /// Lowest exponent with a nonzero coefficient (`order` for zero).
    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `order - valuation`: how many nome orders of this value are known.
    pub fn significant_orders(&self) -> i64 {
        self.order - self.val
    }

    pub fn coeff(&self, e: i64) -> Rat {
        if e < self.val {
            return Rat::zero();
        }
        self.coeffs.get((e - self.val) as usize).cloned().unwrap_or_else(Rat::zero)
    }

    /// Nonzero `(exponent, coefficient)` pairs in increasing exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.val + i as i64, c))
    }

    /// Forget everything at or above `w^order`.
    pub fn truncate(&self, order: i64) -> Self {
        if order >= self.order {
            return self.clone();
        }
        Self::from_dense(self.val, self.coeffs.clone(), order)
    }

    fn add_signed(&self, rhs: &Self, negate: bool) -> Self {
        let order = self.order.min(rhs.order);
        let lo = self.val.min(rhs.val);
        if lo >= order {
            return Self::zero(order);
        }
        let mut out = vec![Rat::zero(); (order - lo) as usize];
        for (e, c) in self.terms().filter(|(e, _)| *e < order) {
            out[(e - lo) as usize] += c;
        }
        for (e, c) in rhs.terms().filter(|(e, _)| *e < order) {
            if negate {
                out[(e - lo) as usize] -= c;
            } else {
                out[(e - lo) as usize] += c;
            }
        }
        Self::from_dense(lo, out, order)
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        let order = (self.order + rhs.val).min(rhs.order + self.val);
        if self.is_zero() || rhs.is_zero() {
            return Self::zero(order);
        }
        let val = self.val + rhs.val;
        if val >= order {
            return Self::zero(order);
        }
        let len = (order - val) as usize;
        let mut out = vec![Rat::zero(); len];
        for (i, x) in self.coeffs.iter().enumerate().take(len) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in rhs.coeffs.iter().enumerate().take(len - i) {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        Self::from_dense(val, out, order)
    }

    /// `1/self`: valuation shift plus geometric inversion of the unit part.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZeroSeries { order: self.order });
        }
        let rel = (self.order - self.val) as usize;
        let lead_inv = self.coeffs[0].recip();
        let mut inv: Vec<Rat> = Vec::with_capacity(rel);
        inv.push(lead_inv.clone());
        for k in 1..rel {
            let mut acc = Rat::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &inv[k - j];
                }
            }
            inv.push(-acc * &lead_inv);
        }
        Ok(Self::from_dense(-self.val, inv, self.order - 2 * self.val))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inverse()?)
    }

    /// Exact multiplication by a monomial (no precision is lost).
    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        if m.is_zero() {
            return Self::zero(self.order);
        }
        let coeffs = self.coeffs.iter().map(|c| c * m.coeff()).collect();
        Self::from_dense(self.val + m.exp(), coeffs, self.order + m.exp())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        self.mul_monomial(&Monomial::constant(c.clone()))
    }

    /// `w -> w^m`: every exponent and the truncation bound scale by `m`.
    pub fn substitute_nome_power(&self, m: u32) -> Self {
        assert!(m >= 1, "nome power substitution needs m >= 1");
        let m = m as i64;
        let terms = self.terms().map(|(e, c)| (e * m, c.clone())).collect::<Vec<_>>();
        Self::from_terms(terms, self.order * m)
    }

    /// The `p -> 0` value. Fails on poles and on series too short to know it.
    pub fn constant_term(&self) -> Result<Rat> {
        if !self.is_zero() && self.val < 0 {
            return Err(Error::PoleAtZeroNome { valuation: self.val });
        }
        if self.order <= 0 {
            return Err(Error::InsufficientTruncation { significant: self.order, required: 1 });
        }
        Ok(self.coeff(0))
    }

    /// Compare modulo the smaller of the two truncation orders.
    pub fn compare(&self, rhs: &Self) -> Comparison {
        let diff = self - rhs;
        let order = diff.order;
        let low = self.val.min(rhs.val).min(0);
        Comparison { equal: diff.is_zero(), order, significant: order - low }
    }

    /// Equality modulo `min(self.order, rhs.order)`.
    pub fn eq_mod(&self, rhs: &Self) -> bool {
        self.compare(rhs).equal
    }

    /// Guard against vacuous results: error when fewer than `required`
    /// orders beyond the valuation are known.
    pub fn ensure_significant(&self, required: i64) -> Result<()> {
        let significant = if self.is_zero() { self.order } else { self.significant_orders() };
        if significant < required {
            return Err(Error::InsufficientTruncation { significant, required });
        }
        Ok(())
    }
}

impl Add for &NomeSeries {
    type Output = NomeSeries;
    fn add(self, rhs: &NomeSeries) -> NomeSeries {
        self.add_signed(rhs, false)
    }
}

impl Sub for &NomeSeries {
    type Output = NomeSeries;
    fn sub(self, rhs: &NomeSeries) -> NomeSeries {
        self.add_signed(rhs, true)
    }
}

impl Mul for &NomeSeries {
    type Output = NomeSeries;
    fn mul(self, rhs: &NomeSeries) -> NomeSeries {
        self.mul_impl(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<NomeSeries> for NomeSeries {
            type Output = NomeSeries;
            fn $m(self, rhs: NomeSeries) -> NomeSeries {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&NomeSeries> for NomeSeries {
            type Output = NomeSeries;
            fn $m(self, rhs: &NomeSeries) -> NomeSeries {
                (&self).$m(rhs)
            }
        }
        impl $tr<NomeSeries> for &NomeSeries {
            type Output = NomeSeries;
            fn $m(self, rhs: NomeSeries) -> NomeSeries {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for &NomeSeries {
    type Output = NomeSeries;
    fn neg(self) -> NomeSeries {
        NomeSeries {
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            order: self.order,
        }
    }
}

impl Neg for NomeSeries {
    type Output = NomeSeries;
    fn neg(self) -> NomeSeries {
        -&self
    }
}

/// Canonical rendering: `c0 + c1*w^e1 - c2*w^e2 (mod w^N)`.
impl fmt::Display for NomeSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0 (mod w^{})", self.order);
        }
        for (i, (e, c)) in self.terms().enumerate() {
            let (sign, mag) = if c < &Rat::zero() { ("-", -c) } else { ("+", c.clone()) };
            match (i, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            if e == 0 {
                write!(f, "{}", mag.render())?;
            } else {
                write!(f, "{}*w^{}", mag.render(), e)?;
            }
        }
        write!(f, " (mod w^{})", self.order)
    }
}
