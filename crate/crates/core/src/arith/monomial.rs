use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_traits::{One, Zero};

use super::rat::{Rat, RatExt};

/// `coeff * w^exp`. Parameters such as `d/p = d*w^-2` or `d*p^(1/2) = d*w`
/// are monomials; zero is canonically `0*w^0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    coeff: Rat,
    exp: i64,
}

impl Monomial {
    pub fn new(coeff: Rat, exp: i64) -> Self {
        if coeff.is_zero() {
            Self::zero()
        } else {
            Monomial { coeff, exp }
        }
    }

    pub fn constant(coeff: Rat) -> Self {
        Self::new(coeff, 0)
    }

    pub fn zero() -> Self {
        Monomial { coeff: Rat::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Monomial { coeff: Rat::one(), exp: 0 }
    }

    /// `w^exp`.
    pub fn w(exp: i64) -> Self {
        Monomial { coeff: Rat::one(), exp }
    }

    pub fn coeff(&self) -> &Rat {
        &self.coeff
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// True when the monomial does not involve the nome.
    pub fn is_p_free(&self) -> bool {
        self.exp == 0
    }

    pub fn powi(&self, e: i64) -> Self {
        if e == 0 {
            return Self::one();
        }
        Monomial { coeff: self.coeff.powi(e), exp: self.exp * e }
    }

    pub fn recip(&self) -> Self {
        self.powi(-1)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::new(&self.coeff * c, self.exp)
    }

    /// Multiply by `q^e` for a rational base `q`.
    pub fn times_pow(&self, q: &Rat, e: i64) -> Self {
        self.scale(&q.powi(e))
    }

    /// A declared square root is accepted only if it squares back exactly.
    pub fn is_root_of(&self, target: &Monomial) -> bool {
        &self.powi(2) == target
    }
}

impl From<Rat> for Monomial {
    fn from(c: Rat) -> Self {
        Monomial::constant(c)
    }
}

impl From<&Rat> for Monomial {
    fn from(c: &Rat) -> Self {
        Monomial::constant(c.clone())
    }
}

impl From<i64> for Monomial {
    fn from(c: i64) -> Self {
        Monomial::constant(Rat::from_integer(c.into()))
    }
}

impl Mul for &Monomial {
    type Output = Monomial;
    fn mul(self, rhs: &Monomial) -> Monomial {
        Monomial::new(&self.coeff * &rhs.coeff, self.exp + rhs.exp)
    }
}

impl Div for &Monomial {
    type Output = Monomial;
    fn div(self, rhs: &Monomial) -> Monomial {
        assert!(!rhs.is_zero(), "division by the zero monomial");
        Monomial::new(&self.coeff / &rhs.coeff, self.exp - rhs.exp)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Monomial> for Monomial {
            type Output = Monomial;
            fn $m(self, rhs: Monomial) -> Monomial {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Monomial> for Monomial {
            type Output = Monomial;
            fn $m(self, rhs: &Monomial) -> Monomial {
                (&self).$m(rhs)
            }
        }
        impl $tr<Monomial> for &Monomial {
            type Output = Monomial;
            fn $m(self, rhs: Monomial) -> Monomial {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for &Monomial {
    type Output = Monomial;
    fn neg(self) -> Monomial {
        Monomial::new(-&self.coeff, self.exp)
    }
}

impl Neg for Monomial {
    type Output = Monomial;
    fn neg(self) -> Monomial {
        -&self
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.coeff.render())
        } else {
            write!(f, "{}*w^{}", self.coeff.render(), self.exp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn arithmetic() {
        let d = Monomial::constant(rat(3, 2));
        let over_p = &d / &Monomial::w(2);
        assert_eq!(over_p.exp(), -2);
        assert_eq!((&over_p * &Monomial::w(2)), d);
        assert_eq!(over_p.powi(-2), Monomial::new(rat(4, 9), 4));
        assert_eq!(-&d, Monomial::constant(rat(-3, 2)));
        assert!(Monomial::new(rat(0, 1), 7).is_zero());
        assert_eq!(Monomial::new(rat(0, 1), 7), Monomial::zero());
    }

    #[test]
    fn roots() {
        let a = Monomial::new(rat(9, 4), 2);
        assert!(Monomial::new(rat(-3, 2), 1).is_root_of(&a));
        assert!(!Monomial::new(rat(3, 2), 2).is_root_of(&a));
    }

    #[test]
    fn display() {
        assert_eq!(Monomial::new(rat(-5, 2), 3).to_string(), "-5/2*w^3");
        assert_eq!(Monomial::constant(rat(7, 1)).to_string(), "7");
    }
}
