use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar. `BigRational` keeps every value reduced with a
/// positive denominator, and zero is always `0/1`.
pub type Rat = num_rational::BigRational;

/// Shorthand for `n/d`. Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub trait RatExt: Sized {
    /// Integer power, negative exponents allowed. Panics on `0^(negative)`.
    fn powi(&self, e: i64) -> Self;
    /// The nonnegative rational square root, if one exists.
    fn exact_sqrt(&self) -> Option<Self>;
    /// `num/den`, or just `num` for integers.
    fn render(&self) -> String;
}

impl RatExt for Rat {
    fn powi(&self, e: i64) -> Rat {
        if e < 0 {
            return self.recip().powi(-e);
        }
        let mut base = self.clone();
        let mut acc = Rat::one();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc *= &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn exact_sqrt(&self) -> Option<Rat> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(Rat::zero());
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rat::new(n, d))
        } else {
            None
        }
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}
