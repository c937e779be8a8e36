//! Exact coefficient field and truncated Laurent series in the half-nome `w`
//! (the elliptic nome is `p = w^2`).

mod monomial;
mod rat;
mod series;

pub use monomial::Monomial;
pub use rat::{rat, Rat, RatExt};
pub use series::{Comparison, NomeSeries, MIN_SIGNIFICANT_ORDERS};
