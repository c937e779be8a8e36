//! Exact parameter points and the seeded sampler that produces them.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::arith::{Monomial, Rat, RatExt};
use crate::error::{Error, Result};

/// Resampling budget for degenerate points.
pub const MAX_ATTEMPTS: usize = 20;

/// Largest numerator/denominator drawn by the sampler.
const HEIGHT: i64 = 9;

/// An exact specialization of the free symbols of an identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamPoint {
    values: BTreeMap<String, Monomial>,
    roots: BTreeMap<String, Monomial>,
    q: Rat,
    seed: u64,
}

impl ParamPoint {
    pub fn new(q: Rat, seed: u64) -> Result<Self> {
        if q.is_zero() || q.is_one() || (-&q).is_one() {
            return Err(Error::ConstraintViolation(format!("q = {} must avoid 0 and +-1", q.render())));
        }
        Ok(ParamPoint { values: BTreeMap::new(), roots: BTreeMap::new(), q, seed })
    }

    pub fn set(&mut self, name: &str, value: Monomial) -> Result<()> {
        if value.is_zero() {
            return Err(Error::ConstraintViolation(format!("{name} must be nonzero")));
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    /// Declare `name^(1/2) = root`, validated by squaring.
    pub fn set_root(&mut self, name: &str, root: Monomial) -> Result<()> {
        let target = self.get(name)?;
        if &(&root * &root) != target {
            return Err(Error::ConstraintViolation(format!("declared {name}^(1/2) = {root} does not square to {target}")));
        }
        self.roots.insert(name.to_string(), root);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Monomial> {
        self.values.get(name).ok_or_else(|| Error::ConstraintViolation(format!("point has no symbol {name}")))
    }

    pub fn root(&self, name: &str) -> Result<&Monomial> {
        self.roots.get(name).ok_or_else(|| Error::MissingRoot(format!("{name}^(1/2)")))
    }

    pub fn q(&self) -> &Rat {
        &self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Canonical `name=value` rendering, symbols in lexicographic order.
    pub fn render(&self) -> String {
        let mut parts = vec![format!("q={}", self.q.render())];
        parts.extend(self.values.iter().map(|(k, v)| format!("{k}={v}")));
        parts.extend(self.roots.iter().map(|(k, v)| format!("sqrt({k})={v}")));
        parts.join(";")
    }

    /// First 12 hex digits of the SHA-256 of `render()`.
    pub fn digest(&self) -> String {
        digest_of(&self.render())
    }
}

/// First 12 hex digits of the SHA-256 of `text`.
pub fn digest_of(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// A reference inside a sampling expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ref {
    Value(&'static str),
    Root(&'static str),
}

/// `coeff * q^q_exp * w^w_exp * prod refs^e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    coeff: Rat,
    q_exp: i64,
    w_exp: i64,
    factors: Vec<(Ref, i64)>,
}

impl Default for Expr {
    fn default() -> Self {
        Self::new()
    }
}

impl Expr {
    pub fn new() -> Self {
        Expr { coeff: Rat::one(), q_exp: 0, w_exp: 0, factors: Vec::new() }
    }

    pub fn val(mut self, name: &'static str, e: i64) -> Self {
        self.factors.push((Ref::Value(name), e));
        self
    }

    pub fn root(mut self, name: &'static str, e: i64) -> Self {
        self.factors.push((Ref::Root(name), e));
        self
    }

    pub fn q(mut self, e: i64) -> Self {
        self.q_exp += e;
        self
    }

    pub fn w(mut self, e: i64) -> Self {
        self.w_exp += e;
        self
    }

    pub fn times(mut self, c: Rat) -> Self {
        self.coeff *= c;
        self
    }

    pub fn eval(&self, point: &ParamPoint) -> Result<Monomial> {
        let mut acc = Monomial::new(&self.coeff * point.q().powi(self.q_exp), self.w_exp);
        for (r, e) in &self.factors {
            let base = match r {
                Ref::Value(n) => point.get(n)?,
                Ref::Root(n) => point.root(n)?,
            };
            acc = &acc * &base.powi(*e);
        }
        Ok(acc)
    }
}

/// How one symbol of a sampling plan is produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    /// A random nonzero rational times `w^w_exp`.
    Free { name: &'static str, w_exp: i64 },
    /// A random rational `r`; the symbol is `r^2` with declared root `r`.
    Square { name: &'static str },
    /// Eliminated by an equality constraint.
    Define { name: &'static str, expr: Expr },
    /// Defined through its root: the symbol is `expr^2` with root `expr`.
    DefineRoot { name: &'static str, expr: Expr },
    /// Replace `q` by a p-free expression in earlier symbols.
    DefineQ { expr: Expr },
}

/// Sampling plan: how `q` is drawn plus the ordered symbol steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    /// Draw `q` as a square with declared root `sqrt(q)`.
    pub q_square: bool,
    pub steps: Vec<Step>,
}

impl Plan {
    pub fn new(steps: Vec<Step>) -> Self {
        Plan { q_square: false, steps }
    }

    pub fn with_square_q(mut self) -> Self {
        self.q_square = true;
        self
    }
}

pub fn free(name: &'static str) -> Step {
    Step::Free { name, w_exp: 0 }
}

pub fn free_w(name: &'static str, w_exp: i64) -> Step {
    Step::Free { name, w_exp }
}

pub fn square(name: &'static str) -> Step {
    Step::Square { name }
}

pub fn define(name: &'static str, expr: Expr) -> Step {
    Step::Define { name, expr }
}

pub fn define_q(expr: Expr) -> Step {
    Step::DefineQ { expr }
}

pub fn define_root(name: &'static str, expr: Expr) -> Step {
    Step::DefineRoot { name, expr }
}

/// A random rational with numerator and denominator in `1..=HEIGHT`, random
/// sign, avoiding `0` and `+-1`.
pub fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let n: i64 = rng.gen_range(1..=HEIGHT);
        let d: i64 = rng.gen_range(1..=HEIGHT);
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let r = Rat::new((sign * n).into(), d.into());
        if !r.is_one() && !(-&r).is_one() {
            return r;
        }
    }
}

/// Stable sub-seed for `(seed, label, index)`.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("8 bytes"))
}

/// Draw one point following `plan`. Equality constraints are solved by
/// elimination (the `Define` steps), so they hold exactly.
pub fn sample_point(seed: u64, plan: &Plan) -> Result<ParamPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q_root = random_rat(&mut rng);
    let q = if plan.q_square { q_root.powi(2) } else { q_root.clone() };
    let mut point = ParamPoint::new(q, seed)?;
    if plan.q_square {
        point.set("q", Monomial::constant(point.q().clone()))?;
        point.set_root("q", Monomial::constant(q_root))?;
    }
    for step in &plan.steps {
        match step {
            Step::Free { name, w_exp } => point.set(name, Monomial::new(random_rat(&mut rng), *w_exp))?,
            Step::Square { name } => {
                let r = Monomial::constant(random_rat(&mut rng));
                point.set(name, &r * &r)?;
                point.set_root(name, r)?;
            }
            Step::Define { name, expr } => {
                let v = expr.eval(&point)?;
                point.set(name, v)?;
            }
            Step::DefineRoot { name, expr } => {
                let r = expr.eval(&point)?;
                point.set(name, &r * &r)?;
                point.set_root(name, r)?;
            }
            Step::DefineQ { expr } => {
                let q = expr.eval(&point)?;
                if !q.is_p_free() {
                    return Err(Error::ConstraintViolation("q must be p-free".into()));
                }
                let mut redefined = ParamPoint::new(q.coeff().clone(), seed)?;
                redefined.values = point.values;
                redefined.roots = point.roots;
                point = redefined;
            }
        }
    }
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn elimination_solves_constraints_exactly() {
        let plan = Plan::new(vec![
            free("a"),
            free("b"),
            free("c"),
            free("d"),
            define("e", Expr::new().val("a", 2).q(3).val("b", -1).val("c", -1).val("d", -1)),
        ]);
        let pt = sample_point(7, &plan).unwrap();
        let g = |s| pt.get(s).unwrap().clone();
        let lhs = &(&g("b") * &g("c")) * &(&g("d") * &g("e"));
        let rhs = &(&g("a") * &g("a")) * &Monomial::constant(pt.q().powi(3));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn square_symbols_carry_roots() {
        let plan = Plan::new(vec![square("k"), free("a"), define_root("m", Expr::new().val("a", 1).root("k", -1))]).with_square_q();
        let pt = sample_point(3, &plan).unwrap();
        let k = pt.root("k").unwrap();
        assert_eq!(&(k * k), pt.get("k").unwrap());
        let m = pt.root("m").unwrap();
        assert_eq!(&(k * m), pt.get("a").unwrap());
        let qr = pt.root("q").unwrap();
        assert_eq!((qr * qr).coeff(), pt.q());
    }

    #[test]
    fn sampling_is_deterministic() {
        let plan = Plan::new(vec![free("a"), free_w("d", 1)]);
        assert_eq!(sample_point(11, &plan).unwrap(), sample_point(11, &plan).unwrap());
        assert_ne!(sample_point(11, &plan).unwrap().digest(), sample_point(12, &plan).unwrap().digest());
        assert_eq!(sample_point(11, &plan).unwrap().get("d").unwrap().exp(), 1);
    }

    #[test]
    fn missing_roots_and_bad_q() {
        let pt = sample_point(1, &Plan::new(vec![free("a")])).unwrap();
        assert!(matches!(pt.root("a"), Err(Error::MissingRoot(_))));
        assert!(ParamPoint::new(rat(-1, 1), 0).is_err());
        let mut pt = ParamPoint::new(rat(2, 1), 0).unwrap();
        pt.set("a", Monomial::constant(rat(4, 1))).unwrap();
        assert!(pt.set_root("a", Monomial::constant(rat(3, 1))).is_err());
        assert!(pt.set_root("a", Monomial::constant(rat(-2, 1))).is_ok());
    }

    #[test]
    fn digest_is_twelve_hex_digits() {
        let pt = sample_point(5, &Plan::new(vec![free("a")])).unwrap();
        let d = pt.digest();
        assert_eq!(d.len(), 12);
        assert!(d.chars().all(|c| c.is_ascii_hexdigit()));
    }
}
