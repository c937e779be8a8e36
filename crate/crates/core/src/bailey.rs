//! Well-poised Bailey pairs, the kernels that link them, and the
//! pair-to-pair transformations that grow the Bailey tree.
//!
//! Pairs are evaluator based: `alpha(n, order)` and `beta(n, order)` return
//! exact truncated series at a fixed parameter point. Every transformation is
//! written once as a factor `L_n` (with an index map for the alpha side) and a
//! coefficient matrix `N_{n,r}` (for the beta side); the same functions drive
//! both `apply_transform` and the matrix identities behind each theorem.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::arith::{Comparison, Monomial, NomeSeries, Rat, RatExt};
use crate::error::{Error, Result};
use crate::qobjects::{FactorialSpec, QProduct};

type Evaluator = dyn Fn(usize, i64) -> Result<NomeSeries> + Send + Sync;

/// A memoized index-to-series evaluator.
#[derive(Clone)]
pub struct Sequence {
    eval: Arc<Evaluator>,
    memo: Arc<Mutex<HashMap<usize, NomeSeries>>>,
}

impl Sequence {
    pub fn new(f: impl Fn(usize, i64) -> Result<NomeSeries> + Send + Sync + 'static) -> Self {
        Sequence { eval: Arc::new(f), memo: Arc::new(Mutex::new(HashMap::new())) }
    }

    /// A finite sequence, zero past its end.
    pub fn from_values(values: Vec<NomeSeries>) -> Self {
        Sequence::new(move |n, order| {
            Ok(values.get(n).map(|v| v.truncate(order)).unwrap_or_else(|| NomeSeries::zero(order)))
        })
    }

    /// `1, 0, 0, ...`
    pub fn delta() -> Self {
        Sequence::new(|n, order| Ok(if n == 0 { NomeSeries::one(order) } else { NomeSeries::zero(order) }))
    }

    /// Term `n`, exact modulo `w^order`. The lock is not held while evaluating,
    /// so nested sequences may recurse freely.
    pub fn get(&self, n: usize, order: i64) -> Result<NomeSeries> {
        if let Some(hit) = self.memo.lock().unwrap().get(&n) {
            if hit.order() >= order {
                return Ok(hit.truncate(order));
            }
        }
        let value = (self.eval)(n, order)?;
        let mut memo = self.memo.lock().unwrap();
        let keep = memo.get(&n).is_none_or(|old| old.order() < value.order());
        if keep {
            memo.insert(n, value.clone());
        }
        Ok(value)
    }

    /// Same evaluator with every term scaled by `f(n)`.
    pub fn map(&self, f: impl Fn(usize, NomeSeries) -> NomeSeries + Send + Sync + 'static) -> Self {
        let inner = self.clone();
        Sequence::new(move |n, order| Ok(f(n, inner.get(n, order)?)))
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Sequence(..)")
    }
}

/// Evaluate a product of lazily computed factors exactly modulo `w^target`,
/// raising the working order to absorb negative valuations.
pub fn product_at(target: i64, factors: &[&dyn Fn(i64) -> Result<NomeSeries>]) -> Result<NomeSeries> {
    let mut values = factors.iter().map(|f| f(target)).collect::<Result<Vec<_>>>()?;
    let deficit: i64 = values.iter().map(|v| v.valuation().min(0)).sum();
    if deficit < 0 {
        values = factors.iter().map(|f| f(target - deficit)).collect::<Result<Vec<_>>>()?;
    }
    let mut acc = NomeSeries::one(target - deficit);
    for v in &values {
        acc = &acc * v;
    }
    Ok(acc.truncate(target))
}

/// Parameters `(a, k)` of a pair and its base `(q, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairBase {
    pub a: Monomial,
    pub k: Monomial,
    pub spec: FactorialSpec,
}

impl PairBase {
    pub fn new(a: Monomial, k: Monomial, spec: FactorialSpec) -> Self {
        PairBase { a, k, spec }
    }

    fn q(&self) -> Monomial {
        self.spec.q_pow(1)
    }
}

/// `M_{n,r}(a,k)`: the kernel of the defining relation `beta = M alpha`.
pub fn kernel_m_product(n: usize, r: usize, a: &Monomial, k: &Monomial, spec: &FactorialSpec) -> QProduct {
    let (n, r) = (n as i64, r as i64);
    let q = spec.q_pow(1);
    QProduct::new()
        .fact(&(k / a), n - r, spec)
        .over_fact(&q, n - r, spec)
        .fact(k, n + r, spec)
        .over_fact(&(a * &q), n + r, spec)
}

pub fn kernel_m(n: usize, r: usize, a: &Monomial, k: &Monomial, spec: &FactorialSpec, order: i64) -> Result<NomeSeries> {
    check_indices(n, r)?;
    kernel_m_product(n, r, a, k, spec).eval(order)
}

/// `M~_{n,r}(a,k)`: the inverse kernel, `alpha = M~ beta`.
pub fn kernel_mtilde(n: usize, r: usize, a: &Monomial, k: &Monomial, spec: &FactorialSpec, order: i64) -> Result<NomeSeries> {
    check_indices(n, r)?;
    let q = spec.q_pow(1);
    let (ni, ri) = (n as i64, r as i64);
    QProduct::new()
        .theta(&(a * spec.q_pow(2 * ni)), spec)
        .over_theta(a, spec)
        .theta(&(k * spec.q_pow(2 * ri)), spec)
        .over_theta(k, spec)
        .fact(&(a / k), ni - ri, spec)
        .over_fact(&q, ni - ri, spec)
        .fact(a, ni + ri, spec)
        .over_fact(&(k * &q), ni + ri, spec)
        .times(&(k / a).powi(ni - ri))
        .eval(order)
}

fn check_indices(n: usize, r: usize) -> Result<()> {
    if r > n {
        return Err(Error::IndexRange(format!("kernel needs r <= n (got n={n}, r={r})")));
    }
    Ok(())
}

/// `beta_0..beta_{n_max}` from alpha through `M`.
pub fn forward(base: &PairBase, alpha: &Sequence, n_max: usize, order: i64) -> Result<Vec<NomeSeries>> {
    (0..=n_max)
        .map(|n| {
            let mut acc = NomeSeries::zero(order);
            for r in 0..=n {
                let kernel = kernel_m_product(n, r, &base.a, &base.k, &base.spec);
                let term = product_at(order, &[&|o| kernel.eval(o), &|o| alpha.get(r, o)])?;
                acc = &acc + &term;
            }
            Ok(acc)
        })
        .collect()
}

/// `alpha_0..alpha_{n_max}` from beta through `M~`.
pub fn backward(base: &PairBase, beta: &Sequence, n_max: usize, order: i64) -> Result<Vec<NomeSeries>> {
    (0..=n_max)
        .map(|n| {
            let mut acc = NomeSeries::zero(order);
            for r in 0..=n {
                let term = product_at(order, &[
                    &|o| kernel_mtilde(n, r, &base.a, &base.k, &base.spec, o),
                    &|o| beta.get(r, o),
                ])?;
                acc = &acc + &term;
            }
            Ok(acc)
        })
        .collect()
}

/// A node of the Bailey tree.
#[derive(Clone, Debug)]
pub struct WPPair {
    pub base: PairBase,
    pub alpha: Sequence,
    pub beta: Sequence,
    pub provenance: Vec<TransformStep>,
}

impl WPPair {
    pub fn new(base: PairBase, alpha: Sequence, beta: Sequence) -> Self {
        WPPair { base, alpha, beta, provenance: Vec::new() }
    }

    /// Provenance rendered as `unit>T1e>T3e`.
    pub fn path(&self) -> String {
        std::iter::once("unit".to_string()).chain(self.provenance.iter().map(|s| s.tag.name().to_string())).collect::<Vec<_>>().join(">")
    }
}

/// The unit pair: `beta = delta_{n,0}` and alpha its image under `M~`.
pub fn unit_pair(a: &Monomial, k: &Monomial, spec: &FactorialSpec) -> WPPair {
    let base = PairBase::new(a.clone(), k.clone(), spec.clone());
    let (a, k, spec) = (a.clone(), k.clone(), spec.clone());
    let alpha = Sequence::new(move |n, order| {
        let n = n as i64;
        let q = spec.q_pow(1);
        QProduct::new()
            .theta(&(&a * spec.q_pow(2 * n)), &spec)
            .over_theta(&a, &spec)
            .facts(&[a.clone(), &a / &k], n, &spec)
            .over_facts(&[q.clone(), &k * &q], n, &spec)
            .times(&(&k / &a).powi(n))
            .eval(order)
    });
    WPPair::new(base, alpha, Sequence::delta())
}

/// Outcome of checking `beta = M alpha` index by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCheck {
    /// Comparisons for indices `0..` up to and including the first failure.
    pub comparisons: Vec<Comparison>,
    pub first_failure: Option<usize>,
}

impl PairCheck {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Recompute beta from alpha and compare, stopping at the first mismatch.
pub fn verify_pair(pair: &WPPair, n_max: usize, order: i64) -> Result<PairCheck> {
    let mut comparisons = Vec::new();
    for n in 0..=n_max {
        let lhs = pair.beta.get(n, order)?;
        let rhs = forward_one(pair, n, order)?;
        let c = lhs.compare(&rhs);
        let ok = c.equal;
        comparisons.push(c);
        if !ok {
            return Ok(PairCheck { comparisons, first_failure: Some(n) });
        }
    }
    Ok(PairCheck { comparisons, first_failure: None })
}

fn forward_one(pair: &WPPair, n: usize, order: i64) -> Result<NomeSeries> {
    let base = &pair.base;
    let mut acc = NomeSeries::zero(order);
    for r in 0..=n {
        let kernel = kernel_m_product(n, r, &base.a, &base.k, &base.spec);
        acc = &acc + &product_at(order, &[&|o| kernel.eval(o), &|o| pair.alpha.get(r, o)])?;
    }
    Ok(acc)
}

/// One edge of the Bailey tree. Tags carry whatever extra parameters and
/// declared square roots their theorem needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformTag {
    T1 { b: Monomial, c: Monomial },
    T2,
    T2b { sigma: i8, k_root: Monomial, m_root: Monomial },
    /// Output base `(A, k; Q)` with `A = a_root^2`, `Q = q_root^2`.
    T3 { a_root: Monomial, q_root: Rat },
    T4 { a_root: Monomial, q_root: Rat },
    T5,
    T1e { b: Monomial, c: Monomial },
    T3e { a_root: Monomial, q_root: Rat },
    T5e,
    New1,
    /// Output base `(a, K; Q, P)` with `K = k_root^2`, `Q = q_root^2`.
    New2 { k_root: Monomial, q_root: Rat },
}

impl TransformTag {
    pub fn name(&self) -> &'static str {
        match self {
            TransformTag::T1 { .. } => "T1",
            TransformTag::T2 => "T2",
            TransformTag::T2b { .. } => "T2b",
            TransformTag::T3 { .. } => "T3",
            TransformTag::T4 { .. } => "T4",
            TransformTag::T5 => "T5",
            TransformTag::T1e { .. } => "T1e",
            TransformTag::T3e { .. } => "T3e",
            TransformTag::T5e => "T5e",
            TransformTag::New1 => "New1",
            TransformTag::New2 { .. } => "New2",
        }
    }

    /// Basic-only tags need nome exponent 0, elliptic ones a true nome;
    /// `New1` and `New2` work in both modes.
    fn mode_ok(&self, spec: &FactorialSpec) -> bool {
        match self {
            TransformTag::T1 { .. }
            | TransformTag::T2
            | TransformTag::T2b { .. }
            | TransformTag::T3 { .. }
            | TransformTag::T4 { .. }
            | TransformTag::T5 => spec.is_basic(),
            TransformTag::T1e { .. } | TransformTag::T3e { .. } | TransformTag::T5e => !spec.is_basic(),
            TransformTag::New1 | TransformTag::New2 { .. } => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformStep {
    pub tag: TransformTag,
    pub derived_m: Monomial,
}

/// The variables of a theorem in its own notation, derived from the output base.
#[derive(Clone, Debug)]
struct Frame {
    /// The theorem's `a`, `k`, `m` and base `(q, p)`.
    a: Monomial,
    k: Monomial,
    m: Monomial,
    s: FactorialSpec,
    /// Base the output pair lives in.
    out: PairBase,
    /// Base the input pair must live in.
    input: PairBase,
}

fn sqrt_check(root: &Monomial, target: &Monomial, what: &str) -> Result<()> {
    if &(root * root) != target {
        return Err(Error::ConstraintViolation(format!("declared {what} root {root} does not square to {target}")));
    }
    Ok(())
}

fn frame(tag: &TransformTag, out: &PairBase) -> Result<Frame> {
    if !tag.mode_ok(&out.spec) {
        return Err(Error::ConstraintViolation(format!("{} does not apply in this nome mode", tag.name())));
    }
    let (a, k, s) = (out.a.clone(), out.k.clone(), out.spec.clone());
    let q = out.q();
    let same = |m: Monomial| Frame {
        input: PairBase::new(a.clone(), m.clone(), s.clone()),
        a: a.clone(),
        k: k.clone(),
        m,
        s: s.clone(),
        out: out.clone(),
    };
    Ok(match tag {
        TransformTag::T1 { b, c } | TransformTag::T1e { b, c } => same(&(b * c) * &k / (&a * &q)),
        TransformTag::T2 => same(&(&a * &a) * &q / &k),
        TransformTag::T2b { sigma, k_root, m_root } => {
            if sigma.abs() != 1 {
                return Err(Error::ConstraintViolation("sigma must be +-1".into()));
            }
            let m = &(&a * &a) / &k;
            sqrt_check(k_root, &k, "k")?;
            sqrt_check(m_root, &m, "m")?;
            if (k_root * m_root) != a {
                return Err(Error::ConstraintViolation("T2b needs the root pairing k^(1/2) m^(1/2) = a".into()));
            }
            same(m)
        }
        TransformTag::T3 { a_root, q_root } | TransformTag::T3e { a_root, q_root } | TransformTag::T4 { a_root, q_root } => {
            sqrt_check(a_root, &a, "a")?;
            if &q_root.powi(2) != s.base() {
                return Err(Error::ConstraintViolation("declared q root does not square to the base".into()));
            }
            if s.nome_exponent() % 4 != 0 {
                return Err(Error::ConstraintViolation(format!("{} needs an output nome that is a square", tag.name())));
            }
            let small = FactorialSpec::new(q_root.clone(), s.nome_exponent() / 2)?;
            let qs = small.q_pow(1);
            let m = match tag {
                TransformTag::T4 { .. } => &k / a_root,
                _ => &k / &(a_root * &qs),
            };
            Frame {
                input: PairBase::new(a_root.clone(), m.clone(), small.clone()),
                a: a_root.clone(),
                k: k.clone(),
                m,
                s: small,
                out: out.clone(),
            }
        }
        TransformTag::T5 | TransformTag::T5e => {
            let m = &(&k * &k) / &a;
            Frame {
                input: PairBase::new(a.clone(), m.clone(), s.with_base_power(2)?),
                a: a.clone(),
                k: k.clone(),
                m,
                s: s.clone(),
                out: out.clone(),
            }
        }
        TransformTag::New1 => same(&(&a * &a) / &k),
        TransformTag::New2 { k_root, q_root } => {
            sqrt_check(k_root, &k, "k")?;
            if &q_root.powi(2) != s.base() {
                return Err(Error::ConstraintViolation("declared q root does not square to the base".into()));
            }
            if s.nome_exponent() % 4 != 0 {
                return Err(Error::ConstraintViolation("New2 needs an output nome that is a square".into()));
            }
            let small = FactorialSpec::new(q_root.clone(), s.nome_exponent() / 2)?;
            let m = &a / &(k_root * small.q_pow(1));
            Frame {
                input: PairBase::new(a.clone(), &m * &m, s.clone()),
                a: a.clone(),
                k: k_root.clone(),
                m,
                s: small,
                out: out.clone(),
            }
        }
    })
}

/// The input base a tag demands for a given output base, plus the recorded `m`.
pub fn required_input(tag: &TransformTag, out: &PairBase) -> Result<(PairBase, Monomial)> {
    let f = frame(tag, out)?;
    Ok((f.input, f.m))
}

/// Which input alpha feeds output alpha `n` (`None`: the output term is 0).
fn alpha_index(tag: &TransformTag, n: usize) -> Option<usize> {
    match tag {
        TransformTag::T5 | TransformTag::T5e => n.is_multiple_of(2).then_some(n / 2),
        _ => Some(n),
    }
}

/// Output alpha index fed by input alpha `r` (inverse of `alpha_index`).
fn alpha_source(tag: &TransformTag, r: usize) -> usize {
    match tag {
        TransformTag::T5 | TransformTag::T5e => 2 * r,
        _ => r,
    }
}

/// Input beta indices contributing to output beta `n`.
fn beta_support(tag: &TransformTag, n: usize) -> Vec<usize> {
    match tag {
        TransformTag::T5 | TransformTag::T5e => (0..=n / 2).collect(),
        TransformTag::New1 => (n % 2..=n).step_by(2).collect(),
        _ => (0..=n).collect(),
    }
}

/// `L_n`: output `alpha'_n = L_n alpha_{index(n)}`.
fn l_factor(tag: &TransformTag, f: &Frame, n: usize) -> QProduct {
    let n = n as i64;
    let (a, k, m, s) = (&f.a, &f.k, &f.m, &f.s);
    let q = s.q_pow(1);
    match tag {
        TransformTag::T1 { b, c } | TransformTag::T1e { b, c } => {
            let aq = a * &q;
            QProduct::new().facts(&[b.clone(), c.clone()], n, s).over_facts(&[&aq / b, &aq / c], n, s).times(&(k / m).powi(n))
        }
        TransformTag::T2 => QProduct::new().fact(m, 2 * n, s).over_fact(k, 2 * n, s).times(&(k / m).powi(n)),
        TransformTag::T2b { sigma, k_root, m_root } => {
            let sk = k_root.scale(&Rat::from_integer((*sigma).into()));
            let sm = -m_root.scale(&Rat::from_integer((*sigma).into()));
            QProduct::new()
                .theta(&sk, s)
                .over_theta(&(&sk * s.q_pow(n)), s)
                .theta(&(&sm * s.q_pow(n)), s)
                .over_theta(&sm, s)
                .fact(m, 2 * n, s)
                .over_fact(k, 2 * n, s)
                .times(&(k / m).powi(n))
        }
        TransformTag::T3 { .. } | TransformTag::T3e { .. } | TransformTag::T5 | TransformTag::T5e => QProduct::new(),
        TransformTag::T4 { .. } => QProduct::new()
            .theta(&-(a * s.q_pow(2 * n)), s)
            .over_theta(&-a.clone(), s)
            .times(&q.powi(-n)),
        TransformTag::New1 => {
            let s2 = s.with_base_power(2).expect("valid base");
            QProduct::new().fact(&(m * &q), n, &s2).over_fact(&(k * &q), n, &s2).times(&(-(a / m)).powi(n))
        }
        TransformTag::New2 { .. } => QProduct::new()
            .fact(&-(m * &q), 2 * n, s)
            .over_fact(&-(k * &q), 2 * n, s)
            .times(&(a / &(&(m * m) * &q)).powi(n)),
    }
}

/// `N_{n,r}`: output `beta'_n = sum_r N_{n,r} beta_r` over `beta_support`.
fn n_coeff(tag: &TransformTag, f: &Frame, n: usize, r: usize) -> QProduct {
    let (ni, ri) = (n as i64, r as i64);
    let (a, k, m, s) = (&f.a, &f.k, &f.m, &f.s);
    let q = s.q_pow(1);
    let standard = |p: QProduct, km: &Monomial, mq: &Monomial, spec: &FactorialSpec, lo: i64, hi: i64| {
        p.fact(km, lo, spec).over_fact(&spec.q_pow(1), lo, spec).fact(k, hi, spec).over_fact(mq, hi, spec)
    };
    match tag {
        TransformTag::T1 { b, c } | TransformTag::T1e { b, c } => {
            let aq = a * &q;
            let mq = m * &q;
            let p = QProduct::new()
                .facts(&[&mq / b, &mq / c], ni, s)
                .over_facts(&[&aq / b, &aq / c], ni, s)
                .theta(&(m * s.q_pow(2 * ri)), s)
                .over_theta(m, s)
                .facts(&[b.clone(), c.clone()], ri, s)
                .over_facts(&[&mq / b, &mq / c], ri, s)
                .times(&(k / m).powi(ri));
            standard(p, &(k / m), &mq, s, ni - ri, ni + ri)
        }
        TransformTag::T2 => QProduct::new().fact(&(k / m), ni - ri, s).over_fact(&q, ni - ri, s).times(&(k / m).powi(ri)),
        TransformTag::T2b { sigma, k_root, m_root } => {
            let sk = k_root.scale(&Rat::from_integer((*sigma).into()));
            let sm = -m_root.scale(&Rat::from_integer((*sigma).into()));
            QProduct::new()
                .theta(&sk, s)
                .over_theta(&(&sk * s.q_pow(ni)), s)
                .theta(&(&sm * s.q_pow(ri)), s)
                .over_theta(&sm, s)
                .fact(&(k / m), ni - ri, s)
                .over_fact(&q, ni - ri, s)
                .times(&(k / m).powi(ri))
        }
        TransformTag::T3 { .. } | TransformTag::T3e { .. } | TransformTag::T4 { .. } => {
            let ss = &f.out.spec;
            let mut p = QProduct::new()
                .fact(&-(m * &q), 2 * ni, s)
                .theta(&(m * s.q_pow(2 * ri)), s)
                .over_theta(m, s)
                .times(&(m / a).powi(ni - ri));
            p = match tag {
                TransformTag::T4 { .. } => p.over_fact(&-a.clone(), 2 * ni, s).times(&q.powi(-ni)),
                _ => p.over_fact(&-(a * &q), 2 * ni, s),
            };
            standard(p, &(k / &(m * m)), &(&(m * m) * &(&q * &q)), ss, ni - ri, ni + ri)
        }
        TransformTag::T5 | TransformTag::T5e => {
            let s2 = s.with_base_power(2).expect("valid base");
            let mq = m * &q;
            let p = QProduct::new()
                .fact(&mq, ni, &s2)
                .over_fact(&(a * &q), ni, &s2)
                .theta(&(m * s.q_pow(4 * ri)), s)
                .over_theta(m, s)
                .times(&(-(k / a)).powi(ni - 2 * ri));
            standard(p, &(k / m), &mq, s, ni - 2 * ri, ni + 2 * ri)
        }
        TransformTag::New1 => {
            let s2 = s.with_base_power(2).expect("valid base");
            let (h, g) = ((ni - ri) / 2, (ni + ri) / 2);
            let p = QProduct::new().theta(&(m * s.q_pow(2 * ri)), s).over_theta(m, s).times(&(-(a / m)).powi(ri));
            standard(p, &(k / m), &(m * s2.q_pow(1)), &s2, h, g)
        }
        TransformTag::New2 { .. } => {
            let big = &f.out.spec;
            let m2 = m * m;
            let p = QProduct::new()
                .theta(&-k.clone(), s)
                .over_theta(&-(k * s.q_pow(2 * ni)), s)
                .theta(&(&m2 * s.q_pow(4 * ri)), big)
                .over_theta(&m2, big)
                .times(&q.powi(-ni))
                .times(&(a / &m2).powi(ri));
            standard(p, &(k / m), &(m * &q), s, ni - ri, ni + ri)
        }
    }
}

/// Apply one theorem. `out` is the base of the pair to produce; the input
/// pair must sit at the base the theorem derives from it.
pub fn apply_transform(tag: &TransformTag, out: &PairBase, input: &WPPair) -> Result<WPPair> {
    let f = frame(tag, out)?;
    if input.base != f.input {
        return Err(Error::ConstraintViolation(format!(
            "{} needs an input pair at a = {}, k = {}, q = {}, nome w^{}; got a = {}, k = {}, q = {}, nome w^{}",
            tag.name(),
            f.input.a,
            f.input.k,
            f.input.spec.base().render(),
            f.input.spec.nome_exponent(),
            input.base.a,
            input.base.k,
            input.base.spec.base().render(),
            input.base.spec.nome_exponent()
        )));
    }
    let alpha = {
        let (tag, f, src) = (tag.clone(), f.clone(), input.alpha.clone());
        Sequence::new(move |n, order| match alpha_index(&tag, n) {
            None => Ok(NomeSeries::zero(order)),
            Some(j) => {
                let l = l_factor(&tag, &f, n);
                product_at(order, &[&|o| l.eval(o), &|o| src.get(j, o)])
            }
        })
    };
    let beta = {
        let (tag, f, src) = (tag.clone(), f.clone(), input.beta.clone());
        Sequence::new(move |n, order| {
            let mut acc = NomeSeries::zero(order);
            for r in beta_support(&tag, n) {
                let c = n_coeff(&tag, &f, n, r);
                acc = &acc + &product_at(order, &[&|o| src.get(r, o), &|o| c.eval(o)])?;
            }
            Ok(acc)
        })
    };
    let mut provenance = input.provenance.clone();
    provenance.push(TransformStep { tag: tag.clone(), derived_m: f.m.clone() });
    Ok(WPPair { base: out.clone(), alpha, beta, provenance })
}

/// The matrix identity behind a theorem:
/// `sum_s N_{n,s} M_{s,r}(input) = M_{n,j}(output) L_j` with `j` the output
/// alpha index fed by input index `r`. Returns one comparison per `(n, r)`.
pub fn kernel_identity(tag: &TransformTag, out: &PairBase, n_max: usize, order: i64) -> Result<Vec<((usize, usize), Comparison)>> {
    Ok(kernel_identity_sides(tag, out, n_max, order)?.into_iter().map(|(ix, lhs, rhs)| (ix, lhs.compare(&rhs))).collect())
}

/// Both sides of every `(n, r)` instance of the matrix identity.
pub fn kernel_identity_sides(
    tag: &TransformTag,
    out: &PairBase,
    n_max: usize,
    order: i64,
) -> Result<Vec<((usize, usize), NomeSeries, NomeSeries)>> {
    let f = frame(tag, out)?;
    let mut results = Vec::new();
    for n in 0..=n_max {
        for r in 0..=n {
            let j = alpha_source(tag, r);
            if j > n {
                continue;
            }
            let mut lhs = NomeSeries::zero(order);
            for s in beta_support(tag, n) {
                if s < r {
                    continue;
                }
                let c = n_coeff(tag, &f, n, s);
                let kernel = kernel_m_product(s, r, &f.input.a, &f.input.k, &f.input.spec);
                lhs = &lhs + &product_at(order, &[&|o| c.eval(o), &|o| kernel.eval(o)])?;
            }
            let kernel = kernel_m_product(n, j, &out.a, &out.k, &out.spec);
            let l = l_factor(tag, &f, j);
            let rhs = product_at(order, &[&|o| kernel.eval(o), &|o| l.eval(o)])?;
            results.push(((n, r), lhs, rhs));
        }
    }
    Ok(results)
}

/// A bibasic pair `(A^(i), B^(i))` at base `(a, k; q, p)`.
#[derive(Clone, Debug)]
pub struct BibasicPair {
    pub i: usize,
    pub base: PairBase,
    pub a_seq: Sequence,
    pub b_seq: Sequence,
}

/// Coefficient of `A_r` in `B_n`; lengths `n - ir` may be negative.
pub fn bibasic_kernel(i: usize, n: usize, r: usize, base: &PairBase) -> Result<QProduct> {
    let (ii, ni, ri) = (i as i64, n as i64, r as i64);
    let s = &base.spec;
    let si = s.with_base_power(ii)?;
    let (a, k) = (&base.a, &base.k);
    Ok(QProduct::new()
        .fact(&(k / a), ni - ii * ri, s)
        .over_fact(&si.q_pow(1), ni - ri, &si)
        .fact(k, ni + ii * ri, s)
        .over_fact(&(a * si.q_pow(1)), ni + ri, &si))
}

/// `B_n` recomputed from `A` by the bibasic defining relation.
pub fn bibasic_forward(pair: &BibasicPair, n: usize, order: i64) -> Result<NomeSeries> {
    let mut acc = NomeSeries::zero(order);
    for r in 0..=n {
        let c = bibasic_kernel(pair.i, n, r, &pair.base)?;
        acc = &acc + &product_at(order, &[&|o| c.eval(o), &|o| pair.a_seq.get(r, o)])?;
    }
    Ok(acc)
}

/// The closed-form bibasic pair with extra parameter `b`.
pub fn bibasic_closed_form(i: usize, a: &Monomial, k: &Monomial, b: &Monomial, spec: &FactorialSpec) -> Result<BibasicPair> {
    if i == 0 {
        return Err(Error::ConstraintViolation("bibasic index i must be positive".into()));
    }
    let base = PairBase::new(a.clone(), k.clone(), spec.clone());
    let si = spec.with_base_power(i as i64)?;
    let a_seq = {
        let (a, k, b, s, si) = (a.clone(), k.clone(), b.clone(), spec.clone(), si.clone());
        Sequence::new(move |n, order| {
            let (ii, ni) = (i as i64, n as i64);
            let qi = si.q_pow(1);
            let q = s.q_pow(1);
            let sign = Monomial::constant(Rat::from_integer((if n % 2 == 0 { 1 } else { -1 }).into()));
            QProduct::new()
                .theta(&(&a * s.q_pow(2 * ii * ni)), &s)
                .over_theta(&a, &s)
                .facts(&[a.clone(), b.clone(), &a / &b], ni, &si)
                .over_facts(&[qi.clone(), &(&a * &qi) / &b, &b * &qi], ni, &si)
                .fact(&(&(&a * &q) / &k), ii * ni, &s)
                .over_fact(&k, ii * ni, &s)
                .times(&sign)
                .times(&q.powi(-(ii * (ii - 1) / 2) * ni * ni))
                .times(&(-(&k / &a)).powi(ii * ni))
                .eval(order)
        })
    };
    let b_seq = {
        let (a, k, b, s, si) = (a.clone(), k.clone(), b.clone(), spec.clone(), si);
        Sequence::new(move |n, order| {
            let ni = n as i64;
            let qi = si.q_pow(1);
            QProduct::new()
                .facts(&[&(&b * &k) / &a, &k / &b], ni, &s)
                .over_facts(&[&(&a * &qi) / &b, &b * &qi], ni, &si)
                .eval(order)
        })
    };
    Ok(BibasicPair { i, base, a_seq, b_seq })
}

/// Monomial law `sign^n a^(a_exp n) m^(m_exp n)` for the alpha prefactor of the
/// cubic lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExponentLaw {
    pub sign: i8,
    pub a_exp: i64,
    pub m_exp: i64,
}

impl ExponentLaw {
    pub fn at(&self, a: &Monomial, m: &Monomial, n: i64) -> Monomial {
        let s = Monomial::constant(Rat::from_integer((if self.sign < 0 && n % 2 != 0 { -1 } else { 1 }).into()));
        &s * &(&a.powi(self.a_exp * n) * &m.powi(self.m_exp * n))
    }
}

impl fmt::Display for ExponentLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.sign < 0 {
            parts.push("(-1)^n".to_string());
        }
        for (sym, e) in [("a", self.a_exp), ("m", self.m_exp)] {
            match e {
                0 => {}
                1 => parts.push(format!("{sym}^n")),
                _ => parts.push(format!("{sym}^({e}n)")),
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftStep {
    /// Quadratic lift to a pair at `(a, k; q^2, p)`.
    Lift2 { k: Monomial },
    /// Cubic lift to `(a, m^3/a; q^3, p)` with the given alpha prefactor law.
    Lift3 { law: ExponentLaw },
}

/// Turn a bibasic pair at `(a, m; q, p)` into an ordinary pair.
pub fn lift_bibasic(step: &LiftStep, input: &BibasicPair) -> Result<WPPair> {
    let (a, m, s) = (input.base.a.clone(), input.base.k.clone(), input.base.spec.clone());
    let q = s.q_pow(1);
    match step {
        LiftStep::Lift2 { k } => {
            if input.i != 2 {
                return Err(Error::ConstraintViolation("Lift2 needs a bibasic pair with i = 2".into()));
            }
            let s2 = s.with_base_power(2)?;
            let k = k.clone();
            let base = PairBase::new(a.clone(), k.clone(), s2.clone());
            let m2q = &(&m * &m) * &q;
            let akq = &(&(&a * &k) * &q) / &(&m * &m);
            let alpha = {
                let (k, m2q, akq, src, a, m, q, s2) = (k.clone(), m2q.clone(), akq.clone(), input.a_seq.clone(), a.clone(), m.clone(), q.clone(), s2.clone());
                Sequence::new(move |n, order| {
                    let ni = n as i64;
                    let pre = QProduct::new()
                        .fact(&(&m2q / &k), ni, &s2)
                        .over_fact(&akq, ni, &s2)
                        .times(&q.powi(ni * ni))
                        .times(&(-(&(&a * &k) / &(&m * &m))).powi(ni));
                    product_at(order, &[&|o| pre.eval(o), &|o| src.get(n, o)])
                })
            };
            let beta = {
                let (src, a, m, q, s, s2) = (input.b_seq.clone(), a.clone(), m.clone(), q.clone(), s.clone(), s2.clone());
                Sequence::new(move |n, order| {
                    let ni = n as i64;
                    let mut acc = NomeSeries::zero(order);
                    for r in 0..=ni {
                        let c = QProduct::new()
                            .fact(&(&m2q / &a), ni, &s2)
                            .over_fact(&akq, ni, &s2)
                            .theta(&(&m * s.q_pow(3 * r)), &s)
                            .over_theta(&m, &s)
                            .fact(&(&(&a * &q) / &m), r, &s)
                            .over_fact(&(&m2q / &a), r, &s2)
                            .fact(&(&m2q / &k), r, &s2)
                            .over_fact(&(&k / &m), r, &s)
                            .fact(&(&k / &m), 2 * ni - r, &s)
                            .over_fact(&s2.q_pow(1), ni - r, &s2)
                            .fact(&k, ni + r, &s2)
                            .over_fact(&(&m * &q), 2 * ni + r, &s)
                            .times(&q.powi(r * (r - 1) / 2))
                            .times(&(&k / &m).powi(r));
                        acc = &acc + &product_at(order, &[&|o| c.eval(o), &|o| src.get(r as usize, o)])?;
                    }
                    Ok(acc)
                })
            };
            Ok(WPPair::new(base, alpha, beta))
        }
        LiftStep::Lift3 { law } => {
            if input.i != 3 {
                return Err(Error::ConstraintViolation("Lift3 needs a bibasic pair with i = 3".into()));
            }
            let s3 = s.with_base_power(3)?;
            let k = &m.powi(3) / &a;
            let base = PairBase::new(a.clone(), k.clone(), s3.clone());
            let alpha = {
                let (law, src, a, m, q) = (*law, input.a_seq.clone(), a.clone(), m.clone(), q.clone());
                Sequence::new(move |n, order| {
                    let ni = n as i64;
                    let pre = &q.powi(3 * ni * ni) * &law.at(&a, &m, ni);
                    Ok(src.get(n, order - pre.exp())?.mul_monomial(&pre).truncate(order))
                })
            };
            let beta = {
                let (src, a, m, q, s, s3) = (input.b_seq.clone(), a.clone(), m.clone(), q.clone(), s.clone(), s3);
                Sequence::new(move |n, order| {
                    let ni = n as i64;
                    let mut acc = NomeSeries::zero(order);
                    for r in 0..=ni {
                        let c = QProduct::new()
                            .theta(&(&m * s.q_pow(4 * r)), &s)
                            .over_theta(&m, &s)
                            .fact(&(&(&a * &q) / &m), 2 * r, &s)
                            .over_fact(&(&(&m * &m) / &a), 2 * r, &s)
                            .fact(&(&k / &m), 3 * ni - r, &s)
                            .over_fact(&s3.q_pow(1), ni - r, &s3)
                            .fact(&k, ni + r, &s3)
                            .over_fact(&(&m * &q), 3 * ni + r, &s)
                            .times(&q.powi(r * (r - 1)))
                            .times(&(&k / &m).powi(r));
                        acc = &acc + &product_at(order, &[&|o| c.eval(o), &|o| src.get(r as usize, o)])?;
                    }
                    Ok(acc)
                })
            };
            Ok(WPPair::new(base, alpha, beta))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn c(n: i64, d: i64) -> Monomial {
        Monomial::constant(rat(n, d))
    }

    #[test]
    fn kernel_m_basic_value() {
        let spec = FactorialSpec::basic(rat(3, 1)).unwrap();
        let v = kernel_m(1, 0, &c(4, 1), &c(2, 1), &spec, 4).unwrap();
        assert_eq!(v, NomeSeries::constant(rat(-1, 44), 4));
        assert_eq!(kernel_m(0, 0, &c(4, 1), &c(2, 1), &spec, 4).unwrap(), NomeSeries::one(4));
        assert!(matches!(kernel_m(1, 2, &c(4, 1), &c(2, 1), &spec, 4), Err(Error::IndexRange(_))));
    }

    #[test]
    fn unit_pair_first_alpha() {
        let spec = FactorialSpec::basic(rat(3, 1)).unwrap();
        let pair = unit_pair(&c(4, 1), &c(2, 1), &spec);
        assert_eq!(pair.alpha.get(0, 4).unwrap(), NomeSeries::one(4));
        assert_eq!(pair.alpha.get(1, 4).unwrap(), NomeSeries::constant(rat(7, 4), 4));
    }

    #[test]
    fn sequence_memo_truncates() {
        let s = Sequence::new(|n, order| Ok(NomeSeries::from_terms([(0, rat(1, 1)), (n as i64 + 1, rat(1, 1))], order)));
        let hi = s.get(3, 10).unwrap();
        assert_eq!(s.get(3, 6).unwrap(), hi.truncate(6));
    }

    #[test]
    fn exponent_law_display() {
        assert_eq!(ExponentLaw { sign: 1, a_exp: 1, m_exp: 0 }.to_string(), "a^n");
        assert_eq!(ExponentLaw { sign: -1, a_exp: 2, m_exp: -1 }.to_string(), "(-1)^n*a^(2n)*m^(-1n)");
        assert_eq!(ExponentLaw { sign: 1, a_exp: 0, m_exp: 0 }.to_string(), "1");
    }
}
