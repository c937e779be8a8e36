//! The identity registry: every identity as a two-sided check with a
//! sampling plan and a deliberately broken variant for negative controls.

use crate::arith::{Monomial, NomeSeries, Rat};
use crate::bailey::{
    backward, bibasic_closed_form, bibasic_forward, bibasic_kernel, forward, kernel_identity_sides, kernel_m, kernel_mtilde, lift_bibasic,
    product_at, required_input, unit_pair, apply_transform, ExponentLaw, LiftStep, PairBase, Sequence, TransformTag,
};
use crate::error::{Error, Result};
use crate::hypergeometric::{
    eval_phi, eval_v, eval_w, lemma1_lhs, lemma2_lhs, new_bibasic_lhs, sum_elliptic_jackson, sum_lemma1, sum_lemma2, sum_new_bibasic,
    SeriesSpec,
};
use crate::qobjects::{qfact, qfact_shift, FactorialSpec, QProduct, ShiftDirection};

use super::probe::{check_generic, default_candidates, probe_input, probe_pair, Candidate};
use super::{define, define_q, define_root, free, free_w, square, Check, Expr, IdentityCase, ParamPoint, Plan};

/// Default truncation order.
const ORDER: i64 = 16;
/// Order for identities with `p^-1` parameters.
const ORDER_NEGATIVE: i64 = 24;
/// Working order for constant-term (p -> 0) evaluations.
const LIMIT_ORDER: i64 = 2;
const BASIC_N: usize = 6;
const ELLIPTIC_N: usize = 4;

fn get(pt: &ParamPoint, s: &str) -> Result<Monomial> {
    Ok(pt.get(s)?.clone())
}

fn root(pt: &ParamPoint, s: &str) -> Result<Monomial> {
    Ok(pt.root(s)?.clone())
}

fn basic(pt: &ParamPoint) -> Result<FactorialSpec> {
    FactorialSpec::basic(pt.q().clone())
}

fn elliptic(pt: &ParamPoint) -> Result<FactorialSpec> {
    FactorialSpec::elliptic(pt.q().clone())
}

fn int(n: i64) -> Monomial {
    Monomial::from(n)
}

/// `p^(1/2) = w` for the standard nome `p = w^2`.
fn w() -> Monomial {
    Monomial::w(1)
}

fn constant(x: Rat, order: i64) -> NomeSeries {
    NomeSeries::constant(x, order)
}

fn delta(n: usize, r: usize, order: i64) -> NomeSeries {
    if n == r {
        NomeSeries::one(order)
    } else {
        NomeSeries::zero(order)
    }
}

fn product(order: i64, x: &QProduct, y: &dyn Fn(i64) -> Result<NomeSeries>) -> Result<NomeSeries> {
    product_at(order, &[&|o| x.eval(o), y])
}

/// Constant term of an elliptic evaluation, as a series known to `order`.
fn limit(x: Result<NomeSeries>, order: i64) -> Result<NomeSeries> {
    Ok(constant(x?.constant_term()?, order))
}

// ---------------------------------------------------------------- kernels

fn inverse_checks(spec: FactorialSpec, pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k) = (get(pt, "a")?, get(pt, "k")?);
    let kt = if perturbed { &k * spec.q_pow(1) } else { k.clone() };
    let mut out = Vec::new();
    for n in 0..=max_n {
        for r in 0..=n {
            let mut lhs = NomeSeries::zero(order);
            let mut companion = NomeSeries::zero(order);
            for s in r..=n {
                lhs = lhs + product_at(order, &[&|o| kernel_mtilde(n, s, &a, &kt, &spec, o), &|o| kernel_m(s, r, &a, &k, &spec, o)])?;
                companion =
                    companion + product_at(order, &[&|o| kernel_m(n, s, &a, &k, &spec, o), &|o| kernel_mtilde(s, r, &a, &kt, &spec, o)])?;
            }
            out.push(Check::new(format!("n={n},r={r}"), lhs, delta(n, r, order)));
            out.push(Check::new(format!("n={n},r={r},companion"), companion, delta(n, r, order)));
        }
    }
    Ok(out)
}

fn wp_inverse(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    inverse_checks(basic(pt)?, pt, max_n, order, perturbed)
}

fn wp_inverse_elliptic(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    inverse_checks(elliptic(pt)?, pt, max_n, order, perturbed)
}

fn kernel_checks(tags: &[TransformTag], out: &PairBase, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for tag in tags {
        for ((n, r), lhs, rhs) in kernel_identity_sides(tag, out, max_n, order)? {
            let rhs = if perturbed { rhs.mul_monomial(&out.spec.q_pow(n as i64)) } else { rhs };
            checks.push(Check::new(format!("{}:n={n},r={r}", tag.name()), lhs, rhs));
        }
    }
    Ok(checks)
}

fn kernel_nmml(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k, ks) = (get(pt, "a")?, get(pt, "k")?, root(pt, "k")?);
    let m_root = &a / &ks;
    let tags: Vec<_> = [1i8, -1].iter().map(|&sigma| TransformTag::T2b { sigma, k_root: ks.clone(), m_root: m_root.clone() }).collect();
    kernel_checks(&tags, &PairBase::new(a, k, basic(pt)?), max_n, order, perturbed)
}

fn kernel_nmml2(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k) = (get(pt, "a")?, get(pt, "k")?);
    let tag = TransformTag::T4 { a_root: root(pt, "a")?, q_root: root(pt, "q")?.coeff().clone() };
    kernel_checks(&[tag], &PairBase::new(a, k, basic(pt)?), max_n, order, perturbed)
}

fn kernel_nmme(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k) = (get(pt, "a")?, get(pt, "k")?);
    let tag = TransformTag::T3e { a_root: root(pt, "a")?, q_root: root(pt, "q")?.coeff().clone() };
    kernel_checks(&[tag], &PairBase::new(a, k, FactorialSpec::new(pt.q().clone(), 4)?), max_n, order, perturbed)
}

fn kernel_nmm2e(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k) = (get(pt, "a")?, get(pt, "k")?);
    kernel_checks(&[TransformTag::T5e], &PairBase::new(a, k, elliptic(pt)?), max_n, order, perturbed)
}

// ---------------------------------------------------------- summations

/// `6W5(k q^2r; k/a, a q^(n+r), q^-(n-r); q, q) = delta_{n,r}`.
fn rogers_delta(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k, s) = (get(pt, "a")?, get(pt, "k")?, basic(pt)?);
    let arg = s.q_pow(if perturbed { 2 } else { 1 });
    let mut out = Vec::new();
    for n in 0..=max_n {
        for r in 0..=n {
            let (ni, ri) = (n as i64, r as i64);
            let series = SeriesSpec::w(&k * s.q_pow(2 * ri), vec![&k / &a, &a * s.q_pow(ni + ri), s.q_pow(ri - ni)], arg.clone(), s.clone())?;
            out.push(Check::new(format!("n={n},r={r}"), eval_w(&series, order)?, delta(n, r, order)));
        }
    }
    Ok(out)
}

fn lemma1(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, c) = (get(pt, "a")?, get(pt, "b")?, get(pt, "c")?);
    let q = pt.q();
    let bl = if perturbed { b.times_pow(q, 1) } else { b.clone() };
    (0..=max_n)
        .map(|n| {
            let lhs = eval_phi(&lemma1_lhs(&a, &bl, &c, n, q)?, order)?;
            Ok(Check::new(format!("n={n}"), lhs, constant(sum_lemma1(&a, &b, &c, n, q)?, order)))
        })
        .collect()
}

fn lemma2(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, bs) = (get(pt, "a")?, get(pt, "b")?, root(pt, "b")?);
    let q = pt.q();
    let (bl, bsl) = if perturbed { (b.times_pow(q, 2), bs.times_pow(q, 1)) } else { (b.clone(), bs.clone()) };
    let mut out = Vec::new();
    for n in 0..=max_n {
        let rhs = constant(sum_lemma2(&a, &b, Some(&bs), n, q)?, order);
        for (label, r) in [("", bsl.clone()), (",negated root", -bsl.clone())] {
            let lhs = eval_w(&lemma2_lhs(&a, &bl, Some(&r), n, q)?, order)?;
            out.push(Check::new(format!("n={n}{label}"), lhs, rhs.clone()));
        }
    }
    Ok(out)
}

fn elliptic_jackson(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, c, d) = (get(pt, "a")?, get(pt, "b")?, get(pt, "c")?, get(pt, "d")?);
    let s = elliptic(pt)?;
    let mut out = Vec::new();
    for n in 0..=max_n {
        let ni = n as i64;
        let e = &(&a * &a) * &s.q_pow(ni + 1) / &(&(&b * &c) * &d);
        let el = if perturbed { &e * s.q_pow(1) } else { e.clone() };
        let lhs = eval_v(&SeriesSpec::v(a.clone(), vec![b.clone(), c.clone(), d.clone(), el, s.q_pow(-ni)], s.clone())?, order)?;
        out.push(Check::new(format!("n={n}"), lhs, sum_elliptic_jackson(&a, &b, &c, &d, &e, n, &s, order)?));
    }
    Ok(out)
}

fn new_bibasic_sum(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, s) = (get(pt, "a")?, get(pt, "b")?, elliptic(pt)?);
    let bl = if perturbed { &b * s.q_pow(1) } else { b.clone() };
    (0..=max_n)
        .map(|n| Ok(Check::new(format!("n={n}"), new_bibasic_lhs(&a, &bl, n, &s, order)?, sum_new_bibasic(&a, &b, n, &s, order)?)))
        .collect()
}

// ------------------------------------------------------ structure lemmas

/// `theta(a q^2k)/theta(a)` against its two product forms. The control uses
/// the form with mismatched `p^(1/2)` powers and a stray `(-q)^k`.
fn theta_quotient(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, al, s) = (get(pt, "a")?, root(pt, "a")?, elliptic(pt)?);
    let q = s.q_pow(1);
    let (alw, al_w) = (&al * &w(), &al / &w());
    let mut out = Vec::new();
    for k in 0..=max_n as i64 {
        let lhs = QProduct::new().theta(&(&a * s.q_pow(2 * k)), &s).over_theta(&a, &s).eval(order)?;
        let num = |xs: [&Monomial; 4]| xs.map(|x| x * &q).to_vec();
        let forms = if perturbed {
            vec![QProduct::new()
                .facts(&num([&al, &-al.clone(), &al_w, &-alw.clone()]), k, &s)
                .over_facts(&[al.clone(), -al.clone(), alw.clone(), -al_w.clone()], k, &s)
                .times(&(-q.clone()).powi(k))]
        } else {
            vec![
                QProduct::new()
                    .facts(&num([&al, &-al.clone(), &alw, &-alw.clone()]), k, &s)
                    .over_facts(&[al.clone(), -al.clone(), alw.clone(), -alw.clone()], k, &s),
                QProduct::new()
                    .facts(&num([&al, &-al.clone(), &al_w, &-alw.clone()]), k, &s)
                    .over_facts(&[al.clone(), -al.clone(), al_w.clone(), -alw.clone()], k, &s)
                    .times(&q.powi(-k)),
            ]
        };
        for (i, f) in forms.iter().enumerate() {
            out.push(Check::new(format!("k={k},form={}", i + 1), lhs.clone(), f.eval(order)?));
        }
    }
    Ok(out)
}

/// `theta(z^2; p) = theta(z) theta(-z) theta(z p^(1/2)) theta(-z/p^(1/2)) p^(1/2)/z`.
fn theta_square(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, s) = (get(pt, "a")?, elliptic(pt)?);
    let mut out = Vec::new();
    for j in 0..=max_n as i64 {
        let z = &a * s.q_pow(j);
        let lhs = QProduct::new().theta(&(&z * &z), &s).eval(order)?;
        let last = if perturbed { -(&z * &w()) } else { -(&z / &w()) };
        let rhs = QProduct::new().theta(&z, &s).theta(&-z.clone(), &s).theta(&(&z * &w()), &s).theta(&last, &s).times(&(&w() / &z)).eval(order)?;
        out.push(Check::new(format!("z=aq^{j}"), lhs, rhs));
    }
    Ok(out)
}

fn fact_ratio_squares(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, s) = (get(pt, "a")?, get(pt, "b")?, elliptic(pt)?);
    let s2 = s.with_base_power(2)?;
    let (bw, b_w) = (&b * &w(), &b / &w());
    let den = if perturbed { [b.clone(), -b.clone(), bw, -b_w] } else { [b.clone(), -b.clone(), b_w, -bw] };
    (0..=max_n as i64)
        .map(|n| {
            let lhs = QProduct::new().fact(&(&a * &a), n, &s2).over_fact(&(&b * &b), n, &s2).eval(order)?;
            let rhs = QProduct::new()
                .facts(&[a.clone(), -a.clone(), &a * &w(), -(&a / &w())], n, &s)
                .over_facts(&den, n, &s)
                .times(&(-(&b / &a)).powi(n))
                .eval(order)?;
            Ok(Check::new(format!("n={n}"), lhs, rhs))
        })
        .collect()
}

fn sm_shifts(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, s) = (get(pt, "a")?, elliptic(pt)?);
    let s2 = s.with_base_power(2)?;
    let square_spec = if perturbed { s2.clone() } else { s.squared()? };
    let mut out = Vec::new();
    for n in 0..=max_n as i64 {
        for k in 0..=n {
            let plus = qfact(&a, (n + k) as usize, &s, order)?;
            let split = QProduct::new().fact(&a, n, &s).fact(&(&a * s.q_pow(n)), k, &s).eval(order)?;
            out.push(Check::new(format!("n={n},k={k},n+k"), plus.clone(), split));
            out.push(Check::new(format!("n={n},k={k},n+k shift"), plus, qfact_shift(&a, n, k, &s, ShiftDirection::Add, order)?));
            let minus = qfact(&a, (n - k) as usize, &s, order)?;
            let reflected = s.q_pow(1 - n) / &a;
            let formula = QProduct::new()
                .fact(&a, n, &s)
                .over_fact(&reflected, k, &s)
                .times(&(-reflected.clone()).powi(k))
                .times(&s.q_pow(k * (k - 1) / 2))
                .eval(order)?;
            out.push(Check::new(format!("n={n},k={k},n-k"), minus.clone(), formula));
            out.push(Check::new(format!("n={n},k={k},n-k shift"), minus, qfact_shift(&a, n, k, &s, ShiftDirection::Subtract, order)?));
        }
        let sq = QProduct::new().fact(&(&a * &a), n, &square_spec).eval(order)?;
        out.push(Check::new(format!("n={n},square"), sq, QProduct::new().facts(&[a.clone(), -a.clone()], n, &s).eval(order)?));
        let double = qfact(&a, 2 * n as usize, &s, order)?;
        out.push(Check::new(format!("n={n},double"), double, QProduct::new().facts(&[a.clone(), &a * s.q_pow(1)], n, &s2).eval(order)?));
    }
    Ok(out)
}

/// `p -> 0` of a `10V9` with p-free parameters is the `10W9` with argument `q`.
fn v_to_w(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let syms = ["b", "c", "d", "e"].iter().map(|x| get(pt, x)).collect::<Result<Vec<_>>>()?;
    let (a, s, b0) = (get(pt, "a")?, elliptic(pt)?, basic(pt)?);
    let arg = b0.q_pow(if perturbed { 2 } else { 1 });
    (0..=max_n as i64)
        .map(|n| {
            let mut params = syms.clone();
            params.push(s.q_pow(-n));
            let lhs = limit(eval_v(&SeriesSpec::v(a.clone(), params.clone(), s.clone())?, LIMIT_ORDER), order)?;
            let rhs = eval_w(&SeriesSpec::w(a.clone(), params, arg.clone(), b0.clone())?, order)?;
            Ok(Check::new(format!("n={n}"), lhs, rhs))
        })
        .collect()
}

// ---------------------------------------------------------------- pairs

fn unit_checks(spec: FactorialSpec, pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k) = (get(pt, "a")?, get(pt, "k")?);
    let pair = unit_pair(&a, &k, &spec);
    let mut out = Vec::new();
    let inverted = backward(&pair.base, &Sequence::delta(), max_n, order)?;
    for (n, x) in inverted.into_iter().enumerate() {
        out.push(Check::new(format!("alpha n={n}"), pair.alpha.get(n, order)?, x));
    }
    let beta = forward(&pair.base, &pair.alpha, max_n, order)?;
    for (n, x) in beta.into_iter().enumerate() {
        let mut expected = pair.beta.get(n, order)?;
        if perturbed && n == 2 {
            expected = expected + NomeSeries::from_monomial(&spec.q_pow(1), order);
        }
        out.push(Check::new(format!("beta n={n}"), x, expected));
    }
    Ok(out)
}

fn unit_pair_basic(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    unit_checks(basic(pt)?, pt, max_n, order, perturbed)
}

fn unit_pair_elliptic(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    unit_checks(elliptic(pt)?, pt, max_n, order, perturbed)
}

/// Compare a pair's terms with closed forms and with the defining relation.
fn pair_checks(
    label: &str,
    base: &PairBase,
    alpha: &Sequence,
    beta: &Sequence,
    closed_alpha: &dyn Fn(usize, i64) -> Result<NomeSeries>,
    closed_beta: &dyn Fn(usize, i64) -> Result<NomeSeries>,
    max_n: usize,
    order: i64,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let recomputed = forward(base, alpha, max_n, order)?;
    for (n, x) in recomputed.into_iter().enumerate() {
        let b = beta.get(n, order)?;
        out.push(Check::new(format!("{label} alpha n={n}"), alpha.get(n, order)?, closed_alpha(n, order)?));
        out.push(Check::new(format!("{label} beta n={n}"), b.clone(), closed_beta(n, order)?));
        out.push(Check::new(format!("{label} relation n={n}"), x, b));
    }
    Ok(out)
}

/// The unit pair pushed through the doubling theorem, against its closed form.
fn doubled_unit_pair(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k, s) = (get(pt, "a")?, get(pt, "k")?, elliptic(pt)?);
    let q = s.q_pow(1);
    let big = s.squared()?;
    let tag = TransformTag::T3e { a_root: a.clone(), q_root: pt.q().clone() };
    let out_base = PairBase::new(&a * &a, k.clone(), big.clone());
    let (input, m) = required_input(&tag, &out_base)?;
    let pair = apply_transform(&tag, &out_base, &unit_pair(&input.a, &input.k, &input.spec))?;
    let ratio = if perturbed { &(&m * &q) / &a } else { &m / &a };
    let closed_alpha = |n: usize, order: i64| {
        let n = n as i64;
        QProduct::new()
            .theta(&(&a * s.q_pow(2 * n)), &s)
            .over_theta(&a, &s)
            .facts(&[a.clone(), &(&a * &a) * &q / &k], n, &s)
            .over_facts(&[q.clone(), &k / &a], n, &s)
            .times(&(&k / &(&(&a * &a) * &q)).powi(n))
            .eval(order)
    };
    let closed_beta = |n: usize, order: i64| {
        let n = n as i64;
        QProduct::new()
            .fact(&-(&k / &a), 2 * n, &s)
            .over_fact(&-(&a * &q), 2 * n, &s)
            .facts(&[k.clone(), &(&a * &a) * &(&q * &q) / &k], n, &big)
            .over_facts(&[&q * &q, &(&k * &k) / &(&a * &a)], n, &big)
            .times(&ratio.powi(n))
            .eval(order)
    };
    pair_checks("T3e(unit)", &out_base, &pair.alpha, &pair.beta, &closed_alpha, &closed_beta, max_n, order)
}

/// The elliptic unit pair pushed through the even-index theorem.
fn intermediate_pair_checks(a: &Monomial, k: &Monomial, s: &FactorialSpec, max_n: usize, order: i64) -> Result<Vec<Check>> {
    let out_base = PairBase::new(a.clone(), k.clone(), s.clone());
    let (input, _) = required_input(&TransformTag::T5e, &out_base)?;
    let pair = apply_transform(&TransformTag::T5e, &out_base, &unit_pair(&input.a, &input.k, &input.spec))?;
    let s2 = s.with_base_power(2)?;
    let q = s.q_pow(1);
    let k2 = k * k;
    let closed_alpha = |n: usize, order: i64| {
        if n % 2 == 1 {
            return Ok(NomeSeries::zero(order));
        }
        let h = (n / 2) as i64;
        QProduct::new()
            .theta(&(a * s.q_pow(4 * h)), s)
            .over_theta(a, s)
            .facts(&[a.clone(), &(a * a) / &k2], h, &s2)
            .over_facts(&[&q * &q, &(&k2 * &(&q * &q)) / a], h, &s2)
            .times(&(k / a).powi(2 * h))
            .eval(order)
    };
    let closed_beta = |n: usize, order: i64| {
        let n = n as i64;
        QProduct::new()
            .fact(&(&(&k2 * &q) / a), n, &s2)
            .over_fact(&(a * &q), n, &s2)
            .facts(&[k.clone(), a / k], n, s)
            .over_facts(&[q.clone(), &(&k2 * &q) / a], n, s)
            .times(&(-(k / a)).powi(n))
            .eval(order)
    };
    pair_checks("T5e(unit)", &out_base, &pair.alpha, &pair.beta, &closed_alpha, &closed_beta, max_n, order)
}


// ------------------------------------------------- named transformations

/// Symbols shared by the two `14V13` transformations and their limits.
struct Vars {
    a: Monomial,
    b: Monomial,
    c: Monomial,
    k: Monomial,
    m: Monomial,
}

impl Vars {
    fn at(pt: &ParamPoint) -> Result<Self> {
        Ok(Vars { a: get(pt, "a")?, b: get(pt, "b")?, c: get(pt, "c")?, k: get(pt, "k")?, m: get(pt, "m")? })
    }
}

/// Left parameters of the `14V13` with `q^-n, -q^-n` (base `q`).
fn b_left(v: &Vars, pt: &ParamPoint, s: &FactorialSpec, n: i64) -> Result<Vec<Monomial>> {
    let (bs, cs, ks) = (root(pt, "b")?, root(pt, "c")?, root(pt, "k")?);
    let ksn = &ks * s.q_pow(n);
    Ok(vec![&(&v.a * &v.a) * s.q_pow(1) / &v.m, bs.clone(), -bs, cs.clone(), -cs, ksn.clone(), -ksn, s.q_pow(-n), -s.q_pow(-n)])
}

/// `(a^2q^2, k/m, mq^2/b, mq^2/c)_n / (mq^2, k/a^2, a^2q^2/b, a^2q^2/c)_n` in base `s2`.
fn b_prefactor(v: &Vars, s2: &FactorialSpec, n: i64) -> QProduct {
    let q2 = s2.q_pow(1);
    let a2q2 = &(&v.a * &v.a) * &q2;
    let mq2 = &v.m * &q2;
    QProduct::new()
        .facts(&[a2q2.clone(), &v.k / &v.m, &mq2 / &v.b, &mq2 / &v.c], n, s2)
        .over_facts(&[mq2.clone(), &v.k / &(&v.a * &v.a), &a2q2 / &v.b, &a2q2 / &v.c], n, s2)
}

/// Right parameters; `elliptic` adds the p-dependent pair `d/p, dqp`.
fn b_right(v: &Vars, d: &Monomial, s: &FactorialSpec, n: i64, elliptic: bool) -> Vec<Monomial> {
    let q = s.q_pow(1);
    let mut params = vec![&(&v.a * &v.a) * &(&q * &q) / &v.m, d.clone(), d * &q];
    if elliptic {
        params.push(d / &s.nome());
        params.push(&(d * &q) * &s.nome());
    }
    params.extend([v.b.clone(), v.c.clone(), &v.k * s.q_pow(2 * n), s.q_pow(-2 * n)]);
    params
}

fn d_for(pt: &ParamPoint, perturbed: bool) -> Result<Monomial> {
    let d = get(pt, "d")?;
    Ok(if perturbed { &d * &int(2) } else { d })
}

fn thm_1413b(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let v = Vars::at(pt)?;
    let d = d_for(pt, perturbed)?;
    let s = elliptic(pt)?;
    let s2 = s.squared()?;
    (0..=max_n as i64)
        .map(|n| {
            let lhs = eval_v(&SeriesSpec::v(v.a.clone(), b_left(&v, pt, &s, n)?, s.clone())?, order)?;
            let right = SeriesSpec::v(v.m.clone(), b_right(&v, &d, &s, n, true), s2.clone())?;
            let rhs = product(order, &b_prefactor(&v, &s2, n), &|o| eval_v(&right, o))?;
            Ok(Check::new(format!("n={n}"), lhs, rhs))
        })
        .collect()
}

fn thm_1413b_limit(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let v = Vars::at(pt)?;
    let d = get(pt, "d")?;
    let (s, b0) = (elliptic(pt)?, basic(pt)?);
    let (s2, b2) = (s.squared()?, b0.squared()?);
    let q = b0.q_pow(1);
    let arg = if perturbed { &(&v.m * &q) / &v.a } else { &(&v.m * &q) / &(&v.a * &v.a) };
    let mut out = Vec::new();
    for n in 0..=max_n as i64 {
        let left = b_left(&v, pt, &s, n)?;
        let lhs_e = limit(eval_v(&SeriesSpec::v(v.a.clone(), left.clone(), s.clone())?, LIMIT_ORDER), order)?;
        let lhs_b = eval_w(&SeriesSpec::w(v.a.clone(), left, q.clone(), b0.clone())?, order)?;
        let right_e = SeriesSpec::v(v.m.clone(), b_right(&v, &d, &s, n, true), s2.clone())?;
        let rhs_e = limit(product(LIMIT_ORDER, &b_prefactor(&v, &s2, n), &|o| eval_v(&right_e, o)), order)?;
        let right_b = SeriesSpec::w(v.m.clone(), b_right(&v, &d, &s, n, false), arg.clone(), b2.clone())?;
        let rhs_b = product(order, &b_prefactor(&v, &b2, n), &|o| eval_w(&right_b, o))?;
        out.push(Check::new(format!("n={n},left limit"), lhs_e, lhs_b.clone()));
        out.push(Check::new(format!("n={n},right limit"), rhs_e, rhs_b.clone()));
        out.push(Check::new(format!("n={n},basic identity"), lhs_b, rhs_b));
    }
    Ok(out)
}

fn c_left(v: &Vars, s: &FactorialSpec, n: i64) -> Vec<Monomial> {
    let q = s.q_pow(1);
    vec![
        &(&v.a * &v.a) / &(&v.m * &v.m),
        v.b.clone(),
        &v.b * &q,
        v.c.clone(),
        &v.c * &q,
        &v.k * s.q_pow(n),
        &v.k * s.q_pow(n + 1),
        s.q_pow(-n),
        s.q_pow(1 - n),
    ]
}

fn c_prefactor(v: &Vars, s: &FactorialSpec, n: i64) -> QProduct {
    let q = s.q_pow(1);
    let (aq, mq) = (&v.a * &q, &v.m * &q);
    QProduct::new()
        .facts(&[aq.clone(), &v.k / &v.m, &mq / &v.b, &mq / &v.c], n, s)
        .over_facts(&[mq.clone(), &v.k / &v.a, &aq / &v.b, &aq / &v.c], n, s)
}

fn c_right(v: &Vars, d: &Monomial, s: &FactorialSpec, n: i64, elliptic: bool) -> Vec<Monomial> {
    let mut params = vec![&v.a / &v.m, d.clone(), -d.clone()];
    if elliptic {
        params.push(d * &s.half_nome());
        params.push(-(d / &s.half_nome()));
    }
    params.extend([v.b.clone(), v.c.clone(), &v.k * s.q_pow(n), s.q_pow(-n)]);
    params
}

/// Both signs of `d = +-m (q/a)^(1/2)`; the sampler stores `t = m (q/a)^(1/2)`.
fn d_signs(pt: &ParamPoint, perturbed: bool) -> Result<[(&'static str, Monomial); 2]> {
    let t = get(pt, "t")?;
    let t = if perturbed { &t * &int(2) } else { t };
    Ok([("+d", t.clone()), ("-d", -t)])
}

fn thm_1413c(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let v = Vars::at(pt)?;
    let s = elliptic(pt)?;
    let s2 = s.with_base_power(2)?;
    let mut out = Vec::new();
    for n in 0..=max_n as i64 {
        let lhs = eval_v(&SeriesSpec::v(v.a.clone(), c_left(&v, &s, n), s2.clone())?, order)?;
        for (label, d) in d_signs(pt, perturbed)? {
            let right = SeriesSpec::v(v.m.clone(), c_right(&v, &d, &s, n, true), s.clone())?;
            let rhs = product(order, &c_prefactor(&v, &s, n), &|o| eval_v(&right, o))?;
            out.push(Check::new(format!("n={n},{label}"), lhs.clone(), rhs));
        }
    }
    out.extend(intermediate_pair_checks(&v.a, &v.k, &s, max_n, order)?);
    Ok(out)
}

fn thm_1413c_limit(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let v = Vars::at(pt)?;
    let (s, b0) = (elliptic(pt)?, basic(pt)?);
    let (s2, b2) = (s.with_base_power(2)?, b0.with_base_power(2)?);
    let q = b0.q_pow(1);
    let arg = if perturbed { &(&v.m * &q) / &v.a } else { -(&(&v.m * &q) / &v.a) };
    let mut out = Vec::new();
    for n in 0..=max_n as i64 {
        let left = c_left(&v, &s, n);
        let lhs_e = limit(eval_v(&SeriesSpec::v(v.a.clone(), left.clone(), s2.clone())?, LIMIT_ORDER), order)?;
        let lhs_b = eval_w(&SeriesSpec::w(v.a.clone(), left, b2.q_pow(1), b2.clone())?, order)?;
        out.push(Check::new(format!("n={n},left limit"), lhs_e, lhs_b.clone()));
        for (label, d) in d_signs(pt, false)? {
            let right_e = SeriesSpec::v(v.m.clone(), c_right(&v, &d, &s, n, true), s.clone())?;
            let rhs_e = limit(product(LIMIT_ORDER, &c_prefactor(&v, &s, n), &|o| eval_v(&right_e, o)), order)?;
            let right_b = SeriesSpec::w(v.m.clone(), c_right(&v, &d, &s, n, false), arg.clone(), b0.clone())?;
            let rhs_b = product(order, &c_prefactor(&v, &b0, n), &|o| eval_w(&right_b, o))?;
            out.push(Check::new(format!("n={n},{label},right limit"), rhs_e, rhs_b.clone()));
            out.push(Check::new(format!("n={n},{label},basic identity"), lhs_b.clone(), rhs_b));
        }
    }
    Ok(out)
}

/// `12W11` against `6phi5`, with `m = a^2/k` and `m^(1/2) = a/k^(1/2)`.
fn w12_nearly_poised(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, c, k, m) = (get(pt, "a")?, get(pt, "b")?, get(pt, "c")?, get(pt, "k")?, get(pt, "m")?);
    let (qs, ks, ms) = (root(pt, "q")?, root(pt, "k")?, root(pt, "m")?);
    let s = basic(pt)?;
    let q = s.q_pow(1);
    let bc = &b * &c;
    let sign = if perturbed { ks.clone() } else { -ks.clone() };
    (0..=max_n as i64)
        .map(|n| {
            let left = vec![
                b.clone(),
                c.clone(),
                &(&k * &q) / &bc,
                &ms * &qs,
                &ms * &q,
                -ms.clone(),
                -(&ms * &qs),
                &k * s.q_pow(n),
                s.q_pow(-n),
            ];
            let lhs = eval_w(&SeriesSpec::w(a.clone(), left, q.clone(), s.clone())?, order)?;
            let phi = SeriesSpec::phi(
                vec![m.clone(), &ms * &q, &(&b * &m) / &a, &(&c * &m) / &a, &(&a * &q) / &bc, s.q_pow(-n)],
                vec![ms.clone(), &(&a * &q) / &b, &(&a * &q) / &c, &(&bc * &m) / &a, &(&m * s.q_pow(1 - n)) / &k],
                q.clone(),
                s.clone(),
            )?;
            let pre = QProduct::new()
                .theta(&sign, &s)
                .over_theta(&(&sign * s.q_pow(n)), &s)
                .facts(&[&a * &q, &k / &m], n, &s)
                .over_facts(&[k.clone(), &k / &a], n, &s);
            Ok(Check::new(format!("n={n}"), lhs, product(order, &pre, &|o| eval_phi(&phi, o))?))
        })
        .collect()
}

/// `12W11` with `(-a)^(1/2) = t` against a `10W9` in argument `q^2`, `m = k/a`.
fn w12_bailey_109(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, c, k, m, t) = (get(pt, "a")?, get(pt, "b")?, get(pt, "c")?, get(pt, "k")?, get(pt, "m")?, get(pt, "t")?);
    let ks = root(pt, "k")?;
    let s = basic(pt)?;
    let s2 = s.squared()?;
    let q = s.q_pow(1);
    let arg = s.q_pow(if perturbed { 1 } else { 2 });
    let bc = &b * &c;
    (0..=max_n as i64)
        .map(|n| {
            let ksn = &ks * s.q_pow(n);
            let tail = [ksn.clone(), -ksn.clone(), s.q_pow(-n), -s.q_pow(-n)];
            let mut left = vec![b.clone(), c.clone(), &(&(&a * &a) * &q) / &(&bc * &m), &t * &q, -(&t * &q)];
            left.extend(tail.iter().cloned());
            let lhs = eval_w(&SeriesSpec::w(a.clone(), left, q.clone(), s.clone())?, order)?;
            let mut right = vec![&(&b * &m) / &a, &(&c * &m) / &a, &(&a * &q) / &bc];
            right.extend(tail.iter().cloned());
            let right = SeriesSpec::w(m.clone(), right, arg.clone(), s.clone())?;
            let q2 = &q * &q;
            let pre = QProduct::new()
                .fact(&-(&m * &q), 2 * n, &s)
                .over_fact(&-a.clone(), 2 * n, &s)
                .facts(&[&(&a * &a) * &q2, &k / &(&m * &m)], n, &s2)
                .over_facts(&[&(&m * &m) * &q2, &k / &(&a * &a)], n, &s2)
                .times(&(&m / &(&a * &q)).powi(n));
            Ok(Check::new(format!("n={n}"), lhs, product(order, &pre, &|o| eval_w(&right, o))?))
        })
        .collect()
}

/// `p -> 0` of the quadratic summation against its basic-mode evaluation.
fn nr_limit(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b) = (get(pt, "a")?, get(pt, "b")?);
    let (s, b0) = (elliptic(pt)?, basic(pt)?);
    let bl = if perturbed { &b * b0.q_pow(1) } else { b.clone() };
    let mut out = Vec::new();
    for n in 0..=max_n {
        let lhs_b = new_bibasic_lhs(&a, &bl, n, &b0, order)?;
        let rhs_b = sum_new_bibasic(&a, &b, n, &b0, order)?;
        out.push(Check::new(format!("n={n},left limit"), limit(new_bibasic_lhs(&a, &b, n, &s, LIMIT_ORDER), order)?, new_bibasic_lhs(&a, &b, n, &b0, order)?));
        out.push(Check::new(format!("n={n},right limit"), limit(sum_new_bibasic(&a, &b, n, &s, LIMIT_ORDER), order)?, rhs_b.clone()));
        out.push(Check::new(format!("n={n},basic identity"), lhs_b, rhs_b));
    }
    Ok(out)
}

/// Mixed-nome sum against a `14V13` in `(q^2, p^2)` with `lambda = a^4q^2/bcd`.
fn v14_lambda(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, c, d, lam, e) = (get(pt, "a")?, get(pt, "b")?, get(pt, "c")?, get(pt, "d")?, get(pt, "lambda")?, get(pt, "e")?);
    let s = elliptic(pt)?;
    let s2 = s.squared()?;
    let q = s.q_pow(1);
    let q2 = &q * &q;
    let a2 = &a * &a;
    let el = if perturbed { &e * &q } else { e.clone() };
    let mut out = Vec::new();
    for n in 0..=max_n as i64 {
        let mut lhs = NomeSeries::zero(order);
        for j in 0..=n {
            let term = QProduct::new()
                .theta(&(&a2 * s.q_pow(4 * j)), &s2)
                .over_theta(&a2, &s2)
                .facts(&[a2.clone(), b.clone(), c.clone(), d.clone()], j, &s2)
                .over_facts(&[q2.clone(), &(&a2 * &q2) / &b, &(&a2 * &q2) / &c, &(&a2 * &q2) / &d], j, &s2)
                .facts(&[&el * s.q_pow(n), s.q_pow(-n)], j, &s)
                .over_facts(&[&(&a * s.q_pow(1 - n)) / &el, &a * s.q_pow(n + 1)], j, &s)
                .times(&q2.powi(j))
                .eval(order)?;
            lhs = lhs + term;
        }
        let aq = &a * &q;
        let lam_a2 = &lam / &a2;
        let right = SeriesSpec::v(
            lam.clone(),
            vec![
                -aq.clone(),
                -(&aq * &q),
                -(&aq / &s.nome()),
                -(&(&aq * &q) * &s.nome()),
                &lam_a2 * &b,
                &lam_a2 * &c,
                &lam_a2 * &d,
                &(&e * &e) * s.q_pow(2 * n),
                s.q_pow(-2 * n),
            ],
            s2.clone(),
        )?;
        let pre = QProduct::new()
            .theta(&-(&e * s.q_pow(2 * n)), &s)
            .over_theta(&-e.clone(), &s)
            .facts(&[-e.clone(), aq.clone()], n, &s)
            .over_facts(&[-q.clone(), &e / &a], n, &s)
            .fact(&(&e / &aq), n, &s2)
            .over_fact(&(&lam * &q2), n, &s2)
            .times(&q.powi(n));
        out.push(Check::new(format!("n={n}"), lhs, product(order, &pre, &|o| eval_v(&right, o))?));
    }
    Ok(out)
}

/// The explicit pair at `(a, k; q^2, p)` with extra parameters `m, b`.
fn exotic_pair(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, k, m) = (get(pt, "a")?, get(pt, "b")?, get(pt, "k")?, get(pt, "m")?);
    let s = elliptic(pt)?;
    let s2 = s.with_base_power(2)?;
    let base = PairBase::new(a.clone(), k.clone(), s2.clone());
    let alpha = {
        let (a, b, k, m, s, s2) = (a.clone(), b.clone(), k.clone(), m.clone(), s.clone(), s2.clone());
        Sequence::new(move |n, order| {
            let n = n as i64;
            let q = s.q_pow(1);
            let q2 = &q * &q;
            let m2 = &m * &m;
            QProduct::new()
                .theta(&(&a * s.q_pow(4 * n)), &s)
                .over_theta(&a, &s)
                .facts(&[a.clone(), &(&m2 * &q) / &k, b.clone(), &a / &b], n, &s2)
                .over_facts(&[q2.clone(), &(&(&a * &k) * &q) / &m2, &(&a * &q2) / &b, &b * &q2], n, &s2)
                .fact(&(&(&a * &q) / &m), 2 * n, &s)
                .over_fact(&m, 2 * n, &s)
                .times(&(&k / &a).powi(n))
                .eval(order)
        })
    };
    let step = if perturbed { 2 } else { 3 };
    let beta = |n: usize, order: i64| -> Result<NomeSeries> {
        let n = n as i64;
        let q = s.q_pow(1);
        let q2 = &q * &q;
        let m2 = &m * &m;
        let mut acc = NomeSeries::zero(order);
        for r in 0..=n {
            let term = QProduct::new()
                .theta(&(&m * s.q_pow(step * r)), &s)
                .over_theta(&m, &s)
                .facts(&[&(&a * &q) / &m, &(&b * &m) / &a, &m / &b], r, &s)
                .over_facts(&[&(&m2 * &q) / &a, &(&a * &q2) / &b, &b * &q2], r, &s2)
                .fact(&(&(&m2 * &q) / &k), r, &s2)
                .over_fact(&(&k / &m), r, &s)
                .fact(&(&k / &m), 2 * n - r, &s)
                .over_fact(&q2, n - r, &s2)
                .fact(&k, n + r, &s2)
                .over_fact(&(&m * &q), 2 * n + r, &s)
                .times(&q.powi(r * (r - 1) / 2))
                .times(&(&k / &m).powi(r));
            acc = acc + term.eval(order)?;
        }
        let pre = QProduct::new().fact(&(&(&m2 * &q) / &a), n, &s2).over_fact(&(&(&(&a * &k) * &q) / &m2), n, &s2);
        product(order, &pre, &|o| Ok(acc.truncate(o)))
    };
    let recomputed = forward(&base, &alpha, max_n, order)?;
    recomputed.into_iter().enumerate().map(|(n, x)| Ok(Check::new(format!("n={n}"), x, beta(n, order)?))).collect()
}

fn v12_transformation(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, b, k, m) = (get(pt, "a")?, get(pt, "b")?, get(pt, "k")?, get(pt, "m")?);
    let s = elliptic(pt)?;
    let s2 = s.with_base_power(2)?;
    let q = s.q_pow(1);
    let q2 = &q * &q;
    let m2 = &m * &m;
    let kl = if perturbed { &k * &q } else { k.clone() };
    let mut out = Vec::new();
    for n in 0..=max_n as i64 {
        let mut lhs = NomeSeries::zero(order);
        for r in 0..=n {
            let term = QProduct::new()
                .theta(&(&m * s.q_pow(3 * r)), &s)
                .over_theta(&m, &s)
                .facts(&[&(&a * &q) / &m, &(&b * &m) / &a, &m / &b], r, &s)
                .over_facts(&[&(&m2 * &q) / &a, &(&a * &q2) / &b, &b * &q2], r, &s2)
                .facts(&[&(&m2 * &q) / &kl, &kl * s.q_pow(2 * n), s.q_pow(-2 * n)], r, &s2)
                .over_facts(&[&kl / &m, &(&m * s.q_pow(1 - 2 * n)) / &kl, &m * s.q_pow(2 * n + 1)], r, &s)
                .times(&q.powi(r))
                .eval(order)?;
            lhs = lhs + term;
        }
        let right = SeriesSpec::v(
            a.clone(),
            vec![b.clone(), &a / &b, &(&m2 * &q) / &k, &(&a * &q) / &m, &(&a * &q2) / &m, &k * s.q_pow(2 * n), s.q_pow(-2 * n)],
            s2.clone(),
        )?;
        let pre = QProduct::new()
            .facts(&[&k / &a, &(&(&a * &k) * &q) / &m2], n, &s2)
            .over_facts(&[&a * &q2, &(&m2 * &q) / &a], n, &s2)
            .fact(&(&m * &q), 2 * n, &s)
            .over_fact(&(&k / &m), 2 * n, &s);
        out.push(Check::new(format!("n={n}"), lhs, product(order, &pre, &|o| eval_v(&right, o))?));
    }
    Ok(out)
}

// -------------------------------------------------------- bibasic layer

fn bibasic_def(i: usize, pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k, b) = (get(pt, "a")?, get(pt, "k")?, get(pt, "b")?);
    let pair = bibasic_closed_form(i, &a, &k, &b, &elliptic(pt)?)?;
    (0..=max_n)
        .map(|n| {
            let rhs = if perturbed {
                // Drop the terms with a negative-length factorial instead of
                // extending the factorial to negative lengths.
                let mut acc = NomeSeries::zero(order);
                for r in (0..=n).filter(|r| i * r <= n) {
                    let c = bibasic_kernel(i, n, r, &pair.base)?;
                    acc = acc + product(order, &c, &|o| pair.a_seq.get(r, o))?;
                }
                acc
            } else {
                bibasic_forward(&pair, n, order)?
            };
            Ok(Check::new(format!("n={n}"), pair.b_seq.get(n, order)?, rhs))
        })
        .collect()
}

fn bibasic_def_i2(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    bibasic_def(2, pt, max_n, order, perturbed)
}

fn bibasic_def_i3(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    bibasic_def(3, pt, max_n, order, perturbed)
}

/// The closed-form family for `i = 1, 2, 3`: starts at `1`, and `i = 1` is an
/// ordinary pair.
fn bibasic_closed_forms(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, k, b) = (get(pt, "a")?, get(pt, "k")?, get(pt, "b")?);
    let s = elliptic(pt)?;
    let mut out = Vec::new();
    for i in 1..=3 {
        let pair = bibasic_closed_form(i, &a, &k, &b, &s)?;
        out.push(Check::new(format!("i={i},A_0"), pair.a_seq.get(0, order)?, NomeSeries::one(order)));
        out.push(Check::new(format!("i={i},B_0"), pair.b_seq.get(0, order)?, NomeSeries::one(order)));
        if i == 1 {
            let q = s.q_pow(1);
            let alpha = if perturbed { pair.a_seq.map(move |n, x| x.mul_monomial(&q.powi(n as i64))) } else { pair.a_seq.clone() };
            for (n, x) in forward(&pair.base, &alpha, max_n, order)?.into_iter().enumerate() {
                out.push(Check::new(format!("i=1,ordinary n={n}"), x, pair.b_seq.get(n, order)?));
            }
        } else {
            for n in 0..=max_n {
                out.push(Check::new(format!("i={i},n={n}"), bibasic_forward(&pair, n, order)?, pair.b_seq.get(n, order)?));
            }
        }
    }
    Ok(out)
}

fn lift2(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let (a, m, b, k) = (get(pt, "a")?, get(pt, "m")?, get(pt, "b")?, get(pt, "k")?);
    let s = elliptic(pt)?;
    let pair = lift_bibasic(&LiftStep::Lift2 { k }, &bibasic_closed_form(2, &a, &m, &b, &s)?)?;
    let alpha = if perturbed {
        let q = s.q_pow(1);
        pair.alpha.map(move |n, x| x.mul_monomial(&q.powi(n as i64)))
    } else {
        pair.alpha.clone()
    };
    let recomputed = forward(&pair.base, &alpha, max_n, order)?;
    recomputed.into_iter().enumerate().map(|(n, x)| Ok(Check::new(format!("n={n}"), x, pair.beta.get(n, order)?))).collect()
}

/// The cubic lift with its alpha law found by the probe at this point; the
/// control forces the law `a^(2n)`.
fn lift3_probe(pt: &ParamPoint, max_n: usize, order: i64, perturbed: bool) -> Result<Vec<Check>> {
    let input = probe_input(pt)?;
    check_generic(pt, &input, max_n, order)?;
    let law = if perturbed {
        ExponentLaw { sign: 1, a_exp: 2, m_exp: 0 }
    } else {
        let mut survivors = Vec::new();
        for c in default_candidates() {
            if let Candidate::Law(l) = c {
                if probe_pair(&l, &input, max_n.min(3), order)?.0.is_none() {
                    survivors.push(l);
                }
            }
        }
        match survivors.as_slice() {
            [only] => *only,
            _ => {
                return Ok(vec![Check::new(
                    format!("{} surviving laws", survivors.len()),
                    NomeSeries::one(order),
                    NomeSeries::zero(order),
                )])
            }
        }
    };
    let pair = lift_bibasic(&LiftStep::Lift3 { law }, &input)?;
    let recomputed = forward(&pair.base, &pair.alpha, max_n.min(3), order)?;
    recomputed.into_iter().enumerate().map(|(n, x)| Ok(Check::new(format!("law={law},n={n}"), x, pair.beta.get(n, order)?))).collect()
}

// ------------------------------------------------------------ the table

fn plan_ak() -> Plan {
    Plan::new(vec![free("a"), free("k")])
}

fn plan_ab() -> Plan {
    Plan::new(vec![free("a"), free("b")])
}

fn plan_a() -> Plan {
    Plan::new(vec![free("a")])
}

fn plan_a_square() -> Plan {
    Plan::new(vec![square("a")])
}

fn plan_k_square() -> Plan {
    Plan::new(vec![free("a"), square("k")])
}

fn plan_a_q_square() -> Plan {
    Plan::new(vec![square("a"), free("k")]).with_square_q()
}

fn plan_lemma1_minus() -> Plan {
    Plan::new(vec![free("a"), free("b"), define("c", Expr::new().val("a", 1).val("b", 1).q(1).times(Rat::from_integer((-1).into())))])
}

fn plan_lemma1_square() -> Plan {
    Plan::new(vec![free("a"), free("b"), define("c", Expr::new().val("a", 2).q(1).val("b", -1))])
}

fn plan_lemma2() -> Plan {
    Plan::new(vec![free("a"), square("b")])
}

fn plan_jackson() -> Plan {
    Plan::new(vec![free("a"), free("b"), free("c"), free_w("d", 1)])
}

fn plan_v_to_w() -> Plan {
    Plan::new(vec![free("a"), free("b"), free("c"), free("d"), free("e")])
}

fn plan_1413b() -> Plan {
    Plan::new(vec![
        free("a"),
        square("b"),
        square("c"),
        square("k"),
        define("m", Expr::new().val("b", 1).val("c", 1).val("k", 1).val("a", -2).q(-2)),
        define("d", Expr::new().val("m", 1).val("a", -1).times(Rat::from_integer((-1).into()))),
    ])
}

fn plan_1413c() -> Plan {
    Plan::new(vec![
        free("a"),
        free("s"),
        define_q(Expr::new().val("a", 1).val("s", 2)),
        free("b"),
        free("c"),
        free("k"),
        define("m", Expr::new().val("b", 1).val("c", 1).val("k", 1).val("a", -1).q(-1)),
        define("t", Expr::new().val("m", 1).val("s", 1)),
    ])
}

fn plan_w12_nearly_poised() -> Plan {
    Plan::new(vec![free("a"), free("b"), free("c"), square("k"), define_root("m", Expr::new().val("a", 1).root("k", -1))]).with_square_q()
}

fn plan_w12_bailey() -> Plan {
    Plan::new(vec![
        free("t"),
        define("a", Expr::new().val("t", 2).times(Rat::from_integer((-1).into()))),
        free("b"),
        free("c"),
        square("k"),
        define("m", Expr::new().val("k", 1).val("a", -1)),
    ])
}

fn plan_v14() -> Plan {
    Plan::new(vec![
        free("a"),
        free("b"),
        free("c"),
        free("d"),
        define("lambda", Expr::new().val("a", 4).q(2).val("b", -1).val("c", -1).val("d", -1)),
        define("e", Expr::new().val("lambda", 1).val("a", -1).q(-1)),
    ])
}

fn plan_abkm() -> Plan {
    Plan::new(vec![free("a"), free("b"), free("k"), free("m")])
}

fn plan_akb() -> Plan {
    Plan::new(vec![free("a"), free("k"), free("b")])
}

fn plan_amb() -> Plan {
    Plan::new(vec![free("a"), free("m"), free("b")])
}

const fn entry(key: &'static str, summary: &'static str, plan: fn() -> Plan, build: super::Builder, order: i64, max_n: usize) -> IdentityCase {
    IdentityCase { key, summary, plan, build, order, max_n }
}

const REGISTRY: &[IdentityCase] = &[
    entry("wp-inverse", "M and M~ are mutually inverse (basic)", plan_ak, wp_inverse, ORDER, BASIC_N),
    entry("wp-inverse-elliptic", "M and M~ are mutually inverse (elliptic)", plan_ak, wp_inverse_elliptic, 12, 5),
    entry("rogers-delta", "6W5 kernel sum equals the Kronecker delta", plan_ak, rogers_delta, ORDER, BASIC_N),
    entry("lemma1-minus", "4phi3 summation with c = -abq", plan_lemma1_minus, lemma1, ORDER, BASIC_N),
    entry("lemma1-square", "4phi3 summation with c = a^2 q/b", plan_lemma1_square, lemma1, ORDER, BASIC_N),
    entry("lemma2", "8W7 summation in argument q^2", plan_lemma2, lemma2, ORDER, BASIC_N),
    entry("elliptic-jackson", "Frenkel-Turaev 10V9 summation", plan_jackson, elliptic_jackson, ORDER, ELLIPTIC_N),
    entry("new-bibasic-sum", "quadratic summation mixing nomes p and p^2", plan_ab, new_bibasic_sum, ORDER, ELLIPTIC_N),
    entry("theta-quotient", "theta(aq^2k)/theta(a) as a product of four factorials", plan_a_square, theta_quotient, 12, ELLIPTIC_N),
    entry("theta-square", "theta(a^2;p) as four thetas in nome p", plan_a, theta_square, 12, ELLIPTIC_N),
    entry("fact-ratio-squares", "(a^2;q^2,p)_n/(b^2;q^2,p)_n split into base q", plan_ab, fact_ratio_squares, 12, ELLIPTIC_N),
    entry("sm-shifts", "shifted, reflected, squared and doubled factorials", plan_a, sm_shifts, 12, ELLIPTIC_N),
    entry("v-to-w", "p -> 0 of a 10V9 is a 10W9 in argument q", plan_v_to_w, v_to_w, 12, BASIC_N),
    entry("unit-pair", "unit pair: inversion of delta and the defining relation", plan_ak, unit_pair_basic, ORDER, BASIC_N),
    entry("unit-pair-elliptic", "elliptic unit pair", plan_ak, unit_pair_elliptic, ORDER, ELLIPTIC_N),
    entry("spiridonov-pair", "elliptic unit pair through the doubling theorem", plan_ak, doubled_unit_pair, ORDER, ELLIPTIC_N),
    entry("thm-1413b", "14V13 transformation from (q,p) to (q^2,p^2)", plan_1413b, thm_1413b, ORDER_NEGATIVE, 3),
    entry("thm-1413b-limit", "p -> 0 of thm-1413b: 12W11 = 10W9 in argument mq/a^2", plan_1413b, thm_1413b_limit, ORDER, 3),
    entry("thm-1413c", "14V13 transformation from (q^2,p) to (q,p), both d", plan_1413c, thm_1413c, ORDER, ELLIPTIC_N),
    entry("thm-1413c-limit", "p -> 0 of thm-1413c: 12W11 = 10W9 in argument -mq/a", plan_1413c, thm_1413c_limit, ORDER, ELLIPTIC_N),
    entry("w12-nearly-poised", "12W11 to 6phi5 with m = a^2/k", plan_w12_nearly_poised, w12_nearly_poised, ORDER, BASIC_N),
    entry("w12-bailey-109", "12W11 to 10W9 in argument q^2 with m = k/a", plan_w12_bailey, w12_bailey_109, ORDER, BASIC_N),
    entry("nr-limit", "p -> 0 of the quadratic summation", plan_ab, nr_limit, ORDER, ELLIPTIC_N),
    entry("v14-lambda", "mixed-nome sum to 14V13 with lambda = a^4q^2/bcd", plan_v14, v14_lambda, ORDER_NEGATIVE, 3),
    entry("exotic-pair", "explicit pair at (a,k;q^2,p)", plan_abkm, exotic_pair, ORDER, ELLIPTIC_N),
    entry("v12-transformation", "12V11 transformation from the explicit pair", plan_abkm, v12_transformation, ORDER, ELLIPTIC_N),
    entry("bibasic-def-i2", "closed form satisfies the bibasic relation, i = 2", plan_akb, bibasic_def_i2, ORDER, ELLIPTIC_N),
    entry("bibasic-def-i3", "closed form satisfies the bibasic relation, i = 3", plan_akb, bibasic_def_i3, ORDER, ELLIPTIC_N),
    entry("bibasic-closed-form", "closed-form bibasic pairs for i = 1, 2, 3", plan_akb, bibasic_closed_forms, ORDER, ELLIPTIC_N),
    entry("lift2", "quadratic lift of the i = 2 bibasic pair", plan_amb_k, lift2, ORDER, ELLIPTIC_N),
    entry("lift3-probe", "cubic lift with the probed alpha law", plan_amb, lift3_probe, 12, 3),
    entry("kernel-nmml", "matrix identity behind T2b, both sigma", plan_k_square, kernel_nmml, ORDER, BASIC_N),
    entry("kernel-nmml2", "matrix identity behind T4", plan_a_q_square, kernel_nmml2, ORDER, BASIC_N),
    entry("kernel-nmme", "matrix identity behind T3e", plan_a_q_square, kernel_nmme, ORDER, ELLIPTIC_N),
    entry("kernel-nmm2e", "matrix identity behind T5e", plan_ak, kernel_nmm2e, ORDER, ELLIPTIC_N),
];

fn plan_amb_k() -> Plan {
    Plan::new(vec![free("a"), free("m"), free("b"), free("k")])
}

/// Every registry entry, in table order.
pub fn registry() -> &'static [IdentityCase] {
    REGISTRY
}

pub fn case(key: &str) -> Result<IdentityCase> {
    REGISTRY.iter().find(|c| c.key == key).copied().ok_or_else(|| Error::UnknownIdentity(key.to_string()))
}

/// Keys of the kernel suite run by the `kernels` subcommand.
pub const KERNEL_KEYS: [&str; 6] = ["wp-inverse", "wp-inverse-elliptic", "kernel-nmml", "kernel-nmml2", "kernel-nmme", "kernel-nmm2e"];
