//! Empirical resolution of the cubic-lift alpha prefactor: every candidate
//! law is tried against the defining relation, stopping at its first failure.

use serde::Serialize;

use crate::bailey::{bibasic_closed_form, lift_bibasic, verify_pair, BibasicPair, ExponentLaw, LiftStep};
use num_traits::{One, Signed};

use crate::arith::Rat;
use crate::error::{Error, Result};

use super::{derive_seed, registry::case, sample_point, ParamPoint, MAX_ATTEMPTS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Candidate {
    Law(ExponentLaw),
    /// A reading that cannot be evaluated (e.g. an unbound exponent).
    IllFormed(String),
}

impl Candidate {
    pub fn name(&self) -> String {
        match self {
            Candidate::Law(l) => l.to_string(),
            Candidate::IllFormed(s) => s.clone(),
        }
    }
}

/// `(+-1)^n a^(i n) m^(j n)` for `i, j` in `-3..=3`, plus the literal `a^r`.
pub fn default_candidates() -> Vec<Candidate> {
    let mut out = vec![Candidate::IllFormed("a^r".into())];
    for sign in [1, -1] {
        for a_exp in -3..=3 {
            for m_exp in -3..=3 {
                out.push(Candidate::Law(ExponentLaw { sign, a_exp, m_exp }));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateOutcome {
    pub candidate: String,
    /// `survivor`, `pruned` or `ill-formed`.
    pub status: &'static str,
    /// `(point index, n)` of the first failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_at: Option<(usize, usize)>,
    /// Comparison orders reached at each point (survivors only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub orders: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub points: Vec<String>,
    pub max_n: usize,
    pub order: i64,
    pub outcomes: Vec<CandidateOutcome>,
    pub survivors: Vec<String>,
    /// The surviving law when exactly one candidate passes.
    pub unique: Option<String>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.unique.is_some()
    }
}

/// The `i = 3` closed-form bibasic pair at a point with symbols `a, m, b`.
pub fn probe_input(pt: &ParamPoint) -> Result<BibasicPair> {
    let spec = crate::qobjects::FactorialSpec::elliptic(pt.q().clone())?;
    bibasic_closed_form(3, pt.get("a")?, pt.get("m")?, pt.get("b")?, &spec)
}

/// Candidate laws can only be told apart when no monomial `a^i m^j` with
/// small exponents is `+-1` and every `A_n` is nonzero.
pub fn check_generic(pt: &ParamPoint, input: &BibasicPair, max_n: usize, order: i64) -> Result<()> {
    let (a, m) = (pt.get("a")?, pt.get("m")?);
    for i in -6i64..=6 {
        for j in -6i64..=6 {
            let x = &a.powi(i) * &m.powi(j);
            if (i, j) != (0, 0) && x.exp() == 0 && x.coeff().abs() == Rat::one() {
                return Err(Error::NonGenericPoint(format!("a^{i} m^{j} = {}", x.coeff())));
            }
        }
    }
    for n in 0..=max_n {
        if input.a_seq.get(n, order)?.is_zero() || input.b_seq.get(n, order)?.is_zero() {
            return Err(Error::NonGenericPoint(format!("vanishing term at n = {n}")));
        }
    }
    Ok(())
}

/// First index where the lifted pair fails (`None`: passes up to `max_n`),
/// plus the comparison orders reached.
pub fn probe_pair(law: &ExponentLaw, input: &BibasicPair, max_n: usize, order: i64) -> Result<(Option<usize>, Vec<i64>)> {
    let pair = lift_bibasic(&LiftStep::Lift3 { law: *law }, input)?;
    let check = verify_pair(&pair, max_n, order)?;
    Ok((check.first_failure, check.comparisons.iter().map(|c| c.order).collect()))
}

pub fn probe_point(law: &ExponentLaw, pt: &ParamPoint, max_n: usize, order: i64) -> Result<Option<usize>> {
    Ok(probe_pair(law, &probe_input(pt)?, max_n, order)?.0)
}

/// Two seeded, non-degenerate points for the probe.
fn probe_points(seed: u64, max_n: usize, order: i64) -> Vec<(ParamPoint, BibasicPair)> {
    let plan = (case("lift3-probe").expect("registered").plan)();
    let mut out = Vec::new();
    for index in 0..2u64 {
        for attempt in 0..MAX_ATTEMPTS as u64 {
            let Ok(pt) = sample_point(derive_seed(seed, "lift3-probe", index * MAX_ATTEMPTS as u64 + attempt), &plan) else { continue };
            let Ok(input) = probe_input(&pt) else { continue };
            if check_generic(&pt, &input, max_n, order).is_ok() {
                out.push((pt, input));
                break;
            }
        }
    }
    out
}

/// Run every candidate at two points, `n <= max_n`; a candidate is pruned at
/// its first failing index.
pub fn exponent_probe(candidates: &[Candidate], seed: u64, max_n: usize, order: i64) -> ProbeReport {
    let points = probe_points(seed, max_n, order);
    let mut outcomes = Vec::new();
    for cand in candidates {
        let law = match cand {
            Candidate::IllFormed(_) => {
                outcomes.push(CandidateOutcome { candidate: cand.name(), status: "ill-formed", failed_at: None, orders: Vec::new() });
                continue;
            }
            Candidate::Law(l) => l,
        };
        let mut failed_at = None;
        let mut orders = Vec::new();
        for (i, (_, input)) in points.iter().enumerate() {
            match probe_pair(law, input, max_n, order) {
                Ok((None, o)) => orders.push(o),
                Ok((Some(n), _)) => {
                    failed_at = Some((i, n));
                    break;
                }
                Err(_) => {
                    failed_at = Some((i, 0));
                    break;
                }
            }
        }
        let survived = failed_at.is_none() && points.len() == 2;
        outcomes.push(CandidateOutcome {
            candidate: cand.name(),
            status: if survived { "survivor" } else { "pruned" },
            failed_at,
            orders: if survived { orders } else { Vec::new() },
        });
    }
    let survivors: Vec<String> = outcomes.iter().filter(|o| o.status == "survivor").map(|o| o.candidate.clone()).collect();
    let unique = (survivors.len() == 1).then(|| survivors[0].clone());
    ProbeReport { points: points.iter().map(|(p, _)| p.digest()).collect(), max_n, order, outcomes, survivors, unique }
}
