//! Machine-readable outcome records, written one JSON object per line.

use std::cmp::Ordering;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Degenerate,
}

/// Where and how a run first went wrong.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FailureData {
    /// Label of the failing check, e.g. `n=2` or `unit>T1e[n=3]`.
    pub check: String,
    /// Comparison order reached by that check.
    pub order: i64,
    /// `lhs - rhs` rendered, or the evaluation error.
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub point: String,
    pub order: i64,
    pub max_n: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<FailureData>,
    /// Degenerate points discarded before this one.
    #[serde(skip_serializing_if = "is_zero")]
    pub resampled: usize,
    /// Number of individual comparisons that were made.
    pub checks: usize,
    pub ms: u64,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }

    /// One human-readable line.
    pub fn to_text(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Degenerate => "DEGENERATE",
        };
        let mut line = format!(
            "{tag:<10} {} @{} order={} max_n={} checks={} ({} ms)",
            self.identity, self.point, self.order, self.max_n, self.checks, self.ms
        );
        if self.resampled > 0 {
            line.push_str(&format!(" resampled={}", self.resampled));
        }
        if let Some(f) = &self.first_failure {
            line.push_str(&format!("\n           first failure at {} (mod w^{}): {}", f.check, f.order, f.residual));
        }
        line
    }
}

/// Canonical report order: identity key, then point digest.
pub fn sort_reports(reports: &mut [IdentityReport]) {
    reports.sort_by(|x, y| match x.identity.cmp(&y.identity) {
        Ordering::Equal => x.point.cmp(&y.point),
        o => o,
    });
}

pub fn to_json_lines(reports: &[IdentityReport]) -> String {
    reports.iter().map(|r| r.to_json() + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(identity: &str, point: &str) -> IdentityReport {
        IdentityReport {
            identity: identity.into(),
            point: point.into(),
            order: 16,
            max_n: 4,
            status: Status::Pass,
            first_failure: None,
            resampled: 0,
            checks: 5,
            ms: 0,
        }
    }

    #[test]
    fn json_shape() {
        let r = report("lemma2", "00ff00ff00ff");
        assert_eq!(
            r.to_json(),
            r#"{"identity":"lemma2","point":"00ff00ff00ff","order":16,"max_n":4,"status":"pass","checks":5,"ms":0}"#
        );
    }

    #[test]
    fn sorting_is_by_key_then_digest() {
        let mut v = vec![report("b", "2"), report("a", "9"), report("b", "1")];
        sort_reports(&mut v);
        let keys: Vec<_> = v.iter().map(|r| format!("{}{}", r.identity, r.point)).collect();
        assert_eq!(keys, ["a9", "b1", "b2"]);
    }
}
