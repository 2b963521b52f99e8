//! Shared reporting vocabulary: the flat check record emitted by verifiers
//! and the single tolerance policy used when an exact integer count is
//! compared against an analytic bound.

use serde::Serialize;

/// Version of the record schema written to JSON/CSV reports.
pub const SCHEMA_VERSION: u32 = 1;

/// Relative slack applied in favor of "holds" when comparing an exact count
/// against an analytic expression evaluated in doubles. Counts at desk scale
/// stay below 1e38 and the analytic sides are short products of powers, so
/// 1e-9 relative is orders of magnitude above any accumulated rounding.
pub const REL_SLACK: f64 = 1e-9;

/// Absolute floor for the slack so comparisons against a zero bound tolerate
/// representation noise.
pub const ABS_SLACK: f64 = 1e-12;

/// `lhs <= rhs`, up to the documented slack in favor of the inequality.
#[inline]
pub fn leq_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_SLACK * rhs.abs() + ABS_SLACK
}

/// `lhs >= rhs`, up to the documented slack in favor of the inequality.
#[inline]
pub fn ge_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - REL_SLACK * rhs.abs() - ABS_SLACK
}

/// Pre-rounding deviation allowed when a spectral result that is known to be
/// an integer count is rounded back to an integer.
pub const INTEGER_ROUNDING_TOL: f64 = 1e-6;

/// One verified check, flattened so the same shape serializes to a JSON line
/// or a CSV row. Numeric fields are typed: exact counts stay integers,
/// analytic quantities are doubles serialized at full round-trip precision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    /// Stable unique key; reports are sorted by it.
    pub key: String,
    /// Check family, e.g. `sphere_decay`, `chain_recurrence_odd`.
    pub family: String,
    pub q: u64,
    pub d: u32,
    /// Label of the vertex set instance (empty when not set-specific).
    pub ensemble: String,
    pub set_size: Option<u64>,
    /// Distance type as a comma list, when applicable.
    pub t: Option<String>,
    /// Chain/path/star length parameter, when applicable.
    pub k: Option<u64>,
    /// Secondary index (tail depth n, frequency count, ...), when applicable.
    pub n: Option<u64>,
    /// The computed exact count, when the check is about one.
    pub count: Option<u128>,
    /// The computed real quantity (defect, spectral maximum, ratio, ...).
    pub value: Option<f64>,
    pub main_term: Option<f64>,
    pub remainder: Option<f64>,
    pub bound: Option<f64>,
    /// Whether the statement's size hypothesis is met, for conditional checks.
    pub hypothesis_met: Option<bool>,
    /// True when the conclusion is not asserted because the hypothesis failed.
    pub vacuous: bool,
    /// The verdict. For vacuous records this reports the unasserted
    /// comparison outcome and does not count as a theorem check.
    pub holds: bool,
    /// Free-form supplementary data (witnesses, ratios, instance notes).
    pub detail: Option<String>,
}

impl CheckRecord {
    /// A record skeleton; callers fill the fields that apply.
    pub fn new(key: impl Into<String>, family: impl Into<String>, q: u64, d: u32) -> Self {
        Self {
            key: key.into(),
            family: family.into(),
            q,
            d,
            ensemble: String::new(),
            set_size: None,
            t: None,
            k: None,
            n: None,
            count: None,
            value: None,
            main_term: None,
            remainder: None,
            bound: None,
            hypothesis_met: None,
            vacuous: false,
            holds: true,
            detail: None,
        }
    }

    /// A failed theorem check: non-vacuous and `holds == false`.
    pub fn is_violation(&self) -> bool {
        !self.vacuous && !self.holds
    }
}

/// Wall-clock duration of one check, reported separately from the data
/// section so identical configurations reproduce byte-identical data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub key: String,
    pub micros: u128,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_favors_holds() {
        assert!(leq_with_slack(0.0, 0.0));
        assert!(leq_with_slack(1.0 + 1e-10, 1.0));
        assert!(!leq_with_slack(1.0 + 1e-6, 1.0));
        assert!(ge_with_slack(1.0 - 1e-10, 1.0));
        assert!(!ge_with_slack(1.0 - 1e-6, 1.0));
        assert!(leq_with_slack(-5.0, -5.0));
    }

    #[test]
    fn violation_requires_non_vacuous() {
        let mut r = CheckRecord::new("k", "f", 3, 2);
        r.holds = false;
        assert!(r.is_violation());
        r.vacuous = true;
        assert!(!r.is_violation());
    }
}
