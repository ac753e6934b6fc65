//! Reports produced by law checks.

use serde::Serialize;
use serde_json::Value;

/// Most witnesses a report keeps.
const MAX_WITNESSES: usize = 16;

/// A place where a law was checked and the deviation found there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub context: String,
    pub deviation: f64,
}

/// Outcome of checking one law over a family of instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawReport {
    pub law: String,
    pub passed: bool,
    pub checks: usize,
    pub tolerance: f64,
    pub max_deviation: f64,
    /// Violations, or for a passing report nothing.
    pub witnesses: Vec<Witness>,
}

impl LawReport {
    pub fn new(law: impl Into<String>, tolerance: f64) -> LawReport {
        LawReport { law: law.into(), passed: true, checks: 0, tolerance, max_deviation: 0.0, witnesses: Vec::new() }
    }

    /// Records one comparison. `context` is only rendered on violation.
    pub fn record<F>(&mut self, deviation: f64, context: F)
    where
        F: FnOnce() -> String,
    {
        self.checks += 1;
        let violated = !(deviation <= self.tolerance);
        if deviation.is_nan() || deviation > self.max_deviation {
            self.max_deviation = if deviation.is_nan() { f64::INFINITY } else { deviation };
        }
        if violated {
            self.passed = false;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(Witness { context: context(), deviation });
            }
        }
    }

    /// Records a comparison that could not be carried out.
    pub fn record_error(&mut self, context: impl Into<String>, err: &crate::Error) {
        let context = context.into();
        self.record(f64::INFINITY, || format!("{context}: {err}"));
    }

    pub fn merge(&mut self, other: LawReport) {
        self.checks += other.checks;
        self.passed &= other.passed;
        if other.max_deviation > self.max_deviation {
            self.max_deviation = other.max_deviation;
        }
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// A named collection of reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub laws: Vec<LawReport>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, laws: Vec<LawReport>) -> SuiteReport {
        let passed = laws.iter().all(|l| l.passed);
        SuiteReport { suite: suite.into(), passed, laws }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tolerance_accepts_exact_zero() {
        let mut r = LawReport::new("law", 0.0);
        r.record(0.0, || unreachable!());
        assert!(r.passed);
        r.record(1e-300, || "tiny".into());
        assert!(!r.passed);
        assert_eq!(r.witnesses[0].context, "tiny");
    }

    #[test]
    fn nan_is_a_violation() {
        let mut r = LawReport::new("law", 1.0);
        r.record(f64::NAN, || "nan".into());
        assert!(!r.passed);
        assert_eq!(r.max_deviation, f64::INFINITY);
    }
}
