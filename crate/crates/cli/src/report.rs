//! Report types and their JSON form. Floats are written with 17 significant
//! digits; non-finite values become `null`.

use std::collections::BTreeMap;

use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A float that serializes as `{:.16e}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// passes when `value ≤ tolerance`
    AtMost,
    /// passes when `value ≥ tolerance`
    AtLeast,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Measurement {
    pub label: String,
    pub value: Num,
    pub tolerance: Num,
    pub relation: Relation,
    pub passed: bool,
}

impl Measurement {
    pub fn at_most(label: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            value: Num(value),
            tolerance: Num(tolerance),
            relation: Relation::AtMost,
            passed: value <= tolerance,
        }
    }

    pub fn at_least(label: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            value: Num(value),
            tolerance: Num(tolerance),
            relation: Relation::AtLeast,
            passed: value >= tolerance,
        }
    }

    /// A boolean condition, reported as 1 (true) or 0 against a threshold of 1.
    pub fn holds(label: impl Into<String>, ok: bool) -> Self {
        Self::at_least(label, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub criterion: u8,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    /// Free-form notes: what was run and on which grid.
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: &str, criterion: u8, detail: String, measurements: Vec<Measurement>) -> Self {
        let passed = !measurements.is_empty() && measurements.iter().all(|m| m.passed);
        Self {
            name: name.to_string(),
            criterion,
            passed,
            measurements,
            detail,
        }
    }

    /// One summary line plus one indented line per measurement.
    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!(
            "criterion {:>2} {:<15} {}",
            self.criterion,
            self.name,
            if self.passed { "PASS" } else { "FAIL" }
        )];
        for m in &self.measurements {
            let op = match m.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            out.push(format!(
                "    {} {:<58} {:>12.4e} {op} {:.1e}",
                if m.passed { "ok  " } else { "FAIL" },
                m.label,
                m.value.0,
                m.tolerance.0
            ));
        }
        out
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Norms {
    pub max: Num,
    pub l2: Num,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct VariationRow {
    pub kind: String,
    /// 1 or 2
    pub order: u8,
    pub analytic: Num,
    pub fd_raw: Num,
    pub richardson: Num,
    pub observed_order: Option<Num>,
    pub dt: Num,
}

/// The document written by every verb except `sweep` and `list-scenarios`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RunReport {
    pub verb: String,
    pub scenario: String,
    pub grid: [usize; 3],
    pub gv_direct: Option<Num>,
    pub gv_rw: Option<Num>,
    pub residuals: BTreeMap<String, Norms>,
    pub values: BTreeMap<String, Num>,
    pub variations: Vec<VariationRow>,
    pub checks: Vec<CheckOutcome>,
    pub timestamp: Option<u64>,
}

impl RunReport {
    pub fn new(verb: &str, scenario: &str, grid: [usize; 3]) -> Self {
        Self {
            verb: verb.to_string(),
            scenario: scenario.to_string(),
            grid,
            gv_direct: None,
            gv_rw: None,
            residuals: BTreeMap::new(),
            values: BTreeMap::new(),
            variations: Vec::new(),
            checks: Vec::new(),
            timestamp: None,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = serde_json::to_string(&Num(0.1)).unwrap();
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(serde_json::to_string(&Num(f64::NAN)).unwrap(), "null");
        let v: Vec<Num> = vec![Num(-2.5), Num(f64::INFINITY)];
        assert_eq!(serde_json::to_string(&v).unwrap(), "[-2.5000000000000000e0,null]");
    }

    #[test]
    fn outcome_fails_on_any_measurement() {
        let c = CheckOutcome::new(
            "x",
            1,
            String::new(),
            vec![Measurement::at_most("a", 1.0, 2.0), Measurement::at_least("b", 1.0, 2.0)],
        );
        assert!(!c.passed);
        assert!(!CheckOutcome::new("y", 1, String::new(), vec![]).passed);
        assert!(c.lines()[0].ends_with("FAIL"));
    }
}
