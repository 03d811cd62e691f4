//! Verification reports: a human-readable rendering and a deterministic
//! machine-readable JSON form in which rationals are never rounded.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::blowup::{DivisorClass, FiberReport};
use crate::ledger::{GeographyVerdict, InvariantLedger};
use crate::ratlin::{format_decimal, Rational};
use crate::sw::{ClassExpr, MinimalityOutcome, VerdictStatus};

/// An exact rational that serializes as `{"exact": "p/q", "decimal": "x.xx"}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exact(pub Rational);

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Exact {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Exact", 2)?;
        st.serialize_field("exact", &self.to_string())?;
        st.serialize_field("decimal", &format_decimal(&self.0, 2))?;
        st.end()
    }
}

/// A fact the report relies on but does not compute.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Citation {
    pub fact: String,
    pub source: String,
}

impl Citation {
    pub fn new(fact: impl Into<String>, source: impl Into<String>) -> Self {
        Self { fact: fact.into(), source: source.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub topic: String,
    pub computed: Vec<String>,
    pub listed: Vec<String>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpectationResult {
    pub description: String,
    pub passed: bool,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerSnapshot {
    pub name: String,
    pub euler: i64,
    pub signature: i64,
    pub b2_plus: i64,
    pub b2_minus: i64,
    pub chi_h: Option<i64>,
    pub c1sq: i64,
    pub simply_connected: bool,
    pub symplectic: bool,
}

impl From<&InvariantLedger> for LedgerSnapshot {
    fn from(l: &InvariantLedger) -> Self {
        Self {
            name: l.name.clone(),
            euler: l.euler,
            signature: l.signature,
            b2_plus: l.b2_plus(),
            b2_minus: l.b2_minus(),
            chi_h: l.chi_h().ok(),
            c1sq: l.c1_squared(),
            simply_connected: l.simply_connected,
            symplectic: l.symplectic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub operation: String,
    pub ledger: LedgerSnapshot,
}

impl StepRecord {
    pub fn new(index: usize, operation: String, ledger: &InvariantLedger) -> Self {
        Self { index, operation, ledger: ledger.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictRow {
    pub class: ClassExpr,
    pub class_square: i64,
    pub pairing_vector: Vec<i64>,
    pub restriction_square: Exact,
    pub d_upper: Exact,
    pub status: VerdictStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwReport {
    pub rule: String,
    pub starting_classes: Vec<ClassExpr>,
    pub blow_ups: Vec<String>,
    pub canonical: Option<ClassExpr>,
    pub verdicts: Vec<VerdictRow>,
    pub minimality: MinimalityOutcome,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub name: String,
    pub description: String,
    pub steps: Vec<StepRecord>,
    pub geography: Option<GeographyVerdict>,
    pub sw: Option<SwReport>,
    pub fibers: Vec<FiberReport>,
    pub final_curves: Vec<(String, DivisorClass)>,
    pub expectations: Vec<ExpectationResult>,
    pub discrepancies: Vec<Discrepancy>,
    pub citations: Vec<Citation>,
}

impl Report {
    pub fn all_expectations_pass(&self) -> bool {
        self.expectations.iter().all(|e| e.passed)
    }

    /// Under `strict`, discrepancies with the listed data count as failures.
    pub fn passed(&self, strict: bool) -> bool {
        self.all_expectations_pass() && (!strict || self.discrepancies.is_empty())
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExpectationResult> {
        self.expectations.iter().filter(|e| !e.passed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn render_human(&self, strict: bool) -> String {
        let mut out = String::new();
        let w = &mut out;
        let verdict = if self.passed(strict) { "PASS" } else { "FAIL" };
        let _ = writeln!(w, "== {} [{verdict}]", self.name);
        if !self.description.is_empty() {
            let _ = writeln!(w, "   {}", self.description);
        }
        let _ = writeln!(w, "-- steps");
        for s in &self.steps {
            let l = &s.ledger;
            let chi = l.chi_h.map_or("n/a".to_string(), |c| c.to_string());
            let _ = writeln!(
                w,
                "  {:>2}. {:<28} e={:<4} sigma={:<4} b2+={:<3} chi_h={:<4} c1^2={}",
                s.index, s.operation, l.euler, l.signature, l.b2_plus, chi, l.c1sq
            );
        }
        if let Some(g) = &self.geography {
            let _ = writeln!(w, "-- geography: (chi_h, c1^2) = ({}, {}), {}", g.chi_h, g.c1sq, g.position);
        }
        if let Some(sw) = &self.sw {
            let _ = writeln!(w, "-- basic classes against {}", sw.rule);
            for v in &sw.verdicts {
                let _ = writeln!(
                    w,
                    "  {:<10} K^2={:<3} (K|_P)^2={:<12} ({:>6})  d_upper={:<12} {}",
                    v.class.to_string(),
                    v.class_square,
                    v.restriction_square.to_string(),
                    format_decimal(&v.restriction_square.0, 2),
                    v.d_upper.to_string(),
                    v.status
                );
            }
            let _ = writeln!(w, "  minimality: {}", sw.minimality);
            for n in &sw.notes {
                let _ = writeln!(w, "  note: {n}");
            }
        }
        if !self.final_curves.is_empty() {
            let _ = writeln!(w, "-- curves after the blow-up script");
            for (name, cls) in &self.final_curves {
                let _ = writeln!(w, "  {name:<4} {cls} (square {})", cls.self_intersection());
            }
        }
        for f in &self.fibers {
            let state = if f.passed { "ok".to_string() } else { f.failures.join("; ") };
            let _ = writeln!(w, "-- fiber {} as {}: {} [{state}]", f.name, f.expected_type, f.total_class);
        }
        if !self.expectations.is_empty() {
            let _ = writeln!(w, "-- expectations");
            for e in &self.expectations {
                let mark = if e.passed { "ok  " } else { "FAIL" };
                let _ = writeln!(w, "  [{mark}] {} (got {})", e.description, e.actual);
            }
        }
        for d in &self.discrepancies {
            let _ = writeln!(w, "-- discrepancy in {}: {}", d.topic, d.note);
        }
        if !self.citations.is_empty() {
            let _ = writeln!(w, "-- asserted, not computed");
            for c in &self.citations {
                let _ = writeln!(w, "  * {} [{}]", c.fact, c.source);
            }
        }
        out
    }
}
