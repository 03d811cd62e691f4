//! Euler characteristic and signature bookkeeping for closed 4-manifolds,
//! the cut-and-paste operations that change them, and placement on the
//! (χ_h, c₁²) geography chart.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plumbing::StarSurgeryRule;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("`{0}` is not an elliptic surface E(n); fiber sum with E(1) needs one")]
    NotElliptic(String),
    #[error("e + sigma = {0} is not divisible by 4, so chi_h is not an integer")]
    NonIntegralChiH(i64),
    #[error("invalid ledger `{name}`: {reason}")]
    Invalid { name: String, reason: String },
}

/// One applied operation, kept in order on the ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Elliptic(u32),
    Explicit,
    FiberSum,
    BlowUp(u32),
    BlowDown(u32),
    StarSurgery(String),
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Elliptic(n) => write!(f, "E({n})"),
            Operation::Explicit => write!(f, "explicit"),
            Operation::FiberSum => write!(f, "fiber sum with E(1)"),
            Operation::BlowUp(k) => write!(f, "blow up x{k}"),
            Operation::BlowDown(k) => write!(f, "blow down x{k}"),
            Operation::StarSurgery(rule) => write!(f, "star surgery {rule}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantLedger {
    pub name: String,
    pub euler: i64,
    pub signature: i64,
    /// Asserted, never computed.
    pub simply_connected: bool,
    /// Asserted, never computed.
    pub symplectic: bool,
    pub provenance: Vec<Operation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeographyPosition {
    AboveNoether,
    OnNoether,
    StrictlyBetween,
    OnHalfNoether,
    BelowHalfNoether,
}

impl fmt::Display for GeographyPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GeographyPosition::AboveNoether => "above_noether",
            GeographyPosition::OnNoether => "on_noether",
            GeographyPosition::StrictlyBetween => "strictly_between",
            GeographyPosition::OnHalfNoether => "on_half_noether",
            GeographyPosition::BelowHalfNoether => "below_half_noether",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GeographyVerdict {
    pub chi_h: i64,
    pub c1sq: i64,
    pub position: GeographyPosition,
}

/// Noether line value 2χ_h − 6.
pub fn noether_line(chi_h: i64) -> i64 {
    2 * chi_h - 6
}

/// Half-Noether line value χ_h − 3.
pub fn half_noether_line(chi_h: i64) -> i64 {
    chi_h - 3
}

/// Places `(chi_h, c1sq)` against the two lines. Ties with the Noether line
/// win over the half-Noether line; "between" is strict on both sides.
pub fn classify(chi_h: i64, c1sq: i64) -> GeographyPosition {
    let noether = noether_line(chi_h);
    let half = half_noether_line(chi_h);
    if c1sq == noether {
        GeographyPosition::OnNoether
    } else if c1sq > noether {
        GeographyPosition::AboveNoether
    } else if c1sq == half {
        GeographyPosition::OnHalfNoether
    } else if c1sq > half {
        GeographyPosition::StrictlyBetween
    } else {
        GeographyPosition::BelowHalfNoether
    }
}

impl InvariantLedger {
    pub fn explicit(
        name: impl Into<String>,
        euler: i64,
        signature: i64,
        simply_connected: bool,
        symplectic: bool,
    ) -> Result<Self, LedgerError> {
        let ledger = Self {
            name: name.into(),
            euler,
            signature,
            simply_connected,
            symplectic,
            provenance: vec![Operation::Explicit],
        };
        ledger.validate()?;
        Ok(ledger)
    }

    /// E(n): e = 12n, σ = −8n, simply connected and Kähler.
    pub fn elliptic_surface(n: u32) -> Result<Self, LedgerError> {
        if n < 1 {
            return Err(LedgerError::BadParameter("E(n) needs n >= 1".into()));
        }
        let n64 = i64::from(n);
        Ok(Self {
            name: format!("E({n})"),
            euler: 12 * n64,
            signature: -8 * n64,
            simply_connected: true,
            symplectic: true,
            provenance: vec![Operation::Elliptic(n)],
        })
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        let invalid = |reason: String| LedgerError::Invalid { name: self.name.clone(), reason };
        if !self.simply_connected {
            return Ok(());
        }
        if self.euler < 2 {
            return Err(invalid(format!("euler characteristic {} < 2", self.euler)));
        }
        if (self.euler + self.signature).rem_euclid(4) != 0 {
            return Err(invalid(format!("e + sigma = {} is not divisible by 4", self.euler + self.signature)));
        }
        if self.b2_plus() < 0 || self.b2_minus() < 0 {
            return Err(invalid(format!("b2+ = {}, b2- = {}", self.b2_plus(), self.b2_minus())));
        }
        Ok(())
    }

    /// b₂ = e − 2, valid when b₁ = b₃ = 0.
    pub fn b2(&self) -> i64 {
        self.euler - 2
    }

    pub fn b2_plus(&self) -> i64 {
        (self.b2() + self.signature).div_euclid(2)
    }

    pub fn b2_minus(&self) -> i64 {
        (self.b2() - self.signature).div_euclid(2)
    }

    pub fn chi_h(&self) -> Result<i64, LedgerError> {
        let s = self.euler + self.signature;
        if s.rem_euclid(4) != 0 {
            return Err(LedgerError::NonIntegralChiH(s));
        }
        Ok(s / 4)
    }

    pub fn c1_squared(&self) -> i64 {
        2 * self.euler + 3 * self.signature
    }

    pub fn geography(&self) -> Result<GeographyVerdict, LedgerError> {
        let chi_h = self.chi_h()?;
        let c1sq = self.c1_squared();
        Ok(GeographyVerdict { chi_h, c1sq, position: classify(chi_h, c1sq) })
    }

    /// Number n when the ledger is E(n) built only from E(k)'s and fiber sums.
    pub fn elliptic_index(&self) -> Option<u32> {
        let (first, rest) = self.provenance.split_first()?;
        let Operation::Elliptic(n) = first else { return None };
        let mut n = *n;
        for op in rest {
            match op {
                Operation::FiberSum => n += 1,
                _ => return None,
            }
        }
        Some(n)
    }

    fn with_op(&self, op: Operation) -> Self {
        let mut next = self.clone();
        next.provenance.push(op);
        next
    }

    /// Connected sum with k copies of −CP².
    pub fn blow_up(&self, k: u32) -> Result<Self, LedgerError> {
        if k < 1 {
            return Err(LedgerError::BadParameter("blow-up count must be at least 1".into()));
        }
        let mut next = self.with_op(Operation::BlowUp(k));
        next.euler += i64::from(k);
        next.signature -= i64::from(k);
        Ok(next)
    }

    pub fn blow_down(&self, k: u32) -> Result<Self, LedgerError> {
        if k < 1 {
            return Err(LedgerError::BadParameter("blow-down count must be at least 1".into()));
        }
        let mut next = self.with_op(Operation::BlowDown(k));
        next.euler -= i64::from(k);
        next.signature += i64::from(k);
        next.validate()?;
        Ok(next)
    }

    /// E(n) ↦ E(n+1).
    pub fn fiber_sum_e1(&self) -> Result<Self, LedgerError> {
        let n = self.elliptic_index().ok_or_else(|| LedgerError::NotElliptic(self.name.clone()))?;
        let mut next = self.with_op(Operation::FiberSum);
        next.name = format!("E({})", n + 1);
        next.euler += 12;
        next.signature -= 8;
        Ok(next)
    }

    /// Cut out the rule's plumbing and glue in its filling. Simple
    /// connectivity of the result is whatever the caller asserts; without
    /// an assertion it survives only when the filling is simply connected.
    pub fn star_surgery(&self, rule: &StarSurgeryRule, simply_connected: Option<bool>) -> Self {
        let mut next = self.with_op(Operation::StarSurgery(rule.name.clone()));
        next.euler = self.euler - rule.plumbing.euler_characteristic() + rule.filling.euler;
        next.signature = self.signature - rule.plumbing.signature() + rule.filling.signature;
        next.simply_connected =
            simply_connected.unwrap_or(self.simply_connected && rule.filling.is_simply_connected());
        next
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(l: &InvariantLedger) -> (i64, i64) {
        (l.euler, l.signature)
    }

    #[test]
    fn elliptic_surfaces() {
        assert_eq!(pair(&InvariantLedger::elliptic_surface(1).unwrap()), (12, -8));
        assert_eq!(pair(&InvariantLedger::elliptic_surface(2).unwrap()), (24, -16));
        assert_eq!(pair(&InvariantLedger::elliptic_surface(5).unwrap()), (60, -40));
        assert!(matches!(InvariantLedger::elliptic_surface(0), Err(LedgerError::BadParameter(_))));
    }

    #[test]
    fn blow_ups() {
        let e5 = InvariantLedger::elliptic_surface(5).unwrap();
        assert_eq!(pair(&e5.blow_up(1).unwrap()), (61, -41));
        let e2 = InvariantLedger::elliptic_surface(2).unwrap();
        assert_eq!(pair(&e2.blow_up(6).unwrap()), (30, -22));
        assert!(e2.blow_up(0).is_err());
        let back = e5.blow_up(1).unwrap().blow_down(1).unwrap();
        assert_eq!(pair(&back), pair(&e5));
    }

    #[test]
    fn fiber_sums() {
        let e1 = InvariantLedger::elliptic_surface(1).unwrap();
        let e2 = e1.fiber_sum_e1().unwrap();
        assert_eq!((e2.name.as_str(), e2.euler, e2.signature), ("E(2)", 24, -16));
        let e5 = InvariantLedger::elliptic_surface(4).unwrap().fiber_sum_e1().unwrap();
        assert_eq!(pair(&e5), (60, -40));
        assert_eq!(pair(&e5.fiber_sum_e1().unwrap()), (72, -48));
        assert_eq!(e5.fiber_sum_e1().unwrap().elliptic_index(), Some(6));
        let blown = e5.blow_up(1).unwrap();
        assert!(matches!(blown.fiber_sum_e1(), Err(LedgerError::NotElliptic(_))));
        let explicit = InvariantLedger::explicit("E(1)?", 12, -8, true, true).unwrap();
        assert!(explicit.fiber_sum_e1().is_err());
    }

    #[test]
    fn star_surgeries() {
        let w = InvariantLedger::explicit("W", 61, -41, true, true).unwrap();
        assert_eq!(pair(&w.star_surgery(&StarSurgeryRule::qr(), None)), (56, -36));
        let e6 = InvariantLedger::explicit("E(6)", 72, -48, true, true).unwrap();
        let y = e6.star_surgery(&StarSurgeryRule::kl(), None);
        assert_eq!(pair(&y), (68, -44));
        assert!(!y.simply_connected, "pi1(L) = Z/4 needs an explicit assertion");
        assert!(e6.star_surgery(&StarSurgeryRule::kl(), Some(true)).simply_connected);
        let base = InvariantLedger::explicit("E(5)#3", 63, -43, true, true).unwrap();
        assert_eq!(pair(&base.star_surgery(&StarSurgeryRule::uv(), None)), (56, -36));
    }

    #[test]
    fn geography_examples() {
        let g = |e, s| InvariantLedger::explicit("m", e, s, true, true).unwrap().geography().unwrap();
        assert_eq!(g(56, -36), GeographyVerdict { chi_h: 5, c1sq: 4, position: GeographyPosition::OnNoether });
        assert_eq!(g(68, -44), GeographyVerdict { chi_h: 6, c1sq: 4, position: GeographyPosition::StrictlyBetween });
        let e1 = g(12, -8);
        assert_eq!((e1.chi_h, e1.c1sq), (1, 0));
        assert_eq!(classify(8, 5), GeographyPosition::OnHalfNoether);
        assert_eq!(classify(8, 4), GeographyPosition::BelowHalfNoether);
        assert_eq!(classify(5, 5), GeographyPosition::AboveNoether);
    }

    #[test]
    fn non_integral_chi_h() {
        let odd = InvariantLedger { simply_connected: false, ..InvariantLedger::elliptic_surface(1).unwrap() };
        let odd = InvariantLedger { euler: 13, ..odd };
        assert_eq!(odd.geography(), Err(LedgerError::NonIntegralChiH(5)));
        assert!(InvariantLedger::explicit("bad", 13, -8, true, true).is_err());
        assert!(InvariantLedger::explicit("tiny", 1, -1, true, true).is_err());
        assert!(InvariantLedger::explicit("neg b2+", 6, -6, true, true).is_err());
    }

    #[test]
    fn betti_numbers() {
        let x = InvariantLedger::explicit("X", 56, -36, true, true).unwrap();
        assert_eq!((x.b2(), x.b2_plus(), x.b2_minus()), (54, 9, 45));
        let m = InvariantLedger::explicit("M", 23, -15, true, true).unwrap();
        assert_eq!(m.b2_plus(), 3);
    }
}
