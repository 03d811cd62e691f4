//! Which Seiberg–Witten basic classes of a manifold can survive a star
//! surgery.
//!
//! A basic class K of the ambient manifold W restricts to the plumbing P as
//! the dual-basis vector of its pairings with the spheres of P; its square
//! there is `vᵀ [P]⁻¹ v`. If K extended to a basic class K̃ of the surgered
//! manifold X, then
//!
//! ```text
//! K̃² = K² − (K|_P)² + (K̃|_F)²
//! d(K̃) = (K̃² − 2e(X) − 3σ(X)) / 4
//! ```
//!
//! and the filling F is negative definite, so `(K̃|_F)² ≤ 0` and `d` is
//! bounded above by the same expression with that term dropped. A negative
//! bound means K cannot extend.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::InvariantLedger;
use crate::plumbing::{FillingProfile, PlumbingGraph};
use crate::ratlin::{int, LinalgError, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwError {
    #[error("generator `{0}` is already in use")]
    GeneratorClash(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("no pairing vector for generator `{0}`")]
    MissingPairing(String),
    #[error("pairing vector for `{generator}` has {got} entries but the plumbing has {expected} vertices")]
    PairingLength { generator: String, expected: usize, got: usize },
    #[error("filling `{0}` is not known to be negative definite; the dimension bound does not apply")]
    IndefiniteFilling(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("cannot parse class `{0}`")]
    BadClass(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Integer combination of named cohomology generators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ClassExpr {
    coeffs: BTreeMap<String, i64>,
}

impl ClassExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn generator(name: &str) -> Self {
        Self::term(name, 1)
    }

    pub fn term(name: &str, coeff: i64) -> Self {
        let mut c = Self::default();
        c.add_term(name, coeff);
        c
    }

    fn add_term(&mut self, name: &str, coeff: i64) {
        let entry = self.coeffs.entry(name.to_string()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coeffs.remove(name);
        }
    }

    pub fn coeff(&self, name: &str) -> i64 {
        self.coeffs.get(name).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, i64)> {
        self.coeffs.iter().map(|(g, &c)| (g.as_str(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, c) in other.terms() {
            out.add_term(g, c);
        }
        out
    }

    pub fn negated(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(g, c)| (g.clone(), -c)).collect() }
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    /// Terms with `f` first, then the remaining generators in name order.
    fn display_terms(&self) -> Vec<(&str, i64)> {
        let mut terms: Vec<(&str, i64)> = self.terms().collect();
        terms.sort_by_key(|(g, _)| (*g != "f", *g));
        terms
    }

    /// Representative of the pair {c, −c}: the one whose leading displayed
    /// coefficient is positive.
    pub fn sign_normalized(&self) -> Self {
        match self.display_terms().first() {
            Some((_, c)) if *c < 0 => self.negated(),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.display_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, c)) in terms.into_iter().enumerate() {
            let sign = if c < 0 { "-" } else if i == 0 { "" } else { "+" };
            match c.unsigned_abs() {
                1 => write!(f, "{sign}{g}")?,
                m => write!(f, "{sign}{m}{g}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for ClassExpr {
    type Err = SwError;

    /// Parses expressions like `3f+E1`, `-f-E1`, `0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SwError::BadClass(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        if compact == "0" {
            return Ok(Self::zero());
        }
        let mut out = Self::zero();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (neg, body) = match rest.as_bytes()[0] {
                b'-' => (true, &rest[1..]),
                b'+' => (false, &rest[1..]),
                _ => (false, rest),
            };
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let term = &body[..end];
            rest = &body[end..];
            let split = term.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
            let (coef, gen) = term.split_at(split);
            if !gen.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                || !gen.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(bad());
            }
            let coef: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
            out.add_term(gen, if neg { -coef } else { coef });
        }
        Ok(out)
    }
}

impl Serialize for ClassExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Diagonal intersection pairing on the named generators. The elliptic
/// surfaces use the fiber class `f` with f² = 0; every blow-up adds a
/// generator of square −1 orthogonal to everything else.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ambient {
    squares: BTreeMap<String, i64>,
}

impl Ambient {
    pub fn elliptic() -> Self {
        Self { squares: BTreeMap::from([("f".to_string(), 0)]) }
    }

    pub fn from_squares(squares: BTreeMap<String, i64>) -> Self {
        Self { squares }
    }

    pub fn contains(&self, generator: &str) -> bool {
        self.squares.contains_key(generator)
    }

    pub fn generators(&self) -> impl Iterator<Item = &str> {
        self.squares.keys().map(String::as_str)
    }

    pub fn with_exceptional(&self, generator: &str) -> Result<Self, SwError> {
        if self.contains(generator) {
            return Err(SwError::GeneratorClash(generator.to_string()));
        }
        let mut next = self.clone();
        next.squares.insert(generator.to_string(), -1);
        Ok(next)
    }

    pub fn square(&self, class: &ClassExpr) -> Result<i64, SwError> {
        class.terms().try_fold(0, |acc, (g, c)| {
            let sq = self.squares.get(g).ok_or_else(|| SwError::UnknownGenerator(g.to_string()))?;
            Ok(acc + c * c * sq)
        })
    }
}

/// Basic classes of E(n), n ≥ 2: the exponents of (t − t⁻¹)^(n−2) times f.
///
/// The zero class is listed for even n ≥ 4. For n = 2 the only basic class
/// is zero and the returned list is empty.
pub fn en_basic_classes(n: u32) -> Result<Vec<ClassExpr>, SwError> {
    if n < 2 {
        return Err(SwError::BadParameter(format!("E(n) basic classes need n >= 2, got {n}")));
    }
    let top = i64::from(n) - 2;
    if top == 0 {
        return Ok(Vec::new());
    }
    Ok((0..=top)
        .map(|j| top - 2 * j)
        .map(|r| if r == 0 { ClassExpr::zero() } else { ClassExpr::term("f", r) })
        .collect())
}

/// Blow-up formula: each basic class K of W gives K ± E on W # −CP².
pub fn blowup_basic_classes(
    ambient: &Ambient,
    classes: &[ClassExpr],
    new_generator: &str,
) -> Result<(Ambient, Vec<ClassExpr>), SwError> {
    if classes.iter().any(|k| k.coeff(new_generator) != 0) {
        return Err(SwError::GeneratorClash(new_generator.to_string()));
    }
    let next = ambient.with_exceptional(new_generator)?;
    let e = ClassExpr::generator(new_generator);
    let out = classes.iter().flat_map(|k| [k.plus(&e), k.minus(&e)]).collect();
    Ok((next, out))
}

/// Pairings of each ambient generator with the plumbing spheres, in vertex order.
pub type PairingTable = BTreeMap<String, Vec<i64>>;

pub fn check_pairing_table(table: &PairingTable, plumbing: &PlumbingGraph) -> Result<(), SwError> {
    for (g, v) in table {
        if v.len() != plumbing.vertex_count() {
            return Err(SwError::PairingLength {
                generator: g.clone(),
                expected: plumbing.vertex_count(),
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// Pairing vector of `class` with the plumbing spheres.
pub fn pairing_vector(class: &ClassExpr, plumbing: &PlumbingGraph, table: &PairingTable) -> Result<Vec<i64>, SwError> {
    check_pairing_table(table, plumbing)?;
    let mut v = vec![0i64; plumbing.vertex_count()];
    for (g, c) in class.terms() {
        let row = table.get(g).ok_or_else(|| SwError::MissingPairing(g.to_string()))?;
        for (acc, p) in v.iter_mut().zip(row) {
            *acc += c * p;
        }
    }
    Ok(v)
}

/// Square of the restriction of `class` to the plumbing, `vᵀ [P]⁻¹ v`.
pub fn restrict_square(class: &ClassExpr, plumbing: &PlumbingGraph, table: &PairingTable) -> Result<Rational, SwError> {
    let v = pairing_vector(class, plumbing, table)?;
    if v.iter().all(|&x| x == 0) {
        return Ok(Rational::zero());
    }
    let inverse = plumbing.intersection_matrix().invert()?;
    Ok(inverse.evaluate_form(&v)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Obstructed,
    SurvivesUnconstrained,
    SurvivesTaubesTop,
}

impl VerdictStatus {
    pub fn survives(self) -> bool {
        self != VerdictStatus::Obstructed
    }
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictStatus::Obstructed => "obstructed",
            VerdictStatus::SurvivesUnconstrained => "survives_unconstrained",
            VerdictStatus::SurvivesTaubesTop => "survives_taubes_top",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionVerdict {
    pub class: ClassExpr,
    pub class_square: i64,
    pub restriction_square: Rational,
    /// Upper bound on the moduli dimension of any extension.
    pub d_upper: Rational,
    pub status: VerdictStatus,
    /// True when the filling's negative definiteness was computed from its
    /// form rather than taken as asserted.
    pub filling_form_checked: bool,
}

pub struct SurgeryContext<'a> {
    pub ambient: &'a Ambient,
    /// Invariants of the manifold after surgery.
    pub result: &'a InvariantLedger,
    pub plumbing: &'a PlumbingGraph,
    pub pairings: &'a PairingTable,
    pub filling: &'a FillingProfile,
    /// The class expected to survive by Taubes, up to sign.
    pub canonical: Option<&'a ClassExpr>,
}

/// Decides whether `class` is obstructed from extending across the surgery.
pub fn extension_verdict(class: &ClassExpr, ctx: &SurgeryContext<'_>) -> Result<ObstructionVerdict, SwError> {
    match ctx.filling.negative_definite() {
        Some(true) => {}
        _ => return Err(SwError::IndefiniteFilling(ctx.filling.name.clone())),
    }
    let class_square = ctx.ambient.square(class)?;
    let restriction_square = restrict_square(class, ctx.plumbing, ctx.pairings)?;
    let d_upper = (int(class_square) - &restriction_square
        - int(2 * ctx.result.euler)
        - int(3 * ctx.result.signature))
        / int(4);
    let is_top = ctx.canonical.is_some_and(|k| *k == *class || k.negated() == *class);
    let status = if d_upper.is_negative() {
        VerdictStatus::Obstructed
    } else if is_top {
        VerdictStatus::SurvivesTaubesTop
    } else {
        VerdictStatus::SurvivesUnconstrained
    };
    Ok(ObstructionVerdict {
        class: class.clone(),
        class_square,
        restriction_square,
        d_upper,
        status,
        filling_form_checked: ctx.filling.form.is_some(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MinimalityOutcome {
    /// Exactly one ± pair survives: it is the only basic class, and by the
    /// blow-up formula the manifold is minimal.
    Minimal { basic_class: ClassExpr },
    /// Nothing survives, contradicting Taubes' existence of a basic class.
    Inconsistent,
    Inconclusive { surviving: Vec<ClassExpr> },
    /// b₂⁺ ≤ 1: Taubes' theorem in this form does not apply.
    TaubesNotApplicable { b2_plus: i64 },
}

impl fmt::Display for MinimalityOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinimalityOutcome::Minimal { basic_class } => {
                write!(f, "single basic class pair ±{basic_class}; minimal by the blow-up formula")
            }
            MinimalityOutcome::Inconsistent => write!(f, "every class obstructed: inconsistent with Taubes"),
            MinimalityOutcome::Inconclusive { surviving } => {
                write!(f, "inconclusive, surviving pairs:")?;
                for c in surviving {
                    write!(f, " ±{c}")?;
                }
                Ok(())
            }
            MinimalityOutcome::TaubesNotApplicable { b2_plus } => write!(f, "b2+ = {b2_plus}: no minimality verdict"),
        }
    }
}

pub fn minimality_report(result: &InvariantLedger, verdicts: &[ObstructionVerdict]) -> MinimalityOutcome {
    if !result.symplectic || result.b2_plus() <= 1 {
        return MinimalityOutcome::TaubesNotApplicable { b2_plus: result.b2_plus() };
    }
    let mut pairs: Vec<ClassExpr> = verdicts
        .iter()
        .filter(|v| v.status.survives())
        .map(|v| v.class.sign_normalized())
        .collect();
    pairs.sort();
    pairs.dedup();
    match pairs.len() {
        0 => MinimalityOutcome::Inconsistent,
        1 => MinimalityOutcome::Minimal { basic_class: pairs.remove(0) },
        _ => MinimalityOutcome::Inconclusive { surviving: pairs },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plumbing::StarSurgeryRule;
    use crate::ratlin::rat;

    fn c(s: &str) -> ClassExpr {
        s.parse().unwrap()
    }

    fn q_table() -> PairingTable {
        PairingTable::from([("f".into(), vec![1, 0, 0, 0, 0, 0, 0]), ("E1".into(), vec![0, 1, 0, 0, 1, 0, 0])])
    }

    #[test]
    fn class_parse_and_display() {
        assert_eq!(c("3f+E1").to_string(), "3f+E1");
        assert_eq!(c("E1+3f").to_string(), "3f+E1");
        assert_eq!(c("-f-E1").to_string(), "-f-E1");
        assert_eq!(c("f-f").to_string(), "0");
        assert_eq!(c("0"), ClassExpr::zero());
        assert_eq!(c("-f-E1").sign_normalized(), c("f+E1"));
        assert_eq!(c("-E1").sign_normalized(), c("E1"));
        for bad in ["", "3", "f+", "2*f", "+-f"] {
            assert!(bad.parse::<ClassExpr>().is_err(), "{bad}");
        }
    }

    #[test]
    fn squares_in_blown_up_elliptic_surface() {
        let amb = Ambient::elliptic().with_exceptional("E1").unwrap();
        assert_eq!(amb.square(&c("f+E1")).unwrap(), -1);
        assert_eq!(amb.square(&c("3f-E1")).unwrap(), -1);
        assert_eq!(amb.square(&c("4f")).unwrap(), 0);
        assert_eq!(amb.square(&c("g")), Err(SwError::UnknownGenerator("g".into())));
        assert_eq!(amb.with_exceptional("E1"), Err(SwError::GeneratorClash("E1".into())));
    }

    #[test]
    fn en_classes() {
        let e5 = en_basic_classes(5).unwrap();
        assert_eq!(e5, vec![c("3f"), c("f"), c("-f"), c("-3f")]);
        assert!(en_basic_classes(2).unwrap().is_empty());
        assert_eq!(en_basic_classes(6).unwrap(), vec![c("4f"), c("2f"), c("0"), c("-2f"), c("-4f")]);
        assert_eq!(en_basic_classes(3).unwrap(), vec![c("f"), c("-f")]);
        assert!(en_basic_classes(1).is_err());
    }

    #[test]
    fn blow_up_formula() {
        let (amb, classes) = blowup_basic_classes(&Ambient::elliptic(), &en_basic_classes(5).unwrap(), "E1").unwrap();
        assert_eq!(classes.len(), 8);
        for k in ["f+E1", "f-E1", "-f+E1", "-f-E1", "3f+E1", "3f-E1", "-3f+E1", "-3f-E1"] {
            assert!(classes.contains(&c(k)), "{k}");
        }
        assert!(amb.contains("E1"));
        let (_, empty) = blowup_basic_classes(&Ambient::elliptic(), &[], "E1").unwrap();
        assert!(empty.is_empty());
        assert!(matches!(
            blowup_basic_classes(&amb, &classes, "E1"),
            Err(SwError::GeneratorClash(_))
        ));
        let (amb6, six) = blowup_basic_classes(&Ambient::elliptic(), &[c("2f"), c("-2f"), c("4f"), c("-4f")], "E1").unwrap();
        assert_eq!(six.len(), 8);
        assert_eq!(amb6.square(&c("4f+E1")).unwrap(), -1);
    }

    #[test]
    fn restriction_squares() {
        let q = StarSurgeryRule::plumbing_q();
        assert_eq!(restrict_square(&c("f+E1"), &q, &q_table()).unwrap(), rat(-403, 261));
        let k = StarSurgeryRule::plumbing_k();
        let kt = PairingTable::from([("f".into(), vec![1, 0, 0, 0, 0])]);
        assert_eq!(restrict_square(&c("2f"), &k, &kt).unwrap(), int(-1));
        let s2 = StarSurgeryRule::plumbing_s2();
        assert_eq!(restrict_square(&c("f"), &s2, &kt).unwrap(), rat(-1, 3));
        assert_eq!(restrict_square(&c("0"), &s2, &kt).unwrap(), int(0));
    }

    #[test]
    fn restriction_errors() {
        let q = StarSurgeryRule::plumbing_q();
        assert_eq!(restrict_square(&c("f+E2"), &q, &q_table()), Err(SwError::MissingPairing("E2".into())));
        let short = PairingTable::from([("f".into(), vec![1, 0, 0, 0, 0, 0])]);
        assert!(matches!(restrict_square(&c("f"), &q, &short), Err(SwError::PairingLength { expected: 7, got: 6, .. })));
    }

    #[test]
    fn verdicts_on_x() {
        let rule = StarSurgeryRule::qr();
        let x = InvariantLedger::explicit("X", 56, -36, true, true).unwrap();
        let amb = Ambient::elliptic().with_exceptional("E1").unwrap();
        let canonical = c("3f+E1");
        let table = q_table();
        let ctx = SurgeryContext {
            ambient: &amb,
            result: &x,
            plumbing: &rule.plumbing,
            pairings: &table,
            filling: &rule.filling,
            canonical: Some(&canonical),
        };
        let p = extension_verdict(&c("f+E1"), &ctx).unwrap();
        assert_eq!(p.d_upper, (int(-5) + rat(403, 261)) / int(4));
        assert_eq!(p.status, VerdictStatus::Obstructed);
        assert!(p.filling_form_checked);
        let m = extension_verdict(&c("3f+E1"), &ctx).unwrap();
        assert_eq!(m.d_upper, rat(10, 1044));
        assert_eq!(m.status, VerdictStatus::SurvivesTaubesTop);
        let minus_m = extension_verdict(&c("-3f-E1"), &ctx).unwrap();
        assert_eq!(minus_m.status, VerdictStatus::SurvivesTaubesTop);
    }

    #[test]
    fn verdict_on_y() {
        let rule = StarSurgeryRule::kl();
        let y = InvariantLedger::explicit("Y", 68, -44, true, true).unwrap();
        let amb = Ambient::elliptic();
        let table = PairingTable::from([("f".into(), vec![1, 0, 0, 0, 0])]);
        let ctx = SurgeryContext {
            ambient: &amb,
            result: &y,
            plumbing: &rule.plumbing,
            pairings: &table,
            filling: &rule.filling,
            canonical: None,
        };
        assert_eq!(extension_verdict(&c("2f"), &ctx).unwrap().d_upper, rat(-3, 4));
        assert_eq!(extension_verdict(&c("0"), &ctx).unwrap().d_upper, int(-1));
        let top = extension_verdict(&c("4f"), &ctx).unwrap();
        assert_eq!(top.d_upper, int(0));
        assert_eq!(top.status, VerdictStatus::SurvivesUnconstrained);
    }

    #[test]
    fn indefinite_filling_refused() {
        let mut rule = StarSurgeryRule::qr();
        rule.filling = FillingProfile::new(
            "bad",
            3,
            0,
            crate::plumbing::FundamentalGroup::Trivial,
            Some(crate::ratlin::RationalMatrix::diagonal(&[1, -1])),
            true,
        )
        .unwrap();
        let x = InvariantLedger::explicit("X", 56, -36, true, true).unwrap();
        let amb = Ambient::elliptic().with_exceptional("E1").unwrap();
        let table = q_table();
        let ctx = SurgeryContext {
            ambient: &amb,
            result: &x,
            plumbing: &rule.plumbing,
            pairings: &table,
            filling: &rule.filling,
            canonical: None,
        };
        assert_eq!(extension_verdict(&c("f"), &ctx), Err(SwError::IndefiniteFilling("bad".into())));
    }

    fn verdict(class: &str, status: VerdictStatus) -> ObstructionVerdict {
        ObstructionVerdict {
            class: c(class),
            class_square: 0,
            restriction_square: int(0),
            d_upper: int(0),
            status,
            filling_form_checked: false,
        }
    }

    #[test]
    fn minimality_outcomes() {
        use VerdictStatus::*;
        let x = InvariantLedger::explicit("X", 56, -36, true, true).unwrap();
        let one = [verdict("f", Obstructed), verdict("-f", Obstructed), verdict("3f", SurvivesTaubesTop), verdict("-3f", SurvivesTaubesTop)];
        assert_eq!(minimality_report(&x, &one), MinimalityOutcome::Minimal { basic_class: c("3f") });
        let none = [verdict("f", Obstructed)];
        assert_eq!(minimality_report(&x, &none), MinimalityOutcome::Inconsistent);
        let two = [verdict("f", SurvivesUnconstrained), verdict("3f", SurvivesTaubesTop)];
        assert!(matches!(minimality_report(&x, &two), MinimalityOutcome::Inconclusive { .. }));
        let small = InvariantLedger::explicit("b2+=1", 13, -9, true, true).unwrap();
        assert_eq!(minimality_report(&small, &one), MinimalityOutcome::TaubesNotApplicable { b2_plus: 1 });
    }
}
