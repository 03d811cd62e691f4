//! Recipe documents: one JSON file per construction, describing a base
//! manifold, the operations applied to it, an optional basic-class analysis,
//! an optional blow-up script, and the values the construction is expected
//! to produce.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "name": "X_noether",
//!   "base": { "elliptic": 5 },
//!   "steps": [ { "blow_up": 1 }, { "star_surgery": { "rule": "(Q,R)" } } ],
//!   "expectations": [ { "geography": { "chi_h": 5, "c1sq": 4 } } ]
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::blowup::{BlowupError, BlowupScript, DivisorClass, ScriptOutcome};
use crate::ledger::{GeographyPosition, InvariantLedger, LedgerError, Operation};
use crate::plumbing::{
    FillingProfile, FundamentalGroup, PlumbingError, PlumbingSpec, StarSurgeryRule,
};
use crate::ratlin::{format_decimal, parse_decimal, parse_rational, rat, round_decimal, Rational, RationalMatrix};
use crate::report::{
    Citation, Discrepancy, Exact, ExpectationResult, Report, StepRecord, SwReport, VerdictRow,
};
use crate::sw::{
    blowup_basic_classes, en_basic_classes, extension_verdict, minimality_report, pairing_vector,
    Ambient, ClassExpr, MinimalityOutcome, PairingTable, SurgeryContext, SwError, VerdictStatus,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance for values that were published as rounded decimals.
pub fn printed_tolerance() -> Rational {
    rat(1, 100)
}

#[derive(Debug, Error)]
pub enum RecipeError {
    #[error("parse error at line {line}, column {column} (field `{path}`): {message}")]
    Parse { line: usize, column: usize, path: String, message: String },
    #[error("unknown star surgery rule `{0}`")]
    UnknownRule(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<RecipeError>,
    },
    #[error("blow-up script step {index}: {source}")]
    Script {
        index: usize,
        #[source]
        source: BlowupError,
    },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Plumbing(#[from] PlumbingError),
    #[error(transparent)]
    Sw(#[from] SwError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("batch needs at least one recipe")]
    EmptyBatch,
}

impl RecipeError {
    /// Errors that mean the input was not a usable recipe at all.
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            RecipeError::Parse { .. }
                | RecipeError::UnknownRule(_)
                | RecipeError::SchemaViolation(_)
                | RecipeError::Io { .. }
                | RecipeError::EmptyBatch
        )
    }
}

fn schema(msg: impl Into<String>) -> RecipeError {
    RecipeError::SchemaViolation(msg.into())
}

/// Exact rational written as `"p/q"` or `"p"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLit(pub Rational);

impl<'de> Deserialize<'de> for RationalLit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s)
            .map(RationalLit)
            .ok_or_else(|| serde::de::Error::custom(format!("`{s}` is not a rational p/q")))
    }
}

impl Serialize for RationalLit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
    }
}

/// A rounded decimal as it was printed, e.g. `"-1.54"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecimalLit {
    pub text: String,
    pub value: Rational,
}

impl<'de> Deserialize<'de> for DecimalLit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let value = parse_decimal(&text)
            .ok_or_else(|| serde::de::Error::custom(format!("`{text}` is not a decimal literal")))?;
        Ok(DecimalLit { text, value })
    }
}

impl Serialize for DecimalLit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitBase {
    pub name: String,
    pub euler: i64,
    pub signature: i64,
    pub simply_connected: bool,
    pub symplectic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    Elliptic(u32),
    Explicit(ExplicitBase),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurgeryStep {
    pub rule: String,
    /// Asserted simple connectivity of the result; overrides the default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simply_connected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowdownStep {
    pub p: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simply_connected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    BlowUp(u32),
    /// Number of fiber sums with E(1).
    FiberSum(u32),
    StarSurgery(SurgeryStep),
    RationalBlowdown(BlowdownStep),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FillingDef {
    pub name: String,
    pub euler: i64,
    pub signature: i64,
    pub pi1: FundamentalGroup,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub negative_definite: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDef {
    pub name: String,
    pub plumbing: PlumbingSpec,
    pub filling: FillingDef,
    pub citation: String,
}

impl RuleDef {
    fn build(&self) -> Result<StarSurgeryRule, RecipeError> {
        let plumbing = self.plumbing.build()?;
        let form = match &self.filling.form {
            Some(rows) => Some(RationalMatrix::from_integers(rows).map_err(|e| {
                schema(format!("filling `{}` form: {e}", self.filling.name))
            })?),
            None => None,
        };
        let f = &self.filling;
        let filling = FillingProfile::new(&f.name, f.euler, f.signature, f.pi1.clone(), form, f.negative_definite)?;
        Ok(StarSurgeryRule { name: self.name.clone(), plumbing, filling, citation: self.citation.clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwBlock {
    /// Surgery whose plumbing and filling the classes are tested against.
    pub rule: String,
    /// Start from the basic classes of E(n)...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub en: Option<u32>,
    /// ...or from an explicit list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<ClassExpr>>,
    /// Generator squares for explicit classes; defaults to f² = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squares: Option<BTreeMap<String, i64>>,
    /// Blow-up formula applications, in order.
    #[serde(default)]
    pub blow_ups: Vec<String>,
    pub pairings: PairingTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<ClassExpr>,
    /// The starting classes as the literature lists them; any difference
    /// from the computed list is reported as a discrepancy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub listed_classes: Option<Vec<ClassExpr>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerExpect {
    pub euler: i64,
    pub signature: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after_step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeographyExpect {
    pub chi_h: i64,
    pub c1sq: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<GeographyPosition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionExpect {
    pub class: ClassExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<RationalLit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed: Option<DecimalLit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictExpect {
    pub class: ClassExpr,
    pub status: VerdictStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_upper: Option<RationalLit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimalityKind {
    Minimal,
    Inconsistent,
    Inconclusive,
    TaubesNotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalityExpect {
    pub outcome: MinimalityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basic_class: Option<ClassExpr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberExpect {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveClassExpect {
    pub curve: String,
    pub class: DivisorClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub square: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after_step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplicityExpect {
    pub point: String,
    pub a: String,
    pub b: String,
    pub value: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after_step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Ledger(LedgerExpect),
    Geography(GeographyExpect),
    B2Plus(i64),
    B2PlusAtLeast(i64),
    SimplyConnected(bool),
    RestrictionSquare(RestrictionExpect),
    Verdict(VerdictExpect),
    Minimality(MinimalityExpect),
    Fiber(FiberExpect),
    CurveClass(CurveClassExpect),
    Multiplicity(MultiplicityExpect),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Name given to the final manifold; defaults to `name` once any step runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold: Option<String>,
    pub base: Base,
    #[serde(default)]
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<RuleDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sw: Option<SwBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_script: Option<BlowupScript>,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub citations: Vec<Citation>,
}

impl Recipe {
    /// Looks up a rule among the inline definitions, then the built-ins.
    pub fn resolve_rule(&self, name: &str) -> Result<StarSurgeryRule, RecipeError> {
        if let Some(def) = self.rules.iter().find(|r| r.name == name) {
            return def.build();
        }
        StarSurgeryRule::builtin(name).ok_or_else(|| RecipeError::UnknownRule(name.to_string()))
    }

    fn validate(&self) -> Result<(), RecipeError> {
        if self.schema != SCHEMA_VERSION {
            return Err(schema(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema)));
        }
        let mut seen = BTreeSet::new();
        for def in &self.rules {
            if StarSurgeryRule::builtin(&def.name).is_some() {
                return Err(schema(format!("inline rule `{}` shadows a built-in rule", def.name)));
            }
            if !seen.insert(def.name.as_str()) {
                return Err(schema(format!("inline rule `{}` defined twice", def.name)));
            }
            def.build()?;
        }
        for step in &self.steps {
            match step {
                Step::StarSurgery(s) => {
                    self.resolve_rule(&s.rule)?;
                }
                Step::BlowUp(0) | Step::FiberSum(0) => return Err(schema("step counts must be at least 1")),
                Step::RationalBlowdown(b) if b.p < 2 => {
                    return Err(schema(format!("rational blow-down needs p >= 2, got {}", b.p)))
                }
                _ => {}
            }
        }
        if let Some(sw) = &self.sw {
            let rule = self.resolve_rule(&sw.rule)?;
            let n = rule.plumbing.vertex_count();
            for (g, v) in &sw.pairings {
                if v.len() != n {
                    return Err(schema(format!(
                        "pairing vector for `{g}` has {} entries but {} has {n} vertices",
                        v.len(),
                        rule.name
                    )));
                }
            }
            match (&sw.en, &sw.classes) {
                (Some(_), None) | (None, Some(_)) => {}
                _ => return Err(schema("sw block needs exactly one of `en` and `classes`")),
            }
            if sw.squares.is_some() && sw.en.is_some() {
                return Err(schema("`squares` only applies to explicit `classes`"));
            }
        }
        for e in &self.expectations {
            self.validate_expectation(e)?;
        }
        Ok(())
    }

    fn validate_expectation(&self, e: &Expectation) -> Result<(), RecipeError> {
        let script_steps = self.blowup_script.as_ref().map(|s| s.steps.len());
        let check_script_step = |after: Option<usize>| match (script_steps, after) {
            (None, _) => Err(schema("curve expectations need a blowup_script")),
            (Some(n), Some(k)) if k > n => Err(schema(format!("after_step {k} but the script has {n} steps"))),
            _ => Ok(()),
        };
        match e {
            Expectation::Ledger(l) => match l.after_step {
                Some(k) if k > self.steps.len() => {
                    Err(schema(format!("after_step {k} but the recipe has {} steps", self.steps.len())))
                }
                _ => Ok(()),
            },
            Expectation::RestrictionSquare(r) => {
                if self.sw.is_none() {
                    return Err(schema("restriction_square expectation needs an sw block"));
                }
                if r.exact.is_none() && r.printed.is_none() {
                    return Err(schema("restriction_square expectation needs `exact` or `printed`"));
                }
                Ok(())
            }
            Expectation::Verdict(_) | Expectation::Minimality(_) if self.sw.is_none() => {
                Err(schema("verdict and minimality expectations need an sw block"))
            }
            Expectation::Fiber(_) => check_script_step(None),
            Expectation::CurveClass(c) => check_script_step(c.after_step),
            Expectation::Multiplicity(m) => check_script_step(m.after_step),
            _ => Ok(()),
        }
    }
}

/// Parses and validates a recipe document. Unknown fields are rejected.
pub fn parse_recipe(text: &str) -> Result<Recipe, RecipeError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let recipe: Recipe = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        RecipeError::Parse { line: inner.line(), column: inner.column(), path, message: inner.to_string() }
    })?;
    recipe.validate()?;
    Ok(recipe)
}

fn base_ledger(base: &Base) -> Result<InvariantLedger, RecipeError> {
    Ok(match base {
        Base::Elliptic(n) => InvariantLedger::elliptic_surface(*n)?,
        Base::Explicit(b) => {
            InvariantLedger::explicit(&b.name, b.euler, b.signature, b.simply_connected, b.symplectic)?
        }
    })
}

fn apply_step(
    recipe: &Recipe,
    ledger: &InvariantLedger,
    step: &Step,
    citations: &mut Vec<Citation>,
    index: usize,
) -> Result<InvariantLedger, RecipeError> {
    let surgery = |rule: StarSurgeryRule, sc: Option<bool>, citations: &mut Vec<Citation>| {
        citations.push(Citation::new(format!("filling for {}", rule.name), &rule.citation));
        if let Some(sc) = sc {
            citations.push(Citation::new(
                format!("step {index}: simply connected = {sc} after {}", rule.name),
                "asserted via Van Kampen on the complement; not computed",
            ));
        }
        ledger.star_surgery(&rule, sc)
    };
    Ok(match step {
        Step::BlowUp(k) => ledger.blow_up(*k)?,
        Step::FiberSum(k) => {
            let mut next = ledger.clone();
            for _ in 0..*k {
                next = next.fiber_sum_e1()?;
            }
            next
        }
        Step::StarSurgery(s) => surgery(recipe.resolve_rule(&s.rule)?, s.simply_connected, citations),
        Step::RationalBlowdown(b) => {
            surgery(StarSurgeryRule::rational_blowdown(b.p)?, b.simply_connected, citations)
        }
    })
}

fn describe(step: &Step) -> String {
    match step {
        Step::BlowUp(k) => Operation::BlowUp(*k).to_string(),
        Step::FiberSum(1) => Operation::FiberSum.to_string(),
        Step::FiberSum(k) => format!("{} x{k}", Operation::FiberSum),
        Step::StarSurgery(s) => Operation::StarSurgery(s.rule.clone()).to_string(),
        Step::RationalBlowdown(b) => format!("rational blow-down p={}", b.p),
    }
}

fn run_sw(recipe: &Recipe, block: &SwBlock, result: &InvariantLedger) -> Result<(SwReport, Vec<Discrepancy>), RecipeError> {
    let rule = recipe.resolve_rule(&block.rule)?;
    let (mut ambient, start) = match (&block.en, &block.classes) {
        (Some(n), _) => (Ambient::elliptic(), en_basic_classes(*n)?),
        (None, Some(classes)) => {
            let squares = block.squares.clone().unwrap_or_else(|| BTreeMap::from([("f".to_string(), 0)]));
            (Ambient::from_squares(squares), classes.clone())
        }
        (None, None) => return Err(schema("sw block needs `en` or `classes`")),
    };

    let mut discrepancies = Vec::new();
    if let Some(listed) = &block.listed_classes {
        let computed: BTreeSet<&ClassExpr> = start.iter().collect();
        let listed_set: BTreeSet<&ClassExpr> = listed.iter().collect();
        if computed != listed_set {
            let fmt = |s: &BTreeSet<&ClassExpr>| s.iter().map(|c| c.to_string()).collect::<Vec<_>>();
            let only_computed: BTreeSet<&ClassExpr> = computed.difference(&listed_set).copied().collect();
            let only_listed: BTreeSet<&ClassExpr> = listed_set.difference(&computed).copied().collect();
            discrepancies.push(Discrepancy {
                topic: "starting basic classes".into(),
                computed: fmt(&computed),
                listed: fmt(&listed_set),
                note: format!(
                    "computed but not listed: [{}]; listed but not computed: [{}]",
                    fmt(&only_computed).join(", "),
                    fmt(&only_listed).join(", ")
                ),
            });
        }
    }

    let mut classes = start.clone();
    for g in &block.blow_ups {
        let (next_ambient, next) = blowup_basic_classes(&ambient, &classes, g)?;
        ambient = next_ambient;
        classes = next;
    }

    let ctx = SurgeryContext {
        ambient: &ambient,
        result,
        plumbing: &rule.plumbing,
        pairings: &block.pairings,
        filling: &rule.filling,
        canonical: block.canonical.as_ref(),
    };
    let mut verdicts = Vec::with_capacity(classes.len());
    let mut rows = Vec::with_capacity(classes.len());
    for class in &classes {
        let v = extension_verdict(class, &ctx)?;
        rows.push(VerdictRow {
            class: class.clone(),
            class_square: v.class_square,
            pairing_vector: pairing_vector(class, &rule.plumbing, &block.pairings)?,
            restriction_square: Exact(v.restriction_square.clone()),
            d_upper: Exact(v.d_upper.clone()),
            status: v.status,
        });
        verdicts.push(v);
    }
    let minimality = minimality_report(result, &verdicts);

    let mut notes = vec![
        "d_upper = (K^2 - (K|_P)^2 - 2e - 3sigma) / 4 with the filling term bounded by 0".to_string(),
        "the Euler term uses 2e(X)".to_string(),
    ];
    notes.push(match rule.filling.form {
        Some(_) => format!("filling {} negative definite: checked from its intersection form", rule.filling.name),
        None => format!("filling {} negative definite: asserted, form not available", rule.filling.name),
    });

    let report = SwReport {
        rule: rule.name.clone(),
        starting_classes: start,
        blow_ups: block.blow_ups.clone(),
        canonical: block.canonical.clone(),
        verdicts: rows,
        minimality,
        notes,
    };
    Ok((report, discrepancies))
}

fn check(description: String, passed: bool, actual: String) -> ExpectationResult {
    ExpectationResult { description, passed, actual }
}

fn evaluate(
    e: &Expectation,
    ledgers: &[InvariantLedger],
    sw: Option<&SwReport>,
    script: Option<&ScriptOutcome>,
) -> ExpectationResult {
    let last = ledgers.last().expect("base ledger is always present");
    match e {
        Expectation::Ledger(l) => {
            let at = l.after_step.unwrap_or(ledgers.len() - 1);
            let led = &ledgers[at];
            check(
                format!("ledger after step {at} is (e, sigma) = ({}, {})", l.euler, l.signature),
                led.euler == l.euler && led.signature == l.signature,
                format!("({}, {})", led.euler, led.signature),
            )
        }
        Expectation::Geography(g) => {
            let want_pos = g.position.map(|p| format!(", {p}")).unwrap_or_default();
            let desc = format!("geography (chi_h, c1^2) = ({}, {}){want_pos}", g.chi_h, g.c1sq);
            match last.geography() {
                Ok(v) => check(
                    desc,
                    v.chi_h == g.chi_h && v.c1sq == g.c1sq && g.position.is_none_or(|p| p == v.position),
                    format!("({}, {}), {}", v.chi_h, v.c1sq, v.position),
                ),
                Err(err) => check(desc, false, err.to_string()),
            }
        }
        Expectation::B2Plus(b) => check(format!("b2+ = {b}"), last.b2_plus() == *b, last.b2_plus().to_string()),
        Expectation::B2PlusAtLeast(b) => {
            check(format!("b2+ >= {b}"), last.b2_plus() >= *b, last.b2_plus().to_string())
        }
        Expectation::SimplyConnected(s) => check(
            format!("simply connected (asserted) = {s}"),
            last.simply_connected == *s,
            last.simply_connected.to_string(),
        ),
        Expectation::RestrictionSquare(r) => {
            let desc = {
                let mut d = format!("({}|_P)^2", r.class);
                if let Some(x) = &r.exact {
                    d += &format!(" = {}/{}", x.0.numer(), x.0.denom());
                }
                if let Some(p) = &r.printed {
                    d += &format!(" ~ {} (+/- 0.01)", p.text);
                }
                d
            };
            let Some(row) = sw.and_then(|s| s.verdicts.iter().find(|v| v.class == r.class)) else {
                return check(desc, false, "class not in the verdict table".into());
            };
            let value = &row.restriction_square.0;
            let exact_ok = r.exact.as_ref().is_none_or(|x| x.0 == *value);
            let printed_ok = r
                .printed
                .as_ref()
                .is_none_or(|p| (round_decimal(value, 2) - &p.value).abs() <= printed_tolerance());
            check(desc, exact_ok && printed_ok, format!("{} ({})", row.restriction_square, format_decimal(value, 2)))
        }
        Expectation::Verdict(v) => {
            let mut desc = format!("{} is {}", v.class, v.status);
            if let Some(d) = &v.d_upper {
                desc += &format!(" with d_upper = {}/{}", d.0.numer(), d.0.denom());
            }
            let Some(row) = sw.and_then(|s| s.verdicts.iter().find(|r| r.class == v.class)) else {
                return check(desc, false, "class not in the verdict table".into());
            };
            let d_ok = v.d_upper.as_ref().is_none_or(|d| d.0 == row.d_upper.0);
            check(desc, row.status == v.status && d_ok, format!("{}, d_upper = {}", row.status, row.d_upper))
        }
        Expectation::Minimality(m) => {
            let kind = serde_json::to_value(m.outcome).ok().and_then(|v| v.as_str().map(str::to_string));
            let kind = kind.unwrap_or_default();
            let desc = match &m.basic_class {
                Some(k) => format!("minimality: {kind} with basic class ±{k}"),
                None => format!("minimality: {kind}"),
            };
            let Some(report) = sw else {
                return check(desc, false, "no sw analysis".into());
            };
            let actual = &report.minimality;
            let passed = match (m.outcome, actual) {
                (MinimalityKind::Minimal, MinimalityOutcome::Minimal { basic_class }) => {
                    m.basic_class.as_ref().is_none_or(|k| k.sign_normalized() == *basic_class)
                }
                (MinimalityKind::Inconsistent, MinimalityOutcome::Inconsistent)
                | (MinimalityKind::Inconclusive, MinimalityOutcome::Inconclusive { .. })
                | (MinimalityKind::TaubesNotApplicable, MinimalityOutcome::TaubesNotApplicable { .. }) => true,
                _ => false,
            };
            check(desc, passed, actual.to_string())
        }
        Expectation::Fiber(f) => {
            let desc = format!("fiber {} passes = {}", f.name, f.passed);
            match script.and_then(|s| s.fibers.iter().find(|r| r.name == f.name)) {
                Some(r) => check(
                    desc,
                    r.passed == f.passed,
                    if r.passed { "passed".into() } else { r.failures.join("; ") },
                ),
                None => check(desc, false, "no such fiber candidate".into()),
            }
        }
        Expectation::CurveClass(c) => {
            let mut desc = format!("class of {} is {}", c.curve, c.class);
            if let Some(sq) = c.square {
                desc += &format!(" with square {sq}");
            }
            let Some(out) = script else {
                return check(desc, false, "no blow-up script".into());
            };
            let snap = &out.snapshots[c.after_step.unwrap_or(out.snapshots.len() - 1)];
            match snap.class_of(&c.curve) {
                Ok(cls) => {
                    let sq = cls.self_intersection();
                    check(
                        desc,
                        *cls == c.class && c.square.is_none_or(|s| s == sq),
                        format!("{cls} (square {sq})"),
                    )
                }
                Err(err) => check(desc, false, err.to_string()),
            }
        }
        Expectation::Multiplicity(m) => {
            let desc = format!("intersection multiplicity of {} and {} at {} is {}", m.a, m.b, m.point, m.value);
            let Some(out) = script else {
                return check(desc, false, "no blow-up script".into());
            };
            let snap = &out.snapshots[m.after_step.unwrap_or(out.snapshots.len() - 1)];
            match snap.intersection_multiplicity(&m.point, &m.a, &m.b) {
                Some(v) => check(desc, v == m.value, v.to_string()),
                None => check(desc, false, "point or curves not found".into()),
            }
        }
    }
}

/// Runs every step, the basic-class analysis and the blow-up script, and
/// checks the expectations. Step failures carry their 1-based index.
pub fn run(recipe: &Recipe) -> Result<Report, RecipeError> {
    let mut citations = Vec::new();
    let base = base_ledger(&recipe.base)?;
    let mut ledgers = vec![base];
    let mut records = vec![StepRecord::new(0, "base".into(), &ledgers[0])];
    for (i, step) in recipe.steps.iter().enumerate() {
        let index = i + 1;
        let next = apply_step(recipe, &ledgers[i], step, &mut citations, index)
            .map_err(|e| RecipeError::Step { index, source: Box::new(e) })?;
        records.push(StepRecord::new(index, describe(step), &next));
        ledgers.push(next);
    }
    // Without an explicit name, a manifold changed by any step takes the
    // recipe's name.
    let final_name = recipe.manifold.as_ref().or((!recipe.steps.is_empty()).then_some(&recipe.name));
    if let Some(name) = final_name {
        let last = ledgers.pop().expect("nonempty").renamed(name);
        records.last_mut().expect("nonempty").ledger.name = name.clone();
        ledgers.push(last);
    }
    let final_ledger = ledgers.last().expect("nonempty");
    let geography = final_ledger.geography().ok();

    let (sw, mut discrepancies) = match &recipe.sw {
        Some(block) => {
            let (report, d) = run_sw(recipe, block, final_ledger)?;
            if final_ledger.symplectic && final_ledger.b2_plus() > 1 {
                citations.push(Citation::new(
                    format!("{} has at least one pair of basic classes", final_ledger.name),
                    "Taubes, SW invariants of symplectic manifolds (symplectic, b2+ > 1; symplectic structure asserted)",
                ));
            }
            (Some(report), d)
        }
        None => (None, Vec::new()),
    };

    let script = match &recipe.blowup_script {
        Some(s) => Some(s.run().map_err(|(index, source)| RecipeError::Script { index, source })?),
        None => None,
    };
    if let Some(out) = &script {
        for m in &out.mismatches {
            discrepancies.push(Discrepancy {
                topic: format!("pairing of {} and {}", m.a, m.b),
                computed: vec![m.pairing.to_string()],
                listed: vec![m.local_total.to_string()],
                note: "homological pairing differs from the recorded local intersections".into(),
            });
        }
    }

    let expectations = recipe
        .expectations
        .iter()
        .map(|e| evaluate(e, &ledgers, sw.as_ref(), script.as_ref()))
        .collect();

    citations.extend(recipe.citations.iter().cloned());
    citations.sort();
    citations.dedup();

    Ok(Report {
        name: recipe.name.clone(),
        description: recipe.description.clone(),
        steps: records,
        geography,
        sw,
        fibers: script.as_ref().map(|s| s.fibers.clone()).unwrap_or_default(),
        final_curves: script
            .as_ref()
            .map(|s| s.last().curves().iter().map(|c| (c.name.clone(), c.cls.clone())).collect())
            .unwrap_or_default(),
        expectations,
        discrepancies,
        citations,
    })
}

/// Parses and runs in one go.
pub fn run_text(text: &str) -> Result<Report, RecipeError> {
    run(&parse_recipe(text)?)
}
