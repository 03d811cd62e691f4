//! Homology bookkeeping for curve arrangements in the projective plane and
//! its blow-ups.
//!
//! Classes live in H₂(CP² # k(−CP²)) with basis h, e₁, …, e_k and the
//! diagonal pairing h² = 1, eᵢ² = −1. An [`Arrangement`] tracks named curves
//! with their classes, the points they pass through (with local
//! multiplicity), and local intersection multiplicities at those points.
//! Blowing up a point subtracts `m·e_new` from each curve of multiplicity
//! `m` there and lowers each local intersection multiplicity by the product
//! of the two multiplicities. Where the residual intersections land on the
//! new exceptional curve is never guessed; the caller names those points.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::plumbing::PlumbingGraph;
use crate::ratlin::{int, RationalMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlowupError {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("unknown curve `{0}`")]
    UnknownCurve(String),
    #[error("duplicate curve name `{0}`")]
    DuplicateCurve(String),
    #[error("duplicate point name `{0}`")]
    DuplicatePoint(String),
    #[error("curve `{curve}` cannot pass through `{point}`: it did not pass through the blown-up point")]
    NotIncident { curve: String, point: String },
    #[error("at `{point}`: multiplicity {value} for `{a}`·`{b}` is below the product of local multiplicities {min}")]
    MultiplicityTooSmall { point: String, a: String, b: String, value: u32, min: u32 },
    #[error("contact at `{point}` names `{curve}`, which does not pass through it")]
    ContactOffCurve { point: String, curve: String },
    #[error("after blowing up `{point}`: `{a}`·`{b}` needs {expected} on the new exceptional curve but the new points carry {got}")]
    Unbalanced { point: String, a: String, b: String, expected: u32, got: u32 },
    #[error("cannot parse divisor class `{0}`")]
    BadClass(String),
    #[error("local multiplicity must be at least 1 (curve `{curve}` at `{point}`)")]
    ZeroMultiplicity { curve: String, point: String },
}

/// A class `a·h + Σ bᵢ·eᵢ`. Trailing zero coefficients are trimmed so that
/// equality ignores basis length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DivisorClass {
    h: i64,
    e: Vec<i64>,
}

impl DivisorClass {
    pub fn new(h: i64, e: Vec<i64>) -> Self {
        let mut c = Self { h, e };
        c.trim();
        c
    }

    pub fn line() -> Self {
        Self::new(1, vec![])
    }

    /// The exceptional class e_i (1-based).
    pub fn exceptional(i: usize) -> Self {
        assert!(i >= 1, "exceptional classes are numbered from 1");
        let mut e = vec![0; i];
        e[i - 1] = 1;
        Self::new(0, e)
    }

    pub fn h(&self) -> i64 {
        self.h
    }

    /// Coefficient of e_i (1-based); zero beyond the stored length.
    pub fn e(&self, i: usize) -> i64 {
        self.e.get(i.wrapping_sub(1)).copied().unwrap_or(0)
    }

    pub fn scaled(&self, k: i64) -> Self {
        Self::new(self.h * k, self.e.iter().map(|c| c * k).collect())
    }

    pub fn pairing(&self, other: &Self) -> i64 {
        self.h * other.h - self.e.iter().zip(&other.e).map(|(a, b)| a * b).sum::<i64>()
    }

    pub fn self_intersection(&self) -> i64 {
        self.pairing(self)
    }

    pub fn is_zero(&self) -> bool {
        self.h == 0 && self.e.is_empty()
    }

    fn trim(&mut self) {
        while self.e.last() == Some(&0) {
            self.e.pop();
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        let n = self.e.len().max(other.e.len());
        let e = (1..=n).map(|i| f(self.e(i), other.e(i))).collect();
        Self::new(f(self.h, other.h), e)
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: &DivisorClass) -> DivisorClass {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: &DivisorClass) -> DivisorClass {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        self.scaled(-1)
    }
}

impl<'a> std::iter::Sum<&'a DivisorClass> for DivisorClass {
    fn sum<I: Iterator<Item = &'a DivisorClass>>(iter: I) -> Self {
        iter.fold(DivisorClass::default(), |acc, c| &acc + c)
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = std::iter::once((self.h, "h".to_string()))
            .chain(self.e.iter().enumerate().map(|(i, &c)| (c, format!("e{}", i + 1))))
            .filter(|(c, _)| *c != 0);
        let mut first = true;
        for (c, g) in terms {
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}{g}")?;
            } else {
                write!(f, "{sign}{mag}{g}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FromStr for DivisorClass {
    type Err = BlowupError;

    /// Parses sums like `3h-2e1-e2-e4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BlowupError::BadClass(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        if compact == "0" {
            return Ok(Self::default());
        }
        let mut class = Self::default();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (neg, body) = match rest.as_bytes()[0] {
                b'-' => (true, &rest[1..]),
                b'+' => (false, &rest[1..]),
                _ => (false, rest),
            };
            if body.is_empty() {
                return Err(bad());
            }
            let end = body[1..].find(['+', '-']).map_or(body.len(), |i| i + 1);
            let term = &body[..end];
            rest = &body[end..];
            let split = term.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
            let (coef, gen) = term.split_at(split);
            let mut coef: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
            if neg {
                coef = -coef;
            }
            let term_class = if gen == "h" {
                DivisorClass::line()
            } else {
                let idx: usize = gen.strip_prefix('e').ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if idx == 0 {
                    return Err(bad());
                }
                DivisorClass::exceptional(idx)
            };
            class = &class + &term_class.scaled(coef);
        }
        Ok(class)
    }
}

impl Serialize for DivisorClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DivisorClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    pub name: String,
    pub cls: DivisorClass,
    /// Multiplicity of the curve at each point it passes through.
    pub local_multiplicity: BTreeMap<String, u32>,
}

/// A point of the arrangement with the local intersection multiplicities of
/// each pair of curves through it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    pub name: String,
    contacts: BTreeMap<(String, String), u32>,
}

impl Point {
    pub fn contact(&self, a: &str, b: &str) -> Option<u32> {
        self.contacts.get(&ordered(a, b)).copied()
    }

    pub fn contacts(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.contacts.iter().map(|((a, b), &m)| (a.as_str(), b.as_str(), m))
    }
}

/// Point declaration: curves through the point with their local
/// multiplicities, plus any intersection multiplicities that exceed the
/// product of local multiplicities (tangencies).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDecl {
    pub name: String,
    pub curves: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contacts: Vec<(String, String, u32)>,
}

impl PointDecl {
    pub fn new(name: &str, curves: &[(&str, u32)]) -> Self {
        Self {
            name: name.into(),
            curves: curves.iter().map(|&(c, m)| (c.to_string(), m)).collect(),
            contacts: Vec::new(),
        }
    }

    pub fn with_contact(mut self, a: &str, b: &str, m: u32) -> Self {
        self.contacts.push((a.into(), b.into(), m));
        self
    }
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    curves: Vec<Curve>,
    points: Vec<Point>,
    exceptional_count: usize,
}

/// A pair of curves whose total local intersection disagrees with their
/// homological pairing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairingMismatch {
    pub a: String,
    pub b: String,
    pub pairing: i64,
    pub local_total: i64,
}

impl Arrangement {
    /// Builds an arrangement in CP² (no exceptional curves yet).
    pub fn new(curves: Vec<(String, DivisorClass)>, points: &[PointDecl]) -> Result<Self, BlowupError> {
        let mut arr = Self { curves: Vec::new(), points: Vec::new(), exceptional_count: 0 };
        for (name, cls) in curves {
            if arr.curve(&name).is_some() {
                return Err(BlowupError::DuplicateCurve(name));
            }
            arr.curves.push(Curve { name, cls, local_multiplicity: BTreeMap::new() });
        }
        for decl in points {
            arr.add_point(decl, None)?;
        }
        Ok(arr)
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn exceptional_count(&self) -> usize {
        self.exceptional_count
    }

    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }

    pub fn point(&self, name: &str) -> Option<&Point> {
        self.points.iter().find(|p| p.name == name)
    }

    pub fn class_of(&self, name: &str) -> Result<&DivisorClass, BlowupError> {
        self.curve(name).map(|c| &c.cls).ok_or_else(|| BlowupError::UnknownCurve(name.to_string()))
    }

    pub fn intersection_multiplicity(&self, point: &str, a: &str, b: &str) -> Option<u32> {
        self.point(point)?.contact(a, b)
    }

    /// Registers a point. When `allowed` is given, only those curves may pass
    /// through it (points infinitely near a blown-up point).
    fn add_point(&mut self, decl: &PointDecl, allowed: Option<&BTreeSet<String>>) -> Result<(), BlowupError> {
        if self.point(&decl.name).is_some() {
            return Err(BlowupError::DuplicatePoint(decl.name.clone()));
        }
        for (curve, &m) in &decl.curves {
            if self.curve(curve).is_none() {
                return Err(BlowupError::UnknownCurve(curve.clone()));
            }
            if m == 0 {
                return Err(BlowupError::ZeroMultiplicity { curve: curve.clone(), point: decl.name.clone() });
            }
            if let Some(allowed) = allowed {
                if !allowed.contains(curve) {
                    return Err(BlowupError::NotIncident { curve: curve.clone(), point: decl.name.clone() });
                }
            }
        }
        let mut contacts = BTreeMap::new();
        let names: Vec<&String> = decl.curves.keys().collect();
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                contacts.insert(ordered(a, b), decl.curves[*a] * decl.curves[*b]);
            }
        }
        for (a, b, m) in &decl.contacts {
            for c in [a, b] {
                if !decl.curves.contains_key(c) {
                    return Err(BlowupError::ContactOffCurve { point: decl.name.clone(), curve: c.clone() });
                }
            }
            let min = decl.curves[a] * decl.curves[b];
            if *m < min {
                return Err(BlowupError::MultiplicityTooSmall {
                    point: decl.name.clone(),
                    a: a.clone(),
                    b: b.clone(),
                    value: *m,
                    min,
                });
            }
            contacts.insert(ordered(a, b), *m);
        }
        for (curve, &m) in &decl.curves {
            let c = self.curves.iter_mut().find(|c| &c.name == curve).expect("checked above");
            c.local_multiplicity.insert(decl.name.clone(), m);
        }
        self.points.push(Point { name: decl.name.clone(), contacts });
        Ok(())
    }

    /// Blows up `point`, returning the new arrangement.
    ///
    /// The exceptional curve is named `exceptional` (default `e<k>`), and
    /// `new_points` declares where the strict transforms meet it. Every
    /// residual local intersection and every intersection with the new
    /// exceptional curve must be accounted for by those points.
    pub fn blow_up(
        &self,
        point: &str,
        exceptional: Option<&str>,
        new_points: &[PointDecl],
    ) -> Result<Arrangement, BlowupError> {
        let old_point = self.point(point).ok_or_else(|| BlowupError::UnknownPoint(point.to_string()))?.clone();
        let k = self.exceptional_count + 1;
        let e_name = exceptional.map(str::to_string).unwrap_or_else(|| format!("e{k}"));
        if self.curve(&e_name).is_some() {
            return Err(BlowupError::DuplicateCurve(e_name));
        }
        let e_class = DivisorClass::exceptional(k);

        let mut next = self.clone();
        next.exceptional_count = k;
        next.points.retain(|p| p.name != point);
        let mut incident: BTreeMap<String, u32> = BTreeMap::new();
        for curve in &mut next.curves {
            if let Some(m) = curve.local_multiplicity.remove(point) {
                curve.cls = &curve.cls - &e_class.scaled(i64::from(m));
                incident.insert(curve.name.clone(), m);
            }
        }
        next.curves.push(Curve { name: e_name.clone(), cls: e_class, local_multiplicity: BTreeMap::new() });

        let mut allowed: BTreeSet<String> = incident.keys().cloned().collect();
        allowed.insert(e_name.clone());
        for decl in new_points {
            let mut decl = decl.clone();
            decl.curves.entry(e_name.clone()).or_insert(1);
            next.add_point(&decl, Some(&allowed))?;
        }

        // Conservation on the exceptional curve.
        let new_names: BTreeSet<&str> = new_points.iter().map(|p| p.name.as_str()).collect();
        let carried = |a: &str, b: &str| -> u32 {
            next.points
                .iter()
                .filter(|p| new_names.contains(p.name.as_str()))
                .filter_map(|p| p.contact(a, b))
                .sum()
        };
        let unbalanced = |a: &str, b: &str, expected: u32, got: u32| BlowupError::Unbalanced {
            point: point.to_string(),
            a: a.to_string(),
            b: b.to_string(),
            expected,
            got,
        };
        for (a, &ma) in &incident {
            let got = carried(a, &e_name);
            if got != ma {
                return Err(unbalanced(a, &e_name, ma, got));
            }
        }
        let names: Vec<&String> = incident.keys().collect();
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                let before = old_point.contact(a, b).unwrap_or(0);
                let drop = incident[*a] * incident[*b];
                let residual = before.saturating_sub(drop);
                let got = carried(a, b);
                if got != residual {
                    return Err(unbalanced(a, b, residual, got));
                }
            }
        }
        Ok(next)
    }

    /// Pairs of curves whose summed local intersection multiplicities differ
    /// from the pairing of their classes. Empty once the arrangement records
    /// every intersection point.
    pub fn pairing_mismatches(&self) -> Vec<PairingMismatch> {
        let mut out = Vec::new();
        for (i, a) in self.curves.iter().enumerate() {
            for b in &self.curves[i + 1..] {
                let local: i64 = self.points.iter().filter_map(|p| p.contact(&a.name, &b.name)).map(i64::from).sum();
                let pairing = a.cls.pairing(&b.cls);
                if local != pairing {
                    out.push(PairingMismatch { a: a.name.clone(), b: b.name.clone(), pairing, local_total: local });
                }
            }
        }
        out
    }

    pub fn total_class(&self, components: &[String]) -> Result<DivisorClass, BlowupError> {
        let classes = components.iter().map(|c| self.class_of(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(classes.into_iter().sum())
    }

    pub fn fiber_class_equal(&self, first: &[String], second: &[String]) -> Result<bool, BlowupError> {
        Ok(self.total_class(first)? == self.total_class(second)?)
    }

    /// Checks that the candidate components form a Kodaira Iₙ cycle.
    pub fn verify_fiber(&self, candidate: &FiberCandidate) -> Result<FiberReport, BlowupError> {
        let comps = &candidate.components;
        let classes = comps.iter().map(|c| self.class_of(c).cloned()).collect::<Result<Vec<_>, _>>()?;
        let total: DivisorClass = classes.iter().sum();
        let squares: Vec<(String, i64)> =
            comps.iter().zip(&classes).map(|(n, c)| (n.clone(), c.self_intersection())).collect();
        let mut pairings = Vec::new();
        for i in 0..comps.len() {
            for j in i + 1..comps.len() {
                let p = classes[i].pairing(&classes[j]);
                if p != 0 {
                    pairings.push((comps[i].clone(), comps[j].clone(), p));
                }
            }
        }

        let n = candidate.n;
        let mut failures = Vec::new();
        if n < 2 {
            failures.push(format!("I{n} is not a cycle of -2 spheres"));
        }
        if comps.len() != n {
            failures.push(format!("expected {n} components, found {}", comps.len()));
        }
        let distinct: BTreeSet<&String> = comps.iter().collect();
        if distinct.len() != comps.len() {
            failures.push("repeated component".into());
        }
        for (name, sq) in &squares {
            if *sq != -2 {
                failures.push(format!("{name} has self-intersection {sq}, not -2"));
            }
        }
        let mut cycle_order = None;
        if failures.is_empty() {
            match cycle_walk(&classes) {
                Ok(order) => cycle_order = Some(order),
                Err(reason) => failures.push(reason),
            }
        }
        if let Some(order) = &cycle_order {
            let gram = RationalMatrix::from_fn(n, |i, j| int(classes[order[i]].pairing(&classes[order[j]])));
            let reference = PlumbingGraph::cycle_fiber(n).expect("n >= 2 checked");
            if gram != reference.intersection_matrix() {
                failures.push("component form differs from the cycle plumbing".into());
            }
        }
        Ok(FiberReport {
            name: candidate.name.clone(),
            expected_type: format!("I{n}"),
            total_class: total,
            squares,
            pairings,
            cycle_order: cycle_order.map(|o| o.into_iter().map(|i| comps[i].clone()).collect()),
            passed: failures.is_empty(),
            failures,
        })
    }
}

/// Orders the components around the cycle, or explains why they do not form one.
fn cycle_walk(classes: &[DivisorClass]) -> Result<Vec<usize>, String> {
    let n = classes.len();
    if n == 2 {
        let p = classes[0].pairing(&classes[1]);
        return if p == 2 { Ok(vec![0, 1]) } else { Err(format!("I2 components pair to {p}, not 2")) };
    }
    let mut neighbours = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            match classes[i].pairing(&classes[j]) {
                0 => {}
                1 => neighbours[i].push(j),
                p => return Err(format!("components {i} and {j} pair to {p}")),
            }
        }
    }
    if let Some(i) = neighbours.iter().position(|nb| nb.len() != 2) {
        return Err(format!("component {i} meets {} others, not 2", neighbours[i].len()));
    }
    let mut order = vec![0];
    let mut prev = usize::MAX;
    let mut cur = 0;
    loop {
        let next = if neighbours[cur][0] != prev { neighbours[cur][0] } else { neighbours[cur][1] };
        if next == 0 {
            break;
        }
        order.push(next);
        prev = cur;
        cur = next;
    }
    if order.len() != n {
        return Err(format!("components split into several cycles (first has length {})", order.len()));
    }
    Ok(order)
}

/// Reduced fiber candidate; all component coefficients are 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberCandidate {
    pub name: String,
    pub components: Vec<String>,
    /// Expected type Iₙ.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberReport {
    pub name: String,
    pub expected_type: String,
    pub total_class: DivisorClass,
    pub squares: Vec<(String, i64)>,
    pub pairings: Vec<(String, String, i64)>,
    pub cycle_order: Option<Vec<String>>,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDecl {
    pub name: String,
    pub class: DivisorClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupStep {
    pub blow_up: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceptional: Option<String>,
    #[serde(default)]
    pub then: Vec<PointDecl>,
}

/// A scripted sequence of blow-ups with fiber candidates to verify at the end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupScript {
    pub curves: Vec<CurveDecl>,
    pub points: Vec<PointDecl>,
    pub steps: Vec<BlowupStep>,
    #[serde(default)]
    pub fibers: Vec<FiberCandidate>,
    /// When set, every pair of curves must have its pairing accounted for by
    /// recorded points at the end.
    #[serde(default)]
    pub resolved_complete: bool,
}

#[derive(Debug, Clone)]
pub struct ScriptOutcome {
    /// Arrangement before any blow-up, then after each step.
    pub snapshots: Vec<Arrangement>,
    pub fibers: Vec<FiberReport>,
    pub mismatches: Vec<PairingMismatch>,
}

impl ScriptOutcome {
    pub fn last(&self) -> &Arrangement {
        self.snapshots.last().expect("snapshots always holds the initial arrangement")
    }
}

impl BlowupScript {
    pub fn run(&self) -> Result<ScriptOutcome, (usize, BlowupError)> {
        let curves = self.curves.iter().map(|c| (c.name.clone(), c.class.clone())).collect();
        let initial = Arrangement::new(curves, &self.points).map_err(|e| (0, e))?;
        let mut snapshots = vec![initial];
        for (i, step) in self.steps.iter().enumerate() {
            let next = snapshots
                .last()
                .expect("non-empty")
                .blow_up(&step.blow_up, step.exceptional.as_deref(), &step.then)
                .map_err(|e| (i + 1, e))?;
            snapshots.push(next);
        }
        let last = snapshots.last().expect("non-empty");
        let fibers = self
            .fibers
            .iter()
            .map(|f| last.verify_fiber(f))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| (self.steps.len(), e))?;
        let mismatches = if self.resolved_complete { last.pairing_mismatches() } else { Vec::new() };
        Ok(ScriptOutcome { snapshots, fibers, mismatches })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cls(s: &str) -> DivisorClass {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        let c = cls("3h-2e1-e2-e4-e5-e6-e7-e8-e9");
        assert_eq!(c.to_string(), "3h-2e1-e2-e4-e5-e6-e7-e8-e9");
        assert_eq!(c.h(), 3);
        assert_eq!(c.e(1), -2);
        assert_eq!(c.e(3), 0);
        assert_eq!(cls("e1 - e2").to_string(), "e1-e2");
        assert_eq!(cls("0"), DivisorClass::default());
        assert_eq!(DivisorClass::default().to_string(), "0");
        assert_eq!(cls("h+e3-e3"), DivisorClass::line());
        for bad in ["", "3x", "e0", "2h-", "--h"] {
            assert!(bad.parse::<DivisorClass>().is_err(), "{bad}");
        }
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(cls("3h-2e1-e2-e4-e5-e6-e7-e8-e9").self_intersection(), -2);
        assert_eq!(cls("e1").pairing(&cls("e2")), 0);
        assert_eq!(cls("e1-e2").pairing(&cls("e2-e3")), 1);
        assert_eq!(cls("h").pairing(&cls("h-e1")), 1);
    }

    fn pencil_at_q() -> Arrangement {
        Arrangement::new(
            vec![("C1".into(), cls("3h")), ("L".into(), cls("h"))],
            &[PointDecl::new("q", &[("C1", 2), ("L", 1)]).with_contact("C1", "L", 3)],
        )
        .unwrap()
    }

    #[test]
    fn first_blow_up_drops_contact_by_two() {
        let arr = pencil_at_q();
        assert_eq!(arr.intersection_multiplicity("q", "C1", "L"), Some(3));
        let next = arr
            .blow_up(
                "q",
                None,
                &[PointDecl::new("q", &[("C1", 1), ("L", 1)]), PointDecl::new("q2", &[("C1", 1)])],
            )
            .unwrap();
        assert_eq!(next.class_of("C1").unwrap(), &cls("3h-2e1"));
        assert_eq!(next.class_of("L").unwrap(), &cls("h-e1"));
        assert_eq!(next.class_of("e1").unwrap(), &cls("e1"));
        assert_eq!(next.intersection_multiplicity("q", "C1", "L"), Some(1));
        assert_eq!(next.class_of("C1").unwrap().self_intersection(), 9 - 4);

        let second = next
            .blow_up(
                "q",
                None,
                &[
                    PointDecl::new("a", &[("C1", 1)]),
                    PointDecl::new("r", &[("L", 1)]),
                    PointDecl::new("b", &[("e1", 1)]),
                ],
            )
            .unwrap();
        assert_eq!(second.class_of("C1").unwrap(), &cls("3h-2e1-e2"));
        assert_eq!(second.class_of("e1").unwrap(), &cls("e1-e2"));
    }

    #[test]
    fn residual_must_be_placed() {
        let arr = pencil_at_q();
        let err = arr
            .blow_up("q", None, &[PointDecl::new("x", &[("C1", 1)]), PointDecl::new("y", &[("C1", 1), ("L", 1)]).with_contact("C1", "L", 2)])
            .unwrap_err();
        assert!(matches!(err, BlowupError::Unbalanced { expected: 1, got: 2, .. }), "{err:?}");
        let err = arr.blow_up("q", None, &[]).unwrap_err();
        assert!(matches!(err, BlowupError::Unbalanced { .. }));
    }

    #[test]
    fn blow_up_errors() {
        let arr = pencil_at_q();
        assert_eq!(arr.blow_up("nowhere", None, &[]), Err(BlowupError::UnknownPoint("nowhere".into())));
        let with_extra = Arrangement::new(
            vec![("C1".into(), cls("3h")), ("L".into(), cls("h")), ("M".into(), cls("h"))],
            &[PointDecl::new("q", &[("C1", 2), ("L", 1)]).with_contact("C1", "L", 3)],
        )
        .unwrap();
        let err = with_extra
            .blow_up("q", None, &[PointDecl::new("z", &[("M", 1)])])
            .unwrap_err();
        assert!(matches!(err, BlowupError::NotIncident { .. }));
        let tiny = Arrangement::new(
            vec![("A".into(), cls("3h")), ("B".into(), cls("h"))],
            &[PointDecl::new("p", &[("A", 2), ("B", 1)]).with_contact("A", "B", 1)],
        );
        assert!(matches!(tiny, Err(BlowupError::MultiplicityTooSmall { .. })));
    }

    #[test]
    fn blowing_up_an_empty_point() {
        let arr = Arrangement::new(
            vec![("L".into(), cls("h"))],
            &[PointDecl::new("x", &[]), PointDecl::new("y", &[("L", 1)])],
        )
        .unwrap();
        let next = arr.blow_up("x", None, &[]).unwrap();
        assert_eq!(next.class_of("L").unwrap(), &cls("h"));
        assert_eq!(next.class_of("e1").unwrap(), &cls("e1"));
        assert_eq!(next.exceptional_count(), 1);
        assert!(next.point("x").is_none());
    }

    #[test]
    fn fiber_class_equality() {
        let arr = Arrangement::new(
            vec![("C1".into(), cls("3h")), ("L".into(), cls("h")), ("Q".into(), cls("2h"))],
            &[PointDecl::new("q", &[("C1", 2), ("L", 1)]).with_contact("C1", "L", 3)],
        )
        .unwrap();
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert!(arr.fiber_class_equal(&s(&["C1"]), &s(&["L", "Q"])).unwrap());
        assert!(arr.fiber_class_equal(&[], &[]).unwrap());
        let next = arr
            .blow_up("q", None, &[PointDecl::new("q", &[("C1", 1), ("L", 1)]), PointDecl::new("q2", &[("C1", 1)])])
            .unwrap();
        assert!(!next.fiber_class_equal(&s(&["C1"]), &s(&["Q", "L"])).unwrap());
        assert!(next.fiber_class_equal(&s(&["C1", "e1"]), &s(&["Q", "L"])).unwrap());
        assert_eq!(next.fiber_class_equal(&s(&["X"]), &[]), Err(BlowupError::UnknownCurve("X".into())));
    }

    #[test]
    fn single_component_is_not_a_fiber() {
        let arr = Arrangement::new(vec![("A".into(), cls("e1-e2"))], &[]).unwrap();
        let report = arr
            .verify_fiber(&FiberCandidate { name: "bad".into(), components: vec!["A".into()], n: 1 })
            .unwrap();
        assert!(!report.passed);
        assert!(report.cycle_order.is_none());
    }

    #[test]
    fn hand_built_i3() {
        let arr = Arrangement::new(
            vec![
                ("C1".into(), cls("3h-2e1-e2-e4-e5-e6-e7-e8-e9")),
                ("E1".into(), cls("e1-e2")),
                ("E2".into(), cls("e2-e3")),
            ],
            &[],
        )
        .unwrap();
        let fc = FiberCandidate { name: "I3".into(), components: vec!["C1".into(), "E1".into(), "E2".into()], n: 3 };
        let report = arr.verify_fiber(&fc).unwrap();
        assert!(report.passed, "{:?}", report.failures);
        assert_eq!(report.total_class, cls("3h-e1-e2-e3-e4-e5-e6-e7-e8-e9"));
        let wrong_n = FiberCandidate { n: 4, ..fc.clone() };
        assert!(!arr.verify_fiber(&wrong_n).unwrap().passed);
        let missing = FiberCandidate { components: vec!["nope".into()], ..fc };
        assert!(arr.verify_fiber(&missing).is_err());
    }

    #[test]
    fn open_chain_is_not_a_cycle() {
        let names = ["a", "b", "c", "d"];
        let classes = ["e1-e2", "e2-e3", "e3-e4", "e4-e5"];
        let arr = Arrangement::new(names.iter().zip(classes).map(|(n, c)| (n.to_string(), cls(c))).collect(), &[]).unwrap();
        let fc = FiberCandidate { name: "chain".into(), components: names.iter().map(|s| s.to_string()).collect(), n: 4 };
        let report = arr.verify_fiber(&fc).unwrap();
        assert!(!report.passed);
        assert!(report.failures[0].contains("meets 1 others"), "{:?}", report.failures);
    }
}
