//! Sphere plumbings, their intersection forms, and the fillings that
//! replace them in star surgery.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratlin::{int, RationalMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlumbingError {
    #[error("plumbing graph has no vertices")]
    Empty,
    #[error("self-loop at vertex `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("duplicate vertex name `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("plumbing graph is not connected")]
    Disconnected,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("invalid filling `{name}`: {reason}")]
    InvalidFilling { name: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub name: String,
    pub weight: i64,
}

/// A connected graph of embedded spheres; vertex weights are self-intersections
/// and each edge is one transverse positive intersection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlumbingGraph {
    vertices: Vec<Vertex>,
    edges: Vec<(usize, usize)>,
    /// Off-diagonal pairings other than 1. Only the I₂ cycle uses this,
    /// where two spheres meet in two points.
    pairing_overrides: BTreeMap<(usize, usize), i64>,
}

impl PlumbingGraph {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<(usize, usize)>) -> Result<Self, PlumbingError> {
        if vertices.is_empty() {
            return Err(PlumbingError::Empty);
        }
        let mut names = BTreeSet::new();
        for v in &vertices {
            if !names.insert(v.name.as_str()) {
                return Err(PlumbingError::DuplicateVertex(v.name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            for &x in &[a, b] {
                if x >= vertices.len() {
                    return Err(PlumbingError::UnknownVertex(format!("#{x}")));
                }
            }
            if a == b {
                return Err(PlumbingError::SelfLoop(vertices[a].name.clone()));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(PlumbingError::DuplicateEdge(vertices[key.0].name.clone(), vertices[key.1].name.clone()));
            }
            normalized.push(key);
        }
        let graph = Self { vertices, edges: normalized, pairing_overrides: BTreeMap::new() };
        if !graph.is_connected() {
            return Err(PlumbingError::Disconnected);
        }
        Ok(graph)
    }

    /// Builds a graph from named vertices and edges given by vertex name.
    pub fn from_named(vertices: Vec<Vertex>, edges: &[(String, String)]) -> Result<Self, PlumbingError> {
        let index: BTreeMap<&str, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
        let lookup = |n: &String| index.get(n.as_str()).copied().ok_or_else(|| PlumbingError::UnknownVertex(n.clone()));
        let edges = edges
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>, PlumbingError>>()?;
        Self::new(vertices, edges)
    }

    /// Star-shaped plumbing. Vertices are numbered `u0` (center) and then
    /// arm by arm, each arm listed from the center outward.
    pub fn star(center: i64, arms: &[Vec<i64>]) -> Result<Self, PlumbingError> {
        let mut vertices = vec![Vertex { name: "u0".into(), weight: center }];
        let mut edges = Vec::new();
        for arm in arms {
            if arm.is_empty() {
                return Err(PlumbingError::BadParameter("star arms must be non-empty".into()));
            }
            let mut prev = 0;
            for &w in arm {
                let idx = vertices.len();
                vertices.push(Vertex { name: format!("u{idx}"), weight: w });
                edges.push((prev, idx));
                prev = idx;
            }
        }
        Self::new(vertices, edges)
    }

    pub fn linear_chain(weights: &[i64]) -> Result<Self, PlumbingError> {
        match weights.split_first() {
            None => Err(PlumbingError::Empty),
            Some((&first, [])) => Self::star(first, &[]),
            Some((&first, rest)) => Self::star(first, &[rest.to_vec()]),
        }
    }

    /// The Kodaira Iₙ fiber: n spheres of square −2 in a cycle.
    pub fn cycle_fiber(n: usize) -> Result<Self, PlumbingError> {
        if n < 2 {
            return Err(PlumbingError::BadParameter(format!("cycle fiber needs n >= 2, got {n}")));
        }
        let vertices = (0..n).map(|i| Vertex { name: format!("c{i}"), weight: -2 }).collect();
        if n == 2 {
            let mut g = Self::new(vertices, vec![(0, 1)])?;
            g.pairing_overrides.insert((0, 1), 2);
            return Ok(g);
        }
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(vertices, edges)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn edge_pairing(&self, key: (usize, usize)) -> i64 {
        self.pairing_overrides.get(&key).copied().unwrap_or(1)
    }

    /// Total number of intersection points between distinct spheres.
    pub fn intersection_count(&self) -> i64 {
        self.edges.iter().map(|&e| self.edge_pairing(e)).sum()
    }

    pub fn is_tree(&self) -> bool {
        self.pairing_overrides.is_empty() && self.edges.len() + 1 == self.vertices.len()
    }

    pub fn intersection_matrix(&self) -> RationalMatrix {
        let n = self.vertices.len();
        let mut pairing = vec![vec![0i64; n]; n];
        for (i, v) in self.vertices.iter().enumerate() {
            pairing[i][i] = v.weight;
        }
        for &(a, b) in &self.edges {
            let p = self.edge_pairing((a, b));
            pairing[a][b] = p;
            pairing[b][a] = p;
        }
        RationalMatrix::from_fn(n, |i, j| int(pairing[i][j]))
    }

    /// Euler characteristic of the plumbed 4-manifold: each disk bundle
    /// contributes 2 and each intersection point removes 1.
    pub fn euler_characteristic(&self) -> i64 {
        2 * self.vertices.len() as i64 - self.intersection_count()
    }

    pub fn signature(&self) -> i64 {
        self.intersection_matrix()
            .signature()
            .expect("plumbing intersection forms are symmetric by construction")
    }

    pub fn is_negative_definite(&self) -> bool {
        self.intersection_matrix()
            .is_negative_definite()
            .expect("plumbing intersection forms are symmetric by construction")
    }

    /// Relabels vertices so that old vertex `perm[i]` becomes vertex `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, PlumbingError> {
        let n = self.vertices.len();
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(PlumbingError::BadParameter("not a permutation of the vertex set".into()));
        }
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let vertices = perm.iter().map(|&old| self.vertices[old].clone()).collect();
        let edges = self.edges.iter().map(|&(a, b)| (inverse[a], inverse[b])).collect();
        let mut g = Self::new(vertices, edges)?;
        for (&(a, b), &p) in &self.pairing_overrides {
            let (x, y) = (inverse[a], inverse[b]);
            g.pairing_overrides.insert((x.min(y), x.max(y)), p);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarSpec {
    pub center: i64,
    pub arms: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpec {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(String, String)>,
}

/// Plumbing description as it appears in recipe files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlumbingSpec {
    Star(StarSpec),
    Explicit(ExplicitSpec),
}

impl PlumbingSpec {
    pub fn build(&self) -> Result<PlumbingGraph, PlumbingError> {
        match self {
            PlumbingSpec::Star(s) => PlumbingGraph::star(s.center, &s.arms),
            PlumbingSpec::Explicit(s) => PlumbingGraph::from_named(s.vertices.clone(), &s.edges),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FundamentalGroup {
    Trivial,
    Cyclic(u32),
    Other(String),
}

impl fmt::Display for FundamentalGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FundamentalGroup::Trivial => write!(f, "1"),
            FundamentalGroup::Cyclic(m) => write!(f, "Z/{m}"),
            FundamentalGroup::Other(label) => write!(f, "{label}"),
        }
    }
}

/// Invariants of a convex symplectic filling. Its existence and boundary
/// compatibility are taken on citation; only the numbers are checked here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FillingProfile {
    pub name: String,
    pub euler: i64,
    pub signature: i64,
    pub pi1: FundamentalGroup,
    pub form: Option<RationalMatrix>,
    pub negative_definite_asserted: bool,
}

impl FillingProfile {
    pub fn new(
        name: impl Into<String>,
        euler: i64,
        signature: i64,
        pi1: FundamentalGroup,
        form: Option<RationalMatrix>,
        negative_definite_asserted: bool,
    ) -> Result<Self, PlumbingError> {
        let name = name.into();
        let invalid = |reason: String| PlumbingError::InvalidFilling { name: name.clone(), reason };
        if euler < 1 {
            return Err(invalid(format!("euler characteristic {euler} < 1")));
        }
        if let Some(form) = &form {
            let sig = form.signature().map_err(|e| invalid(e.to_string()))?;
            if sig != signature {
                return Err(invalid(format!("form has signature {sig} but profile records {signature}")));
            }
        }
        Ok(Self { name, euler, signature, pi1, form, negative_definite_asserted })
    }

    pub fn is_simply_connected(&self) -> bool {
        self.pi1 == FundamentalGroup::Trivial
    }

    /// Whether restriction squares over this filling are known to be ≤ 0:
    /// by computation when the form is present, by assertion otherwise.
    pub fn negative_definite(&self) -> Option<bool> {
        match &self.form {
            Some(form) => Some(form.is_negative_definite().unwrap_or(false)),
            None if self.negative_definite_asserted => Some(true),
            None => None,
        }
    }
}

/// A star-shaped plumbing together with the filling that replaces it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarSurgeryRule {
    pub name: String,
    pub plumbing: PlumbingGraph,
    pub filling: FillingProfile,
    /// Where the filling and its boundary identification come from.
    pub citation: String,
}

const KS: &str = "Karakurt-Starkston, star surgery fillings";

impl StarSurgeryRule {
    pub fn plumbing_q() -> PlumbingGraph {
        PlumbingGraph::star(-5, &[vec![-3], vec![-2], vec![-2, -3], vec![-2, -2]]).expect("valid star")
    }

    pub fn plumbing_k() -> PlumbingGraph {
        PlumbingGraph::star(-6, &[vec![-2], vec![-2], vec![-2], vec![-2]]).expect("valid star")
    }

    pub fn plumbing_s2() -> PlumbingGraph {
        PlumbingGraph::star(-5, &[vec![-2], vec![-2], vec![-2], vec![-2]]).expect("valid star")
    }

    /// Arm weights read off the picture of U: (−2,−2,−3), (−2,−3), (−2,−3), (−3).
    pub fn plumbing_u() -> PlumbingGraph {
        PlumbingGraph::star(-5, &[vec![-2, -2, -3], vec![-2, -3], vec![-2, -3], vec![-3]]).expect("valid star")
    }

    pub fn qr() -> Self {
        let form = RationalMatrix::from_integers(&[[-10, -23], [-23, -79]]).expect("2x2");
        Self {
            name: "(Q,R)".into(),
            plumbing: Self::plumbing_q(),
            filling: FillingProfile::new("R", 3, -2, FundamentalGroup::Trivial, Some(form), true)
                .expect("valid filling"),
            citation: format!("{KS}: R is simply connected with convex boundary contactomorphic to the canonical contact boundary of Q"),
        }
    }

    pub fn kl() -> Self {
        let form = RationalMatrix::from_integers(&[[-4]]).expect("1x1");
        Self {
            name: "(K,L)".into(),
            plumbing: Self::plumbing_k(),
            filling: FillingProfile::new("L", 2, -1, FundamentalGroup::Cyclic(4), Some(form), true)
                .expect("valid filling"),
            citation: format!("{KS}: L has c1 = 0, pi1 = Z/4, H2 = Z with form [-4]"),
        }
    }

    pub fn s2t2() -> Self {
        Self {
            name: "(S2,T2)".into(),
            plumbing: Self::plumbing_s2(),
            filling: FillingProfile::new("T2", 3, -2, FundamentalGroup::Cyclic(2), None, true)
                .expect("valid filling"),
            citation: format!("{KS}: T2 has pi1 = Z/2 and negative definite intersection form"),
        }
    }

    pub fn uv() -> Self {
        Self {
            name: "(U,V)".into(),
            plumbing: Self::plumbing_u(),
            filling: FillingProfile::new("V", 3, -2, FundamentalGroup::Trivial, None, true)
                .expect("valid filling"),
            citation: format!("{KS}: V is simply connected with e = 3, sigma = -2"),
        }
    }

    /// Rational blow-down of the chain (−p−2, −2, …, −2) of length p−1
    /// into the rational ball B_p.
    pub fn rational_blowdown(p: u32) -> Result<Self, PlumbingError> {
        if p < 2 {
            return Err(PlumbingError::BadParameter(format!("rational blow-down needs p >= 2, got {p}")));
        }
        let p_i = i64::from(p);
        let mut weights = vec![-2i64; (p - 1) as usize];
        weights[0] = -p_i - 2;
        Ok(Self {
            name: format!("(C{p},B{p})"),
            plumbing: PlumbingGraph::linear_chain(&weights)?,
            filling: FillingProfile::new(format!("B{p}"), 1, 0, FundamentalGroup::Cyclic(p), None, true)?,
            citation: format!("Fintushel-Stern rational blow-down: B{p} is a rational homology ball with pi1 = Z/{p}"),
        })
    }

    pub fn builtin_names() -> [&'static str; 4] {
        ["(Q,R)", "(K,L)", "(S2,T2)", "(U,V)"]
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "(Q,R)" => Some(Self::qr()),
            "(K,L)" => Some(Self::kl()),
            "(S2,T2)" => Some(Self::s2t2()),
            "(U,V)" => Some(Self::uv()),
            _ => {
                let p = name.strip_prefix("(C")?.split_once(',')?.0.parse().ok()?;
                Self::rational_blowdown(p).ok().filter(|r| r.name == name)
            }
        }
    }

    pub fn euler_drop(&self) -> i64 {
        self.plumbing.euler_characteristic() - self.filling.euler
    }
}
