//! Port-labeled graphs and the clique-width graph operations.
//!
//! A p-graph is a finite undirected simple graph together with a total map
//! from vertices to positive integer port labels. Ports drive the algebra:
//! [`PGraph::oplus`] is disjoint union, [`PGraph::add_edges`] makes every
//! a-port adjacent to every b-port, and [`PGraph::relabel`] renames a port.
//! Graphs are compared by exact vertex identity, not up to isomorphism.
//!
//! The module also ships builtin graph families used throughout the tests
//! and the CLI, and brute-force oracles that decide set-quantified formulas
//! by enumerating all vertex subsets. The oracles are deliberately
//! independent of the automaton machinery so the two can check each other.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::mso::Formula;

/// Positive port label; labels are 1-based. Terms over labels `1..=k`
/// generate exactly the graphs of clique-width at most `k`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PortLabel(u32);

impl PortLabel {
    /// Panics when `n == 0`.
    pub fn new(n: u32) -> PortLabel {
        assert!(n >= 1, "port labels are 1-based");
        PortLabel(n)
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for PortLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Vertex identifier: a nonempty sequence of integers, ordered
/// lexicographically. Builtin graphs use single-element ids; graphs obtained
/// by evaluating a term use the root-to-leaf child-index path of the leaf
/// that created the vertex, which keeps disjoint union disjoint for free.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(Vec<u32>);

impl VertexId {
    pub fn num(n: u32) -> VertexId {
        VertexId(vec![n])
    }

    pub fn from_parts(parts: Vec<u32>) -> VertexId {
        assert!(!parts.is_empty(), "vertex ids are nonempty");
        VertexId(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for VertexId {
    /// Dotted form, e.g. `7` or `0.1.0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.0 {
            if !first {
                write!(f, ".")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for VertexId {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<VertexId, GraphError> {
        let mut parts = Vec::new();
        for piece in s.split('.') {
            let n: u32 = piece
                .parse()
                .map_err(|_| GraphError::Text(format!("bad vertex id {s:?}")))?;
            parts.push(n);
        }
        if parts.is_empty() {
            return Err(GraphError::Text("empty vertex id".into()));
        }
        Ok(VertexId(parts))
    }
}

/// Unordered vertex pair with the smaller endpoint stored first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge(VertexId, VertexId);

impl Edge {
    /// Orders the endpoints; loops are rejected.
    pub fn new(a: VertexId, b: VertexId) -> Result<Edge, GraphError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Edge(a, b)),
            std::cmp::Ordering::Greater => Ok(Edge(b, a)),
            std::cmp::Ordering::Equal => Err(GraphError::LoopEdge(a)),
        }
    }

    pub fn lo(&self) -> &VertexId {
        &self.0
    }

    pub fn hi(&self) -> &VertexId {
        &self.1
    }

    pub fn touches(&self, v: &VertexId) -> bool {
        &self.0 == v || &self.1 == v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("edge endpoints must differ, got a loop at {0}")]
    LoopEdge(VertexId),
    #[error("vertex {0} occurs on both sides of a disjoint union")]
    SharedVertex(VertexId),
    #[error("edge addition needs two distinct port labels, got {0} twice")]
    EqualAddLabels(PortLabel),
    #[error("edge endpoint {0} is not a vertex of the graph")]
    MissingEndpoint(VertexId),
    #[error("unknown graph family {0:?}")]
    UnknownFamily(String),
    #[error("graph family {family} expects {expect}")]
    BadFamilyParams {
        family: &'static str,
        expect: &'static str,
    },
    #[error("graph text: {0}")]
    Text(String),
}

/// Port-labeled graph. The vertex set is the key set of the port map.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PGraph {
    ports: BTreeMap<VertexId, PortLabel>,
    edges: BTreeSet<Edge>,
}

impl PGraph {
    pub fn empty() -> PGraph {
        PGraph::default()
    }

    /// The one-vertex graph written `a` in terms: a single vertex carrying
    /// port label `a`.
    pub fn single(v: VertexId, port: PortLabel) -> PGraph {
        let mut ports = BTreeMap::new();
        ports.insert(v, port);
        PGraph {
            ports,
            edges: BTreeSet::new(),
        }
    }

    /// Builds a graph from explicit parts, checking that every edge endpoint
    /// is a vertex.
    pub fn from_parts(
        ports: BTreeMap<VertexId, PortLabel>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<PGraph, GraphError> {
        let mut set = BTreeSet::new();
        for e in edges {
            if !ports.contains_key(e.lo()) {
                return Err(GraphError::MissingEndpoint(e.lo().clone()));
            }
            if !ports.contains_key(e.hi()) {
                return Err(GraphError::MissingEndpoint(e.hi().clone()));
            }
            set.insert(e);
        }
        Ok(PGraph { ports, edges: set })
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.ports.keys()
    }

    pub fn num_vertices(&self) -> usize {
        self.ports.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn port(&self, v: &VertexId) -> Option<PortLabel> {
        self.ports.get(v).copied()
    }

    pub fn has_vertex(&self, v: &VertexId) -> bool {
        self.ports.contains_key(v)
    }

    pub fn has_edge(&self, a: &VertexId, b: &VertexId) -> bool {
        match Edge::new(a.clone(), b.clone()) {
            Ok(e) => self.edges.contains(&e),
            Err(_) => false,
        }
    }

    pub fn degree(&self, v: &VertexId) -> usize {
        self.edges.iter().filter(|e| e.touches(v)).count()
    }

    /// Vertices currently carrying port label `a`, in id order.
    pub fn ports_with(&self, a: PortLabel) -> impl Iterator<Item = &VertexId> {
        self.ports
            .iter()
            .filter(move |(_, p)| **p == a)
            .map(|(v, _)| v)
    }

    /// The type of the graph: the set of port labels attained by at least
    /// one vertex.
    pub fn port_type(&self) -> BTreeSet<PortLabel> {
        self.ports.values().copied().collect()
    }

    /// Disjoint union. The vertex sets must already be disjoint; no renaming
    /// is performed.
    pub fn oplus(&self, other: &PGraph) -> Result<PGraph, GraphError> {
        if let Some(v) = self.ports.keys().find(|v| other.ports.contains_key(*v)) {
            return Err(GraphError::SharedVertex(v.clone()));
        }
        let mut ports = self.ports.clone();
        ports.extend(other.ports.iter().map(|(v, p)| (v.clone(), *p)));
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().cloned());
        Ok(PGraph { ports, edges })
    }

    /// Makes every a-port adjacent to every b-port. Labels are unordered:
    /// `add_edges(b, a)` is the same operation. Edges that already exist are
    /// left alone, so the operation is idempotent. `a == b` is rejected.
    pub fn add_edges(&self, a: PortLabel, b: PortLabel) -> Result<PGraph, GraphError> {
        if a == b {
            return Err(GraphError::EqualAddLabels(a));
        }
        let mut edges = self.edges.clone();
        for x in self.ports_with(a) {
            for y in self.ports_with(b) {
                // x and y carry distinct labels, so they are distinct vertices.
                edges.insert(Edge::new(x.clone(), y.clone())?);
            }
        }
        Ok(PGraph {
            ports: self.ports.clone(),
            edges,
        })
    }

    /// Renames every a-port to a b-port. `a == b` is the identity.
    pub fn relabel(&self, a: PortLabel, b: PortLabel) -> PGraph {
        let ports = self
            .ports
            .iter()
            .map(|(v, p)| (v.clone(), if *p == a { b } else { *p }))
            .collect();
        PGraph {
            ports,
            edges: self.edges.clone(),
        }
    }

    pub fn builtin(family: &GraphFamily) -> PGraph {
        family.build()
    }

    /// The same graph with every vertex id replaced through `map`, which
    /// must cover all vertices injectively.
    pub fn rename_vertices(
        &self,
        map: &BTreeMap<VertexId, VertexId>,
    ) -> Result<PGraph, GraphError> {
        let lookup = |v: &VertexId| -> Result<VertexId, GraphError> {
            map.get(v)
                .cloned()
                .ok_or_else(|| GraphError::MissingEndpoint(v.clone()))
        };
        let mut ports = BTreeMap::new();
        for (v, p) in &self.ports {
            if ports.insert(lookup(v)?, *p).is_some() {
                return Err(GraphError::SharedVertex(lookup(v)?));
            }
        }
        let mut edges = BTreeSet::new();
        for e in &self.edges {
            edges.insert(Edge::new(lookup(e.lo())?, lookup(e.hi())?)?);
        }
        Ok(PGraph { ports, edges })
    }

    /// Plain text form: a `n m` header, then one `id port` line per vertex
    /// in id order, then one `lo hi` line per edge in edge order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.num_vertices(), self.num_edges());
        for (v, p) in &self.ports {
            out.push_str(&format!("{v} {p}\n"));
        }
        for e in &self.edges {
            out.push_str(&format!("{} {}\n", e.lo(), e.hi()));
        }
        out
    }

    /// Parses the [`PGraph::to_text`] format. Blank lines and lines starting
    /// with `#` are ignored; edge endpoints may come in either order.
    pub fn from_text(text: &str) -> Result<PGraph, GraphError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Text("missing `n m` header".into()))?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GraphError::Text(format!("bad header {header:?}")))?;
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GraphError::Text(format!("bad header {header:?}")))?;
        if it.next().is_some() {
            return Err(GraphError::Text(format!("bad header {header:?}")));
        }

        let mut ports = BTreeMap::new();
        for _ in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| GraphError::Text("missing vertex line".into()))?;
            let mut it = line.split_whitespace();
            let (Some(id), Some(port), None) = (it.next(), it.next(), it.next()) else {
                return Err(GraphError::Text(format!("bad vertex line {line:?}")));
            };
            let id: VertexId = id.parse()?;
            let port: u32 = port
                .parse()
                .map_err(|_| GraphError::Text(format!("bad port in {line:?}")))?;
            if port == 0 {
                return Err(GraphError::Text(format!("port labels are 1-based: {line:?}")));
            }
            if ports.insert(id.clone(), PortLabel::new(port)).is_some() {
                return Err(GraphError::Text(format!("duplicate vertex {id}")));
            }
        }

        let mut edges = BTreeSet::new();
        for _ in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| GraphError::Text("missing edge line".into()))?;
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(GraphError::Text(format!("bad edge line {line:?}")));
            };
            let a: VertexId = a.parse()?;
            let b: VertexId = b.parse()?;
            for v in [&a, &b] {
                if !ports.contains_key(v) {
                    return Err(GraphError::MissingEndpoint(v.clone()));
                }
            }
            edges.insert(Edge::new(a, b)?);
        }
        if let Some(extra) = lines.next() {
            return Err(GraphError::Text(format!("trailing content {extra:?}")));
        }
        Ok(PGraph { ports, edges })
    }

    /// Undirected DOT form; vertex labels show `id:port`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph {\n");
        for (v, p) in &self.ports {
            out.push_str(&format!("  \"{v}\" [label=\"{v}:{p}\"];\n"));
        }
        for e in &self.edges {
            out.push_str(&format!("  \"{}\" -- \"{}\";\n", e.lo(), e.hi()));
        }
        out.push_str("}\n");
        out
    }
}

// ============================================================================
// Builtin graph families
// ============================================================================

/// Graph families available to `pg_builtin`-style construction and to the
/// term generators. All builtin graphs carry the default port label 1 and
/// use vertex ids `1..=n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum GraphFamily {
    Path(u32),
    Cycle(u32),
    Clique(u32),
    /// `Grid(r, c)`: r rows by c columns, vertex `(i, j)` has id
    /// `(i-1)*c + j`.
    Grid(u32, u32),
    /// `Star(n)`: one center (id 1) plus `n` leaves.
    Star(u32),
    Petersen,
}

impl GraphFamily {
    /// Parses a family name plus size parameters, validating sizes
    /// (`path n>=1`, `cycle n>=3`, `clique n>=1`, `grid r,c>=1`,
    /// `star n>=1`, `petersen` takes none).
    pub fn parse(name: &str, params: &[u32]) -> Result<GraphFamily, GraphError> {
        match (name, params) {
            ("path", [n]) if *n >= 1 => Ok(GraphFamily::Path(*n)),
            ("path", _) => Err(GraphError::BadFamilyParams {
                family: "path",
                expect: "one size n >= 1",
            }),
            ("cycle", [n]) if *n >= 3 => Ok(GraphFamily::Cycle(*n)),
            ("cycle", _) => Err(GraphError::BadFamilyParams {
                family: "cycle",
                expect: "one size n >= 3",
            }),
            ("clique", [n]) if *n >= 1 => Ok(GraphFamily::Clique(*n)),
            ("clique", _) => Err(GraphError::BadFamilyParams {
                family: "clique",
                expect: "one size n >= 1",
            }),
            ("grid", [r, c]) if *r >= 1 && *c >= 1 => Ok(GraphFamily::Grid(*r, *c)),
            ("grid", _) => Err(GraphError::BadFamilyParams {
                family: "grid",
                expect: "two sizes r, c >= 1",
            }),
            ("star", [n]) if *n >= 1 => Ok(GraphFamily::Star(*n)),
            ("star", _) => Err(GraphError::BadFamilyParams {
                family: "star",
                expect: "one leaf count n >= 1",
            }),
            ("petersen", []) => Ok(GraphFamily::Petersen),
            ("petersen", _) => Err(GraphError::BadFamilyParams {
                family: "petersen",
                expect: "no parameters",
            }),
            _ => Err(GraphError::UnknownFamily(name.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphFamily::Path(_) => "path",
            GraphFamily::Cycle(_) => "cycle",
            GraphFamily::Clique(_) => "clique",
            GraphFamily::Grid(_, _) => "grid",
            GraphFamily::Star(_) => "star",
            GraphFamily::Petersen => "petersen",
        }
    }

    fn build(&self) -> PGraph {
        let one = PortLabel::new(1);
        let mut ports = BTreeMap::new();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let n_vertices;
        match *self {
            GraphFamily::Path(n) => {
                n_vertices = n;
                pairs.extend((1..n).map(|i| (i, i + 1)));
            }
            GraphFamily::Cycle(n) => {
                n_vertices = n;
                pairs.extend((1..n).map(|i| (i, i + 1)));
                pairs.push((1, n));
            }
            GraphFamily::Clique(n) => {
                n_vertices = n;
                for i in 1..=n {
                    for j in (i + 1)..=n {
                        pairs.push((i, j));
                    }
                }
            }
            GraphFamily::Grid(r, c) => {
                n_vertices = r * c;
                let id = |i: u32, j: u32| (i - 1) * c + j;
                for i in 1..=r {
                    for j in 1..=c {
                        if j < c {
                            pairs.push((id(i, j), id(i, j + 1)));
                        }
                        if i < r {
                            pairs.push((id(i, j), id(i + 1, j)));
                        }
                    }
                }
            }
            GraphFamily::Star(n) => {
                n_vertices = n + 1;
                pairs.extend((2..=n + 1).map(|leaf| (1, leaf)));
            }
            GraphFamily::Petersen => {
                n_vertices = 10;
                // Outer 5-cycle 1..5, spokes to 6..10, inner 5-cycle with
                // stride 2.
                pairs.extend([(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)]);
                pairs.extend((1..=5).map(|i| (i, i + 5)));
                pairs.extend([(6, 8), (7, 9), (8, 10), (6, 9), (7, 10)]);
            }
        }
        for v in 1..=n_vertices {
            ports.insert(VertexId::num(v), one);
        }
        let edges = pairs
            .into_iter()
            .map(|(a, b)| Edge::new(VertexId::num(a), VertexId::num(b)).expect("family edges are loop-free"))
            .collect();
        PGraph { ports, edges }
    }
}

// ============================================================================
// Brute-force oracles
// ============================================================================

/// Default cap on the number of assignments an oracle may enumerate.
pub const DEFAULT_ORACLE_GUARD: u64 = 1 << 24;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("unbound set variable {0:?}")]
    UnboundVariable(String),
    #[error("assignment mentions {0}, which is not a vertex of the graph")]
    ForeignVertex(VertexId),
    #[error("assignment supplies {got} sets but the context has {want} variables")]
    WrongArity { want: usize, got: usize },
    #[error("enumeration needs {needed} assignments, above the guard {guard}")]
    GuardExceeded { needed: u128, guard: u64 },
    #[error("brute-force enumeration is limited to {max} vertices, got {got}")]
    TooManyVertices { max: u32, got: usize },
}

/// Values for the free set variables of a formula, in context order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment(pub Vec<BTreeSet<VertexId>>);

/// Graph data in subset-bitmask form, shared by the oracles.
struct MaskGraph {
    n: usize,
    /// adj[i] has bit j set when vertex i and vertex j are adjacent.
    adj: Vec<u64>,
}

impl MaskGraph {
    fn build(g: &PGraph) -> Result<(MaskGraph, BTreeMap<&VertexId, usize>), OracleError> {
        let n = g.num_vertices();
        if n > 32 {
            return Err(OracleError::TooManyVertices { max: 32, got: n });
        }
        let index: BTreeMap<&VertexId, usize> =
            g.vertices().enumerate().map(|(i, v)| (v, i)).collect();
        let mut adj = vec![0u64; n];
        for e in g.edges() {
            let i = index[e.lo()];
            let j = index[e.hi()];
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        Ok((MaskGraph { n, adj }, index))
    }

    fn full(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }
}

fn eval_masks(g: &MaskGraph, phi: &Formula, env: &mut Vec<(String, u64)>) -> Result<bool, OracleError> {
    // Variable lookup resolves to the innermost binding.
    fn lookup(env: &[(String, u64)], name: &str) -> Result<u64, OracleError> {
        env.iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, m)| *m)
            .ok_or_else(|| OracleError::UnboundVariable(name.to_string()))
    }

    Ok(match phi {
        Formula::Sub(x, y) => lookup(env, x)? & !lookup(env, y)? == 0,
        Formula::Sgl(x) => lookup(env, x)?.count_ones() == 1,
        Formula::Edg(x, y) => {
            let mx = lookup(env, x)?;
            let my = lookup(env, y)?;
            mx.count_ones() == 1
                && my.count_ones() == 1
                && g.adj[mx.trailing_zeros() as usize] & my != 0
        }
        Formula::CardP(p, x) => u64::from(lookup(env, x)?.count_ones()) == *p,
        Formula::CardMod(p, q, x) => u64::from(lookup(env, x)?.count_ones()) % *q == *p,
        Formula::Partition(xs) => {
            let masks = xs
                .iter()
                .map(|x| lookup(env, x))
                .collect::<Result<Vec<_>, _>>()?;
            let mut seen = 0u64;
            let mut disjoint = true;
            for m in &masks {
                disjoint &= seen & m == 0;
                seen |= m;
            }
            disjoint && seen == g.full()
        }
        Formula::Not(f) => !eval_masks(g, f, env)?,
        Formula::And(f, h) => eval_masks(g, f, env)? && eval_masks(g, h, env)?,
        Formula::Or(f, h) => eval_masks(g, f, env)? || eval_masks(g, h, env)?,
        Formula::Implies(f, h) => !eval_masks(g, f, env)? || eval_masks(g, h, env)?,
        Formula::Exists(x, f) => {
            let mut found = false;
            for m in 0..=g.full() {
                env.push((x.clone(), m));
                found = eval_masks(g, f, env)?;
                env.pop();
                if found {
                    break;
                }
                if m == g.full() {
                    break;
                }
            }
            found
        }
        Formula::Forall(x, f) => {
            let mut holds = true;
            for m in 0..=g.full() {
                env.push((x.clone(), m));
                holds = eval_masks(g, f, env)?;
                env.pop();
                if !holds {
                    break;
                }
                if m == g.full() {
                    break;
                }
            }
            holds
        }
    })
}

/// Decides `phi` on `g` by direct enumeration: each set quantifier tries all
/// `2^|V|` vertex subsets. `ctx` fixes the order of the free variables and
/// `asg` supplies their values. Exponential; a reference implementation.
pub fn oracle_mso_eval(
    g: &PGraph,
    phi: &Formula,
    ctx: &[String],
    asg: &Assignment,
) -> Result<bool, OracleError> {
    if asg.0.len() != ctx.len() {
        return Err(OracleError::WrongArity {
            want: ctx.len(),
            got: asg.0.len(),
        });
    }
    let (mg, index) = MaskGraph::build(g)?;
    let mut env = Vec::with_capacity(ctx.len());
    for (name, set) in ctx.iter().zip(&asg.0) {
        let mut mask = 0u64;
        for v in set {
            let i = index
                .get(v)
                .ok_or_else(|| OracleError::ForeignVertex(v.clone()))?;
            mask |= 1 << i;
        }
        env.push((name.clone(), mask));
    }
    eval_masks(&mg, phi, &mut env)
}

/// For every assignment of the context variables satisfying `phi`, records
/// the tuple of set cardinalities; the result maps each tuple to the number
/// of satisfying assignments attaining it. Refuses to enumerate more than
/// `guard` assignments.
pub fn oracle_multispectrum(
    g: &PGraph,
    phi: &Formula,
    ctx: &[String],
    guard: u64,
) -> Result<BTreeMap<Vec<u64>, BigUint>, OracleError> {
    let s = ctx.len();
    let (mg, _) = MaskGraph::build(g)?;
    let per_var = 1u128 << mg.n;
    let needed = per_var
        .checked_pow(s as u32)
        .ok_or(OracleError::GuardExceeded {
            needed: u128::MAX,
            guard,
        })?;
    if needed > u128::from(guard) {
        return Err(OracleError::GuardExceeded { needed, guard });
    }

    let mut out: BTreeMap<Vec<u64>, BigUint> = BTreeMap::new();
    let mut masks = vec![0u64; s];
    loop {
        let mut env: Vec<(String, u64)> = ctx
            .iter()
            .zip(&masks)
            .map(|(n, m)| (n.clone(), *m))
            .collect();
        if eval_masks(&mg, phi, &mut env)? {
            let tuple: Vec<u64> = masks.iter().map(|m| u64::from(m.count_ones())).collect();
            *out.entry(tuple).or_insert_with(BigUint::zero) += 1u32;
        }
        // Odometer over s masks, each ranging over all subsets.
        let mut i = 0;
        loop {
            if i == s {
                return Ok(out);
            }
            if masks[i] == mg.full() {
                masks[i] = 0;
                i += 1;
            } else {
                masks[i] += 1;
                break;
            }
        }
    }
}

/// Number of satisfying assignments; a view of [`oracle_multispectrum`].
pub fn oracle_count(
    g: &PGraph,
    phi: &Formula,
    ctx: &[String],
    guard: u64,
) -> Result<BigUint, OracleError> {
    Ok(oracle_multispectrum(g, phi, ctx, guard)?
        .values()
        .sum())
}

/// Satisfiable cardinality tuples; a view of [`oracle_multispectrum`].
pub fn oracle_spectrum(
    g: &PGraph,
    phi: &Formula,
    ctx: &[String],
    guard: u64,
) -> Result<BTreeSet<Vec<u64>>, OracleError> {
    Ok(oracle_multispectrum(g, phi, ctx, guard)?
        .into_keys()
        .collect())
}

/// Counts proper k-colorings of `g` by trying all `k^|V|` color maps.
pub fn oracle_count_colorings(g: &PGraph, k: u32, guard: u64) -> Result<BigUint, OracleError> {
    let n = g.num_vertices();
    let needed = (u128::from(k))
        .checked_pow(n as u32)
        .ok_or(OracleError::GuardExceeded {
            needed: u128::MAX,
            guard,
        })?;
    if needed > u128::from(guard) {
        return Err(OracleError::GuardExceeded { needed, guard });
    }
    if k == 0 {
        return Ok(if n == 0 { BigUint::from(1u32) } else { BigUint::zero() });
    }

    let index: BTreeMap<&VertexId, usize> = g.vertices().enumerate().map(|(i, v)| (v, i)).collect();
    let edge_pairs: Vec<(usize, usize)> = g
        .edges()
        .map(|e| (index[e.lo()], index[e.hi()]))
        .collect();

    let mut count = BigUint::zero();
    let mut colors = vec![0u32; n];
    loop {
        if edge_pairs.iter().all(|(i, j)| colors[*i] != colors[*j]) {
            count += 1u32;
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(count);
            }
            if colors[i] == k - 1 {
                colors[i] = 0;
                i += 1;
            } else {
                colors[i] += 1;
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pl(n: u32) -> PortLabel {
        PortLabel::new(n)
    }

    fn vid(n: u32) -> VertexId {
        VertexId::num(n)
    }

    /// Two vertices labeled a and b, no edges.
    fn two(a: u32, b: u32) -> PGraph {
        PGraph::single(vid(1), pl(a))
            .oplus(&PGraph::single(vid(2), pl(b)))
            .unwrap()
    }

    #[test]
    fn single_vertex_graph() {
        let g = PGraph::single(vid(7), pl(2));
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(g.num_edges(), 0);
        assert_eq!(g.port(&vid(7)), Some(pl(2)));
        assert_eq!(g.port_type(), BTreeSet::from([pl(2)]));
    }

    #[test]
    fn oplus_rejects_shared_vertices() {
        let g = PGraph::single(vid(1), pl(1));
        let h = PGraph::single(vid(1), pl(2));
        match g.oplus(&h) {
            Err(GraphError::SharedVertex(v)) => assert_eq!(v, vid(1)),
            other => panic!("expected SharedVertex, got {other:?}"),
        }
    }

    #[test]
    fn oplus_unions_everything() {
        let g = two(1, 2).add_edges(pl(1), pl(2)).unwrap();
        let h = PGraph::single(vid(3), pl(3));
        let u = g.oplus(&h).unwrap();
        assert_eq!(u.num_vertices(), 3);
        assert_eq!(u.num_edges(), 1);
        assert_eq!(u.port_type(), BTreeSet::from([pl(1), pl(2), pl(3)]));
    }

    #[test]
    fn add_edges_is_complete_bipartite_between_port_classes() {
        // Two 1-ports and two 2-ports: expect all four cross edges.
        let mut ports = BTreeMap::new();
        ports.insert(vid(1), pl(1));
        ports.insert(vid(2), pl(1));
        ports.insert(vid(3), pl(2));
        ports.insert(vid(4), pl(2));
        let g = PGraph::from_parts(ports, []).unwrap();
        let h = g.add_edges(pl(1), pl(2)).unwrap();
        assert_eq!(h.num_edges(), 4);
        for x in [1, 2] {
            for y in [3, 4] {
                assert!(h.has_edge(&vid(x), &vid(y)));
            }
        }
    }

    #[test]
    fn add_edges_is_idempotent_and_unordered() {
        let g = two(1, 2);
        let once = g.add_edges(pl(1), pl(2)).unwrap();
        let twice = once.add_edges(pl(1), pl(2)).unwrap();
        assert_eq!(once, twice);
        let flipped = g.add_edges(pl(2), pl(1)).unwrap();
        assert_eq!(once, flipped);
    }

    #[test]
    fn add_edges_rejects_equal_labels() {
        let g = two(1, 1);
        assert!(matches!(
            g.add_edges(pl(1), pl(1)),
            Err(GraphError::EqualAddLabels(_))
        ));
    }

    #[test]
    fn add_edges_with_missing_class_is_identity() {
        let g = two(1, 2);
        let h = g.add_edges(pl(1), pl(9)).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn relabel_moves_the_whole_class() {
        let g = two(1, 1).relabel(pl(1), pl(3));
        assert_eq!(g.port(&vid(1)), Some(pl(3)));
        assert_eq!(g.port(&vid(2)), Some(pl(3)));
        assert_eq!(g.port_type(), BTreeSet::from([pl(3)]));
    }

    #[test]
    fn relabel_same_label_is_identity() {
        let g = two(1, 2);
        assert_eq!(g, g.relabel(pl(2), pl(2)));
    }

    #[test]
    fn relabel_composition_collapses() {
        // relabel a->b then b->c sends both a and b to c, in either
        // factoring.
        let g = two(1, 2);
        let lhs = g.relabel(pl(1), pl(2)).relabel(pl(2), pl(3));
        let rhs = g.relabel(pl(1), pl(3)).relabel(pl(2), pl(3));
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.port_type(), BTreeSet::from([pl(3)]));
    }

    #[test]
    fn port_type_tracks_operations() {
        let g = two(1, 2);
        assert_eq!(g.port_type(), BTreeSet::from([pl(1), pl(2)]));
        let h = g.add_edges(pl(1), pl(2)).unwrap();
        assert_eq!(h.port_type(), g.port_type());
        let r = h.relabel(pl(2), pl(1));
        assert_eq!(r.port_type(), BTreeSet::from([pl(1)]));
    }

    #[test]
    fn edge_orders_endpoints_and_rejects_loops() {
        let e = Edge::new(vid(5), vid(2)).unwrap();
        assert_eq!(e.lo(), &vid(2));
        assert_eq!(e.hi(), &vid(5));
        assert!(matches!(
            Edge::new(vid(3), vid(3)),
            Err(GraphError::LoopEdge(_))
        ));
    }

    #[test]
    fn vertex_id_ordering_is_lexicographic() {
        let a = VertexId::from_parts(vec![0, 1]);
        let b = VertexId::from_parts(vec![0, 1, 0]);
        let c = VertexId::from_parts(vec![1]);
        assert!(a < b && b < c);
        assert_eq!(b.to_string(), "0.1.0");
        assert_eq!("0.1.0".parse::<VertexId>().unwrap(), b);
    }

    #[test]
    fn builtin_family_shapes() {
        let path = PGraph::builtin(&GraphFamily::Path(4));
        assert_eq!((path.num_vertices(), path.num_edges()), (4, 3));

        let cycle = PGraph::builtin(&GraphFamily::Cycle(5));
        assert_eq!((cycle.num_vertices(), cycle.num_edges()), (5, 5));
        assert!(cycle.vertices().all(|v| cycle.degree(v) == 2));

        let clique = PGraph::builtin(&GraphFamily::Clique(4));
        assert_eq!((clique.num_vertices(), clique.num_edges()), (4, 6));

        let grid = PGraph::builtin(&GraphFamily::Grid(2, 3));
        assert_eq!((grid.num_vertices(), grid.num_edges()), (6, 7));

        let star = PGraph::builtin(&GraphFamily::Star(5));
        assert_eq!((star.num_vertices(), star.num_edges()), (6, 5));
        assert_eq!(star.degree(&vid(1)), 5);

        let petersen = PGraph::builtin(&GraphFamily::Petersen);
        assert_eq!((petersen.num_vertices(), petersen.num_edges()), (10, 15));
        assert!(petersen.vertices().all(|v| petersen.degree(v) == 3));
    }

    #[test]
    fn family_parse_validates_sizes() {
        assert!(GraphFamily::parse("cycle", &[2]).is_err());
        assert!(GraphFamily::parse("path", &[0]).is_err());
        assert!(GraphFamily::parse("grid", &[3]).is_err());
        assert!(GraphFamily::parse("petersen", &[1]).is_err());
        assert!(GraphFamily::parse("moebius", &[5]).is_err());
        assert_eq!(
            GraphFamily::parse("grid", &[2, 3]).unwrap(),
            GraphFamily::Grid(2, 3)
        );
    }

    #[test]
    fn text_round_trip() {
        let g = PGraph::builtin(&GraphFamily::Grid(2, 2)).relabel(pl(1), pl(2));
        let back = PGraph::from_text(&g.to_text()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn text_parses_comments_and_any_edge_order() {
        let g = PGraph::from_text("# a triangle\n3 3\n1 1\n2 1\n3 2\n\n2 1\n3 2\n1 3\n").unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.port(&vid(3)), Some(pl(2)));
    }

    #[test]
    fn text_rejects_malformed_input() {
        assert!(PGraph::from_text("").is_err());
        assert!(PGraph::from_text("1 0\n1 1\nextra").is_err());
        assert!(PGraph::from_text("2 1\n1 1\n2 1\n1 1").is_err()); // loop edge
        assert!(PGraph::from_text("1 1\n1 1\n1 2").is_err()); // endpoint missing
        assert!(PGraph::from_text("1 0\n1 0\n").is_err()); // zero port
    }

    #[test]
    fn dot_output_lists_vertices_and_edges() {
        let dot = two(1, 2).add_edges(pl(1), pl(2)).unwrap().to_dot();
        assert!(dot.starts_with("graph {"));
        assert!(dot.contains("\"1\" [label=\"1:1\"];"));
        assert!(dot.contains("\"1\" -- \"2\";"));
    }

    // ------------------------------------------------------------------
    // Oracle tests. Coloring counts here are the frozen reference values
    // the automaton pipeline must reproduce.
    // ------------------------------------------------------------------

    #[test]
    fn coloring_counts_on_small_families() {
        let cases: [(GraphFamily, u32, u64); 6] = [
            (GraphFamily::Clique(3), 3, 6),
            (GraphFamily::Cycle(5), 3, 30),
            (GraphFamily::Path(4), 3, 24),
            (GraphFamily::Grid(2, 3), 3, 54),
            (GraphFamily::Petersen, 3, 120),
            (GraphFamily::Clique(4), 3, 0),
        ];
        for (family, k, want) in cases {
            let g = PGraph::builtin(&family);
            let got = oracle_count_colorings(&g, k, DEFAULT_ORACLE_GUARD).unwrap();
            assert_eq!(got, BigUint::from(want), "family {family:?}");
        }
    }

    #[test]
    fn coloring_oracle_respects_guard() {
        let g = PGraph::builtin(&GraphFamily::Clique(10));
        assert!(matches!(
            oracle_count_colorings(&g, 3, 100),
            Err(OracleError::GuardExceeded { .. })
        ));
    }

    #[test]
    fn mso_oracle_atomic_semantics() {
        let g = PGraph::builtin(&GraphFamily::Path(3));
        let ctx = vec!["X".to_string(), "Y".to_string()];
        let asg = Assignment(vec![
            BTreeSet::from([vid(1)]),
            BTreeSet::from([vid(1), vid(2)]),
        ]);
        let check = |phi: &Formula, want: bool| {
            assert_eq!(oracle_mso_eval(&g, phi, &ctx, &asg).unwrap(), want, "{phi:?}");
        };
        check(&Formula::Sub("X".into(), "Y".into()), true);
        check(&Formula::Sub("Y".into(), "X".into()), false);
        check(&Formula::Sgl("X".into()), true);
        check(&Formula::Sgl("Y".into()), false);
        check(&Formula::CardP(2, "Y".into()), true);
        check(&Formula::CardMod(0, 2, "Y".into()), true);
        check(&Formula::CardMod(1, 2, "Y".into()), false);
    }

    #[test]
    fn mso_oracle_edg_needs_adjacent_singletons() {
        let g = PGraph::builtin(&GraphFamily::Path(3));
        let ctx = vec!["X".to_string(), "Y".to_string()];
        let edg = Formula::Edg("X".into(), "Y".into());
        let eval = |a: BTreeSet<VertexId>, b: BTreeSet<VertexId>| {
            oracle_mso_eval(&g, &edg, &ctx, &Assignment(vec![a, b])).unwrap()
        };
        assert!(eval(BTreeSet::from([vid(1)]), BTreeSet::from([vid(2)])));
        assert!(!eval(BTreeSet::from([vid(1)]), BTreeSet::from([vid(3)])));
        assert!(!eval(BTreeSet::from([vid(1), vid(2)]), BTreeSet::from([vid(2)])));
        assert!(!eval(BTreeSet::from([vid(1)]), BTreeSet::from([vid(1)])));
    }

    #[test]
    fn mso_oracle_quantifiers_and_partition() {
        let g = PGraph::builtin(&GraphFamily::Cycle(4));
        // Some singleton exists.
        let some_sgl = Formula::Exists("Z".into(), Box::new(Formula::Sgl("Z".into())));
        assert!(oracle_mso_eval(&g, &some_sgl, &[], &Assignment::default()).unwrap());
        // Every set is a subset of itself.
        let all_sub = Formula::Forall(
            "Z".into(),
            Box::new(Formula::Sub("Z".into(), "Z".into())),
        );
        assert!(oracle_mso_eval(&g, &all_sub, &[], &Assignment::default()).unwrap());
        // X, complement(X) partition V for any X; X, X does not unless empty.
        let ctx = vec!["X".to_string(), "Y".to_string()];
        let part = Formula::Partition(vec!["X".into(), "Y".into()]);
        let xs = BTreeSet::from([vid(1), vid(3)]);
        let ys = BTreeSet::from([vid(2), vid(4)]);
        assert!(oracle_mso_eval(&g, &part, &ctx, &Assignment(vec![xs.clone(), ys])).unwrap());
        assert!(!oracle_mso_eval(&g, &part, &ctx, &Assignment(vec![xs.clone(), xs])).unwrap());
    }

    #[test]
    fn mso_oracle_rejects_bad_inputs() {
        let g = PGraph::builtin(&GraphFamily::Path(2));
        let phi = Formula::Sgl("X".into());
        assert!(matches!(
            oracle_mso_eval(&g, &phi, &[], &Assignment::default()),
            Err(OracleError::UnboundVariable(_))
        ));
        let asg = Assignment(vec![BTreeSet::from([vid(9)])]);
        assert!(matches!(
            oracle_mso_eval(&g, &phi, &["X".to_string()], &asg),
            Err(OracleError::ForeignVertex(_))
        ));
    }

    #[test]
    fn multispectrum_oracle_on_a_triangle() {
        // Proper 3-colorings of K3 split it into three singletons: the only
        // satisfiable (|X|, |Y|) tuple is (1, 1), attained six times.
        let g = PGraph::builtin(&GraphFamily::Clique(3));
        let ctx = vec!["X".to_string(), "Y".to_string()];
        let phi = crate::mso::parse_formula("(col X Y)").unwrap();
        let ms = oracle_multispectrum(&g, &phi, &ctx, DEFAULT_ORACLE_GUARD).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[&vec![1, 1]], BigUint::from(6u32));
        assert_eq!(
            oracle_count(&g, &phi, &ctx, DEFAULT_ORACLE_GUARD).unwrap(),
            BigUint::from(6u32)
        );
        assert_eq!(
            oracle_spectrum(&g, &phi, &ctx, DEFAULT_ORACLE_GUARD).unwrap(),
            BTreeSet::from([vec![1, 1]])
        );
    }

    #[test]
    fn multispectrum_oracle_guard_trips() {
        let g = PGraph::builtin(&GraphFamily::Clique(6));
        let phi = Formula::Sgl("X".into());
        let err = oracle_multispectrum(&g, &phi, &["X".to_string(), "Y".to_string()], 1000);
        assert!(matches!(err, Err(OracleError::GuardExceeded { needed: 4096, .. })));
    }
}
