//! Clique-width terms: syntax, parsing, evaluation, annotation.
//!
//! A term builds a port-labeled graph bottom-up. `port(a)` is a single
//! vertex with port label `a`, `oplus` is disjoint union, `add(a,b,t)` makes
//! every a-port of the value of `t` adjacent to every b-port, and
//! `relab(a,b,t)` renames a-ports to b-ports. The vertices of the resulting
//! graph are exactly the leaves of the term; each vertex id is the
//! root-to-leaf child-index path of its leaf, so disjoint union never has to
//! rename anything.
//!
//! Leaves may carry an annotation `port(a,[01...])` giving one membership
//! bit per set variable; a term is either fully plain or fully annotated
//! with one fixed width.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::pgraph::{Assignment, Edge, GraphFamily, PGraph, PortLabel, VertexId};

/// Annotation bit string attached to a leaf: bit `i` says whether the leaf's
/// vertex belongs to set variable number `i+1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new(bits: Vec<bool>) -> Bits {
        Bits(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    /// The same bits with one more appended; used when widening annotations.
    pub fn extended(&self, bit: bool) -> Bits {
        let mut v = self.0.clone();
        v.push(bit);
        Bits(v)
    }

    /// The first `n` bits; used when narrowing annotations.
    pub fn truncated(&self, n: usize) -> Bits {
        Bits(self.0[..n].to_vec())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{}", if *b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = String;

    fn from_str(s: &str) -> Result<Bits, String> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(format!("bit strings use 0 and 1 only, got {c:?}")),
            }
        }
        Ok(Bits(bits))
    }
}

/// Node position in a term: the sequence of child indices from the root.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Position(Vec<u8>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn child(&self, i: u8) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    pub fn parts(&self) -> &[u8] {
        &self.0
    }

    /// The vertex id a leaf at this position contributes. The root position
    /// maps to id `0` (a term that is a single leaf has no other vertex, so
    /// the alias with a leaf at path `0` is harmless).
    pub fn vertex_id(&self) -> VertexId {
        if self.0.is_empty() {
            VertexId::num(0)
        } else {
            VertexId::from_parts(self.0.iter().map(|b| u32::from(*b)).collect())
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "root");
        }
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

/// Clique-width term. `Add` keeps its labels normalized with the smaller
/// one first; use [`Term::add`] rather than building the variant by hand.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Oplus(Box<Term>, Box<Term>),
    Relab(PortLabel, PortLabel, Box<Term>),
    Add(PortLabel, PortLabel, Box<Term>),
    Leaf(PortLabel),
    AnnotatedLeaf(PortLabel, Bits),
}

#[derive(Debug, thiserror::Error)]
pub enum TermError {
    #[error("term mixes plain and annotated leaves, or annotation widths differ")]
    MixedAnnotation,
    #[error("term is already annotated")]
    AlreadyAnnotated,
    #[error("assignments need at least one set")]
    EmptyAssignment,
    #[error("assignment mentions {0}, which is not a leaf of the term")]
    NonLeafVertex(VertexId),
    #[error("cannot build a term for the empty graph")]
    EmptyGraph,
    #[error("edge order must be a permutation of the graph's edges")]
    EdgeOrderMismatch,
    #[error("no term generator for family {0}; build the graph and convert it instead")]
    UnsupportedFamily(&'static str),
}

#[derive(Debug, thiserror::Error)]
#[error("term parse error at line {line}, column {col}: {msg}")]
pub struct TermParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Width (least k such that all labels lie in `1..=k`) and annotation width
/// of a term.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TermType {
    pub width: u32,
    pub num_vars: usize,
}

impl Term {
    pub fn oplus(l: Term, r: Term) -> Term {
        Term::Oplus(Box::new(l), Box::new(r))
    }

    pub fn relab(a: PortLabel, b: PortLabel, t: Term) -> Term {
        Term::Relab(a, b, Box::new(t))
    }

    /// Panics when `a == b`; stores the smaller label first.
    pub fn add(a: PortLabel, b: PortLabel, t: Term) -> Term {
        assert!(a != b, "edge addition needs two distinct port labels");
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Term::Add(a, b, Box::new(t))
    }

    pub fn leaf(a: PortLabel) -> Term {
        Term::Leaf(a)
    }

    pub fn annotated_leaf(a: PortLabel, bits: Bits) -> Term {
        Term::AnnotatedLeaf(a, bits)
    }

    /// Total number of nodes.
    pub fn num_positions(&self) -> usize {
        match self {
            Term::Oplus(l, r) => 1 + l.num_positions() + r.num_positions(),
            Term::Relab(_, _, t) | Term::Add(_, _, t) => 1 + t.num_positions(),
            Term::Leaf(_) | Term::AnnotatedLeaf(_, _) => 1,
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Term::Oplus(l, r) => l.leaf_count() + r.leaf_count(),
            Term::Relab(_, _, t) | Term::Add(_, _, t) => t.leaf_count(),
            Term::Leaf(_) | Term::AnnotatedLeaf(_, _) => 1,
        }
    }

    /// Leaf positions left to right.
    pub fn leaf_positions(&self) -> Vec<Position> {
        fn walk(t: &Term, pos: Position, out: &mut Vec<Position>) {
            match t {
                Term::Oplus(l, r) => {
                    walk(l, pos.child(0), out);
                    walk(r, pos.child(1), out);
                }
                Term::Relab(_, _, s) | Term::Add(_, _, s) => walk(s, pos.child(0), out),
                Term::Leaf(_) | Term::AnnotatedLeaf(_, _) => out.push(pos),
            }
        }
        let mut out = Vec::new();
        walk(self, Position::root(), &mut out);
        out
    }

    /// 0 for a fully plain term, m >= 1 for a fully annotated one; an error
    /// on any mix or width disagreement.
    pub fn annotation_width(&self) -> Result<usize, TermError> {
        #[derive(PartialEq)]
        enum Seen {
            Nothing,
            Plain,
            Annotated(usize),
        }
        fn walk(t: &Term, seen: &mut Seen) -> Result<(), TermError> {
            match t {
                Term::Oplus(l, r) => {
                    walk(l, seen)?;
                    walk(r, seen)
                }
                Term::Relab(_, _, s) | Term::Add(_, _, s) => walk(s, seen),
                Term::Leaf(_) => match seen {
                    Seen::Annotated(_) => Err(TermError::MixedAnnotation),
                    _ => {
                        *seen = Seen::Plain;
                        Ok(())
                    }
                },
                Term::AnnotatedLeaf(_, bits) => match seen {
                    Seen::Plain => Err(TermError::MixedAnnotation),
                    Seen::Annotated(m) if *m != bits.len() => Err(TermError::MixedAnnotation),
                    _ if bits.is_empty() => Err(TermError::MixedAnnotation),
                    _ => {
                        *seen = Seen::Annotated(bits.len());
                        Ok(())
                    }
                },
            }
        }
        let mut seen = Seen::Nothing;
        walk(self, &mut seen)?;
        Ok(match seen {
            Seen::Annotated(m) => m,
            _ => 0,
        })
    }

    /// Replaces every annotated leaf by its plain counterpart.
    pub fn strip_annotations(&self) -> Term {
        match self {
            Term::Oplus(l, r) => Term::oplus(l.strip_annotations(), r.strip_annotations()),
            Term::Relab(a, b, t) => Term::relab(*a, *b, t.strip_annotations()),
            Term::Add(a, b, t) => Term::Add(*a, *b, Box::new(t.strip_annotations())),
            Term::Leaf(a) => Term::Leaf(*a),
            Term::AnnotatedLeaf(a, _) => Term::Leaf(*a),
        }
    }

    pub fn term_type(&self) -> Result<TermType, TermError> {
        fn max_label(t: &Term) -> u32 {
            match t {
                Term::Oplus(l, r) => max_label(l).max(max_label(r)),
                Term::Relab(a, b, t) | Term::Add(a, b, t) => {
                    a.get().max(b.get()).max(max_label(t))
                }
                Term::Leaf(a) | Term::AnnotatedLeaf(a, _) => a.get(),
            }
        }
        Ok(TermType {
            width: max_label(self),
            num_vars: self.annotation_width()?,
        })
    }

    /// Evaluates the term into its graph. Vertices are the term's leaves,
    /// identified by their positions; annotations are ignored here.
    ///
    /// Panics on an `Add` whose two labels coincide, which cannot be
    /// produced by the parser or the constructors.
    pub fn eval(&self) -> PGraph {
        fn walk(t: &Term, pos: Position) -> PGraph {
            match t {
                Term::Oplus(l, r) => {
                    let lg = walk(l, pos.child(0));
                    let rg = walk(r, pos.child(1));
                    lg.oplus(&rg).expect("leaf positions are distinct")
                }
                Term::Relab(a, b, s) => walk(s, pos.child(0)).relabel(*a, *b),
                Term::Add(a, b, s) => walk(s, pos.child(0))
                    .add_edges(*a, *b)
                    .expect("add labels are distinct in normalized terms"),
                Term::Leaf(a) | Term::AnnotatedLeaf(a, _) => {
                    PGraph::single(pos.vertex_id(), *a)
                }
            }
        }
        walk(self, Position::root())
    }

    /// Evaluates an annotated term into its graph plus the assignment its
    /// bits encode: set `i` holds the vertices whose leaf has bit `i` set.
    /// A plain term yields the empty assignment.
    pub fn eval_annotated(&self) -> Result<(PGraph, Assignment), TermError> {
        let m = self.annotation_width()?;
        let mut sets = vec![BTreeSet::new(); m];
        fn walk(t: &Term, pos: Position, sets: &mut [BTreeSet<VertexId>]) {
            match t {
                Term::Oplus(l, r) => {
                    walk(l, pos.child(0), sets);
                    walk(r, pos.child(1), sets);
                }
                Term::Relab(_, _, s) | Term::Add(_, _, s) => walk(s, pos.child(0), sets),
                Term::Leaf(_) => {}
                Term::AnnotatedLeaf(_, bits) => {
                    for (i, b) in bits.iter().enumerate() {
                        if b {
                            sets[i].insert(pos.vertex_id());
                        }
                    }
                }
            }
        }
        walk(self, Position::root(), &mut sets);
        Ok((self.eval(), Assignment(sets)))
    }

    /// Annotates a plain term with membership bits for `asg`: leaf bit `i`
    /// is set when the leaf's vertex lies in `asg.0[i]`. Every vertex
    /// mentioned by `asg` must be a leaf of the term.
    pub fn annotate(&self, asg: &Assignment) -> Result<Term, TermError> {
        if self.annotation_width()? != 0 {
            return Err(TermError::AlreadyAnnotated);
        }
        if asg.0.is_empty() {
            return Err(TermError::EmptyAssignment);
        }
        let leaf_ids: BTreeSet<VertexId> = self
            .leaf_positions()
            .iter()
            .map(Position::vertex_id)
            .collect();
        for set in &asg.0 {
            if let Some(v) = set.iter().find(|v| !leaf_ids.contains(*v)) {
                return Err(TermError::NonLeafVertex(v.clone()));
            }
        }
        fn walk(t: &Term, pos: Position, asg: &Assignment) -> Term {
            match t {
                Term::Oplus(l, r) => Term::oplus(
                    walk(l, pos.child(0), asg),
                    walk(r, pos.child(1), asg),
                ),
                Term::Relab(a, b, s) => Term::relab(*a, *b, walk(s, pos.child(0), asg)),
                Term::Add(a, b, s) => {
                    Term::Add(*a, *b, Box::new(walk(s, pos.child(0), asg)))
                }
                Term::Leaf(a) => {
                    let id = pos.vertex_id();
                    let bits = asg.0.iter().map(|set| set.contains(&id)).collect();
                    Term::AnnotatedLeaf(*a, Bits::new(bits))
                }
                Term::AnnotatedLeaf(_, _) => unreachable!("term checked plain"),
            }
        }
        Ok(walk(self, Position::root(), asg))
    }
}

/// Verdict of the irredundancy check: an `Add` node is redundant when at
/// least one of the edges it would create already exists.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Irredundancy {
    Irredundant,
    /// Position of the first offending `Add` in evaluation (bottom-up,
    /// left-to-right) order.
    RedundantAt(Position),
}

impl Irredundancy {
    pub fn is_irredundant(&self) -> bool {
        matches!(self, Irredundancy::Irredundant)
    }
}

/// Checks that no `Add` in the term re-creates an existing edge. Several
/// downstream computations (degree bookkeeping in particular) count the
/// edges an `Add` contributes and need each one to be new.
pub fn check_irredundant(t: &Term) -> Irredundancy {
    fn walk(t: &Term, pos: Position, bad: &mut Option<Position>) -> PGraph {
        match t {
            Term::Oplus(l, r) => {
                let lg = walk(l, pos.child(0), bad);
                let rg = walk(r, pos.child(1), bad);
                lg.oplus(&rg).expect("leaf positions are distinct")
            }
            Term::Relab(a, b, s) => walk(s, pos.child(0), bad).relabel(*a, *b),
            Term::Add(a, b, s) => {
                let g = walk(s, pos.child(0), bad);
                if bad.is_none() {
                    let clash = g.ports_with(*a).any(|x| {
                        g.ports_with(*b).any(|y| g.has_edge(x, y))
                    });
                    if clash {
                        *bad = Some(pos.clone());
                    }
                }
                g.add_edges(*a, *b)
                    .expect("add labels are distinct in normalized terms")
            }
            Term::Leaf(a) | Term::AnnotatedLeaf(a, _) => PGraph::single(pos.vertex_id(), *a),
        }
    }
    let mut bad = None;
    walk(t, Position::root(), &mut bad);
    match bad {
        None => Irredundancy::Irredundant,
        Some(p) => Irredundancy::RedundantAt(p),
    }
}

// ============================================================================
// Printing and parsing
// ============================================================================

impl fmt::Display for Term {
    /// Canonical text: no whitespace, `add` labels smaller-first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Oplus(l, r) => write!(f, "oplus({l},{r})"),
            Term::Relab(a, b, t) => write!(f, "relab({a},{b},{t})"),
            Term::Add(a, b, t) => write!(f, "add({a},{b},{t})"),
            Term::Leaf(a) => write!(f, "port({a})"),
            Term::AnnotatedLeaf(a, bits) => write!(f, "port({a},[{bits}])"),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Ident(String),
    Int(String),
    Open,
    Close,
    Comma,
    BracketOpen,
    BracketClose,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s:?}"),
            Tok::Int(s) => write!(f, "{s:?}"),
            Tok::Open => write!(f, "`(`"),
            Tok::Close => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::BracketOpen => write!(f, "`[`"),
            Tok::BracketClose => write!(f, "`]`"),
        }
    }
}

struct TermParser {
    tokens: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl TermParser {
    fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, TermParseError> {
        let mut tokens = Vec::new();
        let mut line = 1;
        let mut col = 1;
        let mut chars = text.chars().peekable();
        while let Some(&c) = chars.peek() {
            let (tline, tcol) = (line, col);
            let bump = |chars: &mut std::iter::Peekable<std::str::Chars>,
                            line: &mut usize,
                            col: &mut usize| {
                let c = chars.next();
                if c == Some('\n') {
                    *line += 1;
                    *col = 1;
                } else if c.is_some() {
                    *col += 1;
                }
                c
            };
            match c {
                c if c.is_whitespace() => {
                    bump(&mut chars, &mut line, &mut col);
                }
                '#' => {
                    while let Some(c) = bump(&mut chars, &mut line, &mut col) {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                '(' | ')' | ',' | '[' | ']' => {
                    bump(&mut chars, &mut line, &mut col);
                    tokens.push((
                        match c {
                            '(' => Tok::Open,
                            ')' => Tok::Close,
                            ',' => Tok::Comma,
                            '[' => Tok::BracketOpen,
                            _ => Tok::BracketClose,
                        },
                        tline,
                        tcol,
                    ));
                }
                c if c.is_ascii_digit() => {
                    let mut s = String::new();
                    while let Some(&c) = chars.peek() {
                        if !c.is_ascii_digit() {
                            break;
                        }
                        s.push(c);
                        bump(&mut chars, &mut line, &mut col);
                    }
                    tokens.push((Tok::Int(s), tline, tcol));
                }
                c if c.is_ascii_alphabetic() => {
                    let mut s = String::new();
                    while let Some(&c) = chars.peek() {
                        if !c.is_ascii_alphanumeric() && c != '_' {
                            break;
                        }
                        s.push(c);
                        bump(&mut chars, &mut line, &mut col);
                    }
                    tokens.push((Tok::Ident(s), tline, tcol));
                }
                other => {
                    return Err(TermParseError {
                        line,
                        col,
                        msg: format!("unexpected character {other:?}"),
                    })
                }
            }
        }
        Ok(tokens)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TermParseError> {
        let (line, col) = self
            .tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((1, 1));
        Err(TermParseError {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), TermParseError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => {
                self.pos -= 1;
                self.err(format!("expected {want}, got {t}"))
            }
            None => self.err(format!("expected {want}, got end of input")),
        }
    }

    fn label(&mut self) -> Result<PortLabel, TermParseError> {
        match self.next() {
            Some(Tok::Int(raw)) => match raw.parse::<u32>() {
                Ok(n) if n >= 1 => Ok(PortLabel::new(n)),
                Ok(_) => {
                    self.pos -= 1;
                    self.err("port labels are 1-based")
                }
                Err(_) => {
                    self.pos -= 1;
                    self.err(format!("label {raw:?} out of range"))
                }
            },
            Some(t) => {
                self.pos -= 1;
                self.err(format!("expected a port label, got {t}"))
            }
            None => self.err("expected a port label, got end of input"),
        }
    }

    fn term(&mut self) -> Result<Term, TermParseError> {
        let head = match self.next() {
            Some(Tok::Ident(s)) => s,
            Some(t) => {
                self.pos -= 1;
                return self.err(format!("expected an operation, got {t}"));
            }
            None => return self.err("expected an operation, got end of input"),
        };
        match head.as_str() {
            "oplus" => {
                self.expect(Tok::Open)?;
                let l = self.term()?;
                self.expect(Tok::Comma)?;
                let r = self.term()?;
                self.expect(Tok::Close)?;
                Ok(Term::oplus(l, r))
            }
            "relab" => {
                self.expect(Tok::Open)?;
                let a = self.label()?;
                self.expect(Tok::Comma)?;
                let b = self.label()?;
                self.expect(Tok::Comma)?;
                let t = self.term()?;
                self.expect(Tok::Close)?;
                Ok(Term::relab(a, b, t))
            }
            "add" => {
                self.expect(Tok::Open)?;
                let a = self.label()?;
                self.expect(Tok::Comma)?;
                let b = self.label()?;
                if a == b {
                    self.pos -= 1;
                    return self.err(format!("add needs two distinct labels, got {a} twice"));
                }
                self.expect(Tok::Comma)?;
                let t = self.term()?;
                self.expect(Tok::Close)?;
                Ok(Term::add(a, b, t))
            }
            "port" => {
                self.expect(Tok::Open)?;
                let a = self.label()?;
                let t = match self.next() {
                    Some(Tok::Close) => Term::Leaf(a),
                    Some(Tok::Comma) => {
                        self.expect(Tok::BracketOpen)?;
                        let bits = match self.next() {
                            Some(Tok::Int(raw)) => match raw.parse::<Bits>() {
                                Ok(b) => b,
                                Err(msg) => {
                                    self.pos -= 1;
                                    return self.err(msg);
                                }
                            },
                            _ => {
                                self.pos -= 1;
                                return self.err("expected a bit string after `[`");
                            }
                        };
                        self.expect(Tok::BracketClose)?;
                        self.expect(Tok::Close)?;
                        Term::AnnotatedLeaf(a, bits)
                    }
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        return self.err("expected `)` or `,[bits])`");
                    }
                };
                Ok(t)
            }
            other => {
                self.pos -= 1;
                self.err(format!("unknown operation {other:?}"))
            }
        }
    }
}

/// Parses one term. Whitespace is insignificant and `#` starts a comment
/// running to end of line.
pub fn parse_term(text: &str) -> Result<Term, TermParseError> {
    let tokens = TermParser::lex(text)?;
    let mut p = TermParser { tokens, pos: 0 };
    let t = p.term()?;
    if p.pos != p.tokens.len() {
        return p.err("trailing content after the term");
    }
    Ok(t)
}

// ============================================================================
// Building terms from graphs and for graph families
// ============================================================================

/// Builds a term evaluating to `g`, with edges added in the given order.
/// Returns the term and the renaming from the term's leaf vertex ids to the
/// original vertex ids of `g`.
///
/// Each vertex gets a private temporary label (above every label of `g`), so
/// each edge is added exactly once between two singleton classes and the
/// result is irredundant. The construction spends `|V|` extra labels and
/// makes no attempt at the optimal width.
pub fn term_from_graph_ordered(
    g: &PGraph,
    edges: &[Edge],
) -> Result<(Term, BTreeMap<VertexId, VertexId>), TermError> {
    if g.num_vertices() == 0 {
        return Err(TermError::EmptyGraph);
    }
    {
        let want: BTreeSet<&Edge> = g.edges().collect();
        let got: BTreeSet<&Edge> = edges.iter().collect();
        if want != got || edges.len() != g.num_edges() {
            return Err(TermError::EdgeOrderMismatch);
        }
    }

    let vertices: Vec<&VertexId> = g.vertices().collect();
    let base = g
        .port_type()
        .iter()
        .map(|p| p.get())
        .max()
        .unwrap_or(0);
    let temp = |i: usize| PortLabel::new(base + 1 + i as u32);
    let index: BTreeMap<&VertexId, usize> =
        vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    let mut t = Term::leaf(temp(0));
    for i in 1..vertices.len() {
        t = Term::oplus(t, Term::leaf(temp(i)));
    }
    for e in edges {
        t = Term::add(temp(index[e.lo()]), temp(index[e.hi()]), t);
    }
    for (i, v) in vertices.iter().enumerate() {
        t = Term::relab(temp(i), g.port(v).expect("vertex of g"), t);
    }

    let renaming = t
        .leaf_positions()
        .iter()
        .zip(&vertices)
        .map(|(pos, v)| (pos.vertex_id(), (*v).clone()))
        .collect();
    Ok((t, renaming))
}

/// [`term_from_graph_ordered`] with the edges in their natural order.
pub fn term_from_graph(g: &PGraph) -> Result<(Term, BTreeMap<VertexId, VertexId>), TermError> {
    let edges: Vec<Edge> = g.edges().cloned().collect();
    term_from_graph_ordered(g, &edges)
}

/// Builds a term for a builtin graph family directly, using few labels:
/// cliques need 2, paths 3, cycles 4, and an r-by-c grid min(r,c)+2.
/// Returns the term and the renaming from its leaf vertex ids to the builtin
/// graph's ids. Stars and the Petersen graph have no dedicated generator.
pub fn gen_term(family: &GraphFamily) -> Result<(Term, BTreeMap<VertexId, VertexId>), TermError> {
    let pl = PortLabel::new;
    let term = match *family {
        GraphFamily::Clique(n) => {
            // The finished part keeps label 1; each new vertex arrives as a
            // 2-port, is connected to everything, then joins the pack.
            let mut t = Term::leaf(pl(1));
            for _ in 2..=n {
                t = Term::relab(
                    pl(2),
                    pl(1),
                    Term::add(pl(1), pl(2), Term::oplus(t, Term::leaf(pl(2)))),
                );
            }
            t
        }
        GraphFamily::Path(n) => {
            // 1 = interior, 2 = current end, 3 = incoming vertex.
            if n == 1 {
                Term::leaf(pl(1))
            } else {
                let mut t = Term::leaf(pl(2));
                for _ in 2..=n {
                    t = Term::relab(
                        pl(3),
                        pl(2),
                        Term::relab(
                            pl(2),
                            pl(1),
                            Term::add(pl(2), pl(3), Term::oplus(t, Term::leaf(pl(3)))),
                        ),
                    );
                }
                Term::relab(pl(2), pl(1), t)
            }
        }
        GraphFamily::Cycle(n) => {
            // As for paths, plus label 4 pinned on the first vertex so the
            // cycle can be closed at the end.
            let mut t = Term::leaf(pl(4));
            t = Term::relab(
                pl(3),
                pl(2),
                Term::add(pl(4), pl(3), Term::oplus(t, Term::leaf(pl(3)))),
            );
            for _ in 3..=n {
                t = Term::relab(
                    pl(3),
                    pl(2),
                    Term::relab(
                        pl(2),
                        pl(1),
                        Term::add(pl(2), pl(3), Term::oplus(t, Term::leaf(pl(3)))),
                    ),
                );
            }
            Term::relab(pl(2), pl(1), Term::relab(pl(4), pl(1), Term::add(pl(2), pl(4), t)))
        }
        GraphFamily::Grid(r, c) => gen_grid(r, c),
        GraphFamily::Star(_) => return Err(TermError::UnsupportedFamily("star")),
        GraphFamily::Petersen => return Err(TermError::UnsupportedFamily("petersen")),
    };

    // Leaves are created in vertex order for every family above.
    let ids: Vec<VertexId> = match *family {
        GraphFamily::Grid(r, c) => grid_creation_ids(r, c),
        _ => (1..=term.leaf_count() as u32).map(VertexId::num).collect(),
    };
    let renaming = term
        .leaf_positions()
        .iter()
        .zip(ids)
        .map(|(pos, id)| (pos.vertex_id(), id))
        .collect();
    Ok((term, renaming))
}

/// Column-by-column sweep along the longer side. Labels `1..=h` mark the
/// rows of the newest complete column (h = min(r, c)), `h+1` is the cell
/// under construction and `h+2` collects retired vertices.
fn gen_grid(r: u32, c: u32) -> Term {
    let pl = PortLabel::new;
    let h = r.min(c);
    let w = r.max(c);
    let fresh = pl(h + 1);
    let retired = pl(h + 2);

    let mut t = None;
    for j in 1..=w {
        for i in 1..=h {
            let cell = Term::leaf(fresh);
            t = Some(match t {
                // The first cell takes over its row label right away; later
                // cells connect to their neighbors through it.
                None => Term::relab(fresh, pl(1), cell),
                Some(prev) => {
                    let mut s = Term::oplus(prev, cell);
                    if j >= 2 {
                        // Connect to the left neighbor, then retire it.
                        s = Term::relab(pl(i), retired, Term::add(fresh, pl(i), s));
                    }
                    if j >= 2 || i >= 2 {
                        if i >= 2 && j >= 2 {
                            // Take over the row label, then connect upward.
                            s = Term::add(pl(i - 1), pl(i), Term::relab(fresh, pl(i), s));
                        } else if i >= 2 {
                            // First column: connect upward while still fresh.
                            s = Term::relab(fresh, pl(i), Term::add(pl(i - 1), fresh, s));
                        } else {
                            s = Term::relab(fresh, pl(i), s);
                        }
                    }
                    s
                }
            });
        }
    }
    let mut t = match t {
        Some(t) => t,
        None => unreachable!("grids are nonempty"),
    };
    for i in 2..=h {
        t = Term::relab(pl(i), pl(1), t);
    }
    if w >= 2 {
        t = Term::relab(retired, pl(1), t);
    }
    t
}

/// Builtin vertex ids in the order [`gen_grid`] creates cells.
fn grid_creation_ids(r: u32, c: u32) -> Vec<VertexId> {
    let transpose = r > c;
    let h = r.min(c);
    let w = r.max(c);
    let mut ids = Vec::with_capacity((r * c) as usize);
    for j in 1..=w {
        for i in 1..=h {
            let (row, col) = if transpose { (j, i) } else { (i, j) };
            ids.push(VertexId::num((row - 1) * c + col));
        }
    }
    ids
}
