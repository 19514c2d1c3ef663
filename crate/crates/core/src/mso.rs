//! Monadic second-order formulas over graphs, and their compilation into
//! fly-automata.
//!
//! The logic has set variables only. Atomic formulas are set inclusion
//! `X ⊆ Y`, singleton tests, adjacency of two singletons, exact and modular
//! cardinality, and partition-of-the-vertex-set. First-order reasoning is
//! recovered by quantifying over singletons.
//!
//! Formulas are written as parenthesized prefix expressions:
//!
//! ```text
//! (exists X (exists Y (col X Y)))
//! ```
//!
//! `col` and `3colorable` are parser-level macros expanding into the plain
//! connectives; everything downstream sees core syntax only.
//!
//! Compilation maps each atomic formula to a small deterministic automaton
//! over annotated terms (each leaf carries one membership bit per variable),
//! negation to complement, conjunction to a product (after padding both
//! sides to a common annotation width), and existential quantification to a
//! bit projection followed by on-the-fly determinization.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::fa::{determinize, Dfa, Nfa, OutputDfa, StateValue, Symbol};
use crate::pgraph::PortLabel;
use crate::solve::Tropical;
use crate::term::Bits;

/// Formula of the set-variable fragment. Variables are plain names; scoping
/// is resolved at compile time, with inner bindings shadowing outer ones.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Formula {
    /// X ⊆ Y.
    Sub(String, String),
    /// X is a singleton.
    Sgl(String),
    /// X and Y are singletons whose vertices are adjacent.
    Edg(String, String),
    /// |X| = p.
    CardP(u64, String),
    /// |X| ≡ p (mod q).
    CardMod(u64, u64, String),
    /// Every vertex lies in exactly one of the listed sets.
    Partition(Vec<String>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            let free = |name: &String, bound: &Vec<String>, out: &mut Vec<String>| {
                if !bound.contains(name) && !out.contains(name) {
                    out.push(name.clone());
                }
            };
            match f {
                Formula::Sub(x, y) | Formula::Edg(x, y) => {
                    free(x, bound, out);
                    free(y, bound, out);
                }
                Formula::Sgl(x) | Formula::CardP(_, x) | Formula::CardMod(_, _, x) => {
                    free(x, bound, out)
                }
                Formula::Partition(xs) => {
                    for x in xs {
                        free(x, bound, out);
                    }
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::And(g, h) | Formula::Or(g, h) | Formula::Implies(g, h) => {
                    walk(g, bound, out);
                    walk(h, bound, out);
                }
                Formula::Exists(x, g) | Formula::Forall(x, g) => {
                    bound.push(x.clone());
                    walk(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for Formula {
    /// Prints core syntax; macro forms never reappear.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Sub(x, y) => write!(f, "(sub {x} {y})"),
            Formula::Sgl(x) => write!(f, "(sgl {x})"),
            Formula::Edg(x, y) => write!(f, "(edg {x} {y})"),
            Formula::CardP(p, x) => write!(f, "(cardp {p} {x})"),
            Formula::CardMod(p, q, x) => write!(f, "(cardmod {p} {q} {x})"),
            Formula::Partition(xs) => {
                write!(f, "(partition")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                write!(f, ")")
            }
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(g, h) => write!(f, "(and {g} {h})"),
            Formula::Or(g, h) => write!(f, "(or {g} {h})"),
            Formula::Implies(g, h) => write!(f, "(implies {g} {h})"),
            Formula::Exists(x, g) => write!(f, "(exists {x} {g})"),
            Formula::Forall(x, g) => write!(f, "(forall {x} {g})"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("formula parse error at line {line}, column {col}: {msg}")]
pub struct FormulaParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, thiserror::Error)]
pub enum MsoError {
    #[error("unbound set variable {0:?}")]
    UnboundVariable(String),
    #[error("variable index {index} outside annotation width {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("cannot pad an automaton of width {n} down to width {m}")]
    BadArityAdjust { n: usize, m: usize },
    #[error("cannot project an automaton that has no annotation bits")]
    ProjectFromWidthZero,
    #[error("modular cardinality needs a modulus >= 1 and a residue below it")]
    BadModulus,
    #[error("partition needs at least one variable")]
    EmptyPartition,
}

// ============================================================================
// Atomic automata
// ============================================================================
//
// Each atomic formula becomes a small deterministic fly automaton over
// annotated terms. Variables are referred to by 1-based index into the
// current environment; an automaton for indices i, j is built at width
// max(i, j) and padded later when combined with wider siblings.

const ERROR: StateValue = StateValue::Atom("error");
const OK: StateValue = StateValue::Atom("ok");

fn any_error(args: &[StateValue]) -> bool {
    args.iter().any(|q| *q == ERROR)
}

fn bit(sym: &Symbol, index: usize) -> bool {
    match sym {
        Symbol::AnnotatedLeaf(_, w) => w.get(index - 1),
        other => panic!("annotated automaton read {other}"),
    }
}

/// X_i ⊆ X_j: reject as soon as one leaf is in X_i but not X_j.
fn atomic_sub(i: usize, j: usize) -> Dfa {
    Dfa::new(
        i.max(j),
        Arc::new(move |sym, args| match sym {
            Symbol::AnnotatedLeaf(_, _) => {
                if bit(sym, i) && !bit(sym, j) {
                    ERROR
                } else {
                    OK
                }
            }
            _ => {
                if any_error(args) {
                    ERROR
                } else {
                    OK
                }
            }
        }),
        Arc::new(|q| *q == OK),
    )
}

/// |X_i| = 1, counted with saturation at 2.
fn atomic_sgl(i: usize) -> Dfa {
    Dfa::new(
        i,
        Arc::new(move |sym, args| match sym {
            Symbol::AnnotatedLeaf(_, _) => StateValue::Nat(u64::from(bit(sym, i))),
            _ => {
                let total: u64 = args
                    .iter()
                    .map(|q| match q {
                        StateValue::Nat(n) => *n,
                        other => panic!("unexpected state {other}"),
                    })
                    .sum();
                StateValue::Nat(total.min(2))
            }
        }),
        Arc::new(|q| *q == StateValue::Nat(1)),
    )
}

/// X_i and X_j are singletons joined by an edge. The automaton tracks each
/// marked vertex's current port label until the edge between them is added.
fn atomic_edg(i: usize, j: usize) -> Dfa {
    // (edg X X) asks for a loop, which no graph here has.
    if i == j {
        return Dfa::new(
            i,
            Arc::new(|_, _| ERROR),
            Arc::new(|_| false),
        );
    }
    let empty = || StateValue::Atom("empty");
    let first = |a: PortLabel| StateValue::pair(StateValue::Atom("first"), StateValue::Label(a));
    let second = |a: PortLabel| StateValue::pair(StateValue::Atom("second"), StateValue::Label(a));
    let both = |a: PortLabel, b: PortLabel| {
        StateValue::pair(
            StateValue::Atom("both"),
            StateValue::pair(StateValue::Label(a), StateValue::Label(b)),
        )
    };
    // Which mark a state carries, for the disjoint-union case analysis.
    fn tag(q: &StateValue) -> &'static str {
        match q {
            StateValue::Atom(s) => s,
            StateValue::Pair(t, _) => match **t {
                StateValue::Atom(s) => s,
                _ => panic!("unexpected state {q}"),
            },
            _ => panic!("unexpected state {q}"),
        }
    }
    let rename = |q: &StateValue, c: PortLabel, d: PortLabel| -> StateValue {
        let fix = |l: &StateValue| match l {
            StateValue::Label(a) if *a == c => StateValue::Label(d),
            other => other.clone(),
        };
        match q {
            StateValue::Pair(t, payload) => match &**payload {
                StateValue::Label(_) => StateValue::Pair(t.clone(), Box::new(fix(payload))),
                StateValue::Pair(a, b) => StateValue::Pair(
                    t.clone(),
                    Box::new(StateValue::pair(fix(a), fix(b))),
                ),
                _ => q.clone(),
            },
            _ => q.clone(),
        }
    };
    Dfa::new(
        i.max(j),
        Arc::new(move |sym, args| match sym {
            Symbol::AnnotatedLeaf(a, _) => match (bit(sym, i), bit(sym, j)) {
                (false, false) => empty(),
                (true, false) => first(*a),
                (false, true) => second(*a),
                // One vertex cannot be adjacent to itself.
                (true, true) => ERROR,
            },
            Symbol::Oplus => {
                let (l, r) = (&args[0], &args[1]);
                match (tag(l), tag(r)) {
                    ("error", _) | (_, "error") => ERROR,
                    ("empty", _) => r.clone(),
                    (_, "empty") => l.clone(),
                    ("first", "second") | ("second", "first") => {
                        let lab = |q: &StateValue| match q {
                            StateValue::Pair(_, l) => match **l {
                                StateValue::Label(a) => a,
                                _ => panic!("unexpected state {q}"),
                            },
                            _ => panic!("unexpected state {q}"),
                        };
                        if tag(l) == "first" {
                            both(lab(l), lab(r))
                        } else {
                            both(lab(r), lab(l))
                        }
                    }
                    // Any other combination marks some variable twice.
                    _ => ERROR,
                }
            }
            Symbol::Add(c, d) => match &args[0] {
                StateValue::Pair(t, payload) if **t == StateValue::Atom("both") => {
                    match &**payload {
                        StateValue::Pair(x, y) => {
                            let (x, y) = match (&**x, &**y) {
                                (StateValue::Label(x), StateValue::Label(y)) => (*x, *y),
                                _ => panic!("unexpected state {}", args[0]),
                            };
                            if (x, y) == (*c, *d) || (x, y) == (*d, *c) {
                                OK
                            } else {
                                args[0].clone()
                            }
                        }
                        _ => panic!("unexpected state {}", args[0]),
                    }
                }
                other => other.clone(),
            },
            Symbol::Relab(c, d) => rename(&args[0], *c, *d),
            Symbol::Leaf(_) => panic!("annotated automaton read {sym}"),
        }),
        Arc::new(|q| *q == OK),
    )
}

/// |X_i| = p, counted with saturation at p+1.
fn atomic_cardp(p: u64, i: usize) -> Dfa {
    Dfa::new(
        i,
        Arc::new(move |sym, args| match sym {
            Symbol::AnnotatedLeaf(_, _) => StateValue::Nat(u64::from(bit(sym, i)).min(p + 1)),
            _ => {
                let total: u64 = args
                    .iter()
                    .map(|q| match q {
                        StateValue::Nat(n) => *n,
                        other => panic!("unexpected state {other}"),
                    })
                    .sum();
                StateValue::Nat(total.min(p + 1))
            }
        }),
        Arc::new(move |q| *q == StateValue::Nat(p)),
    )
}

/// |X_i| ≡ p (mod q).
fn atomic_cardmod(p: u64, q: u64, i: usize) -> Result<Dfa, MsoError> {
    if q == 0 || p >= q {
        return Err(MsoError::BadModulus);
    }
    Ok(Dfa::new(
        i,
        Arc::new(move |sym, args| match sym {
            Symbol::AnnotatedLeaf(_, _) => StateValue::Nat(u64::from(bit(sym, i)) % q),
            _ => {
                let total: u64 = args
                    .iter()
                    .map(|s| match s {
                        StateValue::Nat(n) => *n,
                        other => panic!("unexpected state {other}"),
                    })
                    .sum();
                StateValue::Nat(total % q)
            }
        }),
        Arc::new(move |s| *s == StateValue::Nat(p)),
    ))
}

/// Every vertex lies in exactly one of the listed sets. Membership is
/// counted with multiplicity, so a repeated variable counts twice — the
/// same convention the set-theoretic definition of a partition gives.
fn atomic_partition(indices: Vec<usize>) -> Result<Dfa, MsoError> {
    if indices.is_empty() {
        return Err(MsoError::EmptyPartition);
    }
    let width = indices.iter().copied().max().unwrap();
    Ok(Dfa::new(
        width,
        Arc::new(move |sym, args| match sym {
            Symbol::AnnotatedLeaf(_, _) => {
                let hits: usize = indices.iter().filter(|i| bit(sym, **i)).count();
                if hits == 1 {
                    OK
                } else {
                    ERROR
                }
            }
            _ => {
                if any_error(args) {
                    ERROR
                } else {
                    OK
                }
            }
        }),
        Arc::new(|q| *q == OK),
    ))
}

// ============================================================================
// Arity adjustment, projection, compilation
// ============================================================================

/// Pads an automaton of width n to read terms of width m > n by ignoring
/// the extra annotation bits.
pub fn adjust_arity(d: &Dfa, m: usize) -> Result<Dfa, MsoError> {
    let n = d.num_vars();
    if m <= n {
        return Err(MsoError::BadArityAdjust { n, m });
    }
    let inner = d.clone();
    let acc = d.clone();
    Ok(Dfa::new(
        m,
        Arc::new(move |sym, args| {
            let narrowed = match sym {
                Symbol::AnnotatedLeaf(a, w) => {
                    if n == 0 {
                        Symbol::Leaf(*a)
                    } else {
                        Symbol::AnnotatedLeaf(*a, w.truncated(n))
                    }
                }
                other => other.clone(),
            };
            inner.step(&narrowed, args)
        }),
        Arc::new(move |q| acc.is_accepting(q)),
    ))
}

fn lift_to(d: &Dfa, m: usize) -> Result<Dfa, MsoError> {
    if d.num_vars() == m {
        Ok(d.clone())
    } else {
        adjust_arity(d, m)
    }
}

/// Wraps a width-2 automaton so that it reads annotation bits `i` and `j`
/// (1-based) of a wider annotation and ignores the rest. This is what lets a
/// specialized two-variable automaton run in the middle of any environment.
fn select_two_bits(d: &Dfa, i: usize, j: usize) -> Dfa {
    debug_assert_eq!(d.num_vars(), 2);
    let inner = d.clone();
    let acc = d.clone();
    Dfa::new(
        i.max(j),
        Arc::new(move |sym, args| {
            let narrowed = match sym {
                Symbol::AnnotatedLeaf(a, w) => {
                    Symbol::AnnotatedLeaf(*a, Bits::new(vec![w.get(i - 1), w.get(j - 1)]))
                }
                other => other.clone(),
            };
            inner.step(&narrowed, args)
        }),
        Arc::new(move |q| acc.is_accepting(q)),
    )
}

/// Projection on nondeterministic automata, so that successive projections
/// compose without determinizing in between.
fn project_last_nfa(n: &Nfa) -> Result<Nfa, MsoError> {
    let m = n.num_vars();
    if m == 0 {
        return Err(MsoError::ProjectFromWidthZero);
    }
    let inner = n.clone();
    let acc = n.clone();
    Ok(Nfa::new(
        m - 1,
        Arc::new(move |sym, args| match sym {
            Symbol::Leaf(a) => {
                debug_assert_eq!(m, 1);
                [false, true]
                    .iter()
                    .flat_map(|b| {
                        inner.step(&Symbol::AnnotatedLeaf(*a, Bits::new(vec![*b])), &[])
                    })
                    .collect()
            }
            Symbol::AnnotatedLeaf(a, w) => [false, true]
                .iter()
                .flat_map(|b| inner.step(&Symbol::AnnotatedLeaf(*a, w.extended(*b)), &[]))
                .collect(),
            other => inner.step(other, args),
        }),
        Arc::new(move |q| acc.is_accepting(q)),
    ))
}

/// Drops the last annotation bit, nondeterministically guessing it at every
/// leaf. The language becomes the existential projection: a width-(m-1)
/// term is accepted iff some way of restoring the bit is.
pub fn project_last(d: &Dfa) -> Result<Nfa, MsoError> {
    project_last_nfa(&d.as_nfa())
}

/// ∃-quantification of the `vars` most recently bound variables: pad the
/// body to `width_with_vars` bits, project the trailing bits away one by
/// one, then determinize lazily and cache transitions. Collapsing a whole
/// quantifier block into a single subset construction keeps the state
/// nesting shallow.
fn exists_chain(body: &Dfa, width_with_vars: usize, vars: usize) -> Result<Dfa, MsoError> {
    let mut nfa = lift_to(body, width_with_vars)?.as_nfa();
    for _ in 0..vars {
        nfa = project_last_nfa(&nfa)?;
    }
    Ok(determinize(&nfa).memoized())
}

/// A compiled formula: a deterministic fly automaton reading one annotation
/// bit per context variable, in context order.
pub struct CompiledAutomaton {
    pub dfa: Dfa,
    pub vars: Vec<String>,
}

/// Compiles `f` against the variable context `ctx` (which must cover its
/// free variables; extras are allowed and read as unconstrained bits). The
/// resulting automaton accepts an annotated term iff the assignment encoded
/// by the annotations satisfies `f`.
pub fn compile(f: &Formula, ctx: &[String]) -> Result<CompiledAutomaton, MsoError> {
    let mut env = ctx.to_vec();
    let d = compile_env(f, &mut env)?;
    // Quantifier layers inside carry their own transition caches; the
    // outermost automaton is left uncached so single-pass weighted runs
    // don't pay for storing every distinct argument combination. Callers
    // that run the same automaton many times can add `.memoized()`.
    Ok(CompiledAutomaton {
        dfa: lift_to(&d, ctx.len())?,
        vars: ctx.to_vec(),
    })
}

fn index_of(env: &[String], name: &str) -> Result<usize, MsoError> {
    env.iter()
        .rposition(|v| v == name)
        .map(|p| p + 1)
        .ok_or_else(|| MsoError::UnboundVariable(name.to_string()))
}

fn combine(
    env: &mut Vec<String>,
    g: &Formula,
    h: &Formula,
    accept: fn(bool, bool) -> bool,
) -> Result<Dfa, MsoError> {
    let dg = compile_env(g, env)?;
    let dh = compile_env(h, env)?;
    let m = dg.num_vars().max(dh.num_vars());
    let dg = lift_to(&dg, m)?;
    let dh = lift_to(&dh, m)?;
    Ok(Dfa::product(&dg, &dh, accept).expect("widths were equalized"))
}

/// Recognizes the proper-3-coloring pattern that the `col` shorthand
/// expands to and returns the two color-class variables. Matching is
/// structural and insensitive to the names chosen for the bound edge
/// variables, so any formula of this exact shape qualifies.
fn match_col(f: &Formula) -> Option<(&str, &str)> {
    use Formula::{And, Edg, Exists, Forall, Implies, Not, Sgl, Sub};
    let is_sub = |g: &Formula, w: &str, s: &str| {
        matches!(g, Sub(a, b) if a.as_str() == w && b.as_str() == s)
    };

    // Top level: the classes are disjoint, and no edge is monochromatic.
    let And(disjoint, no_bad) = f else {
        return None;
    };

    // Not(Exists u (Sgl u ∧ (u ⊆ x ∧ u ⊆ y))).
    let Not(g) = disjoint.as_ref() else {
        return None;
    };
    let Exists(u0, g) = g.as_ref() else {
        return None;
    };
    let And(sgl, subs) = g.as_ref() else {
        return None;
    };
    if !matches!(sgl.as_ref(), Sgl(w) if w == u0) {
        return None;
    }
    let And(sx, sy) = subs.as_ref() else {
        return None;
    };
    let (Sub(w1, x), Sub(w2, y)) = (sx.as_ref(), sy.as_ref()) else {
        return None;
    };
    if w1 != u0 || w2 != u0 || x == y || x == u0 || y == u0 {
        return None;
    }

    // Forall u (Forall v (Edg u v → edge-ok)).
    let Forall(u, g) = no_bad.as_ref() else {
        return None;
    };
    let Forall(v, g) = g.as_ref() else {
        return None;
    };
    if u == v || u == x || u == y || v == x || v == y {
        return None;
    }
    let Implies(edg, ok) = g.as_ref() else {
        return None;
    };
    if !matches!(edg.as_ref(), Edg(a, b) if a == u && b == v) {
        return None;
    }

    // edge-ok: ¬mono(x) ∧ (¬mono(y) ∧ ¬(uncolored(u) ∧ uncolored(v))).
    let mono = |g: &Formula, s: &str| match g {
        And(a, b) => is_sub(a, u, s) && is_sub(b, v, s),
        _ => false,
    };
    let uncolored = |g: &Formula, w: &str| match g {
        And(a, b) => match (a.as_ref(), b.as_ref()) {
            (Not(p), Not(q)) => is_sub(p, w, x) && is_sub(q, w, y),
            _ => false,
        },
        _ => false,
    };
    let And(nmx, rest) = ok.as_ref() else {
        return None;
    };
    if !matches!(nmx.as_ref(), Not(g) if mono(g, x)) {
        return None;
    }
    let And(nmy, nun) = rest.as_ref() else {
        return None;
    };
    if !matches!(nmy.as_ref(), Not(g) if mono(g, y)) {
        return None;
    }
    let Not(g) = nun.as_ref() else {
        return None;
    };
    let And(p, q) = g.as_ref() else {
        return None;
    };
    if !(uncolored(p, u) && uncolored(q, v)) {
        return None;
    }
    Some((x.as_str(), y.as_str()))
}

/// Core recursion. Every subformula is compiled at the smallest width it
/// needs (the largest variable index it reads), not at the width of the
/// full environment; `combine` and `exists_chain` pad on demand. The
/// environment grows rightward, so indices of outer variables are stable.
fn compile_env(f: &Formula, env: &mut Vec<String>) -> Result<Dfa, MsoError> {
    let depth = env.len();
    // The `col` shorthand expands to a fixed ∀∀-shape whose generic
    // compilation builds much larger subset states than necessary.
    // Recognize the shape and lower it to the specialized checker; the
    // tests compare both routes against the brute-force oracle.
    if let Some((x, y)) = match_col(f) {
        let d = handbuilt::col3_dfa();
        return Ok(select_two_bits(&d, index_of(env, x)?, index_of(env, y)?));
    }
    match f {
        Formula::Sub(x, y) => Ok(atomic_sub(index_of(env, x)?, index_of(env, y)?)),
        Formula::Sgl(x) => Ok(atomic_sgl(index_of(env, x)?)),
        Formula::Edg(x, y) => Ok(atomic_edg(index_of(env, x)?, index_of(env, y)?)),
        Formula::CardP(p, x) => Ok(atomic_cardp(*p, index_of(env, x)?)),
        Formula::CardMod(p, q, x) => atomic_cardmod(*p, *q, index_of(env, x)?),
        Formula::Partition(xs) => {
            let indices = xs
                .iter()
                .map(|x| index_of(env, x))
                .collect::<Result<Vec<_>, _>>()?;
            atomic_partition(indices)
        }
        Formula::Not(g) => Ok(compile_env(g, env)?.complement()),
        Formula::And(g, h) => combine(env, g, h, |a, b| a && b),
        Formula::Or(g, h) => combine(env, g, h, |a, b| a || b),
        Formula::Implies(g, h) => combine(env, g, h, |a, b| !a || b),
        Formula::Exists(x, g) => {
            // Absorb a maximal ∃x1∃x2… block into one subset construction.
            let mut inner: &Formula = g;
            env.push(x.clone());
            while let Formula::Exists(y, h) = inner {
                env.push(y.clone());
                inner = h;
            }
            let body = compile_env(inner, env);
            let w = env.len();
            let k = w - depth;
            env.truncate(depth);
            exists_chain(&body?, w, k)
        }
        Formula::Forall(x, g) => {
            // ∀x1∀x2….g as ¬∃x1∃x2….¬g.
            let mut inner: &Formula = g;
            env.push(x.clone());
            while let Formula::Forall(y, h) = inner {
                env.push(y.clone());
                inner = h;
            }
            let body = compile_env(inner, env);
            let w = env.len();
            let k = w - depth;
            env.truncate(depth);
            Ok(exists_chain(&body?.complement(), w, k)?.complement())
        }
    }
}

// ============================================================================
// Hand-built reference automata for proper 3-colorings
// ============================================================================

/// Fly automata for proper 3-colorings, written out by hand rather than
/// compiled from a formula. They serve as independent references for the
/// compiler and as fast solvers: their states stay small because they track
/// only which (port label, color) combinations occur.
pub mod handbuilt {
    use super::*;

    pub fn color_pair(a: PortLabel, color: u64) -> StateValue {
        StateValue::pair(StateValue::Label(a), StateValue::Nat(color))
    }

    fn cset_union(l: &StateValue, r: &StateValue) -> StateValue {
        let mut members = l.as_set().to_vec();
        members.extend_from_slice(r.as_set());
        StateValue::set(members)
    }

    /// Do the two labels share a color in this set of (label, color) pairs?
    fn cset_clash(q: &StateValue, a: PortLabel, b: PortLabel) -> bool {
        let members = q.as_set();
        (1..=3).any(|color| {
            members.contains(&color_pair(a, color)) && members.contains(&color_pair(b, color))
        })
    }

    fn cset_rename(q: &StateValue, a: PortLabel, b: PortLabel) -> StateValue {
        StateValue::set(
            q.as_set()
                .iter()
                .map(|m| match m {
                    StateValue::Pair(l, color) if **l == StateValue::Label(a) => {
                        StateValue::Pair(Box::new(StateValue::Label(b)), color.clone())
                    }
                    other => other.clone(),
                })
                .collect(),
        )
    }

    /// Decides whether the assignment (X = color 1, Y = color 2, rest =
    /// color 3) is a proper 3-coloring. Width 2; the state is the set of
    /// (port label, color) pairs in use, or an absorbing error.
    pub fn col3_dfa() -> Dfa {
        Dfa::new(
            2,
            Arc::new(|sym, args| match sym {
                Symbol::AnnotatedLeaf(a, w) => match (w.get(0), w.get(1)) {
                    (false, false) => StateValue::set(vec![color_pair(*a, 3)]),
                    (true, false) => StateValue::set(vec![color_pair(*a, 1)]),
                    (false, true) => StateValue::set(vec![color_pair(*a, 2)]),
                    (true, true) => ERROR,
                },
                Symbol::Oplus => {
                    if any_error(args) {
                        ERROR
                    } else {
                        cset_union(&args[0], &args[1])
                    }
                }
                Symbol::Add(a, b) => {
                    if any_error(args) || cset_clash(&args[0], *a, *b) {
                        ERROR
                    } else {
                        args[0].clone()
                    }
                }
                Symbol::Relab(a, b) => {
                    if any_error(args) {
                        ERROR
                    } else {
                        cset_rename(&args[0], *a, *b)
                    }
                }
                Symbol::Leaf(_) => panic!("annotated automaton read {sym}"),
            }),
            Arc::new(|q| *q != ERROR),
        )
    }

    /// The existential projection of [`col3_dfa`], built directly: a width-0
    /// nondeterministic automaton that guesses each leaf's color and accepts
    /// iff the graph is 3-colorable. The error state is gone — a conflicting
    /// edge addition simply has no successor.
    pub fn col3_nfa() -> Nfa {
        Nfa::new(
            0,
            Arc::new(|sym, args| match sym {
                Symbol::Leaf(a) => (1..=3)
                    .map(|color| StateValue::set(vec![color_pair(*a, color)]))
                    .collect(),
                Symbol::Oplus => vec![cset_union(&args[0], &args[1])],
                Symbol::Add(a, b) => {
                    if cset_clash(&args[0], *a, *b) {
                        vec![]
                    } else {
                        vec![args[0].clone()]
                    }
                }
                Symbol::Relab(a, b) => vec![cset_rename(&args[0], *a, *b)],
                Symbol::AnnotatedLeaf(_, _) => panic!("plain automaton read {sym}"),
            }),
            Arc::new(|_| true),
        )
    }

    /// [`col3_dfa`] extended to carry |X| through the run, so the root state
    /// of an accepted term also tells how many vertices got color 1.
    pub fn col3_card_dfa() -> Dfa {
        fn parts(q: &StateValue) -> (&StateValue, u64) {
            match q {
                StateValue::Pair(set, n) => match **n {
                    StateValue::Nat(n) => (set, n),
                    _ => panic!("unexpected state {q}"),
                },
                _ => panic!("unexpected state {q}"),
            }
        }
        Dfa::new(
            2,
            Arc::new(|sym, args| match sym {
                Symbol::AnnotatedLeaf(a, w) => match (w.get(0), w.get(1)) {
                    (false, false) => {
                        StateValue::pair(StateValue::set(vec![color_pair(*a, 3)]), StateValue::Nat(0))
                    }
                    (true, false) => {
                        StateValue::pair(StateValue::set(vec![color_pair(*a, 1)]), StateValue::Nat(1))
                    }
                    (false, true) => {
                        StateValue::pair(StateValue::set(vec![color_pair(*a, 2)]), StateValue::Nat(0))
                    }
                    (true, true) => ERROR,
                },
                Symbol::Oplus => {
                    if any_error(args) {
                        return ERROR;
                    }
                    let (ls, ln) = parts(&args[0]);
                    let (rs, rn) = parts(&args[1]);
                    StateValue::pair(cset_union(ls, rs), StateValue::Nat(ln + rn))
                }
                Symbol::Add(a, b) => {
                    if any_error(args) {
                        return ERROR;
                    }
                    let (set, _) = parts(&args[0]);
                    if cset_clash(set, *a, *b) {
                        ERROR
                    } else {
                        args[0].clone()
                    }
                }
                Symbol::Relab(a, b) => {
                    if any_error(args) {
                        return ERROR;
                    }
                    let (set, n) = parts(&args[0]);
                    StateValue::pair(cset_rename(set, *a, *b), StateValue::Nat(n))
                }
                Symbol::Leaf(_) => panic!("annotated automaton read {sym}"),
            }),
            Arc::new(|q| *q != ERROR),
        )
    }

    /// Minimizes |X| (the color-1 class) over all proper 3-colorings, on
    /// plain terms. The state maps each reachable set of (label, color)
    /// pairs to the fewest color-1 vertices realizing it; the output is the
    /// overall minimum, infinite when the graph is not 3-colorable.
    pub fn col3_min_card() -> OutputDfa<Tropical> {
        fn unpack(q: &StateValue) -> Vec<(StateValue, u64)> {
            q.as_map()
                .iter()
                .map(|(k, v)| match v {
                    StateValue::Nat(n) => (k.clone(), *n),
                    _ => panic!("unexpected state {q}"),
                })
                .collect()
        }
        fn pack(entries: BTreeMap<StateValue, u64>) -> StateValue {
            StateValue::map(
                entries
                    .into_iter()
                    .map(|(k, n)| (k, StateValue::Nat(n)))
                    .collect(),
            )
        }
        fn min_insert(entries: &mut BTreeMap<StateValue, u64>, k: StateValue, n: u64) {
            entries
                .entry(k)
                .and_modify(|old| *old = (*old).min(n))
                .or_insert(n);
        }
        OutputDfa::new(
            0,
            Arc::new(|sym, args| match sym {
                Symbol::Leaf(a) => pack(BTreeMap::from([
                    (StateValue::set(vec![color_pair(*a, 1)]), 1),
                    (StateValue::set(vec![color_pair(*a, 2)]), 0),
                    (StateValue::set(vec![color_pair(*a, 3)]), 0),
                ])),
                Symbol::Oplus => {
                    let mut out = BTreeMap::new();
                    for (ls, ln) in unpack(&args[0]) {
                        for (rs, rn) in unpack(&args[1]) {
                            min_insert(&mut out, cset_union(&ls, &rs), ln + rn);
                        }
                    }
                    pack(out)
                }
                Symbol::Add(a, b) => pack(
                    unpack(&args[0])
                        .into_iter()
                        .filter(|(set, _)| !cset_clash(set, *a, *b))
                        .collect(),
                ),
                Symbol::Relab(a, b) => {
                    let mut out = BTreeMap::new();
                    for (set, n) in unpack(&args[0]) {
                        min_insert(&mut out, cset_rename(&set, *a, *b), n);
                    }
                    pack(out)
                }
                Symbol::AnnotatedLeaf(_, _) => panic!("plain automaton read {sym}"),
            }),
            Arc::new(|q| {
                q.as_map()
                    .iter()
                    .map(|(_, v)| match v {
                        StateValue::Nat(n) => Tropical::Finite(*n),
                        _ => panic!("unexpected state {q}"),
                    })
                    .min()
                    .unwrap_or(Tropical::Infinity)
            }),
        )
    }
}

// ============================================================================
// Parsing
// ============================================================================

#[derive(Clone, Debug)]
enum Token {
    Open,
    Close,
    Atom(String),
}

struct Lexer<'a> {
    src: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Lexer<'a> {
        Lexer {
            src: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.src.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Next token with the position where it starts. `#` comments run to end
    /// of line.
    fn next_token(&mut self) -> Option<(Token, usize, usize)> {
        loop {
            match self.src.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let c = *self.src.peek()?;
        match c {
            '(' => {
                self.bump();
                Some((Token::Open, line, col))
            }
            ')' => {
                self.bump();
                Some((Token::Close, line, col))
            }
            _ => {
                let mut atom = String::new();
                while let Some(&c) = self.src.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '#' {
                        break;
                    }
                    atom.push(c);
                    self.bump();
                }
                Some((Token::Atom(atom), line, col))
            }
        }
    }
}

struct FormulaParser {
    tokens: Vec<(Token, usize, usize)>,
    pos: usize,
    /// Counter for macro-generated bound variables. The generated names
    /// contain `#`, which the lexer cannot produce inside one atom, so they
    /// never collide with user variables.
    gensym: usize,
}

impl FormulaParser {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormulaParseError> {
        let (line, col) = self
            .tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((1, 1));
        Err(FormulaParseError {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos).map(|(t, _, _)| t);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_close(&mut self) -> Result<(), FormulaParseError> {
        match self.next() {
            Some(Token::Close) => Ok(()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected `)`")
            }
        }
    }

    fn atom(&mut self, what: &str) -> Result<String, FormulaParseError> {
        match self.next() {
            Some(Token::Atom(a)) => Ok(a.clone()),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected {what}"))
            }
        }
    }

    fn variable(&mut self) -> Result<String, FormulaParseError> {
        let a = self.atom("a set variable")?;
        let mut chars = a.chars();
        let head_ok = chars
            .next()
            .map(|c| c.is_ascii_alphabetic() || c == '_')
            .unwrap_or(false);
        let tail_ok = a.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
        if !head_ok || !tail_ok {
            self.pos -= 1;
            return self.err(format!("bad variable name {a:?}"));
        }
        Ok(a)
    }

    fn nat(&mut self, what: &str) -> Result<u64, FormulaParseError> {
        let a = self.atom(what)?;
        match a.parse::<u64>() {
            Ok(n) => Ok(n),
            Err(_) => {
                self.pos -= 1;
                self.err(format!("expected {what}, got {a:?}"))
            }
        }
    }

    fn fresh(&mut self, stem: &str) -> String {
        let n = self.gensym;
        self.gensym += 1;
        format!("{stem}#{n}")
    }

    fn formula(&mut self) -> Result<Formula, FormulaParseError> {
        match self.next() {
            Some(Token::Open) => {}
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return self.err("expected `(`");
            }
        }
        let head = self.atom("an operator")?;
        let f = match head.as_str() {
            "sub" => Formula::Sub(self.variable()?, self.variable()?),
            "sgl" => Formula::Sgl(self.variable()?),
            "edg" => Formula::Edg(self.variable()?, self.variable()?),
            "cardp" => Formula::CardP(self.nat("a cardinality")?, self.variable()?),
            "cardmod" => {
                let p = self.nat("a residue")?;
                let q = self.nat("a modulus")?;
                if q == 0 || p >= q {
                    self.pos -= 2;
                    return self.err(format!("need 0 <= p < q, got p={p} q={q}"));
                }
                Formula::CardMod(p, q, self.variable()?)
            }
            "partition" => {
                let mut xs = vec![self.variable()?];
                while matches!(self.tokens.get(self.pos), Some((Token::Atom(_), _, _))) {
                    xs.push(self.variable()?);
                }
                Formula::Partition(xs)
            }
            "not" => Formula::Not(Box::new(self.formula()?)),
            "and" => Formula::And(Box::new(self.formula()?), Box::new(self.formula()?)),
            "or" => Formula::Or(Box::new(self.formula()?), Box::new(self.formula()?)),
            "implies" => {
                Formula::Implies(Box::new(self.formula()?), Box::new(self.formula()?))
            }
            "exists" => Formula::Exists(self.variable()?, Box::new(self.formula()?)),
            "forall" => Formula::Forall(self.variable()?, Box::new(self.formula()?)),
            "col" => {
                let x = self.variable()?;
                let y = self.variable()?;
                self.col_macro(&x, &y)
            }
            "3colorable" => {
                let x = self.fresh("X");
                let y = self.fresh("Y");
                let body = self.col_macro(&x, &y);
                Formula::Exists(x, Box::new(Formula::Exists(y, Box::new(body))))
            }
            other => {
                self.pos -= 1;
                return self.err(format!("unknown operator {other:?}"));
            }
        };
        self.expect_close()?;
        Ok(f)
    }

    /// `(col X Y)`: X, Y and the remaining vertices form a proper
    /// 3-coloring. Spelled out: X and Y are disjoint, and no edge joins two
    /// X-vertices, two Y-vertices, or two vertices lying in neither set.
    fn col_macro(&mut self, x: &str, y: &str) -> Formula {
        let u = self.fresh("u");
        let v = self.fresh("v");
        let in_set = |w: &str, s: &str| Formula::Sub(w.to_string(), s.to_string());
        let disjoint = Formula::Not(Box::new(Formula::Exists(
            u.clone(),
            Box::new(Formula::And(
                Box::new(Formula::Sgl(u.clone())),
                Box::new(Formula::And(
                    Box::new(in_set(&u, x)),
                    Box::new(in_set(&u, y)),
                )),
            )),
        )));
        let mono = |s: &str| {
            Formula::And(
                Box::new(in_set(&u, s)),
                Box::new(in_set(&v, s)),
            )
        };
        let uncolored = |w: &str| {
            Formula::And(
                Box::new(Formula::Not(Box::new(in_set(w, x)))),
                Box::new(Formula::Not(Box::new(in_set(w, y)))),
            )
        };
        let edge_ok = Formula::And(
            Box::new(Formula::Not(Box::new(mono(x)))),
            Box::new(Formula::And(
                Box::new(Formula::Not(Box::new(mono(y)))),
                Box::new(Formula::Not(Box::new(Formula::And(
                    Box::new(uncolored(&u)),
                    Box::new(uncolored(&v)),
                )))),
            )),
        );
        let no_bad_edge = Formula::Forall(
            u.clone(),
            Box::new(Formula::Forall(
                v.clone(),
                Box::new(Formula::Implies(
                    Box::new(Formula::Edg(u.clone(), v.clone())),
                    Box::new(edge_ok),
                )),
            )),
        );
        Formula::And(Box::new(disjoint), Box::new(no_bad_edge))
    }
}

/// Parses one formula. `#` starts a comment running to end of line.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaParseError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    while let Some(t) = lexer.next_token() {
        tokens.push(t);
    }
    let mut p = FormulaParser {
        tokens,
        pos: 0,
        gensym: 0,
    };
    let f = p.formula()?;
    if p.pos != p.tokens.len() {
        return p.err("trailing content after the formula");
    }
    Ok(f)
}
