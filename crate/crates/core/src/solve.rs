//! Weighted runs and solvers built on top of fly automata.
//!
//! A deterministic automaton over annotated terms decides one assignment at
//! a time. To aggregate over *all* assignments of a plain term — counting
//! them, collecting cardinality spectra, or minimizing a cardinality — the
//! run is generalized to a weighted one: instead of a single state it
//! carries a map from states to semiring elements, and each leaf enumerates
//! its 2^m possible annotations locally. One pass over the term then
//! computes the aggregate, because disjoint union splits every assignment
//! into independent halves (a product in the semiring) while alternatives
//! accumulate by semiring addition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::fa::{Dfa, FaError, Nfa, StateValue, Symbol};
use crate::pgraph::PortLabel;
use crate::term::{check_irredundant, Bits, Irredundancy, Position, Term};

/// Hard cap on the number of set variables a weighted run will enumerate
/// per leaf (the work per leaf is 2^m).
pub const MAX_ENUMERATED_VARS: usize = 24;

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Fa(#[from] FaError),
    #[error("weighted evaluation enumerates annotations itself; pass a plain term")]
    AnnotatedTerm,
    #[error("cardinality minimization needs at least one set variable")]
    NoVariables,
    #[error("term is not irredundant: the add at {0} repeats an edge")]
    RedundantTerm(Position),
    #[error("refusing to enumerate {0} set variables per leaf (limit {MAX_ENUMERATED_VARS})")]
    TooManyVariables(usize),
}

// ============================================================================
// The tropical value domain
// ============================================================================

/// Naturals extended with infinity, ordered with `Infinity` on top.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Tropical {
    Finite(u64),
    Infinity,
}

impl Tropical {
    pub fn plus(self, other: Tropical) -> Tropical {
        match (self, other) {
            (Tropical::Finite(a), Tropical::Finite(b)) => Tropical::Finite(a.saturating_add(b)),
            _ => Tropical::Infinity,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Tropical::Finite(_))
    }
}

impl fmt::Display for Tropical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tropical::Finite(n) => write!(f, "{n}"),
            Tropical::Infinity => write!(f, "infinity"),
        }
    }
}

// ============================================================================
// Semirings
// ============================================================================

/// A commutative semiring together with the weight it assigns to a single
/// leaf annotation. Instances carry runtime data (e.g. the number of set
/// variables), hence the `&self` methods.
pub trait Semiring {
    type Elem: Clone + Eq + Ord + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Weight contributed by one leaf carrying `bits`.
    fn leaf_weight(&self, bits: &Bits) -> Self::Elem;
}

/// Counts assignments: ordinary arithmetic over big naturals.
pub struct CountingSemiring;

impl Semiring for CountingSemiring {
    type Elem = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one()
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a + b
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b
    }
    fn leaf_weight(&self, _bits: &Bits) -> BigUint {
        BigUint::one()
    }
}

/// Decides satisfiability: the two-element semiring (or, and).
pub struct BoolSemiring;

impl Semiring for BoolSemiring {
    type Elem = bool;

    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn add(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn mul(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn leaf_weight(&self, _bits: &Bits) -> bool {
        true
    }
}

/// Collects the set of cardinality vectors (|X1|, ..., |Xs|) of accepted
/// assignments. Multiplication is pointwise sum of vectors, lifted to sets.
pub struct SpectrumSemiring {
    pub arity: usize,
}

impl Semiring for SpectrumSemiring {
    type Elem = BTreeSet<Vec<u64>>;

    fn zero(&self) -> Self::Elem {
        BTreeSet::new()
    }
    fn one(&self) -> Self::Elem {
        BTreeSet::from([vec![0; self.arity]])
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.union(b).cloned().collect()
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let mut out = BTreeSet::new();
        for x in a {
            for y in b {
                out.insert(x.iter().zip(y).map(|(p, q)| p + q).collect());
            }
        }
        out
    }
    fn leaf_weight(&self, bits: &Bits) -> Self::Elem {
        BTreeSet::from([bits.iter().map(u64::from).collect()])
    }
}

/// Like [`SpectrumSemiring`], but remembers how many assignments attain each
/// cardinality vector. Multiplication is the convolution of the two maps.
pub struct MultispectrumSemiring {
    pub arity: usize,
}

impl Semiring for MultispectrumSemiring {
    type Elem = BTreeMap<Vec<u64>, BigUint>;

    fn zero(&self) -> Self::Elem {
        BTreeMap::new()
    }
    fn one(&self) -> Self::Elem {
        BTreeMap::from([(vec![0; self.arity], BigUint::one())])
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let mut out = a.clone();
        for (k, v) in b {
            *out.entry(k.clone()).or_insert_with(BigUint::zero) += v;
        }
        out
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let mut out: Self::Elem = BTreeMap::new();
        for (x, c) in a {
            for (y, d) in b {
                let key: Vec<u64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
                *out.entry(key).or_insert_with(BigUint::zero) += c * d;
            }
        }
        out
    }
    fn leaf_weight(&self, bits: &Bits) -> Self::Elem {
        BTreeMap::from([(bits.iter().map(u64::from).collect(), BigUint::one())])
    }
}

/// Minimizes |X1| over accepted assignments: (min, +) over [`Tropical`].
pub struct TropicalSemiring;

impl Semiring for TropicalSemiring {
    type Elem = Tropical;

    fn zero(&self) -> Tropical {
        Tropical::Infinity
    }
    fn one(&self) -> Tropical {
        Tropical::Finite(0)
    }
    fn add(&self, a: &Tropical, b: &Tropical) -> Tropical {
        *a.min(b)
    }
    fn mul(&self, a: &Tropical, b: &Tropical) -> Tropical {
        a.plus(*b)
    }
    fn leaf_weight(&self, bits: &Bits) -> Tropical {
        Tropical::Finite(u64::from(bits.get(0)))
    }
}

// ============================================================================
// Weighted runs
// ============================================================================

fn enumerate_annotations(m: usize) -> Vec<Bits> {
    (0u64..(1 << m))
        .map(|mask| Bits::new((0..m).map(|i| mask >> i & 1 == 1).collect()))
        .collect()
}

/// Runs `dfa` over all 2^(m·n) annotated variants of the plain term `t` in
/// one pass, returning for every root state the semiring total of the
/// weights of the assignments that reach it.
pub fn weighted_run<S: Semiring>(
    sr: &S,
    dfa: &Dfa,
    t: &Term,
) -> Result<BTreeMap<StateValue, S::Elem>, SolveError> {
    if t.annotation_width().map_err(FaError::from)? != 0 {
        return Err(SolveError::AnnotatedTerm);
    }
    let m = dfa.num_vars();
    if m > MAX_ENUMERATED_VARS {
        return Err(SolveError::TooManyVariables(m));
    }
    let annotations = enumerate_annotations(m);

    fn walk<S: Semiring>(
        sr: &S,
        dfa: &Dfa,
        annotations: &[Bits],
        t: &Term,
    ) -> BTreeMap<StateValue, S::Elem> {
        let mut out: BTreeMap<StateValue, S::Elem> = BTreeMap::new();
        let mut put = |q: StateValue, w: S::Elem| match out.entry(q) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(w);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = sr.add(e.get(), &w);
                e.insert(sum);
            }
        };
        match t {
            Term::Oplus(l, r) => {
                let ls = walk(sr, dfa, annotations, l);
                let rs = walk(sr, dfa, annotations, r);
                for (ql, wl) in &ls {
                    for (qr, wr) in &rs {
                        put(
                            dfa.step(&Symbol::Oplus, &[ql.clone(), qr.clone()]),
                            sr.mul(wl, wr),
                        );
                    }
                }
            }
            Term::Relab(_, _, s) | Term::Add(_, _, s) => {
                let sym = Symbol::from(t);
                for (q, w) in walk(sr, dfa, annotations, s) {
                    put(dfa.step(&sym, std::slice::from_ref(&q)), w.clone());
                }
            }
            Term::Leaf(a) => {
                if annotations.len() == 1 {
                    put(dfa.step(&Symbol::Leaf(*a), &[]), sr.one());
                } else {
                    for bits in annotations {
                        put(
                            dfa.step(&Symbol::AnnotatedLeaf(*a, bits.clone()), &[]),
                            sr.leaf_weight(bits),
                        );
                    }
                }
            }
            Term::AnnotatedLeaf(_, _) => unreachable!("term checked plain"),
        }
        out
    }

    Ok(walk(sr, dfa, &annotations, t))
}

fn accepting_total<S: Semiring>(
    sr: &S,
    dfa: &Dfa,
    states: BTreeMap<StateValue, S::Elem>,
) -> S::Elem {
    states
        .into_iter()
        .filter(|(q, _)| dfa.is_accepting(q))
        .fold(sr.zero(), |acc, (_, w)| sr.add(&acc, &w))
}

/// Number of assignments of the automaton's set variables accepted on `t`.
pub fn count_assignments(dfa: &Dfa, t: &Term) -> Result<BigUint, SolveError> {
    let sr = CountingSemiring;
    Ok(accepting_total(&sr, dfa, weighted_run(&sr, dfa, t)?))
}

/// Whether at least one assignment is accepted on `t`.
pub fn check_sat(dfa: &Dfa, t: &Term) -> Result<bool, SolveError> {
    let sr = BoolSemiring;
    Ok(accepting_total(&sr, dfa, weighted_run(&sr, dfa, t)?))
}

/// All cardinality vectors (|X1|, ..., |Xm|) of accepted assignments.
pub fn spectrum(dfa: &Dfa, t: &Term) -> Result<BTreeSet<Vec<u64>>, SolveError> {
    let sr = SpectrumSemiring {
        arity: dfa.num_vars(),
    };
    Ok(accepting_total(&sr, dfa, weighted_run(&sr, dfa, t)?))
}

/// The spectrum with multiplicities: how many accepted assignments attain
/// each cardinality vector.
pub fn multispectrum(dfa: &Dfa, t: &Term) -> Result<BTreeMap<Vec<u64>, BigUint>, SolveError> {
    let sr = MultispectrumSemiring {
        arity: dfa.num_vars(),
    };
    Ok(accepting_total(&sr, dfa, weighted_run(&sr, dfa, t)?))
}

/// Minimum |X1| over accepted assignments; `Infinity` when none is.
pub fn min_card(dfa: &Dfa, t: &Term) -> Result<Tropical, SolveError> {
    if dfa.num_vars() == 0 {
        return Err(SolveError::NoVariables);
    }
    let sr = TropicalSemiring;
    Ok(accepting_total(&sr, dfa, weighted_run(&sr, dfa, t)?))
}

// ============================================================================
// Counting runs of a nondeterministic automaton
// ============================================================================

/// Number of accepting runs of `nfa` on `t`. A run chooses one state per
/// position consistent with the transition relation; two runs are the same
/// exactly when they choose the same states.
pub fn count_accepting_runs(nfa: &Nfa, t: &Term) -> Result<BigUint, SolveError> {
    let width = t.annotation_width().map_err(FaError::from)?;
    if width != nfa.num_vars() {
        return Err(SolveError::Fa(FaError::SignatureMismatch {
            automaton_vars: nfa.num_vars(),
            term_vars: width,
        }));
    }

    fn walk(nfa: &Nfa, t: &Term) -> BTreeMap<StateValue, BigUint> {
        let sym = Symbol::from(t);
        let mut out: BTreeMap<StateValue, BigUint> = BTreeMap::new();
        let mut put = |succs: Vec<StateValue>, ways: BigUint| {
            // The successor list is deduplicated: a run is determined by the
            // chosen states, not by how the transition function listed them.
            let succs: BTreeSet<StateValue> = succs.into_iter().collect();
            for q in succs {
                *out.entry(q).or_insert_with(BigUint::zero) += &ways;
            }
        };
        match t {
            Term::Oplus(l, r) => {
                let ls = walk(nfa, l);
                let rs = walk(nfa, r);
                for (ql, wl) in &ls {
                    for (qr, wr) in &rs {
                        put(nfa.step(&sym, &[ql.clone(), qr.clone()]), wl * wr);
                    }
                }
            }
            Term::Relab(_, _, s) | Term::Add(_, _, s) => {
                for (q, w) in walk(nfa, s) {
                    put(nfa.step(&sym, std::slice::from_ref(&q)), w);
                }
            }
            Term::Leaf(_) | Term::AnnotatedLeaf(_, _) => {
                put(nfa.step(&sym, &[]), BigUint::one());
            }
        }
        out
    }

    Ok(walk(nfa, t)
        .into_iter()
        .filter(|(q, _)| nfa.is_accepting(q))
        .fold(BigUint::zero(), |acc, (_, w)| acc + w))
}

// ============================================================================
// Regularity, a degree-counting fly automaton
// ============================================================================

/// A deterministic fly automaton over plain irredundant terms whose root
/// state records, per port label, the number of vertices and the histogram
/// of their degrees. Its state space is unbounded — exactly the situation
/// computed transitions are for.
pub fn degree_census_dfa() -> Dfa {
    fn nat(q: &StateValue) -> u64 {
        match q {
            StateValue::Nat(n) => *n,
            other => panic!("expected a number, got {other}"),
        }
    }
    // State: Map label -> Pair(vertex count, Map degree -> vertex count).
    fn entries(q: &StateValue) -> BTreeMap<StateValue, (u64, BTreeMap<u64, u64>)> {
        q.as_map()
            .iter()
            .map(|(label, v)| match v {
                StateValue::Pair(count, hist) => {
                    let hist = hist
                        .as_map()
                        .iter()
                        .map(|(deg, c)| (nat(deg), nat(c)))
                        .collect();
                    (label.clone(), (nat(count), hist))
                }
                other => panic!("expected a pair, got {other}"),
            })
            .collect()
    }
    fn pack(entries: BTreeMap<StateValue, (u64, BTreeMap<u64, u64>)>) -> StateValue {
        StateValue::map(
            entries
                .into_iter()
                .map(|(label, (count, hist))| {
                    (
                        label,
                        StateValue::pair(
                            StateValue::Nat(count),
                            StateValue::map(
                                hist.into_iter()
                                    .map(|(d, c)| (StateValue::Nat(d), StateValue::Nat(c)))
                                    .collect(),
                            ),
                        ),
                    )
                })
                .collect(),
        )
    }

    let delta = Arc::new(|sym: &Symbol, args: &[StateValue]| match sym {
        Symbol::Leaf(a) | Symbol::AnnotatedLeaf(a, _) => pack(BTreeMap::from([(
            StateValue::Label(*a),
            (1, BTreeMap::from([(0, 1)])),
        )])),
        Symbol::Oplus => {
            let mut merged = entries(&args[0]);
            for (label, (count, hist)) in entries(&args[1]) {
                let slot = merged.entry(label).or_insert((0, BTreeMap::new()));
                slot.0 += count;
                for (d, c) in hist {
                    *slot.1.entry(d).or_insert(0) += c;
                }
            }
            pack(merged)
        }
        Symbol::Add(a, b) => {
            let mut map = entries(&args[0]);
            let na = map.get(&StateValue::Label(*a)).map_or(0, |e| e.0);
            let nb = map.get(&StateValue::Label(*b)).map_or(0, |e| e.0);
            // Irredundant terms add every cross edge fresh, so each a-vertex
            // gains exactly nb neighbors and vice versa.
            let mut shift = |label: PortLabel, by: u64| {
                if by == 0 {
                    return;
                }
                if let Some((_, hist)) = map.get_mut(&StateValue::Label(label)) {
                    *hist = hist.iter().map(|(d, c)| (d + by, *c)).collect();
                }
            };
            shift(*a, nb);
            shift(*b, na);
            pack(map)
        }
        Symbol::Relab(a, b) => {
            let mut map = entries(&args[0]);
            if let Some((count, hist)) = map.remove(&StateValue::Label(*a)) {
                let slot = map
                    .entry(StateValue::Label(*b))
                    .or_insert((0, BTreeMap::new()));
                slot.0 += count;
                for (d, c) in hist {
                    *slot.1.entry(d).or_insert(0) += c;
                }
            }
            pack(map)
        }
    });
    let accepting = Arc::new(|q: &StateValue| {
        let mut degrees = BTreeSet::new();
        for (_, v) in q.as_map() {
            match v {
                StateValue::Pair(_, hist) => {
                    for (d, _) in hist.as_map() {
                        degrees.insert(d.clone());
                    }
                }
                other => panic!("expected a pair, got {other}"),
            }
        }
        degrees.len() <= 1
    });
    Dfa::new(0, delta, accepting)
}

/// Whether `t` evaluates to a regular graph (all degrees equal). The term
/// must be plain and irredundant; the degree bookkeeping depends on every
/// added edge being new.
pub fn regular_check(t: &Term) -> Result<bool, SolveError> {
    if t.annotation_width().map_err(FaError::from)? != 0 {
        return Err(SolveError::AnnotatedTerm);
    }
    if let Irredundancy::RedundantAt(p) = check_irredundant(t) {
        return Err(SolveError::RedundantTerm(p));
    }
    Ok(degree_census_dfa().accepts(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgraph::{GraphFamily, PGraph};
    use crate::term::{gen_term, parse_term, term_from_graph};

    /// Accepts annotated terms (m = 1) whose variable holds exactly one
    /// vertex. States: Nat(0), Nat(1), Nat(2) ("two or more").
    fn exactly_one_marked() -> Dfa {
        Dfa::new(
            1,
            Arc::new(|sym, args| {
                let total: u64 = args
                    .iter()
                    .map(|q| match q {
                        StateValue::Nat(n) => *n,
                        other => panic!("unexpected state {other}"),
                    })
                    .sum();
                match sym {
                    Symbol::AnnotatedLeaf(_, bits) => StateValue::Nat(u64::from(bits.get(0))),
                    Symbol::Leaf(_) => panic!("automaton reads annotated leaves"),
                    _ => StateValue::Nat(total.min(2)),
                }
            }),
            Arc::new(|q| *q == StateValue::Nat(1)),
        )
    }

    fn three_leaves() -> Term {
        parse_term("add(1,2,oplus(port(1),oplus(port(2),port(2))))").unwrap()
    }

    #[test]
    fn counting_singletons_over_three_leaves() {
        let dfa = exactly_one_marked();
        let t = three_leaves();
        assert_eq!(count_assignments(&dfa, &t).unwrap(), BigUint::from(3u32));
        assert!(check_sat(&dfa, &t).unwrap());
        assert_eq!(spectrum(&dfa, &t).unwrap(), BTreeSet::from([vec![1]]));
        assert_eq!(
            multispectrum(&dfa, &t).unwrap(),
            BTreeMap::from([(vec![1], BigUint::from(3u32))])
        );
        assert_eq!(min_card(&dfa, &t).unwrap(), Tropical::Finite(1));
    }

    #[test]
    fn unsatisfiable_automata_yield_empty_aggregates() {
        let never = Dfa::new(
            1,
            Arc::new(|_, _| StateValue::Atom("dead")),
            Arc::new(|_| false),
        );
        let t = three_leaves();
        assert_eq!(count_assignments(&never, &t).unwrap(), BigUint::zero());
        assert!(!check_sat(&never, &t).unwrap());
        assert!(spectrum(&never, &t).unwrap().is_empty());
        assert!(multispectrum(&never, &t).unwrap().is_empty());
        assert_eq!(min_card(&never, &t).unwrap(), Tropical::Infinity);
    }

    #[test]
    fn weighted_run_rejects_annotated_terms_and_wide_automata() {
        let t = parse_term("port(1,[1])").unwrap();
        assert!(matches!(
            count_assignments(&exactly_one_marked(), &t),
            Err(SolveError::AnnotatedTerm)
        ));
        let wide = Dfa::new(
            MAX_ENUMERATED_VARS + 1,
            Arc::new(|_, _| StateValue::Nat(0)),
            Arc::new(|_| true),
        );
        assert!(matches!(
            count_assignments(&wide, &three_leaves()),
            Err(SolveError::TooManyVariables(_))
        ));
        assert!(matches!(
            min_card(&degree_census_dfa(), &three_leaves()),
            Err(SolveError::NoVariables)
        ));
    }

    #[test]
    fn counting_runs_of_a_deterministic_automaton_gives_zero_or_one() {
        let dfa = exactly_one_marked();
        let nfa = dfa.as_nfa();
        let accepted = parse_term("oplus(port(1,[1]),port(2,[0]))").unwrap();
        let rejected = parse_term("oplus(port(1,[1]),port(2,[1]))").unwrap();
        assert_eq!(
            count_accepting_runs(&nfa, &accepted).unwrap(),
            BigUint::one()
        );
        assert_eq!(
            count_accepting_runs(&nfa, &rejected).unwrap(),
            BigUint::zero()
        );
    }

    #[test]
    fn counting_runs_counts_distinct_witness_choices() {
        // Each leaf with label >= 2 may or may not be marked as a witness;
        // the root accepts when at least one is. Two such leaves: 3 runs.
        let nfa = Nfa::new(
            0,
            Arc::new(|sym, args| match sym {
                Symbol::Leaf(a) => {
                    let mut qs = vec![StateValue::Atom("no")];
                    if a.get() >= 2 {
                        qs.push(StateValue::Atom("yes"));
                    }
                    qs
                }
                Symbol::Oplus => {
                    let yes = args.iter().any(|q| *q == StateValue::Atom("yes"));
                    vec![StateValue::Atom(if yes { "yes" } else { "no" })]
                }
                _ => vec![args[0].clone()],
            }),
            Arc::new(|q| *q == StateValue::Atom("yes")),
        );
        let t = three_leaves();
        assert_eq!(count_accepting_runs(&nfa, &t).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn tropical_arithmetic() {
        use Tropical::*;
        assert_eq!(Finite(2).plus(Finite(3)), Finite(5));
        assert_eq!(Finite(2).plus(Infinity), Infinity);
        assert!(Finite(u64::MAX) < Infinity);
        assert_eq!(Infinity.to_string(), "infinity");
        assert_eq!(Finite(7).to_string(), "7");
    }

    #[test]
    fn semiring_laws_spot_checks() {
        let sr = MultispectrumSemiring { arity: 2 };
        let a = BTreeMap::from([(vec![1, 0], BigUint::from(2u32))]);
        let b = BTreeMap::from([
            (vec![0, 1], BigUint::from(3u32)),
            (vec![1, 1], BigUint::one()),
        ]);
        let c = BTreeMap::from([(vec![1, 1], BigUint::from(5u32))]);
        assert_eq!(sr.add(&a, &b), sr.add(&b, &a));
        assert_eq!(sr.mul(&a, &b), sr.mul(&b, &a));
        assert_eq!(
            sr.mul(&a, &sr.add(&b, &c)),
            sr.add(&sr.mul(&a, &b), &sr.mul(&a, &c))
        );
        assert_eq!(sr.mul(&a, &sr.one()), a);
        assert_eq!(sr.mul(&a, &sr.zero()), sr.zero());

        let sp = SpectrumSemiring { arity: 1 };
        let x = BTreeSet::from([vec![1], vec![2]]);
        let y = BTreeSet::from([vec![10]]);
        assert_eq!(sp.mul(&x, &y), BTreeSet::from([vec![11], vec![12]]));
    }

    #[test]
    fn regular_check_classifies_small_families() {
        for (family, expect) in [
            (GraphFamily::Cycle(5), true),
            (GraphFamily::Clique(4), true),
            (GraphFamily::Clique(1), true),
            (GraphFamily::Path(4), false),
            (GraphFamily::Grid(2, 2), true),
            (GraphFamily::Grid(2, 3), false),
        ] {
            let (t, _) = gen_term(&family).unwrap();
            assert_eq!(regular_check(&t).unwrap(), expect, "family {family:?}");
        }
        for (family, expect) in [(GraphFamily::Star(3), false), (GraphFamily::Petersen, true)] {
            let g = PGraph::builtin(&family);
            let (t, _) = term_from_graph(&g).unwrap();
            assert_eq!(regular_check(&t).unwrap(), expect, "family {family:?}");
        }
    }

    #[test]
    fn regular_check_demands_irredundancy() {
        let doubled = parse_term("add(1,2,add(1,2,oplus(port(1),port(2))))").unwrap();
        assert!(matches!(
            regular_check(&doubled),
            Err(SolveError::RedundantTerm(_))
        ));
    }

    #[test]
    fn degree_census_matches_eval_degrees() {
        for family in [
            GraphFamily::Path(5),
            GraphFamily::Cycle(6),
            GraphFamily::Grid(3, 3),
            GraphFamily::Star(4),
        ] {
            let g = PGraph::builtin(&family);
            let (t, _) = term_from_graph(&g).unwrap();
            let q = degree_census_dfa().run(&t).unwrap();
            // Total vertex count and degree histogram must match the graph.
            let mut want: BTreeMap<u64, u64> = BTreeMap::new();
            for v in g.vertices() {
                *want.entry(g.degree(v) as u64).or_insert(0) += 1;
            }
            let mut got: BTreeMap<u64, u64> = BTreeMap::new();
            for (_, v) in q.as_map() {
                if let StateValue::Pair(_, hist) = v {
                    for (d, c) in hist.as_map() {
                        if let (StateValue::Nat(d), StateValue::Nat(c)) = (d, c) {
                            *got.entry(*d).or_insert(0) += *c;
                        }
                    }
                }
            }
            assert_eq!(got, want, "family {family:?}");
        }
    }
}
