//! Fly automata over clique-width terms.
//!
//! An automaton here has no transition table. Its state space is a set of
//! structured values ([`StateValue`]), possibly infinite, and its transition
//! function is an ordinary Rust closure that *computes* the successor state
//! from an operation symbol and the states reached at the children. Running
//! an automaton on a term therefore evaluates the transition function once
//! per term position and never materializes the state space.
//!
//! Deterministic automata ([`Dfa`]) are complete by convention: the
//! transition closure is total on the states it can reach (error situations
//! are modeled by an explicit sink state, not by partiality).
//! Nondeterministic ones ([`Nfa`]) return any number of successors.
//! [`determinize`] performs the subset construction lazily, which keeps the
//! result a fly automaton: subsets are built only when the run reaches them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::pgraph::PortLabel;
use crate::term::{Bits, Term, TermError};

/// Canonical state values. Sets and maps are kept sorted and deduplicated by
/// the constructors, so structural equality coincides with semantic equality
/// and any state can serve as a key.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum StateValue {
    /// A named constant, e.g. an error sink.
    Atom(&'static str),
    Label(PortLabel),
    Nat(u64),
    Pair(Box<StateValue>, Box<StateValue>),
    /// Sorted, duplicate-free.
    Set(Vec<StateValue>),
    /// Sorted by key, keys unique.
    Map(Vec<(StateValue, StateValue)>),
}

impl StateValue {
    pub fn pair(a: StateValue, b: StateValue) -> StateValue {
        StateValue::Pair(Box::new(a), Box::new(b))
    }

    pub fn set(mut members: Vec<StateValue>) -> StateValue {
        members.sort();
        members.dedup();
        StateValue::Set(members)
    }

    /// Builds a map state; later entries win on key collisions only if equal,
    /// otherwise this panics (callers merge values first).
    pub fn map(mut entries: Vec<(StateValue, StateValue)>) -> StateValue {
        entries.sort();
        entries.dedup();
        for w in entries.windows(2) {
            assert!(
                w[0].0 != w[1].0,
                "map state got two values for one key: {:?}",
                w[0].0
            );
        }
        StateValue::Map(entries)
    }

    pub fn as_set(&self) -> &[StateValue] {
        match self {
            StateValue::Set(m) => m,
            other => panic!("expected a set state, got {other}"),
        }
    }

    pub fn as_map(&self) -> &[(StateValue, StateValue)] {
        match self {
            StateValue::Map(m) => m,
            other => panic!("expected a map state, got {other}"),
        }
    }
}

impl fmt::Display for StateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateValue::Atom(s) => write!(f, "{s}"),
            StateValue::Label(a) => write!(f, "{a}"),
            StateValue::Nat(n) => write!(f, "{n}"),
            StateValue::Pair(a, b) => write!(f, "({a},{b})"),
            StateValue::Set(members) => {
                write!(f, "{{")?;
                for (i, m) in members.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, "}}")
            }
            StateValue::Map(entries) => {
                write!(f, "{{")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{k}:{v}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// All port labels mentioned anywhere inside a state value.
pub fn state_port_labels(q: &StateValue) -> BTreeSet<PortLabel> {
    fn walk(q: &StateValue, out: &mut BTreeSet<PortLabel>) {
        match q {
            StateValue::Atom(_) | StateValue::Nat(_) => {}
            StateValue::Label(a) => {
                out.insert(*a);
            }
            StateValue::Pair(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            StateValue::Set(members) => members.iter().for_each(|m| walk(m, out)),
            StateValue::Map(entries) => entries.iter().for_each(|(k, v)| {
                walk(k, out);
                walk(v, out);
            }),
        }
    }
    let mut out = BTreeSet::new();
    walk(q, &mut out);
    out
}

/// Operation symbol of a term node, as seen by an automaton.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Symbol {
    Oplus,
    Relab(PortLabel, PortLabel),
    Add(PortLabel, PortLabel),
    Leaf(PortLabel),
    AnnotatedLeaf(PortLabel, Bits),
}

impl Symbol {
    pub fn arity(&self) -> usize {
        match self {
            Symbol::Oplus => 2,
            Symbol::Relab(_, _) | Symbol::Add(_, _) => 1,
            Symbol::Leaf(_) | Symbol::AnnotatedLeaf(_, _) => 0,
        }
    }
}

impl From<&Term> for Symbol {
    fn from(t: &Term) -> Symbol {
        match t {
            Term::Oplus(_, _) => Symbol::Oplus,
            Term::Relab(a, b, _) => Symbol::Relab(*a, *b),
            Term::Add(a, b, _) => Symbol::Add(*a, *b),
            Term::Leaf(a) => Symbol::Leaf(*a),
            Term::AnnotatedLeaf(a, bits) => Symbol::AnnotatedLeaf(*a, bits.clone()),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Oplus => write!(f, "oplus"),
            Symbol::Relab(a, b) => write!(f, "relab({a},{b})"),
            Symbol::Add(a, b) => write!(f, "add({a},{b})"),
            Symbol::Leaf(a) => write!(f, "port({a})"),
            Symbol::AnnotatedLeaf(a, bits) => write!(f, "port({a},[{bits}])"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FaError {
    #[error("automaton reads {automaton_vars} annotation bits, term carries {term_vars}")]
    SignatureMismatch {
        automaton_vars: usize,
        term_vars: usize,
    },
    #[error(transparent)]
    Term(#[from] TermError),
}

pub type DetDelta = Arc<dyn Fn(&Symbol, &[StateValue]) -> StateValue + Send + Sync>;
pub type NondetDelta = Arc<dyn Fn(&Symbol, &[StateValue]) -> Vec<StateValue> + Send + Sync>;
pub type AcceptFn = Arc<dyn Fn(&StateValue) -> bool + Send + Sync>;

fn check_signature(num_vars: usize, t: &Term) -> Result<(), FaError> {
    let term_vars = t.annotation_width()?;
    if term_vars != num_vars {
        return Err(FaError::SignatureMismatch {
            automaton_vars: num_vars,
            term_vars,
        });
    }
    Ok(())
}

// ============================================================================
// Deterministic automata
// ============================================================================

/// A deterministic, complete fly automaton reading terms whose leaves carry
/// `num_vars` annotation bits (0 means plain terms).
#[derive(Clone)]
pub struct Dfa {
    num_vars: usize,
    delta: DetDelta,
    accepting: AcceptFn,
}

impl Dfa {
    pub fn new(num_vars: usize, delta: DetDelta, accepting: AcceptFn) -> Dfa {
        Dfa {
            num_vars,
            delta,
            accepting,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// One transition: the state after reading `sym` with the children in
    /// states `args`.
    pub fn step(&self, sym: &Symbol, args: &[StateValue]) -> StateValue {
        (self.delta)(sym, args)
    }

    pub fn is_accepting(&self, q: &StateValue) -> bool {
        (self.accepting)(q)
    }

    /// The state reached at the root of `t`.
    pub fn run(&self, t: &Term) -> Result<StateValue, FaError> {
        Ok(self.run_counted(t)?.0)
    }

    /// Runs and reports how many transitions were evaluated, which is always
    /// exactly the number of term positions.
    pub fn run_counted(&self, t: &Term) -> Result<(StateValue, u64), FaError> {
        check_signature(self.num_vars, t)?;
        let mut count = 0;
        let q = self.run_raw(t, &mut count);
        Ok((q, count))
    }

    fn run_raw(&self, t: &Term, count: &mut u64) -> StateValue {
        let args = match t {
            Term::Oplus(l, r) => vec![self.run_raw(l, count), self.run_raw(r, count)],
            Term::Relab(_, _, s) | Term::Add(_, _, s) => vec![self.run_raw(s, count)],
            Term::Leaf(_) | Term::AnnotatedLeaf(_, _) => vec![],
        };
        *count += 1;
        (self.delta)(&Symbol::from(t), &args)
    }

    pub fn accepts(&self, t: &Term) -> Result<bool, FaError> {
        Ok(self.is_accepting(&self.run(t)?))
    }

    /// The same automaton with acceptance flipped.
    pub fn complement(&self) -> Dfa {
        let accepting = self.accepting.clone();
        Dfa {
            num_vars: self.num_vars,
            delta: self.delta.clone(),
            accepting: Arc::new(move |q| !accepting(q)),
        }
    }

    /// Runs both automata in lockstep on `Pair` states; the pair is
    /// accepting according to `accept` applied to the components' verdicts.
    pub fn product(
        l: &Dfa,
        r: &Dfa,
        accept: impl Fn(bool, bool) -> bool + Send + Sync + 'static,
    ) -> Result<Dfa, FaError> {
        if l.num_vars != r.num_vars {
            return Err(FaError::SignatureMismatch {
                automaton_vars: l.num_vars,
                term_vars: r.num_vars,
            });
        }
        let (ld, rd) = (l.delta.clone(), r.delta.clone());
        let (la, ra) = (l.accepting.clone(), r.accepting.clone());
        Ok(Dfa {
            num_vars: l.num_vars,
            delta: Arc::new(move |sym, args| {
                let mut lefts = Vec::with_capacity(args.len());
                let mut rights = Vec::with_capacity(args.len());
                for a in args {
                    match a {
                        StateValue::Pair(x, y) => {
                            lefts.push((**x).clone());
                            rights.push((**y).clone());
                        }
                        other => panic!("product automaton fed a non-pair state {other}"),
                    }
                }
                StateValue::pair(ld(sym, &lefts), rd(sym, &rights))
            }),
            accepting: Arc::new(move |q| match q {
                StateValue::Pair(x, y) => accept(la(x), ra(y)),
                other => panic!("product automaton fed a non-pair state {other}"),
            }),
        })
    }

    /// Views this automaton as a nondeterministic one with singleton
    /// successor sets.
    pub fn as_nfa(&self) -> Nfa {
        let delta = self.delta.clone();
        Nfa {
            num_vars: self.num_vars,
            delta: Arc::new(move |sym, args| vec![delta(sym, args)]),
            accepting: self.accepting.clone(),
        }
    }

    /// The same automaton with transitions cached. Purely an optimization:
    /// results are identical, but repeated (symbol, arguments) combinations
    /// are computed once, which matters when states repeat a lot across a
    /// term.
    pub fn memoized(&self) -> Dfa {
        let delta = self.delta.clone();
        // Two-level ordered map so lookups borrow the argument slice instead
        // of cloning it, and comparisons stop at the first difference (states
        // can be large).
        let cache: Mutex<BTreeMap<Symbol, BTreeMap<Vec<StateValue>, StateValue>>> =
            Mutex::new(BTreeMap::new());
        Dfa {
            num_vars: self.num_vars,
            delta: Arc::new(move |sym, args| {
                if let Some(q) = cache.lock().unwrap().get(sym).and_then(|m| m.get(args)) {
                    return q.clone();
                }
                let q = delta(sym, args);
                cache
                    .lock()
                    .unwrap()
                    .entry(sym.clone())
                    .or_default()
                    .insert(args.to_vec(), q.clone());
                q
            }),
            accepting: self.accepting.clone(),
        }
    }

    /// Like [`Dfa::memoized`], but also reports how often the underlying
    /// transition function really ran, for tests and benchmarks.
    pub fn memoized_counting(&self) -> (Dfa, Arc<AtomicU64>) {
        let misses = Arc::new(AtomicU64::new(0));
        let counter = misses.clone();
        let delta = self.delta.clone();
        let counted = Dfa {
            num_vars: self.num_vars,
            delta: Arc::new(move |sym, args| {
                counter.fetch_add(1, Ordering::Relaxed);
                delta(sym, args)
            }),
            accepting: self.accepting.clone(),
        };
        (counted.memoized(), misses)
    }
}

/// A deterministic fly automaton that maps the root state through an output
/// function instead of a yes/no verdict.
#[derive(Clone)]
pub struct OutputDfa<T> {
    num_vars: usize,
    delta: DetDelta,
    out: Arc<dyn Fn(&StateValue) -> T + Send + Sync>,
}

impl<T> OutputDfa<T> {
    pub fn new(
        num_vars: usize,
        delta: DetDelta,
        out: Arc<dyn Fn(&StateValue) -> T + Send + Sync>,
    ) -> OutputDfa<T> {
        OutputDfa {
            num_vars,
            delta,
            out,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn run(&self, t: &Term) -> Result<T, FaError> {
        check_signature(self.num_vars, t)?;
        let inner = Dfa {
            num_vars: self.num_vars,
            delta: self.delta.clone(),
            accepting: Arc::new(|_| true),
        };
        let mut count = 0;
        Ok((self.out)(&inner.run_raw(t, &mut count)))
    }
}

// ============================================================================
// Nondeterministic automata
// ============================================================================

/// A nondeterministic fly automaton: the transition function returns every
/// possible successor (possibly none).
#[derive(Clone)]
pub struct Nfa {
    num_vars: usize,
    delta: NondetDelta,
    accepting: AcceptFn,
}

impl Nfa {
    pub fn new(num_vars: usize, delta: NondetDelta, accepting: AcceptFn) -> Nfa {
        Nfa {
            num_vars,
            delta,
            accepting,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn step(&self, sym: &Symbol, args: &[StateValue]) -> Vec<StateValue> {
        (self.delta)(sym, args)
    }

    pub fn is_accepting(&self, q: &StateValue) -> bool {
        (self.accepting)(q)
    }

    /// All states reachable at the root of `t`, by direct set propagation
    /// (no subset construction involved).
    pub fn run(&self, t: &Term) -> Result<BTreeSet<StateValue>, FaError> {
        check_signature(self.num_vars, t)?;
        Ok(self.run_raw(t))
    }

    fn run_raw(&self, t: &Term) -> BTreeSet<StateValue> {
        let sym = Symbol::from(t);
        let mut out = BTreeSet::new();
        match t {
            Term::Oplus(l, r) => {
                let ls = self.run_raw(l);
                let rs = self.run_raw(r);
                for x in &ls {
                    for y in &rs {
                        out.extend((self.delta)(&sym, &[x.clone(), y.clone()]));
                    }
                }
            }
            Term::Relab(_, _, s) | Term::Add(_, _, s) => {
                for x in self.run_raw(s) {
                    out.extend((self.delta)(&sym, &[x]));
                }
            }
            Term::Leaf(_) | Term::AnnotatedLeaf(_, _) => {
                out.extend((self.delta)(&sym, &[]));
            }
        }
        out
    }

    pub fn accepts(&self, t: &Term) -> Result<bool, FaError> {
        Ok(self.run(t)?.iter().any(|q| self.is_accepting(q)))
    }
}

/// Lazy subset construction. The result is a deterministic fly automaton
/// whose states are `Set` values over the input automaton's states; the
/// empty set acts as the rejecting sink.
pub fn determinize(nfa: &Nfa) -> Dfa {
    let delta = nfa.delta.clone();
    let accepting = nfa.accepting.clone();
    Dfa {
        num_vars: nfa.num_vars,
        delta: Arc::new(move |sym, args| {
            let members: Vec<&[StateValue]> = args.iter().map(StateValue::as_set).collect();
            let mut out = Vec::new();
            match members.as_slice() {
                [] => out.extend(delta(sym, &[])),
                [xs] => {
                    for x in *xs {
                        out.extend(delta(sym, std::slice::from_ref(x)));
                    }
                }
                [xs, ys] => {
                    for x in *xs {
                        for y in *ys {
                            out.extend(delta(sym, &[x.clone(), y.clone()]));
                        }
                    }
                }
                _ => unreachable!("symbols have arity at most 2"),
            }
            StateValue::set(out)
        }),
        accepting: Arc::new(move |q| q.as_set().iter().any(|m| accepting(m))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn pl(n: u32) -> PortLabel {
        PortLabel::new(n)
    }

    /// Counts leaves modulo `k`.
    fn leaf_count_mod(k: u64) -> Dfa {
        Dfa::new(
            0,
            Arc::new(move |sym, args| {
                let total: u64 = args
                    .iter()
                    .map(|q| match q {
                        StateValue::Nat(n) => *n,
                        other => panic!("unexpected state {other}"),
                    })
                    .sum();
                match sym {
                    Symbol::Leaf(_) | Symbol::AnnotatedLeaf(_, _) => StateValue::Nat(1 % k),
                    _ => StateValue::Nat(total % k),
                }
            }),
            Arc::new(|q| matches!(q, StateValue::Nat(0))),
        )
    }

    /// Accepts when some leaf carries a port label at least `min`, by
    /// guessing the witness leaf nondeterministically.
    fn some_label_at_least(min: u32) -> Nfa {
        Nfa::new(
            0,
            Arc::new(move |sym, args| match sym {
                Symbol::Leaf(a) => {
                    let mut qs = vec![StateValue::Atom("no")];
                    if a.get() >= min {
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
        )
    }

    fn sample_terms() -> Vec<Term> {
        [
            "port(1)",
            "port(3)",
            "oplus(port(1),port(2))",
            "add(1,2,oplus(port(1),port(2)))",
            "relab(2,1,add(1,2,oplus(port(1),oplus(port(2),port(1)))))",
            "add(2,3,oplus(add(1,2,oplus(port(1),port(2))),relab(2,3,add(1,2,oplus(port(1),port(2))))))",
        ]
        .iter()
        .map(|s| parse_term(s).unwrap())
        .collect()
    }

    #[test]
    fn state_constructors_canonicalize() {
        let a = StateValue::set(vec![
            StateValue::Nat(2),
            StateValue::Nat(1),
            StateValue::Nat(2),
        ]);
        let b = StateValue::set(vec![StateValue::Nat(1), StateValue::Nat(2)]);
        assert_eq!(a, b);

        let m = StateValue::map(vec![
            (StateValue::Nat(2), StateValue::Nat(0)),
            (StateValue::Nat(1), StateValue::Nat(5)),
        ]);
        assert_eq!(m.as_map()[0].0, StateValue::Nat(1));
        assert_eq!(m.to_string(), "{1:5,2:0}");
    }

    #[test]
    #[should_panic(expected = "two values for one key")]
    fn map_rejects_conflicting_entries() {
        StateValue::map(vec![
            (StateValue::Nat(1), StateValue::Nat(0)),
            (StateValue::Nat(1), StateValue::Nat(2)),
        ]);
    }

    #[test]
    fn state_port_labels_collects_recursively() {
        let q = StateValue::pair(
            StateValue::set(vec![StateValue::Label(pl(3)), StateValue::Nat(7)]),
            StateValue::map(vec![(StateValue::Label(pl(1)), StateValue::Atom("x"))]),
        );
        assert_eq!(state_port_labels(&q), BTreeSet::from([pl(1), pl(3)]));
    }

    #[test]
    fn symbols_come_from_terms() {
        let t = parse_term("add(1,2,oplus(port(1),port(2,[10])))").unwrap();
        assert_eq!(Symbol::from(&t), Symbol::Add(pl(1), pl(2)));
        assert_eq!(Symbol::from(&t).arity(), 1);
        assert_eq!(Symbol::Oplus.arity(), 2);
        assert_eq!(Symbol::Leaf(pl(1)).arity(), 0);
        assert_eq!(Symbol::Leaf(pl(1)).to_string(), "port(1)");
    }

    #[test]
    fn dfa_run_counts_transitions_per_position() {
        let dfa = leaf_count_mod(2);
        for t in sample_terms() {
            let (q, steps) = dfa.run_counted(&t).unwrap();
            assert_eq!(steps, t.num_positions() as u64);
            assert_eq!(q, StateValue::Nat(t.leaf_count() as u64 % 2));
            assert_eq!(dfa.accepts(&t).unwrap(), t.leaf_count() % 2 == 0);
        }
    }

    #[test]
    fn signature_mismatch_is_reported() {
        let dfa = leaf_count_mod(2);
        let t = parse_term("port(1,[10])").unwrap();
        assert!(matches!(
            dfa.run(&t),
            Err(FaError::SignatureMismatch {
                automaton_vars: 0,
                term_vars: 2
            })
        ));
    }

    #[test]
    fn complement_flips_every_verdict() {
        let dfa = leaf_count_mod(3);
        let flipped = dfa.complement();
        for t in sample_terms() {
            assert_ne!(dfa.accepts(&t).unwrap(), flipped.accepts(&t).unwrap());
        }
    }

    #[test]
    fn product_intersects_verdicts() {
        let both = Dfa::product(&leaf_count_mod(2), &leaf_count_mod(3), |a, b| a && b).unwrap();
        for t in sample_terms() {
            assert_eq!(both.accepts(&t).unwrap(), t.leaf_count() % 6 == 0);
        }
        let six = parse_term(
            "oplus(port(1),oplus(port(1),oplus(port(1),oplus(port(1),oplus(port(1),port(1))))))",
        )
        .unwrap();
        assert!(both.accepts(&six).unwrap());
    }

    #[test]
    fn nfa_run_and_determinization_agree() {
        fn some_leaf_at_least(t: &Term, min: u32) -> bool {
            match t {
                Term::Oplus(l, r) => some_leaf_at_least(l, min) || some_leaf_at_least(r, min),
                Term::Relab(_, _, s) | Term::Add(_, _, s) => some_leaf_at_least(s, min),
                Term::Leaf(a) | Term::AnnotatedLeaf(a, _) => a.get() >= min,
            }
        }
        let nfa = some_label_at_least(2);
        let dfa = determinize(&nfa);
        for t in sample_terms() {
            let direct = nfa.accepts(&t).unwrap();
            assert_eq!(direct, dfa.accepts(&t).unwrap(), "term {t}");
            assert_eq!(direct, some_leaf_at_least(&t, 2), "term {t}");
        }
    }

    #[test]
    fn dfa_as_nfa_runs_to_singletons() {
        let dfa = leaf_count_mod(2);
        let nfa = dfa.as_nfa();
        for t in sample_terms() {
            let states = nfa.run(&t).unwrap();
            assert_eq!(states.len(), 1);
            assert_eq!(nfa.accepts(&t).unwrap(), dfa.accepts(&t).unwrap());
        }
    }

    #[test]
    fn memoization_is_invisible_and_saves_work() {
        let (memo, misses) = leaf_count_mod(2).memoized_counting();
        let plain = leaf_count_mod(2);
        let t = parse_term(
            "oplus(oplus(port(1),port(1)),oplus(port(1),oplus(port(1),port(1))))",
        )
        .unwrap();
        assert_eq!(memo.run(&t).unwrap(), plain.run(&t).unwrap());
        // 9 positions, but only a handful of distinct (symbol, args) pairs.
        let first = misses.load(Ordering::Relaxed);
        assert!(first < 9, "expected cache hits, got {first} misses");
        memo.run(&t).unwrap();
        assert_eq!(misses.load(Ordering::Relaxed), first);
    }

    #[test]
    fn output_dfa_maps_the_root_state() {
        let out: OutputDfa<u64> = OutputDfa::new(
            0,
            Arc::new(|sym, args| match sym {
                Symbol::Leaf(_) | Symbol::AnnotatedLeaf(_, _) => StateValue::Nat(1),
                _ => StateValue::Nat(
                    args.iter()
                        .map(|q| match q {
                            StateValue::Nat(n) => *n,
                            other => panic!("unexpected state {other}"),
                        })
                        .sum(),
                ),
            }),
            Arc::new(|q| match q {
                StateValue::Nat(n) => 10 * n,
                other => panic!("unexpected state {other}"),
            }),
        );
        let t = parse_term("oplus(port(1),oplus(port(2),port(3)))").unwrap();
        assert_eq!(out.run(&t).unwrap(), 30);
    }
}
