//! Helpers shared by the integration tests: exhaustive small-graph
//! enumeration, seeded random corpora, the formula battery, and the
//! consistency checks that several suites repeat.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::Zero;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use flyaut::fa::Dfa;
use flyaut::pgraph::{Assignment, Edge, PGraph, PortLabel, VertexId};
use flyaut::solve::{
    check_sat, count_assignments, min_card, multispectrum, spectrum, Tropical,
};
use flyaut::term::{Bits, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ============================================================================
// Graph corpora
// ============================================================================

/// Every graph on 1..=`max_n` vertices (all edge subsets, every vertex an
/// a1-port). 75 graphs for `max_n = 4`.
pub fn all_graphs_up_to(max_n: u32) -> Vec<PGraph> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let vs: Vec<VertexId> = (1..=n).map(VertexId::num).collect();
        let pairs: Vec<(usize, usize)> = (0..n as usize)
            .flat_map(|i| (i + 1..n as usize).map(move |j| (i, j)))
            .collect();
        for mask in 0u32..(1 << pairs.len()) {
            let ports: BTreeMap<VertexId, PortLabel> = vs
                .iter()
                .map(|v| (v.clone(), PortLabel::new(1)))
                .collect();
            let mut edges = BTreeSet::new();
            for (bit, (i, j)) in pairs.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    edges.insert(Edge::new(vs[*i].clone(), vs[*j].clone()).unwrap());
                }
            }
            out.push(PGraph::from_parts(ports, edges).unwrap());
        }
    }
    out
}

/// A random graph on `n` vertices: each edge tossed with probability 1/2,
/// ports drawn from 1..=`max_port`.
pub fn random_graph(r: &mut ChaCha8Rng, n: u32, max_port: u32) -> PGraph {
    let vs: Vec<VertexId> = (1..=n).map(VertexId::num).collect();
    let ports: BTreeMap<VertexId, PortLabel> = vs
        .iter()
        .map(|v| (v.clone(), PortLabel::new(r.gen_range(1..=max_port))))
        .collect();
    let mut edges = BTreeSet::new();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            if r.gen_bool(0.5) {
                edges.insert(Edge::new(vs[i].clone(), vs[j].clone()).unwrap());
            }
        }
    }
    PGraph::from_parts(ports, edges).unwrap()
}

// ============================================================================
// Assignments
// ============================================================================

/// All `(2^n)^s` assignments of `s` set variables over `vertices`, in a
/// fixed order.
pub fn all_assignments(vertices: &[VertexId], s: usize) -> Vec<Assignment> {
    let n = vertices.len();
    let per_var = 1usize << n;
    let total = per_var.pow(s as u32);
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut sets = Vec::with_capacity(s);
        for _ in 0..s {
            let mask = code % per_var;
            code /= per_var;
            sets.push(
                vertices
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, v)| v.clone())
                    .collect::<BTreeSet<VertexId>>(),
            );
        }
        out.push(Assignment(sets));
    }
    out
}

/// Translates an assignment over graph vertices into one over the leaves of
/// a term whose `renaming` maps leaf ids to those graph vertices.
pub fn pull_back(asg: &Assignment, renaming: &BTreeMap<VertexId, VertexId>) -> Assignment {
    Assignment(
        asg.0
            .iter()
            .map(|set| {
                renaming
                    .iter()
                    .filter(|(_, img)| set.contains(*img))
                    .map(|(leaf, _)| leaf.clone())
                    .collect()
            })
            .collect(),
    )
}

// ============================================================================
// The formula battery
// ============================================================================

/// Formulas exercising every atomic (sub, sgl, edg, cardp, cardmod,
/// partition) and every connective (not, and, or, implies, exists, forall),
/// with their free-variable contexts.
pub fn battery() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("(sub X Y)", vec!["X", "Y"]),
        ("(sgl X)", vec!["X"]),
        ("(edg X Y)", vec!["X", "Y"]),
        ("(cardp 2 X)", vec!["X"]),
        ("(cardmod 0 2 X)", vec!["X"]),
        ("(partition X Y)", vec!["X", "Y"]),
        ("(not (edg X Y))", vec!["X", "Y"]),
        ("(and (sub X Y) (not (sgl X)))", vec!["X", "Y"]),
        ("(or (sgl X) (sub Y X))", vec!["X", "Y"]),
        ("(implies (edg X Y) (not (sub X Y)))", vec!["X", "Y"]),
        ("(exists Z (and (sgl Z) (sub Z X)))", vec!["X"]),
        ("(forall Z (implies (sgl Z) (sub Z X)))", vec!["X"]),
        (
            "(exists Z (exists W (and (and (sgl Z) (sgl W)) (and (edg Z W) (and (sub Z X) (sub W X))))))",
            vec!["X"],
        ),
        ("(col X Y)", vec!["X", "Y"]),
    ]
}

// ============================================================================
// Random terms
// ============================================================================

/// A random well-formed plain term with `leaves` leaf positions and labels
/// drawn from 1..=`max_label`: a random binary tree of `oplus` over the
/// leaves, sprinkled with `add` and `relab` at every node.
pub fn random_term(r: &mut ChaCha8Rng, leaves: usize, max_label: u32) -> Term {
    assert!(leaves >= 1 && max_label >= 2);
    fn decorate(
        r: &mut ChaCha8Rng,
        max_label: u32,
        mut t: Term,
    ) -> Term {
        for _ in 0..r.gen_range(0..=2) {
            if r.gen_bool(0.5) {
                let a = PortLabel::new(r.gen_range(1..=max_label));
                let mut b = PortLabel::new(r.gen_range(1..=max_label));
                while b == a {
                    b = PortLabel::new(r.gen_range(1..=max_label));
                }
                t = Term::add(a, b, t);
            } else {
                let a = PortLabel::new(r.gen_range(1..=max_label));
                let b = PortLabel::new(r.gen_range(1..=max_label));
                t = Term::relab(a, b, t);
            }
        }
        t
    }
    if leaves == 1 {
        let leaf = Term::leaf(PortLabel::new(r.gen_range(1..=max_label)));
        return decorate(r, max_label, leaf);
    }
    let left_leaves = r.gen_range(1..leaves);
    let l = random_term(r, left_leaves, max_label);
    let rgt = random_term(r, leaves - left_leaves, max_label);
    decorate(r, max_label, Term::oplus(l, rgt))
}

/// Annotates every leaf of a plain term with `m` random bits.
pub fn random_annotation(r: &mut ChaCha8Rng, t: &Term, m: usize) -> Term {
    match t {
        Term::Oplus(l, rgt) => Term::oplus(
            random_annotation(r, l, m),
            random_annotation(r, rgt, m),
        ),
        Term::Relab(a, b, s) => Term::relab(*a, *b, random_annotation(r, s, m)),
        Term::Add(a, b, s) => Term::add(*a, *b, random_annotation(r, s, m)),
        Term::Leaf(a) => {
            Term::annotated_leaf(*a, Bits::new((0..m).map(|_| r.gen_bool(0.5)).collect()))
        }
        Term::AnnotatedLeaf(_, _) => panic!("term is already annotated"),
    }
}

// ============================================================================
// The consistency tower
// ============================================================================

/// Checks the relations between the five solver views on one (automaton,
/// plain term) pair: satisfiability ⇔ count > 0 ⇔ nonempty spectrum, the
/// multispectrum totals the count and projects to the spectrum, and the
/// smallest first coordinate in the spectrum is the minimal cardinality.
pub fn assert_tower(dfa: &Dfa, t: &Term, what: &str) {
    let sat = check_sat(dfa, t).unwrap();
    let count = count_assignments(dfa, t).unwrap();
    let spec = spectrum(dfa, t).unwrap();
    let multi = multispectrum(dfa, t).unwrap();

    assert_eq!(sat, !count.is_zero(), "sat vs count on {what}");
    assert_eq!(sat, !spec.is_empty(), "sat vs spectrum on {what}");
    let total: BigUint = multi.values().sum();
    assert_eq!(total, count, "multispectrum total vs count on {what}");
    let keys: BTreeSet<Vec<u64>> = multi.keys().cloned().collect();
    assert_eq!(keys, spec, "multispectrum keys vs spectrum on {what}");

    if dfa.num_vars() >= 1 {
        let mc = min_card(dfa, t).unwrap();
        let expect = spec
            .iter()
            .map(|tuple| tuple[0])
            .min()
            .map_or(Tropical::Infinity, Tropical::Finite);
        assert_eq!(mc, expect, "min_card vs spectrum minimum on {what}");
    }
}
