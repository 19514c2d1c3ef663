//! Clique-width terms, port-labeled graphs, and fly-automata.
//!
//! A clique-width term builds a graph from single-vertex leaves with three
//! operations: disjoint union, "make every a-port adjacent to every b-port",
//! and port relabeling. Graph properties expressed in monadic second-order
//! logic compile into automata that run bottom-up over such terms. The
//! automata here are *fly* automata: transitions are computed on demand by
//! functions instead of being tabulated, so the state space never has to be
//! materialized and may be unbounded (counters, set-valued states).
//!
//! Module map:
//! - [`pgraph`]: port-labeled graphs, the graph operations, builtin graph
//!   families, and brute-force reference oracles.
//! - [`term`]: term syntax, parsing and printing, evaluation into graphs,
//!   annotation of leaves with set-variable memberships, term generators.
//! - [`fa`]: canonical state values and deterministic/nondeterministic
//!   fly-automata with their run, determinization, and product machinery.
//! - [`mso`]: formula syntax and the compiler from formulas to automata,
//!   plus hand-built reference automata for proper 3-coloring.
//! - [`solve`]: semiring-weighted runs over annotated leaf choices, giving
//!   satisfiability, counting, cardinality spectra, and minimization.

pub mod fa;
pub mod mso;
pub mod pgraph;
pub mod solve;
pub mod term;
