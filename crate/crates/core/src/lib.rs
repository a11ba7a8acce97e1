//! Quest Graph agentic automata.
//!
//! The crate contains a bounded-context graph kernel, the constrained QDP
//! engines with their reference extension, classical machine oracles,
//! executable constructions that realise each machine on a Quest Graph, and
//! computation-graph transforms with operation-counting simulators.

pub mod automata;
pub mod cgsim;
pub mod compgraph;
pub mod constructions;
pub mod graph;
pub mod qdp;
pub mod reference;
