//! Document-level sentiment polarity from RST discourse structure.
//!
//! Two ways of composing local sentiment evidence over a discourse parse:
//!
//! * **Depth reweighting.** The constituency RST tree is converted into a
//!   dependency tree over elementary discourse units ([`depdt`]); each unit's
//!   score `θᵀw_i` is scaled by `max(0.5, 1 − d_i/6)` where `d_i` is its depth
//!   ([`scoring`]). Works with a polarity lexicon or learned weights
//!   ([`logreg`]).
//! * **Rhetorical recursive network.** Scalar scores are composed up the
//!   tree with per-relation-class weights and `tanh`, plus a bag-of-words
//!   term at the root, and trained with a hinge loss ([`r2n2`]).
//!
//! RST parsing itself is out of scope: trees are read from a small
//! s-expression format ([`rst`]).

pub mod cli;
pub mod corpus;
pub mod depdt;
pub mod features;
pub mod logreg;
pub mod model;
pub mod polarity;
pub mod r2n2;
pub mod rst;
pub mod samples;
pub mod scoring;
pub mod synth;

pub use polarity::Polarity;
