//! Bundled example data: an eight-unit movie review with its RST analysis
//! and the sentiment words it contains.

use crate::rst::{parse_rst_str, RstTree};

/// The review as an RST tree file.
pub const LAST_SAMURAI_TREE: &str = include_str!("../data/last_samurai.rst.sexp");

/// Lexicon marking the review's six positive and three negative words.
pub const LAST_SAMURAI_LEXICON: &str = include_str!("../data/last_samurai.lexicon.tsv");

pub fn last_samurai_tree() -> RstTree {
    parse_rst_str(LAST_SAMURAI_TREE).expect("bundled tree parses")
}
