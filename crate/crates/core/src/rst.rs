//! RST constituency trees and their s-expression file format.
//!
//! ```text
//! node  := edu | ns | multi
//! edu   := (edu <int> <string>)
//! ns    := (ns <label> (n <node>) (s <node>))     ; (s …)(n …) also accepted
//! multi := (multi <label> <node> <node>+)
//! ```
//!
//! Strings are double-quoted with `\"` and `\\` as the only escapes, `;`
//! starts a comment running to the end of the line. Relation labels are
//! lowercased when parsed. Serialization is canonical: children are written
//! in text order, so parse → serialize is idempotent.

use std::fmt;
use std::io::Read;

use thiserror::Error;

/// An elementary discourse unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edu {
    /// 1-based position of the unit in the document.
    pub id: usize,
    pub text: String,
}

impl Edu {
    pub fn new(id: usize, text: impl Into<String>) -> Edu {
        Edu { id, text: text.into() }
    }
}

/// A discourse relation name, always lowercase and nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationLabel(String);

impl RelationLabel {
    /// Normalizes to lowercase. Returns `None` for empty names or names
    /// containing characters that cannot appear in a bare token.
    pub fn new(name: &str) -> Option<RelationLabel> {
        let lowered = name.to_lowercase();
        if lowered.is_empty() || !lowered.chars().all(is_atom_char) {
            return None;
        }
        Some(RelationLabel(lowered))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RstNode {
    Leaf(Edu),
    NucSat {
        relation: RelationLabel,
        nucleus: Box<RstNode>,
        satellite: Box<RstNode>,
        /// Whether the nucleus precedes the satellite in the text.
        nucleus_first: bool,
    },
    Multi {
        relation: RelationLabel,
        nuclei: Vec<RstNode>,
    },
}

impl RstNode {
    pub fn leaf(id: usize, text: impl Into<String>) -> RstNode {
        RstNode::Leaf(Edu::new(id, text))
    }

    pub fn nuc_sat(relation: RelationLabel, nucleus: RstNode, satellite: RstNode, nucleus_first: bool) -> RstNode {
        RstNode::NucSat {
            relation,
            nucleus: Box::new(nucleus),
            satellite: Box::new(satellite),
            nucleus_first,
        }
    }

    pub fn multi(relation: RelationLabel, nuclei: Vec<RstNode>) -> RstNode {
        RstNode::Multi { relation, nuclei }
    }

    /// Children in text order.
    pub fn children(&self) -> Vec<&RstNode> {
        match self {
            RstNode::Leaf(_) => Vec::new(),
            RstNode::NucSat { nucleus, satellite, nucleus_first, .. } => {
                if *nucleus_first {
                    vec![nucleus.as_ref(), satellite.as_ref()]
                } else {
                    vec![satellite.as_ref(), nucleus.as_ref()]
                }
            }
            RstNode::Multi { nuclei, .. } => nuclei.iter().collect(),
        }
    }

    pub fn relation(&self) -> Option<&RelationLabel> {
        match self {
            RstNode::Leaf(_) => None,
            RstNode::NucSat { relation, .. } | RstNode::Multi { relation, .. } => Some(relation),
        }
    }

    /// Leaves in text order.
    pub fn leaves(&self) -> Vec<&Edu> {
        let mut out = Vec::new();
        collect_leaves(self, &mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn edge_count(&self) -> usize {
        self.children().iter().map(|c| 1 + c.edge_count()).sum()
    }

    /// Head EDU id: follow the nucleus (leftmost nucleus for multinuclear
    /// relations) down to a leaf.
    pub fn head(&self) -> usize {
        match self {
            RstNode::Leaf(edu) => edu.id,
            RstNode::NucSat { nucleus, .. } => nucleus.head(),
            RstNode::Multi { nuclei, .. } => nuclei.first().map(|n| n.head()).unwrap_or(0),
        }
    }
}

fn collect_leaves<'a>(node: &'a RstNode, out: &mut Vec<&'a Edu>) {
    match node {
        RstNode::Leaf(edu) => out.push(edu),
        _ => {
            for child in node.children() {
                collect_leaves(child, out);
            }
        }
    }
}

/// A validated RST tree. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct RstTree {
    root: RstNode,
    edu_count: usize,
}

impl RstTree {
    /// Builds a tree, rejecting it if [`validate_node`] reports anything.
    pub fn new(root: RstNode) -> Result<RstTree, RstError> {
        let violations = validate_node(&root);
        if !violations.is_empty() {
            return Err(RstError::Invalid(violations));
        }
        let edu_count = root.leaves().len();
        Ok(RstTree { root, edu_count })
    }

    /// Builds a tree without checking invariants. Use [`RstTree::validate`]
    /// to inspect the result.
    pub fn new_unchecked(root: RstNode) -> RstTree {
        let edu_count = root.leaves().len();
        RstTree { root, edu_count }
    }

    /// Builds a tree, first renumbering leaves 1..N in text order.
    pub fn renumbered(mut root: RstNode) -> Result<RstTree, RstError> {
        let mut next = 1;
        renumber(&mut root, &mut next);
        RstTree::new(root)
    }

    pub fn root(&self) -> &RstNode {
        &self.root
    }

    pub fn edu_count(&self) -> usize {
        self.edu_count
    }

    pub fn edus(&self) -> Vec<&Edu> {
        self.root.leaves()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = validate_node(&self.root);
        let leaves = self.root.leaves().len();
        if leaves != self.edu_count {
            violations.push(Violation::EduCount { declared: self.edu_count, leaves });
        }
        violations
    }

    /// Same structure with every leaf's text replaced, in text order.
    pub fn with_texts(&self, texts: &[String]) -> Result<RstTree, RstError> {
        if texts.len() != self.edu_count {
            return Err(RstError::TextCount { expected: self.edu_count, found: texts.len() });
        }
        let mut root = self.root.clone();
        replace_texts(&mut root, &mut texts.iter());
        Ok(RstTree { root, edu_count: self.edu_count })
    }

    pub fn to_sexp(&self) -> String {
        serialize_rst(self)
    }
}

fn renumber(node: &mut RstNode, next: &mut usize) {
    match node {
        RstNode::Leaf(edu) => {
            edu.id = *next;
            *next += 1;
        }
        RstNode::NucSat { nucleus, satellite, nucleus_first, .. } => {
            let (first, second) = if *nucleus_first { (nucleus, satellite) } else { (satellite, nucleus) };
            renumber(first, next);
            renumber(second, next);
        }
        RstNode::Multi { nuclei, .. } => nuclei.iter_mut().for_each(|n| renumber(n, next)),
    }
}

fn replace_texts<'a>(node: &mut RstNode, texts: &mut impl Iterator<Item = &'a String>) {
    match node {
        RstNode::Leaf(edu) => {
            if let Some(t) = texts.next() {
                edu.text = t.clone();
            }
        }
        RstNode::NucSat { nucleus, satellite, nucleus_first, .. } => {
            let (first, second) = if *nucleus_first { (nucleus, satellite) } else { (satellite, nucleus) };
            replace_texts(first, texts);
            replace_texts(second, texts);
        }
        RstNode::Multi { nuclei, .. } => nuclei.iter_mut().for_each(|n| replace_texts(n, texts)),
    }
}

/// A broken tree invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The leaf at text position `position` (1-based) carries id `found`.
    IdGap { position: usize, found: usize },
    /// A multinuclear node with fewer than two nuclei.
    MultiArity { relation: String, children: usize },
    EduCount { declared: usize, leaves: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IdGap { position, found } => {
                write!(f, "leaf {position} in text order has EDU id {found}")
            }
            Violation::MultiArity { relation, children } => {
                write!(f, "multinuclear '{relation}' node has {children} child(ren), needs at least 2")
            }
            Violation::EduCount { declared, leaves } => {
                write!(f, "edu_count is {declared} but the tree has {leaves} leaves")
            }
        }
    }
}

/// Checks leaf numbering and multinuclear arity. An empty list means valid.
pub fn validate_node(root: &RstNode) -> Vec<Violation> {
    let mut violations = Vec::new();
    for (i, edu) in root.leaves().iter().enumerate() {
        if edu.id != i + 1 {
            violations.push(Violation::IdGap { position: i + 1, found: edu.id });
        }
    }
    check_arity(root, &mut violations);
    violations
}

fn check_arity(node: &RstNode, violations: &mut Vec<Violation>) {
    if let RstNode::Multi { relation, nuclei } = node {
        if nuclei.len() < 2 {
            violations.push(Violation::MultiArity { relation: relation.to_string(), children: nuclei.len() });
        }
    }
    for child in node.children() {
        check_arity(child, violations);
    }
}

/// Line and column (both 1-based) in the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum RstError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Position, message: String },
    #[error("EDU id mismatch at {pos}: expected {expected}, found {found}")]
    EduIdMismatch { pos: Position, expected: usize, found: usize },
    #[error("multinuclear node at {pos} has {children} child(ren), needs at least 2")]
    MultiArity { pos: Position, children: usize },
    #[error("unknown node keyword '{keyword}' at {pos}")]
    UnknownKeyword { pos: Position, keyword: String },
    #[error("input is not valid UTF-8")]
    Utf8,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid tree: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("text has {found} EDU line(s) but the tree has {expected} leaves")]
    TextCount { expected: usize, found: usize },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Parses one tree from a reader.
pub fn parse_rst<R: Read>(mut input: R) -> Result<RstTree, RstError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|_| RstError::Utf8)?;
    parse_rst_str(&text)
}

pub fn parse_rst_str(input: &str) -> Result<RstTree, RstError> {
    let tokens = lex(input)?;
    let mut parser = Parser { tokens, pos: 0, next_edu: 1, end: end_position(input) };
    let root = parser.node()?;
    if let Some(tok) = parser.tokens.get(parser.pos) {
        return Err(RstError::Syntax { pos: tok.pos, message: "trailing input after tree".into() });
    }
    // Arity and numbering are enforced during parsing.
    Ok(RstTree::new_unchecked(root))
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Open,
    Close,
    Atom(String),
    Str(String),
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    pos: Position,
}

fn is_atom_char(c: char) -> bool {
    !(c.is_whitespace() || c == '(' || c == ')' || c == '"' || c == ';')
}

fn end_position(input: &str) -> Position {
    let mut pos = Position { line: 1, column: 1 };
    for c in input.chars() {
        advance(&mut pos, c);
    }
    pos
}

fn advance(pos: &mut Position, c: char) {
    if c == '\n' {
        pos.line += 1;
        pos.column = 1;
    } else {
        pos.column += 1;
    }
}

fn lex(input: &str) -> Result<Vec<Token>, RstError> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    let mut pos = Position { line: 1, column: 1 };
    while let Some(&c) = chars.peek() {
        let start = pos;
        match c {
            _ if c.is_whitespace() => {
                chars.next();
                advance(&mut pos, c);
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    advance(&mut pos, c);
                }
            }
            '(' | ')' => {
                chars.next();
                advance(&mut pos, c);
                let kind = if c == '(' { TokenKind::Open } else { TokenKind::Close };
                tokens.push(Token { kind, pos: start });
            }
            '"' => {
                chars.next();
                advance(&mut pos, c);
                let mut s = String::new();
                loop {
                    let Some(c) = chars.next() else {
                        return Err(RstError::Syntax { pos: start, message: "unterminated string".into() });
                    };
                    advance(&mut pos, c);
                    match c {
                        '"' => break,
                        '\\' => {
                            let escape_pos = pos;
                            match chars.next() {
                                Some(e @ ('"' | '\\')) => {
                                    advance(&mut pos, e);
                                    s.push(e);
                                }
                                Some(other) => {
                                    return Err(RstError::Syntax {
                                        pos: escape_pos,
                                        message: format!("invalid escape '\\{other}'"),
                                    })
                                }
                                None => {
                                    return Err(RstError::Syntax { pos: start, message: "unterminated string".into() })
                                }
                            }
                        }
                        _ => s.push(c),
                    }
                }
                tokens.push(Token { kind: TokenKind::Str(s), pos: start });
            }
            _ => {
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_atom_char(c) {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                    advance(&mut pos, c);
                }
                tokens.push(Token { kind: TokenKind::Atom(atom), pos: start });
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_edu: usize,
    end: Position,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<Token, RstError> {
        match self.tokens.get(self.pos) {
            Some(tok) => {
                self.pos += 1;
                Ok(tok.clone())
            }
            None => Err(RstError::Syntax { pos: self.end, message: format!("unexpected end of input, expected {what}") }),
        }
    }

    fn expect_open(&mut self) -> Result<Position, RstError> {
        let tok = self.next("'('")?;
        match tok.kind {
            TokenKind::Open => Ok(tok.pos),
            _ => Err(RstError::Syntax { pos: tok.pos, message: "expected '('".into() }),
        }
    }

    fn expect_close(&mut self) -> Result<(), RstError> {
        let tok = self.next("')'")?;
        match tok.kind {
            TokenKind::Close => Ok(()),
            _ => Err(RstError::Syntax { pos: tok.pos, message: "expected ')'".into() }),
        }
    }

    fn atom(&mut self, what: &str) -> Result<(String, Position), RstError> {
        let tok = self.next(what)?;
        match tok.kind {
            TokenKind::Atom(a) => Ok((a, tok.pos)),
            _ => Err(RstError::Syntax { pos: tok.pos, message: format!("expected {what}") }),
        }
    }

    fn label(&mut self) -> Result<RelationLabel, RstError> {
        let (atom, pos) = self.atom("relation label")?;
        RelationLabel::new(&atom)
            .ok_or_else(|| RstError::Syntax { pos, message: format!("invalid relation label '{atom}'") })
    }

    fn node(&mut self) -> Result<RstNode, RstError> {
        let open = self.expect_open()?;
        let (keyword, kw_pos) = self.atom("node keyword")?;
        let node = match keyword.as_str() {
            "edu" => self.edu_body()?,
            "ns" => self.ns_body(open)?,
            "multi" => self.multi_body(open)?,
            _ => return Err(RstError::UnknownKeyword { pos: kw_pos, keyword }),
        };
        self.expect_close()?;
        Ok(node)
    }

    fn edu_body(&mut self) -> Result<RstNode, RstError> {
        let (id_text, id_pos) = self.atom("EDU id")?;
        let found: usize = id_text
            .parse()
            .map_err(|_| RstError::Syntax { pos: id_pos, message: format!("invalid EDU id '{id_text}'") })?;
        if found != self.next_edu {
            return Err(RstError::EduIdMismatch { pos: id_pos, expected: self.next_edu, found });
        }
        self.next_edu += 1;
        let tok = self.next("EDU text")?;
        let text = match tok.kind {
            TokenKind::Str(s) => s,
            _ => return Err(RstError::Syntax { pos: tok.pos, message: "expected quoted EDU text".into() }),
        };
        Ok(RstNode::leaf(found, text))
    }

    fn ns_body(&mut self, open: Position) -> Result<RstNode, RstError> {
        let relation = self.label()?;
        let (first_role, first) = self.role_child()?;
        let (second_role, second) = self.role_child()?;
        match (first_role, second_role) {
            ('n', 's') => Ok(RstNode::nuc_sat(relation, first, second, true)),
            ('s', 'n') => Ok(RstNode::nuc_sat(relation, second, first, false)),
            _ => Err(RstError::Syntax {
                pos: open,
                message: "nucleus-satellite node needs exactly one (n …) and one (s …) child".into(),
            }),
        }
    }

    fn role_child(&mut self) -> Result<(char, RstNode), RstError> {
        self.expect_open()?;
        let (role, pos) = self.atom("'n' or 's'")?;
        let role = match role.as_str() {
            "n" => 'n',
            "s" => 's',
            _ => return Err(RstError::Syntax { pos, message: format!("expected 'n' or 's', found '{role}'") }),
        };
        let child = self.node()?;
        self.expect_close()?;
        Ok((role, child))
    }

    fn multi_body(&mut self, open: Position) -> Result<RstNode, RstError> {
        let relation = self.label()?;
        let mut nuclei = Vec::new();
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Open)) {
            nuclei.push(self.node()?);
        }
        if nuclei.len() < 2 {
            return Err(RstError::MultiArity { pos: open, children: nuclei.len() });
        }
        Ok(RstNode::multi(relation, nuclei))
    }
}

/// Canonical text form, children in text order, ending in a newline.
pub fn serialize_rst(tree: &RstTree) -> String {
    let mut out = String::new();
    write_node(tree.root(), 0, &mut out);
    out.push('\n');
    out
}

fn write_node(node: &RstNode, indent: usize, out: &mut String) {
    match node {
        RstNode::Leaf(edu) => {
            out.push_str(&format!("(edu {} \"", edu.id));
            for c in edu.text.chars() {
                if c == '"' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push_str("\")");
        }
        RstNode::NucSat { relation, nucleus, satellite, nucleus_first } => {
            out.push_str(&format!("(ns {relation}"));
            let ordered = if *nucleus_first {
                [('n', nucleus), ('s', satellite)]
            } else {
                [('s', satellite), ('n', nucleus)]
            };
            for (role, child) in ordered {
                newline(indent + 2, out);
                out.push('(');
                out.push(role);
                out.push(' ');
                write_node(child, indent + 5, out);
                out.push(')');
            }
            out.push(')');
        }
        RstNode::Multi { relation, nuclei } => {
            out.push_str(&format!("(multi {relation}"));
            for child in nuclei {
                newline(indent + 2, out);
                write_node(child, indent + 2, out);
            }
            out.push(')');
        }
    }
}

fn newline(indent: usize, out: &mut String) {
    out.push('\n');
    out.extend(std::iter::repeat_n(' ', indent));
}
