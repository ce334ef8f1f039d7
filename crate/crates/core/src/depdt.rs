//! Dependency-based discourse trees (DEP-DT).
//!
//! Head rules:
//!
//! * the head of a nucleus-satellite unit is the head of its nucleus, and the
//!   satellite's head becomes a dependent of it;
//! * the head of a multinuclear unit is the head of its leftmost nucleus; the
//!   other nuclei are co-heads and attach to whatever governs the unit, so all
//!   nuclei of a multinuclear satellite sit at the same depth. When the unit
//!   has no governor (it lies on the document's nucleus spine) the co-heads
//!   attach to the leftmost nucleus's head.
//!
//! An EDU's depth is therefore the number of satellites it is embedded in,
//! plus one for co-heads that hang directly off the document spine.

use std::fmt::Write as _;

use crate::rst::{RelationLabel, RstNode, RstTree};

#[derive(Debug, Clone, PartialEq)]
pub struct DepDt {
    head: usize,
    // All indexed by EDU id − 1.
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    relation: Vec<Option<RelationLabel>>,
}

impl DepDt {
    /// EDU id of the document head (depth 0).
    pub fn head(&self) -> usize {
        self.head
    }

    pub fn edu_count(&self) -> usize {
        self.depth.len()
    }

    pub fn parent(&self, edu: usize) -> Option<usize> {
        self.parent.get(edu.checked_sub(1)?).copied().flatten()
    }

    pub fn depth(&self, edu: usize) -> Option<usize> {
        self.depth.get(edu.checked_sub(1)?).copied()
    }

    /// Relation at the attachment site of `edu`; `None` for the head.
    pub fn relation_to_parent(&self, edu: usize) -> Option<&RelationLabel> {
        self.relation.get(edu.checked_sub(1)?)?.as_ref()
    }

    /// Depth of every EDU, indexed by EDU id − 1.
    pub fn depths(&self) -> &[usize] {
        &self.depth
    }

    /// `(child, parent)` pairs in EDU order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().filter_map(|(i, p)| p.map(|p| (i + 1, p)))
    }

    /// `edu_id<TAB>parent|-<TAB>depth<TAB>relation|-`, one line per EDU.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.depth.len() {
            let parent = self.parent[i].map_or_else(|| "-".to_string(), |p| p.to_string());
            let relation = self.relation[i].as_ref().map_or("-", |r| r.as_str());
            let _ = writeln!(out, "{}\t{}\t{}\t{}", i + 1, parent, self.depth[i], relation);
        }
        out
    }
}

/// Governor of a unit being attached: head EDU, its depth, and the relation
/// at the attachment site.
#[derive(Clone, Copy)]
struct Governor<'a> {
    edu: usize,
    depth: usize,
    relation: &'a RelationLabel,
}

/// Converts a valid tree to its DEP-DT.
pub fn to_depdt(tree: &RstTree) -> DepDt {
    let n = tree.edu_count();
    let mut dep = DepDt {
        head: tree.root().head(),
        parent: vec![None; n],
        depth: vec![0; n],
        relation: vec![None; n],
    };
    attach(tree.root(), None, &mut dep);
    dep
}

/// Free-function form of [`DepDt::depths`].
pub fn depths(dep: &DepDt) -> &[usize] {
    dep.depths()
}

fn attach<'a>(node: &'a RstNode, governor: Option<Governor<'a>>, dep: &mut DepDt) {
    let unit_depth = governor.map_or(0, |g| g.depth + 1);
    match node {
        RstNode::Leaf(edu) => {
            let i = edu.id - 1;
            dep.depth[i] = unit_depth;
            if let Some(g) = governor {
                dep.parent[i] = Some(g.edu);
                dep.relation[i] = Some(g.relation.clone());
            }
        }
        RstNode::NucSat { relation, nucleus, satellite, .. } => {
            let head = nucleus.head();
            attach(nucleus, governor, dep);
            attach(satellite, Some(Governor { edu: head, depth: unit_depth, relation }), dep);
        }
        RstNode::Multi { relation, nuclei } => {
            let head = node.head();
            let co_governor = governor.unwrap_or(Governor { edu: head, depth: 0, relation });
            for (i, child) in nuclei.iter().enumerate() {
                attach(child, if i == 0 { governor } else { Some(co_governor) }, dep);
            }
        }
    }
}
