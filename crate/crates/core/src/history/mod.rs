//! Histories of BIO nets: forests of place-labeled trees, one level per step.
//!
//! A [`BioHistory`] stores its nodes in an arena numbered in depth-first
//! preorder, so the nodes of any level appear in left-to-right order. A
//! [`Decoration`] is a role per node, indexed by the same ids.

mod decoration;
mod io;
mod realize;
mod transform;

#[cfg(test)]
mod tests;

use serde_json::{json, Value};
use thiserror::Error;

use crate::net::{Marking, Net, NetError, PlaceId};

pub use decoration::{
    default_decoration, footprint_at, place_level_reach, validate_decoration, wasteful_levels, wasteful_places, Decoration, Footprint,
    Role, Violation, ViolationKind,
};
pub use io::{boost, IoHistory};
pub use realize::{history_from_sequence, realize, verify_realization, RealizationCertificate, Step};
pub use transform::{make_fuel_efficient, replace_bunch, shorten, smoke_rescale, FuelEfficient, Shortened};

pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("malformed history: {0}")]
    Schema(String),
    #[error("tree reaches level {depth} but the history has length {length}")]
    TooDeep { depth: usize, length: usize },
    #[error("level {0} is out of range")]
    LevelOutOfRange(usize),
    #[error("not realizable at level {level}: {reason}")]
    NotRealizable { level: usize, reason: String },
    #[error("the history is not an IO history: {0}")]
    NotIo(String),
    #[error("trajectory is not part of the history")]
    UnknownTrajectory,
    #[error("invalid decoration: {0}")]
    InvalidDecoration(String),
    #[error("smoke target uses place {0} which has no smoke at level 1")]
    SmokeSupport(String),
    #[error("no realizable way to remove surplus smoke at place {0}")]
    SmokeRemoval(String),
    #[error("place {place} is not wasteful at level {level} or an earlier level is")]
    NotEarliestWasteful { place: String, level: usize },
    #[error("no transportation subtree at ({place}, {level}) to use as a destroyer")]
    NoDestroyer { place: String, level: usize },
    #[error("bunch of size {bunch} cannot hold {cargo} cargo trees and {fuel} fuel trees")]
    BunchTooSmall { bunch: usize, cargo: usize, fuel: usize },
    #[error("replacement failed: {0}")]
    Replacement(String),
    #[error("no equal-footprint pair could be spliced out")]
    SpliceFailed,
}

/// A forest of place-labeled trees with a declared length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BioHistory {
    places: usize,
    length: usize,
    label: Vec<PlaceId>,
    level: Vec<usize>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    roots: Vec<NodeId>,
    levels: Vec<Vec<NodeId>>,
}

impl BioHistory {
    pub fn place_count(&self) -> usize {
        self.places
    }

    /// Number of levels `h`.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn node_count(&self) -> usize {
        self.label.len()
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn label(&self, v: NodeId) -> PlaceId {
        self.label[v]
    }

    /// 1-based level of `v`.
    pub fn level(&self, v: NodeId) -> usize {
        self.level[v]
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    /// Nodes of level `i`, left to right.
    pub fn level_nodes(&self, i: usize) -> &[NodeId] {
        &self.levels[i - 1]
    }

    /// Does `v` have exactly one child, carrying its own label?
    pub fn is_identity(&self, v: NodeId) -> bool {
        matches!(self.children[v].as_slice(), [c] if self.label[*c] == self.label[v])
    }

    /// `M_H^i`.
    pub fn marking_at(&self, i: usize) -> Marking {
        let mut m = Marking::zero(self.places);
        for &v in &self.levels[i - 1] {
            m.add_to(self.label[v], 1);
        }
        m
    }

    pub fn initial_marking(&self) -> Marking {
        self.marking_at(1)
    }

    pub fn final_marking(&self) -> Marking {
        self.marking_at(self.length)
    }

    /// All markings `M_H^1 .. M_H^h`.
    pub fn markings(&self) -> Vec<Marking> {
        (1..=self.length).map(|i| self.marking_at(i)).collect()
    }

    /// Nodes of the subtree rooted at `v`, in preorder.
    pub fn subtree(&self, v: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().rev());
        }
        out
    }

    /// The forest of subtrees rooted at the given nodes, as a history whose
    /// first level is theirs. Roles travel along when a decoration is given.
    pub fn restrict(&self, roots: &[NodeId], decoration: Option<&Decoration>) -> (BioHistory, Option<Decoration>) {
        let first = roots.first().map_or(1, |&v| self.level[v]);
        let mut b = Builder::default();
        for &v in roots {
            let r = b.copy_subtree(self, v, |u| decoration.map_or(Role::Fuel, |d| d.role(u)));
            b.roots.push(r);
        }
        let (h, d) = b.finish(self.places, self.length + 1 - first).expect("subtrees fit");
        (h, decoration.map(|_| d))
    }

    /// A history with one unary tree per token of `m`.
    pub fn constant(m: &Marking, length: usize) -> BioHistory {
        let mut b = Builder::default();
        for (p, &c) in m.counts().iter().enumerate() {
            for _ in 0..c {
                let mut v = b.node(p, Role::Fuel);
                b.roots.push(v);
                for _ in 1..length {
                    v = b.child(v, p, Role::Fuel);
                }
            }
        }
        b.finish(m.dim(), length).expect("depth equals length").0
    }

    pub fn from_json(net: &Net, value: &Value) -> Result<BioHistory, HistoryError> {
        let obj = value.as_object().ok_or_else(|| schema("history must be an object"))?;
        for key in obj.keys() {
            if key != "length" && key != "trees" {
                return Err(schema(&format!("unknown field `{key}`")));
            }
        }
        let length = obj
            .get("length")
            .and_then(Value::as_u64)
            .filter(|&h| h >= 1)
            .ok_or_else(|| schema("`length` must be a positive integer"))? as usize;
        let trees = obj.get("trees").and_then(Value::as_array).ok_or_else(|| schema("`trees` must be an array"))?;
        let mut b = Builder::default();
        for tree in trees {
            let root = b.read_tree(net, tree)?;
            b.roots.push(root);
        }
        Ok(b.finish(net.place_count(), length)?.0)
    }

    pub fn parse(net: &Net, text: &str) -> Result<BioHistory, HistoryError> {
        Self::from_json(net, &parse_deep(text)?)
    }

    pub fn to_json(&self, net: &Net) -> Value {
        json!({
            "length": self.length,
            "trees": self.roots.iter().map(|&r| self.tree_json(net, r)).collect::<Vec<_>>(),
        })
    }

    fn tree_json(&self, net: &Net, v: NodeId) -> Value {
        json!({
            "label": net.place_name(self.label[v]),
            "children": self.children[v].iter().map(|&c| self.tree_json(net, c)).collect::<Vec<_>>(),
        })
    }
}

/// Parses JSON without serde_json's nesting limit; histories nest two
/// levels of JSON per level of the forest.
pub(crate) fn parse_deep(text: &str) -> Result<Value, HistoryError> {
    use serde::Deserialize;
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let value = Value::deserialize(&mut de).map_err(NetError::from_json)?;
    de.end().map_err(NetError::from_json)?;
    Ok(value)
}

fn schema(msg: &str) -> HistoryError {
    HistoryError::Schema(msg.to_string())
}

/// Incremental construction of a decorated forest. Node ids are provisional
/// until [`Builder::finish`] renumbers them in preorder.
#[derive(Default)]
pub(crate) struct Builder {
    label: Vec<PlaceId>,
    role: Vec<Role>,
    children: Vec<Vec<usize>>,
    pub(crate) roots: Vec<usize>,
}

impl Builder {
    pub(crate) fn node(&mut self, label: PlaceId, role: Role) -> usize {
        self.label.push(label);
        self.role.push(role);
        self.children.push(Vec::new());
        self.label.len() - 1
    }

    pub(crate) fn child(&mut self, parent: usize, label: PlaceId, role: Role) -> usize {
        let v = self.node(label, role);
        self.children[parent].push(v);
        v
    }

    pub(crate) fn attach(&mut self, parent: usize, v: usize) {
        self.children[parent].push(v);
    }

    pub(crate) fn label(&self, v: usize) -> PlaceId {
        self.label[v]
    }

    /// Copies the subtree of `h` at `src`, with roles given per source node.
    pub(crate) fn copy_subtree(&mut self, h: &BioHistory, src: NodeId, role: impl Fn(NodeId) -> Role) -> usize {
        let root = self.node(h.label(src), role(src));
        let mut stack = vec![(src, root)];
        while let Some((s, t)) = stack.pop() {
            for &c in h.children(s) {
                let v = self.child(t, h.label(c), role(c));
                stack.push((c, v));
            }
        }
        root
    }

    /// Attaches copies of the children of `src` below `target`.
    pub(crate) fn copy_children(&mut self, target: usize, h: &BioHistory, src: NodeId, role: impl Fn(NodeId) -> Role) {
        for &c in h.children(src) {
            let v = self.copy_subtree(h, c, &role);
            self.children[target].push(v);
        }
    }

    fn read_tree(&mut self, net: &Net, value: &Value) -> Result<usize, HistoryError> {
        let obj = value.as_object().ok_or_else(|| schema("tree nodes must be objects"))?;
        let label = obj.get("label").and_then(Value::as_str).ok_or_else(|| schema("node needs a `label`"))?;
        let v = self.node(net.place_id(label)?, Role::Fuel);
        if let Some(children) = obj.get("children") {
            let children = children.as_array().ok_or_else(|| schema("`children` must be an array"))?;
            for c in children {
                let u = self.read_tree(net, c)?;
                self.children[v].push(u);
            }
        }
        Ok(v)
    }

    pub(crate) fn finish(self, places: usize, length: usize) -> Result<(BioHistory, Decoration), HistoryError> {
        let total = self.label.len();
        let mut h = BioHistory {
            places,
            length,
            label: Vec::with_capacity(total),
            level: Vec::with_capacity(total),
            parent: Vec::with_capacity(total),
            children: Vec::with_capacity(total),
            roots: Vec::with_capacity(self.roots.len()),
            levels: vec![Vec::new(); length],
        };
        let mut roles = Vec::with_capacity(total);
        let mut stack: Vec<(usize, Option<NodeId>, usize)> = self.roots.iter().rev().map(|&r| (r, None, 1)).collect();
        while let Some((old, parent, level)) = stack.pop() {
            if level > length {
                return Err(HistoryError::TooDeep { depth: level, length });
            }
            let id = h.label.len();
            h.label.push(self.label[old]);
            h.level.push(level);
            h.parent.push(parent);
            h.children.push(Vec::new());
            h.levels[level - 1].push(id);
            roles.push(self.role[old]);
            match parent {
                Some(p) => h.children[p].push(id),
                None => h.roots.push(id),
            }
            for &c in self.children[old].iter().rev() {
                stack.push((c, Some(id), level + 1));
            }
        }
        Ok((h, Decoration::from_roles(roles)))
    }
}
