//! Cargo, fuel and smoke.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde_json::{json, Value};

use super::{parse_deep, BioHistory, HistoryError, NodeId};
use crate::net::{Marking, Net, PlaceId};

/// Roles are ordered the way they may appear along a root-to-leaf path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Cargo,
    Fuel,
    Smoke,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Cargo => "cargo",
            Role::Fuel => "fuel",
            Role::Smoke => "smoke",
        }
    }

    /// Fuel and smoke nodes carry tokens that do not reach the last level.
    pub fn is_transport(self) -> bool {
        self != Role::Cargo
    }

    fn parse(s: &str) -> Option<Role> {
        match s {
            "cargo" => Some(Role::Cargo),
            "fuel" => Some(Role::Fuel),
            "smoke" => Some(Role::Smoke),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoration {
    roles: Vec<Role>,
}

impl Decoration {
    pub fn from_roles(roles: Vec<Role>) -> Self {
        Decoration { roles }
    }

    pub fn role(&self, v: NodeId) -> Role {
        self.roles[v]
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    /// Nodes of level `i` with role `role`.
    pub fn count_at(&self, h: &BioHistory, i: usize, role: Role) -> Marking {
        let mut m = Marking::zero(h.place_count());
        for &v in h.level_nodes(i) {
            if self.roles[v] == role {
                m.add_to(h.label(v), 1);
            }
        }
        m
    }

    pub fn parse(h: &BioHistory, text: &str) -> Result<Decoration, HistoryError> {
        Self::from_json(h, &parse_deep(text)?)
    }

    /// Reads `{"roles": [...]}`, nested exactly like the history's trees.
    pub fn from_json(h: &BioHistory, value: &Value) -> Result<Decoration, HistoryError> {
        let bad = |msg: &str| HistoryError::Schema(format!("decoration: {msg}"));
        let trees = value.get("roles").and_then(Value::as_array).ok_or_else(|| bad("`roles` must be an array"))?;
        if trees.len() != h.roots().len() {
            return Err(bad("tree count differs from the history"));
        }
        let mut roles = vec![Role::Fuel; h.node_count()];
        let empty = Vec::new();
        let mut stack: Vec<(NodeId, &Value)> = h.roots().iter().copied().zip(trees).collect();
        while let Some((v, node)) = stack.pop() {
            let role = node.get("role").and_then(Value::as_str).and_then(Role::parse);
            roles[v] = role.ok_or_else(|| bad("each node needs a role of cargo, fuel or smoke"))?;
            let kids = match node.get("children") {
                Some(c) => c.as_array().ok_or_else(|| bad("`children` must be an array"))?,
                None => &empty,
            };
            if kids.len() != h.children(v).len() {
                return Err(bad("shape differs from the history"));
            }
            stack.extend(h.children(v).iter().copied().zip(kids));
        }
        Ok(Decoration { roles })
    }

    pub fn to_json(&self, h: &BioHistory) -> Value {
        fn tree(d: &Decoration, h: &BioHistory, v: NodeId) -> Value {
            json!({
                "role": d.roles[v].as_str(),
                "children": h.children(v).iter().map(|&c| tree(d, h, c)).collect::<Vec<_>>(),
            })
        }
        json!({ "roles": h.roots().iter().map(|&r| tree(self, h, r)).collect::<Vec<_>>() })
    }
}

/// Which node reaches the last level: the cargo of every decoration.
pub(crate) fn cargo_mask(h: &BioHistory) -> Vec<bool> {
    let mut cargo = vec![false; h.node_count()];
    for &v in h.level_nodes(h.length()) {
        cargo[v] = true;
    }
    // Preorder ids put every child after its parent.
    for v in (0..h.node_count()).rev() {
        if cargo[v] {
            if let Some(p) = h.parent(v) {
                cargo[p] = true;
            }
        }
    }
    cargo
}

/// Cargo where forced, fuel everywhere else.
pub fn default_decoration(h: &BioHistory) -> Decoration {
    let roles = cargo_mask(h).into_iter().map(|c| if c { Role::Cargo } else { Role::Fuel }).collect();
    Decoration { roles }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// A node's cargo role disagrees with whether it reaches the last level.
    Cargo,
    /// A smoke node has a non-smoke child.
    SmokeChildren,
    /// Smoke nodes of a place at a level with no fuel nodes of that place.
    SmokeWithoutFuel,
    /// A child's role precedes its parent's in the cargo, fuel, smoke order.
    Order,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub level: usize,
    pub place: PlaceId,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::Cargo => "cargo condition",
            ViolationKind::SmokeChildren => "smoke with non-smoke children",
            ViolationKind::SmokeWithoutFuel => "smoke without fuel",
            ViolationKind::Order => "role order along a path",
        };
        write!(f, "{what} at level {} for place #{}", self.level, self.place)
    }
}

/// Empty iff `d` is a decoration of `h`.
pub fn validate_decoration(h: &BioHistory, d: &Decoration) -> Vec<Violation> {
    let mut out = Vec::new();
    if d.roles.len() != h.node_count() {
        out.push(Violation { kind: ViolationKind::Cargo, level: 0, place: 0 });
        return out;
    }
    let cargo = cargo_mask(h);
    for v in 0..h.node_count() {
        let at = |kind| Violation { kind, level: h.level(v), place: h.label(v) };
        if cargo[v] != (d.roles[v] == Role::Cargo) {
            out.push(at(ViolationKind::Cargo));
        }
        for &c in h.children(v) {
            if d.roles[v] == Role::Smoke && d.roles[c] != Role::Smoke {
                out.push(at(ViolationKind::SmokeChildren));
            } else if d.roles[c] < d.roles[v] {
                out.push(at(ViolationKind::Order));
            }
        }
    }
    for i in 1..=h.length() {
        let smoke = d.count_at(h, i, Role::Smoke);
        let fuel = d.count_at(h, i, Role::Fuel);
        for p in 0..h.place_count() {
            if smoke.get(p) > 0 && fuel.get(p) == 0 {
                out.push(Violation { kind: ViolationKind::SmokeWithoutFuel, level: i, place: p });
            }
        }
    }
    out
}

/// `(cargo multiset, fuel multiset, smoke support)` of a level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Footprint {
    pub cargo: Marking,
    pub fuel: Marking,
    pub smoke: BTreeSet<PlaceId>,
}

impl Footprint {
    pub fn to_json(&self, net: &Net) -> Value {
        json!({
            "cargo": net.marking_to_json(&self.cargo),
            "fuel": net.marking_to_json(&self.fuel),
            "smoke": self.smoke.iter().map(|&p| net.place_name(p)).collect::<Vec<_>>(),
        })
    }
}

pub fn footprint_at(h: &BioHistory, d: &Decoration, i: usize) -> Result<Footprint, HistoryError> {
    if i == 0 || i > h.length() {
        return Err(HistoryError::LevelOutOfRange(i));
    }
    Ok(Footprint {
        cargo: d.count_at(h, i, Role::Cargo),
        fuel: d.count_at(h, i, Role::Fuel),
        smoke: d.count_at(h, i, Role::Smoke).support().into_iter().collect(),
    })
}

/// Places with more than `n` fuel nodes at some level, with the earliest such
/// level, in place order.
pub fn wasteful_places(h: &BioHistory, d: &Decoration) -> Vec<(PlaceId, usize)> {
    let n = h.place_count() as u64;
    let mut first: BTreeMap<PlaceId, usize> = BTreeMap::new();
    for i in 1..=h.length() {
        let fuel = d.count_at(h, i, Role::Fuel);
        for p in 0..h.place_count() {
            if fuel.get(p) > n {
                first.entry(p).or_insert(i);
            }
        }
    }
    first.into_iter().collect()
}

/// Every level at which each place is wasteful, in place order. Places that
/// are never wasteful are left out.
pub fn wasteful_levels(h: &BioHistory, d: &Decoration) -> Vec<(PlaceId, Vec<usize>)> {
    let n = h.place_count() as u64;
    let mut levels: BTreeMap<PlaceId, Vec<usize>> = BTreeMap::new();
    for i in 1..=h.length() {
        let fuel = d.count_at(h, i, Role::Fuel);
        for p in (0..h.place_count()).filter(|&p| fuel.get(p) > n) {
            levels.entry(p).or_default().push(i);
        }
    }
    levels.into_iter().collect()
}

/// `last(r)` for every place: the last level holding a transportation r-node.
pub(crate) fn last_levels(h: &BioHistory, d: &Decoration) -> Vec<Option<usize>> {
    let mut last = vec![None; h.place_count()];
    for v in 0..h.node_count() {
        if d.role(v).is_transport() {
            let slot = &mut last[h.label(v)];
            *slot = Some(slot.map_or(h.level(v), |l: usize| l.max(h.level(v))));
        }
    }
    last
}

/// One step of a place-level path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PathStep {
    /// `(r, l) -> (r, l + 1)` with `l < last(r)`.
    Idle,
    /// Through the transportation node `witness` to its child labeled `to`.
    Transport { witness: NodeId, to: PlaceId },
}

/// Breadth-first exploration of place-levels from `(p, i)`. Returns, for each
/// reached place-level, the step that first reached it and its predecessor.
pub(crate) fn place_level_tree(
    h: &BioHistory,
    d: &Decoration,
    p: PlaceId,
    i: usize,
) -> BTreeMap<(PlaceId, usize), Option<((PlaceId, usize), PathStep)>> {
    let last = last_levels(h, d);
    let mut seen = BTreeMap::new();
    seen.insert((p, i), None);
    let mut queue = VecDeque::from([(p, i)]);
    while let Some((r, l)) = queue.pop_front() {
        if l >= h.length() {
            continue;
        }
        // For each target place, the lowest-id witness.
        let mut witness: BTreeMap<PlaceId, NodeId> = BTreeMap::new();
        for &v in h.level_nodes(l) {
            if h.label(v) == r && d.role(v).is_transport() {
                for &c in h.children(v) {
                    witness.entry(h.label(c)).or_insert(v);
                }
            }
        }
        for s in 0..h.place_count() {
            let step = if s == r && last[r].is_some_and(|lr| l < lr) {
                Some(PathStep::Idle)
            } else {
                witness.get(&s).map(|&w| PathStep::Transport { witness: w, to: s })
            };
            if let Some(step) = step {
                if let std::collections::btree_map::Entry::Vacant(e) = seen.entry((s, l + 1)) {
                    e.insert(Some(((r, l), step)));
                    queue.push_back((s, l + 1));
                }
            }
        }
    }
    seen
}

/// `R_{p,i}`: the place-levels reachable from `(p, i)` by doing-nothing and
/// transportation steps.
pub fn place_level_reach(h: &BioHistory, d: &Decoration, p: PlaceId, i: usize) -> BTreeSet<(PlaceId, usize)> {
    place_level_tree(h, d, p, i).into_keys().collect()
}
