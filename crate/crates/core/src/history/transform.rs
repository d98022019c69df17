//! History transformations: smoke rescaling, bunch replacement, fuel
//! efficiency and footprint-based shortening.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::decoration::{last_levels, place_level_tree, PathStep};
use super::{
    footprint_at, realize, validate_decoration, wasteful_places, BioHistory, Builder, Decoration, Footprint,
    HistoryError, NodeId, Role,
};
use crate::net::{Marking, Net, PlaceId};

fn require_valid(h: &BioHistory, d: &Decoration) -> Result<(), HistoryError> {
    match validate_decoration(h, d).first() {
        None => Ok(()),
        Some(v) => Err(HistoryError::InvalidDecoration(v.to_string())),
    }
}

/// Rebuilds `h` without the level-1 roots in `dropped` and with copies of
/// the roots in `copies` appended.
fn rebuild_roots(h: &BioHistory, d: &Decoration, dropped: &BTreeSet<NodeId>, copies: &[NodeId]) -> (BioHistory, Decoration) {
    let mut b = Builder::default();
    let kept = h.roots().iter().filter(|r| !dropped.contains(r));
    for &r in kept.chain(copies) {
        let v = b.copy_subtree(h, r, |u| d.role(u));
        b.roots.push(v);
    }
    b.finish(h.place_count(), h.length()).expect("subtrees keep their depth")
}

/// Makes the level-1 smoke of `d` equal to `mu` by copying or deleting
/// maximal smoke trees; cargo and fuel stay the same at every level.
///
/// Deleting smoke can remove the only idle observer of a level when a
/// transition observes its own source place. Surplus trees are then removed
/// one at a time, keeping only deletions after which the history is still
/// realizable; if no choice works the operation fails.
pub fn smoke_rescale(
    net: &Net,
    h: &BioHistory,
    d: &Decoration,
    mu: &Marking,
) -> Result<(BioHistory, Decoration), HistoryError> {
    realize(net, h)?;
    require_valid(h, d)?;
    let smoke_roots: Vec<NodeId> = h.level_nodes(1).iter().copied().filter(|&v| d.role(v) == Role::Smoke).collect();
    let mut by_place: BTreeMap<PlaceId, Vec<NodeId>> = BTreeMap::new();
    for &v in &smoke_roots {
        by_place.entry(h.label(v)).or_default().push(v);
    }
    let mut copies = Vec::new();
    let mut surplus: Vec<(PlaceId, usize)> = Vec::new();
    for p in 0..h.place_count() {
        let have = by_place.get(&p).map_or(0, Vec::len) as u64;
        let want = mu.get(p);
        if want > 0 && have == 0 {
            return Err(HistoryError::SmokeSupport(net.place_name(p).to_string()));
        }
        if want > have {
            let trees = &by_place[&p];
            let template = *trees.iter().min_by_key(|&&v| (h.subtree(v).len(), v)).expect("support checked");
            copies.extend(std::iter::repeat_n(template, (want - have) as usize));
        } else if have > want {
            surplus.push((p, (have - want) as usize));
        }
    }
    // Most of the time every surplus tree can go at once.
    let mut dropped: BTreeSet<NodeId> = BTreeSet::new();
    for &(p, count) in &surplus {
        dropped.extend(by_place[&p].iter().rev().take(count));
    }
    let (h2, d2) = rebuild_roots(h, d, &dropped, &copies);
    if realize(net, &h2).is_ok() {
        return Ok((h2, d2));
    }
    let mut dropped = BTreeSet::new();
    for &(p, count) in &surplus {
        let mut removed = 0;
        for &v in by_place[&p].iter().rev() {
            if removed == count {
                break;
            }
            dropped.insert(v);
            if realize(net, &rebuild_roots(h, d, &dropped, &[]).0).is_ok() {
                removed += 1;
            } else {
                dropped.remove(&v);
            }
        }
        if removed < count {
            return Err(HistoryError::SmokeRemoval(net.place_name(p).to_string()));
        }
    }
    let (h2, d2) = rebuild_roots(h, d, &dropped, &copies);
    realize(net, &h2)?;
    Ok((h2, d2))
}

/// Ingredients of the replacement for one bunch.
struct Replacement<'a> {
    h: &'a BioHistory,
    d: &'a Decoration,
    last: Vec<Option<usize>>,
    destroyers: HashMap<PlaceId, NodeId>,
}

impl Replacement<'_> {
    /// The smallest transportation subtree rooted at `(r, last(r))`.
    fn destroyer(&mut self, net: &Net, r: PlaceId) -> Result<NodeId, HistoryError> {
        if let Some(&v) = self.destroyers.get(&r) {
            return Ok(v);
        }
        let level = self.last[r].ok_or_else(|| HistoryError::NoDestroyer { place: net.place_name(r).into(), level: 0 })?;
        let v = self
            .h
            .level_nodes(level)
            .iter()
            .copied()
            .filter(|&v| self.h.label(v) == r && self.d.role(v).is_transport())
            .min_by_key(|&v| (self.h.subtree(v).len(), v))
            .ok_or_else(|| HistoryError::NoDestroyer { place: net.place_name(r).into(), level })?;
        self.destroyers.insert(r, v);
        Ok(v)
    }

    /// Extends `node`, an `r`-node at `level`, by an `r`-path to `last(r)`
    /// and then a destroyer. The path has role `role`, the destroyer's
    /// descendants are smoke.
    fn tail(&mut self, net: &Net, b: &mut Builder, mut node: usize, r: PlaceId, mut level: usize, role: Role) -> Result<(), HistoryError> {
        let last = self.last[r].unwrap_or(level);
        while level < last {
            node = b.child(node, r, role);
            level += 1;
        }
        let w = self.destroyer(net, r)?;
        b.copy_children(node, self.h, w, |_| Role::Smoke);
        Ok(())
    }
}

/// Replaces the bunch of `p`-nodes at level `i`, the earliest level where
/// `p` is wasteful, so that `p` becomes fuel-efficient.
///
/// Cargo-rooted trees of the bunch stay. One tree per place reachable from
/// `(p, i)` follows a shortest place-level path and then carries a fuel line
/// of that place up to its last transportation level, ending in a destroyer.
/// The remaining slots get smoke `p`-paths ending in a destroyer. Outside
/// the new trees, transportation nodes at reachable place-levels turn to
/// smoke.
pub fn replace_bunch(
    net: &Net,
    h: &BioHistory,
    d: &Decoration,
    p: PlaceId,
    i: usize,
) -> Result<(BioHistory, Decoration), HistoryError> {
    if !wasteful_places(h, d).contains(&(p, i)) {
        return Err(HistoryError::NotEarliestWasteful { place: net.place_name(p).into(), level: i });
    }
    realize(net, h)?;
    require_valid(h, d)?;
    let tree = place_level_tree(h, d, p, i);
    let reach: BTreeSet<(PlaceId, usize)> = tree.keys().copied().collect();
    let mut first: BTreeMap<PlaceId, usize> = BTreeMap::new();
    for &(q, j) in &reach {
        first.entry(q).and_modify(|f| *f = (*f).min(j)).or_insert(j);
    }
    let bunch: Vec<NodeId> = h.level_nodes(i).iter().copied().filter(|&v| h.label(v) == p).collect();
    let cargo = bunch.iter().filter(|&&v| d.role(v) == Role::Cargo).count();
    if bunch.len() < cargo + first.len() {
        return Err(HistoryError::BunchTooSmall { bunch: bunch.len(), cargo, fuel: first.len() });
    }

    let mut rep = Replacement { h, d, last: last_levels(h, d), destroyers: HashMap::new() };
    let mut b = Builder::default();
    let mut fresh_fuel = VecDeque::new();
    let mut fresh_smoke = VecDeque::new();
    for (&q, &fq) in &first {
        let mut path = Vec::new();
        let mut at = (q, fq);
        while let Some(Some((prev, step))) = tree.get(&at) {
            path.push((*prev, *step));
            at = *prev;
        }
        path.reverse();
        let root = b.node(p, Role::Fuel);
        let mut cur = root;
        for ((_, l), step) in path {
            cur = match step {
                PathStep::Idle => b.child(cur, b.label(cur), Role::Fuel),
                PathStep::Transport { witness, to } => {
                    let mut main = None;
                    for &c in h.children(witness) {
                        let lab = h.label(c);
                        if main.is_none() && lab == to {
                            main = Some(b.child(cur, lab, Role::Fuel));
                        } else {
                            let side = b.child(cur, lab, Role::Smoke);
                            rep.tail(net, &mut b, side, lab, l + 1, Role::Smoke)?;
                        }
                    }
                    main.expect("witness has a child with the target label")
                }
            };
        }
        rep.tail(net, &mut b, cur, q, fq, Role::Fuel)?;
        fresh_fuel.push_back(root);
    }
    for _ in 0..bunch.len() - cargo - first.len() {
        let root = b.node(p, Role::Smoke);
        rep.tail(net, &mut b, root, p, i, Role::Smoke)?;
        fresh_smoke.push_back(root);
    }

    let role = |v: NodeId| {
        if d.role(v).is_transport() && reach.contains(&(h.label(v), h.level(v))) {
            Role::Smoke
        } else {
            d.role(v)
        }
    };
    for &r in h.roots() {
        let mut stack: Vec<(NodeId, Option<usize>)> = vec![(r, None)];
        while let Some((src, parent)) = stack.pop() {
            let replaced = h.level(src) == i && h.label(src) == p && d.role(src) != Role::Cargo;
            let id = if replaced {
                // A slot under smoke can only take a smoke tree. Fuel nodes
                // never sit under smoke, so the wasteful level has more than
                // enough other slots for the fuel trees.
                let under_smoke = h.parent(src).is_some_and(|u| d.role(u) == Role::Smoke);
                let fuel = if under_smoke { None } else { fresh_fuel.pop_front() };
                fuel.or_else(|| fresh_smoke.pop_front()).expect("one new tree per replaced slot")
            } else {
                let id = b.node(h.label(src), role(src));
                stack.extend(h.children(src).iter().rev().map(|&c| (c, Some(id))));
                id
            };
            match parent {
                Some(par) => b.attach(par, id),
                None => b.roots.push(id),
            }
        }
    }
    if !fresh_fuel.is_empty() {
        return Err(HistoryError::Replacement("no slot for a fuel tree".into()));
    }
    let (h2, d2) = b.finish(h.place_count(), h.length())?;
    realize(net, &h2).map_err(|e| HistoryError::Replacement(format!("result is not realizable ({e})")))?;
    require_valid(&h2, &d2).map_err(|e| HistoryError::Replacement(e.to_string()))?;
    if h2.initial_marking() != h.initial_marking() || h2.final_marking() != h.final_marking() {
        return Err(HistoryError::Replacement("markings changed".into()));
    }
    Ok((h2, d2))
}

#[derive(Clone, Debug)]
pub struct FuelEfficient {
    pub history: BioHistory,
    pub decoration: Decoration,
    pub replacements: usize,
}

/// Replaces bunches until no place is wasteful.
pub fn make_fuel_efficient(net: &Net, h: &BioHistory, d: &Decoration) -> Result<FuelEfficient, HistoryError> {
    realize(net, h)?;
    require_valid(h, d)?;
    let mut cur = (h.clone(), d.clone());
    let mut replacements = 0;
    while let Some(&(p, i)) = wasteful_places(&cur.0, &cur.1).first() {
        // Each replacement adds p to the fuel-efficient places for good.
        if replacements == h.place_count() {
            return Err(HistoryError::Replacement("fuel-efficient places did not grow".into()));
        }
        cur = replace_bunch(net, &cur.0, &cur.1, p, i)?;
        replacements += 1;
    }
    Ok(FuelEfficient { history: cur.0, decoration: cur.1, replacements })
}

#[derive(Clone, Debug)]
pub struct Shortened {
    pub history: BioHistory,
    pub decoration: Decoration,
    pub replacements: usize,
    pub splices: usize,
}

/// Footprint of every level, 1-based order.
fn footprints(h: &BioHistory, d: &Decoration) -> Vec<Footprint> {
    (1..=h.length()).map(|i| footprint_at(h, d, i).expect("level in range")).collect()
}

/// Cuts levels `i..j` out: the suffix from `j` gets the smoke of level `i`
/// and is glued below levels `1..i`.
fn splice(net: &Net, h: &BioHistory, d: &Decoration, i: usize, j: usize) -> Option<(BioHistory, Decoration)> {
    let (suffix, sd) = h.restrict(h.level_nodes(j), Some(d));
    let (suffix, sd) = smoke_rescale(net, &suffix, &sd.expect("roles copied"), &d.count_at(h, i, Role::Smoke)).ok()?;
    let mut pool: HashMap<(PlaceId, Role), VecDeque<NodeId>> = HashMap::new();
    for &v in suffix.level_nodes(1) {
        pool.entry((suffix.label(v), sd.role(v))).or_default().push_back(v);
    }
    let mut b = Builder::default();
    for &r in h.roots() {
        let mut stack: Vec<(NodeId, Option<usize>)> = vec![(r, None)];
        while let Some((src, parent)) = stack.pop() {
            let id = if h.level(src) == i {
                let u = pool.get_mut(&(h.label(src), d.role(src)))?.pop_front()?;
                b.copy_subtree(&suffix, u, |x| sd.role(x))
            } else {
                let id = b.node(h.label(src), d.role(src));
                stack.extend(h.children(src).iter().rev().map(|&c| (c, Some(id))));
                id
            };
            match parent {
                Some(par) => b.attach(par, id),
                None => b.roots.push(id),
            }
        }
    }
    if pool.values().any(|q| !q.is_empty()) {
        return None;
    }
    let (h2, d2) = b.finish(h.place_count(), h.length() - (j - i)).ok()?;
    realize(net, &h2).ok()?;
    if !validate_decoration(&h2, &d2).is_empty() {
        return None;
    }
    Some((h2, d2))
}

/// An equivalent fuel-efficient history whose levels have pairwise distinct
/// footprints. Equal-footprint pairs are cut out widest first.
pub fn shorten(net: &Net, h: &BioHistory, d: &Decoration) -> Result<Shortened, HistoryError> {
    let fe = make_fuel_efficient(net, h, d)?;
    let (mut cur, mut dec) = (fe.history, fe.decoration);
    let mut splices = 0;
    'outer: loop {
        let fps = footprints(&cur, &dec);
        let mut groups: HashMap<&Footprint, Vec<usize>> = HashMap::new();
        for (idx, fp) in fps.iter().enumerate() {
            groups.entry(fp).or_default().push(idx + 1);
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for levels in groups.values() {
            for (a, &i) in levels.iter().enumerate() {
                pairs.extend(levels[a + 1..].iter().map(|&j| (i, j)));
            }
        }
        if pairs.is_empty() {
            break;
        }
        pairs.sort_by_key(|&(i, j)| (std::cmp::Reverse(j - i), i));
        for (i, j) in pairs {
            if let Some(next) = splice(net, &cur, &dec, i, j) {
                (cur, dec) = next;
                splices += 1;
                continue 'outer;
            }
        }
        return Err(HistoryError::SpliceFailed);
    }
    if cur.initial_marking() != h.initial_marking() || cur.final_marking() != h.final_marking() {
        return Err(HistoryError::Replacement("shortening changed the end markings".into()));
    }
    Ok(Shortened { history: cur, decoration: dec, replacements: fe.replacements, splices })
}
