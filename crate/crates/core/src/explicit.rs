//! Explicit-state search with per-place and total token caps.
//!
//! These engines are the ground truth the symbolic engines are checked
//! against. A search never silently truncates: whenever a successor would
//! leave the capped box and the query is not answered positively, the verdict
//! is `UnknownCapped`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde_json::{json, Value};
use thiserror::Error;

use crate::net::{AcceleratedSequence, Block, Marking, Net, NetError, TransitionId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("caps ({cap_per_place} per place, {cap_total} total) do not cover marking {marking}")]
    CapMisconfigured {
        cap_per_place: u64,
        cap_total: u64,
        marking: Marking,
    },
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchParams {
    pub cap_per_place: u64,
    pub cap_total: u64,
    /// Bound on the number of blocks explored from the start marking.
    pub max_blocks: Option<usize>,
}

impl SearchParams {
    pub fn new(cap_per_place: u64, cap_total: u64) -> Self {
        SearchParams { cap_per_place, cap_total, max_blocks: None }
    }

    /// Per-place cap with a non-binding total cap.
    pub fn per_place(cap: u64, places: usize) -> Self {
        SearchParams::new(cap, cap.saturating_mul(places as u64))
    }

    pub fn admits(&self, m: &Marking) -> bool {
        m.max_count() <= self.cap_per_place && m.total() <= self.cap_total
    }

    fn require(&self, m: &Marking) -> Result<(), SearchError> {
        if self.admits(m) {
            Ok(())
        } else {
            Err(SearchError::CapMisconfigured {
                cap_per_place: self.cap_per_place,
                cap_total: self.cap_total,
                marking: m.clone(),
            })
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cap_per_place": self.cap_per_place,
            "cap_total": self.cap_total,
            "max_blocks": self.max_blocks,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    True,
    False,
    UnknownCapped,
}

impl Answer {
    pub fn as_str(&self) -> &'static str {
        match self {
            Answer::True => "true",
            Answer::False => "false",
            Answer::UnknownCapped => "unknown-capped",
        }
    }

    pub fn is_true(&self) -> bool {
        *self == Answer::True
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub answer: Answer,
    pub witness: Option<AcceleratedSequence>,
    pub explored: usize,
}

impl Verdict {
    pub fn to_json(&self, net: &Net) -> Value {
        json!({
            "answer": self.answer.as_str(),
            "witness": self.witness.as_ref().map(|w| net.sequence_to_json(w)),
            "explored": self.explored,
        })
    }
}

/// Result of a minimal accelerated length query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinLength {
    pub length: Option<usize>,
    pub witness: Option<AcceleratedSequence>,
    /// The search hit a cap, so `None` is not a proof of unreachability.
    pub capped: bool,
    pub explored: usize,
}

/// Largest capped box indexed by a flat array instead of a hash map.
const DENSE_LIMIT: u64 = 1 << 22;

/// Position lookup for visited markings. Small boxes use a flat array
/// indexed by the mixed-radix encoding of the counts.
enum Index {
    Dense { radix: u64, slots: Vec<u32> },
    Sparse(HashMap<Marking, usize>),
}

impl Index {
    fn new(params: &SearchParams, places: usize) -> Self {
        let radix = params.cap_per_place.saturating_add(1);
        let size = (0..places).try_fold(1u64, |acc, _| acc.checked_mul(radix).filter(|&s| s <= DENSE_LIMIT));
        match size {
            Some(size) => Index::Dense { radix, slots: vec![0; size as usize] },
            None => Index::Sparse(HashMap::new()),
        }
    }

    fn slot(radix: u64, m: &Marking) -> usize {
        m.counts().iter().rev().fold(0u64, |acc, &c| acc * radix + c) as usize
    }

    fn get(&self, m: &Marking) -> Option<usize> {
        match self {
            Index::Dense { radix, slots } => slots[Self::slot(*radix, m)].checked_sub(1).map(|v| v as usize),
            Index::Sparse(map) => map.get(m).copied(),
        }
    }

    fn insert(&mut self, m: &Marking, id: usize) {
        match self {
            Index::Dense { radix, slots } => slots[Self::slot(*radix, m)] = id as u32 + 1,
            Index::Sparse(map) => {
                map.insert(m.clone(), id);
            }
        }
    }
}

/// Breadth-first store of visited markings with back-pointers.
struct Visited {
    states: Vec<Marking>,
    parent: Vec<Option<(usize, Block)>>,
    depth: Vec<usize>,
    index: Index,
}

impl Visited {
    fn new(root: Marking, params: &SearchParams) -> Self {
        let mut index = Index::new(params, root.dim());
        index.insert(&root, 0);
        Visited { states: vec![root], parent: vec![None], depth: vec![0], index }
    }

    fn insert(&mut self, m: Marking, from: usize, block: Block) -> Option<usize> {
        if self.index.get(&m).is_some() {
            return None;
        }
        let id = self.states.len();
        self.index.insert(&m, id);
        self.states.push(m);
        self.parent.push(Some((from, block)));
        self.depth.push(self.depth[from] + 1);
        Some(id)
    }

    fn path_to(&self, mut id: usize) -> AcceleratedSequence {
        let mut blocks = Vec::new();
        while let Some((prev, b)) = self.parent[id] {
            blocks.push(b);
            id = prev;
        }
        blocks.reverse();
        let mut seq = AcceleratedSequence::new();
        for b in blocks {
            seq.push_merged(b.transition, b.times);
        }
        seq
    }
}

/// Successors by single firings that stay within the caps. Returns whether
/// some successor was cut off by a cap.
fn single_successors(net: &Net, m: &Marking, params: &SearchParams, out: &mut Vec<(TransitionId, Marking)>) -> bool {
    out.clear();
    let mut touched = false;
    for t in 0..net.transitions().len() {
        if !net.enabled(m, t) {
            continue;
        }
        match net.fire_unchecked(m, t, 1) {
            Ok(next) if params.admits(&next) => out.push((t, next)),
            _ => touched = true,
        }
    }
    touched
}

/// Successors by whole blocks `t^k`, every valid `k` under the caps.
fn block_successors(net: &Net, m: &Marking, params: &SearchParams, out: &mut Vec<(Block, Marking)>) -> bool {
    out.clear();
    let mut touched = false;
    for t in 0..net.transitions().len() {
        let max = net.max_fireable(m, t);
        if max == Some(0) {
            continue;
        }
        // A block that leaves the marking unchanged needs only one representative.
        let tr = net.transition(t);
        let idle = tr.create[tr.source] == 1 && tr.create_size() == 1;
        let mut k = 1;
        loop {
            if max.is_some_and(|mx| k > mx) || (idle && k > 1) {
                break;
            }
            // Every place other than the source only gains tokens as k grows,
            // so once a cap is exceeded it stays exceeded.
            match net.fire_unchecked(m, t, k) {
                Ok(next) if params.admits(&next) => out.push((Block { transition: t, times: k }, next)),
                _ => {
                    touched = true;
                    break;
                }
            }
            k += 1;
        }
    }
    touched
}

fn search<F>(net: &Net, from: &Marking, params: &SearchParams, mut goal: F) -> Result<Verdict, SearchError>
where
    F: FnMut(&Marking) -> bool,
{
    params.require(from)?;
    let mut visited = Visited::new(from.clone(), params);
    if goal(from) {
        return Ok(Verdict { answer: Answer::True, witness: Some(AcceleratedSequence::new()), explored: 1 });
    }
    let mut queue = VecDeque::from([0usize]);
    let mut touched = false;
    let mut single = Vec::new();
    let mut blocks = Vec::new();
    while let Some(id) = queue.pop_front() {
        let current = visited.states[id].clone();
        let successors: Vec<(Block, Marking)> = if let Some(limit) = params.max_blocks {
            if visited.depth[id] >= limit {
                touched = true;
                continue;
            }
            touched |= block_successors(net, &current, params, &mut blocks);
            std::mem::take(&mut blocks)
        } else {
            touched |= single_successors(net, &current, params, &mut single);
            single.drain(..).map(|(t, m)| (Block { transition: t, times: 1 }, m)).collect()
        };
        for (block, next) in successors {
            let hit = goal(&next);
            if let Some(nid) = visited.insert(next, id, block) {
                if hit {
                    return Ok(Verdict {
                        answer: Answer::True,
                        witness: Some(visited.path_to(nid)),
                        explored: visited.states.len(),
                    });
                }
                queue.push_back(nid);
            }
        }
    }
    Ok(Verdict {
        answer: if touched { Answer::UnknownCapped } else { Answer::False },
        witness: None,
        explored: visited.states.len(),
    })
}

/// Is `to` reachable from `from` without leaving the caps?
pub fn reach(net: &Net, from: &Marking, to: &Marking, params: &SearchParams) -> Result<Verdict, SearchError> {
    params.require(to)?;
    search(net, from, params, |m| m == to)
}

/// Is some marking `>= target` reachable? Direct search for a covering state.
pub fn cover(net: &Net, from: &Marking, target: &Marking, params: &SearchParams) -> Result<Verdict, SearchError> {
    params.require(target)?;
    search(net, from, params, |m| m.covers(target))
}

/// Coverability through the destroyer reduction: add a destroyer on every
/// place and ask for exact reachability of `target`. The witness has the
/// destroyer blocks removed, so it replays in `net` to a covering marking.
pub fn cover_by_reduction(
    net: &Net,
    from: &Marking,
    target: &Marking,
    params: &SearchParams,
) -> Result<Verdict, SearchError> {
    let all: Vec<usize> = (0..net.place_count()).collect();
    let extended = net.add_destroyers(&all)?;
    let original = net.transitions().len();
    let mut verdict = reach(&extended, from, target, params)?;
    verdict.witness = verdict.witness.map(|w| {
        let mut kept = AcceleratedSequence::new();
        for b in w.blocks().iter().filter(|b| b.transition < original) {
            kept.push_merged(b.transition, b.times);
        }
        kept
    });
    Ok(verdict)
}

/// Least number of blocks `t^k` leading from `from` to `to` within the caps.
pub fn min_accelerated_length(
    net: &Net,
    from: &Marking,
    to: &Marking,
    params: &SearchParams,
) -> Result<MinLength, SearchError> {
    params.require(from)?;
    params.require(to)?;
    let mut visited = Visited::new(from.clone(), params);
    if from == to {
        return Ok(MinLength { length: Some(0), witness: Some(AcceleratedSequence::new()), capped: false, explored: 1 });
    }
    let mut queue = VecDeque::from([0usize]);
    let mut touched = false;
    let mut out = Vec::new();
    while let Some(id) = queue.pop_front() {
        if params.max_blocks.is_some_and(|limit| visited.depth[id] >= limit) {
            touched = true;
            continue;
        }
        let current = visited.states[id].clone();
        touched |= block_successors(net, &current, params, &mut out);
        for (block, next) in out.drain(..) {
            let hit = &next == to;
            if let Some(nid) = visited.insert(next, id, block) {
                if hit {
                    let witness = visited.path_to(nid);
                    return Ok(MinLength {
                        length: Some(visited.depth[nid]),
                        witness: Some(witness),
                        capped: touched,
                        explored: visited.states.len(),
                    });
                }
                queue.push_back(nid);
            }
        }
    }
    Ok(MinLength { length: None, witness: None, capped: touched, explored: visited.states.len() })
}

/// Least block count from `from` to every marking reachable within the caps,
/// and whether a cap cut the exploration short.
pub fn accelerated_distances(
    net: &Net,
    from: &Marking,
    params: &SearchParams,
) -> Result<(HashMap<Marking, usize>, bool), SearchError> {
    params.require(from)?;
    let mut visited = Visited::new(from.clone(), params);
    let mut queue = VecDeque::from([0usize]);
    let mut touched = false;
    let mut out = Vec::new();
    while let Some(id) = queue.pop_front() {
        let current = visited.states[id].clone();
        touched |= block_successors(net, &current, params, &mut out);
        for (block, next) in out.drain(..) {
            if let Some(nid) = visited.insert(next, id, block) {
                queue.push_back(nid);
            }
        }
    }
    let depth = visited.depth;
    Ok((visited.states.into_iter().zip(depth).collect(), touched))
}

/// All markings within the caps that reach `to` along a path inside the caps.
///
/// Computed backwards from `to` by inverting single firings.
pub fn pre_image_bounded(net: &Net, to: &Marking, params: &SearchParams) -> Result<BTreeSet<Marking>, SearchError> {
    Ok(backward_closure(net, to, params)?.into_iter().collect())
}

/// [`pre_image_bounded`] without the ordering.
pub(crate) fn backward_closure(net: &Net, to: &Marking, params: &SearchParams) -> Result<HashSet<Marking>, SearchError> {
    params.require(to)?;
    let n = net.place_count();
    let mut seen: HashSet<Marking> = HashSet::new();
    seen.insert(to.clone());
    let mut queue = VecDeque::from([to.clone()]);
    while let Some(current) = queue.pop_front() {
        'transitions: for (t, tr) in net.transitions().iter().enumerate() {
            let mut pred = current.clone().into_counts();
            for p in 0..n {
                if pred[p] < tr.create[p] {
                    continue 'transitions;
                }
                pred[p] -= tr.create[p];
            }
            pred[tr.source] += 1;
            let pred = Marking::from_counts(pred);
            if !params.admits(&pred) || !net.enabled(&pred, t) {
                continue;
            }
            if seen.insert(pred.clone()) {
                queue.push_back(pred);
            }
        }
    }
    Ok(seen)
}

/// Explicit liveness: every transition can be re-enabled from every marking
/// reachable from `m`.
pub fn live_oracle(net: &Net, m: &Marking, params: &SearchParams) -> Result<Answer, SearchError> {
    params.require(m)?;
    let mut visited = Visited::new(m.clone(), params);
    let mut edges: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    let mut out = Vec::new();
    while let Some(id) = queue.pop_front() {
        let current = visited.states[id].clone();
        if single_successors(net, &current, params, &mut out) {
            return Ok(Answer::UnknownCapped);
        }
        for (t, next) in out.drain(..) {
            let nid = match visited.index.get(&next) {
                Some(nid) => nid,
                None => {
                    let nid = visited.insert(next, id, Block { transition: t, times: 1 }).unwrap();
                    edges.push(Vec::new());
                    queue.push_back(nid);
                    nid
                }
            };
            edges[id].push(nid);
        }
    }
    let count = visited.states.len();
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (u, succ) in edges.iter().enumerate() {
        for &v in succ {
            reverse[v].push(u);
        }
    }
    for t in 0..net.transitions().len() {
        let mut can_enable = vec![false; count];
        let mut stack: Vec<usize> = (0..count).filter(|&s| net.enabled(&visited.states[s], t)).collect();
        for &s in &stack {
            can_enable[s] = true;
        }
        while let Some(v) = stack.pop() {
            for &u in &reverse[v] {
                if !can_enable[u] {
                    can_enable[u] = true;
                    stack.push(u);
                }
            }
        }
        if can_enable.iter().any(|&ok| !ok) {
            return Ok(Answer::False);
        }
    }
    Ok(Answer::True)
}
