//! Realizability: matching levels of a history to blocks of firings.

use serde_json::{json, Value};

use super::{BioHistory, Builder, HistoryError, NodeId, Role};
use crate::net::{AcceleratedSequence, Marking, Net, NetError, PresetSemantics, TransitionId};

/// How level `i` evolves into level `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    /// `None` for a level where nothing moves and no transition fits.
    pub transition: Option<TransitionId>,
    /// The nodes that fire, all labeled with the transition's source.
    pub active: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizationCertificate {
    pub steps: Vec<Step>,
}

impl RealizationCertificate {
    /// The realizing sequence with idle levels dropped and consecutive blocks
    /// of one transition merged.
    pub fn sequence(&self) -> AcceleratedSequence {
        let mut seq = AcceleratedSequence::new();
        for step in &self.steps {
            if let (Some(t), k) = (step.transition, step.active.len() as u64) {
                if k > 0 {
                    seq.push_merged(t, k);
                }
            }
        }
        seq
    }

    /// One `(transition, k)` per level, idle levels included.
    pub fn multiplicities(&self) -> Vec<(Option<TransitionId>, u64)> {
        self.steps.iter().map(|s| (s.transition, s.active.len() as u64)).collect()
    }

    pub fn to_json(&self, net: &Net) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "transition": s.transition.map(|t| net.transition(t).name.clone()),
                    "k": s.active.len(),
                })
            })
            .collect();
        json!({ "steps": steps, "sequence": net.sequence_to_json(&self.sequence()) })
    }
}

fn fail(level: usize, reason: impl Into<String>) -> HistoryError {
    HistoryError::NotRealizable { level, reason: reason.into() }
}

fn has_observer(net: &Net, h: &BioHistory, nodes: &[NodeId], active: &[NodeId], t: TransitionId) -> bool {
    let tr = net.transition(t);
    let Some(o) = tr.observe else { return true };
    let passive = |v: &NodeId| !active.contains(v);
    match net.preset_semantics() {
        PresetSemantics::Set if o == tr.source => nodes.iter().any(|&v| h.label(v) == o),
        _ => nodes.iter().filter(|v| passive(v)).any(|&v| h.label(v) == o),
    }
}

/// Children labels of `v` as counts per place.
fn child_counts(h: &BioHistory, v: NodeId) -> Vec<u64> {
    let mut c = vec![0; h.place_count()];
    for &u in h.children(v) {
        c[h.label(u)] += 1;
    }
    c
}

/// Finds, level by level, a transition and active set that realize `h`.
/// Nodes with exactly one same-labeled child are passive; every other node
/// below the last level must fire. Among fitting transitions the lowest
/// index wins.
pub fn realize(net: &Net, h: &BioHistory) -> Result<RealizationCertificate, HistoryError> {
    if h.place_count() != net.place_count() {
        return Err(NetError::Dimension { expected: net.place_count(), got: h.place_count() }.into());
    }
    let mut steps = Vec::with_capacity(h.length().saturating_sub(1));
    for i in 1..h.length() {
        let nodes = h.level_nodes(i);
        let active: Vec<NodeId> = nodes.iter().copied().filter(|&v| !h.is_identity(v)).collect();
        if active.is_empty() {
            let t = (0..net.transitions().len())
                .find(|&t| net.transition(t).observe.is_some() && has_observer(net, h, nodes, &[], t));
            steps.push(Step { transition: t, active });
            continue;
        }
        let source = h.label(active[0]);
        if let Some(&v) = active.iter().find(|&&v| h.label(v) != source) {
            return Err(fail(
                i,
                format!("nodes labeled {} and {} both fire", net.place_name(source), net.place_name(h.label(v))),
            ));
        }
        let create = child_counts(h, active[0]);
        if active.iter().any(|&v| child_counts(h, v) != create) {
            return Err(fail(i, "firing nodes have different children"));
        }
        let candidates: Vec<TransitionId> = (0..net.transitions().len())
            .filter(|&t| net.transition(t).source == source && net.transition(t).create == create)
            .collect();
        if candidates.is_empty() {
            return Err(fail(i, format!("no transition consumes {} and creates these children", net.place_name(source))));
        }
        match candidates.iter().find(|&&t| has_observer(net, h, nodes, &active, t)) {
            Some(&t) => steps.push(Step { transition: Some(t), active }),
            None => {
                let t = net.transition(candidates[0]);
                let o = t.observe.map_or("?", |o| net.place_name(o));
                return Err(fail(i, format!("{} fires but no idle node observes {o}", t.name)));
            }
        }
    }
    Ok(RealizationCertificate { steps })
}

/// Checks that `seq`, one block per level, realizes `h` exactly.
pub fn verify_realization(net: &Net, h: &BioHistory, seq: &AcceleratedSequence) -> Result<(), HistoryError> {
    if seq.accelerated_length() + 1 != h.length() {
        return Err(fail(
            h.length(),
            format!("{} blocks for a history of length {}", seq.accelerated_length(), h.length()),
        ));
    }
    for (idx, block) in seq.blocks().iter().enumerate() {
        let i = idx + 1;
        let tr = net.transition(block.transition);
        let nodes = h.level_nodes(i);
        let active: Vec<NodeId> = nodes.iter().copied().filter(|&v| !h.is_identity(v)).collect();
        let idle_firing = tr.create[tr.source] == 1 && tr.create_size() == 1;
        if !idle_firing && active.len() as u64 != block.times {
            return Err(fail(i, format!("{} nodes fire, block {} has {}", active.len(), tr.name, block.times)));
        }
        for &v in &active {
            if h.label(v) != tr.source || child_counts(h, v) != tr.create {
                return Err(fail(i, format!("a firing node does not match {}", tr.name)));
            }
        }
        if !has_observer(net, h, nodes, &active, block.transition) {
            return Err(fail(i, format!("no idle node observes for {}", tr.name)));
        }
    }
    Ok(())
}

/// A canonical realizable history for `seq` fired from `from`.
///
/// Each block fires on the leftmost source nodes. When a block needs more
/// source nodes than a level holds (possible only if the transition recreates
/// its source), it is spread over several levels, so the history can be
/// longer than `blocks + 1`.
pub fn history_from_sequence(net: &Net, from: &Marking, seq: &AcceleratedSequence) -> Result<BioHistory, HistoryError> {
    net.apply_sequence(from, seq)?;
    let mut b = Builder::default();
    let mut current = Vec::new();
    for (p, &c) in from.counts().iter().enumerate() {
        for _ in 0..c {
            let v = b.node(p, Role::Fuel);
            b.roots.push(v);
            current.push(v);
        }
    }
    let mut length = 1;
    for (idx, block) in seq.blocks().iter().enumerate() {
        let tr = net.transition(block.transition);
        let reserve = tr.observe == Some(tr.source) && net.preset_semantics() == PresetSemantics::Multiset;
        let mut remaining = block.times;
        while remaining > 0 {
            let sources = current.iter().filter(|&&v| b.label(v) == tr.source).count() as u64;
            let fire = remaining.min(sources.saturating_sub(reserve as u64));
            if fire == 0 {
                return Err(NetError::Block {
                    block: idx,
                    cause: Box::new(NetError::NotEnabled { transition: tr.name.clone(), step: 1 }),
                }
                .into());
            }
            let mut fired = 0;
            let mut next = Vec::with_capacity(current.len());
            for &v in &current {
                if fired < fire && b.label(v) == tr.source {
                    fired += 1;
                    for (p, &c) in tr.create.iter().enumerate() {
                        for _ in 0..c {
                            next.push(b.child(v, p, Role::Fuel));
                        }
                    }
                } else {
                    next.push(b.child(v, b.label(v), Role::Fuel));
                }
            }
            current = next;
            remaining -= fire;
            length += 1;
        }
    }
    Ok(b.finish(net.place_count(), length)?.0)
}
