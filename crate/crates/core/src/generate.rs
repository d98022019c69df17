//! Seeded generators for nets, markings, sequences and decorations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::history::{validate_decoration, BioHistory, Decoration, Role};
use crate::net::{AcceleratedSequence, Marking, Net, PlaceId, Transition};

/// Shape of randomly generated nets.
#[derive(Clone, Copy, Debug)]
pub struct NetShape {
    pub places: usize,
    pub transitions: usize,
    /// Largest created multiset; IO nets always create exactly one token.
    pub max_create: u64,
    pub io: bool,
}

fn place_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

/// A transition as `(source, observe, create)` over `n` places.
pub fn transition(name: &str, source: PlaceId, observe: Option<PlaceId>, create: Vec<u64>) -> Transition {
    Transition { name: name.to_string(), source, observe, create }
}

pub fn random_net<R: Rng>(rng: &mut R, shape: NetShape, name: &str) -> Net {
    let n = shape.places;
    let transitions = (0..shape.transitions)
        .map(|i| {
            let mut create = vec![0; n];
            let size = if shape.io { 1 } else { rng.gen_range(0..=shape.max_create) };
            for _ in 0..size {
                create[rng.gen_range(0..n)] += 1;
            }
            transition(&format!("t{}", i + 1), rng.gen_range(0..n), Some(rng.gen_range(0..n)), create)
        })
        .collect();
    Net::new(name, place_names(n), transitions, false).expect("generated nets are well formed")
}

/// Every multiset of places of size at most `max`, smallest first.
fn multisets(n: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![0; n]];
    let mut frontier = out.clone();
    for _ in 0..max {
        let mut next = Vec::new();
        for m in &frontier {
            // Only add at or after the last occupied place to avoid repeats.
            let start = m.iter().rposition(|&c| c > 0).unwrap_or(0);
            for p in start..n {
                let mut x = m.clone();
                x[p] += 1;
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Every BIO transition over `n` places creating at most `max_create` tokens,
/// in a fixed order.
pub fn all_bio_transitions(n: usize, max_create: u64) -> Vec<(PlaceId, PlaceId, Vec<u64>)> {
    let mut out = Vec::new();
    for source in 0..n {
        for observe in 0..n {
            for create in multisets(n, max_create) {
                out.push((source, observe, create));
            }
        }
    }
    out
}

/// Every net with up to `max_transitions` transitions drawn, with repetition
/// and without regard to order, from `pool`.
pub fn all_nets(n: usize, pool: &[(PlaceId, PlaceId, Vec<u64>)], max_transitions: usize) -> Vec<Net> {
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = combos.clone();
    for _ in 0..max_transitions {
        let mut next = Vec::new();
        for c in &frontier {
            let start = c.last().copied().unwrap_or(0);
            for i in start..pool.len() {
                let mut x = c.clone();
                x.push(i);
                next.push(x);
            }
        }
        combos.extend(next.iter().cloned());
        frontier = next;
    }
    combos
        .into_iter()
        .enumerate()
        .map(|(id, combo)| {
            let ts = combo
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    let (s, o, c) = &pool[k];
                    transition(&format!("t{}", i + 1), *s, Some(*o), c.clone())
                })
                .collect();
            Net::new(format!("net-{id}"), place_names(n), ts, false).expect("well formed")
        })
        .collect()
}

/// Every marking over `n` places with counts up to `max`, in lexicographic order.
pub fn all_markings(n: usize, max: u64) -> Vec<Marking> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|m: Vec<u64>| (0..=max).map(move |c| [m.clone(), vec![c]].concat())).collect();
    }
    out.into_iter().map(Marking::from_counts).collect()
}

pub fn random_marking<R: Rng>(rng: &mut R, n: usize, max: u64) -> Marking {
    Marking::from_counts((0..n).map(|_| rng.gen_range(0..=max)).collect())
}

/// A fireable sequence of up to `max_blocks` blocks, each of at most `max_k`
/// firings. Stops early when nothing is enabled.
pub fn random_sequence<R: Rng>(rng: &mut R, net: &Net, from: &Marking, max_blocks: usize, max_k: u64) -> AcceleratedSequence {
    let mut seq = AcceleratedSequence::new();
    let mut m = from.clone();
    let blocks = rng.gen_range(0..=max_blocks);
    for _ in 0..blocks {
        let enabled: Vec<usize> = (0..net.transitions().len()).filter(|&t| net.enabled(&m, t)).collect();
        let Some(&t) = enabled.choose(rng) else { break };
        let max = net.max_fireable(&m, t).unwrap_or(max_k).min(max_k);
        let k = rng.gen_range(1..=max);
        m = net.fire(&m, t, k).expect("k within the fireable range");
        seq.push(t, k);
    }
    seq
}

/// Turns random maximal non-cargo subtrees of `d` into smoke, keeping only
/// changes that leave a valid decoration.
pub fn random_smoke<R: Rng>(rng: &mut R, h: &BioHistory, d: &Decoration, attempts: usize) -> Decoration {
    let mut roles = d.roles().to_vec();
    let candidates: Vec<usize> = (0..h.node_count()).filter(|&v| roles[v] == Role::Fuel).collect();
    for _ in 0..attempts {
        let Some(&v) = candidates.choose(rng) else { break };
        if roles[v] != Role::Fuel {
            continue;
        }
        let before: BTreeMap<usize, Role> = h.subtree(v).into_iter().map(|u| (u, roles[u])).collect();
        for &u in before.keys() {
            roles[u] = Role::Smoke;
        }
        if !validate_decoration(h, &Decoration::from_roles(roles.clone())).is_empty() {
            for (u, r) in before {
                roles[u] = r;
            }
        }
    }
    Decoration::from_roles(roles)
}
