//! Flatness witnesses for IO nets.
//!
//! Every reachable pair of an IO net with transitions `t_1 .. t_m` is
//! connected by a sequence in `(t_1^* t_2^* ... t_m^*)^K` for
//! `K = (n^3 + 1)^n`. The witness lists the words `w_i = t_((i-1) mod m)+1`
//! and a generic flat counter system with one counter per place and one
//! loop per transition.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::explicit::{Answer, SearchError, SearchParams, Verdict};
use crate::net::{AcceleratedSequence, Class, Marking, Net};

/// Word lists longer than this are summarized by one period.
pub const WORD_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum FlatError {
    #[error("flatness witnesses exist for IO nets only; this net is {0}")]
    NotIo(Class),
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Clone, Debug)]
pub struct FlatWitness {
    pub k: BigUint,
    /// All `m * K` words, or `None` when that exceeds [`WORD_LIMIT`].
    pub words: Option<Vec<String>>,
    /// `t_1 .. t_m`, repeated `K` times.
    pub period: Vec<String>,
}

impl FlatWitness {
    pub fn to_json(&self, net: &Net) -> Value {
        let counters: Vec<Value> = net.places().iter().map(|p| json!({ "name": p })).collect();
        let loops: Vec<Value> = net
            .transitions()
            .iter()
            .enumerate()
            .map(|(t, tr)| {
                let mut guard = Map::new();
                let mut update = Map::new();
                for (p, &need) in net.preset(t).iter().enumerate() {
                    if need > 0 {
                        guard.insert(net.place_name(p).into(), json!(need));
                    }
                    let delta = tr.create[p] as i64 - (p == tr.source) as i64;
                    if delta != 0 {
                        update.insert(net.place_name(p).into(), json!(delta));
                    }
                }
                json!({ "word": tr.name, "guard": guard, "update": update })
            })
            .collect();
        json!({
            "K": self.k.to_string(),
            "words": self.words.as_ref().unwrap_or(&self.period),
            "words_complete": self.words.is_some(),
            "counters": counters,
            "loops": loops,
            "schedule": { "period": self.period, "repeat": self.k.to_string() },
        })
    }
}

/// The witness with `K = (n^3 + 1)^n`, or `k_override` when given.
pub fn flat_witness(net: &Net, k_override: Option<u64>) -> Result<FlatWitness, FlatError> {
    match net.classify() {
        Class::Io => {}
        other => return Err(FlatError::NotIo(other)),
    }
    let k = match k_override {
        Some(k) => BigUint::from(k),
        None => net.compute_bounds(0, 0).k_io,
    };
    let period: Vec<String> = net.transitions().iter().map(|t| t.name.clone()).collect();
    let count = &k * BigUint::from(period.len());
    let words = u64::try_from(&count).ok().filter(|&c| c <= WORD_LIMIT).map(|_| {
        let reps = usize::try_from(&k).expect("bounded by the word limit");
        period.iter().cloned().cycle().take(reps * period.len()).collect()
    });
    Ok(FlatWitness { k, words, period })
}

/// Looks for a sequence in `(t_1^* ... t_m^*)^k` from `from` to `to` within
/// the caps. A miss is `UnknownCapped`: a longer pattern or larger caps
/// might still succeed.
pub fn pattern_check(net: &Net, from: &Marking, to: &Marking, k: u64, params: &SearchParams) -> Result<Verdict, FlatError> {
    if net.classify() != Class::Io {
        return Err(FlatError::NotIo(net.classify()));
    }
    for m in [from, to] {
        if !params.admits(m) {
            return Err(SearchError::CapMisconfigured {
                cap_per_place: params.cap_per_place,
                cap_total: params.cap_total,
                marking: m.clone(),
            }
            .into());
        }
    }
    // One layer per word; each layer maps a marking to how it was reached.
    let mut layers: Vec<HashMap<Marking, Option<(Marking, u64)>>> = vec![HashMap::from([(from.clone(), None)])];
    let mut explored = 1;
    let words = net.transitions().len() as u64 * k;
    for w in 0..words {
        let t = (w % net.transitions().len() as u64) as usize;
        let prev = layers.last().expect("nonempty");
        let mut next: HashMap<Marking, Option<(Marking, u64)>> = HashMap::new();
        for m in prev.keys() {
            next.entry(m.clone()).or_insert(Some((m.clone(), 0)));
            let mut cur = m.clone();
            let mut times = 0;
            while net.enabled(&cur, t) {
                let Ok(after) = net.fire(&cur, t, 1) else { break };
                if !params.admits(&after) || after == cur {
                    break;
                }
                times += 1;
                cur = after;
                next.entry(cur.clone()).or_insert(Some((m.clone(), times)));
            }
        }
        explored += next.len();
        layers.push(next);
    }
    if !layers.last().expect("nonempty").contains_key(to) {
        return Ok(Verdict { answer: Answer::UnknownCapped, witness: None, explored });
    }
    let mut blocks = Vec::new();
    let mut at = to.clone();
    for w in (0..words as usize).rev() {
        let (prev, times) = layers[w + 1][&at].clone().expect("later layers record a parent");
        if times > 0 {
            blocks.push((w % net.transitions().len(), times));
        }
        at = prev;
    }
    let mut seq = AcceleratedSequence::new();
    for (t, times) in blocks.into_iter().rev() {
        seq.push_merged(t, times);
    }
    Ok(Verdict { answer: Answer::True, witness: Some(seq), explored })
}
