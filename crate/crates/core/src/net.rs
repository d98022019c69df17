//! Immediate-observation nets: places, transitions, markings and firing.
//!
//! A transition consumes one token from its source place, requires a token in
//! its observed place, and creates a multiset of tokens. Transitions without
//! an observed place only exist in nets that opt into `extensions`; they are
//! used to encode token destroyers.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use serde_json::{json, Map, Value};
use thiserror::Error;

pub type PlaceId = usize;
pub type TransitionId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed document: {0}")]
    Schema(String),
    #[error("undeclared place `{0}`")]
    UndeclaredPlace(String),
    #[error("duplicate place `{0}`")]
    DuplicatePlace(String),
    #[error("duplicate transition `{0}`")]
    DuplicateTransition(String),
    #[error("transition `{0}` observes nothing but the net does not enable extensions")]
    ObserveFreeWithoutExtensions(String),
    #[error("a net needs at least one place")]
    NoPlaces,
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("transition `{transition}` is not enabled at firing {step}")]
    NotEnabled { transition: String, step: u64 },
    #[error("block {block}: {cause}")]
    Block { block: usize, cause: Box<NetError> },
    #[error("marking has {got} entries but the net has {expected} places")]
    Dimension { expected: usize, got: usize },
    #[error("token count overflow")]
    Overflow,
    #[error("firing multiplicity must be at least 1")]
    ZeroMultiplicity,
}

impl NetError {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        NetError::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

/// How a transition whose source is also its observed place is enabled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PresetSemantics {
    /// The preset is the multiset `source + observe`: a self-observing
    /// transition needs two tokens.
    #[default]
    Multiset,
    /// A single token both fires and observes.
    Set,
}

/// Token counts over the places of a net, in declared place order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<u64>);

impl Marking {
    pub fn zero(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        Marking(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, p: PlaceId) -> u64 {
        self.0.get(p).copied().unwrap_or(0)
    }

    pub fn set(&mut self, p: PlaceId, value: u64) {
        self.0[p] = value;
    }

    pub fn add_to(&mut self, p: PlaceId, delta: u64) {
        self.0[p] += delta;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn max_count(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Pointwise `self >= other`.
    pub fn covers(&self, other: &Marking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn plus(&self, other: &Marking) -> Marking {
        Marking(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn support(&self) -> Vec<PlaceId> {
        (0..self.0.len()).filter(|&p| self.0[p] > 0).collect()
    }

    pub fn into_counts(self) -> Vec<u64> {
        self.0
    }
}

impl From<Vec<u64>> for Marking {
    fn from(v: Vec<u64>) -> Self {
        Marking(v)
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub name: String,
    pub source: PlaceId,
    pub observe: Option<PlaceId>,
    /// Dense multiset of created tokens.
    pub create: Vec<u64>,
}

impl Transition {
    pub fn create_size(&self) -> u64 {
        self.create.iter().sum()
    }

    pub fn is_io_shaped(&self) -> bool {
        self.observe.is_some() && self.create_size() == 1
    }

    pub fn is_bio_shaped(&self) -> bool {
        self.observe.is_some()
    }

    /// Number of tokens the created multiset holds beyond the consumed source
    /// token, i.e. `|create - <source>|`.
    pub fn net_created(&self) -> u64 {
        self.create
            .iter()
            .enumerate()
            .map(|(p, &c)| if p == self.source { c.saturating_sub(1) } else { c })
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Class {
    Io,
    Bio,
    Extended,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Io => "IO",
            Class::Bio => "BIO",
            Class::Extended => "EXTENDED",
        })
    }
}

/// One block `t^k` of an accelerated firing sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub transition: TransitionId,
    pub times: u64,
}

/// A firing sequence written as powers of transitions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AcceleratedSequence(Vec<Block>);

impl AcceleratedSequence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a sequence from `(transition, k)` pairs; every `k` must be at least 1.
    pub fn from_blocks(blocks: Vec<Block>) -> Result<Self, NetError> {
        if blocks.iter().any(|b| b.times == 0) {
            return Err(NetError::ZeroMultiplicity);
        }
        Ok(AcceleratedSequence(blocks))
    }

    /// Run-length encodes single firings.
    pub fn from_firings(firings: &[TransitionId]) -> Self {
        let mut blocks: Vec<Block> = Vec::new();
        for &t in firings {
            match blocks.last_mut() {
                Some(b) if b.transition == t => b.times += 1,
                _ => blocks.push(Block { transition: t, times: 1 }),
            }
        }
        AcceleratedSequence(blocks)
    }

    pub fn push(&mut self, transition: TransitionId, times: u64) {
        if times > 0 {
            self.0.push(Block { transition, times });
        }
    }

    /// Appends `t^k`, merging with the last block when it fires the same transition.
    pub fn push_merged(&mut self, transition: TransitionId, times: u64) {
        match self.0.last_mut() {
            Some(b) if b.transition == transition => b.times += times,
            _ => self.push(transition, times),
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.0
    }

    /// Number of blocks.
    pub fn accelerated_length(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn firing_count(&self) -> u64 {
        self.0.iter().map(|b| b.times).sum()
    }
}

/// Exact length and token bounds for shortened sequences and histories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// `(n^3 + 1)^n`: accelerated length bound for IO nets.
    pub k_io: BigUint,
    /// `2^n (m+1)^n (n+1)^n`: accelerated length bound for BIO nets.
    pub k_bio: BigUint,
    /// `(m' + k_bio (m+n) m_d) m_d^n`: tokens per level of a short history.
    pub token_bound: BigUint,
    pub m_d: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Net {
    name: String,
    places: Vec<String>,
    place_index: HashMap<String, PlaceId>,
    transitions: Vec<Transition>,
    extensions: bool,
    preset: PresetSemantics,
}

impl Net {
    /// Builds a validated net. Transition `create` vectors must have one
    /// entry per place.
    pub fn new(
        name: impl Into<String>,
        places: Vec<String>,
        transitions: Vec<Transition>,
        extensions: bool,
    ) -> Result<Self, NetError> {
        if places.is_empty() {
            return Err(NetError::NoPlaces);
        }
        let mut place_index = HashMap::new();
        for (i, p) in places.iter().enumerate() {
            if place_index.insert(p.clone(), i).is_some() {
                return Err(NetError::DuplicatePlace(p.clone()));
            }
        }
        let n = places.len();
        let mut seen = HashMap::new();
        for t in &transitions {
            if seen.insert(t.name.clone(), ()).is_some() {
                return Err(NetError::DuplicateTransition(t.name.clone()));
            }
            if t.create.len() != n {
                return Err(NetError::Dimension { expected: n, got: t.create.len() });
            }
            if t.source >= n || t.observe.is_some_and(|o| o >= n) {
                return Err(NetError::UndeclaredPlace(format!("#{}", t.source.max(t.observe.unwrap_or(0)))));
            }
            if t.observe.is_none() && !extensions {
                return Err(NetError::ObserveFreeWithoutExtensions(t.name.clone()));
            }
        }
        Ok(Net {
            name: name.into(),
            places,
            place_index,
            transitions,
            extensions,
            preset: PresetSemantics::default(),
        })
    }

    pub fn with_preset_semantics(mut self, preset: PresetSemantics) -> Self {
        self.preset = preset;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p]
    }

    pub fn place_id(&self, name: &str) -> Result<PlaceId, NetError> {
        self.place_index
            .get(name)
            .copied()
            .ok_or_else(|| NetError::UndeclaredPlace(name.to_string()))
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t]
    }

    pub fn transition_id(&self, name: &str) -> Result<TransitionId, NetError> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| NetError::UnknownTransition(name.to_string()))
    }

    pub fn extensions(&self) -> bool {
        self.extensions
    }

    pub fn preset_semantics(&self) -> PresetSemantics {
        self.preset
    }

    pub fn classify(&self) -> Class {
        if self.transitions.iter().any(|t| t.observe.is_none()) {
            Class::Extended
        } else if self.transitions.iter().all(Transition::is_io_shaped) {
            Class::Io
        } else {
            Class::Bio
        }
    }

    /// Tokens the source place must hold for `t` to fire once.
    fn source_need(&self, t: &Transition) -> u64 {
        match (t.observe, self.preset) {
            (Some(o), PresetSemantics::Multiset) if o == t.source => 2,
            _ => 1,
        }
    }

    /// The preset of `t` as a dense vector.
    pub fn preset(&self, t: TransitionId) -> Vec<u64> {
        let tr = &self.transitions[t];
        let mut pre = vec![0; self.places.len()];
        pre[tr.source] = self.source_need(tr);
        if let Some(o) = tr.observe {
            if o != tr.source {
                pre[o] = 1;
            }
        }
        pre
    }

    fn check_dim(&self, m: &Marking) -> Result<(), NetError> {
        if m.dim() != self.places.len() {
            return Err(NetError::Dimension { expected: self.places.len(), got: m.dim() });
        }
        Ok(())
    }

    pub fn enabled(&self, m: &Marking, t: TransitionId) -> bool {
        let tr = &self.transitions[t];
        if m.get(tr.source) < self.source_need(tr) {
            return false;
        }
        match tr.observe {
            Some(o) if o != tr.source => m.get(o) >= 1,
            _ => true,
        }
    }

    /// Largest `k` such that `t^k` can fire from `m`; `None` when unbounded.
    ///
    /// Only the source place loses tokens during a `t`-block, so the observed
    /// place only needs checking before the first firing.
    pub fn max_fireable(&self, m: &Marking, t: TransitionId) -> Option<u64> {
        if !self.enabled(m, t) {
            return Some(0);
        }
        let tr = &self.transitions[t];
        if tr.create[tr.source] >= 1 {
            None
        } else {
            Some(m.get(tr.source) - (self.source_need(tr) - 1))
        }
    }

    /// Fires `t` exactly `k >= 1` times in a row.
    pub fn fire(&self, m: &Marking, t: TransitionId, k: u64) -> Result<Marking, NetError> {
        self.check_dim(m)?;
        if k == 0 {
            return Err(NetError::ZeroMultiplicity);
        }
        if let Some(max) = self.max_fireable(m, t) {
            if k > max {
                return Err(NetError::NotEnabled {
                    transition: self.transitions[t].name.clone(),
                    step: max + 1,
                });
            }
        }
        self.fire_unchecked(m, t, k)
    }

    /// Fires `t^k` without the enabledness check.
    pub(crate) fn fire_unchecked(&self, m: &Marking, t: TransitionId, k: u64) -> Result<Marking, NetError> {
        let tr = &self.transitions[t];
        let mut out = m.clone();
        for (p, &c) in tr.create.iter().enumerate() {
            if c > 0 {
                let add = c.checked_mul(k).ok_or(NetError::Overflow)?;
                out.0[p] = out.0[p].checked_add(add).ok_or(NetError::Overflow)?;
            }
        }
        out.0[tr.source] -= k;
        Ok(out)
    }

    pub fn apply_sequence(&self, m: &Marking, seq: &AcceleratedSequence) -> Result<Marking, NetError> {
        Ok(self.trace_sequence(m, seq)?.pop().expect("trace holds the initial marking"))
    }

    /// All markings visited at block boundaries, starting with `m`.
    pub fn trace_sequence(&self, m: &Marking, seq: &AcceleratedSequence) -> Result<Vec<Marking>, NetError> {
        self.check_dim(m)?;
        let mut chain = vec![m.clone()];
        for (i, b) in seq.blocks().iter().enumerate() {
            if b.transition >= self.transitions.len() {
                return Err(NetError::Block {
                    block: i,
                    cause: Box::new(NetError::UnknownTransition(format!("#{}", b.transition))),
                });
            }
            let next = self
                .fire(chain.last().unwrap(), b.transition, b.times)
                .map_err(|e| NetError::Block { block: i, cause: Box::new(e) })?;
            chain.push(next);
        }
        Ok(chain)
    }

    /// Adds one observe-free destroyer `source = p, create = {}` per target place.
    pub fn add_destroyers(&self, targets: &[PlaceId]) -> Result<Net, NetError> {
        let n = self.places.len();
        let mut transitions = self.transitions.clone();
        for &p in targets {
            if p >= n {
                return Err(NetError::UndeclaredPlace(format!("#{p}")));
            }
            let base = format!("destroy_{}", self.places[p]);
            let mut name = base.clone();
            let mut suffix = 1;
            while transitions.iter().any(|t| t.name == name) {
                name = format!("{base}_{suffix}");
                suffix += 1;
            }
            transitions.push(Transition { name, source: p, observe: None, create: vec![0; n] });
        }
        Ok(Net { transitions, extensions: true, ..self.clone() })
    }

    /// Destroyers on places given by name.
    pub fn add_destroyers_by_name(&self, targets: &[&str]) -> Result<Net, NetError> {
        let ids = targets.iter().map(|p| self.place_id(p)).collect::<Result<Vec<_>, _>>()?;
        self.add_destroyers(&ids)
    }

    /// Maximum number of tokens created by a transition, `max_t |create(t) - <source(t)>|`.
    pub fn max_created(&self) -> u64 {
        self.transitions.iter().map(Transition::net_created).max().unwrap_or(0)
    }

    pub fn compute_bounds(&self, m: u64, m_prime: u64) -> Bounds {
        bounds_for(self.places.len() as u64, m, m_prime, self.max_created())
    }

    // --- JSON ---------------------------------------------------------------

    pub fn parse(text: &str) -> Result<Net, NetError> {
        let value: Value = serde_json::from_str(text).map_err(NetError::from_json)?;
        Net::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Net, NetError> {
        let obj = value.as_object().ok_or_else(|| schema("net must be an object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "name" | "places" | "transitions" | "extensions" | "preset") {
                return Err(schema(&format!("unknown field `{key}`")));
            }
        }
        let name = obj
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| schema("`name` must be a string"))?;
        let places = obj
            .get("places")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("`places` must be an array"))?
            .iter()
            .map(|p| p.as_str().map(str::to_string).ok_or_else(|| schema("place names must be strings")))
            .collect::<Result<Vec<_>, _>>()?;
        let extensions = match obj.get("extensions") {
            None => false,
            Some(v) => v.as_bool().ok_or_else(|| schema("`extensions` must be a boolean"))?,
        };
        let preset = match obj.get("preset").map(|v| v.as_str()) {
            None => PresetSemantics::Multiset,
            Some(Some("multiset")) => PresetSemantics::Multiset,
            Some(Some("set")) => PresetSemantics::Set,
            Some(_) => return Err(schema("`preset` must be \"multiset\" or \"set\"")),
        };

        let mut index = HashMap::new();
        for (i, p) in places.iter().enumerate() {
            if index.insert(p.as_str(), i).is_some() {
                return Err(NetError::DuplicatePlace(p.clone()));
            }
        }
        let lookup = |p: &str| index.get(p).copied().ok_or_else(|| NetError::UndeclaredPlace(p.to_string()));

        let mut transitions = Vec::new();
        let raw = obj
            .get("transitions")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("`transitions` must be an array"))?;
        for t in raw {
            let t = t.as_object().ok_or_else(|| schema("transitions must be objects"))?;
            for key in t.keys() {
                if !matches!(key.as_str(), "name" | "source" | "observe" | "create") {
                    return Err(schema(&format!("unknown transition field `{key}`")));
                }
            }
            let tname = t
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| schema("transition `name` must be a string"))?;
            let source = lookup(
                t.get("source")
                    .and_then(Value::as_str)
                    .ok_or_else(|| schema(&format!("transition `{tname}`: `source` must be a string")))?,
            )?;
            let observe = match t.get("observe") {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) => Some(lookup(s)?),
                Some(_) => return Err(schema(&format!("transition `{tname}`: `observe` must be a string or null"))),
            };
            let mut create = vec![0u64; places.len()];
            match t.get("create") {
                None => {}
                Some(Value::Object(map)) => {
                    for (p, c) in map {
                        let c = c
                            .as_u64()
                            .ok_or_else(|| schema(&format!("transition `{tname}`: counts must be naturals")))?;
                        create[lookup(p)?] += c;
                    }
                }
                Some(_) => return Err(schema(&format!("transition `{tname}`: `create` must be an object"))),
            }
            transitions.push(Transition { name: tname.to_string(), source, observe, create });
        }
        Ok(Net::new(name, places, transitions, extensions)?.with_preset_semantics(preset))
    }

    /// Canonical JSON form: fixed field order, `create` entries in place order.
    pub fn to_json(&self) -> Value {
        let transitions: Vec<Value> = self
            .transitions
            .iter()
            .map(|t| {
                let mut create = Map::new();
                for (p, &c) in t.create.iter().enumerate() {
                    if c > 0 {
                        create.insert(self.places[p].clone(), json!(c));
                    }
                }
                json!({
                    "name": t.name,
                    "source": self.places[t.source],
                    "observe": t.observe.map(|o| self.places[o].clone()),
                    "create": create,
                })
            })
            .collect();
        let mut doc = json!({
            "name": self.name,
            "places": self.places,
            "transitions": transitions,
            "extensions": self.extensions,
        });
        if self.preset == PresetSemantics::Set {
            doc["preset"] = json!("set");
        }
        doc
    }

    pub fn serialize(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("net serializes");
        s.push('\n');
        s
    }

    /// Parses `{place: count}`; omitted places are 0.
    pub fn marking_from_json(&self, value: &Value) -> Result<Marking, NetError> {
        let obj = value.as_object().ok_or_else(|| schema("marking must be an object"))?;
        let mut m = Marking::zero(self.places.len());
        for (p, c) in obj {
            let c = c.as_u64().ok_or_else(|| schema("marking counts must be naturals"))?;
            m.0[self.place_id(p)?] = c;
        }
        Ok(m)
    }

    pub fn parse_marking(&self, text: &str) -> Result<Marking, NetError> {
        let value: Value = serde_json::from_str(text).map_err(NetError::from_json)?;
        self.marking_from_json(&value)
    }

    /// `{place: count}` with every place listed.
    pub fn marking_to_json(&self, m: &Marking) -> Value {
        let mut map = Map::new();
        for (p, name) in self.places.iter().enumerate() {
            map.insert(name.clone(), json!(m.get(p)));
        }
        Value::Object(map)
    }

    /// Parses `[[transitionName, k], ...]`.
    pub fn sequence_from_json(&self, value: &Value) -> Result<AcceleratedSequence, NetError> {
        let arr = value.as_array().ok_or_else(|| schema("sequence must be an array"))?;
        let mut blocks = Vec::with_capacity(arr.len());
        for entry in arr {
            let pair = entry.as_array().filter(|a| a.len() == 2).ok_or_else(|| schema("blocks are [name, k] pairs"))?;
            let name = pair[0].as_str().ok_or_else(|| schema("block transition must be a name"))?;
            let times = pair[1].as_u64().ok_or_else(|| schema("block multiplicity must be a natural"))?;
            blocks.push(Block { transition: self.transition_id(name)?, times });
        }
        AcceleratedSequence::from_blocks(blocks)
    }

    pub fn sequence_to_json(&self, seq: &AcceleratedSequence) -> Value {
        Value::Array(
            seq.blocks()
                .iter()
                .map(|b| json!([self.transitions[b.transition].name, b.times]))
                .collect(),
        )
    }
}

fn schema(msg: &str) -> NetError {
    NetError::Schema(msg.to_string())
}

/// The shortening bounds for `n` places, target size `m`, source size
/// `m_prime` and maximum creation `m_d`.
pub fn bounds_for(n: u64, m: u64, m_prime: u64, m_d: u64) -> Bounds {
    let n32 = n as u32;
    let big = BigUint::from;
    let k_io = (big(n).pow(3) + 1u32).pow(n32);
    let k_bio = big(2u64).pow(n32) * big(m + 1).pow(n32) * big(n + 1).pow(n32);
    let token_bound = (big(m_prime) + &k_bio * big(m + n) * big(m_d)) * big(m_d).pow(n32);
    Bounds { k_io, k_bio, token_bound, m_d }
}
