//! Counting sets: finite unions of cubes `L <= M <= U` with `U` possibly
//! infinite per place.

use std::fmt;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::footprint::{self, EngineParams, FootprintError};
use crate::net::{Marking, Net, NetError, PlaceId, TransitionId};

#[derive(Debug, Error)]
pub enum CountsetError {
    #[error("operands range over {0} and {1} places")]
    PlaceMismatch(usize, usize),
    #[error("malformed cube: {0}")]
    Schema(String),
    #[error("the net has no transitions")]
    NoTransitions,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Footprint(#[from] FootprintError),
}

/// `L <= M <= U`; `None` in `upper` is infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub lower: Vec<u64>,
    pub upper: Vec<Option<u64>>,
}

impl Cube {
    pub fn new(lower: Vec<u64>, upper: Vec<Option<u64>>) -> Self {
        assert_eq!(lower.len(), upper.len(), "bounds over different place counts");
        Cube { lower, upper }
    }

    /// All markings.
    pub fn full(places: usize) -> Self {
        Cube::new(vec![0; places], vec![None; places])
    }

    /// The single marking `m`.
    pub fn point(m: &Marking) -> Self {
        Cube::new(m.counts().to_vec(), m.counts().iter().map(|&c| Some(c)).collect())
    }

    /// Markings `>= m`.
    pub fn above(m: &Marking) -> Self {
        Cube::new(m.counts().to_vec(), vec![None; m.dim()])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(&l, u)| u.is_some_and(|u| l > u))
    }

    pub fn contains(&self, m: &Marking) -> bool {
        m.counts().iter().zip(self.lower.iter().zip(&self.upper)).all(|(&c, (&l, u))| c >= l && u.is_none_or(|u| c <= u))
    }

    /// Is every marking of `other` in `self`?
    pub fn includes(&self, other: &Cube) -> bool {
        (0..self.dim()).all(|p| {
            other.lower[p] >= self.lower[p]
                && match (self.upper[p], other.upper[p]) {
                    (None, _) => true,
                    (Some(_), None) => false,
                    (Some(a), Some(b)) => b <= a,
                }
        })
    }

    pub fn intersect(&self, other: &Cube) -> Cube {
        let lower = self.lower.iter().zip(&other.lower).map(|(&a, &b)| a.max(b)).collect();
        let upper = self
            .upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(*a.min(b)),
                (Some(a), None) | (None, Some(a)) => Some(*a),
                (None, None) => None,
            })
            .collect();
        Cube { lower, upper }
    }

    /// Places with an infinite upper bound.
    pub fn unbounded_places(&self) -> Vec<PlaceId> {
        (0..self.dim()).filter(|&p| self.upper[p].is_none()).collect()
    }

    /// Per place, either exact or unbounded above.
    pub fn is_simple(&self) -> bool {
        (0..self.dim()).all(|p| self.upper[p].is_none_or(|u| u == self.lower[p]))
    }

    /// Largest finite upper bound, 0 if none.
    pub fn upper_norm(&self) -> u64 {
        self.upper.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Largest lower bound, 0 for no places.
    pub fn lower_norm(&self) -> u64 {
        self.lower.iter().copied().max().unwrap_or(0)
    }

    pub fn lower_marking(&self) -> Marking {
        Marking::from_counts(self.lower.clone())
    }

    pub fn to_json(&self, net: &Net) -> Value {
        let mut lower = Map::new();
        let mut upper = Map::new();
        for p in 0..self.dim() {
            lower.insert(net.place_name(p).into(), json!(self.lower[p]));
            upper.insert(net.place_name(p).into(), self.upper[p].map_or(json!("inf"), |u| json!(u)));
        }
        json!({ "lower": lower, "upper": upper })
    }

    /// Reads `{"lower": {place: n}, "upper": {place: n | "inf"}}`. Places
    /// missing from `lower` default to 0, from `upper` to infinity.
    pub fn from_json(net: &Net, value: &Value) -> Result<Cube, CountsetError> {
        let bad = |msg: String| CountsetError::Schema(msg);
        let obj = value.as_object().ok_or_else(|| bad("a cube must be an object".into()))?;
        let n = net.place_count();
        let mut cube = Cube::full(n);
        for (key, entry) in obj {
            let map = entry.as_object().ok_or_else(|| bad(format!("`{key}` must be an object")))?;
            for (place, bound) in map {
                let p = net.place_id(place)?;
                match (key.as_str(), bound) {
                    ("lower", v) => {
                        cube.lower[p] = v.as_u64().ok_or_else(|| bad(format!("lower bound of {place} must be a natural")))?
                    }
                    ("upper", Value::String(s)) if s == "inf" => cube.upper[p] = None,
                    ("upper", v) => {
                        cube.upper[p] =
                            Some(v.as_u64().ok_or_else(|| bad(format!("upper bound of {place} must be a natural or \"inf\"")))?)
                    }
                    _ => return Err(bad(format!("unknown field `{key}`"))),
                }
            }
        }
        Ok(cube)
    }

    pub fn parse(net: &Net, text: &str) -> Result<Cube, CountsetError> {
        let value: Value = serde_json::from_str(text).map_err(NetError::from_json)?;
        Cube::from_json(net, &value)
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for p in 0..self.dim() {
            if p > 0 {
                write!(f, ", ")?;
            }
            match self.upper[p] {
                Some(u) if u == self.lower[p] => write!(f, "{u}")?,
                Some(u) => write!(f, "{}..{u}", self.lower[p])?,
                None => write!(f, "{}..", self.lower[p])?,
            }
        }
        write!(f, "]")
    }
}

/// A finite union of nonempty cubes. Equality of sets is semantic; the cube
/// list has no canonical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingSet {
    places: usize,
    cubes: Vec<Cube>,
}

impl CountingSet {
    pub fn empty(places: usize) -> Self {
        CountingSet { places, cubes: Vec::new() }
    }

    pub fn full(places: usize) -> Self {
        CountingSet { places, cubes: vec![Cube::full(places)] }
    }

    /// Empty cubes are dropped.
    pub fn from_cubes(places: usize, cubes: impl IntoIterator<Item = Cube>) -> Self {
        let cubes = cubes
            .into_iter()
            .inspect(|c| assert_eq!(c.dim(), places, "cube over the wrong place count"))
            .filter(|c| !c.is_empty())
            .collect();
        CountingSet { places, cubes }
    }

    pub fn places(&self) -> usize {
        self.places
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn contains(&self, m: &Marking) -> bool {
        self.cubes.iter().any(|c| c.contains(m))
    }

    /// `‖S‖↑`: the largest finite upper bound.
    /// Whether some marking of `c` lies in the set.
    pub fn meets(&self, c: &Cube) -> bool {
        self.cubes.iter().any(|d| !d.intersect(c).is_empty())
    }

    pub fn upper_norm(&self) -> u64 {
        self.cubes.iter().map(Cube::upper_norm).max().unwrap_or(0)
    }

    /// `‖S‖↓`: the largest lower bound.
    pub fn lower_norm(&self) -> u64 {
        self.cubes.iter().map(Cube::lower_norm).max().unwrap_or(0)
    }

    fn check(&self, other: &CountingSet) -> Result<(), CountsetError> {
        if self.places == other.places {
            Ok(())
        } else {
            Err(CountsetError::PlaceMismatch(self.places, other.places))
        }
    }

    pub fn union(&self, other: &CountingSet) -> Result<CountingSet, CountsetError> {
        self.check(other)?;
        let mut out = self.clone();
        out.cubes.extend(other.cubes.iter().filter(|c| !self.cubes.contains(c)).cloned());
        Ok(out)
    }

    pub fn intersect(&self, other: &CountingSet) -> Result<CountingSet, CountsetError> {
        self.check(other)?;
        let cubes = self.cubes.iter().flat_map(|a| other.cubes.iter().map(move |b| a.intersect(b)));
        Ok(CountingSet::from_cubes(self.places, cubes).pruned())
    }

    /// Complement within all markings: per cube, some place is below `L` or
    /// above `U`; these unions are intersected across cubes.
    pub fn complement(&self) -> CountingSet {
        let mut acc = CountingSet::full(self.places);
        for cube in &self.cubes {
            let mut outside = Vec::new();
            for p in 0..self.places {
                if cube.lower[p] > 0 {
                    let mut c = Cube::full(self.places);
                    c.upper[p] = Some(cube.lower[p] - 1);
                    outside.push(c);
                }
                if let Some(u) = cube.upper[p] {
                    let mut c = Cube::full(self.places);
                    c.lower[p] = u + 1;
                    outside.push(c);
                }
            }
            let outside = CountingSet { places: self.places, cubes: outside };
            acc = acc.intersect(&outside).expect("same places");
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    pub fn difference(&self, other: &CountingSet) -> Result<CountingSet, CountsetError> {
        self.intersect(&other.complement())
    }

    /// Drops cubes contained in another cube of the list.
    pub fn pruned(mut self) -> CountingSet {
        self.cubes.sort();
        self.cubes.dedup();
        let mut keep: Vec<Cube> = Vec::with_capacity(self.cubes.len());
        for (i, c) in self.cubes.iter().enumerate() {
            let covered = self.cubes.iter().enumerate().any(|(j, d)| j != i && d.includes(c) && (d != c || j < i));
            if !covered {
                keep.push(c.clone());
            }
        }
        self.cubes = keep;
        self
    }

    /// Removes subsumed cubes and merges cubes that agree on all places but
    /// one, where their intervals touch or overlap.
    pub fn simplified(self) -> CountingSet {
        let places = self.places;
        let mut cubes = self.cubes;
        cubes.retain(|c| !c.is_empty());
        // Sweep each place in turn, merging runs of cubes that agree
        // everywhere else, until a full round changes nothing.
        loop {
            let before = cubes.len();
            for p in 0..places {
                cubes = merge_along(cubes, p);
            }
            if cubes.len() == before {
                break;
            }
        }
        CountingSet { places, cubes }.pruned()
    }

    pub fn to_json(&self, net: &Net) -> Value {
        json!({ "cubes": self.cubes.iter().map(|c| c.to_json(net)).collect::<Vec<_>>() })
    }

    pub fn from_json(net: &Net, value: &Value) -> Result<CountingSet, CountsetError> {
        let cubes = value
            .get("cubes")
            .and_then(Value::as_array)
            .ok_or_else(|| CountsetError::Schema("a counting set needs a `cubes` array".into()))?;
        let cubes = cubes.iter().map(|c| Cube::from_json(net, c)).collect::<Result<Vec<_>, _>>()?;
        Ok(CountingSet::from_cubes(net.place_count(), cubes))
    }
}

/// Merges cubes that agree outside place `p` and whose intervals at `p`
/// overlap or touch.
fn merge_along(mut cubes: Vec<Cube>, p: PlaceId) -> Vec<Cube> {
    let key = |c: &Cube| {
        let mut lower = c.lower.clone();
        let mut upper = c.upper.clone();
        lower[p] = 0;
        upper[p] = None;
        (lower, upper)
    };
    cubes.sort_by(|a, b| key(a).cmp(&key(b)).then(a.lower[p].cmp(&b.lower[p])));
    let mut out: Vec<Cube> = Vec::with_capacity(cubes.len());
    for c in cubes {
        if let Some(last) = out.last_mut() {
            let touches = last.upper[p].is_none_or(|u| u.saturating_add(1) >= c.lower[p]);
            if touches && key(last) == key(&c) {
                last.upper[p] = match (last.upper[p], c.upper[p]) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    _ => None,
                };
                continue;
            }
        }
        out.push(c);
    }
    out
}

/// Splits `c` into cubes that are exact or unbounded above in every place.
pub fn simple_decompose(c: &Cube) -> Vec<Cube> {
    if c.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Cube::new(Vec::with_capacity(c.dim()), Vec::with_capacity(c.dim()))];
    for p in 0..c.dim() {
        let choices: Vec<(u64, Option<u64>)> = match c.upper[p] {
            None => vec![(c.lower[p], None)],
            Some(u) => (c.lower[p]..=u).map(|v| (v, Some(v))).collect(),
        };
        out = out
            .into_iter()
            .flat_map(|partial| {
                choices.iter().map(move |&(l, u)| {
                    let mut next = partial.clone();
                    next.lower.push(l);
                    next.upper.push(u);
                    next
                })
            })
            .collect();
    }
    out
}

/// `(L, ∞)`.
pub fn upward_closure(c: &Cube) -> Cube {
    if c.is_empty() {
        return c.clone();
    }
    Cube::new(c.lower.clone(), vec![None; c.dim()])
}

/// Markings that enable `t`.
pub fn en(net: &Net, t: TransitionId) -> Result<Cube, CountsetError> {
    if t >= net.transitions().len() {
        return Err(NetError::UnknownTransition(format!("#{t}")).into());
    }
    Ok(Cube::above(&Marking::from_counts(net.preset(t))))
}

/// `pre*(C)`. Each simple part of `C` gets destroyers on its unbounded
/// places; the markings that reach its lower bound in that net are exactly
/// those that reach the simple part in `net`.
pub fn pre_star_cube(net: &Net, c: &Cube, params: &EngineParams) -> Result<CountingSet, CountsetError> {
    let mut out = CountingSet::empty(net.place_count());
    for simple in simple_decompose(c) {
        let unbounded = simple.unbounded_places();
        let extended;
        let target = if unbounded.is_empty() {
            net
        } else {
            extended = net.add_destroyers(&unbounded)?;
            &extended
        };
        let part = footprint::pre_star_point(target, &simple.lower_marking(), params)?;
        out = out.union(&part.set)?;
    }
    Ok(out.pruned())
}

pub fn pre_star_set(net: &Net, s: &CountingSet, params: &EngineParams) -> Result<CountingSet, CountsetError> {
    let mut out = CountingSet::empty(net.place_count());
    for c in s.cubes() {
        out = out.union(&pre_star_cube(net, c, params)?)?;
    }
    Ok(out.pruned())
}

/// Can some marking of `from` reach some marking of `to`?
pub fn cube_reach(net: &Net, from: &Cube, to: &Cube, params: &EngineParams) -> Result<bool, CountsetError> {
    Ok(pre_star_cube(net, to, params)?.meets(from))
}

/// Can some marking of `from` cover some marking of `to`?
pub fn cube_cover(net: &Net, from: &Cube, to: &Cube, params: &EngineParams) -> Result<bool, CountsetError> {
    cube_reach(net, from, &upward_closure(to), params)
}

/// Markings from which every transition stays re-enableable forever:
/// `complement(pre*(⋃_t complement(pre*(En(t)))))`.
pub fn live_set(net: &Net, params: &EngineParams) -> Result<CountingSet, CountsetError> {
    if net.transitions().is_empty() {
        return Err(CountsetError::NoTransitions);
    }
    let mut dead = CountingSet::empty(net.place_count());
    for t in 0..net.transitions().len() {
        let can_enable = pre_star_cube(net, &en(net, t)?, params)?;
        dead = dead.union(&can_enable.complement())?;
    }
    let doomed = pre_star_set(net, &dead.pruned(), params)?;
    Ok(doomed.complement().simplified())
}
