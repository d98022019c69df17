//! Footprint-based pre-images.
//!
//! A [`FootprintState`] fixes exact counts on some places and only says
//! "many tokens" on its smoke places. Counts above a threshold `θ` (by
//! default `m + n` for a target of size `m`) cannot be told apart by
//! reachability, so deciding a footprint only needs one representative
//! marking with `ρ > θ` tokens on every smoke place. Verdicts are re-checked
//! with `ρ` raised a few times; a verdict that changes is reported as
//! instability rather than guessed.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::countset::{CountingSet, Cube};
use crate::explicit::{self, Answer, SearchError, SearchParams, Verdict};
use crate::net::{Marking, Net, PlaceId};

#[derive(Debug, Error)]
pub enum FootprintError {
    #[error("verdict for {state} changes as the smoke representative grows: {verdicts:?}")]
    Unstable { state: String, verdicts: Vec<bool> },
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// Exact counts on tracked places, "more than the threshold" on smoke places.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FootprintState {
    pub tracked: Marking,
    pub smoke: BTreeSet<PlaceId>,
}

impl FootprintState {
    pub fn exact(m: Marking) -> Self {
        FootprintState { tracked: m, smoke: BTreeSet::new() }
    }
}

impl std::fmt::Display for FootprintState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} + smoke{:?}", self.tracked, self.smoke)
    }
}

/// `tracked + ρ` on every smoke place.
pub fn representative(state: &FootprintState, rho: u64) -> Marking {
    let mut m = state.tracked.clone();
    for &p in &state.smoke {
        m.add_to(p, rho);
    }
    m
}

/// Engine knobs. Unset fields are derived from the target marking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineParams {
    /// `θ`, default `m + n`.
    pub tracked_cap: Option<u64>,
    /// `ρ`, default `θ + 1`.
    pub smoke_rep: Option<u64>,
    /// How many times `ρ` is raised by one to confirm a verdict, default 2.
    pub stability_rounds: Option<u64>,
    /// Per-place cap of the underlying explicit search, default
    /// `max(ρ + rounds, θ, max M) + θ`.
    pub search_cap: Option<u64>,
}

/// [`EngineParams`] with every default filled in for one target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolved {
    pub tracked_cap: u64,
    pub smoke_rep: u64,
    pub stability_rounds: u64,
    pub search_cap: u64,
}

impl EngineParams {
    pub fn resolve(&self, places: usize, target: &Marking) -> Resolved {
        let theta = self.tracked_cap.unwrap_or(target.total() + places as u64);
        let rho = self.smoke_rep.unwrap_or(theta + 1).max(1);
        let rounds = self.stability_rounds.unwrap_or(2);
        let search_cap = self.search_cap.unwrap_or((rho + rounds).max(theta).max(target.max_count()) + theta);
        Resolved { tracked_cap: theta, smoke_rep: rho, stability_rounds: rounds, search_cap }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tracked_cap": self.tracked_cap,
            "smoke_rep": self.smoke_rep,
            "stability_rounds": self.stability_rounds,
            "search_cap": self.search_cap,
        })
    }
}

impl Resolved {
    /// The representatives tried for each smoke place.
    pub fn rhos(&self) -> impl Iterator<Item = u64> {
        let rho = self.smoke_rep;
        (0..=self.stability_rounds).map(move |k| rho + k)
    }

    pub fn search(&self, places: usize) -> SearchParams {
        SearchParams::per_place(self.search_cap, places)
    }

    /// Whether `ρ` sits above the threshold, as the indistinguishability
    /// argument needs.
    pub fn is_sound(&self) -> bool {
        self.smoke_rep > self.tracked_cap
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tracked_cap": self.tracked_cap,
            "smoke_rep": self.smoke_rep,
            "stability_rounds": self.stability_rounds,
            "search_cap": self.search_cap,
        })
    }
}

/// Does the footprint reach `to`? Decided on representatives for every `ρ`
/// in the stability range, which must all agree.
pub fn footprint_reach(
    net: &Net,
    from: &FootprintState,
    to: &Marking,
    params: &EngineParams,
) -> Result<Verdict, FootprintError> {
    let r = params.resolve(net.place_count(), to);
    let search = r.search(net.place_count());
    let mut verdicts = Vec::new();
    let mut first: Option<Verdict> = None;
    for rho in r.rhos() {
        let v = explicit::reach(net, &representative(from, rho), to, &search)?;
        if v.answer == Answer::UnknownCapped {
            return Ok(v);
        }
        verdicts.push(v.answer.is_true());
        first.get_or_insert(v);
        if from.smoke.is_empty() {
            break;
        }
    }
    if verdicts.iter().any(|&b| b != verdicts[0]) {
        return Err(FootprintError::Unstable { state: from.to_string(), verdicts });
    }
    Ok(first.expect("at least one round"))
}

/// `pre*(M)` with the parameters it was computed under.
#[derive(Clone, Debug)]
pub struct PointPreStar {
    pub set: CountingSet,
    pub params: Resolved,
    /// Abstract markings examined.
    pub footprints: usize,
    /// Some marking of the pre-image sits on the search box boundary with a
    /// predecessor outside it; paths leaving the box are not seen.
    pub truncated: bool,
}

/// All `{0..θ, ⊤}^n` vectors in lexicographic order.
fn abstract_markings(places: usize, theta: u64) -> impl Iterator<Item = Vec<Option<u64>>> {
    let width = theta + 2;
    let total = (width as u128).pow(places as u32);
    (0..total).map(move |mut code| {
        let mut v = vec![None; places];
        for slot in v.iter_mut().rev() {
            let digit = (code % width as u128) as u64;
            code /= width as u128;
            *slot = if digit <= theta { Some(digit) } else { None };
        }
        v
    })
}

/// `pre*(M)` as a counting set.
///
/// The exact backward closure of `M` is computed inside the box
/// `[0, search_cap]^n`. Every abstract marking in `{0..θ, ⊤}^n` is then
/// decided on its representatives (`⊤` read as `ρ, ρ+1, ...`, all `⊤`
/// places raised together) and, if inside, emitted as the cube with exact
/// coordinates on finite places and `[θ+1, ∞)` on `⊤` places.
pub fn pre_star_point(net: &Net, m: &Marking, params: &EngineParams) -> Result<PointPreStar, FootprintError> {
    let n = net.place_count();
    let r = params.resolve(n, m);
    let search = r.search(n);
    let closure = explicit::backward_closure(net, m, &search)?;
    let truncated = closure.iter().any(|x| {
        net.transitions().iter().any(|t| t.create[t.source] == 0 && x.get(t.source) == r.search_cap)
    });
    let mut cubes = Vec::new();
    let mut footprints = 0;
    for abs in abstract_markings(n, r.tracked_cap) {
        footprints += 1;
        let tracked = Marking::from_counts(abs.iter().map(|c| c.unwrap_or(0)).collect());
        let smoke: BTreeSet<PlaceId> = (0..n).filter(|&p| abs[p].is_none()).collect();
        let state = FootprintState { tracked, smoke };
        let mut verdicts: Vec<bool> = Vec::new();
        for rho in r.rhos() {
            verdicts.push(closure.contains(&representative(&state, rho)));
            if state.smoke.is_empty() {
                break;
            }
        }
        if verdicts.iter().any(|&b| b != verdicts[0]) {
            return Err(FootprintError::Unstable { state: state.to_string(), verdicts });
        }
        if verdicts[0] {
            let lower = abs.iter().map(|c| c.unwrap_or(r.tracked_cap + 1)).collect();
            cubes.push(Cube::new(lower, abs.clone()));
        }
    }
    Ok(PointPreStar { set: CountingSet::from_cubes(n, cubes).simplified(), params: r, footprints, truncated })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationViolation {
    pub marking: Marking,
    pub place: PlaceId,
    /// Oracle membership before and after adding one token at `place`.
    pub before: bool,
    pub after: bool,
    /// Membership in the computed pre-image.
    pub engine: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SaturationReport {
    pub checked: usize,
    pub exhaustive: bool,
    pub violations: Vec<SaturationViolation>,
}

impl SaturationReport {
    pub fn to_json(&self, net: &Net) -> Value {
        let violations: Vec<Value> = self
            .violations
            .iter()
            .map(|v| {
                json!({
                    "marking": net.marking_to_json(&v.marking),
                    "place": net.place_name(v.place),
                    "oracle_before": v.before,
                    "oracle_after": v.after,
                    "engine": v.engine,
                })
            })
            .collect();
        json!({ "checked": self.checked, "exhaustive": self.exhaustive, "violations": violations })
    }
}

/// Checks that adding a token to a place already above `θ` never changes
/// membership in `pre*(M)`, and that the engine agrees with an explicit
/// backward search, on markings with counts up to `sweep_cap`.
///
/// The explicit search runs in a box `θ` wider than the sweep so that paths
/// may pass above it. With `samples` at least the number of markings in the
/// sweep, every marking is checked; otherwise a seeded sample is.
pub fn saturation_check(
    net: &Net,
    m: &Marking,
    params: &EngineParams,
    samples: usize,
    sweep_cap: u64,
    seed: u64,
) -> Result<SaturationReport, FootprintError> {
    let mut report = SaturationReport::default();
    if samples == 0 {
        return Ok(report);
    }
    let n = net.place_count();
    let engine = pre_star_point(net, m, params)?;
    let theta = engine.params.tracked_cap;
    let oracle_cap = sweep_cap.max(m.max_count()) + theta;
    let oracle = explicit::backward_closure(net, m, &SearchParams::per_place(oracle_cap, n))?;
    let domain = (sweep_cap as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
    let markings: Vec<Marking> = if (samples as u128) >= domain {
        report.exhaustive = true;
        (0..domain)
            .map(|mut code| {
                let mut c = vec![0; n];
                for slot in c.iter_mut().rev() {
                    *slot = (code % (sweep_cap as u128 + 1)) as u64;
                    code /= sweep_cap as u128 + 1;
                }
                Marking::from_counts(c)
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples).map(|_| Marking::from_counts((0..n).map(|_| rng.gen_range(0..=sweep_cap)).collect())).collect()
    };
    for x in markings {
        for q in 0..n {
            if x.get(q) <= theta || x.get(q) >= sweep_cap {
                continue;
            }
            report.checked += 1;
            let mut bumped = x.clone();
            bumped.add_to(q, 1);
            let before = oracle.contains(&x);
            let after = oracle.contains(&bumped);
            let engine_in = engine.set.contains(&x);
            if before != after || engine_in != before {
                report.violations.push(SaturationViolation { marking: x.clone(), place: q, before, after, engine: engine_in });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn m(c: &[u64]) -> Marking {
        Marking::from_counts(c.to_vec())
    }

    #[test]
    fn representatives() {
        let s = FootprintState { tracked: m(&[1, 0]), smoke: [1].into() };
        assert_eq!(representative(&s, 4), m(&[1, 4]));
        assert_eq!(representative(&FootprintState::exact(m(&[2, 0])), 9), m(&[2, 0]));
        let s = FootprintState { tracked: m(&[0, 0]), smoke: [0, 1].into() };
        assert_eq!(representative(&s, 1), m(&[1, 1]));
    }

    #[test]
    fn footprint_reach_examples() {
        let p = EngineParams::default();
        let mv = fixtures::toy_move();
        let v = footprint_reach(&mv, &FootprintState::exact(m(&[2, 1])), &m(&[0, 3]), &p).unwrap();
        assert_eq!(v.answer, Answer::True);
        let v = footprint_reach(&mv, &FootprintState::exact(m(&[1, 0])), &m(&[0, 1]), &p).unwrap();
        assert_eq!(v.answer, Answer::False);
        let kill = fixtures::toy_kill();
        for rho in 1..=5 {
            let p = EngineParams { smoke_rep: Some(rho), ..Default::default() };
            let s = FootprintState { tracked: m(&[0, 1]), smoke: [0].into() };
            assert_eq!(footprint_reach(&kill, &s, &m(&[0, 1]), &p).unwrap().answer, Answer::True);
        }
    }

    #[test]
    fn point_pre_images() {
        let p = EngineParams::default();
        let pre = pre_star_point(&fixtures::toy_move(), &m(&[0, 1]), &p).unwrap();
        assert_eq!(pre.set.cubes(), &[Cube::point(&m(&[0, 1]))]);
        let pre = pre_star_point(&fixtures::toy_kill(), &m(&[0, 1]), &p).unwrap();
        assert_eq!(pre.set.cubes(), &[Cube::new(vec![0, 1], vec![None, Some(1)])]);
    }

    #[test]
    fn saturation_on_toy_kill() {
        let kill = fixtures::toy_kill();
        let report = saturation_check(&kill, &m(&[0, 1]), &EngineParams::default(), 1000, 12, 7).unwrap();
        assert!(report.exhaustive && report.checked > 0);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        let none = saturation_check(&kill, &m(&[0, 1]), &EngineParams::default(), 0, 12, 7).unwrap();
        assert_eq!(none.checked, 0);
    }
}
