//! Engine-versus-oracle comparison on generated instances.
//!
//! For every instance `(net, M)` the footprint pre-image of `M` is compared,
//! marking by marking over `[0, cap]^n`, with an explicit backward search.
//! The explicit box is the engine's box, widened so every compared marking
//! has `θ` tokens of headroom. Each disagreement is shrunk by dropping
//! transitions while some disagreement remains, then reported at its
//! smallest marking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use bionet_core::explicit::{self, SearchParams};
use bionet_core::footprint::{self, EngineParams, FootprintError};
use bionet_core::generate::{self, NetShape};
use bionet_core::{fixtures, Marking, Net};

use crate::input::CliError;
use crate::report::Report;
use crate::Family;

pub struct Suite {
    pub seed: u64,
    pub places: usize,
    pub transitions: usize,
    pub instances: usize,
    pub cap: u64,
    pub family: Family,
}

/// What went wrong on one instance.
enum Mismatch {
    Unstable(String),
    Membership { marking: Marking, engine: bool, oracle: bool, count: usize },
}

fn compare(net: &Net, target: &Marking, params: &EngineParams, cap: u64) -> Result<Option<Mismatch>, CliError> {
    let n = net.place_count();
    let engine = match footprint::pre_star_point(net, target, params) {
        Ok(e) => e,
        Err(FootprintError::Unstable { state, .. }) => return Ok(Some(Mismatch::Unstable(state))),
        Err(e) => return Err(e.into()),
    };
    let r = engine.params;
    let oracle_box = r.search_cap.max(cap + r.tracked_cap).max(target.max_count());
    let oracle = explicit::pre_image_bounded(net, target, &SearchParams::per_place(oracle_box, n))?;
    let mut first: Option<(Marking, bool, bool)> = None;
    let mut count = 0;
    let mut domain = generate::all_markings(n, cap);
    domain.sort_by_key(|m| (m.total(), m.clone()));
    for x in domain {
        let (e, o) = (engine.set.contains(&x), oracle.contains(&x));
        if e != o {
            count += 1;
            first.get_or_insert((x, e, o));
        }
    }
    Ok(first.map(|(marking, engine, oracle)| Mismatch::Membership { marking, engine, oracle, count }))
}

/// Drops transitions one at a time while the instance still disagrees.
fn shrink(net: &Net, target: &Marking, params: &EngineParams, cap: u64) -> Result<(Net, Mismatch), CliError> {
    let mut current = net.clone();
    let mut mismatch = compare(&current, target, params, cap)?.expect("called on a disagreement");
    let mut t = 0;
    while t < current.transitions().len() && current.transitions().len() > 1 {
        let mut kept = current.transitions().to_vec();
        kept.remove(t);
        let smaller = Net::new(current.name(), current.places().to_vec(), kept, current.extensions())?
            .with_preset_semantics(current.preset_semantics());
        match compare(&smaller, target, params, cap)? {
            Some(m) => {
                current = smaller;
                mismatch = m;
            }
            None => t += 1,
        }
    }
    Ok((current, mismatch))
}

fn instances(suite: &Suite) -> Vec<(Net, Marking)> {
    match suite.family {
        Family::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
            (0..suite.instances)
                .map(|i| {
                    let shape = NetShape {
                        places: suite.places,
                        transitions: rng.gen_range(1..=suite.transitions.max(1)),
                        max_create: 2,
                        io: false,
                    };
                    let net = generate::random_net(&mut rng, shape, &format!("instance-{i}"));
                    let target = generate::random_marking(&mut rng, suite.places, 2);
                    (net, target)
                })
                .collect()
        }
        Family::ToyKill => {
            let net = fixtures::toy_kill();
            let targets = generate::all_markings(net.place_count(), 2);
            (0..suite.instances).map(|i| (net.clone(), targets[i % targets.len()].clone())).collect()
        }
    }
}

pub fn run(suite: &Suite, params: &EngineParams) -> Result<Report, CliError> {
    if suite.places == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let mut r = Report::new("oracle-diff", None);
    r.query("family", json!(suite.family.name()))
        .query("seed", json!(suite.seed))
        .query("n", json!(suite.places))
        .query("transitions", json!(suite.transitions))
        .query("instances", json!(suite.instances))
        .query("cap", json!(suite.cap));
    r.param("engine_params", params.to_json());
    r.param("defaults", json!(crate::commands::PER_TARGET_DEFAULTS));
    r.param("oracle_box", json!("max(search_cap, cap + tracked_cap, max target)"));
    let mut disagreements: Vec<Value> = Vec::new();
    let mut checked = 0u64;
    let mut unsound = false;
    for (i, (net, target)) in instances(suite).into_iter().enumerate() {
        unsound |= !params.resolve(net.place_count(), &target).is_sound();
        checked += (suite.cap + 1).pow(net.place_count() as u32);
        if compare(&net, &target, params, suite.cap)?.is_none() {
            continue;
        }
        let (small, mismatch) = shrink(&net, &target, params, suite.cap)?;
        let detail = match mismatch {
            Mismatch::Unstable(state) => json!({ "kind": "unstable", "state": state }),
            Mismatch::Membership { marking, engine, oracle, count } => json!({
                "kind": "membership",
                "marking": small.marking_to_json(&marking),
                "engine": engine,
                "oracle": oracle,
                "disagreeing_markings": count,
            }),
        };
        disagreements.push(json!({
            "instance": i,
            "target": small.marking_to_json(&target),
            "net": small.to_json(),
            "removed_transitions": net.transitions().len() - small.transitions().len(),
            "engine_params": params.resolve(small.place_count(), &target).to_json(),
            "counterexample": detail,
        }));
    }
    r.result("instances", json!(suite.instances));
    r.result("memberships_checked", json!(checked));
    r.result("disagreement_count", json!(disagreements.len()));
    r.result("disagreements", json!(disagreements));
    if unsound {
        r.warn("on some instances the smoke representative is not above the tracked cap");
    }
    if !disagreements.is_empty() {
        r.warn("the engine disagrees with the explicit oracle");
        r.inconclusive();
    }
    Ok(r)
}
