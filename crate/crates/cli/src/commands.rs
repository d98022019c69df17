//! One function per subcommand. Each returns a report or a usage/data error.

use serde_json::{json, Value};

use bionet_core::countset::{self, CountingSet, CountsetError, Cube};
use bionet_core::explicit::{self, Answer, SearchParams, Verdict};
use bionet_core::flat;
use bionet_core::footprint::{self, EngineParams, FootprintError, FootprintState};
use bionet_core::history::{self, footprint_at, wasteful_levels};
use bionet_core::{Marking, Net};

use crate::input::{self, CliError};
use crate::report::{self, Report, Status};
use crate::{CapArgs, CoverEngine, EngineArgs, ReachEngine};

type Outcome = Result<Report, CliError>;

/// Caps for the explicit engines. Unset caps default to twice the largest
/// queried marking size, at least 16 per place.
fn search_params(net: &Net, caps: &CapArgs, markings: &[&Marking]) -> SearchParams {
    let largest = markings.iter().map(|m| m.total()).max().unwrap_or(0);
    let per_place = caps.cap_per_place.unwrap_or((2 * largest).max(16));
    let total = caps.cap_total.unwrap_or(per_place.saturating_mul(net.place_count() as u64));
    SearchParams::new(per_place, total)
}

fn engine_params(args: &EngineArgs) -> EngineParams {
    EngineParams {
        tracked_cap: args.tracked_cap,
        smoke_rep: args.smoke_rep,
        stability_rounds: args.stability_rounds,
        search_cap: args.search_cap,
    }
}

/// Resolved engine parameters for `target`, with a warning when `ρ` does not
/// sit above `θ`.
/// How unset engine parameters are filled in when the target varies
/// within one command.
pub const PER_TARGET_DEFAULTS: &str = "per target: tracked_cap = |target| + n, smoke_rep = tracked_cap + 1, \
stability_rounds = 2, search_cap = max(smoke_rep + stability_rounds, tracked_cap, max target) + tracked_cap";

fn echo_engine(r: &mut Report, net: &Net, params: &EngineParams, target: &Marking) {
    let resolved = params.resolve(net.place_count(), target);
    if !resolved.is_sound() {
        r.warn(format!(
            "smoke representative {} is not above the tracked cap {}; verdicts may be wrong",
            resolved.smoke_rep, resolved.tracked_cap
        ));
    }
    r.param("engine_params", resolved.to_json());
}

/// Reports instability as an inconclusive answer; other errors propagate.
fn unstable(r: &mut Report, e: FootprintError) -> Result<(), CliError> {
    match e {
        FootprintError::Unstable { state, verdicts } => {
            r.result("answer", json!("unstable"));
            r.result("unstable_state", json!(state));
            r.result("verdicts", json!(verdicts));
            r.warn("verdict changes as the smoke representative grows; raise --tracked-cap or --smoke-rep");
            r.inconclusive();
            Ok(())
        }
        other => Err(other.into()),
    }
}

fn countset_unstable(r: &mut Report, e: CountsetError) -> Result<(), CliError> {
    match e {
        CountsetError::Footprint(e) => unstable(r, e),
        other => Err(other.into()),
    }
}

fn answer(r: &mut Report, a: Answer) {
    r.result("answer", json!(a.as_str()));
    r.status = Status::of(a);
    if a == Answer::UnknownCapped {
        r.warn("a cap was reached before the query was settled");
    }
}

pub fn classify(net: &Net) -> Outcome {
    let mut r = Report::new("classify", Some(net));
    r.result("class", json!(net.classify().to_string()));
    r.result("places", json!(net.place_count()));
    r.result("transitions", json!(net.transitions().len()));
    Ok(r)
}

pub fn reach(net: &Net, from: &str, to: &str, engine: ReachEngine, caps: &CapArgs, eargs: &EngineArgs) -> Outcome {
    let from = input::marking(net, from)?;
    let to = input::marking(net, to)?;
    let mut r = Report::new("reach", Some(net));
    r.query("from", net.marking_to_json(&from)).query("to", net.marking_to_json(&to));
    r.param("engine", json!(engine.name()));
    match engine {
        ReachEngine::Explicit => {
            let params = search_params(net, caps, &[&from, &to]);
            r.param("search", params.to_json());
            let found = explicit::min_accelerated_length(net, &from, &to, &params)?;
            let a = match (found.length, found.capped) {
                (Some(_), _) => Answer::True,
                (None, false) => Answer::False,
                (None, true) => Answer::UnknownCapped,
            };
            answer(&mut r, a);
            r.result("witness", found.witness.map_or(Value::Null, |w| report::witness(net, &from, &w, |m| m == &to)));
            r.result("explored", json!(found.explored));
        }
        ReachEngine::Footprint => {
            let params = engine_params(eargs);
            echo_engine(&mut r, net, &params, &to);
            match footprint::footprint_reach(net, &FootprintState::exact(from.clone()), &to, &params) {
                Ok(v) => verdict(&mut r, net, &from, v, |m| m == &to),
                Err(e) => unstable(&mut r, e)?,
            }
        }
        ReachEngine::Cube => {
            let params = engine_params(eargs);
            echo_engine(&mut r, net, &params, &to);
            match countset::cube_reach(net, &Cube::point(&from), &Cube::point(&to), &params) {
                Ok(b) => answer(&mut r, if b { Answer::True } else { Answer::False }),
                Err(e) => countset_unstable(&mut r, e)?,
            }
        }
    }
    Ok(r)
}

fn verdict(r: &mut Report, net: &Net, from: &Marking, v: Verdict, ends: impl Fn(&Marking) -> bool) {
    answer(r, v.answer);
    r.result("witness", v.witness.map_or(Value::Null, |w| report::witness(net, from, &w, ends)));
    r.result("explored", json!(v.explored));
}

pub fn cover(net: &Net, from: &str, to: &str, engine: CoverEngine, caps: &CapArgs, eargs: &EngineArgs) -> Outcome {
    let from = input::marking(net, from)?;
    let to = input::marking(net, to)?;
    let mut r = Report::new("cover", Some(net));
    r.query("from", net.marking_to_json(&from)).query("to", net.marking_to_json(&to));
    r.param("engine", json!(engine.name()));
    let covers = |m: &Marking| m.covers(&to);
    match engine {
        CoverEngine::Explicit | CoverEngine::Reduction => {
            let params = search_params(net, caps, &[&from, &to]);
            r.param("search", params.to_json());
            let v = if engine == CoverEngine::Explicit {
                explicit::cover(net, &from, &to, &params)?
            } else {
                explicit::cover_by_reduction(net, &from, &to, &params)?
            };
            verdict(&mut r, net, &from, v, covers);
        }
        CoverEngine::Cube => {
            let params = engine_params(eargs);
            echo_engine(&mut r, net, &params, &to);
            match countset::cube_cover(net, &Cube::point(&from), &Cube::point(&to), &params) {
                Ok(b) => answer(&mut r, if b { Answer::True } else { Answer::False }),
                Err(e) => countset_unstable(&mut r, e)?,
            }
        }
    }
    Ok(r)
}

pub fn min_len(net: &Net, from: &str, to: &str, caps: &CapArgs, max_blocks: Option<usize>) -> Outcome {
    let from = input::marking(net, from)?;
    let to = input::marking(net, to)?;
    let mut r = Report::new("min-len", Some(net));
    r.query("from", net.marking_to_json(&from)).query("to", net.marking_to_json(&to));
    let mut params = search_params(net, caps, &[&from, &to]);
    params.max_blocks = max_blocks;
    r.param("search", params.to_json());
    let found = explicit::min_accelerated_length(net, &from, &to, &params)?;
    let a = match (found.length, found.capped) {
        (Some(_), _) => Answer::True,
        (None, false) => Answer::False,
        (None, true) => Answer::UnknownCapped,
    };
    answer(&mut r, a);
    r.result("length", json!(found.length));
    if found.length.is_some() && found.capped {
        r.warn("a cap was reached; a shorter witness may leave the box");
    }
    r.result("witness", found.witness.map_or(Value::Null, |w| report::witness(net, &from, &w, |m| m == &to)));
    r.result("explored", json!(found.explored));
    let bounds = net.compute_bounds(to.total(), from.total());
    r.result("bound", json!(if net.classify() == bionet_core::Class::Io { bounds.k_io } else { bounds.k_bio }.to_string()));
    Ok(r)
}

pub fn cube_query(net: &Net, cover: bool, from: &str, to: &str, eargs: &EngineArgs) -> Outcome {
    let from = input::cube(net, from)?;
    let to = input::cube(net, to)?;
    let mut r = Report::new(if cover { "cube-cover" } else { "cube-reach" }, Some(net));
    r.query("from", from.to_json(net)).query("to", to.to_json(net));
    let params = engine_params(eargs);
    echo_engine(&mut r, net, &params, &to.lower_marking());
    let result = if cover {
        countset::cube_cover(net, &from, &to, &params)
    } else {
        countset::cube_reach(net, &from, &to, &params)
    };
    match result {
        Ok(b) => answer(&mut r, if b { Answer::True } else { Answer::False }),
        Err(e) => countset_unstable(&mut r, e)?,
    }
    Ok(r)
}

fn set_result(r: &mut Report, net: &Net, set: &CountingSet) {
    r.result("set", set.to_json(net));
    r.result("cubes", json!(set.cubes().len()));
    r.result("norms", json!({ "upper": set.upper_norm(), "lower": set.lower_norm() }));
}

pub fn pre_star(net: &Net, to: Option<&str>, cube_to: Option<&str>, eargs: &EngineArgs) -> Outcome {
    let params = engine_params(eargs);
    let mut r = Report::new("pre-star", Some(net));
    match (to, cube_to) {
        (Some(to), None) => {
            let to = input::marking(net, to)?;
            r.query("to", net.marking_to_json(&to));
            echo_engine(&mut r, net, &params, &to);
            match footprint::pre_star_point(net, &to, &params) {
                Ok(pre) => {
                    set_result(&mut r, net, &pre.set);
                    r.result("footprints", json!(pre.footprints));
                    r.result("truncated", json!(pre.truncated));
                    if pre.truncated {
                        r.warn("the backward search touched its box; paths above it are not seen");
                    }
                }
                Err(e) => unstable(&mut r, e)?,
            }
        }
        (None, Some(cube)) => {
            let cube = input::cube(net, cube)?;
            r.query("cube_to", cube.to_json(net));
            echo_engine(&mut r, net, &params, &cube.lower_marking());
            match countset::pre_star_cube(net, &cube, &params) {
                Ok(set) => set_result(&mut r, net, &set),
                Err(e) => countset_unstable(&mut r, e)?,
            }
        }
        _ => return Err(CliError::Usage("give exactly one of --to and --cube-to".into())),
    }
    Ok(r)
}

pub fn live_set(net: &Net, eargs: &EngineArgs) -> Outcome {
    let params = engine_params(eargs);
    let mut r = Report::new("live-set", Some(net));
    r.param("engine_params", params.to_json());
    r.param("defaults", json!(PER_TARGET_DEFAULTS));
    match countset::live_set(net, &params) {
        Ok(set) => set_result(&mut r, net, &set),
        Err(e) => countset_unstable(&mut r, e)?,
    }
    Ok(r)
}

pub fn live(net: &Net, from: &str, caps: &CapArgs, eargs: &EngineArgs) -> Outcome {
    let from = input::marking(net, from)?;
    let params = engine_params(eargs);
    let mut r = Report::new("live", Some(net));
    r.query("from", net.marking_to_json(&from));
    r.param("engine_params", params.to_json());
    r.param("defaults", json!(PER_TARGET_DEFAULTS));
    let search = search_params(net, caps, &[&from]);
    r.param("search", search.to_json());
    let set = match countset::live_set(net, &params) {
        Ok(set) => set,
        Err(e) => {
            countset_unstable(&mut r, e)?;
            return Ok(r);
        }
    };
    let engine = set.contains(&from);
    answer(&mut r, if engine { Answer::True } else { Answer::False });
    let oracle = explicit::live_oracle(net, &from, &search)?;
    r.result("oracle", json!(oracle.as_str()));
    if oracle != Answer::UnknownCapped && oracle.is_true() != engine {
        r.warn("the explicit oracle disagrees with the live set");
    }
    Ok(r)
}

fn footprints_json(net: &Net, h: &history::BioHistory, d: &history::Decoration) -> Result<Value, CliError> {
    let fps = (1..=h.length()).map(|i| footprint_at(h, d, i).map(|f| f.to_json(net))).collect::<Result<Vec<_>, _>>()?;
    Ok(json!(fps))
}

pub fn shorten(net: &Net, hist: &str, decoration: Option<&str>) -> Outcome {
    let (h, d) = input::history(net, hist, decoration)?;
    let mut r = Report::new("shorten", Some(net));
    r.query("length", json!(h.length()));
    r.query("initial", net.marking_to_json(&h.initial_marking()));
    r.query("final", net.marking_to_json(&h.final_marking()));
    let s = history::shorten(net, &h, &d)?;
    let cert = history::realize(net, &s.history)?;
    let seq = cert.sequence();
    let bound = net.compute_bounds(h.final_marking().total(), 0).k_bio;
    r.result("length", json!(s.history.length()));
    r.result("bound", json!(bound.to_string()));
    r.result("replacements", json!(s.replacements));
    r.result("splices", json!(s.splices));
    r.result("sequence", report::witness(net, &s.history.initial_marking(), &seq, |m| m == &h.final_marking()));
    r.result("footprints", footprints_json(net, &s.history, &s.decoration)?);
    r.result("history", s.history.to_json(net));
    r.result("decoration", s.decoration.to_json(&s.history));
    Ok(r)
}

pub fn validate_history(net: &Net, hist: &str, decoration: Option<&str>) -> Outcome {
    let (h, d) = input::history(net, hist, decoration)?;
    let mut r = Report::new("validate-history", Some(net));
    r.query("length", json!(h.length()));
    r.query("nodes", json!(h.node_count()));
    r.query("initial", net.marking_to_json(&h.initial_marking()));
    r.query("final", net.marking_to_json(&h.final_marking()));
    let violations = history::validate_decoration(&h, &d);
    match history::realize(net, &h) {
        Ok(cert) => {
            r.result("realizable", json!(true));
            r.result("certificate", cert.to_json(net));
        }
        Err(history::HistoryError::NotRealizable { level, reason }) => {
            r.result("realizable", json!(false));
            r.result("failure", json!({ "level": level, "reason": reason }));
        }
        Err(e) => return Err(e.into()),
    }
    r.result("decoration_valid", json!(violations.is_empty()));
    r.result("violations", json!(violations.iter().map(|v| v.to_string()).collect::<Vec<_>>()));
    if violations.is_empty() {
        let wasteful: Vec<Value> = wasteful_levels(&h, &d)
            .into_iter()
            .map(|(p, levels)| json!({ "place": net.place_name(p), "levels": levels }))
            .collect();
        r.result("wasteful", json!(wasteful));
        r.result("footprints", footprints_json(net, &h, &d)?);
    }
    Ok(r)
}

pub fn flatten(net: &Net, k: Option<u64>, from: Option<&str>, to: Option<&str>, caps: &CapArgs) -> Outcome {
    let mut r = Report::new("flatten", Some(net));
    r.query("k_override", json!(k));
    let witness = flat::flat_witness(net, k)?;
    r.result("witness", witness.to_json(net));
    if let (Some(from), Some(to), Some(k)) = (from, to, k) {
        let from = input::marking(net, from)?;
        let to = input::marking(net, to)?;
        r.query("from", net.marking_to_json(&from)).query("to", net.marking_to_json(&to));
        let params = search_params(net, caps, &[&from, &to]);
        r.param("search", params.to_json());
        let v = flat::pattern_check(net, &from, &to, k, &params)?;
        r.result("pattern", json!(v.answer.as_str()));
        if v.answer == Answer::UnknownCapped {
            r.warn("no witness of the word pattern within the override and caps");
            r.inconclusive();
        }
        r.result("pattern_witness", v.witness.map_or(Value::Null, |w| report::witness(net, &from, &w, |m| m == &to)));
    }
    Ok(r)
}

pub fn bounds(net: &Net, m: u64, m_prime: u64) -> Outcome {
    let b = net.compute_bounds(m, m_prime);
    let mut r = Report::new("bounds", Some(net));
    r.query("n", json!(net.place_count())).query("m", json!(m)).query("m_prime", json!(m_prime));
    r.result("k_io", json!(b.k_io.to_string()));
    r.result("k_bio", json!(b.k_bio.to_string()));
    r.result("token_bound", json!(b.token_bound.to_string()));
    r.result("m_d", json!(b.m_d));
    Ok(r)
}
