use super::*;
use crate::fixtures;
use crate::net::{Block, Marking};

fn seq(net: &Net, blocks: &[(&str, u64)]) -> AcceleratedSequence {
    AcceleratedSequence::from_blocks(
        blocks.iter().map(|&(t, k)| Block { transition: net.transition_id(t).unwrap(), times: k }).collect(),
    )
    .unwrap()
}

use crate::net::{AcceleratedSequence, Net};

const FIG4_SEQ: &[(&str, u64)] =
    &[("t1", 1), ("t2", 5), ("t3", 2), ("t4", 1), ("t5", 1), ("t6", 4), ("t7", 1), ("t8", 18)];

#[test]
fn fig4_realizes_paper_sequence() {
    let net = fixtures::paper_net_1();
    let (h, _) = fixtures::fig4();
    assert_eq!(h.roots().len(), 6);
    assert_eq!(h.length(), 9);
    verify_realization(&net, &h, &seq(&net, FIG4_SEQ)).unwrap();
    let cert = realize(&net, &h).unwrap();
    let ks: Vec<u64> = cert.multiplicities().iter().map(|&(_, k)| k).collect();
    assert_eq!(ks, vec![1, 5, 2, 1, 1, 4, 1, 18]);
    assert_eq!(h.initial_marking(), Marking::from_counts(vec![6, 0, 0]));
    assert_eq!(h.final_marking(), Marking::from_counts(vec![0, 1, 1]));
}

#[test]
fn fig4_decoration_analysis() {
    let (h, d) = fixtures::fig4();
    assert!(validate_decoration(&h, &d).is_empty());
    assert_eq!(d, default_decoration(&h));
    assert_eq!(wasteful_places(&h, &d), vec![(0, 1), (1, 3)]);
    let reach = place_level_reach(&h, &d, 0, 1);
    let expected: std::collections::BTreeSet<_> = (1..=6).map(|l| (0, l)).chain((3..=8).map(|l| (1, l))).collect();
    assert_eq!(reach, expected);
    assert!(!reach.contains(&(2, 5)));
}

#[test]
fn fig4_replacement_matches_example() {
    let net = fixtures::paper_net_1();
    let (h, d) = fixtures::fig4();
    let (h2, d2) = replace_bunch(&net, &h, &d, 0, 1).unwrap();
    assert!(wasteful_places(&h2, &d2).is_empty());
    let cert = realize(&net, &h2).unwrap();
    let ks: Vec<u64> = cert.multiplicities().iter().map(|&(_, k)| k).collect();
    assert_eq!(ks, vec![1, 1, 1, 1, 1, 5, 1, 12]);
    verify_realization(&net, &h2, &seq(&net, &[("t1", 1), ("t2", 1), ("t3", 1), ("t4", 1), ("t5", 1), ("t6", 5), ("t7", 1), ("t8", 12)])).unwrap();
    assert_eq!(h2.final_marking(), Marking::from_counts(vec![0, 1, 1]));
    let fe = make_fuel_efficient(&net, &h, &d).unwrap();
    assert_eq!(fe.replacements, 1);
}

#[test]
fn cargo_only_tree_is_not_realizable() {
    let net = fixtures::paper_net_1();
    let (h, d) = fixtures::fig4();
    let cargo_root: Vec<NodeId> = h.roots().iter().copied().filter(|&r| d.role(r) == Role::Cargo).collect();
    let (alone, _) = h.restrict(&cargo_root, None);
    // With a multiset preset the very first t1 already lacks a second p.
    match realize(&net, &alone) {
        Err(HistoryError::NotRealizable { level, .. }) => assert_eq!(level, 1),
        other => panic!("expected failure at level 1, got {other:?}"),
    }
    // With a set preset the first failure is t5, which has no p to observe.
    let set = net.with_preset_semantics(crate::net::PresetSemantics::Set);
    match realize(&set, &alone) {
        Err(HistoryError::NotRealizable { level, .. }) => assert_eq!(level, 5),
        other => panic!("expected failure at the t5 level, got {other:?}"),
    }
}

#[test]
fn sequence_round_trip() {
    let net = fixtures::paper_net_1();
    let s = seq(&net, FIG4_SEQ);
    let from = Marking::from_counts(vec![6, 0, 0]);
    let h = history_from_sequence(&net, &from, &s).unwrap();
    assert_eq!(h.roots().len(), 6);
    assert_eq!(h.length(), 9);
    assert_eq!(h.markings(), net.trace_sequence(&from, &s).unwrap());
    // t4 and t7 coincide, so compare by replay rather than by name.
    verify_realization(&net, &h, &s).unwrap();
    let found = realize(&net, &h).unwrap().sequence();
    assert_eq!(net.trace_sequence(&from, &found).unwrap(), h.markings());

    let mv = fixtures::toy_move();
    let h = history_from_sequence(&mv, &Marking::from_counts(vec![2, 1]), &seq(&mv, &[("t", 2)])).unwrap();
    assert_eq!((h.roots().len(), h.length()), (3, 2));
    assert_eq!(h.final_marking(), Marking::from_counts(vec![0, 3]));

    let empty = history_from_sequence(&mv, &Marking::from_counts(vec![1, 1]), &AcceleratedSequence::new()).unwrap();
    assert_eq!(empty.length(), 1);
    assert!(realize(&mv, &empty).unwrap().steps.is_empty());
}

#[test]
fn self_feeding_block_spreads_over_levels() {
    let net = fixtures::toy_loop();
    let from = Marking::from_counts(vec![2]);
    let s = AcceleratedSequence::from_firings(&[0, 0, 0]);
    // An idle firing needs no extra level.
    let h = history_from_sequence(&net, &from, &s).unwrap();
    realize(&net, &h).unwrap();
    assert_eq!(h.final_marking(), from);
}

#[test]
fn fig4_shortens_to_distinct_footprints() {
    let net = fixtures::paper_net_1();
    let (h, d) = fixtures::fig4();
    let out = shorten(&net, &h, &d).unwrap();
    let fps: Vec<_> = (1..=out.history.length()).map(|i| footprint_at(&out.history, &out.decoration, i).unwrap()).collect();
    let distinct: std::collections::BTreeSet<_> = fps.iter().collect();
    assert_eq!(distinct.len(), fps.len());
    assert!(out.history.length() <= 9);
    assert_eq!(out.history.initial_marking(), h.initial_marking());
    assert_eq!(out.history.final_marking(), h.final_marking());
}

#[test]
fn footprint_of_last_level_is_cargo() {
    let (h, d) = fixtures::fig4();
    let fp = footprint_at(&h, &d, 9).unwrap();
    assert_eq!(fp.cargo, Marking::from_counts(vec![0, 1, 1]));
    assert!(fp.fuel.is_zero() && fp.smoke.is_empty());
    assert!(footprint_at(&h, &d, 10).is_err());
}

#[test]
fn json_round_trip() {
    let net = fixtures::paper_net_1();
    let (h, d) = fixtures::fig4();
    let text = h.to_json(&net).to_string();
    assert_eq!(BioHistory::parse(&net, &text).unwrap(), h);
    let dtext = d.to_json(&h).to_string();
    assert_eq!(Decoration::parse(&h, &dtext).unwrap(), d);
}
