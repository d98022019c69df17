//! Nets and histories shipped with the repository.

use crate::history::{BioHistory, Decoration};
use crate::net::Net;

pub const PAPER_NET_1: &str = include_str!("../../../fixtures/paper-net-1.json");
pub const TOY_MOVE: &str = include_str!("../../../fixtures/toy-move.json");
pub const TOY_LOOP: &str = include_str!("../../../fixtures/toy-loop.json");
pub const TOY_DUP: &str = include_str!("../../../fixtures/toy-dup.json");
pub const TOY_KILL: &str = include_str!("../../../fixtures/toy-kill.json");
pub const TWIN_LOOPS: &str = include_str!("../../../fixtures/twin-loops.json");
pub const FIG4_HISTORY: &str = include_str!("../../../fixtures/fig4-history.json");
pub const FIG4_DECORATION: &str = include_str!("../../../fixtures/fig4-decoration.json");

/// Places p, q, r and transitions t1..t8 of the decorated-history example.
pub fn paper_net_1() -> Net {
    Net::parse(PAPER_NET_1).expect("fixture parses")
}

/// `t: a -b-> {b}`.
pub fn toy_move() -> Net {
    Net::parse(TOY_MOVE).expect("fixture parses")
}

/// `t: a -a-> {a}`.
pub fn toy_loop() -> Net {
    Net::parse(TOY_LOOP).expect("fixture parses")
}

/// `t: a -b-> {b, b}`.
pub fn toy_dup() -> Net {
    Net::parse(TOY_DUP).expect("fixture parses")
}

/// `t: a -b-> {}`.
pub fn toy_kill() -> Net {
    Net::parse(TOY_KILL).expect("fixture parses")
}

/// A self-observing loop on each of two places.
pub fn twin_loops() -> Net {
    Net::parse(TWIN_LOOPS).expect("fixture parses")
}

/// Six trees over PAPER-NET-1 realized by `t1 t2^5 t3^2 t4 t5 t6^4 t7 t8^18`.
pub fn fig4() -> (BioHistory, Decoration) {
    let net = paper_net_1();
    let history = BioHistory::parse(&net, FIG4_HISTORY).expect("fixture parses");
    let decoration = Decoration::parse(&history, FIG4_DECORATION).expect("fixture parses");
    (history, decoration)
}

/// Looks up a built-in net by its fixture name.
pub fn by_name(name: &str) -> Option<Net> {
    let text = match name {
        "paper-net-1" => PAPER_NET_1,
        "toy-move" => TOY_MOVE,
        "toy-loop" => TOY_LOOP,
        "toy-dup" => TOY_DUP,
        "toy-kill" => TOY_KILL,
        "twin-loops" => TWIN_LOOPS,
        _ => return None,
    };
    Net::parse(text).ok()
}
