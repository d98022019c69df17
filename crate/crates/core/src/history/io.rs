//! IO histories: multisets of equal-length trajectories.

use serde_json::{json, Value};

use super::{realize, BioHistory, Builder, HistoryError, Role};
use crate::net::{Marking, Net, PlaceId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IoHistory {
    length: usize,
    trajectories: Vec<Vec<PlaceId>>,
}

impl IoHistory {
    pub fn new(length: usize, trajectories: Vec<Vec<PlaceId>>) -> Result<Self, HistoryError> {
        if length == 0 {
            return Err(HistoryError::Schema("trajectories need at least one place".into()));
        }
        if trajectories.iter().any(|t| t.len() != length) {
            return Err(HistoryError::Schema(format!("every trajectory must have length {length}")));
        }
        Ok(IoHistory { length, trajectories })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn trajectories(&self) -> &[Vec<PlaceId>] {
        &self.trajectories
    }

    pub fn marking_at(&self, places: usize, i: usize) -> Marking {
        let mut m = Marking::zero(places);
        for t in &self.trajectories {
            m.add_to(t[i - 1], 1);
        }
        m
    }

    /// Reads a history whose trees are all full-length chains.
    pub fn from_bio(h: &BioHistory) -> Result<Self, HistoryError> {
        let mut trajectories = Vec::with_capacity(h.roots().len());
        for &r in h.roots() {
            let mut t = vec![h.label(r)];
            let mut v = r;
            loop {
                match h.children(v) {
                    [] => break,
                    [c] => {
                        v = *c;
                        t.push(h.label(v));
                    }
                    _ => return Err(HistoryError::NotIo("a node has several children".into())),
                }
            }
            if t.len() != h.length() {
                return Err(HistoryError::NotIo("a trajectory ends before the last level".into()));
            }
            trajectories.push(t);
        }
        Ok(IoHistory { length: h.length(), trajectories })
    }

    /// Each trajectory as a unary tree.
    pub fn to_bio(&self, places: usize) -> BioHistory {
        let mut b = Builder::default();
        for t in &self.trajectories {
            let mut v = b.node(t[0], Role::Fuel);
            b.roots.push(v);
            for &p in &t[1..] {
                v = b.child(v, p, Role::Fuel);
            }
        }
        b.finish(places, self.length).expect("chains have the declared length").0
    }

    pub fn to_json(&self, net: &Net) -> Value {
        let trajectories: Vec<Vec<&str>> =
            self.trajectories.iter().map(|t| t.iter().map(|&p| net.place_name(p)).collect()).collect();
        json!({ "length": self.length, "trajectories": trajectories })
    }
}

/// Adds a second copy of `tau`, which must already occur in `h`.
pub fn boost(net: &Net, h: &IoHistory, tau: &[PlaceId]) -> Result<IoHistory, HistoryError> {
    if !h.trajectories.iter().any(|t| t == tau) {
        return Err(HistoryError::UnknownTrajectory);
    }
    realize(net, &h.to_bio(net.place_count()))?;
    let mut trajectories = h.trajectories.clone();
    trajectories.push(tau.to_vec());
    let out = IoHistory { length: h.length, trajectories };
    realize(net, &out.to_bio(net.place_count()))?;
    Ok(out)
}
