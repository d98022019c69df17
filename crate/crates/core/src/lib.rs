//! Decision procedures for immediate-observation (IO) and branching
//! immediate-observation (BIO) Petri nets.
//!
//! * [`net`]: the net model, firing semantics and shortening bounds.
//! * [`explicit`]: capped explicit-state oracles.
//! * [`history`]: histories, decorations and the transformations that shorten them.
//! * [`footprint`]: pre-images of single markings via footprints.
//! * [`countset`]: counting sets (finite unions of cubes) and the cube queries built on them.
//! * [`flat`]: flatness witnesses for IO nets.
//! * [`generate`]: seeded generators used by the test suites and the CLI.

pub mod countset;
pub mod explicit;
pub mod fixtures;
pub mod flat;
pub mod footprint;
pub mod generate;
pub mod history;
pub mod net;

pub use countset::{CountingSet, Cube};
pub use explicit::{Answer, SearchParams, Verdict};
pub use footprint::{EngineParams, FootprintState};
pub use history::{BioHistory, Decoration, IoHistory, Role};
pub use net::{AcceleratedSequence, Block, Bounds, Class, Marking, Net, NetError, PlaceId, TransitionId};
