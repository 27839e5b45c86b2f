//! History-equivalence mapping between workflow Petri nets.
//!
//! Given an old and a new workflow net, [`find_equivalence_mapping`] lists
//! for every reachable marking of the old net the markings of the new net
//! that can be reached by firing the same *set* of transitions. Markings
//! without such a partner form the change region: running instances there
//! cannot be migrated under this criterion.
//!
//! The pipeline is:
//! - [`reach::build_reachability`] explores the token game of a 1-bounded net;
//! - [`tts`] computes every marking's trace transition sets from seed paths
//!   and elementary cycles;
//! - [`equivalence`] purges helper transitions and intersects the families.
//!
//! [`oracle`] holds a brute-force reference used by the test suites.

pub mod cli;
pub mod equivalence;
pub mod fixtures;
pub mod io;
pub mod net;
pub mod oracle;
pub mod reach;
pub mod tts;

pub use equivalence::{change_region, find_equivalence_mapping, purge, MappingRow, MappingTable};
pub use io::{parse_net, serialize_net, MappingDocument, NetDocument};
pub use net::{validate_structural, Marking, ValidationReport, ViolationCode, WfNet};
pub use reach::{build_reachability, to_dot, validate_behavioral, MarkingKey, NodeId, ReachGraph};
pub use tts::{find_cycles, find_simple_paths, tts_all, tts_for_node, Tts, TtsFamily};
