//! Small reference nets and graphs shipped with the crate.
//!
//! `g1` and `g2` are hand-built reachability graphs: `g1` has two loops
//! through the marking `{P2}` sharing the `T1`/`T4` edges; `g2` has four
//! overlapping loops around `{P1}`, one of which (`T12`/`T13`) hangs off the
//! private segment of another. The `fig4` and `fig7` nets produce the same
//! graphs plus an exit transition to their sink.

use crate::io::parse_net;
use crate::net::WfNet;
use crate::reach::{MarkingKey, ReachGraph, ReachGraphBuilder};

/// `(name, document)` for every bundled net.
pub const NETS: &[(&str, &str)] = &[
    ("sequence", include_str!("../fixtures/sequence.json")),
    ("fig2a", include_str!("../fixtures/fig2a.json")),
    ("fig2b", include_str!("../fixtures/fig2b.json")),
    ("fig4", include_str!("../fixtures/fig4.json")),
    ("fig7", include_str!("../fixtures/fig7.json")),
    ("fig8_old", include_str!("../fixtures/fig8_old.json")),
    ("fig8_new", include_str!("../fixtures/fig8_new.json")),
];

/// Parses a bundled net by name. Panics on unknown names.
pub fn net(name: &str) -> WfNet {
    let (_, text) = NETS
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no bundled net `{name}`"));
    parse_net(text).expect("bundled nets parse")
}

fn graph(initial: &str, edges: &[(&str, &str, &str)]) -> ReachGraph {
    let mut b = ReachGraphBuilder::new(MarkingKey::new([initial]));
    for (src, label, dst) in edges {
        b.edge(MarkingKey::new([*src]), *label, MarkingKey::new([*dst]));
    }
    b.build()
}

/// Six markings, seven edges; loops `T1 T2 T3 T4` and `T1 T5 T6 T4`.
pub fn g1() -> ReachGraph {
    graph(
        "P1",
        &[
            ("P1", "T0", "P2"),
            ("P2", "T1", "P3"),
            ("P3", "T2", "P4"),
            ("P4", "T3", "P5"),
            ("P5", "T4", "P2"),
            ("P3", "T5", "P6"),
            ("P6", "T6", "P5"),
        ],
    )
}

/// Eleven markings, fourteen edges; loops
/// `T3 T4 T5 T6 T7 T1`, `T12 T13`, `T4 T8 T9` and
/// `T3 T4 T5 T10 T11 T14 T7 T1`.
pub fn g2() -> ReachGraph {
    graph(
        "P0",
        &[
            ("P0", "T0", "P1"),
            ("P1", "T3", "P2"),
            ("P2", "T4", "P3"),
            ("P3", "T5", "P4"),
            ("P4", "T6", "P5"),
            ("P5", "T7", "P6"),
            ("P6", "T1", "P1"),
            ("P4", "T10", "P7"),
            ("P7", "T11", "P8"),
            ("P8", "T14", "P5"),
            ("P7", "T12", "P9"),
            ("P9", "T13", "P7"),
            ("P3", "T8", "P10"),
            ("P10", "T9", "P2"),
        ],
    )
}
