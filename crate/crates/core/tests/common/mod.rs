#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use histeq::cli::cli_main;
use histeq::oracle::{random_wfnet, GenParams};
use histeq::reach::{build_reachability, DEFAULT_MAX_STATES};
use histeq::{MarkingKey, Tts, WfNet};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

pub fn tts(labels: &[&str]) -> Tts {
    labels.iter().map(|s| s.to_string()).collect()
}

pub fn key(s: &str) -> MarkingKey {
    MarkingKey::parse(s)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("histeq").chain(args.iter().copied());
    let code = cli_main(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// Generator settings varied by seed so draws cover all block kinds.
pub fn params(seed: u64, max_places: usize) -> GenParams {
    GenParams {
        seed,
        max_places,
        max_transitions: 6 + (seed % 7) as usize,
        loop_probability: [0.0, 0.3, 0.5, 0.7][(seed % 4) as usize],
        parallel_probability: [0.2, 0.5][(seed / 4 % 2) as usize],
        empty_probability: [0.0, 0.5][(seed / 8 % 2) as usize],
    }
}

/// First `count` generated nets (from seed `first` on) whose reachability
/// graph has at most `max_nodes` markings.
pub fn small_nets(first: u64, count: usize, max_places: usize, max_nodes: usize) -> Vec<WfNet> {
    let mut nets = Vec::new();
    let mut seed = first;
    while nets.len() < count {
        let net = random_wfnet(&params(seed, max_places));
        let g = build_reachability(&net, DEFAULT_MAX_STATES).unwrap();
        if g.node_count() <= max_nodes {
            nets.push(net);
        }
        seed += 1;
    }
    nets
}

/// Keys of a node-indexed map, for readable assertion output.
pub fn by_key<V: Clone>(
    g: &histeq::ReachGraph,
    m: &BTreeMap<histeq::NodeId, V>,
) -> BTreeMap<MarkingKey, V> {
    m.iter()
        .map(|(n, v)| (g.key(*n).clone(), v.clone()))
        .collect()
}

/// Mapping computed from brute-force trace enumeration instead of the TTS
/// fixpoint.
pub fn oracle_mapping(old: &WfNet, new: &WfNet) -> histeq::MappingTable {
    use histeq::equivalence::{match_families, purge};
    use histeq::oracle::oracle_tts_all;
    let side = |net: &WfNet| {
        let g = build_reachability(net, DEFAULT_MAX_STATES).unwrap();
        let empty = net.empty_labels();
        let fams: BTreeMap<_, _> = oracle_tts_all(&g)
            .into_iter()
            .map(|(n, f)| (n, purge(&f, &empty)))
            .collect();
        (g, fams)
    };
    let (og, of) = side(old);
    let (ng, nf) = side(new);
    match_families(&og, &of, &ng, &nf)
}

/// True when every marking of `net` maps to itself in `table`.
pub fn is_reflexive(table: &histeq::MappingTable) -> bool {
    table.rows().iter().all(|r| r.equivalents.contains(&r.old))
}
