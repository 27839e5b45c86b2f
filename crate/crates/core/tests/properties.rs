mod common;

use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use histeq::equivalence::{find_equivalence_mapping, purge, purged_families};
use histeq::io::{parse_net, serialize_net};
use histeq::net::{validate_structural, Marking};
use histeq::oracle::{
    brute_force_cycles, brute_force_markings, oracle_tts_all, random_wfnet, sufficiency_bound,
    witness_trace,
};
use histeq::reach::{
    build_reachability, MarkingKey, ReachGraph, ReachGraphBuilder, DEFAULT_MAX_STATES,
};
use histeq::tts::{
    expand_with_cycles, find_cycles, find_simple_paths, tts_all, tts_for_node_with, EdgeSet,
    TtsFamily,
};

use common::{by_key, is_reflexive, oracle_mapping, params};

fn graph_from(n: usize, edges: &[(usize, usize, usize)]) -> ReachGraph {
    // keep only edges reachable from node 0
    let mut reach = vec![false; n];
    reach[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for &(s, d, _) in edges {
            if s == v && !reach[d] {
                reach[d] = true;
                queue.push_back(d);
            }
        }
    }
    let k = |i: usize| MarkingKey::new([format!("n{i}")]);
    let mut b = ReachGraphBuilder::new(k(0));
    for &(s, d, l) in edges {
        if reach[s] {
            b.edge(k(s), format!("t{l}"), k(d));
        }
    }
    b.build()
}

fn digraph() -> impl Strategy<Value = ReachGraph> {
    (1usize..=6).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 0usize..5), 0..=10)
            .prop_map(move |edges| graph_from(n, &edges))
    })
}

fn net_seed() -> impl Strategy<Value = (u64, usize)> {
    (0u64..100_000, 3usize..=8)
}

fn edge_sets(cycles: &[Vec<usize>]) -> BTreeSet<BTreeSet<usize>> {
    cycles.iter().map(|c| c.iter().copied().collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn johnson_finds_every_elementary_cycle(g in digraph()) {
        let fast: Vec<Vec<usize>> = find_cycles(&g).iter().map(|c| c.edges().to_vec()).collect();
        prop_assert_eq!(fast.len(), edge_sets(&fast).len());
        prop_assert_eq!(edge_sets(&fast), edge_sets(&brute_force_cycles(&g)));
    }

    #[test]
    fn tts_matches_oracle_on_random_graphs(g in digraph()) {
        prop_assert_eq!(by_key(&g, &tts_all(&g)), by_key(&g, &oracle_tts_all(&g)));
    }

    #[test]
    fn cycle_order_does_not_matter(g in digraph(), shuffle_seed in any::<u64>()) {
        let cycles = find_cycles(&g);
        let mut shuffled = cycles.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed));
        for n in g.nodes() {
            prop_assert_eq!(tts_for_node_with(&g, n, &cycles), tts_for_node_with(&g, n, &shuffled));
        }
    }

    #[test]
    fn expansion_is_monotone_over_seeds(g in digraph()) {
        let cycles = find_cycles(&g);
        for n in g.nodes() {
            let seeds: Vec<EdgeSet> = find_simple_paths(&g, g.initial(), n).iter().map(EdgeSet::from).collect();
            let expanded = expand_with_cycles(&g, g.initial(), &seeds, &cycles);
            for set in &expanded {
                prop_assert!(seeds.iter().any(|s| s.edges().all(|e| set.contains(e))));
            }
            let labels = g.labels().len() as u32;
            let family: TtsFamily = expanded.iter().map(|s| s.labels(&g)).collect();
            prop_assert!(family.len() as u64 <= 1u64 << labels);
        }
    }

    #[test]
    fn projected_fixpoint_matches_edge_fixpoint(g in digraph()) {
        let cycles = find_cycles(&g);
        for n in g.nodes() {
            let seeds: Vec<EdgeSet> = find_simple_paths(&g, g.initial(), n).iter().map(EdgeSet::from).collect();
            let by_edges: TtsFamily = expand_with_cycles(&g, g.initial(), &seeds, &cycles)
                .iter()
                .map(|s| s.labels(&g))
                .collect();
            prop_assert_eq!(tts_for_node_with(&g, n, &cycles), by_edges);
        }
    }

    #[test]
    fn reachability_is_sound_complete_and_deterministic((seed, places) in net_seed()) {
        let net = random_wfnet(&params(seed, places));
        let g = build_reachability(&net, DEFAULT_MAX_STATES).unwrap();
        prop_assert_eq!(&g, &build_reachability(&net, DEFAULT_MAX_STATES).unwrap());
        let keys: BTreeSet<MarkingKey> = g.nodes().map(|n| g.key(n).clone()).collect();
        prop_assert_eq!(keys, brute_force_markings(&net));
        for e in g.edges() {
            let src = net.marking_of(g.key(e.src).places()).unwrap();
            let dst = net.marking_of(g.key(e.dst).places()).unwrap();
            prop_assert_eq!(net.fire_label(&src, &e.label).unwrap(), dst);
        }
    }

    #[test]
    fn every_tts_has_a_replayable_witness((seed, places) in net_seed()) {
        let net = random_wfnet(&params(seed, places));
        let g = build_reachability(&net, DEFAULT_MAX_STATES).unwrap();
        prop_assume!(g.node_count() <= 12);
        let bound = sufficiency_bound(&g);
        for (n, family) in tts_all(&g) {
            for t in &family {
                let trace = witness_trace(&g, n, t, bound);
                prop_assert!(trace.is_some(), "no trace for {:?} at {}", t, g.key(n));
                let mut m = net.initial_marking().unwrap();
                for label in trace.unwrap() {
                    m = net.fire_label(&m, &label).unwrap();
                }
                prop_assert_eq!(&net.marking_names(&m), g.key(n).places());
            }
        }
    }

    #[test]
    fn enabled_and_fire_agree((seed, places) in net_seed(), bits in any::<u32>()) {
        let net = random_wfnet(&params(seed, places));
        let m = Marking::new((0..net.places().len()).filter(|i| bits & (1 << i) != 0).map(histeq::net::PlaceId));
        let enabled = net.enabled(&m);
        for (i, _) in net.transitions().iter().enumerate() {
            let t = histeq::net::TransitionId(i);
            match net.fire(&m, t) {
                Ok(next) => {
                    prop_assert!(enabled.contains(&t));
                    // no place ends up double-marked: the set size accounts for every token
                    let tr = net.transition(t);
                    let expected = m.len() - tr.inputs.len() + tr.outputs.len();
                    prop_assert_eq!(next.len(), expected);
                }
                Err(e) if e.code() == "UNSAFE_FIRING" => prop_assert!(enabled.contains(&t)),
                Err(_) => prop_assert!(!enabled.contains(&t)),
            }
        }
    }

    #[test]
    fn documents_round_trip((seed, places) in net_seed()) {
        let net = random_wfnet(&params(seed, places));
        let text = serialize_net(&net);
        let back = parse_net(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(serialize_net(&back), text);
    }

    #[test]
    fn structural_validation_is_pure((seed, places) in net_seed()) {
        let net = random_wfnet(&params(seed, places));
        prop_assert_eq!(validate_structural(&net), validate_structural(&net.clone()));
    }

    #[test]
    fn purge_is_idempotent((seed, places) in net_seed()) {
        let net = random_wfnet(&params(seed, places));
        let g = build_reachability(&net, DEFAULT_MAX_STATES).unwrap();
        prop_assume!(g.node_count() <= 16);
        let empty = net.empty_labels();
        for family in tts_all(&g).values() {
            let once = purge(family, &empty);
            prop_assert_eq!(purge(&once, &empty), once.clone());
            prop_assert!(once.iter().all(|t| t.is_disjoint(&empty)));
        }
    }

    #[test]
    fn mapping_criterion_is_symmetric((a, b) in (0u64..50_000, 0u64..50_000)) {
        let old = random_wfnet(&params(a, 6));
        let new = random_wfnet(&params(b, 6));
        let fwd = find_equivalence_mapping(&old, &new, DEFAULT_MAX_STATES).unwrap();
        let bwd = find_equivalence_mapping(&new, &old, DEFAULT_MAX_STATES).unwrap();
        let pairs = |t: &histeq::MappingTable, flip: bool| -> BTreeSet<(MarkingKey, MarkingKey)> {
            t.rows().iter().flat_map(|r| r.equivalents.iter().map(move |e| {
                if flip { (e.clone(), r.old.clone()) } else { (r.old.clone(), e.clone()) }
            })).collect()
        };
        prop_assert_eq!(pairs(&fwd, false), pairs(&bwd, true));
    }

    #[test]
    fn initial_markings_match_without_helpers_or_loops((a, b) in (0u64..50_000, 0u64..50_000)) {
        let mut pa = params(a, 7);
        let mut pb = params(b, 7);
        for p in [&mut pa, &mut pb] {
            p.loop_probability = 0.0;
            p.empty_probability = 0.0;
        }
        let (old, new) = (random_wfnet(&pa), random_wfnet(&pb));
        let t = find_equivalence_mapping(&old, &new, DEFAULT_MAX_STATES).unwrap();
        let old_init = MarkingKey::new(net_initial_names(&old));
        let new_init = MarkingKey::new(net_initial_names(&new));
        prop_assert!(t.get(&old_init).unwrap().contains(&new_init));
    }

    #[test]
    fn mapping_matches_trace_enumeration((a, b) in (0u64..50_000, 0u64..50_000)) {
        let old = random_wfnet(&params(a, 6));
        let new = random_wfnet(&params(b, 6));
        let fast = find_equivalence_mapping(&old, &new, DEFAULT_MAX_STATES).unwrap();
        prop_assert_eq!(fast, oracle_mapping(&old, &new));
    }

    #[test]
    fn identity_migration_maps_every_marking_to_itself((seed, places) in net_seed()) {
        let net = random_wfnet(&params(seed, places));
        let t = find_equivalence_mapping(&net, &net, DEFAULT_MAX_STATES).unwrap();
        prop_assert!(is_reflexive(&t));
        prop_assert!(histeq::change_region(&t).is_empty());
    }

    #[test]
    fn purged_families_drop_only_empty_labels((seed, places) in net_seed()) {
        let net = random_wfnet(&params(seed, places));
        let g = build_reachability(&net, DEFAULT_MAX_STATES).unwrap();
        prop_assume!(g.node_count() <= 16);
        let raw = tts_all(&g);
        let purged = purged_families(&net, &g);
        for (n, fam) in &raw {
            prop_assert_eq!(&purge(fam, &net.empty_labels()), &purged[n]);
        }
    }
}

fn net_initial_names(net: &histeq::WfNet) -> Vec<String> {
    net.marking_names(&net.initial_marking().unwrap())
}

#[test]
fn disjoint_labels_only_match_initial_markings() {
    // Same shapes, renamed transitions: only the empty history is shared.
    let old = random_wfnet(&histeq::oracle::GenParams {
        seed: 11,
        max_places: 6,
        max_transitions: 8,
        loop_probability: 0.0,
        parallel_probability: 0.5,
        empty_probability: 0.0,
    });
    let mut doc = histeq::io::NetDocument::from_net(&old);
    let rename = |s: &mut String| {
        if s.starts_with('t') {
            s.replace_range(0..1, "u");
        }
    };
    for t in &mut doc.transitions {
        rename(&mut t.id);
        t.label.as_mut().map(rename);
    }
    for (a, b) in &mut doc.arcs {
        rename(a);
        rename(b);
    }
    let new = doc.into_net().unwrap();
    let t = find_equivalence_mapping(&old, &new, DEFAULT_MAX_STATES).unwrap();
    let init = MarkingKey::new(net_initial_names(&old));
    for row in t.rows() {
        if row.old == init {
            assert_eq!(
                row.equivalents,
                vec![MarkingKey::new(net_initial_names(&new))]
            );
        } else {
            assert!(row.equivalents.is_empty(), "{}", row.old);
        }
    }
}
