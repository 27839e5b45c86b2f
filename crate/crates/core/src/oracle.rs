//! Brute-force ground truth for trace transition sets, and a generator of
//! random sound workflow nets for property tests.
//!
//! Nothing here calls into [`crate::tts`]: the oracle enumerates firing
//! sequences directly, so agreement with the path/cycle algorithm is a real
//! check rather than a tautology.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::net::{TransitionSpec, WfNet};
use crate::reach::{MarkingKey, NodeId, ReachGraph};
use crate::tts::{Tts, TtsFamily};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("bound {bound} is below the sufficiency bound {required}")]
    BoundTooSmall { bound: usize, required: usize },
}

impl OracleError {
    pub fn code(&self) -> &'static str {
        "BOUND_TOO_SMALL"
    }
}

/// Elementary cycles by plain depth-first search: each cycle is reported once,
/// rooted at its lowest-index node. Exponential; meant for small graphs.
pub fn brute_force_cycles(g: &ReachGraph) -> Vec<Vec<usize>> {
    fn walk(
        g: &ReachGraph,
        root: usize,
        v: usize,
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for (i, e) in g.edges().iter().enumerate() {
            if e.src.0 != v {
                continue;
            }
            let w = e.dst.0;
            if w == root {
                path.push(i);
                out.push(path.clone());
                path.pop();
            } else if w > root && !on_path[w] {
                on_path[w] = true;
                path.push(i);
                walk(g, root, w, on_path, path, out);
                path.pop();
                on_path[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    for root in 0..g.node_count() {
        let mut on_path = vec![false; g.node_count()];
        on_path[root] = true;
        walk(g, root, root, &mut on_path, &mut Vec::new(), &mut out);
    }
    out
}

/// `(|nodes| - 1) + Σ |c|` over all elementary cycles `c`: every TTS is
/// realised by a trace of at most this length (one seed path plus one lap of
/// each attached cycle).
pub fn sufficiency_bound(g: &ReachGraph) -> usize {
    g.node_count().saturating_sub(1) + brute_force_cycles(g).iter().map(Vec::len).sum::<usize>()
}

/// Label sets of all walks of length `<= bound` from the initial node, for
/// every node at once.
///
/// Breadth-first over `(node, labels so far)` states: the first visit to a
/// state is at its minimum depth, so later visits can be dropped.
fn enumerate_walks(g: &ReachGraph, bound: usize) -> Vec<TtsFamily> {
    let labels = g.labels();
    let label_id = |l: &str| labels.binary_search_by(|x| x.as_str().cmp(l)).unwrap();
    let edge_label: Vec<usize> = g.edges().iter().map(|e| label_id(&e.label)).collect();

    let mut seen: HashSet<(usize, BTreeSet<usize>)> = HashSet::new();
    let mut queue = VecDeque::new();
    let start = (g.initial().0, BTreeSet::new());
    seen.insert(start.clone());
    queue.push_back((start, 0usize));
    while let Some(((v, set), depth)) = queue.pop_front() {
        if depth == bound {
            continue;
        }
        for &e in g.outgoing(NodeId(v)) {
            let mut next = set.clone();
            next.insert(edge_label[e]);
            let state = (g.edge(e).dst.0, next);
            if seen.insert(state.clone()) {
                queue.push_back((state, depth + 1));
            }
        }
    }

    let mut families = vec![TtsFamily::new(); g.node_count()];
    for (v, set) in seen {
        families[v].insert(set.iter().map(|&i| labels[i].clone()).collect());
    }
    families
}

/// Distinct label sets over all walks from the initial node to `n` with at
/// most `bound` steps. Fails if `bound` is below [`sufficiency_bound`].
pub fn oracle_tts(g: &ReachGraph, n: NodeId, bound: usize) -> Result<TtsFamily, OracleError> {
    let required = sufficiency_bound(g);
    if bound < required {
        return Err(OracleError::BoundTooSmall { bound, required });
    }
    Ok(enumerate_walks(g, bound).swap_remove(n.0))
}

/// Oracle families for every node at the sufficiency bound.
pub fn oracle_tts_all(g: &ReachGraph) -> BTreeMap<NodeId, TtsFamily> {
    enumerate_walks(g, sufficiency_bound(g))
        .into_iter()
        .enumerate()
        .map(|(i, f)| (NodeId(i), f))
        .collect()
}

/// Reachable markings by Kleene iteration over place bitmasks, using its own
/// firing rule instead of [`WfNet::fire`]. Markings that would put a second
/// token into a place are dropped. Only for nets with at most 24 places.
pub fn brute_force_markings(net: &WfNet) -> BTreeSet<MarkingKey> {
    assert!(
        net.places().len() <= 24,
        "too many places for bitmask enumeration"
    );
    let mask = |ps: &BTreeSet<crate::net::PlaceId>| ps.iter().fold(0u32, |m, p| m | 1 << p.0);
    let rules: Vec<(u32, u32)> = net
        .transitions()
        .iter()
        .map(|t| (mask(&t.inputs), mask(&t.outputs)))
        .collect();
    let Some(initial) = net.initial_marking() else {
        return BTreeSet::new();
    };
    let start = initial.places().fold(0u32, |m, p| m | 1 << p.0);
    let mut reached = BTreeSet::from([start]);
    loop {
        let mut grown = reached.clone();
        for &m in &reached {
            for &(pre, post) in &rules {
                let rest = m & !pre;
                if m & pre == pre && rest & post == 0 {
                    grown.insert(rest | post);
                }
            }
        }
        if grown.len() == reached.len() {
            break;
        }
        reached = grown;
    }
    reached
        .into_iter()
        .map(|m| {
            MarkingKey::new(
                (0..net.places().len())
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| net.places()[i].clone()),
            )
        })
        .collect()
}

/// A shortest label sequence from the initial node to `n` whose label set is
/// exactly `tts`, if one exists within `bound` steps.
pub fn witness_trace(g: &ReachGraph, n: NodeId, tts: &Tts, bound: usize) -> Option<Vec<String>> {
    type State = (usize, BTreeSet<String>);
    let start: State = (g.initial().0, BTreeSet::new());
    let mut parent: HashMap<State, Option<(State, usize)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((state, depth)) = queue.pop_front() {
        if state.0 == n.0 && &state.1 == tts {
            let mut labels = Vec::new();
            let mut cur = state;
            while let Some(Some((prev, e))) = parent.get(&cur).cloned() {
                labels.push(g.edge(e).label.clone());
                cur = prev;
            }
            labels.reverse();
            return Some(labels);
        }
        if depth == bound {
            continue;
        }
        for &e in g.outgoing(NodeId(state.0)) {
            let label = &g.edge(e).label;
            if !tts.contains(label) {
                continue;
            }
            let mut set = state.1.clone();
            set.insert(label.clone());
            let next = (g.edge(e).dst.0, set);
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((state.clone(), e)));
                queue.push_back((next, depth + 1));
            }
        }
    }
    None
}

/// Parameters of [`random_wfnet`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    /// Upper bound on places, including source and sink (at least 2).
    pub max_places: usize,
    pub max_transitions: usize,
    pub loop_probability: f64,
    pub parallel_probability: f64,
    /// Chance that a routing transition (AND split/join, loop entry/exit) is
    /// flagged empty.
    pub empty_probability: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            max_places: 8,
            max_transitions: 12,
            loop_probability: 0.3,
            parallel_probability: 0.3,
            empty_probability: 0.0,
        }
    }
}

struct NetGen<'a> {
    params: &'a GenParams,
    rng: ChaCha8Rng,
    places: Vec<String>,
    transitions: Vec<TransitionSpec>,
    arcs: Vec<(String, String)>,
    reserved: usize,
}

impl NetGen<'_> {
    fn place(&mut self) -> String {
        let name = format!("p{}", self.places.len());
        self.places.push(name.clone());
        name
    }

    fn transition(&mut self, inputs: &[&str], outputs: &[&str], routing: bool) {
        let id = format!("t{}", self.transitions.len());
        let empty = routing && self.rng.gen_bool(self.params.empty_probability);
        self.transitions.push(TransitionSpec {
            id: id.clone(),
            label: None,
            is_empty: empty,
        });
        for p in inputs {
            self.arcs.push((p.to_string(), id.clone()));
        }
        for p in outputs {
            self.arcs.push((id.clone(), p.to_string()));
        }
    }

    fn places_left(&self) -> usize {
        self.params.max_places.saturating_sub(self.places.len())
    }

    fn transitions_left(&self) -> usize {
        self.params
            .max_transitions
            .saturating_sub(self.transitions.len() + self.reserved)
    }

    // Fills the gap between `entry` and `exit` with a sound block that uses
    // at least one transition.
    fn block(&mut self, entry: &str, exit: &str, depth: usize) {
        let (places, trans) = (self.places_left(), self.transitions_left());
        if depth < 5 {
            if places >= 2 && trans >= 4 && self.rng.gen_bool(self.params.loop_probability) {
                return self.loop_block(entry, exit, depth);
            }
            if places >= 4 && trans >= 4 && self.rng.gen_bool(self.params.parallel_probability) {
                return self.and_block(entry, exit, depth);
            }
            let roll: f64 = self.rng.gen();
            if places >= 1 && trans >= 2 && roll < 0.45 {
                let mid = self.place();
                self.reserved += 1;
                self.block(entry, &mid, depth + 1);
                self.reserved -= 1;
                return self.block(&mid, exit, depth + 1);
            }
            if trans >= 2 && roll < 0.7 {
                self.reserved += 1;
                self.block(entry, exit, depth + 1);
                self.reserved -= 1;
                return self.block(entry, exit, depth + 1);
            }
        }
        self.transition(&[entry], &[exit], false);
    }

    fn and_block(&mut self, entry: &str, exit: &str, depth: usize) {
        let (a1, a2, b1, b2) = (self.place(), self.place(), self.place(), self.place());
        self.transition(&[entry], &[&a1, &a2], true);
        self.reserved += 2;
        self.block(&a1, &b1, depth + 1);
        self.reserved -= 1;
        self.block(&a2, &b2, depth + 1);
        self.reserved -= 1;
        self.transition(&[&b1, &b2], &[exit], true);
    }

    fn loop_block(&mut self, entry: &str, exit: &str, depth: usize) {
        let (head, tail) = (self.place(), self.place());
        self.transition(&[entry], &[&head], true);
        self.reserved += 2;
        self.block(&head, &tail, depth + 1);
        self.reserved -= 2;
        self.transition(&[&tail], &[&head], false);
        self.transition(&[&tail], &[exit], true);
    }
}

/// Random block-structured WF-net (sequence, choice, parallel and loop
/// blocks), deterministic in `params.seed`. Always sound and 1-bounded.
pub fn random_wfnet(params: &GenParams) -> WfNet {
    let params = GenParams {
        max_places: params.max_places.max(2),
        max_transitions: params.max_transitions.max(1),
        ..params.clone()
    };
    let mut gen = NetGen {
        params: &params,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        places: Vec::new(),
        transitions: Vec::new(),
        arcs: Vec::new(),
        reserved: 0,
    };
    let source = gen.place();
    let sink = gen.place();
    gen.block(&source, &sink, 0);
    WfNet::new(
        format!("random-{}", params.seed),
        gen.places,
        gen.transitions,
        gen.arcs,
        None,
    )
    .expect("generated nets are well formed")
}
