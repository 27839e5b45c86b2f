//! Trace transition sets.
//!
//! A trace transition set (TTS) is the set of transition labels occurring in
//! some firing sequence that reaches a marking. Loops make the number of
//! traces infinite, but the number of TTSs per marking is finite. They are
//! computed in three stages:
//!
//! 1. [`find_simple_paths`] enumerates the elementary paths from the initial
//!    marking to the target (the seed paths);
//! 2. [`find_cycles`] enumerates every elementary cycle of the graph;
//! 3. [`expand_with_cycles`] repeatedly unions a cycle into an edge set
//!    whenever the cycle shares a node with it, until nothing new appears.
//!
//! Work is done on sets of graph edges and only projected onto labels at the
//! end, since two different edges may carry the same label.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::reach::{NodeId, ReachGraph};

/// Set of transition labels.
pub type Tts = BTreeSet<String>;

/// All trace transition sets of one marking.
pub type TtsFamily = BTreeSet<Tts>;

/// A directed walk, as indices into [`ReachGraph::edges`].
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgePath(pub Vec<usize>);

impl EdgePath {
    pub fn edges(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self, g: &ReachGraph) -> Vec<String> {
        self.0.iter().map(|&e| g.edge(e).label.clone()).collect()
    }
}

/// An elementary cycle, rotated to start at the node with the smallest key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle {
    edges: Vec<usize>,
}

impl Cycle {
    fn canonical(g: &ReachGraph, mut edges: Vec<usize>) -> Cycle {
        let start = (0..edges.len())
            .min_by(|&a, &b| g.key(g.edge(edges[a]).src).cmp(g.key(g.edge(edges[b]).src)))
            .unwrap_or(0);
        edges.rotate_left(start);
        Cycle { edges }
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Nodes visited, in cycle order starting from the canonical node.
    pub fn nodes(&self, g: &ReachGraph) -> Vec<NodeId> {
        self.edges.iter().map(|&e| g.edge(e).src).collect()
    }

    pub fn labels(&self, g: &ReachGraph) -> Tts {
        self.edges
            .iter()
            .map(|&e| g.edge(e).label.clone())
            .collect()
    }
}

/// Unordered set of edges: one seed path plus any attached cycles.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeSet(BTreeSet<usize>);

impl EdgeSet {
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.contains(&e)
    }

    pub fn labels(&self, g: &ReachGraph) -> Tts {
        self.0.iter().map(|&e| g.edge(e).label.clone()).collect()
    }
}

impl From<&EdgePath> for EdgeSet {
    fn from(p: &EdgePath) -> Self {
        EdgeSet(p.0.iter().copied().collect())
    }
}

impl FromIterator<usize> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        EdgeSet(iter.into_iter().collect())
    }
}

/// All elementary paths from `from` to `to`, in depth-first order over the
/// label-sorted outgoing edges. `from == to` yields only the empty path.
pub fn find_simple_paths(g: &ReachGraph, from: NodeId, to: NodeId) -> Vec<EdgePath> {
    if from == to {
        return vec![EdgePath::default()];
    }
    let mut on_path = vec![false; g.node_count()];
    on_path[from.0] = true;
    let mut paths = Vec::new();
    let mut current = Vec::new();
    simple_paths_from(g, from, to, &mut on_path, &mut current, &mut paths);
    paths
}

fn simple_paths_from(
    g: &ReachGraph,
    node: NodeId,
    to: NodeId,
    on_path: &mut [bool],
    current: &mut Vec<usize>,
    paths: &mut Vec<EdgePath>,
) {
    for &e in g.outgoing(node) {
        let next = g.edge(e).dst;
        if next == to {
            current.push(e);
            paths.push(EdgePath(current.clone()));
            current.pop();
        } else if !on_path[next.0] {
            on_path[next.0] = true;
            current.push(e);
            simple_paths_from(g, next, to, on_path, current, paths);
            current.pop();
            on_path[next.0] = false;
        }
    }
}

/// Every elementary cycle of `g` (Johnson's circuit enumeration, run over
/// edges so that parallel edges with different labels give distinct cycles).
/// Self-loops are cycles of length one. The result is sorted.
pub fn find_cycles(g: &ReachGraph) -> Vec<Cycle> {
    let n = g.node_count();
    let mut search = CircuitSearch {
        g,
        start: 0,
        allowed: vec![false; n],
        blocked: vec![false; n],
        blocked_by: vec![BTreeSet::new(); n],
        stack: Vec::new(),
        found: Vec::new(),
    };
    for s in 0..n {
        search.allowed = strongly_connected_with(g, s);
        if search.allowed.iter().filter(|&&a| a).count() == 1
            && !g.outgoing(NodeId(s)).iter().any(|&e| g.edge(e).dst.0 == s)
        {
            continue;
        }
        search.start = s;
        search.blocked.iter_mut().for_each(|b| *b = false);
        search.blocked_by.iter_mut().for_each(BTreeSet::clear);
        search.circuit(s);
    }
    let mut cycles: Vec<Cycle> = search
        .found
        .into_iter()
        .map(|edges| Cycle::canonical(g, edges))
        .collect();
    cycles.sort_by(|a, b| cycle_sort_key(g, a).cmp(&cycle_sort_key(g, b)));
    cycles.dedup();
    cycles
}

fn cycle_sort_key<'a>(
    g: &'a ReachGraph,
    c: &Cycle,
) -> Vec<(&'a crate::reach::MarkingKey, &'a str)> {
    c.edges
        .iter()
        .map(|&e| (g.key(g.edge(e).src), g.edge(e).label.as_str()))
        .collect()
}

// Nodes with index >= s lying in the same strongly connected component as s,
// within the subgraph induced by those nodes.
fn strongly_connected_with(g: &ReachGraph, s: usize) -> Vec<bool> {
    let n = g.node_count();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edges() {
        if e.src.0 >= s && e.dst.0 >= s {
            preds[e.dst.0].push(e.src.0);
        }
    }
    let mut fwd = vec![false; n];
    let mut stack = vec![s];
    fwd[s] = true;
    while let Some(v) = stack.pop() {
        for &e in g.outgoing(NodeId(v)) {
            let w = g.edge(e).dst.0;
            if w >= s && !fwd[w] {
                fwd[w] = true;
                stack.push(w);
            }
        }
    }
    let mut both = vec![false; n];
    stack.push(s);
    both[s] = true;
    while let Some(v) = stack.pop() {
        for &u in &preds[v] {
            if fwd[u] && !both[u] {
                both[u] = true;
                stack.push(u);
            }
        }
    }
    both
}

struct CircuitSearch<'g> {
    g: &'g ReachGraph,
    start: usize,
    allowed: Vec<bool>,
    blocked: Vec<bool>,
    blocked_by: Vec<BTreeSet<usize>>,
    stack: Vec<usize>,
    found: Vec<Vec<usize>>,
}

impl CircuitSearch<'_> {
    fn circuit(&mut self, v: usize) -> bool {
        let mut closed = false;
        self.blocked[v] = true;
        let g = self.g;
        for &e in g.outgoing(NodeId(v)) {
            let w = g.edge(e).dst.0;
            if !self.allowed[w] {
                continue;
            }
            if w == self.start {
                self.stack.push(e);
                self.found.push(self.stack.clone());
                self.stack.pop();
                closed = true;
            } else if !self.blocked[w] {
                self.stack.push(e);
                if self.circuit(w) {
                    closed = true;
                }
                self.stack.pop();
            }
        }
        if closed {
            self.unblock(v);
        } else {
            for &e in g.outgoing(NodeId(v)) {
                let w = g.edge(e).dst.0;
                if self.allowed[w] {
                    self.blocked_by[w].insert(v);
                }
            }
        }
        closed
    }

    fn unblock(&mut self, u: usize) {
        self.blocked[u] = false;
        let waiting = std::mem::take(&mut self.blocked_by[u]);
        for w in waiting {
            if self.blocked[w] {
                self.unblock(w);
            }
        }
    }
}

/// Indices of the cycles that share a node with `set` and are not already
/// contained in it. `origin` counts as covered even when `set` is empty.
pub fn attachable_cycles(
    g: &ReachGraph,
    origin: NodeId,
    set: &EdgeSet,
    cycles: &[Cycle],
) -> Vec<usize> {
    let mut covered = vec![false; g.node_count()];
    covered[origin.0] = true;
    for e in set.edges() {
        covered[g.edge(e).src.0] = true;
        covered[g.edge(e).dst.0] = true;
    }
    cycles
        .iter()
        .enumerate()
        .filter(|(_, c)| c.edges.iter().any(|&e| covered[g.edge(e).src.0]))
        .filter(|(_, c)| !c.edges.iter().all(|&e| set.contains(e)))
        .map(|(i, _)| i)
        .collect()
}

/// Least fixpoint of attaching cycles to edge sets.
///
/// Starting from `seeds`, any set `e` and cycle `c` sharing a node with `e`
/// contribute `e ∪ c`. Each distinct set is processed exactly once, so the
/// loop terminates within the power set of the edges.
pub fn expand_with_cycles(
    g: &ReachGraph,
    origin: NodeId,
    seeds: &[EdgeSet],
    cycles: &[Cycle],
) -> BTreeSet<EdgeSet> {
    let mut seen: BTreeSet<EdgeSet> = BTreeSet::new();
    let mut worklist = VecDeque::new();
    for s in seeds {
        if seen.insert(s.clone()) {
            worklist.push_back(s.clone());
        }
    }
    while let Some(set) = worklist.pop_front() {
        for ci in attachable_cycles(g, origin, &set, cycles) {
            let mut next = set.clone();
            next.0.extend(cycles[ci].edges.iter().copied());
            if !seen.contains(&next) {
                seen.insert(next.clone());
                worklist.push_back(next);
            }
        }
    }
    seen
}

/// Fixed-width bitset over node or label indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Bits {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn union(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }
}

/// TTS family of `n`, reusing a precomputed cycle list.
///
/// Runs the [`expand_with_cycles`] fixpoint on `(covered nodes, labels)`
/// pairs instead of edge sets. Attachment only looks at covered nodes and the
/// result only at labels, so edge sets agreeing on both are interchangeable.
pub fn tts_for_node_with(g: &ReachGraph, n: NodeId, cycles: &[Cycle]) -> TtsFamily {
    let labels = g.labels();
    let label_ids: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let project = |edges: &mut dyn Iterator<Item = usize>, start: Option<NodeId>| {
        let mut nodes = Bits::new(g.node_count());
        let mut labs = Bits::new(labels.len());
        if let Some(s) = start {
            nodes.set(s.0);
        }
        for e in edges {
            let edge = g.edge(e);
            nodes.set(edge.src.0);
            nodes.set(edge.dst.0);
            labs.set(label_ids[edge.label.as_str()]);
        }
        (nodes, labs)
    };
    let parts: Vec<(Bits, Bits)> = cycles
        .iter()
        .map(|c| project(&mut c.edges.iter().copied(), None))
        .collect();

    let mut seen = BTreeSet::new();
    let mut worklist = VecDeque::new();
    for path in find_simple_paths(g, g.initial(), n) {
        let state = project(&mut path.0.iter().copied(), Some(g.initial()));
        if seen.insert(state.clone()) {
            worklist.push_back(state);
        }
    }
    while let Some((nodes, labs)) = worklist.pop_front() {
        for (c_nodes, c_labs) in &parts {
            if !c_nodes.intersects(&nodes) || (c_nodes.is_subset(&nodes) && c_labs.is_subset(&labs))
            {
                continue;
            }
            let next = (nodes.union(c_nodes), labs.union(c_labs));
            if !seen.contains(&next) {
                seen.insert(next.clone());
                worklist.push_back(next);
            }
        }
    }
    seen.iter()
        .map(|(_, labs)| {
            labels
                .iter()
                .enumerate()
                .filter(|(i, _)| labs.get(*i))
                .map(|(_, l)| l.clone())
                .collect()
        })
        .collect()
}

/// Every distinct set of transition labels over the traces reaching `n`.
pub fn tts_for_node(g: &ReachGraph, n: NodeId) -> TtsFamily {
    tts_for_node_with(g, n, &find_cycles(g))
}

/// TTS families of all nodes; cycles are enumerated once.
pub fn tts_all(g: &ReachGraph) -> BTreeMap<NodeId, TtsFamily> {
    let cycles = find_cycles(g);
    g.nodes()
        .map(|n| (n, tts_for_node_with(g, n, &cycles)))
        .collect()
}

/// `{a,b,c}` rendering of a label set.
pub fn format_tts(t: &Tts) -> String {
    format!(
        "{{{}}}",
        t.iter().map(String::as_str).collect::<Vec<_>>().join(",")
    )
}
