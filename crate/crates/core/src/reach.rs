//! Reachability graphs of 1-bounded workflow nets.

use std::collections::{HashMap, VecDeque};
use std::fmt::{self, Write};

use thiserror::Error;

use crate::net::{FireError, Marking, ValidationReport, ViolationCode, WfNet};

pub const DEFAULT_MAX_STATES: usize = 100_000;

/// Canonical name of a marking: its marked place names, sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarkingKey(Vec<String>);

impl MarkingKey {
    pub fn new<S: Into<String>>(places: impl IntoIterator<Item = S>) -> Self {
        let mut v: Vec<String> = places.into_iter().map(Into::into).collect();
        v.sort();
        v.dedup();
        MarkingKey(v)
    }

    /// Parses `p_a, p_b` style input; whitespace and order are ignored.
    pub fn parse(text: &str) -> Self {
        let text = text.trim();
        let text = text
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .unwrap_or(text);
        MarkingKey::new(
            text.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string),
        )
    }

    pub fn places(&self) -> &[String] {
        &self.0
    }

    /// Comma-joined place names without braces.
    pub fn joined(&self) -> String {
        self.0.join(",")
    }
}

impl fmt::Display for MarkingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(","))
    }
}

/// Node index in a [`ReachGraph`], in discovery order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RgEdge {
    pub src: NodeId,
    pub label: String,
    pub dst: NodeId,
}

/// Directed graph of reachable markings with transition-labelled edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachGraph {
    keys: Vec<MarkingKey>,
    index: HashMap<MarkingKey, NodeId>,
    edges: Vec<RgEdge>,
    // outgoing edge indices per node, sorted by (label, destination key)
    out: Vec<Vec<usize>>,
    initial: NodeId,
    terminal: Option<NodeId>,
}

impl ReachGraph {
    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.keys.len()).map(NodeId)
    }

    pub fn key(&self, n: NodeId) -> &MarkingKey {
        &self.keys[n.0]
    }

    pub fn node(&self, key: &MarkingKey) -> Option<NodeId> {
        self.index.get(key).copied()
    }

    pub fn edges(&self) -> &[RgEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &RgEdge {
        &self.edges[e]
    }

    /// Indices of the edges leaving `n`, in label order.
    pub fn outgoing(&self, n: NodeId) -> &[usize] {
        &self.out[n.0]
    }

    pub fn initial(&self) -> NodeId {
        self.initial
    }

    pub fn terminal(&self) -> Option<NodeId> {
        self.terminal
    }

    /// Distinct edge labels, sorted.
    pub fn labels(&self) -> Vec<String> {
        let mut v: Vec<String> = self.edges.iter().map(|e| e.label.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Assembles a [`ReachGraph`] from explicit edges. Used for hand-built graphs
/// and by [`build_reachability`].
#[derive(Debug, Clone)]
pub struct ReachGraphBuilder {
    graph: ReachGraph,
}

impl ReachGraphBuilder {
    pub fn new(initial: MarkingKey) -> Self {
        let mut graph = ReachGraph {
            keys: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            out: Vec::new(),
            initial: NodeId(0),
            terminal: None,
        };
        graph.initial = Self::intern(&mut graph, initial);
        ReachGraphBuilder { graph }
    }

    fn intern(graph: &mut ReachGraph, key: MarkingKey) -> NodeId {
        if let Some(&n) = graph.index.get(&key) {
            return n;
        }
        let n = NodeId(graph.keys.len());
        graph.index.insert(key.clone(), n);
        graph.keys.push(key);
        graph.out.push(Vec::new());
        n
    }

    pub fn node(&mut self, key: MarkingKey) -> NodeId {
        Self::intern(&mut self.graph, key)
    }

    pub fn contains(&self, key: &MarkingKey) -> bool {
        self.graph.index.contains_key(key)
    }

    pub fn node_count(&self) -> usize {
        self.graph.keys.len()
    }

    /// Adds an edge; a repeated `(src, label, dst)` triple is ignored.
    pub fn edge(
        &mut self,
        src: MarkingKey,
        label: impl Into<String>,
        dst: MarkingKey,
    ) -> &mut Self {
        let src = Self::intern(&mut self.graph, src);
        let dst = Self::intern(&mut self.graph, dst);
        let e = RgEdge {
            src,
            label: label.into(),
            dst,
        };
        if !self.graph.out[src.0]
            .iter()
            .any(|&i| self.graph.edges[i] == e)
        {
            self.graph.out[src.0].push(self.graph.edges.len());
            self.graph.edges.push(e);
        }
        self
    }

    pub fn terminal(&mut self, key: MarkingKey) -> &mut Self {
        let n = Self::intern(&mut self.graph, key);
        self.graph.terminal = Some(n);
        self
    }

    pub fn build(mut self) -> ReachGraph {
        let ReachGraph {
            keys, edges, out, ..
        } = &mut self.graph;
        for list in out.iter_mut() {
            list.sort_by(|&a, &b| {
                (&edges[a].label, &keys[edges[a].dst.0])
                    .cmp(&(&edges[b].label, &keys[edges[b].dst.0]))
            });
        }
        self.graph
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("reachability graph exceeds {limit} states")]
    StateLimitExceeded { limit: usize },
    #[error("net is not 1-bounded: {0}")]
    UnsafeNet(FireError),
    #[error("net has no initial marking (no unique source place)")]
    NoInitialMarking,
}

impl ReachError {
    pub fn code(&self) -> &'static str {
        match self {
            ReachError::StateLimitExceeded { .. } => "STATE_LIMIT_EXCEEDED",
            ReachError::UnsafeNet(_) => "UNSAFE_NET",
            ReachError::NoInitialMarking => "NO_INITIAL_MARKING",
        }
    }
}

/// Breadth-first exploration of the token game from the initial marking.
///
/// Markings are numbered in discovery order and successors are expanded in
/// transition-label order, so equal nets always give identical graphs.
pub fn build_reachability(net: &WfNet, max_states: usize) -> Result<ReachGraph, ReachError> {
    let initial = net.initial_marking().ok_or(ReachError::NoInitialMarking)?;
    let key_of = |m: &Marking| MarkingKey(net.marking_names(m));
    let mut builder = ReachGraphBuilder::new(key_of(&initial));
    if max_states == 0 {
        return Err(ReachError::StateLimitExceeded { limit: max_states });
    }
    let terminal = net.terminal_marking();
    let mut queue = VecDeque::from([initial]);
    while let Some(m) = queue.pop_front() {
        let src = key_of(&m);
        for t in net.enabled(&m) {
            let next = net.fire(&m, t).map_err(ReachError::UnsafeNet)?;
            let dst = key_of(&next);
            if !builder.contains(&dst) {
                if builder.node_count() >= max_states {
                    return Err(ReachError::StateLimitExceeded { limit: max_states });
                }
                queue.push_back(next.clone());
            }
            if terminal.as_ref() == Some(&next) {
                builder.terminal(dst.clone());
            }
            builder.edge(src.clone(), net.transition(t).label.clone(), dst);
        }
    }
    Ok(builder.build())
}

/// Flags transitions that never fire and markings that cannot complete.
pub fn validate_behavioral(net: &WfNet, g: &ReachGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let fired: std::collections::HashSet<&str> =
        g.edges().iter().map(|e| e.label.as_str()).collect();
    for t in net.transitions() {
        if !fired.contains(t.label.as_str()) {
            report.push(
                ViolationCode::DeadTransition,
                format!("transition `{}` can never fire", t.label),
                Some(t.label.clone()),
            );
        }
    }

    // backward search from the terminal node
    let mut completes = vec![false; g.node_count()];
    if let Some(term) = g.terminal() {
        let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); g.node_count()];
        for e in g.edges() {
            preds[e.dst.0].push(e.src);
        }
        let mut stack = vec![term];
        completes[term.0] = true;
        while let Some(n) = stack.pop() {
            for &p in &preds[n.0] {
                if !completes[p.0] {
                    completes[p.0] = true;
                    stack.push(p);
                }
            }
        }
    }
    for n in g.nodes() {
        if !completes[n.0] {
            report.push(
                ViolationCode::NoProperCompletion,
                format!("marking {} cannot reach the final marking", g.key(n)),
                Some(g.key(n).to_string()),
            );
        }
    }
    report
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the graph as a DOT digraph with nodes and edges in sorted order.
pub fn to_dot(g: &ReachGraph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph reachability {{").unwrap();
    let mut nodes: Vec<NodeId> = g.nodes().collect();
    nodes.sort_by(|a, b| g.key(*a).cmp(g.key(*b)));
    for n in nodes {
        let mut attrs = Vec::new();
        if n == g.initial() {
            attrs.push("style=bold");
        }
        if Some(n) == g.terminal() {
            attrs.push("shape=doublecircle");
        }
        if attrs.is_empty() {
            writeln!(out, "    \"{}\";", dot_escape(&g.key(n).to_string())).unwrap();
        } else {
            writeln!(
                out,
                "    \"{}\" [{}];",
                dot_escape(&g.key(n).to_string()),
                attrs.join(", ")
            )
            .unwrap();
        }
    }
    let mut edges: Vec<&RgEdge> = g.edges().iter().collect();
    edges.sort_by(|a, b| {
        (g.key(a.src), &a.label, g.key(a.dst)).cmp(&(g.key(b.src), &b.label, g.key(b.dst)))
    });
    for e in edges {
        writeln!(
            out,
            "    \"{}\" -> \"{}\" [label=\"{}\"];",
            dot_escape(&g.key(e.src).to_string()),
            dot_escape(&g.key(e.dst).to_string()),
            dot_escape(&e.label)
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
