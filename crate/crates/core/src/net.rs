//! Workflow nets, markings and the token game.
//!
//! Nets are 1-bounded: a [`Marking`] is just the set of places holding a
//! token. Transitions carry a display label (used in trace transition sets)
//! and an `is_empty` flag for helper transitions that are ignored when
//! transition sets are compared across nets.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Index of a place inside its net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub usize);

/// Index of a transition inside its net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    /// Identifier used by arcs in the input document.
    pub id: String,
    /// Name compared across nets and collected into trace transition sets.
    pub label: String,
    pub is_empty: bool,
    pub inputs: BTreeSet<PlaceId>,
    pub outputs: BTreeSet<PlaceId>,
}

/// Declaration of a transition, before arcs are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSpec {
    pub id: String,
    pub label: Option<String>,
    pub is_empty: bool,
}

impl TransitionSpec {
    pub fn new(id: impl Into<String>) -> Self {
        TransitionSpec {
            id: id.into(),
            label: None,
            is_empty: false,
        }
    }

    pub fn empty(id: impl Into<String>) -> Self {
        TransitionSpec {
            is_empty: true,
            ..TransitionSpec::new(id)
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// A directed arc, always between a place and a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arc {
    Input(PlaceId, TransitionId),
    Output(TransitionId, PlaceId),
}

/// Set of marked places of a 1-bounded net.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(BTreeSet<PlaceId>);

impl Marking {
    pub fn new(places: impl IntoIterator<Item = PlaceId>) -> Self {
        Marking(places.into_iter().collect())
    }

    pub fn contains(&self, p: PlaceId) -> bool {
        self.0.contains(&p)
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("duplicate transition label `{0}`")]
    DuplicateLabel(String),
    #[error("empty name in {0}")]
    EmptyName(&'static str),
    #[error("arc endpoint `{0}` is neither a place nor a transition")]
    UnknownEndpoint(String),
    #[error("arc `{0}` -> `{1}` does not connect a place and a transition")]
    NonBipartiteArc(String, String),
    #[error("arc `{0}` -> `{1}` is declared more than once")]
    DuplicateArc(String, String),
    #[error("initial marking names unknown place `{0}`")]
    UnknownPlace(String),
}

impl NetError {
    pub fn code(&self) -> &'static str {
        match self {
            NetError::DuplicateName(_) | NetError::DuplicateLabel(_) => "DUPLICATE_NAME",
            NetError::EmptyName(_) => "EMPTY_NAME",
            NetError::UnknownEndpoint(_) | NetError::UnknownPlace(_) => "UNKNOWN_ENDPOINT",
            NetError::NonBipartiteArc(..) => "NON_BIPARTITE_ARC",
            NetError::DuplicateArc(..) => "DUPLICATE_ARC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FireError {
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("firing `{transition}` would put a second token into `{place}`")]
    UnsafeFiring { transition: String, place: String },
}

impl FireError {
    pub fn code(&self) -> &'static str {
        match self {
            FireError::NotEnabled(_) => "NOT_ENABLED",
            FireError::UnsafeFiring { .. } => "UNSAFE_FIRING",
        }
    }
}

/// A workflow net `(P, T, F)` with an optional explicit initial marking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfNet {
    name: String,
    places: Vec<String>,
    transitions: Vec<Transition>,
    arcs: Vec<Arc>,
    explicit_initial: Option<Marking>,
    place_index: HashMap<String, PlaceId>,
    label_index: HashMap<String, TransitionId>,
}

impl WfNet {
    /// Builds a net from names. Arcs are `(from, to)` name pairs where one end
    /// is a place and the other a transition id.
    pub fn new(
        name: impl Into<String>,
        places: impl IntoIterator<Item = impl Into<String>>,
        transitions: impl IntoIterator<Item = TransitionSpec>,
        arcs: impl IntoIterator<Item = (impl Into<String>, impl Into<String>)>,
        initial_marking: Option<Vec<String>>,
    ) -> Result<WfNet, NetError> {
        let places: Vec<String> = places.into_iter().map(Into::into).collect();
        let mut place_index = HashMap::new();
        for (i, p) in places.iter().enumerate() {
            if p.is_empty() {
                return Err(NetError::EmptyName("places"));
            }
            if place_index.insert(p.clone(), PlaceId(i)).is_some() {
                return Err(NetError::DuplicateName(p.clone()));
            }
        }

        let mut transition_index = HashMap::new();
        let mut label_index = HashMap::new();
        let mut ts = Vec::new();
        for (i, spec) in transitions.into_iter().enumerate() {
            let label = spec.label.unwrap_or_else(|| spec.id.clone());
            if spec.id.is_empty() || label.is_empty() {
                return Err(NetError::EmptyName("transitions"));
            }
            if place_index.contains_key(&spec.id)
                || transition_index
                    .insert(spec.id.clone(), TransitionId(i))
                    .is_some()
            {
                return Err(NetError::DuplicateName(spec.id));
            }
            if label_index.insert(label.clone(), TransitionId(i)).is_some() {
                return Err(NetError::DuplicateLabel(label));
            }
            ts.push(Transition {
                id: spec.id,
                label,
                is_empty: spec.is_empty,
                inputs: BTreeSet::new(),
                outputs: BTreeSet::new(),
            });
        }

        let mut resolved = Vec::new();
        let mut seen = BTreeSet::new();
        for (from, to) in arcs.into_iter() {
            let (from, to): (String, String) = (from.into(), to.into());
            let arc = match (
                place_index.get(&from),
                transition_index.get(&from),
                place_index.get(&to),
                transition_index.get(&to),
            ) {
                (None, None, _, _) => return Err(NetError::UnknownEndpoint(from)),
                (_, _, None, None) => return Err(NetError::UnknownEndpoint(to)),
                (Some(&p), _, _, Some(&t)) => Arc::Input(p, t),
                (_, Some(&t), Some(&p), _) => Arc::Output(t, p),
                _ => return Err(NetError::NonBipartiteArc(from, to)),
            };
            if !seen.insert(arc) {
                return Err(NetError::DuplicateArc(from, to));
            }
            match arc {
                Arc::Input(p, t) => ts[t.0].inputs.insert(p),
                Arc::Output(t, p) => ts[t.0].outputs.insert(p),
            };
            resolved.push(arc);
        }

        let explicit_initial = match initial_marking {
            None => None,
            Some(names) => {
                let mut m = BTreeSet::new();
                for n in names {
                    match place_index.get(&n) {
                        Some(&p) => m.insert(p),
                        None => return Err(NetError::UnknownPlace(n)),
                    };
                }
                Some(Marking(m))
            }
        };

        Ok(WfNet {
            name: name.into(),
            places,
            transitions: ts,
            arcs: resolved,
            explicit_initial,
            place_index,
            label_index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0]
    }

    pub fn place(&self, name: &str) -> Option<PlaceId> {
        self.place_index.get(name).copied()
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t.0]
    }

    pub fn transition_by_label(&self, label: &str) -> Option<TransitionId> {
        self.label_index.get(label).copied()
    }

    /// Labels of the helper transitions ignored during cross-net comparison.
    pub fn empty_labels(&self) -> BTreeSet<String> {
        self.transitions
            .iter()
            .filter(|t| t.is_empty)
            .map(|t| t.label.clone())
            .collect()
    }

    pub fn explicit_initial_marking(&self) -> Option<&Marking> {
        self.explicit_initial.as_ref()
    }

    /// Places without incoming arcs.
    pub fn source_places(&self) -> Vec<PlaceId> {
        let mut has_in = vec![false; self.places.len()];
        for a in &self.arcs {
            if let Arc::Output(_, p) = a {
                has_in[p.0] = true;
            }
        }
        (0..self.places.len())
            .filter(|&i| !has_in[i])
            .map(PlaceId)
            .collect()
    }

    /// Places without outgoing arcs.
    pub fn sink_places(&self) -> Vec<PlaceId> {
        let mut has_out = vec![false; self.places.len()];
        for a in &self.arcs {
            if let Arc::Input(p, _) = a {
                has_out[p.0] = true;
            }
        }
        (0..self.places.len())
            .filter(|&i| !has_out[i])
            .map(PlaceId)
            .collect()
    }

    /// The unique source place, if there is exactly one.
    pub fn source(&self) -> Option<PlaceId> {
        match self.source_places().as_slice() {
            [p] => Some(*p),
            _ => None,
        }
    }

    /// The unique sink place, if there is exactly one.
    pub fn sink(&self) -> Option<PlaceId> {
        match self.sink_places().as_slice() {
            [p] => Some(*p),
            _ => None,
        }
    }

    /// `M_i`: the explicit initial marking, or one token in the unique source.
    pub fn initial_marking(&self) -> Option<Marking> {
        match &self.explicit_initial {
            Some(m) => Some(m.clone()),
            None => self.source().map(|p| Marking::new([p])),
        }
    }

    /// `M_e`: one token in the unique sink.
    pub fn terminal_marking(&self) -> Option<Marking> {
        self.sink().map(|p| Marking::new([p]))
    }

    /// Resolves place names into a marking.
    pub fn marking_of<S: AsRef<str>>(&self, names: &[S]) -> Option<Marking> {
        names
            .iter()
            .map(|n| self.place(n.as_ref()))
            .collect::<Option<BTreeSet<_>>>()
            .map(Marking)
    }

    /// Sorted place names of a marking.
    pub fn marking_names(&self, m: &Marking) -> Vec<String> {
        let mut names: Vec<String> = m.places().map(|p| self.places[p.0].clone()).collect();
        names.sort();
        names
    }

    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        self.transitions[t.0].inputs.iter().all(|p| m.contains(*p))
    }

    /// Transitions whose every input place is marked, ordered by label.
    pub fn enabled(&self, m: &Marking) -> Vec<TransitionId> {
        let mut out: Vec<TransitionId> = (0..self.transitions.len())
            .map(TransitionId)
            .filter(|&t| self.is_enabled(m, t))
            .collect();
        out.sort_by(|a, b| {
            self.transitions[a.0]
                .label
                .cmp(&self.transitions[b.0].label)
        });
        out
    }

    /// Labels of the enabled transitions.
    pub fn enabled_labels(&self, m: &Marking) -> BTreeSet<String> {
        self.enabled(m)
            .into_iter()
            .map(|t| self.transitions[t.0].label.clone())
            .collect()
    }

    /// Fires `t` in `m`: consumes its inputs and produces its outputs.
    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking, FireError> {
        let tr = &self.transitions[t.0];
        if !self.is_enabled(m, t) {
            return Err(FireError::NotEnabled(tr.label.clone()));
        }
        let mut next = m.0.clone();
        for p in &tr.inputs {
            next.remove(p);
        }
        for p in &tr.outputs {
            if !next.insert(*p) {
                return Err(FireError::UnsafeFiring {
                    transition: tr.label.clone(),
                    place: self.places[p.0].clone(),
                });
            }
        }
        Ok(Marking(next))
    }

    /// Fires the transition with the given label.
    pub fn fire_label(&self, m: &Marking, label: &str) -> Result<Marking, FireError> {
        let t = self
            .transition_by_label(label)
            .ok_or_else(|| FireError::NotEnabled(label.to_string()))?;
        self.fire(m, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    MultipleSources,
    NoSource,
    MultipleSinks,
    NoSink,
    NotOnPath,
    BadInitialMarking,
    DeadTransition,
    NoProperCompletion,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::MultipleSources => "MULTIPLE_SOURCES",
            ViolationCode::NoSource => "NO_SOURCE",
            ViolationCode::MultipleSinks => "MULTIPLE_SINKS",
            ViolationCode::NoSink => "NO_SINK",
            ViolationCode::NotOnPath => "NOT_ON_PATH",
            ViolationCode::BadInitialMarking => "BAD_INITIAL_MARKING",
            ViolationCode::DeadTransition => "DEAD_TRANSITION",
            ViolationCode::NoProperCompletion => "NO_PROPER_COMPLETION",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
    /// Offending element (place, transition or marking), if any.
    pub element: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }

    pub(crate) fn push(&mut self, code: ViolationCode, message: String, element: Option<String>) {
        self.violations.push(Violation {
            code,
            message,
            element,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{}: {}", v.code, v.message)?;
        }
        Ok(())
    }
}

/// Checks the structural WF-net conditions: one source, one sink, and every
/// other node on a directed path from the source to the sink.
pub fn validate_structural(net: &WfNet) -> ValidationReport {
    let mut report = ValidationReport::default();
    let names = |ps: &[PlaceId]| {
        ps.iter()
            .map(|p| net.place_name(*p))
            .collect::<Vec<_>>()
            .join(",")
    };

    let sources = net.source_places();
    let sinks = net.sink_places();
    match sources.len() {
        0 => report.push(
            ViolationCode::NoSource,
            "no place without incoming arcs".into(),
            None,
        ),
        1 => {}
        _ => report.push(
            ViolationCode::MultipleSources,
            format!("several places without incoming arcs: {}", names(&sources)),
            Some(names(&sources)),
        ),
    }
    match sinks.len() {
        0 => report.push(
            ViolationCode::NoSink,
            "no place without outgoing arcs".into(),
            None,
        ),
        1 => {}
        _ => report.push(
            ViolationCode::MultipleSinks,
            format!("several places without outgoing arcs: {}", names(&sinks)),
            Some(names(&sinks)),
        ),
    }

    if let (Some(source), Some(sink)) = (net.source(), net.sink()) {
        let (fwd_p, fwd_t) = flow_closure(net, source, true);
        let (bwd_p, bwd_t) = flow_closure(net, sink, false);
        for (i, name) in net.places().iter().enumerate() {
            if i != source.0 && i != sink.0 && !(fwd_p[i] && bwd_p[i]) {
                report.push(
                    ViolationCode::NotOnPath,
                    format!(
                        "place `{}` is not on a directed path from `{}` to `{}`",
                        name,
                        net.place_name(source),
                        net.place_name(sink)
                    ),
                    Some(name.clone()),
                );
            }
        }
        for (i, t) in net.transitions().iter().enumerate() {
            if !(fwd_t[i] && bwd_t[i]) {
                report.push(
                    ViolationCode::NotOnPath,
                    format!(
                        "transition `{}` is not on a directed path from `{}` to `{}`",
                        t.label,
                        net.place_name(source),
                        net.place_name(sink)
                    ),
                    Some(t.label.clone()),
                );
            }
        }
        if let Some(m) = net.explicit_initial_marking() {
            if *m != Marking::new([source]) {
                let names = net.marking_names(m).join(",");
                report.push(
                    ViolationCode::BadInitialMarking,
                    format!(
                        "initial marking {{{}}} differs from {{{}}}",
                        names,
                        net.place_name(source)
                    ),
                    Some(names),
                );
            }
        }
    }
    report
}

// Places and transitions reachable from `start` along arcs (or against them).
fn flow_closure(net: &WfNet, start: PlaceId, forward: bool) -> (Vec<bool>, Vec<bool>) {
    let mut place_seen = vec![false; net.places().len()];
    let mut trans_seen = vec![false; net.transitions().len()];
    let mut queue = VecDeque::from([start]);
    place_seen[start.0] = true;
    while let Some(p) = queue.pop_front() {
        for (i, t) in net.transitions().iter().enumerate() {
            let (near, far) = if forward {
                (&t.inputs, &t.outputs)
            } else {
                (&t.outputs, &t.inputs)
            };
            if !near.contains(&p) {
                continue;
            }
            trans_seen[i] = true;
            for q in far {
                if !place_seen[q.0] {
                    place_seen[q.0] = true;
                    queue.push_back(*q);
                }
            }
        }
    }
    (place_seen, trans_seen)
}
