//! History-equivalence mapping between an old and a new net.
//!
//! An old marking `M` and a new marking `M'` are history equivalent when some
//! trace to `M` and some trace to `M'` fire the same set of transitions, i.e.
//! their TTS families intersect. Helper transitions flagged empty are purged
//! from both families before the comparison. Old markings with no equivalent
//! form the change region.

use std::collections::{BTreeMap, BTreeSet};

use crate::net::WfNet;
use crate::reach::{build_reachability, MarkingKey, NodeId, ReachError, ReachGraph};
use crate::tts::{tts_all, TtsFamily};

/// Removes `empty_labels` from every member of `family`; duplicates collapse.
pub fn purge(family: &TtsFamily, empty_labels: &BTreeSet<String>) -> TtsFamily {
    family
        .iter()
        .map(|tts| tts.difference(empty_labels).cloned().collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRow {
    pub old: MarkingKey,
    /// Sorted; empty means the marking is in the change region.
    pub equivalents: Vec<MarkingKey>,
}

/// One row per reachable old marking, sorted by marking key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingTable {
    rows: Vec<MappingRow>,
}

impl MappingTable {
    /// Builds a table from unordered rows; rows and equivalents get sorted.
    pub fn from_rows(rows: impl IntoIterator<Item = MappingRow>) -> Self {
        let mut rows: Vec<MappingRow> = rows
            .into_iter()
            .map(|mut r| {
                r.equivalents.sort();
                r.equivalents.dedup();
                r
            })
            .collect();
        rows.sort_by(|a, b| a.old.cmp(&b.old));
        MappingTable { rows }
    }

    pub fn rows(&self) -> &[MappingRow] {
        &self.rows
    }

    pub fn get(&self, old: &MarkingKey) -> Option<&[MarkingKey]> {
        self.rows
            .binary_search_by(|r| r.old.cmp(old))
            .ok()
            .map(|i| self.rows[i].equivalents.as_slice())
    }
}

/// Old markings without any equivalent.
pub fn change_region(table: &MappingTable) -> BTreeSet<MarkingKey> {
    table
        .rows()
        .iter()
        .filter(|r| r.equivalents.is_empty())
        .map(|r| r.old.clone())
        .collect()
}

/// Purged TTS families of every node of a net's reachability graph.
pub fn purged_families(net: &WfNet, g: &ReachGraph) -> BTreeMap<NodeId, TtsFamily> {
    let empty = net.empty_labels();
    tts_all(g)
        .into_iter()
        .map(|(n, fam)| (n, purge(&fam, &empty)))
        .collect()
}

/// Matches nodes of two graphs whose (already purged) families intersect.
pub fn match_families(
    old_graph: &ReachGraph,
    old_families: &BTreeMap<NodeId, TtsFamily>,
    new_graph: &ReachGraph,
    new_families: &BTreeMap<NodeId, TtsFamily>,
) -> MappingTable {
    let rows = old_graph.nodes().map(|n| {
        let fam = &old_families[&n];
        let equivalents = new_graph
            .nodes()
            .filter(|m| !new_families[m].is_disjoint(fam))
            .map(|m| new_graph.key(m).clone())
            .collect();
        MappingRow {
            old: old_graph.key(n).clone(),
            equivalents,
        }
    });
    MappingTable::from_rows(rows)
}

/// Builds both reachability graphs, computes purged TTS families, and lists
/// for each old marking every history-equivalent new marking.
pub fn find_equivalence_mapping(
    old_net: &WfNet,
    new_net: &WfNet,
    max_states: usize,
) -> Result<MappingTable, ReachError> {
    let old_graph = build_reachability(old_net, max_states)?;
    let new_graph = build_reachability(new_net, max_states)?;
    let old_families = purged_families(old_net, &old_graph);
    let new_families = purged_families(new_net, &new_graph);
    Ok(match_families(
        &old_graph,
        &old_families,
        &new_graph,
        &new_families,
    ))
}
