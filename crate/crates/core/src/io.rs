//! Net documents and mapping-table emitters.
//!
//! A net is a JSON object:
//!
//! ```json
//! {
//!   "name": "seq",
//!   "places": ["p1", "p2"],
//!   "transitions": [{"id": "t1"}, {"id": "e1", "label": "tau", "empty": true}],
//!   "arcs": [["p1", "t1"], ["t1", "p2"]],
//!   "initial_marking": ["p1"]
//! }
//! ```
//!
//! `label` defaults to `id`, `empty` to `false`, and `initial_marking` to the
//! unique source place. Arcs are plain pairs; weights are not accepted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivalence::MappingTable;
use crate::net::{NetError, TransitionSpec, WfNet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetDocument {
    pub name: String,
    pub places: Vec<String>,
    pub transitions: Vec<TransitionDoc>,
    pub arcs: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_marking: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub empty: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Net(#[from] NetError),
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "PARSE_ERROR",
            ParseError::Net(e) => e.code(),
        }
    }
}

impl NetDocument {
    pub fn into_net(self) -> Result<WfNet, NetError> {
        let transitions = self.transitions.into_iter().map(|t| TransitionSpec {
            id: t.id,
            label: t.label,
            is_empty: t.empty,
        });
        WfNet::new(
            self.name,
            self.places,
            transitions,
            self.arcs,
            self.initial_marking,
        )
    }

    pub fn from_net(net: &WfNet) -> NetDocument {
        use crate::net::Arc;
        let transitions = net
            .transitions()
            .iter()
            .map(|t| TransitionDoc {
                id: t.id.clone(),
                label: (t.label != t.id).then(|| t.label.clone()),
                empty: t.is_empty,
            })
            .collect();
        let arcs = net
            .arcs()
            .iter()
            .map(|a| match *a {
                Arc::Input(p, t) => (net.place_name(p).to_string(), net.transition(t).id.clone()),
                Arc::Output(t, p) => (net.transition(t).id.clone(), net.place_name(p).to_string()),
            })
            .collect();
        NetDocument {
            name: net.name().to_string(),
            places: net.places().to_vec(),
            transitions,
            arcs,
            initial_marking: net
                .explicit_initial_marking()
                .map(|m| m.places().map(|p| net.place_name(p).to_string()).collect()),
        }
    }
}

/// Parses a net document. Structural validation is a separate step.
pub fn parse_net(text: &str) -> Result<WfNet, ParseError> {
    let doc: NetDocument = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(doc.into_net()?)
}

/// Pretty-printed JSON document for `net`, newline-terminated.
pub fn serialize_net(net: &WfNet) -> String {
    let mut s = serde_json::to_string_pretty(&NetDocument::from_net(net))
        .expect("net documents always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRow {
    pub old_marking: Vec<String>,
    pub equivalents: Vec<Vec<String>>,
    pub change_region: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingDocument {
    pub old_net: String,
    pub new_net: String,
    pub rows: Vec<MappingRow>,
}

impl MappingDocument {
    pub fn new(old_net: &str, new_net: &str, table: &MappingTable) -> Self {
        let rows = table
            .rows()
            .iter()
            .map(|r| MappingRow {
                old_marking: r.old.places().to_vec(),
                equivalents: r.equivalents.iter().map(|k| k.places().to_vec()).collect(),
                change_region: r.equivalents.is_empty(),
            })
            .collect();
        MappingDocument {
            old_net: old_net.to_string(),
            new_net: new_net.to_string(),
            rows,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("mapping documents always serialize");
        s.push('\n');
        s
    }

    /// Columns `old_marking,equivalents,change_region`; equivalents are
    /// `;`-separated marking strings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["old_marking", "equivalents", "change_region"])
            .expect("in-memory csv write");
        for r in &self.rows {
            let eq = r
                .equivalents
                .iter()
                .map(|m| braced(m))
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([braced(&r.old_marking), eq, r.change_region.to_string()])
                .expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush"))
            .expect("csv output is utf-8")
    }

    /// Two-column human-readable table.
    pub fn to_table(&self) -> String {
        let left: Vec<String> = self.rows.iter().map(|r| braced(&r.old_marking)).collect();
        let right: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                if r.change_region {
                    "- (change region)".to_string()
                } else {
                    r.equivalents
                        .iter()
                        .map(|m| braced(m))
                        .collect::<Vec<_>>()
                        .join(", ")
                }
            })
            .collect();
        let head_l = format!("OLD MARKING ({})", self.old_net);
        let head_r = format!("NEW EQUIVALENT MARKINGS ({})", self.new_net);
        let width = left
            .iter()
            .map(String::len)
            .chain([head_l.len()])
            .max()
            .unwrap_or(0);
        let mut out = format!("{head_l:width$}  {head_r}\n");
        for (l, r) in left.iter().zip(&right) {
            out.push_str(&format!("{l:width$}  {r}\n"));
        }
        out
    }
}

pub(crate) fn braced(places: &[String]) -> String {
    format!("{{{}}}", places.join(","))
}
