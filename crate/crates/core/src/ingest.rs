//! Positive combinations of event probabilities and their exclusivity multigraphs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::graph::ExclusivityMultigraph;

/// One party's contribution to an event: which observable was measured and
/// what it returned. Both are opaque tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Part {
    pub setting: String,
    pub outcome: String,
}

impl Part {
    pub fn new(setting: impl Into<String>, outcome: impl Into<String>) -> Self {
        Self {
            setting: setting.into(),
            outcome: outcome.into(),
        }
    }

    /// Same observable, different result.
    pub fn excludes(&self, other: &Part) -> bool {
        self.setting == other.setting && self.outcome != other.outcome
    }
}

/// `weight * P(event)`. `parts[k]` belongs to the k-th party of the
/// enclosing expression; `None` means that party does not measure.
#[derive(Debug, Clone, PartialEq)]
pub struct BellTerm {
    pub weight: f64,
    pub parts: Vec<Option<Part>>,
}

impl BellTerm {
    /// Event label such as `01|10` or `_1|_0`: outcomes, a bar, settings.
    /// Tokens are comma-separated when any of them is longer than one character.
    pub fn label(&self) -> String {
        let outcomes: Vec<&str> = self
            .parts
            .iter()
            .map(|p| p.as_ref().map_or("_", |p| p.outcome.as_str()))
            .collect();
        let settings: Vec<&str> = self
            .parts
            .iter()
            .map(|p| p.as_ref().map_or("_", |p| p.setting.as_str()))
            .collect();
        let sep = if outcomes.iter().chain(&settings).all(|t| t.chars().count() == 1) {
            ""
        } else {
            ","
        };
        format!("{}|{}", outcomes.join(sep), settings.join(sep))
    }
}

/// Parse an event label (see [`BellTerm::label`]) for `party_count` parties.
pub fn parse_event(label: &str, party_count: usize) -> Option<Vec<Option<Part>>> {
    let (out, set) = label.split_once('|')?;
    let split = |s: &str| -> Vec<String> {
        if s.contains(',') {
            s.split(',').map(|t| t.trim().to_string()).collect()
        } else {
            s.chars().map(String::from).collect()
        }
    };
    let (out, set) = (split(out), split(set));
    if out.len() != party_count || set.len() != party_count {
        return None;
    }
    out.into_iter()
        .zip(set)
        .map(|(o, s)| match (o == "_", s == "_") {
            (true, true) => Some(None),
            (false, false) => Some(Some(Part::new(s, o))),
            _ => None,
        })
        .collect()
}

/// `S = sum_i w_i P(e_i)` with every `w_i > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellExpression {
    parties: Vec<String>,
    terms: Vec<BellTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionDocument {
    pub parties: Vec<String>,
    pub terms: Vec<TermEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub weight: f64,
    pub parts: BTreeMap<String, Option<Part>>,
}

impl BellExpression {
    pub fn new(parties: Vec<String>, terms: Vec<BellTerm>) -> Result<Self, IngestError> {
        if terms.is_empty() {
            return Err(IngestError::NoTerms);
        }
        let mut names = std::collections::BTreeSet::new();
        for p in &parties {
            if !names.insert(p.as_str()) {
                return Err(crate::GraphError::DuplicateParty(p.clone()).into());
            }
        }
        if parties.is_empty() {
            return Err(crate::GraphError::NoParties.into());
        }
        let mut seen: BTreeMap<&[Option<Part>], usize> = BTreeMap::new();
        for (t, term) in terms.iter().enumerate() {
            if !(term.weight > 0.0 && term.weight.is_finite()) {
                return Err(IngestError::NotPositiveForm {
                    term: t,
                    weight: term.weight,
                });
            }
            if term.parts.len() != parties.len() {
                return Err(IngestError::PartCount {
                    term: t,
                    expected: parties.len(),
                    found: term.parts.len(),
                });
            }
            if term.parts.iter().all(Option::is_none) {
                return Err(IngestError::EmptyEvent(t));
            }
            if let Some(&first) = seen.get(term.parts.as_slice()) {
                return Err(IngestError::DuplicateEvent { first, second: t });
            }
            seen.insert(&term.parts, t);
        }
        Ok(Self { parties, terms })
    }

    /// Build from `(weight, label)` pairs in the compact label notation.
    pub fn from_events(parties: &[&str], events: &[(f64, &str)]) -> Result<Self, IngestError> {
        let terms = events
            .iter()
            .enumerate()
            .map(|(t, &(weight, label))| {
                let parts = parse_event(label, parties.len()).ok_or_else(|| {
                    IngestError::MalformedEvent {
                        term: t,
                        label: label.to_string(),
                    }
                })?;
                Ok(BellTerm { weight, parts })
            })
            .collect::<Result<Vec<_>, IngestError>>()?;
        Self::new(parties.iter().map(|p| p.to_string()).collect(), terms)
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn terms(&self) -> &[BellTerm] {
        &self.terms
    }

    pub fn from_document(doc: &ExpressionDocument) -> Result<Self, IngestError> {
        let terms = doc
            .terms
            .iter()
            .enumerate()
            .map(|(t, entry)| {
                if let Some(name) = entry.parts.keys().find(|k| !doc.parties.contains(k)) {
                    return Err(IngestError::UnknownParty {
                        term: t,
                        party: name.clone(),
                    });
                }
                let parts = doc
                    .parties
                    .iter()
                    .map(|p| entry.parts.get(p).cloned().flatten())
                    .collect();
                Ok(BellTerm {
                    weight: entry.weight,
                    parts,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(doc.parties.clone(), terms)
    }

    pub fn to_document(&self) -> ExpressionDocument {
        ExpressionDocument {
            parties: self.parties.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermEntry {
                    weight: t.weight,
                    parts: self
                        .parties
                        .iter()
                        .cloned()
                        .zip(t.parts.iter().cloned())
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }
}

/// Parse an expression document.
pub fn parse_expression(text: &str) -> Result<BellExpression, crate::Error> {
    let doc: ExpressionDocument = serde_json::from_str(text)?;
    Ok(BellExpression::from_document(&doc)?)
}

/// Vertex/event correspondence produced alongside the multigraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTable {
    pub rows: Vec<EventRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub vertex: usize,
    pub event: String,
    pub weight: f64,
}

impl EventTable {
    /// Plain-text table with 1-based vertex numbers.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.event.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:>6}  {:<width$}  weight\n", "vertex", "event");
        for r in &self.rows {
            let _ = writeln!(out, "{:>6}  {:<width$}  {}", r.vertex + 1, r.event, r.weight);
        }
        out
    }
}

/// One vertex per term; in factor J, two vertices are adjacent iff both
/// terms have a J-part with the same setting and different outcomes.
pub fn build_multigraph(expr: &BellExpression) -> (ExclusivityMultigraph, EventTable) {
    let n = expr.terms.len();
    let factors = (0..expr.parties.len())
        .map(|k| {
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if let (Some(a), Some(b)) = (&expr.terms[i].parts[k], &expr.terms[j].parts[k]) {
                        if a.excludes(b) {
                            edges.push((i, j));
                        }
                    }
                }
            }
            edges
        })
        .collect();
    let weights = expr.terms.iter().map(|t| t.weight).collect();
    let labels: Vec<String> = expr.terms.iter().map(BellTerm::label).collect();
    let mg = ExclusivityMultigraph::new(weights, expr.parties.clone(), factors)
        .and_then(|mg| mg.with_labels(labels.clone()))
        .expect("validated expression yields a valid multigraph");
    let rows = labels
        .into_iter()
        .zip(&expr.terms)
        .enumerate()
        .map(|(vertex, (event, t))| EventRow {
            vertex,
            event,
            weight: t.weight,
        })
        .collect();
    (mg, EventTable { rows })
}
