//! Vertex-weighted simple graphs and edge-coloured exclusivity multigraphs.
//!
//! A [`VertexWeightedGraph`] is the usual exclusivity graph of a positive
//! combination of event probabilities. An [`ExclusivityMultigraph`] keeps one
//! simple graph ("factor") per party over a shared vertex set, so that the
//! reason two events are exclusive is not lost.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// A simple graph with strictly positive vertex weights.
///
/// Edges are stored as ordered pairs `(i, j)` with `i < j`, sorted
/// lexicographically. An adjacency matrix is kept alongside for O(1) queries.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexWeightedGraph {
    weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<bool>,
    labels: Option<Vec<String>>,
}

impl VertexWeightedGraph {
    /// Validates a raw description. Edge order in the input is irrelevant;
    /// `(i, j)` and `(j, i)` denote the same edge and count as a duplicate.
    pub fn new(weights: Vec<f64>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        validate_weights(&weights)?;
        let n = weights.len();
        let mut adjacency = vec![false; n * n];
        let mut sorted = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            check_edge(n, a, b)?;
            let (i, j) = (a.min(b), a.max(b));
            if adjacency[i * n + j] {
                return Err(GraphError::DuplicateEdge(i, j));
            }
            adjacency[i * n + j] = true;
            adjacency[j * n + i] = true;
            sorted.push((i, j));
        }
        sorted.sort_unstable();
        Ok(Self {
            weights,
            edges: sorted,
            adjacency,
            labels: None,
        })
    }

    pub fn unit(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(vec![1.0; n], edges)
    }

    /// The cycle `C_n` with unit weights, edges `{i, i+1 mod n}`.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::unit(n, &edges).expect("cycle needs at least 3 vertices")
    }

    pub fn complete(weights: Vec<f64>) -> Result<Self, GraphError> {
        let n = weights.len();
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        Self::new(weights, &edges)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, GraphError> {
        if labels.len() != self.vertex_count() {
            return Err(GraphError::LabelCount {
                expected: self.vertex_count(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.vertex_count() + j]
    }

    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(move |&u| self.adjacent(v, u))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbours(v).count()
    }

    /// Same vertices and weights; `ij` is an edge iff it is not one here.
    pub fn complement(&self) -> Self {
        let n = self.vertex_count();
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.adjacent(i, j))
            .collect();
        let mut g = Self::new(self.weights.clone(), &edges).expect("complement of a valid graph");
        g.labels = self.labels.clone();
        g
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut block = vec![start];
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for u in self.neighbours(v) {
                    if !seen[u] {
                        seen[u] = true;
                        block.push(u);
                        stack.push(u);
                    }
                }
            }
            block.sort_unstable();
            out.push(block);
        }
        out
    }

    /// All inclusion-maximal cliques, Bron–Kerbosch with Tomita pivoting.
    ///
    /// Each clique is sorted ascending and the list is sorted
    /// lexicographically. Isolated vertices yield singleton cliques.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        let candidates: Vec<usize> = (0..self.vertex_count()).collect();
        let mut out = Vec::new();
        self.bron_kerbosch(&mut Vec::new(), candidates, Vec::new(), &mut out);
        for clique in &mut out {
            clique.sort_unstable();
        }
        out.sort();
        out
    }

    fn bron_kerbosch(
        &self,
        current: &mut Vec<usize>,
        mut candidates: Vec<usize>,
        mut excluded: Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if candidates.is_empty() {
            if excluded.is_empty() {
                out.push(current.clone());
            }
            return;
        }
        // pivot maximizing |N(u) ∩ candidates|
        let pivot = candidates
            .iter()
            .chain(excluded.iter())
            .copied()
            .max_by_key(|&u| candidates.iter().filter(|&&v| self.adjacent(u, v)).count())
            .expect("non-empty");
        let branch: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&v| !self.adjacent(pivot, v))
            .collect();
        for v in branch {
            let next_candidates = candidates
                .iter()
                .copied()
                .filter(|&u| self.adjacent(v, u))
                .collect();
            let next_excluded = excluded
                .iter()
                .copied()
                .filter(|&u| self.adjacent(v, u))
                .collect();
            current.push(v);
            self.bron_kerbosch(current, next_candidates, next_excluded, out);
            current.pop();
            candidates.retain(|&u| u != v);
            excluded.push(v);
        }
    }

    pub fn clique_number(&self) -> usize {
        self.maximal_cliques().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The subgraph induced by `vertices` (relabelled `0..len` in the given order).
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let weights = vertices.iter().map(|&v| self.weights[v]).collect();
        let mut edges = Vec::new();
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate().skip(a + 1) {
                if self.adjacent(u, v) {
                    edges.push((a, b));
                }
            }
        }
        Self::new(weights, &edges).expect("induced subgraph of a valid graph")
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(a, &u)| set[a + 1..].iter().all(|&v| u != v && !self.adjacent(u, v)))
    }

    pub fn is_clique(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(a, &u)| set[a + 1..].iter().all(|&v| u != v && self.adjacent(u, v)))
    }
}

/// Common vertex set with one simple factor (edge colour) per party.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusivityMultigraph {
    weights: Vec<f64>,
    parties: Vec<String>,
    factors: Vec<VertexWeightedGraph>,
    labels: Option<Vec<String>>,
}

impl ExclusivityMultigraph {
    /// `factors[k]` is the edge list of party `parties[k]`.
    pub fn new(
        weights: Vec<f64>,
        parties: Vec<String>,
        factors: Vec<Vec<(usize, usize)>>,
    ) -> Result<Self, GraphError> {
        validate_weights(&weights)?;
        if parties.is_empty() {
            return Err(GraphError::NoParties);
        }
        let mut names = BTreeSet::new();
        for p in &parties {
            if !names.insert(p.as_str()) {
                return Err(GraphError::DuplicateParty(p.clone()));
            }
        }
        if factors.len() != parties.len() {
            return Err(GraphError::FactorCount {
                parties: parties.len(),
                factors: factors.len(),
            });
        }
        let factors = factors
            .iter()
            .map(|edges| VertexWeightedGraph::new(weights.clone(), edges))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            weights,
            parties,
            factors,
            labels: None,
        })
    }

    /// A one-factor multigraph wrapping a simple graph.
    pub fn from_graph(g: &VertexWeightedGraph, party: &str) -> Self {
        let mut mg = Self::new(
            g.weights().to_vec(),
            vec![party.to_string()],
            vec![g.edges().to_vec()],
        )
        .expect("valid graph is a valid one-factor multigraph");
        mg.labels = g.labels.clone();
        mg
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, GraphError> {
        if labels.len() != self.vertex_count() {
            return Err(GraphError::LabelCount {
                expected: self.vertex_count(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn party_count(&self) -> usize {
        self.parties.len()
    }

    pub fn factor(&self, party: usize) -> &VertexWeightedGraph {
        &self.factors[party]
    }

    pub fn factors(&self) -> &[VertexWeightedGraph] {
        &self.factors
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Replace the weights, keeping the edge structure.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self, GraphError> {
        if weights.len() != self.vertex_count() {
            return Err(GraphError::WeightCount {
                expected: self.vertex_count(),
                found: weights.len(),
            });
        }
        let mut mg = Self::new(
            weights,
            self.parties.clone(),
            self.factors.iter().map(|f| f.edges().to_vec()).collect(),
        )?;
        mg.labels = self.labels.clone();
        Ok(mg)
    }

    /// Merge parallel edges of all factors into one simple graph.
    pub fn flatten(&self) -> VertexWeightedGraph {
        let edges: BTreeSet<(usize, usize)> = self
            .factors
            .iter()
            .flat_map(|f| f.edges().iter().copied())
            .collect();
        let edges: Vec<_> = edges.into_iter().collect();
        let mut g = VertexWeightedGraph::new(self.weights.clone(), &edges)
            .expect("union of valid factors is valid");
        g.labels = self.labels.clone();
        g
    }

    pub fn to_document(&self) -> MultigraphDocument {
        MultigraphDocument {
            vertices: self
                .weights
                .iter()
                .enumerate()
                .map(|(id, &weight)| VertexEntry {
                    id,
                    weight,
                    label: self.labels.as_ref().map(|l| l[id].clone()),
                })
                .collect(),
            parties: self.parties.clone(),
            factors: self
                .parties
                .iter()
                .zip(&self.factors)
                .map(|(party, f)| FactorEntry {
                    party: party.clone(),
                    edges: f.edges().iter().map(|&(i, j)| [i, j]).collect(),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &MultigraphDocument) -> Result<Self, GraphError> {
        let n = doc.vertices.len();
        let mut weights = vec![f64::NAN; n];
        let mut labels: Vec<Option<String>> = vec![None; n];
        for v in &doc.vertices {
            if v.id >= n || !weights[v.id].is_nan() {
                return Err(GraphError::VertexIds);
            }
            weights[v.id] = v.weight;
            labels[v.id] = v.label.clone();
        }
        let mut factors = vec![None; doc.parties.len()];
        for f in &doc.factors {
            let k = doc
                .parties
                .iter()
                .position(|p| p == &f.party)
                .ok_or_else(|| GraphError::UnknownParty(f.party.clone()))?;
            if factors[k].is_some() {
                return Err(GraphError::DuplicateFactor(f.party.clone()));
            }
            factors[k] = Some(f.edges.iter().map(|e| (e[0], e[1])).collect::<Vec<_>>());
        }
        let factors = factors.into_iter().map(Option::unwrap_or_default).collect();
        let mg = Self::new(weights, doc.parties.clone(), factors)?;
        if labels.iter().all(Option::is_some) && n > 0 {
            mg.with_labels(labels.into_iter().map(Option::unwrap).collect())
        } else {
            Ok(mg)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, crate::Error> {
        let doc: MultigraphDocument = serde_json::from_str(text)?;
        Ok(Self::from_document(&doc)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("serializable")
    }
}

/// On-disk multigraph description. A simple graph is the one-factor case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultigraphDocument {
    pub vertices: Vec<VertexEntry>,
    pub parties: Vec<String>,
    pub factors: Vec<FactorEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: usize,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorEntry {
    pub party: String,
    pub edges: Vec<[usize; 2]>,
}

fn validate_weights(weights: &[f64]) -> Result<(), GraphError> {
    match weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        Some(v) => Err(GraphError::NonPositiveWeight {
            vertex: v,
            weight: weights[v],
        }),
        None => Ok(()),
    }
}

fn check_edge(n: usize, a: usize, b: usize) -> Result<(), GraphError> {
    if a >= n || b >= n {
        return Err(GraphError::EndpointOutOfRange { edge: (a, b), n });
    }
    if a == b {
        return Err(GraphError::SelfLoop(a));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c5() -> VertexWeightedGraph {
        VertexWeightedGraph::unit(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap()
    }

    #[test]
    fn validates_cycle() {
        let g = c5();
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edges(), &[(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]);
        assert!((0..5).all(|v| g.degree(v) == 2));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            VertexWeightedGraph::new(vec![1.0, 0.0], &[]),
            Err(GraphError::NonPositiveWeight { vertex: 1, .. })
        ));
        assert!(matches!(
            VertexWeightedGraph::new(vec![1.0, f64::NAN], &[]),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            VertexWeightedGraph::unit(5, &[(3, 3)]),
            Err(GraphError::SelfLoop(3))
        ));
        assert!(matches!(
            VertexWeightedGraph::unit(3, &[(0, 3)]),
            Err(GraphError::EndpointOutOfRange { .. })
        ));
        assert!(matches!(
            VertexWeightedGraph::unit(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
    }

    #[test]
    fn complement_cases() {
        let g = c5();
        assert_eq!(g.complement().complement(), g);
        // the pentagon's complement is the pentagram 0-2-4-1-3-0
        let comp = g.complement();
        assert!((0..5).all(|v| comp.degree(v) == 2));
        assert_eq!(comp.connected_components().len(), 1);
        let empty = VertexWeightedGraph::unit(4, &[]).unwrap();
        assert_eq!(empty.complement().edges().len(), 6);
    }

    #[test]
    fn components() {
        let g = VertexWeightedGraph::unit(4, &[]).unwrap();
        assert_eq!(g.connected_components(), vec![vec![0], vec![1], vec![2], vec![3]]);
        let g = VertexWeightedGraph::unit(5, &[(0, 3), (1, 4)]).unwrap();
        assert_eq!(g.connected_components(), vec![vec![0, 3], vec![1, 4], vec![2]]);
    }

    #[test]
    fn cliques_of_small_graphs() {
        assert_eq!(
            c5().maximal_cliques(),
            vec![vec![0, 1], vec![0, 4], vec![1, 2], vec![2, 3], vec![3, 4]]
        );
        let k4 = VertexWeightedGraph::complete(vec![1.0; 4]).unwrap();
        assert_eq!(k4.maximal_cliques(), vec![vec![0, 1, 2, 3]]);
        let g = VertexWeightedGraph::unit(3, &[(0, 1)]).unwrap();
        assert_eq!(g.maximal_cliques(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn multigraph_party_rules() {
        // parallel edges of different colours are the point of a multigraph
        let mg = ExclusivityMultigraph::new(
            vec![1.0; 3],
            vec!["A".into(), "B".into()],
            vec![vec![(0, 1)], vec![(1, 0)]],
        )
        .unwrap();
        assert_eq!(mg.flatten().edges(), &[(0, 1)]);
        let r = ExclusivityMultigraph::new(vec![1.0; 3], vec![], vec![]);
        assert!(matches!(r, Err(GraphError::NoParties)));
        let r = ExclusivityMultigraph::new(
            vec![1.0; 3],
            vec!["A".into(), "A".into()],
            vec![vec![], vec![]],
        );
        assert!(matches!(r, Err(GraphError::DuplicateParty(_))));
    }

    #[test]
    fn one_factor_flatten_is_identity() {
        let g = c5();
        assert_eq!(ExclusivityMultigraph::from_graph(&g, "A").flatten(), g);
    }

    #[test]
    fn document_duplicates() {
        let text = r#"{"vertices":[{"id":0,"weight":1},{"id":1,"weight":2}],
            "parties":["A","B"],
            "factors":[{"party":"A","edges":[[0,1]]},{"party":"B","edges":[[1,0]]}]}"#;
        let mg = ExclusivityMultigraph::from_json(text).unwrap();
        assert_eq!(mg.weights(), &[1.0, 2.0]);
        assert!(mg.factor(0).adjacent(0, 1) && mg.factor(1).adjacent(0, 1));
        let dup = r#"{"vertices":[{"id":0,"weight":1},{"id":1,"weight":2}],
            "parties":["A"], "factors":[{"party":"A","edges":[[0,1],[1,0]]}]}"#;
        assert!(ExclusivityMultigraph::from_json(dup).is_err());
    }
}
