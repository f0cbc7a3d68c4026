//! Weighted independence number of a simple graph.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::VertexWeightedGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub value: f64,
    /// Sorted; lexicographically smallest among optimal sets.
    pub witness: Vec<usize>,
}

const TIE: f64 = 1e-9;

/// Exact maximum-weight independent set by branch and bound.
pub fn alpha(g: &VertexWeightedGraph) -> AlphaResult {
    let n = g.vertex_count();
    let mut search = Search {
        g,
        best: AlphaResult {
            value: 0.0,
            witness: Vec::new(),
        },
        current: Vec::with_capacity(n),
        tol: TIE * g.weights().iter().sum::<f64>().max(1.0),
    };
    let cand: Vec<usize> = (0..n).collect();
    search.run(&cand, 0.0);
    search.best
}

struct Search<'a> {
    g: &'a VertexWeightedGraph,
    best: AlphaResult,
    current: Vec<usize>,
    tol: f64,
}

impl Search<'_> {
    // Branching on the smallest candidate, include first, visits optimal sets
    // in lexicographic order, so the first optimum found is the reported one.
    fn run(&mut self, cand: &[usize], value: f64) {
        if cand.is_empty() {
            if value > self.best.value + self.tol {
                self.best = AlphaResult {
                    value,
                    witness: self.current.clone(),
                };
            }
            return;
        }
        if value + clique_cover_bound(self.g, cand) <= self.best.value + self.tol {
            return;
        }
        let v = cand[0];
        let w = self.g.weights()[v];
        let with: Vec<usize> = cand[1..]
            .iter()
            .copied()
            .filter(|&u| !self.g.adjacent(u, v))
            .collect();
        self.current.push(v);
        self.run(&with, value + w);
        self.current.pop();
        self.run(&cand[1..], value);
    }
}

/// Greedy partition of `cand` into cliques; an independent set meets each at
/// most once, so the sum of per-clique maximum weights bounds it.
fn clique_cover_bound(g: &VertexWeightedGraph, cand: &[usize]) -> f64 {
    let w = g.weights();
    let mut order = cand.to_vec();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    let mut bound = 0.0;
    for v in order {
        match cliques
            .iter_mut()
            .find(|k| k.iter().all(|&u| g.adjacent(u, v)))
        {
            Some(k) => k.push(v),
            None => {
                bound += w[v];
                cliques.push(vec![v]);
            }
        }
    }
    bound
}

pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Enumerate every vertex subset. Test oracle for [`alpha`].
pub fn alpha_exhaustive(g: &VertexWeightedGraph) -> Result<AlphaResult, Error> {
    let n = g.vertex_count();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::ExhaustiveLimit {
            n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbours(v).fold(0u32, |m, u| m | 1 << u))
        .collect();
    let tol = TIE * g.weights().iter().sum::<f64>().max(1.0);
    let mut best = AlphaResult {
        value: 0.0,
        witness: Vec::new(),
    };
    for mask in 1u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if members.iter().any(|&v| nbr[v] & mask != 0) {
            continue;
        }
        let value: f64 = members.iter().map(|&v| g.weights()[v]).sum();
        let better = value > best.value + tol
            || (value > best.value - tol && members < best.witness);
        if better {
            best = AlphaResult {
                value,
                witness: members,
            };
        }
    }
    Ok(best)
}
