//! Weighted Lovász number of a simple graph, by two independent programs.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::VertexWeightedGraph;
use crate::sdp::{self, LinearRow, SdpProblem, SdpSolution, SdpStatus, SymMatrix, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaFormulation {
    Gls,
    Moment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaResult {
    pub value: f64,
    pub formulation: ThetaFormulation,
    pub relative_gap: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
}

fn finish(sol: SdpSolution, formulation: ThetaFormulation) -> Result<ThetaResult, Error> {
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!(
            "{} after {} iterations (relative gap {:.2e})",
            sol.status.name(),
            sol.stats.iterations,
            sol.relative_gap
        )));
    }
    Ok(ThetaResult {
        value: sol.objective,
        formulation,
        relative_gap: sol.relative_gap,
        min_eigenvalue: sol.min_eigenvalue,
        iterations: sol.stats.iterations,
    })
}

/// Single-party level-1 moment program:
/// `Gamma_00 = 1`, `Gamma_0i = Gamma_ii = p_i`, `Gamma_ij = 0` on edges,
/// maximize `sum_i w_i p_i`.
pub fn moment_theta_problem(g: &VertexWeightedGraph) -> SdpProblem {
    let n = g.vertex_count();
    let mut a0 = SymMatrix::default();
    a0.push(0, 0, 1.0);
    let mut matrices = Vec::new();
    let mut objective = Vec::new();
    for i in 0..n {
        let mut m = SymMatrix::default();
        m.push(0, 1 + i, 1.0);
        m.push(1 + i, 1 + i, 1.0);
        matrices.push(m);
        objective.push(g.weights()[i]);
    }
    for i in 0..n {
        for j in i + 1..n {
            if !g.adjacent(i, j) {
                let mut m = SymMatrix::default();
                m.push(1 + i, 1 + j, 1.0);
                matrices.push(m);
                objective.push(0.0);
            }
        }
    }
    SdpProblem {
        size: n + 1,
        a0,
        matrices,
        inequalities: Vec::new(),
        equalities: Vec::new(),
        objective,
        kernel: Vec::new(),
    }
}

/// maximize `<W, X>` with `W_ij = sqrt(w_i w_j)`, `tr X = 1`, `X_ij = 0` on edges.
pub fn gls_theta_problem(g: &VertexWeightedGraph) -> SdpProblem {
    let n = g.vertex_count();
    let w = g.weights();
    let mut matrices = Vec::new();
    let mut objective = Vec::new();
    let mut trace = Vec::new();
    for i in 0..n {
        for j in i..n {
            if i == j || !g.adjacent(i, j) {
                let mut m = SymMatrix::default();
                m.push(i, j, 1.0);
                let k = matrices.len();
                matrices.push(m);
                if i == j {
                    objective.push(w[i]);
                    trace.push((k, 1.0));
                } else {
                    objective.push(2.0 * (w[i] * w[j]).sqrt());
                }
            }
        }
    }
    SdpProblem {
        size: n,
        a0: SymMatrix::default(),
        matrices,
        inequalities: Vec::new(),
        equalities: vec![LinearRow::new(trace, 1.0)],
        objective,
        kernel: Vec::new(),
    }
}

/// Tighter than the solver defaults so the two formulations can be
/// compared at 1e-6.
pub fn theta_tolerances() -> Tolerances {
    Tolerances {
        gap: 1e-9,
        feasibility: 1e-9,
        ..Tolerances::default()
    }
}

pub fn moment_theta(g: &VertexWeightedGraph) -> Result<ThetaResult, Error> {
    moment_theta_with(g, &theta_tolerances())
}

pub fn moment_theta_with(g: &VertexWeightedGraph, tol: &Tolerances) -> Result<ThetaResult, Error> {
    if g.vertex_count() == 0 {
        return Ok(empty(ThetaFormulation::Moment));
    }
    let sol = sdp::solve_with(&moment_theta_problem(g), tol)?;
    finish(sol, ThetaFormulation::Moment)
}

pub fn gls_theta(g: &VertexWeightedGraph) -> Result<ThetaResult, Error> {
    gls_theta_with(g, &theta_tolerances())
}

pub fn gls_theta_with(g: &VertexWeightedGraph, tol: &Tolerances) -> Result<ThetaResult, Error> {
    if g.vertex_count() == 0 {
        return Ok(empty(ThetaFormulation::Gls));
    }
    let sol = sdp::solve_with(&gls_theta_problem(g), tol)?;
    finish(sol, ThetaFormulation::Gls)
}

fn empty(formulation: ThetaFormulation) -> ThetaResult {
    ThetaResult {
        value: 0.0,
        formulation,
        relative_gap: 0.0,
        min_eigenvalue: 0.0,
        iterations: 0,
    }
}
