//! Translation between pencil form and the interior-point standard form.

use std::collections::BTreeMap;

use super::ipm::{self, IpmStatus, Settings, StdForm};
use super::reduce;
use super::{min_eigenvalue, IpmStats, Route, SdpProblem, SdpSolution, SdpStatus, Tolerances};

/// Who determines each upper-triangle position of the pencil.
enum Owner {
    Const(f64),
    Var(usize, f64),
}

struct Layout {
    /// Positions owned by each variable, with coefficients.
    positions: Vec<Vec<(usize, usize, f64)>>,
    constants: Vec<(usize, usize, f64)>,
}

/// `Some` when every position is either constant or a multiple of one variable.
fn entry_layout(p: &SdpProblem) -> Option<Layout> {
    let mut owner: BTreeMap<(usize, usize), Owner> = BTreeMap::new();
    for &(r, c, v) in &p.a0.entries {
        match owner.get_mut(&(r, c)) {
            None => {
                owner.insert((r, c), Owner::Const(v));
            }
            Some(Owner::Const(x)) => *x += v,
            Some(Owner::Var(..)) => return None,
        }
    }
    for (m, mat) in p.matrices.iter().enumerate() {
        for &(r, c, v) in &mat.entries {
            match owner.get_mut(&(r, c)) {
                None => {
                    owner.insert((r, c), Owner::Var(m, v));
                }
                Some(Owner::Var(k, a)) if *k == m => *a += v,
                Some(_) => return None,
            }
        }
    }
    let mut positions = vec![Vec::new(); p.variable_count()];
    let mut constants = Vec::new();
    for i in 0..p.size {
        for j in i..p.size {
            match owner.get(&(i, j)) {
                None => constants.push((i, j, 0.0)),
                Some(Owner::Const(v)) => constants.push((i, j, *v)),
                Some(Owner::Var(_, a)) if *a == 0.0 => return None,
                Some(Owner::Var(m, a)) => positions[*m].push((i, j, *a)),
            }
        }
    }
    Some(Layout {
        positions,
        constants,
    })
}

/// Weight turning `<A, X>` for `A = E_pq + E_qp` into `X_pq`.
fn half(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.5
    }
}

pub(super) fn solve(p: &SdpProblem, tol: &Tolerances, force: Option<Route>) -> SdpSolution {
    if p.kernel.is_empty() {
        return solve_open(p, tol, force);
    }
    match reduce::reduce(p) {
        None => finish(p, SdpStatus::Infeasible, vec![0.0; p.variable_count()], IpmStats::default(), Route::Dual, 0),
        Some(red) => {
            let sol = solve_open(&red.problem, tol, force);
            let v = red.expand(&sol.variables);
            finish(p, sol.status, v, sol.stats, sol.route, sol.schur_size)
        }
    }
}

fn solve_open(p: &SdpProblem, tol: &Tolerances, force: Option<Route>) -> SdpSolution {
    let m = p.variable_count();
    let mut in_rows = vec![false; m];
    for row in p.inequalities.iter().chain(&p.equalities) {
        for &(k, a) in &row.coeffs {
            if a != 0.0 {
                in_rows[k] = true;
            }
        }
    }
    let in_pencil: Vec<bool> = p
        .matrices
        .iter()
        .map(|a| a.entries.iter().any(|e| e.2 != 0.0))
        .collect();
    // A variable that nothing constrains either drives the objective to
    // infinity or is irrelevant.
    let loose: Vec<usize> = (0..m).filter(|&k| !in_rows[k] && !in_pencil[k]).collect();
    if loose.iter().any(|&k| p.objective[k] != 0.0) {
        return finish(p, SdpStatus::Unbounded, vec![0.0; m], IpmStats::default(), Route::Dual, 0);
    }

    let layout = entry_layout(p);
    let rows_d = m - loose.len();
    let rows_p = layout.as_ref().map(|l| {
        let tied: usize = l.positions.iter().map(|v| v.len().saturating_sub(1)).sum();
        l.constants.len() + tied + p.inequalities.len() + p.equalities.len()
    });
    let settings = Settings {
        gap: tol.gap,
        feasibility: tol.feasibility,
        max_iterations: tol.max_iterations,
    };
    match (layout, rows_p, force) {
        (Some(l), _, Some(Route::Primal)) => primal_route(p, &l, &settings),
        (_, _, Some(Route::Dual)) => dual_route(p, &loose, &settings),
        (Some(l), Some(rp), None) if rp < rows_d => primal_route(p, &l, &settings),
        _ => dual_route(p, &loose, &settings),
    }
}

fn finish(
    p: &SdpProblem,
    status: SdpStatus,
    v: Vec<f64>,
    stats: IpmStats,
    route: Route,
    schur_size: usize,
) -> SdpSolution {
    let g = p.pencil(&v);
    SdpSolution {
        status,
        objective: p.objective_value(&v),
        min_eigenvalue: min_eigenvalue(&g),
        max_violation: p.max_violation(&v),
        relative_gap: stats.relative_gap,
        moment_matrix: g,
        variables: v,
        route,
        schur_size,
        stats,
    }
}

fn dual_route(p: &SdpProblem, loose: &[usize], set: &Settings) -> SdpSolution {
    let m = p.variable_count();
    let mut index = vec![usize::MAX; m];
    let mut f = StdForm::new(p.size);
    p.a0.add_to(&mut f.c, 1.0);
    for k in 0..m {
        if loose.contains(&k) {
            continue;
        }
        let neg: Vec<(usize, usize, f64)> =
            p.matrices[k].entries.iter().map(|&(r, c, v)| (r, c, -v)).collect();
        index[k] = f.push_row(&neg, p.objective[k]);
    }
    for row in &p.inequalities {
        f.al.push(row.coeffs.iter().filter(|e| index[e.0] != usize::MAX).map(|&(k, a)| (index[k], a)).collect());
        f.cl.push(row.bound);
    }
    for row in &p.equalities {
        f.af.push(row.coeffs.iter().filter(|e| index[e.0] != usize::MAX).map(|&(k, a)| (index[k], a)).collect());
        f.cf.push(row.bound);
    }
    let res = ipm::solve(&f, set);
    let v: Vec<f64> = (0..m)
        .map(|k| if index[k] == usize::MAX { 0.0 } else { res.y[index[k]] })
        .collect();
    let status = match res.status {
        IpmStatus::Optimal => SdpStatus::Optimal,
        IpmStatus::DualInfeasible => SdpStatus::Infeasible,
        IpmStatus::PrimalInfeasible => SdpStatus::Unbounded,
        _ => SdpStatus::NumericalFailure,
    };
    finish(p, status, v, res.stats, Route::Dual, f.rows())
}

fn primal_route(p: &SdpProblem, l: &Layout, set: &Settings) -> SdpSolution {
    let m = p.variable_count();
    let s = p.size;
    let mut f = StdForm::new(s);
    // Representative position of each pencil variable; free slots otherwise.
    let mut free_index = vec![usize::MAX; m];
    for k in 0..m {
        match l.positions[k].first() {
            Some(&(i, j, a)) => {
                let c = -p.objective[k] / a * half(i, j);
                f.c[(i, j)] += c;
                if i != j {
                    f.c[(j, i)] += c;
                }
            }
            None => {
                free_index[k] = f.cf.len();
                f.cf.push(-p.objective[k]);
                f.af.push(Vec::new());
            }
        }
    }
    for &(i, j, v) in &l.constants {
        f.push_row(&[(i, j, half(i, j))], v);
    }
    for pos in &l.positions {
        if let Some(&(i0, j0, a0)) = pos.first() {
            for &(i, j, a) in &pos[1..] {
                f.push_row(&[(i, j, half(i, j) / a), (i0, j0, -half(i0, j0) / a0)], 0.0);
            }
        }
    }
    let linear_row = |f: &mut StdForm, coeffs: &[(usize, f64)], bound: f64| -> usize {
        let mut entries = Vec::new();
        let mut frees = Vec::new();
        for &(k, c) in coeffs {
            match l.positions[k].first() {
                Some(&(i, j, a)) => entries.push((i, j, c * half(i, j) / a)),
                None => frees.push((free_index[k], c)),
            }
        }
        let r = f.push_row(&entries, bound);
        for (fi, c) in frees {
            f.af[fi].push((r, c));
        }
        r
    };
    for row in &p.inequalities {
        let r = linear_row(&mut f, &row.coeffs, row.bound);
        f.al.push(vec![(r, 1.0)]);
        f.cl.push(0.0);
    }
    for row in &p.equalities {
        linear_row(&mut f, &row.coeffs, row.bound);
    }
    let res = ipm::solve(&f, set);
    let v: Vec<f64> = (0..m)
        .map(|k| {
            let pos = &l.positions[k];
            if pos.is_empty() {
                res.xf[free_index[k]]
            } else {
                pos.iter().map(|&(i, j, a)| res.x[(i, j)] / a).sum::<f64>() / pos.len() as f64
            }
        })
        .collect();
    let status = match res.status {
        IpmStatus::Optimal => SdpStatus::Optimal,
        IpmStatus::PrimalInfeasible => SdpStatus::Infeasible,
        IpmStatus::DualInfeasible => SdpStatus::Unbounded,
        _ => SdpStatus::NumericalFailure,
    };
    finish(p, status, v, res.stats, Route::Primal, f.rows())
}
