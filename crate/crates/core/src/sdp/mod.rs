//! Semidefinite programs in pencil form and a dense interior-point solver.
//!
//! ```text
//! maximize  c.v
//! subject to  A0 + sum_m v_m A_m  PSD
//!             C v <= d
//!             E v  = f
//! ```
//!
//! Optionally, vectors `u` with `u' G u = 0` for every feasible pencil value
//! `G` can be declared; the solver then works on the smaller face they cut out.

mod ipm;
mod reduce;
mod routes;

use std::fmt::Write as _;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::SdpError;

pub use ipm::IpmStats;

/// Symmetric matrix as upper-triangle triplets `(row <= col, value)`.
/// Repeated positions add up.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SymMatrix {
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Accumulate `scale * self` into a dense matrix.
    pub fn add_to(&self, m: &mut Mat<f64>, scale: f64) {
        for &(r, c, v) in &self.entries {
            m[(r, c)] += scale * v;
            if r != c {
                m[(c, r)] += scale * v;
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, f64)>,
    pub bound: f64,
}

impl LinearRow {
    pub fn new(coeffs: Vec<(usize, f64)>, bound: f64) -> Self {
        Self { coeffs, bound }
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(k, a)| a * v[k]).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub size: usize,
    pub a0: SymMatrix,
    pub matrices: Vec<SymMatrix>,
    /// `row . v <= bound`
    pub inequalities: Vec<LinearRow>,
    /// `row . v == bound`
    pub equalities: Vec<LinearRow>,
    pub objective: Vec<f64>,
    /// Sparse vectors annihilating the pencil on the feasible set.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kernel: Vec<Vec<(usize, f64)>>,
}

pub const DEFAULT_SIZE_CEILING: usize = 350;

impl SdpProblem {
    pub fn variable_count(&self) -> usize {
        self.matrices.len()
    }

    pub fn validate(&self, ceiling: usize) -> Result<(), SdpError> {
        if self.size > ceiling {
            return Err(SdpError::TooLarge {
                size: self.size,
                ceiling,
            });
        }
        let m = self.variable_count();
        if self.objective.len() != m {
            return Err(SdpError::ObjectiveLength {
                expected: m,
                found: self.objective.len(),
            });
        }
        for mat in std::iter::once(&self.a0).chain(&self.matrices) {
            for &(r, c, _) in &mat.entries {
                if r >= self.size || c >= self.size {
                    return Err(SdpError::EntryOutOfRange {
                        row: r,
                        col: c,
                        size: self.size,
                    });
                }
            }
        }
        for row in self.inequalities.iter().chain(&self.equalities) {
            for &(k, _) in &row.coeffs {
                if k >= m {
                    return Err(SdpError::VariableOutOfRange { index: k, count: m });
                }
            }
        }
        for u in &self.kernel {
            for &(r, _) in u {
                if r >= self.size {
                    return Err(SdpError::EntryOutOfRange {
                        row: r,
                        col: r,
                        size: self.size,
                    });
                }
            }
        }
        Ok(())
    }

    /// `A0 + sum_m v_m A_m`, dense.
    pub fn pencil(&self, v: &[f64]) -> Mat<f64> {
        let mut g = Mat::zeros(self.size, self.size);
        self.a0.add_to(&mut g, 1.0);
        for (mat, &x) in self.matrices.iter().zip(v) {
            if x != 0.0 {
                mat.add_to(&mut g, x);
            }
        }
        g
    }

    pub fn objective_value(&self, v: &[f64]) -> f64 {
        self.objective.iter().zip(v).map(|(c, x)| c * x).sum()
    }

    /// Largest violation of the linear rows at `v` (0 when all hold).
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let ineq = self
            .inequalities
            .iter()
            .map(|r| r.eval(v) - r.bound)
            .fold(0.0, f64::max);
        let eq = self
            .equalities
            .iter()
            .map(|r| (r.eval(v) - r.bound).abs())
            .fold(0.0, f64::max);
        ineq.max(eq)
    }

    /// Sparse-triplet text dump.
    ///
    /// ```text
    /// sdp <size> <variables>
    /// c <m> <value>                  objective coefficient (maximized)
    /// a <m> <row> <col> <value>      pencil entry, m = 0 for A0, 1-based otherwise
    /// le <bound> <m>:<coef> ...      inequality row, m 1-based
    /// eq <bound> <m>:<coef> ...      equality row
    /// k <row>:<coef> ...             kernel vector, rows 0-based
    /// ```
    /// Matrix indices are 0-based upper-triangle positions.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sdp {} {}", self.size, self.variable_count());
        for (m, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = writeln!(out, "c {} {c:e}", m + 1);
            }
        }
        for (m, mat) in std::iter::once(&self.a0).chain(&self.matrices).enumerate() {
            for &(r, c, v) in &mat.entries {
                let _ = writeln!(out, "a {m} {r} {c} {v:e}");
            }
        }
        for (tag, rows) in [("le", &self.inequalities), ("eq", &self.equalities)] {
            for row in rows {
                let _ = write!(out, "{tag} {:e}", row.bound);
                for &(k, a) in &row.coeffs {
                    let _ = write!(out, " {}:{a:e}", k + 1);
                }
                out.push('\n');
            }
        }
        for u in &self.kernel {
            out.push('k');
            for &(r, a) in u {
                let _ = write!(out, " {r}:{a:e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self, SdpError> {
        let bad = |line: usize, what: &str| SdpError::Dump(format!("line {}: {what}", line + 1));
        let mut p = SdpProblem::default();
        let mut header = false;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
            let idx = |s: &str| s.parse::<usize>().map_err(|_| bad(ln, "bad index"));
            match tok[0] {
                "sdp" if tok.len() == 3 => {
                    p.size = idx(tok[1])?;
                    let m = idx(tok[2])?;
                    p.matrices = vec![SymMatrix::default(); m];
                    p.objective = vec![0.0; m];
                    header = true;
                }
                _ if !header => return Err(bad(ln, "missing header")),
                "c" if tok.len() == 3 => {
                    let m = idx(tok[1])?;
                    if m == 0 || m > p.objective.len() {
                        return Err(bad(ln, "variable out of range"));
                    }
                    p.objective[m - 1] = num(tok[2])?;
                }
                "a" if tok.len() == 5 => {
                    let m = idx(tok[1])?;
                    let (r, c, v) = (idx(tok[2])?, idx(tok[3])?, num(tok[4])?);
                    match m {
                        0 => p.a0.push(r, c, v),
                        m if m <= p.matrices.len() => p.matrices[m - 1].push(r, c, v),
                        _ => return Err(bad(ln, "variable out of range")),
                    }
                }
                "le" | "eq" if tok.len() >= 2 => {
                    let mut row = LinearRow::new(Vec::new(), num(tok[1])?);
                    for t in &tok[2..] {
                        let (k, a) = t.split_once(':').ok_or_else(|| bad(ln, "expected m:coef"))?;
                        let k = idx(k)?;
                        if k == 0 {
                            return Err(bad(ln, "variables are 1-based"));
                        }
                        row.coeffs.push((k - 1, num(a)?));
                    }
                    if tok[0] == "le" {
                        p.inequalities.push(row);
                    } else {
                        p.equalities.push(row);
                    }
                }
                "k" => {
                    let mut u = Vec::new();
                    for t in &tok[1..] {
                        let (r, a) = t.split_once(':').ok_or_else(|| bad(ln, "expected row:coef"))?;
                        u.push((idx(r)?, num(a)?));
                    }
                    p.kernel.push(u);
                }
                _ => return Err(bad(ln, "unrecognized line")),
            }
        }
        if !header {
            return Err(SdpError::Dump("empty dump".into()));
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub gap: f64,
    pub feasibility: f64,
    pub max_iterations: usize,
    pub size_ceiling: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gap: 1e-7,
            feasibility: 1e-8,
            max_iterations: 200,
            size_ceiling: DEFAULT_SIZE_CEILING,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SdpStatus {
    pub fn name(self) -> &'static str {
        match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::Unbounded => "unbounded",
            SdpStatus::NumericalFailure => "numerical-failure",
        }
    }
}

/// Which standard form the problem was handed to the interior-point code in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Pencil variables are the dual multipliers; one Newton row per variable.
    Dual,
    /// The matrix itself is the primal variable; one row per fixed or tied entry.
    Primal,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub objective: f64,
    pub variables: Vec<f64>,
    /// The pencil evaluated at `variables`.
    pub moment_matrix: Mat<f64>,
    pub min_eigenvalue: f64,
    pub max_violation: f64,
    pub relative_gap: f64,
    pub route: Route,
    /// Order of the Newton system factored each iteration.
    pub schur_size: usize,
    pub stats: IpmStats,
}

/// Solve with default tolerances.
pub fn solve(p: &SdpProblem) -> Result<SdpSolution, SdpError> {
    solve_with(p, &Tolerances::default())
}

pub fn solve_with(p: &SdpProblem, tol: &Tolerances) -> Result<SdpSolution, SdpError> {
    p.validate(tol.size_ceiling)?;
    Ok(routes::solve(p, tol, None))
}

/// As [`solve_with`], but insist on one standard form. A primal request falls
/// back to the dual form when some pencil entry mixes several variables.
pub fn solve_with_route(
    p: &SdpProblem,
    tol: &Tolerances,
    route: Route,
) -> Result<SdpSolution, SdpError> {
    p.validate(tol.size_ceiling)?;
    Ok(routes::solve(p, tol, Some(route)))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &Mat<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.self_adjoint_eigenvalues(faer::Side::Lower)
        .map(|e| e[0])
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> SdpProblem {
        // [[1, t], [t, 1]]
        let mut a0 = SymMatrix::default();
        a0.push(0, 0, 1.0);
        a0.push(1, 1, 1.0);
        let mut a1 = SymMatrix::default();
        a1.push(0, 1, 1.0);
        SdpProblem {
            size: 2,
            a0,
            matrices: vec![a1],
            objective: vec![1.0],
            ..Default::default()
        }
    }

    fn both_routes(p: &SdpProblem) -> [SdpSolution; 2] {
        let t = Tolerances::default();
        [
            solve_with_route(p, &t, Route::Dual).unwrap(),
            solve_with_route(p, &t, Route::Primal).unwrap(),
        ]
    }

    #[test]
    fn two_by_two_optimum() {
        for sol in both_routes(&two_by_two()) {
            assert_eq!(sol.status, SdpStatus::Optimal, "{:?}", sol.route);
            assert!((sol.objective - 1.0).abs() < 1e-6, "{}", sol.objective);
            assert!(sol.min_eigenvalue > -1e-8);
            assert!(sol.relative_gap <= 1e-7);
        }
    }

    #[test]
    fn detects_infeasible() {
        // [[1 + v]] PSD, v <= -1, v >= 0.
        let mut a0 = SymMatrix::default();
        a0.push(0, 0, 1.0);
        let mut a1 = SymMatrix::default();
        a1.push(0, 0, 1.0);
        let p = SdpProblem {
            size: 1,
            a0,
            matrices: vec![a1],
            inequalities: vec![
                LinearRow::new(vec![(0, 1.0)], -1.0),
                LinearRow::new(vec![(0, -1.0)], 0.0),
            ],
            objective: vec![1.0],
            ..Default::default()
        };
        for sol in both_routes(&p) {
            assert_eq!(sol.status, SdpStatus::Infeasible, "{:?}", sol.route);
        }
    }

    #[test]
    fn detects_unbounded() {
        // diag(1, v) PSD, maximize v.
        let mut a0 = SymMatrix::default();
        a0.push(0, 0, 1.0);
        let mut a1 = SymMatrix::default();
        a1.push(1, 1, 1.0);
        let p = SdpProblem {
            size: 2,
            a0,
            matrices: vec![a1],
            objective: vec![1.0],
            ..Default::default()
        };
        for sol in both_routes(&p) {
            assert_eq!(sol.status, SdpStatus::Unbounded, "{:?}", sol.route);
        }
        let free = SdpProblem {
            size: 1,
            a0: SymMatrix { entries: vec![(0, 0, 1.0)] },
            matrices: vec![SymMatrix::default()],
            objective: vec![1.0],
            ..Default::default()
        };
        assert_eq!(solve(&free).unwrap().status, SdpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_on_both_routes() {
        // [[a, t], [t, b]] PSD, a + b = 1, maximize 2t + a: the top eigenvalue
        // of [[1, 1], [1, 0]].
        let mut mats = vec![SymMatrix::default(); 3];
        mats[0].push(0, 0, 1.0);
        mats[1].push(1, 1, 1.0);
        mats[2].push(0, 1, 1.0);
        let p = SdpProblem {
            size: 2,
            a0: SymMatrix::default(),
            matrices: mats,
            equalities: vec![LinearRow::new(vec![(0, 1.0), (1, 1.0)], 1.0)],
            objective: vec![1.0, 0.0, 2.0],
            ..Default::default()
        };
        let want = (1.0 + 5f64.sqrt()) / 2.0;
        for sol in both_routes(&p) {
            assert_eq!(sol.status, SdpStatus::Optimal, "{:?}", sol.route);
            assert!((sol.objective - want).abs() < 1e-6, "{:?} {}", sol.route, sol.objective);
            assert!(sol.max_violation < 1e-8);
        }
    }

    #[test]
    fn dump_round_trip() {
        let mut p = two_by_two();
        p.inequalities.push(LinearRow::new(vec![(0, -1.0)], 0.25));
        p.equalities.push(LinearRow::new(vec![(0, 2.0)], 0.5));
        p.kernel.push(vec![(0, 1.0), (1, -1.0)]);
        let back = SdpProblem::parse_dump(&p.dump()).unwrap();
        assert_eq!(back, p);
        assert!(SdpProblem::parse_dump("").is_err());
        assert!(SdpProblem::parse_dump("a 0 0 0 1").is_err());
        assert!(SdpProblem::parse_dump("sdp 2 1\nc 3 1").is_err());
    }

    #[test]
    fn validation() {
        let mut p = two_by_two();
        assert!(p.validate(350).is_ok());
        assert!(matches!(p.validate(1), Err(SdpError::TooLarge { .. })));
        p.matrices[0].push(0, 2, 1.0);
        assert!(matches!(p.validate(350), Err(SdpError::EntryOutOfRange { .. })));
        let mut p = two_by_two();
        p.inequalities.push(LinearRow::new(vec![(3, 1.0)], 0.0));
        assert!(matches!(p.validate(350), Err(SdpError::VariableOutOfRange { .. })));
        let mut p = two_by_two();
        p.objective.push(0.0);
        assert!(matches!(p.validate(350), Err(SdpError::ObjectiveLength { .. })));
    }

    #[test]
    fn pencil_and_rows() {
        let p = two_by_two();
        let g = p.pencil(&[0.5]);
        assert_eq!(g[(0, 1)], 0.5);
        assert_eq!(g[(1, 0)], 0.5);
        assert_eq!(g[(1, 1)], 1.0);
        assert!((min_eigenvalue(&g) - 0.5).abs() < 1e-12);
    }
}
