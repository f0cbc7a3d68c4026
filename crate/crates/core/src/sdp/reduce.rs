//! Facial reduction from declared kernel vectors, then elimination of all
//! linear equalities by substitution.
//!
//! Bring the kernel vectors to reduced echelon form with pivot rows `p_k`.
//! Congruence by the identity with column `p_k` replaced by `u_k` clears row
//! and column `p_k` whenever `G u_k = 0`, and leaves every other entry of `G`
//! untouched. So `G` is PSD iff `G u_k = 0` for all `k` and `G` with the pivot
//! rows and columns deleted is PSD.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::{LinearRow, SdpProblem, SymMatrix};

const TINY: f64 = 1e-11;
const INCONSISTENT: f64 = 1e-8;

/// A problem in the surviving variables, and how to recover the rest.
pub(super) struct Reduction {
    pub problem: SdpProblem,
    /// Original index of each reduced variable.
    free: Vec<usize>,
    /// `v[var] = rhs - sum coeffs . v` over free variables.
    solved: Vec<(usize, f64, Vec<(usize, f64)>)>,
    original_count: usize,
}

impl Reduction {
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.original_count];
        for (k, &orig) in self.free.iter().enumerate() {
            v[orig] = reduced[k];
        }
        for (var, rhs, coeffs) in &self.solved {
            v[*var] = rhs - coeffs.iter().map(|&(f, c)| c * v[f]).sum::<f64>();
        }
        v
    }
}

/// Sparse equation `coeffs . v = rhs`.
#[derive(Clone)]
struct Equation {
    coeffs: BTreeMap<usize, f64>,
    rhs: f64,
}

impl Equation {
    fn axpy(&mut self, f: f64, other: &Equation) {
        for (&k, &c) in &other.coeffs {
            *self.coeffs.entry(k).or_insert(0.0) += f * c;
        }
        self.rhs += f * other.rhs;
    }

    fn prune(&mut self) {
        let scale = self.coeffs.values().fold(0.0f64, |m, c| m.max(c.abs()));
        self.coeffs.retain(|_, c| c.abs() > TINY * scale.max(1.0));
    }
}

/// Echelon basis of a growing set of equations, kept fully reduced: each
/// stored equation contains its own pivot and no other.
struct Basis {
    rows: Vec<(usize, Equation)>,
    pivot_of: BTreeMap<usize, usize>,
}

impl Basis {
    fn reduce(&self, e: &mut Equation) {
        let hits: Vec<(usize, f64)> = e
            .coeffs
            .iter()
            .filter_map(|(k, &c)| self.pivot_of.get(k).map(|&r| (r, c)))
            .collect();
        for (r, c) in hits {
            e.axpy(-c, &self.rows[r].1);
            e.coeffs.remove(&self.rows[r].0);
        }
        e.prune();
    }

    /// `false` when the equation contradicts the basis.
    fn insert(&mut self, mut e: Equation, cost: &impl Fn(usize) -> usize) -> bool {
        self.reduce(&mut e);
        if e.coeffs.is_empty() {
            return e.rhs.abs() <= INCONSISTENT;
        }
        let big = e.coeffs.values().fold(0.0f64, |m, c| m.max(c.abs()));
        let (&var, &c) = e
            .coeffs
            .iter()
            .filter(|(_, c)| c.abs() >= 0.5 * big)
            .min_by_key(|(&k, _)| cost(k))
            .expect("nonempty");
        for x in e.coeffs.values_mut() {
            *x /= c;
        }
        e.rhs /= c;
        e.coeffs.insert(var, 1.0);
        for (_, row) in self.rows.iter_mut() {
            if let Some(f) = row.coeffs.remove(&var) {
                row.axpy(-f, &e);
                row.coeffs.remove(&var);
                row.prune();
            }
        }
        self.pivot_of.insert(var, self.rows.len());
        self.rows.push((var, e));
        true
    }
}

/// Reduced echelon basis of accepted kernel vectors, dense, kept fully
/// reduced: `u_k[p_j] = [k == j]`.
struct KernelBasis {
    rows: Vec<(usize, Vec<f64>)>,
}

impl KernelBasis {
    /// Component of `u` outside the span, `None` if inside.
    fn residual(&self, u: &[f64]) -> Option<Vec<f64>> {
        let mut r = u.to_vec();
        for (p, row) in &self.rows {
            let f = r[*p];
            if f != 0.0 {
                for (x, &y) in r.iter_mut().zip(row) {
                    *x -= f * y;
                }
            }
        }
        let big = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        (big > 1e-9).then_some(r)
    }

    fn insert(&mut self, mut r: Vec<f64>) {
        let (p, _) = r
            .iter()
            .enumerate()
            .rev()
            .fold((0, 0.0f64), |(bp, bv), (i, &x)| if x.abs() > bv * 1.5 { (i, x.abs()) } else { (bp, bv) });
        let f = r[p];
        for x in r.iter_mut() {
            *x /= f;
        }
        for (_, row) in self.rows.iter_mut() {
            let g = row[p];
            if g != 0.0 {
                for (x, &y) in row.iter_mut().zip(&r) {
                    *x -= g * y;
                }
            }
        }
        self.rows.push((p, r));
    }
}

/// Pencil entries by position: `(variable, coefficient)`, `None` for `A0`.
type Positions = HashMap<(usize, usize), Vec<(Option<usize>, f64)>>;

fn positions(p: &SdpProblem) -> Positions {
    let mut map: Positions = HashMap::new();
    for &(r, c, a) in &p.a0.entries {
        map.entry((r, c)).or_default().push((None, a));
    }
    for (k, mat) in p.matrices.iter().enumerate() {
        for &(r, c, a) in &mat.entries {
            map.entry((r, c)).or_default().push((Some(k), a));
        }
    }
    map
}

/// `u' G(v) u = 0` written as an equation.
fn quadratic_form(u: &[(usize, f64)], pos: &Positions) -> Equation {
    let mut e = Equation {
        coeffs: BTreeMap::new(),
        rhs: 0.0,
    };
    for &(a, x) in u {
        for &(b, y) in u {
            let key = if a <= b { (a, b) } else { (b, a) };
            for &(var, coef) in pos.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                match var {
                    None => e.rhs -= x * y * coef,
                    Some(k) => *e.coeffs.entry(k).or_insert(0.0) += x * y * coef,
                }
            }
        }
    }
    e
}

/// The equations `G(v) u = 0`, one per row.
fn annihilation(p: &SdpProblem, u: &[f64]) -> Vec<Equation> {
    let mut eqs = vec![
        Equation {
            coeffs: BTreeMap::new(),
            rhs: 0.0,
        };
        p.size
    ];
    let mut each = |mat: &SymMatrix, var: Option<usize>| {
        for &(r, c, a) in &mat.entries {
            for (row, x) in [(r, u[c]), (c, if r != c { u[r] } else { 0.0 })] {
                if x != 0.0 {
                    match var {
                        None => eqs[row].rhs -= a * x,
                        Some(k) => *eqs[row].coeffs.entry(k).or_insert(0.0) += a * x,
                    }
                }
            }
        }
    };
    each(&p.a0, None);
    for (k, mat) in p.matrices.iter().enumerate() {
        each(mat, Some(k));
    }
    eqs
}

/// `None` when the equalities are inconsistent.
///
/// Candidates are the declared kernel vectors, unit vectors and differences
/// of two unit vectors. A candidate is accepted once its quadratic form
/// vanishes on the affine hull cut out by the equalities gathered so far;
/// PSD then forces `G u = 0`, which joins the equalities. Repeat to a fixed
/// point.
pub(super) fn reduce(p: &SdpProblem) -> Option<Reduction> {
    let s = p.size;
    let m = p.variable_count();
    let pos = positions(p);
    let mut basis = Basis {
        rows: Vec::new(),
        pivot_of: BTreeMap::new(),
    };
    // Pivot preference is settled later; here any variable will do.
    let any = |_: usize| 0usize;
    for row in &p.equalities {
        let mut e = Equation {
            coeffs: BTreeMap::new(),
            rhs: row.bound,
        };
        for &(k, a) in &row.coeffs {
            *e.coeffs.entry(k).or_insert(0.0) += a;
        }
        if !basis.insert(e, &any) {
            return None;
        }
    }

    let mut candidates: Vec<Vec<(usize, f64)>> = p.kernel.clone();
    candidates.extend((0..s).map(|a| vec![(a, 1.0)]));
    for a in 0..s {
        candidates.extend((a + 1..s).map(|b| vec![(a, 1.0), (b, -1.0)]));
    }
    let mut kernel = KernelBasis { rows: Vec::new() };
    let mut accepted_eqs: Vec<Equation> = Vec::new();
    loop {
        let before = kernel.rows.len();
        for u in &candidates {
            let mut dense = vec![0.0; s];
            for &(r, a) in u {
                dense[r] += a;
            }
            let Some(res) = kernel.residual(&dense) else { continue };
            let mut q = quadratic_form(u, &pos);
            basis.reduce(&mut q);
            if !q.coeffs.is_empty() || q.rhs.abs() > INCONSISTENT {
                continue;
            }
            kernel.insert(res);
            for e in annihilation(p, &dense) {
                accepted_eqs.push(e.clone());
                if !basis.insert(e, &any) {
                    return None;
                }
            }
        }
        if kernel.rows.len() == before {
            break;
        }
    }
    let dropped: HashSet<usize> = kernel.rows.iter().map(|(c, _)| *c).collect();
    let mut keep = vec![usize::MAX; s];
    let mut next = 0;
    for (i, slot) in keep.iter_mut().enumerate() {
        if !dropped.contains(&i) {
            *slot = next;
            next += 1;
        }
    }
    let size = next;

    // Rebuild the equation basis, now preferring pivots on variables that
    // keep few pencil entries, so substitution adds little fill.
    let surviving = |mat: &SymMatrix| {
        mat.entries
            .iter()
            .filter(|&&(r, c, _)| keep[r] != usize::MAX && keep[c] != usize::MAX)
            .count()
    };
    let weight: Vec<usize> = p.matrices.iter().map(surviving).collect();
    let cost = |k: usize| weight[k];
    let mut basis = Basis {
        rows: Vec::new(),
        pivot_of: BTreeMap::new(),
    };
    for row in &p.equalities {
        let mut e = Equation {
            coeffs: BTreeMap::new(),
            rhs: row.bound,
        };
        for &(k, a) in &row.coeffs {
            *e.coeffs.entry(k).or_insert(0.0) += a;
        }
        if !basis.insert(e, &cost) {
            return None;
        }
    }
    for e in accepted_eqs {
        if !basis.insert(e, &cost) {
            return None;
        }
    }

    let mut new_index = vec![usize::MAX; m];
    let mut free = Vec::new();
    for (k, slot) in new_index.iter_mut().enumerate() {
        if !basis.pivot_of.contains_key(&k) {
            *slot = free.len();
            free.push(k);
        }
    }
    let solved: Vec<(usize, f64, Vec<(usize, f64)>)> = basis
        .rows
        .iter()
        .map(|(var, e)| {
            let rest = e.coeffs.iter().filter(|(&k, _)| k != *var).map(|(&k, &c)| (k, c)).collect();
            (*var, e.rhs, rest)
        })
        .collect();
    let by_var: BTreeMap<usize, usize> = solved.iter().enumerate().map(|(i, s)| (s.0, i)).collect();

    let mut a0 = SymMatrix::default();
    let mut mats = vec![SymMatrix::default(); free.len()];
    let kept = |r: usize, c: usize| (keep[r] != usize::MAX && keep[c] != usize::MAX).then(|| (keep[r], keep[c]));
    for &(r, c, a) in &p.a0.entries {
        if let Some((r, c)) = kept(r, c) {
            a0.push(r, c, a);
        }
    }
    for (k, mat) in p.matrices.iter().enumerate() {
        for &(r, c, a) in &mat.entries {
            let Some((r, c)) = kept(r, c) else { continue };
            match by_var.get(&k) {
                None => mats[new_index[k]].push(r, c, a),
                Some(&i) => {
                    let (_, rhs, rest) = &solved[i];
                    a0.push(r, c, a * rhs);
                    for &(f, cf) in rest {
                        mats[new_index[f]].push(r, c, -a * cf);
                    }
                }
            }
        }
    }
    for mat in std::iter::once(&mut a0).chain(mats.iter_mut()) {
        compact(mat);
    }

    let mut objective = vec![0.0; free.len()];
    for (k, &w) in p.objective.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        match by_var.get(&k) {
            None => objective[new_index[k]] += w,
            Some(&i) => {
                for &(f, cf) in &solved[i].2 {
                    objective[new_index[f]] -= w * cf;
                }
            }
        }
    }

    let mut inequalities = Vec::new();
    for row in &p.inequalities {
        let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
        let mut bound = row.bound;
        for &(k, a) in &row.coeffs {
            match by_var.get(&k) {
                None => *coeffs.entry(new_index[k]).or_insert(0.0) += a,
                Some(&i) => {
                    let (_, rhs, rest) = &solved[i];
                    bound -= a * rhs;
                    for &(f, cf) in rest {
                        *coeffs.entry(new_index[f]).or_insert(0.0) -= a * cf;
                    }
                }
            }
        }
        let scale = coeffs.values().fold(0.0f64, |m, c| m.max(c.abs()));
        coeffs.retain(|_, c| c.abs() > TINY * scale.max(1.0));
        if coeffs.is_empty() {
            if bound < -INCONSISTENT {
                return None;
            }
            continue;
        }
        inequalities.push(LinearRow::new(coeffs.into_iter().collect(), bound));
    }

    Some(Reduction {
        problem: SdpProblem {
            size,
            a0,
            matrices: mats,
            inequalities,
            equalities: Vec::new(),
            objective,
            kernel: Vec::new(),
        },
        free,
        solved,
        original_count: m,
    })
}

/// Merge repeated positions and drop cancelled ones.
fn compact(mat: &mut SymMatrix) {
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for &(r, c, a) in &mat.entries {
        *acc.entry((r, c)).or_insert(0.0) += a;
    }
    mat.entries = acc.into_iter().filter(|(_, a)| a.abs() > TINY).map(|((r, c), a)| (r, c, a)).collect();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_basis_has_unit_pivots() {
        let dense = |u: &[(usize, f64)]| {
            let mut d = vec![0.0; 4];
            for &(r, a) in u {
                d[r] = a;
            }
            d
        };
        let vs = [
            dense(&[(0, 1.0), (1, -1.0), (2, -1.0)]),
            dense(&[(0, 1.0), (1, -1.0), (3, -1.0)]),
            dense(&[(0, 2.0), (1, -2.0), (2, -1.0), (3, -1.0)]),
            dense(&[(0, 1.0), (2, -1.0)]),
        ];
        let mut k = KernelBasis { rows: Vec::new() };
        for v in &vs {
            if let Some(r) = k.residual(v) {
                k.insert(r);
            }
        }
        assert_eq!(k.rows.len(), 3);
        for (i, (_, u)) in k.rows.iter().enumerate() {
            for (j, (q, _)) in k.rows.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u[*q] - want).abs() < 1e-12);
            }
        }
        assert!(vs.iter().all(|v| k.residual(v).is_none()));
    }

    #[test]
    fn hidden_kernel_is_found() {
        // [[1, t], [t, a]] with a = 0 pins t = 0 and leaves a 1x1 block.
        let mut mats = vec![SymMatrix::default(); 2];
        mats[0].push(0, 1, 1.0);
        mats[1].push(1, 1, 1.0);
        let p = SdpProblem {
            size: 2,
            a0: SymMatrix { entries: vec![(0, 0, 1.0)] },
            matrices: mats,
            equalities: vec![LinearRow::new(vec![(1, 1.0)], 0.0)],
            objective: vec![1.0, 0.0],
            kernel: vec![vec![(1, 1.0)]],
            ..Default::default()
        };
        let r = reduce(&p).unwrap();
        assert_eq!(r.problem.size, 1);
        assert_eq!(r.problem.variable_count(), 0);
        assert_eq!(r.expand(&[]), vec![0.0, 0.0]);
    }

    #[test]
    fn redundant_and_contradictory_equalities() {
        let mut p = SdpProblem {
            size: 1,
            a0: SymMatrix { entries: vec![(0, 0, 1.0)] },
            matrices: vec![SymMatrix::default(); 3],
            objective: vec![1.0, 1.0, 0.0],
            equalities: vec![
                LinearRow::new(vec![(0, 1.0), (1, 1.0)], 1.0),
                LinearRow::new(vec![(0, 2.0), (1, 2.0)], 2.0),
            ],
            inequalities: vec![LinearRow::new(vec![(0, 1.0), (1, 1.0)], 3.0)],
            ..Default::default()
        };
        let r = reduce(&p).unwrap();
        assert_eq!(r.problem.variable_count(), 2);
        assert!(r.problem.inequalities.is_empty());
        let v = r.expand(&[0.25, 0.0]);
        assert!((v[0] + v[1] - 1.0).abs() < 1e-12);
        p.equalities.push(LinearRow::new(vec![(0, 1.0), (1, 1.0)], 2.0));
        assert!(reduce(&p).is_none());
    }
}
